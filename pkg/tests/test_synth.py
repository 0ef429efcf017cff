from pathlib import Path

import numpy as np
import pytest

from repclf import (
    ChannelSpec,
    PipelineConfig,
    SegmentationParams,
    SynthConfig,
    build_dataset,
    clip_to_samples,
    detect_peaks,
    generate_clip,
    generate_dataset,
    quality_gate,
    smooth_savgol,
    write_corpus,
)
from repclf.bodyparts import PART_INDEX, UPPER_BODY_PARTS
from repclf.errors import InvalidParamsError
from repclf.synth import CLASS_LABELS, participant_profiles


def wrist_y(seq, side):
    return seq.xy[:, PART_INDEX[f"{side}_wrist"], 1]


@pytest.fixture(scope="module")
def config():
    return SynthConfig(participants=3, seed=42)


@pytest.fixture(scope="module")
def profile(config):
    return participant_profiles(config)[0]


class TestGenerateClip:
    def test_normal_clip_has_reps_per_clip_peaks(self, config, profile):
        seq = generate_clip("N", profile, config)
        smoothed = smooth_savgol(wrist_y(seq, "left"), 11, 3)
        peaks = detect_peaks(smoothed, min_distance=30, min_prominence=0.3)
        assert len(peaks) == config.reps_per_clip

    def test_asymmetric_clip_has_unequal_wrist_ranges(self, config, profile):
        seq_a = generate_clip("A", profile, config)
        seq_n = generate_clip("N", profile, config)
        gap_a = abs(np.ptp(wrist_y(seq_a, "left")) - np.ptp(wrist_y(seq_a, "right")))
        gap_n = abs(np.ptp(wrist_y(seq_n, "left")) - np.ptp(wrist_y(seq_n, "right")))
        assert gap_a > 0.2 * config.amplitude_px
        assert gap_n < 0.1 * config.amplitude_px

    def test_reduced_range_ratio_near_0_6(self, config, profile):
        """Range ratio recomputed from the generated arrays."""
        seq_r = generate_clip("R", profile, config)
        seq_n = generate_clip("N", profile, config)
        for side in ("left", "right"):
            ratio = np.ptp(wrist_y(seq_r, side)) / np.ptp(wrist_y(seq_n, side))
            assert 0.5 < ratio < 0.72

    def test_arch_clip_hips_sway_with_the_lift(self, config, profile):
        def lift_hip_correlation(seq):
            hip_x = seq.xy[:, PART_INDEX["mid_hip"], 0]
            return np.corrcoef(hip_x, wrist_y(seq, "left"))[0, 1]

        assert lift_hip_correlation(generate_clip("Arch", profile, config)) > 0.5
        assert abs(lift_hip_correlation(generate_clip("N", profile, config))) < 0.2

    def test_confidences_high(self, config, profile):
        seq = generate_clip("N", profile, config)
        assert seq.confidence.min() >= 0.8
        assert seq.confidence.max() <= 1.0

    def test_unknown_label(self, config, profile):
        with pytest.raises(InvalidParamsError):
            generate_clip("XX", profile, config)


class TestGenerateDataset:
    def test_balance_and_ids(self, config):
        clips, manifest = generate_dataset(config)
        assert len(clips) == config.participants * 4
        labels = [c.class_label for c in clips]
        for label in CLASS_LABELS:
            assert labels.count(label) == config.participants
        assert len({c.clip_id for c in clips}) == len(clips)
        assert len(manifest) == len(clips)

    def test_deterministic(self, config):
        clips1, _ = generate_dataset(config)
        clips2, _ = generate_dataset(config)
        for c1, c2 in zip(clips1, clips2):
            np.testing.assert_array_equal(c1.xy, c2.xy)
            np.testing.assert_array_equal(c1.confidence, c2.confidence)

    def test_round_trips_through_ingest_and_quality(self, config):
        clips, _ = generate_dataset(config)
        spec = ChannelSpec(parts=UPPER_BODY_PARTS)
        pipeline = PipelineConfig(segmentation=SegmentationParams(expected_reps=10))
        for seq in clips:
            assert quality_gate(seq, spec).passed
            result = clip_to_samples(seq, pipeline)
            assert not result.rep_count_mismatch
        ds = build_dataset(clips, pipeline, log=None)
        assert ds.n_samples == len(clips) * config.reps_per_clip

    def test_five_participants_yield_200_repetitions(self):
        config = SynthConfig(participants=5, seed=11)
        clips, _ = generate_dataset(config)
        pipeline = PipelineConfig()
        total = sum(len(clip_to_samples(seq, pipeline).samples) for seq in clips)
        assert total == 200  # 5 participants x 4 classes x 10 reps, none dropped

    def test_noiseless_segmentation_recovers_reps_for_every_class(self):
        config = SynthConfig(participants=2, noise_sd_px=0.0, seed=7)
        pipeline = PipelineConfig()
        for profile in participant_profiles(config):
            for label in CLASS_LABELS:
                seq = generate_clip(label, profile, config)
                result = clip_to_samples(seq, pipeline)
                assert len(result.samples) == config.reps_per_clip, (label, profile)


class TestWriteCorpus:
    def test_same_seed_byte_identical(self, tmp_path):
        config = SynthConfig(participants=1, reps_per_clip=3, seed=5)
        dir1 = tmp_path / "a"
        dir2 = tmp_path / "b"
        write_corpus(dir1, config)
        write_corpus(dir2, config)
        files1 = sorted(p.relative_to(dir1) for p in dir1.rglob("*") if p.is_file())
        files2 = sorted(p.relative_to(dir2) for p in dir2.rglob("*") if p.is_file())
        assert files1 == files2
        for rel in files1:
            assert (dir1 / rel).read_bytes() == (dir2 / rel).read_bytes(), rel

    def test_manifest_lists_every_clip(self, tmp_path):
        config = SynthConfig(participants=2, reps_per_clip=3, seed=1)
        manifest = write_corpus(tmp_path / "corpus", config)
        lines = Path(manifest).read_text().strip().splitlines()
        assert len(lines) == 1 + 2 * 4  # header + clips
