"""Synthetic overhead-press keypoint clips with class-coded deviations.

A desk-scale stand-in for real recordings: wrist and elbow vertical
traces follow smooth raised-cosine repetition cycles plus Gaussian
noise, and each execution class deviates in a magnitude-coded way:

* ``N``  - symmetric, full range;
* ``A``  - left/right wrist amplitude ratio 0.7 (lopsided bar);
* ``R``  - both amplitudes scaled 0.6 with a raised trough (incomplete
  descent);
* ``Arch`` - hip-x drift added during the lift phase (back-arch proxy).

The vertical axis is oriented so the apex of each repetition is the
channel's maximum, matching the default segmentation convention. This is
a test fixture, not a biomechanical model; deviation magnitudes are
chosen so classes are separable by magnitude-sensitive features but not
by a single threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bodyparts import NUM_BODY_PARTS, PART_INDEX
from .errors import InvalidParamsError
from .pose import KeypointFrame, KeypointSequence, serialize_frame

CLASS_LABELS = ("N", "A", "R", "Arch")

# Resting skeleton, pixels, origin top-left, subject centered in a 720p frame.
_BASE_POSE = {
    "nose": (360.0, 160.0),
    "neck": (360.0, 205.0),
    "right_shoulder": (290.0, 215.0),
    "right_elbow": (250.0, 280.0),
    "right_wrist": (240.0, 310.0),
    "left_shoulder": (430.0, 215.0),
    "left_elbow": (470.0, 280.0),
    "left_wrist": (480.0, 310.0),
    "mid_hip": (360.0, 430.0),
    "right_hip": (320.0, 430.0),
    "right_knee": (315.0, 560.0),
    "right_ankle": (312.0, 670.0),
    "left_hip": (400.0, 430.0),
    "left_knee": (405.0, 560.0),
    "left_ankle": (408.0, 670.0),
    "right_eye": (345.0, 150.0),
    "left_eye": (375.0, 150.0),
    "right_ear": (330.0, 162.0),
    "left_ear": (390.0, 162.0),
    "left_big_toe": (415.0, 695.0),
    "left_small_toe": (425.0, 692.0),
    "left_heel": (402.0, 688.0),
    "right_big_toe": (305.0, 695.0),
    "right_small_toe": (295.0, 692.0),
    "right_heel": (318.0, 688.0),
}

_ELBOW_AMP = 0.55     # elbows travel less than wrists
_R_TROUGH = 0.25      # raised trough for reduced-range clips, fraction of amplitude
_A_RATIO = 0.7        # left/right amplitude ratio for asymmetric clips
_R_SCALE = 0.6        # amplitude scale for reduced-range clips
_ARCH_DRIFT = 0.18    # hip-x drift amplitude, fraction of amplitude
_NOISE_RHO = 0.9      # AR(1) coefficient of the correlated jitter component


@dataclass(frozen=True)
class SynthConfig:
    """Corpus shape and noise levels; everything derives from ``seed``.

    Each participant performs one clip per class at their own tempo
    (rep period jittered +/-20% per participant), so class balance is
    exact and participant-grouped splits stay balanced.
    """

    participants: int = 10
    reps_per_clip: int = 10
    fps: float = 30.0
    rep_period_s: float = 3.0
    amplitude_px: float = 80.0
    noise_sd_px: float = 4.5
    lead_in_s: float = 0.4
    seed: int = 0

    def __post_init__(self):
        for name in ("participants", "reps_per_clip", "fps", "rep_period_s", "amplitude_px"):
            if getattr(self, name) <= 0:
                raise InvalidParamsError(f"{name} must be positive")
        if self.noise_sd_px < 0 or self.lead_in_s < 0:
            raise InvalidParamsError("noise_sd_px and lead_in_s must be >= 0")


@dataclass(frozen=True)
class ParticipantProfile:
    participant_id: str
    index: int
    tempo_scale: float
    amp_scale: float
    offset_x: float
    offset_y: float


def participant_profiles(config: SynthConfig) -> list[ParticipantProfile]:
    rng = np.random.default_rng([config.seed, 0x50_52_4F])
    profiles = []
    for i in range(config.participants):
        profiles.append(
            ParticipantProfile(
                participant_id=f"p{i:03d}",
                index=i,
                tempo_scale=float(rng.uniform(0.8, 1.2)),
                amp_scale=float(rng.uniform(0.9, 1.1)),
                offset_x=float(rng.uniform(-20.0, 20.0)),
                offset_y=float(rng.uniform(-15.0, 15.0)),
            )
        )
    return profiles


def _jitter(rng: np.random.Generator, shape: tuple, sd: float) -> np.ndarray:
    """Keypoint jitter: equal parts white and AR(1)-correlated Gaussian noise.

    Pose-estimator error drifts across frames rather than flickering
    independently, so half of the variance follows a stationary AR(1)
    process along the time axis.
    """
    if sd == 0.0:
        return np.zeros(shape)
    white = rng.normal(0.0, 1.0, shape)
    w = rng.normal(0.0, 1.0, shape)
    ar = np.empty(shape)
    ar[0] = w[0]
    scale = np.sqrt(1.0 - _NOISE_RHO**2)
    for t in range(1, shape[0]):
        ar[t] = _NOISE_RHO * ar[t - 1] + scale * w[t]
    return sd * np.sqrt(0.5) * (white + ar)


def _rep_phase(
    n_frames: int, lead_frames: int, rep_frames: np.ndarray
) -> np.ndarray:
    """Raised-cosine activation per frame: 0 at rest, 1 at each rep apex."""
    bump = np.zeros(n_frames)
    starts = lead_frames + np.concatenate([[0.0], np.cumsum(rep_frames)])
    t = np.arange(n_frames, dtype=np.float64)
    for i, width in enumerate(rep_frames):
        inside = (t >= starts[i]) & (t < starts[i + 1])
        u = (t[inside] - starts[i]) / width
        bump[inside] = 0.5 * (1.0 - np.cos(2.0 * np.pi * u))
    return bump


def generate_clip(
    class_label: str, profile: ParticipantProfile, config: SynthConfig
) -> KeypointSequence:
    """One clip of ``reps_per_clip`` repetitions for one participant and class."""
    if class_label not in CLASS_LABELS:
        raise InvalidParamsError(f"class_label must be one of {CLASS_LABELS}")
    cls = CLASS_LABELS.index(class_label)
    rng = np.random.default_rng([config.seed, profile.index, cls, 0xC11B])

    period = config.fps * config.rep_period_s * profile.tempo_scale
    rep_frames = period * rng.uniform(0.95, 1.05, config.reps_per_clip)
    lead = int(round(config.fps * config.lead_in_s))
    n_frames = lead + int(np.ceil(rep_frames.sum())) + lead
    bump = _rep_phase(n_frames, lead, rep_frames)

    amp = config.amplitude_px * profile.amp_scale
    amp_left = amp_right = amp
    trough = 0.0
    arch = 0.0
    if class_label == "A":
        amp_left = _A_RATIO * amp
    elif class_label == "R":
        amp_left = amp_right = _R_SCALE * amp
        trough = _R_TROUGH * config.amplitude_px
    elif class_label == "Arch":
        arch = _ARCH_DRIFT * config.amplitude_px

    xy = np.empty((n_frames, NUM_BODY_PARTS, 2))
    for name, (bx, by) in _BASE_POSE.items():
        xy[:, PART_INDEX[name], 0] = bx + profile.offset_x
        xy[:, PART_INDEX[name], 1] = by + profile.offset_y

    def lift(part: str, amplitude: float, axis: int = 1, offset: float = 0.0):
        xy[:, PART_INDEX[part], axis] += offset + amplitude * bump

    lift("left_wrist", amp_left, offset=trough)
    lift("right_wrist", amp_right, offset=trough)
    lift("left_elbow", _ELBOW_AMP * amp_left, offset=_ELBOW_AMP * trough)
    lift("right_elbow", _ELBOW_AMP * amp_right, offset=_ELBOW_AMP * trough)
    if arch:
        for part in ("left_hip", "right_hip", "mid_hip"):
            lift(part, arch, axis=0)

    xy += _jitter(rng, xy.shape, config.noise_sd_px)
    confidence = rng.uniform(0.8, 1.0, (n_frames, NUM_BODY_PARTS))

    return KeypointSequence(
        clip_id=f"{profile.participant_id}_{class_label}",
        participant_id=profile.participant_id,
        class_label=class_label,
        xy=xy,
        confidence=confidence,
        frame_indices=np.arange(n_frames),
        fps=config.fps,
    )


def generate_dataset(config: SynthConfig) -> tuple[list[KeypointSequence], list[dict]]:
    """All clips (one per participant per class) plus manifest rows.

    Deterministic from the config seed; classes are exactly balanced.
    """
    clips = []
    manifest = []
    for profile in participant_profiles(config):
        for label in CLASS_LABELS:
            seq = generate_clip(label, profile, config)
            clips.append(seq)
            manifest.append(
                {
                    "clip_id": seq.clip_id,
                    "participant_id": seq.participant_id,
                    "class_label": label,
                    "path": seq.clip_id,
                    "fps": config.fps,
                }
            )
    return clips, manifest


def write_corpus(out_dir: str | Path, config: SynthConfig) -> Path:
    """Write per-frame keypoint JSON files and a manifest.csv.

    Output is byte-compatible with the ingest module and byte-identical
    across runs with the same config. Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    clips, manifest = generate_dataset(config)
    for seq in clips:
        clip_dir = out_dir / seq.clip_id
        clip_dir.mkdir(exist_ok=True)
        for i in range(seq.n_frames):
            points = np.column_stack([seq.xy[i], seq.confidence[i]])
            frame = KeypointFrame(index=i, points=points)
            path = clip_dir / f"{seq.clip_id}_{i:012d}_keypoints.json"
            path.write_bytes(serialize_frame(frame))
    manifest_path = out_dir / "manifest.csv"
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["clip_id", "participant_id", "class_label", "path", "fps"]
        )
        writer.writeheader()
        writer.writerows(manifest)
    return manifest_path
