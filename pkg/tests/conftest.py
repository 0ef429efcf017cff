import pytest

from repclf import PipelineConfig, SegmentationParams, SynthConfig, build_dataset, generate_dataset


@pytest.fixture(scope="session")
def small_corpus():
    """Four participants, all four classes, 10 reps per clip."""
    config = SynthConfig(participants=4, seed=0)
    clips, manifest = generate_dataset(config)
    return clips, manifest


@pytest.fixture(scope="session")
def small_config():
    return PipelineConfig(
        num_kernels=300, segmentation=SegmentationParams(expected_reps=10)
    )


@pytest.fixture(scope="session")
def small_dataset(small_corpus, small_config):
    clips, _ = small_corpus
    return build_dataset(clips, small_config, log=None)
