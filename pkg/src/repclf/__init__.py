"""Exercise repetition classification from pose-estimation keypoint series.

Pipeline: keypoint JSON -> multivariate pixel time series -> repetition
segmentation -> fixed-length resampling -> convolutional-kernel features
-> ridge classifier with closed-form leave-one-out model selection.
"""

from .bodyparts import BODY_PARTS, DEFAULT_ANCHOR_PARTS, PART_INDEX, UPPER_BODY_PARTS
from .dataset import Dataset, RepetitionSample
from .errors import (
    DataError,
    InvalidParamsError,
    NumericalError,
    PipelineError,
)
from .evaluation import EvalReport, SplitPlan, confusion_matrix, evaluate, grouped_split
from .minirocket import MiniRocketFeatures, minirocket_fit, minirocket_transform
from .modelio import load_dataset, load_model, save_dataset, save_model
from .pipeline import (
    PipelineConfig,
    RepetitionClassifier,
    TrainedModel,
    build_dataset,
    clip_to_samples,
    predict_clip,
    train,
)
from .pose import (
    ChannelSpec,
    KeypointFrame,
    KeypointSequence,
    QualityReport,
    extract_series,
    load_sequence,
    parse_frame,
    quality_gate,
    read_manifest,
    serialize_frame,
)
from .prep import (
    SegmentationParams,
    detect_peaks,
    resample_cubic,
    segment_equal,
    segment_repetitions,
    select_channels_ecp,
    smooth_savgol,
    znormalize,
)
from .ridge import ColumnScaler, RidgeClassifierLOO, apply_scaler, fit_scaler, loo_errors
from .rocket import KernelBank, RocketFeatures, apply_kernel, generate_kernels, rocket_transform
from .series import MultivariateSeries
from .synth import CLASS_LABELS, SynthConfig, generate_clip, generate_dataset, write_corpus

__version__ = "0.1.0"
