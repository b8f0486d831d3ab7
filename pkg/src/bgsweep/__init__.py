"""Background subtraction on compressed low-resolution grayscale frames.

ViBe and Stauffer-Grimson GMM pixel models, resolution-ratio resampling,
changedetection.net style scoring and a sweep harness that measures how
accuracy and segmentation time trade off as frames are shrunk.
"""

from bgsweep.imaging import dims_for_ratio, downsample, to_grayscale, upsample_mask
from bgsweep.vibe import VibeModel, VibeParams, vibe_init, vibe_process
from bgsweep.gmm import GmmModel, GmmParams, gmm_init, gmm_process
from bgsweep.evaluation import (
    UNDEFINED,
    ConfusionCounts,
    accumulate,
    compare_masks,
    f_measure,
    precision,
    recall,
)
from bgsweep.datasets import SequenceSpec, SyntheticConfig, generate_synthetic, load_sequence
from bgsweep.bench import RatioRecord, SweepConfig, emit_csv, run_single, run_sweep

__version__ = "0.1.0"
