"""trainkit: token-feature dumping and two-class segmenter fine-tuning.

Companion package to the free-space segmentation pipeline. All communication
with it is file-based: NPY feature dumps it can ingest, and the binary mask
PNG format both sides read and write.
"""

__version__ = "0.1.0"

from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    PairingError,
    TrainkitError,
)
from .train import TrainRunConfig

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DataError",
    "PairingError",
    "TrainkitError",
    "TrainRunConfig",
    "__version__",
]
