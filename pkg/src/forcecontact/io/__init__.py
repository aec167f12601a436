"""File formats and configuration for the annotation pipeline."""

from .config import DEFAULT_CONFIG, PipelineConfig, load_config
from .fras import read_fras, write_fras
from .manifest import SessionManifest

__all__ = [
    "DEFAULT_CONFIG",
    "PipelineConfig",
    "load_config",
    "read_fras",
    "write_fras",
    "SessionManifest",
]
