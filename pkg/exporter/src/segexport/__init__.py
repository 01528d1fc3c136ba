"""Bridge from any segmentation model to the label-quality scoring formats."""

from .config import ExportConfig, ImageRecord, load_config
from .errors import ConfigError, ExportError, ExportShapeError
from .export import assign_folds, export_predictions
from .models import ArrayDirModel, TorchScriptModel, UniformModel, build_model

__version__ = "0.1.0"

__all__ = [
    "ArrayDirModel",
    "ConfigError",
    "ExportConfig",
    "ExportError",
    "ExportShapeError",
    "ImageRecord",
    "TorchScriptModel",
    "UniformModel",
    "assign_folds",
    "build_model",
    "export_predictions",
    "load_config",
]
