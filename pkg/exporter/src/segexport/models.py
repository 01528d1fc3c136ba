"""Model adapters: anything that maps an image to an (h, w, K) array.

Adapters exist so any segmentation stack can plug in: in-process callables,
directories of precomputed raw outputs, or TorchScript modules.  An adapter
returns either probabilities or logits; the exporter normalizes according to
the configured activation.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import ConfigError


class Predictor(Protocol):
    def predict(self, image_id: str, image_path: str,
                expected_shape: tuple[int, int, int]) -> np.ndarray: ...


class UniformModel:
    """Debug model: every class equally likely everywhere."""

    def predict(self, image_id, image_path, expected_shape):
        h, w, num_classes = expected_shape
        return np.full((h, w, num_classes), 1.0 / num_classes, dtype=np.float32)


class ArrayDirModel:
    """Looks up precomputed raw outputs: <directory>/<image_id>.npy.

    The escape hatch for any framework: dump raw per-image outputs to a
    directory (one per fold when cross-validating) and point the exporter at
    them.
    """

    def __init__(self, directory):
        if directory is None:
            raise ConfigError("array-dir model needs a directory per fold")
        self.directory = Path(directory)

    def predict(self, image_id, image_path, expected_shape):
        return np.load(self.directory / f"{image_id}.npy")


class TorchScriptModel:
    """Runs a TorchScript module on the raw image file.

    The module receives a float32 CHW tensor in [0, 1] with a leading batch
    axis and must return a (1, K, h, w) or (h, w, K) tensor of scores.
    """

    def __init__(self, weights_path):
        if weights_path is None:
            raise ConfigError("torchscript model needs a weights path per fold")
        import torch  # deferred: torch is optional

        self._torch = torch
        self.module = torch.jit.load(str(weights_path), map_location="cpu")
        self.module.eval()

    def predict(self, image_id, image_path, expected_shape):
        from PIL import Image

        torch = self._torch
        image = np.asarray(Image.open(image_path).convert("RGB"), dtype=np.float32)
        batch = torch.from_numpy(image / 255.0).permute(2, 0, 1).unsqueeze(0)
        with torch.no_grad():
            out = self.module(batch)
        out = out.detach().cpu().numpy()
        if out.ndim == 4:  # (1, K, h, w) -> (h, w, K)
            out = np.transpose(out[0], (1, 2, 0))
        return out


def build_model(name: str, weights, num_classes: int) -> Predictor:
    if name == "uniform":
        return UniformModel()
    if name == "array-dir":
        return ArrayDirModel(weights)
    if name == "torchscript":
        return TorchScriptModel(weights)
    raise ConfigError(
        f"unknown model {name!r}; available: uniform, array-dir, torchscript"
    )
