"""Export run configuration, loadable from JSON or YAML."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class ImageRecord:
    image_id: str
    image_path: str
    label_path: str


@dataclass
class ExportConfig:
    images: list[ImageRecord]
    num_classes: int
    output_dir: str
    model_name: str = "uniform"
    model_weights: list[str] | str | None = None
    folds: int = 5
    seed: int = 0
    mode: str = "kfold"  # or "holdout"
    holdout_ids: list[str] = field(default_factory=list)
    activation: str = "none"  # "softmax" when the model emits logits
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.num_classes < 2:
            raise ConfigError(f"need at least 2 classes, got {self.num_classes}")
        if not self.images:
            raise ConfigError("no images to export")
        ids = [rec.image_id for rec in self.images]
        if len(set(ids)) != len(ids):
            raise ConfigError("image ids must be unique")
        if self.mode not in ("kfold", "holdout"):
            raise ConfigError(f"mode must be kfold or holdout, got {self.mode!r}")
        if self.activation not in ("none", "softmax"):
            raise ConfigError(
                f"activation must be none or softmax, got {self.activation!r}"
            )
        if self.mode == "kfold":
            if self.folds < 2:
                raise ConfigError(f"folds must be >= 2, got {self.folds}")
            if self.folds > len(self.images):
                raise ConfigError(
                    f"{self.folds} folds for {len(self.images)} images would "
                    "leave folds empty"
                )
            if isinstance(self.model_weights, list) and \
                    len(self.model_weights) != self.folds:
                raise ConfigError(
                    f"{len(self.model_weights)} weight references for "
                    f"{self.folds} folds"
                )
        else:
            known = set(ids)
            missing = [i for i in self.holdout_ids if i not in known]
            if missing:
                raise ConfigError(f"holdout ids not in image list: {missing}")
            if not self.holdout_ids:
                raise ConfigError("holdout mode needs holdout_ids")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def weights_for(self, fold: int):
        if isinstance(self.model_weights, list):
            return self.model_weights[fold]
        return self.model_weights


def load_config(path) -> ExportConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        import yaml

        raw = yaml.safe_load(text)
    else:
        raw = json.loads(text)
    try:
        images = [
            ImageRecord(
                image_id=str(rec["image_id"]),
                image_path=str(rec["image_path"]),
                label_path=str(rec["label_path"]),
            )
            for rec in raw["images"]
        ]
        model = raw.get("model", {})
        return ExportConfig(
            images=images,
            num_classes=int(raw["num_classes"]),
            output_dir=str(raw["output_dir"]),
            model_name=str(model.get("name", "uniform")),
            model_weights=model.get("weights"),
            folds=int(raw.get("folds", 5)),
            seed=int(raw.get("seed", 0)),
            mode=str(raw.get("mode", "kfold")),
            holdout_ids=[str(i) for i in raw.get("holdout_ids", [])],
            activation=str(raw.get("activation", "none")),
            base_dir=path.resolve().parent,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad config: {exc}") from exc
