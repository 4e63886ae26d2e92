"""Export job description and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from calibkit_exporter.errors import ValidationError

DATASETS = ("cifar10", "cifar100", "sun397", "imagenet1k-val")


@dataclass(frozen=True)
class ExportJob:
    architecture: str
    pretrain_dataset: str
    dataset: str
    prompt_template: str
    output_dir: Path = field(default=Path("."))
    batch_size: int = 64
    device: str = "cpu"

    def __post_init__(self):
        if not self.architecture:
            raise ValidationError("architecture must be non-empty")
        if not self.pretrain_dataset:
            raise ValidationError("pretrain_dataset must be non-empty")
        if self.dataset not in DATASETS:
            raise ValidationError(
                f"dataset must be one of {', '.join(DATASETS)}, got {self.dataset!r}"
            )
        if self.prompt_template.count("{}") != 1:
            raise ValidationError(
                f"prompt_template must contain exactly one {{}} placeholder, "
                f"got {self.prompt_template!r}"
            )
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        object.__setattr__(self, "output_dir", Path(self.output_dir))

    def to_meta(self) -> dict:
        return {
            "architecture": self.architecture,
            "pretrain_dataset": self.pretrain_dataset,
            "dataset": self.dataset,
            "prompt_template": self.prompt_template,
            "batch_size": self.batch_size,
            "device": self.device,
            "normalized": True,
        }


def canonical_class_name(name: str) -> str:
    """Dataset label names to prompt text: underscores to spaces, lowercase."""
    return name.replace("_", " ").strip().lower()
