"""Synthetic prediction problems with known calibration structure.

Logits are drawn from a Gaussian and labels are sampled from the softmax of
the logits divided by a planted temperature T*. By construction, dividing
the logits by T* makes the model calibrated in expectation, so every metric
and fit in the toolkit has a ground-truth oracle at any scale.

Randomness comes from numpy's Philox generator (counter-based, 4x64),
whose bit stream is fixed by seed and stable across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from calibkit.errors import RangeError
from calibkit.head import LogitMatrix, PROVENANCE_EXTERNAL, softmax_values
from calibkit.tensorio import LabelVector

DEFAULT_LOGIT_SCALE = 5.0


@dataclass(frozen=True)
class SynthSpec:
    n: int
    c: int
    planted_temperature: float = 1.0
    logit_scale: float = DEFAULT_LOGIT_SCALE
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise RangeError(f"n must be >= 1, got {self.n}")
        if self.c < 2:
            raise RangeError(f"c must be >= 2, got {self.c}")
        if not np.isfinite(self.planted_temperature) or self.planted_temperature <= 0:
            raise RangeError(f"planted_temperature must be > 0, got {self.planted_temperature}")
        if not np.isfinite(self.logit_scale) or self.logit_scale <= 0:
            raise RangeError(f"logit_scale must be > 0, got {self.logit_scale}")


def generate(spec: SynthSpec) -> tuple[LogitMatrix, LabelVector]:
    """Draw logits ~ N(0, logit_scale^2) and labels ~ softmax(logits / T*).

    Deterministic given the seed. Labels use inverse-CDF sampling over each
    row's softmax at the planted temperature.
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    logit_values = rng.normal(0.0, spec.logit_scale, size=(spec.n, spec.c))
    p = softmax_values(logit_values / spec.planted_temperature)
    u = rng.random(spec.n)
    cdf = np.cumsum(p, axis=1)
    labels = (u[:, None] > cdf).sum(axis=1)
    np.minimum(labels, spec.c - 1, out=labels)  # guard the u ~ 1 float edge
    return (
        LogitMatrix(values=logit_values, provenance=PROVENANCE_EXTERNAL),
        LabelVector(labels=labels, num_classes=spec.c),
    )
