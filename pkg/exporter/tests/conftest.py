"""Shared fixtures: a content-addressed stub encoder and a small dataset.

The stub derives every embedding from its input alone (image index or text
checksum), so exports are reproducible across processes and duplicate
prompts encode to identical rows, with no checkpoint download involved.
"""

from __future__ import annotations

import zlib

import numpy as np
import pytest

from calibkit_exporter.encode import l2_normalize


class StubEncoder:
    def __init__(self, dim: int = 512, seed: int = 0):
        self.embedding_dim = dim
        self._seed = seed

    def _row(self, key: int) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(key=[self._seed, key]))
        return rng.standard_normal(self.embedding_dim)

    def encode_images(self, images) -> np.ndarray:
        return l2_normalize(np.stack([self._row(int(item)) for item in images]))

    def encode_texts(self, texts) -> np.ndarray:
        return l2_normalize(
            np.stack([self._row(zlib.crc32(t.encode("utf-8"))) for t in texts])
        )


# mixed case and underscores on purpose: canonicalization must clean these
CLASS_NAMES = [
    "Airplane",
    "auto_mobile",
    "BIRD",
    "cat",
    "deer",
    "dog",
    "frog",
    "horse",
    "pirate_ship",
    "truck",
]


def make_data(n: int = 40, c: int = 10):
    """(images, labels, class_names) with integer stand-ins for images."""
    images = list(range(n))
    labels = np.asarray([i % c for i in range(n)], dtype=np.int64)
    return images, labels, CLASS_NAMES[:c]


@pytest.fixture
def encoder() -> StubEncoder:
    return StubEncoder()


@pytest.fixture
def data():
    return make_data()
