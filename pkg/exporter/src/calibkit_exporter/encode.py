"""Encoders: the OpenCLIP-backed one and the interface both sides satisfy.

An encoder exposes embedding_dim, encode_images(images) and
encode_texts(texts); arrays come back L2-normalized row by row.
Normalization is immaterial to cosine logits but halves downstream work and
is recorded in the export meta.
"""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from calibkit_exporter.errors import ExportError


class Encoder(Protocol):
    embedding_dim: int

    def encode_images(self, images: Sequence) -> np.ndarray: ...

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray: ...


def l2_normalize(rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float32)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    if (norms == 0).any():
        raise ExportError("encoder produced a zero-norm embedding")
    return rows / norms


class OpenClipEncoder:
    """Encodes with an OpenCLIP checkpoint; loaded lazily so the package
    imports without torch/open_clip installed."""

    def __init__(self, architecture: str, pretrain_dataset: str, device: str = "cpu",
                 batch_size: int = 64):
        try:
            import open_clip
            import torch
        except ImportError as exc:
            raise ExportError(
                "open_clip_torch and torch are required for checkpoint encoding; "
                "install calibkit-exporter[clip]"
            ) from exc
        try:
            model, _, preprocess = open_clip.create_model_and_transforms(
                architecture, pretrained=pretrain_dataset
            )
        except Exception as exc:
            raise ExportError(
                f"unknown or unavailable checkpoint {architecture}/{pretrain_dataset}: {exc}"
            ) from exc
        self._torch = torch
        self._open_clip = open_clip
        self._model = model.to(device).eval()
        self._preprocess = preprocess
        self._tokenizer = open_clip.get_tokenizer(architecture)
        self._device = device
        self._batch_size = batch_size
        self.embedding_dim = int(model.text_projection.shape[1]) if hasattr(
            model, "text_projection"
        ) else int(model.visual.output_dim)

    def encode_images(self, images: Sequence) -> np.ndarray:
        torch = self._torch
        chunks = []
        with torch.no_grad():
            for start in range(0, len(images), self._batch_size):
                batch = torch.stack(
                    [self._preprocess(img) for img in images[start : start + self._batch_size]]
                ).to(self._device)
                chunks.append(self._model.encode_image(batch).cpu().numpy())
        return l2_normalize(np.concatenate(chunks, axis=0))

    def encode_texts(self, texts: Sequence[str]) -> np.ndarray:
        torch = self._torch
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), self._batch_size):
                tokens = self._tokenizer(list(texts[start : start + self._batch_size])).to(
                    self._device
                )
                chunks.append(self._model.encode_text(tokens).cpu().numpy())
        return l2_normalize(np.concatenate(chunks, axis=0))
