"""Export orchestration: encode a dataset and prompt-expanded class names,
then write the toolkit's file formats.

Single-prompt layout (export_embeddings):
    <output_dir>/images.calibmx    N x D image embeddings
    <output_dir>/classes.calibmx   C x D class-text embeddings
    <output_dir>/labels.json
    <output_dir>/meta.json         job parameters

Prompt-suite layout (export_prompt_suite): images.calibmx, labels.json and
meta.json as above, plus one classes-<iii>.calibmx per distinct prompt;
meta.json carries the index -> prompt mapping.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import numpy as np

from calibkit_exporter import formats
from calibkit_exporter.encode import Encoder, OpenClipEncoder
from calibkit_exporter.errors import ValidationError
from calibkit_exporter.job import ExportJob, canonical_class_name


def _resolve(job: ExportJob, encoder, data, data_root: str):
    # encoder first: a missing checkpoint or dependency should fail before
    # any dataset download starts
    if encoder is None:
        encoder = OpenClipEncoder(
            job.architecture, job.pretrain_dataset, device=job.device,
            batch_size=job.batch_size,
        )
    if data is None:
        from calibkit_exporter.datasets import load_dataset

        data = load_dataset(job.dataset, data_root)
    return encoder, data


def class_prompts(job_template: str, class_names) -> list[str]:
    return [job_template.format(canonical_class_name(name)) for name in class_names]


def export_embeddings(
    job: ExportJob, encoder: Encoder | None = None, data=None, data_root: str = "data"
) -> dict:
    """Write images.calibmx, classes.calibmx, labels.json, and meta.json."""
    encoder, (images, labels, class_names) = _resolve(job, encoder, data, data_root)
    out = Path(job.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    image_embs = np.asarray(encoder.encode_images(images), dtype=np.float32)
    class_embs = np.asarray(
        encoder.encode_texts(class_prompts(job.prompt_template, class_names)), dtype=np.float32
    )
    paths = {
        "images": out / "images.calibmx",
        "classes": out / "classes.calibmx",
        "labels": out / "labels.json",
        "meta": out / "meta.json",
    }
    formats.write_matrix(image_embs, paths["images"])
    formats.write_matrix(class_embs, paths["classes"])
    formats.write_labels(labels, len(class_names), paths["labels"])
    meta = job.to_meta()
    meta["class_names"] = [canonical_class_name(n) for n in class_names]
    formats.write_meta(meta, paths["meta"])
    return paths


def export_prompt_suite(
    job: ExportJob, prompts: list[str], encoder: Encoder | None = None, data=None,
    data_root: str = "data",
) -> dict:
    """Shared image embeddings plus one class-embedding file per prompt."""
    if not prompts:
        raise ValidationError("prompt suite must contain at least one prompt")
    deduped: list[str] = []
    for prompt in prompts:
        if prompt.count("{}") != 1:
            raise ValidationError(
                f"prompt must contain exactly one {{}} placeholder, got {prompt!r}"
            )
        if prompt in deduped:
            warnings.warn(f"duplicate prompt skipped: {prompt!r}", UserWarning, stacklevel=2)
            continue
        deduped.append(prompt)

    encoder, (images, labels, class_names) = _resolve(job, encoder, data, data_root)
    out = Path(job.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    paths = {
        "images": out / "images.calibmx",
        "labels": out / "labels.json",
        "meta": out / "meta.json",
        "classes": [],
    }
    formats.write_matrix(
        np.asarray(encoder.encode_images(images), dtype=np.float32), paths["images"]
    )
    formats.write_labels(labels, len(class_names), paths["labels"])
    for i, prompt in enumerate(deduped):
        class_path = out / f"classes-{i:03d}.calibmx"
        embs = encoder.encode_texts(class_prompts(prompt, class_names))
        formats.write_matrix(np.asarray(embs, dtype=np.float32), class_path)
        paths["classes"].append(class_path)
    meta = job.to_meta()
    del meta["prompt_template"]
    meta["prompts"] = {f"classes-{i:03d}.calibmx": p for i, p in enumerate(deduped)}
    meta["class_names"] = [canonical_class_name(n) for n in class_names]
    formats.write_meta(meta, paths["meta"])
    return paths
