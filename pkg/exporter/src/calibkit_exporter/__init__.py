"""Export OpenCLIP image and class-prompt embeddings as calibkit input files."""

from calibkit_exporter.errors import ExporterError, ExportError, ValidationError
from calibkit_exporter.export import class_prompts, export_embeddings, export_prompt_suite
from calibkit_exporter.formats import read_matrix, write_labels, write_matrix
from calibkit_exporter.job import DATASETS, ExportJob
from calibkit_exporter.prompts import (
    AUXILIARY_PROMPT,
    CIFAR_PROMPTS,
    PROMPT_SUITES,
    SUN397_PROMPTS,
)

__all__ = [
    "AUXILIARY_PROMPT",
    "CIFAR_PROMPTS",
    "DATASETS",
    "ExportJob",
    "ExportError",
    "ExporterError",
    "PROMPT_SUITES",
    "SUN397_PROMPTS",
    "ValidationError",
    "class_prompts",
    "export_embeddings",
    "export_prompt_suite",
    "read_matrix",
    "write_labels",
    "write_matrix",
]
