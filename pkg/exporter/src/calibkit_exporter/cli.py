"""Command-line entry point mirroring ExportJob.

Exit codes: 0 success, 1 export/runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from calibkit_exporter.errors import ExportError, ValidationError
from calibkit_exporter.export import export_embeddings, export_prompt_suite
from calibkit_exporter.job import DATASETS, ExportJob
from calibkit_exporter.prompts import PROMPT_SUITES


def _add_job_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", required=True, help="OpenCLIP architecture, e.g. ViT-B-16")
    p.add_argument("--pretrain", required=True, help="pre-training tag, e.g. laion400m_e31")
    p.add_argument("--dataset", required=True, choices=DATASETS)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--device", default="cpu")
    p.add_argument("--data-root", default="data", help="dataset download/cache directory")


def cmd_export(args) -> int:
    job = ExportJob(
        architecture=args.arch,
        pretrain_dataset=args.pretrain,
        dataset=args.dataset,
        prompt_template=args.prompt,
        output_dir=Path(args.out),
        batch_size=args.batch_size,
        device=args.device,
    )
    paths = export_embeddings(job, data_root=args.data_root)
    for key in ("images", "classes", "labels", "meta"):
        print(f"wrote {paths[key]}")
    return 0


def cmd_prompt_suite(args) -> int:
    if args.prompts_file:
        prompts = [
            line.strip()
            for line in Path(args.prompts_file).read_text().splitlines()
            if line.strip()
        ]
    else:
        prompts = PROMPT_SUITES.get(args.dataset)
        if prompts is None:
            raise ValidationError(
                f"no built-in prompt suite for {args.dataset!r}; pass --prompts-file"
            )
    if not prompts:
        raise ValidationError(f"{args.prompts_file}: no prompts found")
    # validate before the dataset load so usage errors never trigger a download
    for prompt in prompts:
        if prompt.count("{}") != 1:
            raise ValidationError(
                f"prompt must contain exactly one {{}} placeholder, got {prompt!r}"
            )
    job = ExportJob(
        architecture=args.arch,
        pretrain_dataset=args.pretrain,
        dataset=args.dataset,
        prompt_template=prompts[0],
        output_dir=Path(args.out),
        batch_size=args.batch_size,
        device=args.device,
    )
    paths = export_prompt_suite(job, prompts, data_root=args.data_root)
    print(f"wrote {paths['images']}")
    print(f"wrote {len(paths['classes'])} class-embedding files")
    print(f"wrote {paths['meta']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calibkit-export",
        description="Encode image datasets and prompt-expanded class names with an "
        "OpenCLIP checkpoint, writing calibkit matrix/label files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="one dataset under one prompt template")
    _add_job_flags(p)
    p.add_argument("--prompt", required=True, help='template with one "{}", e.g. "a photo of a {}"')
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("prompt-suite", help="shared images, one class file per prompt")
    _add_job_flags(p)
    p.add_argument("--prompts-file", default=None, help="one prompt per line; default: built-in suite")
    p.set_defaults(func=cmd_prompt_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
