"""Dataset loaders for the real export path.

Each loader returns (images, labels, class_names) for the evaluation split:
images as a sequence of PIL images, labels as an int vector, class names as
the dataset's published label strings. torchvision is imported lazily so the
offline test suite (which injects its own data) never needs it.
"""

from __future__ import annotations

import numpy as np

from calibkit_exporter.errors import ExportError


def load_dataset(name: str, data_root: str = "data"):
    try:
        from torchvision import datasets
    except ImportError as exc:
        raise ExportError(
            "torchvision is required to load image datasets; "
            "install calibkit-exporter[clip]"
        ) from exc

    if name == "cifar10":
        ds = datasets.CIFAR10(root=data_root, train=False, download=True)
        return _from_torchvision(ds, ds.classes)
    if name == "cifar100":
        ds = datasets.CIFAR100(root=data_root, train=False, download=True)
        return _from_torchvision(ds, ds.classes)
    if name == "sun397":
        ds = datasets.SUN397(root=data_root, download=True)
        return _from_torchvision(ds, ds.classes)
    if name == "imagenet1k-val":
        # torchvision's ImageNet requires the devkit/val archives to be
        # present locally; there is no public auto-download
        ds = datasets.ImageNet(root=data_root, split="val")
        names = [", ".join(syn) if isinstance(syn, (list, tuple)) else str(syn)
                 for syn in ds.classes]
        return _from_torchvision(ds, names)
    raise ExportError(f"no loader for dataset {name!r}")


def _from_torchvision(ds, class_names):
    images = [ds[i][0] for i in range(len(ds))]
    labels = np.asarray([int(ds[i][1]) for i in range(len(ds))], dtype=np.int64)
    return images, labels, [str(c) for c in class_names]
