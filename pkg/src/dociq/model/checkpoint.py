"""Single-file weight checkpoints.

A checkpoint is an ``.npz`` archive holding every parameter under its
hierarchical name plus two metadata entries: ``__config__`` (the JSON
model config) and ``__format_version__``.  Loading rebuilds the network
from the embedded config and restores weights with shape checks.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from .network import DocQualityNetwork, ModelConfig

FORMAT_VERSION = 1

_META_KEYS = ("__config__", "__format_version__")


def save_checkpoint(network: DocQualityNetwork, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {name: p.value for name, p in network.named_parameters()}
    for key in _META_KEYS:
        if key in arrays:
            raise ConfigurationError(f"parameter name collides with metadata key {key}")
    arrays["__config__"] = np.frombuffer(
        json.dumps(network.config.to_json(), sort_keys=True).encode("utf-8"), dtype=np.uint8
    )
    arrays["__format_version__"] = np.array(FORMAT_VERSION, dtype=np.int64)
    np.savez(path, **arrays)
    return path


def load_checkpoint(path) -> DocQualityNetwork:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"checkpoint not found: {path}")
    with np.load(path) as data:
        if "__format_version__" not in data or "__config__" not in data:
            raise ConfigurationError(f"{path} is not a model checkpoint")
        version = int(data["__format_version__"])
        if version != FORMAT_VERSION:
            raise ConfigurationError(
                f"checkpoint format version {version} unsupported (expected {FORMAT_VERSION})"
            )
        config = ModelConfig.from_json(json.loads(bytes(data["__config__"]).decode("utf-8")))
        network = DocQualityNetwork(config)
        named = dict(network.named_parameters())
        stored = {k for k in data.files if k not in _META_KEYS}
        if stored != set(named):
            missing = sorted(set(named) - stored)[:3]
            extra = sorted(stored - set(named))[:3]
            raise ConfigurationError(
                f"checkpoint/model parameter mismatch (missing {missing}, extra {extra})"
            )
        for name, param in named.items():
            arr = np.asarray(data[name], dtype=np.float64)
            if arr.shape != param.value.shape:
                raise ConfigurationError(
                    f"shape mismatch for {name}: {arr.shape} vs {param.value.shape}"
                )
            param.value[...] = arr
    return network
