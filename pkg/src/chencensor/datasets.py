"""Bundled datasets and plain-text data ingestion."""
from __future__ import annotations

import importlib.resources

import numpy as np

__all__ = ["parse_times", "load_builtin", "read_times", "BUILTIN_DATASETS"]

BUILTIN_DATASETS = ("devices30",)


def parse_times(text: str) -> np.ndarray:
    """Parse newline- or comma-separated positive reals; '#' starts a comment."""
    values: list[float] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for tok in line.replace(",", " ").split():
            values.append(float(tok))
    if not values:
        raise ValueError("no data values found")
    return np.asarray(values, dtype=float)


def load_builtin(name: str) -> np.ndarray:
    if name not in BUILTIN_DATASETS:
        raise ValueError(f"unknown builtin dataset {name!r}; available: {BUILTIN_DATASETS}")
    text = importlib.resources.files("chencensor.data").joinpath(f"{name}.txt").read_text()
    return parse_times(text)


def read_times(source: str) -> np.ndarray:
    """Load failure times from 'builtin:<name>' or a file path."""
    if source.startswith("builtin:"):
        return load_builtin(source.split(":", 1)[1])
    with open(source, encoding="utf-8") as fh:
        return parse_times(fh.read())
