"""Seeded stratified fold assignment."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class FoldPlan:
    k: int
    repeats: int
    seed: int
    assignment: np.ndarray  # (repeats, n_instances) fold index per instance

    def split(self, repeat: int, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """Sorted (train, test) instance indices."""
        row = self.assignment[repeat]
        return np.flatnonzero(row != fold), np.flatnonzero(row == fold)

    def splits(self):
        for r in range(self.repeats):
            for f in range(self.k):
                yield r, f, *self.split(r, f)


def stratified_folds(labels: Sequence, k: int, repeats: int = 1, seed: int = 0) -> FoldPlan:
    """Per repeat: shuffle each class with a seeded generator, then deal its
    members round-robin onto the folds.

    The deal continues across classes (classes in sorted order), so within
    each class and overall the fold sizes differ by at most one.  Classes
    smaller than ``k`` land in only some folds.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of instances ({n})")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    classes = sorted(set(labels.tolist()))
    members = [np.flatnonzero(labels == c) for c in classes]
    assignment = np.empty((repeats, n), dtype=np.int64)
    for r in range(repeats):
        rng = np.random.default_rng([seed, r])
        pos = 0
        for idx in members:
            for i in rng.permutation(idx):
                assignment[r, i] = pos % k
                pos += 1
    return FoldPlan(k, repeats, seed, assignment)
