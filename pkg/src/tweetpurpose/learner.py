"""One-vs-rest linear SVM over sparse named features.

Each binary problem minimizes the L2-regularized hinge loss

    0.5 * (||w||^2 + b^2) + C * sum_i max(0, 1 - y_i (w . x_i + b))

by dual coordinate descent (the bias is an extra constant feature, so it
is regularized like the weights).  An epoch visits every example once in a
seeded random order; training stops when the spread of projected gradients
falls to ``tol`` or after ``max_iter`` epochs.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .folds import stratified_folds

DEFAULT_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 1000
INNER_FOLDS = 5


class LearnerError(ValueError):
    pass


def class_seed(seed: int, class_index: int) -> int:
    return (int(seed) * 1000003 + class_index) % 2**31


# --------------------------------------------------------------------------
# data


def build_vocabulary(vectors) -> dict[str, int]:
    names = set()
    for v in vectors:
        names.update(v)
    return {name: i for i, name in enumerate(sorted(names))}


def to_csr(vectors, vocabulary: Mapping[str, int]) -> sp.csr_matrix:
    """Rows in canonical CSR form; names outside the vocabulary are dropped."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for v in vectors:
        row = sorted((vocabulary[k], float(x)) for k, x in v.items() if k in vocabulary)
        indices.extend(i for i, _ in row)
        data.extend(x for _, x in row)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, len(vocabulary)),
    )


def _arrays(X: sp.csr_matrix):
    return X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data.astype(np.float64)


@dataclass(frozen=True)
class Dataset:
    instances: tuple  # (tweet_id, vector, label)
    label_set: tuple[str, ...]
    vocabulary: dict = field(compare=False)

    @classmethod
    def build(cls, instances, label_set: Sequence[str] | None = None) -> "Dataset":
        instances = tuple((str(tid), dict(vec), lab) for tid, vec, lab in instances)
        if label_set is None:
            label_set = sorted({lab for _, _, lab in instances})
        label_set = tuple(label_set)
        if len(set(label_set)) != len(label_set):
            raise LearnerError("duplicate labels in label set")
        allowed = set(label_set)
        for tid, _, lab in instances:
            if lab not in allowed:
                raise LearnerError(f"instance {tid!r}: label {lab!r} not in label set")
        return cls(instances, label_set, build_vocabulary(v for _, v, _ in instances))

    def __len__(self):
        return len(self.instances)

    @property
    def ids(self) -> list[str]:
        return [tid for tid, _, _ in self.instances]

    @property
    def vectors(self) -> list[dict]:
        return [v for _, v, _ in self.instances]

    @property
    def labels(self) -> list[str]:
        return [lab for _, _, lab in self.instances]

    def label_indices(self) -> np.ndarray:
        pos = {lab: i for i, lab in enumerate(self.label_set)}
        return np.array([pos[lab] for lab in self.labels], dtype=np.int64)

    def matrix(self) -> sp.csr_matrix:
        return to_csr(self.vectors, self.vocabulary)


# --------------------------------------------------------------------------
# training


def fit_binary(X: sp.csr_matrix, y: np.ndarray, C: float, seed: int = 0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Weights (n_features,), bias and epochs used for labels y in {-1, +1}."""
    indptr, indices, data = _arrays(X)
    w, _, n_iter = _kernels.dual_cd(
        indptr, indices, data, y.astype(np.float64), float(C), float(tol), int(max_iter), int(seed), X.shape[1]
    )
    return w[:-1], w[-1], n_iter


def fit_ovr(X: sp.csr_matrix, y_idx: np.ndarray, n_labels: int, C: float, seed: int = 0, tol=DEFAULT_TOL,
            max_iter=DEFAULT_MAX_ITER):
    W = np.zeros((n_labels, X.shape[1]))
    b = np.zeros(n_labels)
    for c in range(n_labels):
        y = np.where(y_idx == c, 1.0, -1.0)
        W[c], b[c], _ = fit_binary(X, y, C, class_seed(seed, c), tol, max_iter)
    return W, b


def decision_matrix(X: sp.csr_matrix, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    indptr, indices, data = _arrays(X)
    return _kernels.decision(indptr, indices, data, np.ascontiguousarray(W), b)


def _check_finite(X: sp.csr_matrix, ids: Sequence[str]):
    bad = ~np.isfinite(X.data)
    if bad.any():
        row = int(np.searchsorted(X.indptr, np.flatnonzero(bad)[0], side="right") - 1)
        raise LearnerError(f"instance {ids[row]!r} has a non-finite feature value")


def train(dataset: Dataset, C: float, seed: int = 0, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          config: str = "") -> "LinearModel":
    if not C > 0:
        raise LearnerError(f"C must be positive, got {C}")
    y_idx = dataset.label_indices()
    if len(set(y_idx.tolist())) < 2:
        raise LearnerError("training data needs at least two distinct labels")
    X = dataset.matrix()
    _check_finite(X, dataset.ids)
    W, b = fit_ovr(X, y_idx, len(dataset.label_set), C, seed, tol, max_iter)
    return LinearModel(dataset.label_set, dict(dataset.vocabulary), W, b, float(C), int(seed), config)


def tune_C_arrays(X: sp.csr_matrix, y_idx: np.ndarray, n_labels: int, grid: Sequence[float], seed: int = 0,
                  k: int = INNER_FOLDS, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> tuple[float, dict]:
    """Grid value with the best mean inner-CV accuracy; ties go to the smallest C."""
    grid = sorted(float(c) for c in grid)
    if not grid:
        raise LearnerError("empty C grid")
    if len(grid) == 1:
        return grid[0], {}
    n = X.shape[0]
    plan = stratified_folds(y_idx, min(k, n), 1, seed)
    scores = {}
    for C in grid:
        accs = []
        for _, _, tr, te in plan.splits():
            if len(set(y_idx[tr].tolist())) < 2:
                # degenerate inner fold: predicts the lone training class
                pred = np.full(len(te), y_idx[tr][0] if len(tr) else 0)
            else:
                W, b = fit_ovr(X[tr], y_idx[tr], n_labels, C, seed, tol, max_iter)
                pred = np.argmax(decision_matrix(X[te], W, b), axis=1)
            accs.append(float(np.mean(pred == y_idx[te])))
        scores[C] = math.fsum(accs) / len(accs)
    best = grid[0]
    for C in grid[1:]:
        if scores[C] > scores[best]:
            best = C
    return best, scores


def tune_C(dataset: Dataset, grid: Sequence[float] = DEFAULT_GRID, seed: int = 0, k: int = INNER_FOLDS,
           tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> float:
    C, _ = tune_C_arrays(dataset.matrix(), dataset.label_indices(), len(dataset.label_set), grid, seed, k, tol,
                         max_iter)
    return C


# --------------------------------------------------------------------------
# model


@dataclass
class LinearModel:
    label_set: tuple[str, ...]
    vocabulary: dict[str, int]
    weights: np.ndarray  # (n_labels, n_features)
    biases: np.ndarray  # (n_labels,)
    C: float
    seed: int = 0
    config: str = ""

    def __post_init__(self):
        self.label_set = tuple(self.label_set)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.shape != (len(self.label_set), len(self.vocabulary)):
            raise LearnerError(
                f"weights shape {self.weights.shape} does not match "
                f"{len(self.label_set)} labels x {len(self.vocabulary)} features"
            )

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.config.encode("utf-8")).hexdigest()[:16]

    def _scores(self, vector: Mapping[str, float]) -> np.ndarray:
        pairs = sorted((self.vocabulary[k], float(v)) for k, v in vector.items() if k in self.vocabulary)
        if not pairs:
            return self.biases.copy()
        idx = np.array([i for i, _ in pairs])
        val = np.array([v for _, v in pairs])
        return self.weights[:, idx] @ val + self.biases

    def decision_values(self, vector: Mapping[str, float]) -> dict[str, float]:
        return dict(zip(self.label_set, self._scores(vector).tolist()))

    def predict(self, vector: Mapping[str, float]) -> str:
        # np.argmax takes the first maximum: ties go to label-set order
        return self.label_set[int(np.argmax(self._scores(vector)))]

    def predict_many(self, vectors) -> list[str]:
        vectors = list(vectors)
        if not vectors:
            return []
        scores = decision_matrix(to_csr(vectors, self.vocabulary), self.weights, self.biases)
        return [self.label_set[i] for i in np.argmax(scores, axis=1)]


# --------------------------------------------------------------------------
# model file
#
# Little-endian throughout:
#   magic  8 bytes  b"TPSVM\0\0\0"
#   uint32 format version (1)
#   uint32 K = number of labels
#   uint64 D = number of features
#   float64 C, int64 seed
#   string config            (string = uint32 byte length + UTF-8 bytes)
#   K strings: labels in label-set order
#   D strings: feature names in vocabulary index order
#   K*D float64 weights, class-major
#   K float64 biases
#   uint32 CRC-32 of every preceding byte

MAGIC = b"TPSVM\x00\x00\x00"
FORMAT_VERSION = 1


class ModelFormatError(LearnerError):
    pass


def _put_str(buf: io.BytesIO, s: str):
    b = s.encode("utf-8")
    buf.write(struct.pack("<I", len(b)))
    buf.write(b)


def model_bytes(model: LinearModel) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<IIQdq", FORMAT_VERSION, len(model.label_set), len(model.vocabulary), model.C, model.seed))
    _put_str(buf, model.config)
    for lab in model.label_set:
        _put_str(buf, lab)
    names = sorted(model.vocabulary, key=model.vocabulary.__getitem__)
    if [model.vocabulary[n] for n in names] != list(range(len(names))):
        raise LearnerError("vocabulary indices must be 0..D-1")
    for name in names:
        _put_str(buf, name)
    buf.write(model.weights.astype("<f8").tobytes(order="C"))
    buf.write(model.biases.astype("<f8").tobytes())
    body = buf.getvalue()
    return body + struct.pack("<I", zlib.crc32(body))


def save_model(model: LinearModel, path: str | Path) -> None:
    Path(path).write_bytes(model_bytes(model))


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise ModelFormatError("model file is truncated")
        out = self.raw[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError:
            raise ModelFormatError("model file is corrupted (bad string)") from None


def model_from_bytes(raw: bytes) -> LinearModel:
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    body, (crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    r = _Reader(body)
    r.take(len(MAGIC))
    version, k, d, C, seed = r.unpack("<IIQdq")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    if zlib.crc32(body) != crc:
        raise ModelFormatError("model file is corrupted or truncated (checksum mismatch)")
    config = r.string()
    labels = tuple(r.string() for _ in range(k))
    names = [r.string() for _ in range(d)]
    W = np.frombuffer(r.take(8 * k * d), dtype="<f8").astype(np.float64).reshape(k, d)
    b = np.frombuffer(r.take(8 * k), dtype="<f8").astype(np.float64)
    if r.pos != len(body):
        raise ModelFormatError("trailing bytes after model payload")
    return LinearModel(labels, {n: i for i, n in enumerate(names)}, W, b, C, seed, config)


def load_model(path: str | Path) -> LinearModel:
    return model_from_bytes(Path(path).read_bytes())


def config_string(groups: Sequence[str]) -> str:
    return json.dumps({"groups": list(groups)}, sort_keys=True)
