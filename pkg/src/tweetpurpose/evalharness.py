"""Repeated stratified cross-validation, metrics, ablation and paired t-tests.

Inside every outer fold the vocabulary and the regularization constant are
derived from the training instances only.  All randomness comes from the
run seed: fold assignment uses ``(seed, repeat)``, the solver and inner CV of
each fold use a seed derived from ``(seed, repeat, fold)``, so running folds
in parallel cannot change results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .features import GROUPS, FeatureConfig, group_of
from .folds import FoldPlan, stratified_folds
from .learner import (
    DEFAULT_GRID,
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    Dataset,
    LearnerError,
    decision_matrix,
    fit_ovr,
    to_csr,
    tune_C_arrays,
)

__all__ = [
    "FoldPlan",
    "stratified_folds",
    "EvalReport",
    "cross_validate",
    "majority_baseline",
    "per_class_metrics",
    "ablate",
    "paired_t_test",
    "student_t_sf",
]


# --------------------------------------------------------------------------
# statistics


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction of the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, 500):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return regularized_beta(df / 2.0, 0.5, df / (df + t * t))


def paired_t_test(scores_a: Sequence[float], scores_b: Sequence[float]) -> tuple[float, float]:
    """Two-tailed paired t-test on a - b.

    Zero-variance differences give ``(nan, 1.0)`` by convention.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"score lists differ in length: {a.shape[0]} vs {b.shape[0]}")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two paired scores")
    d = a - b
    mean = math.fsum(d) / n
    var = math.fsum((x - mean) ** 2 for x in d) / (n - 1)
    if var == 0.0:
        return math.nan, 1.0
    t = mean / math.sqrt(var / n)
    return t, student_t_sf(t, n - 1)


def majority_baseline(labels: Sequence) -> float:
    if len(labels) == 0:
        raise ValueError("no labels")
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    return float(counts.max() / counts.sum())


def per_class_metrics(confusion, labels: Sequence[str]) -> dict[str, tuple[float, float, float]]:
    """Precision, recall and F1 per class from a gold x predicted count matrix.

    Zero denominators give 0.
    """
    cm = np.asarray(confusion, dtype=np.float64)
    if cm.shape != (len(labels), len(labels)):
        raise ValueError("confusion matrix must be square over the label set")
    out = {}
    for i, lab in enumerate(labels):
        tp = cm[i, i]
        predicted = cm[:, i].sum()
        actual = cm[i, :].sum()
        p = tp / predicted if predicted else 0.0
        r = tp / actual if actual else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        out[lab] = (float(p), float(r), float(f))
    return out


def micro_prf(confusion) -> tuple[float, float, float]:
    """Micro-averaged precision, recall, F1: per-class tp/fp/fn pooled over classes."""
    cm = np.asarray(confusion, dtype=np.float64)
    tp = np.diag(cm)
    tp_sum = tp.sum()
    fp_sum = (cm.sum(axis=0) - tp).sum()
    fn_sum = (cm.sum(axis=1) - tp).sum()
    p = tp_sum / (tp_sum + fp_sum) if tp_sum + fp_sum else 0.0
    r = tp_sum / (tp_sum + fn_sum) if tp_sum + fn_sum else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return float(p), float(r), float(f)


# --------------------------------------------------------------------------
# reports


@dataclass
class EvalReport:
    label_set: tuple[str, ...]
    fold_accuracies: list[float]
    confusion: np.ndarray  # gold rows x predicted columns, summed over all folds
    fold_C: list[float] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    class_counts: dict = field(default_factory=dict)

    @property
    def mean_accuracy(self) -> float:
        return math.fsum(self.fold_accuracies) / len(self.fold_accuracies)

    @property
    def pooled_accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.confusion.sum())

    @property
    def per_class(self) -> dict[str, tuple[float, float, float]]:
        return per_class_metrics(self.confusion, self.label_set)

    @property
    def micro(self) -> tuple[float, float, float]:
        return micro_prf(self.confusion)

    def to_dict(self) -> dict:
        p, r, f = self.micro
        return {
            "config": self.config,
            "labels": list(self.label_set),
            "mean_accuracy": self.mean_accuracy,
            "pooled_accuracy": self.pooled_accuracy,
            "micro": {"P": p, "R": r, "F1": f},
            "per_class": {
                lab: {"instances": self.class_counts.get(lab, 0), "P": pc[0], "R": pc[1], "F1": pc[2]}
                for lab, pc in self.per_class.items()
            },
            "confusion": self.confusion.astype(int).tolist(),
            "fold_accuracies": self.fold_accuracies,
            "fold_C": self.fold_C,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def per_class_tsv(self) -> str:
        """Per-category P/R/F1 in percent with a micro-average row."""
        rows = ["category\tinstances\tP\tR\tF1"]
        for lab, (p, r, f) in self.per_class.items():
            rows.append(f"{lab}\t{self.class_counts.get(lab, 0)}\t{100 * p:.2f}\t{100 * r:.2f}\t{100 * f:.2f}")
        p, r, f = self.micro
        rows.append(f"micro-ave\t\t{100 * p:.2f}\t{100 * r:.2f}\t{100 * f:.2f}")
        return "\n".join(rows) + "\n"

    def summary_tsv(self, baseline: float) -> str:
        return f"system\taccuracy\nmajority class\t{100 * baseline:.2f}\nSVM\t{100 * self.mean_accuracy:.2f}\n"


# --------------------------------------------------------------------------
# cross-validation


class _Indexed:
    """All vectors of a dataset against one global, sorted vocabulary."""

    def __init__(self, dataset: Dataset):
        names = sorted(dataset.vocabulary, key=dataset.vocabulary.__getitem__)
        self.names = names
        self.groups = np.array([_group_index(n) for n in names], dtype=np.int64)
        self.matrix = to_csr(dataset.vectors, dataset.vocabulary)
        self.y = dataset.label_indices()
        self.n_labels = len(dataset.label_set)

    def columns_for(self, groups: frozenset[str]) -> np.ndarray:
        # names outside every group (index -1) are always kept
        enabled = np.array([g in groups for g in GROUPS] + [True])
        return np.flatnonzero(enabled[self.groups])


def _group_index(name: str) -> int:
    try:
        return GROUPS.index(group_of(name))
    except KeyError:
        return -1


def fold_seed(seed: int, repeat: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed, repeat, fold]).generate_state(1)[0] % 2**31)


def _run_fold(idx: _Indexed, cols: np.ndarray, train, test, grid, seed, tol, max_iter):
    X = idx.matrix[:, cols] if len(cols) != idx.matrix.shape[1] else idx.matrix
    Xtr = X[train]
    # vocabulary = features seen in training rows
    used = np.flatnonzero(np.diff(Xtr.tocsc().indptr))
    Xtr = sp.csr_matrix(Xtr[:, used])
    Xte = sp.csr_matrix(X[test][:, used])
    Xtr.sort_indices()
    Xte.sort_indices()
    ytr = idx.y[train]
    if len(set(ytr.tolist())) < 2:
        raise LearnerError("a training fold contains a single label")
    C, _ = tune_C_arrays(Xtr, ytr, idx.n_labels, grid, seed, tol=tol, max_iter=max_iter)
    W, b = fit_ovr(Xtr, ytr, idx.n_labels, C, seed, tol, max_iter)
    pred = np.argmax(decision_matrix(Xte, W, b), axis=1)
    return pred, C


def _evaluate(idx: _Indexed, dataset: Dataset, plan: FoldPlan, groups: frozenset[str], grid, jobs, tol,
              max_iter) -> EvalReport:
    cols = idx.columns_for(groups)
    tasks = [(r, f, tr, te) for r, f, tr, te in plan.splits() if len(te)]

    def work(task):
        r, f, tr, te = task
        return _run_fold(idx, cols, tr, te, grid, fold_seed(plan.seed, r, f), tol, max_iter)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    K = idx.n_labels
    confusion = np.zeros((K, K), dtype=np.int64)
    accs, Cs = [], []
    for (_, _, _, te), (pred, C) in zip(tasks, results):
        gold = idx.y[te]
        np.add.at(confusion, (gold, pred), 1)
        accs.append(float(np.mean(pred == gold)))
        Cs.append(C)
    counts = np.bincount(idx.y, minlength=K)
    return EvalReport(
        dataset.label_set,
        accs,
        confusion,
        Cs,
        {
            "groups": [g for g in GROUPS if g in groups],
            "k": plan.k,
            "repeats": plan.repeats,
            "seed": plan.seed,
            "grid": list(grid),
        },
        {lab: int(c) for lab, c in zip(dataset.label_set, counts)},
    )


def cross_validate(
    dataset: Dataset,
    feature_config: FeatureConfig | None = None,
    k: int = 10,
    repeats: int = 10,
    seed: int = 0,
    *,
    grid: Sequence[float] = DEFAULT_GRID,
    plan: FoldPlan | None = None,
    jobs: int = 1,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EvalReport:
    """k-fold stratified CV repeated ``repeats`` times.

    ``dataset`` holds full feature vectors; ``feature_config`` masks groups
    out, which is equivalent to re-extracting with those groups disabled.
    """
    if plan is None:
        plan = stratified_folds(dataset.labels, k, repeats, seed)
    groups = (feature_config or FeatureConfig.all()).enabled_groups
    return _evaluate(_Indexed(dataset), dataset, plan, groups, grid, jobs, tol, max_iter)


@dataclass
class AblationResult:
    removed_group: str
    report: EvalReport
    t: float
    p: float


def ablate(
    dataset: Dataset,
    groups: Sequence[str],
    k: int = 10,
    repeats: int = 10,
    seed: int = 0,
    *,
    base_config: FeatureConfig | None = None,
    grid: Sequence[float] = DEFAULT_GRID,
    jobs: int = 1,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[EvalReport, list[AblationResult]]:
    """Reference run plus one run per removed group, all on the same folds."""
    base_config = base_config or FeatureConfig.all()
    for g in groups:
        if g not in base_config.enabled_groups:
            raise ValueError(f"group {g!r} is not enabled in the reference configuration")
    plan = stratified_folds(dataset.labels, k, repeats, seed)
    idx = _Indexed(dataset)
    reference = _evaluate(idx, dataset, plan, base_config.enabled_groups, grid, jobs, tol, max_iter)
    results = []
    for g in groups:
        report = _evaluate(idx, dataset, plan, base_config.enabled_groups - {g}, grid, jobs, tol, max_iter)
        t, p = paired_t_test(reference.fold_accuracies, report.fold_accuracies)
        results.append(AblationResult(g, report, t, p))
    return reference, results


def ablation_tsv(reference: EvalReport, results: Sequence[AblationResult], alpha: float = 0.05) -> str:
    rows = ["experiment\taccuracy\tt\tp\tsignificant"]
    rows.append(f"all features\t{100 * reference.mean_accuracy:.2f}\t\t\t")
    for res in results:
        t = "nan" if math.isnan(res.t) else f"{res.t:.4f}"
        sig = "yes" if res.p < alpha else "no"
        rows.append(f"all - {res.removed_group}\t{100 * res.report.mean_accuracy:.2f}\t{t}\t{res.p:.6g}\t{sig}")
    return "\n".join(rows) + "\n"


def ablation_dict(reference: EvalReport, results: Sequence[AblationResult]) -> dict:
    return {
        "reference": reference.to_dict(),
        "ablations": [
            {
                "removed_group": r.removed_group,
                "mean_accuracy": r.report.mean_accuracy,
                "pooled_accuracy": r.report.pooled_accuracy,
                "micro": dict(zip(("P", "R", "F1"), r.report.micro)),
                "t": None if math.isnan(r.t) else r.t,
                "p": r.p,
                "fold_accuracies": r.report.fold_accuracies,
            }
            for r in results
        ],
    }
