"""Clustering evaluation: native k-means, mutual-information scoring and
trial-landscape statistics."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, KExceedsNError, LengthMismatchError
from .graph import FeatureMatrix
from .rjd import Embedding, select_trial


@dataclass(frozen=True)
class ClusterLabels:
    """Integer assignments in [0, k)."""

    assignments: np.ndarray
    k: int = 0

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatchError("assignments must be a nonempty 1-d vector")
        k = self.k if self.k else int(a.max()) + 1
        if a.min() < 0 or a.max() >= k:
            raise ValueError(f"assignments must lie in [0, {k})")
        object.__setattr__(self, "assignments", a)
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.assignments.shape[0]


def _rows(data) -> np.ndarray:
    if isinstance(data, Embedding):
        return data.columns
    if isinstance(data, FeatureMatrix):
        return data.rows
    a = np.asarray(data, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatchError("expected 2-d sample rows")
    return a


def kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding. Falls back to uniform choice over unused points
    when all remaining distances are zero (duplicate-heavy data)."""
    n = x.shape[0]
    chosen = np.empty(k, dtype=int)
    chosen[0] = rng.integers(n)
    d2 = np.sum((x - x[chosen[0]]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0.0:
            probs = d2 / total
            chosen[j] = rng.choice(n, p=probs)
        else:
            unused = np.setdiff1d(np.arange(n), chosen[:j])
            chosen[j] = rng.choice(unused)
        d2 = np.minimum(d2, np.sum((x - x[chosen[j]]) ** 2, axis=1))
    return x[chosen].copy()


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator, max_iters: int):
    centers = kmeans_pp_init(x, k, rng)
    labels = np.full(x.shape[0], -1, dtype=int)
    for _ in range(max_iters):
        d2 = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(d2, axis=1)
        own = d2[np.arange(x.shape[0]), new_labels]
        for j in range(k):
            if not np.any(new_labels == j):
                # revive an empty cluster with the worst-fit point
                idx = int(np.argmax(own))
                new_labels[idx] = j
                own[idx] = 0.0
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centers[j] = x[labels == j].mean(axis=0)
    inertia = 0.0
    for j in range(k):
        members = x[labels == j]
        if members.size:
            inertia += float(np.sum((members - members.mean(axis=0)) ** 2))
    return labels, inertia


def kmeans(data, k: int, restarts: int = 10, seed: int = 0,
           max_iters: int = 300) -> ClusterLabels:
    """Best-of-restarts Lloyd iteration with k-means++ seeding.

    Each restart runs on its own child stream of ``seed`` so restart r is
    reproducible on its own; the restart with the smallest within-cluster
    sum of squares wins, earlier restarts winning ties.
    """
    x = _rows(data)
    n = x.shape[0]
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > n:
        raise KExceedsNError(f"k={k} exceeds {n} samples")
    if restarts < 1:
        raise ValueError("need at least one restart")
    children = np.random.SeedSequence(seed).spawn(restarts)
    best_labels, best_inertia = None, np.inf
    for child in children:
        labels, inertia = _lloyd(x, k, np.random.default_rng(child), max_iters)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return ClusterLabels(assignments=best_labels, k=k)


def wcss(data, labels: ClusterLabels) -> float:
    """Within-cluster sum of squares for given assignments."""
    x = _rows(data)
    total = 0.0
    for j in range(labels.k):
        members = x[labels.assignments == j]
        if members.size:
            total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


def _assignments(labels) -> np.ndarray:
    if isinstance(labels, ClusterLabels):
        return labels.assignments
    return np.asarray(labels, dtype=int)


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information with the arithmetic-mean normalizer
    (H(a) + H(b)) / 2, natural logarithms.

    When both partitions are single-cluster the score is 1 if they agree
    trivially (they always do) and the degenerate normalizer never divides.
    """
    a = _assignments(labels_a)
    b = _assignments(labels_b)
    if a.shape != b.shape:
        raise LengthMismatchError("label vectors differ in length")
    n = a.shape[0]
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1.0)
    pa = table.sum(axis=1) / n
    pb = table.sum(axis=0) / n
    ha = -float(np.sum(pa * np.log(pa, where=pa > 0, out=np.zeros_like(pa))))
    hb = -float(np.sum(pb * np.log(pb, where=pb > 0, out=np.zeros_like(pb))))
    denom = 0.5 * (ha + hb)
    if denom <= 0.0:
        return 1.0 if table.shape == (1, 1) else 0.0
    pj = table / n
    outer = pa[:, None] * pb[None, :]
    mask = pj > 0
    # sorted reduction: the sum must not depend on argument order, symmetry
    # is promised exactly
    terms = np.sort(pj[mask] * np.log(pj[mask] / outer[mask]))
    mi = float(np.sum(terms))
    return float(min(max(mi / denom, 0.0), 1.0))


def compare_labels(labels_a, labels_b, metric: str = "nmi") -> float:
    if metric == "nmi":
        return nmi(labels_a, labels_b)
    if metric in ("ari", "purity"):
        raise NotImplementedError(f"{metric} scoring is reserved but not implemented")
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class LandscapeSummary:
    """Objective-vs-quality statistics over a batch of trials."""

    per_trial_nmi: np.ndarray
    mean_nmi: float
    std_nmi: float
    selected_index: int
    selected_nmi: float
    above_mean: bool


def landscape_stats(trials, labels, k: int, eval_seed: int = 0,
                    restarts: int = 10) -> LandscapeSummary:
    """Cluster every trial embedding with the same fixed evaluation seed and
    relate the selected trial to the batch."""
    trials = sorted(trials, key=lambda t: t.trial_index)
    if not trials:
        raise ValueError("no trials to evaluate")
    truth = _assignments(labels)
    scores = np.empty(len(trials))
    for i, trial in enumerate(trials):
        predicted = kmeans(trial.embedding, k, restarts=restarts, seed=eval_seed)
        scores[i] = nmi(predicted, truth)
    selected = select_trial(trials)
    pos = next(i for i, t in enumerate(trials) if t.trial_index == selected.trial_index)
    mean = float(scores.mean())
    return LandscapeSummary(
        per_trial_nmi=scores,
        mean_nmi=mean,
        std_nmi=float(scores.std()),
        selected_index=selected.trial_index,
        selected_nmi=float(scores[pos]),
        above_mean=bool(scores[pos] >= mean),
    )


def write_landscape_csv(trials, per_trial_nmi, path) -> None:
    trials = sorted(trials, key=lambda t: t.trial_index)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_index", "objective", "nmi"])
        for trial, score in zip(trials, per_trial_nmi):
            writer.writerow([trial.trial_index, repr(float(trial.objective)), repr(float(score))])


def write_report(path, report: dict) -> None:
    """Reports are plain JSON with sorted keys so identical runs produce
    identical bytes apart from the wall-clock field."""
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
