"""Worst-case smoothness objectives and projected gradient ascent over the
mixture simplex.

The concave objective g(mu) is the sum of the k smallest nonzero
eigenvalues of the combined Laplacian; its gradient at a point with an open
spectral gap is the vector of per-modality traces tr(X^T L_i X) where X
spans the kept modes. Maximizing g is the dual of minimizing, over feasible
embeddings, the worst per-modality roughness.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import constants
from .errors import (
    CountExceedsDimError,
    NonFiniteObjectiveError,
    NonOrthonormalEmbeddingError,
    SpectralGapWarning,
    ZeroModeAmbiguityError,
)
from .evaluate import kmeans, nmi
from .linalg import SimplexWeights, combine_raw, project_simplex, sym_eigh
from .rjd import Embedding, LaplacianStack


def _checked_mu(stack: LaplacianStack, mu) -> SimplexWeights:
    if not isinstance(mu, SimplexWeights):
        mu = SimplexWeights(np.asarray(mu, dtype=float))
    if mu.m != stack.m:
        raise CountExceedsDimError(f"stack has {stack.m} modalities, mu has {mu.m}")
    return mu


def _spectrum(stack: LaplacianStack, mu: SimplexWeights, count: int):
    combined = combine_raw(stack.matrices, mu.weights)
    pairs = sym_eigh(combined, count)
    if pairs.values[1] < constants.ZERO_MODE_TOL:
        raise ZeroModeAmbiguityError(
            f"second-smallest eigenvalue {pairs.values[1]:.3e} is numerically zero"
        )
    return pairs


def base_objective(stack: LaplacianStack, mu, k: int) -> float:
    """Sum of eigenvalues 1..k (ascending, zero mode dropped) of the
    combination."""
    mu = _checked_mu(stack, mu)
    if k < 1 or k + 1 > stack.n:
        raise CountExceedsDimError(f"k={k} out of range for n={stack.n}")
    pairs = _spectrum(stack, mu, k + 1)
    return float(pairs.values[1:k + 1].sum())


def single_directional_objective(stack: LaplacianStack, mu) -> float:
    """Smallest nonzero eigenvalue of the combination."""
    return base_objective(stack, mu, 1)


def _trace_per_modality(stack: LaplacianStack, x: np.ndarray) -> np.ndarray:
    return np.array([float(np.sum(x * (lap @ x))) for lap in stack.matrices])


def objective_gradient(stack: LaplacianStack, mu, k: int) -> np.ndarray:
    """Per-modality traces tr(X^T L_i X) over the kept modes.

    When the gap between modes k and k+1 is numerically closed the kept
    subspace is ambiguous; the gradient falls back to averaging the trace
    over the whole degenerate eigenvalue cluster (a valid supergradient
    choice) and a SpectralGapWarning is emitted.
    """
    mu = _checked_mu(stack, mu)
    n = stack.n
    if k < 1 or k + 1 > n:
        raise CountExceedsDimError(f"k={k} out of range for n={n}")
    pairs = _spectrum(stack, mu, n)
    values, vectors = pairs.values, pairs.vectors
    gap = values[k + 1] - values[k] if k + 1 < n else np.inf
    if gap >= constants.GRADIENT_GAP_TOL:
        x = vectors[:, 1:k + 1]
        return _trace_per_modality(stack, x)
    warnings.warn(
        f"gap {gap:.3e} between modes {k} and {k + 1} is closed; averaging over "
        "the degenerate cluster",
        SpectralGapWarning,
        stacklevel=2,
    )
    # chain together every eigenvalue within the gap tolerance of mode k
    lo = k
    while lo - 1 >= 1 and values[lo] - values[lo - 1] < constants.GRADIENT_GAP_TOL:
        lo -= 1
    hi = k
    while hi + 1 <= n - 1 and values[hi + 1] - values[hi] < constants.GRADIENT_GAP_TOL:
        hi += 1
    grad = np.zeros(stack.m)
    if lo > 1:
        grad += _trace_per_modality(stack, vectors[:, 1:lo])
    fraction = (k - lo + 1) / (hi - lo + 1)
    grad += fraction * _trace_per_modality(stack, vectors[:, lo:hi + 1])
    return grad


@dataclass(frozen=True)
class PgaConfig:
    k: int
    iterations: int = 30
    step_size: float = 0.5
    objective_kind: str = "base"
    record_trace: bool = True
    max_halvings: int = 20
    eval_restarts: int = 10
    eval_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.objective_kind not in ("base", "single-directional"):
            raise ValueError(f"unknown objective kind {self.objective_kind!r}")


@dataclass(frozen=True)
class PgaTracePoint:
    iteration: int
    mu: np.ndarray
    objective: float
    nmi: float | None = None


@dataclass
class PgaTrace:
    points: list = field(default_factory=list)

    def append(self, point: PgaTracePoint) -> None:
        self.points.append(point)

    def __len__(self) -> int:
        return len(self.points)

    def final(self) -> PgaTracePoint:
        return self.points[-1]

    def to_csv(self, path) -> None:
        if not self.points:
            raise ValueError("empty trace")
        m = self.points[0].mu.shape[0]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective", "nmi"]
                            + [f"mu_{i + 1}" for i in range(m)])
            for p in self.points:
                score = "" if p.nmi is None else repr(float(p.nmi))
                writer.writerow([p.iteration, repr(float(p.objective)), score]
                                + [repr(float(w)) for w in p.mu])


def pga_maximize(stack: LaplacianStack, config: PgaConfig, labels=None):
    """Projected gradient ascent from the uniform mixture.

    Each iteration takes a gradient step, projects back onto the simplex and
    halves the step while the objective would decrease (up to
    ``max_halvings``; the last candidate is then taken regardless, so
    monotonicity is attempted, not guaranteed). When labels are given every
    recorded point also carries the NMI of k-means on the current bottom-k
    embedding, computed with the fixed evaluation seed.

    Returns (final weights, trace).
    """
    m = stack.m
    obj_k = config.k if config.objective_kind == "base" else 1

    def objective(w: SimplexWeights) -> float:
        return base_objective(stack, w, obj_k)

    def scored(w: SimplexWeights) -> float | None:
        if labels is None:
            return None
        pairs = _spectrum(stack, w, config.k + 1)
        embedding = Embedding(pairs.vectors[:, 1:config.k + 1])
        predicted = kmeans(embedding, config.k,
                           restarts=config.eval_restarts, seed=config.eval_seed)
        return nmi(predicted, labels)

    mu = SimplexWeights(np.full(m, 1.0 / m))
    current = objective(mu)
    trace = PgaTrace()
    if config.record_trace:
        trace.append(PgaTracePoint(0, mu.weights.copy(), current, scored(mu)))

    for it in range(1, config.iterations + 1):
        grad = objective_gradient(stack, mu, obj_k)
        step = config.step_size
        candidate, cand_obj = None, -np.inf
        for _ in range(config.max_halvings + 1):
            candidate = project_simplex(mu.weights + step * grad)
            cand_obj = objective(candidate)
            if cand_obj >= current:
                break
            step *= 0.5
        if not np.isfinite(cand_obj):
            raise NonFiniteObjectiveError(
                f"objective became non-finite at iteration {it}", trace=trace
            )
        mu, current = candidate, cand_obj
        if config.record_trace or it == config.iterations:
            trace.append(PgaTracePoint(it, mu.weights.copy(), current, scored(mu)))
    return mu, trace


def smoothness_vector(stack: LaplacianStack, embedding) -> np.ndarray:
    """Per-modality roughness tr(X^T L_i X) of an orthonormal embedding."""
    if isinstance(embedding, Embedding):
        x = embedding.columns
    else:
        x = np.asarray(embedding, dtype=float)
        defect = np.linalg.norm(x.T @ x - np.eye(x.shape[1]))
        if defect > constants.ORTHONORMALITY_TOL:
            raise NonOrthonormalEmbeddingError(
                f"columns not orthonormal (defect {defect:.3e})"
            )
    if x.shape[0] != stack.n:
        raise CountExceedsDimError("embedding rows must match stack size")
    return _trace_per_modality(stack, x)


def worst_case_smoothness(stack: LaplacianStack, embedding, p: float = np.inf) -> float:
    """l_p norm (default max) of the per-modality roughness vector."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    s = smoothness_vector(stack, embedding)
    return float(np.linalg.norm(s, ord=p))
