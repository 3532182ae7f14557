"""Randomized search over convex Laplacian mixtures.

Each trial draws mixture weights on the simplex, eigendecomposes the
combined Laplacian, discards the near-zero mode and keeps the next k
eigenpairs. The trial whose kept eigenvalues have the largest sum wins;
that sum is the worst-case-smoothness surrogate the search maximizes.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constants
from .errors import (
    CountExceedsDimError,
    DimensionMismatchError,
    NonOrthonormalEmbeddingError,
    SpecmixError,
    SpectralGapWarning,
    ZeroModeAmbiguityError,
)
from .graph import GraphLaplacian
from .linalg import SimplexWeights, SymmetricMatrix, combine_raw, sample_simplex, sym_eigh


@dataclass(frozen=True)
class LaplacianStack:
    """Fixed-order collection of same-size symmetric matrices, one per
    modality. Items may be GraphLaplacian objects or bare symmetric
    matrices (useful for synthetic stacks in tests)."""

    laplacians: tuple
    names: tuple = ()

    def __init__(self, laplacians, names=None):
        items = []
        for item in laplacians:
            if isinstance(item, (GraphLaplacian, SymmetricMatrix)):
                items.append(item)
            else:
                items.append(SymmetricMatrix(np.asarray(item, dtype=float)))
        if not items:
            raise DimensionMismatchError("a stack needs at least one matrix")
        n = items[0].n
        if any(item.n != n for item in items):
            raise DimensionMismatchError("all stack matrices must share one size")
        if names is None:
            names = tuple(f"modality_{i}" for i in range(len(items)))
        else:
            names = tuple(names)
            if len(names) != len(items):
                raise DimensionMismatchError("one name per matrix required")
        object.__setattr__(self, "laplacians", tuple(items))
        object.__setattr__(self, "names", names)

    @property
    def m(self) -> int:
        return len(self.laplacians)

    @property
    def n(self) -> int:
        return self.laplacians[0].n

    @property
    def matrices(self) -> list[np.ndarray]:
        out = []
        for item in self.laplacians:
            out.append(item.matrix.entries if isinstance(item, GraphLaplacian) else item.entries)
        return out


@dataclass(frozen=True)
class Embedding:
    """Orthonormal columns spanning the selected spectral subspace."""

    columns: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.columns, dtype=float)
        if x.ndim != 2:
            raise DimensionMismatchError("embedding must be 2-d")
        defect = np.linalg.norm(x.T @ x - np.eye(x.shape[1]))
        if defect > constants.ORTHONORMALITY_TOL:
            raise NonOrthonormalEmbeddingError(
                f"embedding columns not orthonormal (defect {defect:.3e})"
            )
        object.__setattr__(self, "columns", x)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class Trial:
    """One evaluated mixture."""

    mu: SimplexWeights
    eigenvalues: np.ndarray
    embedding: Embedding
    objective: float
    trial_index: int
    seed_offset: int
    gap_warning: bool = False

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float)
        if abs(float(vals.sum()) - self.objective) > 1e-12 * max(1.0, abs(self.objective)):
            raise ValueError("objective must equal the sum of kept eigenvalues")
        object.__setattr__(self, "eigenvalues", vals)


def run_trial(stack: LaplacianStack, k: int, mu, trial_index: int = 0,
              seed_offset: int = 0) -> Trial:
    """Evaluate one mixture: combine, take modes 1..k (mode 0 dropped),
    objective = sum of their eigenvalues.

    Raises ZeroModeAmbiguityError when the combination is numerically
    disconnected. A closed gap between modes k and k+1 only sets
    ``gap_warning`` and emits a SpectralGapWarning.
    """
    if not isinstance(mu, SimplexWeights):
        mu = SimplexWeights(np.asarray(mu, dtype=float))
    if mu.m != stack.m:
        raise DimensionMismatchError(f"stack has {stack.m} modalities, mu has {mu.m}")
    n = stack.n
    if k < 1 or k + 1 > n:
        raise CountExceedsDimError(f"k={k} needs a matrix of size at least {k + 1}")
    combined = combine_raw(stack.matrices, mu.weights)
    pairs = sym_eigh(combined, min(k + 2, n))
    values = pairs.values
    if values[1] < constants.ZERO_MODE_TOL:
        raise ZeroModeAmbiguityError(
            f"second-smallest eigenvalue {values[1]:.3e} is numerically zero; "
            "the combined graph is disconnected"
        )
    kept = values[1:k + 1]
    gap_warning = False
    if k + 2 <= n and values[k + 1] - values[k] < constants.TRIAL_GAP_TOL:
        gap_warning = True
        warnings.warn(
            f"gap between modes {k} and {k + 1} is below {constants.TRIAL_GAP_TOL}",
            SpectralGapWarning,
            stacklevel=2,
        )
    return Trial(
        mu=mu,
        eigenvalues=kept.copy(),
        embedding=Embedding(pairs.vectors[:, 1:k + 1].copy()),
        objective=float(kept.sum()),
        trial_index=trial_index,
        seed_offset=seed_offset,
        gap_warning=gap_warning,
    )


def _draw_weights(m: int, rng: np.random.Generator, sampler: str) -> SimplexWeights:
    if sampler == "normalized-uniform":
        return sample_simplex(m, rng)
    if sampler == "dirichlet":
        w = rng.dirichlet(np.ones(m))
        return SimplexWeights(w / w.sum())
    raise ValueError(f"unknown sampler {sampler!r}")


def select_trial(trials) -> Trial:
    """Largest objective wins; objectives within the tie tolerance of the
    maximum are broken by the lowest trial index."""
    trials = list(trials)
    if not trials:
        raise ValueError("no trials to select from")
    best = max(t.objective for t in trials)
    tied = [t for t in trials if t.objective >= best - constants.TIE_BREAK_TOL]
    return min(tied, key=lambda t: t.trial_index)


def rjd_base(stack: LaplacianStack, trials: int, k: int, seed: int,
             sampler: str = "normalized-uniform", threads: int = 1):
    """Run ``trials`` independent mixture draws and pick the best.

    Per-trial seed is ``seed + trial_index`` so any single trial can be
    reproduced in isolation. Trials that fail (for example a disconnected
    combination) are skipped; the run aborts only when every trial failed.

    Returns (selected, kept_trials) with kept_trials ordered by index.
    """
    if trials < 1:
        raise ValueError("need at least one trial")

    def one(t: int):
        rng = np.random.default_rng(seed + t)
        mu = _draw_weights(stack.m, rng, sampler)
        try:
            return run_trial(stack, k, mu, trial_index=t, seed_offset=seed + t), None
        except SpecmixError as exc:
            return None, exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(t) for t in range(trials)]

    kept = [trial for trial, _ in results if trial is not None]
    if not kept:
        errors = [exc for _, exc in results if exc is not None]
        raise errors[-1]
    return select_trial(kept), kept


def write_trial_ledger(trials, path) -> None:
    """CSV of every kept trial: index, weights, objective, eigenvalues."""
    trials = sorted(trials, key=lambda t: t.trial_index)
    if not trials:
        raise ValueError("no trials to write")
    m = trials[0].mu.m
    k = trials[0].eigenvalues.shape[0]
    header = (["trial_index"]
              + [f"mu_{i + 1}" for i in range(m)]
              + ["objective"]
              + [f"lambda_{j + 1}" for j in range(k)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in trials:
            row = ([t.trial_index]
                   + [repr(float(w)) for w in t.mu.weights]
                   + [repr(float(t.objective))]
                   + [repr(float(v)) for v in t.eigenvalues])
            writer.writerow(row)
