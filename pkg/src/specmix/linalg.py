"""Dense symmetric eigen-decompositions, convex combinations and simplex
utilities.

Everything here works on plain float64 numpy arrays wrapped in thin
dataclasses that enforce the invariants the rest of the package relies on:
symmetric matrices are exactly symmetric, eigenvector blocks are orthonormal,
mixture weights live on the probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import (
    CountExceedsDimError,
    DimensionMismatchError,
    LengthMismatchError,
    NonFiniteError,
    NumericalError,
)


def _as_square_float(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains NaN or infinite entries")
    return a


@dataclass(frozen=True)
class SymmetricMatrix:
    """Real symmetric matrix. Symmetry is enforced at construction by
    averaging with the transpose, so downstream eigh calls never see
    asymmetric round-off."""

    entries: np.ndarray

    def __post_init__(self):
        a = _as_square_float(self.entries)
        object.__setattr__(self, "entries", 0.5 * (a + a.T))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenPairs:
    """Ascending eigenvalues with matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vecs = np.asarray(self.vectors, dtype=float)
        if vals.ndim != 1 or vecs.ndim != 2 or vecs.shape[1] != vals.shape[0]:
            raise DimensionMismatchError(
                f"inconsistent eigenpair shapes {vals.shape} / {vecs.shape}"
            )
        if np.any(np.diff(vals) < 0):
            raise NumericalError("eigenvalues are not ascending")
        gram = vecs.T @ vecs
        defect = np.linalg.norm(gram - np.eye(vals.shape[0]))
        if defect > constants.ORTHONORMALITY_TOL:
            raise NumericalError(f"eigenvectors not orthonormal (defect {defect:.3e})")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "vectors", vecs)

    @property
    def count(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SimplexWeights:
    """Nonnegative weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise DimensionMismatchError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(w)):
            raise NonFiniteError("weights contain NaN or infinite entries")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > constants.SIMPLEX_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.shape[0]


def matrix_entries(obj) -> np.ndarray:
    """Extract the raw square array from any matrix-like object used in the
    package (SymmetricMatrix, GraphLaplacian, or a plain array)."""
    if isinstance(obj, SymmetricMatrix):
        return obj.entries
    inner = getattr(obj, "matrix", None)
    if isinstance(inner, SymmetricMatrix):
        return inner.entries
    return _as_square_float(obj)


def _matrix_list(matrices) -> list[np.ndarray]:
    seq = getattr(matrices, "laplacians", matrices)
    arrays = [matrix_entries(item) for item in seq]
    if not arrays:
        raise DimensionMismatchError("no matrices to combine")
    n = arrays[0].shape[0]
    for a in arrays[1:]:
        if a.shape[0] != n:
            raise DimensionMismatchError("matrices in a stack must share one size")
    return arrays


def sym_eigh(matrix, count: int) -> EigenPairs:
    """Bottom ``count`` eigenpairs of a symmetric matrix, ascending.

    Full dense decomposition followed by truncation; at the problem sizes
    this package targets that is faster and more robust than iterative
    sparse solvers.
    """
    a = matrix_entries(matrix)
    n = a.shape[0]
    if count < 1:
        raise ValueError("count must be at least 1")
    if count > n:
        raise CountExceedsDimError(f"requested {count} eigenpairs of a {n}x{n} matrix")
    a = 0.5 * (a + a.T)
    values, vectors = np.linalg.eigh(a)
    values = values[:count]
    vectors = vectors[:, :count]
    residual = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.any(residual / scale > constants.EIGEN_RESIDUAL_TOL):
        raise NumericalError("eigendecomposition residual exceeds tolerance")
    return EigenPairs(values=values, vectors=vectors)


def combine_raw(matrices, coeffs) -> np.ndarray:
    """Linear combination of symmetric matrices with arbitrary real
    coefficients. No simplex requirement; used by gradients and oracles."""
    arrays = _matrix_list(matrices)
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.shape[0] != len(arrays):
        raise LengthMismatchError(
            f"{len(arrays)} matrices but {c.shape} coefficients"
        )
    if not np.all(np.isfinite(c)):
        raise NonFiniteError("coefficients contain NaN or infinite entries")
    out = np.zeros_like(arrays[0])
    for w, a in zip(c, arrays):
        out += w * a
    return out


def combine(matrices, weights) -> SymmetricMatrix:
    """Convex combination sum_i w_i A_i for simplex weights w."""
    if not isinstance(weights, SimplexWeights):
        weights = SimplexWeights(np.asarray(weights, dtype=float))
    return SymmetricMatrix(combine_raw(matrices, weights.weights))


def sample_simplex(m: int, rng: np.random.Generator) -> SimplexWeights:
    """Draw uniform(0,1) coordinates and normalize them to sum one.

    This is the sampling law used by the randomized search; it is not the
    flat Dirichlet on the simplex.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    raw = rng.uniform(0.0, 1.0, size=m)
    total = raw.sum()
    while total <= 0.0:  # measure-zero guard
        raw = rng.uniform(0.0, 1.0, size=m)
        total = raw.sum()
    w = raw / total
    # renormalize once more so the sum is exact to the last ulp
    return SimplexWeights(w / w.sum())


def project_simplex(v) -> SimplexWeights:
    """Euclidean projection of a real vector onto the probability simplex.

    Sort-and-threshold: with u the coordinates sorted descending, find the
    largest j such that u_j + (1 - sum_{r<=j} u_r) / j > 0 and shift by that
    threshold, clipping at zero.
    """
    x = np.asarray(v, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DimensionMismatchError("expected a nonempty 1-d vector")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("vector contains NaN or infinite entries")
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, x.size + 1)
    mask = u + (1.0 - css) / j > 0.0
    rho = int(np.nonzero(mask)[0][-1])
    theta = (1.0 - css[rho]) / (rho + 1.0)
    w = np.maximum(x + theta, 0.0)
    return SimplexWeights(w / w.sum())
