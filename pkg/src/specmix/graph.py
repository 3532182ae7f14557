"""Affinity construction and normalized graph Laplacians."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import constants
from .errors import (
    CountExceedsDimError,
    DegenerateBandwidthError,
    DimensionMismatchError,
    IsolatedNodeError,
    NonFiniteError,
    NonPositiveSigmaError,
)
from .linalg import SymmetricMatrix


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric nonnegative weights with a zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"affinity must be square, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise NonFiniteError("affinity contains NaN or infinite entries")
        w = 0.5 * (w + w.T)
        if np.any(w < 0):
            raise ValueError("affinity weights must be nonnegative")
        np.fill_diagonal(w, 0.0)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-per-sample features."""

    rows: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.rows, dtype=float)
        if z.ndim != 2:
            raise DimensionMismatchError("features must be 2-d (samples x dims)")
        if not np.all(np.isfinite(z)):
            raise NonFiniteError("features contain NaN or infinite entries")
        object.__setattr__(self, "rows", z)

    @property
    def n(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True)
class GraphLaplacian:
    """Symmetric normalized Laplacian together with the degree vector it was
    built from."""

    matrix: SymmetricMatrix
    degrees: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.degrees, dtype=float)
        if d.shape != (self.matrix.n,):
            raise DimensionMismatchError("degree vector length mismatch")
        object.__setattr__(self, "degrees", d)

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def kernel_vector(self) -> np.ndarray:
        """Unit vector spanning the zero eigenspace: D^{1/2} 1 normalized."""
        v = np.sqrt(self.degrees)
        return v / np.linalg.norm(v)


def _pairwise_sq_dists(z: np.ndarray) -> np.ndarray:
    # squared-form expansion; clip because cancellation can go slightly negative
    sq = np.sum(z * z, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (z @ z.T)
    return np.maximum(d2, 0.0)


def rbf_affinity(x, sigma: float) -> AffinityMatrix:
    """Gaussian kernel exp(-(x_p - x_q)^2 / (2 sigma^2)) on a scalar feature
    per sample, diagonal zeroed."""
    if sigma <= 0 or not np.isfinite(sigma):
        raise NonPositiveSigmaError(f"sigma must be positive, got {sigma}")
    v = np.asarray(x, dtype=float)
    if v.ndim == 2 and v.shape[1] == 1:
        v = v[:, 0]
    if v.ndim != 1:
        raise DimensionMismatchError("rbf_affinity expects one feature per sample")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("features contain NaN or infinite entries")
    diff = v[:, None] - v[None, :]
    s = np.exp(-(diff * diff) / (2.0 * sigma * sigma))
    np.fill_diagonal(s, 0.0)
    return AffinityMatrix(s)


def self_tuning_affinity(features, nn_index: int = 7) -> AffinityMatrix:
    """Self-tuning Gaussian kernel w_pq = exp(-||z_p - z_q||^2 / (sigma_p sigma_q)).

    sigma_p is the Euclidean distance from sample p to its nn_index-th
    nearest neighbor (self excluded). Bandwidths are clamped from below at
    1e-12 times the overall feature scale; if any bandwidth still sits under
    the absolute floor the data is degenerate and an error is raised.
    """
    z = features.rows if isinstance(features, FeatureMatrix) else None
    if z is None:
        z = FeatureMatrix(np.asarray(features, dtype=float)).rows
    n = z.shape[0]
    if nn_index < 1:
        raise ValueError("nn_index must be at least 1")
    if nn_index > n - 1:
        raise CountExceedsDimError(
            f"nn_index {nn_index} needs at least {nn_index + 1} samples, got {n}"
        )
    d2 = _pairwise_sq_dists(z)
    dist = np.sqrt(d2)
    # column nn_index after sorting each row skips the self distance at 0
    sigma = np.sort(dist, axis=1)[:, nn_index]
    scale = float(dist.max())
    sigma = np.maximum(sigma, constants.BANDWIDTH_FLOOR * scale)
    if np.any(sigma < constants.BANDWIDTH_FLOOR):
        raise DegenerateBandwidthError(
            "self-tuned bandwidths collapsed; features are (near) identical"
        )
    w = np.exp(-d2 / (sigma[:, None] * sigma[None, :]))
    np.fill_diagonal(w, 0.0)
    return AffinityMatrix(w)


def normalized_laplacian(affinity: AffinityMatrix, variant: str = "symmetric") -> GraphLaplacian:
    """L = I - D^{-1/2} W D^{-1/2}, symmetrized.

    Only the symmetric normalization is implemented; the parameter exists so
    that call sites name the convention they rely on.
    """
    if variant != "symmetric":
        raise ValueError(f"unsupported Laplacian variant {variant!r}")
    if not isinstance(affinity, AffinityMatrix):
        affinity = AffinityMatrix(np.asarray(affinity, dtype=float))
    w = affinity.weights
    degrees = w.sum(axis=1)
    bad = np.nonzero(degrees <= 0.0)[0]
    if bad.size:
        raise IsolatedNodeError(bad)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    lap = -w * inv_sqrt[:, None] * inv_sqrt[None, :]
    np.fill_diagonal(lap, 1.0)
    return GraphLaplacian(matrix=SymmetricMatrix(lap), degrees=degrees)


def connectivity(affinity, threshold: float = 0.0) -> int:
    """Number of connected components of the graph whose edges are the
    affinity entries strictly above ``threshold``."""
    w = affinity.weights if isinstance(affinity, AffinityMatrix) else np.asarray(affinity, dtype=float)
    adj = csr_matrix(w > threshold)
    count, _ = connected_components(adj, directed=False)
    return int(count)
