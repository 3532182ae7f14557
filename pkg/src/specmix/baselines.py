"""Comparison methods: multiview spectral variants, co-trained k-means and
Jacobi joint diagonalization."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import constants
from .errors import (
    CountExceedsDimError,
    DimensionMismatchError,
    EmptyClusterError,
    IsolatedNodeError,
    KExceedsNError,
    NonOrthogonalInitError,
    ZeroNormRowError,
)
from .evaluate import ClusterLabels, kmeans, kmeans_pp_init, nmi
from .graph import AffinityMatrix, FeatureMatrix, GraphLaplacian, normalized_laplacian
from .linalg import sym_eigh
from .rjd import Embedding, LaplacianStack


def _laplacian_modes(matrix, k: int) -> np.ndarray:
    """Modes 1..k (smallest mode dropped) of a Laplacian-like matrix."""
    pairs = sym_eigh(matrix, k + 1)
    return pairs.vectors[:, 1:k + 1].copy()


def mvsc(affinities, k: int, iterations: int = 5) -> np.ndarray:
    """Cross-view affinity reweighting.

    Each view's affinity is multiplied by the sum of the other views'
    embedding projectors, symmetrized, clamped at zero and re-embedded; all
    views update simultaneously from the previous iterate. Output is the
    n x (m k) concatenation of the per-view embeddings.
    """
    affinities = [a if isinstance(a, AffinityMatrix) else AffinityMatrix(np.asarray(a, dtype=float))
                  for a in affinities]
    if not affinities:
        raise DimensionMismatchError("need at least one view")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    embeddings = []
    for i, affinity in enumerate(affinities):
        try:
            lap = normalized_laplacian(affinity)
        except IsolatedNodeError as exc:
            raise IsolatedNodeError(exc.indices, context=f"view {i}, init") from exc
        embeddings.append(_laplacian_modes(lap.matrix, k))

    for j in range(iterations):
        updated = []
        for i, affinity in enumerate(affinities):
            projector = np.zeros((affinity.n, affinity.n))
            for r, x in enumerate(embeddings):
                if r != i:
                    projector += x @ x.T
            s = projector @ affinity.weights
            s = 0.5 * (s + s.T)
            s = np.maximum(s, 0.0)
            np.fill_diagonal(s, 0.0)
            try:
                lap = normalized_laplacian(AffinityMatrix(s))
            except IsolatedNodeError as exc:
                raise IsolatedNodeError(
                    exc.indices, context=f"view {i}, iteration {j + 1}"
                ) from exc
            updated.append(_laplacian_modes(lap.matrix, k))
        embeddings = updated
    return np.hstack(embeddings)


def _kernel_direction(item) -> np.ndarray:
    if isinstance(item, GraphLaplacian):
        return item.kernel_vector
    v = sym_eigh(item, 1).vectors[:, 0]
    return v / np.linalg.norm(v)


def _complement_basis(v: np.ndarray) -> np.ndarray:
    # columns 1..n-1 of any orthogonal completion of v
    n = v.shape[0]
    basis = np.empty((n, n))
    basis[:, 0] = v
    idx = int(np.argmin(np.abs(v)))
    basis[:, 1:] = np.eye(n)[:, [i for i in range(n) if i != idx]]
    q, _ = np.linalg.qr(basis)
    # qr may flip the first column; it still spans v, the rest spans v-perp
    return q[:, 1:]


def coreg_mvsc(stack: LaplacianStack, k: int, lam: float = 0.5,
               iterations: int = 5, reward_agreement: bool = True) -> np.ndarray:
    """Centroid-free co-regularized spectral clustering.

    Per iteration each view re-embeds from its Laplacian plus a coupling
    term built from the other views' current embedding projectors. The
    default subtracts lam times the projectors so that directions the other
    views favor are pulled into the bottom of the spectrum (agreement is
    rewarded); ``reward_agreement=False`` adds the term instead, matching
    write-ups that state the update with a plus sign.

    Re-embedding deflates each view's known kernel direction explicitly, so
    the trivial mode stays excluded no matter how large lam is.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    matrices = stack.matrices
    sign = -1.0 if reward_agreement else 1.0
    embeddings = [_laplacian_modes(lap, k) for lap in stack.laplacians]
    complements = [_complement_basis(_kernel_direction(item)) for item in stack.laplacians]

    for _ in range(iterations):
        updated = []
        for i, lap in enumerate(matrices):
            coupled = lap.copy()
            for r, x in enumerate(embeddings):
                if r != i:
                    coupled += sign * lam * (x @ x.T)
            q = complements[i]
            reduced = q.T @ coupled @ q
            pairs = sym_eigh(reduced, k)
            updated.append(q @ pairs.vectors)
        embeddings = updated
    return np.hstack(embeddings)


def _view_rows(view) -> np.ndarray:
    if isinstance(view, FeatureMatrix):
        return view.rows
    if isinstance(view, Embedding):
        return view.columns
    return FeatureMatrix(np.asarray(view, dtype=float)).rows


def _reseed_empty(centers, members_count, rows, own_dist):
    """Replace centroids of empty clusters by the currently worst-fit
    points, one point per empty cluster."""
    own = own_dist.copy()
    empties = [j for j in range(centers.shape[0]) if members_count[j] == 0]
    for j in empties:
        if not np.any(own > 0):
            raise EmptyClusterError(f"cannot re-seed cluster {j}: no spread left")
        idx = int(np.argmax(own))
        centers[j] = rows[idx]
        own[idx] = 0.0
    return centers


def _co_em(rows_a: np.ndarray, rows_b: np.ndarray, k: int, max_iters: int,
           rng: np.random.Generator, cosine: bool):
    """Alternating two-view k-means: one view assigns, the other updates.

    Returns the final per-view centroids and the last assignment vector.
    """
    n = rows_a.shape[0]

    def dists(rows, centers):
        if cosine:
            return 1.0 - rows @ centers.T
        diff = rows[:, None, :] - centers[None, :, :]
        return np.sum(diff * diff, axis=2)

    def update(rows, assign):
        centers = np.empty((k, rows.shape[1]))
        counts = np.bincount(assign, minlength=k)
        for j in range(k):
            if counts[j] > 0:
                centers[j] = rows[assign == j].mean(axis=0)
                if cosine:
                    norm = np.linalg.norm(centers[j])
                    if norm <= 0:  # antipodal collapse
                        counts[j] = 0
                        continue
                    centers[j] /= norm
            else:
                centers[j] = 0.0
        if np.any(counts == 0):
            d = dists(rows, centers)
            own = d[np.arange(n), assign]
            centers = _reseed_empty(centers, counts, rows, own)
            if cosine:
                centers /= np.linalg.norm(centers, axis=1, keepdims=True)
        return centers

    centers = [kmeans_pp_init(rows_a, k, rng), kmeans_pp_init(rows_b, k, rng)]
    if cosine:
        centers = [c / np.linalg.norm(c, axis=1, keepdims=True) for c in centers]
    views = [rows_a, rows_b]
    assign = None
    for t in range(max_iters):
        assigning = 1 - (t % 2)  # view 2 assigns first, then they alternate
        updating = t % 2
        new_assign = np.argmin(dists(views[assigning], centers[assigning]), axis=1)
        centers[updating] = update(views[updating], new_assign)
        if assign is not None and np.array_equal(new_assign, assign):
            assign = new_assign
            break
        assign = new_assign
    if assign is None:
        assign = np.argmin(dists(views[1], centers[1]), axis=1)
    return centers, assign


def _average_responsibility_labels(views, centers, assign, k: int, cosine: bool):
    """Soft-min responsibilities per view, averaged, then argmax."""
    n = views[0].shape[0]
    total = np.zeros((n, k))
    for rows, cents in zip(views, centers):
        if cosine:
            d2 = (1.0 - rows @ cents.T) ** 2
        else:
            diff = rows[:, None, :] - cents[None, :, :]
            d2 = np.sum(diff * diff, axis=2)
        sigma2 = float(np.mean(d2[np.arange(n), assign]))
        sigma2 = max(sigma2, 1e-300)
        logits = -d2 / (2.0 * sigma2)
        logits -= logits.max(axis=1, keepdims=True)
        resp = np.exp(logits)
        total += resp / resp.sum(axis=1, keepdims=True)
    return np.argmax(total, axis=1)


def _two_view_rows(views):
    if len(views) != 2:
        raise DimensionMismatchError("exactly two views are supported")
    rows = [_view_rows(v) for v in views]
    if rows[0].shape[0] != rows[1].shape[0]:
        raise DimensionMismatchError("views must describe the same samples")
    return rows


def mv_kmeans(views, k: int, max_iters: int = 100, seed: int = 0) -> ClusterLabels:
    """Two-view co-trained k-means with k-means++ initialization.

    Assignments computed in one view drive the centroid update in the other,
    alternating until the assignments stop changing. Final labels maximize
    the cross-view average of spherical-Gaussian responsibilities.
    """
    rows = _two_view_rows(views)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > rows[0].shape[0]:
        raise KExceedsNError(f"k={k} exceeds {rows[0].shape[0]} samples")
    rng = np.random.default_rng(seed)
    centers, assign = _co_em(rows[0], rows[1], k, max_iters, rng, cosine=False)
    labels = _average_responsibility_labels(rows, centers, assign, k, cosine=False)
    return ClusterLabels(assignments=labels, k=k)


def mv_sph_kmeans(views, k: int, max_iters: int = 100, seed: int = 0) -> ClusterLabels:
    """Spherical variant: rows are projected to the unit sphere and cosine
    distance replaces the squared Euclidean one, making the method invariant
    to positive per-row scaling."""
    rows = _two_view_rows(views)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > rows[0].shape[0]:
        raise KExceedsNError(f"k={k} exceeds {rows[0].shape[0]} samples")
    normalized = []
    for rv in rows:
        norms = np.linalg.norm(rv, axis=1)
        bad = np.nonzero(norms <= 0)[0]
        if bad.size:
            raise ZeroNormRowError(f"rows {bad.tolist()} have zero norm")
        normalized.append(rv / norms[:, None])
    rng = np.random.default_rng(seed)
    centers, assign = _co_em(normalized[0], normalized[1], k, max_iters, rng, cosine=True)
    labels = _average_responsibility_labels(normalized, centers, assign, k, cosine=True)
    return ClusterLabels(assignments=labels, k=k)


@njit(cache=True)
def _jd_sweep(a, q):  # pragma: no cover - exercised via jacobi_jd
    m, n, _ = a.shape
    for p in range(n - 1):
        for r in range(p + 1, n):
            ton = 0.0
            toff = 0.0
            for i in range(m):
                h = a[i, p, p] - a[i, r, r]
                g = a[i, p, r] + a[i, r, p]
                ton += h * h - g * g
                toff += 2.0 * h * g
            # quarter angle, not the half-angle form: the latter degenerates
            # to 0 when toff == 0 with ton < 0 (equal diagonals, as in any
            # normalized Laplacian) where the true maximizer is pi/4
            theta = 0.25 * np.arctan2(toff, ton)
            c = np.cos(theta)
            s = np.sin(theta)
            if abs(s) < 1e-15:
                continue
            for i in range(m):
                for col in range(n):
                    xp = a[i, p, col]
                    xr = a[i, r, col]
                    a[i, p, col] = c * xp + s * xr
                    a[i, r, col] = -s * xp + c * xr
                for row in range(n):
                    xp = a[i, row, p]
                    xr = a[i, row, r]
                    a[i, row, p] = c * xp + s * xr
                    a[i, row, r] = -s * xp + c * xr
            for row in range(n):
                xp = q[row, p]
                xr = q[row, r]
                q[row, p] = c * xp + s * xr
                q[row, r] = -s * xp + c * xr


def offdiag_mass(matrices) -> float:
    """Sum of squared off-diagonal entries across a family of matrices."""
    total = 0.0
    for a in matrices:
        total += float(np.sum(a * a) - np.sum(np.diag(a) ** 2))
    return total


@dataclass(frozen=True)
class JdResult:
    basis: np.ndarray
    offdiag_history: np.ndarray
    sweeps: int


def jacobi_jd(stack: LaplacianStack, sweeps: int = 20, tol: float = 1e-10,
              init: np.ndarray | None = None, on_sweep=None) -> JdResult:
    """Cyclic Jacobi joint diagonalization.

    Each (p, q) plane gets the closed-form rotation angle that maximizes the
    family's diagonal mass in that plane, so the total off-diagonal mass
    never increases. Sweeps stop early once the per-sweep reduction falls
    under ``tol``. With one matrix this is the classical Jacobi eigensolver.

    The returned basis Q satisfies: transformed_i = Q^T original_i Q.
    """
    if sweeps < 0:
        raise ValueError("sweeps must be nonnegative")
    n = stack.n
    a = np.ascontiguousarray(np.stack(stack.matrices))
    if init is not None:
        q0 = np.asarray(init, dtype=float)
        if q0.shape != (n, n):
            raise DimensionMismatchError(f"init basis must be {n}x{n}")
        defect = np.linalg.norm(q0.T @ q0 - np.eye(n))
        if defect > constants.JD_INIT_TOL:
            raise NonOrthogonalInitError(f"init basis defect {defect:.3e}")
        q = q0.copy()
        a = np.ascontiguousarray(np.einsum("sp,isq,qt->ipt", q0, a, q0,
                                           optimize=True))
        # einsum above computes Q^T A Q per matrix
    else:
        q = np.eye(n)
    history = [offdiag_mass(a)]
    done = 0
    for sweep in range(1, sweeps + 1):
        _jd_sweep(a, q)
        history.append(offdiag_mass(a))
        done = sweep
        if on_sweep is not None:
            on_sweep(sweep, q, history[-1])
        if history[-2] - history[-1] < tol:
            break
    return JdResult(basis=q, offdiag_history=np.array(history), sweeps=done)


def order_modes(basis: np.ndarray, stack: LaplacianStack, k: int) -> Embedding:
    """Rank basis columns by their average Rayleigh quotient over the stack,
    drop the smoothest one (the shared near-kernel direction) and keep the
    next k."""
    q = np.asarray(basis, dtype=float)
    if q.ndim != 2 or q.shape[0] != stack.n:
        raise DimensionMismatchError("basis rows must match stack size")
    if k + 1 > q.shape[1]:
        raise CountExceedsDimError(f"need {k + 1} columns, basis has {q.shape[1]}")
    scores = np.zeros(q.shape[1])
    for lap in stack.matrices:
        scores += np.sum(q * (lap @ q), axis=0)
    scores /= stack.m
    order = np.argsort(scores, kind="stable")
    return Embedding(q[:, order[1:k + 1]])


def jd_refine_curve(stack: LaplacianStack, k: int, init: np.ndarray | None = None,
                    sweeps: int = 10, tol: float = 1e-10, labels=None,
                    eval_seed: int = 0, eval_restarts: int = 10):
    """Joint diagonalization with a per-sweep clustering learning curve.

    Returns (JdResult, curve) where curve rows are dicts with iteration,
    offdiag_mass and nmi (None without labels). Row 0 describes the
    starting basis.
    """
    truth = None if labels is None else labels
    curve = []

    def score(q) -> float | None:
        if truth is None:
            return None
        embedding = order_modes(q, stack, k)
        predicted = kmeans(embedding, k, restarts=eval_restarts, seed=eval_seed)
        return nmi(predicted, truth)

    q0 = np.eye(stack.n) if init is None else np.asarray(init, dtype=float)
    start_mass = offdiag_mass([q0.T @ lap @ q0 for lap in stack.matrices])
    curve.append({"iteration": 0, "nmi": score(q0), "offdiag_mass": start_mass})

    def on_sweep(sweep, q, mass):
        curve.append({"iteration": sweep, "nmi": score(q), "offdiag_mass": mass})

    result = jacobi_jd(stack, sweeps=sweeps, tol=tol, init=init, on_sweep=on_sweep)
    return result, curve


def write_refine_curve(curve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "nmi", "offdiag_mass"])
        for row in curve:
            score = "" if row["nmi"] is None else repr(float(row["nmi"]))
            writer.writerow([row["iteration"], score, repr(float(row["offdiag_mass"]))])
