"""Weighted stochastic block model with per-modality kernels.

Each modality draws one Gaussian feature per node, turns it into an RBF
affinity and masks that affinity by a block matrix indexed by the hidden
community labels. Different block recipes give modalities that separate
different subsets of the communities.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .errors import KExceedsNError, UnknownRecipeError
from .evaluate import ClusterLabels
from .graph import AffinityMatrix, normalized_laplacian, rbf_affinity
from .matio import ensure_dir, write_labels_csv, write_matrix
from .rjd import LaplacianStack


@dataclass(frozen=True)
class BlockParams:
    """Scalar knobs shared by the four block recipes."""

    alpha: float = 0.9
    beta: float = 0.05
    gamma: float = 0.06
    delta: float = 0.2
    zeta: float = 0.05
    theta: float = 0.7
    xi: float = 0.9
    epsilon: float = 0.005
    eta: float = 0.005
    chi: float = 0.005

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "zeta", "theta",
                     "xi", "epsilon", "eta", "chi"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"block parameter {name} must be finite and >= 0")


def block_matrix(recipe: int, params: BlockParams, k: int) -> np.ndarray:
    """k x k community-pair mask for one modality.

    1: strong diagonal on the first half of the communities, weak on the
       rest, faint background everywhere.
    2: mirror of 1 (strong second half).
    3: constant background, no community structure.
    4: uniform diagonal against a uniform off-diagonal.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    ones = np.ones((k, k))
    first = int(np.ceil(k / 2))
    if recipe == 1:
        diag = np.array([params.alpha] * first + [params.beta] * (k - first))
        return np.diag(diag) + params.epsilon * ones
    if recipe == 2:
        diag = np.array([params.zeta] * first + [params.xi] * (k - first))
        return np.diag(diag) + params.eta * ones
    if recipe == 3:
        return (params.gamma + params.chi) * ones
    if recipe == 4:
        return params.theta * np.eye(k) + params.delta * (ones - np.eye(k))
    raise UnknownRecipeError(f"no block recipe {recipe!r}")


@dataclass(frozen=True)
class SbmConfig:
    n: int = 300
    k: int = 6
    sigma_per_modality: tuple = (1.0, 1.0, 1.0e6, 1.0)
    recipes: tuple = (1, 2, 3, 4)
    block_params: BlockParams = BlockParams()
    dirichlet_concentration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.n < self.k:
            raise KExceedsNError(f"k={self.k} communities need at least that many nodes, got n={self.n}")
        if len(self.sigma_per_modality) != len(self.recipes):
            raise ValueError("one bandwidth per block recipe required")
        if any(s <= 0 for s in self.sigma_per_modality):
            raise ValueError("bandwidths must be positive")
        if self.dirichlet_concentration <= 0:
            raise ValueError("dirichlet concentration must be positive")
        object.__setattr__(self, "sigma_per_modality", tuple(float(s) for s in self.sigma_per_modality))
        object.__setattr__(self, "recipes", tuple(int(r) for r in self.recipes))

    @property
    def m(self) -> int:
        return len(self.recipes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sigma_per_modality"] = list(self.sigma_per_modality)
        d["recipes"] = list(self.recipes)
        return d


PRESETS = {
    "sbm-paper": SbmConfig(),
}


def preset(name: str, seed: int = 0) -> SbmConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return dataclasses.replace(PRESETS[name], seed=seed)


def cluster_sizes(rng: np.random.Generator, n: int, k: int,
                  concentration: float) -> np.ndarray:
    """Dirichlet proportions rounded to integers by largest remainder.

    Every community ends up nonempty: zero-size communities borrow one node
    from the currently largest one.
    """
    proportions = rng.dirichlet(np.full(k, concentration))
    target = proportions * n
    sizes = np.floor(target).astype(int)
    remainder = n - int(sizes.sum())
    order = np.argsort(-(target - sizes), kind="stable")
    sizes[order[:remainder]] += 1
    while np.any(sizes == 0):
        sizes[int(np.argmax(sizes))] -= 1
        sizes[int(np.argmin(sizes))] += 1
    return sizes


@dataclass(frozen=True)
class MultimodalDataset:
    labels: ClusterLabels
    affinities: tuple
    stack: LaplacianStack
    config: SbmConfig

    @property
    def n(self) -> int:
        return self.labels.n

    @property
    def m(self) -> int:
        return len(self.affinities)


def generate(config: SbmConfig) -> MultimodalDataset:
    """Draw one dataset. A single seeded stream drives, in order, the
    community proportions, the label permutation and each modality's
    feature vector, so datasets are bitwise reproducible."""
    rng = np.random.default_rng(config.seed)
    sizes = cluster_sizes(rng, config.n, config.k, config.dirichlet_concentration)
    block_labels = np.repeat(np.arange(config.k), sizes)
    labels = block_labels[rng.permutation(config.n)]

    affinities = []
    for recipe, sigma in zip(config.recipes, config.sigma_per_modality):
        feature = rng.standard_normal(config.n)
        kernel = rbf_affinity(feature, sigma).weights
        mask = block_matrix(recipe, config.block_params, config.k)
        weights = kernel * mask[labels[:, None], labels[None, :]]
        affinities.append(AffinityMatrix(weights))

    laplacians = [normalized_laplacian(a) for a in affinities]
    stack = LaplacianStack(laplacians, names=[f"modality_{i}" for i in range(config.m)])
    return MultimodalDataset(
        labels=ClusterLabels(assignments=labels, k=config.k),
        affinities=tuple(affinities),
        stack=stack,
        config=config,
    )


def export_dataset(dataset: MultimodalDataset, outdir) -> None:
    """labels.csv + one binary affinity per modality + provenance.json."""
    out = ensure_dir(outdir)
    write_labels_csv(out / "labels.csv", dataset.labels.assignments)
    files = []
    for i, affinity in enumerate(dataset.affinities):
        name = f"affinity_{i}.bin"
        write_matrix(out / name, affinity.weights)
        files.append(name)
    provenance = {
        "kind": "weighted-sbm",
        "config": dataset.config.to_dict(),
        "affinity_files": files,
        "labels_file": "labels.csv",
    }
    with open(out / "provenance.json", "w") as fh:
        json.dump(provenance, fh, indent=2, sort_keys=True)
        fh.write("\n")
