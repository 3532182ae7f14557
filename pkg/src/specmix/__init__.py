"""Multimodal spectral clustering via randomized Laplacian mixtures."""

__version__ = "0.1.0"

from .baselines import (
    JdResult,
    coreg_mvsc,
    jacobi_jd,
    jd_refine_curve,
    mv_kmeans,
    mv_sph_kmeans,
    mvsc,
    order_modes,
)
from .evaluate import ClusterLabels, kmeans, landscape_stats, nmi
from .graph import (
    AffinityMatrix,
    FeatureMatrix,
    GraphLaplacian,
    connectivity,
    normalized_laplacian,
    rbf_affinity,
    self_tuning_affinity,
)
from .linalg import (
    EigenPairs,
    SimplexWeights,
    SymmetricMatrix,
    combine,
    project_simplex,
    sample_simplex,
    sym_eigh,
)
from .rjd import Embedding, LaplacianStack, Trial, rjd_base, run_trial, select_trial
from .sbm import BlockParams, MultimodalDataset, SbmConfig, block_matrix, generate, preset
from .smoothness import (
    PgaConfig,
    base_objective,
    objective_gradient,
    pga_maximize,
    single_directional_objective,
    smoothness_vector,
    worst_case_smoothness,
)

__all__ = [
    "AffinityMatrix",
    "BlockParams",
    "ClusterLabels",
    "EigenPairs",
    "Embedding",
    "FeatureMatrix",
    "GraphLaplacian",
    "JdResult",
    "LaplacianStack",
    "MultimodalDataset",
    "PgaConfig",
    "SbmConfig",
    "SimplexWeights",
    "SymmetricMatrix",
    "Trial",
    "base_objective",
    "block_matrix",
    "combine",
    "connectivity",
    "coreg_mvsc",
    "generate",
    "jacobi_jd",
    "jd_refine_curve",
    "kmeans",
    "landscape_stats",
    "mv_kmeans",
    "mv_sph_kmeans",
    "mvsc",
    "nmi",
    "normalized_laplacian",
    "objective_gradient",
    "order_modes",
    "pga_maximize",
    "preset",
    "project_simplex",
    "rbf_affinity",
    "rjd_base",
    "run_trial",
    "sample_simplex",
    "select_trial",
    "self_tuning_affinity",
    "single_directional_objective",
    "smoothness_vector",
    "sym_eigh",
    "worst_case_smoothness",
]
