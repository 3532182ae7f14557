"""Shared numerical tolerances.

Every tolerance used by a validation check lives here so that tests and
library code agree on a single value.
"""

# Orthonormality of eigenvector / embedding columns (Frobenius norm of Q^T Q - I).
ORTHONORMALITY_TOL = 1e-10

# Eigen residual ||A v - lambda v|| relative to max(1, ||A||_F).
EIGEN_RESIDUAL_TOL = 1e-8

# Simplex weights must sum to 1 within this.
SIMPLEX_SUM_TOL = 1e-12

# PSD check: smallest eigenvalue of a Laplacian must exceed -PSD_TOL.
PSD_TOL = 1e-9

# Normalized Laplacian eigenvalues must not exceed 2 + LAPLACIAN_UPPER_TOL.
LAPLACIAN_UPPER_TOL = 1e-9

# A combined Laplacian whose second-smallest eigenvalue falls below this is
# treated as disconnected (the dropped near-zero mode is no longer unique).
ZERO_MODE_TOL = 1e-10

# Spectral gap thresholds that trigger a SpectralGapWarning.
TRIAL_GAP_TOL = 1e-10
GRADIENT_GAP_TOL = 1e-8

# Trials whose objectives agree within this are considered tied; the lowest
# trial index wins.
TIE_BREAK_TOL = 1e-12

# Self-tuning bandwidths are clamped to 1e-12 times the feature scale and must
# stay above 1e-12 afterwards.
BANDWIDTH_FLOOR = 1e-12

# Orthogonality tolerance for a user-supplied joint-diagonalization basis.
JD_INIT_TOL = 1e-8

# Per-view blocks of concatenated baseline embeddings.
BLOCK_ORTHONORMALITY_TOL = 1e-8
