import numpy as np
import pytest

from specmix import generate, preset


@pytest.fixture(scope="session")
def sbm_dataset():
    """One shared instance of the built-in benchmark preset (seed 0)."""
    return generate(preset("sbm-paper", seed=0))


def random_laplacian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized Laplacian of a dense random weighted graph."""
    w = rng.uniform(0.1, 1.0, size=(n, n))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    d = w.sum(axis=1)
    inv = 1.0 / np.sqrt(d)
    lap = -w * inv[:, None] * inv[None, :]
    np.fill_diagonal(lap, 1.0)
    return 0.5 * (lap + lap.T)


def balanced_laplacian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Laplacian of a graph scaled to unit degrees, so every such matrix
    shares the kernel direction 1/sqrt(n)."""
    w = rng.uniform(0.2, 1.0, size=(n, n))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    for _ in range(200):
        scale = 1.0 / np.sqrt(w.sum(axis=1))
        w = w * scale[:, None] * scale[None, :]
    return random_laplacian_from_weights(w)


def random_laplacian_from_weights(w: np.ndarray) -> np.ndarray:
    d = w.sum(axis=1)
    inv = 1.0 / np.sqrt(d)
    lap = -w * inv[:, None] * inv[None, :]
    np.fill_diagonal(lap, 1.0)
    return 0.5 * (lap + lap.T)
