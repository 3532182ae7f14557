import dataclasses
import json

import numpy as np
import pytest

from specmix import BlockParams, SbmConfig, block_matrix, connectivity, generate, preset
from specmix.errors import KExceedsNError, UnknownRecipeError
from specmix.matio import read_labels_csv, read_matrix
from specmix.sbm import cluster_sizes, export_dataset

PARAMS = BlockParams()


def test_block_recipe_1_values():
    b = block_matrix(1, PARAMS, 6)
    assert b[0, 0] == pytest.approx(0.905, abs=1e-15)
    assert b[3, 3] == pytest.approx(0.055, abs=1e-15)
    assert b[0, 3] == pytest.approx(0.005, abs=1e-15)


def test_block_recipe_2_mirrors_1():
    b = block_matrix(2, PARAMS, 6)
    assert b[0, 0] == pytest.approx(0.055, abs=1e-15)
    assert b[3, 3] == pytest.approx(0.905, abs=1e-15)
    assert b[0, 3] == pytest.approx(0.005, abs=1e-15)


def test_block_recipe_3_constant():
    b = block_matrix(3, PARAMS, 6)
    assert np.all(b == b[0, 0])
    assert b[0, 0] == pytest.approx(0.065, abs=1e-15)


def test_block_recipe_4_two_levels():
    b = block_matrix(4, PARAMS, 6)
    assert np.all(np.diag(b) == 0.7)
    off = b[~np.eye(6, dtype=bool)]
    assert np.all(off == 0.2)


def test_block_recipe_odd_k_splits_ceil():
    b = block_matrix(1, PARAMS, 5)
    diag = np.diag(b) - PARAMS.epsilon
    assert np.allclose(diag[:3], PARAMS.alpha)
    assert np.allclose(diag[3:], PARAMS.beta)


def test_block_unknown_recipe():
    with pytest.raises(UnknownRecipeError):
        block_matrix(5, PARAMS, 6)


def test_generate_preset_shapes(sbm_dataset):
    assert sbm_dataset.m == 4
    assert sbm_dataset.n == 300
    for affinity in sbm_dataset.affinities:
        assert affinity.weights.shape == (300, 300)
    counts = np.bincount(sbm_dataset.labels.assignments, minlength=6)
    assert counts.size == 6
    assert np.all(counts >= 1)


def test_generate_modality3_is_flat(sbm_dataset):
    # the huge-bandwidth modality reduces to its constant block value
    w = sbm_dataset.affinities[2].weights
    off = w[~np.eye(300, dtype=bool)]
    assert np.max(np.abs(off - 0.065)) < 1e-9


def test_generate_is_bitwise_reproducible():
    config = SbmConfig(n=60, k=4, seed=11)
    a = generate(config)
    b = generate(config)
    assert np.array_equal(a.labels.assignments, b.labels.assignments)
    for wa, wb in zip(a.affinities, b.affinities):
        assert np.array_equal(wa.weights, wb.weights)


def test_generate_seed_changes_data():
    a = generate(SbmConfig(n=60, k=4, seed=0))
    b = generate(SbmConfig(n=60, k=4, seed=1))
    assert not np.array_equal(a.affinities[0].weights, b.affinities[0].weights)


def test_generate_preset_laplacians_connected(sbm_dataset):
    for affinity in sbm_dataset.affinities:
        assert connectivity(affinity) == 1


def test_within_cluster_weights_hit_block_diagonal_exactly():
    # no background mass and a flat kernel: weights == block diagonal value;
    # balanced sizes keep every node a within-cluster neighbor (epsilon=0
    # leaves no cross-cluster edges, so a singleton cluster would be isolated)
    params = BlockParams(epsilon=0.0, eta=0.0, chi=0.0)
    config = SbmConfig(n=40, k=4, sigma_per_modality=(1e9,), recipes=(1,),
                       block_params=params, dirichlet_concentration=1e6, seed=3)
    ds = generate(config)
    labels = ds.labels.assignments
    w = ds.affinities[0].weights
    members = np.nonzero(labels == 0)[0]
    for p in members:
        for q in members:
            if p != q:
                assert w[p, q] == params.alpha


def test_cluster_sizes_sum_and_positivity():
    rng = np.random.default_rng(0)
    for _ in range(50):
        sizes = cluster_sizes(rng, 300, 6, 1.0)
        assert sizes.sum() == 300
        assert np.all(sizes >= 1)


def test_cluster_sizes_tiny_concentration_still_covers():
    rng = np.random.default_rng(5)
    for _ in range(50):
        sizes = cluster_sizes(rng, 30, 6, 0.05)
        assert sizes.sum() == 30
        assert np.all(sizes >= 1)


def test_cluster_sizes_huge_concentration_balances():
    # concentration -> infinity forces near-equal proportions
    rng = np.random.default_rng(7)
    for _ in range(100):
        sizes = cluster_sizes(rng, 300, 6, 1e6)
        assert sizes.max() / sizes.min() <= 1.25


def test_config_validation():
    with pytest.raises(KExceedsNError):
        SbmConfig(n=10, k=20)
    with pytest.raises(ValueError):
        SbmConfig(n=10, k=1)
    with pytest.raises(ValueError):
        SbmConfig(sigma_per_modality=(1.0, 1.0), recipes=(1, 2, 3))
    with pytest.raises(ValueError):
        SbmConfig(dirichlet_concentration=0.0)
    with pytest.raises(ValueError):
        BlockParams(alpha=-0.1)


def test_preset_lookup():
    config = preset("sbm-paper", seed=9)
    assert config.seed == 9
    assert config.n == 300 and config.k == 6 and config.m == 4
    with pytest.raises(ValueError):
        preset("nope")


def test_export_roundtrip(tmp_path):
    ds = generate(SbmConfig(n=30, k=3, seed=2))
    export_dataset(ds, tmp_path)
    labels = read_labels_csv(tmp_path / "labels.csv")
    assert np.array_equal(labels, ds.labels.assignments)
    with open(tmp_path / "provenance.json") as fh:
        prov = json.load(fh)
    assert prov["config"]["n"] == 30
    assert prov["config"]["k"] == 3
    for i, affinity in enumerate(ds.affinities):
        stored = read_matrix(tmp_path / f"affinity_{i}.bin")
        assert np.array_equal(stored, affinity.weights)


def test_config_to_dict_roundtrips_through_replace():
    config = SbmConfig(n=50, k=5, seed=4)
    d = config.to_dict()
    rebuilt = dataclasses.replace(
        SbmConfig(),
        n=d["n"], k=d["k"], seed=d["seed"],
        sigma_per_modality=tuple(d["sigma_per_modality"]),
        recipes=tuple(d["recipes"]),
        dirichlet_concentration=d["dirichlet_concentration"],
    )
    assert rebuilt.n == config.n and rebuilt.k == config.k
