import itertools

import numpy as np
import pytest

from phasepol import (
    ModulationSet,
    auxiliary_indices,
    build_auxiliary_masks,
    build_ensemble,
    build_vertex_masks,
    check_full_spark,
    ensemble_from_dict,
    ensemble_to_dict,
    load_ensemble,
    mask_count,
    save_ensemble,
    symmetrize,
)
from phasepol.masks import OMEGA


def sinusoid(m, M):
    return np.exp(2j * np.pi * m * np.arange(M) / M) / M


def measurement_columns(vertex_set):
    """The M x (K*M) matrix whose columns are D_k f_m, (k, m) lexicographic."""
    M = vertex_set.dim
    cols = [vertex_set.masks[k].diag * sinusoid(m, M)
            for k in range(vertex_set.count) for m in range(M)]
    return np.stack(cols, axis=1)


def min_normalized_minor(matrix):
    """Brute-force oracle: smallest |det| over all M x M column subsets,
    after normalizing columns to unit norm."""
    M = matrix.shape[0]
    unit = matrix / np.linalg.norm(matrix, axis=0)
    combos = np.array(list(itertools.combinations(range(matrix.shape[1]), M)))
    stacked = unit[:, combos]            # (M, n_combos, M)
    stacked = np.transpose(stacked, (1, 0, 2))
    return float(np.min(np.abs(np.linalg.det(stacked))))


def test_deterministic_alphas_m4_k2():
    vs = build_vertex_masks(4, 2, "deterministic")
    assert np.allclose(vs.alphas, [1.0, np.exp(2j * np.pi / 8)])
    assert check_full_spark(vs.alphas, 4)


def test_single_mask_is_identity():
    vs = build_vertex_masks(4, 1, "deterministic")
    assert np.allclose(vs.masks[0].diag, np.ones(4))
    assert check_full_spark(vs.alphas, 4)


def test_power_form_invariant():
    vs = build_vertex_masks(6, 3, "deterministic")
    grid = np.arange(6)
    for k in range(3):
        assert np.allclose(vs.masks[k].diag, vs.alphas[k] ** grid)


def test_brute_force_full_spark_m3_k2():
    vs = build_vertex_masks(3, 2, "deterministic")
    assert min_normalized_minor(measurement_columns(vs)) > 1e-8


@pytest.mark.parametrize("M", [3, 5, 8, 16])
def test_check_full_spark_half_step(M):
    assert check_full_spark([1.0, np.exp(2j * np.pi / (2 * M))], M)


@pytest.mark.parametrize("M", [4, 6, 9])
def test_check_full_spark_root_ratio_fails(M):
    assert not check_full_spark([1.0, np.exp(2j * np.pi * 3 / M)], M)


def test_check_full_spark_counterexample_has_singular_minor():
    # alpha = {1, i} at M=4: the ratio is a 4th root of unity
    from phasepol.masks import DiagonalMask, VertexMaskSet

    alphas = np.array([1.0, 1j])
    assert not check_full_spark(alphas, 4)
    masks = tuple(DiagonalMask(a ** np.arange(4)) for a in alphas)
    bad = VertexMaskSet(4, "random-unit-circle", masks, alphas)
    assert min_normalized_minor(measurement_columns(bad)) < 1e-10


def test_check_full_spark_rejects_zero():
    with pytest.raises(ValueError):
        check_full_spark([0.0, 1.0], 4)


def test_deterministic_full_spark_sweep():
    for M in range(1, 513):
        for K in range(1, 13):
            alphas = np.exp(2j * np.pi * np.arange(K) / (K * M))
            assert check_full_spark(alphas, M), (M, K)


def test_brute_force_agreement_small_sizes():
    for M in range(2, 7):
        for K in range(1, 4):
            vs = build_vertex_masks(M, K, "deterministic")
            assert min_normalized_minor(measurement_columns(vs)) > 1e-8, (M, K)


def test_auxiliary_mask_counts():
    vs = build_vertex_masks(20, 3, "deterministic")
    A = ModulationSet(20, (1, 2, 3, 5, 7, 13, 15, 17, 18, 19))
    aux = build_auxiliary_masks(vs, A)
    assert len(aux) == 180
    assert len(aux) == mask_count(3, len(A)) - 3
    empty = build_auxiliary_masks(vs, ModulationSet(20, ()))
    assert empty == ()


def test_mask_count_values():
    assert mask_count(3, 10) == 183
    assert mask_count(12, 1) == 246
    for K in (1, 2, 7):
        assert mask_count(K, 0) == K
    with pytest.raises(ValueError):
        mask_count(0, 3)
    with pytest.raises(ValueError):
        mask_count(2, -1)


def test_auxiliary_entrywise_example():
    # M=4, k=kp=0, a=1, r=0, alpha_0=1 -> diag (2, 1+i, 0, 1-i)
    vs = build_vertex_masks(4, 1, "deterministic")
    aux = build_auxiliary_masks(vs, ModulationSet(4, (1, 3)))
    target = {(am.k, am.kp, am.a, am.r): am for am in aux}[(0, 0, 1, 0)]
    assert np.allclose(target.mask.diag, [2, 1 + 1j, 0, 1 - 1j], atol=1e-12)


def test_modulation_identity_random_tuples():
    # D_k f_m + omega^r D_kp f_mp equals the combined mask applied to f_m
    rng = np.random.default_rng(5)
    M, K = 16, 4
    for _ in range(100):
        vs = build_vertex_masks(M, K, "random-unit-circle", seed=int(rng.integers(1 << 30)))
        k = int(rng.integers(K))
        kp = int(rng.integers(k + 1))
        m, mp = (int(v) for v in rng.integers(M, size=2))
        if m == mp:
            mp = (m + 1) % M
        r = int(rng.integers(3))
        a = (mp - m) % M
        aux = build_auxiliary_masks(vs, symmetrize([a], M))
        combined = {(am.k, am.kp, am.a, am.r): am for am in aux}[(k, kp, a, r)]
        lhs = vs.masks[k].diag * sinusoid(m, M) + OMEGA ** r * vs.masks[kp].diag * sinusoid(mp, M)
        rhs = combined.mask.diag * sinusoid(m, M)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_auxiliary_length_matches_count_formula():
    rng = np.random.default_rng(11)
    for _ in range(10):
        K = int(rng.integers(1, 5))
        M = int(rng.integers(4, 24))
        vs = build_vertex_masks(M, K, "deterministic")
        A = symmetrize(rng.integers(1, M, size=rng.integers(0, 5)), M)
        aux = build_auxiliary_masks(vs, A)
        assert len(aux) == mask_count(K, len(A)) - K
        assert sum(1 for _ in auxiliary_indices(K, A.elements)) == len(aux)


def test_gaussian_mode():
    vs = build_vertex_masks(32, 3, "gaussian", seed=9)
    assert vs.alphas is None
    assert vs.count == 3
    for mask in vs.masks:
        assert np.allclose(mask.diag.imag, 0.0)
    again = build_vertex_masks(32, 3, "gaussian", seed=9)
    for a, b in zip(vs.masks, again.masks):
        assert np.array_equal(a.diag, b.diag)


def test_random_unit_circle_mode():
    vs = build_vertex_masks(16, 4, "random-unit-circle", seed=2)
    assert np.allclose(np.abs(vs.alphas), 1.0)
    assert check_full_spark(vs.alphas, 16)
    again = build_vertex_masks(16, 4, "random-unit-circle", seed=2)
    assert np.array_equal(vs.alphas, again.alphas)


def test_build_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_vertex_masks(0, 2)
    with pytest.raises(ValueError):
        build_vertex_masks(4, 0)
    with pytest.raises(ValueError):
        build_vertex_masks(4, 2, "no-such-mode")


def test_ensemble_json_roundtrip(tmp_path):
    vs = build_vertex_masks(8, 2, "gaussian", seed=3)
    A = symmetrize([1, 3], 8)
    ensemble = build_ensemble(vs, A)
    doc = ensemble_to_dict(ensemble)
    assert doc["dim"] == 8 and doc["K"] == 2 and doc["alpha_mode"] == "gaussian"
    assert doc["modulation_set"] == [1, 3, 5, 7]
    assert len(doc["vertex_masks"]) == 2 and len(doc["vertex_masks"][0]) == 8
    assert set(doc["auxiliary_masks"][0]) == {"k", "k'", "r", "a", "diag"}
    back = ensemble_from_dict(doc)
    assert back.total_masks == ensemble.total_masks
    for a, b in zip(back.auxiliary, ensemble.auxiliary):
        assert (a.k, a.kp, a.r, a.a) == (b.k, b.kp, b.r, b.a)
        assert np.allclose(a.mask.diag, b.mask.diag)
    path = tmp_path / "ensemble.json"
    save_ensemble(ensemble, path)
    loaded = load_ensemble(path)
    assert np.allclose(loaded.vertex.masks[1].diag, ensemble.vertex.masks[1].diag)
