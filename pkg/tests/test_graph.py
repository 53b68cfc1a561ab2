import numpy as np
import pytest

from phasepol import (
    ModulationSet,
    SetGenConfig,
    build_graph,
    draw_B,
    edge_list_lines,
    largest_component_after_removal,
    spectral_gap_bias_report,
    spectral_gap_eigen,
    spectral_gap_from_bias,
    symmetrize,
    write_edge_list,
)


def random_set(rng, M):
    while True:
        A = symmetrize(rng.integers(1, M, size=rng.integers(1, max(2, M // 4))), M)
        if len(A) > 0:
            return A


def test_four_cycle():
    g = build_graph(1, 4, ModulationSet(4, (1, 3)))
    W = g.dense_adjacency()
    expected = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]], dtype=float)
    assert np.array_equal(W, expected)
    report = spectral_gap_eigen(g)
    assert report.method == "eigendecomposition"
    assert abs(report.lambda_max - 2.0) <= 1e-9
    assert abs(report.second_magnitude - 2.0) <= 1e-9
    assert abs(report.gap) <= 1e-9


def test_complete_graph_gap():
    g = build_graph(1, 5, ModulationSet(5, (1, 2, 3, 4)))
    report = spectral_gap_eigen(g)
    assert abs(report.lambda_max - 4.0) <= 1e-9
    assert abs(report.gap - 0.75) <= 1e-9


def test_gap_is_independent_of_k():
    g2 = build_graph(2, 5, ModulationSet(5, (1, 2, 3, 4)))
    assert abs(spectral_gap_eigen(g2).gap - 0.75) <= 1e-9
    rng = np.random.default_rng(13)
    for _ in range(5):
        M = int(rng.integers(5, 24))
        A = random_set(rng, M)
        gaps = [spectral_gap_eigen(build_graph(K, M, A)).gap for K in (1, 2, 3)]
        assert max(gaps) - min(gaps) <= 1e-9


def test_degree_regularity():
    rng = np.random.default_rng(17)
    for _ in range(5):
        M = int(rng.integers(4, 32))
        A = random_set(rng, M)
        K = int(rng.integers(1, 4))
        g = build_graph(K, M, A)
        degrees = np.asarray(g.sparse_adjacency.sum(axis=1)).ravel()
        assert np.all(degrees == g.degree)
        assert g.n == K * M


def test_eigen_gap_matches_bias_formula():
    rng = np.random.default_rng(29)
    for _ in range(30):
        M = int(rng.integers(4, 65))
        A = random_set(rng, M)
        K = int(rng.integers(1, 4))
        g = build_graph(K, M, A)
        assert abs(spectral_gap_eigen(g).gap - spectral_gap_from_bias(A)) <= 1e-9
        report = spectral_gap_bias_report(g)
        assert report.method == "bias-formula"
        assert abs(report.gap - spectral_gap_from_bias(A)) <= 1e-12


def test_k2_m4_degree_example():
    g = build_graph(2, 4, ModulationSet(4, (1, 3)))
    assert g.n == 8
    degrees = np.asarray(g.sparse_adjacency.sum(axis=1)).ravel()
    assert np.all(degrees == 4)


def test_largest_component_basics():
    g = build_graph(2, 4, ModulationSet(4, (1, 3)))
    assert largest_component_after_removal(g, []) == 8
    cycle = build_graph(1, 4, ModulationSet(4, (1, 3)))
    assert largest_component_after_removal(cycle, [0]) == 3
    assert largest_component_after_removal(cycle, [(0, 0)]) == 3
    assert largest_component_after_removal(cycle, range(4)) == 0


def test_removal_keeps_spanning_component():
    # graphs with gap >= 6/K keep a component of size >= M after deleting M-1 vertices
    K = 12
    rng = np.random.default_rng(4)
    graphs = 0
    while graphs < 5:
        M = int(rng.integers(16, 49))
        A = symmetrize(draw_B(SetGenConfig.from_bias_constant(M, 100.0, seed=int(rng.integers(1 << 30)))), M)
        if len(A) == 0 or spectral_gap_from_bias(A) < 6.0 / K:
            continue
        graphs += 1
        g = build_graph(K, M, A)
        for _ in range(20):
            removed = rng.choice(g.n, size=M - 1, replace=False)
            assert largest_component_after_removal(g, removed) >= M


def test_build_graph_validation():
    with pytest.raises(ValueError):
        build_graph(1, 4, ModulationSet(4, ()))
    with pytest.raises(ValueError):
        build_graph(0, 4, ModulationSet(4, (1, 3)))
    with pytest.raises(ValueError):
        build_graph(1, 8, ModulationSet(4, (1, 3)))


def test_edge_list_format(tmp_path):
    g = build_graph(1, 4, ModulationSet(4, (1, 3)))
    lines = list(edge_list_lines(g))
    assert lines == ["0,0 0,1", "0,0 0,3", "0,1 0,2", "0,2 0,3"]
    path = tmp_path / "edges.txt"
    write_edge_list(g, path)
    assert path.read_text().splitlines() == lines
