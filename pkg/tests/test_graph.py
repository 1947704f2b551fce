import networkx as nx
import numpy as np
import pytest
from reference import K4_EDGES, K33_EDGES, TRIANGLE_EDGES

import falqon
from falqon.util import (
    BaselineMismatchError,
    DimensionMismatchError,
    GenerationExhaustedError,
    InvalidParametersError,
    MalformedInputError,
    SizeLimitError,
)


def triangle():
    return falqon.graph.Graph(3, TRIANGLE_EDGES)


def test_generate_regular_k4():
    g = falqon.graph.generate_regular(4, 3, seed=12)
    assert g.edges == tuple(K4_EDGES)


def test_generate_regular_deterministic():
    g1 = falqon.graph.generate_regular(6, 3, seed=99)
    g2 = falqon.graph.generate_regular(6, 3, seed=99)
    assert g1 == g2
    assert g1.id == g2.id


def test_generate_regular_properties():
    for seed in range(10):
        g = falqon.graph.generate_regular(12, 3, seed=seed)
        degrees = g.degrees()
        assert np.all(degrees == 3)
        assert degrees.sum() == 12 * 3
        assert nx.is_connected(g.to_networkx())


def test_generate_regular_odd_parity():
    with pytest.raises(InvalidParametersError):
        falqon.graph.generate_regular(5, 3, seed=1)


def test_generate_regular_degree_too_large():
    with pytest.raises(InvalidParametersError):
        falqon.graph.generate_regular(4, 4, seed=1)


def test_generate_regular_exhausted():
    with pytest.raises(GenerationExhaustedError):
        falqon.graph.generate_regular(6, 3, seed=1, max_restarts=0)


def test_graph_rejects_self_loop():
    with pytest.raises(InvalidParametersError):
        falqon.graph.Graph(3, [(1, 1)])


def test_graph_id_depends_on_seed():
    g1 = falqon.graph.generate_regular(8, 3, seed=1)
    g2 = falqon.graph.generate_regular(8, 3, seed=2)
    assert g1.id != g2.id
    assert len(g1.id) == 16


def test_cut_value():
    assert falqon.graph.cut_value(triangle(), [0, 1, 0]) == 2
    assert falqon.graph.cut_value(triangle(), [0, 0, 0]) == 0


def test_cut_value_complement():
    g = falqon.graph.generate_regular(8, 3, seed=2)
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.integers(2, size=8)
        assert falqon.graph.cut_value(g, x) == falqon.graph.cut_value(g, 1 - x)


def test_cut_value_length_mismatch():
    with pytest.raises(DimensionMismatchError):
        falqon.graph.cut_value(triangle(), [0, 1])


def test_cost_diagonal_triangle():
    d = falqon.graph.build_cost_diagonal(triangle())
    assert d.energies.dtype == np.int64
    # x = 000 cuts nothing, x = 001 (vertex 2 set, index 4) cuts two edges
    assert d.energies[0] == 0
    assert d.energies[4] == -2
    assert d.max_cut == 2
    assert not d.energies.flags.writeable


def test_cost_diagonal_matches_cut_value():
    g = falqon.graph.generate_regular(8, 3, seed=5)
    d = falqon.graph.build_cost_diagonal(g)
    for index in [0, 1, 37, 128, 255]:
        x = falqon.graph.bits_of_index(index, g.node_count)
        assert d.energies[index] == -falqon.graph.cut_value(g, x)


def test_cost_diagonal_size_limit():
    g = falqon.graph.Graph(27, [(0, 1)])
    with pytest.raises(SizeLimitError):
        falqon.graph.build_cost_diagonal(g)


def test_brute_force_triangle():
    record = falqon.graph.brute_force_max_cut(triangle())
    assert record.max_cut == 2
    assert record.ground_energy == -2
    record.check(triangle())


def test_brute_force_k4():
    record = falqon.graph.brute_force_max_cut(falqon.graph.Graph(4, K4_EDGES))
    assert record.max_cut == 4


def test_anneal_triangle():
    record = falqon.graph.anneal_max_cut(triangle(), seed=3)
    assert record.max_cut == 2
    assert record.method == "annealing"
    record.check(triangle())


def test_anneal_k33():
    record = falqon.graph.anneal_max_cut(falqon.graph.Graph(6, K33_EDGES), seed=0)
    assert record.max_cut == 9


def test_anneal_matches_brute_force():
    params = falqon.graph.AnnealParams(sweeps_per_node=50)
    for seed in range(3):
        g = falqon.graph.generate_regular(10, 3, seed=seed)
        exact = falqon.graph.brute_force_max_cut(g)
        annealed = falqon.graph.anneal_max_cut(g, params, seed=seed)
        assert annealed.max_cut == exact.max_cut


def test_anneal_invalid_params():
    params = falqon.graph.AnnealParams(t_start=0.01, t_end=2.0)
    with pytest.raises(InvalidParametersError):
        falqon.graph.anneal_max_cut(triangle(), params)


def test_graph_file_round_trip():
    g = falqon.graph.generate_regular(4, 3, seed=7)
    text = falqon.graph.serialize_graph(g)
    assert falqon.graph.parse_graph(text) == g


def test_parse_graph_self_loop():
    text = '{"version": 1, "n": 4, "degree": null, "seed": null, "edges": [[3, 3]]}'
    with pytest.raises(MalformedInputError) as e:
        falqon.graph.parse_graph(text)
    assert e.value.position == "edge 0"


def test_parse_graph_out_of_range():
    text = '{"version": 1, "n": 4, "edges": [[0, 1], [2, 4]]}'
    with pytest.raises(MalformedInputError) as e:
        falqon.graph.parse_graph(text)
    assert e.value.position == "edge 1"


def test_parse_graph_invalid_json():
    with pytest.raises(MalformedInputError) as e:
        falqon.graph.parse_graph('{\n"version": 1,\n"n": }')
    assert e.value.line == 3


def test_parse_graph_not_regular():
    text = '{"version": 1, "n": 4, "degree": 3, "edges": [[0, 1]]}'
    with pytest.raises(MalformedInputError):
        falqon.graph.parse_graph(text)


def test_baseline_round_trip():
    g = falqon.graph.generate_regular(8, 3, seed=3)
    record = falqon.graph.brute_force_max_cut(g)
    text = falqon.graph.serialize_baseline(record)
    parsed = falqon.graph.parse_baseline(text)
    assert parsed.max_cut == record.max_cut
    assert parsed.witness == record.witness
    parsed.check(g)


def test_baseline_mismatch():
    g1 = falqon.graph.generate_regular(8, 3, seed=3)
    g2 = falqon.graph.generate_regular(8, 3, seed=4)
    record = falqon.graph.brute_force_max_cut(g1)
    with pytest.raises(BaselineMismatchError):
        record.check(g2)


def test_graph_id_marks_disconnected_graphs():
    # with connected=False a seed may yield a graph that connected=True rejects
    differing = 0
    for seed in range(40):
        loose = falqon.graph.generate_regular(6, 2, seed=seed, connected=False)
        strict = falqon.graph.generate_regular(6, 2, seed=seed)
        if loose.edges != strict.edges:
            differing += 1
            assert loose.id != strict.id
        else:
            assert loose.id == strict.id
    assert differing > 0


def test_cost_diagonal_complement_symmetry():
    for seed in range(3):
        g = falqon.graph.generate_regular(10, 3, seed=seed)
        d = falqon.graph.build_cost_diagonal(g)
        full = 2**g.node_count - 1
        indices = np.arange(2**g.node_count)
        np.testing.assert_array_equal(d.energies, d.energies[full ^ indices])
        assert d.energies[0] == 0
        assert d.energies.min() == -falqon.graph.brute_force_max_cut(g).max_cut


def test_brute_force_k33():
    g = falqon.graph.Graph(6, K33_EDGES)
    record = falqon.graph.brute_force_max_cut(g)
    assert record.max_cut == 9
    assert falqon.graph.cut_value(g, record.witness) == 9


@pytest.mark.slow
def test_anneal_default_params_n16():
    for seed in range(20):
        g = falqon.graph.generate_regular(16, 3, seed=seed)
        exact = falqon.graph.brute_force_max_cut(g)
        annealed = falqon.graph.anneal_max_cut(g, seed=seed)
        assert annealed.max_cut == exact.max_cut
        annealed.check(g)
