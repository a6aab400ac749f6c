import numpy as np
import pytest

from pdnet.graphs import (
    EdgeListParseError,
    Graph,
    InfeasibleNetworkError,
    Neighborhood,
    NetworkSpec,
    NetworkVariant,
    generate_network,
    grid_torus,
    load_edge_list,
    save_edge_list,
)

MOORE = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))
VON_NEUMANN = ((0, -1), (-1, 0), (1, 0), (0, 1))


def brute_grid_edges(width, height, offsets):
    """Independent adjacency builder: dict-of-sets over wrap-around offsets."""
    adj = {v: set() for v in range(width * height)}
    for y in range(height):
        for x in range(width):
            u = y * width + x
            for dx, dy in offsets:
                v = ((y + dy) % height) * width + (x + dx) % width
                adj[u].add(v)
                adj[v].add(u)
    return {(u, v) for u in adj for v in adj[u] if u < v}


def assert_valid(g: Graph):
    # simple, symmetric, sorted adjacency; edge count consistent with degrees
    assert int(g.degrees.sum()) == 2 * g.edge_count
    a = g.adjacency_matrix()
    assert (a != a.T).nnz == 0
    assert a.diagonal().sum() == 0
    for v in range(g.node_count):
        row = g.neighbors(v)
        assert np.all(np.diff(row) > 0) and (row != v).all()


@pytest.mark.parametrize(
    "width,height,hood,offsets,degree",
    [
        (50, 50, Neighborhood.MOORE, MOORE, 8),
        (50, 50, Neighborhood.VON_NEUMANN, VON_NEUMANN, 4),
        (5, 9, Neighborhood.MOORE, MOORE, 8),
        (40, 25, Neighborhood.VON_NEUMANN, VON_NEUMANN, 4),
    ],
)
def test_grid_matches_brute_force(width, height, hood, offsets, degree):
    g = grid_torus(width, height, hood)
    expected = brute_grid_edges(width, height, offsets)
    assert g.node_count == width * height
    assert set(g.edges()) == expected
    assert g.edge_count == width * height * degree // 2
    assert set(g.degrees.tolist()) == {degree}
    assert_valid(g)


def test_grid_3x3_moore_is_complete():
    g = grid_torus(3, 3, Neighborhood.MOORE)
    assert g.node_count == 9 and g.edge_count == 36
    assert set(g.degrees.tolist()) == {8}


def test_grid_rejects_degenerate_dimensions():
    for width, height in [(2, 5), (5, 2), (1, 1), (0, 3)]:
        with pytest.raises(ValueError, match="at least 3x3"):
            grid_torus(width, height, Neighborhood.MOORE)


def test_graph_constructor_validation():
    with pytest.raises(ValueError, match="self-loop"):
        Graph(3, [(0, 0)])
    with pytest.raises(ValueError, match="duplicate"):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError, match="out of range"):
        Graph(3, [(0, 3)])
    with pytest.raises(ValueError, match="positive"):
        Graph(0, [])
    with pytest.raises(IndexError):
        Graph(2, [(0, 1)]).neighbors(2)


def test_ring_lattice():
    spec = NetworkSpec(variant=NetworkVariant.RING_LATTICE, n=1000, k=16, target_edges=8000)
    g = generate_network(spec, seed=0)
    assert g.edge_count == 8000
    assert set(g.degrees.tolist()) == {16}
    assert_valid(g)
    # node 0 reaches the 8 nearest on each side
    assert set(g.neighbors(0).tolist()) == set(range(1, 9)) | set(range(992, 1000))


def test_ring_lattice_infeasible():
    with pytest.raises(InfeasibleNetworkError, match="k < n"):
        generate_network(NetworkSpec(variant=NetworkVariant.RING_LATTICE, n=10, k=12), 0)
    with pytest.raises(InfeasibleNetworkError, match="exactly"):
        generate_network(
            NetworkSpec(variant=NetworkVariant.RING_LATTICE, n=10, k=4, target_edges=99), 0
        )
    with pytest.raises(ValueError, match="even"):
        NetworkSpec(variant=NetworkVariant.RING_LATTICE, n=10, k=3)


def test_erdos_renyi_exact_count_and_determinism():
    spec = NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=1000, target_edges=8000)
    g1 = generate_network(spec, seed=7)
    g2 = generate_network(spec, seed=7)
    g3 = generate_network(spec, seed=8)
    assert g1.edge_count == 8000
    assert g1 == g2
    assert save_edge_list(g1) == save_edge_list(g2)
    assert g1 != g3
    assert_valid(g1)


def test_erdos_renyi_complete_graph():
    n = 40
    spec = NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=n, target_edges=n * (n - 1) // 2)
    g = generate_network(spec, seed=3)
    assert set(g.degrees.tolist()) == {n - 1}


def test_erdos_renyi_capacity_error():
    with pytest.raises(InfeasibleNetworkError, match="capacity"):
        generate_network(
            NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=10, target_edges=100), 0
        )


def test_cellular_hits_target():
    spec = NetworkSpec(
        variant=NetworkVariant.CELLULAR, n=1000, target_edges=7995,
        cells=52, inner_density=0.40,
    )
    g = generate_network(spec, seed=11)
    assert g.edge_count == 7995
    assert_valid(g)


def test_cellular_infeasible_below_interior():
    # saturated cells force more edges than the target allows
    spec = NetworkSpec(
        variant=NetworkVariant.CELLULAR, n=100, target_edges=10,
        cells=2, inner_density=1.0,
    )
    with pytest.raises(InfeasibleNetworkError, match="below"):
        generate_network(spec, seed=0)


def test_core_periphery_structure():
    spec = NetworkSpec(
        variant=NetworkVariant.CORE_PERIPHERY, n=1000, target_edges=8003,
        core_fraction=0.13, core_density=0.50,
    )
    g = generate_network(spec, seed=5)
    assert g.edge_count == 8003
    core = 130
    for u, v in g.edges():
        assert u < core  # every edge touches the core (u < v, periphery ids are high)
    assert_valid(g)


def test_scale_free_heavy_tail():
    spec = NetworkSpec(
        variant=NetworkVariant.SCALE_FREE, n=1000, seed_core_size=40,
        attach_count=8, core_density=0.01,
    )
    g = generate_network(spec, seed=13)
    mean_degree = g.degrees.mean()
    assert g.degrees.max() > 3 * mean_degree
    assert_valid(g)


def test_scale_free_isolated_and_target():
    spec = NetworkSpec(
        variant=NetworkVariant.SCALE_FREE, n=1000, target_edges=8004,
        seed_core_size=40, attach_count=9, core_density=0.01, isolated_extra=109,
    )
    g = generate_network(spec, seed=17)
    assert g.edge_count == 8004
    assert int((g.degrees == 0).sum()) == 109
    assert np.all(g.degrees[-109:] == 0)
    assert_valid(g)


def test_small_world_hits_target():
    spec = NetworkSpec(
        variant=NetworkVariant.SMALL_WORLD, n=1000, target_edges=8005,
        k=16, rewire_prob=0.05, add_prob=0.055,
    )
    g = generate_network(spec, seed=19)
    assert g.edge_count == 8005
    # most ring edges survive the 5% rewiring
    ring = generate_network(
        NetworkSpec(variant=NetworkVariant.RING_LATTICE, n=1000, k=16), 0
    )
    surviving = len(set(g.edges()) & set(ring.edges()))
    assert surviving > 7000
    assert_valid(g)


def test_small_world_add_prob_zero_infeasible():
    spec = NetworkSpec(
        variant=NetworkVariant.SMALL_WORLD, n=100, target_edges=900,
        k=16, rewire_prob=0.05, add_prob=0.0,
    )
    with pytest.raises(InfeasibleNetworkError, match="add_prob"):
        generate_network(spec, seed=0)


@pytest.mark.parametrize(
    "spec",
    [
        NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=300, target_edges=900),
        NetworkSpec(variant=NetworkVariant.CELLULAR, n=300, target_edges=900, cells=15,
                    inner_density=0.3),
        NetworkSpec(variant=NetworkVariant.CORE_PERIPHERY, n=300, target_edges=900,
                    core_fraction=0.13, core_density=0.5),
        NetworkSpec(variant=NetworkVariant.SCALE_FREE, n=300, seed_core_size=20,
                    attach_count=3, core_density=0.02, isolated_extra=10),
        NetworkSpec(variant=NetworkVariant.SMALL_WORLD, n=300, target_edges=1210, k=8,
                    rewire_prob=0.1, add_prob=0.05),
    ],
    ids=lambda s: s.variant.value,
)
def test_generators_valid_and_deterministic(spec):
    g1 = generate_network(spec, seed=123)
    g2 = generate_network(spec, seed=123)
    assert_valid(g1)
    assert g1 == g2
    assert save_edge_list(g1) == save_edge_list(g2)
    if spec.target_edges:
        assert g1.edge_count == spec.target_edges


def test_edge_list_round_trip():
    for g in (
        grid_torus(3, 3, Neighborhood.MOORE),
        generate_network(
            NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=50, target_edges=100), 2
        ),
        Graph(5, [(0, 1)]),  # isolated nodes must survive the round trip
    ):
        assert load_edge_list(save_edge_list(g)) == g


def test_edge_list_small_examples():
    g = load_edge_list("# n=3\n0 1\n1 2")
    assert g.node_count == 3 and g.edge_count == 2
    assert set(g.edges()) == {(0, 1), (1, 2)}

    text = save_edge_list(grid_torus(3, 3, Neighborhood.MOORE))
    lines = text.strip().splitlines()
    assert lines[0] == "# n=9"
    assert len(lines) == 1 + 36

    # without a header the node count is inferred from the largest id
    assert load_edge_list("0 1\n1 2").node_count == 3


@pytest.mark.parametrize(
    "text,line,match",
    [
        ("0 0", 1, "self-loop"),
        ("# n=3\n0 1\n0 1", 3, "duplicate"),
        ("# n=3\n0 7", 2, ">= n"),
        ("0 x", 1, "non-integer"),
        ("0 1 2", 1, "expected"),
        ("# n=zzz", 1, "bad header"),
        ("# hello\n0 1", 1, "unexpected comment"),
        ("", 1, "empty"),
        ("# n=2\n0 1\n-1 0", 3, "negative"),
    ],
)
def test_edge_list_parse_errors(text, line, match):
    with pytest.raises(EdgeListParseError, match=match) as err:
        load_edge_list(text)
    assert err.value.line == line


def test_spec_validation():
    with pytest.raises(ValueError, match="n must be positive"):
        NetworkSpec(variant=NetworkVariant.ERDOS_RENYI, n=0, target_edges=5)
    with pytest.raises(ValueError, match="in \\[0, 1\\]"):
        NetworkSpec(variant=NetworkVariant.CELLULAR, n=10, cells=2, inner_density=1.5)
    with pytest.raises(ValueError, match="attach_count"):
        NetworkSpec(variant=NetworkVariant.SCALE_FREE, n=10, seed_core_size=3, attach_count=5)
