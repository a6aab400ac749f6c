"""Undirected interaction networks: torus grids, stylized generators, edge-list I/O.

Every graph is simple (no self-loops, no parallel edges) and stored in a
canonical compressed form with sorted neighbor lists, so that equal graphs
have equal bytes and generation is reproducible. Stochastic generators draw
from a Philox counter-based generator seeded explicitly; the same (spec,
seed) pair always yields the same graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "Neighborhood",
    "NetworkVariant",
    "NetworkSpec",
    "InfeasibleNetworkError",
    "EdgeListParseError",
    "grid_torus",
    "generate_network",
    "load_edge_list",
    "save_edge_list",
]

_MASK64 = (1 << 64) - 1


class InfeasibleNetworkError(ValueError):
    """The requested edge count cannot be met by the variant's structure."""


class EdgeListParseError(ValueError):
    """Malformed edge-list text; carries the 1-based offending line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class Neighborhood(Enum):
    MOORE = "moore"
    VON_NEUMANN = "von_neumann"


class NetworkVariant(Enum):
    GRID_MOORE = "grid_moore"
    GRID_VON_NEUMANN = "grid_von_neumann"
    RING_LATTICE = "ring_lattice"
    CELLULAR = "cellular"
    CORE_PERIPHERY = "core_periphery"
    ERDOS_RENYI = "erdos_renyi"
    SCALE_FREE = "scale_free"
    SMALL_WORLD = "small_world"


class Graph:
    """Immutable simple undirected graph with sorted adjacency.

    Stored CSR-style: ``indices[indptr[v]:indptr[v+1]]`` are v's neighbors in
    ascending order. Construction validates simplicity and symmetry; the
    arrays are frozen afterwards so instances can be shared across workers.
    """

    __slots__ = ("node_count", "edge_count", "indptr", "indices", "degrees", "_csr")

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int]]):
        if node_count <= 0:
            raise ValueError(f"node_count must be positive, got {node_count}")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) out of range for n={node_count}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)

        m = len(seen)
        deg = np.zeros(node_count, dtype=np.int64)
        us = np.empty(2 * m, dtype=np.int32)
        vs = np.empty(2 * m, dtype=np.int32)
        for i, (u, v) in enumerate(seen):
            us[2 * i], vs[2 * i] = u, v
            us[2 * i + 1], vs[2 * i + 1] = v, u
            deg[u] += 1
            deg[v] += 1

        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        # lexicographic sort by (source, target) gives sorted neighbor rows
        order = np.lexsort((vs, us))
        indices = vs[order]

        self.node_count = node_count
        self.edge_count = m
        self.indptr = indptr
        self.indices = indices
        self.degrees = deg
        for arr in (self.indptr, self.indices, self.degrees):
            arr.setflags(write=False)
        self._csr = None

    def neighbors(self, v: int) -> np.ndarray:
        if not (0 <= v < self.node_count):
            raise IndexError(f"node {v} out of range for n={self.node_count}")
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def edges(self) -> Iterator[tuple[int, int]]:
        """All undirected edges as (u, v) with u < v, in lexicographic order."""
        for u in range(self.node_count):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def adjacency_matrix(self) -> sp.csr_matrix:
        """0/1 CSR adjacency, cached (cheap wrap around the frozen arrays)."""
        if self._csr is None:
            data = np.ones(len(self.indices), dtype=np.int32)
            self._csr = sp.csr_matrix(
                (data, self.indices, self.indptr),
                shape=(self.node_count, self.node_count),
            )
        return self._csr

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.edge_count == other.edge_count
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    # explicit pickle support (slots-only class, crosses process pools)
    def __getstate__(self):
        return (self.node_count, self.edge_count, self.indptr, self.indices, self.degrees)

    def __setstate__(self, state) -> None:
        self.node_count, self.edge_count, self.indptr, self.indices, self.degrees = state
        for arr in (self.indptr, self.indices, self.degrees):
            arr.setflags(write=False)
        self._csr = None

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


@dataclass(frozen=True)
class NetworkSpec:
    """Parameters for one network variant.

    ``target_edges`` is binding when positive: fill-style variants add edges
    until they hit it exactly, the scale-free variant tops up with extra
    preferential edges, and the ring lattice verifies n*k/2 against it. A
    zero target leaves the edge count to the variant's structure.
    """

    variant: NetworkVariant
    n: int = 0
    target_edges: int = 0
    width: int = 0
    height: int = 0
    k: int = 0
    cells: int = 0
    inner_density: float = 0.0
    core_fraction: float = 0.0
    core_density: float = 0.0
    rewire_prob: float = 0.0
    add_prob: float = 0.0
    seed_core_size: int = 0
    attach_count: int = 0
    isolated_extra: int = 0

    def __post_init__(self) -> None:
        v = self.variant
        if v in (NetworkVariant.GRID_MOORE, NetworkVariant.GRID_VON_NEUMANN):
            if self.width < 3 or self.height < 3:
                raise ValueError(
                    f"grid needs width, height >= 3, got {self.width}x{self.height}"
                )
            return
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.target_edges < 0:
            raise ValueError(f"target_edges must be >= 0, got {self.target_edges}")
        for name in ("inner_density", "core_fraction", "core_density",
                     "rewire_prob", "add_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if v == NetworkVariant.RING_LATTICE and (self.k <= 0 or self.k % 2):
            raise ValueError(f"ring lattice needs positive even k, got {self.k}")
        if v == NetworkVariant.CELLULAR and self.cells <= 0:
            raise ValueError(f"cellular needs cells > 0, got {self.cells}")
        if v == NetworkVariant.SCALE_FREE:
            if self.seed_core_size <= 0:
                raise ValueError("scale-free needs seed_core_size > 0")
            if self.attach_count < 0 or self.attach_count > self.seed_core_size:
                raise ValueError(
                    f"attach_count must be in [0, seed_core_size], got {self.attach_count}"
                )
            if not 0 <= self.isolated_extra < self.n:
                raise ValueError("isolated_extra must be in [0, n)")
        if v == NetworkVariant.SMALL_WORLD and (self.k <= 0 or self.k % 2):
            raise ValueError(f"small world needs positive even k, got {self.k}")


_MOORE_OFFSETS = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))
_VON_NEUMANN_OFFSETS = ((0, -1), (-1, 0), (1, 0), (0, 1))


def grid_torus(width: int, height: int, neighborhood: Neighborhood) -> Graph:
    """Torus grid; cell (x, y) is node y*width + x.

    Requires width, height >= 3 so the wrap-around offsets reach distinct
    cells (a 2-wide torus would fold (x-1) and (x+1) onto the same node).
    Moore grids are degree 8, von Neumann degree 4.
    """
    if width < 3 or height < 3:
        raise ValueError(
            f"grid dimensions must be at least 3x3, got {width}x{height}"
        )
    offsets = (
        _MOORE_OFFSETS if neighborhood == Neighborhood.MOORE else _VON_NEUMANN_OFFSETS
    )
    edges: set[tuple[int, int]] = set()
    for y in range(height):
        for x in range(width):
            u = y * width + x
            for dx, dy in offsets:
                v = ((y + dy) % height) * width + (x + dx) % width
                edges.add((u, v) if u < v else (v, u))
    return Graph(width * height, edges)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed & _MASK64)))


def _pair_capacity(n: int) -> int:
    return n * (n - 1) // 2


def _check_target(target: int, low: int, high: int, what: str) -> None:
    if target > high:
        raise InfeasibleNetworkError(
            f"target_edges={target} exceeds {what} capacity of {high}"
        )
    if target < low:
        raise InfeasibleNetworkError(
            f"target_edges={target} is below the {low} edges forced by {what}"
        )


def _ring_lattice(n: int, k: int, target: int) -> set[tuple[int, int]]:
    if k >= n:
        raise InfeasibleNetworkError(f"ring lattice needs k < n, got k={k}, n={n}")
    exact = n * k // 2
    if target and target != exact:
        raise InfeasibleNetworkError(
            f"ring lattice with n={n}, k={k} has exactly {exact} edges, "
            f"cannot meet target_edges={target}"
        )
    edges = set()
    for i in range(n):
        for j in range(1, k // 2 + 1):
            v = (i + j) % n
            edges.add((i, v) if i < v else (v, i))
    return edges


def _erdos_renyi(n: int, target: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """`target` distinct pairs uniformly without replacement (the G(n, m) model)."""
    capacity = _pair_capacity(n)
    _check_target(target, 0, capacity, f"complete graph on {n} nodes")
    if capacity > 10_000_000 and target < capacity // 4:
        # sparse regime on a big node set: rejection-sample pairs instead of
        # materializing all of them
        edges: set[tuple[int, int]] = set()
        while len(edges) < target:
            u, v = rng.integers(n, size=2)
            if u != v:
                key = (int(u), int(v)) if u < v else (int(v), int(u))
                edges.add(key)
        return edges
    us, vs = np.triu_indices(n, k=1)
    chosen = rng.choice(capacity, size=target, replace=False)
    return {(int(us[i]), int(vs[i])) for i in chosen}


def _fill_block(
    nodes: range, density: float, rng: np.random.Generator
) -> set[tuple[int, int]]:
    """Each pair inside `nodes` becomes an edge independently with `density`."""
    edges = set()
    members = list(nodes)
    for a in range(len(members)):
        draws = rng.random(len(members) - a - 1)
        for off, hit in enumerate(draws < density):
            if hit:
                edges.add((members[a], members[a + 1 + off]))
    return edges


def _cellular(
    n: int, cells: int, inner_density: float, target: int, rng: np.random.Generator
) -> set[tuple[int, int]]:
    """Dense cells joined by uniformly random inter-cell edges up to target."""
    if cells > n:
        raise InfeasibleNetworkError(f"more cells ({cells}) than nodes ({n})")
    base, rem = divmod(n, cells)
    bounds = [0]
    for i in range(cells):
        bounds.append(bounds[-1] + base + (1 if i < rem else 0))
    cell_of = np.empty(n, dtype=np.int64)
    edges: set[tuple[int, int]] = set()
    for i in range(cells):
        cell_nodes = range(bounds[i], bounds[i + 1])
        cell_of[bounds[i] : bounds[i + 1]] = i
        edges |= _fill_block(cell_nodes, inner_density, rng)
    if target:
        inner = len(edges)
        intra_capacity = sum(
            _pair_capacity(bounds[i + 1] - bounds[i]) for i in range(cells)
        )
        _check_target(target, inner, inner + _pair_capacity(n) - intra_capacity,
                      f"cell interiors ({inner} edges drawn)")
        while len(edges) < target:
            u, v = rng.integers(n, size=2)
            if cell_of[u] == cell_of[v]:
                continue
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            if key not in edges:
                edges.add(key)
    return edges


def _core_periphery(
    n: int, core_fraction: float, core_density: float, target: int,
    rng: np.random.Generator,
) -> set[tuple[int, int]]:
    """Dense core plus uniformly random core-periphery edges up to target.

    Periphery-periphery edges are never created; the periphery only reaches
    the rest of the graph through core members.
    """
    core = round(core_fraction * n)
    if not 0 < core < n:
        raise InfeasibleNetworkError(
            f"core_fraction={core_fraction} leaves no core or no periphery for n={n}"
        )
    edges = _fill_block(range(core), core_density, rng)
    if target:
        inner = len(edges)
        _check_target(target, inner, inner + core * (n - core),
                      f"core block ({inner} edges drawn)")
        while len(edges) < target:
            u = int(rng.integers(core))
            v = int(rng.integers(core, n))
            if (u, v) not in edges:
                edges.add((u, v))
    return edges


def _scale_free(
    n: int, seed_core_size: int, core_density: float, attach_count: int,
    isolated_extra: int, target: int, rng: np.random.Generator,
) -> set[tuple[int, int]]:
    """Preferential attachment over a sparse seed core.

    Arrivals attach `attach_count` distinct edges with probability
    proportional to degree + 1 (the offset keeps early attachment feasible
    when the sparse core starts with isolated members). With a positive
    target, extra edges are drawn with both endpoints degree-weighted until
    the target is met. `isolated_extra` trailing nodes stay at degree 0.
    """
    attached_n = n - isolated_extra
    if attached_n < seed_core_size:
        raise InfeasibleNetworkError(
            f"n - isolated_extra = {attached_n} is smaller than the "
            f"seed core ({seed_core_size})"
        )
    edges = _fill_block(range(seed_core_size), core_density, rng)
    deg = np.zeros(attached_n, dtype=np.float64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    for v in range(seed_core_size, attached_n):
        if attach_count == 0:
            break
        weights = deg[:v] + 1.0
        targets = rng.choice(v, size=attach_count, replace=False, p=weights / weights.sum())
        for u in targets:
            edges.add((int(u), v))
            deg[u] += 1
            deg[v] += 1
    if attach_count > 0:
        # the sparse core can leave members untouched; only isolated_extra
        # nodes are allowed to stay at degree 0
        for u in np.flatnonzero(deg == 0):
            weights = deg + 1.0
            weights[u] = 0.0
            v = int(rng.choice(attached_n, p=weights / weights.sum()))
            edges.add((int(u), v) if u < v else (v, int(u)))
            deg[u] += 1
            deg[v] += 1
    if target:
        structural = len(edges)
        _check_target(target, structural, _pair_capacity(attached_n),
                      f"attachment phase ({structural} edges drawn)")
        while len(edges) < target:
            weights = deg + 1.0
            u, v = rng.choice(attached_n, size=2, replace=False, p=weights / weights.sum())
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            if key not in edges:
                edges.add(key)
                deg[u] += 1
                deg[v] += 1
    return edges


def _small_world(
    n: int, k: int, rewire_prob: float, add_prob: float, target: int,
    rng: np.random.Generator,
) -> set[tuple[int, int]]:
    """Rewired ring lattice with uniformly added shortcuts up to target.

    Each original ring edge is rewired with `rewire_prob` (keeping its lower
    endpoint, moving the other to a uniform non-neighbor). If a positive
    target exceeds the ring's n*k/2 edges, repeated passes add one edge per
    node with probability `add_prob` until the target is met exactly.
    """
    edges = _ring_lattice(n, k, 0)
    if target:
        _check_target(target, len(edges), _pair_capacity(n), f"the k={k} ring")
        if add_prob == 0.0 and target > len(edges):
            raise InfeasibleNetworkError(
                f"target_edges={target} above the ring's {len(edges)} "
                "but add_prob is 0"
            )
    adj: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)

    def add_edge(u: int, v: int) -> None:
        edges.add((u, v) if u < v else (v, u))
        adj[u].add(v)
        adj[v].add(u)

    def drop_edge(u: int, v: int) -> None:
        edges.discard((u, v) if u < v else (v, u))
        adj[u].discard(v)
        adj[v].discard(u)

    def random_non_neighbor(u: int) -> int | None:
        if len(adj[u]) >= n - 1:
            return None
        while True:
            w = int(rng.integers(n))
            if w != u and w not in adj[u]:
                return w

    # visit the original ring edges in a fixed order; skip any that an
    # earlier rewire already removed
    for j in range(1, k // 2 + 1):
        for i in range(n):
            v = (i + j) % n
            if v not in adj[i]:
                continue
            if rng.random() < rewire_prob:
                w = random_non_neighbor(i)
                if w is not None:
                    drop_edge(i, v)
                    add_edge(i, w)

    while len(edges) < target:
        for i in range(n):
            if len(edges) >= target:
                break
            if rng.random() < add_prob:
                w = random_non_neighbor(i)
                if w is not None:
                    add_edge(i, w)
    return edges


def generate_network(spec: NetworkSpec, seed: int) -> Graph:
    """Build the graph described by `spec`, reproducibly for a given seed."""
    v = spec.variant
    if v == NetworkVariant.GRID_MOORE:
        return grid_torus(spec.width, spec.height, Neighborhood.MOORE)
    if v == NetworkVariant.GRID_VON_NEUMANN:
        return grid_torus(spec.width, spec.height, Neighborhood.VON_NEUMANN)

    rng = _rng(seed)
    if v == NetworkVariant.RING_LATTICE:
        edges = _ring_lattice(spec.n, spec.k, spec.target_edges)
    elif v == NetworkVariant.ERDOS_RENYI:
        edges = _erdos_renyi(spec.n, spec.target_edges, rng)
    elif v == NetworkVariant.CELLULAR:
        edges = _cellular(spec.n, spec.cells, spec.inner_density, spec.target_edges, rng)
    elif v == NetworkVariant.CORE_PERIPHERY:
        edges = _core_periphery(
            spec.n, spec.core_fraction, spec.core_density, spec.target_edges, rng
        )
    elif v == NetworkVariant.SCALE_FREE:
        edges = _scale_free(
            spec.n, spec.seed_core_size, spec.core_density, spec.attach_count,
            spec.isolated_extra, spec.target_edges, rng,
        )
    elif v == NetworkVariant.SMALL_WORLD:
        edges = _small_world(
            spec.n, spec.k, spec.rewire_prob, spec.add_prob, spec.target_edges, rng
        )
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown variant {v}")
    return Graph(spec.n, edges)


def save_edge_list(graph: Graph) -> str:
    """Canonical text form: a `# n=<count>` header, then one `u v` per edge."""
    lines = [f"# n={graph.node_count}"]
    lines.extend(f"{u} {v}" for u, v in graph.edges())
    return "\n".join(lines) + "\n"


def load_edge_list(text: str) -> Graph:
    """Parse edge-list text; inverse of save_edge_list.

    Node count comes from the optional `# n=<count>` header, or from the
    largest id seen. Errors carry the offending 1-based line number.
    """
    n: int | None = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if n is None and not edges and body.startswith("n="):
                try:
                    n = int(body[2:])
                except ValueError:
                    raise EdgeListParseError(line_no, f"bad header {line!r}") from None
                if n <= 0:
                    raise EdgeListParseError(line_no, f"header n={n} must be positive")
                continue
            raise EdgeListParseError(line_no, f"unexpected comment {line!r}")
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, f"expected 'u v', got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer token in {line!r}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(line_no, f"negative node id in {line!r}")
        if u == v:
            raise EdgeListParseError(line_no, f"self-loop at node {u}")
        if n is not None and (u >= n or v >= n):
            raise EdgeListParseError(line_no, f"node id >= n={n} in {line!r}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise EdgeListParseError(line_no, f"duplicate edge {key}")
        seen.add(key)
        edges.append(key)
        max_id = max(max_id, u, v)
    if n is None:
        if max_id < 0:
            raise EdgeListParseError(1, "empty edge list with no n header")
        n = max_id + 1
    return Graph(n, edges)
