"""Telling a simple polytope from its graph.

The two facts driving this module: an ordering of the vertices satisfies

    sum_k 2^k h_k >= F(P),   h_k = #vertices with k smaller neighbors,

with equality exactly for abstract objective functions; and a connected
k-regular subgraph is the graph of a k-face exactly when some AOF puts its
vertices first.  So: scan orderings for the minimum weight (that finds the
AOFs without knowing F(P)), then read the faces off AOF prefixes.

Polytopes live here as vertex-facet incidences built combinatorially
(simplices, cubes, polygons, and products); no coordinates are involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations, permutations

from .errors import BudgetExceeded, NotSimple


@dataclass(frozen=True)
class SimplePolytope:
    dim: int
    n_facets: int
    vertex_facets: tuple[frozenset[int], ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_facets)

    def graph(self) -> "PolytopeGraph":
        n = self.n_vertices
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in combinations(range(n), 2):
            if len(self.vertex_facets[u] & self.vertex_facets[v]) == self.dim - 1:
                adj[u].add(v)
                adj[v].add(u)
        return PolytopeGraph.from_adjacency(adj)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.dim,
                "n_facets": self.n_facets,
                "vertex_facets": [sorted(fs) for fs in self.vertex_facets],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SimplePolytope":
        data = json.loads(text)
        return cls(
            dim=data["d"],
            n_facets=data["n_facets"],
            vertex_facets=tuple(frozenset(fs) for fs in data["vertex_facets"]),
        )


@dataclass(frozen=True)
class PolytopeGraph:
    n: int
    adjacency: tuple[frozenset[int], ...]

    @classmethod
    def from_adjacency(cls, adj) -> "PolytopeGraph":
        return cls(n=len(adj), adjacency=tuple(frozenset(s) for s in adj))

    @classmethod
    def from_edges(cls, n: int, edges) -> "PolytopeGraph":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError("self-loops are not polytope edges")
            adj[u].add(v)
            adj[v].add(u)
        return cls.from_adjacency(adj)

    @classmethod
    def from_edge_list(cls, text: str) -> "PolytopeGraph":
        edges = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            u, v = map(int, line.split())
            edges.append((u, v))
        n = 1 + max(max(u, v) for u, v in edges)
        return cls.from_edges(n, edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_regular(self) -> int | None:
        degs = {self.degree(v) for v in range(self.n)}
        return degs.pop() if len(degs) == 1 else None

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n


@dataclass(frozen=True)
class FaceLattice:
    """Nonempty faces by dimension, each face a sorted vertex tuple."""

    dim: int
    by_dim: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def total(self) -> int:
        return sum(len(level) for level in self.by_dim)

    def counts(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.by_dim)

    def to_json(self) -> str:
        payload = {f"dim_{k}": [list(f) for f in level] for k, level in enumerate(self.by_dim)}
        payload["F"] = self.total
        return json.dumps(payload)

    @classmethod
    def from_levels(cls, dim: int, levels: dict[int, set[tuple[int, ...]]]) -> "FaceLattice":
        by_dim = tuple(
            tuple(sorted(levels.get(k, set()))) for k in range(dim + 1)
        )
        return cls(dim=dim, by_dim=by_dim)


@dataclass(frozen=True)
class OrderingProfile:
    ordering: tuple[int, ...]
    h: tuple[int, ...]
    weight: int


# ---------------------------------------------------------------------------
# generators


def simplex(d: int) -> SimplePolytope:
    """d-simplex: vertex i misses exactly facet i."""
    facets = range(d + 1)
    return SimplePolytope(
        dim=d,
        n_facets=d + 1,
        vertex_facets=tuple(frozenset(set(facets) - {i}) for i in range(d + 1)),
    )


def hypercube(d: int) -> SimplePolytope:
    """d-cube: facet 2i is x_i=0, facet 2i+1 is x_i=1."""
    vf = []
    for v in range(1 << d):
        vf.append(frozenset(2 * i + (v >> i & 1) for i in range(d)))
    return SimplePolytope(dim=d, n_facets=2 * d, vertex_facets=tuple(vf))


def segment() -> SimplePolytope:
    return SimplePolytope(dim=1, n_facets=2, vertex_facets=(frozenset({0}), frozenset({1})))


def polygon(k: int) -> SimplePolytope:
    """k-gon: edge i joins vertices i and i+1 (mod k)."""
    if k < 3:
        raise ValueError("polygons need at least 3 vertices")
    vf = tuple(frozenset({(i - 1) % k, i}) for i in range(k))
    return SimplePolytope(dim=2, n_facets=k, vertex_facets=vf)


def product(p: SimplePolytope, q: SimplePolytope) -> SimplePolytope:
    """Cartesian product; facets are F x Q and P x G."""
    vf = []
    for fp in p.vertex_facets:
        for fq in q.vertex_facets:
            vf.append(frozenset(fp | {p.n_facets + g for g in fq}))
    return SimplePolytope(
        dim=p.dim + q.dim,
        n_facets=p.n_facets + q.n_facets,
        vertex_facets=tuple(vf),
    )


def prism(k: int) -> SimplePolytope:
    return product(polygon(k), segment())


# ---------------------------------------------------------------------------
# oracle: direct face enumeration from the incidence


def _check_simple(p: SimplePolytope) -> None:
    for v, fs in enumerate(p.vertex_facets):
        if len(fs) != p.dim:
            raise NotSimple(f"vertex {v} lies in {len(fs)} facets, expected {p.dim}")
        if any(f < 0 or f >= p.n_facets for f in fs):
            raise NotSimple(f"vertex {v} references an unknown facet")
    g = p.graph()
    if g.is_regular() != p.dim or not g.is_connected():
        raise NotSimple("derived graph is not connected and d-regular")


def enumerate_faces(p: SimplePolytope) -> FaceLattice:
    """All nonempty faces: a k-face is the set of vertices containing some
    (d-k)-subset of facets through a vertex.  Ground truth for reconstruction."""
    if p.n_vertices > 64:
        raise BudgetExceeded("face enumeration is capped at 64 vertices")
    _check_simple(p)
    levels: dict[int, set[tuple[int, ...]]] = {}
    for k in range(p.dim + 1):
        found: set[tuple[int, ...]] = set()
        size = p.dim - k
        seen_subsets: set[frozenset[int]] = set()
        for v in range(p.n_vertices):
            for sub in combinations(sorted(p.vertex_facets[v]), size):
                key = frozenset(sub)
                if key in seen_subsets:
                    continue
                seen_subsets.add(key)
                members = tuple(
                    u for u in range(p.n_vertices) if key <= p.vertex_facets[u]
                )
                found.add(members)
        levels[k] = found
    return FaceLattice.from_levels(p.dim, levels)


# ---------------------------------------------------------------------------
# orderings, weights, AOF search


def ordering_profile(g: PolytopeGraph, ordering) -> OrderingProfile:
    """h-vector (in-degree counts) and weight sum_k 2^k h_k."""
    ordering = tuple(ordering)
    if sorted(ordering) != list(range(g.n)):
        raise ValueError("ordering must be a permutation of the vertices")
    pos = {v: i for i, v in enumerate(ordering)}
    dmax = max(g.degree(v) for v in range(g.n))
    h = [0] * (dmax + 1)
    weight = 0
    for v in range(g.n):
        deg = sum(1 for w in g.adjacency[v] if pos[w] < pos[v])
        h[deg] += 1
        weight += 1 << deg
    return OrderingProfile(ordering=ordering, h=tuple(h), weight=weight)


@dataclass(frozen=True)
class AofSearchResult:
    min_weight: int
    orderings: tuple[tuple[int, ...], ...]


def _scan_orderings(g: PolytopeGraph) -> AofSearchResult:
    best = None
    found: list[tuple[int, ...]] = []
    for perm in permutations(range(g.n)):
        pos = {v: i for i, v in enumerate(perm)}
        weight = 0
        for v in range(g.n):
            deg = sum(1 for w in g.adjacency[v] if pos[w] < pos[v])
            weight += 1 << deg
        if best is None or weight < best:
            best = weight
            found = [perm]
        elif weight == best:
            found.append(perm)
    return AofSearchResult(min_weight=best, orderings=tuple(found))


def _pruned_search(g: PolytopeGraph, node_budget: int | None) -> AofSearchResult:
    """Branch and bound over prefixes: a vertex placed next contributes
    2^(already-placed neighbors), and every unplaced vertex will contribute
    at least that much, which gives a sound lower bound."""
    n = g.n
    best_weight = ordering_profile(g, tuple(range(n))).weight
    best: list[tuple[int, ...]] = []
    placed_nbrs = [0] * n
    prefix: list[int] = []
    in_prefix = [False] * n
    nodes = 0

    def lower_bound(current: int) -> int:
        return current + sum(
            1 << placed_nbrs[u] for u in range(n) if not in_prefix[u]
        )

    def rec(current_weight: int):
        nonlocal nodes, best_weight, best
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise BudgetExceeded(f"AOF search budget {node_budget} exhausted")
        if len(prefix) == n:
            if current_weight < best_weight:
                best_weight = current_weight
                best = [tuple(prefix)]
            elif current_weight == best_weight:
                best.append(tuple(prefix))
            return
        for u in range(n):
            if in_prefix[u]:
                continue
            gain = 1 << placed_nbrs[u]
            new_weight = current_weight + gain
            in_prefix[u] = True
            prefix.append(u)
            for w in g.adjacency[u]:
                placed_nbrs[w] += 1
            if lower_bound(new_weight) <= best_weight:
                rec(new_weight)
            for w in g.adjacency[u]:
                placed_nbrs[w] -= 1
            prefix.pop()
            in_prefix[u] = False

    rec(0)
    return AofSearchResult(min_weight=best_weight, orderings=tuple(sorted(best)))


def find_aofs(
    g: PolytopeGraph,
    *,
    method: str = "auto",
    node_budget: int | None = None,
) -> AofSearchResult:
    """All orderings of minimal weight; on a simple-polytope graph these are
    exactly the abstract objective functions and the weight equals F(P)."""
    if method == "scan" or (method == "auto" and g.n <= 8):
        if g.n > 9:
            raise BudgetExceeded("full factorial scan is capped at 9 vertices")
        return _scan_orderings(g)
    if method in ("pruned", "auto"):
        return _pruned_search(g, node_budget)
    raise ValueError(f"unknown method {method!r}")


def reconstruct_faces(
    g: PolytopeGraph,
    *,
    method: str = "auto",
    node_budget: int | None = None,
) -> tuple[FaceLattice, dict]:
    """Face lattice recovered from the graph alone.

    The k-faces are the connected k-regular induced subgraphs that occur as
    an initial segment of a minimum-weight ordering.  Returns the lattice
    plus certificates: one witnessing ordering per face, re-checkable.
    """
    dim = g.is_regular()
    if dim is None or not g.is_connected():
        raise NotSimple("graph is not connected and regular")
    result = find_aofs(g, method=method, node_budget=node_budget)
    levels, certificates = _prefix_faces(g, dim, result.orderings)
    lattice = FaceLattice.from_levels(dim, levels)
    return lattice, {
        "min_weight": result.min_weight,
        "aof_count": len(result.orderings),
        "certificates": certificates,
    }


def _prefix_faces(g: PolytopeGraph, dim: int, orderings):
    """Collect k-regular connected prefixes over all minimum-weight orderings."""
    levels: dict[int, set[tuple[int, ...]]] = {}
    certificates: dict[tuple[int, ...], tuple[int, ...]] = {}
    for ordering in orderings:
        in_prefix = [False] * g.n
        deg = [0] * g.n
        parent = list(range(g.n))
        rank = [0] * g.n
        components = 0
        degree_hist = [0] * (dim + 1)
        members: list[int] = []

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for v in ordering:
            in_prefix[v] = True
            members.append(v)
            components += 1
            for w in g.adjacency[v]:
                if in_prefix[w]:
                    degree_hist[deg[w]] -= 1
                    deg[w] += 1
                    degree_hist[deg[w]] += 1
                    deg[v] += 1
                    ra, rb = find(v), find(w)
                    if ra != rb:
                        if rank[ra] < rank[rb]:
                            ra, rb = rb, ra
                        parent[rb] = ra
                        if rank[ra] == rank[rb]:
                            rank[ra] += 1
                        components -= 1
            degree_hist[deg[v]] += 1
            k = deg[v]
            if components == 1 and degree_hist[k] == len(members):
                face = tuple(sorted(members))
                levels.setdefault(k, set()).add(face)
                certificates.setdefault(face, ordering)
            if len(members) == g.n:
                break
    return levels, certificates


def check_certificate(g: PolytopeGraph, face: tuple[int, ...], ordering: tuple[int, ...]) -> bool:
    """Re-check: ordering has minimal weight shape unknown here, but the face
    must be its initial segment and induce a connected regular subgraph."""
    prefix = set(ordering[: len(face)])
    if prefix != set(face):
        return False
    degs = {v: sum(1 for w in g.adjacency[v] if w in prefix) for v in face}
    if len(set(degs.values())) != 1:
        return False
    seen = {face[0]}
    stack = [face[0]]
    while stack:
        u = stack.pop()
        for w in g.adjacency[u]:
            if w in prefix and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(face)


# ---------------------------------------------------------------------------
# diameter


@dataclass(frozen=True)
class DiameterReport:
    diameter: int
    n_facets: int | None
    dim: int | None
    hirsch_ok: bool | None


def diameter_and_hirsch(p_or_g) -> DiameterReport:
    """BFS diameter; with a polytope input, also check diameter <= n - d."""
    if isinstance(p_or_g, SimplePolytope):
        g = p_or_g.graph()
        n_facets, dim = p_or_g.n_facets, p_or_g.dim
    else:
        g, n_facets, dim = p_or_g, None, None
    if not g.is_connected():
        raise ValueError("diameter needs a connected graph")
    diam = 0
    for src in range(g.n):
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for w in g.adjacency[u]:
                    if w not in dist:
                        dist[w] = dist[u] + 1
                        nxt.append(w)
            frontier = nxt
        diam = max(diam, max(dist.values()))
    hirsch = None if n_facets is None else diam <= n_facets - dim
    return DiameterReport(diameter=diam, n_facets=n_facets, dim=dim, hirsch_ok=hirsch)
