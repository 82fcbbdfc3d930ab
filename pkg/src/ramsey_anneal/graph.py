"""Edge colourings of complete graphs and the monochromatic-clique energy.

A colouring of K_N with l colours is scored by summing, over every colour i
with target clique size x_i, the number of x_i-vertex subsets whose edges all
carry colour i, weighted by K_i.  A colouring of zero energy is "clique-free"
and certifies the lower bound R(x_1,...,x_l) >= N+1.

Enumeration never walks subsets that already contain a mismatching edge:
per-colour neighbourhoods are kept as integer bitmasks, a candidate clique is
grown only inside the intersection of the neighbourhoods fixed so far, and
each clique is generated exactly once from its two smallest vertices.  The
pruning is an optimisation only; counts match a naive enumeration exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Sequence

from .errors import ConfigurationError


class Edge(NamedTuple):
    """Unordered vertex pair, stored with p < q."""

    p: int
    q: int


@lru_cache(maxsize=None)
def _index_tables(n: int) -> tuple[dict[tuple[int, int], int], tuple[Edge, ...]]:
    pairs = []
    lookup = {}
    for p in range(n):
        for q in range(p + 1, n):
            lookup[(p, q)] = len(pairs)
            pairs.append(Edge(p, q))
    return lookup, tuple(pairs)


def n_edges(n_vertices: int) -> int:
    return n_vertices * (n_vertices - 1) // 2


def edge_index(n_vertices: int, p: int, q: int) -> int:
    """Flat index of edge (p, q) in the row-major upper-triangle layout."""
    if p > q:
        p, q = q, p
    if p == q or p < 0 or q >= n_vertices:
        raise ValueError(f"invalid edge ({p}, {q}) for {n_vertices} vertices")
    return _index_tables(n_vertices)[0][(p, q)]


def edge_endpoints(n_vertices: int, index: int) -> Edge:
    """Inverse of :func:`edge_index`."""
    return _index_tables(n_vertices)[1][index]


def all_edges(n_vertices: int) -> tuple[Edge, ...]:
    return _index_tables(n_vertices)[1]


@dataclass(frozen=True)
class Problem:
    """A Ramsey target (x_1,...,x_l) together with positive clique weights."""

    clique_sizes: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "clique_sizes", tuple(int(x) for x in self.clique_sizes))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.clique_sizes) < 2:
            raise ConfigurationError("need at least two colours")
        if len(self.clique_sizes) != len(self.weights):
            raise ConfigurationError(
                f"{len(self.clique_sizes)} clique sizes but {len(self.weights)} weights"
            )
        if any(x < 2 for x in self.clique_sizes):
            raise ConfigurationError("clique sizes must all be >= 2")
        if any(w <= 0 for w in self.weights):
            raise ConfigurationError("weights must all be positive")

    @classmethod
    def for_targets(cls, clique_sizes: Sequence[int], weights: Sequence[float] | None = None) -> "Problem":
        """Build a problem; weights default to 1/x_i per colour."""
        sizes = tuple(int(x) for x in clique_sizes)
        if weights is None:
            weights = tuple(1.0 / x for x in sizes)
        return cls(sizes, tuple(weights))

    @property
    def n_colours(self) -> int:
        return len(self.clique_sizes)

    def describe(self) -> str:
        return "R(%s)" % ",".join(str(x) for x in self.clique_sizes)


@lru_cache(maxsize=64)
def _scaled_weights_cached(weights: tuple[float, ...]) -> tuple[tuple[int, ...], int] | None:
    fracs = []
    for w in weights:
        f = Fraction(w).limit_denominator(10**6)
        if float(f) != w:
            return None
        fracs.append(f)
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    if scale > 10**9:
        return None
    return tuple(int(f * scale) for f in fracs), scale


def scaled_integer_weights(problem: Problem) -> tuple[tuple[int, ...], int] | None:
    """Integer weights and a common scale, when the weights are rational.

    Lets energy comparisons run on exact integers, which matters because the
    landscape is heavily degenerate and float ties would be decided by
    rounding noise.  Returns None for weights without a small common
    denominator.
    """
    return _scaled_weights_cached(problem.weights)


@dataclass(frozen=True)
class Colouring:
    """An edge colouring of the complete graph on ``n_vertices`` vertices.

    Edge colours live in a flat tuple indexed by :func:`edge_index`; only the
    p < q half is stored, so symmetry holds by construction and there are no
    self-edges.
    """

    n_vertices: int
    n_colours: int
    edges: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(int(e) for e in self.edges))
        if self.n_vertices < 2:
            raise ConfigurationError("need at least two vertices")
        if self.n_colours < 2:
            raise ConfigurationError("need at least two colours")
        expected = n_edges(self.n_vertices)
        if len(self.edges) != expected:
            raise ConfigurationError(
                f"expected {expected} edge entries for {self.n_vertices} vertices, got {len(self.edges)}"
            )
        bad = [e for e in self.edges if not 0 <= e < self.n_colours]
        if bad:
            raise ConfigurationError(
                f"edge colour {bad[0]} out of range for {self.n_colours} colours"
            )

    @classmethod
    def random(cls, n_vertices: int, n_colours: int, rng) -> "Colouring":
        """Colouring with i.i.d. uniform edge colours drawn from ``rng``."""
        m = n_edges(n_vertices)
        return cls(n_vertices, n_colours, tuple(rng.randrange(n_colours) for _ in range(m)))

    @classmethod
    def uniform(cls, n_vertices: int, n_colours: int, colour: int = 0) -> "Colouring":
        return cls(n_vertices, n_colours, (colour,) * n_edges(n_vertices))

    @classmethod
    def from_function(cls, n_vertices: int, n_colours: int, colour_of: Callable[[int, int], int]) -> "Colouring":
        """Build from a function of the vertex pair (p, q) with p < q."""
        cols = [colour_of(p, q) for p in range(n_vertices) for q in range(p + 1, n_vertices)]
        return cls(n_vertices, n_colours, tuple(cols))

    def colour_of(self, p: int, q: int) -> int:
        return self.edges[edge_index(self.n_vertices, p, q)]

    def as_matrix(self) -> list[list[int]]:
        """Symmetric matrix of colour ids, -1 on the diagonal."""
        n = self.n_vertices
        m = [[-1] * n for _ in range(n)]
        for idx, (p, q) in enumerate(all_edges(n)):
            m[p][q] = m[q][p] = self.edges[idx]
        return m

    def relabelled(self, permutation: Sequence[int]) -> "Colouring":
        """Image under a vertex permutation (vertex v -> permutation[v])."""
        n = self.n_vertices
        perm = list(permutation)
        if sorted(perm) != list(range(n)):
            raise ValueError("not a permutation of the vertex set")
        out = [0] * n_edges(n)
        for idx, (p, q) in enumerate(all_edges(n)):
            out[edge_index(n, perm[p], perm[q])] = self.edges[idx]
        return Colouring(n, self.n_colours, tuple(out))


@dataclass(frozen=True)
class EnergyReport:
    """Total energy, per-colour monochromatic clique counts, and hot edges.

    An edge is "hot" when it lies inside at least one monochromatic target
    clique; only hot edges can lower the energy when recoloured.
    """

    total: float
    mono_counts: tuple[int, ...]
    hot_edges: frozenset[Edge]


def _check_problem(c: Colouring, prob: Problem) -> None:
    if c.n_colours != prob.n_colours:
        raise ConfigurationError(
            f"colouring has {c.n_colours} colours, problem has {prob.n_colours}"
        )


@lru_cache(maxsize=8)
def _masks_cached(c: Colouring) -> tuple[tuple[int, ...], ...]:
    """Per colour, per vertex: bitmask of same-coloured neighbours."""
    n = c.n_vertices
    masks = [[0] * n for _ in range(c.n_colours)]
    for idx, (p, q) in enumerate(all_edges(n)):
        col = c.edges[idx]
        masks[col][p] |= 1 << q
        masks[col][q] |= 1 << p
    return tuple(tuple(row) for row in masks)


def colour_masks(c: Colouring) -> tuple[tuple[int, ...], ...]:
    return _masks_cached(c)


def _count_cliques_in_mask(nbr: Sequence[int], members: int, k: int) -> int:
    """Number of k-cliques (in the one-colour graph ``nbr``) inside ``members``."""
    if k == 0:
        return 1
    if k == 1:
        return members.bit_count()
    total = 0
    rest = members
    while rest:
        low = rest & -rest
        rest ^= low
        sub = rest & nbr[low.bit_length() - 1]
        if k == 2:
            total += sub.bit_count()
        elif sub.bit_count() >= k - 1:
            total += _count_cliques_in_mask(nbr, sub, k - 1)
    return total


def _iter_cliques_in_mask(nbr: Sequence[int], members: int, k: int, prefix: tuple[int, ...] = ()) -> Iterator[tuple[int, ...]]:
    """Yield each k-clique inside ``members`` once, vertices ascending."""
    if k == 0:
        yield prefix
        return
    rest = members
    while rest:
        low = rest & -rest
        rest ^= low
        v = low.bit_length() - 1
        if k == 1:
            yield prefix + (v,)
        else:
            sub = rest & nbr[v]
            if sub.bit_count() >= k - 1:
                yield from _iter_cliques_in_mask(nbr, sub, k - 1, prefix + (v,))


def iter_monochromatic_cliques(c: Colouring, prob: Problem) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Yield (colour, vertices) for every monochromatic target clique, once.

    The outer loop fixes the clique's two smallest vertices, whose edge
    determines the only colour the clique could have; the remaining vertices
    are grown inside that colour's common neighbourhood above the second
    vertex.
    """
    _check_problem(c, prob)
    n = c.n_vertices
    masks = _masks_cached(c)
    sizes = prob.clique_sizes
    for idx, (p, q) in enumerate(all_edges(n)):
        col = c.edges[idx]
        x = sizes[col]
        if x > n:
            continue
        if x == 2:
            yield col, (p, q)
            continue
        above_q = -1 << (q + 1)
        members = masks[col][p] & masks[col][q] & above_q
        for rest in _iter_cliques_in_mask(masks[col], members, x - 2):
            yield col, (p, q) + rest


def clique_energy(c: Colouring, vertices: Sequence[int], colour: int) -> int:
    """1 if every edge inside ``vertices`` has ``colour``, else 0."""
    verts = list(vertices)
    if len(verts) < 2:
        raise ValueError("a clique needs at least two vertices")
    if len(set(verts)) != len(verts):
        raise ValueError("clique vertices must be distinct")
    if any(not 0 <= v < c.n_vertices for v in verts):
        raise ValueError("clique vertex out of range")
    if not 0 <= colour < c.n_colours:
        raise ValueError(f"colour {colour} out of range")
    edges = c.edges
    n = c.n_vertices
    for i, p in enumerate(verts):
        for q in verts[i + 1:]:
            if edges[edge_index(n, p, q)] != colour:
                return 0
    return 1


def total_energy(c: Colouring, prob: Problem) -> EnergyReport:
    """Evaluate the energy functional exactly.

    total = sum_i K_i * (number of monochromatic x_i-cliques of colour i);
    zero exactly when the colouring is clique-free.
    """
    counts = [0] * prob.n_colours
    hot: set[Edge] = set()
    for col, verts in iter_monochromatic_cliques(c, prob):
        counts[col] += 1
        for i, p in enumerate(verts):
            for q in verts[i + 1:]:
                hot.add(Edge(p, q))
    total = sum(prob.weights[i] * counts[i] for i in range(prob.n_colours))
    return EnergyReport(total=total, mono_counts=tuple(counts), hot_edges=frozenset(hot))


def hot_edges(c: Colouring, prob: Problem) -> frozenset[Edge]:
    """Edges lying in at least one monochromatic target clique."""
    return total_energy(c, prob).hot_edges


def count_cliques_through_edge(c: Colouring, masks, colour: int, p: int, q: int, x: int) -> int:
    """Monochromatic x-cliques of ``colour`` that would contain edge (p, q).

    Counts as if (p, q) had ``colour``; only the other x-2 vertices are read
    from the masks, so the same call serves both the destroyed count (edge
    currently of ``colour``) and the created count (edge about to become
    ``colour``).
    """
    if x > c.n_vertices:
        return 0
    if x == 2:
        return 1
    nbr = masks[colour]
    members = nbr[p] & nbr[q]
    return _count_cliques_in_mask(nbr, members, x - 2)


def delta_energy(c: Colouring, prob: Problem, e: Edge, new_colour: int) -> float:
    """Energy change of recolouring edge ``e``, without a full recompute.

    Only cliques containing both endpoints can change: each monochromatic
    clique destroyed in the old colour subtracts K_old, each created in the
    new colour adds K_new.
    """
    _check_problem(c, prob)
    p, q = e
    if not 0 <= p < q < c.n_vertices:
        raise ValueError(f"invalid edge ({p}, {q})")
    if not 0 <= new_colour < c.n_colours:
        raise ValueError(f"colour {new_colour} out of range")
    old = c.colour_of(p, q)
    if new_colour == old:
        return 0.0
    masks = _masks_cached(c)
    destroyed = count_cliques_through_edge(c, masks, old, p, q, prob.clique_sizes[old])
    created = count_cliques_through_edge(c, masks, new_colour, p, q, prob.clique_sizes[new_colour])
    return prob.weights[new_colour] * created - prob.weights[old] * destroyed


def apply_flip(c: Colouring, e: Edge, new_colour: int) -> Colouring:
    """Copy of ``c`` with edge ``e`` recoloured; the input is untouched."""
    p, q = e
    if not 0 <= p < q < c.n_vertices:
        raise ValueError(f"invalid edge ({p}, {q})")
    if not 0 <= new_colour < c.n_colours:
        raise ValueError(f"colour {new_colour} out of range")
    idx = edge_index(c.n_vertices, p, q)
    edges = list(c.edges)
    edges[idx] = new_colour
    return Colouring(c.n_vertices, c.n_colours, tuple(edges))
