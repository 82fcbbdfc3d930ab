"""Independent ground-truth checking and lower-bound certificates.

Everything here re-derives clique-freeness from the definition: plain
enumeration of complete vertex subsets with direct pairwise colour checks.
None of the pruned or incremental machinery in :mod:`ramsey_anneal.graph` is
used, so the two paths can serve as oracles for each other.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetExceededError, ConfigurationError, VerificationError
from . import io as _io
from .graph import Colouring, Problem, edge_index, n_edges, scaled_integer_weights

DEFAULT_ENUMERATION_BUDGET = 2**26


def find_monochromatic_clique(c: Colouring, prob: Problem) -> tuple[tuple[int, ...], int] | None:
    """First monochromatic target clique in subset order, or None.

    Walks every C(N, x_i) subset per colour and compares each pair directly.
    """
    if c.n_colours != prob.n_colours:
        raise ConfigurationError(
            f"colouring has {c.n_colours} colours, problem has {prob.n_colours}"
        )
    n = c.n_vertices
    edges = c.edges
    for colour, x in enumerate(prob.clique_sizes):
        if x > n:
            continue
        for verts in combinations(range(n), x):
            if all(
                edges[edge_index(n, p, q)] == colour
                for p, q in combinations(verts, 2)
            ):
                return verts, colour
    return None


def verify_clique_free(c: Colouring, prob: Problem) -> bool:
    """True iff no colour i has a monochromatic x_i-clique."""
    return find_monochromatic_clique(c, prob) is None


def naive_mono_counts(c: Colouring, prob: Problem) -> tuple[int, ...]:
    """Per-colour monochromatic clique counts by unpruned enumeration."""
    if c.n_colours != prob.n_colours:
        raise ConfigurationError(
            f"colouring has {c.n_colours} colours, problem has {prob.n_colours}"
        )
    n = c.n_vertices
    edges = c.edges
    counts = []
    for colour, x in enumerate(prob.clique_sizes):
        if x > n:
            counts.append(0)
            continue
        count = 0
        for verts in combinations(range(n), x):
            if all(
                edges[edge_index(n, p, q)] == colour
                for p, q in combinations(verts, 2)
            ):
                count += 1
        counts.append(count)
    return tuple(counts)


def naive_total_energy(c: Colouring, prob: Problem) -> float:
    counts = naive_mono_counts(c, prob)
    return sum(prob.weights[i] * counts[i] for i in range(prob.n_colours))


@dataclass(frozen=True)
class Certificate:
    """A verified clique-free colouring and the bound it implies.

    Construct via :func:`make_certificate` (or by reading a certificate
    file); both run the verification, so holding a Certificate means the
    check passed.
    """

    problem: Problem
    colouring: Colouring
    implied_bound: int
    verified_at: str
    checksum: str

    def statement(self) -> str:
        return f"{self.problem.describe()} >= {self.implied_bound}"


def _utc_now_iso() -> str:
    return _dt.datetime.now(tz=_dt.timezone.utc).isoformat(timespec="seconds")


def make_certificate(c: Colouring, prob: Problem, verified_at: str | None = None) -> Certificate:
    """Verify ``c`` and issue the certificate R(...) >= N+1.

    Refuses with a diagnostic naming one violating clique if verification
    fails.  ``verified_at`` may be pinned for reproducible output files.
    """
    violation = find_monochromatic_clique(c, prob)
    if violation is not None:
        verts, colour = violation
        raise VerificationError(
            "not clique-free: vertices {%s} form a monochromatic %d-clique of colour %d"
            % (",".join(str(v) for v in verts), len(verts), colour),
            vertices=verts,
            colour=colour,
        )
    return Certificate(
        problem=prob,
        colouring=c,
        implied_bound=c.n_vertices + 1,
        verified_at=verified_at if verified_at is not None else _utc_now_iso(),
        checksum=_io.colouring_checksum(c),
    )


def min_energy_exhaustive(
    n_vertices: int,
    prob: Problem,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    chunk_size: int = 1 << 18,
) -> tuple[float, int]:
    """Exact minimum energy over every colouring of K_n, with minimizer count.

    Colourings are enumerated as base-l integers over the edge slots;
    subset monochromaticity is evaluated directly from the definition,
    vectorised over enumeration chunks.  Refuses when l^m exceeds ``budget``.
    """
    l = prob.n_colours
    m = n_edges(n_vertices)
    total = l**m
    if total > budget:
        raise BudgetExceededError(
            f"exhaustive enumeration needs {total} colourings, budget is {budget}",
            required=total,
            budget=budget,
        )

    subset_edges: list[tuple[int, list[tuple[int, ...]]]] = []
    for colour, x in enumerate(prob.clique_sizes):
        subsets = []
        if x <= n_vertices:
            for verts in combinations(range(n_vertices), x):
                subsets.append(tuple(edge_index(n_vertices, p, q) for p, q in combinations(verts, 2)))
        subset_edges.append((colour, subsets))

    scaled = scaled_integer_weights(prob)
    if scaled is not None:
        int_weights, scale = scaled
    else:
        int_weights, scale = None, 1

    best: float | int | None = None
    best_count = 0
    place = np.array([l**j for j in range(m)], dtype=np.int64)
    for start in range(0, total, chunk_size):
        idx = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        digits = (idx[:, None] // place[None, :]) % l  # (chunk, m) colour ids
        if int_weights is not None:
            energy = np.zeros(len(idx), dtype=np.int64)
        else:
            energy = np.zeros(len(idx), dtype=np.float64)
        for colour, subsets in subset_edges:
            if not subsets:
                continue
            count = np.zeros(len(idx), dtype=np.int64)
            for edge_idx in subsets:
                mono = digits[:, edge_idx[0]] == colour
                for e in edge_idx[1:]:
                    mono &= digits[:, e] == colour
                count += mono
            if int_weights is not None:
                energy += int_weights[colour] * count
            else:
                energy += prob.weights[colour] * count
        chunk_min = energy.min()
        chunk_count = int((energy == chunk_min).sum())
        if best is None or chunk_min < best:
            best, best_count = chunk_min, chunk_count
        elif chunk_min == best:
            best_count += chunk_count
    assert best is not None
    if int_weights is not None:
        return float(best) / scale, best_count
    return float(best), best_count
