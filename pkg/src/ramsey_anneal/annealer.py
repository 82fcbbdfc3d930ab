"""Clique-biased Metropolis annealing over edge colourings.

The chain proposes single-edge recolourings.  Downhill or flat moves are
always taken; an uphill move of size d is taken with probability
exp(-d/T).  Proposals are biased towards "hot" edges (those inside
monochromatic cliques) because only they can lower the energy; every
``full_sweep_period``-th pass visits all edges instead, deliberately trading
detailed balance for search speed.  The temperature follows the energy: it
cools after improvement and slowly reheats, compounding up to ``t_max``,
while the best energy stagnates, so the chain can climb out of the many
local minima of this landscape.

When the weights have a small common denominator, acceptance decisions
compare exact scaled-integer energies; the landscape is massively
degenerate, so ties must not be left to float rounding.
"""

from __future__ import annotations

import hashlib
import math
import random
import sys
import time
from dataclasses import dataclass, fields, replace

from .errors import ConfigurationError
from .graph import (
    Colouring,
    Edge,
    Problem,
    _count_cliques_in_mask,
    _iter_cliques_in_mask,
    all_edges,
    iter_monochromatic_cliques,
    n_edges,
    scaled_integer_weights,
)

FOUND_ZERO_ENERGY = "found-zero-energy"
BUDGET_EXHAUSTED = "budget-exhausted"

_TRACE_CAP = 20000


def derive_seed(master: int, *parts) -> int:
    """Deterministic 64-bit child seed from a master seed and context parts."""
    payload = repr((master,) + parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


@dataclass(frozen=True)
class AnnealConfig:
    """Schedule and budget for one annealing run.

    ``stagnation_window`` counts proposal steps at an unchanged best energy
    before reheating kicks in; ``full_sweep_period`` counts biased sweeps
    between full passes over all edges.  ``restarts`` and ``progress_every``
    are run plumbing: retry count above the first attempt, and the stderr
    progress interval in steps (0 disables).
    """

    initial_temperature: float = 1.0
    cooling_factor: float = 0.95
    heating_factor: float = 1.25
    stagnation_window: int = 300
    full_sweep_period: int = 50
    max_steps: int = 2_000_000
    t_min: float = 1e-3
    t_max: float = 10.0
    rng_seed: int = 0
    restarts: int = 5
    progress_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.cooling_factor < 1.0:
            raise ConfigurationError("cooling_factor must lie in (0, 1)")
        if self.heating_factor <= 1.0:
            raise ConfigurationError("heating_factor must exceed 1")
        if self.t_min <= 0 or self.t_max < self.t_min:
            raise ConfigurationError("need 0 < t_min <= t_max")
        if not self.t_min <= self.initial_temperature <= self.t_max:
            raise ConfigurationError("initial_temperature must lie in [t_min, t_max]")
        if self.stagnation_window < 1 or self.full_sweep_period < 1 or self.max_steps < 1:
            raise ConfigurationError("window, sweep period and step budget must be positive")
        if self.restarts < 0 or self.progress_every < 0:
            raise ConfigurationError("restarts and progress_every must be >= 0")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "AnnealConfig":
        """Build from flat key/value pairs (config file or CLI overrides)."""
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            name = key.strip().replace("-", "_")
            if name not in known:
                raise ConfigurationError(f"unknown config key {key!r}")
            caster = int if known[name] == "int" else float
            try:
                kwargs[name] = caster(value)
            except (TypeError, ValueError):
                raise ConfigurationError(f"config key {key!r}: cannot parse {value!r}") from None
        return cls(**kwargs)


class _Workspace:
    """Mutable engine state behind an AnnealState.

    Keeps per-colour neighbour bitmasks, per-colour monochromatic clique
    counts, and a per-edge count of containing cliques (the hot-edge set is
    exactly the edges with a positive count).  All of it is updated
    incrementally on each accepted flip by walking only the cliques through
    the flipped edge.
    """

    __slots__ = (
        "n", "l", "sizes", "weights", "int_weights", "scale",
        "colours", "masks", "counts", "edge_cliques", "hot", "edges_table",
    )

    def __init__(self, colouring: Colouring, prob: Problem):
        if colouring.n_colours != prob.n_colours:
            raise ConfigurationError(
                f"colouring has {colouring.n_colours} colours, problem has {prob.n_colours}"
            )
        self.n = colouring.n_vertices
        self.l = colouring.n_colours
        self.sizes = prob.clique_sizes
        self.weights = prob.weights
        scaled = scaled_integer_weights(prob)
        if scaled is not None:
            self.int_weights, self.scale = scaled
        else:
            self.int_weights, self.scale = None, 1.0
        self.colours = list(colouring.edges)
        self.edges_table = all_edges(self.n)
        masks = [[0] * self.n for _ in range(self.l)]
        for idx, (p, q) in enumerate(self.edges_table):
            col = self.colours[idx]
            masks[col][p] |= 1 << q
            masks[col][q] |= 1 << p
        self.masks = masks
        self.counts = [0] * self.l
        self.edge_cliques = [0] * n_edges(self.n)
        self.hot: set[int] = set()
        for col, verts in iter_monochromatic_cliques(colouring, prob):
            self._book_clique(col, verts, +1)

    def _edge_index(self, p: int, q: int) -> int:
        # row-major upper triangle; caller guarantees p < q
        return p * self.n - p * (p + 1) // 2 + q - p - 1

    def _book_clique(self, colour: int, verts: tuple[int, ...], sign: int) -> None:
        self.counts[colour] += sign
        edge_cliques = self.edge_cliques
        for i, p in enumerate(verts):
            for q in verts[i + 1:]:
                idx = self._edge_index(p, q)
                edge_cliques[idx] += sign
                if edge_cliques[idx] == 0:
                    self.hot.discard(idx)
                elif sign > 0:
                    self.hot.add(idx)

    def scaled_energy(self):
        if self.int_weights is not None:
            return sum(w * c for w, c in zip(self.int_weights, self.counts))
        return sum(w * c for w, c in zip(self.weights, self.counts))

    def energy(self) -> float:
        return sum(self.weights[i] * self.counts[i] for i in range(self.l))

    def flip_deltas(self, idx: int, new_colour: int) -> tuple[int, int, int]:
        """(old_colour, destroyed, created) clique counts for recolouring edge idx."""
        p, q = self.edges_table[idx]
        old = self.colours[idx]
        destroyed = self._cliques_through(old, p, q, count_only=True)
        created = self._cliques_through(new_colour, p, q, count_only=True)
        return old, destroyed, created

    def _cliques_through(self, colour: int, p: int, q: int, count_only: bool):
        x = self.sizes[colour]
        if x > self.n:
            return 0 if count_only else iter(())
        nbr = self.masks[colour]
        if x == 2:
            return 1 if count_only else iter(((),))
        members = nbr[p] & nbr[q]
        if count_only:
            return _count_cliques_in_mask(nbr, members, x - 2)
        return _iter_cliques_in_mask(nbr, members, x - 2)

    def apply(self, idx: int, new_colour: int) -> None:
        p, q = self.edges_table[idx]
        old = self.colours[idx]
        for rest in list(self._cliques_through(old, p, q, count_only=False)):
            self._book_clique(old, tuple(sorted((p, q) + rest)), -1)
        bit_p, bit_q = 1 << p, 1 << q
        self.masks[old][p] &= ~bit_q
        self.masks[old][q] &= ~bit_p
        self.masks[new_colour][p] |= bit_q
        self.masks[new_colour][q] |= bit_p
        self.colours[idx] = new_colour
        for rest in self._cliques_through(new_colour, p, q, count_only=False):
            self._book_clique(new_colour, tuple(sorted((p, q) + rest)), +1)

    def to_colouring(self) -> Colouring:
        return Colouring(self.n, self.l, tuple(self.colours))


class AnnealState:
    """The Markov-chain state: colouring, energy, temperature, and counters.

    Owned by exactly one run; all mutation goes through
    :func:`metropolis_step` and the sweep/temperature helpers.
    """

    def __init__(self, prob: Problem, colouring: Colouring, config: AnnealConfig):
        self.problem = prob
        self.config = config
        self.ws = _Workspace(colouring, prob)
        self.temperature = config.initial_temperature
        self.steps_taken = 0
        self.sweeps_taken = 0
        self.steps_since_improvement = 0
        self.rng = random.Random(config.rng_seed)
        self.best_scaled = self.ws.scaled_energy()
        self._best_at_last_adapt = self.best_scaled

    @classmethod
    def initial(cls, prob: Problem, n_vertices: int, config: AnnealConfig,
                initial: Colouring | None = None) -> "AnnealState":
        rng = random.Random(config.rng_seed)
        if initial is None:
            colouring = Colouring.random(n_vertices, prob.n_colours, rng)
        else:
            if initial.n_vertices != n_vertices:
                raise ConfigurationError(
                    f"initial colouring has {initial.n_vertices} vertices, expected {n_vertices}"
                )
            colouring = initial
        state = cls(prob, colouring, config)
        # the state's RNG continues after any draws used for the random start
        state.rng = rng
        return state

    @property
    def colouring(self) -> Colouring:
        return self.ws.to_colouring()

    @property
    def energy(self) -> float:
        return self.ws.energy()

    @property
    def best_energy(self) -> float:
        if self.ws.int_weights is not None:
            return self.best_scaled / self.ws.scale
        return self.best_scaled

    @property
    def hot_edges(self) -> frozenset[Edge]:
        table = self.ws.edges_table
        return frozenset(table[i] for i in self.ws.hot)

    def is_ground_state(self) -> bool:
        return self.ws.scaled_energy() == 0


def metropolis_accept(delta: float, temperature: float, rng: random.Random) -> bool:
    """Accept rule: always downhill/flat, uphill with one uniform draw."""
    if delta <= 0:
        return True
    return rng.random() < math.exp(-delta / temperature)


def metropolis_step(state: AnnealState, e: Edge, new_colour: int) -> bool:
    """Propose recolouring edge ``e``; mutate state on accept, count either way."""
    ws = state.ws
    p, q = e
    idx = ws._edge_index(p, q)
    old, destroyed, created = ws.flip_deltas(idx, new_colour)
    if ws.int_weights is not None:
        delta = ws.int_weights[new_colour] * created - ws.int_weights[old] * destroyed
        accepted = delta <= 0 or metropolis_accept(delta / ws.scale, state.temperature, state.rng)
    else:
        delta = ws.weights[new_colour] * created - ws.weights[old] * destroyed
        accepted = metropolis_accept(delta, state.temperature, state.rng)
    state.steps_taken += 1
    improved = False
    if accepted and new_colour != old:
        ws.apply(idx, new_colour)
        current = ws.scaled_energy()
        if current < state.best_scaled:
            state.best_scaled = current
            improved = True
    if improved:
        state.steps_since_improvement = 0
    else:
        state.steps_since_improvement += 1
    pe = state.config.progress_every
    if pe and state.steps_taken % pe == 0:
        print(
            f"step={state.steps_taken} N={ws.n} E={ws.energy()} "
            f"T={state.temperature:.6g} best={state.best_energy}",
            file=sys.stderr,
        )
    return accepted


def biased_sweep(state: AnnealState) -> int:
    """One randomized pass of proposals; returns the number of accepted flips.

    Normally visits the current hot-edge set; every
    ``full_sweep_period``-th sweep (or whenever the hot set is empty at
    positive energy) it visits all edges instead.  Stops early if the energy
    reaches zero or the step budget runs out mid-pass.
    """
    ws = state.ws
    cfg = state.config
    state.sweeps_taken += 1
    if ws.scaled_energy() == 0:
        return 0
    full = (state.sweeps_taken % cfg.full_sweep_period == 0) or not ws.hot
    if full:
        order = list(range(len(ws.edges_table)))
    else:
        order = sorted(ws.hot)
    state.rng.shuffle(order)
    l = ws.l
    rng = state.rng
    table = ws.edges_table
    colours = ws.colours
    accepted = 0
    for idx in order:
        draw = rng.randrange(l - 1)
        new_colour = draw + (draw >= colours[idx])
        accepted += metropolis_step(state, table[idx], new_colour)
        if state.steps_taken >= cfg.max_steps or ws.scaled_energy() == 0:
            break
    return accepted


def adapt_temperature(state: AnnealState, cfg: AnnealConfig) -> float:
    """Cool after an improvement, reheat after a stagnant window, else hold.

    Repeated stagnant calls keep multiplying the temperature, so reheating
    compounds towards ``t_max`` until progress resumes.
    """
    if state.best_scaled < state._best_at_last_adapt:
        state.temperature = max(cfg.t_min, state.temperature * cfg.cooling_factor)
    elif state.steps_since_improvement >= cfg.stagnation_window:
        state.temperature = min(cfg.t_max, state.temperature * cfg.heating_factor)
    state._best_at_last_adapt = state.best_scaled
    return state.temperature


@dataclass(frozen=True)
class SearchOutcome:
    """Result of one annealing run, plus a downsampled energy trace.

    The trace rows are (steps_taken, energy, temperature, best_energy),
    sampled once per sweep and thinned to a bounded length.
    """

    status: str
    colouring: Colouring
    best_energy: float
    steps_taken: int
    wall_time: float
    trace: tuple[tuple[int, float, float, float], ...] = ()

    @property
    def found(self) -> bool:
        return self.status == FOUND_ZERO_ENERGY


def anneal(prob: Problem, n_vertices: int, config: AnnealConfig,
           initial: Colouring | None = None) -> SearchOutcome:
    """Run one annealing search for a zero-energy colouring of K_n.

    Alternates biased sweeps with temperature adaptation until the energy
    hits zero or the step budget is spent.  Deterministic given problem,
    size, config (including seed), and initial colouring.
    """
    if initial is not None and initial.n_colours != prob.n_colours:
        raise ConfigurationError(
            f"initial colouring has {initial.n_colours} colours, problem has {prob.n_colours}"
        )
    state = AnnealState.initial(prob, n_vertices, config, initial)
    start = time.perf_counter()
    trace = [(0, state.energy, state.temperature, state.best_energy)]
    stride = 1
    while not state.is_ground_state() and state.steps_taken < config.max_steps:
        biased_sweep(state)
        adapt_temperature(state, config)
        if state.sweeps_taken % stride == 0:
            trace.append((state.steps_taken, state.energy, state.temperature, state.best_energy))
            if len(trace) > _TRACE_CAP:
                trace = trace[::2]
                stride *= 2
    status = FOUND_ZERO_ENERGY if state.is_ground_state() else BUDGET_EXHAUSTED
    trace.append((state.steps_taken, state.energy, state.temperature, state.best_energy))
    return SearchOutcome(
        status=status,
        colouring=state.colouring,
        best_energy=state.best_energy,
        steps_taken=state.steps_taken,
        wall_time=time.perf_counter() - start,
        trace=tuple(trace),
    )


def extend_colouring(c: Colouring, rng: random.Random) -> Colouring:
    """Add one vertex, giving each new edge the least-used colour at its old end.

    Existing edges are kept verbatim; for each old vertex p the new edge
    (p, N) takes the colour occurring least among p's incident edges, ties
    broken uniformly at random.  Starting the next search from this state
    usually leaves far fewer monochromatic cliques than a random start.
    """
    n, l = c.n_vertices, c.n_colours
    incident = [[0] * l for _ in range(n)]
    for idx, (p, q) in enumerate(all_edges(n)):
        col = c.edges[idx]
        incident[p][col] += 1
        incident[q][col] += 1
    new_cols = []
    for p in range(n):
        least = min(incident[p])
        tied = [col for col, cnt in enumerate(incident[p]) if cnt == least]
        new_cols.append(tied[0] if len(tied) == 1 else rng.choice(tied))
    out: list[int] = []
    for p in range(n):
        for q in range(p + 1, n):
            out.append(c.edges[edge_index_flat(n, p, q)])
        out.append(new_cols[p])
    return Colouring(n + 1, l, tuple(out))


def edge_index_flat(n: int, p: int, q: int) -> int:
    return p * n - p * (p + 1) // 2 + q - p - 1


@dataclass(frozen=True)
class RamseySearchResult:
    """Ladder outcome: one verified certificate per certified vertex count."""

    problem: Problem
    certificates: tuple
    outcomes: dict
    failed_n: int | None
    total_steps: int
    wall_time: float

    @property
    def best_bound(self) -> int | None:
        if not self.certificates:
            return None
        return self.certificates[-1].implied_bound

    @property
    def certified_ns(self) -> tuple[int, ...]:
        return tuple(cert.colouring.n_vertices for cert in self.certificates)


def search_ramsey(prob: Problem, start_n: int, max_n: int, config: AnnealConfig) -> RamseySearchResult:
    """Climb vertex counts from start_n, recycling each solution upward.

    Each level anneals from an extension of the previous clique-free
    colouring (random at the first level), retrying with fresh seeds and
    fresh extension tie-breaks up to ``config.restarts`` times.  Every
    certified level is independently verified before the bound is reported;
    the ladder stops at the first level that exhausts its retries.
    """
    from .verify import make_certificate

    if start_n > max_n:
        raise ConfigurationError(f"start_n {start_n} exceeds max_n {max_n}")
    t0 = time.perf_counter()
    master = config.rng_seed
    certificates = []
    outcomes: dict[int, SearchOutcome] = {}
    total_steps = 0
    previous: Colouring | None = None
    failed_n: int | None = None
    for n in range(start_n, max_n + 1):
        success: SearchOutcome | None = None
        for attempt in range(config.restarts + 1):
            run_cfg = replace(config, rng_seed=derive_seed(master, "anneal", n, attempt))
            if previous is not None:
                tie_rng = random.Random(derive_seed(master, "extend", n, attempt))
                initial = extend_colouring(previous, tie_rng)
            else:
                initial = None
            outcome = anneal(prob, n, run_cfg, initial)
            total_steps += outcome.steps_taken
            if outcome.found:
                success = outcome
                break
        if success is None:
            failed_n = n
            break
        certificates.append(make_certificate(success.colouring, prob))
        outcomes[n] = success
        previous = success.colouring
    return RamseySearchResult(
        problem=prob,
        certificates=tuple(certificates),
        outcomes=outcomes,
        failed_n=failed_n,
        total_steps=total_steps,
        wall_time=time.perf_counter() - t0,
    )
