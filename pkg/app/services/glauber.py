"""
Glauber Service - Plain and adapted Glauber dynamics on n-invariant configurations.

Moves act on a torus cell and therefore on its whole nZ^m orbit at once.
Depth is measured against a frame geodesic fixed when the chain starts: the
common axis of the period translations for nonzero slope (these translations
are preserved by every move), the standard geodesic for zero slope. A
zero-slope chain holds h(0) in place: the origin never pivots and an
excursion containing it is never resampled, so the chain stays on the
pinned class h(0) = r.

Randomness order of one adapted (or coupled) step:
    site, U1, V1, V_pivot, U2, V2
where (U, V) drive one round of excursion resampling: U decides whether the
round produces a true local minimum, V picks the branch assignment within
that event or its complement. All five uniforms are drawn every step.
"""
import itertools
import logging
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.sparse import csgraph

from app.core.errors import (
    FixedSite,
    NotAnExcursion,
    NotExtremum,
    NotMinimum,
    ValidationFailure,
)
from app.services.lattice import (
    Cell,
    PeriodicConfig,
    frame_geodesic,
    shift,
    slope_of,
)
from app.services.tree import (
    STANDARD_GEODESIC,
    Geodesic,
    TreeVertex,
    apply_generator,
    depth,
    down_generator,
    inverse,
    multiply,
)

logger = logging.getLogger(__name__)

Dynamics = Literal["glauber", "adapted"]
TorusEdge = tuple[int, Cell]  # (k, u) is the torus edge u -> u + e_k
IncidentEdge = tuple[int, int]  # (k, sign): from x toward x + sign e_k


def make_rng(seed: int, spawn_key: Sequence[int] = ()) -> np.random.Generator:
    """Counter-based stream derived from a user seed and a spawn key."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


class ExtremumKind(str, Enum):
    NOT_EXTREMUM = "not_extremum"
    LOCAL_MAXIMUM = "local_maximum"
    TRUE_MINIMUM = "true_minimum"
    FAKE_MINIMUM = "fake_minimum"

    @property
    def is_extremum(self) -> bool:
        """All 2m neighbors share one value."""
        return self in (ExtremumKind.LOCAL_MAXIMUM, ExtremumKind.TRUE_MINIMUM)

    @property
    def is_local_minimum(self) -> bool:
        return self in (ExtremumKind.TRUE_MINIMUM, ExtremumKind.FAKE_MINIMUM)


# =============================================================================
# Chain state
# =============================================================================


@dataclass
class ChainState:
    """
    A mutable chain position: configuration, depth frame, frozen sites and RNG.

    When fixed sites are given the origin is frozen as well, since every
    frozen quantity is a depth difference to h(0). ``hold_origin`` keeps the
    value h(0) itself unchanged (zero slope).
    """

    cfg: PeriodicConfig
    frame: Geodesic
    fixed_sites: frozenset[Cell] = frozenset()
    fixed_offsets: dict[Cell, int] = field(default_factory=dict)
    rng: np.random.Generator = field(default_factory=lambda: make_rng(0))
    hold_origin: bool = False

    @classmethod
    def from_config(
        cls,
        cfg: PeriodicConfig,
        fixed_sites: Iterable[Cell] = (),
        seed: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> "ChainState":
        """
        Start a chain at ``cfg``.

        Nonzero-slope configurations are re-pinned so that the translation
        axis passes through the root; zero-slope ones keep their anchor and
        hold it for the whole run.
        """
        cfg.validate()
        zero = slope_of(cfg).is_zero
        if zero:
            cfg = cfg.copy()
            frame = STANDARD_GEODESIC
        else:
            cfg = cfg.canonical()
            frame = frame_geodesic(cfg)
        fixed = frozenset(tuple(c % cfg.n for c in x) for x in fixed_sites)
        if fixed:
            fixed |= {(0,) * cfg.m}
        state = cls(
            cfg=cfg,
            frame=frame,
            fixed_sites=fixed,
            rng=rng if rng is not None else make_rng(seed or 0),
            hold_origin=zero,
        )
        state.fixed_offsets = {x: state.offset(x) for x in fixed}
        return state

    @property
    def m(self) -> int:
        return self.cfg.m

    @property
    def n(self) -> int:
        return self.cfg.n

    @property
    def d(self) -> int:
        return self.cfg.d

    def copy(self) -> "ChainState":
        return ChainState(
            cfg=self.cfg.copy(),
            frame=self.frame,
            fixed_sites=self.fixed_sites,
            fixed_offsets=dict(self.fixed_offsets),
            rng=self.rng,
            hold_origin=self.hold_origin,
        )

    def is_frozen(self, x: Cell) -> bool:
        """Whether the chain may not pivot ``x``."""
        return x in self.fixed_sites or (self.hold_origin and not any(x))

    def value(self, x: Cell) -> TreeVertex:
        return self.cfg.fundamental_values_cached()[x]

    def depth_of(self, x: Cell) -> int:
        return depth(self.value(x), self.frame)

    def offset(self, x: Cell) -> int:
        """depth(h(x)) - depth(h(0))."""
        return self.depth_of(x) - self.depth_of((0,) * self.m)

    def depth_field(self) -> np.ndarray:
        field_ = np.empty((self.n,) * self.m, dtype=np.int64)
        for u, v in self.cfg.fundamental_values_cached().items():
            field_[u] = depth(v, self.frame)
        return field_

    def sites(self) -> list[Cell]:
        return list(self.cfg.cells())

    def check_fixed_offsets(self) -> bool:
        return all(self.offset(x) == c for x, c in self.fixed_offsets.items())


def _as_state(cfg: "PeriodicConfig | ChainState") -> ChainState:
    return cfg if isinstance(cfg, ChainState) else ChainState.from_config(cfg)


def incident_edges(m: int, n: int, x: Cell) -> list[tuple[IncidentEdge, Cell, TorusEdge]]:
    """(edge, neighbor cell, torus edge key) for the 2m edges at ``x``."""
    out = []
    for k in range(m):
        forward = tuple(c % n for c in shift(x, k))
        backward = tuple(c % n for c in shift(x, k, -1))
        out.append(((k, 1), forward, (k, x)))
        out.append(((k, -1), backward, (k, backward)))
    return out


def _set_label(cfg: PeriodicConfig, key: TorusEdge, label: int) -> None:
    k, u = key
    cfg.labels[(k,) + u] = label


def _get_label(cfg: PeriodicConfig, key: TorusEdge) -> int:
    k, u = key
    return int(cfg.labels[(k,) + u])


# =============================================================================
# Extrema and pivots
# =============================================================================


def _classify(state: ChainState, x: Cell) -> ExtremumKind:
    labels = [_get_label(state.cfg, key) for _, _, key in incident_edges(state.m, state.n, x)]
    down = down_generator(state.value(x), state.frame)
    if len(set(labels)) == 1:
        return ExtremumKind.LOCAL_MAXIMUM if labels[0] == down else ExtremumKind.TRUE_MINIMUM
    if down not in labels:
        return ExtremumKind.FAKE_MINIMUM
    return ExtremumKind.NOT_EXTREMUM


def classify(cfg: "PeriodicConfig | ChainState", x: Cell) -> ExtremumKind:
    """
    Extremum type of torus cell ``x``.

    Fake maxima cannot occur: a vertex has a single neighbor of lower depth.
    """
    return _classify(_as_state(cfg), x)


def apply_pivot(state: ChainState, x: Cell, beta: int) -> ChainState:
    """
    Set h(x) to v * a_beta, v being the common neighbor value.

    Raises:
        NotExtremum: If the neighbors of ``x`` do not share one value
        FixedSite: If the depth at ``x`` is frozen
    """
    if x in state.fixed_sites:
        raise FixedSite(f"site {x} is fixed")
    edges = incident_edges(state.m, state.n, x)
    labels = {_get_label(state.cfg, key) for _, _, key in edges}
    if len(labels) != 1:
        raise NotExtremum(f"neighbors of {x} carry {len(labels)} distinct values")
    if not 1 <= beta <= state.d:
        raise ValidationFailure(f"generator {beta} outside 1..{state.d}")
    common = apply_generator(state.value(x), labels.pop())
    for _, _, key in edges:
        _set_label(state.cfg, key, beta)
    if not any(x):
        state.cfg.anchor = apply_generator(common, beta)
    return state


def pivot(state: ChainState, x: Cell) -> ChainState:
    """Pivot at ``x`` with a generator drawn uniformly from 1..d."""
    beta = int(state.rng.integers(1, state.d + 1))
    return apply_pivot(state, x, beta)


def _pivot_generator(state: ChainState, x: Cell, v: float) -> int:
    """Map a uniform to a pivot generator: down iff v < 1/d."""
    labels = {_get_label(state.cfg, key) for _, _, key in incident_edges(state.m, state.n, x)}
    common = apply_generator(state.value(x), next(iter(labels)))
    down = down_generator(common, state.frame)
    d = state.d
    if v < 1 / d:
        return down
    up = [i for i in range(1, d + 1) if i != down]
    return up[min(int((v - 1 / d) * d), d - 2)]


# =============================================================================
# Excursions
# =============================================================================


@dataclass
class ExcursionComponent:
    """
    A bounded cluster of cells above ``start`` reached through its up-edges.

    ``cells`` maps torus cells to their depth offset from ``start``; ``values``
    holds the physical values of the lift attached to ``start``.
    """

    start: Cell
    branch: int
    cells: dict[Cell, int]
    values: dict[Cell, TreeVertex]
    base: TreeVertex
    up_edges: tuple[IncidentEdge, ...]
    internal_edges: frozenset[TorusEdge]
    boundary_edges: frozenset[TorusEdge]

    @property
    def representative(self) -> IncidentEdge:
        return self.up_edges[0]


@dataclass
class _Cluster:
    component: ExcursionComponent
    bounded: bool


def _explore(state: ChainState, x: Cell, start: IncidentEdge) -> _Cluster:
    """BFS from the up-neighbor behind ``start`` through cells deeper than ``x``."""
    cfg, frame = state.cfg, state.frame
    base = state.value(x)
    level = depth(base, frame)
    edges_at_x = {edge: key for edge, _, key in incident_edges(state.m, state.n, x)}
    neighbor = {edge: y for edge, y, _ in incident_edges(state.m, state.n, x)}

    branch = _get_label(cfg, edges_at_x[start])
    first = apply_generator(base, branch)
    if depth(first, frame) <= level:
        raise ValidationFailure(f"edge {start} at {x} is not an up-edge")

    values = {neighbor[start]: first}
    queue = deque([neighbor[start]])
    internal: set[TorusEdge] = set()
    boundary: set[TorusEdge] = set()
    bounded = True
    while queue:
        c = queue.popleft()
        for _, y, key in incident_edges(state.m, state.n, c):
            w = apply_generator(values[c], _get_label(cfg, key))
            if depth(w, frame) <= level:
                boundary.add(key)
                continue
            internal.add(key)
            if y not in values:
                values[y] = w
                queue.append(y)
            elif values[y] != w:
                bounded = False

    up_edges = tuple(
        edge
        for edge, key in edges_at_x.items()
        if key in boundary and depth(apply_generator(base, _get_label(cfg, key)), frame) > level
    )
    component = ExcursionComponent(
        start=x,
        branch=branch,
        cells={c: depth(v, frame) - level for c, v in values.items()},
        values=values,
        base=base,
        up_edges=up_edges or (start,),
        internal_edges=frozenset(internal),
        boundary_edges=frozenset(boundary),
    )
    return _Cluster(component=component, bounded=bounded)


def _up_edges(state: ChainState, x: Cell) -> list[IncidentEdge]:
    base = state.value(x)
    level = depth(base, state.frame)
    return [
        edge
        for edge, _, key in incident_edges(state.m, state.n, x)
        if depth(apply_generator(base, _get_label(state.cfg, key)), state.frame) > level
    ]


def _find_excursions(
    state: ChainState, x: Cell
) -> tuple[list[ExcursionComponent], list[IncidentEdge]]:
    excursions: list[ExcursionComponent] = []
    loose: list[IncidentEdge] = []
    assigned: set[IncidentEdge] = set()
    for edge in _up_edges(state, x):
        if edge in assigned:
            continue
        cluster = _explore(state, x, edge)
        members = set(cluster.component.up_edges) | {edge}
        assigned |= members
        if cluster.bounded:
            excursions.append(cluster.component)
        else:
            loose += sorted(members)
    return excursions, sorted(loose)


def find_excursions(
    cfg: "PeriodicConfig | ChainState", x: Cell
) -> tuple[list[ExcursionComponent], list[IncidentEdge]]:
    """
    Split the up-edges at ``x`` into excursions and non-excursion edges.

    Two up-edges share an excursion iff a path through cells deeper than
    ``x`` joins them. A cluster is unbounded as soon as one torus cell is met
    at two different depths.

    Returns:
        (excursions ordered by representative edge, non-excursion up-edges)
    """
    return _find_excursions(_as_state(cfg), x)


def _movable_excursions(
    state: ChainState, x: Cell
) -> tuple[list[ExcursionComponent], list[IncidentEdge]]:
    """Excursions a resampling round moves, and the up-edges it leaves alone."""
    excursions, loose = _find_excursions(state, x)
    if not state.hold_origin:
        return excursions, loose
    origin = (0,) * state.m
    held = [edge for c in excursions if origin in c.cells for edge in c.up_edges]
    return [c for c in excursions if origin not in c.cells], sorted(loose + held)


def _transposition(a: int, b: int) -> dict[int, int]:
    return {a: b, b: a}


def apply_resample(state: ChainState, component: ExcursionComponent, beta_new: int) -> ChainState:
    """
    Move an excursion from branch ``component.branch`` to ``beta_new``.

    Internal labels are transposed, boundary labels set to ``beta_new``; the
    depth field is unchanged.

    Raises:
        NotAnExcursion: If the component is not a current excursion at its start
    """
    x = component.start
    cluster = _explore(state, x, component.representative)
    current = cluster.component
    if not cluster.bounded or set(current.cells) != set(component.cells):
        raise NotAnExcursion(f"component at {x} is not a current excursion")
    down = down_generator(current.base, state.frame)
    if beta_new == down or not 1 <= beta_new <= state.d:
        raise ValidationFailure(f"generator {beta_new} is not an up-branch at {x}")
    beta_old = current.branch
    if beta_new == beta_old:
        return state

    swap = _transposition(beta_old, beta_new)
    origin = (0,) * state.m
    if origin in current.cells:
        old = current.values[origin]
        relative = multiply(inverse(current.base), old)
        new = multiply(current.base, TreeVertex(tuple(swap.get(a, a) for a in relative.word)))
        state.cfg.anchor = multiply(multiply(state.cfg.anchor, inverse(old)), new)
    for key in current.internal_edges:
        label = _get_label(state.cfg, key)
        _set_label(state.cfg, key, swap.get(label, label))
    for key in current.boundary_edges:
        _set_label(state.cfg, key, beta_new)
    return state


def resample_excursion(state: ChainState, component: ExcursionComponent) -> ChainState:
    """Resample one excursion with a branch uniform over the d - 1 up-generators."""
    down = down_generator(component.base, state.frame)
    allowed = [i for i in range(1, state.d + 1) if i != down]
    beta = allowed[int(state.rng.integers(len(allowed)))]
    return apply_resample(state, component, beta)


def _branch_assignments(state: ChainState, x: Cell) -> tuple[list[IncidentEdge], list[tuple[int, ...]], list[tuple[int, ...]]]:
    """
    Representatives, all branch assignments, and the assignments that leave
    ``x`` a true local minimum (empty unless ``x`` is a local minimum).
    """
    excursions, still = _movable_excursions(state, x)
    if not excursions:
        return [], [()], []
    down = down_generator(state.value(x), state.frame)
    allowed = [i for i in range(1, state.d + 1) if i != down]
    assignments = list(itertools.product(allowed, repeat=len(excursions)))
    event: list[tuple[int, ...]] = []
    targets = _still_labels(state, x, still)
    if _classify(state, x).is_local_minimum and len(targets) <= 1:
        event = [
            a for a in assignments
            if len(set(a)) == 1 and (not targets or a[0] in targets)
        ]
    return [c.representative for c in excursions], assignments, event


def _still_labels(state: ChainState, x: Cell, edges: Sequence[IncidentEdge]) -> set[int]:
    keys = {edge: key for edge, _, key in incident_edges(state.m, state.n, x)}
    return {_get_label(state.cfg, keys[edge]) for edge in edges}


def _apply_assignment(
    state: ChainState, x: Cell, representatives: Sequence[IncidentEdge], assignment: Sequence[int]
) -> None:
    for edge, beta in zip(representatives, assignment):
        cluster = _explore(state, x, edge)
        apply_resample(state, cluster.component, beta)


def _resample_round(state: ChainState, x: Cell, u: float, v: float) -> None:
    representatives, assignments, event = _branch_assignments(state, x)
    if not representatives:
        return
    threshold = len(event) / len(assignments)
    if u < threshold:
        pool = event
    else:
        chosen = set(event)
        pool = [a for a in assignments if a not in chosen]
    _apply_assignment(state, x, representatives, pool[min(int(v * len(pool)), len(pool) - 1)])


def resample_round(state: ChainState, x: Cell) -> ChainState:
    """Resample every excursion at ``x`` once, with branches uniform."""
    u, v = state.rng.random(2)
    _resample_round(state, x, float(u), float(v))
    return state


def min_probability(cfg: "PeriodicConfig | ChainState", x: Cell) -> Fraction:
    """
    Probability that resampling every excursion at ``x`` yields a true minimum.

    Up-edges the round leaves alone (non-excursion edges, and the excursion
    through a held origin) must already agree, otherwise the answer is 0.

    Raises:
        NotMinimum: If ``x`` is not a local minimum
    """
    state = _as_state(cfg)
    if not _classify(state, x).is_local_minimum:
        raise NotMinimum(f"site {x} is not a local minimum")
    excursions, still = _movable_excursions(state, x)
    if len(_still_labels(state, x, still)) > 1:
        return Fraction(0)
    exponent = len(excursions) if still else len(excursions) - 1
    return Fraction(1, (state.d - 1) ** max(exponent, 0))


# =============================================================================
# Steps
# =============================================================================


def _draw(state_rng: np.random.Generator, sites: int) -> tuple[int, np.ndarray]:
    site = int(state_rng.integers(sites))
    return site, state_rng.random(5)


def _adapted_move(state: ChainState, x: Cell, draws: Sequence[float]) -> None:
    u1, v1, v_pivot, u2, v2 = draws
    _resample_round(state, x, u1, v1)
    if state.is_frozen(x):
        return
    if _classify(state, x).is_extremum:
        apply_pivot(state, x, _pivot_generator(state, x, v_pivot))
    _resample_round(state, x, u2, v2)


def glauber_step(state: ChainState) -> ChainState:
    """Uniform site; pivot it uniformly when it is an extremum and not frozen."""
    sites = state.sites()
    x = sites[int(state.rng.integers(len(sites)))]
    beta = int(state.rng.integers(1, state.d + 1))
    if not state.is_frozen(x) and _classify(state, x).is_extremum:
        apply_pivot(state, x, beta)
    return state


def adapted_step(state: ChainState) -> ChainState:
    """
    Uniform site x: resample the excursions at x, pivot if x is now an
    extremum, then resample again. Frozen sites only get the first round.

    The second round runs whether or not a pivot happened, so one step is
    resample * pivot * resample with each factor symmetric.
    """
    sites = state.sites()
    site, draws = _draw(state.rng, len(sites))
    _adapted_move(state, sites[site], draws)
    return state


def run_chain(state: ChainState, steps: int, dynamics: Dynamics = "adapted") -> ChainState:
    step = adapted_step if dynamics == "adapted" else glauber_step
    for _ in range(steps):
        step(state)
    return state


# =============================================================================
# Coupling
# =============================================================================


@dataclass
class CoupledState:
    """Two chains on one frame driven by one random stream."""

    upper: ChainState
    lower: ChainState
    rng: np.random.Generator

    def __post_init__(self) -> None:
        if self.upper.frame != self.lower.frame:
            raise ValidationFailure("coupled chains must share a depth frame")
        if (self.upper.m, self.upper.n, self.upper.d) != (self.lower.m, self.lower.n, self.lower.d):
            raise ValidationFailure("coupled chains must share m, n and d")

    def deviation(self) -> int:
        return int(np.abs(self.upper.depth_field() - self.lower.depth_field()).max())


def coupled_step(pair: CoupledState) -> CoupledState:
    """
    One adapted step on both sides with shared draws.

    Each side follows exactly the law of ``adapted_step``: the true-minimum
    event of a resampling round is decided by thresholding the same uniform
    against each side's own probability, and pivots go down together.
    """
    sites = pair.upper.sites()
    site, draws = _draw(pair.rng, len(sites))
    x = sites[site]
    _adapted_move(pair.upper, x, draws)
    _adapted_move(pair.lower, x, draws)
    return pair


# =============================================================================
# Exact kernels
# =============================================================================


def _round_outcomes(state: ChainState, x: Cell) -> list[tuple[Fraction, ChainState]]:
    representatives, assignments, _ = _branch_assignments(state, x)
    if not representatives:
        return [(Fraction(1), state)]
    out = []
    weight = Fraction(1, len(assignments))
    for assignment in assignments:
        child = state.copy()
        _apply_assignment(child, x, representatives, assignment)
        out.append((weight, child))
    return out


def _step_outcomes(state: ChainState, x: Cell, dynamics: Dynamics) -> list[tuple[Fraction, ChainState]]:
    d = state.d
    if dynamics == "glauber":
        if state.is_frozen(x) or not _classify(state, x).is_extremum:
            return [(Fraction(1), state)]
        return [(Fraction(1, d), apply_pivot(state.copy(), x, beta)) for beta in range(1, d + 1)]

    out = []
    for p1, first in _round_outcomes(state, x):
        if first.is_frozen(x):
            out.append((p1, first))
            continue
        middle = [(Fraction(1), first)]
        if _classify(first, x).is_extremum:
            middle = [(Fraction(1, d), apply_pivot(first.copy(), x, beta)) for beta in range(1, d + 1)]
        for p_pivot, pivoted in middle:
            for p2, second in _round_outcomes(pivoted, x):
                out.append((p1 * p_pivot * p2, second))
    return out


def exact_kernel(states: Sequence[ChainState], dynamics: Dynamics = "glauber") -> np.ndarray:
    """
    Transition matrix of one step over an enumerated state space.

    States are identified by their edge labels. This loses nothing: a
    nonzero-slope frame is carried along by the translations when a state is
    re-pinned, and a zero-slope chain never moves h(0).

    Raises:
        ValidationFailure: If a move leaves the state space
    """
    index = {s.cfg.key(): i for i, s in enumerate(states)}
    size = len(states)
    kernel = [[Fraction(0)] * size for _ in range(size)]
    for i, state in enumerate(states):
        sites = state.sites()
        for x in sites:
            for p, outcome in _step_outcomes(state, x, dynamics):
                j = index.get(outcome.cfg.key())
                if j is None:
                    raise ValidationFailure("a move left the enumerated state space")
                kernel[i][j] += p / len(sites)
    logger.debug("built %s kernel over %d states", dynamics, size)
    return np.array([[float(p) for p in row] for row in kernel])


def is_symmetric(kernel: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.allclose(kernel, kernel.T, atol=atol))


def is_irreducible(kernel: np.ndarray) -> bool:
    count, _ = csgraph.connected_components(kernel > 0, directed=True, connection="strong")
    return bool(count == 1)


def communicating_classes(kernel: np.ndarray) -> list[list[int]]:
    """
    Strongly connected components of the support, largest first.

    For a symmetric kernel every class is closed, so each diagonal block is a
    stochastic matrix of its own. Classes at full slope split this way: no
    site is ever an extremum there.
    """
    count, labels = csgraph.connected_components(kernel > 0, directed=True, connection="strong")
    classes = [np.flatnonzero(labels == c).tolist() for c in range(count)]
    return sorted(classes, key=lambda c: (-len(c), c))


def state_space(
    m: int,
    n: int,
    d: int,
    numerators: Sequence[int],
    fixed_offsets: dict[Cell, int] | None = None,
    budget: int | None = None,
) -> list[ChainState]:
    """
    All configurations of a slope class (both orientations), as chain states.

    With ``fixed_offsets`` only states whose depth differences to the origin
    match are kept, and those sites are frozen.
    """
    from app.services.enumeration import enumerate_invariant

    result = enumerate_invariant(m, n, d, tuple(numerators), collect=True, budget=budget)
    swap = np.array([0, 2, 1] + list(range(3, d + 1)), dtype=np.int8)
    seen: dict[bytes, PeriodicConfig] = {}
    for cfg in result.configs:
        for labels in (cfg.labels, swap[cfg.labels]):
            candidate = PeriodicConfig(m, n, d, labels.copy()).canonical()
            seen.setdefault(candidate.key(), candidate)
    fixed = list(fixed_offsets or {})
    states = [ChainState.from_config(cfg, fixed_sites=fixed) for cfg in seen.values()]
    if fixed_offsets:
        states = [s for s in states if all(s.offset(x) == c for x, c in fixed_offsets.items())]
    return states
