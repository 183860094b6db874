"""
Experiments Service - reproducible drivers on top of the dynamics.

Every driver takes an ``ExperimentConfig``. Independent trials draw from
``make_rng(seed, (n, trial))`` so their results do not depend on the order in
which a worker pool finishes them.
"""
import itertools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import TypeVar

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from scipy.stats import chisquare

from app.core.config import settings
from app.core.errors import ConditionViolated, InvariantViolated, ValidationFailure
from app.schemas.experiments import (
    CouplingReport,
    DeviationStatistics,
    ExperimentConfig,
    MinProbabilityReport,
    SlopeEstimate,
    StationarityReport,
)
from app.services.enumeration import flat_boundary
from app.services.glauber import (
    ChainState,
    CoupledState,
    ExtremumKind,
    adapted_step,
    classify,
    coupled_step,
    exact_kernel,
    glauber_step,
    make_rng,
    min_probability,
    resample_round,
    run_chain,
    state_space,
)
from app.services.kirszbraun import (
    PartialHeight,
    check_extension_condition,
    kirszbraun_extend,
    periodic_from_slope,
)
from app.services.lattice import (
    Cell,
    HeightFunction,
    PeriodicConfig,
    Region,
    Slope,
    inner_boundary,
    lattice_distance,
    shift,
    validate_homomorphism,
)
from app.services.serialization import depth_raster, encode_pgm, write_png
from app.services.tree import (
    STANDARD_GEODESIC,
    Geodesic,
    TreeEnd,
    apply_generator,
    down_generator,
    inverse,
    multiply,
    tree_distance,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def _map(func: Callable[[T], R], jobs: Sequence[T], workers: int) -> list[R]:
    if workers > 1 and len(jobs) > 1:
        with Pool(min(workers, len(jobs))) as pool:
            return pool.map(func, jobs)
    return [func(job) for job in jobs]


def _slope(cfg: ExperimentConfig, n: int) -> Slope:
    return Slope.parse(cfg.slope, n, cfg.m)


def start_state(cfg: ExperimentConfig, n: int, trial: int = 0) -> ChainState:
    """The slope's periodic configuration as a chain with its own stream."""
    base = periodic_from_slope(n, _slope(cfg, n), d=cfg.d)
    return ChainState.from_config(base, rng=make_rng(cfg.seed, (n, trial)))


def sample_configuration(cfg: ExperimentConfig) -> ChainState:
    """Burn-in plus ``steps`` moves from the slope's periodic configuration."""
    state = start_state(cfg, cfg.n)
    run_chain(state, cfg.burn_in_for(cfg.n) + cfg.steps, cfg.dynamics)
    logger.info("sampled n=%d d=%d slope=%s", cfg.n, cfg.d, cfg.slope)
    return state


# =============================================================================
# Concentration
# =============================================================================


def max_deviation(state: ChainState, slope: Slope) -> int:
    """max_x d(h(x), g(floor(s . x))) over the fundamental cell, g the frame."""
    numerators = slope.canonical().numerators
    worst = 0
    for u, v in state.cfg.fundamental_values_cached().items():
        j = sum(p * c for p, c in zip(numerators, u)) // state.n
        worst = max(worst, tree_distance(v, state.frame.point(j)))
    return worst


def _concentration_trial(job: tuple[ExperimentConfig, int, int]) -> int:
    cfg, n, trial = job
    state = start_state(cfg, n, trial)
    run_chain(state, cfg.burn_in_for(n) + cfg.steps, cfg.dynamics)
    return max_deviation(state, _slope(cfg, n))


def deviation_statistics(n: int, maxima: Sequence[int], thresholds: Sequence[float]) -> DeviationStatistics:
    values = np.asarray(maxima)
    return DeviationStatistics(
        n=n,
        trials=len(values),
        maxima=[int(v) for v in values],
        thresholds=list(thresholds),
        tails=[float(np.mean(values >= eps * n)) for eps in thresholds],
        scaled_tail=float(np.mean(values >= 0.5 * n**0.8)),
    )


def run_concentration(cfg: ExperimentConfig) -> list[DeviationStatistics]:
    """
    Max-deviation statistics per period after burn-in.

    Raises:
        UnrealizableSlope: If the slope has the wrong parity for some n
    """
    out = []
    for n in cfg.periods:
        periodic_from_slope(n, _slope(cfg, n), d=cfg.d)
        maxima = _map(_concentration_trial, [(cfg, n, t) for t in range(cfg.trials)], cfg.workers)
        stats = deviation_statistics(n, maxima, cfg.thresholds)
        logger.info("n=%d: mean max deviation %.3f over %d trials", n, np.mean(maxima), cfg.trials)
        out.append(stats)
    return out


def concentration_csv(cfg: ExperimentConfig, rows: Sequence[DeviationStatistics]) -> str:
    lines = cfg.header() + ["n,trials,mean_max,scaled_tail,eps,tail"]
    for stats in rows:
        mean = float(np.mean(stats.maxima))
        for eps, tail in zip(stats.thresholds, stats.tails):
            lines.append(f"{stats.n},{stats.trials},{mean:.6g},{stats.scaled_tail:.6g},{eps:g},{tail:.6g}")
    return "\n".join(lines) + "\n"


# =============================================================================
# Stationarity
# =============================================================================


def run_stationarity_test(cfg: ExperimentConfig) -> StationarityReport:
    """
    Empirical occupation of the chain against the uniform law on the
    communicating class of its start, plus the exact-kernel residual.

    Raises:
        BudgetExceeded: If the class is too large to enumerate
    """
    if cfg.steps < 1:
        raise ValidationFailure("stationarity needs at least one step")
    slope = _slope(cfg, cfg.n)
    states = state_space(cfg.m, cfg.n, cfg.d, slope.numerators)
    if not states:
        raise ValidationFailure(f"slope {slope} has no configurations at n={cfg.n}, d={cfg.d}")
    kernel = exact_kernel(states, cfg.dynamics)
    members = np.sort(
        csgraph.breadth_first_order(sparse.csr_matrix(kernel > 0), 0, directed=True, return_predecessors=False)
    )
    size = len(members)
    uniform = np.full(size, 1 / size)
    residual = float(np.abs(uniform @ kernel[np.ix_(members, members)] - uniform).max())
    index = {states[i].cfg.key(): pos for pos, i in enumerate(members)}

    state = states[members[0]].copy()
    state.rng = make_rng(cfg.seed, (cfg.n, 0))
    step = adapted_step if cfg.dynamics == "adapted" else glauber_step
    for _ in range(cfg.burn_in_for(cfg.n)):
        step(state)
    counts = np.zeros(size)
    for _ in range(cfg.steps):
        step(state)
        position = index.get(state.cfg.key())
        if position is None:
            raise ValidationFailure("the chain left its communicating class")
        counts[position] += 1

    tv = 0.5 * float(np.abs(counts / cfg.steps - uniform).sum())
    if size > 1:
        test = chisquare(counts)
        statistic, p_value = float(test.statistic), float(test.pvalue)
    else:
        statistic, p_value = 0.0, 1.0
    logger.info("stationarity over %d states: TV %.4f, residual %.2e", size, tv, residual)
    return StationarityReport(
        states=size,
        steps=cfg.steps,
        total_variation=tv,
        chi_square=statistic,
        p_value=p_value,
        kernel_residual=residual,
    )


# =============================================================================
# Coupling
# =============================================================================


def _first_raisable_minimum(state: ChainState) -> Cell:
    for x in state.sites():
        if any(x) and x not in state.fixed_sites and classify(state, x) == ExtremumKind.TRUE_MINIMUM:
            return x
    raise ValidationFailure("no true local minimum to raise")


def raise_minimum(state: ChainState) -> tuple[ChainState, Cell]:
    """
    A copy of ``state`` with its first true local minimum away from the origin
    two levels higher, built as a Kirszbraun extension.

    On the box {0..n}^m the support is the raised value at every copy of the
    site plus the values of ``state`` everywhere except the interior
    neighbors of those copies; the depth-minimal extension toward the
    backward end of the frame fills the neighbors back in.

    Returns:
        (raised copy, raised site)

    Raises:
        ValidationFailure: If no such minimum exists
        ConditionViolated: If the raised data has no extension
    """
    x = _first_raisable_minimum(state)
    m, n = state.m, state.n
    label = state.cfg.label(x, 0)
    common = apply_generator(state.value(x), label)
    down = down_generator(common, state.frame)
    beta = next(i for i in range(1, state.d + 1) if i != down)

    region = Region.box((n + 1,) * m)
    copies = {
        tuple(c + n * b for c, b in zip(x, bits))
        for bits in itertools.product((0, 1), repeat=m)
        if all(c == 0 or not b for c, b in zip(x, bits))
    }
    around = {shift(c, k, sign) for c in copies for k in range(m) for sign in (1, -1)}
    free = {y for y in around if all(1 <= v < n for v in y)}
    pairs = []
    for y in region.ordered:
        if y in copies:
            pairs.append((y, apply_generator(apply_generator(state.cfg.value(y), label), beta)))
        elif y not in free:
            pairs.append((y, state.cfg.value(y)))
    h = kirszbraun_extend(PartialHeight.from_pairs(region, pairs), state.frame.backward)

    labels = np.empty_like(state.cfg.labels)
    for u in itertools.product(range(n), repeat=m):
        for k in range(m):
            labels[(k,) + u] = multiply(inverse(h[u]), h[shift(u, k)]).word[0]
    upper = state.copy()
    upper.cfg = PeriodicConfig(m, n, state.d, labels, h[(0,) * m])
    upper.cfg.validate()
    return upper, x


def coupling_pair(cfg: ExperimentConfig) -> CoupledState:
    """The lower chain after burn-in and its copy, raised unless ``initial`` is identical."""
    lower = start_state(cfg, cfg.n, 0)
    run_chain(lower, cfg.burn_in_for(cfg.n), "adapted")
    if cfg.initial == "raised":
        upper, x = raise_minimum(lower)
        logger.info("coupling: raised site %s", x)
    else:
        upper = lower.copy()
    return CoupledState(upper=upper, lower=lower, rng=make_rng(cfg.seed, (cfg.n, 1)))


def run_coupling_experiment(cfg: ExperimentConfig) -> CouplingReport:
    """
    Coupled adapted chains started one raised minimum apart (or equal).

    Raises:
        InvariantViolated: If the depth deviation ever exceeds the bound
    """
    pair = coupling_pair(cfg)
    bound = settings.COUPLING_DEVIATION_BOUND
    initial = worst = pair.deviation()
    for t in range(cfg.steps):
        coupled_step(pair)
        deviation = pair.deviation()
        worst = max(worst, deviation)
        if deviation > bound:
            raise InvariantViolated(f"depth deviation {deviation} exceeds {bound} at step {t + 1}")
    return CouplingReport(
        steps=cfg.steps, initial_deviation=initial, max_deviation=worst, final_deviation=pair.deviation()
    )


# =============================================================================
# Minimum probability and slope
# =============================================================================


def run_min_probability_test(cfg: ExperimentConfig, start: PeriodicConfig | None = None) -> MinProbabilityReport:
    """
    Frequency of a true minimum after one resampling round at a site,
    against the closed form.

    Raises:
        NotMinimum: If the site is not a local minimum
    """
    base = start or periodic_from_slope(cfg.n, _slope(cfg, cfg.n), d=cfg.d)
    state = ChainState.from_config(base, rng=make_rng(cfg.seed))
    if cfg.site is not None:
        x = tuple(c % state.n for c in cfg.site)
    else:
        x = next((u for u in state.sites() if classify(state, u).is_local_minimum), (0,) * state.m)
    expected = min_probability(state, x)
    hits = 0
    for _ in range(cfg.trials):
        trial = state.copy()
        resample_round(trial, x)
        hits += classify(trial, x) == ExtremumKind.TRUE_MINIMUM
    return MinProbabilityReport(site=list(x), expected=float(expected), observed=hits / cfg.trials, trials=cfg.trials)


def period_lengths(state: ChainState) -> list[int]:
    """d(h(0), h(n e_k)) for every axis."""
    return [len(state.cfg.monodromy(k)) for k in range(state.m)]


def estimate_slope(cfg: ExperimentConfig, start: PeriodicConfig | None = None) -> SlopeEstimate:
    """Time average of d(h(0), h(n e_k)) / n along the chain."""
    slope = _slope(cfg, cfg.n)
    base = start or periodic_from_slope(cfg.n, slope, d=cfg.d)
    state = ChainState.from_config(base, rng=make_rng(cfg.seed))
    run_chain(state, cfg.burn_in_for(cfg.n), cfg.dynamics)
    step = adapted_step if cfg.dynamics == "adapted" else glauber_step
    samples = []
    if cfg.steps == 0:
        samples.append(period_lengths(state))
    for _ in range(cfg.steps):
        step(state)
        samples.append(period_lengths(state))
    estimate = np.mean(samples, axis=0) / state.n
    return SlopeEstimate(
        target=[float(abs(c)) for c in slope.components],
        estimate=[float(v) for v in estimate],
        samples=len(samples),
    )


# =============================================================================
# Limit shapes
# =============================================================================


THREE_ENDS = (TreeEnd((), (1, 2)), TreeEnd((), (2, 3)), TreeEnd((), (3, 1)))


@dataclass
class LimitShape:
    height: HeightFunction
    boundary: frozenset[Cell]
    steps: int


def limit_shape_region(kind: str, size: int) -> Region:
    """A size x size box or the l1 ball of radius size // 2 (both 2-dimensional)."""
    if kind == "box":
        return Region.box((size, size))
    if kind == "diamond":
        radius = size // 2
        return Region.from_cells(
            (i, j)
            for i in range(-radius, radius + 1)
            for j in range(-radius, radius + 1)
            if abs(i) + abs(j) <= radius
        )
    raise ValidationFailure(f"unknown region {kind!r}")


def _three_geodesic_support(region: Region, d: int) -> PartialHeight:
    """Three boundary points sent along three rays leaving the root."""
    if d < 3:
        raise ValidationFailure("three-geodesic boundaries need d >= 3")
    cells = sorted(inner_boundary(region))
    center = np.mean(np.array(cells, dtype=float), axis=0)
    points: list[Cell] = []
    for angle in (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6):
        points.append(
            min(
                (c for c in cells if c not in points),
                key=lambda c: abs(
                    math.remainder(math.atan2(c[1] - center[1], c[0] - center[0]) - angle, 2 * math.pi)
                ),
            )
        )
    pairs = []
    for i, p in enumerate(points):
        reach = min(lattice_distance(region, p, q) for q in points if q != p)
        t = reach // 2
        if (t - sum(p)) % 2:
            t -= 1
        pairs.append((p, THREE_ENDS[i].vertex(max(t, sum(p) % 2))))
    return PartialHeight.from_pairs(region, pairs)


def limit_shape_start(region: Region, boundary: str, d: int) -> HeightFunction:
    """
    Initial height function for the fixed-boundary sampler.

    Raises:
        ConditionViolated: If the boundary data cannot be extended
    """
    if boundary == "flat":
        values = flat_boundary(region)
        partial = PartialHeight(region, tuple(sorted(values)), values)
    elif boundary == "three-geodesic":
        partial = _three_geodesic_support(region, d)
    else:
        raise ValidationFailure(f"unknown boundary {boundary!r}")
    if not check_extension_condition(partial):
        raise ConditionViolated(f"{boundary} boundary data is not extendable")
    return kirszbraun_extend(partial)


def fixed_boundary_step(h: HeightFunction, interior: Sequence[Cell], d: int, rng: np.random.Generator) -> None:
    """Pivot a uniform interior cell whose neighbors share one value."""
    x = interior[int(rng.integers(len(interior)))]
    beta = int(rng.integers(1, d + 1))
    around = {h.values[y] for y in h.region.neighbors(x)}
    if len(around) == 1:
        h.values[x] = apply_generator(around.pop(), beta)


def sample_limit_shape(cfg: ExperimentConfig) -> LimitShape:
    """
    Pivot-only dynamics with the boundary of the initial extension frozen.

    The sampler never resamples excursions, so it is a visualization aid and
    not an exactly uniform sampler.
    """
    region = limit_shape_region(cfg.region, cfg.n)
    h = limit_shape_start(region, cfg.boundary, cfg.d)
    frozen = frozenset(inner_boundary(region))
    interior = [x for x in region.ordered if x not in frozen]
    rng = make_rng(cfg.seed)
    steps = cfg.burn_in_for(cfg.n) + cfg.steps if interior else 0
    for _ in range(steps):
        fixed_boundary_step(h, interior, cfg.d, rng)
    if not validate_homomorphism(h):
        raise InvariantViolated("fixed-boundary sampler produced an invalid height function")
    logger.info("limit shape on %d cells after %d steps", len(region), steps)
    return LimitShape(height=h, boundary=frozen, steps=steps)


def render_depth_field(
    h: HeightFunction, g: Geodesic = STANDARD_GEODESIC, path: Path | None = None, png: Path | None = None
) -> str:
    """
    PGM (P2) rendering of depth(h(x), g); written to ``path`` when given.

    Raises:
        OSError: If a file cannot be written
    """
    pixels, mid, scale = depth_raster(h, g)
    text = encode_pgm(pixels, mid, scale)
    if path is not None:
        path.write_text(text)
    if png is not None:
        write_png(pixels, png)
    return text
