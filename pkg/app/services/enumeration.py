"""
Enumeration Service - Exact counts of configuration classes.

Periodic classes are counted by a depth-first search over torus edge labels:
the lines through the origin are assigned first so that monodromy lengths
prune early, every plaquette is checked as soon as its last edge is set, and
class membership (translations equal to those of the standard geodesic) is
decided at the leaves. Finite regions with fixed boundary values are counted
by a DFS over cell values. All searches carry a node budget.
"""
import csv
import io
import itertools
import logging
import math
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool

import numpy as np

from app.core.config import settings
from app.core.errors import (
    BudgetExceeded,
    ConfigFormatError,
    EmptyBoundaryClass,
    EmptyConditionClass,
    ValidationFailure,
)
from app.services.kirszbraun import PartialHeight, check_extension_condition
from app.services.lattice import (
    Cell,
    HeightFunction,
    PeriodicConfig,
    Region,
    Slope,
    class_orientation,
    inner_boundary,
    shift,
)
from app.services.tree import (
    ROOT,
    STANDARD_GEODESIC,
    TreeVertex,
    cyclic_length,
    depth,
    neighbors,
    tree_distance,
)

logger = logging.getLogger(__name__)


@dataclass
class CountResult:
    """An exact count and its entropy -(1/size) ln(count)."""

    count: int
    size: int
    configs: list[PeriodicConfig] = field(default_factory=list)
    nodes: int = 0

    @property
    def ent(self) -> float:
        if self.count == 0:
            return math.inf
        return -math.log(self.count) / self.size


class _Budget:
    def __init__(self, limit: int | None) -> None:
        self.limit = limit if limit is not None else settings.ENUMERATION_NODE_BUDGET
        self.nodes = 0

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.limit:
            raise BudgetExceeded(f"search exceeded {self.limit} nodes")


def _as_slope(s: "Slope | Sequence[int] | Sequence[Fraction]", n: int) -> Slope:
    if isinstance(s, Slope):
        return s if s.n == n else Slope.from_values(s.components, n)
    values = list(s)
    if all(isinstance(v, int) for v in values):
        return Slope(tuple(int(v) for v in values), n)
    return Slope.from_values(values, n)


# =============================================================================
# Periodic classes
# =============================================================================


def _edge_order(m: int, n: int) -> list[tuple[int, Cell]]:
    """Torus edges: the m lines through the origin, then the rest row-major."""
    origin = (0,) * m
    order = [(k, shift(origin, k, t)) for k in range(m) for t in range(n)]
    seen = set(order)
    for u in itertools.product(range(n), repeat=m):
        for k in range(m):
            if (k, u) not in seen:
                order.append((k, u))
                seen.add((k, u))
    return order


def _plaquettes_by_step(m: int, n: int, order: Sequence[tuple[int, Cell]]) -> list[list[tuple[tuple[int, Cell], ...]]]:
    """For each position in ``order``, the plaquettes whose last edge sits there."""
    position = {edge: i for i, edge in enumerate(order)}
    completed: list[list[tuple[tuple[int, Cell], ...]]] = [[] for _ in order]

    def wrap(x: Cell) -> Cell:
        return tuple(c % n for c in x)

    for u in itertools.product(range(n), repeat=m):
        for i in range(m):
            for j in range(i + 1, m):
                edges = (
                    (i, u),
                    (j, wrap(shift(u, i))),
                    (i, wrap(shift(u, j))),
                    (j, u),
                )
                completed[max(position[e] for e in edges)].append(edges)
    return completed


def _plaquette_ok(labels: np.ndarray, edges: tuple[tuple[int, Cell], ...]) -> bool:
    a, b, c, e = (int(labels[(k,) + u]) for k, u in edges)
    return (a == b and c == e) or (b == c and a == e)


def enumerate_invariant(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int] | Sequence[Fraction]",
    collect: bool = False,
    budget: int | None = None,
    first_label: int | None = None,
) -> CountResult:
    """
    Count the pinned class of slope ``s`` on the n-torus.

    A gradient belongs to the class when its translations, after re-pinning,
    equal the translations of the standard geodesic by p_k. The zero-slope
    class is every gradient with trivial monodromy.

    Args:
        m: Lattice dimension
        n: Period
        d: Tree degree
        s: Slope, or its integer numerators p_k
        collect: Keep every counted configuration in ``configs``
        budget: Node cap (defaults to ENUMERATION_NODE_BUDGET)
        first_label: Restrict the first edge to one label (partitioned runs)

    Raises:
        BudgetExceeded: If the search visits more nodes than the budget
    """
    slope = _as_slope(s, n).canonical()
    result = CountResult(count=0, size=n**m)
    if not slope.is_realizable():
        logger.debug("slope %s on n=%d is not realizable along the standard geodesic", slope, n)
        return result

    order = _edge_order(m, n)
    plaquettes = _plaquettes_by_step(m, n, order)
    targets = [abs(p) for p in slope.numerators]
    labels = np.ones((m,) + (n,) * m, dtype=np.int8)
    counter = _Budget(budget)

    def leaf() -> None:
        cfg = PeriodicConfig(m, n, d, labels.copy(), ROOT)
        if class_orientation(cfg, slope) == 1:
            result.count += 1
            if collect:
                result.configs.append(cfg.canonical())

    def search(i: int, stack: tuple[int, ...]) -> None:
        counter.tick()
        if i == len(order):
            leaf()
            return
        k, u = order[i]
        on_line = i < m * n
        t = i % n if on_line else 0
        choices = range(1, d + 1) if i or first_label is None else (first_label,)
        for label in choices:
            labels[(k,) + u] = label
            if not all(_plaquette_ok(labels, p) for p in plaquettes[i]):
                continue
            if on_line:
                word = stack[:-1] if stack and stack[-1] == label else stack + (label,)
                remaining = n - t - 1
                if len(word) + remaining < targets[k]:
                    continue
                if targets[k] == 0 and len(word) > remaining:
                    continue
                if remaining == 0:
                    if cyclic_length(word) != targets[k]:
                        continue
                    word = ()
                search(i + 1, word)
            else:
                search(i + 1, stack)

    search(0, ())
    result.nodes = counter.nodes
    logger.debug(
        "enumerated m=%d n=%d d=%d slope=%s: count=%d nodes=%d",
        m, n, d, slope, result.count, result.nodes,
    )
    return result


def _partition_worker(args: tuple[int, int, int, tuple[int, ...], int | None, int]) -> int:
    m, n, d, numerators, budget, label = args
    return enumerate_invariant(m, n, d, numerators, budget=budget, first_label=label).count


def enumerate_invariant_parallel(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int]",
    workers: int = 2,
    budget: int | None = None,
) -> CountResult:
    """Same count as ``enumerate_invariant``, split by the first edge label."""
    slope = _as_slope(s, n)
    jobs = [(m, n, d, slope.numerators, budget, label) for label in range(1, d + 1)]
    with Pool(processes=workers) as pool:
        counts = pool.map(_partition_worker, jobs)
    return CountResult(count=sum(counts), size=n**m)


def entropy_of_slope(
    m: int, n: int, d: int, components: Sequence[Fraction], budget: int | None = None
) -> float:
    """ent_n(s) for real slope components s (numerators floor(s_k n))."""
    return enumerate_invariant(m, n, d, Slope.from_values(components, n), budget=budget).ent


# =============================================================================
# Finite regions
# =============================================================================


def _bfs_order(region: Region, sources: Iterable[Cell]) -> list[Cell]:
    sources = list(sources)
    seen = set(sources)
    queue = deque(sources)
    order = []
    while queue:
        x = queue.popleft()
        for y in region.neighbors(x):
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order


def count_region_homomorphisms(
    region: Region,
    fixed: dict[Cell, TreeVertex],
    d: int,
    allowed: Callable[[Cell, TreeVertex], bool] | None = None,
    budget: int | None = None,
) -> int:
    """
    Count homomorphisms on ``region`` extending ``fixed``.

    Free cells are filled in BFS order from the fixed ones, each trying the
    neighbors of an already assigned neighbor.

    Raises:
        ValidationFailure: If some component of the region has no fixed cell
        BudgetExceeded: If the search visits more nodes than the budget
    """
    if not fixed:
        raise ValidationFailure("at least one cell must be fixed")
    order = _bfs_order(region, fixed)
    if len(order) + len(fixed) != len(region):
        raise ValidationFailure("every component of the region needs a fixed cell")
    for x, y in itertools.combinations(fixed, 2):
        if y in region.neighbors(x) and tree_distance(fixed[x], fixed[y]) != 1:
            return 0
    values = dict(fixed)
    counter = _Budget(budget)

    def search(i: int) -> int:
        counter.tick()
        if i == len(order):
            return 1
        x = order[i]
        assigned = [values[y] for y in region.neighbors(x) if y in values]
        total = 0
        for v in neighbors(assigned[0], d):
            if any(tree_distance(v, w) != 1 for w in assigned[1:]):
                continue
            if allowed is not None and not allowed(x, v):
                continue
            values[x] = v
            total += search(i + 1)
            del values[x]
        return total

    total = search(0)
    logger.debug("counted %d extensions on %d cells (%d nodes)", total, len(region), counter.nodes)
    return total


def enumerate_fixed_boundary(
    region: Region,
    boundary: HeightFunction | dict[Cell, TreeVertex],
    d: int,
    budget: int | None = None,
) -> CountResult:
    """
    Count homomorphisms on ``region`` equal to ``boundary`` where it is given.

    Data that fails the Lipschitz/parity condition has no extension and
    counts 0.
    """
    values = boundary.values if isinstance(boundary, HeightFunction) else boundary
    result = CountResult(count=0, size=len(region))
    partial = PartialHeight(region, tuple(sorted(values)), dict(values))
    if not check_extension_condition(partial):
        return result
    result.count = count_region_homomorphisms(region, dict(values), d, budget=budget)
    return result


def trace_boundary(region: Region, s: Slope) -> dict[Cell, TreeVertex]:
    """
    Boundary values g(j(x)) following the standard geodesic, with
    j(x) = floor(p.x / n) raised by one where parity requires.
    """
    values = {}
    for x in inner_boundary(region):
        j = math.floor(Fraction(sum(p * c for p, c in zip(s.numerators, x)), s.n))
        if (j - sum(x)) % 2:
            j += 1
        values[x] = STANDARD_GEODESIC.point(j)
    return values


@dataclass
class GapReport:
    """A fixed-boundary entropy compared with the free periodic one."""

    boundary: CountResult
    free: CountResult
    gap: float


def band_boundary_count(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int]",
    epsilon: float,
    budget: int | None = None,
) -> GapReport:
    """
    Homomorphisms on {0..n}^m with h(0) = r whose boundary depths stay within
    epsilon*n of p.x/n, normalized by 1/n^m and compared with ent_n(s).
    """
    slope = _as_slope(s, n)
    region = Region.box((n + 1,) * m)
    border = inner_boundary(region)
    band = epsilon * n

    def allowed(x: Cell, v: TreeVertex) -> bool:
        if x not in border:
            return True
        target = Fraction(sum(p * c for p, c in zip(slope.numerators, x)), n)
        return abs(depth(v, STANDARD_GEODESIC) - target) <= band

    origin = (0,) * m
    if not allowed(origin, ROOT):
        count = 0
    else:
        count = count_region_homomorphisms(region, {origin: ROOT}, d, allowed, budget)
    boundary = CountResult(count=count, size=n**m)
    free = enumerate_invariant(m, n, d, slope, budget=budget)
    return GapReport(boundary=boundary, free=free, gap=boundary.ent - free.ent)


def fixed_vs_free_gap(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int]",
    delta: float,
    budget: int | None = None,
) -> GapReport:
    """
    Ent(S_n, h_b) - ent_n(s) for the geodesic trace boundary on {0..n}^m.

    The trace may sit one unit off g(floor(p.x/n)) for parity, so the distance
    allowed from the geodesic is delta*n + 1.

    Raises:
        EmptyBoundaryClass: If the trace leaves that band or has no extension
    """
    if not 0 <= delta <= 1:
        raise ValidationFailure("delta must lie in [0, 1]")
    slope = _as_slope(s, n)
    region = Region.box((n + 1,) * m)
    boundary = trace_boundary(region, slope)
    for x, v in boundary.items():
        j = math.floor(Fraction(sum(p * c for p, c in zip(slope.numerators, x)), n))
        if tree_distance(v, STANDARD_GEODESIC.point(j)) > delta * n + 1:
            raise EmptyBoundaryClass(f"no boundary data within {delta}n of the geodesic at {x}")
    fixed = enumerate_fixed_boundary(region, boundary, d, budget)
    if fixed.count == 0:
        raise EmptyBoundaryClass(f"boundary trace for slope {slope} has no extension")
    free = enumerate_invariant(m, n, d, slope, budget=budget)
    return GapReport(boundary=fixed, free=free, gap=fixed.ent - free.ent)


@dataclass
class TilingReport:
    small: CountResult
    tiled: CountResult

    @property
    def holds(self) -> bool:
        return self.small.ent >= self.tiled.ent - 1e-12


def periodic_boundary_tiling_check(
    m: int,
    n: int,
    k: int,
    d: int,
    s: "Slope | Sequence[int]",
    budget: int | None = None,
) -> TilingReport:
    """
    Compare Ent on {0..n}^m with Ent on {0..nk}^m, both with the geodesic
    trace boundary; k^m glued copies of the small box embed in the large one.
    """
    small_slope = _as_slope(s, n)
    large_slope = Slope(tuple(p * k for p in small_slope.numerators), n * k)
    small_region = Region.box((n + 1,) * m)
    large_region = Region.box((n * k + 1,) * m)
    small = enumerate_fixed_boundary(small_region, trace_boundary(small_region, small_slope), d, budget)
    tiled = enumerate_fixed_boundary(large_region, trace_boundary(large_region, large_slope), d, budget)
    return TilingReport(small=small, tiled=tiled)


@dataclass
class ComparisonReport:
    ent_small: float
    ent_large: float
    gap: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound + 1e-12


def comparison_lemma_check(
    m: int,
    n1: int,
    n2: int,
    d: int,
    components: Sequence[Fraction],
    budget: int | None = None,
) -> ComparisonReport:
    """
    |ent_{n1}(s) - ent_{n2}(s)| against ln(d) (1 - (n1/n2)^m + (n2 - n1)/n2 + 1/n2^m).
    """
    if n1 > n2:
        raise ValidationFailure("n1 must not exceed n2")
    e1 = entropy_of_slope(m, n1, d, components, budget)
    e2 = entropy_of_slope(m, n2, d, components, budget)
    bound = math.log(d) * (1 - (n1 / n2) ** m + (n2 - n1) / n2 + 1 / n2**m)
    gap = abs(e1 - e2) if math.isfinite(e1) and math.isfinite(e2) else math.inf
    return ComparisonReport(ent_small=e1, ent_large=e2, gap=gap, bound=bound)


# =============================================================================
# Conditional depth expectations
# =============================================================================


def axis_path(x: Cell) -> list[Cell]:
    """Lattice path from the origin to ``x``, one axis after the other."""
    path = [(0,) * len(x)]
    for k, c in enumerate(x):
        step = 1 if c > 0 else -1
        for _ in range(abs(c)):
            path.append(shift(path[-1], k, step))
    return path


def _class_members(m: int, n: int, d: int, s: "Slope | Sequence[int]", budget: int | None) -> list[PeriodicConfig]:
    return enumerate_invariant(m, n, d, s, collect=True, budget=budget).configs


def conditional_depth_expectation(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int]",
    path: Sequence[Cell],
    increments: Sequence[int],
    x: Cell,
    budget: int | None = None,
) -> Fraction:
    """
    E[depth h(x) | first len(increments) depth increments along ``path``] over
    the uniform measure on the pinned class.

    Raises:
        EmptyConditionClass: If no configuration has these increments
    """
    members = _class_members(m, n, d, s, budget)
    total, hits = Fraction(0), 0
    for cfg in members:
        depths = [depth(cfg.value(y), STANDARD_GEODESIC) for y in path[: len(increments) + 1]]
        if all(b - a == g for a, b, g in zip(depths, depths[1:], increments)):
            total += depth(cfg.value(x), STANDARD_GEODESIC)
            hits += 1
    if hits == 0:
        raise EmptyConditionClass(f"no configuration matches increments {list(increments)}")
    return total / hits


def max_martingale_increment(
    m: int,
    n: int,
    d: int,
    s: "Slope | Sequence[int]",
    x: Cell,
    path: Sequence[Cell] | None = None,
    budget: int | None = None,
) -> Fraction:
    """Largest |X_k - X_{k-1}| of the depth martingale along ``path`` over the class."""
    path = list(path or axis_path(x))
    members = _class_members(m, n, d, s, budget)
    traces = [
        (
            tuple(
                depth(cfg.value(b), STANDARD_GEODESIC) - depth(cfg.value(a), STANDARD_GEODESIC)
                for a, b in zip(path, path[1:])
            ),
            depth(cfg.value(x), STANDARD_GEODESIC),
        )
        for cfg in members
    ]
    if not traces:
        raise EmptyConditionClass("the class is empty")

    def expectation(prefix: tuple[int, ...]) -> Fraction:
        hits = [target for inc, target in traces if inc[: len(prefix)] == prefix]
        return Fraction(sum(hits), len(hits))

    worst = Fraction(0)
    for inc, _ in traces:
        for k in range(1, len(inc) + 1):
            worst = max(worst, abs(expectation(inc[:k]) - expectation(inc[: k - 1])))
    return worst


# =============================================================================
# Surface tension tables
# =============================================================================


@dataclass
class SurfaceTensionTable:
    """ent_n(s) per period n and slope s."""

    m: int
    d: int
    entries: dict[tuple[int, tuple[Fraction, ...]], CountResult] = field(default_factory=dict)

    @property
    def n_values(self) -> list[int]:
        return sorted({n for n, _ in self.entries})

    @property
    def slopes(self) -> list[tuple[Fraction, ...]]:
        return sorted({s for _, s in self.entries})

    def ent(self, n: int, s: Sequence[Fraction]) -> float:
        return self.entries[(n, tuple(s))].ent

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["m", "n", "d", *(f"s{k + 1}" for k in range(self.m)), "count", "ent"])
        for (n, s), result in sorted(self.entries.items()):
            ent = "inf" if result.count == 0 else f"{result.ent:.12g}"
            writer.writerow([self.m, n, self.d, *(str(c) for c in s), result.count, ent])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SurfaceTensionTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:3] != ["m", "n", "d"]:
            raise ConfigFormatError("surface tension CSV needs an m,n,d,... header")
        m = len(rows[0]) - 5
        table: SurfaceTensionTable | None = None
        for row in rows[1:]:
            if not row:
                continue
            try:
                row_m, n, d = int(row[0]), int(row[1]), int(row[2])
                s = tuple(Fraction(c) for c in row[3 : 3 + m])
                count = int(row[3 + m])
            except (ValueError, IndexError, ZeroDivisionError):
                raise ConfigFormatError(f"bad surface tension row: {row}")
            table = table or cls(m=row_m, d=d)
            table.entries[(n, s)] = CountResult(count=count, size=n**row_m)
        if table is None:
            raise ConfigFormatError("surface tension CSV has no rows")
        return table


def surface_tension_table(
    m: int,
    n_values: Sequence[int],
    d: int,
    slopes: Sequence[Sequence[Fraction]],
    budget: int | None = None,
) -> SurfaceTensionTable:
    table = SurfaceTensionTable(m=m, d=d)
    for n in n_values:
        for s in slopes:
            s = tuple(Fraction(c) for c in s)
            if len(s) != m:
                raise ValidationFailure(f"slope {s} needs {m} components")
            table.entries[(n, s)] = enumerate_invariant(m, n, d, Slope.from_values(s, n), budget=budget)
            logger.info("ent_%d(%s) = %s", n, ",".join(map(str, s)), table.entries[(n, s)].ent)
    return table


@dataclass
class ConvexityViolation:
    n: int
    axis: int
    low: tuple[Fraction, ...]
    high: tuple[Fraction, ...]
    excess: float


def convexity_check(
    table: SurfaceTensionTable, tolerance: float | None = None
) -> list[ConvexityViolation]:
    """
    Midpoint convexity along each axis: ent((s0 + s2)/2) <= (ent(s0) + ent(s2))/2.

    The default tolerance is ln(d)/n^m; infinite entries are skipped.
    """
    violations = []
    slopes = set(table.slopes)
    for n in table.n_values:
        tol = tolerance if tolerance is not None else math.log(table.d) / n**table.m
        for low, high in itertools.permutations(sorted(slopes), 2):
            differing = [k for k in range(table.m) if low[k] != high[k]]
            if len(differing) != 1 or low[differing[0]] > high[differing[0]]:
                continue
            mid = tuple((a + b) / 2 for a, b in zip(low, high))
            keys = [(n, low), (n, mid), (n, high)]
            if not all(key in table.entries for key in keys):
                continue
            e0, e1, e2 = (table.entries[key].ent for key in keys)
            if not all(math.isfinite(e) for e in (e0, e1, e2)):
                continue
            excess = e1 - (e0 + e2) / 2
            if excess > tol:
                violations.append(ConvexityViolation(n, differing[0], low, high, excess))
    return violations


def flat_boundary(region: Region) -> dict[Cell, TreeVertex]:
    """Checkerboard r / a_1 on the inner boundary."""
    return trace_boundary(region, Slope((0,) * region.m, 1))

