"""
Lattice Service - Regions, height functions, dual labels and periodic configurations.

A height function is a graph homomorphism from a lattice region to the tree.
Its dual labels record, for every lattice edge x -> x + e_k, the generator
a_i with h(x + e_k) = h(x) * a_i. An n-invariant configuration stores these
labels on the torus (Z/nZ)^m together with the value h(0); everything else
(values on Z^m, monodromy, slope, supporting geodesic) is derived.
"""
import itertools
import logging
from collections import deque
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import floor

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from app.core.errors import (
    PlaquetteInconsistent,
    Unreachable,
    ValidationFailure,
    ZeroSlope,
)
from app.services.tree import (
    ROOT,
    STANDARD_GEODESIC,
    Geodesic,
    TreeVertex,
    Word,
    apply_generator,
    axis_geodesic,
    cyclic_length,
    cyclic_reduction,
    inverse,
    multiply,
    project_to_geodesic,
    reduce_word,
    translation,
    tree_distance,
    validate_vertex,
)

logger = logging.getLogger(__name__)

Cell = tuple[int, ...]
Edge = tuple[Cell, int]  # (x, k) is the edge x -> x + e_k
DualLabels = dict[Edge, int]


def unit(m: int, k: int, sign: int = 1) -> Cell:
    return tuple(sign if j == k else 0 for j in range(m))


def shift(x: Cell, k: int, sign: int = 1) -> Cell:
    return x[:k] + (x[k] + sign,) + x[k + 1 :]


# =============================================================================
# Regions and height functions
# =============================================================================


@dataclass(frozen=True)
class Region:
    """A finite set of cells of Z^m with unit l1 adjacency."""

    m: int
    cells: frozenset[Cell]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValidationFailure("dimension must be at least 1")
        if not self.cells:
            raise ValidationFailure("region must contain at least one cell")
        if any(len(x) != self.m for x in self.cells):
            raise ValidationFailure(f"all cells must have {self.m} coordinates")

    @classmethod
    def box(cls, shape: Sequence[int], origin: Cell | None = None) -> "Region":
        """Box with ``shape[k]`` cells along axis k, starting at ``origin``."""
        origin = origin or tuple(0 for _ in shape)
        cells = frozenset(
            tuple(o + c for o, c in zip(origin, x))
            for x in itertools.product(*(range(s) for s in shape))
        )
        return cls(m=len(shape), cells=cells)

    @classmethod
    def from_cells(cls, cells: Iterable[Sequence[int]]) -> "Region":
        frozen = frozenset(tuple(int(c) for c in x) for x in cells)
        m = len(next(iter(frozen))) if frozen else 0
        return cls(m=m, cells=frozen)

    @cached_property
    def ordered(self) -> list[Cell]:
        """Cells in row-major order (last coordinate fastest)."""
        return sorted(self.cells)

    @cached_property
    def index(self) -> dict[Cell, int]:
        return {x: i for i, x in enumerate(self.ordered)}

    def __contains__(self, x: object) -> bool:
        return x in self.cells

    def __len__(self) -> int:
        return len(self.cells)

    def neighbors(self, x: Cell) -> list[Cell]:
        out = []
        for k in range(self.m):
            for sign in (1, -1):
                y = shift(x, k, sign)
                if y in self.cells:
                    out.append(y)
        return out

    def edges(self) -> list[Edge]:
        """All edges (x, k) with both x and x + e_k in the region."""
        return [
            (x, k)
            for x in self.ordered
            for k in range(self.m)
            if shift(x, k) in self.cells
        ]

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        rows, cols = [], []
        for x, k in self.edges():
            i, j = self.index[x], self.index[shift(x, k)]
            rows += [i, j]
            cols += [j, i]
        size = len(self.ordered)
        data = np.ones(len(rows), dtype=np.int8)
        return sparse.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()

    @cached_property
    def _distance_cache(self) -> dict[Cell, np.ndarray]:
        return {}

    def distances_from(self, x: Cell) -> np.ndarray:
        """BFS distances from ``x`` to every cell (``inf`` when unreachable)."""
        if x not in self.cells:
            raise ValidationFailure(f"cell {x} is not in the region")
        cache = self._distance_cache
        if x not in cache:
            cache[x] = csgraph.shortest_path(
                self.adjacency, unweighted=True, directed=False, indices=self.index[x]
            )
        return cache[x]

    @cached_property
    def is_connected(self) -> bool:
        count, _ = csgraph.connected_components(self.adjacency, directed=False)
        return bool(count == 1)


@dataclass
class HeightFunction:
    """Values of a (candidate) homomorphism on a region."""

    region: Region
    values: dict[Cell, TreeVertex]

    def __getitem__(self, x: Cell) -> TreeVertex:
        return self.values[x]


def inner_boundary(region: Region) -> set[Cell]:
    """Cells of the region with a unit neighbor outside it."""
    return {
        x
        for x in region.cells
        if len(region.neighbors(x)) < 2 * region.m
    }


def lattice_distance(region: Region, x: Cell, y: Cell) -> int:
    """
    Graph distance between two cells inside the region.

    Raises:
        Unreachable: If the cells are in different components
    """
    if y not in region.cells:
        raise ValidationFailure(f"cell {y} is not in the region")
    dist = region.distances_from(x)[region.index[y]]
    if not np.isfinite(dist):
        raise Unreachable(f"{x} and {y} lie in different components")
    return int(dist)


def validate_homomorphism(h: HeightFunction) -> bool:
    """True iff every cell has a value and adjacent cells map to adjacent vertices."""
    if set(h.values) != set(h.region.cells):
        return False
    return all(
        tree_distance(h.values[x], h.values[shift(x, k)]) == 1
        for x, k in h.region.edges()
    )


def plaquette_is_trivial(a: int, b: int, c: int, e: int) -> bool:
    """Whether the loop word a*b*c*e around a unit square reduces to e."""
    return (a == b and c == e) or (b == c and a == e)


def dual_of(h: HeightFunction) -> DualLabels:
    """Edge labels of a valid height function."""
    labels: DualLabels = {}
    for x, k in h.region.edges():
        step = multiply(inverse(h.values[x]), h.values[shift(x, k)])
        if len(step.word) != 1:
            raise ValidationFailure(f"values at {x} and its +e{k + 1} neighbor are not adjacent")
        labels[(x, k)] = step.word[0]
    return labels


def reconstruct(
    labels: DualLabels,
    anchor: TreeVertex,
    base: Cell,
    region: Region | None = None,
) -> HeightFunction:
    """
    Rebuild a height function from its labels by walking out from ``base``.

    Raises:
        PlaquetteInconsistent: If a plaquette word is nontrivial or two walks disagree
    """
    if region is None:
        cells = {base}
        for x, k in labels:
            cells.update((x, shift(x, k)))
        region = Region.from_cells(cells)
    m = region.m
    for x, i in labels:
        for j in range(i + 1, m):
            corner = ((x, i), (shift(x, i), j), (shift(x, j), i), (x, j))
            if all(edge in labels for edge in corner):
                if not plaquette_is_trivial(*(labels[edge] for edge in corner)):
                    raise PlaquetteInconsistent(
                        f"plaquette at {x} in directions {i + 1},{j + 1} is not trivial"
                    )

    values = {base: anchor}
    queue = deque([base])
    while queue:
        x = queue.popleft()
        for k in range(m):
            for y, edge in ((shift(x, k), (x, k)), (shift(x, k, -1), (shift(x, k, -1), k))):
                if edge not in labels:
                    continue
                candidate = apply_generator(values[x], labels[edge])
                if y not in values:
                    values[y] = candidate
                    queue.append(y)
                elif values[y] != candidate:
                    raise PlaquetteInconsistent(f"labels are path dependent at {y}")
    return HeightFunction(region=region, values=values)


# =============================================================================
# Slopes
# =============================================================================


@dataclass(frozen=True)
class Slope:
    """A slope p/n given by its integer numerators p_k = floor(s_k n)."""

    numerators: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationFailure("slope denominator must be positive")
        if any(abs(p) > self.n for p in self.numerators):
            raise ValidationFailure(f"slope components must satisfy |s_k| <= 1: {self}")

    @property
    def m(self) -> int:
        return len(self.numerators)

    @property
    def components(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(p, self.n) for p in self.numerators)

    @property
    def is_zero(self) -> bool:
        return not any(self.numerators)

    def canonical(self) -> "Slope":
        """Flip all signs so the first nonzero component is positive."""
        for p in self.numerators:
            if p:
                if p < 0:
                    return Slope(tuple(-q for q in self.numerators), self.n)
                break
        return self

    def satisfies_parity(self) -> bool:
        """Every numerator has the parity of n (a loop of length n closes up)."""
        return all((p - self.n) % 2 == 0 for p in self.numerators)

    def is_realizable(self) -> bool:
        """
        Whether the pinned class along the standard geodesic can be nonempty.

        That geodesic alternates a_1 a_2, so the only group elements
        translating it shift by an even amount; with the parity condition
        this forces n and every numerator to be even.
        """
        return self.satisfies_parity() and all(p % 2 == 0 for p in self.numerators)

    def __str__(self) -> str:
        return ",".join(f"{p}/{self.n}" for p in self.numerators)

    @classmethod
    def from_values(cls, values: Sequence[Fraction | float | int], n: int) -> "Slope":
        return cls(tuple(floor(Fraction(v) * n) for v in values), n)

    @classmethod
    def parse(cls, text: str, n: int, m: int | None = None) -> "Slope":
        """
        Parse ``"1/2,0"``-style text.

        A lone ``0`` is broadcast to ``m`` components.
        """
        try:
            values = [Fraction(part.strip()) for part in text.split(",") if part.strip()]
        except (ValueError, ZeroDivisionError):
            raise ValidationFailure(f"not a slope: {text!r}")
        if m is not None and len(values) == 1 and values[0] == 0:
            values = values * m
        if m is not None and len(values) != m:
            raise ValidationFailure(f"slope {text!r} needs {m} components")
        return cls.from_values(values, n)


# =============================================================================
# Periodic configurations
# =============================================================================


@dataclass(eq=False)
class PeriodicConfig:
    """
    An n-invariant homomorphism Z^m -> T.

    ``labels[k][u]`` is the generator on the torus edge u -> u + e_k and
    ``anchor`` is h(0).
    """

    m: int
    n: int
    d: int
    labels: np.ndarray
    anchor: TreeVertex = field(default=ROOT)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValidationFailure("period n must be at least 2")
        if self.d < 2:
            raise ValidationFailure("tree degree d must be at least 2")
        self.labels = np.asarray(self.labels, dtype=np.int8)
        expected = (self.m,) + (self.n,) * self.m
        if self.labels.shape != expected:
            raise ValidationFailure(f"labels must have shape {expected}, got {self.labels.shape}")
        if self.labels.min() < 1 or self.labels.max() > self.d:
            raise ValidationFailure(f"labels must lie in 1..{self.d}")
        validate_vertex(self.anchor, self.d)

    def copy(self) -> "PeriodicConfig":
        return PeriodicConfig(self.m, self.n, self.d, self.labels.copy(), self.anchor)

    def key(self) -> bytes:
        """Identity of the gradient (labels only)."""
        return self.labels.tobytes()

    def cells(self) -> Iterator[Cell]:
        return itertools.product(range(self.n), repeat=self.m)

    def label(self, u: Cell, k: int) -> int:
        return int(self.labels[(k,) + tuple(c % self.n for c in u)])

    def plaquette_violations(self) -> list[tuple[Cell, int, int]]:
        bad = []
        for i in range(self.m):
            for j in range(i + 1, self.m):
                a = self.labels[i]
                b = np.roll(self.labels[j], -1, axis=i)
                c = np.roll(self.labels[i], -1, axis=j)
                e = self.labels[j]
                ok = ((a == b) & (c == e)) | ((b == c) & (a == e))
                bad += [(tuple(int(v) for v in u), i, j) for u in np.argwhere(~ok)]
        return bad

    def validate(self) -> None:
        """
        Raises:
            PlaquetteInconsistent: If some torus plaquette word is nontrivial
        """
        bad = self.plaquette_violations()
        if bad:
            u, i, j = bad[0]
            raise PlaquetteInconsistent(
                f"{len(bad)} nontrivial plaquettes, first at {u} in directions {i + 1},{j + 1}"
            )

    def is_valid(self) -> bool:
        return not self.plaquette_violations()

    def monodromy(self, k: int, base: Cell | None = None) -> Word:
        """Reduced word of labels along base -> base + n e_k."""
        base = base or (0,) * self.m
        letters = []
        u = base
        for _ in range(self.n):
            letters.append(self.label(u, k))
            u = shift(u, k)
        return reduce_word(letters)

    def translations(self) -> list[TreeVertex]:
        """T_k with h(x + n e_k) = T_k h(x)."""
        a = self.anchor
        return [
            multiply(multiply(a, TreeVertex(self.monodromy(k))), inverse(a))
            for k in range(self.m)
        ]

    def fundamental_values(self) -> dict[Cell, TreeVertex]:
        """h on {0..n-1}^m, computed in row-major order from the anchor."""
        values: dict[Cell, TreeVertex] = {}
        for u in self.cells():
            if not any(u):
                values[u] = self.anchor
                continue
            k = max(j for j in range(self.m) if u[j])
            prev = shift(u, k, -1)
            values[u] = apply_generator(values[prev], self.label(prev, k))
        return values

    def value(self, x: Cell) -> TreeVertex:
        """h(x) for any x in Z^m."""
        u = tuple(c % self.n for c in x)
        q = [(c - r) // self.n for c, r in zip(x, u)]
        result = self.fundamental_values_cached()[u]
        for t, power in zip(self.translations(), q):
            step = t if power > 0 else inverse(t)
            for _ in range(abs(power)):
                result = multiply(step, result)
        return result

    def fundamental_values_cached(self) -> dict[Cell, TreeVertex]:
        token = (self.labels.tobytes(), self.anchor)
        if getattr(self, "_values_token", None) != token:
            self._values = self.fundamental_values()
            self._values_token = token
        return self._values

    def with_anchor(self, anchor: TreeVertex) -> "PeriodicConfig":
        return PeriodicConfig(self.m, self.n, self.d, self.labels.copy(), anchor)

    def canonical(self) -> "PeriodicConfig":
        """Same gradient, re-pinned to the canonical anchor."""
        return self.with_anchor(canonical_anchor(self))


def monodromy(cfg: PeriodicConfig, k: int, base: Cell | None = None) -> Word:
    return cfg.monodromy(k, base)


def _leading_direction(words: Sequence[Word]) -> int | None:
    for k, word in enumerate(words):
        if cyclic_length(word) > 0:
            return k
    return None


def slope_of(cfg: PeriodicConfig) -> Slope:
    """
    Slope (1/n) min_x d(h(x), h(x + n e_k)), signed relative to the first
    nonzero direction.
    """
    values = cfg.fundamental_values_cached()
    translations = cfg.translations()
    magnitudes = []
    for t in translations:
        magnitudes.append(min(tree_distance(v, multiply(t, v)) for v in values.values()))

    words = [cfg.monodromy(k) for k in range(cfg.m)]
    lead = _leading_direction(words)
    numerators = list(magnitudes)
    if lead is not None:
        for k in range(cfg.m):
            if k == lead or magnitudes[k] == 0:
                continue
            combined = cyclic_length(reduce_word(words[k] + words[lead]))
            if combined != cyclic_length(words[k]) + cyclic_length(words[lead]):
                numerators[k] = -numerators[k]
    return Slope(tuple(numerators), cfg.n)


def _canonical_frame(words: Sequence[Word]) -> tuple[TreeVertex, Word] | None:
    """
    Anchor a and translation T = a W a^-1 of the leading direction such that
    the axis of T passes through r and a projects to r on it.
    """
    lead = _leading_direction(words)
    if lead is None:
        return None
    conjugator, core = cyclic_reduction(words[lead])
    if len(core) < 2:
        raise ValidationFailure(
            f"monodromy {words[lead]} in direction {lead + 1} is a reflection and has no axis"
        )
    c = TreeVertex(conjugator)
    g = axis_geodesic(core)
    position, _ = project_to_geodesic(inverse(c), g)
    p = g.point(position)
    anchor = multiply(inverse(p), inverse(c))
    t = multiply(multiply(inverse(p), TreeVertex(core)), p)
    return anchor, t.word


def canonical_anchor(cfg: PeriodicConfig) -> TreeVertex:
    """The unique pinned anchor for this gradient (the root for zero slope)."""
    frame = _canonical_frame([cfg.monodromy(k) for k in range(cfg.m)])
    return ROOT if frame is None else frame[0]


def frame_geodesic(cfg: PeriodicConfig) -> Geodesic:
    """
    Geodesic used to measure depth for ``cfg`` as stored.

    For nonzero slope this is the axis of the translations, which passes
    through r only when the anchor is pinned; for zero slope it is the
    standard geodesic.
    """
    frame = _canonical_frame([cfg.monodromy(k) for k in range(cfg.m)])
    if frame is None:
        return STANDARD_GEODESIC
    anchor, t = frame
    if anchor != cfg.anchor:
        raise ValidationFailure("configuration is not pinned; call canonical() first")
    return axis_geodesic(t)


def supporting_geodesic(cfg: PeriodicConfig) -> Geodesic:
    """
    The geodesic every value stays within n/2 of, for the pinned configuration.

    Raises:
        ZeroSlope: If every direction has zero slope
    """
    words = [cfg.monodromy(k) for k in range(cfg.m)]
    frame = _canonical_frame(words)
    if frame is None:
        raise ZeroSlope("zero-slope configurations have no supporting geodesic")
    anchor, t = frame
    g = axis_geodesic(t)
    pinned = cfg.with_anchor(anchor)
    worst = max(project_to_geodesic(v, g)[1] for v in pinned.fundamental_values().values())
    if 2 * worst > cfg.n:
        raise ValidationFailure(f"value at distance {worst} from the axis exceeds n/2")
    return g


def class_orientation(cfg: PeriodicConfig, slope: Slope) -> int | None:
    """
    Compare the pinned translations with the standard geodesic.

    Returns:
        +1 if T_k translates the standard geodesic by p_k for all k, -1 if by
        -p_k for all k, None otherwise
    """
    words = [cfg.monodromy(k) for k in range(cfg.m)]
    if slope.is_zero:
        return 1 if not any(words) else None
    try:
        frame = _canonical_frame(words)
        forward = [translation(STANDARD_GEODESIC, p) for p in slope.numerators]
        backward = [translation(STANDARD_GEODESIC, -p) for p in slope.numerators]
    except ValidationFailure:
        return None
    if frame is None:
        return None
    anchor, _ = frame
    pinned = [multiply(multiply(anchor, TreeVertex(w)), inverse(anchor)) for w in words]
    if pinned == forward:
        return 1
    if pinned == backward:
        return -1
    return None


def geodesic_config(m: int, n: int, d: int, direction: int = 0) -> PeriodicConfig:
    """
    The zigzag h(x) = g(x_dir + sum_{k != dir} (x_k mod 2)) with slope e_dir.

    Needs an even period.
    """
    if n % 2:
        raise ValidationFailure("geodesic configurations need an even period")
    grid = np.indices((n,) * m)
    parity = grid.sum(axis=0) % 2
    labels = np.empty((m,) + (n,) * m, dtype=np.int8)
    for k in range(m):
        step_parity = parity if k == direction else (parity - grid[k]) % 2
        labels[k] = np.where(step_parity == 0, 1, 2)
    return PeriodicConfig(m, n, d, labels, ROOT)


def flat_config(m: int, n: int, d: int) -> PeriodicConfig:
    """The zero-slope checkerboard alternating between r and a_1."""
    if n % 2:
        raise ValidationFailure("flat configurations need an even period")
    return PeriodicConfig(m, n, d, np.ones((m,) + (n,) * m, dtype=np.int8), ROOT)
