"""
Kirszbraun Service - Lipschitz extension of partial height functions.

A partial height function extends to a full homomorphism exactly when it is
1-Lipschitz for the lattice distance of the region and conserves parity. The
extension built here takes, at every cell, the candidate of least Busemann
depth toward a reference end among the maximal homomorphisms grown from the
support points.
"""
import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.core.errors import ConditionViolated, UnrealizableSlope, ValidationFailure
from app.services.lattice import (
    Cell,
    HeightFunction,
    PeriodicConfig,
    Region,
    Slope,
    shift,
    slope_of,
    validate_homomorphism,
)
from app.services.tree import (
    ROOT,
    STANDARD_GEODESIC,
    Geodesic,
    TreeEnd,
    TreeVertex,
    busemann_depth,
    inverse,
    multiply,
    toward_end,
    translation,
    tree_distance,
)

logger = logging.getLogger(__name__)


@dataclass
class PartialHeight:
    """
    Values prescribed on a support inside a region.

    The support order is significant: ties between equally deep candidates go
    to the earliest support point.
    """

    region: Region
    support: tuple[Cell, ...]
    values: dict[Cell, TreeVertex]

    def __post_init__(self) -> None:
        self.support = tuple(self.support)
        missing = [x for x in self.support if x not in self.region]
        if missing:
            raise ValidationFailure(f"support cells {missing} are outside the region")
        if set(self.support) != set(self.values):
            raise ValidationFailure("support and values must name the same cells")

    @classmethod
    def from_pairs(cls, region: Region, pairs: Sequence[tuple[Cell, TreeVertex]]) -> "PartialHeight":
        return cls(region=region, support=tuple(x for x, _ in pairs), values=dict(pairs))

    def restricted(self, h: HeightFunction) -> "PartialHeight":
        """Same support, values read off ``h``."""
        return PartialHeight(self.region, self.support, {x: h[x] for x in self.support})


def maximal_homomorphism(x: Cell, w: TreeVertex, omega: TreeEnd, region: Region) -> HeightFunction:
    """
    y -> the vertex at distance d_region(x, y) from ``w`` toward ``omega``.

    Cells unreachable from ``x`` are left out of the result.
    """
    distances = region.distances_from(x)
    values = {
        y: toward_end(w, omega, int(distances[i]))
        for i, y in enumerate(region.ordered)
        if np.isfinite(distances[i])
    }
    return HeightFunction(region=region, values=values)


def _parity(x: Cell, w: TreeVertex) -> int:
    return (sum(x) + len(w.word)) % 2


def extension_violations(p: PartialHeight) -> list[tuple[Cell, Cell]]:
    """Support pairs breaking the Lipschitz bound or the parity match."""
    bad = []
    for i, x in enumerate(p.support):
        distances = p.region.distances_from(x)
        for y in p.support[i + 1 :]:
            dist = distances[p.region.index[y]]
            if not np.isfinite(dist):
                continue
            if (
                tree_distance(p.values[x], p.values[y]) > dist
                or _parity(x, p.values[x]) != _parity(y, p.values[y])
            ):
                bad.append((x, y))
    return bad


def check_extension_condition(p: PartialHeight) -> bool:
    """True iff the data is 1-Lipschitz and parity conserving on every component."""
    return not extension_violations(p)


def kirszbraun_extend(p: PartialHeight, omega: TreeEnd | None = None) -> HeightFunction:
    """
    Depth-minimal extension of ``p`` toward ``omega``.

    Args:
        p: Partial data satisfying the extension condition
        omega: Reference end (defaults to the backward end of the standard geodesic)

    Returns:
        A homomorphism on the whole region agreeing with ``p`` on its support

    Raises:
        ConditionViolated: If the data is not extendable or a component has no support
    """
    omega = omega or STANDARD_GEODESIC.backward
    bad = extension_violations(p)
    if bad:
        x, y = bad[0]
        raise ConditionViolated(
            f"values at {x} and {y} violate the Lipschitz/parity condition "
            f"({len(bad)} offending pairs)"
        )

    region = p.region
    best_score = np.full(len(region), -np.inf)
    best_value: list[TreeVertex | None] = [None] * len(region)
    for x in p.support:
        w = p.values[x]
        base = busemann_depth(w, omega)
        distances = region.distances_from(x)
        for i, y in enumerate(region.ordered):
            dist = distances[i]
            if not np.isfinite(dist):
                continue
            score = base - dist
            if score > best_score[i]:
                best_score[i] = score
                best_value[i] = toward_end(w, omega, int(dist))

    values: dict[Cell, TreeVertex] = {}
    for y, value in zip(region.ordered, best_value):
        if value is None:
            raise ConditionViolated(f"cell {y} lies in a component without support")
        values[y] = value

    h = HeightFunction(region=region, values=values)
    if any(values[x] != p.values[x] for x in p.support) or not validate_homomorphism(h):
        raise ConditionViolated("extension failed its postcondition")
    logger.debug("extended %d support points to %d cells", len(p.support), len(region))
    return h


def periodic_from_slope(
    n: int,
    s: Slope,
    g: Geodesic = STANDARD_GEODESIC,
    d: int | None = None,
) -> PeriodicConfig:
    """
    An n-invariant configuration of slope ``s`` along ``g``.

    Corner values h(n k) = g(sum_k k_k p_k) on the box {0..n}^m are extended by
    ``kirszbraun_extend`` and the edge labels of the fundamental cell are read
    off; opposite faces of the box must carry the same labels. The tree
    degree defaults to the largest generator the construction uses.

    Raises:
        UnrealizableSlope: If ``g`` has no translation by some p_k or the
            extension does not close up periodically
    """
    if s.n != n:
        s = Slope.from_values(s.components, n)
    if not s.satisfies_parity():
        raise UnrealizableSlope(f"slope {s} has a numerator of the wrong parity for n={n}")
    try:
        translations = [translation(g, p) for p in s.numerators]
    except ValidationFailure as e:
        raise UnrealizableSlope(f"slope {s} is not a translation of the geodesic: {e}")

    m = s.m
    region = Region.box((n + 1,) * m)
    pairs = []
    for corner in itertools.product((0, 1), repeat=m):
        value = g.point(0)
        for k, bit in enumerate(corner):
            if bit:
                value = multiply(translations[k], value)
        pairs.append((tuple(n * bit for bit in corner), value))
    h = kirszbraun_extend(PartialHeight.from_pairs(region, pairs), g.backward)

    def label(x: Cell, k: int) -> int:
        step = multiply(inverse(h[x]), h[shift(x, k)])
        return step.word[0]

    labels = np.empty((m,) + (n,) * m, dtype=np.int8)
    for u in itertools.product(range(n), repeat=m):
        for k in range(m):
            labels[(k,) + u] = label(u, k)
            for j in range(m):
                if j != k and u[j] == 0 and label(shift(u, j, n), k) != labels[(k,) + u]:
                    raise UnrealizableSlope(
                        f"extension of slope {s} is not periodic across face {j + 1}"
                    )

    cfg = PeriodicConfig(m=m, n=n, d=d or _degree_of(h, g), labels=labels, anchor=ROOT)
    cfg.validate()
    measured = slope_of(cfg)
    if measured != s.canonical():
        raise UnrealizableSlope(f"constructed slope {measured} differs from {s}")
    return cfg


def _degree_of(h: HeightFunction, g: Geodesic) -> int:
    letters = [letter for v in h.values.values() for letter in v.word]
    letters += list(g.forward.period) + list(g.backward.period)
    letters += list(g.forward.prefix) + list(g.backward.prefix)
    return max(2, *letters)
