"""
Independent counters used to cross-check the enumeration service.

- ``count_by_vertex_values``: DFS over vertex values on the closed box
  {0..n}^m with periodic closure, sharing no code path with the edge-label
  search beyond word arithmetic.
- ``count_integer_heights``: for d = 2 the tree is a line, so pinned classes
  are integer height functions with prescribed even line sums.
- ``count_extensions_brute``: plain product over per-cell candidate balls.
"""
import itertools
import logging
from collections.abc import Sequence

import numpy as np

from app.core.config import settings
from app.core.errors import BudgetExceeded
from app.services.lattice import Cell, Region, shift
from app.services.tree import (
    ROOT,
    STANDARD_GEODESIC,
    TreeVertex,
    inverse,
    multiply,
    neighbors,
    tree_distance,
)

logger = logging.getLogger(__name__)


def _anchor_candidates(d: int, radius: int) -> list[TreeVertex]:
    """Vertices projecting to r on the standard geodesic, up to ``radius``."""
    out = [ROOT]
    frontier = [ROOT]
    for _ in range(radius):
        grown = []
        for v in frontier:
            for letter in range(1, d + 1):
                if v.word and v.word[-1] == letter:
                    continue
                if not v.word and letter <= 2:
                    continue
                grown.append(TreeVertex(v.word + (letter,)))
        out += grown
        frontier = grown
    return out


def _shifts_standard(t: TreeVertex, p: int) -> bool:
    """t maps g(j) to g(j + p) on the standard geodesic (two adjacent points fix it)."""
    g = STANDARD_GEODESIC
    return all(multiply(t, g.point(j)) == g.point(j + p) for j in (-1, 0, 1))


def count_by_vertex_values(
    m: int, n: int, d: int, numerators: Sequence[int], budget: int | None = None
) -> int:
    """
    Count pinned n-invariant homomorphisms by assigning vertex values.

    h(0) ranges over vertices projecting to r (only r for zero slope), values
    on the closed box must carry the same label on opposite faces, and the
    translations h(n e_k) h(0)^-1 must shift the standard geodesic by p_k.
    """
    numerators = tuple(numerators)
    for p in numerators:
        if p:
            if p < 0:
                numerators = tuple(-q for q in numerators)
            break
    lead = next((abs(p) for p in numerators if p), None)
    anchors = [ROOT] if lead is None else _anchor_candidates(d, max(n - lead, 0) // 2)

    cells = list(itertools.product(range(n + 1), repeat=m))
    limit = budget if budget is not None else settings.ENUMERATION_NODE_BUDGET
    nodes = 0
    total = 0
    values: dict[Cell, TreeVertex] = {}

    def label(x: Cell, k: int) -> int | None:
        y = shift(x, k)
        if x not in values or y not in values:
            return None
        return multiply(inverse(values[x]), values[y]).word[0]

    def closes(x: Cell) -> bool:
        # every face copy of an edge touching x must repeat its label
        for k in range(m):
            for base in (shift(x, k, -1), x):
                if any(c < 0 or c > n for c in base) or base[k] == n:
                    continue
                here = label(base, k)
                if here is None:
                    continue
                for j in range(m):
                    if j == k:
                        continue
                    if base[j] == n:
                        other = label(shift(base, j, -n), k)
                    elif base[j] == 0:
                        other = label(shift(base, j, n), k)
                    else:
                        continue
                    if other is not None and other != here:
                        return False
        return True

    def search(i: int) -> None:
        nonlocal nodes, total
        nodes += 1
        if nodes > limit:
            raise BudgetExceeded(f"vertex search exceeded {limit} nodes")
        if i == len(cells):
            origin = values[cells[0]]
            found = [
                multiply(values[shift(cells[0], k, n)], inverse(origin)) for k in range(m)
            ]
            if all(_shifts_standard(t, p) for t, p in zip(found, numerators)):
                total += 1
            return
        x = cells[i]
        prev = [values[y] for y in (shift(x, k, -1) for k in range(m)) if y in values]
        for v in neighbors(prev[0], d):
            if any(tree_distance(v, w) != 1 for w in prev[1:]):
                continue
            values[x] = v
            if closes(x):
                search(i + 1)
            del values[x]

    for anchor in anchors:
        values[cells[0]] = anchor
        search(1)
        del values[cells[0]]
    logger.debug("vertex search m=%d n=%d d=%d: %d (%d nodes)", m, n, d, total, nodes)
    return total


def count_integer_heights(m: int, n: int, numerators: Sequence[int]) -> int:
    """
    Count periodic +-1 increment fields on the n-torus with zero plaquette
    sums and sum p_k along every line in direction k (the d = 2 classes).

    On the line the edge {a, a + 1} carries a_1 iff a is even, so an odd p_k
    swaps the labels across a period and leaves no n-invariant field.
    """
    numerators = tuple(numerators)
    for p in numerators:
        if p:
            if p < 0:
                numerators = tuple(-q for q in numerators)
            break
    if any(p % 2 for p in numerators):
        return 0
    steps = np.ones((m,) + (n,) * m, dtype=np.int8)
    edges = [(k, u) for u in itertools.product(range(n), repeat=m) for k in range(m)]
    if len(edges) > 24:
        raise BudgetExceeded(f"{len(edges)} torus edges is too many for the brute-force height oracle")
    total = 0

    def wrap(x: Cell) -> Cell:
        return tuple(c % n for c in x)

    def consistent() -> bool:
        for k in range(m):
            if np.any(steps[k].sum(axis=k) != numerators[k]):
                return False
        for i in range(m):
            for j in range(i + 1, m):
                around = (
                    steps[i]
                    + np.roll(steps[j], -1, axis=i)
                    - np.roll(steps[i], -1, axis=j)
                    - steps[j]
                )
                if np.any(around != 0):
                    return False
        return True

    for signs in itertools.product((1, -1), repeat=len(edges)):
        for (k, u), sign in zip(edges, signs):
            steps[(k,) + wrap(u)] = sign
        if consistent():
            total += 1
    return total


def ball(center: TreeVertex, radius: int, d: int) -> list[TreeVertex]:
    """All vertices within ``radius`` of ``center``."""
    seen = {center}
    frontier = [center]
    for _ in range(radius):
        grown = []
        for v in frontier:
            for w in neighbors(v, d):
                if w not in seen:
                    seen.add(w)
                    grown.append(w)
        frontier = grown
    return sorted(seen, key=lambda v: (len(v.word), v.word))


def count_extensions_brute(region: Region, boundary: dict[Cell, TreeVertex], d: int) -> int:
    """
    Count extensions of ``boundary`` to ``region`` by trying every value in
    the intersection of the balls B(h(b), dist(x, b)) at each free cell.
    """
    free = [x for x in region.ordered if x not in boundary]
    candidates = []
    for x in free:
        distances = region.distances_from(x)
        radii = {b: int(distances[region.index[b]]) for b in boundary}
        anchor = min(radii, key=lambda b: (radii[b], b))
        pool = [
            v for v in ball(boundary[anchor], radii[anchor], d)
            if all(tree_distance(v, boundary[b]) <= r for b, r in radii.items())
        ]
        candidates.append(pool)
    total = 0
    edges = region.edges()
    for choice in itertools.product(*candidates):
        values = dict(boundary)
        values.update(zip(free, choice))
        if all(tree_distance(values[x], values[shift(x, k)]) == 1 for x, k in edges):
            total += 1
    return total


def integer_height_step(phi: np.ndarray, numerators: Sequence[int], rng: np.random.Generator) -> None:
    """
    One Glauber step for a periodic integer height function (the d = 2 tree).

    ``phi`` holds heights on the fundamental cell with phi(x + n e_k) =
    phi(x) + p_k; a site whose neighbors share one height w moves to w +- 1.
    """
    m, n = phi.ndim, phi.shape[0]
    u = np.unravel_index(int(rng.integers(n**m)), phi.shape)
    up = bool(rng.integers(2))
    around = set()
    for k in range(m):
        for sign in (1, -1):
            y = list(u)
            y[k] += sign
            offset = 0
            if y[k] == n:
                y[k], offset = 0, numerators[k]
            elif y[k] < 0:
                y[k], offset = n - 1, -numerators[k]
            around.add(int(phi[tuple(y)]) + offset)
    if len(around) == 1:
        w = around.pop()
        phi[u] = w + 1 if up else w - 1


def integer_height_deviation(phi: np.ndarray, numerators: Sequence[int]) -> int:
    """max_x |phi(x) - floor(s . x)| over the fundamental cell."""
    n = phi.shape[0]
    grid = np.indices(phi.shape)
    target = sum(p * grid[k] for k, p in enumerate(numerators)) // n
    return int(np.abs(phi - target).max())
