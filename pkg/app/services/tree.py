"""
Tree Service - Word arithmetic on the d-regular tree.

The tree is the Cayley graph of G = <a_1, ..., a_d | a_i^2 = e>. Vertices
are reduced words (no two equal consecutive letters), the root r is the empty
word, and an edge labeled i joins v and v*a_i. Ends are eventually periodic
rays from r, geodesics are pairs of ends whose rays leave r through different
letters, and depth is the horodistance from the backward end of a geodesic.
"""
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from math import lcm

from app.core.errors import EqualEnds, ValidationFailure

Word = tuple[int, ...]


def reduce_word(letters: Iterable[int]) -> Word:
    """Freely reduce a letter sequence using a_i * a_i = e."""
    stack: list[int] = []
    for letter in letters:
        if stack and stack[-1] == letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i] != word[i + 1] for i in range(len(word) - 1))


def common_prefix_length(a: Sequence[int], b: Sequence[int]) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


@dataclass(frozen=True, slots=True)
class TreeVertex:
    """A vertex of the tree, stored as its reduced word from the root."""

    word: Word = ()

    def __post_init__(self) -> None:
        if any(letter < 1 for letter in self.word):
            raise ValidationFailure(f"generator indices start at 1: {self.word}")
        if not is_reduced(self.word):
            raise ValidationFailure(f"word is not reduced: {self.word}")

    def __len__(self) -> int:
        return len(self.word)

    def __str__(self) -> str:
        return ",".join(str(letter) for letter in self.word) if self.word else "e"

    @classmethod
    def parse(cls, text: str) -> "TreeVertex":
        """Parse the text form: comma-separated indices, ``e`` for the root."""
        text = text.strip()
        if text in ("e", ""):
            return cls()
        try:
            return cls(tuple(int(part) for part in text.split(",")))
        except ValueError:
            raise ValidationFailure(f"not a tree vertex: {text!r}")


ROOT = TreeVertex()


def validate_vertex(v: TreeVertex, d: int) -> None:
    """Raise if ``v`` uses a generator outside 1..d."""
    if any(letter > d for letter in v.word):
        raise ValidationFailure(f"vertex {v} uses a generator above d={d}")


def apply_generator(v: TreeVertex, i: int) -> TreeVertex:
    """Right multiplication by a_i: cancel a trailing i, otherwise append it."""
    if v.word and v.word[-1] == i:
        return TreeVertex(v.word[:-1])
    return TreeVertex(v.word + (i,))


def neighbors(v: TreeVertex, d: int) -> list[TreeVertex]:
    return [apply_generator(v, i) for i in range(1, d + 1)]


def multiply(v: TreeVertex, w: TreeVertex) -> TreeVertex:
    """Group product v*w."""
    return TreeVertex(reduce_word(v.word + w.word))


def inverse(v: TreeVertex) -> TreeVertex:
    return TreeVertex(v.word[::-1])


def tree_distance(v: TreeVertex, w: TreeVertex) -> int:
    """Graph distance: |v| + |w| - 2 * (common prefix length)."""
    return len(v.word) + len(w.word) - 2 * common_prefix_length(v.word, w.word)


def cyclic_reduction(word: Word) -> tuple[Word, Word]:
    """
    Split a reduced word as c * core * c^-1 with a cyclically reduced core.

    A core of length 1 is a single generator (an involution, no axis); a core
    of length >= 2 has distinct first and last letters and is hyperbolic.

    Returns:
        (c, core)
    """
    k = 0
    while len(word) - 2 * k >= 2 and word[k] == word[len(word) - 1 - k]:
        k += 1
    return word[:k], word[k : len(word) - k]


def cyclic_length(word: Word) -> int:
    """Translation length of the group element ``word``."""
    return len(cyclic_reduction(word)[1])


# =============================================================================
# Ends and geodesics
# =============================================================================


def _minimal_period(period: Word) -> Word:
    p = len(period)
    for q in range(1, p + 1):
        if p % q == 0 and period == period[:q] * (p // q):
            return period[:q]
    return period


@dataclass(frozen=True)
class TreeEnd:
    """
    An eventually periodic ray from the root: prefix followed by period^inf.

    The stored form is normalized (minimal period, shortest prefix), so two
    ends are equal exactly when their rays are.
    """

    prefix: Word = ()
    period: Word = field(default=(1, 2))

    def __post_init__(self) -> None:
        prefix, period = tuple(self.prefix), tuple(self.period)
        if not period:
            raise ValidationFailure("end period must be nonempty")
        if not is_reduced(prefix + period + period):
            raise ValidationFailure(f"ray {prefix}+({period})^inf is not reduced")
        period = _minimal_period(period)
        while prefix and prefix[-1] == period[-1]:
            prefix = prefix[:-1]
            period = period[-1:] + period[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    def letter(self, k: int) -> int:
        """The k-th letter of the ray (0-indexed)."""
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def ray_prefix(self, k: int) -> Word:
        """The first k letters of the ray."""
        return tuple(self.letter(j) for j in range(k))

    def vertex(self, k: int) -> TreeVertex:
        return TreeVertex(self.ray_prefix(k))

    def common_prefix(self, word: Sequence[int]) -> int:
        """Length of the longest common prefix of ``word`` and the ray."""
        k = 0
        for letter in word:
            if letter != self.letter(k):
                break
            k += 1
        return k

    def __str__(self) -> str:
        head = ",".join(map(str, self.prefix))
        tail = ",".join(map(str, self.period))
        return f"{head}({tail})" if head else f"({tail})"


@dataclass(frozen=True)
class Geodesic:
    """A bi-infinite geodesic through the root, g(0) = r."""

    forward: TreeEnd
    backward: TreeEnd

    def __post_init__(self) -> None:
        if self.forward.letter(0) == self.backward.letter(0):
            raise ValidationFailure("geodesic rays must leave the root through different letters")

    def point(self, k: int) -> TreeVertex:
        return self.forward.vertex(k) if k >= 0 else self.backward.vertex(-k)

    def reversed(self) -> "Geodesic":
        return Geodesic(forward=self.backward, backward=self.forward)


STANDARD_GEODESIC = Geodesic(forward=TreeEnd((), (1, 2)), backward=TreeEnd((), (2, 1)))


def geodesic_point(g: Geodesic, k: int) -> TreeVertex:
    return g.point(k)


def project_to_geodesic(v: TreeVertex, g: Geodesic) -> tuple[int, int]:
    """
    Closest point of ``g`` to ``v``.

    Returns:
        (position, dist) with g(position) the projection and dist = d(v, g)
    """
    a = g.forward.common_prefix(v.word)
    if a > 0:
        return a, len(v.word) - a
    b = g.backward.common_prefix(v.word)
    if b > 0:
        return -b, len(v.word) - b
    return 0, len(v.word)


def depth(v: TreeVertex, g: Geodesic) -> int:
    """Horodistance from the backward end: projection position plus distance."""
    position, dist = project_to_geodesic(v, g)
    return position + dist


def busemann_depth(v: TreeVertex, omega: TreeEnd) -> int:
    """lim_k d(v, omega_k) - k, i.e. |v| - 2 * (common prefix with the ray)."""
    return len(v.word) - 2 * omega.common_prefix(v.word)


def meeting_height(e1: TreeEnd, e2: TreeEnd) -> int:
    """
    Length of the common prefix of two distinct ends.

    Raises:
        EqualEnds: If the rays coincide
    """
    if e1 == e2:
        raise EqualEnds(f"ends {e1} and {e2} coincide")
    bound = (
        max(len(e1.prefix), len(e2.prefix))
        + lcm(len(e1.period), len(e2.period))
        + 1
    )
    for k in range(bound):
        if e1.letter(k) != e2.letter(k):
            return k
    raise EqualEnds(f"ends {e1} and {e2} coincide")


def down_generator(v: TreeVertex, g: Geodesic) -> int:
    """The unique generator i with depth(v * a_i) = depth(v) - 1."""
    position, dist = project_to_geodesic(v, g)
    if dist > 0:
        return v.word[-1]
    if position > 0:
        return g.forward.letter(position - 1)
    return g.backward.letter(-position)


def toward_end(w: TreeVertex, omega: TreeEnd, t: int) -> TreeVertex:
    """Vertex at distance ``t`` from ``w`` on the ray from ``w`` toward ``omega``."""
    k = omega.common_prefix(w.word)
    climb = len(w.word) - k
    if t <= climb:
        return TreeVertex(w.word[: len(w.word) - t])
    return TreeVertex(omega.ray_prefix(k + t - climb))


def axis_geodesic(core: Word) -> Geodesic:
    """Axis through r of a cyclically reduced hyperbolic word, oriented along it."""
    if len(core) < 2 or core[0] == core[-1]:
        raise ValidationFailure(f"{core} is not a cyclically reduced hyperbolic word")
    return Geodesic(forward=TreeEnd((), core), backward=TreeEnd((), core[::-1]))


def translation(g: Geodesic, p: int) -> TreeVertex:
    """
    Group element moving g(j) to g(j + p) for every j.

    Only geodesics that are axes of a word exist as translation targets; for a
    geodesic with forward period (a, b) this needs an even shift.
    """
    if p == 0:
        return ROOT
    if g.forward.prefix or g.backward.prefix:
        raise ValidationFailure(f"geodesic {g.forward}/{g.backward} is not an axis through r")
    period = g.forward.period
    if g.backward.period != period[::-1] or p % len(period) != 0:
        raise ValidationFailure(f"no translation by {p} along this geodesic")
    forward = p > 0
    word = (period if forward else period[::-1]) * (abs(p) // len(period))
    return TreeVertex(word)
