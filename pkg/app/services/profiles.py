"""
Profiles Service - continuum height profiles and the variational problem.

Profiles live on eps-grids: integer index cells of a ``Region`` scaled by eps,
covering a union of eps-blocks. Values are numpy arrays aligned with
``region.ordered``. The solver minimizes the Riemann sum of a surface tension
over forward-difference gradients subject to the l1 Lipschitz cone and the
boundary values.
"""
import itertools
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np
from scipy import optimize, sparse
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import csgraph
from scipy.sparse.linalg import spsolve
from scipy.spatial.distance import cdist

from app.core.config import settings
from app.core.errors import Infeasible, InvalidBoundary, ValidationFailure
from app.services.enumeration import SurfaceTensionTable
from app.services.lattice import Cell, HeightFunction, Region, inner_boundary, shift
from app.services.tree import TreeEnd, meeting_height

logger = logging.getLogger(__name__)

ATOL = 1e-9
BACKTRACK = 0.5


# =============================================================================
# Meeting heights
# =============================================================================


@dataclass
class MeetingHeights:
    """Symmetric k x k matrix of normalized meeting heights."""

    k: int
    a: np.ndarray

    def __post_init__(self) -> None:
        self.a = np.asarray(self.a, dtype=float)
        if self.k < 1 or self.a.shape != (self.k, self.k):
            raise ValidationFailure(f"meeting heights must be a {self.k}x{self.k} matrix")

    @classmethod
    def single(cls) -> "MeetingHeights":
        return cls(k=1, a=np.zeros((1, 1)))

    def __call__(self, i: int, j: int) -> float:
        """a_ij for 1-based labels."""
        return float(self.a[i - 1, j - 1])


def validate_meeting_heights(heights: MeetingHeights, atol: float = ATOL) -> bool:
    """Symmetry, zero diagonal, non-negativity and the ultrametric implication."""
    a = heights.a
    if not np.allclose(a, a.T, atol=atol) or np.any(np.abs(np.diag(a)) > atol) or np.any(a < -atol):
        return False
    for i, j, k in itertools.permutations(range(heights.k), 3):
        if a[i, j] < a[i, k] - atol and abs(a[j, k] - a[i, k]) > atol:
            return False
    return True


# =============================================================================
# Grids
# =============================================================================


@dataclass(frozen=True)
class ProfileGrid:
    """
    Grid points c * eps for the index cells of ``region``.

    ``blocks`` holds the lower corners of the eps-blocks making up R; only
    those carry a forward-difference gradient.
    """

    eps: float
    region: Region
    block_cells: frozenset[Cell]

    @classmethod
    def unit_box(cls, m: int, eps: float) -> "ProfileGrid":
        steps = round(1 / eps)
        if steps < 1 or abs(steps * eps - 1) > ATOL:
            raise ValidationFailure(f"eps={eps} does not divide the unit interval")
        blocks = itertools.product(range(steps), repeat=m)
        return cls.from_blocks(m, 1 / steps, blocks)

    @classmethod
    def from_blocks(cls, m: int, eps: float, blocks: Iterable[Sequence[int]]) -> "ProfileGrid":
        block_cells = frozenset(tuple(int(c) for c in b) for b in blocks)
        if not block_cells:
            raise ValidationFailure("a profile grid needs at least one block")
        points = {
            tuple(c + o for c, o in zip(b, corner))
            for b in block_cells
            for corner in itertools.product((0, 1), repeat=m)
        }
        return cls(eps=eps, region=Region(m=m, cells=frozenset(points)), block_cells=block_cells)

    @classmethod
    def from_points(cls, m: int, eps: float, points: Sequence[Cell]) -> "ProfileGrid":
        """Grid whose blocks are the cells with every corner among ``points``."""
        present = set(points)
        blocks = [
            c
            for c in present
            if all(tuple(x + o for x, o in zip(c, corner)) in present for corner in itertools.product((0, 1), repeat=m))
        ]
        return cls.from_blocks(m, eps, blocks)

    @property
    def m(self) -> int:
        return self.region.m

    def __len__(self) -> int:
        return len(self.region)

    @cached_property
    def points(self) -> np.ndarray:
        return np.array(self.region.ordered, dtype=float) * self.eps

    @cached_property
    def boundary(self) -> np.ndarray:
        """Indices of boundary grid points, in region order."""
        edge = inner_boundary(self.region)
        return np.array([i for i, x in enumerate(self.region.ordered) if x in edge], dtype=int)

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.ones(len(self), dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    @cached_property
    def blocks(self) -> np.ndarray:
        index = self.region.index
        return np.array(sorted(index[b] for b in self.block_cells), dtype=int)

    @cached_property
    def forward(self) -> np.ndarray:
        """forward[k, i]: index of cell i + e_k, or -1."""
        index = self.region.index
        out = np.full((self.m, len(self)), -1, dtype=int)
        for i, x in enumerate(self.region.ordered):
            for k in range(self.m):
                out[k, i] = index.get(shift(x, k), -1)
        return out

    @cached_property
    def block_edges(self) -> np.ndarray:
        """(tail, head) index pairs of the forward edges leaving block corners."""
        pairs = [(i, int(self.forward[k, i])) for i in self.blocks for k in range(self.m)]
        return np.array(pairs, dtype=int).reshape(-1, 2)

    @cached_property
    def grid_edges(self) -> np.ndarray:
        pairs = [
            (i, int(j))
            for k in range(self.m)
            for i, j in enumerate(self.forward[k])
            if j >= 0
        ]
        return np.array(pairs, dtype=int).reshape(-1, 2)

    @property
    def volume(self) -> float:
        return len(self.block_cells) * self.eps**self.m


# =============================================================================
# Profiles
# =============================================================================


@dataclass
class AsymptoticProfile:
    """(h1, h2) on every grid point, with the meeting heights of the labels."""

    grid: ProfileGrid
    h1: np.ndarray
    h2: np.ndarray
    heights: MeetingHeights

    def __post_init__(self) -> None:
        self.h1 = np.asarray(self.h1, dtype=float)
        self.h2 = np.asarray(self.h2, dtype=int)
        if self.h1.shape != (len(self.grid),) or self.h2.shape != (len(self.grid),):
            raise ValidationFailure("profile arrays must have one entry per grid point")

    def lipschitz_excess(self) -> float:
        edges = self.grid.grid_edges
        if not len(edges):
            return 0.0
        jumps = np.abs(self.h1[edges[:, 0]] - self.h1[edges[:, 1]])
        return float(max(0.0, (jumps - self.grid.eps).max()))

    def validate(self) -> None:
        """
        Raises:
            ValidationFailure: On negative h1, bad labels, a Lipschitz
                violation or a label switch above the meeting height
        """
        if not validate_meeting_heights(self.heights):
            raise ValidationFailure("meeting heights are not symmetric and ultrametric")
        if np.any(self.h1 < -ATOL):
            raise ValidationFailure("h1 must be non-negative")
        if np.any((self.h2 < 1) | (self.h2 > self.heights.k)):
            raise ValidationFailure(f"labels must lie in 1..{self.heights.k}")
        excess = self.lipschitz_excess()
        if excess > ATOL:
            raise ValidationFailure(f"h1 is not 1-Lipschitz (excess {excess:.3g})")
        if not path_property_check(self):
            raise ValidationFailure("h1 stays above a meeting height between two labels")

    def is_valid(self) -> bool:
        try:
            self.validate()
        except ValidationFailure:
            return False
        return True


@dataclass
class BoundaryProfile:
    """(h1, h2) on the boundary points of a grid, aligned with ``grid.boundary``."""

    grid: ProfileGrid
    h1: np.ndarray
    h2: np.ndarray
    heights: MeetingHeights

    def __post_init__(self) -> None:
        self.h1 = np.asarray(self.h1, dtype=float)
        self.h2 = np.asarray(self.h2, dtype=int)
        size = len(self.grid.boundary)
        if self.h1.shape != (size,) or self.h2.shape != (size,):
            raise ValidationFailure(f"boundary arrays must have {size} entries")

    @classmethod
    def from_function(
        cls,
        grid: ProfileGrid,
        h1: Callable[[np.ndarray], float],
        h2: Callable[[np.ndarray], int] | None = None,
        heights: MeetingHeights | None = None,
    ) -> "BoundaryProfile":
        points = grid.points[grid.boundary]
        values = np.array([h1(x) for x in points], dtype=float)
        labels = np.array([h2(x) if h2 else 1 for x in points], dtype=int)
        return cls(grid=grid, h1=values, h2=labels, heights=heights or MeetingHeights.single())

    @cached_property
    def points(self) -> np.ndarray:
        return self.grid.points[self.grid.boundary]

    def validate(self) -> None:
        """
        Raises:
            InvalidBoundary: On bad labels or meeting heights, or a pair of
                boundary points breaking Lipschitz or extendability
        """
        if not validate_meeting_heights(self.heights):
            raise InvalidBoundary("meeting heights are not symmetric and ultrametric")
        if np.any(self.h1 < -ATOL):
            raise InvalidBoundary("h1 must be non-negative")
        if np.any((self.h2 < 1) | (self.h2 > self.heights.k)):
            raise InvalidBoundary(f"labels must lie in 1..{self.heights.k}")
        dist = cdist(self.points, self.points, "cityblock")
        jump = np.abs(self.h1[:, None] - self.h1[None, :])
        if np.any(jump > dist + ATOL):
            i, j = np.argwhere(jump > dist + ATOL)[0]
            raise InvalidBoundary(f"h1 is not 1-Lipschitz between {self.points[i]} and {self.points[j]}")
        a = self.heights.a[self.h2[:, None] - 1, self.h2[None, :] - 1]
        through = np.abs(self.h1[:, None] - a) + np.abs(a - self.h1[None, :])
        distinct = self.h2[:, None] != self.h2[None, :]
        bad = distinct & (through > dist + ATOL)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise InvalidBoundary(
                f"points {self.points[i]} and {self.points[j]} cannot be joined through "
                f"meeting height {a[i, j]:.3g}"
            )

    def is_valid(self) -> bool:
        try:
            self.validate()
        except InvalidBoundary:
            return False
        return True


def path_property_check(p: AsymptoticProfile) -> bool:
    """
    True iff no connected component of a super-level set {h1 > a_ij} holds
    both labels i and j.
    """
    labels = sorted(set(int(c) for c in np.unique(p.h2)))
    if len(labels) < 2:
        return True
    adjacency = p.grid.region.adjacency
    for i, j in itertools.combinations(labels, 2):
        above = p.h1 > p.heights(i, j) + ATOL
        members = np.flatnonzero(above)
        if not len(members):
            continue
        _, component = csgraph.connected_components(adjacency[members][:, members], directed=False)
        with_i = set(component[p.h2[members] == i])
        with_j = set(component[p.h2[members] == j])
        if with_i & with_j:
            return False
    return True


def _lower_envelope(b: BoundaryProfile) -> tuple[np.ndarray, np.ndarray]:
    dist = cdist(b.grid.points, b.points, "cityblock")
    scores = b.h1[None, :] - dist
    best = np.argmax(scores, axis=1)
    return np.maximum(0.0, scores[np.arange(len(best)), best]), best


def _upper_envelope(b: BoundaryProfile) -> np.ndarray:
    dist = cdist(b.grid.points, b.points, "cityblock")
    return np.min(b.h1[None, :] + dist, axis=1)


def extend_boundary_profile(b: BoundaryProfile) -> AsymptoticProfile:
    """
    g1(y) = max(0, max_x h1(x) - |x - y|_1), g2(y) = h2 at the first maximizer.

    Raises:
        InvalidBoundary: If ``b`` is invalid or the extension fails validation
    """
    b.validate()
    g1, best = _lower_envelope(b)
    g2 = b.h2[best]
    g1[b.grid.boundary] = b.h1
    g2[b.grid.boundary] = b.h2
    profile = AsymptoticProfile(grid=b.grid, h1=g1, h2=g2, heights=b.heights)
    try:
        profile.validate()
    except ValidationFailure as e:
        raise InvalidBoundary(f"boundary extension is not a profile: {e}")
    return profile


# =============================================================================
# Surface tension models
# =============================================================================


class SurfaceTensionModel(Protocol):
    """ent(s) evaluated row-wise on arrays of slopes with trailing axis m."""

    def value(self, s: np.ndarray) -> np.ndarray: ...

    def gradient(self, s: np.ndarray) -> np.ndarray: ...


@dataclass
class QuadraticSurfaceTension:
    """minimum + curvature * |s - minimizer|^2."""

    minimizer: tuple[float, ...]
    curvature: float = 1.0
    minimum: float = 0.0

    def value(self, s: np.ndarray) -> np.ndarray:
        diff = np.asarray(s, dtype=float) - np.asarray(self.minimizer)
        return self.minimum + self.curvature * np.sum(diff**2, axis=-1)

    def gradient(self, s: np.ndarray) -> np.ndarray:
        return 2 * self.curvature * (np.asarray(s, dtype=float) - np.asarray(self.minimizer))


@dataclass
class TabulatedSurfaceTension:
    """
    Piecewise-linear interpolation of one period of a surface tension table
    over |s_k|, extrapolated linearly past the last grid value.
    """

    table: SurfaceTensionTable
    n: int | None = None
    step: float = 1e-6
    _interpolator: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = self.n or max(self.table.n_values)
        rows = {
            tuple(abs(float(c)) for c in s): result.ent
            for (period, s), result in self.table.entries.items()
            if period == n
        }
        axes = [sorted({s[k] for s in rows}) for k in range(self.table.m)]
        if any(len(axis) < 2 for axis in axes):
            raise ValidationFailure(f"period {n} needs at least two slope values per axis")
        values = np.empty(tuple(len(axis) for axis in axes))
        for position in itertools.product(*(range(len(axis)) for axis in axes)):
            key = tuple(axes[k][i] for k, i in enumerate(position))
            if key not in rows or not math.isfinite(rows[key]):
                raise ValidationFailure(f"surface tension table has no finite entry at |s| = {key}")
            values[position] = rows[key]
        self.n = n
        self._interpolator = RegularGridInterpolator(
            tuple(np.array(axis) for axis in axes), values, bounds_error=False, fill_value=None
        )

    def value(self, s: np.ndarray) -> np.ndarray:
        s = np.abs(np.asarray(s, dtype=float))
        flat = self._interpolator(s.reshape(-1, s.shape[-1]))
        return flat.reshape(s.shape[:-1])

    def gradient(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        for k in range(s.shape[-1]):
            bump = np.zeros(s.shape[-1])
            bump[k] = self.step
            out[..., k] = (self.value(s + bump) - self.value(s - bump)) / (2 * self.step)
        return out


# =============================================================================
# Entropy functional
# =============================================================================


def _gradients(grid: ProfileGrid, h1: np.ndarray) -> np.ndarray:
    tails = grid.blocks
    return np.stack([(h1[grid.forward[k, tails]] - h1[tails]) / grid.eps for k in range(grid.m)], axis=-1)


def macroscopic_entropy(p: AsymptoticProfile, ent: SurfaceTensionModel) -> float:
    """Riemann sum of ent(forward-difference gradient) times eps^m."""
    return _objective(p.grid, p.h1, ent)


def _objective(grid: ProfileGrid, h1: np.ndarray, ent: SurfaceTensionModel) -> float:
    return float(np.sum(ent.value(_gradients(grid, h1))) * grid.eps**grid.m)


def _objective_gradient(grid: ProfileGrid, h1: np.ndarray, ent: SurfaceTensionModel) -> np.ndarray:
    weights = ent.gradient(_gradients(grid, h1)) * grid.eps ** (grid.m - 1)
    out = np.zeros(len(grid))
    tails = grid.blocks
    for k in range(grid.m):
        np.add.at(out, grid.forward[k, tails], weights[:, k])
        np.add.at(out, tails, -weights[:, k])
    return out


# =============================================================================
# Solver
# =============================================================================


@dataclass
class VariationalSolution:
    profile: AsymptoticProfile
    objective: float
    history: list[float]
    iterations: int
    admissible: bool


def _harmonic_start(grid: ProfileGrid, boundary_values: np.ndarray) -> np.ndarray:
    """Minimizer of the block-edge Dirichlet energy with the boundary fixed."""
    h = np.zeros(len(grid))
    h[grid.boundary] = boundary_values
    interior = grid.interior
    if not len(interior):
        return h
    edges = grid.block_edges
    size = len(grid)
    weights = sparse.coo_matrix(
        (np.ones(2 * len(edges)), (np.r_[edges[:, 0], edges[:, 1]], np.r_[edges[:, 1], edges[:, 0]])),
        shape=(size, size),
    ).tocsr()
    laplacian = csgraph.laplacian(weights).tocsr()
    lii = laplacian[interior][:, interior]
    rhs = -laplacian[interior][:, grid.boundary] @ h[grid.boundary]
    lii = lii + sparse.identity(len(interior)) * 1e-12
    h[interior] = spsolve(lii.tocsc(), rhs)
    return h


def _lipschitz_clamp(grid: ProfileGrid, h1: np.ndarray, sweeps: int) -> np.ndarray:
    """Lower h1 to its inf-convolution with eps * graph distance."""
    h = h1.copy()
    for _ in range(sweeps):
        before = h.copy()
        for k in range(grid.m):
            tails = np.flatnonzero(grid.forward[k] >= 0)
            heads = grid.forward[k, tails]
            h[tails] = np.minimum(h[tails], h[heads] + grid.eps)
            h[heads] = np.minimum(h[heads], h[tails] + grid.eps)
        if np.array_equal(h, before):
            return h
    raise Infeasible(f"Lipschitz projection did not settle within {sweeps} sweeps")


def _project(
    grid: ProfileGrid,
    h1: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    boundary_values: np.ndarray,
    sweeps: int,
) -> np.ndarray:
    h = np.clip(h1, lower, upper)
    h[grid.boundary] = boundary_values
    h = _lipschitz_clamp(grid, h, sweeps)
    h[grid.boundary] = boundary_values
    return h


def minimize_entropy(
    b: BoundaryProfile,
    ent: SurfaceTensionModel,
    max_iterations: int | None = None,
    tolerance: float | None = None,
    step_scale: float | None = None,
) -> VariationalSolution:
    """
    Projected subgradient descent on the grid values of h1.

    Starts from the better of the harmonic extension and the boundary
    extension, takes steps of size step_scale * eps / sqrt(t) along the
    normalized subgradient, halves a step until the objective does not
    increase and stops once a step gains less than ``tolerance``. Labels are
    those of ``extend_boundary_profile``.

    Raises:
        Infeasible: If the boundary has no valid extension or the projection
            fails
    """
    max_iterations = max_iterations or settings.SOLVER_MAX_ITERATIONS
    tolerance = tolerance if tolerance is not None else settings.SOLVER_TOLERANCE
    step_scale = step_scale or settings.SOLVER_STEP_SCALE
    sweeps = settings.LIPSCHITZ_SWEEPS

    try:
        extension = extend_boundary_profile(b)
    except InvalidBoundary as e:
        raise Infeasible(str(e))
    grid = b.grid
    lower, upper = extension.h1, _upper_envelope(b)
    fixed = grid.boundary

    harmonic = _project(grid, _harmonic_start(grid, b.h1), lower, upper, b.h1, sweeps)
    h = min((harmonic, extension.h1.copy()), key=lambda v: _objective(grid, v, ent))
    f = _objective(grid, h, ent)
    history = [f]

    iterations = 0
    for t in range(1, max_iterations + 1):
        iterations = t
        g = _objective_gradient(grid, h, ent)
        g[fixed] = 0.0
        scale = np.abs(g).max()
        if scale == 0:
            break
        step = step_scale * grid.eps / math.sqrt(t)
        accepted = False
        while step > grid.eps * 1e-10:
            candidate = _project(grid, h - step * g / scale, lower, upper, b.h1, sweeps)
            f_new = _objective(grid, candidate, ent)
            if f_new <= f:
                accepted = True
                break
            step *= BACKTRACK
        if not accepted:
            break
        gain = f - f_new
        h, f = candidate, f_new
        history.append(f)
        if gain < tolerance:
            break
    logger.debug("solver stopped after %d iterations at %.6g", iterations, f)

    profile = AsymptoticProfile(grid=grid, h1=h, h2=extension.h2.copy(), heights=b.heights)
    if profile.lipschitz_excess() > ATOL:
        raise Infeasible("solver output left the Lipschitz cone")
    admissible = path_property_check(profile)
    if not admissible:
        logger.warning("minimizer switches labels above a meeting height")
    return VariationalSolution(
        profile=profile, objective=f, history=history, iterations=iterations, admissible=admissible
    )


def minimize_entropy_reference(b: BoundaryProfile, ent: SurfaceTensionModel) -> VariationalSolution:
    """
    The same grid problem handed to SLSQP with explicit Lipschitz
    constraints, started from the boundary extension.
    """
    try:
        extension = extend_boundary_profile(b)
    except InvalidBoundary as e:
        raise Infeasible(str(e))
    grid = b.grid
    interior = grid.interior
    base = extension.h1.copy()

    def full(x: np.ndarray) -> np.ndarray:
        h = base.copy()
        h[interior] = x
        return h

    edges = grid.grid_edges
    edges = edges[np.isin(edges, interior).any(axis=1)]
    size = len(grid)
    rows = np.arange(len(edges))
    diff = sparse.coo_matrix(
        (np.r_[np.ones(len(edges)), -np.ones(len(edges))], (np.r_[rows, rows], np.r_[edges[:, 0], edges[:, 1]])),
        shape=(len(edges), size),
    ).tocsr()
    jac = diff[:, interior].toarray()
    constraints = [
        {"type": "ineq", "fun": lambda x: grid.eps - diff @ full(x), "jac": lambda x: -jac},
        {"type": "ineq", "fun": lambda x: grid.eps + diff @ full(x), "jac": lambda x: jac},
    ]
    result = optimize.minimize(
        lambda x: _objective(grid, full(x), ent),
        base[interior],
        jac=lambda x: _objective_gradient(grid, full(x), ent)[interior],
        method="SLSQP",
        bounds=[(0, None)] * len(interior),
        constraints=constraints,
        options={"maxiter": 500, "ftol": 1e-12},
    )
    if not result.success:
        logger.warning("SLSQP stopped early: %s", result.message)
    h = full(result.x)
    profile = AsymptoticProfile(grid=grid, h1=h, h2=extension.h2.copy(), heights=b.heights)
    return VariationalSolution(
        profile=profile,
        objective=_objective(grid, h, ent),
        history=[_objective(grid, base, ent), float(result.fun)],
        iterations=int(result.nit),
        admissible=path_property_check(profile),
    )


# =============================================================================
# Discrete comparisons
# =============================================================================


def _lattice_scale(grid: ProfileGrid, n: int) -> int:
    scale = n * grid.eps
    if scale < 1 - ATOL or abs(scale - round(scale)) > ATOL:
        raise ValidationFailure(f"n={n} does not refine the eps={grid.eps} grid")
    return round(scale)


def _refinement(h_n: HeightFunction, grid: ProfileGrid) -> int:
    """The n with R_n = n R, read off the extents of the two regions."""
    lattice = np.array(h_n.region.ordered)
    points = np.array(grid.region.ordered) * grid.eps
    span = float((points.max(axis=0) - points.min(axis=0)).max())
    if span <= 0:
        raise ValidationFailure("a one-point grid fixes no scale")
    n = float((lattice.max(axis=0) - lattice.min(axis=0)).max()) / span
    if n < 1 - ATOL or abs(n - round(n)) > ATOL:
        raise ValidationFailure(f"region of h_n is not an integer multiple of the grid ({n:.3g})")
    return round(n)


def hp_ball_membership(h_n: HeightFunction, p: AsymptoticProfile, delta: float, eps: float) -> bool:
    """
    True iff |d(h_n(x), r)/n - h1(x/n)| <= delta at every lattice point x
    of ``h_n`` with x/n on the eps-grid.

    n is the ratio of the extents of ``h_n``'s region and the profile grid;
    eps must be a multiple of the profile spacing.

    Raises:
        ValidationFailure: If the scales do not line up
    """
    n = _refinement(h_n, p.grid)
    scale = _lattice_scale(p.grid, n)
    stride = eps / p.grid.eps
    if stride < 1 - ATOL or abs(stride - round(stride)) > ATOL:
        raise ValidationFailure(f"eps={eps} is not a multiple of the profile spacing {p.grid.eps}")
    stride = round(stride)
    for i, c in enumerate(p.grid.region.ordered):
        if any(v % stride for v in c):
            continue
        x = tuple(scale * v for v in c)
        if x not in h_n.region:
            continue
        if abs(len(h_n[x].word) / n - p.h1[i]) > delta + ATOL:
            return False
    return True


@dataclass
class ConvergenceRow:
    n: int
    height_sup: float
    ray_sup: float
    meeting_deviation: float


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]

    def to_csv(self) -> str:
        lines = ["n,height_sup,ray_sup,meeting_deviation"]
        lines += [f"{r.n},{r.height_sup:.6g},{r.ray_sup:.6g},{r.meeting_deviation:.6g}" for r in self.rows]
        return "\n".join(lines) + "\n"


def boundary_convergence_check(
    sequence: Sequence[tuple[int, HeightFunction, Sequence[TreeEnd]]],
    b: BoundaryProfile,
) -> ConvergenceReport:
    """
    Per-n distances between discrete boundary data and ``b``.

    For each (n, h_n, ends) reports the sup over boundary grid points of
    |d(h_n(nx), r)/n - h1(x)|, the sup of the normalized distance from
    h_n(nx) to the ray toward ends[h2(x) - 1], and the largest
    |meeting_height(ends_i, ends_j)/n - a_ij|.
    """
    rows = []
    for n, h_n, ends in sequence:
        if len(ends) != b.heights.k:
            raise ValidationFailure(f"need {b.heights.k} ends, got {len(ends)}")
        scale = _lattice_scale(b.grid, n)
        height_sup = ray_sup = 0.0
        for value, label, index in zip(b.h1, b.h2, b.grid.boundary):
            x = tuple(scale * c for c in b.grid.region.ordered[index])
            if x not in h_n.region:
                raise ValidationFailure(f"boundary point {x} is outside the height function's region")
            word = h_n[x].word
            height_sup = max(height_sup, abs(len(word) / n - value))
            ray_sup = max(ray_sup, (len(word) - ends[label - 1].common_prefix(word)) / n)
        meeting = 0.0
        for i, j in itertools.combinations(range(len(ends)), 2):
            meeting = max(meeting, abs(meeting_height(ends[i], ends[j]) / n - b.heights.a[i, j]))
        rows.append(ConvergenceRow(n=n, height_sup=height_sup, ray_sup=ray_sup, meeting_deviation=meeting))
        logger.info("n=%d: height sup %.4g, ray sup %.4g", n, height_sup, ray_sup)
    return ConvergenceReport(rows=rows)
