"""
Serialization Service - text formats for configurations, heights and profiles.

All formats are line based, start with a ``<KIND> v1`` header and are written
deterministically so that equal inputs give byte-identical files.

- ``TREEHOM v1``: periodic configurations (labels in row-major order).
- ``HEIGHT v1``: height functions on finite regions, ``x1 ... xm word``.
- ``PARTIAL v1``: support data for extension, with the enclosing ``box=``.
- ``PROFILE v1``: continuum profiles, ``x1 ... xm h1 h2`` per grid point.
- PGM ``P2`` rasters of a depth field.
"""
import itertools
import logging
import math
from collections.abc import Iterator
from pathlib import Path

import numpy as np
from PIL import Image

from app.core.errors import ConfigFormatError, ValidationFailure
from app.services.kirszbraun import PartialHeight
from app.services.lattice import HeightFunction, PeriodicConfig, Region, Slope, slope_of
from app.services.profiles import AsymptoticProfile, BoundaryProfile, MeetingHeights, ProfileGrid
from app.services.tree import Geodesic, TreeVertex, depth

logger = logging.getLogger(__name__)


def _lines(text: str) -> Iterator[str]:
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            yield line


def _header(lines: Iterator[str], kind: str) -> None:
    first = next(lines, None)
    if first != f"{kind} v1":
        raise ConfigFormatError(f"expected a '{kind} v1' header, got {first!r}")


def _fields(line: str | None, *names: str) -> dict[str, str]:
    if line is None:
        raise ConfigFormatError(f"missing {' '.join(names)} line")
    found = {}
    for part in line.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise ConfigFormatError(f"expected key=value, got {part!r}")
        found[key] = value
    missing = [n for n in names if n not in found]
    if missing:
        raise ConfigFormatError(f"line {line!r} is missing {', '.join(missing)}")
    return found


def _int(value: str, name: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigFormatError(f"{name} must be an integer, got {value!r}")


def _vertex(text: str) -> TreeVertex:
    try:
        return TreeVertex.parse(text)
    except ValidationFailure as e:
        raise ConfigFormatError(str(e))


# =============================================================================
# TREEHOM v1
# =============================================================================


def dump_config(cfg: PeriodicConfig) -> str:
    slope = slope_of(cfg) if cfg.is_valid() else Slope((0,) * cfg.m, cfg.n)
    lines = [
        "TREEHOM v1",
        f"m={cfg.m} n={cfg.n} d={cfg.d}",
        f"slope={slope}",
        f"anchor={cfg.anchor}",
    ]
    for k in range(cfg.m):
        lines.append(f"labels k={k + 1}:")
        lines.append(" ".join(str(int(c)) for c in cfg.labels[k].ravel()))
    return "\n".join(lines) + "\n"


def load_config(text: str) -> PeriodicConfig:
    """
    Parse a TREEHOM v1 file.

    The structure is checked here; plaquette consistency is left to
    ``PeriodicConfig.validate``. For a consistent configuration the slope line
    must match the measured slope.

    Raises:
        ConfigFormatError: On any malformed line
    """
    lines = _lines(text)
    _header(lines, "TREEHOM")
    sizes = _fields(next(lines, None), "m", "n", "d")
    m, n, d = (_int(sizes[key], key) for key in ("m", "n", "d"))
    slope_text = _fields(next(lines, None), "slope")["slope"]
    anchor = _vertex(_fields(next(lines, None), "anchor")["anchor"])
    if m < 1 or n < 2:
        raise ConfigFormatError(f"bad sizes m={m} n={n}")

    labels = np.empty((m,) + (n,) * m, dtype=np.int8)
    for k in range(m):
        if next(lines, None) != f"labels k={k + 1}:":
            raise ConfigFormatError(f"expected 'labels k={k + 1}:'")
        values: list[int] = []
        while len(values) < n**m:
            line = next(lines, None)
            if line is None:
                raise ConfigFormatError(f"labels k={k + 1} has fewer than {n**m} entries")
            values += [_int(v, "label") for v in line.split()]
        if len(values) != n**m:
            raise ConfigFormatError(f"labels k={k + 1} has {len(values)} entries, expected {n**m}")
        labels[k] = np.array(values, dtype=np.int8).reshape((n,) * m)
    if next(lines, None) is not None:
        raise ConfigFormatError("trailing data after the last label block")

    try:
        cfg = PeriodicConfig(m=m, n=n, d=d, labels=labels, anchor=anchor)
        declared = Slope.parse(slope_text, n, m)
    except ValidationFailure as e:
        raise ConfigFormatError(str(e))
    if cfg.is_valid() and slope_of(cfg) != declared.canonical():
        raise ConfigFormatError(f"declared slope {declared} differs from measured {slope_of(cfg)}")
    return cfg


# =============================================================================
# HEIGHT v1 / PARTIAL v1
# =============================================================================


def dump_height(h: HeightFunction, d: int) -> str:
    lines = ["HEIGHT v1", f"m={h.region.m} d={d}"]
    lines += [" ".join(map(str, x)) + f" {h[x]}" for x in h.region.ordered]
    return "\n".join(lines) + "\n"


def _points(lines: Iterator[str], m: int) -> list[tuple[tuple[int, ...], TreeVertex]]:
    pairs = []
    for line in lines:
        parts = line.split()
        if len(parts) != m + 1:
            raise ConfigFormatError(f"expected {m} coordinates and a word, got {line!r}")
        pairs.append((tuple(_int(c, "coordinate") for c in parts[:m]), _vertex(parts[m])))
    return pairs


def load_height(text: str) -> tuple[HeightFunction, int]:
    """
    Returns:
        The height function and the tree degree from the header
    """
    lines = _lines(text)
    _header(lines, "HEIGHT")
    sizes = _fields(next(lines, None), "m", "d")
    m, d = _int(sizes["m"], "m"), _int(sizes["d"], "d")
    pairs = _points(lines, m)
    if not pairs:
        raise ConfigFormatError("height file has no cells")
    values = dict(pairs)
    if len(values) != len(pairs):
        raise ConfigFormatError("height file lists a cell twice")
    return HeightFunction(region=Region.from_cells(values), values=values), d


def dump_partial(p: PartialHeight, d: int) -> str:
    lows = [min(x[k] for x in p.region.cells) for k in range(p.region.m)]
    highs = [max(x[k] for x in p.region.cells) for k in range(p.region.m)]
    if any(lo != 0 for lo in lows) or len(p.region) != math.prod(h + 1 for h in highs):
        raise ValidationFailure("PARTIAL v1 stores supports inside boxes anchored at the origin")
    lines = [
        "PARTIAL v1",
        f"m={p.region.m} d={d}",
        "box=" + ",".join(str(h + 1) for h in highs),
    ]
    lines += [" ".join(map(str, x)) + f" {p.values[x]}" for x in p.support]
    return "\n".join(lines) + "\n"


def load_partial(text: str) -> tuple[PartialHeight, int]:
    lines = _lines(text)
    _header(lines, "PARTIAL")
    sizes = _fields(next(lines, None), "m", "d")
    m, d = _int(sizes["m"], "m"), _int(sizes["d"], "d")
    box = [_int(v, "box") for v in _fields(next(lines, None), "box")["box"].split(",")]
    if len(box) != m or any(b < 1 for b in box):
        raise ConfigFormatError(f"box needs {m} positive sizes")
    try:
        return PartialHeight.from_pairs(Region.box(box), _points(lines, m)), d
    except ValidationFailure as e:
        raise ConfigFormatError(str(e))


# =============================================================================
# PROFILE v1
# =============================================================================


def dump_profile(p: AsymptoticProfile | BoundaryProfile) -> str:
    grid = p.grid
    indices = grid.boundary if isinstance(p, BoundaryProfile) else np.arange(len(grid))
    lines = [
        "PROFILE v1",
        f"k={p.heights.k}",
        "a=" + ",".join(f"{v:.12g}" for v in p.heights.a.ravel()),
        f"eps={grid.eps:.12g}",
    ]
    for i, h1, h2 in zip(indices, p.h1, p.h2):
        coords = " ".join(f"{v:.12g}" for v in grid.points[i])
        lines.append(f"{coords} {h1:.12g} {int(h2)}")
    return "\n".join(lines) + "\n"


def load_profile(text: str) -> AsymptoticProfile | BoundaryProfile:
    """
    Parse a PROFILE v1 file.

    Points filling every grid point of their blocks give a full profile;
    points that are exactly the boundary of their bounding box give a
    boundary profile on that box.
    """
    lines = _lines(text)
    _header(lines, "PROFILE")
    k = _int(_fields(next(lines, None), "k")["k"], "k")
    try:
        a = np.array([float(v) for v in _fields(next(lines, None), "a")["a"].split(",")])
        eps = float(_fields(next(lines, None), "eps")["eps"])
    except ValueError as e:
        raise ConfigFormatError(f"bad number in profile header: {e}")
    if k < 1 or a.size != k * k or not eps > 0:
        raise ConfigFormatError("profile header needs k >= 1, k*k meeting heights and eps > 0")
    heights = MeetingHeights(k=k, a=a.reshape(k, k))

    rows: dict[tuple[int, ...], tuple[float, int]] = {}
    m = None
    for line in lines:
        parts = line.split()
        m = m or len(parts) - 2
        if m < 1 or len(parts) != m + 2:
            raise ConfigFormatError(f"expected {m} coordinates, h1 and h2, got {line!r}")
        try:
            coords = [float(v) / eps for v in parts[:m]]
            h1, h2 = float(parts[m]), int(parts[m + 1])
        except ValueError:
            raise ConfigFormatError(f"bad profile line {line!r}")
        cell = tuple(round(c) for c in coords)
        if any(abs(c - r) > 1e-6 for c, r in zip(coords, cell)):
            raise ConfigFormatError(f"point {parts[:m]} is not on the eps={eps} grid")
        rows[cell] = (h1, h2)
    if m is None:
        raise ConfigFormatError("profile has no grid lines")

    lows = [min(c[j] for c in rows) for j in range(m)]
    highs = [max(c[j] for c in rows) for j in range(m)]
    box = ProfileGrid.from_blocks(m, eps, itertools.product(*(range(lo, hi) for lo, hi in zip(lows, highs))))
    box_boundary = {box.region.ordered[i] for i in box.boundary}
    try:
        if set(rows) == box_boundary and len(box.interior):
            cells = [box.region.ordered[i] for i in box.boundary]
            return BoundaryProfile(
                grid=box,
                h1=np.array([rows[c][0] for c in cells]),
                h2=np.array([rows[c][1] for c in cells]),
                heights=heights,
            )
        grid = ProfileGrid.from_points(m, eps, list(rows))
        if set(grid.region.cells) != set(rows):
            raise ConfigFormatError("profile points are neither a boundary nor a union of blocks")
        cells = grid.region.ordered
        return AsymptoticProfile(
            grid=grid,
            h1=np.array([rows[c][0] for c in cells]),
            h2=np.array([rows[c][1] for c in cells]),
            heights=heights,
        )
    except ConfigFormatError:
        raise
    except ValidationFailure as e:
        raise ConfigFormatError(str(e))


# =============================================================================
# Rasters
# =============================================================================


def depth_raster(h: HeightFunction, g: Geodesic) -> tuple[np.ndarray, float, float]:
    """
    Depths of a 2-dimensional height function rescaled to 0..255.

    Row i, column j holds the cell (lo1 + i, lo2 + j); cells outside the
    region are 0. The midpoint of the depth range maps to 128.

    Returns:
        (pixels, mid, scale) with pixel = 128 + scale * (depth - mid)
    """
    if h.region.m != 2:
        raise ValidationFailure("depth rasters need a 2-dimensional region")
    depths = {x: depth(h[x], g) for x in h.region.ordered}
    lo, hi = min(depths.values()), max(depths.values())
    mid = (lo + hi) / 2
    scale = 127 / max(1.0, (hi - lo) / 2)
    rows = [min(x[0] for x in depths), max(x[0] for x in depths)]
    cols = [min(x[1] for x in depths), max(x[1] for x in depths)]
    pixels = np.zeros((rows[1] - rows[0] + 1, cols[1] - cols[0] + 1), dtype=np.uint8)
    for (i, j), value in depths.items():
        pixels[i - rows[0], j - cols[0]] = int(np.clip(round(128 + scale * (value - mid)), 0, 255))
    return pixels, mid, scale


def encode_pgm(pixels: np.ndarray, mid: float, scale: float) -> str:
    height, width = pixels.shape
    lines = [
        "P2",
        f"# depth = {mid:g} + (value - 128) / {scale:.12g}",
        f"{width} {height}",
        "255",
    ]
    lines += [" ".join(str(int(v)) for v in row) for row in pixels]
    return "\n".join(lines) + "\n"


def write_png(pixels: np.ndarray, path: Path) -> None:
    Image.fromarray(pixels).save(path, format="PNG")
    logger.debug("wrote %dx%d PNG to %s", pixels.shape[1], pixels.shape[0], path)
