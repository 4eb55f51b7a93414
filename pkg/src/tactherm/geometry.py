"""Tissue block and parametric tumor base polygons.

Two base-shape families describe increasingly sharp inclusion morphology:
regular n-gons and n-wing stars. Both are generated at a fixed base area so
that the extruded prism volume stays constant while the boundary sharpness
changes with n. All lengths are millimeters, areas mm².
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError, PlacementError
from .textio import write_csv


class ShapeFamily(str, Enum):
    """Base-polygon family of the prismatic inclusion."""

    REGULAR_POLYGON = "polygon"
    STAR_POLYGON = "star"


@dataclass(frozen=True)
class TissueDims:
    """Cuboid tissue block extents (mm)."""

    x_len: float = 120.0
    y_len: float = 60.0
    z_len: float = 25.0

    def __post_init__(self):
        if not (self.x_len > 0 and self.y_len > 0 and self.z_len > 0):
            raise ParameterError("tissue dimensions must be strictly positive")


@dataclass(frozen=True)
class TumorShape:
    """Parametric description of the prismatic inclusion.

    n counts sides (polygon family) or wings (star family). inner_radius is
    only used by the star family. top_depth is the depth of the prism's top
    face below the block's top surface.
    """

    family: ShapeFamily
    n: int
    base_area: float = 400.0  # mm^2
    inner_radius: float = 10.0  # mm (star family)
    top_depth: float = 12.0  # mm
    prism_height: float = 8.0  # mm

    def __post_init__(self):
        if self.n < 3:
            raise ParameterError(f"n must be >= 3, got {self.n}")
        if self.base_area <= 0:
            raise ParameterError("base_area must be positive")
        if self.top_depth <= 0 or self.prism_height <= 0:
            raise ParameterError("top_depth and prism_height must be positive")
        if self.family is ShapeFamily.STAR_POLYGON:
            if self.inner_radius <= 0:
                raise ParameterError("inner_radius must be positive")
            min_area = self.n * self.inner_radius**2 * math.sin(math.pi / self.n)
            if self.base_area < min_area * (1.0 - 1e-12):
                raise ParameterError(
                    f"star base_area {self.base_area} infeasible: outer radius would "
                    f"drop below inner radius (minimum area {min_area:.6g})"
                )

    def base_polygon(self) -> "Polygon2D":
        """Construct the base polygon, centered at the origin."""
        if self.family is ShapeFamily.REGULAR_POLYGON:
            return regular_polygon(self.n, self.base_area)
        return star_polygon(self.n, self.inner_radius, self.base_area)


@dataclass(frozen=True)
class Polygon2D:
    """Simple closed polygon, counter-clockwise vertices (mm)."""

    vertices: np.ndarray  # (N, 2)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ParameterError("polygon needs an (N, 2) vertex array with N >= 3")
        object.__setattr__(self, "vertices", v)
        if shoelace_area(v) <= 0:
            raise ParameterError("polygon vertices must be counter-clockwise")

    @property
    def area(self) -> float:
        return shoelace_area(self.vertices)

    @property
    def max_radius(self) -> float:
        """Largest vertex distance from the origin."""
        return float(np.max(np.hypot(self.vertices[:, 0], self.vertices[:, 1])))

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the vertex set."""
        v = self.vertices
        return (
            float(v[:, 0].min()),
            float(v[:, 1].min()),
            float(v[:, 0].max()),
            float(v[:, 1].max()),
        )


@dataclass(frozen=True)
class GeometrySpec:
    """Placed prism inside the tissue block.

    The base polygon stays centered at the origin; `center` holds the
    footprint center in block coordinates. The prism spans z in
    [z_lo, z_hi], axis vertical.
    """

    dims: TissueDims
    shape: TumorShape
    base_polygon: Polygon2D
    center: tuple[float, float]
    z_lo: float
    z_hi: float

    def refine_window(self, margin: float = 5.0) -> tuple:
        """Axis-aligned box around the prism, expanded by `margin` mm."""
        xmin, ymin, xmax, ymax = self.base_polygon.bounding_box()
        cx, cy = self.center
        return (
            (cx + xmin - margin, cx + xmax + margin),
            (cy + ymin - margin, cy + ymax + margin),
            (self.z_lo - margin, self.z_hi + margin),
        )


def shoelace_area(vertices: np.ndarray) -> float:
    """Signed polygon area; positive for counter-clockwise order."""
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def regular_polygon(n: int, area: float) -> Polygon2D:
    """Regular n-gon of the given area, one vertex on the +y axis.

    The circumradius follows from area = n/2 * Rc^2 * sin(2*pi/n).
    """
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if area <= 0:
        raise ParameterError("area must be positive")
    rc = math.sqrt(2.0 * area / (n * math.sin(2.0 * math.pi / n)))
    ang = math.pi / 2.0 + 2.0 * math.pi * np.arange(n) / n
    verts = np.column_stack([rc * np.cos(ang), rc * np.sin(ang)])
    return Polygon2D(verts)


def star_polygon(n: int, inner_radius: float, area: float) -> Polygon2D:
    """n-wing star of the given area: 2n vertices alternating between the
    outer radius and `inner_radius`, one outer vertex on the +y axis.

    The outer radius follows from area = n * Ro * r * sin(pi/n); a wing is
    the pair of edges meeting at an outer vertex.
    """
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if inner_radius <= 0:
        raise ParameterError("inner_radius must be positive")
    if area <= 0:
        raise ParameterError("area must be positive")
    ro = area / (n * inner_radius * math.sin(math.pi / n))
    if ro < inner_radius * (1.0 - 1e-12):
        raise ParameterError(
            f"area {area} gives outer radius {ro:.6g} below inner radius {inner_radius}"
        )
    ang_out = math.pi / 2.0 + 2.0 * math.pi * np.arange(n) / n
    ang_in = ang_out + math.pi / n
    verts = np.empty((2 * n, 2))
    verts[0::2, 0] = ro * np.cos(ang_out)
    verts[0::2, 1] = ro * np.sin(ang_out)
    verts[1::2, 0] = inner_radius * np.cos(ang_in)
    verts[1::2, 1] = inner_radius * np.sin(ang_in)
    return Polygon2D(verts)


def place_prism(shape: TumorShape, dims: TissueDims) -> GeometrySpec:
    """Center the prism footprint in the block and fix its z-extent.

    The prism hangs below the top surface: z in
    [z_len - top_depth - prism_height, z_len - top_depth].

    Raises PlacementError when the polygon's bounding box reaches the block
    footprint boundary or the prism does not fit within the thickness.
    """
    poly = shape.base_polygon()
    if shape.top_depth + shape.prism_height >= dims.z_len:
        raise PlacementError(
            f"prism z-extent {shape.top_depth + shape.prism_height} mm does not fit "
            f"inside thickness {dims.z_len} mm"
        )
    cx, cy = dims.x_len / 2.0, dims.y_len / 2.0
    xmin, ymin, xmax, ymax = poly.bounding_box()
    if cx + xmin <= 0 or cx + xmax >= dims.x_len or cy + ymin <= 0 or cy + ymax >= dims.y_len:
        raise PlacementError(
            f"base polygon bounding box [{xmin:.3g}, {xmax:.3g}]x[{ymin:.3g}, {ymax:.3g}] "
            f"around center ({cx}, {cy}) exceeds the block footprint "
            f"{dims.x_len}x{dims.y_len}"
        )
    z_hi = dims.z_len - shape.top_depth
    z_lo = z_hi - shape.prism_height
    return GeometrySpec(
        dims=dims, shape=shape, base_polygon=poly, center=(cx, cy), z_lo=z_lo, z_hi=z_hi
    )


# Points within this distance (mm) of an edge count as on the boundary.
BOUNDARY_TOL = 1e-12


def point_in_polygon(p, poly: Polygon2D) -> bool:
    """Even-odd containment test; boundary points count as inside.

    A point within BOUNDARY_TOL of an edge is classified as boundary. For
    strictly interior/exterior points this is the standard crossing-number
    rule with half-open edges.
    """
    px, py = float(p[0]), float(p[1])
    v = poly.vertices
    x1, y1 = v[:, 0], v[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)

    # Boundary check: distance from p to each edge segment.
    ex, ey = x2 - x1, y2 - y1
    seg2 = ex * ex + ey * ey
    t = np.clip(((px - x1) * ex + (py - y1) * ey) / seg2, 0.0, 1.0)
    dx, dy = px - (x1 + t * ex), py - (y1 + t * ey)
    if np.min(dx * dx + dy * dy) <= BOUNDARY_TOL**2:
        return True

    crossing = (y1 > py) != (y2 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_hit = x1 + (py - y1) * ex / ey
    inside = np.count_nonzero(crossing & (px < x_hit)) % 2 == 1
    return bool(inside)


def points_in_polygon(points: np.ndarray, poly: Polygon2D) -> np.ndarray:
    """Vectorized crossing-number test for an (N, 2) point array.

    No boundary tolerance: ties follow the half-open edge rule. Intended for
    bulk centroid classification where boundary hits have measure zero.
    """
    pts = np.asarray(points, dtype=float)
    v = poly.vertices
    x1, y1 = v[:, 0], v[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    px = pts[:, 0][:, None]
    py = pts[:, 1][:, None]
    crossing = (y1[None, :] > py) != (y2[None, :] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_hit = x1[None, :] + (py - y1[None, :]) * (x2 - x1)[None, :] / (y2 - y1)[None, :]
    hits = crossing & (px < x_hit)
    return (np.count_nonzero(hits, axis=1) % 2).astype(bool)


def clip_polygon_to_rect(vertices: np.ndarray, x0, x1, y0, y1) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon against an axis-aligned rectangle.

    Returns the clipped vertex array (possibly empty). The subject polygon may
    be non-convex; the output is suitable for area computation.
    """
    poly = [(float(x), float(y)) for x, y in vertices]

    def clip_half(pts, inside, intersect):
        out = []
        if not pts:
            return out
        prev = pts[-1]
        prev_in = inside(prev)
        for cur in pts:
            cur_in = inside(cur)
            if cur_in:
                if not prev_in:
                    out.append(intersect(prev, cur))
                out.append(cur)
            elif prev_in:
                out.append(intersect(prev, cur))
            prev, prev_in = cur, cur_in
        return out

    def x_cut(level):
        def intersect(a, b):
            t = (level - a[0]) / (b[0] - a[0])
            return (level, a[1] + t * (b[1] - a[1]))

        return intersect

    def y_cut(level):
        def intersect(a, b):
            t = (level - a[1]) / (b[1] - a[1])
            return (a[0] + t * (b[0] - a[0]), level)

        return intersect

    poly = clip_half(poly, lambda p: p[0] >= x0, x_cut(x0))
    poly = clip_half(poly, lambda p: p[0] <= x1, x_cut(x1))
    poly = clip_half(poly, lambda p: p[1] >= y0, y_cut(y0))
    poly = clip_half(poly, lambda p: p[1] <= y1, y_cut(y1))
    if len(poly) < 3:
        return np.empty((0, 2))
    return np.array(poly)


def clipped_area(poly: Polygon2D, x0, x1, y0, y1) -> float:
    """Area of polygon ∩ rectangle (mm²)."""
    clipped = clip_polygon_to_rect(poly.vertices, x0, x1, y0, y1)
    if clipped.shape[0] < 3:
        return 0.0
    return abs(shoelace_area(clipped))


def write_polygon_csv(poly: Polygon2D, path) -> None:
    """Write the vertex list as CSV (x_mm, y_mm)."""
    write_csv(path, ["x_mm", "y_mm"], poly.vertices)
