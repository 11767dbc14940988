"""Triangle meshes of polygonal regions for the finite-element oracle.

The generator is deliberately plain: densify the boundary polygon to the
target edge length, scatter a trimmed hexagonal lattice inside, take the
Delaunay triangulation of the union, keep the triangles whose centroid
lies in the polygon, and relax interior nodes with a few rounds of damped
barycentric smoothing.  Nothing in that pipeline is trusted; the result
is checked afterwards.  Once every boundary segment appears as a mesh
edge, the Delaunay faces split cleanly into inside and outside, so the
checks (interior edges shared by exactly two triangles, boundary edges by
one, triangle areas tiling the polygon area, no degenerate angles) verify
an exact polygonal cover.  Boundary segments the triangulation refuses to
carry are split at their midpoint and the build is retried.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import shapely
from scipy.spatial import Delaunay

from .curves import polygon_area
from .domains import PolygonalCurve
from .errors import MeshError, ParameterError

_CLEARANCE = 0.55  # interior nodes keep this * h away from the boundary
_SPACING = 0.95  # hexagonal lattice pitch in units of h


@dataclass(frozen=True)
class Mesh:
    """A conforming triangulation of a simple polygon.

    points[:n_boundary] trace the boundary loop in order; triangles are
    counterclockwise index triples into points.
    """

    points: np.ndarray
    triangles: np.ndarray
    n_boundary: int
    target_h: float

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle_areas(self) -> np.ndarray:
        a = self.points[self.triangles[:, 0]]
        b = self.points[self.triangles[:, 1]]
        c = self.points[self.triangles[:, 2]]
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                      - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def edge_lengths(self) -> np.ndarray:
        p = self.points
        t = self.triangles
        out = []
        for i, j in ((0, 1), (1, 2), (2, 0)):
            d = p[t[:, i]] - p[t[:, j]]
            out.append(np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2))
        return np.concatenate(out)

    def min_angle_deg(self) -> float:
        p = self.points
        t = self.triangles
        worst = 180.0
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            u = p[t[:, j]] - p[t[:, i]]
            v = p[t[:, k]] - p[t[:, i]]
            nu = np.sqrt(u[:, 0] ** 2 + u[:, 1] ** 2)
            nv = np.sqrt(v[:, 0] ** 2 + v[:, 1] ** 2)
            cosang = np.clip((u * v).sum(axis=1) / (nu * nv), -1.0, 1.0)
            worst = min(worst, float(np.degrees(np.arccos(cosang)).min()))
        return worst

    def quality(self) -> dict:
        areas = self.triangle_areas()
        return {
            "n_points": int(self.n_points),
            "n_triangles": int(self.n_triangles),
            "n_boundary": int(self.n_boundary),
            "target_h": float(self.target_h),
            "area": float(math.fsum(areas.tolist())),
            "min_angle_deg": self.min_angle_deg(),
            "max_edge": float(self.edge_lengths().max()),
            "min_triangle_area": float(areas.min()),
        }

    def to_off(self) -> str:
        lines = ["OFF", f"{self.n_points} {self.n_triangles} 0"]
        for x, y in self.points:
            lines.append(f"{x!r} {y!r} 0.0")
        for a, b, c in self.triangles:
            lines.append(f"3 {a} {b} {c}")
        return "\n".join(lines) + "\n"


def _densify_loop(vertices: np.ndarray, h: float) -> np.ndarray:
    pieces = []
    n = vertices.shape[0]
    for i in range(n):
        a = vertices[i]
        b = vertices[(i + 1) % n]
        seg = math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
        k = max(1, int(math.ceil(seg / h - 1e-12)))
        frac = np.arange(k, dtype=float)[:, None] / k
        pieces.append(a[None, :] * (1.0 - frac) + b[None, :] * frac)
    return np.vstack(pieces)


def _split_segments(loop: np.ndarray, missing: list) -> np.ndarray:
    n = loop.shape[0]
    out = []
    bad = set(missing)
    for i in range(n):
        out.append(loop[i])
        if i in bad:
            out.append(0.5 * (loop[i] + loop[(i + 1) % n]))
    return np.asarray(out)


def _hex_lattice(bounds, s: float) -> np.ndarray:
    minx, miny, maxx, maxy = bounds
    row_h = s * math.sqrt(3.0) / 2.0
    rows = []
    y = miny + 0.5 * row_h
    parity = 0
    while y < maxy:
        x0 = minx + 0.5 * s + (0.5 * s if parity else 0.0)
        xs = np.arange(x0, maxx, s)
        if xs.size:
            rows.append(np.column_stack([xs, np.full(xs.size, y)]))
        y += row_h
        parity ^= 1
    if not rows:
        return np.empty((0, 2))
    return np.vstack(rows)


def _filtered_delaunay(points: np.ndarray, poly) -> np.ndarray:
    tri = Delaunay(points)
    simplices = tri.simplices
    cen = points[simplices].mean(axis=1)
    keep = shapely.contains_xy(poly, cen[:, 0], cen[:, 1])
    return simplices[keep]


def _smooth_interior(points: np.ndarray, simplices: np.ndarray, n_boundary: int,
                     inner) -> np.ndarray:
    n = points.shape[0]
    acc = np.zeros((n, 2))
    deg = np.zeros(n)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        a = simplices[:, i]
        b = simplices[:, j]
        np.add.at(acc, a, points[b])
        np.add.at(acc, b, points[a])
        np.add.at(deg, a, 1.0)
        np.add.at(deg, b, 1.0)
    moved = points.copy()
    idx = np.arange(n_boundary, n)
    idx = idx[deg[idx] > 0]
    target = acc[idx] / deg[idx, None]
    proposal = 0.5 * points[idx] + 0.5 * target
    # clearance band is sacred: reject moves that leave the shrunk polygon
    ok = shapely.contains_xy(inner, proposal[:, 0], proposal[:, 1])
    moved[idx[ok]] = proposal[ok]
    return moved


def _orient_ccw(points: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    a = points[simplices[:, 0]]
    b = points[simplices[:, 1]]
    c = points[simplices[:, 2]]
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    flipped = simplices.copy()
    neg = cross < 0.0
    flipped[neg, 1], flipped[neg, 2] = simplices[neg, 2], simplices[neg, 1]
    return flipped


def _edge_counts(simplices: np.ndarray):
    e = np.vstack([simplices[:, [0, 1]], simplices[:, [1, 2]], simplices[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq, counts


def _build_once(loop: np.ndarray, h: float, smooth_rounds: int):
    n_boundary = loop.shape[0]
    poly = shapely.Polygon(loop)
    if not poly.is_valid:
        raise MeshError("boundary polygon is invalid (self-touching after densification)")
    inner = poly.buffer(-_CLEARANCE * h)
    lattice = _hex_lattice(poly.bounds, _SPACING * h)
    if lattice.size and not inner.is_empty:
        keep = shapely.contains_xy(inner, lattice[:, 0], lattice[:, 1])
        interior = lattice[keep]
    else:
        interior = np.empty((0, 2))
    points = np.vstack([loop, interior])
    simplices = _filtered_delaunay(points, poly)
    for _ in range(smooth_rounds):
        points = _smooth_interior(points, simplices, n_boundary, inner)
        simplices = _filtered_delaunay(points, poly)

    used = np.zeros(points.shape[0], dtype=bool)
    used[:n_boundary] = True
    used[simplices.ravel()] = True
    remap = np.cumsum(used) - 1
    points = points[used]
    simplices = remap[simplices]
    simplices = _orient_ccw(points, simplices)

    uniq, _counts = _edge_counts(simplices)
    edge_set = set(map(tuple, uniq.tolist()))
    missing = []
    for i in range(n_boundary):
        j = (i + 1) % n_boundary
        if (min(i, j), max(i, j)) not in edge_set:
            missing.append(i)
    return Mesh(points=points, triangles=simplices, n_boundary=n_boundary, target_h=h), missing


def _check_mesh(mesh: Mesh, min_angle_deg: float, max_edge_factor: float) -> None:
    areas = mesh.triangle_areas()
    if areas.size == 0:
        raise MeshError("triangulation is empty")
    if float(areas.min()) <= 0.0:
        raise MeshError(f"degenerate triangle (area {areas.min():.3e})")

    uniq, counts = _edge_counts(mesh.triangles)
    if int(counts.max()) > 2:
        raise MeshError("non-manifold edge: more than two triangles share it")
    boundary_edges = set()
    nb = mesh.n_boundary
    for i in range(nb):
        j = (i + 1) % nb
        boundary_edges.add((min(i, j), max(i, j)))
    single = set(map(tuple, uniq[counts == 1].tolist()))
    if single != boundary_edges:
        extra = len(single - boundary_edges)
        absent = len(boundary_edges - single)
        raise MeshError(
            f"mesh boundary disagrees with the polygon: {extra} stray exposed "
            f"edges, {absent} polygon edges not exposed"
        )

    covered = math.fsum(areas.tolist())
    target = polygon_area(mesh.points[:nb])
    if abs(covered - target) > 1e-9 * max(abs(target), 1.0):
        raise MeshError(f"triangles cover {covered!r}, polygon area is {target!r}")

    worst = mesh.min_angle_deg()
    if worst < min_angle_deg:
        raise MeshError(f"minimum triangle angle {worst:.3f} deg is below {min_angle_deg} deg")
    longest = float(mesh.edge_lengths().max())
    if longest > max_edge_factor * mesh.target_h:
        raise MeshError(
            f"edge of length {longest:.4g} exceeds {max_edge_factor} * h = "
            f"{max_edge_factor * mesh.target_h:.4g}"
        )


def triangulate(curve: PolygonalCurve, h: float, *, smooth_rounds: int = 2,
                min_angle_deg: float = 3.0, max_edge_factor: float = 1.7,
                max_retries: int = 3) -> Mesh:
    """Mesh the region bounded by `curve` with target edge length `h`.

    Raises MeshError when a conforming triangulation cannot be produced or
    fails validation.  min_angle_deg is a degeneracy guard, not a quality
    promise; read Mesh.quality() for the achieved numbers.
    """
    if not isinstance(curve, PolygonalCurve):
        raise ParameterError(f"expected a PolygonalCurve, got {type(curve).__name__}")
    if not (isinstance(h, (int, float)) and math.isfinite(h) and h > 0.0):
        raise ParameterError(f"target edge length must be a positive number, got {h!r}")

    loop = _densify_loop(curve.vertices, float(h))
    mesh, missing = _build_once(loop, float(h), smooth_rounds)
    retries = 0
    while missing and retries < max_retries:
        loop = _split_segments(loop, missing)
        mesh, missing = _build_once(loop, float(h), smooth_rounds)
        retries += 1
    if missing:
        raise MeshError(
            f"{len(missing)} boundary segments still absent from the triangulation "
            f"after {max_retries} midpoint refinements; reduce h"
        )
    _check_mesh(mesh, min_angle_deg, max_edge_factor)
    return mesh
