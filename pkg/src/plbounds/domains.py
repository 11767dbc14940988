"""Planar domain catalog: conformal images of the unit disc, quasidisc
parameter specs, and snowflake polygons built by edge replacement.

A conformal domain is presented by an evaluable map phi : D -> Omega on the
open unit disc together with its complex derivative.  All norm and area
computations downstream only ever evaluate phi' inside D, so the maps here
are safe even when the boundary correspondence is delicate.

Polygonal curves are closed Jordan polylines stored as (n, 2) float arrays,
counterclockwise, without a repeated closing vertex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConstructionError, ParameterError

__all__ = [
    "ConformalDomain",
    "PolygonalCurve",
    "QuasidiscSpec",
    "SnowflakeParams",
    "boundary_polyline",
    "curve_from_csv",
    "curve_to_csv",
    "curve_to_svg",
    "generate_rohde_snowflake",
    "make_epicycloid",
    "make_quasidisc_spec",
    "make_spiral_spec",
    "make_star_spec",
    "make_unit_disc",
    "polyline_self_intersects",
    "unit_square",
    "validate_derivative",
]


@dataclass(frozen=True)
class ConformalDomain:
    """A simply connected planar domain given as phi(D).

    map and derivative accept complex scalars or ndarrays and vectorize over
    arrays.  known_area / known_sup_derivative are analytic metadata used to
    short-circuit quadrature where an exact value exists; they are never
    required.
    """

    map: Callable
    derivative: Callable
    label: str
    known_area: Optional[float] = None
    known_sup_derivative: Optional[float] = None


def make_unit_disc() -> ConformalDomain:
    """The identity map: Omega = D itself."""

    def _id(z):
        return np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)

    def _one(z):
        if np.ndim(z):
            return np.ones_like(np.asarray(z, dtype=complex))
        return 1.0 + 0.0j

    return ConformalDomain(
        map=_id,
        derivative=_one,
        label="disc",
        known_area=math.pi,
        known_sup_derivative=1.0,
    )


def make_epicycloid(n: int) -> ConformalDomain:
    """Epicycloid-type domain phi(z) = z + z^n / n.

    phi is injective on D for every integer n >= 2 (|phi'| > 0 and the
    boundary curve is a simple epicycloid with n-1 cusps).  |phi'(z)| =
    |1 + z^(n-1)| <= 2 with equality approached at the (n-1)-th roots of
    unity, so the sup of the derivative over D is exactly 2.
    """
    if not isinstance(n, (int, np.integer)):
        raise ParameterError(f"epicycloid order must be an integer, got {n!r}")
    if n < 2:
        raise ParameterError(f"epicycloid order must be >= 2, got {n}")
    n = int(n)

    def _map(z, _n=n):
        return z + (z ** _n) / _n

    def _deriv(z, _n=n):
        return 1.0 + z ** (_n - 1)

    return ConformalDomain(
        map=_map,
        derivative=_deriv,
        label=f"epicycloid:{n}",
        known_area=math.pi * (1.0 + 1.0 / n),
        known_sup_derivative=2.0,
    )


@dataclass(frozen=True)
class QuasidiscSpec:
    """Parameters of a K-quasidisc: the quasiconformality coefficient K of a
    reflection across the boundary, the domain area, and a provenance string
    recording how K was obtained."""

    K: float
    area: float
    provenance: str = "direct"


def make_quasidisc_spec(K: float, area: float, provenance: str = "direct") -> QuasidiscSpec:
    if not (K >= 1.0):
        raise ParameterError(f"quasiconformality coefficient must satisfy K >= 1, got {K}")
    if not (area > 0.0):
        raise ParameterError(f"area must be positive, got {area}")
    return QuasidiscSpec(K=float(K), area=float(area), provenance=provenance)


def star_coefficient(beta: float) -> float:
    """Reflection coefficient K = cot^2((1-beta)pi/4) of a beta-star domain.

    beta = 0 is the convex limit (K = 1); K diverges as beta -> 1.
    """
    if not (0.0 <= beta < 1.0):
        raise ParameterError(f"star parameter must lie in [0, 1), got {beta}")
    half = (1.0 - beta) * math.pi / 4.0
    c = math.cos(half) / math.sin(half)
    return c * c


def make_star_spec(beta: float, area: float) -> QuasidiscSpec:
    """Quasidisc spec for a star-shaped domain with cone opening angle
    (1-beta)pi at every boundary point."""
    K = star_coefficient(beta)
    return make_quasidisc_spec(K, area, provenance=f"star(beta={beta:g})")


def make_spiral_spec(beta: float, gamma: float, area: float) -> QuasidiscSpec:
    """Quasidisc spec for a spiral-shaped domain: logarithmic spirals of
    angle gamma, |gamma| < beta*pi/2, with the same coefficient as the
    beta-star."""
    if not (0.0 <= beta < 1.0):
        raise ParameterError(f"spiral parameter must lie in [0, 1), got {beta}")
    if not (abs(gamma) < beta * math.pi / 2.0):
        raise ParameterError(
            f"spiral angle must satisfy |gamma| < beta*pi/2 = {beta * math.pi / 2.0:g}, got {gamma}"
        )
    K = star_coefficient(beta)
    return make_quasidisc_spec(K, area, provenance=f"spiral(beta={beta:g},gamma={gamma:g})")


# ---------------------------------------------------------------------------
# polygonal curves


@dataclass(frozen=True)
class PolygonalCurve:
    """Closed polyline: vertices (n, 2), counterclockwise, no repeated
    closing vertex.  is_simple records the outcome of the pairwise
    self-intersection check run at construction."""

    vertices: np.ndarray
    is_simple: bool

    @classmethod
    def from_vertices(cls, vertices, check_simple: bool = True) -> "PolygonalCurve":
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ParameterError(f"vertices must be an (n, 2) array, got shape {v.shape}")
        if len(v) < 3:
            raise ParameterError(f"a closed polyline needs >= 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("vertices contain non-finite coordinates")
        nxt = np.roll(v, -1, axis=0)
        if np.any(np.all(v == nxt, axis=1)):
            raise ParameterError("consecutive vertices must be distinct")
        v = v.copy()
        # normalize to the documented counterclockwise convention
        if np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]) < 0.0:
            v = v[::-1].copy()
        v.flags.writeable = False
        simple = (not polyline_self_intersects(v)) if check_simple else True
        return cls(vertices=v, is_simple=simple)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def unit_square() -> PolygonalCurve:
    return PolygonalCurve.from_vertices(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], check_simple=False
    )


def polyline_self_intersects(vertices: np.ndarray) -> bool:
    """True when any two non-adjacent closed-polyline edges meet.

    Meeting includes proper crossings, collinear overlap of positive length,
    and non-adjacent edges touching at a point (a pinched curve is not a
    Jordan curve).  Exact zero tests are softened by a relative tolerance
    tied to the coordinate scale.
    """
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    if n < 4:
        return False
    a = v
    b = np.roll(v, -1, axis=0)
    scale = max(np.ptp(v[:, 0]), np.ptp(v[:, 1]), 1e-300)
    tol = 1e-13 * scale * scale

    def cross(o, px, py, qx, qy):
        # cross of (p - o) x (q - o), vectorized over the last axis
        return (px - o[0]) * (qy - o[1]) - (py - o[1]) * (qx - o[0])

    for i in range(n - 2):
        # candidate partners: j in (i+1, n), excluding adjacent i+1 and, for
        # i = 0, the wrap-around neighbor n-1
        j0 = i + 2
        j1 = n if i > 0 else n - 1
        if j0 >= j1:
            continue
        j = np.arange(j0, j1)
        p, q = a[i], b[i]
        r0, r1 = a[j], b[j]
        d = q - p
        d1 = d[0] * (r0[:, 1] - p[1]) - d[1] * (r0[:, 0] - p[0])
        d2 = d[0] * (r1[:, 1] - p[1]) - d[1] * (r1[:, 0] - p[0])
        e = r1 - r0
        d3 = e[:, 0] * (p[1] - r0[:, 1]) - e[:, 1] * (p[0] - r0[:, 0])
        d4 = e[:, 0] * (q[1] - r0[:, 1]) - e[:, 1] * (q[0] - r0[:, 0])
        proper = ((d1 > tol) & (d2 < -tol) | (d1 < -tol) & (d2 > tol)) & (
            (d3 > tol) & (d4 < -tol) | (d3 < -tol) & (d4 > tol)
        )
        if np.any(proper):
            return True
        # degenerate contacts: some orientation test is (numerically) zero
        degen = (
            (np.abs(d1) <= tol) | (np.abs(d2) <= tol) | (np.abs(d3) <= tol) | (np.abs(d4) <= tol)
        )
        if not np.any(degen):
            continue
        for k in np.flatnonzero(degen):
            if _segments_touch(p, q, r0[k], r1[k], tol):
                return True
    return False


def _segments_touch(p, q, r, s, tol) -> bool:
    """Touch test for a degenerate (near-collinear) segment pair."""

    def on_seg(pt, u, w):
        # pt within the bbox of segment (u, w) and collinear with it
        cr = (w[0] - u[0]) * (pt[1] - u[1]) - (w[1] - u[1]) * (pt[0] - u[0])
        if abs(cr) > tol:
            return False
        lo = np.minimum(u, w) - 1e-12
        hi = np.maximum(u, w) + 1e-12
        return bool(np.all(pt >= lo) and np.all(pt <= hi))

    return on_seg(r, p, q) or on_seg(s, p, q) or on_seg(p, r, s) or on_seg(q, r, s)


# ---------------------------------------------------------------------------
# snowflake generation

_CHOICE_KINDS = ("all_flat", "all_tent", "seeded_random", "explicit")


@dataclass(frozen=True)
class SnowflakeParams:
    """Edge-replacement snowflake parameters.

    t in [1/4, 1/2) is the replacement scale, depth >= 1 the stage index
    (stage 1 is the unit square, stage d has 4^d edges).  choices selects
    flat vs tent per edge and replacement round:

      * "all_flat" / "all_tent"
      * "seeded_random:SEED"   independent fair bits from a seeded generator
      * "explicit:BITSTRING"   one bit per replaced edge, consumed in order
                               ('1' = tent); requires (4^depth - 4) / 3 bits
    """

    t: float
    depth: int
    choices: str = "all_tent"

    def __post_init__(self):
        if not (0.25 <= self.t < 0.5):
            raise ParameterError(f"snowflake scale t must lie in [1/4, 1/2), got {self.t}")
        if not isinstance(self.depth, (int, np.integer)) or self.depth < 1:
            raise ParameterError(f"depth must be an integer >= 1, got {self.depth!r}")
        kind = self.choices.split(":", 1)[0]
        if kind not in _CHOICE_KINDS:
            raise ParameterError(
                f"choices must be one of {_CHOICE_KINDS} (with :SEED / :BITS suffix), got {self.choices!r}"
            )


def _choice_stream(params: SnowflakeParams):
    """Yield per-round boolean arrays (True = tent), one entry per edge."""
    kind, _, arg = params.choices.partition(":")
    if kind == "seeded_random":
        try:
            seed = int(arg)
        except ValueError:
            raise ParameterError(f"seeded_random requires an integer seed, got {arg!r}")
        rng = np.random.default_rng(seed)

        def draw(count):
            return rng.integers(0, 2, size=count).astype(bool)

    elif kind == "explicit":
        needed = (4 ** params.depth - 4) // 3
        bits = arg
        if len(bits) != needed or set(bits) - {"0", "1"}:
            raise ParameterError(
                f"explicit choices need exactly {needed} bits of '0'/'1' for depth {params.depth}, "
                f"got {len(bits)} characters"
            )
        state = {"pos": 0}

        def draw(count):
            lo = state["pos"]
            state["pos"] = lo + count
            return np.frombuffer(bits[lo : lo + count].encode(), dtype=np.uint8) == ord("1")

    elif kind == "all_tent":

        def draw(count):
            return np.ones(count, dtype=bool)

    else:  # all_flat

        def draw(count):
            return np.zeros(count, dtype=bool)

    return draw


def generate_rohde_snowflake(params: SnowflakeParams) -> PolygonalCurve:
    """Build the stage-`depth` snowflake polygon by repeated edge replacement.

    Start from the unit square.  Each round replaces every edge E by four
    segments of equal length: either a flat subdivision into quarters, or a
    tent whose middle vertex is pushed to the exterior side so that each of
    the four new segments has length t|E|.  The resulting polygon is checked
    for self-intersection; a failure raises ConstructionError.
    """
    draw = _choice_stream(params)
    t = params.t
    h = math.sqrt(t - 0.25)
    # (xi, eta) offsets of the three inserted vertices in the frame
    # (u, rot(u)) of an edge a -> b, u = b - a, rot(u) pointing to the
    # exterior of a counterclockwise polygon
    flat_xi = np.array([0.25, 0.5, 0.75])
    flat_eta = np.zeros(3)
    tent_xi = np.array([t, 0.5, 1.0 - t])
    tent_eta = np.array([0.0, h, 0.0])

    v = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    for _ in range(params.depth - 1):
        n = len(v)
        tent = draw(n)
        a = v
        u = np.roll(v, -1, axis=0) - v
        rot = np.column_stack([u[:, 1], -u[:, 0]])  # outward normal direction
        xi = np.where(tent[:, None], tent_xi[None, :], flat_xi[None, :])
        eta = np.where(tent[:, None], tent_eta[None, :], flat_eta[None, :])
        mids = a[:, None, :] + xi[:, :, None] * u[:, None, :] + eta[:, :, None] * rot[:, None, :]
        v = np.concatenate([a[:, None, :], mids], axis=1).reshape(-1, 2)

    curve = PolygonalCurve.from_vertices(v, check_simple=True)
    if not curve.is_simple:
        raise ConstructionError(
            f"snowflake(t={t}, depth={params.depth}, choices={params.choices}) self-intersects"
        )
    return curve


# ---------------------------------------------------------------------------
# sampling, validation, serialization


def boundary_polyline(domain: ConformalDomain, m: int,
                      spacing: str = "parameter") -> PolygonalCurve:
    """Sample the boundary phi(e^{i theta}) as a counterclockwise m-gon.

    spacing "parameter" places samples at theta = 2 pi k/m.  spacing
    "chord" equalizes the chord lengths instead, which keeps every edge at
    roughly perimeter/m even where |phi'| collapses (boundary cusps);
    meshing wants that.  m below 16 gives polygons too crude for any
    downstream use, so it is rejected outright.
    """
    if m < 16:
        raise ParameterError(f"boundary sampling needs m >= 16, got {m}")
    if spacing not in ("parameter", "chord"):
        raise ParameterError(f"spacing must be 'parameter' or 'chord', got {spacing!r}")
    if spacing == "parameter":
        theta = 2.0 * math.pi * np.arange(m) / m
    else:
        # oversample, accumulate chord length, invert to equal-length targets
        k = 16 * m
        t_fine = 2.0 * math.pi * np.arange(k + 1) / k
        w_fine = np.asarray(domain.map(np.exp(1j * t_fine)), dtype=complex)
        seg = np.abs(np.diff(w_fine))
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        targets = cum[-1] * np.arange(m) / m
        theta = np.interp(targets, cum, t_fine)
    z = np.exp(1j * theta)
    w = np.asarray(domain.map(z), dtype=complex)
    verts = np.column_stack([w.real, w.imag])
    # skip the O(m^2) simplicity scan for very fine samplings; the catalog
    # maps are injective so the sampled polygon is simple by construction
    return PolygonalCurve.from_vertices(verts, check_simple=(m <= 4096))


def validate_derivative(domain: ConformalDomain, n_samples: int = 128, seed: int = 0,
                        rel_tol: float = 1e-6) -> float:
    """Check domain.derivative against a central difference of domain.map.

    Samples points with |z| <= 0.9, compares (phi(z+h) - phi(z-h)) / (2h)
    for real h to the declared derivative, and returns the worst relative
    error.  Raises ParameterError when the declared derivative is wrong.
    """
    rng = np.random.default_rng(seed)
    r = 0.9 * np.sqrt(rng.uniform(0.0, 1.0, n_samples))
    th = rng.uniform(0.0, 2.0 * math.pi, n_samples)
    z = r * np.exp(1j * th)
    h = 1e-6
    fd = (np.asarray(domain.map(z + h)) - np.asarray(domain.map(z - h))) / (2.0 * h)
    de = np.asarray(domain.derivative(z))
    denom = np.maximum(np.abs(de), 1e-12)
    worst = float(np.max(np.abs(fd - de) / denom))
    if worst > rel_tol:
        raise ParameterError(
            f"declared derivative of {domain.label} disagrees with finite differences "
            f"(relative error {worst:.3e})"
        )
    return worst


def curve_to_csv(curve: PolygonalCurve, path) -> None:
    v = curve.vertices
    with open(path, "w") as f:
        f.write("x,y\n")
        for x, y in v:
            f.write(f"{float(x)!r},{float(y)!r}\n")


def curve_from_csv(path, check_simple: bool = True) -> PolygonalCurve:
    rows = []
    with open(path) as f:
        header = f.readline()
        if header.strip().lower() not in ("x,y", '"x","y"'):
            raise ParameterError(f"curve CSV must start with an 'x,y' header, got {header!r}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            sx, sy = line.split(",")
            rows.append((float(sx), float(sy)))
    return PolygonalCurve.from_vertices(np.array(rows), check_simple=check_simple)


def curve_to_svg(curve: PolygonalCurve, path, size: int = 640, stroke: str = "#1f4e79") -> None:
    """Write the curve as a standalone SVG path (y axis flipped to match
    mathematical orientation)."""
    v = curve.vertices
    x0, y0 = v.min(axis=0)
    x1, y1 = v.max(axis=0)
    w, h = x1 - x0, y1 - y0
    pad = 0.05 * max(w, h)
    x0, y0, w, h = x0 - pad, y0 - pad, w + 2 * pad, h + 2 * pad
    flip = 2 * y0 + h  # y -> flip - y maps [y0, y0+h] onto itself reversed
    pts = " L ".join(f"{x:.8g} {flip - y:.8g}" for x, y in v)
    stroke_w = max(w, h) / 400.0
    with open(path, "w") as f:
        f.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="{x0:.8g} {y0:.8g} {w:.8g} {h:.8g}">\n'
            f'  <path d="M {pts} Z" fill="none" stroke="{stroke}" stroke-width="{stroke_w:.8g}"/>\n'
            "</svg>\n"
        )
