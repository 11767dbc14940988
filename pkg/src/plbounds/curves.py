"""Geometric constants of closed polylines: bounded-turning and Ahlfors
three-point constants, plus area and diameter.

Both constants are computed over vertex pairs.  For a pair (v_i, v_j) the
curve splits into two subarcs; the relevant one is the subarc of smaller
diameter.  The bounded-turning constant maximizes

    min(diam(forward arc), diam(backward arc)) / |v_i - v_j|,

the Ahlfors constant maximizes  |anchor - z| / |v_i - v_j|  over points z of
the smaller-diameter subarc and both anchors v_i, v_j.  Diameters of a
polyline subarc are attained at vertices, so vertex-level computation is
exact for polygons; for sampled smooth curves it approximates the continuous
constant from below.

The main implementations run in O(n^2) time and memory via running-maximum
recurrences; `*_naive` are deliberately simple O(n^3) triple loops used as
oracles in the test suite.  Both paths evaluate distances with the same
float expression so their results agree exactly, not just approximately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .domains import PolygonalCurve
from .errors import ParameterError

__all__ = [
    "CurveMetrics",
    "ahlfors_constant",
    "ahlfors_constant_naive",
    "bounded_turning_constant",
    "bounded_turning_constant_naive",
    "curve_metrics",
    "polygon_area",
    "polygon_diameter",
]


def _require_simple(curve: PolygonalCurve) -> np.ndarray:
    if not isinstance(curve, PolygonalCurve):
        raise ParameterError(f"expected a PolygonalCurve, got {type(curve).__name__}")
    if not curve.is_simple:
        raise ParameterError("curve constants are defined for simple (Jordan) polylines only")
    return curve.vertices


def polygon_area(curve: PolygonalCurve) -> float:
    """Signed shoelace area; positive for counterclockwise orientation."""
    v = curve.vertices if isinstance(curve, PolygonalCurve) else np.asarray(curve, float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * math.fsum((x * yn - xn * y).tolist())


def polygon_diameter(curve: PolygonalCurve) -> float:
    v = curve.vertices if isinstance(curve, PolygonalCurve) else np.asarray(curve, float)
    best = 0.0
    # chunked pairwise scan keeps memory flat for large vertex counts
    step = 2048
    for lo in range(0, len(v), step):
        blk = v[lo : lo + step]
        dx = blk[:, None, 0] - v[None, :, 0]
        dy = blk[:, None, 1] - v[None, :, 1]
        best = max(best, float(np.max(np.sqrt(dx * dx + dy * dy))))
    return best


def _lag_tables(v: np.ndarray):
    """Distance, anchored-max and window-diameter tables indexed [i, L].

    R[i, L]  = |v_i - v_{i+L}|                       (indices mod n)
    Ff[i, L] = max_{1<=m<=L} |v_i - v_{i+m}|          forward anchored max
    Fb[i, L] = max_{1<=m<=L} |v_i - v_{i-m}|          backward anchored max
    D[i, L]  = diam {v_i, ..., v_{i+L}}
    """
    n = len(v)
    R = np.empty((n, n))
    R[:, 0] = 0.0
    for L in range(1, n):
        d = np.roll(v, -L, axis=0) - v
        R[:, L] = np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1])
    Ff = np.maximum.accumulate(R, axis=1)
    Rb = np.empty_like(R)
    Rb[:, 0] = 0.0
    for L in range(1, n):
        Rb[:, L] = np.roll(R[:, L], L)  # Rb[i, L] = R[i-L, L] = |v_i - v_{i-L}|
    Fb = np.maximum.accumulate(Rb, axis=1)
    D = np.zeros((n, n))
    for L in range(1, n):
        D[:, L] = np.maximum(np.roll(D[:, L - 1], -1), Ff[:, L])
    return R, Ff, Fb, D


def bounded_turning_constant(curve: PolygonalCurve, with_witness: bool = False):
    """max over vertex pairs of min(arc diameters) / chord, O(n^2)."""
    v = _require_simple(curve)
    n = len(v)
    R, Ff, Fb, D = _lag_tables(v)
    best = -1.0
    witness = (0, 1)
    for L in range(1, n):
        c = R[:, L]
        if np.any(c == 0.0):
            raise ParameterError("coincident non-adjacent vertices: curve is pinched")
        Df = D[:, L]
        Db = np.roll(D[:, n - L], -L)  # diam of the complement arc, anchored at v_{i+L}
        ratio = np.minimum(Df, Db) / c
        i = int(np.argmax(ratio))
        if ratio[i] > best:
            best = float(ratio[i])
            witness = (i, (i + L) % n)
    if with_witness:
        return best, witness
    return best


def ahlfors_constant(curve: PolygonalCurve) -> float:
    """max over vertex pairs and smaller-arc vertices of |anchor - z| / chord,
    O(n^2) via anchored running maxima."""
    v = _require_simple(curve)
    n = len(v)
    R, Ff, Fb, D = _lag_tables(v)
    best = -1.0
    for L in range(1, n):
        c = R[:, L]
        if np.any(c == 0.0):
            raise ParameterError("coincident non-adjacent vertices: curve is pinched")
        Df = D[:, L]
        Db = np.roll(D[:, n - L], -L)
        # anchored maxima over the forward arc {v_i .. v_{i+L}}: from v_i it is
        # Ff[i, L], from v_j = v_{i+L} it is Fb[j, L]; over the backward arc
        # {v_j .. v_{i+n}}: from v_j it is Ff[j, n-L], from v_i it is Fb[i, n-L]
        fwd = np.maximum(Ff[:, L], np.roll(Fb[:, L], -L))
        bwd = np.maximum(np.roll(Ff[:, n - L], -L), Fb[:, n - L])
        cand = np.where(Df < Db, fwd, np.where(Db < Df, bwd, np.maximum(fwd, bwd)))
        best = max(best, float(np.max(cand / c)))
    return best


def _dist(a, b) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def _naive_diam_table(pts) -> list:
    """diam[i][L] = diameter of {v_i, ..., v_{i+L}}, grown one vertex at a
    time with an inner scan (O(n^3) total)."""
    n = len(pts)
    diam = [[0.0] * n for _ in range(n)]
    for i in range(n):
        cur = 0.0
        for L in range(1, n):
            newest = pts[(i + L) % n]
            for m in range(L):
                cur = max(cur, _dist(pts[(i + m) % n], newest))
            diam[i][L] = cur
    return diam


def bounded_turning_constant_naive(curve: PolygonalCurve) -> float:
    """Triple-loop oracle for bounded_turning_constant; identical floats."""
    v = _require_simple(curve)
    pts = [tuple(p) for p in v]
    n = len(pts)
    diam = _naive_diam_table(pts)
    best = -1.0
    for i in range(n):
        for L in range(1, n):
            j = (i + L) % n
            c = _dist(pts[i], pts[j])
            r = min(diam[i][L], diam[j][n - L]) / c
            if r > best:
                best = r
    return best


def ahlfors_constant_naive(curve: PolygonalCurve) -> float:
    """Triple-loop oracle for ahlfors_constant; identical floats."""
    v = _require_simple(curve)
    pts = [tuple(p) for p in v]
    n = len(pts)
    diam = _naive_diam_table(pts)
    best = -1.0
    for i in range(n):
        for L in range(1, n):
            j = (i + L) % n
            c = _dist(pts[i], pts[j])
            df, db = diam[i][L], diam[j][n - L]
            cand = 0.0
            if df <= db:  # forward arc v_i .. v_j, both anchors
                for m in range(L + 1):
                    z = pts[(i + m) % n]
                    cand = max(cand, _dist(pts[i], z), _dist(pts[j], z))
            if db <= df:  # backward arc v_j .. v_{i+n}
                for m in range(n - L + 1):
                    z = pts[(j + m) % n]
                    cand = max(cand, _dist(pts[i], z), _dist(pts[j], z))
            r = cand / c
            if r > best:
                best = r
    return best


@dataclass(frozen=True)
class CurveMetrics:
    bounded_turning: float
    ahlfors: float
    area: float
    diameter: float
    n_vertices: int
    witness_pair: Tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "bounded_turning": self.bounded_turning,
            "ahlfors": self.ahlfors,
            "area": self.area,
            "diameter": self.diameter,
            "n_vertices": self.n_vertices,
            "witness_pair": list(self.witness_pair),
        }


def curve_metrics(curve: PolygonalCurve) -> CurveMetrics:
    bt, witness = bounded_turning_constant(curve, with_witness=True)
    return CurveMetrics(
        bounded_turning=bt,
        ahlfors=ahlfors_constant(curve),
        area=polygon_area(curve),
        diameter=polygon_diameter(curve),
        n_vertices=curve.n_vertices,
        witness_pair=witness,
    )
