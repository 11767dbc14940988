"""Finite-element oracle for the first nontrivial Neumann eigenvalue.

The eigenvalue is characterized as the minimum of the Rayleigh quotient

    R(u) = integral |grad u|^p / integral |u|^p

over nonconstant u satisfying integral |u|^{p-2} u = 0.  On a triangle
mesh with piecewise-linear elements the gradient term is computed exactly
(gradients are constant per triangle) and the |u|^p terms with a 6-point
degree-4 rule.  Minimization runs projected gradient descent with
Barzilai-Borwein steps and Armijo backtracking from several starts; every
iterate is re-projected onto the constraint by shifting u by the scalar
root of the monotone function s -> integral |u-s|^{p-2}(u-s), so each
evaluated quotient is feasible on its own.

For p = 2 the problem is the classical Neumann Laplacian and a sparse
symmetric eigensolve provides an independent reference value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import eigsh

from .bounds import BoundReport, LogReal, _as_float_or_str
from .errors import ConvergenceError, InconsistencyError, ParameterError
from .meshing import Mesh

# degree-4 rule on the reference triangle: barycentric nodes and weights
# normalized to sum to one
_QA = 0.091576213509771
_QB = 0.445948490915965
_QUAD_LAMBDA = np.array([
    [1.0 - 2.0 * _QA, _QA, _QA],
    [_QA, 1.0 - 2.0 * _QA, _QA],
    [_QA, _QA, 1.0 - 2.0 * _QA],
    [1.0 - 2.0 * _QB, _QB, _QB],
    [_QB, 1.0 - 2.0 * _QB, _QB],
    [_QB, _QB, 1.0 - 2.0 * _QB],
])
_QUAD_W = np.array([0.109951743655322] * 3 + [0.223381589678011] * 3)


class P1Operators:
    """Precomputed per-triangle quantities for Rayleigh evaluations."""

    def __init__(self, mesh: Mesh, p: float):
        if not (isinstance(p, (int, float)) and math.isfinite(p) and p >= 2.0):
            raise ParameterError(f"the functional needs p >= 2, got {p!r}")
        self.mesh = mesh
        self.p = float(p)
        pts = mesh.points
        tri = mesh.triangles
        a = pts[tri[:, 0]]
        b = pts[tri[:, 1]]
        c = pts[tri[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        if np.any(det <= 0.0):
            raise ParameterError("mesh triangles must be counterclockwise with positive area")
        self.area = 0.5 * det
        inv = 1.0 / det
        # gradients of the three barycentric basis functions per triangle
        self.gx = np.column_stack([
            (b[:, 1] - c[:, 1]) * inv,
            (c[:, 1] - a[:, 1]) * inv,
            (a[:, 1] - b[:, 1]) * inv,
        ])
        self.gy = np.column_stack([
            (c[:, 0] - b[:, 0]) * inv,
            (a[:, 0] - c[:, 0]) * inv,
            (b[:, 0] - a[:, 0]) * inv,
        ])
        self.total_area = float(np.sum(self.area))
        self.n = pts.shape[0]

    # -- elementary integrals ------------------------------------------------

    def _nodal(self, u: np.ndarray) -> np.ndarray:
        return u[self.mesh.triangles]

    def grad_energy(self, u: np.ndarray) -> float:
        un = self._nodal(u)
        gx = (un * self.gx).sum(axis=1)
        gy = (un * self.gy).sum(axis=1)
        g2 = gx * gx + gy * gy
        return float(np.dot(self.area, np.power(g2, 0.5 * self.p)))

    def p_norm_integral(self, u: np.ndarray) -> float:
        uq = self._nodal(u) @ _QUAD_LAMBDA.T
        return float(np.dot(self.area, np.power(np.abs(uq), self.p) @ _QUAD_W))

    def moment(self, u: np.ndarray, s: float) -> float:
        """integral |u-s|^{p-2} (u-s), the quantity the projection zeroes."""
        uq = self._nodal(u) @ _QUAD_LAMBDA.T - s
        vals = np.power(np.abs(uq), self.p - 2.0) * uq
        return float(np.dot(self.area, vals @ _QUAD_W))

    def project(self, u: np.ndarray) -> np.ndarray:
        """Shift u by the scalar that zeroes the constraint moment."""
        lo = float(u.min())
        hi = float(u.max())
        if hi - lo <= 0.0:
            raise ParameterError("cannot project a constant function onto the constraint")
        s = brentq(lambda t: self.moment(u, t), lo, hi, xtol=1e-15 * max(1.0, hi - lo),
                   rtol=8.9e-16, maxiter=200)
        return u - s

    def constraint_violation(self, u: np.ndarray) -> float:
        """Dimensionless residual of the mean-like constraint."""
        f = self.p_norm_integral(u)
        if f <= 0.0:
            return math.inf
        scale = f ** ((self.p - 1.0) / self.p) * self.total_area ** (1.0 / self.p)
        return abs(self.moment(u, 0.0)) / scale

    def normalize(self, u: np.ndarray) -> np.ndarray:
        f = self.p_norm_integral(u)
        if f <= 0.0:
            raise ParameterError("cannot normalize the zero function")
        return u / f ** (1.0 / self.p)

    # -- Rayleigh quotient ---------------------------------------------------

    def rayleigh(self, u: np.ndarray) -> float:
        f = self.p_norm_integral(u)
        if f <= 0.0:
            return math.inf
        return self.grad_energy(u) / f

    def rayleigh_grad(self, u: np.ndarray) -> Tuple[float, np.ndarray]:
        """Quotient and its nodal gradient, constraint not accounted for."""
        tri = self.mesh.triangles
        p = self.p
        un = self._nodal(u)
        gx = (un * self.gx).sum(axis=1)
        gy = (un * self.gy).sum(axis=1)
        g2 = gx * gx + gy * gy
        e = float(np.dot(self.area, np.power(g2, 0.5 * p)))
        ce = p * self.area * np.power(g2, 0.5 * p - 1.0)
        de_loc = ce[:, None] * (gx[:, None] * self.gx + gy[:, None] * self.gy)

        uq = un @ _QUAD_LAMBDA.T
        absq = np.abs(uq)
        f = float(np.dot(self.area, np.power(absq, p) @ _QUAD_W))
        if f <= 0.0:
            raise ParameterError("Rayleigh quotient undefined for the zero function")
        wq = _QUAD_W[None, :] * np.power(absq, p - 2.0) * uq
        df_loc = p * self.area[:, None] * (wq @ _QUAD_LAMBDA)

        r = e / f
        dr_loc = (de_loc - r * df_loc) / f
        grad = np.zeros(self.n)
        np.add.at(grad, tri, dr_loc)
        return r, grad


# ---------------------------------------------------------------------------
# minimization


@dataclass(frozen=True)
class MinimizeResult:
    value: float
    u: np.ndarray = field(repr=False)
    p: float
    n_starts: int
    start_values: Tuple[float, ...]
    best_start: int
    n_iterations: int
    constraint_violation: float
    converged: bool
    start_spread: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "n_starts": self.n_starts,
            "start_values": list(self.start_values),
            "best_start": self.best_start,
            "n_iterations": self.n_iterations,
            "constraint_violation": self.constraint_violation,
            "converged": self.converged,
            "start_spread": self.start_spread,
        }


def _default_starts(mesh: Mesh, n_random: int, seed: int) -> list:
    x = mesh.points[:, 0]
    y = mesh.points[:, 1]
    cx = float(x.mean())
    cy = float(y.mean())
    xs = x - cx
    ys = y - cy
    starts = [xs, ys, xs * xs - ys * ys, xs * ys]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        starts.append(rng.standard_normal(mesh.points.shape[0]))
    return starts


def _descend(ops: P1Operators, u0: np.ndarray, max_iter: int, rtol: float):
    u = ops.normalize(ops.project(u0))
    r, g = ops.rayleigh_grad(u)
    step = 1.0 / (float(np.linalg.norm(g)) + 1e-30)
    prev_u = None
    prev_g = None
    quiet = 0
    it = 0
    for it in range(1, max_iter + 1):
        gn2 = float(g @ g)
        if gn2 == 0.0:
            return u, r, it, True
        if prev_u is not None:
            du = u - prev_u
            dg = g - prev_g
            denom = float(du @ dg)
            if denom > 0.0:
                step = float(du @ du) / denom
        step = min(max(step, 1e-14), 1e8)
        accepted = False
        r_new = r
        u_new = u
        for _ in range(60):
            cand = ops.project(u - step * g)
            r_cand = ops.rayleigh(cand)
            if r_cand <= r - 1e-4 * step * gn2:
                accepted, u_new, r_new = True, cand, r_cand
                break
            step *= 0.5
        if not accepted:
            # no admissible step: declared converged only if already quiet
            return u, r, it, quiet >= 1
        prev_u, prev_g = u, g
        if r - r_new <= rtol * max(abs(r), 1e-30):
            quiet += 1
            if quiet >= 3:
                return u_new, r_new, it, True
        else:
            quiet = 0
        u = u_new
        r = r_new
        f = ops.p_norm_integral(u)
        if not (1e-12 < f < 1e12):
            u = ops.normalize(u)
            prev_u = prev_g = None  # scale change invalidates the step memory
        _, g = ops.rayleigh_grad(u)
    return u, r, max_iter, False


def _fd_gradient_check(ops: P1Operators, u: np.ndarray, seed: int) -> float:
    rng = np.random.default_rng(seed + 104729)
    d = rng.standard_normal(u.shape[0])
    d /= float(np.linalg.norm(d))
    _, g = ops.rayleigh_grad(u)
    eps = 1e-6 * max(1.0, float(np.linalg.norm(u)))
    fwd = ops.rayleigh(u + eps * d)
    bwd = ops.rayleigh(u - eps * d)
    fd = (fwd - bwd) / (2.0 * eps)
    an = float(g @ d)
    return abs(fd - an) / max(abs(an), abs(fd), 1e-30)


def rayleigh_minimize(mesh: Mesh, p: float, *, n_random_starts: int = 4, seed: int = 0,
                      max_iter: int = 500, rtol: float = 1e-10,
                      validate_gradient: bool = True) -> MinimizeResult:
    """Minimize the constrained Rayleigh quotient from several starts.

    The returned value is the smallest quotient over all starts; every
    reported quotient belongs to a feasible function, so the result is a
    legitimate upper estimate of the discrete minimum regardless of which
    starts converged.  Raises ConvergenceError (carrying the best result
    found) only when no start converged.
    """
    ops = P1Operators(mesh, p)
    starts = _default_starts(mesh, n_random_starts, seed)
    if len(starts) < 1:
        raise ParameterError("at least one start is required")

    if validate_gradient:
        u_probe = ops.normalize(ops.project(starts[0]))
        rel = _fd_gradient_check(ops, u_probe, seed)
        if rel > 1e-4:
            raise InconsistencyError(
                f"analytic Rayleigh gradient disagrees with finite differences "
                f"(relative error {rel:.3e})"
            )

    values = []
    infos = []
    for u0 in starts:
        u, r, iters, ok = _descend(ops, u0, max_iter, rtol)
        values.append(r)
        infos.append((u, iters, ok))
    best = int(np.argmin(values))
    u_best, iters_best, ok_best = infos[best]
    u_best = ops.normalize(u_best)
    ordered = sorted(values)
    spread = (ordered[1] - ordered[0]) / max(ordered[0], 1e-30) if len(ordered) > 1 else 0.0
    result = MinimizeResult(
        value=float(values[best]),
        u=u_best,
        p=float(p),
        n_starts=len(starts),
        start_values=tuple(float(v) for v in values),
        best_start=best,
        n_iterations=iters_best,
        constraint_violation=ops.constraint_violation(u_best),
        converged=bool(ok_best),
        start_spread=float(spread),
    )
    if not any(ok for _, _, ok in infos):
        raise ConvergenceError(
            f"no start converged within {max_iter} iterations", best=result
        )
    if result.constraint_violation > 1e-8:
        raise InconsistencyError(
            f"projected minimizer violates the constraint by {result.constraint_violation:.3e}"
        )
    return result


# ---------------------------------------------------------------------------
# linear reference


def laplace_reference(mesh: Mesh, k: int = 3) -> float:
    """First nontrivial Neumann eigenvalue of the Laplacian on the mesh.

    Assembles piecewise-linear stiffness and consistent mass matrices and
    solves the sparse generalized problem in shift-invert mode around a
    small negative shift, which isolates the bottom of the spectrum; the
    zero eigenvalue of the constants comes out first and is discarded.
    """
    if k < 2:
        raise ParameterError("need at least two eigenvalues to skip the constant mode")
    ops = P1Operators(mesh, 2.0)
    tri = mesh.triangles
    n = mesh.points.shape[0]
    ar = ops.area
    rows = []
    cols = []
    kv = []
    mv = []
    for i in range(3):
        for j in range(3):
            rows.append(tri[:, i])
            cols.append(tri[:, j])
            kv.append(ar * (ops.gx[:, i] * ops.gx[:, j] + ops.gy[:, i] * ops.gy[:, j]))
            mv.append(ar * ((2.0 if i == j else 1.0) / 12.0))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    K = coo_matrix((np.concatenate(kv), (rows, cols)), shape=(n, n)).tocsr()
    M = coo_matrix((np.concatenate(mv), (rows, cols)), shape=(n, n)).tocsr()
    vals = eigsh(K, k=k, M=M, sigma=-0.01, which="LM", return_eigenvectors=False)
    vals = np.sort(vals)
    if abs(vals[0]) > 1e-6 * max(1.0, abs(vals[1])):
        raise InconsistencyError(
            f"constant mode eigenvalue {vals[0]:.3e} is not numerically zero"
        )
    return float(vals[1])


# ---------------------------------------------------------------------------
# verification against a bound report


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of checking a lower bound against the mesh oracle."""

    bound: BoundReport
    mu_oracle: float
    oracle_kind: str
    mesh_quality: dict
    oracle_info: dict
    margin_log10: object
    passed: bool
    mesh: Mesh = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        return {
            "bound": self.bound.to_dict(),
            "mu_oracle": self.mu_oracle,
            "oracle_kind": self.oracle_kind,
            "mesh_quality": self.mesh_quality,
            "oracle_info": self.oracle_info,
            "margin_log10": self.margin_log10,
            "passed": self.passed,
        }


def verify_bound(report: BoundReport, curve, h: float, *, seed: int = 0,
                 n_random_starts: int = 4, max_iter: int = 500,
                 cross_check_p2: bool = True) -> VerificationReport:
    """Mesh the region bounded by `curve`, estimate the eigenvalue, and
    confirm the reported lower bound sits below it.

    The margin log10(mu_oracle) - log10(mu_lower) is reported as a float
    when it fits and as a decimal string otherwise.  `passed` tolerates a
    relative 1e-6 slack in favor of the bound to absorb oracle roundoff.
    """
    from .meshing import triangulate

    mesh = triangulate(curve, h)
    p = report.p
    if p == 2.0:
        mu_oracle = laplace_reference(mesh)
        kind = "laplace-eigsh"
        info = {"k": 3}
        if cross_check_p2:
            ray = rayleigh_minimize(mesh, 2.0, n_random_starts=n_random_starts,
                                    seed=seed, max_iter=max_iter)
            rel = abs(ray.value - mu_oracle) / mu_oracle
            if rel > 5e-3:
                raise InconsistencyError(
                    f"independent p=2 estimates disagree: eigensolve {mu_oracle!r} "
                    f"vs Rayleigh descent {ray.value!r}"
                )
            info["rayleigh_value"] = ray.value
            info["rayleigh_rel_diff"] = rel
    else:
        res = rayleigh_minimize(mesh, p, n_random_starts=n_random_starts,
                                seed=seed, max_iter=max_iter)
        mu_oracle = res.value
        kind = "p-laplacian-rayleigh"
        info = res.to_dict()
        info.pop("value")
    oracle_log = LogReal.from_linear(mu_oracle)
    margin = oracle_log.log10 - report.mu_lower.log10
    passed = bool(report.mu_lower.ln <= math.log(mu_oracle) + math.log1p(1e-6))
    return VerificationReport(
        bound=report,
        mu_oracle=mu_oracle,
        oracle_kind=kind,
        mesh_quality=mesh.quality(),
        oracle_info=info,
        margin_log10=_as_float_or_str(margin),
        passed=passed,
        mesh=mesh,
    )
