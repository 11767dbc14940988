"""Closed-form lower bounds for the first nontrivial Neumann eigenvalue of
the p-Laplacian (p > 2) on planar domains, organized by how the domain
geometry is presented:

  * alpha-regular route   -- the conformal derivative lies in L_alpha(D);
                             needs the derivative norm and the area.
  * quasidisc route       -- the boundary admits a K-quasiconformal
                             reflection; needs K and the area.
  * ahlfors route         -- the boundary satisfies a three-point (Ahlfors)
                             condition with constant C; needs C and the area.
  * snowflake route       -- edge-replacement snowflake of scale t; needs t
                             and the polygon area.

Numerical policy.  The quasidisc machinery involves the feasibility function

    nu(alpha, K) = 10^{4 alpha} * ((alpha-2)/(alpha-1)) * (24 pi^2 K^2)^alpha,

whose unit root gamma* sits at alpha - 2 ~ 1e-13 / K^4: float alphas cannot
resolve the admissible window above 2.  Everything here therefore carries
alpha as 2 + eps and optimizes in u = ln(eps).  Route constants reach
magnitudes like 10^(-366) (quasidisc) or 10^(10^26) (snowflake), so every
bound value travels as a natural log (float for the first two routes, an
mpmath.mpf for the last two); linear values are materialized only when
|log10| < 300.

The inner minimization over the integrability parameter q in [1, 2] is
always attained at the endpoint q = 2 (the minimized factor is strictly
decreasing in q on its feasible set); the optimizer still scans the
interior but evaluates the endpoint exactly, so closed-form displays are
reproduced to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import mpmath as mp

from .domains import QuasidiscSpec
from .errors import InconsistencyError, InfeasibleError, ParameterError

__all__ = [
    "AlphaRoot",
    "BoundReport",
    "LogReal",
    "alpha_constant",
    "ahlfors_bound",
    "delta_exponent",
    "derivative_norm_bound",
    "extension_coefficient_log",
    "inverse_holder_constant",
    "jacobian_nu",
    "kappa_nu",
    "nu_unit_root",
    "quasidisc_bound",
    "quasidisc_factor",
    "regularity_bound",
    "regularity_constant",
    "snowflake_bound",
    "szego_weinberger_upper",
]

LN2 = math.log(2.0)
LN3 = math.log(3.0)
LN10 = math.log(10.0)
LNPI = math.log(math.pi)
# pi^2 (2 + pi^2)^2: numerator of the exponential factors below
EXP_NUM = math.pi ** 2 * (2.0 + math.pi ** 2) ** 2
# first positive zero of the derivative of the Bessel function J_1,
# as tabulated to six significant digits
BESSEL_J1_PRIME_ZERO = 1.84118

_LOG10_LINEAR_CUTOFF = 300.0


# ---------------------------------------------------------------------------
# log-space values


def _json_scalar(v):
    """Strict-JSON encoding: infinities travel as strings."""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _json_unscalar(v):
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return v


def _as_float_or_str(x) -> "float | str":
    """float when exactly representable in double range, else decimal text."""
    if isinstance(x, float):
        return x
    try:
        f = float(x)
        if math.isfinite(f):
            return f
    except (OverflowError, ValueError):
        pass
    return mp.nstr(x, 17)


@dataclass(frozen=True)
class LogReal:
    """A positive real carried by its natural logarithm.

    `ln` is a float for moderate magnitudes and an mpmath.mpf when even the
    logarithm exceeds double range (snowflake-route bounds).  The json_*
    fields hold serialized forms verbatim when the value was parsed from a
    report, so that parse/emit round-trips are byte-stable; they never feed
    back into arithmetic.
    """

    ln: object
    json_log10: object = field(default=None, compare=False, repr=False)
    json_linear: object = field(default=None, compare=False, repr=False)

    @classmethod
    def from_linear(cls, x: float) -> "LogReal":
        if not x > 0:
            raise ParameterError(f"LogReal needs a positive value, got {x!r}")
        return cls(math.log(x))

    @property
    def log10(self):
        if isinstance(self.ln, float):
            return self.ln / LN10
        # fixed working precision so that emission is reproducible no matter
        # what the ambient mpmath precision happens to be
        with mp.workdps(50):
            return self.ln / mp.log(10)

    @property
    def linear(self) -> Optional[float]:
        """The plain float value, or None when |log10| >= 300."""
        if self.json_linear is not None:
            return self.json_linear
        l10 = self.log10
        try:
            l10f = float(l10)
        except (OverflowError, ValueError):
            return None
        if abs(l10f) >= _LOG10_LINEAR_CUTOFF:
            return None
        return math.exp(float(self.ln))

    def log10_json(self) -> "float | str":
        if self.json_log10 is not None:
            return self.json_log10
        return _as_float_or_str(self.log10)

    def __le__(self, other: "LogReal") -> bool:
        return self.ln <= other.ln

    def __lt__(self, other: "LogReal") -> bool:
        return self.ln < other.ln


# ---------------------------------------------------------------------------
# the q-factor shared by every route


def delta_exponent(p: float, q: float, alpha: float) -> float:
    """Embedding exponent delta = 1/q - (alpha-2)/(p alpha); alpha may be inf."""
    if not p >= 2.0:
        raise ParameterError(f"delta_exponent requires p >= 2, got {p}")
    if not 1.0 <= q <= 2.0:
        raise ParameterError(f"delta_exponent requires q in [1, 2], got {q}")
    term = _alpha_term(p, alpha)
    return 1.0 / q - term


def _alpha_term(p: float, alpha: float) -> float:
    """(alpha - 2)/(p alpha), continuously extended to alpha = inf as 1/p."""
    if alpha == math.inf:
        return 1.0 / p
    if not alpha > 2.0:
        raise ParameterError(f"alpha must exceed 2 (or be inf), got {alpha}")
    return (alpha - 2.0) / (p * alpha)


def _log_h_from_gap(p: float, d: float) -> float:
    """ln of ((1-delta)/(1/2-delta))^{(1-delta) p} written via d = 1/2 - delta."""
    if not d > 0.0:
        raise InfeasibleError(
            f"delta = {0.5 - d!r} is not below 1/2; the embedding factor diverges",
            constraint="delta(p, q, alpha) < 1/2",
        )
    one_minus_delta = 0.5 + d
    return one_minus_delta * p * (math.log(one_minus_delta) - math.log(d))


def _minimize_q(p: float, term: float) -> Tuple[float, float]:
    """Minimize the embedding factor over q in [1, 2].

    `term` is (alpha-2)/(p alpha).  Returns (ln h_min, q_opt).  The endpoint
    q = 2 is evaluated exactly and compared against a golden-section scan of
    the interior, so the returned minimum is never degraded by search noise.
    """
    # gap d(q) = (q-2)/(2q) + term; feasibility needs d > 0
    def gap(q):
        return (q - 2.0) / (2.0 * q) + term

    def val(q):
        d = gap(q)
        if d <= 0.0:
            return math.inf
        return _log_h_from_gap(p, d)

    v2 = _log_h_from_gap(p, term)  # q = 2 exactly: d = term
    best_q, best_v = 2.0, v2
    # feasible q window is (1/(1/2 + term), 2]
    q_lo = max(1.0, 1.0 / (0.5 + term))
    if 2.0 - q_lo > 1e-9:
        a, b = q_lo + 1e-13, 2.0
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = b - invphi * (b - a)
        d_ = a + invphi * (b - a)
        fc, fd = val(c), val(d_)
        while b - a > 1e-12:
            if fc < fd:
                b, d_, fd = d_, c, fc
                c = b - invphi * (b - a)
                fc = val(c)
            else:
                a, c, fc = c, d_, fd
                d_ = a + invphi * (b - a)
                fd = val(d_)
        q_in = 0.5 * (a + b)
        v_in = val(q_in)
        if v_in < best_v:
            best_q, best_v = q_in, v_in
    return best_v, best_q


# ---------------------------------------------------------------------------
# alpha-regular route


@dataclass(frozen=True)
class RegularityConstant:
    value: float
    ln_value: float
    q_opt: float
    p: float
    alpha: float


def regularity_constant(p: float, alpha: float) -> RegularityConstant:
    """Multiplicative constant of the alpha-regular lower-bound route,

        C = 2^p pi^{(alpha-2)/alpha - p/2} * min_q h(p, q, alpha),

    with the sup-norm variant (alpha = inf) as the continuous limit."""
    if not p >= 2.0:
        raise ParameterError(f"regularity route requires p >= 2, got {p}")
    term = _alpha_term(p, alpha)
    if alpha == math.inf:
        pi_exp = 1.0 - p / 2.0
    else:
        pi_exp = (alpha - 2.0) / alpha - p / 2.0
    ln_h, q_opt = _minimize_q(p, term)
    ln_c = p * LN2 + pi_exp * LNPI + ln_h
    return RegularityConstant(value=math.exp(ln_c), ln_value=ln_c, q_opt=q_opt, p=p, alpha=alpha)


def regularity_bound(p: float, alpha: float, area: float, deriv_norm: float) -> "BoundReport":
    """Lower bound mu >= (C * area^{(p-2)/2} * deriv_norm^2)^{-1} from
    integrability of the conformal derivative."""
    if not area > 0.0:
        raise ParameterError(f"area must be positive, got {area}")
    if not deriv_norm > 0.0:
        raise ParameterError(f"derivative norm must be positive, got {deriv_norm}")
    const = regularity_constant(p, alpha)
    ln_mu = -(const.ln_value + 0.5 * (p - 2.0) * math.log(area) + 2.0 * math.log(deriv_norm))
    d = _gap_at(p, const.q_opt, alpha)
    return BoundReport(
        route="sup-regular" if alpha == math.inf else "alpha-regular",
        route_params={"alpha": alpha, "deriv_norm": deriv_norm},
        p=p,
        mu_lower=LogReal(ln_mu),
        chosen_alpha=alpha,
        chosen_alpha_ln_eps=(math.log(alpha - 2.0) if alpha != math.inf else None),
        chosen_q=const.q_opt,
        delta=0.5 - d,
        delta_gap_log10=math.log10(d),
        area=area,
        r_star=math.sqrt(area / math.pi),
        spectral_factor=LogReal(ln_mu + 0.5 * p * math.log(area)),
    )


def _gap_at(p: float, q: float, alpha: float) -> float:
    return (q - 2.0) / (2.0 * q) + _alpha_term(p, alpha)


# ---------------------------------------------------------------------------
# quasidisc feasibility machinery


class AlphaRoot(float):
    """A float alpha = 2 + eps that keeps eps and ln(eps) exactly.

    The float value itself typically rounds to 2.0: the window widths
    involved sit far below the resolution of doubles near 2."""

    eps: float
    ln_eps: float

    def __new__(cls, ln_eps: float):
        eps = math.exp(ln_eps) if ln_eps > -700.0 else 0.0
        obj = super().__new__(cls, 2.0 + eps)
        obj.eps = eps
        obj.ln_eps = ln_eps
        return obj


def _nu_log_from_base(u: float, c_term: float) -> float:
    """ln nu at ln(eps) = u, where c_term = 4 ln 10 + ln(base)."""
    eps = math.exp(u) if u > -700.0 else 0.0
    return u - math.log1p(eps) + (2.0 + eps) * c_term


def _nu_log_shifted(w: float, u0: float, c_term: float) -> float:
    """ln nu at ln(eps) = u0 + w, with u0 = -2 c_term folded in analytically.

    ln nu = u - log1p(eps) + (2 + eps) c_term cancels catastrophically near
    the unit root when c_term is large (the snowflake route reaches
    c_term ~ 1e21, where float spacing alone is ~1e5); writing ln nu =
    w - log1p(eps) + eps c_term removes the cancellation exactly."""
    u = u0 + w
    eps = math.exp(u) if u > -700.0 else 0.0
    return w - math.log1p(eps) + eps * c_term


def _nu_root_w(c_term: float) -> float:
    """Solve nu = 1 for w = ln(eps) + 2 c_term by bisection; the root sits
    within O(eps * c_term) of 0."""
    u0 = -(c_term + c_term)
    lo, hi = -10.0, 10.0
    flo = _nu_log_shifted(lo, u0, c_term)
    fhi = _nu_log_shifted(hi, u0, c_term)
    if not (flo < 0.0 < fhi):
        raise InconsistencyError(
            f"feasibility root bracketing failed (c_term={c_term!r}): ln nu at "
            f"w in [{lo}, {hi}] = [{flo}, {fhi}]"
        )
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if _nu_log_shifted(mid, u0, c_term) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ln_base_for_K(K: float) -> float:
    return math.log(24.0 * math.pi ** 2) + 2.0 * math.log(K)


def jacobian_nu(K: float, alpha: Optional[float] = None, *, eps: Optional[float] = None,
                log: bool = False) -> float:
    """Feasibility function nu(alpha, K); the reverse-Holder constants below
    exist only while nu < 1.

    Pass eps = alpha - 2 directly to avoid the float cancellation in
    alpha - 2; with log=True the natural log of nu is returned (the linear
    value overflows quickly: nu grows like 10^{4 alpha})."""
    if not K >= 1.0:
        raise ParameterError(f"quasiconformality coefficient must satisfy K >= 1, got {K}")
    u = _resolve_ln_eps(alpha, eps)
    ln_nu = _nu_log_from_base(u, 4.0 * LN10 + _ln_base_for_K(K))
    if log:
        return ln_nu
    return math.exp(ln_nu) if ln_nu < 709.0 else math.inf


def _resolve_ln_eps(alpha, eps) -> float:
    if (alpha is None) == (eps is None):
        raise ParameterError("pass exactly one of alpha / eps")
    if eps is None:
        if isinstance(alpha, AlphaRoot):
            return alpha.ln_eps
        if not alpha > 2.0:
            raise ParameterError(f"alpha must exceed 2, got {alpha}")
        eps = alpha - 2.0
    if not eps > 0.0:
        raise ParameterError(f"eps = alpha - 2 must be positive, got {eps}")
    return math.log(eps)


def nu_unit_root(K: float) -> AlphaRoot:
    """The alpha > 2 at which nu(alpha, K) reaches 1, as an AlphaRoot
    carrying eps = alpha - 2 exactly."""
    if not K >= 1.0:
        raise ParameterError(f"quasiconformality coefficient must satisfy K >= 1, got {K}")
    c_term = 4.0 * LN10 + _ln_base_for_K(K)
    return AlphaRoot(-(c_term + c_term) + _nu_root_w(c_term))


def alpha_constant(K: float, alpha: Optional[float] = None, *, eps: Optional[float] = None,
                   log: bool = False) -> float:
    """The constant C_alpha = 10^6 / ((alpha-1)(1-nu))^{1/alpha} controlling
    the derivative-norm estimates on a K-quasidisc."""
    if not K >= 1.0:
        raise ParameterError(f"quasiconformality coefficient must satisfy K >= 1, got {K}")
    u = _resolve_ln_eps(alpha, eps)
    ln_c = _ln_alpha_constant(u, 4.0 * LN10 + _ln_base_for_K(K))
    return ln_c if log else math.exp(ln_c)


def _ln_alpha_constant(u: float, c_term: float) -> float:
    ln_nu = _nu_log_from_base(u, c_term)
    if ln_nu >= 0.0:
        raise InfeasibleError(
            f"nu(alpha, K) = exp({ln_nu!r}) >= 1 at ln(alpha-2) = {u!r}; "
            "the constant is undefined there",
            constraint="nu(alpha, K) < 1",
        )
    eps = math.exp(u) if u > -700.0 else 0.0
    nu = math.exp(ln_nu)
    return 6.0 * LN10 - (math.log1p(eps) + math.log1p(-nu)) / (2.0 + eps)


# ---------------------------------------------------------------------------
# inverse-Holder constants (Jacobian and derivative forms)


def kappa_nu(kappa: float, K: float, log: bool = False) -> float:
    """Feasibility function of the Jacobian reverse-Holder inequality,

        nu~ = 10^{8 kappa} ((2 kappa - 2)/(2 kappa - 1)) (24 pi^2 K)^{2 kappa};

    identical to nu(2 kappa, sqrt(K))."""
    if not kappa > 1.0:
        raise ParameterError(f"kappa must exceed 1, got {kappa}")
    if not K >= 1.0:
        raise ParameterError(f"K must satisfy K >= 1, got {K}")
    ln = (
        8.0 * kappa * LN10
        + math.log(2.0 * kappa - 2.0)
        - math.log(2.0 * kappa - 1.0)
        + 2.0 * kappa * math.log(24.0 * math.pi ** 2 * K)
    )
    if log:
        return ln
    return math.exp(ln) if ln < 709.0 else math.inf


def inverse_holder_constant(kappa: float, K: float) -> LogReal:
    """Constant of the reverse-Holder inequality for the Jacobian of a
    K-quasiconformal reflection, valid for 1 < kappa < K/(K-1):

        (C_kappa^2 K pi^{1/kappa - 1} / 4) * exp(K pi^2 (2+pi^2)^2 / (2 ln 3)).
    """
    if not kappa > 1.0:
        raise ParameterError(f"kappa must exceed 1, got {kappa}")
    if not K >= 1.0:
        raise ParameterError(f"K must satisfy K >= 1, got {K}")
    if K > 1.0 and not kappa < K / (K - 1.0):
        raise InfeasibleError(
            f"kappa = {kappa} is outside (1, K/(K-1)) = (1, {K / (K - 1.0)!r})",
            constraint="kappa < K/(K-1)",
        )
    ln_nu = kappa_nu(kappa, K, log=True)
    if ln_nu >= 0.0:
        raise InfeasibleError(
            f"nu~(kappa={kappa}, K={K}) = exp({ln_nu!r}) >= 1; constant undefined",
            constraint="nu~(kappa, K) < 1",
        )
    ln_ck = 6.0 * LN10 - (math.log(2.0 * kappa - 1.0) + math.log1p(-math.exp(ln_nu))) / (
        2.0 * kappa
    )
    ln = (
        2.0 * ln_ck
        + math.log(K)
        + (1.0 / kappa - 1.0) * LNPI
        - 2.0 * LN2
        + K * EXP_NUM / (2.0 * LN3)
    )
    return LogReal(ln)


def derivative_norm_bound(K: float, area: float, alpha: Optional[float] = None, *,
                          eps: Optional[float] = None) -> LogReal:
    """Upper bound for the L_alpha(D) norm of the conformal derivative of a
    map onto a K-quasidisc of the given area,

        (C_alpha K pi^{(2-alpha)/(2 alpha)} / 2)
            * exp(K^2 pi^2 (2+pi^2)^2 / (4 ln 3)) * area^{1/2},

    valid for 2 < alpha < 2K^2/(K^2-1) with nu(alpha, K) < 1."""
    if not area > 0.0:
        raise ParameterError(f"area must be positive, got {area}")
    u = _resolve_ln_eps(alpha, eps)
    if K > 1.0:
        ln_eps_qc = LN2 - (2.0 * math.log(K) + math.log1p(-K ** -2.0))
        if u >= ln_eps_qc:
            raise InfeasibleError(
                f"alpha exceeds the admissible window top 2K^2/(K^2-1) "
                f"(ln eps = {u!r} >= {ln_eps_qc!r})",
                constraint="alpha < 2K^2/(K^2-1)",
            )
    ln_c = _ln_alpha_constant(u, 4.0 * LN10 + _ln_base_for_K(K))
    eps_v = math.exp(u) if u > -700.0 else 0.0
    pi_exp = -eps_v / (2.0 * (2.0 + eps_v))  # (2 - alpha)/(2 alpha)
    ln = (
        ln_c
        + math.log(K)
        + pi_exp * LNPI
        - LN2
        + K * K * EXP_NUM / (4.0 * LN3)
        + 0.5 * math.log(area)
    )
    return LogReal(ln)


# ---------------------------------------------------------------------------
# quasidisc route


@dataclass(frozen=True)
class WindowOptimum:
    """Result of minimizing h * C_alpha^2 over the admissible alpha window."""

    ln_value: float
    u_opt: float  # ln(alpha_opt - 2)
    q_opt: float
    ln_h: float
    ln_c_alpha: float
    nu_at_opt: float
    root_u: float  # ln(eps) of the nu = 1 root
    window_top_u: float  # ln(eps) of min(quasiconformal cap, nu root)
    binding: str  # which cap is active: "nu-root" or "reflection"


def _window_objective(p: float, w: float, u0: float, c_term: float, split: bool):
    """(J_rel, offset, q_opt, nu, ln_c_alpha) at ln(eps) = u0 + w.

    The true objective is J = ln h + 2 ln C_alpha = J_rel + offset.  When
    eps underflows to exactly 0 the w-dependent part of ln h is split from
    the huge w-independent term -p u0 / 2: adding them first would absorb
    the w-dependence into float rounding (u0 reaches ~ -4e21 on the
    snowflake route, where the spacing of doubles is ~512) and the
    optimizer would no longer see the interior minimum."""
    u = u0 + w
    eps = math.exp(u) if u > -700.0 else 0.0
    two_eps = 2.0 + eps
    ln_nu = w - math.log1p(eps) + eps * c_term
    if ln_nu >= 0.0:
        return math.inf, 0.0, 2.0, math.inf, math.inf
    nu = math.exp(ln_nu)
    ln_c = 6.0 * LN10 - (math.log1p(eps) + math.log1p(-nu)) / two_eps
    offset = 0.0
    if split:
        # eps == 0 across the whole window; ln h = p/2 (ln p - w) - p u0 / 2
        ln_h = 0.5 * p * (math.log(p) - w)
        offset = -0.5 * p * u0
        q_opt = 2.0
    elif eps > 1e-8:
        ln_h, q_opt = _minimize_q(p, eps / (p * two_eps))
    else:
        # q window width ~ eps/p: only the endpoint q = 2 is resolvable,
        # and it is the minimizer anyway
        ln_d = u - math.log(p * two_eps)
        d = math.exp(ln_d) if ln_d > -700.0 else 0.0
        ln_h = (0.5 + d) * p * (math.log(0.5 + d) - ln_d)
        q_opt = 2.0
    return ln_h + 2.0 * ln_c, offset, q_opt, nu, ln_c


def _optimize_window(p: float, ln_base: float, qc_cap_u: float) -> WindowOptimum:
    """Grid-plus-golden minimization of ln(h C_alpha^2) over the admissible
    alpha window, run in w = ln(eps) + 2 c_term."""
    c_term = 4.0 * LN10 + ln_base
    u0 = -(c_term + c_term)
    w_root = _nu_root_w(c_term)
    w_cap = qc_cap_u - u0 if qc_cap_u != math.inf else math.inf
    w_top = min(w_root, w_cap)
    binding = "nu-root" if w_root <= w_cap else "reflection"
    w_hi = w_top + math.log1p(-1e-6)  # keep a relative margin inside the window
    w_lo = w_hi - 60.0
    n_grid = 256
    # past the underflow line eps is identically zero on the whole window and
    # the objective is evaluated in split form (w-part separated from -p u0/2)
    split = (u0 + w_hi) <= -746.0

    def obj(w):
        return _window_objective(p, w, u0, c_term, split)

    best_w, best_j = w_hi, math.inf
    for i in range(n_grid):
        w = w_lo + (w_hi - w_lo) * i / (n_grid - 1.0)
        j = obj(w)[0]
        if j < best_j:
            best_w, best_j = w, j
    span = (w_hi - w_lo) / (n_grid - 1.0)
    a = max(w_lo, best_w - span)
    b = min(w_hi, best_w + span)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = obj(c)[0], obj(d)[0]
    while b - a > 1e-11:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = obj(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = obj(d)[0]
    w_opt = 0.5 * (a + b)
    j, offset, q_opt, nu, ln_c = obj(w_opt)
    if not math.isfinite(j):
        raise InconsistencyError(f"window optimization landed on an infeasible point w={w_opt!r}")
    ln_h = j - 2.0 * ln_c + offset
    return WindowOptimum(
        ln_value=j + offset,
        u_opt=u0 + w_opt,
        q_opt=q_opt,
        ln_h=ln_h,
        ln_c_alpha=ln_c,
        nu_at_opt=nu,
        root_u=u0 + w_root,
        window_top_u=u0 + w_top,
        binding=binding,
    )


@dataclass(frozen=True)
class QuasidiscFactor:
    """The area-free spectral factor of the quasidisc route: mu >= value /
    area^{p/2}, carried in log space."""

    ln_value: float
    p: float
    K: float
    opt: WindowOptimum

    @property
    def log10(self) -> float:
        return self.ln_value / LN10


def _qc_cap_u(ln_K2: float) -> float:
    """ln of the window cap eps < 2 K^2/(K^2 - 1) - 2 = 2/(K^2 - 1), from
    ln(K^2); infinite when K = 1."""
    if ln_K2 <= 0.0:
        return math.inf
    if ln_K2 > 50.0:
        ln_k2m1 = ln_K2  # K^2 - 1 == K^2 to double precision
    else:
        ln_k2m1 = ln_K2 + math.log1p(-math.exp(-ln_K2))
    return LN2 - ln_k2m1


def quasidisc_factor(p: float, K: float) -> QuasidiscFactor:
    """Spectral factor M of the quasidisc route:

        M = [pi^{p/2} / (2^{p-2} K^2)] * exp(-K^2 pi^2 (2+pi^2)^2 / (2 ln 3))
              / inf_{alpha, q} { h(q, alpha) * C_alpha^2 },

    minimized over the admissible window 2 < alpha < min(2K^2/(K^2-1),
    nu_unit_root(K)) and q in [1, 2]."""
    if not p > 2.0:
        raise ParameterError(f"quasidisc route requires p > 2, got {p}")
    if not K >= 1.0:
        raise ParameterError(f"quasiconformality coefficient must satisfy K >= 1, got {K}")
    if K == 1.0:
        # the admissible window's cap 2K^2/(K^2-1) is undefined at K = 1
        raise InfeasibleError(
            "quasidisc route requires K > 1 (the window cap 2K^2/(K^2-1) "
            "degenerates at K = 1)",
            constraint="K > 1",
        )
    ln_base = _ln_base_for_K(K)
    opt = _optimize_window(p, ln_base, _qc_cap_u(2.0 * math.log(K)))
    ln_a = 0.5 * p * LNPI - (p - 2.0) * LN2 - 2.0 * math.log(K) - K * K * EXP_NUM / (2.0 * LN3)
    return QuasidiscFactor(ln_value=ln_a - opt.ln_value, p=p, K=K, opt=opt)


def quasidisc_bound(p: float, spec: QuasidiscSpec) -> "BoundReport":
    """Lower bound mu >= M / area^{p/2} for a K-quasidisc of known area."""
    if not isinstance(spec, QuasidiscSpec):
        raise ParameterError(f"expected a QuasidiscSpec, got {type(spec).__name__}")
    factor = quasidisc_factor(p, spec.K)
    opt = factor.opt
    ln_mu = factor.ln_value - 0.5 * p * math.log(spec.area)
    r_star = math.sqrt(spec.area / math.pi)
    # equivalent normalized form: mu >= M* / R*^p with M* = M pi^{-p/2}
    ln_m_star = factor.ln_value - 0.5 * p * LNPI
    ln_mu_star_form = ln_m_star - p * math.log(r_star)
    if abs(ln_mu_star_form - ln_mu) > 1e-9 * max(1.0, abs(ln_mu)):
        raise InconsistencyError(
            f"the two report forms disagree: ln mu {ln_mu!r} vs {ln_mu_star_form!r}"
        )
    return BoundReport(
        route="quasidisc",
        route_params={"K": spec.K, "provenance": spec.provenance},
        p=p,
        mu_lower=LogReal(ln_mu),
        chosen_alpha=2.0 + (math.exp(opt.u_opt) if opt.u_opt > -700.0 else 0.0),
        chosen_alpha_ln_eps=opt.u_opt,
        chosen_q=opt.q_opt,
        delta=0.5 - _gap_value(p, opt.u_opt),
        delta_gap_log10=_gap_log10(p, opt.u_opt),
        c_alpha_log10=opt.ln_c_alpha / LN10,
        nu_at_alpha=opt.nu_at_opt,
        nu_root_ln_eps=opt.root_u,
        alpha_window_ln_eps=opt.window_top_u,
        alpha_window_binding=opt.binding,
        area=spec.area,
        r_star=r_star,
        spectral_factor=LogReal(factor.ln_value),
        spectral_factor_star=LogReal(ln_m_star),
        notes=(
            "alpha window capped at 2K^2/(K^2-1); the narrower cap "
            "K^2/(K^2-1) sometimes quoted for this route never binds "
            "either, since the feasibility root sits just above 2",
        ),
    )


def _gap_value(p: float, u: float) -> float:
    eps = math.exp(u) if u > -700.0 else 0.0
    return eps / (p * (2.0 + eps))


def _gap_log10(p: float, u: float) -> float:
    eps = math.exp(u) if u > -700.0 else 0.0
    return (u - math.log(p * (2.0 + eps))) / LN10


# ---------------------------------------------------------------------------
# Ahlfors (three-point) route and snowflakes


def extension_coefficient_log(C: float) -> float:
    """ln of the reflection-coefficient ceiling induced by a three-point
    condition with constant C: ln K = (1 + e^{2 pi} C^5)^2 - 10 ln 2."""
    if not C >= 1.0:
        raise ParameterError(f"three-point constant must satisfy C >= 1, got {C}")
    a = 1.0 + math.exp(2.0 * math.pi) * C ** 5
    return a * a - 10.0 * LN2


def _mp_exp_factor() -> mp.mpf:
    return mp.pi ** 2 * (2 + mp.pi ** 2) ** 2


def ahlfors_bound(p: float, C: float, area: float) -> "BoundReport":
    """Lower bound for a domain whose boundary satisfies a three-point
    condition with constant C, via the induced reflection coefficient.

    The reciprocal bound is

        1/mu <= inf_{alpha, q} { h C_alpha^2 } * 2^{p-22} e^{2(1+e^{2 pi} C^5)^2}
                 pi^{-p/2} exp( pi^2 (2+pi^2)^2 e^{2(1+e^{2 pi} C^5)^2}
                                / (2^21 ln 3) ) * area^{p/2},

    with nu evaluated at K^2 = 2^{-20} e^{2(1+e^{2 pi} C^5)^2}.  The value is
    astronomically small; the report carries log10 only."""
    if not p > 2.0:
        raise ParameterError(f"ahlfors route requires p > 2, got {p}")
    if not area > 0.0:
        raise ParameterError(f"area must be positive, got {area}")
    ln_K = extension_coefficient_log(C)
    ln_base = math.log(24.0 * math.pi ** 2) + 2.0 * ln_K
    opt = _optimize_window(p, ln_base, _qc_cap_u(2.0 * ln_K))
    with mp.workdps(50):
        a2 = 1 + mp.e ** (2 * mp.pi) * mp.mpf(C) ** 5
        s2 = 2 * a2 ** 2
        giant = _mp_exp_factor() * mp.e ** s2 / (mp.mpf(2) ** 21 * mp.log(3))
        ln_recip = (
            mp.mpf(opt.ln_value)
            + (p - 22.0) * mp.log(2)
            + s2
            - 0.5 * p * mp.log(mp.pi)
            + giant
            + 0.5 * p * mp.log(area)
        )
        ln_mu = -ln_recip
    return _extreme_route_report(
        route="ahlfors",
        route_params={"C": C},
        p=p,
        area=area,
        ln_mu=ln_mu,
        opt=opt,
        notes=(
            "reflection coefficient bounded via the three-point constant: "
            f"ln K <= {ln_K!r}",
        ),
    )


def snowflake_bound(p: float, t: float, area: float) -> "BoundReport":
    """Lower bound for edge-replacement snowflakes of scale t in [1/4, 1/2),
    evaluated exactly as displayed for that family:

    the three-point constant is C = 16/(1-2t); the exponential factors use
    e^{4(1+e^{4 pi} C^5)^2} while the feasibility base uses
    (3 pi^2 / 2^17) e^{4(1+e^{2 pi} C^5)^2} (the two inner exponents differ
    in the source display; both are kept verbatim)."""
    if not p > 2.0:
        raise ParameterError(f"snowflake route requires p > 2, got {p}")
    if not 0.25 <= t < 0.5:
        raise ParameterError(f"snowflake scale t must lie in [1/4, 1/2), got {t}")
    if not area > 0.0:
        raise ParameterError(f"area must be positive, got {area}")
    C = 16.0 / (1.0 - 2.0 * t)
    a2 = 1.0 + math.exp(2.0 * math.pi) * C ** 5
    s_nu = 4.0 * a2 * a2
    ln_base = math.log(3.0 * math.pi ** 2) - 17.0 * LN2 + s_nu
    ln_K2 = ln_base - math.log(24.0 * math.pi ** 2)
    opt = _optimize_window(p, ln_base, _qc_cap_u(ln_K2))
    with mp.workdps(50):
        a4 = 1 + mp.e ** (4 * mp.pi) * mp.mpf(C) ** 5
        s4 = 4 * a4 ** 2
        giant = _mp_exp_factor() * mp.e ** s4 / (mp.mpf(2) ** 21 * mp.log(3))
        ln_recip = (
            mp.mpf(opt.ln_value)
            + (p - 22.0) * mp.log(2)
            + s4
            - 0.5 * p * mp.log(mp.pi)
            + giant
            + 0.5 * p * mp.log(area)
        )
        ln_mu = -ln_recip
    return _extreme_route_report(
        route="snowflake",
        route_params={"t": t, "C": C},
        p=p,
        area=area,
        ln_mu=ln_mu,
        opt=opt,
        notes=(
            "evaluated verbatim from the snowflake display: the outer "
            "exponential factors use e^{4 pi} inside, the feasibility base "
            "uses e^{2 pi}",
        ),
    )


def _extreme_route_report(route, route_params, p, area, ln_mu, opt, notes) -> "BoundReport":
    with mp.workdps(50):
        ln_factor = ln_mu + 0.5 * p * mp.log(area)
    return BoundReport(
        route=route,
        route_params=route_params,
        p=p,
        mu_lower=LogReal(ln_mu),
        chosen_alpha=2.0,
        chosen_alpha_ln_eps=opt.u_opt,
        chosen_q=opt.q_opt,
        delta=0.5 - _gap_value(p, opt.u_opt),
        delta_gap_log10=_gap_log10(p, opt.u_opt),
        c_alpha_log10=opt.ln_c_alpha / LN10,
        nu_at_alpha=opt.nu_at_opt,
        nu_root_ln_eps=opt.root_u,
        alpha_window_ln_eps=opt.window_top_u,
        alpha_window_binding=opt.binding,
        area=area,
        r_star=math.sqrt(area / math.pi),
        spectral_factor=LogReal(ln_factor),
        notes=notes,
    )


def szego_weinberger_upper(area: float) -> float:
    """Upper bound for the p = 2 eigenvalue: mu <= j'^2 / R*^2 where j' is
    the first positive zero of J_1' and R* the equal-area disc radius."""
    if not area > 0.0:
        raise ParameterError(f"area must be positive, got {area}")
    return BESSEL_J1_PRIME_ZERO ** 2 / (area / math.pi)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class BoundReport:
    """Everything a bound evaluation decided, in one serializable record.

    Linear fields are floats or None (when the value is out of double range
    or not meaningful for the route); log10 fields are floats when
    representable and decimal strings otherwise."""

    route: str
    route_params: dict
    p: float
    mu_lower: LogReal
    area: float
    r_star: float
    chosen_alpha: Optional[float] = None
    chosen_alpha_ln_eps: Optional[float] = None
    chosen_q: Optional[float] = None
    delta: Optional[float] = None
    delta_gap_log10: Optional[float] = None
    c_alpha_log10: Optional[float] = None
    nu_at_alpha: Optional[float] = None
    nu_root_ln_eps: Optional[float] = None
    alpha_window_ln_eps: Optional[float] = None
    alpha_window_binding: Optional[str] = None
    spectral_factor: Optional[LogReal] = None
    spectral_factor_star: Optional[LogReal] = None
    feasible: bool = True
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = {
            "route": self.route,
            "route_params": {k: _json_scalar(v) for k, v in self.route_params.items()},
            "p": self.p,
            "feasible": self.feasible,
            "mu_lower": self.mu_lower.linear,
            "mu_lower_log10": self.mu_lower.log10_json(),
            "area": self.area,
            "r_star": self.r_star,
            "chosen_alpha": _json_scalar(self.chosen_alpha),
            "chosen_alpha_ln_eps": self.chosen_alpha_ln_eps,
            "chosen_q": self.chosen_q,
            "delta": self.delta,
            "delta_gap_log10": self.delta_gap_log10,
            "c_alpha_log10": self.c_alpha_log10,
            "nu_at_alpha": self.nu_at_alpha,
            "nu_root_ln_eps": self.nu_root_ln_eps,
            "alpha_window_ln_eps": self.alpha_window_ln_eps,
            "alpha_window_binding": self.alpha_window_binding,
            "spectral_factor_log10": (
                self.spectral_factor.log10_json() if self.spectral_factor else None
            ),
            "spectral_factor_star_log10": (
                self.spectral_factor_star.log10_json() if self.spectral_factor_star else None
            ),
            "notes": list(self.notes),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        def _logreal(key, linear_key=None):
            v = d.get(key)
            if v is None:
                return None
            lin = d.get(linear_key) if linear_key else None
            if isinstance(v, str):
                with mp.workdps(50):
                    ln = mp.mpf(v) * mp.log(10)
            else:
                ln = v * LN10
            return LogReal(ln, json_log10=v, json_linear=lin)

        return cls(
            route=d["route"],
            route_params={k: _json_unscalar(v) for k, v in d.get("route_params", {}).items()},
            p=d["p"],
            mu_lower=_logreal("mu_lower_log10", "mu_lower"),
            area=d["area"],
            r_star=d["r_star"],
            chosen_alpha=_json_unscalar(d.get("chosen_alpha")),
            chosen_alpha_ln_eps=d.get("chosen_alpha_ln_eps"),
            chosen_q=d.get("chosen_q"),
            delta=d.get("delta"),
            delta_gap_log10=d.get("delta_gap_log10"),
            c_alpha_log10=d.get("c_alpha_log10"),
            nu_at_alpha=d.get("nu_at_alpha"),
            nu_root_ln_eps=d.get("nu_root_ln_eps"),
            alpha_window_ln_eps=d.get("alpha_window_ln_eps"),
            alpha_window_binding=d.get("alpha_window_binding"),
            spectral_factor=_logreal("spectral_factor_log10"),
            spectral_factor_star=_logreal("spectral_factor_star_log10"),
            feasible=d.get("feasible", True),
            notes=tuple(d.get("notes", ())),
        )
