"""Command-line front end.

Subcommands: `bound` (evaluate a lower-bound route from plain numbers),
`norms` (quadrature norms of a catalog domain as CSV), `curve-metrics`
(geometric constants of a polyline CSV), `domain` (generate and export
boundary curves), `verify` (bound vs finite-element oracle on a meshed
region), `sweep` (a route across a parameter range as CSV).

Routes are named by single letters on the command line: B is the
conformal-regularity bound (needs a derivative norm), A the quasidisc
bound (needs K), C the three-point/bounded-turning bound (needs C), and
`snowflake` the verbatim snowflake display (needs t).

Exit codes: 0 artifact written, 2 the requested constant is not defined
for these parameters (the report names the violated constraint), 1
anything else.  A `--config file` of key=value lines supplies flag
defaults; explicit flags win.  PLB_QUIET=1 silences progress lines on
stderr.  JSON output is key-sorted, so identical inputs and seeds give
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    ahlfors_bound,
    quasidisc_bound,
    regularity_bound,
    snowflake_bound,
)
from .curves import ahlfors_constant, curve_metrics, polygon_area
from .domains import (
    SnowflakeParams,
    boundary_polyline,
    curve_from_csv,
    curve_to_csv,
    curve_to_svg,
    generate_rohde_snowflake,
    make_epicycloid,
    make_quasidisc_spec,
    make_unit_disc,
    star_coefficient,
    unit_square,
)
from .errors import InfeasibleError, ParameterError, PlbError
from .quadrature import area as quadrature_area
from .quadrature import build_rule, composition_norm, lalpha_norm

_ROUTES = ("B", "A", "C", "snowflake")


def _quiet() -> bool:
    return os.environ.get("PLB_QUIET", "") == "1"


def _progress(msg: str) -> None:
    if not _quiet():
        print(msg, file=sys.stderr)


def _emit_text(text: str, out) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, out) -> None:
    _emit_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", out)


def _alpha_value(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or 'inf': {text!r}")


def _float_list(text: str):
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        out.append(_alpha_value(piece))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _range_triple(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    return start, stop, step


# ---------------------------------------------------------------------------
# domain specification strings


def _parse_domain_spec(text: str):
    """disc | square | epicycloid:N | snowflake:t=..,depth=..[,choices=..] | csv:PATH"""
    if text == "disc":
        return ("disc", {})
    if text == "square":
        return ("square", {})
    if text.startswith("epicycloid:"):
        tail = text.split(":", 1)[1]
        try:
            n = int(tail)
        except ValueError:
            raise ParameterError(f"epicycloid spec needs an integer, got {tail!r}")
        return ("epicycloid", {"n": n})
    if text.startswith("snowflake:"):
        kv = {}
        for piece in text.split(":", 1)[1].split(","):
            if not piece:
                continue
            key, _, val = piece.partition("=")
            if not _:
                raise ParameterError(f"snowflake spec pieces are key=value, got {piece!r}")
            kv[key.strip()] = val.strip()
        unknown = set(kv) - {"t", "depth", "choices"}
        if unknown:
            raise ParameterError(f"unknown snowflake keys: {sorted(unknown)}")
        if "t" not in kv or "depth" not in kv:
            raise ParameterError("snowflake spec needs at least t=<scale>,depth=<stage>")
        return ("snowflake", {
            "t": float(kv["t"]),
            "depth": int(kv["depth"]),
            "choices": kv.get("choices", "all_tent"),
        })
    if text.startswith("csv:"):
        return ("csv", {"path": text.split(":", 1)[1]})
    raise ParameterError(
        f"unknown domain spec {text!r}; expected disc, square, epicycloid:N, "
        "snowflake:t=..,depth=.., or csv:PATH"
    )


def _conformal_domain(kind: str, params: dict):
    if kind == "disc":
        return make_unit_disc()
    if kind == "epicycloid":
        return make_epicycloid(params["n"])
    return None


def _curve_for_spec(kind: str, params: dict, m, h):
    """Boundary polyline of the specified region; m=None picks a sampling
    with chords near the mesh edge length h."""
    domain = _conformal_domain(kind, params)
    if domain is not None:
        if m is None:
            probe = boundary_polyline(domain, 1024, spacing="chord")
            d = np.diff(np.vstack([probe.vertices, probe.vertices[:1]]), axis=0)
            perimeter = float(np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2).sum())
            m = int(min(4096, max(64, math.ceil(perimeter / h))))
        return boundary_polyline(domain, m, spacing="chord")
    if kind == "square":
        return unit_square()
    if kind == "snowflake":
        return generate_rohde_snowflake(
            SnowflakeParams(t=params["t"], depth=params["depth"], choices=params["choices"])
        )
    if kind == "csv":
        return curve_from_csv(params["path"])
    raise ParameterError(f"no boundary curve for domain kind {kind!r}")


def _area_for_spec(kind: str, params: dict, curve) -> float:
    domain = _conformal_domain(kind, params)
    if domain is not None and domain.known_area is not None:
        return domain.known_area
    if domain is not None:
        return quadrature_area(domain)
    return polygon_area(curve.vertices)


# ---------------------------------------------------------------------------
# subcommand handlers


def _route_bound_from_args(args) -> BoundReport:
    p = args.p
    if args.route == "B":
        if args.phi_norm is None:
            raise ParameterError("route B needs --phi-norm (the derivative norm)")
        if args.area is None:
            raise ParameterError("route B needs --area")
        alpha = args.alpha if args.alpha is not None else math.inf
        return regularity_bound(p, alpha, args.area, args.phi_norm)
    if args.route == "A":
        if (args.K is None) == (args.beta is None):
            raise ParameterError("route A needs exactly one of --K or --beta")
        if args.area is None:
            raise ParameterError("route A needs --area")
        if args.K is not None:
            spec = make_quasidisc_spec(args.K, args.area, provenance="direct")
        else:
            spec = make_quasidisc_spec(star_coefficient(args.beta), args.area,
                                       provenance=f"star(beta={args.beta:g})")
        return quasidisc_bound(p, spec)
    if args.route == "C":
        if args.C is None:
            raise ParameterError("route C needs --C (the three-point constant)")
        if args.area is None:
            raise ParameterError("route C needs --area")
        return ahlfors_bound(p, args.C, args.area)
    if args.route == "snowflake":
        if args.t is None:
            raise ParameterError("the snowflake route needs --t")
        if args.area is None:
            raise ParameterError("the snowflake route needs --area")
        return snowflake_bound(p, args.t, args.area)
    raise ParameterError(f"unknown route {args.route!r}")


def _cmd_bound(args) -> int:
    report = _route_bound_from_args(args)
    payload = report.to_dict()
    if args.log_only:
        payload["mu_lower"] = None
    _emit_json(payload, args.out)
    return 0


def _cmd_norms(args) -> int:
    kind, params = _parse_domain_spec(args.domain)
    domain = _conformal_domain(kind, params)
    if domain is None:
        raise ParameterError(
            f"norms needs a catalog conformal domain (disc or epicycloid:N), got {args.domain!r}"
        )
    rule = build_rule(radial=args.radial, angular=args.angular)
    lines = ["metric,alpha,p,q,value,ceiling"]
    for a in args.alpha:
        val = lalpha_norm(domain, a, rule=rule)
        a_txt = "inf" if math.isinf(a) else repr(a)
        lines.append(f"lalpha_norm,{a_txt},,,{val!r},")
    for p in args.p:
        for q in args.q:
            cn = composition_norm(domain, p, q, rule=rule)
            lines.append(f"composition_norm,,{p!r},{q!r},{cn.value!r},{cn.analytic_bound!r}")
    _emit_text("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_curve_metrics(args) -> int:
    curve = curve_from_csv(args.in_path)
    metrics = curve_metrics(curve)
    payload = metrics.to_dict()
    if args.oracle:
        from .curves import ahlfors_constant_naive, bounded_turning_constant_naive

        naive_bt = bounded_turning_constant_naive(curve)
        naive_ac = ahlfors_constant_naive(curve)
        payload["oracle"] = {
            "bounded_turning": naive_bt,
            "ahlfors": naive_ac,
            "matches": bool(
                naive_bt == metrics.bounded_turning and naive_ac == metrics.ahlfors
            ),
        }
    _emit_json(payload, args.out)
    return 0


def _cmd_domain(args) -> int:
    kind, params = _parse_domain_spec(args.spec)
    if kind == "csv":
        curve = curve_from_csv(params["path"])
    elif kind in ("square", "snowflake"):
        curve = _curve_for_spec(kind, params, None, None)
    else:
        m = args.m if args.m is not None else 512
        curve = boundary_polyline(_conformal_domain(kind, params), m, spacing=args.spacing)
    v = curve.vertices
    payload = {
        "spec": args.spec,
        "n_vertices": int(v.shape[0]),
        "area": polygon_area(curve),
        "bbox": [float(v[:, 0].min()), float(v[:, 1].min()),
                 float(v[:, 0].max()), float(v[:, 1].max())],
        "files": {},
    }
    if args.csv:
        curve_to_csv(curve, args.csv)
        payload["files"]["csv"] = args.csv
    if args.svg:
        curve_to_svg(curve, args.svg)
        payload["files"]["svg"] = args.svg
    _emit_json(payload, args.out)
    return 0


def _cmd_verify(args) -> int:
    from .eigensolver import verify_bound

    kind, params = _parse_domain_spec(args.domain)
    curve = _curve_for_spec(kind, params, args.m, args.h)
    area = _area_for_spec(kind, params, curve)
    p = args.p

    notes_extra = []
    if args.route == "B":
        domain = _conformal_domain(kind, params)
        if domain is None:
            raise ParameterError("route B verification needs a conformal catalog domain")
        alpha = args.alpha if args.alpha is not None else math.inf
        norm = lalpha_norm(domain, alpha)
        report = regularity_bound(p, alpha, area, norm)
    elif args.route == "A":
        if (args.K is None) == (args.beta is None):
            raise ParameterError("route A needs exactly one of --K or --beta")
        K = args.K if args.K is not None else star_coefficient(args.beta)
        prov = "direct" if args.K is not None else f"star(beta={args.beta:g})"
        report = quasidisc_bound(p, make_quasidisc_spec(K, area, provenance=prov))
    elif args.route == "C":
        C = args.C
        if C is None:
            _progress("computing the three-point constant of the boundary polyline")
            C = ahlfors_constant(curve)
            notes_extra.append(f"three-point constant measured on the polyline: {C!r}")
        report = ahlfors_bound(p, C, area)
    elif args.route == "snowflake":
        if kind != "snowflake":
            raise ParameterError("the snowflake route verifies snowflake domains only")
        report = snowflake_bound(p, params["t"], area)
    else:
        raise ParameterError(f"unknown route {args.route!r}")

    _progress(f"meshing (h={args.h}) and minimizing the Rayleigh quotient (p={p})")
    ver = verify_bound(report, curve, args.h, seed=args.seed,
                       n_random_starts=args.starts, max_iter=args.max_iter)
    payload = ver.to_dict()
    if notes_extra:
        payload["notes"] = notes_extra
    if args.mesh_off:
        with open(args.mesh_off, "w") as f:
            f.write(ver.mesh.to_off())
        payload["mesh_off"] = args.mesh_off
    _emit_json(payload, args.out)
    return 0


def _cmd_sweep(args) -> int:
    if args.route != "A":
        raise ParameterError("sweep currently supports route A over a K range")
    if args.K is None:
        raise ParameterError("sweep needs --K start:stop:step")
    start, stop, step = args.K
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    lines = ["K,log10_spectral_factor"]
    for i in range(count):
        k = start + i * step
        report = quasidisc_bound(args.p, make_quasidisc_spec(k, 1.0, provenance="sweep"))
        lines.append(f"{k!r},{report.spectral_factor.log10_json()!r}")
    _emit_text("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    # argparse reserves exit code 2 for usage errors; here 2 means
    # "infeasible", so usage problems exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_route_flags(sp):
    sp.add_argument("--route", required=True, choices=_ROUTES,
                    help="B: conformal regularity; A: quasidisc; C: three-point; snowflake")
    sp.add_argument("--p", type=float, required=True, help="integrability exponent")
    sp.add_argument("--alpha", type=_alpha_value, default=None,
                    help="regularity exponent for route B (number or 'inf')")
    sp.add_argument("--K", type=float, default=None, help="quasiconformality coefficient (route A)")
    sp.add_argument("--beta", type=float, default=None,
                    help="star-domain parameter in [0,1); alternative to --K")
    sp.add_argument("--C", type=float, default=None, help="three-point constant (route C)")
    sp.add_argument("--t", type=float, default=None, help="snowflake scale in [1/4, 1/2)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plb", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    b = sub.add_parser("bound",
                       help="evaluate a lower-bound route from explicit inputs")
    _add_route_flags(b)
    b.add_argument("--area", type=float, default=None, help="domain area")
    b.add_argument("--phi-norm", dest="phi_norm", type=float, default=None,
                   help="derivative norm for route B")
    b.add_argument("--log-only", action="store_true", help="omit the linear value from the report")
    b.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    b.set_defaults(func=_cmd_bound)

    n = sub.add_parser("norms",
                       help="quadrature norms of a catalog domain as CSV")
    n.add_argument("--domain", required=True, help="disc or epicycloid:N")
    n.add_argument("--alpha", type=_float_list, default=[2.0, 3.0, 6.0],
                   help="comma list of exponents (may include inf)")
    n.add_argument("--p", type=_float_list, default=[2.5, 3.0, 4.0, 6.0])
    n.add_argument("--q", type=_float_list, default=[1.0, 1.5, 2.0])
    n.add_argument("--radial", type=int, default=64, help="radial quadrature nodes")
    n.add_argument("--angular", type=int, default=256, help="angular quadrature nodes")
    n.add_argument("--out", default=None)
    n.set_defaults(func=_cmd_norms)

    c = sub.add_parser("curve-metrics",
                       help="geometric constants of a polyline CSV")
    c.add_argument("--in", dest="in_path", required=True, help="curve CSV with x,y header")
    c.add_argument("--oracle", action="store_true",
                   help="also run the cubic-time reference computation and compare")
    c.add_argument("--out", default=None)
    c.set_defaults(func=_cmd_curve_metrics)

    d = sub.add_parser("domain",
                       help="generate a boundary curve and export it")
    d.add_argument("--spec", required=True,
                   help="disc | square | epicycloid:N | snowflake:t=..,depth=..[,choices=..] | csv:PATH")
    d.add_argument("--m", type=int, default=None, help="boundary samples for conformal domains")
    d.add_argument("--spacing", choices=("parameter", "chord"), default="parameter")
    d.add_argument("--csv", default=None, help="write the curve as CSV here")
    d.add_argument("--svg", default=None, help="write the curve as SVG here")
    d.add_argument("--out", default=None)
    d.set_defaults(func=_cmd_domain)

    v = sub.add_parser("verify",
                       help="check a bound against the finite-element oracle")
    v.add_argument("--domain", required=True,
                   help="disc | square | epicycloid:N | snowflake:t=..,depth=.. | csv:PATH")
    _add_route_flags(v)
    v.add_argument("--h", type=float, required=True, help="target mesh edge length")
    v.add_argument("--m", type=int, default=None,
                   help="boundary samples for conformal domains (default: match h)")
    v.add_argument("--starts", type=int, default=4,
                   help="random minimization starts added to the 4 deterministic ones")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-iter", dest="max_iter", type=int, default=500)
    v.add_argument("--mesh-off", dest="mesh_off", default=None,
                   help="write the triangulation as OFF text here")
    v.add_argument("--out", default=None)
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("sweep",
                       help="tabulate a route across a parameter range as CSV")
    s.add_argument("--route", required=True, choices=_ROUTES)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--K", type=_range_triple, default=None, help="start:stop:step")
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_sweep)

    return parser


def _inject_config(argv: list) -> list:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ParameterError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        raise ParameterError("--config requires a subcommand")
    tokens = []
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ParameterError(f"config lines are key=value, got {line!r}")
            tokens.extend([f"--{key.strip()}", val.strip()])
    # config tokens go right after the subcommand so explicit flags win
    return [rest[0]] + tokens + rest[1:]


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        argv = _inject_config(list(argv))
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except InfeasibleError as exc:
        _emit_json({
            "feasible": False,
            "constraint": exc.constraint,
            "message": str(exc),
        }, None)
        return 2
    except PlbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
