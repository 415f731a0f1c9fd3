"""Command-line front end: petal-lab {analyze, orbit, parabolic, phi-delta, selftest}."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import acceptance
from . import conformality as cf
from . import parabolic as pb
from . import semigroup as sg
from .domains import (BoundaryProfile, Const, HalfPlane, PowerTail, ProfileDomain, Segment, Strip,
                      TwoSlit, widened_strip)
from .errors import DomainError, InputError, PetalLabError
from .hypgeo import HALF_PI, StripSpec

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNDECIDED = 2
SEED_ENV = "PETAL_LAB_SEED"


# ---------------------------------------------------------------- domain specs


def _num(obj: dict, key: str, path: str, default: Optional[float] = None) -> float:
    if key not in obj:
        if default is None:
            raise InputError(f"{path}.{key}: required field missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InputError(f"{path}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _strip(obj: dict, path: str) -> StripSpec:
    a = _num(obj, "a", path, -HALF_PI)
    b = _num(obj, "b", path, HALF_PI)
    if not a < b:
        raise InputError(f"{path}: need a < b (got a={a}, b={b})")
    return StripSpec(a, b)


def _segments(items: Any, path: str) -> BoundaryProfile:
    if not isinstance(items, list):
        raise InputError(f"{path}: expected a list of segments")
    segs = []
    for k, item in enumerate(items):
        p = f"{path}[{k}]"
        if not isinstance(item, dict):
            raise InputError(f"{p}: expected an object")
        t = _num(item, "t", p)
        shape = item.get("shape")
        if not isinstance(shape, dict) or len(shape) != 1:
            raise InputError(f"{p}.shape: expected {{\"const\": v}} or {{\"tail\": {{\"c\": c, \"p\": p}}}}")
        if "const" in shape:
            v = _num(shape, "const", f"{p}.shape")
            if v < 0:
                raise InputError(f"{p}.shape.const: must be nonnegative")
            segs.append(Segment(t, Const(v)))
        elif "tail" in shape:
            tail = shape["tail"]
            if not isinstance(tail, dict):
                raise InputError(f"{p}.shape.tail: expected an object")
            c = _num(tail, "c", f"{p}.shape.tail")
            q = _num(tail, "p", f"{p}.shape.tail")
            segs.append(Segment(t, PowerTail(c, q)))
        else:
            raise InputError(f"{p}.shape: unknown shape {next(iter(shape))!r}")
    try:
        prof = BoundaryProfile(segs)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
    # values must be non-decreasing left to right
    vals = [float(v) for s in prof.segments for v in (prof.left_limit(s.t), prof(s.t))]
    if any(b < a - 1e-15 for a, b in zip(vals, vals[1:])):
        raise InputError(f"{path}: gap profile must be non-decreasing")
    return prof


def parse_domain(obj: Any, path: str = "$"):
    """Build a domain from its JSON description; errors name the offending field."""
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected an object")
    kind = obj.get("kind")
    if kind == "strip":
        s = _strip(obj, path)
        return Strip(s.a, s.b)
    if kind == "half_plane":
        return HalfPlane(_num(obj, "height", path, 0.0))
    if kind == "widened_strip":
        d = _num(obj, "delta", path)
        if not d > 0:
            raise InputError(f"{path}.delta: must be positive")
        return widened_strip(d)
    if kind == "two_slit":
        return TwoSlit(_strip(obj, path), _num(obj, "slit_end", path, 0.0))
    if kind == "profile":
        return ProfileDomain(_strip(obj, path), _segments(obj.get("upper", []), f"{path}.upper"),
                             _segments(obj.get("lower", []), f"{path}.lower"))
    raise InputError(f"{path}.kind: expected one of strip, half_plane, widened_strip, two_slit, "
                     f"profile (got {kind!r})")


def load_domain(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_domain(obj)


# ---------------------------------------------------------------- helpers


def _config(args) -> cf.RunConfig:
    seed = args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return cf.RunConfig(tolerance=args.tol, mc_walks=args.walks, seed=seed,
                        output_format=args.format, threads=args.threads)


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(x) -> str:
    return "" if x is None else repr(float(x))


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    config = _config(args)
    domain = load_domain(args.spec)
    point = complex(*args.point) if args.point else None
    report = cf.assemble_report(domain, point, config)
    if config.output_format == "json":
        text = _json(report.to_dict())
    else:
        rows = [(c.name, c.classification, _g(c.value) if math.isfinite(c.value) else c.value,
                 _g(c.error) if math.isfinite(c.error) else c.error, c.exact)
                for c in sorted(report.criteria, key=lambda c: c.name)]
        text = _csv(rows, ["name", "classification", "value", "error", "exact"])
    _emit(text, args.out)
    if args.integrand_csv:
        _emit(integrand_table(domain, report.base_point), args.integrand_csv)
    return EXIT_OK if report.verdict in (cf.CONFORMAL, cf.NON_CONFORMAL) else EXIT_UNDECIDED


def integrand_table(domain, w0: complex, t_min: float = -64.0, samples: int = 129) -> str:
    """Plot data: the strip-side integrand against t, plus its running integral."""
    ts = np.linspace(0.0, t_min, samples)
    if isinstance(domain, ProfileDomain):
        vals = [max(float(domain.lower(t)), float(domain.upper(t))) for t in ts]
        header = ["t", "delta"]
    else:
        vals = [float(cf.exact_log_ratio(domain, w0 + t)) for t in ts]
        header = ["t", "log_density_ratio"]
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (np.add(vals[1:], vals[:-1])) * np.abs(np.diff(ts)))])
    return _csv([(_g(t), _g(v), _g(c)) for t, v, c in zip(ts, vals, cum)], header + ["partial_integral"])


def cmd_orbit(args) -> int:
    config = _config(args)
    domain = load_domain(args.spec)
    if isinstance(domain, ProfileDomain) or not hasattr(domain, "to_source"):
        raise InputError("orbit needs a domain with an explicit Koenigs map "
                         "(strip, widened_strip or two_slit)")
    model = sg.model_from_domain(domain)
    petal = sg.petal_of(model)
    header = ["t", "re", "im", "dist_to_alpha", "rate", "slope"]
    p = complex(*args.point)
    try:
        z0 = p if args.disk else complex(model.h_inverse(p)) if domain.contains(p) else None
        if z0 is None or abs(z0) >= 1 or not sg.in_petal(model, z0, petal):
            raise DomainError("point is not in the hyperbolic petal")
    except (PetalLabError, ValueError) as exc:
        _emit(_csv([("error", str(exc))], ["status", "reason"]), args.out)
        return EXIT_INPUT
    ts = np.linspace(0.0, args.t_min, args.samples)
    zs = sg.backward_orbit(model, z0, ts)
    logd = sg.backward_orbit_log_dist(model, z0, ts)
    rows = []
    for k, (t, z, ld) in enumerate(zip(ts, zs, logd)):
        rate = ld / t if t != 0 else None
        slope = (ld - logd[k - 1]) / (t - ts[k - 1]) if k else None
        z = z0 if k == 0 else z
        rows.append((_g(t), _g(z.real), _g(z.imag), _g(math.exp(ld)), _g(rate), _g(slope)))
    _emit(_csv(rows, header), args.out)
    return EXIT_OK


def cmd_parabolic(args) -> int:
    _config(args)
    named = {"koebe": pb.koebe_model, "h2": pb.h2_model, "half_plane": pb.half_plane_model}
    if args.model in named:
        model = named[args.model]()
    else:
        model = pb.model_for_domain(load_domain(args.model))
    rep = pb.classify_parabolic_petal(model)
    _emit(_json(rep.to_dict()), args.out)
    return EXIT_UNDECIDED if rep.conformal is None else EXIT_OK


def cmd_phi_delta(args) -> int:
    config = _config(args)
    e = cf.phi_delta(args.y, args.delta, config.mc_walks, config.seed, method=args.method,
                     threads=config.threads)
    d = {"y": args.y, "delta": args.delta, "method": args.method, "phi": e.mean,
         "std_error": e.std_error, "walks": e.walks, "discarded": e.discarded,
         "inconclusive": e.inconclusive}
    if config.output_format == "json":
        text = _json(d)
    else:
        text = _csv([[d[k] for k in d]], list(d))
    _emit(text, args.out)
    return EXIT_UNDECIDED if e.inconclusive else EXIT_OK


def cmd_selftest(args) -> int:
    config = _config(args)
    results = acceptance.run_all(config, lambda s: print(s, flush=True))
    failed = [r for r in results if not r.passed]
    mc_failed = sum(r.monte_carlo for r in failed)
    print(f"{len(results) - len(failed)}/{len(results)} passed"
          + (f"; {len(failed)} failed ({mc_failed} Monte Carlo)" if failed else ""))
    if args.out:
        _emit(_json([{"number": r.number, "title": r.title, "passed": r.passed,
                      "monte_carlo": r.monte_carlo, "seconds": r.seconds,
                      "measured": json.loads(json.dumps(r.measured, default=str))}
                     for r in results]), args.out)
    return EXIT_OK if not failed else EXIT_INPUT


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-6, help="quadrature tolerance")
    common.add_argument("--walks", type=int, default=100_000, help="Monte Carlo walks")
    common.add_argument("--seed", type=int, default=0,
                        help=f"random seed (the {SEED_ENV} environment variable takes precedence)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="petal-lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="conformality report for a domain spec")
    a.add_argument("spec")
    a.add_argument("--point", type=float, nargs=2, metavar=("RE", "IM"),
                   help="base point w0 in the maximal strip (default: its midline at 0)")
    a.add_argument("--integrand-csv", help="also write the strip-side integrand against t")
    a.set_defaults(func=cmd_analyze)

    o = sub.add_parser("orbit", parents=[common], help="backward orbit trace as CSV")
    o.add_argument("spec")
    o.add_argument("--point", type=float, nargs=2, metavar=("RE", "IM"), default=(0.0, 0.0),
                   help="start point w0 in the Koenigs domain (or z0 in the disk with --disk)")
    o.add_argument("--disk", action="store_true")
    o.add_argument("--t-min", type=float, default=-40.0)
    o.add_argument("--samples", type=int, default=41)
    o.set_defaults(func=cmd_orbit)

    q = sub.add_parser("parabolic", parents=[common], help="classify a parabolic petal")
    q.add_argument("model", help="koebe, h2, half_plane, or a half_plane domain spec file")
    q.set_defaults(func=cmd_parabolic)

    f = sub.add_parser("phi-delta", parents=[common], help="Monte Carlo estimate of Phi_delta(y)")
    f.add_argument("--y", type=float, default=0.0)
    f.add_argument("--delta", type=float, default=0.05)
    f.add_argument("--method", choices=("scored", "plain"), default="scored")
    f.set_defaults(func=cmd_phi_delta)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, DomainError) as exc:
        print(f"petal-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PetalLabError as exc:
        print(f"petal-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED


if __name__ == "__main__":
    sys.exit(main())
