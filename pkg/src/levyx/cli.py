"""Command-line front end.

Exit codes: 0 success, 2 validation failure, 3 numerical failure,
64 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import LevyxError, NumericalError, ValidationError
from .exponents import LaplaceExponent, from_spec, to_spec, validate

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64
_EPS = np.finfo(float).eps


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ------------------------------------------------------------ serialisation

def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written by ``fmt``."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, (bool, type(None), str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def to_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(fmt(v) if isinstance(v, (float, int, np.floating, np.integer))
                           and not isinstance(v, bool) else str(v) for v in r) + "\n")
    return buf.getvalue()


# ------------------------------------------------------------ specs

def load_spec(path: str) -> LaplaceExponent:
    """Read and validate an exponent spec file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"spec file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return from_spec(data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def emit_spec(psi: LaplaceExponent) -> str:
    return dumps(to_spec(psi))


def spec_hash(psi: LaplaceExponent | None) -> str | None:
    if psi is None:
        return None
    canon = json.dumps(to_spec(psi), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass
class RunManifest:
    command: list
    spec_hash: str | None
    config: dict
    tool_version: str
    seed: int | None
    outputs: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------ parsing helpers

def parse_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def parse_range(text: str) -> np.ndarray:
    """'a:b:h' inclusive of b, or a comma list."""
    if ":" not in text:
        return np.array(parse_list(text))
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError(f"range must be a:b:h, got {text!r}")
    try:
        a, b, h = (float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"range must be numeric, got {text!r}") from None
    if not h > 0 or b < a:
        raise ValidationError("range needs h > 0 and b >= a")
    n = int(math.floor((b - a) / h + 1e-9)) + 1
    return a + h * np.arange(n)


def _est_error(psi: LaplaceExponent, v: float) -> float:
    """Rounding level for closed forms, quadrature tolerance for triples."""
    from .exponents import TripleExponent
    rel = 1e-10 if isinstance(psi, TripleExponent) else 8 * _EPS
    return rel * max(1.0, abs(v))


# ------------------------------------------------------------ commands
#
# Each command returns (payload, kind, status, exponent) with kind 'json' or 'csv'.

def cmd_exponent(a):
    psi = load_spec(a.spec)
    if a.action == "validate":
        grid = parse_range(a.grid)
        rep = validate(psi, grid, a.tol or 1e-12)
        payload = {"label": psi.describe(), **rep.to_json()}
        return payload, "json", EXIT_OK if rep.passed else EXIT_VALIDATION, psi
    if a.action == "emit":
        return to_spec(psi), "json", EXIT_OK, psi
    us = parse_list(a.u)
    rows = []
    for u in us:
        v = float(np.real(psi(u)))
        rows.append({"u": u, "value": v, "est_error": _est_error(psi, v)})
    return {"label": psi.describe(), "rows": rows}, "json", EXIT_OK, psi


def cmd_transform(a):
    from .transform import t_composed, t_transform
    psi = load_spec(a.spec)
    tp = t_composed(psi, a.gamma, a.delta, a.beta) if a.gamma else t_transform(psi, a.delta, a.beta)
    rows = []
    for u in parse_list(a.eval):
        v = float(np.real(tp(u)))
        rows.append({"u": u, "value": v, "est_error": _est_error(tp, v)})
    payload = rows[0] if len(rows) == 1 else {"label": tp.describe(), "rows": rows}
    return payload, "json", EXIT_OK, psi


def cmd_scale(a):
    from .scale import scale_function
    psi = load_spec(a.spec)
    W = scale_function(psi, a.strategy, a.tol or 1e-8)
    rows = []
    for x in parse_range(a.x):
        v, e = W.evaluate(float(x))
        rows.append((float(x), v, W.strategy, e))
    return ("csv", ["x", "W(x)", "strategy", "est_error"], rows), "csv", EXIT_OK, psi


def cmd_expfun(a):
    from . import expfunctional as ef
    if a.action == "density":
        if a.example != "poisson":
            raise ValidationError(f"unknown density example {a.example!r}; known: poisson")
        f = ef.poisson_qseries_density(a.q)
        half = ef.poisson_qseries_density(a.q, max_terms=100)
        rows = [(float(x), f(float(x)), abs(f(float(x)) - half(float(x))))
                for x in parse_range(a.x_grid)]
        return ("csv", ["x", "f(x)", "est_error"], rows), "csv", EXIT_OK, None
    if not a.spec:
        raise ValidationError(f"expfun {a.action} needs --spec")
    psi = load_spec(a.spec)
    if a.action == "moments":
        lad = ef.sub_moments(psi, a.n) if psi.is_subordinator else ef.sn_neg_moments(psi, a.n)
        out = lad.to_json()
        for row, n in zip(out["moments"], lad.orders):
            row["est_error"] = 4 * _EPS * (n + 1) * abs(row["value"])
        return out, "json", EXIT_OK, psi
    if a.delta is None:
        raise ValidationError("factorize needs --delta")
    fac = ef.beta_factorization(psi, a.delta)
    return fac.to_json(), "json", EXIT_OK, psi


def cmd_pssmp(a):
    from . import pssmp
    psi = load_spec(a.spec)
    if a.action == "entrance":
        law = pssmp.entrance_moments(psi, a.n)
        out = law.to_json()
        try:
            fac = pssmp.entrance_factorization(psi)
            alt = [fac.moment(n) for n in law.orders]
        except LevyxError:
            alt = [None] * len(law.orders)
        out["factorization"] = [{"n": n, "value": v,
                                 "est_error": None if v is None else abs(v - m)}
                                for n, v, m in zip(law.orders, alt, law.moments)]
        return out, "json", EXIT_OK, psi
    if a.action == "intertwine":
        rep = pssmp.intertwining_factor(psi, a.delta, a.case, a.n)
        return rep.to_json(), a.report, EXIT_OK if rep.passed else EXIT_NUMERICAL, psi
    # series
    from .expfunctional import ek_apply
    p = pssmp.eigen_series(psi, a.terms)
    x = a.x
    sv = p.evaluate(x)
    out = {"label": p.label, "x": x, "value": sv.value, "est_error": sv.error,
           "terms": p.N}
    if a.ek:
        al, de = parse_list(a.ek)
        q = pssmp.ek_on_series(p, al, de)
        qv = q.evaluate(x)
        quad = ek_apply(p, al, de, x, a.tol or 1e-10)
        out["ek"] = {"alpha": al, "delta": de, "series": qv.value, "est_error": qv.error,
                     "quadrature": quad.value, "discrepancy": abs(qv.value - quad.value)}
    return out, "json", EXIT_OK, psi


def _sim_config(a):
    from .montecarlo import SimConfig
    kw = {"seed": a.seed if a.seed is not None else 0,
          "paths": a.paths if a.paths is not None else 10000}
    if a.dt is not None:
        kw["dt"] = a.dt
    if a.eta is not None:
        kw["eta"] = a.eta
    return SimConfig(**kw)


def cmd_mc(a):
    from . import montecarlo as mc
    from .expfunctional import exp_functional_factor, sub_moments
    psi = load_spec(a.spec)
    cfg = _sim_config(a)
    if a.action == "expfun":
        s = mc.sample_exp_functional(psi, cfg)
        targets = {}
        try:
            if psi.is_subordinator:
                lad = sub_moments(psi, 2)
                targets = {1: lad[1], 2: lad[2]}
            else:
                fac = exp_functional_factor(psi)
                targets = {k: fac.moment(k) for k in (1, 2)}
        except LevyxError:
            targets = {}
        targets = {k: v for k, v in targets.items() if np.isfinite(v)}
        rep = mc.mc_compare(s.samples, moments=targets, threshold=a.threshold)
        out = {"summary": s.summary(), "config": cfg.to_json(), "config_hash": cfg.digest(),
               "compare": rep.to_json()}
        return out, a.report, EXIT_OK if rep.passed else EXIT_NUMERICAL, psi
    from .transform import t_beta
    us = parse_list(a.u)
    s = mc.sliced_splitting(psi, a.beta, a.t, cfg)
    tb = t_beta(psi, a.beta)
    targets = {u: math.exp(-a.t * float(tb(u))) for u in us}
    rep = mc.mc_compare(s.spliced, laplace=targets, threshold=a.threshold)
    out = {"beta": a.beta, "t": a.t, "eta": s.eta, "config": cfg.to_json(),
           "config_hash": cfg.digest(), "compare": rep.to_json()}
    return out, a.report, EXIT_OK if rep.passed else EXIT_NUMERICAL, psi


def cmd_verify(a):
    from . import verify
    only = {int(v) for v in parse_list(a.only)} if a.only else None
    results = verify.run_all(quick=a.quick, only=only, echo=lambda s: print(s, file=sys.stderr))
    failed = [r.number for r in results if not r.passed]
    out = {"quick": a.quick, "passed": not failed, "failed": failed,
           "criteria": [r.to_json() for r in results]}
    status = EXIT_NUMERICAL if (failed and a.strict) else EXIT_OK
    return out, "json", status, None


# ------------------------------------------------------------ parser

def _globals(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="RNG seed")
    p.add_argument("--paths", type=int, default=d, help="Monte Carlo paths")
    p.add_argument("--tol", type=float, default=d, help="numerical tolerance")
    p.add_argument("--out", default=d,
                   help="output file (a manifest is written next to it), or 'csv'/'json' for stdout")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    _globals(common, suppress=True)
    top = _Parser(prog="levyx", description="Transformed Laplace exponents, scale functions, "
                  "exponential functionals and pssMp entrance laws.")
    top.add_argument("--version", action="version", version=f"levyx {__version__}")
    _globals(top, suppress=False)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", parents=[common], help="evaluate or validate an exponent")
    p.add_argument("action", choices=["eval", "validate", "emit"])
    p.add_argument("--spec", required=True)
    p.add_argument("--u", default="0.5,1,2")
    p.add_argument("--grid", default="0:5:0.25")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("transform", parents=[common], help="apply T_{delta,beta}")
    p.add_argument("action", choices=["apply"])
    p.add_argument("--spec", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--eval", required=True, help="comma list of u")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("scale", parents=[common], help="scale function tables")
    p.add_argument("action", choices=["table"])
    p.add_argument("--spec", required=True)
    p.add_argument("--strategy", default="auto", choices=["auto", "closed", "transform", "inversion"])
    p.add_argument("--x", default="0:5:0.1", help="a:b:h or comma list")
    p.set_defaults(func=cmd_scale)

    p = sub.add_parser("expfun", parents=[common], help="exponential functionals")
    p.add_argument("action", choices=["moments", "density", "factorize"])
    p.add_argument("--spec")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--example", default="poisson")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--x-grid", dest="x_grid", default="0.1:5:0.1")
    p.add_argument("--delta", type=float)
    p.set_defaults(func=cmd_expfun)

    p = sub.add_parser("pssmp", parents=[common], help="entrance laws and intertwinings")
    p.add_argument("action", choices=["entrance", "intertwine", "series"])
    p.add_argument("--spec", required=True)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--case", type=int, choices=[1, 2, 3], default=1)
    p.add_argument("--report", choices=["json"], default="json")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--ek", help="alpha,delta")
    p.add_argument("--terms", type=int, default=500)
    p.set_defaults(func=cmd_pssmp)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo checks")
    p.add_argument("action", choices=["expfun", "slice"])
    p.add_argument("--spec", required=True)
    p.add_argument("--report", choices=["json"], default="json")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--u", default="0.5,1,2")
    p.add_argument("--dt", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--threshold", type=float, default=3.0, help="z-score threshold")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", parents=[common], help="acceptance suite")
    p.add_argument("action", choices=["all"])
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", help="comma list of criterion numbers")
    p.add_argument("--strict", action="store_true", help="exit 3 if any criterion fails")
    p.set_defaults(func=cmd_verify)
    return top


# ------------------------------------------------------------ dispatch

def _render(payload, kind: str, manifest_name: str | None) -> str:
    if kind == "csv":
        _, header, rows = payload
        text = to_csv(header, rows)
        return (f"# manifest: {manifest_name}\n" + text) if manifest_name else text
    if manifest_name and isinstance(payload, dict):
        payload = {**payload, "manifest": manifest_name}
    return dumps(payload) + "\n"


def _write(path: str, text: str):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def cmd_dispatch(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        a = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        payload, kind, status, psi = a.func(a)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LevyxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    out = a.out
    if out in (None, "csv", "json"):
        print(_render(payload, kind, None), end="")
        return status
    mname = os.path.basename(out) + ".manifest.json"
    _write(out, _render(payload, kind, mname))
    config = {k: v for k, v in sorted(vars(a).items()) if k not in ("func", "out")}
    man = RunManifest(argv, spec_hash(psi), config, __version__, a.seed, [os.path.basename(out)])
    _write(os.path.join(os.path.dirname(out), mname), dumps(man.to_json()) + "\n")
    return status


def main(argv: Sequence[str] | None = None) -> int:
    return cmd_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
