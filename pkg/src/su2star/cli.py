"""Command-line front end.

    su2star <command> [--config cfg.json] [--out DIR] [--seed N] [--format csv|json] [--self-test]

Numerical parameters come from the JSON config; ``SU2STAR_THETA``,
``SU2STAR_ORDER`` and ``SU2STAR_TOL`` override theta/order/tol.  Exit status:
0 success, 1 usage or domain error, 2 failed check (a JSON report is emitted).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bch import Momentum, bch, bch_oracle
from .errors import Su2StarError
from .field_theory import (
    LoopConfig,
    commutative_limit_scan,
    tadpole_closed_form,
    tadpole_omega_I,
    trace_convergence_scan,
    traciality_jacobian_residual,
    two_point_kernel_II,
    uv_convergence_scan,
)
from .functionals import (
    constraint_residuals,
    family_from_f,
    kv_functionals,
    rep_from_json,
    weyl_candidate,
)
from .operators import JetFunction, commutator_residual, master_residuals
from .quantization import KONTSEVICH, omega, star_kernel, xi
from .selftest import SUITES, Check, random_momenta, run_suite

COMMANDS = ("bch", "repr-check", "quantize", "star", "trace-audit", "loop", "limit-scan")

DEFAULT_TOL = {
    "bch": 1e-9,
    "repr-check": 1e-10,
    "quantize": 1e-6,
    "star": 1e-9,
    "trace-audit": 0.02,
    "loop": 1e-4,
    "limit-scan": 0.1,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class Result:
    columns: list
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    theta: float
    order: int
    tol: float
    seed: int
    params: dict


def _env_override(name, cast, current):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return current
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"{name}={raw!r} is not a valid {cast.__name__}") from None


def load_config(command: str, path, seed) -> RunConfig:
    params = {}
    if path is not None:
        try:
            params = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path}: {exc}") from None
        if not isinstance(params, dict):
            raise UsageError("config must be a JSON object")
    theta = _env_override("SU2STAR_THETA", float, float(params.get("theta", 1.0)))
    order = _env_override("SU2STAR_ORDER", int, int(params.get("order", 16)))
    tol = _env_override("SU2STAR_TOL", float, float(params.get("tol", DEFAULT_TOL[command])))
    if seed is None:
        seed = int(params.get("seed", 0))
    if not tol > 0:
        raise UsageError("tol must be positive")
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    if command != "loop" and not theta > 0:
        raise UsageError("theta must be positive")
    return RunConfig(command, theta, order, tol, seed, params)


def _rep(cfg: RunConfig):
    p = cfg.params
    family = p.get("family", "kv")
    if family == "kv":
        return kv_functionals(cfg.theta, cfg.order)
    if family == "weyl":
        return weyl_candidate(cfg.theta, cfg.order)
    if family == "custom":
        if "rep" in p:
            return rep_from_json({**p["rep"], "theta": cfg.theta})
        return family_from_f(cfg.theta, p.get("f", [1]), cfg.order)
    raise UsageError(f"unknown family {family!r}")


def _momenta(cfg: RunConfig, key: str, n_default: int, max_angle: float, rng):
    if key in cfg.params:
        vals = cfg.params[key]
        vals = [vals] if vals and not isinstance(vals[0], (list, tuple)) else vals
        return [Momentum(v, cfg.theta) for v in vals]
    return random_momenta(rng, int(cfg.params.get("samples", n_default)), cfg.theta, max_angle)


# ---------------------------------------------------------------------------
# commands


def cmd_bch(cfg: RunConfig, rng) -> Result:
    ps = _momenta(cfg, "p", 1, 1.2, rng)
    qs = _momenta(cfg, "q", len(ps), 1.2, rng)
    if len(ps) != len(qs):
        raise UsageError("p and q lists differ in length")
    res = Result(["px", "py", "pz", "qx", "qy", "qz", "Bx", "By", "Bz", "oracle_dev"])
    worst = 0.0
    for p, q in zip(ps, qs):
        B = bch(p, q)
        dev = float(np.max(np.abs(B.vec - bch_oracle(p, q).vec)))
        worst = max(worst, dev)
        res.rows.append([*p.vec, *q.vec, *B.vec, dev])
    res.checks.append(Check("oracle_deviation", worst, cfg.tol))
    return res


def cmd_repr_check(cfg: RunConfig, rng) -> Result:
    rep = _rep(cfg)
    th = cfg.theta
    tmin = float(cfg.params.get("t_min", -4.0))
    t = np.linspace(tmin, 0.0, int(cfg.params.get("t_points", 21)))
    r1, r2 = constraint_residuals(rep, t)
    ps = _momenta(cfg, "p", 5, 1.0, rng)
    res = Result(["quantity", "px", "py", "pz", "value"])
    res.rows.append(["constraint_r1", math.nan, math.nan, math.nan, float(np.max(np.abs(r1)))])
    res.rows.append(["constraint_r2", math.nan, math.nan, math.nan, float(np.max(np.abs(r2)))])
    worst_master = [0.0] * 4
    worst_comm = 0.0
    for p in ps:
        norms = master_residuals(rep, p).norms()
        for i, v in enumerate(norms):
            res.rows.append([f"master{i + 1}", *p.vec, v])
            worst_master[i] = max(worst_master[i], v)
        basis = [JetFunction.constant(1.0), JetFunction.plane_wave(p.vec)]
        basis += [JetFunction.monomial(tuple(int(a == b) for b in range(3)), p=p.vec) for a in range(3)]
        c = max(commutator_residual(rep, mu, nu, j).coeff_norm()
                for j in basis for mu, nu in ((0, 1), (1, 2), (2, 0)))
        res.rows.append(["commutator", *p.vec, c])
        worst_comm = max(worst_comm, c)
    res.checks.append(Check("constraints", float(max(np.max(np.abs(r1)), np.max(np.abs(r2)))), cfg.tol))
    for i, v in enumerate(worst_master):
        res.checks.append(Check(f"master{i + 1}", v, cfg.tol))
    res.checks.append(Check("commutator", worst_comm, cfg.tol))
    res.meta = {"family": rep.family, "theta": th, "order": rep.order}
    return res


def cmd_quantize(cfg: RunConfig, rng) -> Result:
    rep = _rep(cfg)
    ps = _momenta(cfg, "p", 5, 2.5, rng)
    res = Result(["px", "py", "pz", "xix", "xiy", "xiz", "omega", "omega_kv_closed"])
    worst_xi = worst_om = 0.0
    for p in ps:
        x = xi(rep, p)
        om = omega(rep, p)
        closed = (math.sin(p.angle) / p.angle) ** 2 if p.angle else 1.0
        res.rows.append([*p.vec, *x.vec, om, closed if rep.family == "kv" else math.nan])
        if rep.family == "kv":
            worst_xi = max(worst_xi, float(np.linalg.norm(x.vec - p.vec)) / max(p.norm, 1e-300))
            worst_om = max(worst_om, abs(om - closed))
    if rep.family == "kv":
        res.checks += [Check("xi_identity", worst_xi, cfg.tol), Check("omega_closed_form", worst_om, cfg.tol)]
    res.checks.append(Check("omega_positive", min(r[6] for r in res.rows), 0.0, above=True))
    return res


def cmd_star(cfg: RunConfig, rng) -> Result:
    kind = cfg.params.get("map", "K")
    if kind == "K":
        map_kind = KONTSEVICH
    elif kind == "Q":
        map_kind = _rep(cfg)
    else:
        raise UsageError(f"map must be 'Q' or 'K', got {kind!r}")
    ps = _momenta(cfg, "p", 1, 1.0, rng)
    qs = _momenta(cfg, "q", len(ps), 1.0, rng)
    if len(ps) != len(qs):
        raise UsageError("p and q lists differ in length")
    res = Result(["px", "py", "pz", "qx", "qy", "qz", "factor", "Bx", "By", "Bz"])
    for p, q in zip(ps, qs):
        k = star_kernel(map_kind, p, q)
        res.rows.append([*p.vec, *q.vec, k.factor, *k.composed.vec])
    res.checks.append(Check("factor_positive", min(r[6] for r in res.rows), 0.0, above=True))
    res.meta = {"map": kind}
    return res


def cmd_trace_audit(cfg: RunConfig, rng) -> Result:
    p = cfg.params
    th = cfg.theta
    res = Result(["kind", "x", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "error"])
    jac = 0.0
    for y in p.get("angles", [0.3, 1.0, 2.0]):
        r = traciality_jacobian_residual(Momentum((y / th, 0.0, 0.0), th))
        res.rows.append(["jacobian", y, math.nan, math.nan, math.nan, math.nan, r])
        jac = max(jac, abs(r))
    scan = trace_convergence_scan(
        theta=th,
        n_waves=int(p.get("n_waves", 5)),
        p_max=float(p.get("p_max", 1.0)),
        L_factors=tuple(p.get("L_factors", (20.0, 40.0, 80.0))),
        width=float(p.get("width", 0.15)),
        seed=cfg.seed,
    )
    for L, lhs, rhs, err in scan.rows:
        res.rows.append(["box", L, lhs.real, lhs.imag, rhs.real, rhs.imag, err])
    res.checks += [Check("jacobian", jac, 1e-5), Check("box_final", scan.final_error, cfg.tol)]
    return res


def cmd_loop(cfg: RunConfig, rng, kind: str) -> Result:
    p = cfg.params
    if kind == "tadpole":
        res = Result(["theta", "m", "Lambda", "omega_I_quad", "omega_I_closed", "rel_err"])
        thetas = p.get("thetas", [cfg.theta])
        masses = p.get("masses", [p.get("m", 1.0)])
        worst = 0.0
        for th in thetas:
            for m in masses:
                lc = LoopConfig(float(th), float(m), float(p.get("cutoff", 1e3)))
                q, c = tadpole_omega_I(lc), tadpole_closed_form(lc)
                err = abs(q / c - 1.0)
                worst = max(worst, err)
                res.rows.append([th, m, lc.cutoff, q, c, err])
        res.checks.append(Check("tadpole_rel_err", worst, cfg.tol))
        return res
    if kind == "uv":
        cutoffs = p.get("cutoffs", [10, 100, 1e3, 1e4])
        lc = LoopConfig(cfg.theta, float(p.get("m", 1.0)), float(max(cutoffs)))
        scan = uv_convergence_scan(lc, cutoffs, tol=float(p.get("cauchy_tol", 1e-5)))
        res = Result(["Lambda", "truncated", "tail", "value"], rows=[list(r) for r in scan.rows])
        res.checks.append(Check("uv_converged", float(scan.converged), 0.5, above=True))
        res.meta = {"verdict": scan.reason}
        return res
    if kind == "kernel2":
        th = cfg.theta
        mom = {k: Momentum(p.get(k, [0.0, 0.0, 0.0]), th) for k in ("p", "k1", "k2")}
        lc = LoopConfig(th, float(p.get("m", 1.0)), float(p.get("cutoff", 1e3)))
        amp, total = two_point_kernel_II(mom["p"], mom["k1"], mom["k2"], lc)
        return Result(["amplitude", "totalx", "totaly", "totalz"], rows=[[amp, *total.vec]])
    raise UsageError(f"unknown loop kind {kind!r}")


def cmd_limit_scan(cfg: RunConfig, rng) -> Result:
    p = cfg.params
    thetas = p.get("thetas", list(np.logspace(-4, -1, 7)))
    scan = commutative_limit_scan(p.get("p", [0.3, 0.5, -0.2]), p.get("q", [0.1, -0.4, 0.6]), thetas)
    res = Result(["theta", "dev_B", "dev_W"], rows=[list(r) for r in scan.rows])
    res.checks += [Check("slope_B", abs(scan.slope_B - 1.0), cfg.tol), Check("slope_W", abs(scan.slope_W - 2.0), cfg.tol)]
    res.meta = {"slope_B": scan.slope_B, "slope_W": scan.slope_W}
    return res


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _json_safe(x):
    if isinstance(x, str):
        return x
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def render(command: str, res: Result, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(res.columns)
        for row in res.rows:
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()
    doc = {
        "command": command,
        "status": "ok" if res.ok else "fail",
        "columns": res.columns,
        "rows": [[_json_safe(x) for x in row] for row in res.rows],
        "checks": [{k: _json_safe(v) if k in ("value", "tol") else v for k, v in c.as_dict().items()}
                   for c in res.checks],
        "meta": {k: _json_safe(v) if isinstance(v, (int, float)) else v for k, v in res.meta.items()},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report(command: str, res: Result) -> str:
    doc = {
        "command": command,
        "status": "ok" if res.ok else "fail",
        "checks": [{k: _json_safe(v) if k in ("value", "tol") else v for k, v in c.as_dict().items()}
                   for c in res.checks],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="directory for output files")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--self-test", action="store_true", help="run the reduced property suite")
    parser = _Parser(prog="su2star", description="su(2) star-products and one-loop audits")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "loop":
            sp.add_argument("kind", nargs="?", choices=("tadpole", "uv", "kernel2"), default="tadpole")
    return parser


_HANDLERS = {
    "bch": cmd_bch,
    "repr-check": cmd_repr_check,
    "quantize": cmd_quantize,
    "star": cmd_star,
    "trace-audit": cmd_trace_audit,
    "limit-scan": cmd_limit_scan,
}


def run(args) -> int:
    cfg = load_config(args.command, args.config, args.seed)
    if args.self_test:
        res = Result(["check", "value", "tol", "passed"])
        res.checks = run_suite(args.command, cfg.seed, cfg.theta)
        res.rows = [[c.name, c.value, c.tol, str(c.passed)] for c in res.checks]
    else:
        rng = np.random.default_rng(cfg.seed)
        if args.command == "loop":
            res = cmd_loop(cfg, rng, args.kind)
        else:
            res = _HANDLERS[args.command](cfg, rng)
    text = render(args.command, res, args.format)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        _write(out, f"{args.command}.{args.format}", text)
        _write(out, f"{args.command}_report.json", report(args.command, res))
    if not res.ok:
        if args.format == "csv":
            sys.stderr.write(report(args.command, res))
        return 2
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except UsageError as exc:
        print(f"su2star: usage error: {exc}", file=sys.stderr)
        return 1
    except (Su2StarError, ValueError, KeyError, TypeError) as exc:
        print(f"su2star: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
