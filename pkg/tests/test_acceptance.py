"""Acceptance suite: thirteen criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from su2star.bch import Momentum, bch, bch_oracle, translation_jacobian
from su2star.field_theory import (
    LoopConfig,
    commutative_limit_scan,
    tadpole_closed_form,
    tadpole_omega_I,
    trace_convergence_scan,
    two_point_kernel_II,
    uv_convergence_scan,
)
from su2star.functionals import (
    G_series,
    constraint_residuals,
    kv_functionals,
    phi_inverse,
    phi_matrix,
    riccati_residual,
    weyl_candidate,
)
from su2star.operators import JetFunction, commutator_residual, master_residuals
from su2star.quantization import (
    KONTSEVICH,
    W,
    associativity_residual,
    cocycle_residual,
    harish_chandra_pair,
    kontsevich_multiplier,
    omega,
    xi,
)


def rand_momenta(rng, n, max_angle, theta=1.0):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = max_angle * rng.uniform(0, 1, size=(n, 1)) ** (1 / 3) / theta
    return [Momentum(x, theta) for x in v * r]


def c1():
    rng = np.random.default_rng(101)
    ps, qs = rand_momenta(rng, 1000, 1.2), rand_momenta(rng, 1000, 1.2)
    t0 = time.perf_counter()
    dev = max(np.max(np.abs(bch(p, q).vec - bch_oracle(p, q).vec)) for p, q in zip(ps, qs))
    dt = time.perf_counter() - t0
    return dev < 1e-9 and dt < 5.0, f"max |bch - oracle| = {dev:.2e} over 1000 pairs in {dt:.2f} s"


def c2():
    res = riccati_residual(G_series(12), 11)
    nonzero = sum(c != 0 for c in res)
    return nonzero == 0 and len(res) == 12, f"{nonzero} nonzero rational coefficients through t^11"


def c3():
    worst = 0.0
    for theta in (0.5, 1.0, 2.0):
        r1, r2 = constraint_residuals(kv_functionals(theta), np.linspace(-4.0, 0.0, 21))
        worst = max(worst, np.max(np.abs(r1)), np.max(np.abs(r2)))
    return worst < 1e-10, f"max |r1|, |r2| = {worst:.2e}"


def c4():
    rng = np.random.default_rng(104)
    rep = kv_functionals(1.0)
    worst = max(
        np.max(np.abs(phi_matrix(rep, p) @ phi_inverse(rep, p) - np.eye(3)))
        for p in rand_momenta(rng, 200, 0.9 * math.pi)
    )
    return worst < 1e-10, f"max |phi phi^-1 - I| = {worst:.2e} over 200 momenta"


def c5():
    xi_err = om_err = 0.0
    for theta in (0.5, 1.0, 2.0):
        rep = kv_functionals(theta)
        for y in np.linspace(0.05, 2.99, 25):
            p = Momentum(np.array([1.0, -2.0, 0.5]) / math.sqrt(5.25) * y / theta, theta)
            xi_err = max(xi_err, np.linalg.norm(xi(rep, p).vec - p.vec) / p.norm)
            om_err = max(om_err, abs(omega(rep, p) - (math.sin(y) / y) ** 2))
    ok = xi_err < 1e-6 and om_err < 1e-6
    return ok, f"max rel |xi - p| = {xi_err:.2e}, max |omega - sinc^2| = {om_err:.2e}"


def c6():
    rng = np.random.default_rng(106)
    trip = [rand_momenta(rng, 3, 1.0) for _ in range(500)]
    coc = max(cocycle_residual(KONTSEVICH, *t) for t in trip)
    asc = max(associativity_residual(KONTSEVICH, *t) for t in trip)
    kv = kv_functionals(1.0)
    q_trip = trip[:50]
    coc_q = max(cocycle_residual(kv, *t) for t in q_trip)
    asc_q = max(associativity_residual(kv, *t) for t in q_trip)
    ok = max(coc, asc, coc_q, asc_q) < 1e-9
    return ok, (f"K map, 500 triples: cocycle {coc:.2e}, associativity {asc:.2e}; "
                f"Q map via quadrature, 50 triples: cocycle {coc_q:.2e}, associativity {asc_q:.2e}")


def c7():
    rep = kv_functionals(1.0, 16)
    rng = np.random.default_rng(107)
    comm = 0.0
    for p in rand_momenta(rng, 4, 1.0):
        jets = [JetFunction.constant(1.0), JetFunction.plane_wave(p.vec)]
        jets += [JetFunction.monomial(tuple(int(a == b) for b in range(3)), p=p.vec) for a in range(3)]
        for j in jets:
            for mu, nu in ((0, 1), (1, 2), (2, 0)):
                comm = max(comm, commutator_residual(rep, mu, nu, j).coeff_norm())
    master = max(max(master_residuals(rep, p).norms()) for p in rand_momenta(rng, 20, 1.0))
    weyl4 = master_residuals(weyl_candidate(1.0), Momentum((1.0, 0, 0), 1.0)).norms()[3]
    ok = comm < 1e-10 and master < 1e-10 and weyl4 > 0.01
    return ok, f"commutator {comm:.2e}, master {master:.2e}, Weyl master-4 {weyl4:.3f}"


def c8():
    rng = np.random.default_rng(108)
    ps = rand_momenta(rng, 500, 3.0)
    prod = max(abs(j * H - 1.0) for j, H in map(harish_chandra_pair, ps))
    exact = sum(j * H == 1.0 for j, H in map(harish_chandra_pair, ps))
    same = all(harish_chandra_pair(p)[0] == kontsevich_multiplier(p) for p in ps)
    conj = 0.0
    for _ in range(200):
        p, q = rand_momenta(rng, 2, 1.4)
        wk = kontsevich_multiplier
        conj = max(conj, abs(W(p, q) - wk(p) * wk(q) / wk(bch(p, q))))
    ok = prod <= 2.0**-52 and same and conj < 1e-8
    return ok, (f"|j H - 1| <= {prod:.1e} ({exact}/500 bit-exact), j_half == multiplier: {same}, "
                f"H-conjugation {conj:.2e}")


def c9():
    jac = max(abs(W(p, -p) - translation_jacobian(p))
              for p in (Momentum((y, 0, 0), 1.0) for y in (0.3, 1.0, 2.0)))
    scan = trace_convergence_scan(seed=0)
    err = scan.final_error
    trail = ", ".join(f"L={r[0]:g}: {r[3]:.1e}" for r in scan.rows)
    return jac < 1e-5 and err < 0.02, f"Jacobian residual {jac:.1e}; box |ratio-1| {trail}"


def c10():
    grid = 0.0
    for th in (0.5, 1.0, 2.0):
        for m in (0.1, 1.0, 2.0):
            cfg = LoopConfig(th, m)
            grid = max(grid, abs(tadpole_omega_I(cfg) / tadpole_closed_form(cfg) - 1))
    v11 = tadpole_omega_I(LoopConfig(1.0, 1.0))
    v0 = tadpole_omega_I(LoopConfig(1.0, 0.0))
    ok = grid < 1e-4 and abs(v11 - 0.1006065) < 1e-5 and math.isfinite(v0) and abs(v0 - 1 / (2 * math.pi)) < 1e-3
    return ok, f"grid rel err {grid:.1e}; omega_I(1,1) = {v11:.7f}; m=0: {v0:.7f}"


def c11():
    rng = np.random.default_rng(111)
    cfg = LoopConfig(1.0, 0.7)
    z = Momentum.zero(1.0)
    worst = 0.0
    exact = True
    for _ in range(50):
        p, k2 = rand_momenta(rng, 2, 1.0)
        amp, total = two_point_kernel_II(p, z, k2, cfg)
        worst = max(worst, abs(amp * (p.norm**2 + cfg.m**2) - W(p, -p)))
        exact &= total.components == k2.components
    return worst < 1e-10 and exact, f"|amp (p^2+m^2) - W(p,-p)| = {worst:.1e}; total == k2 exactly: {exact}"


def c12():
    scan = commutative_limit_scan((0.3, 0.5, -0.2), (0.1, -0.4, 0.6), np.logspace(-4, -1, 13))
    ok = abs(scan.slope_B - 1) < 0.1 and abs(scan.slope_W - 2) < 0.1
    return ok, f"slopes {scan.slope_B:.4f} (B), {scan.slope_W:.4f} (W)"


def c13():
    cut = [10, 1e2, 1e3, 1e4]
    conv = {th: uv_convergence_scan(LoopConfig(th, 1.0), cut, tol=1e-5) for th in (0.5, 1.0)}
    sur = uv_convergence_scan(LoopConfig(0.0, 1.0), cut)
    ok = all(s.converged for s in conv.values()) and not sur.converged
    return ok, f"theta 0.5/1: {[s.reason for s in conv.values()]}; surrogate: {sur.reason}"


CRITERIA = [
    (1, "BCH oracle equivalence", c1),
    (2, "Riccati exactness", c2),
    (3, "KV constraints", c3),
    (4, "phi inverse", c4),
    (5, "Volterra subfamily", c5),
    (6, "cocycle and associativity", c6),
    (7, "operator relations", c7),
    (8, "Harish-Chandra consistency", c8),
    (9, "traciality", c9),
    (10, "tadpole", c10),
    (11, "omega_II structure", c11),
    (12, "commutative limit", c12),
    (13, "UV scan", c13),
]


def evaluate(fn):
    try:
        return fn()
    except Exception as exc:  # a crash is a failure, reported not hidden
        return False, f"raised {type(exc).__name__}: {exc}"


def line(num, name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {name}: {detail}"


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"c{n}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, detail = evaluate(fn)
    with capsys.disabled():
        print("\n" + line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failures = 0
    for num, name, fn in CRITERIA:
        ok, detail = evaluate(fn)
        failures += not ok
        print(line(num, name, ok, detail), flush=True)
    sys.exit(1 if failures else 0)
