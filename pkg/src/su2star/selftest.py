"""Reduced property suites behind ``su2star <command> --self-test``."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .bch import Momentum, bch, bch_oracle, compose
from .functionals import (
    G_series,
    family_from_f,
    kv_functionals,
    phi_inverse,
    phi_matrix,
    riccati_residual,
    weyl_candidate,
    constraint_residuals,
)
from .field_theory import (
    LoopConfig,
    box_trace_audit,
    commutative_limit_scan,
    tadpole_closed_form,
    tadpole_omega_I,
    traciality_jacobian_residual,
    uv_convergence_scan,
)
from .operators import JetFunction, commutator_residual, master_residuals
from .quantization import (
    KONTSEVICH,
    W,
    cocycle_residual,
    harish_chandra_pair,
    kontsevich_multiplier,
    omega,
    star_planewaves,
    xi,
    xi_inverse,
)


@dataclass(frozen=True)
class Check:
    """One numeric verdict: ``value < tol`` (or ``>`` when ``above``)."""

    name: str
    value: float
    tol: float
    above: bool = False

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        return self.value > self.tol if self.above else self.value < self.tol

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def random_momenta(rng, n: int, theta: float, max_angle: float) -> list:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = rng.uniform(0.0, max_angle, size=(n, 1)) / theta
    return [Momentum(x, theta) for x in v * r]


def _bch(rng, theta):
    ps = random_momenta(rng, 50, theta, 1.2)
    qs = random_momenta(rng, 50, theta, 1.2)
    dev = max(np.max(np.abs(bch(p, q).vec - bch_oracle(p, q).vec)) for p, q in zip(ps, qs))
    a, b, c = (np.array([m.vec for m in random_momenta(rng, 20, theta, 0.9)]) for _ in range(3))
    assoc = np.max(np.abs(compose(compose(a, b, theta), c, theta) - compose(a, compose(b, c, theta), theta)))
    return [Check("bch_vs_oracle", float(dev), 1e-9), Check("bch_associativity", float(assoc), 1e-12)]


def _repr(rng, theta):
    rep = kv_functionals(theta)
    t = np.linspace(-4.0, 0.0, 5) / max(theta, 0.5) ** 2
    r1, r2 = constraint_residuals(rep, t)
    ps = random_momenta(rng, 3, theta, 1.0)
    master = max(max(master_residuals(rep, p).norms()) for p in ps)
    weyl4 = master_residuals(weyl_candidate(theta), Momentum((1.0 / theta, 0, 0), theta)).norms()[3]
    j = JetFunction.monomial((1, 0, 0), p=ps[0].vec) + JetFunction.plane_wave(ps[1].vec)
    comm = commutator_residual(rep, 0, 1, j).coeff_norm()
    ric = max(abs(float(c)) for c in riccati_residual(G_series(12), 11))
    phi = max(np.max(np.abs(phi_matrix(rep, p) @ phi_inverse(rep, p) - np.eye(3))) for p in ps)
    return [
        Check("kv_constraints", float(max(np.max(np.abs(r1)), np.max(np.abs(r2)))), 1e-10),
        Check("kv_master", master, 1e-10),
        Check("weyl_master4", weyl4, 0.01, above=True),
        Check("kv_commutator", comm, 1e-10),
        Check("riccati_exact", ric, 1e-300),
        Check("phi_inverse", float(phi), 1e-10),
    ]


def _quantize(rng, theta):
    rep = kv_functionals(theta)
    xi_err = om_err = 0.0
    for y in (0.1, 1.0, 2.5):
        p = Momentum((y / theta, 0.0, 0.0), theta)
        xi_err = max(xi_err, np.linalg.norm(xi(rep, p).vec - p.vec) / p.norm)
        om_err = max(om_err, abs(omega(rep, p) - (math.sin(y) / y) ** 2))
    c = family_from_f(theta, [1])
    k = random_momenta(rng, 1, theta, 0.8)[0]
    trip = float(np.max(np.abs(xi(c, xi_inverse(c, k)).vec - k.vec)))
    p = random_momenta(rng, 1, theta, 0.8)[0]
    om_f1 = abs(omega(c, p) - (1 + (theta * p.norm) ** 2) ** -2)
    return [
        Check("kv_xi_identity", float(xi_err), 1e-6),
        Check("kv_omega_sinc2", om_err, 1e-6),
        Check("xi_inverse_roundtrip", trip, 1e-8),
        Check("f1_family_omega", om_f1, 1e-9),
    ]


def _star(rng, theta):
    trip = [random_momenta(rng, 3, theta, 0.9) for _ in range(20)]
    coc_k = max(cocycle_residual(KONTSEVICH, *t) for t in trip)
    rep = kv_functionals(theta)
    coc_q = max(cocycle_residual(rep, *t) for t in trip[:2])
    hc = 0.0
    for p in random_momenta(rng, 10, theta, 2.5):
        j, H = harish_chandra_pair(p)
        hc = max(hc, abs(j * H - 1.0), abs(j - kontsevich_multiplier(p)))
    ps = random_momenta(rng, 4, theta, 0.6)
    f = JetFunction.plane_wave_sum([p.vec for p in ps[:2]], [1.0, 0.5j])
    g = JetFunction.plane_wave_sum([p.vec for p in ps[2:]], [2.0, -1.0])
    lhs = star_planewaves(KONTSEVICH, f, g, theta).conj()
    rhs = star_planewaves(KONTSEVICH, g.conj(), f.conj(), theta)
    return [
        Check("kontsevich_cocycle", coc_k, 1e-9),
        Check("kv_q_cocycle", coc_q, 1e-9),
        Check("harish_chandra", hc, 1e-15),
        Check("conjugation", (lhs - rhs).coeff_norm(), 1e-10),
    ]


def _trace(rng, theta):
    jac = max(abs(traciality_jacobian_residual(Momentum((y / theta, 0, 0), theta))) for y in (0.3, 1.0, 2.0))
    p = random_momenta(rng, 1, theta, 1.0)[0]
    pair = box_trace_audit(JetFunction.plane_wave(p.vec), JetFunction.plane_wave(-p.vec), 10.0, theta)
    return [
        Check("jacobian_traciality", jac, 1e-5),
        Check("pair_ratio_is_W", abs(pair.ratio - W(p, -p)), 1e-12),
    ]


def _loop(rng, theta):
    worst = 0.0
    for m in (0.5, 2.0):
        cfg = LoopConfig(theta, m)
        worst = max(worst, abs(tadpole_omega_I(cfg) / tadpole_closed_form(cfg) - 1))
    conv = uv_convergence_scan(LoopConfig(theta, 1.0), [10, 100, 1000]).converged
    div = uv_convergence_scan(LoopConfig(0.0, 1.0), [10, 100, 1000]).converged
    return [
        Check("tadpole_closed_form", worst, 1e-4),
        Check("uv_converges", float(conv), 0.5, above=True),
        Check("surrogate_diverges", float(div), 0.5),
    ]


def _limit(rng, theta):
    scan = commutative_limit_scan((0.3, 0.5, -0.2), (0.1, -0.4, 0.6), np.logspace(-4, -1, 4))
    return [Check("slope_B", abs(scan.slope_B - 1.0), 0.1), Check("slope_W", abs(scan.slope_W - 2.0), 0.1)]


SUITES = {
    "bch": _bch,
    "repr-check": _repr,
    "quantize": _quantize,
    "star": _star,
    "trace-audit": _trace,
    "loop": _loop,
    "limit-scan": _limit,
}


def run_suite(command: str, seed: int = 0, theta: float = 1.0) -> list:
    return SUITES[command](np.random.default_rng(seed), theta)
