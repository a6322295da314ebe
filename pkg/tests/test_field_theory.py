import math

import numpy as np
import pytest

from su2star.bch import Momentum
from su2star.errors import NearChartBoundary
from su2star.field_theory import (
    LoopConfig,
    PlaneWaveSum,
    box_integral,
    box_trace_audit,
    commutative_limit_scan,
    gaussian_packets,
    tadpole_closed_form,
    tadpole_factors,
    tadpole_omega_I,
    tadpole_parts,
    trace_convergence_scan,
    traciality_jacobian_residual,
    two_point_kernel_II,
    uv_convergence_scan,
)
from su2star.operators import JetFunction
from su2star.quantization import W


@pytest.mark.parametrize("angle", [0.3, 1.0, 2.0])
def test_traciality_jacobian(angle):
    assert abs(traciality_jacobian_residual(Momentum((angle, 0, 0), 1.0))) < 1e-5


def test_traciality_small_and_rotated():
    assert abs(traciality_jacobian_residual(Momentum((1e-4, 0, 0), 1.0))) < 1e-8
    vals = []
    for v in ([1.2, 0, 0], [0, 1.2, 0], [0.6, 0.6, math.sqrt(1.44 - 0.72)]):
        vals.append(traciality_jacobian_residual(Momentum(v, 1.0)))
    assert max(vals) - min(vals) < 1e-6
    with pytest.raises(NearChartBoundary):
        traciality_jacobian_residual(Momentum((3.1, 0, 0), 1.0))


def test_box_integral_closed_form():
    L = 7.0
    assert box_integral(np.zeros(3), L) == L**3
    k = np.array([0.3, -0.2, 0.9])
    want = np.prod([2 * math.sin(ki * L / 2) / ki for ki in k])
    assert abs(box_integral(k, L) - want) < 1e-12


def test_box_audit_trivial_and_single_pair():
    one = JetFunction.constant(1.0)
    a = box_trace_audit(one, one, 5.0, 1.0)
    assert a.lhs == a.rhs == 125.0
    p = np.array([0.6, -0.3, 0.5])
    a = box_trace_audit(JetFunction.plane_wave(p), JetFunction.plane_wave(-p), 20.0, 1.0)
    assert abs(a.rhs - 20.0**3) < 1e-9
    assert abs(a.ratio - W(Momentum(p, 1.0), Momentum(-p, 1.0))) < 1e-12


def test_gaussian_packets_mass():
    g = gaussian_packets([[0.0, 0.0, 0.0]], [1.0], width=0.2, spacing=0.02)
    # lattice sum approximates (2 pi)^{3/2} width^3
    assert abs(g.coeffs.sum().real / ((2 * math.pi) ** 1.5 * 0.2**3) - 1) < 1e-4
    with pytest.raises(ValueError):
        PlaneWaveSum(np.zeros((2, 3)), [1.0])


def test_trace_scan_converges():
    scan = trace_convergence_scan(seed=0)
    errs = [r[3] for r in scan.rows]
    assert errs[0] > errs[1] > errs[2]
    assert scan.final_error < 0.02


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("m", [0.1, 1.0, 2.0])
def test_tadpole_matches_closed_form(theta, m):
    cfg = LoopConfig(theta, m)
    assert abs(tadpole_omega_I(cfg) / tadpole_closed_form(cfg) - 1) < 1e-4


def test_tadpole_values():
    assert abs(tadpole_omega_I(LoopConfig(1.0, 1.0)) - 0.1006065) < 1e-5
    assert abs(tadpole_omega_I(LoopConfig(1.0, 0.0)) - 1 / (2 * math.pi)) < 1e-3
    assert abs(tadpole_omega_I(LoopConfig(1.0, 1e-4)) - 1 / (2 * math.pi)) < 1e-3
    assert tadpole_closed_form(LoopConfig(1.0, 0.0)) == 1 / (2 * math.pi)


def test_tadpole_scaling():
    # theta^2 m omega_I depends on theta*m only
    a = LoopConfig(0.5, 2.0)
    b = LoopConfig(2.0, 0.5)
    va = a.theta**2 * a.m * tadpole_omega_I(a)
    vb = b.theta**2 * b.m * tadpole_omega_I(b)
    assert abs(va - vb) < 1e-6


def test_tadpole_cutoff_independent_after_tail():
    vals = [sum(tadpole_parts(LoopConfig(1.0, 1.0, lam))) for lam in (3.0, 50.0, 5e3)]
    assert max(vals) - min(vals) < 1e-10


def test_loop_config_validation():
    with pytest.raises(ValueError):
        LoopConfig(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        LoopConfig(-1.0)


def test_tadpole_factors_differ():
    half, pair = tadpole_factors(Momentum((1.0, 0, 0), 1.0))
    assert abs(half - (math.sin(0.5) / 0.5) ** 2) < 1e-15
    assert abs(pair - math.sin(1.0) ** 2) < 1e-15


def test_two_point_kernel_structure():
    cfg = LoopConfig(1.0, 1.3)
    p = Momentum((0.4, -0.2, 0.7), 1.0)
    z = Momentum.zero(1.0)
    k2 = Momentum((0.1, 0.3, -0.2), 1.0)
    amp, total = two_point_kernel_II(p, z, k2, cfg)
    assert abs(amp * (p.norm**2 + cfg.m**2) - W(p, -p)) < 1e-10
    assert total.components == k2.components
    amp, total = two_point_kernel_II(p, z, z, cfg)
    assert total.is_zero()
    k1 = Momentum((-0.3, 0.2, 0.1), 1.0)
    amp, total = two_point_kernel_II(z, k1, k2, cfg)
    assert abs(amp - W(k1, k2) / cfg.m**2) < 1e-14


@pytest.mark.parametrize("theta", [0.5, 1.0])
def test_uv_scan_converges(theta):
    scan = uv_convergence_scan(LoopConfig(theta, 1.0), [10, 1e2, 1e3, 1e4])
    assert scan.converged, scan.reason
    assert abs(scan.rows[-1][3] - scan.rows[-2][3]) < 1e-5


def test_uv_scan_massless_and_surrogate():
    assert uv_convergence_scan(LoopConfig(1.0, 0.0, 10.0), [10, 1e2, 1e3, 1e4]).converged
    s = uv_convergence_scan(LoopConfig(0.0, 1.0), [10, 1e2, 1e3, 1e4])
    assert not s.converged
    incr = np.diff([r[1] for r in s.rows])
    assert np.all(incr[1:] > incr[:-1])  # linear growth
    with pytest.raises(ValueError):
        uv_convergence_scan(LoopConfig(1.0, 1.0), [100, 10])


def test_commutative_limit_slopes():
    scan = commutative_limit_scan((0.3, 0.5, -0.2), (0.1, -0.4, 0.6), np.logspace(-4, -1, 7))
    assert abs(scan.slope_B - 1.0) < 0.1
    assert abs(scan.slope_W - 2.0) < 0.1
    col = commutative_limit_scan((0.3, 0.6, 0.0), (0.1, 0.2, 0.0), [1e-3, 1e-2])
    assert all(r[1] < 1e-15 for r in col.rows)
