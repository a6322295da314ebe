"""Star-products, quantized plane waves and one-loop audits on su(2)-noncommutative R^3."""
from .bch import GroupElement, Momentum, bch, bch_oracle, exp_map, log_map, translation_jacobian
from .errors import *  # noqa: F401,F403
from .field_theory import (
    LoopConfig,
    PlaneWaveSum,
    box_trace_audit,
    commutative_limit_scan,
    tadpole_closed_form,
    tadpole_omega_I,
    traciality_jacobian_residual,
    two_point_kernel_II,
    uv_convergence_scan,
)
from .functionals import (
    G_series,
    ReprFunctionals,
    constraint_residuals,
    custom_functionals,
    family_from_f,
    kv_functionals,
    phi_inverse,
    phi_matrix,
    riccati_residual,
    weyl_candidate,
)
from .operators import (
    JetFunction,
    apply_functional,
    apply_xhat,
    commutator_residual,
    master_residuals,
    wave_action,
)
from .quantization import (
    KONTSEVICH,
    QuadratureSpec,
    QuantizedWave,
    StarKernel,
    W,
    harish_chandra_pair,
    kontsevich_multiplier,
    omega,
    star_kernel,
    star_planewaves,
    xi,
    xi_inverse,
)

__version__ = "0.1.0"
