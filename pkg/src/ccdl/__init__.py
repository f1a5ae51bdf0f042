"""Cache-aided multi-antenna downlink toolkit.

Combinatorial scheme construction, linear-precoder SINR simulation,
closed-form asymptotic sum rates, CSI-overhead accounting, and
stream-count optimization for vector coded caching systems.
"""

from ccdl.scheme import SchemeConfig, ValidatedScheme, DeliveryPlan, validate, build_delivery_plan, max_gain
from ccdl.channel import RngSeed, draw_channel, wishart_inv_trace_mc, resolvent_trace
from ccdl.precoding import PrecoderKind, build_precoder, power_factor, stage_sinrs, cancellation_residual
from ccdl.analytic import (
    RateInputs,
    RzfDeterministics,
    CsiCostModel,
    RateReport,
    mf_rate,
    mf_cacheless,
    zf_rate,
    stieltjes,
    stieltjes_deriv,
    rzf_deterministics,
    rzf_rate,
    csi_zeta,
    effective_rate,
    effective_gain,
)
from ccdl.montecarlo import McConfig, McEstimate, estimate_sum_rate, convergence_report, deterministic_equivalent_check
from ccdl.optimizer import (
    OptimizationResult,
    GainReport,
    lambert_w0,
    mf_opt_c,
    zf_opt_c,
    zf_opt_c_high_snr,
    rzf_opt_c,
    integer_q,
    optimized_gain,
)

__version__ = "0.1.0"
