"""Short-packet multiuser MIMO performance toolkit.

Exact closed-form metrics (outage probability, average SNR, maximal coding
rate, finite-blocklength error probability, goodput, stream-count
optimization) for spatially multiplexed transmission with QR-based
zero-forcing detection under least-squares channel-estimation errors,
cross-validated against a seeded link-level Monte-Carlo simulator.
"""

from .channel import (
    ChannelRealization,
    StreamStats,
    SystemConfig,
    derive_stats,
    sample_stream_snr,
    simulate_frame,
)
from .linalg import QRFactors, RngHandle, qr_decompose, sample_complex_gaussian
from .numerics import Tolerance
from .analytics import (
    OutageQuery,
    average_snr,
    cdf_conditional,
    outage_cdf,
    outage_cdf_kummer_form,
    outage_mixing_quadrature,
    outage_perfect_csi,
    pdf_conditional,
    pdf_r_sq,
)
from .planner import (
    GoodputReport,
    RatePlan,
    design_rate,
    error_prob_finite_blocklength,
    exhaustive_stream_argmax,
    goodput,
    goodput_lower_bound,
    m_star_lower_bound,
    optimize_streams,
)
from .montecarlo import (
    ComparisonReport,
    TrialPlan,
    estimate_error_prob,
    estimate_mean_snr,
    estimate_outage,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization",
    "ComparisonReport",
    "GoodputReport",
    "OutageQuery",
    "QRFactors",
    "RatePlan",
    "RngHandle",
    "StreamStats",
    "SystemConfig",
    "Tolerance",
    "TrialPlan",
    "average_snr",
    "cdf_conditional",
    "derive_stats",
    "design_rate",
    "error_prob_finite_blocklength",
    "estimate_error_prob",
    "estimate_mean_snr",
    "estimate_outage",
    "exhaustive_stream_argmax",
    "goodput",
    "goodput_lower_bound",
    "m_star_lower_bound",
    "optimize_streams",
    "outage_cdf",
    "outage_cdf_kummer_form",
    "outage_mixing_quadrature",
    "outage_perfect_csi",
    "pdf_conditional",
    "pdf_r_sq",
    "qr_decompose",
    "sample_complex_gaussian",
    "sample_stream_snr",
    "simulate_frame",
    "__version__",
]
