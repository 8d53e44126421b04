"""Secure transmission design for linear multihop relay networks.

Closed-form secrecy outage and rate design for on-off (OFT) and
non-on-off (NOFT) transmission, hop-count optimization, and a Monte Carlo
simulator that checks the closed forms from first principles.
"""

from .model import (
    HopLayout,
    NetworkConfig,
    RateDesign,
    SchemeKind,
    db_to_linear,
    hop_distance,
    hop_layout,
    path_gain,
    rates_from,
)
from .analytics import (
    HighSnrLimit,
    PerformanceReport,
    QuadratureError,
    beta_e_for_epsilon,
    connection_prob_noft,
    high_snr_limit,
    k1,
    log_throughput,
    optimal_rates,
    performance,
    rate_redundancy,
    sop_end_to_end,
    sop_fixed_eavesdroppers,
    sop_per_hop,
    throughput,
    transmission_prob_oft,
)
from .optimizer import HopSearchResult, RateGridResult, brute_force_rates, optimize_hops
from .simulator import (
    MobilityModel,
    SimEstimate,
    SimRegion,
    SimReport,
    SlotCapExceeded,
    sample_eavesdroppers,
    simulate,
    validate_against_analytics,
)

__version__ = "0.1.0"
