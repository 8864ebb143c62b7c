"""Click-counting phase-space functions for on-off detector arrays."""

from .detector import (
    ClickDistribution,
    DetectorArray,
    DSymbolTable,
    click_distribution,
    click_distribution_coherent,
    d_symbol_table,
)
from .experiment import ClickCounts, ExperimentConfig, estimate, replication_study, sample_clicks
from .phasespace import (
    QuasiprobEstimate,
    evaluate,
    quasiprob,
    quasiprob_genfn,
    reference_quasiprob,
    scan_line,
    significance_vs_s,
    stderr_exact,
    stderr_paper,
    weight,
)
from .special import PrecisionError
from .states import (
    Coherent,
    CutoffError,
    Fock,
    PhotonNumberDistribution,
    SqueezedVacuum,
    Thermal,
    parse_state,
    photon_distribution,
)

__version__ = "0.1.0"
