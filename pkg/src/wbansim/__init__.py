"""Coexistence simulator and analytics for TDMA body-area networks.

Orthogonal-code assignment over cyclic Walsh-Hadamard subsets, superframe
timing correlation, a closed-form collision/success probability model, and a
Monte-Carlo simulator that cross-validates it.
"""

__version__ = "0.1.0"

from .analytics import AnalyticParams, beacon_success_fixed_point, evaluate
from .codes import (
    CodeCapacityError,
    CowhcSet,
    despread,
    extract_cowhc,
    generate_walsh,
    spread,
)
from .config import ExperimentConfig, default_config, load_config
from .dtrc import classify_overlap, compute_timeshift
from .interference import (
    build_interference_list,
    build_interference_set,
    build_sil,
)
from .model import ChannelModel, NetworkState, Sensor, Wban, received_power, sinr
from .protocols import ProtocolKind, run_ocaim_round, run_os_round, run_sms_round
from .sim import MetricsLog, measure_beacon_success, run_simulation, sweep
