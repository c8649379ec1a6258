"""rshaper: time-delay resonance compensation for oscillatory plants.

Design a delayed-difference output compensator from frequency-domain
data, verify stabilization via gain/phase margins of the quasi-rational
loop, and confirm behavior with a fixed-step delay-differential
simulator.
"""

__version__ = "0.1.0"

from .design import (
    DelayCompensator,
    PiController,
    QuasiRationalLoop,
    compensator_eval,
    design_kd,
    design_report,
    design_tau,
    suppression_ratio,
)
from .freq import (
    FrequencyGrid,
    MarginReport,
    ResponseSet,
    default_grid,
    resonance_peak,
    sample_response,
    stability_margins,
)
from .lti import (
    Polynomial,
    RationalTransfer,
    StateSpaceModel,
    fourth_order_template,
    statespace_to_transfer,
    system_poles,
)
from .plants import (
    TwoMassParams,
    gravity_feedforward,
    nominal_params,
    paper_verbatim_statespace,
    two_mass_statespace,
)
from .sim import (
    SIM_BACKEND,
    ControllerConfig,
    Scenario,
    SimConfig,
    SimTrace,
    classify_trace,
    simulate_closed_loop,
    simulate_open_loop,
)
