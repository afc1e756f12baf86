"""Analysis toolkit for high-power layered acoustic wave (LAW) resonators.

Network-parameter I/O, resonance metrics, mBVD fitting and power budgets,
layered-waveguide dispersion, thermal models and wafer-curvature stress.
"""

from .errors import *  # noqa: F401,F403
from .netparam import FrequencySweep, NetworkData, power_coefficients, s_to_y, y_to_s
from .touchstone import parse_touchstone, read_touchstone, write_touchstone
from .metrics import ResonanceMetrics, bode_q, find_resonances, kt2, q3db, summarize
from .mbvd import (
    MbvdParams,
    fit_mbvd,
    gamma_from_s21,
    mbvd_impedance,
    power_budget_oneport,
    power_budget_twoport,
)
from .dispersion import LayerStack, classify_mode, existence_boundary, solve_law_velocity
from .thermo import TcfFit, fit_tcf, power_density, density_fold, simulate_runaway
from .stress import StoneyGeometry, ProfileTrace, aggregate, stoney_stress, trace_stress

__version__ = "0.1.0"
