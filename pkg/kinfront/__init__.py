from .closed_form import *
from .exceptions import *
from .grids import MinPlusField, SpatialGrid, VelocityGrid, remap, sample
from .minplus import (
    SchemeConfig,
    SchemeState,
    dirac_datum,
    hopflax_min,
    hopflax_u,
    mu_n_closed,
    reconstruct_u,
    run_scheme,
    scheme_step,
)
from .kinetic import KineticConfig, KineticField, duhamel_step, hopf_cole, reaction_step, run_kinetic
from .pdmp import SampleSet, SimConfig, empirical_rate, jump_count_check, simulate, simulate_path
from .front import (
    FrontQuery,
    FrontTrace,
    bounds_check,
    fit_exponent,
    freidlin_profile,
    front_location,
    front_trace,
    rate_conjecture,
    truncate_min,
)
from .__version__ import __version__
