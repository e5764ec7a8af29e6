"""AMP-based individually-optimal detection for large MIMO systems.

Library layout:

- :mod:`iolama.constellation` -- discrete alphabets, priors, moments
- :mod:`iolama.denoiser` -- posterior mean/variance and the MSE function
- :mod:`iolama.state_evolution` -- effective-noise recursion and fixed points
- :mod:`iolama.thresholds` -- recovery thresholds, critical noise, regimes
- :mod:`iolama.mimo_sim` -- the detector on concrete MIMO instances
- :mod:`iolama.cli` -- command-line front end (CSV/JSON + figures)
"""

__version__ = "0.1.0"

from .constellation import (  # noqa: F401
    Constellation,
    make_builtin,
    make_custom,
    load_custom,
    scale,
)
from .denoiser import (  # noqa: F401
    DEFAULT_QUAD_ORDER,
    denoise_mean,
    denoise_var,
    mse,
    mse_derivative,
)
from .state_evolution import (  # noqa: F401
    FixedPointSet,
    SETrace,
    find_fixed_points,
    g_function,
    run_se,
    se_step,
)
from .thresholds import (  # noqa: F401
    classify_regime,
    compute_ert,
    compute_mrt,
    critical_noise,
    threshold_report,
)
from .mimo_sim import (  # noqa: F401
    generate_instance,
    lama_detect,
    monte_carlo_ser,
    verify_decoupling,
)
