"""Shape-morphing PDE solutions with sequential data assimilation.

The package evolves parametric ansatz solutions of time-dependent PDEs by
minimizing the instantaneous residual over parameter rates, corrects the
parameters against sparse observations with regularized Newton steps, and
ships pseudo-spectral reference solvers for the three built-in benchmarks
(cubic Schroedinger focusing, Kuramoto-Sivashinsky chaos, and scalar
advection-diffusion in a double gyre).
"""

__version__ = "0.1.0"

import os as _os

# The package's dense solves are all small (a few hundred unknowns); threaded
# BLAS is counterproductive at that size on small machines.  Cap the pools
# unless the user overrides via SMSDA_BLAS_THREADS.
try:
    from threadpoolctl import threadpool_limits as _threadpool_limits

    _threadpool_limits(limits=int(_os.environ.get("SMSDA_BLAS_THREADS", "1")))
except ImportError:  # run with whatever the environment provides
    pass

from .assimilation import (
    DaConfig,
    ObservationOperator,
    ObservationSeries,
    continuous_da_rhs_collocation,
    continuous_da_rhs_symbolic,
    da_sms_run,
    fill_distance,
    lemma1_bound_check,
    newton_correct,
    observation_jacobian,
    observe_model,
)
from .core import (
    CollocationGrid,
    QuadratureRule,
    SmsModel,
    assemble_collocation,
    assemble_quadrature,
    evolve,
    midpoint_rule,
    residual,
    sms_rhs_collocation,
    sms_rhs_quadrature,
    uniform_grid,
)
from .integrate import IntegratorConfig, Trajectory, integrate
from .linalg import reg_pinv_apply, tikhonov_solve
from .models import (
    AdNetwork,
    GyreFlowConfig,
    KsNetwork,
    NlsGaussian,
    fit_initial,
    gyre_velocity,
    nls_closed_form_rate,
)
