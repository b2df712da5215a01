from .nls import NlsGaussian, NlsGaussianParams, nls_closed_form_rate
from .ks import KsNetwork
from .ad import AdNetwork, GyreFlowConfig, gyre_velocity
from .fitting import fit_initial

__all__ = [
    "NlsGaussian",
    "NlsGaussianParams",
    "nls_closed_form_rate",
    "KsNetwork",
    "AdNetwork",
    "GyreFlowConfig",
    "gyre_velocity",
    "fit_initial",
]
