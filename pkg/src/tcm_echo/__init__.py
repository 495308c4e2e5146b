"""Photon echoes of N two-level molecules in a single-mode cavity (Tavis-Cummings model)."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ModelParams, PhotonWeights, coherent_weights, custom_weights, fock_weights, make_model, make_weights,
    model_with_detuning, thermal_weights,
)
from .spectrum import SpectralBlock, polynomial_eigenvalues, spectral_block  # noqa: E402
from .dynamics import (  # noqa: E402
    TimeSeries, s1_closed_form, s1_exact, s4_alternate, s4_closed_form, s4_exact, tau_R,
)
from .approx import s1_afa, s1_refined, s4_mta, s4_refined  # noqa: E402
from .entropy import field_diagonal, shannon_entropy  # noqa: E402
from .qfunction import (  # noqa: E402
    QRaster, q_absorption_approx, q_absorption_exact, q_emission_approx, q_emission_exact, q_raster,
)
from .analysis import collapse_width, detect_revivals, rabi_period, super_revival_scan  # noqa: E402
