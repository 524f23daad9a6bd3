"""cone2d: computable topologies, spectra and approximation certificates
for cones of sums of 2d-powers on real polynomial rings."""

__version__ = "0.1.0"

from .approx import (Certificate, FatteningReport, PsdViolationError,
                     module_interpolate, psd_on_fattening, series_root,
                     strictness_witness, sup_approximate, tk_approximate)
from .moments import (AtomicMeasure, MomentFunctional, from_measure,
                      hankel_psd_check, measure_recover, nnls,
                      phi_continuity, power_psd_check, uniform_box_moments)
from .norms import (Region, SupNormResult, WeightFunction, fatten,
                    lasserre_threshold, phi_norm, rho_alpha, sup_norm)
from .poly import Dyadic, Polynomial, dyadic_round, evaluate
from .spectrum import (VanishingBasis, is_hausdorff, kphi_box, kphi_contains,
                       monomials_upto, vanishing_ideal_basis)

__all__ = [
    "AtomicMeasure", "Certificate", "Dyadic", "FatteningReport",
    "MomentFunctional", "Polynomial", "PsdViolationError", "Region",
    "SupNormResult", "VanishingBasis", "WeightFunction", "dyadic_round",
    "evaluate", "fatten", "from_measure", "hankel_psd_check", "is_hausdorff",
    "kphi_box", "kphi_contains", "lasserre_threshold", "measure_recover",
    "module_interpolate", "monomials_upto", "nnls", "phi_continuity",
    "phi_norm", "power_psd_check", "psd_on_fattening", "rho_alpha",
    "series_root", "strictness_witness", "sup_approximate", "sup_norm",
    "tk_approximate", "uniform_box_moments", "vanishing_ideal_basis",
]
