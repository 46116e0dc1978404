"""Desk-scale toolkit for heat kernels divided by harmonic weights.

The package builds the objects around a Doob-type quotient
K(t, x, y) = T_t(x, y) / (h(x) h(y)) on a handful of explicit model
spaces: the kernels and weights themselves, numerical certificates for
their structural properties (weight invariance, conservativity, Gaussian
sandwich bounds, Hoelder probes, Muckenhoupt characteristics), the
maximal / vertical square / area functionals built from the quotient,
atoms with weighted cancellation together with their constructive
re-decompositions, local mean-oscillation norms against the weight, and
the pairing between the two sides.
"""

from ._version import __version__
from .atoms import (Atom, Decomposition, ValidationReport, atomic_norm_upper,
                    decompose_beta, decompose_classical, decompose_local,
                    moment, random_beta_atom, validate)
from .doob import (Certificate, DoobKernel, doob_kernel, gaussian_sandwich,
                   holder_probe, verify_conservative, verify_harmonicity)
from .errors import (ConfigError, DegenerateBall, DegenerateFit,
                     DivergentIntegral, DomainError, InvalidAtom,
                     NonFiniteMass, NotDecomposable, OutsideDomain,
                     QuadratureFailure, ToolkitError, UnsupportedGeometry)
from .functionals import (BmoReport, BmoValue, PairingReport, area_function,
                          bmo_local, bmo_norm, duality_pair, g_function,
                          maximal, output_grid, semigroup_apply, weighted_norm)
from .gridfn import GridFunction, GridFunctionND, read_grid_csv
from .kernels import (HarmonicProfile, HeatKernel, bessel_i, harmonic_profile,
                      heat_kernel, lp_kernel)
from .spaces import (Ball, ModelSpace, WeightedMeasure, ball_mass,
                     distance_to_boundary, doubling_constant)
from .weights import ApReport, ap_quantity, ap_sup, apw_quantity

__all__ = [
    "__version__",
    # spaces
    "Ball", "ModelSpace", "WeightedMeasure", "ball_mass",
    "doubling_constant", "distance_to_boundary",
    # kernels
    "HeatKernel", "HarmonicProfile", "bessel_i", "heat_kernel",
    "lp_kernel", "harmonic_profile",
    # doob
    "DoobKernel", "Certificate", "doob_kernel", "verify_harmonicity",
    "verify_conservative", "gaussian_sandwich", "holder_probe",
    # weights
    "ApReport", "ap_quantity", "apw_quantity", "ap_sup",
    # grid functions
    "GridFunction", "GridFunctionND", "read_grid_csv",
    # functionals
    "semigroup_apply", "maximal", "g_function", "area_function",
    "output_grid", "weighted_norm", "bmo_local", "bmo_norm", "duality_pair",
    "BmoValue", "BmoReport", "PairingReport",
    # atoms
    "Atom", "ValidationReport", "Decomposition", "validate",
    "decompose_local", "decompose_classical", "decompose_beta",
    "atomic_norm_upper", "moment", "random_beta_atom",
    # errors
    "ToolkitError", "OutsideDomain", "DomainError", "NonFiniteMass",
    "DivergentIntegral", "QuadratureFailure", "DegenerateBall",
    "DegenerateFit", "InvalidAtom", "UnsupportedGeometry",
    "NotDecomposable", "ConfigError",
]
