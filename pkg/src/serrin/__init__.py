"""Numerical toolkit for perturbed Serrin domains of the three-sphere.

The sphere is foliated by flat tori; straight tubes around the core circle
solve the overdetermined torsion problem exactly, and nontrivial Serrin
domains bifurcate from them at computable radii.  The package computes the
whole chain: pulled-back metrics and quadrature (``geometry``), the exact
radial reference (``radial``), the singular mode ODEs and their Riccati
forms (``modes``), the eigenvalue curves and bifurcation radii
(``spectrum``), the deformed-tube torsion solver and flux (``torsion``),
the linearized flux map (``linearize``), and the continued branches of
perturbed Serrin domains (``branch``).  ``cli`` ties them into
reproducible runs.
"""

from .errors import (AnalysisError, ConfigError, ConsistencyError,
                     DomainValidationError, NumericalError, PrecisionError,
                     SerrinError)
from .fourier import CosineSeries, angle_grid
from .geometry import (Axis, BoundaryProfile, MetricAtPoint, ModeIndex,
                       boundary_area, metric_lambda, metric_phi,
                       neumann_weight, volume)
from .radial import RadialSolution, radial_flux, radial_torsion
from .modes import (Endpoint, ModeSolution, RiccatiState, frobenius_launch,
                    indicial_roots, riccati_sweep, solve_l)
from .spectrum import (BifurcationPoint, EigenCurve, asymptotics_report,
                       eigen_curve, find_lambda_n, sigma,
                       sigma_prime_closed_form)
from .torsion import TorsionField, neumann_trace, serrin_defect, solve_torsion
from .linearize import (HarmonicExtension, apply_L, fd_derivative_H,
                        harmonic_extend, resolvent_apply)
from .branch import (BranchPoint, BranchRun, branch_report,
                     check_cr_hypotheses, trace_branch)

__version__ = "0.1.0"

__all__ = [
    "SerrinError", "DomainValidationError", "ConfigError", "PrecisionError",
    "NumericalError", "AnalysisError", "ConsistencyError",
    "CosineSeries", "angle_grid",
    "Axis", "ModeIndex", "MetricAtPoint", "BoundaryProfile",
    "metric_lambda", "metric_phi", "volume", "boundary_area", "neumann_weight",
    "radial_torsion", "radial_flux", "RadialSolution",
    "Endpoint", "ModeSolution", "RiccatiState", "indicial_roots",
    "frobenius_launch", "solve_l", "riccati_sweep",
    "sigma", "EigenCurve", "eigen_curve", "BifurcationPoint", "find_lambda_n",
    "sigma_prime_closed_form", "asymptotics_report",
    "TorsionField", "solve_torsion", "neumann_trace", "serrin_defect",
    "HarmonicExtension", "harmonic_extend", "apply_L", "fd_derivative_H",
    "resolvent_apply",
    "BranchPoint", "BranchRun", "check_cr_hypotheses", "trace_branch",
    "branch_report",
    "__version__",
]
