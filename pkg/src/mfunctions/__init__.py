"""Value-distribution densities for derivatives of L'/L of Dirichlet L-functions."""

__version__ = "0.1.0"

from .errors import CapabilityError, ContractError, ConvergenceError, DomainError
from .primesys import NumberField, PrimeSite, PrimeSystem, enumerate_sites, kronecker, rational_system
from .localgf import (Convention, GParams, RationalMap, build_rational_map, g_local, series_oracle,
                      stirling2)
from .torus import (AverageEstimate, TorusPoint, g_global, mc_average, quad_average, sample_torus,
                    tail_bound)
from .density import (CharFnGrid, CurveMeasure, GridDensity, convolve, curve_measure, global_charfn,
                      histogram, jacobian, local_charfn, reconstruct_density, support_radius,
                      uniform_convergence_probe)
from .injectivity import (RadiusReport, critical_points, curve_simplicity, injectivity_radius,
                          radius_report, sigma_threshold)
from .characters import (DirichletCharacter, FamilySpec, char_value, enumerate_family, family_average,
                         primitive_root, weyl_discrepancy)
from .functionals import Box, Disk, Moment, Psi, parse_functional
