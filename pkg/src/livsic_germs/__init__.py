"""Constructive cohomological-equation solving for cocycles of truncated
analytic-diffeomorphism germs over hyperbolic base dynamics.

The package provides the truncated germ algebra (composition, inversion,
polydisc norms), two base systems with a constructive closing property (a
hyperbolic toral automorphism and the two-sided full shift), germ-valued
cocycles with periodic-orbit obstruction certification, the orbit-summation
solver with its degree-by-degree recursion, and the majorant-series bounds
on the solved coefficients.  The ``livsic-germs`` CLI orchestrates seeded
generate / check / solve / verify / report experiments.
"""

from .series import (HolderParams, TruncatedSeries, coeff_decay_check,
                     enumerate_multiindices, multiindex_count, norm_2r,
                     series_space)
from .germs import (Germ, SingularLinearPart, deviation_from_identity,
                    fdb_homogeneous_P, germ_compose, germ_identity,
                    germ_invert, linear_part, max_coefficient_difference,
                    monomial_coefficient)
from .dynamics import (BaseSystem, ClosingConstants, ClosingPreconditionError,
                       FullShift, ShiftPoint, ToralAutomorphism, TorusPoint,
                       empirical_density, system_from_config)
from .cocycles import (CoboundaryObservable, FieldGermObservable,
                       GermObservable, ObservableField, POOReport,
                       ShiftCylinderField, TorusFourierField, coboundary_from,
                       cocycle_product, evaluate_germ, observable_from_record,
                       poo_check, random_germ_observable)
from .solver import (CombinedSolution, GermSolveResult, HolderEstimate,
                     LivsicConstants, MatrixPOOFailure, OrbitNotDenseError,
                     OrbitTable, UnsupportedLinearCocycle, coefficient_seminorms,
                     data_poo_check, germ_solve, holder_seminorm_empirical,
                     livsic_constant, net_cloud, orbit_pair_sample,
                     reduce_linear_part, scalar_solve, verify_solution)
from .majorant import (CocycleBounds, MajorantTable, build_J_scaled,
                       certify_kappa, check_majorant_domination,
                       reassembly_check, solve_G_scaled)
from .config import ConfigError, ExperimentConfig, parse_flat_config

__version__ = "0.1.0"
