"""ppmix: simulation and verification of interacting Poisson transformations."""

from .config_space import (CollisionError, Configuration, Functional,
                           FunctionIntegrand, Point, RandomIntegrand,
                           add_points, finite_diff, iterated_diff,
                           make_configuration, poisson_integral, pushforward,
                           vector_iterated_diff)
from .experiments import (DecayCurve, DecayRow, required_decay_window,
                          required_mixing_window, run_invariance_check,
                          run_mecke_check, run_mixing, run_moment_check,
                          run_zero_type)
from .geometry import (HullData, contains_interior, convex_hull,
                       extremal_vertices, inscribed_disk)
from .integrands import (CappedCount, DeterministicIntegrand, ExpCount,
                         NearestNeighbor, count_in)
from .intensity import (IndicatorFunction, IntensityMeasure, RadialBump,
                        ScaledFunction, TestFunction, check_map_invariance,
                        integrate_sigma, l2_inner, sample_poisson, sigma_mass)
from .mc import StatReport, run_replicates
from .partitions import (ExponentMatrix, SetPartition, deterministic_moment,
                         enumerate_partitions, exponent_matrix,
                         joint_moment_rhs, mecke_rhs)
from .regions import Annulus, Box, Region, parse_region
from .transforms import (ComposedTransformation, CountShift, DilationRotation,
                         FixedAngle, FuncTransformation, HashedAngle,
                         HullRotation, Identity, MixingSchedule,
                         ShiftTransformation, Transformation, VanishingResult,
                         check_vanishing, compose, iterate,
                         iterate_pushforward, make_dilation_rotation,
                         make_hull_rotation)

__version__ = "0.1.0"
