"""Linear/Ridge expansions fitted by a torus particle-grid optimizer."""

from .engine import ReducedCost
from .errors import (
    ConfigurationError, DomainError, EvaluationError, NumericError, RidgeGridError,
    TrainingError, UsageError,
)
from .expansion import Expansion, LinearBasis, cost, evaluate
from .gram import CoefficientSolution, GramSystem, assemble, reduced_cost, solve
from .maps import AffineWarp, ParticleMap, TanWarp, map_all
from .particle_grid import ParticleGridConfig, RunTrace, init_grid, neighbors, run, step
from .profiles import Profile, get_profile, tabulated
from .quadrature import Domain, SampledFunction, TensorGrid, build_grid, inner_product, norm, sample

__version__ = "0.1.0"
