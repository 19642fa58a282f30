"""Exact symbolic tensor calculus on semi-Riemannian supermanifolds."""

__version__ = "0.1.0"

from .scalars import GeneratorPool, Superfunction
from .supermatrix import SuperMatrix, standard_metric, j_map
from .geometry import (
    BilinearForm,
    Chart,
    Connection,
    OneForm,
    OSpFrame,
    VectorField,
    flat_metric,
    levi_civita,
    validate_metric,
)
from .lie import KillingChecker, killing_check, solve_killing
from .morphisms import FieldAlongMorphism, HarmonicSetup, Morphism
from .integration import action, integrate, volume_density

__all__ = [
    "GeneratorPool",
    "Superfunction",
    "SuperMatrix",
    "standard_metric",
    "j_map",
    "Chart",
    "VectorField",
    "OneForm",
    "BilinearForm",
    "Connection",
    "OSpFrame",
    "flat_metric",
    "levi_civita",
    "validate_metric",
    "KillingChecker",
    "killing_check",
    "solve_killing",
    "Morphism",
    "FieldAlongMorphism",
    "HarmonicSetup",
    "action",
    "integrate",
    "volume_density",
    "__version__",
]
