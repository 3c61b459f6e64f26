"""Exact polynomial Poisson geometry, metriplectic dissipation and simulation."""

from .brackets import (
    DeformedPoissonStructure,
    IsentropicWarning,
    KulkarniNomizu,
    MetriplecticSystem,
    StructureError,
    TensorProduct,
    dissipative_field,
    entropy_production,
    four_bracket,
    metriplectic_field,
    reversible_field,
    symmetric_bracket,
)
from .integrate import Trajectory, estimate_order, simulate, simulate_batch, step
from .models import (
    ModelDescriptor,
    build_bargmann,
    build_canonical,
    build_galilei,
    build_lie_poisson,
    build_lotka_volterra,
    build_se2,
    build_se2_extended,
    get_model,
)
from .multivector import (
    BivectorField,
    CoordinateChart,
    SymmetricTensorField,
    TrivectorField,
    VectorField,
    lie_derivative_bivector,
    poisson_bracket,
    schouten_bb,
    sharp,
)
from .parser import ParseError, load_model, parse_expression
from .poly import Polynomial
from .verify import (
    VerificationReport,
    check_casimir,
    check_cocycle,
    check_jacobi,
    check_metriplectic_axioms,
    full_battery,
)

__version__ = "0.1.0"

__all__ = [
    "BivectorField",
    "build_bargmann",
    "build_canonical",
    "build_galilei",
    "build_lie_poisson",
    "build_lotka_volterra",
    "build_se2",
    "build_se2_extended",
    "check_casimir",
    "check_cocycle",
    "check_jacobi",
    "check_metriplectic_axioms",
    "CoordinateChart",
    "DeformedPoissonStructure",
    "dissipative_field",
    "entropy_production",
    "estimate_order",
    "four_bracket",
    "full_battery",
    "get_model",
    "IsentropicWarning",
    "KulkarniNomizu",
    "lie_derivative_bivector",
    "load_model",
    "metriplectic_field",
    "MetriplecticSystem",
    "ModelDescriptor",
    "parse_expression",
    "ParseError",
    "poisson_bracket",
    "Polynomial",
    "reversible_field",
    "schouten_bb",
    "sharp",
    "simulate",
    "simulate_batch",
    "step",
    "StructureError",
    "symmetric_bracket",
    "SymmetricTensorField",
    "TensorProduct",
    "Trajectory",
    "TrivectorField",
    "VectorField",
    "VerificationReport",
]

