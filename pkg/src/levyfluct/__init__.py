"""levyfluct: fluctuation identities of spectrally negative Levy processes
reflected at one or two barriers, cross-validated by Monte Carlo solutions
of the two-sided Skorokhod problem."""

from . import errors, identities, inversion, model, scale, simulate
from .identities import (
    IdentityValue,
    TransformQuery,
    first_jump_transform,
    inverse_local_time_exponent,
    local_time_jump_rate,
    lower_passage_transform,
    minimum_transform,
    occupation_transform,
    two_sided_exit,
    upper_passage_transform,
)
from .model import (
    ProcessSpec,
    TiltedSpec,
    phi,
    phi_prime,
    right_inverse,
    spec_from_json,
    spec_to_json,
    tilt,
    validate_spec,
)
from .scale import (
    Backend,
    InversionParams,
    ScaleEvaluator,
    make_evaluator,
    w_q,
    w_q_right_derivative,
    z_q,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "identities",
    "inversion",
    "model",
    "scale",
    "simulate",
    "ProcessSpec",
    "TiltedSpec",
    "validate_spec",
    "phi",
    "phi_prime",
    "right_inverse",
    "tilt",
    "spec_from_json",
    "spec_to_json",
    "Backend",
    "InversionParams",
    "ScaleEvaluator",
    "make_evaluator",
    "w_q",
    "w_q_right_derivative",
    "z_q",
    "TransformQuery",
    "IdentityValue",
    "two_sided_exit",
    "upper_passage_transform",
    "lower_passage_transform",
    "inverse_local_time_exponent",
    "local_time_jump_rate",
    "minimum_transform",
    "occupation_transform",
    "first_jump_transform",
]
