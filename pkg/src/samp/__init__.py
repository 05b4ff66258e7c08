"""Path-method feature attribution with greedy salient manipulation paths."""
from .errors import (
    EmptySelectionError,
    InputError,
    NonTerminationError,
    NumericError,
    SampError,
    TrainingError,
)
from .models import (
    Model,
    SumModel,
    build_counting_model,
    build_linear_model,
    build_mlp,
    finite_diff_gradient,
    forward,
    gradient,
    load_model,
    save_model,
)
from .paths import (
    Attribution,
    PathSegments,
    SampConfig,
    apply_infinitesimal_constraint,
    attribute,
    bidirectional_attribute,
    integrate_path,
    integrated_gradients,
    momentum_update,
    samp_attribute,
    samp_select,
    straight_line_path,
    variance_objective,
)

__version__ = "0.1.0"
