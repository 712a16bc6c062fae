"""Physics-informed neural network engine for reconstructing unsteady
flow fields (velocity and latent pressure) from sparse space-time
samples."""

from .autodiff import Var, constant, gradients
from .datagen import (
    DatasetSplit,
    FlowSamples,
    SpatioTemporalPoint,
    beltrami,
    build_beltrami_split,
    build_taylor_green_split,
    load_csv,
    sample_sparse,
    split_train_test,
    taylor_green,
    write_csv,
)
from .errors import (
    ConfigurationError,
    DataFormatError,
    DegenerateGradientError,
    FlowpinnError,
    NonFiniteGradientError,
    NonFiniteLossError,
    UndefinedMetricError,
)
from .evaluate import EvalReport, evaluate, gradient_histograms, relative_l2
from .netderiv import DerivativeBundle, grad_params, input_derivatives
from .network import (
    Mlp,
    MlpConfig,
    NetworkParams,
    init,
    load_checkpoint,
    save_checkpoint,
)
from .optim import AdamState, TrainingBudget, adam_step, minibatch_iter
from .physics import (
    FlowState2D,
    FlowState3D,
    ResidualBundle,
    collocation_residuals,
    ns2d_residuals,
    rans3d_residuals,
)
from .trainers import (
    RunConfig,
    RunReport,
    grid_search,
    train,
    train_bc_pinn,
    train_data_driven,
    train_standard_pinn,
)
from .weighting import (
    LossBreakdown,
    WeightState,
    assemble_loss,
    instantaneous_lambda,
    mse,
    update_lambda,
)

__version__ = "0.1.0"
