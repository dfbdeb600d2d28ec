"""Many images, few networks: linear combinations of SIREN weight sets.

Train N weight sets jointly so that fixed linear combinations of them render
M >= N images, serialize the result as a compact half-precision bundle, and
numerically check the convergence bounds that justify the training rule.
"""

from .convergence import (
    BoundReport,
    ConvergenceConfig,
    QuadraticLoss,
    config_from_json,
    config_to_json,
    reference_config,
    run_gd,
    verify,
)
from .demos import constrained_average, different_third, naive_average, run_demo
from .imaging import (
    ImageTensor,
    coord_grid,
    downsample2x,
    load_png,
    psnr,
    reconstruct,
    residual,
    save_png,
)
from .siren import (
    GradientSet,
    NetworkArch,
    WeightSet,
    forward,
    init_weights,
    loss_and_grad,
    param_count,
)
from .training import TrainConfig, TrainHistory, total_loss, train, train_step
from .weights import (
    Bundle,
    CombinerSpec,
    WeightBank,
    aggregate_grads,
    bpp,
    combine,
    default_combiner,
    deserialize_bundle,
    serialize_bundle,
)

__version__ = "0.1.0"
