"""Certified quadrature and derivative bounds for neural networks.

The package evaluates multilayer perceptrons and their exact derivatives,
computes certified locally uniform bounds on those derivatives over boxes,
turns the bounds into rigorous midpoint-quadrature error certificates for
L^p norms, and chains the certificates into an a posteriori verification of
heat-equation approximations.
"""

from .errors import (
    CapabilityError,
    CertiquadError,
    DomainError,
    GridMismatchError,
    ShapeError,
    UnsupportedOrderError,
)
from .model import (
    ActivationSpec,
    EvalTrace,
    NetworkParams,
    activation_derivative,
    forward,
    forward_batch,
    load_network,
    save_network,
    zero_network,
)
from .derivatives import (
    BatchJet,
    LayerJet,
    MultiIndex,
    gradient,
    gradient_batch,
    partial_alpha_one_layer,
    partial_batch,
    second_partial_two_layer,
    third_partial_two_layer,
)
from .bounds import (
    ActivationEnvelope,
    BoxSpec,
    DerivativeEnvelope,
    EnvelopeBatch,
    bound_first,
    bound_second,
    bound_third,
    envelope,
    propagate,
    qhat_relu,
    qhat_repu,
)
from .quadrature import (
    GridDomain,
    NormCertificate,
    build_uniform_grid,
    lp_power_estimate,
    norm_interval,
)
from .heat import (
    HeatProblem,
    InitialCondition,
    ResidualCertificates,
    Verdict,
    VerificationOutcome,
    VerifySettings,
    chi,
    chi_derivative_supnorms,
    energy_error_bound,
    global_verify,
    load_problem_config,
    local_verify,
    phi_init,
    phi_init_gradient_bound,
    phi_pde,
    phi_pde_gradient_bound,
    residual_norm_certificates,
)

__version__ = "0.1.0"
