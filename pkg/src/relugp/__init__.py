"""Gaussian-process kernels of wide ReLU networks and the initializations they recommend."""
__version__ = "0.1.0"

from relugp._backend import NAME as BACKEND
from relugp.kernel import HyperPair, cross_gram, gram_matrix, hidden_cov, relu_cov
from relugp.gp import GpModel, log_marginal_likelihood, posterior
from relugp.search import HyperGrid, LikelihoodSurface, evaluate_surface, recommend
from relugp.net import InitScheme, ShallowNet

__all__ = [
    "BACKEND",
    "GpModel",
    "HyperGrid",
    "HyperPair",
    "InitScheme",
    "LikelihoodSurface",
    "ShallowNet",
    "cross_gram",
    "evaluate_surface",
    "gram_matrix",
    "hidden_cov",
    "log_marginal_likelihood",
    "posterior",
    "recommend",
    "relu_cov",
]
