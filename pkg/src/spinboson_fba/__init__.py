"""Spin-boson chain: Fock-space algebra, Yang-Baxter checks, twisted and open
transfer matrices, Bethe equations and quasi-classical limits."""

__version__ = "0.1.0"

from .errors import ConfigurationError, FBAError, IdentityViolation
from .fock import FockSpace, OperatorPolynomial
from .open_chain import ModifiedFactorization, OpenChain
from .spectral import eigenvalue_polynomials, match_spectra, newton_multistart
from .twisted import TwistConfig, TwistedChain
from .ybe import BoundarySide, ModelParams, ReflectionParams

__all__ = [
    "BoundarySide",
    "ConfigurationError",
    "FBAError",
    "FockSpace",
    "IdentityViolation",
    "ModelParams",
    "ModifiedFactorization",
    "OpenChain",
    "OperatorPolynomial",
    "ReflectionParams",
    "TwistConfig",
    "TwistedChain",
    "eigenvalue_polynomials",
    "match_spectra",
    "newton_multistart",
]
