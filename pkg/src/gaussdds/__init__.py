"""Numerical lab for quadratic double Dirichlet series over the Gaussian field."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .characters import QuadraticCharacter, UnitTwist, cg_mul, chi_eval, conductor_norm, symbol, symbol_euler
from .ddseries import (
    ConductorParams,
    WeightSpec,
    bilinear_char_sum,
    check_fe_nontrivial,
    check_fe_psi1,
    d_sum,
    residue_s1,
    z_direct,
    z_via_l,
)
from .gaussian import GaussianInt, divrem, enumerate_primary, factor, is_primary, primary_associate, squarefree_decompose
from .lfunctions import ContourSpec, LValue, euler_adjust, gfactor, l_continued, l_critical, l_direct, log_gamma, zeta_k2

__all__ = [
    "BACKEND", "ConductorParams", "ContourSpec", "GaussianInt", "LValue", "QuadraticCharacter", "UnitTwist",
    "WeightSpec", "bilinear_char_sum", "cg_mul", "check_fe_nontrivial", "check_fe_psi1", "chi_eval",
    "conductor_norm", "d_sum", "divrem", "enumerate_primary", "euler_adjust", "factor", "gfactor",
    "is_primary", "l_continued", "l_critical", "l_direct", "log_gamma", "primary_associate",
    "residue_s1", "squarefree_decompose", "symbol", "symbol_euler", "z_direct", "z_via_l", "zeta_k2",
]
