"""Discrete curvature, beta numbers and multiscale inequalities for atomic measures."""

__version__ = "0.1.0"

from .beta import BetaParams, ScaleProfile, beta_ball, beta_cube, best_plane_l2, best_plane_lp, scale_profile
from .curvature import CurvatureEstimate, CurvatureParams, curvature_exact, curvature_mc, e_integrand, m_p_functional
from .inequalities import (
    MultiscaleParams,
    VerificationReport,
    gamma_lemma1,
    gamma_lemma2,
    multiscale_integral,
    verify_corollary_lw11,
    verify_lemma1,
    verify_lemma2,
    verify_pointwise_bounds,
)
from .measure import Ball, DyadicCube, InputError, PointCloudMeasure, load_csv
from .synth import synthesize
