"""Flat-top and cusped generalizations of the Gaussian distribution.

A single positive shape parameter ``M`` morphs the classic bell curve:
``M = 1`` is exactly Gaussian, ``M > 1`` flattens the top (approaching a
smoothed box as ``M`` grows), and ``0 < M < 1`` sharpens it into a cusp.
The package provides the univariate family (`MultiGauss`), its log-scale
counterpart (`LogMultiGauss`), the multivariate extension (`MvMultiGauss`),
the underlying alternating-series machinery with cancellation-error
tracking, an independent verification oracle, and a CLI that evaluates,
samples, verifies, and emits figure data.
"""

from .series import (
    DEFAULT_POLICY,
    INTEGER_DETECTION_TOL,
    SeriesNotConverged,
    SeriesResult,
    ShapeParam,
    TruncationFlag,
    TruncationPolicy,
    binom_coeff,
    series_s,
    series_tail,
    signed_coeffs,
    xi_coeff,
)
from .univariate import MultiGauss, mg_profile
from .logmg import LogMultiGauss
from .multivariate import BivariateParams, MvMultiGauss, bivariate_pdf
from . import oracle

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_POLICY",
    "INTEGER_DETECTION_TOL",
    "BivariateParams",
    "LogMultiGauss",
    "MultiGauss",
    "MvMultiGauss",
    "SeriesNotConverged",
    "SeriesResult",
    "ShapeParam",
    "TruncationFlag",
    "TruncationPolicy",
    "binom_coeff",
    "bivariate_pdf",
    "mg_profile",
    "oracle",
    "series_s",
    "series_tail",
    "signed_coeffs",
    "xi_coeff",
    "__version__",
]
