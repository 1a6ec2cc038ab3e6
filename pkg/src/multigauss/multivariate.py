"""N-dimensional generalization with the bivariate case as a specialization.

The density depends on the point only through the Mahalanobis quadratic form
``Q(x) = (x - mean)^T Sigma^{-1} (x - mean)`` of the first-component
covariance ``Sigma``:

    p(x) = [1 - (1 - e^(-Q/2))^M] / (S(N/2; M) (2 pi)^(N/2) det(Sigma)^(1/2)).

The m-th term of the binomial expansion is the Gaussian with covariance
``Sigma / m``, so term-wise integration gives total mass ``S(N/2; M)`` for
the unnormalized profile - the normalization therefore uses ``S(N/2; M)``,
not the one-dimensional constant ``S(1/2; M)`` (the two agree only at
``N = 1``).  An ``S(1/2)``-normalized density would integrate to
``S(1/2)/S(N/2) != 1``; the verification suite reports that discrepancy.

No multivariate CDF is provided (no tractable form exists), and marginals of
this family are not members of the family, so no marginal objects exist
either.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass
from scipy.linalg import solve_triangular

from .series import DEFAULT_POLICY, ShapeParam, TruncationPolicy, series_s
from .univariate import mg_profile

__all__ = ["MvMultiGauss", "BivariateParams", "bivariate_pdf"]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BivariateParams:
    """Location/scale/correlation parameterization of the bivariate case."""

    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    rho: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "sigma1", "sigma2", "rho"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.sigma1 <= 0.0 or self.sigma2 <= 0.0:
            raise ValueError("sigma1 and sigma2 must be positive")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"|rho| must be strictly below 1, got {self.rho!r}")

    def covariance(self) -> np.ndarray:
        """The equivalent first-component covariance matrix."""
        off = self.rho * self.sigma1 * self.sigma2
        return np.array([[self.sigma1**2, off], [off, self.sigma2**2]])

    def mean(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2])


class MvMultiGauss:
    """N-dimensional flat-top/cusped density with rejection sampling.

    ``cov`` is the covariance of the leading (m = 1) component; it must be
    symmetric to 1e-12 relative and positive definite (the Cholesky
    factorization is taken at construction and a failure names the first
    non-positive leading minor).  ``N = 1`` reduces exactly to the
    univariate density.
    """

    def __init__(self, mean, cov, m, policy: TruncationPolicy | None = None):
        mean = np.array(mean, dtype=float, copy=True).reshape(-1)
        if mean.size < 1:
            raise ValueError("mean must have at least one component")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean must be finite")
        cov = np.array(cov, dtype=float, copy=True)
        n = mean.size
        if cov.shape != (n, n):
            raise ValueError(f"cov must be {n}x{n}, got {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise ValueError("cov must be finite")
        scale = float(np.abs(cov).max())
        if scale <= 0.0 or float(np.abs(cov - cov.T).max()) > 1e-12 * scale:
            raise ValueError("cov must be symmetric to 1e-12 relative tolerance")
        cov = 0.5 * (cov + cov.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError(
                f"cov is not positive definite (first failing leading minor: "
                f"{self._first_bad_minor(cov)})"
            ) from None
        self._mean = mean
        self._cov = cov
        self._chol = chol
        self._shape = ShapeParam.of(m)
        self._policy = policy if policy is not None else DEFAULT_POLICY
        res = series_s(0.5 * n, self._shape, self._policy)
        if not (math.isfinite(res.value) and res.value > 0.0):
            raise ValueError(f"normalization failed for M={self._shape.value}, N={n}")
        self._norm_result = res
        self._log_det_half = float(np.sum(np.log(np.diag(chol))))
        for arr in (self._mean, self._cov, self._chol):
            arr.setflags(write=False)

    @staticmethod
    def _first_bad_minor(cov: np.ndarray) -> int:
        for k in range(1, cov.shape[0] + 1):
            try:
                np.linalg.cholesky(cov[:k, :k])
            except np.linalg.LinAlgError:
                return k
        return cov.shape[0]

    @property
    def dim(self) -> int:
        return self._mean.size

    @property
    def mean(self) -> np.ndarray:
        return self._mean

    @property
    def cov(self) -> np.ndarray:
        return self._cov

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular Cholesky factor of ``cov``."""
        return self._chol

    @property
    def shape(self) -> ShapeParam:
        return self._shape

    @property
    def policy(self) -> TruncationPolicy:
        return self._policy

    @property
    def norm_const(self) -> float:
        """``S(N/2; M)``, the mass of the unnormalized profile."""
        return self._norm_result.value

    def __repr__(self) -> str:
        return f"MvMultiGauss(dim={self.dim}, m={self._shape.value:g})"

    def mahalanobis_sq(self, x) -> np.ndarray | float:
        """Quadratic form ``(x - mean)^T Sigma^{-1} (x - mean)``."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have dimension {self.dim}, got {pts.shape[1]}")
        z = solve_triangular(self._chol, (pts - self._mean).T, lower=True)
        q = np.sum(z * z, axis=0)
        if single:
            return float(q[0])
        return q

    def pdf(self, x):
        """Density at a point of shape (N,) or a batch of shape (k, N)."""
        q = self.mahalanobis_sq(x)
        core = mg_profile(np.asarray(q) * 0.5, self._shape)
        norm = self.norm_const * _TWO_PI ** (0.5 * self.dim) * math.exp(self._log_det_half)
        out = core / norm
        if np.isscalar(q) or np.ndim(q) == 0:
            return float(out)
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Rejection sampling against the leading Gaussian component.

        The proposal is N(mean, Sigma) and the acceptance probability is
        ``[1 - (1 - e^(-Q/2))^M] / (c e^(-Q/2))`` with envelope constant
        ``c = M`` for ``M >= 1`` and ``c = 1`` for ``M <= 1`` (both are valid
        since ``1 - (1-g)^M <= c g``).  At ``M = 1`` the acceptance is
        identically one and the output is exactly the Gaussian proposal
        stream.  Expected acceptance rate: ``S(N/2; M) / c``.
        """
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError(f"n must be a positive integer, got {n!r}")
        if not isinstance(rng, np.random.Generator):
            raise TypeError("rng must be a numpy.random.Generator")
        n = int(n)
        mval = self._shape.value
        if self._shape.is_integer and self._shape.int_value == 1:
            z = rng.standard_normal((n, self.dim))
            return self._mean + z @ self._chol.T
        c = max(mval, 1.0)
        rate = self.norm_const / c
        out = np.empty((n, self.dim))
        filled = 0
        while filled < n:
            k = min(int((n - filled) / max(rate, 1e-3) * 1.2) + 64, 2_000_000)
            z = rng.standard_normal((k, self.dim))
            u = rng.random(k)
            w = 0.5 * np.sum(z * z, axis=1)
            ratio = np.empty(k)
            near = w <= 700.0
            ratio[near] = mg_profile(w[near], self._shape) / (c * np.exp(-w[near]))
            ratio[~near] = mval / c  # asymptotic value of the ratio in the far tail
            accept = u < ratio
            n_acc = int(np.count_nonzero(accept))
            take = min(n_acc, n - filled)
            if take:
                pts = self._mean + z[accept][:take] @ self._chol.T
                out[filled : filled + take] = pts
                filled += take
        return out


def _bivariate_norm(shape: ShapeParam, policy: TruncationPolicy) -> float:
    return series_s(1.0, shape, policy).value


def bivariate_pdf(params: BivariateParams, m, x1, x2, policy: TruncationPolicy | None = None):
    """Bivariate density in the (mu, sigma, rho) parameterization.

    Evaluates the elliptic quadratic form

        z = d1^2/s1^2 - 2 rho d1 d2/(s1 s2) + d2^2/s2^2,   Q = z/(1 - rho^2),

    and the closed-form profile normalized by ``S(1; M)``.  Agrees with
    :class:`MvMultiGauss` built from ``params.covariance()`` to ~1e-13.
    """
    if not isinstance(params, BivariateParams):
        raise TypeError("params must be a BivariateParams")
    shape = ShapeParam.of(m)
    if policy is None:
        policy = DEFAULT_POLICY
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    scalar = x1.ndim == 0 and x2.ndim == 0
    d1 = (x1 - params.mu1) / params.sigma1
    d2 = (x2 - params.mu2) / params.sigma2
    one_minus_r2 = 1.0 - params.rho * params.rho
    z = d1 * d1 - 2.0 * params.rho * d1 * d2 + d2 * d2
    w = 0.5 * z / one_minus_r2
    norm = (
        _bivariate_norm(shape, policy)
        * _TWO_PI
        * params.sigma1
        * params.sigma2
        * math.sqrt(one_minus_r2)
    )
    out = mg_profile(w, shape) / norm
    if scalar:
        return float(out)
    return out
