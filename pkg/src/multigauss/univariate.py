"""Univariate flat-top / cusped Gaussian generalization.

The density is

    p(x) = [1 - (1 - exp(-(x-mu)^2 / (2 sigma^2)))^M] / (c0(M) sqrt(2 pi) sigma),

a symmetric bump that is exactly Gaussian at ``M = 1``, increasingly
flat-topped as ``M`` grows, and cusped at the mode for ``0 < M < 1``.  The
same function expands into an alternating series of Gaussians with common
mean and component widths ``sigma / sqrt(m)``, which is what makes the CDF,
generating functions and moments tractable.

Evaluation strategy: the closed form above is numerically stable for every
``M`` and is always the production density path; the Gaussian series is kept
as a verification target (`pdf_series`).  The CDF uses the complementary
error-function series where it is well conditioned and falls back to
adaptive quadrature of the closed-form density when the series condition
number exceeds 1e6 (large integer ``M``) or, for fractional ``M``, to a
Gauss-Jacobi rule near the mode where the series converges too slowly.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad as _quad
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc as _erfc_vec, ndtri as _ndtri, roots_jacobi

from .series import (
    DEFAULT_POLICY,
    SeriesNotConverged,
    SeriesResult,
    ShapeParam,
    TruncationFlag,
    TruncationPolicy,
    _Neumaier,
    _dd_mul_f,
    _two_prod,
    series_s,
    series_tail,
    signed_coeffs,
    xi_coeff,
)

__all__ = ["MultiGauss", "mg_profile"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

#: Above this condition number of the coefficient series, the erf-series CDF
#: has lost too many digits and adaptive quadrature of the stable closed-form
#: density is used instead.
_CDF_CONDITION_LIMIT = 1e6

#: Half-width (in units of sigma) below which the fractional-M CDF switches
#: from the complementary-erfc series to a Gauss-Jacobi rule centred on the
#: mode, where the series needs too many terms.
_CDF_CENTER_BAND = 0.3


def _profile_tail_series(w: float, shape: ShapeParam) -> float:
    """Far-tail profile ``sum_m C(M,m)(-1)^(m-1) e^(-m w)``.

    With ``e^-w`` small the leading term dominates and every term carries
    full relative precision, unlike the closed form whose output quantizes
    once ``(1 - e^-w)^M`` needs more than float precision.
    """
    g = math.exp(-w)
    if g == 0.0:
        return 0.0
    v = shape.value
    cap = shape.int_value if shape.is_integer else 64
    b = 1.0
    gm = 1.0
    acc = 0.0
    for m in range(1, cap + 1):
        b = b * (v - m + 1) / m
        gm *= g
        term = b * gm
        if m % 2 == 0:
            term = -term
        acc += term
        if gm == 0.0 or abs(term) < 1e-22 * abs(acc):
            break
    return acc


def mg_profile(w, m_shape):
    """Peak-relative density profile ``1 - (1 - e^-w)^M`` for ``w >= 0``.

    Accepts scalars or arrays.  Near the peak the closed form is evaluated
    through ``expm1``/``log``; in the far tail (``w`` beyond ``ln M + 4``)
    the closed form has exhausted float resolution and the rapidly
    convergent Gaussian series takes over, keeping full *relative* precision
    all the way into the underflow region.
    """
    shape = ShapeParam.of(m_shape)
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    if shape.is_integer and shape.int_value == 1:
        out = np.exp(-w)
        return float(out) if scalar else out
    t = -np.expm1(-w)  # 1 - e^-w, exact near 0
    with np.errstate(divide="ignore"):
        logt = np.log(t)
    out = -np.expm1(shape.value * logt)
    w_switch = max(4.0, math.log(max(shape.value, 1.0)) + 4.0)
    if scalar:
        if float(w) > w_switch:
            return _profile_tail_series(float(w), shape)
        return float(out)
    far = w > w_switch
    if np.any(far):
        out = np.array(out, copy=True)
        idx = np.nonzero(far)
        vals = [_profile_tail_series(float(wv), shape) for wv in np.asarray(w)[idx]]
        out[idx] = vals
    return out


def _gauss_raw_moment_poly(k: int, mu: float):
    """Coefficients ``a_j`` with ``E[X^k] = sum_j a_j s^j`` for X ~ N(mu, s).

    From the recursion ``g_k = mu g_{k-1} + (k-1) s g_{k-2}`` in the variance
    ``s``; exact rational/polynomial arithmetic in float.
    """
    if k == 0:
        return [1.0]
    prev2 = [1.0]
    prev = [mu]
    for order in range(2, k + 1):
        nxt = [0.0] * max(len(prev), len(prev2) + 1)
        for j, c in enumerate(prev):
            nxt[j] += mu * c
        for j, c in enumerate(prev2):
            nxt[j + 1] += (order - 1) * c
        prev2, prev = prev, nxt
    return prev


class MultiGauss:
    """Symmetric distribution with location ``mu``, scale ``sigma``, shape ``M``.

    Immutable after construction; the normalization constant and the first
    four moment-coefficient ratios are precomputed.  All evaluation methods
    are safe for concurrent use; `sample` requires a caller-owned
    ``numpy.random.Generator`` that must not be shared between threads.
    """

    def __init__(self, mu: float, sigma: float, m, policy: TruncationPolicy | None = None):
        mu = float(mu)
        sigma = float(sigma)
        if not math.isfinite(mu):
            raise ValueError(f"mu must be finite, got {mu!r}")
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise ValueError(f"sigma must be a positive finite real, got {sigma!r}")
        self._mu = mu
        self._sigma = sigma
        self._shape = ShapeParam.of(m)
        self._policy = policy if policy is not None else DEFAULT_POLICY
        if not isinstance(self._policy, TruncationPolicy):
            raise TypeError("policy must be a TruncationPolicy")
        self._c0_result = series_s(0.5, self._shape, self._policy)
        c0 = self._c0_result.value
        if not (math.isfinite(c0) and c0 > 0.0):
            raise ValueError(
                f"normalization constant is not positive/finite for M={self._shape.value}"
            )
        # Estimated relative error of the normalization: double-double terms
        # are exact while the binomial coefficients fit in 53 bits (M <= 57);
        # beyond that the condition number eats plain float precision.
        exact_terms = self._shape.is_integer and self._shape.int_value <= 57
        err_floor = 1e-30 if exact_terms else 2e-16
        if self._c0_result.condition_number * err_floor > 1e-3:
            raise SeriesNotConverged(
                f"normalization for M={self._shape.value} retains no significant digits "
                f"(condition number {self._c0_result.condition_number:.3g})"
            )
        self._xi = tuple(xi_coeff(n, self._shape, self._policy) for n in range(1, 5))
        self._xi_extra: dict[int, float] = {}
        self._coeff_cache = signed_coeffs(self._shape, self._policy.max_terms)
        self._gj_rule = None
        self._inverse_table = None

    # -- parameters ---------------------------------------------------------

    @property
    def mu(self) -> float:
        return self._mu

    @property
    def sigma(self) -> float:
        return self._sigma

    @property
    def shape(self) -> ShapeParam:
        return self._shape

    @property
    def policy(self) -> TruncationPolicy:
        return self._policy

    @property
    def c0(self) -> float:
        """Normalization constant ``S(1/2; M)``."""
        return self._c0_result.value

    @property
    def c0_result(self) -> SeriesResult:
        """Full series metadata behind :attr:`c0`."""
        return self._c0_result

    def xi(self, n: int) -> float:
        """Moment coefficient ratio ``xi_n = S(n+1/2; M) / S(1/2; M)``."""
        if n == 0:
            return 1.0
        if 1 <= n <= 4:
            return self._xi[n - 1]
        if n not in self._xi_extra:
            self._xi_extra[n] = xi_coeff(n, self._shape, self._policy)
        return self._xi_extra[n]

    def __repr__(self) -> str:
        return f"MultiGauss(mu={self._mu:g}, sigma={self._sigma:g}, m={self._shape.value:g})"

    # -- density ------------------------------------------------------------

    def pdf(self, x):
        """Density at ``x`` (scalar or array), by the stable closed form."""
        x = np.asarray(x, dtype=float)
        u = (x - self._mu) / self._sigma
        w = 0.5 * u * u
        return mg_profile(w, self._shape) / (self.c0 * _SQRT_2PI * self._sigma)

    def logpdf(self, x):
        """Log-density; tails handled without underflow up to ~38 sigma."""
        x = np.asarray(x, dtype=float)
        u = (x - self._mu) / self._sigma
        w = 0.5 * u * u
        core = mg_profile(w, self._shape)
        with np.errstate(divide="ignore"):
            out = np.log(core) - math.log(self.c0 * _SQRT_2PI * self._sigma)
        if out.ndim == 0:
            return float(out)
        return out

    def pdf_series(self, x: float) -> SeriesResult:
        """Density via the alternating Gaussian series, with quality metadata.

        This is the verification path: the value agrees with :meth:`pdf` up
        to the cancellation floor implied by ``condition_number``.  For
        fractional shapes the series is truncated per the policy; close to
        the mode it converges too slowly for the cap and honestly reports
        ``CAP_HIT``.
        """
        x = float(x)
        u = (x - self._mu) / self._sigma
        w = 0.5 * u * u
        norm = self.c0 * _SQRT_2PI * self._sigma
        acc = _Neumaier()
        abs_acc = _Neumaier()
        if self._shape.is_integer:
            mi = self._shape.int_value
            v = float(mi)
            b = 1.0
            for m in range(1, mi + 1):
                b = b * (v - m + 1) / m
                hi, lo = _two_prod(b, math.exp(-m * w))
                sign = 1.0 if (m % 2 == 1) else -1.0
                acc.add(sign * hi)
                acc.add(sign * lo)
                abs_acc.add(hi)
                abs_acc.add(lo)
            value = acc.total() / norm
            abs_sum = abs(abs_acc.total())
            cond = abs_sum / abs(acc.total()) if acc.total() != 0.0 else math.inf
            return SeriesResult(value, mi, max(cond, 1.0), TruncationFlag.EXACT)
        pol = self._policy
        b = 1.0
        v = self._shape.value
        terms_used = pol.max_terms
        flag = TruncationFlag.CAP_HIT
        for m in range(1, pol.max_terms + 1):
            b = b * (v - m + 1) / m
            term = b * math.exp(-m * w)
            if m % 2 == 0:
                term = -term
            acc.add(term)
            abs_acc.add(abs(term))
            if m >= pol.min_terms and abs(term) < pol.eps_abs:
                terms_used = m
                flag = TruncationFlag.TOLERANCE_MET
                break
        total = acc.total()
        cond = abs(abs_acc.total()) / abs(total) if total != 0.0 else math.inf
        return SeriesResult(total / norm, terms_used, max(cond, 1.0), flag)

    # -- cumulative distribution --------------------------------------------

    def cdf(self, x: float) -> float:
        """Cumulative distribution function, accurate to ~1e-13."""
        x = float(x)
        if math.isnan(x):
            return math.nan
        u = (x - self._mu) / self._sigma
        if u == 0.0:
            return 0.5
        if u < 0.0:
            return self._lower_half_cdf(-u)
        return 1.0 - self._lower_half_cdf(u)

    def _lower_half_cdf(self, au: float) -> float:
        """P(X <= mu - au*sigma) for au > 0."""
        if self._shape.is_integer:
            if self._c0_result.condition_number <= _CDF_CONDITION_LIMIT:
                return self._cdf_erfc_integer(au)
            return self._cdf_quadrature(au)
        if au <= _CDF_CENTER_BAND:
            return 0.5 - self._mode_band_mass(au)
        return self._cdf_erfc_fractional(au)

    def _cdf_erfc_integer(self, au: float) -> float:
        mi = self._shape.int_value
        v = float(mi)
        acc = _Neumaier()
        b = 1.0
        for m in range(1, mi + 1):
            b = b * (v - m + 1) / m
            term = b * math.erfc(au * math.sqrt(0.5 * m)) / math.sqrt(m)
            if m % 2 == 0:
                term = -term
            acc.add(term)
        val = acc.total() / (2.0 * self.c0)
        return min(max(val, 0.0), 1.0)

    def _cdf_erfc_fractional(self, au: float) -> float:
        # erfc(au * sqrt(m/2)) decays like exp(-au^2 m / 2); past m_star the
        # remaining terms are below 1e-20 of the result.
        m_star = min(int(90.0 / (au * au)) + 16, 200_000)
        coeffs = self._signed_coeffs(m_star)
        m_star = len(coeffs)
        ms = np.arange(1.0, m_star + 1.0)
        terms = coeffs * _erfc_vec(au * np.sqrt(0.5 * ms)) / np.sqrt(ms)
        if self._shape.value < 1.0:
            # all terms positive: pairwise summation is already exact enough
            val = float(np.sum(terms)) / (2.0 * self.c0)
        else:
            val = math.fsum(terms) / (2.0 * self.c0)
        return min(max(val, 0.0), 1.0)

    def _mode_band_mass(self, au: float) -> float:
        """integral of the pdf over [mu, mu + au*sigma] for 0 < au <= band.

        Splits the profile as ``1 - psi`` with ``psi(s) = (1 - e^(-s^2/2))^M
        = s^(2M) chi(s)`` and integrates the smooth factor ``chi`` against a
        Gauss-Jacobi rule with weight ``v^(2M)``, which handles the cusp of
        fractional shapes exactly.
        """
        v = self._shape.value
        nodes, weights = self._gauss_jacobi_rule()
        y = 0.5 * (au * nodes) ** 2
        # phi(y) = (1 - e^-y)/y, smooth and positive; phi(0) = 1
        phi = np.where(y > 0, -np.expm1(-y) / np.where(y > 0, y, 1.0), 1.0)
        piece = au ** (2.0 * v + 1.0) * 2.0 ** (-3.0 * v - 1.0) * float(
            np.dot(weights, np.exp(v * np.log(phi)))
        )
        return (au - piece) / (self.c0 * _SQRT_2PI)

    def _gauss_jacobi_rule(self):
        if self._gj_rule is None:
            xg, wg = roots_jacobi(24, 0.0, 2.0 * self._shape.value)
            self._gj_rule = (0.5 * (1.0 + xg), wg)
        return self._gj_rule

    def _cdf_quadrature(self, au: float) -> float:
        mval = self._shape.value
        bound = 0.5 * max(mval, 1.0) / self.c0 * math.erfc(au / math.sqrt(2.0))
        if au > 12.0:
            # analytic envelope M * Gaussian tail; already < 1e-30 here
            return min(bound, 1.0)
        x_lo = self._mu - au * self._sigma
        if au >= 5.0:
            # integrate the tail directly: 0.5 - (mass) would lose all
            # relative precision once the tail is below ~1e-10
            val, _ = _quad(self.pdf, -np.inf, x_lo, epsabs=0.0, epsrel=1e-10, limit=400)
            return min(max(val, 0.0), 1.0)
        val, _ = _quad(self.pdf, x_lo, self._mu, epsabs=1e-14, epsrel=1e-12, limit=400)
        return min(max(0.5 - val, 0.0), 1.0)

    def _signed_coeffs(self, n: int) -> np.ndarray:
        if self._shape.is_integer:
            return self._coeff_cache[: min(n, len(self._coeff_cache))]
        if n > len(self._coeff_cache):
            self._coeff_cache = signed_coeffs(self._shape, n)
        return self._coeff_cache[:n]

    # -- generating functions -------------------------------------------------

    def _weighted_exp_sum(self, g: float, shift: float) -> float:
        """``sum_m C(M,m)(-1)^(m-1) m^(-1/2) exp(g/m + shift)``.

        Callers arrange ``g/m + shift <= 0`` for every m, so no intermediate
        overflows.  The exponential factor tends to ``e^shift``, so for
        fractional shapes the tail is completed order by order in
        ``g^j / (j! m^j)`` through the zeta-completed tails of exponent
        ``1/2 + j``; the summation window grows with ``|g|`` so that the
        order expansion always converges immediately.
        """
        if self._shape.is_integer:
            mi = self._shape.int_value
            v = float(mi)
            acc = _Neumaier()
            b = 1.0
            for m in range(1, mi + 1):
                b = b * (v - m + 1) / m
                hi, lo = _dd_mul_f(*_two_prod(b, math.exp(g / m + shift)), 1.0 / math.sqrt(m))
                sign = 1.0 if (m % 2 == 1) else -1.0
                acc.add(sign * hi)
                acc.add(sign * lo)
            return acc.total()
        n_eff = max(self._policy.max_terms, min(int(4.0 * abs(g)) + 1, 500_000))
        coeffs = self._signed_coeffs(n_eff)
        n_eff = len(coeffs)
        ms = np.arange(1.0, n_eff + 1.0)
        acc = math.fsum(coeffs * np.exp(g / ms + shift) / np.sqrt(ms))
        factor = math.exp(shift)  # underflow to 0 only when the tail truly vanishes
        for j in range(0, 200):
            tail_j, _ = series_tail(0.5 + j, self._shape, n_eff)
            contrib = factor * tail_j
            acc += contrib
            if j >= 2 and abs(contrib) < 1e-18 * max(abs(acc), 1e-300):
                break
            factor *= g / (j + 1)
            if factor == 0.0:
                break
        return acc

    def mgf(self, t: float) -> float:
        """Moment generating function; finite for every real ``t``.

        Raises ``OverflowError`` when the value itself exceeds the floating
        range, which is the out-of-domain signal for extreme ``t``.
        """
        t = float(t)
        if t == 0.0:
            return 1.0
        beta = 0.5 * (self._sigma * t) ** 2
        # pull e^beta out of every term: exp(beta/m) = e^beta exp(beta(1-m)/m)
        bracket = self._weighted_exp_sum(beta, -beta)
        if not bracket > 0.0:
            raise SeriesNotConverged(
                f"MGF series cancelled catastrophically for M={self._shape.value}, t={t}"
            )
        return math.exp(self._mu * t + beta + math.log(bracket / self.c0))

    def cf(self, omega: float) -> complex:
        """Characteristic function ``E[e^(i omega X)]``; modulus <= 1.

        Equals the analytic continuation of the MGF at ``i omega``: the
        component Gaussians contribute ``exp(-sigma^2 omega^2 / (2m))``
        weighted by ``C(M,m)(-1)^(m-1)/sqrt(m)``, with the location entering
        only through the phase ``e^(i omega mu)``.
        """
        omega = float(omega)
        if omega == 0.0:
            return complex(1.0, 0.0)
        gamma = 0.5 * (self._sigma * omega) ** 2
        r = self._weighted_exp_sum(-gamma, 0.0) / self.c0
        phase = self._mu * omega
        return complex(math.cos(phase) * r, math.sin(phase) * r)

    # -- moments and cumulants -------------------------------------------------

    def raw_moment(self, k: int) -> float:
        """k-th raw moment ``E[X^k]``.

        Each component Gaussian contributes its raw moment (three-term
        recursion in the component variance), so the result collapses to a
        polynomial in ``sigma^2`` with the ``xi_j`` ratios as weights:
        ``E[X] = mu``, ``E[X^2] = mu^2 + sigma^2 xi_1``, ``E[X^4] = mu^4 +
        6 mu^2 sigma^2 xi_1 + 3 sigma^4 xi_2``, and so on.
        """
        if not (isinstance(k, (int, np.integer)) and k >= 0):
            raise ValueError(f"k must be a non-negative integer, got {k!r}")
        if k == 0:
            return 1.0
        poly = _gauss_raw_moment_poly(int(k), self._mu)
        s2 = self._sigma * self._sigma
        total = 0.0
        power = 1.0
        for j, c in enumerate(poly):
            if c != 0.0:
                total += c * power * self.xi(j)
            power *= s2
        return total

    def cumulant(self, k: int) -> float:
        """k-th cumulant via the moment-to-cumulant recursion.

        Closed forms: ``k1 = mu``, ``k2 = sigma^2 xi_1``, ``k3 = 0``,
        ``k4 = 3 sigma^4 (xi_2 - xi_1^2)``; all odd cumulants >= 3 vanish by
        symmetry.
        """
        if not (isinstance(k, (int, np.integer)) and k >= 1):
            raise ValueError(f"k must be a positive integer, got {k!r}")
        k = int(k)
        moments = [self.raw_moment(i) for i in range(0, k + 1)]
        kappas = [0.0] * (k + 1)
        for order in range(1, k + 1):
            acc = moments[order]
            for j in range(1, order):
                acc -= math.comb(order - 1, j - 1) * kappas[j] * moments[order - j]
            kappas[order] = acc
        return kappas[k]

    def variance(self) -> float:
        return self._sigma * self._sigma * self.xi(1)

    # -- quantiles and sampling -------------------------------------------------

    def quantile(self, u: float) -> float:
        """Inverse CDF: the ``x`` with ``|cdf(x) - u| <= 1e-12``.

        Bracket expansion around the mode, bisection, then Newton polish
        with the density as derivative.
        """
        u = float(u)
        if not (0.0 < u < 1.0):
            raise ValueError(f"quantile level must lie strictly in (0, 1), got {u!r}")
        if u == 0.5:
            return self._mu
        half = self._sigma
        lo, hi = self._mu - half, self._mu + half
        for _ in range(64):
            if self.cdf(lo) <= u:
                break
            half *= 2.0
            lo = self._mu - half
        half = self._sigma
        for _ in range(64):
            if self.cdf(hi) >= u:
                break
            half *= 2.0
            hi = self._mu + half
        x = 0.5 * (lo + hi)
        for _ in range(28):
            f = self.cdf(x)
            if f < u:
                lo = x
            else:
                hi = x
            x = 0.5 * (lo + hi)
        # Newton polish; fall back to bisection when it leaves the bracket
        for _ in range(40):
            f = self.cdf(x)
            err = f - u
            if abs(err) <= 1e-13:
                break
            if f < u:
                lo = max(lo, x)
            else:
                hi = min(hi, x)
            p = self.pdf(x)
            step_ok = p > 0.0 and math.isfinite(p)
            x_new = x - err / p if step_ok else 0.5 * (lo + hi)
            if not (lo <= x_new <= hi):
                x_new = 0.5 * (lo + hi)
            if x_new == x:
                break
            x = x_new
        return x

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` variates by inverse-CDF sampling.

        Each variate is the quantile of an independent uniform; for speed the
        quantile function is represented by a monotone PCHIP interpolant of
        ``x`` against the Gaussian-score parameterization ``z = ndtri(cdf(x))``
        (801 nodes, interpolation error below ~1e-6 sigma, far inside every
        statistical tolerance).  Identical generator state yields identical
        output.
        """
        if not (isinstance(n, (int, np.integer)) and n >= 1):
            raise ValueError(f"n must be a positive integer, got {n!r}")
        if not isinstance(rng, np.random.Generator):
            raise TypeError("rng must be a numpy.random.Generator")
        interp, z_lo, z_hi = self._quantile_table()
        u = rng.random(int(n))
        with np.errstate(divide="ignore"):
            z = _ndtri(u)
        np.clip(z, z_lo, z_hi, out=z)
        return interp(z)

    def _quantile_table(self):
        if self._inverse_table is None:
            reach = 7.6 + math.sqrt(2.0 * math.log(max(self._shape.value, 1.0))) + 0.5
            xs = self._mu + self._sigma * np.linspace(-reach, reach, 801)
            fs = np.array([self.cdf(float(x)) for x in xs])
            keep = (fs > 1e-300) & (fs < 1.0 - 1e-16)
            xs, fs = xs[keep], fs[keep]
            zs = _ndtri(fs)
            inc = np.concatenate(([True], np.diff(zs) > 0.0))
            xs, zs = xs[inc], zs[inc]
            self._inverse_table = (PchipInterpolator(zs, xs), zs[0], zs[-1])
        return self._inverse_table
