"""Shared mathematical kernels: normal distribution, Hermite polynomials,
Black-Scholes pricing, and the Gaussian heat kernel the expansion terms
are built from.

All functions are pure and operate on plain floats; everything downstream
(expansion terms, FD boundary data, calibration objectives) is assembled
from these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import NamedTuple

__all__ = [
    "DomainError",
    "OptionQuery",
    "DPair",
    "norm_cdf",
    "norm_pdf",
    "norm_ppf",
    "hermite",
    "h_tilde",
    "phi_t",
    "d_pair",
    "d_minus",
    "bs_call",
    "c_rel",
    "bs_implied_vol",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD_NORMAL = NormalDist()


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class OptionQuery:
    """European call contract description.

    Attributes:
        spot: current underlying price S > 0.
        strike: strike K > 0.
        rate: continuously compounded interest rate (per year).
        expiry: time to expiry in years, >= 0.
    """

    spot: float
    strike: float
    rate: float = 0.0
    expiry: float = 1.0

    def __post_init__(self) -> None:
        if not (self.spot > 0.0):
            raise DomainError(f"spot must be positive, got {self.spot}")
        if not (self.strike > 0.0):
            raise DomainError(f"strike must be positive, got {self.strike}")
        if not (self.expiry >= 0.0):
            raise DomainError(f"expiry must be nonnegative, got {self.expiry}")

    @property
    def forward(self) -> float:
        """Forward price F = S e^{rt}."""
        return self.spot * math.exp(self.rate * self.expiry)

    @property
    def log_price(self) -> float:
        """x = ln(S e^{rt})."""
        return math.log(self.spot) + self.rate * self.expiry

    @property
    def log_moneyness(self) -> float:
        """y = ln(S e^{rt} / K); invariant under joint (S, K) rescaling."""
        return self.log_price - math.log(self.strike)


class DPair(NamedTuple):
    d_plus: float
    d_minus: float


def norm_cdf(x: float) -> float:
    """Standard normal CDF via erfc; absolute error below 1e-15."""
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_pdf(x: float) -> float:
    """Standard normal density e^{-x^2/2} / sqrt(2 pi)."""
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_ppf(p: float) -> float:
    """Inverse standard normal CDF."""
    if not (0.0 < p < 1.0):
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


def hermite(n: int, x: float) -> float:
    """Probabilist's Hermite polynomial H_n(x) for 0 <= n <= 5.

    Uses the recurrence H_{n+1}(x) = x H_n(x) - n H_{n-1}(x).
    """
    if not isinstance(n, int) or n < 0 or n > 5:
        raise DomainError(f"hermite order must be an integer in 0..5, got {n}")
    h_prev, h = 1.0, x
    if n == 0:
        return 1.0
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    return h


def h_tilde(n: int, u: float, sigma: float, t: float) -> float:
    """Scaled Hermite factor (-1/(sigma sqrt(t)))^n H_n(l(u)).

    Here l(u) = u/(sigma sqrt(t)) - sigma sqrt(t)/2, so that the n-th
    u-derivative of the Gaussian kernel phi_t equals h_tilde(n) * phi_t.
    """
    if not (sigma > 0.0):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (t > 0.0):
        raise DomainError(f"t must be positive, got {t}")
    v = sigma * math.sqrt(t)
    ell = u / v - 0.5 * v
    return (-1.0 / v) ** n * hermite(n, ell)


def phi_t(u: float, sigma: float, t: float) -> float:
    """Heat kernel of the forward Black-Scholes generator.

    phi_t(u, sigma) = exp(-l(u)^2/2) / (sigma sqrt(2 pi t)); integrates
    to 1 in u and satisfies d^n/du^n phi_t = h_tilde(n) phi_t.
    """
    if not (sigma > 0.0):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (t > 0.0):
        raise DomainError(f"t must be positive, got {t}")
    v = sigma * math.sqrt(t)
    ell = u / v - 0.5 * v
    return math.exp(-0.5 * ell * ell) / (sigma * math.sqrt(2.0 * math.pi * t))


def d_minus(y: float, sigma: float, t: float) -> float:
    """d_- = y/(sigma sqrt(t)) - sigma sqrt(t)/2 from log-moneyness."""
    if not (sigma > 0.0):
        raise DomainError(f"sigma must be positive, got {sigma}")
    if not (t > 0.0):
        raise DomainError(f"t must be positive, got {t}")
    v = sigma * math.sqrt(t)
    return y / v - 0.5 * v


def d_pair(query: OptionQuery, sigma: float) -> DPair:
    """Black-Scholes arguments d_+/- with d_+ - d_- = sigma sqrt(t)."""
    if not (query.expiry > 0.0):
        raise DomainError("d_pair requires t > 0; handle expiry separately")
    dm = d_minus(query.log_moneyness, sigma, query.expiry)
    return DPair(dm + sigma * math.sqrt(query.expiry), dm)


def bs_call(query: OptionQuery, sigma: float) -> float:
    """Black-Scholes call price C = S N(d_+) - K e^{-rt} N(d_-).

    At expiry (t = 0) the payoff max(S - K, 0) is returned directly;
    sigma = 0 collapses to the discounted intrinsic value.
    """
    if sigma < 0.0:
        raise DomainError(f"sigma must be nonnegative, got {sigma}")
    t = query.expiry
    if t == 0.0:
        return max(query.spot - query.strike, 0.0)
    disc_k = query.strike * math.exp(-query.rate * t)
    if sigma == 0.0:
        return max(query.spot - disc_k, 0.0)
    dp, dm = d_pair(query, sigma)
    return query.spot * norm_cdf(dp) - disc_k * norm_cdf(dm)


def c_rel(y: float, sigma: float, t: float) -> float:
    """Strike-normalized forward call price e^y N(d_+) - N(d_-).

    Equals K^{-1} e^{rt} bs_call for any (S, K, r) with ln(S e^{rt}/K) = y.
    """
    if sigma < 0.0:
        raise DomainError(f"sigma must be nonnegative, got {sigma}")
    if t < 0.0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if t == 0.0 or sigma == 0.0:
        return max(math.exp(y) - 1.0, 0.0)
    dm = d_minus(y, sigma, t)
    dp = dm + sigma * math.sqrt(t)
    return math.exp(y) * norm_cdf(dp) - norm_cdf(dm)


def _c_rel_vega(y: float, sigma: float, t: float) -> float:
    # d/dsigma c_rel = sqrt(t) N'(d_-)
    return math.sqrt(t) * norm_pdf(d_minus(y, sigma, t))


def bs_implied_vol(
    price: float,
    y: float,
    t: float,
    lo: float = 1e-6,
    hi: float = 5.0,
    tol: float = 1e-12,
) -> float:
    """Invert c_rel in sigma by bracketed Newton with bisection fallback.

    Raises DomainError if the price lies outside the no-arbitrage band
    (intrinsic, e^y) or outside the bracket [lo, hi].
    """
    if not (t > 0.0):
        raise DomainError("implied vol requires t > 0")
    intrinsic = max(math.exp(y) - 1.0, 0.0)
    if not (intrinsic < price < math.exp(y)):
        raise DomainError(
            f"price {price} outside the no-arbitrage band "
            f"({intrinsic}, {math.exp(y)})"
        )
    f_lo = c_rel(y, lo, t) - price
    f_hi = c_rel(y, hi, t) - price
    if f_lo > 0.0 or f_hi < 0.0:
        raise DomainError(f"price {price} not bracketed by sigma in [{lo}, {hi}]")
    sigma = 0.5 * (lo + hi)
    for _ in range(200):
        f = c_rel(y, sigma, t) - price
        if abs(f) <= tol:
            return sigma
        if f > 0.0:
            hi = sigma
        else:
            lo = sigma
        vega = _c_rel_vega(y, sigma, t)
        step_ok = vega > 0.0
        if step_ok:
            candidate = sigma - f / vega
            step_ok = lo < candidate < hi
        sigma = candidate if step_ok else 0.5 * (lo + hi)
    return sigma
