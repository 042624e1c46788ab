"""Closed-form vol-of-vol series expansion for the lognormal SABR model
with optional mean reversion: first- and second-order price corrections,
the implied-volatility coefficients, and the hedge-ratio expansion.

The forward price is approximated as

    F = F_BS + nu * F1 + nu^2 * F2 + O(nu^3),

where F1 and F2 are Gaussian-kernel expressions of the form
K * sum_i a_i * h_tilde(i, y) * phi_t(y, sigma). The implied volatility
carries the matching expansion sigma + nu*e1 + nu^2*e2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import (
    DomainError,
    OptionQuery,
    c_rel,
    d_minus,
    d_pair,
    h_tilde,
    norm_cdf,
    norm_pdf,
    phi_t,
)

__all__ = [
    "SabrParams",
    "ExpansionPrice",
    "VolQuote",
    "f1_term",
    "f1_coeffs",
    "f2_coeffs",
    "f2_term",
    "price_sa2",
    "price_sa2_rel",
    "implied_e1",
    "implied_e2",
    "sigma_d",
    "price_d",
    "delta_sa2",
]

SIGMA_FLOOR = 1e-8


@dataclass(frozen=True)
class SabrParams:
    """Model parameters. Mean-reversion speed is kappa = nu * kappa0."""

    sigma0: float
    nu: float
    rho: float
    kappa0: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma0 > 0.0):
            raise DomainError(f"sigma0 must be positive, got {self.sigma0}")
        if not (self.nu >= 0.0):
            raise DomainError(f"nu must be nonnegative, got {self.nu}")
        if not (-1.0 < self.rho < 1.0):
            raise DomainError(f"rho must lie strictly in (-1, 1), got {self.rho}")
        if not (self.kappa0 >= 0.0):
            raise DomainError(f"kappa0 must be nonnegative, got {self.kappa0}")
        if not (self.theta >= 0.0):
            raise DomainError(f"theta must be nonnegative, got {self.theta}")

    @property
    def kappa(self) -> float:
        return self.nu * self.kappa0


class ExpansionPrice(NamedTuple):
    """Second-order forward price decomposition: total = f_bs + nu*f1 + nu^2*f2."""

    f_bs: float
    f1: float
    f2: float
    total: float


class VolQuote(NamedTuple):
    """Expansion implied vol with a flag marking the nonpositive-value clamp."""

    value: float
    clamped: bool


def _require_no_mean_reversion(params: SabrParams, what: str) -> None:
    if params.kappa0 != 0.0:
        raise DomainError(f"{what} is only available for kappa0 = 0")


def f1_coeffs(
    sigma: float, t: float, rho: float, kappa0: float, theta: float
) -> tuple[float, float]:
    """Kernel coefficients (a10, a11) of the first-order correction."""
    a10 = 0.5 * t * t * sigma * kappa0 * (theta - sigma)
    a11 = 0.5 * t * t * rho * sigma**3
    return a10, a11


def f1_term(
    query: OptionQuery,
    sigma: float,
    rho: float,
    kappa0: float = 0.0,
    theta: float = 0.0,
) -> float:
    """First-order forward price correction per unit of vol-of-vol:

    F1 = (K t / 2) (kappa0 (theta - sigma) sqrt(t) - rho sigma d_-) N'(d_-).
    """
    t = query.expiry
    if not (t > 0.0):
        raise DomainError("f1_term requires t > 0")
    dm = d_pair(query, sigma).d_minus
    return (
        0.5
        * query.strike
        * t
        * (kappa0 * (theta - sigma) * math.sqrt(t) - rho * sigma * dm)
        * norm_pdf(dm)
    )


def f2_coeffs(
    sigma: float, t: float, rho: float, kappa0: float, theta: float
) -> tuple[float, float, float, float, float]:
    """Kernel coefficients (a20..a24) of the second-order correction."""
    dev = theta - sigma
    a20 = t**2 * sigma**2 / 4 + t**3 * kappa0**2 / 6 * dev * (theta - 2 * sigma)
    a21 = (
        -(t**3) * sigma**4 / 6
        + t**3 * kappa0 * rho * sigma**2 / 6 * (4 * theta - 5 * sigma)
        - t**4 * kappa0**2 * sigma**2 / 8 * dev**2
    )
    a22 = (
        t**3 * sigma**4 / 6
        + t**3 * rho**2 * sigma**4 / 2
        + t**4 * kappa0**2 * sigma**2 / 8 * dev**2
        - t**4 * kappa0 * rho * sigma**4 / 4 * dev
    )
    a23 = t**4 * kappa0 * rho * sigma**4 / 4 * dev - t**4 * rho**2 * sigma**6 / 8
    a24 = t**4 * rho**2 * sigma**6 / 8
    return a20, a21, a22, a23, a24


def f2_term(
    query: OptionQuery,
    sigma: float,
    rho: float,
    kappa0: float = 0.0,
    theta: float = 0.0,
) -> float:
    """Second-order forward price correction per unit of nu^2:

    F2 = K * sum_{i=0..4} a2i * h_tilde(i, y) * phi_t(y, sigma).
    """
    t = query.expiry
    if not (t > 0.0):
        raise DomainError("f2_term requires t > 0")
    y = query.log_moneyness
    coeffs = f2_coeffs(sigma, t, rho, kappa0, theta)
    kernel = phi_t(y, sigma, t)
    return query.strike * kernel * sum(
        a * h_tilde(i, y, sigma, t) for i, a in enumerate(coeffs)
    )


def price_sa2(query: OptionQuery, params: SabrParams) -> ExpansionPrice:
    """Second-order forward price F_BS + nu F1 + nu^2 F2.

    The discounted (actual) price is e^{-rt} * total. At expiry the
    payoff is returned and both correction terms vanish.
    """
    t = query.expiry
    if t == 0.0:
        payoff = max(query.forward - query.strike, 0.0)
        return ExpansionPrice(payoff, 0.0, 0.0, payoff)
    sigma = params.sigma0
    dp, dm = d_pair(query, sigma)
    f_bs = query.forward * norm_cdf(dp) - query.strike * norm_cdf(dm)
    f1 = f1_term(query, sigma, params.rho, params.kappa0, params.theta)
    f2 = f2_term(query, sigma, params.rho, params.kappa0, params.theta)
    return ExpansionPrice(f_bs, f1, f2, f_bs + params.nu * f1 + params.nu**2 * f2)


def price_sa2_rel(y: float, t: float, params: SabrParams) -> float:
    """Strike-normalized second-order forward price (K = 1, r = 0)."""
    query = OptionQuery(spot=math.exp(y), strike=1.0, rate=0.0, expiry=t)
    return price_sa2(query, params).total


def implied_e1(y: float, sigma: float, rho: float, t: float) -> float:
    """First-order implied-vol coefficient e1 = -rho sigma sqrt(t) d_- / 2."""
    if not (sigma > 0.0 and t > 0.0):
        raise DomainError("implied_e1 requires sigma > 0 and t > 0")
    return -0.5 * rho * sigma * math.sqrt(t) * d_minus(y, sigma, t)


def implied_e2(y: float, sigma: float, rho: float, t: float) -> float:
    """Second-order implied-vol coefficient (seven-term polynomial form)."""
    if not (sigma > 0.0 and t > 0.0):
        raise DomainError("implied_e2 requires sigma > 0 and t > 0")
    r2 = rho * rho
    return (
        sigma * t / 12
        - r2 * t * sigma / 8
        - sigma**3 * t**2 / 24
        - r2 * t * sigma * y / 8
        + y**2 / (6 * sigma)
        - r2 * y**2 / (4 * sigma)
        + t**2 * r2 * sigma**3 / 8
    )


def sigma_d(y: float, t: float, params: SabrParams) -> VolQuote:
    """Expansion implied vol sigma + nu e1 + nu^2 e2.

    Nonpositive raw values (possible for extreme parameters probed by
    optimizers) are clamped to a small positive floor and flagged.
    """
    _require_no_mean_reversion(params, "sigma_d")
    sigma, nu, rho = params.sigma0, params.nu, params.rho
    raw = sigma
    if nu != 0.0:
        raw = (
            sigma
            + nu * implied_e1(y, sigma, rho, t)
            + nu * nu * implied_e2(y, sigma, rho, t)
        )
    if raw <= 0.0:
        return VolQuote(SIGMA_FLOOR, True)
    return VolQuote(raw, False)


def price_d(y: float, t: float, params: SabrParams) -> float:
    """Relative price through the implied-vol expansion: c_rel(y, sigma_d, t)."""
    return c_rel(y, sigma_d(y, t, params).value, t)


def _dx_correction(
    query: OptionQuery, sigma: float, rho: float, order: int
) -> float:
    # x-derivative of the order-1 or order-2 correction term, obtained by
    # shifting each h_tilde index up by one (d/du phi-products).
    t = query.expiry
    y = query.log_moneyness
    if order == 1:
        coeffs = f1_coeffs(sigma, t, rho, 0.0, 0.0)
    else:
        coeffs = f2_coeffs(sigma, t, rho, 0.0, 0.0)
    kernel = phi_t(y, sigma, t)
    return query.strike * kernel * sum(
        a * h_tilde(i + 1, y, sigma, t) for i, a in enumerate(coeffs)
    )


def delta_sa2(query: OptionQuery, params: SabrParams) -> float:
    """Hedge ratio of the discounted second-order price, d/dS of e^{-rt} F.

    Equals N(d_+) plus the term-by-term S-derivative of the correction
    terms; reduces to the Black-Scholes delta at nu = 0.
    """
    _require_no_mean_reversion(params, "delta_sa2")
    t = query.expiry
    if not (t > 0.0):
        raise DomainError("delta_sa2 requires t > 0")
    sigma, nu, rho = params.sigma0, params.nu, params.rho
    dp = d_pair(query, sigma).d_plus
    base = norm_cdf(dp)
    if nu == 0.0:
        return base
    dx_b1 = _dx_correction(query, sigma, rho, 1)
    dx_b2 = _dx_correction(query, sigma, rho, 2)
    return base + nu * math.exp(-query.log_price) * (dx_b1 + nu * dx_b2)
