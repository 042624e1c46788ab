"""Deterministic-volatility limit of the mean-reverting model.

When the vol-of-vol is switched off but kappa > 0 the volatility relaxes
deterministically toward theta, and the call price is Black-Scholes with
the time-averaged variance

    V = theta^2 tau + (2 theta / kappa)(z - theta)(e^{kappa tau} - 1)
        + ((z - theta)^2 / (2 kappa))(e^{2 kappa tau} - 1),

where z parametrizes the terminal volatility and tau is time to expiry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import DomainError, OptionQuery, norm_cdf

__all__ = ["MeanRevState", "sigma_of_z", "total_variance", "det_vol_price"]

# below this kappa*tau the closed form loses digits to cancellation and a
# short Taylor series is used instead
KT_SWITCH = 1e-6


@dataclass(frozen=True)
class MeanRevState:
    """Terminal-volatility parametrization of the deterministic vol path."""

    z: float
    kappa: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.z > 0.0):
            raise DomainError(f"z must be positive, got {self.z}")
        if not (self.kappa >= 0.0):
            raise DomainError(f"kappa must be nonnegative, got {self.kappa}")
        if not (self.theta >= 0.0):
            raise DomainError(f"theta must be nonnegative, got {self.theta}")


def sigma_of_z(state: MeanRevState, tau: float) -> float:
    """Volatility tau years before expiry: e^{kappa tau} z - theta (e^{kappa tau} - 1)."""
    if tau < 0.0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    e = math.exp(state.kappa * tau)
    return e * state.z - state.theta * (e - 1.0)


def total_variance(state: MeanRevState, tau: float) -> float:
    """Integrated variance of the deterministic vol path over [0, tau].

    Continuous across the kappa -> 0 seam, where it reduces to z^2 tau:
    the small-kappa branch keeps the Taylor terms through (kappa tau)^2.
    """
    if tau < 0.0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    z, kappa, theta = state.z, state.kappa, state.theta
    dev = z - theta
    kt = kappa * tau
    if kt < KT_SWITCH:
        # theta^2 tau + 2 theta dev * tau (1 + kt/2 + kt^2/6)
        #   + dev^2 tau (1 + kt + (2/3) kt^2)
        a = 2.0 * theta * dev * tau * (1.0 + kt / 2.0 + kt * kt / 6.0)
        b = dev * dev * tau * (1.0 + kt + 2.0 * kt * kt / 3.0)
        return theta * theta * tau + a + b
    return (
        theta * theta * tau
        + (2.0 * theta / kappa) * dev * math.expm1(kt)
        + (dev * dev / (2.0 * kappa)) * math.expm1(2.0 * kt)
    )


def det_vol_price(query: OptionQuery, state: MeanRevState) -> float:
    """Discounted call price under the deterministic vol path: Gaussian
    pricing with total variance V in place of sigma^2 t."""
    tau = query.expiry
    if tau == 0.0:
        return max(query.spot - query.strike, 0.0)
    var = total_variance(state, tau)
    disc = math.exp(-query.rate * tau)
    if var <= 0.0:
        return disc * max(query.forward - query.strike, 0.0)
    sd = math.sqrt(var)
    y = query.log_moneyness
    dp = y / sd + 0.5 * sd
    dm = dp - sd
    return disc * (query.forward * norm_cdf(dp) - query.strike * norm_cdf(dm))
