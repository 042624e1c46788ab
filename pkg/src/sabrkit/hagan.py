"""Hagan-Kumar-Lesniewski-Woodward implied volatility for beta = 1,
with a series regularization of the z/xi(z) backbone near z = 0.
"""

from __future__ import annotations

import math

from .core import DomainError, c_rel
from .expansion import SabrParams

__all__ = ["xi", "z_over_xi", "sigma_h", "price_h", "Z_SWITCH"]

Z_SWITCH = 1e-4


def xi(z: float, rho: float) -> float:
    """xi(z) = ln[(sqrt(1 - 2 rho z + z^2) + z - rho) / (1 - rho)]."""
    if not (-1.0 < rho < 1.0):
        raise DomainError(f"rho must lie strictly in (-1, 1), got {rho}")
    return math.log((math.sqrt(1.0 - 2.0 * rho * z + z * z) + z - rho) / (1.0 - rho))


def z_over_xi(z: float, rho: float, z_switch: float = Z_SWITCH) -> float:
    """The backbone quotient z / xi(z), regularized near z = 0.

    For |z| < z_switch the cubic Taylor expansion of the quotient is used:
    1 - rho z/2 + (1/6 - rho^2/4) z^2 + (5 rho/24 - rho^3/4) z^3, which
    meets the exact quotient to O(z_switch^4) at the switch point.
    """
    if abs(z) >= z_switch:
        return z / xi(z, rho)
    if not (-1.0 < rho < 1.0):
        raise DomainError(f"rho must lie strictly in (-1, 1), got {rho}")
    return 1.0 + z * (
        -0.5 * rho
        + z * ((1.0 / 6.0 - 0.25 * rho * rho) + z * (5.0 * rho / 24.0 - 0.25 * rho**3))
    )


def sigma_h(y: float, t: float, params: SabrParams, regularized: bool = True) -> float:
    """Hagan implied volatility

        sigma * (z / xi(z)) * [1 + (rho nu sigma / 4 + (2 - 3 rho^2) nu^2 / 24) t]

    with z = (nu / sigma) y. The regularized quotient is the default; pass
    regularized=False to evaluate the raw quotient (undefined at z = 0).
    """
    if params.kappa0 != 0.0:
        raise DomainError("sigma_h is only available for kappa0 = 0")
    if not (t >= 0.0):
        raise DomainError(f"t must be nonnegative, got {t}")
    sigma, nu, rho = params.sigma0, params.nu, params.rho
    z = nu * y / sigma
    if regularized:
        backbone = z_over_xi(z, rho)
    else:
        backbone = z / xi(z, rho)
    bracket = 1.0 + (0.25 * rho * nu * sigma + (2.0 - 3.0 * rho * rho) * nu * nu / 24.0) * t
    return sigma * backbone * bracket


def price_h(y: float, t: float, params: SabrParams, regularized: bool = True) -> float:
    """Relative call price through the Hagan vol: c_rel(y, sigma_h, t)."""
    return c_rel(y, sigma_h(y, t, params, regularized=regularized), t)
