"""Explicit finite-difference benchmark solver for the cut-off SABR
pricing PDE

    w_t = sigma^2 [ (w_xx - w_x)/2 + nu rho w_xs + nu^2 w_ss / 2 ]

on a rectangle with a uniform x-grid and a geometric-progression
sigma-grid, Black-Scholes boundary data, a refinement sequence with
Richardson error estimation, and a PDE-residual diagnostic for the
closed-form approximations. Strike is normalized to K = 1, r = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .core import DomainError
from .expansion import SabrParams

__all__ = [
    "FdConfig",
    "FdGrid",
    "FdSolution",
    "FdComparison",
    "FdInstabilityError",
    "ResidualRegion",
    "build_grid",
    "boundary_value",
    "step_explicit",
    "solve",
    "solve_sequence",
    "compare",
    "richardson_ratios",
    "cutoff_sensitivity",
    "residual_norm",
]

PriceFn = Callable[[float, float, float], float]


class FdInstabilityError(RuntimeError):
    """Explicit time step produced a non-finite or exploding node."""


@dataclass(frozen=True)
class FdConfig:
    x_max: float = 3.0
    sigma_center: float = 0.18
    sigma_max: float = 1.6803
    nx0: int = 13
    nsigma0: int = 19
    nt0: int | None = None
    level: int = 0
    boundary_mode: str = "black_scholes"
    c_safety: float = 0.9
    window_x: tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class FdGrid:
    x_nodes: np.ndarray
    sigma_nodes: np.ndarray
    level: int
    n_time_steps: int

    @property
    def dx(self) -> float:
        return float(self.x_nodes[1] - self.x_nodes[0])


@dataclass
class FdSolution:
    grid: FdGrid
    values: np.ndarray  # shape (nx, nsigma)
    params: SabrParams
    time: float
    boundary_mode: str = "black_scholes"
    window_x_idx: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    window_s_idx: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    est_error: float = float("nan")

    @property
    def restriction(self) -> np.ndarray:
        """Values sampled on the interest window I x J."""
        return self.values[np.ix_(self.window_x_idx, self.window_s_idx)]


@dataclass(frozen=True)
class FdComparison:
    l1: float
    l2: float
    linf: float
    log_l2: float


def build_grid(
    x_max: float = 3.0,
    sigma_center: float = 0.18,
    sigma_max: float = 1.6803,
    nx0: int = 13,
    nsigma0: int = 19,
    T: float = 1.0,
    nt0: int | None = None,
    level: int = 0,
) -> FdGrid:
    """Level-k mesh: each refinement halves both mesh widths (arithmetic
    midpoints in x, geometric midpoints in sigma) and multiplies the
    number of time steps by 4."""
    if not (x_max > 0.0):
        raise DomainError(f"x_max must be positive, got {x_max}")
    if not (0.0 < sigma_center < sigma_max):
        raise DomainError("need 0 < sigma_center < sigma_max")
    if nx0 < 3 or nsigma0 < 3:
        raise DomainError("need at least 3 nodes per direction")
    if level < 0:
        raise DomainError(f"level must be nonnegative, got {level}")
    sigma_min = sigma_center**2 / sigma_max
    nx = (nx0 - 1) * 2**level + 1
    ns = (nsigma0 - 1) * 2**level + 1
    x = np.linspace(-x_max, x_max, nx)
    s = np.geomspace(sigma_min, sigma_max, ns)
    nt = nt0 * 4**level if nt0 is not None else 0
    return FdGrid(x_nodes=x, sigma_nodes=s, level=level, n_time_steps=nt)


def _bs_forward(x: np.ndarray, s: np.ndarray, t: float) -> np.ndarray:
    # forward Black-Scholes value with K = 1; payoff at t = 0
    if t == 0.0:
        return np.maximum(np.exp(x) - 1.0, 0.0)
    v = s * math.sqrt(t)
    dm = x / v - 0.5 * v
    return np.exp(x) * ndtr(dm + v) - ndtr(dm)


def boundary_value(x: float, sigma: float, t: float, mode: str = "black_scholes") -> float:
    """Boundary data on the cut-off rectangle: Black-Scholes forward value
    (the nu = 0 solution) or zero."""
    if mode == "zero":
        return 0.0
    if mode == "black_scholes":
        return float(_bs_forward(np.asarray(x, dtype=float), np.asarray(sigma, dtype=float), t))
    raise DomainError(f"unknown boundary mode {mode!r}")


def _impose_boundary(w: np.ndarray, grid: FdGrid, t: float, mode: str) -> None:
    x, s = grid.x_nodes, grid.sigma_nodes
    if mode == "zero":
        w[0, :] = w[-1, :] = 0.0
        w[:, 0] = w[:, -1] = 0.0
        return
    w[0, :] = _bs_forward(np.full_like(s, x[0]), s, t)
    w[-1, :] = _bs_forward(np.full_like(s, x[-1]), s, t)
    w[:, 0] = _bs_forward(x, np.full_like(x, s[0]), t)
    w[:, -1] = _bs_forward(x, np.full_like(x, s[-1]), t)


class _Stencil:
    """Precomputed interior-update weights for one grid and parameter set."""

    def __init__(self, grid: FdGrid, params: SabrParams):
        s = grid.sigma_nodes
        self.dx = grid.dx
        self.nu = params.nu
        self.rho = params.rho
        self.s2 = (s[1:-1] ** 2)[np.newaxis, :]
        hm = (s[1:-1] - s[:-2])[np.newaxis, :]
        hp = (s[2:] - s[1:-1])[np.newaxis, :]
        denom = hm * hp * (hm + hp)
        # nonuniform central second derivative in sigma
        self.css_m = 2.0 * hp / denom
        self.css_p = 2.0 * hm / denom
        self.css_0 = -2.0 / (hm * hp)
        # nonuniform central first derivative in sigma (for the cross term)
        self.cs_m = -(hp**2) / denom
        self.cs_p = (hm**2) / denom
        self.cs_0 = (hp - hm) / (hm * hp)

    def apply(self, w: np.ndarray) -> np.ndarray:
        dx, nu, rho = self.dx, self.nu, self.rho
        wc = w[1:-1, 1:-1]
        w_xx = (w[2:, 1:-1] - 2.0 * wc + w[:-2, 1:-1]) / dx**2
        w_x = (w[2:, 1:-1] - w[:-2, 1:-1]) / (2.0 * dx)
        w_ss = self.css_m * w[1:-1, :-2] + self.css_0 * wc + self.css_p * w[1:-1, 2:]
        lw = 0.5 * (w_xx - w_x) + 0.5 * nu * nu * w_ss
        if nu != 0.0 and rho != 0.0:
            wx_full = (w[2:, :] - w[:-2, :]) / (2.0 * dx)
            w_xs = (
                self.cs_m * wx_full[:, :-2]
                + self.cs_0 * wx_full[:, 1:-1]
                + self.cs_p * wx_full[:, 2:]
            )
            lw += nu * rho * w_xs
        return self.s2 * lw


def stable_time_steps(
    grid: FdGrid, params: SabrParams, T: float, c_safety: float = 0.9
) -> int:
    """Time-step count from the explicit stability bound

    dt <= c_safety / max over nodes of sigma^2 (1/dx^2 + nu^2/ds^2 + |nu rho|/(dx ds)).
    """
    s = grid.sigma_nodes
    dx = grid.dx
    ds_local = np.minimum.reduce(
        [np.r_[s[1] - s[0], s[1:] - s[:-1]], np.r_[s[1:] - s[:-1], s[-1] - s[-2]]]
    )
    rate = s**2 * (
        1.0 / dx**2
        + params.nu**2 / ds_local**2
        + abs(params.nu * params.rho) / (dx * ds_local)
    )
    dt_max = c_safety / float(rate.max())
    return max(1, math.ceil(T / dt_max))


def step_explicit(solution: FdSolution, dt: float) -> FdSolution:
    """One forward-Euler step; boundary nodes re-imposed at the new time."""
    stencil = _Stencil(solution.grid, solution.params)
    w = solution.values.copy()
    t_next = solution.time + dt
    w[1:-1, 1:-1] += dt * stencil.apply(solution.values)
    _impose_boundary(w, solution.grid, t_next, solution.boundary_mode)
    _check_stability(w, solution.grid, t_next)
    return replace(solution, values=w, time=t_next)


def _check_stability(w: np.ndarray, grid: FdGrid, t: float) -> None:
    if np.all(np.isfinite(w)):
        return
    bad = np.argwhere(~np.isfinite(w))[0]
    raise FdInstabilityError(
        f"non-finite value at x={grid.x_nodes[bad[0]]:.4g}, "
        f"sigma={grid.sigma_nodes[bad[1]]:.4g}, t={t:.4g}"
    )


def _window_indices(grid: FdGrid, config: FdConfig) -> tuple[np.ndarray, np.ndarray]:
    sigma_min = config.sigma_center**2 / config.sigma_max
    r0 = (config.sigma_max / sigma_min) ** (1.0 / (config.nsigma0 - 1))
    lo = config.sigma_center / r0
    hi = config.sigma_center * r0
    x = grid.x_nodes
    s = grid.sigma_nodes
    eps = 1e-9
    ix = np.flatnonzero(
        (x >= config.window_x[0] - eps) & (x <= config.window_x[1] + eps)
    )
    js = np.flatnonzero((s >= lo * (1 - eps)) & (s <= hi * (1 + eps)))
    if ix.size == 0 or js.size == 0:
        raise DomainError("interest window contains no grid nodes")
    return ix, js


def solve(params: SabrParams, T: float, config: FdConfig) -> FdSolution:
    """Time-march the cut-off PDE to T on the level given by the config."""
    if params.kappa0 != 0.0:
        raise DomainError("FD benchmark is only available for kappa0 = 0")
    if not (T > 0.0):
        raise DomainError(f"T must be positive, got {T}")
    grid = build_grid(
        config.x_max,
        config.sigma_center,
        config.sigma_max,
        config.nx0,
        config.nsigma0,
        T,
        config.nt0,
        config.level,
    )
    nt = max(grid.n_time_steps, stable_time_steps(grid, params, T, config.c_safety))
    grid = replace(grid, n_time_steps=nt)
    dt = T / nt
    stencil = _Stencil(grid, params)
    w = _cell_averaged_payoff(grid.x_nodes, grid.dx)[:, np.newaxis] * np.ones(
        (1, grid.sigma_nodes.size)
    )
    bound = max(1.01 * float(w.max()), 1e3)
    for k in range(nt):
        t_next = (k + 1) * dt
        w[1:-1, 1:-1] += dt * stencil.apply(w)
        _impose_boundary(w, grid, t_next, config.boundary_mode)
        if not np.all(np.isfinite(w)) or float(np.abs(w).max()) > bound:
            _check_stability(w, grid, t_next)
            bad = np.unravel_index(np.abs(w).argmax(), w.shape)
            raise FdInstabilityError(
                f"exploding value {w[bad]:.4g} at x={grid.x_nodes[bad[0]]:.4g}, "
                f"sigma={grid.sigma_nodes[bad[1]]:.4g}, t={t_next:.4g}"
            )
        bound = max(bound, 1.01 * float(_boundary_sup(w)))
    ix, js = _window_indices(grid, config)
    return FdSolution(
        grid=grid,
        values=w,
        params=params,
        time=T,
        boundary_mode=config.boundary_mode,
        window_x_idx=ix,
        window_s_idx=js,
    )


def _cell_averaged_payoff(x: np.ndarray, h: float) -> np.ndarray:
    # cell average of (e^x - 1)^+ over [x - h/2, x + h/2]; smoothing the
    # kink this way keeps the refinement sequence second order from the
    # coarsest level instead of stalling on the nonsmooth initial data
    a = x - 0.5 * h
    b = x + 0.5 * h
    lo = np.maximum(a, 0.0)
    with np.errstate(over="ignore"):
        avg = (np.exp(b) - np.exp(lo) - (b - lo)) / h
    return np.where(b <= 0.0, 0.0, avg)


def _boundary_sup(w: np.ndarray) -> float:
    return max(
        float(np.abs(w[0, :]).max()),
        float(np.abs(w[-1, :]).max()),
        float(np.abs(w[:, 0]).max()),
        float(np.abs(w[:, -1]).max()),
    )


def solve_sequence(
    params: SabrParams, T: float, config: FdConfig, max_level: int | None = None
) -> list[FdSolution]:
    """Refinement sequence w_0 .. w_max_level with Richardson error
    estimates est_error = ||w_k - w_{k-1}||_2 / 3 on the interest window."""
    top = config.level if max_level is None else max_level
    solutions: list[FdSolution] = []
    for level in range(top + 1):
        sol = solve(params, T, replace(config, level=level))
        if solutions:
            diff = _level_diff(solutions[-1], sol)
            sol.est_error = diff / 3.0
        solutions.append(sol)
    return solutions


def _level_diff(coarse: FdSolution, fine: FdSolution) -> float:
    # coarse nodes are every 2nd node of the finer grid
    sub = fine.values[::2, ::2]
    delta = sub[np.ix_(coarse.window_x_idx, coarse.window_s_idx)] - coarse.restriction
    return float(np.sqrt(np.mean(delta**2)))


def richardson_ratios(solutions: Sequence[FdSolution]) -> list[float]:
    """Successive-difference ratios ||w_{k+1}-w_k|| / ||w_k-w_{k-1}||."""
    diffs = [_level_diff(a, b) for a, b in zip(solutions, solutions[1:])]
    return [b / a for a, b in zip(diffs, diffs[1:])]


def compare(solution: FdSolution, price_fn: PriceFn) -> FdComparison:
    """Normalized norms of price_fn - w over the interest window, plus the
    normalized l2 norm of the log differences."""
    grid = solution.grid
    t = solution.time
    xs = grid.x_nodes[solution.window_x_idx]
    ss = grid.sigma_nodes[solution.window_s_idx]
    model = np.array([[price_fn(float(x), float(s), t) for s in ss] for x in xs])
    w = solution.restriction
    delta = model - w
    pos = (model > 0.0) & (w > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_delta = np.where(pos, np.log(model) - np.log(w), np.nan)
    return FdComparison(
        l1=float(np.mean(np.abs(delta))),
        l2=float(np.sqrt(np.mean(delta**2))),
        linf=float(np.abs(delta).max()),
        log_l2=float(np.sqrt(np.nanmean(log_delta**2))) if pos.any() else float("nan"),
    )


def cutoff_sensitivity(params: SabrParams, T: float, config: FdConfig) -> float:
    """Change of the windowed solution when the cut-off rectangle grows by
    one mesh layer on every side (empirical cut-off error estimate)."""
    base = solve(params, T, config)
    dx = 2.0 * config.x_max / (config.nx0 - 1)
    sigma_min = config.sigma_center**2 / config.sigma_max
    r0 = (config.sigma_max / sigma_min) ** (1.0 / (config.nsigma0 - 1))
    bigger = replace(
        config,
        x_max=config.x_max + dx,
        sigma_max=config.sigma_max * r0,
        nx0=config.nx0 + 2,
        nsigma0=config.nsigma0 + 2,
    )
    big = solve(params, T, bigger)
    delta = big.restriction - base.restriction
    return float(np.sqrt(np.mean(delta**2)))


@dataclass(frozen=True)
class ResidualRegion:
    t_range: tuple[float, float] = (0.1, 1.0)
    sigma_range: tuple[float, float] = (0.1, 0.3)
    y_range: tuple[float, float] = (-0.5, 0.5)
    n_t: int = 10
    n_sigma: int = 9
    n_y: int = 11

    def lattice(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (
            np.linspace(*self.t_range, self.n_t),
            np.linspace(*self.sigma_range, self.n_sigma),
            np.linspace(*self.y_range, self.n_y),
        )


REL_STEP = 1e-3


def residual_norm(
    price_fn: PriceFn, params: SabrParams, region: ResidualRegion
) -> float:
    """PDE residual norm of dC/dt - LC over the lattice: the root mean
    square over expiry slices of the per-slice l2 norm, with all
    derivatives by central differences with relative step 1e-3."""
    if region.t_range[0] < 0.1:
        raise DomainError("residual lattice requires T >= 0.1")
    nu, rho = params.nu, params.rho
    ts, ss, ys = region.lattice()
    sq_sum = 0.0
    for t in ts:
        ht = REL_STEP * t
        for s in ss:
            hs = REL_STEP * s
            s2 = s * s
            for y in ys:
                hy = REL_STEP * max(1.0, abs(y))
                c_t = (price_fn(y, s, t + ht) - price_fn(y, s, t - ht)) / (2 * ht)
                c0 = price_fn(y, s, t)
                cyp = price_fn(y + hy, s, t)
                cym = price_fn(y - hy, s, t)
                csp = price_fn(y, s + hs, t)
                csm = price_fn(y, s - hs, t)
                c_y = (cyp - cym) / (2 * hy)
                c_yy = (cyp - 2 * c0 + cym) / hy**2
                c_ss = (csp - 2 * c0 + csm) / hs**2
                c_ys = (
                    price_fn(y + hy, s + hs, t)
                    - price_fn(y + hy, s - hs, t)
                    - price_fn(y - hy, s + hs, t)
                    + price_fn(y - hy, s - hs, t)
                ) / (4 * hy * hs)
                lc = s2 * (
                    0.5 * (c_yy - c_y) + nu * rho * c_ys + 0.5 * nu * nu * c_ss
                )
                res = c_t - lc
                sq_sum += res * res
    return math.sqrt(sq_sum / len(ts))
