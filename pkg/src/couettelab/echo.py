"""Sequential resonance-cascade toy model.

A unit perturbation sits at the top wavenumber k_start with y-frequency eta.
Around each resonant time t_k = eta/k the k mode forces the k-1 mode through
a frozen background of size eps * exp(-mu^(1/3) t); the model integrates

    d/dt f(k-1) = eps * exp(-mu^(1/3) t) * (t / k^gamma)
                  * <t - eta/k>^(-(1+gamma)) * f(k)

over a window around t_k with f(k) held fixed, and the amplitude then
cascades: f(k-1) = f(k) + gain.  The total amplification is
Pi = f(1)/f(k_start) = product over steps of (1 + eps * I_k), which is 1 at
eps = 0 and strictly increasing and continuous in eps.

Windows are tiled by geometric midpoints of consecutive resonant times, so
each resonance is counted exactly once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BracketFailure

DEFAULT_THRESHOLD_PI = 2.0
DEFAULT_K_START = 2
DEFAULT_ETA_SCALE = 24.0


@dataclass
class EchoChainState:
    """One cascade configuration plus its amplitudes after a run."""

    eta: float
    k_start: int
    gamma: float
    mu: float
    eps: float
    r: float = 1.0
    gamma_tilde: float = 0.0
    amplitudes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k_start < 1:
            raise ValueError("k_start must be >= 1")
        if self.eta < self.k_start:
            raise ValueError("need k_start <= eta so resonant times are >= 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 < self.mu <= 0.5:
            raise ValueError("mu must lie in (0, 1/2]")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


def resonance_window(eta: float, k: int) -> tuple[float, float]:
    """Geometric-midpoint window around t_k = eta/k, tiling the chain."""
    t_prev = eta / (k + 1)
    t_k = eta / k
    t_next = eta / (k - 1)
    return math.sqrt(t_prev * t_k), math.sqrt(t_k * t_next)


def step_integral(k: int, eta: float, gamma: float, mu: float) -> float:
    """Window integral of exp(-mu^(1/3) t) (t/k^gamma) <t - eta/k>^-(1+gamma)."""
    lo, hi = resonance_window(eta, k)
    mu13 = mu ** (1.0 / 3.0)
    t_k = eta / k

    def integrand(tau):
        br = math.sqrt(1.0 + (tau - t_k) ** 2)
        return math.exp(-mu13 * tau) * tau / k**gamma * br ** (-(1.0 + gamma))

    val, _ = quad(integrand, lo, hi, points=[t_k], epsabs=1e-12, epsrel=1e-10, limit=200)
    return val


def echo_step(f_k: float, k: int, eta: float, gamma: float, mu: float, eps: float) -> float:
    """Additive gain transferred to the k-1 mode; linear in eps and in f_k."""
    if k < 2:
        raise ValueError("echo_step needs k >= 2")
    if eta / k < 1.0:
        raise ValueError("resonant time eta/k must be >= 1")
    return eps * step_integral(k, eta, gamma, mu) * f_k


@dataclass
class ChainResult:
    pi: float
    amplitudes: dict
    overflowed: bool


def run_chain(state: EchoChainState) -> ChainResult:
    """Cascade from k_start down to 1 and report Pi = f(1)/f(k_start)."""
    amps = {state.k_start: 1.0}
    f = 1.0
    overflow = False
    with np.errstate(over="ignore"):
        for k in range(state.k_start, 1, -1):
            gain = echo_step(f, k, state.eta, state.gamma, state.mu, state.eps)
            f = f + gain
            if math.isinf(f):
                overflow = True
            amps[k - 1] = f
    state.amplitudes = amps
    return ChainResult(pi=f, amplitudes=amps, overflowed=overflow)


def amplification(
    eps: float, mu: float, gamma: float, eta: float, k_start: int
) -> float:
    """Pi(eps) via the per-step integrals (they do not depend on eps)."""
    pi = 1.0
    for k in range(k_start, 1, -1):
        pi *= 1.0 + eps * step_integral(k, eta, gamma, mu)
    return pi


def critical_epsilon(
    mu: float,
    gamma: float,
    r: float,
    eta: float,
    k_start: int,
    threshold_pi: float = DEFAULT_THRESHOLD_PI,
    eps_max: float = 1e9,
    rel_tol: float = 1e-3,
) -> float:
    """Smallest eps with Pi(eps) = threshold_pi, by bisection.

    Pi is strictly increasing and continuous in eps, so the root is unique.
    """
    if threshold_pi <= 1.0:
        raise ValueError("threshold_pi must exceed 1")
    if k_start < 2:
        raise BracketFailure("a chain without steps never amplifies")
    integrals = [step_integral(k, eta, gamma, mu) for k in range(k_start, 1, -1)]

    def pi_of(eps):
        out = 1.0
        for i in integrals:
            out *= 1.0 + eps * i
        return out

    hi = 1e-8
    while pi_of(hi) < threshold_pi:
        hi *= 2.0
        if hi > eps_max:
            raise BracketFailure(
                f"Pi never reaches {threshold_pi} for eps <= {eps_max}"
            )
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if pi_of(mid) >= threshold_pi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sweep_critical_epsilon(
    mu_grid,
    gamma: float,
    r: float = 1.0,
    k_start: int = DEFAULT_K_START,
    eta_scale: float = DEFAULT_ETA_SCALE,
    threshold_pi: float = DEFAULT_THRESHOLD_PI,
) -> list[dict]:
    """Critical amplitude per mu, with eta tied to the dissipative timescale.

    The chain length and interaction durations are configuration knobs; the
    default places the top resonance at eta = eta_scale * mu^(-1/3) so the
    cascade sits inside the enhanced-dissipation window.
    """
    rows = []
    for mu in mu_grid:
        eta = max(eta_scale * mu ** (-1.0 / 3.0), float(k_start))
        eps_star = critical_epsilon(mu, gamma, r, eta, k_start, threshold_pi)
        pi_at = amplification(eps_star, mu, gamma, eta, k_start)
        rows.append(
            {
                "mu": mu,
                "gamma": gamma,
                "r": r,
                "eta": eta,
                "k_start": k_start,
                "eps_star": eps_star,
                "Pi_at_star": pi_at,
            }
        )
    return rows
