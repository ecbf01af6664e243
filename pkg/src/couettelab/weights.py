"""Time-dependent Fourier multiplier weights and their audits.

The norm weight has the shape

    A(k, eta) = <k,eta>^N * exp(c * mu^(1/3) * t * [k != 0]) / m(k, eta),
    m = (resonance factor) * (linear factor) * (enhanced-dissipation factor),

where every factor is >= 1, finite, and nondecreasing in time.  Closed forms
are used wherever the defining integral has one (arctan profiles, window-
clamped cubic-bracket integrals); the resonance factor's kernel antiderivative
is tabulated once per parameter set on a graded grid with analytic tails.

The bracket <s> defaults to sqrt(1 + s^2); sqrt(1 + |s|) is kept behind
``bracket_mode`` for sensitivity checks (the resonance kernel is not
integrable under it, so the resonance factor rejects that mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import (
    ConfigInvalid,
    DegenerateDirection,
    InvalidRichardson,
    TruncationBudgetExceeded,
)

MODELS = ("ns", "boussinesq", "mhd_horizontal", "mhd_vertical", "none")

_MODEL_GAMMA = {
    "ns": 1.0,
    "boussinesq": 0.5,
    "mhd_horizontal": 0.0,
    "mhd_vertical": 0.0,
}


def bracket(s, mode: str = "quadratic"):
    """Japanese bracket <s>."""
    s = np.asarray(s, dtype=float)
    if mode == "quadratic":
        return np.sqrt(1.0 + s * s)
    if mode == "linear_abs":
        return np.sqrt(1.0 + np.abs(s))
    raise ConfigInvalid(f"unknown bracket_mode {mode!r}")


def bracket2(k, eta, mode: str = "quadratic"):
    """Bracket of the mode vector, <k, eta>."""
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if mode == "quadratic":
        return np.sqrt(1.0 + k * k + eta * eta)
    if mode == "linear_abs":
        return np.sqrt(1.0 + np.hypot(k, eta))
    raise ConfigInvalid(f"unknown bracket_mode {mode!r}")


@dataclass(frozen=True)
class WeightParams:
    """All knobs of the multiplier family.

    gamma/gamma_tilde grade the resonance kernel, r is the log-correction
    exponent at gamma = 0, c the weight constant, mu the (minimal)
    dissipation, N the Sobolev index.  beta, alpha, c1, c2 are the
    stratification / background-field parameters of the two coupled models;
    nu and kappa default to mu when not set.
    """

    gamma: float = 1.0
    gamma_tilde: float = 0.0
    r: float = 1.0
    c: float = 0.1
    mu: float = 1e-3
    N: int = 12
    bracket_mode: str = "quadratic"
    n_max: int = 64
    tail_tol: float = 1e-3
    beta: float = 1.0
    alpha: tuple[float, float] = (1.0, 0.0)
    c1: float | None = None
    c2: float | None = None
    nu: float | None = None
    kappa: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.gamma_tilde <= self.gamma <= 1.0:
            raise ConfigInvalid("need 0 <= gamma_tilde <= gamma <= 1")
        if not 0.0 < self.mu <= 0.5:
            raise ConfigInvalid("need 0 < mu <= 1/2")
        if self.r <= 0:
            raise ConfigInvalid("need r > 0")
        if self.c <= 0:
            raise ConfigInvalid("need c > 0")
        if self.n_max < 1:
            raise ConfigInvalid("need n_max >= 1")
        if self.N < 12:
            raise ConfigInvalid("need Sobolev index N >= 12")

    @property
    def nu_eff(self) -> float:
        return self.mu if self.nu is None else self.nu

    @property
    def kappa_eff(self) -> float:
        return self.mu if self.kappa is None else self.kappa

    @property
    def c1_eff(self) -> float:
        if self.c1 is not None:
            return self.c1
        a1 = self.alpha[0]
        if a1 == 0:
            raise DegenerateDirection("horizontal background field needs alpha_1 != 0")
        return self.c / abs(a1)

    @property
    def c2_eff(self) -> float:
        if self.c2 is not None:
            return self.c2
        return 1.0 / (10.0 * max(1.0, abs(self.alpha[1])))


def eval_g(params: WeightParams, s) -> np.ndarray:
    """Resonance kernel g(s): c<s>^-(1+gamma), log-corrected at gamma = 0."""
    br = bracket(s, params.bracket_mode)
    if params.gamma > 0:
        return params.c * br ** (-(1.0 + params.gamma))
    return params.c / (br * np.abs(np.log1p(br)) ** (1.0 + params.r))


# ---------------------------------------------------------------------------
# Resonance kernel antiderivative cache
# ---------------------------------------------------------------------------

_U_MAX = 40.0
_N_NODES = 40001
_KERNEL_CACHE: dict[tuple, "_KernelTable"] = {}


class _KernelTable:
    """Cumulative integral of g on a graded grid, with analytic tails.

    Parametrize s = sinh(u) so that, with the quadratic bracket,
    g(s) ds = c * cosh(u)^(-gamma) du  (gamma > 0)
    g(s) ds = c / log(1 + cosh u)^(1+r) du  (gamma = 0),
    both smooth and exponentially/polynomially tailed in u.
    """

    def __init__(self, gamma: float, r: float, c: float):
        self.gamma, self.r, self.c = gamma, r, c
        u = np.linspace(0.0, _U_MAX, _N_NODES)
        w = self._integrand_u(u)
        cum = cumulative_simpson(w, x=u, initial=0.0)
        self._spline = CubicSpline(u, cum, bc_type=((1, w[0]), (1, w[-1])))
        self.half_mass = float(cum[-1] + self._tail_u(_U_MAX))
        self.total_mass = 2.0 * self.half_mass

    def _integrand_u(self, u: np.ndarray) -> np.ndarray:
        ch = np.cosh(u)
        if self.gamma > 0:
            return self.c * ch ** (-self.gamma)
        return self.c / np.log1p(ch) ** (1.0 + self.r)

    def _tail_u(self, u) -> np.ndarray:
        """Integral of the u-integrand from u to infinity (u >= _U_MAX)."""
        u = np.asarray(u, dtype=float)
        if self.gamma > 0:
            g = self.gamma
            e2 = np.exp(-2.0 * u)
            base = np.exp(-g * u) * 2.0**g
            # (1 + e^(-2u))^(-gamma) expanded to three terms
            return self.c * base * (
                1.0 / g - g * e2 / (g + 2.0) + 0.5 * g * (g + 1.0) * e2 * e2 / (g + 4.0)
            )
        return self.c / (self.r * (u - math.log(2.0)) ** self.r)

    def antiderivative_from_zero(self, x) -> np.ndarray:
        """T(x) = integral of g over [0, x] for x >= 0."""
        x = np.asarray(x, dtype=float)
        u = np.arcsinh(x)
        out = np.where(
            u <= _U_MAX,
            self._spline(np.minimum(u, _U_MAX)),
            self.half_mass - self._tail_u(np.maximum(u, _U_MAX)),
        )
        return out

    def antiderivative(self, s) -> np.ndarray:
        """G(s) = integral of g over (-inf, s]."""
        s = np.asarray(s, dtype=float)
        return self.half_mass + np.sign(s) * self.antiderivative_from_zero(np.abs(s))


def _kernel_table(params: WeightParams) -> _KernelTable:
    if params.bracket_mode != "quadratic":
        raise ConfigInvalid(
            "the resonance kernel is only integrable under the quadratic bracket"
        )
    key = (params.gamma, params.r, params.c)
    tab = _KERNEL_CACHE.get(key)
    if tab is None:
        tab = _KernelTable(*key)
        _KERNEL_CACHE[key] = tab
    return tab


def _inv_cubed_bracket(d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    return (1.0 + d * d) ** -1.5


_S3_TOTAL = None


def _sum_inv_cubed() -> float:
    """sum over integers of <d>^-3, used for the a-priori resonance bound."""
    global _S3_TOTAL
    if _S3_TOTAL is None:
        d = np.arange(1, 200000)
        tail = 1.0 - d[-1] / math.sqrt(1.0 + d[-1] ** 2)
        _S3_TOTAL = float(1.0 + 2.0 * np.sum(_inv_cubed_bracket(d)) + 2.0 * tail)
    return _S3_TOTAL


def _tail_weight_bound(k, n_max: int) -> np.ndarray:
    """Upper bound for sum_{|n| > n_max} <k-n>^-3."""
    k = np.asarray(k, dtype=float)
    m1 = np.maximum(n_max - np.abs(k) + 1.0, 1.0)
    m2 = n_max + np.abs(k) + 1.0

    def side(m):
        a = np.maximum(m - 1.0, 0.0)
        return 1.0 - a / np.sqrt(1.0 + a * a)

    return side(m1) + side(m2)


def resonance_bound(params: WeightParams) -> float:
    """A-priori cap C(c, gamma) with 1 <= m_gamma <= m_tilde <= C."""
    tab = _kernel_table(params)
    return float(math.exp(tab.total_mass * _sum_inv_cubed()))


def eval_m_gamma(params: WeightParams, t, k, eta):
    """Resonance weights at (t, k, eta).

    Returns (m_tilde, m_gamma, dlog_m_gamma) where dlog is the logarithmic
    time derivative of m_gamma.  The mode sum is truncated at |n| <= n_max;
    the analytic tail bound is checked against params.tail_tol.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("resonance weights are defined for t >= 0")
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    tab = _kernel_table(params)

    tail = np.max(_tail_weight_bound(k, params.n_max)) * tab.total_mass
    if tail > params.tail_tol:
        raise TruncationBudgetExceeded(
            f"resonance sum tail bound {tail:.3e} exceeds tolerance "
            f"{params.tail_tol:.3e}; raise n_max"
        )

    t, k, eta = np.broadcast_arrays(t, k, eta)
    big_f = np.zeros(t.shape, dtype=float)
    dlog_tilde = np.zeros(t.shape, dtype=float)
    for n in range(1, params.n_max + 1):
        for sgn in (1.0, -1.0):
            nn = sgn * n
            wk = _inv_cubed_bracket(k - nn)
            arg = t - eta / nn
            big_f += wk * tab.antiderivative(arg)
            dlog_tilde += wk * eval_g(params, arg)
    return _assemble_m_gamma(params, t, big_f, dlog_tilde)


def _assemble_m_gamma(params, t, big_f, dlog_tilde):
    mu13 = params.mu ** (1.0 / 3.0)
    ramp = np.minimum(1.0, t * mu13)
    m_tilde = np.exp(big_f)
    m_gamma = np.exp(ramp * big_f)
    dlog = mu13 * (t <= 1.0 / mu13) * big_f + ramp * dlog_tilde
    return m_tilde, m_gamma, dlog


def _m_gamma_separable(params: WeightParams, t: float, k1d, eta1d):
    """Grid fast path: F(k, eta) is a sum of outer products over n."""
    tab = _kernel_table(params)
    k1d = np.asarray(k1d, dtype=float)
    eta1d = np.asarray(eta1d, dtype=float)
    tail = np.max(_tail_weight_bound(k1d, params.n_max)) * tab.total_mass
    if tail > params.tail_tol:
        raise TruncationBudgetExceeded(
            f"resonance sum tail bound {tail:.3e} exceeds tolerance "
            f"{params.tail_tol:.3e}; raise n_max"
        )
    big_f = np.zeros((k1d.size, eta1d.size))
    dlog_tilde = np.zeros_like(big_f)
    for n in range(1, params.n_max + 1):
        for sgn in (1.0, -1.0):
            nn = sgn * n
            wk = _inv_cubed_bracket(k1d - nn)
            arg = t - eta1d / nn
            big_f += np.outer(wk, tab.antiderivative(arg))
            dlog_tilde += np.outer(wk, eval_g(params, arg))
    tt = np.full_like(big_f, float(t))
    return _assemble_m_gamma(params, tt, big_f, dlog_tilde)


def _k_effective(k):
    """k with the zero column replaced by 1 (those rows copy k = 1)."""
    k = np.asarray(k, dtype=float)
    return np.where(k == 0, 1.0, k)


def eval_M_mu(params: WeightParams, t, k, eta, mu: float | None = None):
    """Enhanced-dissipation weight and its logarithmic derivative.

    Closed form: log M = (1/c) [arctan(mu^(1/3)(t - eta/k)) +
    arctan(mu^(1/3) eta/k)], the k = 0 row copying k = 1.
    """
    m = params.mu if mu is None else mu
    mu13 = m ** (1.0 / 3.0)
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(eta, dtype=float) / _k_effective(k)
    x1 = mu13 * (t - ratio)
    x0 = mu13 * ratio
    val = np.exp((np.arctan(x1) + np.arctan(x0)) / params.c)
    dlog = mu13 / (params.c * (1.0 + x1 * x1))
    return val, dlog


def theta_weight_constant(beta: float) -> float:
    """Window constant c = (1 - 1/(4 beta))/4 of the stratified linear weight."""
    if beta <= 0.5:
        raise InvalidRichardson("stratified linear weight needs beta > 1/2")
    return 0.25 * (1.0 - 1.0 / (4.0 * beta))


def _cubic_bracket_antiderivative(s, mode: str):
    s = np.asarray(s, dtype=float)
    if mode == "quadratic":
        return s / np.sqrt(1.0 + s * s)
    if mode == "linear_abs":
        return np.sign(s) * 2.0 * (1.0 - 1.0 / np.sqrt(1.0 + np.abs(s)))
    raise ConfigInvalid(f"unknown bracket_mode {mode!r}")


def eval_M_L_theta(params: WeightParams, t, k, eta):
    """Windowed linear weight of the stratified model.

    log M = (2/c) * integral over (-inf, t] of the cubic-bracket kernel
    restricted to |tau - eta/k| <= 2 mu^(-1/6)/c, evaluated via the clamped
    antiderivative; the k = 0 row copies k = 1.
    """
    c = theta_weight_constant(params.beta)
    w = 2.0 * params.mu ** (-1.0 / 6.0) / c
    t = np.asarray(t, dtype=float)
    s = t - np.asarray(eta, dtype=float) / _k_effective(k)
    s_cl = np.clip(s, -w, w)
    anti = _cubic_bracket_antiderivative
    val = np.exp((2.0 / c) * (anti(s_cl, params.bracket_mode) - anti(-w, params.bracket_mode)))
    inside = np.abs(s) <= w
    dlog = (2.0 / c) * inside * bracket(s, params.bracket_mode) ** -3.0
    return val, dlog


def theta_weight_bounds(params: WeightParams) -> tuple[float, float]:
    """(implied supremum, quoted supremum) of the stratified linear weight."""
    c = theta_weight_constant(params.beta)
    w = 2.0 * params.mu ** (-1.0 / 6.0) / c
    span = float(
        _cubic_bracket_antiderivative(w, params.bracket_mode)
        - _cubic_bracket_antiderivative(-w, params.bracket_mode)
    )
    return math.exp(2.0 / c * span), math.exp(2.0 / c)


def eval_M_alpha(params: WeightParams, d, c1: float, t, k, eta):
    """Directional linear weight with squared-bracket integrand.

    log M = (1/c1) * integral over (-inf, t] of 1/(1 + (d1 + d2(tau -
    eta/k))^2), normalized to 1 at t -> -inf; k = 0 copies k = 1.
    """
    d1, d2 = float(d[0]), float(d[1])
    if d2 == 0.0:
        raise DegenerateDirection("directional weight needs d2 != 0")
    t = np.asarray(t, dtype=float)
    u = d1 + d2 * (t - np.asarray(eta, dtype=float) / _k_effective(k))
    val = np.exp((np.sign(d2) * np.arctan(u) + 0.5 * math.pi) / (c1 * abs(d2)))
    dlog = 1.0 / (c1 * (1.0 + u * u))
    return val, dlog


def alpha_weight_bounds(d, c1: float) -> tuple[float, float]:
    """(implied supremum, quoted supremum) of the directional weight."""
    d2 = abs(float(d[1]))
    if d2 == 0.0:
        raise DegenerateDirection("directional weight needs d2 != 0")
    return math.exp(math.pi / (c1 * d2)), math.exp(2.0 * math.pi / d2)


# ---------------------------------------------------------------------------
# Model composition
# ---------------------------------------------------------------------------


def model_factors(params: WeightParams, model: str, t, k, eta, separable=None):
    """Every multiplier factor of the model's weight m, with log-derivatives.

    Returns a dict name -> (value, dlog).  ``separable=(k1d, eta1d)`` selects
    the grid fast path for the resonance factor.
    """
    if model not in MODELS:
        raise ConfigInvalid(f"unknown model {model!r}")
    out: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    if model == "none":
        one = np.ones(np.broadcast(np.asarray(k), np.asarray(eta)).shape)
        return {"m_gamma": (one, 0.0 * one), "m_tilde": (one, 0.0 * one)}

    p = replace(params, gamma=_MODEL_GAMMA[model])
    if separable is not None:
        m_tilde, m_gamma, dlog_m = _m_gamma_separable(p, float(t), *separable)
    else:
        m_tilde, m_gamma, dlog_m = eval_m_gamma(p, t, k, eta)
    out["m_gamma"] = (m_gamma, dlog_m)
    out["m_tilde"] = (m_tilde, None)

    if model == "ns":
        out["M_nu"] = eval_M_mu(params, t, k, eta, mu=params.nu_eff)
    elif model == "boussinesq":
        out["M_L"] = eval_M_L_theta(params, t, k, eta)
        out["M_mu"] = eval_M_mu(params, t, k, eta)
    elif model == "mhd_horizontal":
        out["M_L"] = eval_M_alpha(params, (0.0, 1.0), params.c1_eff, t, k, eta)
        out["M_nu"] = eval_M_mu(params, t, k, eta, mu=params.nu_eff)
        out["M_kappa"] = eval_M_mu(params, t, k, eta, mu=params.kappa_eff)
    elif model == "mhd_vertical":
        va, da = eval_M_alpha(params, params.alpha, params.c2_eff, t, k, eta)
        vb, db = eval_M_alpha(params, (0.0, 1.0), params.c2_eff, t, k, eta)
        out["M_L"] = (va * vb, da + db)
        out["M_nu"] = eval_M_mu(params, t, k, eta, mu=params.nu_eff)
        out["M_kappa"] = eval_M_mu(params, t, k, eta, mu=params.kappa_eff)
    return out


def compose_m(factors: dict) -> tuple[np.ndarray, np.ndarray]:
    """Product of all weight factors and the summed logarithmic derivative."""
    m = None
    dlog = None
    for name, (val, dl) in factors.items():
        if name == "m_tilde":
            continue
        m = val if m is None else m * val
        dlog = dl if dlog is None else dlog + dl
    return m, dlog


def eval_A(params: WeightParams, model: str, t, k, eta) -> np.ndarray:
    """Norm weight A = <k,eta>^N exp(c mu^(1/3) t [k != 0]) / m."""
    k = np.asarray(k, dtype=float)
    m, _ = compose_m(model_factors(params, model, t, k, eta))
    growth = np.exp(
        params.c * params.mu ** (1.0 / 3.0) * np.asarray(t, dtype=float) * (k != 0)
    )
    return bracket2(k, eta, params.bracket_mode) ** params.N * growth / m


@dataclass
class WeightTable:
    """All multiplier arrays on a (k, eta) lattice at a fixed time."""

    t: float
    model: str
    k: np.ndarray
    eta: np.ndarray
    m_gamma: np.ndarray
    m_tilde: np.ndarray
    M_mu: np.ndarray
    M_L: np.ndarray
    m: np.ndarray
    A: np.ndarray
    dlog_m_dt: np.ndarray
    parts: dict = field(default_factory=dict)


def build_weight_table(
    params: WeightParams, model: str, t: float, k1d, eta1d
) -> WeightTable:
    """Evaluate every factor on the lattice k1d x eta1d at time t."""
    k1d = np.asarray(k1d, dtype=float)
    eta1d = np.asarray(eta1d, dtype=float)
    k2, e2 = np.meshgrid(k1d, eta1d, indexing="ij")
    factors = model_factors(params, model, t, k2, e2, separable=(k1d, eta1d))
    m, dlog = compose_m(factors)
    growth = np.exp(params.c * params.mu ** (1.0 / 3.0) * t * (k2 != 0))
    a = bracket2(k2, e2, params.bracket_mode) ** params.N * growth / m

    def part(name, default):
        return factors[name][0] if name in factors else default

    ones = np.ones_like(m)
    m_mu = ones
    for nm in ("M_mu", "M_nu", "M_kappa"):
        if nm in factors:
            m_mu = m_mu * factors[nm][0]
    return WeightTable(
        t=float(t),
        model=model,
        k=k2,
        eta=e2,
        m_gamma=part("m_gamma", ones),
        m_tilde=part("m_tilde", ones),
        M_mu=m_mu,
        M_L=part("M_L", ones),
        m=m,
        A=a,
        dlog_m_dt=dlog,
        parts=factors,
    )


# ---------------------------------------------------------------------------
# Lemma audits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSpec:
    """Sampling ranges for the weight-property audits.

    ceiling caps the empirical constant of comparability checks; Lipschitz
    statements on the bounded multipliers carry the multiplier's supremum
    (exponential in 1/c) inside their hidden constant, so audits of those
    need a ceiling scaled accordingly.
    """

    n_samples: int = 10000
    t_max: float = 200.0
    k_max: int = 16
    eta_max: float = 60.0
    seed: int = 0
    ceiling: float = 1e6


@dataclass
class AuditReport:
    lemma_id: str
    kind: str  # "exact" or "empirical"
    n_samples: int
    passed: bool
    max_violation: float = 0.0
    empirical_constant: float | None = None
    stable: bool | None = None
    notes: str = ""


_RHS_FLOOR = 1e-300


def _draw(spec: SampleSpec, rng, pairs: bool = False):
    n = spec.n_samples
    t = rng.uniform(0.0, spec.t_max, n)
    k = rng.integers(-spec.k_max, spec.k_max + 1, n).astype(float)
    eta = rng.uniform(-spec.eta_max, spec.eta_max, n)
    if not pairs:
        return t, k, eta
    dk = rng.integers(-4, 5, n).astype(float)
    deta = rng.uniform(-6.0, 6.0, n)
    # Stress stratum for the pair estimates: low |k| with large |eta| at
    # moderate times, where adjacent wavenumbers straddle the resonant
    # windows and weight differences reach their full range.
    m = n // 3
    t[:m] = rng.uniform(1.0, 40.0, m)
    k[:m] = rng.integers(-3, 4, m).astype(float)
    eta[:m] = rng.choice([-1.0, 1.0], m) * rng.uniform(0.3, 1.0, m) * spec.eta_max
    dk[:m] = rng.integers(-2, 3, m).astype(float)
    deta[:m] = rng.uniform(-2.0, 2.0, m)
    l, xi = k - dk, eta - deta
    return t, k, eta, l, xi


def _empirical(lhs, rhs):
    ratio = np.asarray(lhs) / np.maximum(np.asarray(rhs), _RHS_FLOOR)
    return float(np.max(ratio)) if ratio.size else 0.0


def _norm2(a, b):
    return np.hypot(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def audit_lemma(lemma_id: str, params: WeightParams, spec: SampleSpec) -> AuditReport:
    """Check one weight property over random samples.

    Exact inequalities report pass/fail (with a 1e-12 roundoff allowance);
    comparability inequalities report the empirical constant sup(LHS/RHS) and
    whether it is stable (within 2x) under doubling the sample.
    """
    checker = _AUDITS.get(lemma_id)
    if checker is None:
        raise ConfigInvalid(
            f"unknown lemma id {lemma_id!r}; known: {sorted(_AUDITS)}"
        )
    return checker(params, spec)


def _exact_report(lemma_id, n, violation, notes=""):
    return AuditReport(
        lemma_id=lemma_id,
        kind="exact",
        n_samples=n,
        passed=bool(violation <= 1e-12),
        max_violation=float(violation),
        notes=notes,
    )


def _empirical_report(lemma_id, params, spec, lhs_rhs: Callable):
    const = []
    for mult in (1, 2):
        sub = replace(spec, n_samples=spec.n_samples * mult, seed=spec.seed + mult)
        lhs, rhs = lhs_rhs(params, sub)
        const.append(_empirical(lhs, rhs))
    stable = const[1] <= 2.0 * max(const[0], _RHS_FLOOR)
    return AuditReport(
        lemma_id=lemma_id,
        kind="empirical",
        n_samples=spec.n_samples * 3,
        passed=bool(const[1] <= spec.ceiling and stable),
        empirical_constant=const[1],
        stable=bool(stable),
    )


def _audit_m_bounds(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    m_tilde, m_gamma, _ = eval_m_gamma(params, t, k, eta)
    cap = resonance_bound(params)
    v = max(
        float(np.max(1.0 - m_gamma)),
        float(np.max(m_gamma - m_tilde)),
        float(np.max(m_tilde - cap)),
    )
    return _exact_report("3.1.i", spec.n_samples, v, notes=f"cap={cap:.6g}")


def _audit_m_monotone(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    _, _, dlog = eval_m_gamma(params, t, k, eta)
    dlog_tilde = _dlog_tilde(params, t, k, eta)
    ramp = np.minimum(1.0, params.mu ** (1.0 / 3.0) * t)
    v = max(float(np.max(ramp * dlog_tilde - dlog)), float(np.max(-dlog)))
    return _exact_report("3.1.ii", spec.n_samples, max(v, 0.0))


def _lr_m_resonance(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, l, xi = _draw(spec, rng, pairs=True)
    keep = k != 0
    t, k, eta, l, xi = (a[keep] for a in (t, k, eta, l, xi))
    dlog_tilde = _dlog_tilde(params, t, l, xi)
    if params.gamma > 0:
        lhs = bracket(eta / k - t) ** (-(1.0 + params.gamma))
    else:
        br = bracket(eta / k - t)
        lhs = 1.0 / (br * np.abs(np.log1p(br)) ** (1.0 + params.r))
    rhs = dlog_tilde * bracket2(k - l, eta - xi) ** 5
    return lhs, rhs


def _dlog_tilde(params, t, k, eta):
    tab = _kernel_table(params)
    t, k, eta = np.broadcast_arrays(
        np.asarray(t, float), np.asarray(k, float), np.asarray(eta, float)
    )
    out = np.zeros(t.shape)
    for n in range(1, params.n_max + 1):
        for sgn in (1.0, -1.0):
            nn = sgn * n
            out += _inv_cubed_bracket(k - nn) * eval_g(params, t - eta / nn)
    return out


def _lr_m_pair(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, l, xi = _draw(spec, rng, pairs=True)
    _, mg1, _ = eval_m_gamma(params, t, k, eta)
    _, mg2, _ = eval_m_gamma(params, t, l, xi)
    lhs = np.abs(mg1 - mg2)
    rhs = np.minimum(1.0, params.mu ** (1.0 / 3.0) * t)
    return lhs, rhs


def _lr_m_eta(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, _, xi = _draw(spec, rng, pairs=True)
    keep = _norm2(k, xi) >= np.abs(eta - xi)
    t, k, eta, xi = t[keep], k[keep], eta[keep], xi[keep]
    _, mg1, _ = eval_m_gamma(params, t, k, eta)
    _, mg2, _ = eval_m_gamma(params, t, k, xi)
    lhs = np.abs(mg1 - mg2)
    rhs = np.abs(eta - xi) / bracket(k)
    return lhs, rhs


def _audit_M_mu_bounds(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    val, dlog = eval_M_mu(params, t, k, eta)
    cap = math.exp(math.pi / params.c)
    v = max(
        float(np.max(1.0 - val)),
        float(np.max(val - cap)),
        float(np.max(-dlog)),
    )
    return _exact_report("3.2.i", spec.n_samples, v, notes=f"cap={cap:.6g}")


def _lr_M_mu_lower(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    keep = k != 0
    t, k, eta = t[keep], k[keep], eta[keep]
    _, dlog = eval_M_mu(params, t, k, eta)
    x = t - eta / k
    lhs = np.full_like(t, params.mu ** (1.0 / 3.0))
    rhs = params.c * dlog + 2.0 * params.c * params.mu * (1.0 + x * x)
    return lhs, rhs


def _lr_M_mu_eta(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, _, xi = _draw(spec, rng, pairs=True)
    keep = (k != 0) & (_norm2(k, xi) >= np.abs(eta - xi))
    t, k, eta, xi = t[keep], k[keep], eta[keep], xi[keep]
    v1, _ = eval_M_mu(params, t, k, eta)
    v2, _ = eval_M_mu(params, t, k, xi)
    lhs = np.abs(v1 - v2)
    rhs = np.abs(eta - xi) / np.abs(k)
    return lhs, rhs


def _lr_M_mu_pair(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, l, xi = _draw(spec, rng, pairs=True)
    keep = _norm2(l, xi) >= _norm2(k - l, eta - xi)
    t, k, eta, l, xi = (a[keep] for a in (t, k, eta, l, xi))
    v1, _ = eval_M_mu(params, t, k, eta)
    v2, _ = eval_M_mu(params, t, l, xi)
    lhs = np.abs(v1 - v2)
    rhs = (
        params.mu ** (1.0 / 3.0)
        * (_norm2(l, xi - l * t) + t)
        * bracket2(k - l, eta - xi) ** 2
    )
    return lhs, rhs


def _audit_theta_resonance(params, spec):
    # energy-estimate form: (1/beta)<t - eta/k>^-3 <= c*dlogM + c*mu^(1/2)
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    keep = k != 0
    t, k, eta = t[keep], k[keep], eta[keep]
    c = theta_weight_constant(params.beta)
    _, dlog = eval_M_L_theta(params, t, k, eta)
    lhs = bracket(t - eta / k, params.bracket_mode) ** -3.0 / params.beta
    rhs = c * dlog + c * math.sqrt(params.mu)
    v = float(np.max(lhs - rhs))
    return _exact_report("5.2.i", int(keep.sum()), max(v, 0.0))


def _audit_theta_bounds(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    val, dlog = eval_M_L_theta(params, t, k, eta)
    implied, quoted = theta_weight_bounds(params)
    v = max(
        float(np.max(1.0 - val)),
        float(np.max(val - implied)),
        float(np.max(-dlog)),
    )
    quoted_ok = bool(np.max(val) <= quoted)
    return _exact_report(
        "5.2.ii",
        spec.n_samples,
        v,
        notes=(
            f"implied cap={implied:.6g} used; quoted cap={quoted:.6g} "
            f"{'holds' if quoted_ok else 'violated'} on this sample"
        ),
    )


def _lr_theta_eta(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, _, xi = _draw(spec, rng, pairs=True)
    keep = _norm2(k, xi) >= np.abs(eta - xi)
    t, k, eta, xi = t[keep], k[keep], eta[keep], xi[keep]
    v1, _ = eval_M_L_theta(params, t, k, eta)
    v2, _ = eval_M_L_theta(params, t, k, xi)
    lhs = np.abs(v1 - v2)
    rhs = np.abs(eta - xi) / bracket(k)
    return lhs, rhs


def _lr_theta_pair(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, l, xi = _draw(spec, rng, pairs=True)
    keep = (_norm2(l, xi) >= _norm2(k - l, eta - xi)) & (t >= 1.0)
    t, k, eta, l, xi = (a[keep] for a in (t, k, eta, l, xi))
    v1, _ = eval_M_L_theta(params, t, k, eta)
    v2, _ = eval_M_L_theta(params, t, l, xi)
    p_half = replace(params, gamma=0.5)
    _, _, d1 = eval_m_gamma(p_half, t, k, eta)
    _, _, d2 = eval_m_gamma(p_half, t, l, xi)
    mu13 = params.mu ** (-1.0 / 3.0)
    lhs = np.abs(v1 - v2) * _norm2(l, xi) / t**1.5
    rhs = (
        bracket(mu13 * t**-1.5)
        + (t + mu13) * np.sqrt(d1 * d2)
        + t**-1.5 * math.sqrt(params.mu) * _norm2(l, xi - l * t)
    ) * bracket2(k - l, eta - xi) ** 6
    return lhs, rhs


def _audit_alpha_bounds(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    d, c1 = params.alpha, params.c2_eff
    if d[1] == 0:
        d = (0.0, 1.0)
    val, dlog = eval_M_alpha(params, d, c1, t, k, eta)
    implied, quoted = alpha_weight_bounds(d, c1)
    v = max(
        float(np.max(1.0 - val)),
        float(np.max(val - implied)),
        float(np.max(-dlog)),
    )
    quoted_ok = bool(np.max(val) <= quoted)
    return _exact_report(
        "6.3.i",
        spec.n_samples,
        v,
        notes=(
            f"implied cap={implied:.6g} used; quoted cap={quoted:.6g} "
            f"{'holds' if quoted_ok else 'violated'} on this sample"
        ),
    )


def _lr_alpha_eta(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, _, xi = _draw(spec, rng, pairs=True)
    keep = (k != 0) & (_norm2(k, xi) >= np.abs(eta - xi))
    t, k, eta, xi = t[keep], k[keep], eta[keep], xi[keep]
    d, c1 = params.alpha, params.c2_eff
    if d[1] == 0:
        d = (0.0, 1.0)
    v1, _ = eval_M_alpha(params, d, c1, t, k, eta)
    v2, _ = eval_M_alpha(params, d, c1, t, k, xi)
    lhs = np.abs(v1 - v2)
    rhs = np.abs(eta - xi) / np.abs(k)
    return lhs, rhs


def _lr_alpha_pair(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta, l, xi = _draw(spec, rng, pairs=True)
    keep = (_norm2(l, xi) >= _norm2(k - l, eta - xi)) & (t >= 1.0)
    t, k, eta, l, xi = (a[keep] for a in (t, k, eta, l, xi))
    d, c1 = params.alpha, params.c2_eff
    if d[1] == 0:
        d = (0.0, 1.0)
    v1, _ = eval_M_alpha(params, d, c1, t, k, eta)
    v2, _ = eval_M_alpha(params, d, c1, t, l, eta)
    p0 = replace(params, gamma=0.0)
    _, _, d1 = eval_m_gamma(p0, t, k, eta)
    _, _, d2 = eval_m_gamma(p0, t, l, xi)
    lnmu = abs(math.log(params.mu)) ** (1.0 + params.r)
    lhs = _norm2(l, xi) / t * np.abs(v1 - v2)
    rhs = (
        1.0 + params.mu ** (-1.0 / 3.0) * lnmu * np.sqrt(d1 * d2)
    ) * bracket2(k - l, eta - xi) ** 5
    return lhs, rhs


def _audit_monotone(params, spec):
    rng = np.random.default_rng(spec.seed)
    t, k, eta = _draw(spec, rng)
    worst = 0.0
    for model in ("ns", "boussinesq", "mhd_horizontal", "mhd_vertical"):
        factors = model_factors(params, model, t, k, eta)
        _, dlog = compose_m(factors)
        worst = max(worst, float(np.max(-dlog)))
    return _exact_report("monotone", spec.n_samples * 4, max(worst, 0.0))


_AUDITS: dict[str, Callable] = {
    "3.1.i": _audit_m_bounds,
    "3.1.ii": _audit_m_monotone,
    "3.1.iii": lambda p, s: _empirical_report("3.1.iii", p, s, _lr_m_resonance),
    "3.1.iv": lambda p, s: _empirical_report("3.1.iv", p, s, _lr_m_pair),
    "3.1.v": lambda p, s: _empirical_report("3.1.v", p, s, _lr_m_eta),
    "3.2.i": _audit_M_mu_bounds,
    "3.2.ii": lambda p, s: _empirical_report("3.2.ii", p, s, _lr_M_mu_lower),
    "3.2.iii": lambda p, s: _empirical_report("3.2.iii", p, s, _lr_M_mu_eta),
    "3.2.iv": lambda p, s: _empirical_report("3.2.iv", p, s, _lr_M_mu_pair),
    "5.2.i": _audit_theta_resonance,
    "5.2.ii": _audit_theta_bounds,
    "5.2.iii": lambda p, s: _empirical_report("5.2.iii", p, s, _lr_theta_pair),
    "5.2.iv": lambda p, s: _empirical_report("5.2.iv", p, s, _lr_theta_eta),
    "6.3.i": _audit_alpha_bounds,
    "6.3.ii": lambda p, s: _empirical_report("6.3.ii", p, s, _lr_alpha_eta),
    "6.3.iii": lambda p, s: _empirical_report("6.3.iii", p, s, _lr_alpha_pair),
    "monotone": _audit_monotone,
}

AUDIT_IDS = tuple(sorted(_AUDITS))
