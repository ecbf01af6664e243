"""Right-hand sides of the moving-frame systems and their adapted variables.

All systems are written for the perturbation around the linear shear (and,
where applicable, the affine temperature profile or constant background
field), in coordinates following the shear characteristics.  Dissipation is
NOT included in these right-hand sides; the stepper applies it exactly
through its integrating factor.

The vector systems keep their constraints by construction: the returned
tendency G satisfies div_t G = d_x f^y, which is exactly what keeps
div_t f(t) constant in the moving frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirection, InvalidRichardson, SingularSymbolAtZeroMode
from .spectral import (
    SpectralField,
    SpectralGrid,
    ShearedSymbols,
    apply_multiplier,
    compose_symbol,
    from_physical,
    lambda_power,
    leray_project,
    make_sheared_symbols,
    to_physical,
)

MODEL_NAMES = ("ns", "boussinesq", "mhd_horizontal", "mhd_vertical")


@dataclass(frozen=True)
class ModelSpec:
    """Which system to run and its physical constants."""

    model: str
    nu: float = 0.0
    kappa: float = 0.0
    beta: float = 1.0
    alpha: tuple[float, float] = (1.0, 0.0)
    linearized: bool = False

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.model!r}")
        if self.nu < 0 or self.kappa < 0:
            raise ValueError("dissipation coefficients must be >= 0")
        if self.model == "boussinesq" and self.beta <= 0.5:
            raise InvalidRichardson("boussinesq energy needs beta > 1/2")
        if self.model.startswith("mhd"):
            a1, a2 = self.alpha
            if a1 == 0 and a2 == 0:
                raise DegenerateDirection("background field must be nonzero")
            if self.model == "mhd_horizontal" and a2 != 0:
                raise DegenerateDirection("horizontal variant needs alpha_2 = 0")
            if self.model == "mhd_vertical" and a2 == 0:
                raise DegenerateDirection("vertical variant needs alpha_2 != 0")

    @property
    def mu(self) -> float:
        if self.model == "ns":
            return self.nu
        return min(self.nu, self.kappa)


@dataclass
class State:
    """Model fields at a common time."""

    t: float
    fields: dict[str, SpectralField] = field(default_factory=dict)

    def copy(self) -> "State":
        return State(self.t, {k: v.copy() for k, v in self.fields.items()})

    def finite(self) -> bool:
        return all(np.all(np.isfinite(f.coeffs)) for f in self.fields.values())


def _inv_laplacian(sym: ShearedSymbols) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = 1.0 / sym.lap
    return inv


def velocity_from_vorticity(w: SpectralField, sym: ShearedSymbols) -> SpectralField:
    """v = perp-gradient of the streamfunction, with w mean-zero required."""
    inv = _inv_laplacian(sym)
    vx = apply_multiplier(w, compose_symbol(-sym.dyt, inv))
    vy = apply_multiplier(w, compose_symbol(sym.dx, inv))
    return SpectralField(w.grid, np.concatenate([vx.coeffs, vy.coeffs]))


def transport(v: SpectralField, f: SpectralField, sym: ShearedSymbols) -> SpectralField:
    """(v . grad_t) f computed pseudo-spectrally, dealiased."""
    vp = to_physical(v)
    out = []
    for comp in range(f.components):
        fc = SpectralField(f.grid, f.coeffs[comp])
        gx = to_physical(apply_multiplier(fc, sym.dx))[0]
        gy = to_physical(apply_multiplier(fc, sym.dyt))[0]
        prod = vp[0] * gx + vp[1] * gy
        out.append(prod)
    return from_physical(np.stack(out), f.grid)


def ns_rhs(w: SpectralField, t: float, nonlinear: bool = True) -> SpectralField:
    """Vorticity tendency -(v . grad_t) w; dissipation handled elsewhere."""
    if w.get_mode(0, 0) != 0:
        raise SingularSymbolAtZeroMode("vorticity must be mean-zero")
    if not nonlinear:
        return SpectralField.zeros(w.grid)
    sym = make_sheared_symbols(w.grid, t)
    v = velocity_from_vorticity(w, sym)
    rhs = transport(v, w, sym)
    rhs.coeffs *= -1.0
    rhs.coeffs[:, 0, 0] = 0.0
    return rhs


def boussinesq_rhs(
    w: SpectralField,
    theta: SpectralField,
    t: float,
    beta: float,
    nonlinear: bool = True,
) -> tuple[SpectralField, SpectralField]:
    """Vorticity/temperature tendencies of the stratified system.

    dw = -(v.grad_t)w - d_x theta,  dtheta = -(v.grad_t)theta + beta^2 v^y,
    with v recovered from w.  With theta = 0 and beta = 0 this reduces to the
    plain vorticity tendency.
    """
    sym = make_sheared_symbols(w.grid, t)
    v = velocity_from_vorticity(w, sym)
    dw = apply_multiplier(theta, -sym.dx)
    vy = SpectralField(w.grid, v.coeffs[1])
    dtheta = SpectralField(w.grid, beta**2 * vy.coeffs)
    if nonlinear:
        tw = transport(v, w, sym)
        tt = transport(v, theta, sym)
        dw.coeffs -= tw.coeffs
        dtheta.coeffs -= tt.coeffs
    dw.coeffs[:, 0, 0] = 0.0
    dtheta.coeffs[:, 0, 0] = 0.0
    return dw, dtheta


def _constraint_consistent(rhs: SpectralField, f: SpectralField, sym: ShearedSymbols) -> SpectralField:
    """Project the tendency and restore the frame term grad_t inv_lap d_x f^y.

    The result satisfies div_t(rhs) = d_x f^y, the compatibility condition
    that keeps div_t f constant under the moving-frame time derivative.
    """
    out = leray_project(rhs, sym.t)
    inv = _inv_laplacian(sym)
    k = np.imag(sym.dx)
    sig = np.imag(sym.dyt)
    with np.errstate(invalid="ignore"):
        corr_x = np.where(sym.lam > 0, -k * k * inv, 0.0)
        corr_y = np.where(sym.lam > 0, -k * sig * inv, 0.0)
    fy = f.coeffs[1]
    out.coeffs[0] += corr_x * fy
    out.coeffs[1] += corr_y * fy
    return out


def mhd_rhs(
    v: SpectralField,
    b: SpectralField,
    t: float,
    alpha: tuple[float, float],
    nonlinear: bool = True,
) -> tuple[SpectralField, SpectralField]:
    """Velocity/magnetic tendencies with pressure eliminated by projection.

    The momentum tendency carries the lift-up term and its nonlocal pressure
    correction; both equations carry the background coupling (alpha.grad_t);
    the quadratic terms are the usual transport pairs.
    """
    grid = v.grid
    sym = make_sheared_symbols(grid, t)
    coupling = alpha[0] * sym.dx + alpha[1] * sym.dyt

    dv = SpectralField.zeros(grid, 2)
    dv.coeffs[0] -= v.coeffs[1]  # lift-up
    dv.coeffs += coupling[None] * b.coeffs
    db = SpectralField.zeros(grid, 2)
    db.coeffs[0] += b.coeffs[1]
    db.coeffs += coupling[None] * v.coeffs

    if nonlinear:
        dv.coeffs += transport(b, b, sym).coeffs - transport(v, v, sym).coeffs
        db.coeffs += transport(b, v, sym).coeffs - transport(v, b, sym).coeffs

    dv = _constraint_consistent(dv, v, sym)
    db = _constraint_consistent(db, b, sym)
    return dv, db


def adapted_boussinesq(
    w: SpectralField, theta: SpectralField, t: float, beta: float
) -> tuple[SpectralField, SpectralField]:
    """Half-order symmetrized unknowns (Lambda^(-1/2) w, Lambda^(1/2) theta / beta)."""
    if beta <= 0:
        raise InvalidRichardson("adapted variables need beta > 0")
    sym = make_sheared_symbols(w.grid, t)
    z1 = apply_multiplier(w, lambda_power(sym, -0.5))
    z2 = apply_multiplier(theta, lambda_power(sym, 0.5) / beta)
    return z1, z2


def adapted_boussinesq_inverse(
    z1: SpectralField, z2: SpectralField, t: float, beta: float
) -> tuple[SpectralField, SpectralField]:
    if beta <= 0:
        raise InvalidRichardson("adapted variables need beta > 0")
    sym = make_sheared_symbols(z1.grid, t)
    w = apply_multiplier(z1, lambda_power(sym, 0.5))
    theta = apply_multiplier(z2, compose_symbol(lambda_power(sym, -0.5), beta))
    return w, theta


def adapted_mhd(
    v: SpectralField, b: SpectralField, t: float, spec: ModelSpec
) -> tuple[SpectralField, SpectralField]:
    """Velocity corrected by the magnetic stretching history; b unchanged.

    The correction acts only on the x-component and only on k != 0 modes:
    1/(alpha_1 d_x) for the horizontal background; the bounded symbol
    (alpha . grad_t)/<alpha . grad_t>^2 for a vertical one.
    """
    grid = v.grid
    sym = make_sheared_symbols(grid, t)
    a1, a2 = spec.alpha
    if spec.model == "mhd_horizontal":
        if a1 == 0:
            raise DegenerateDirection("horizontal adaptation needs alpha_1 != 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(grid.k2d != 0, 1.0 / (a1 * sym.dx), 0.0)
    elif spec.model == "mhd_vertical":
        if a2 == 0:
            raise DegenerateDirection("vertical adaptation needs alpha_2 != 0")
        coupling = a1 * sym.dx + a2 * sym.dyt
        corr = np.where(grid.k2d != 0, coupling / (1.0 + np.abs(coupling) ** 2), 0.0)
    else:
        raise ValueError("adapted velocity is defined for the MHD variants")
    vt = v.copy()
    vt.coeffs[0] += corr * b.coeffs[1]
    return vt, b.copy()


# ---------------------------------------------------------------------------
# System adapters used by the stepper and harness
# ---------------------------------------------------------------------------


class System:
    """Uniform interface over the three models for stepping and diagnostics."""

    def __init__(self, spec: ModelSpec, grid: SpectralGrid):
        self.spec = spec
        self.grid = grid

    @property
    def field_names(self) -> tuple[str, ...]:
        raise NotImplementedError

    def dissipation(self, name: str) -> float:
        raise NotImplementedError

    def rhs(self, state: State) -> dict[str, SpectralField]:
        raise NotImplementedError

    def clean(self, state: State) -> State:
        return state

    def adapted(self, state: State) -> dict[str, SpectralField]:
        """Fields entering the weighted norm."""
        raise NotImplementedError

    @property
    def weight_model(self) -> str:
        raise NotImplementedError

    def advective_rate(self, state: State) -> float:
        """Bound on |coupling| + |velocity| * |wavenumber| for step control."""
        sym = make_sheared_symbols(self.grid, state.t)
        mask = self.grid.dealias_mask
        kmax = float(np.max(np.abs(self.grid.k2d[mask])))
        smax = float(np.max(np.abs(np.imag(sym.dyt)[mask])))
        rate = self._wave_rate(kmax, smax)
        if not self.spec.linearized:
            vel = self._velocity(state, sym)
            if vel is not None:
                vp = to_physical(vel)
                rate += kmax * float(np.max(np.abs(vp[0]))) + smax * float(
                    np.max(np.abs(vp[1]))
                )
        return rate

    def _wave_rate(self, kmax: float, smax: float) -> float:
        return 0.0

    def _velocity(self, state: State, sym: ShearedSymbols):
        return None


class NavierStokesSystem(System):
    field_names = ("w",)
    weight_model = "ns"

    def dissipation(self, name):
        return self.spec.nu

    def rhs(self, state):
        dw = ns_rhs(state.fields["w"], state.t, nonlinear=not self.spec.linearized)
        return {"w": dw}

    def adapted(self, state):
        return {"w": state.fields["w"]}

    def _wave_rate(self, kmax, smax):
        return 0.0

    def _velocity(self, state, sym):
        return velocity_from_vorticity(state.fields["w"], sym)


class BoussinesqSystem(System):
    field_names = ("w", "theta")
    weight_model = "boussinesq"

    def dissipation(self, name):
        return self.spec.nu if name == "w" else self.spec.kappa

    def rhs(self, state):
        dw, dtheta = boussinesq_rhs(
            state.fields["w"],
            state.fields["theta"],
            state.t,
            self.spec.beta,
            nonlinear=not self.spec.linearized,
        )
        return {"w": dw, "theta": dtheta}

    def adapted(self, state):
        z1, z2 = adapted_boussinesq(
            state.fields["w"], state.fields["theta"], state.t, self.spec.beta
        )
        return {"zeta1": z1, "zeta2": z2}

    def _wave_rate(self, kmax, smax):
        return kmax * (1.0 + self.spec.beta**2)

    def _velocity(self, state, sym):
        return velocity_from_vorticity(state.fields["w"], sym)


class MhdSystem(System):
    field_names = ("v", "b")

    @property
    def weight_model(self):
        return self.spec.model

    def dissipation(self, name):
        return self.spec.nu if name == "v" else self.spec.kappa

    def rhs(self, state):
        dv, db = mhd_rhs(
            state.fields["v"],
            state.fields["b"],
            state.t,
            self.spec.alpha,
            nonlinear=not self.spec.linearized,
        )
        return {"v": dv, "b": db}

    def clean(self, state):
        state.fields["v"] = leray_project(state.fields["v"], state.t)
        state.fields["b"] = leray_project(state.fields["b"], state.t)
        return state

    def adapted(self, state):
        vt, bt = adapted_mhd(state.fields["v"], state.fields["b"], state.t, self.spec)
        return {"v_adapted": vt, "b_adapted": bt}

    def _wave_rate(self, kmax, smax):
        a1, a2 = self.spec.alpha
        return abs(a1) * kmax + abs(a2) * smax + 1.0

    def _velocity(self, state, sym):
        return state.fields["v"]


def make_system(spec: ModelSpec, grid: SpectralGrid) -> System:
    if spec.model == "ns":
        return NavierStokesSystem(spec, grid)
    if spec.model == "boussinesq":
        return BoussinesqSystem(spec, grid)
    return MhdSystem(spec, grid)
