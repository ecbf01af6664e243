"""Weighted energies, bootstrap integrals, decay-rate fits, damping norms,
and the frequency-set decomposition of the transport commutator.

Everything here is a pure function of field snapshots plus a weight table
evaluated at the same time; running integrals accumulate by trapezoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelSpec, State, velocity_from_vorticity
from .errors import (
    GridTooLarge,
    InsufficientData,
    InvalidRichardson,
    NonpositiveNorm,
    TimeMismatch,
)
from .spectral import SpectralField, SpectralGrid, make_sheared_symbols
from .weights import WeightParams, WeightTable, bracket, build_weight_table


def grid_weight_table(
    params: WeightParams | None, model: str, t: float, grid: SpectralGrid, N: int = 12
) -> WeightTable:
    """Weight table on the grid's mode lattice.

    With params=None (inviscid runs have no mu^(1/3) scale) the table
    degenerates to the plain Sobolev weight <k,eta>^N.
    """
    if params is None:
        k2, e2 = np.meshgrid(grid.kx.astype(float), grid.eta, indexing="ij")
        a = (1.0 + k2**2 + e2**2) ** (N / 2.0)
        ones = np.ones_like(a)
        return WeightTable(
            t=float(t), model="none", k=k2, eta=e2, m_gamma=ones, m_tilde=ones,
            M_mu=ones, M_L=ones, m=ones, A=a, dlog_m_dt=0.0 * ones,
        )
    return build_weight_table(params, model, t, grid.kx.astype(float), grid.eta)


def weighted_norm_sq(fields, table: WeightTable, grid: SpectralGrid) -> float:
    """cell_area * sum over fields/components of A^2 |coeff|^2."""
    a2 = table.A**2
    total = 0.0
    for f in _iter_fields(fields):
        total += float(np.sum(a2[None] * np.abs(f.coeffs) ** 2))
    return grid.cell_area * total


def _iter_fields(fields):
    if isinstance(fields, SpectralField):
        return [fields]
    if isinstance(fields, dict):
        return list(fields.values())
    return list(fields)


def energy_boussinesq(
    z1: SpectralField, z2: SpectralField, table: WeightTable, beta: float
) -> float:
    """Half the weighted norm plus the stratified cross term.

    E = 0.5 ||A z||^2 + (1/(2 beta)) < dyt Lambda^-1 A z1, A z2 >; the cross
    symbol has modulus <= 1, so E >= (1 - 1/(2 beta)) * 0.5 ||A z||^2.
    """
    if beta <= 0.5:
        raise InvalidRichardson("the stratified energy needs beta > 1/2")
    grid = z1.grid
    sym = make_sheared_symbols(grid, table.t)
    with np.errstate(invalid="ignore"):
        cross_sym = np.where(sym.lam > 0, np.imag(sym.dyt) / sym.lam, 0.0)
    az1 = table.A[None] * z1.coeffs
    az2 = table.A[None] * z2.coeffs
    quad = 0.5 * float(np.sum(np.abs(az1) ** 2 + np.abs(az2) ** 2))
    cross = float(np.real(np.sum(1j * cross_sym[None] * az1 * np.conj(az2))))
    return grid.cell_area * (quad + cross / (2.0 * beta))


@dataclass
class BootstrapIntegrals:
    """Trapezoid accumulation of the dissipation and weight-flux integrals."""

    mu: float
    t_last: float | None = None
    diss_last: float = 0.0
    weight_last: float = 0.0
    diss_total: float = 0.0
    weight_total: float = 0.0

    def update(self, fields, table: WeightTable, grid: SpectralGrid, t: float):
        if abs(table.t - t) > 1e-9 * max(1.0, abs(t)):
            raise TimeMismatch(f"weight table at t={table.t} but fields at t={t}")
        sym = make_sheared_symbols(grid, t)
        lam2 = sym.lam**2
        a2 = table.A**2
        diss = 0.0
        wt = 0.0
        for f in _iter_fields(fields):
            p2 = np.abs(f.coeffs) ** 2
            diss += float(np.sum(lam2[None] * a2[None] * p2))
            wt += float(np.sum(table.dlog_m_dt[None] * a2[None] * p2))
        diss *= self.mu * grid.cell_area
        wt *= grid.cell_area
        if self.t_last is not None:
            if t < self.t_last:
                raise TimeMismatch("bootstrap samples must advance in time")
            h = t - self.t_last
            self.diss_total += 0.5 * h * (diss + self.diss_last)
            self.weight_total += 0.5 * h * (wt + self.weight_last)
        self.t_last = t
        self.diss_last = diss
        self.weight_last = wt
        return self.diss_total, self.weight_total


@dataclass
class FitResult:
    rate: float
    stderr: float
    n_samples: int
    window: tuple[float, float]


def fit_decay_rate(times, norms, t_min=None, t_max=None) -> FitResult:
    """Least-squares slope of log(norm) vs t; rate > 0 means decay."""
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    lo = -np.inf if t_min is None else t_min
    hi = np.inf if t_max is None else t_max
    keep = (times >= lo) & (times <= hi)
    times, norms = times[keep], norms[keep]
    if times.size < 10:
        raise InsufficientData(f"need >= 10 samples in window, got {times.size}")
    if np.any(norms <= 0):
        raise NonpositiveNorm("log fit needs positive norms")
    y = np.log(norms)
    tbar = times.mean()
    ybar = y.mean()
    sxx = float(np.sum((times - tbar) ** 2))
    slope = float(np.sum((times - tbar) * (y - ybar)) / sxx)
    resid = y - (ybar + slope * (times - tbar))
    dof = max(times.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return FitResult(
        rate=-slope, stderr=stderr, n_samples=times.size,
        window=(float(times.min()), float(times.max())),
    )


@dataclass
class TransferDecomposition:
    reaction: float
    transport: float
    remainder: float
    average: float
    total: float
    reaction_resonant: float
    reaction_nonresonant: float
    average_reaction: float
    average_transport: float

    @property
    def partition_defect(self) -> float:
        s = self.reaction + self.transport + self.remainder + self.average
        scale = max(abs(self.total), 1e-300)
        return abs(s - self.total) / scale


def transfer_decomposition(
    f1: SpectralField,
    f2: SpectralField,
    q: SpectralField,
    gamma: float,
    gamma_tilde: float,
    table: WeightTable,
    t: float,
    pair_budget: int = 1 << 22,
) -> TransferDecomposition:
    """Frequency-set split of the weighted transport-commutator double sum.

    Every (k,eta),(l,xi) mode pair is assigned to exactly one of the
    reaction/transport/remainder/average sets (boundary ties go to the
    remainder set, equal x-frequencies always to the average set), so the
    four magnitudes add up to the unrestricted sum identically.
    """
    grid = f1.grid
    n_modes = grid.nx * grid.ny
    if n_modes * n_modes > pair_budget:
        raise GridTooLarge(
            f"{n_modes}^2 pairs exceed budget {pair_budget}; use a smaller grid"
        )
    if abs(table.t - t) > 1e-9 * max(1.0, abs(t)):
        raise TimeMismatch("weight table evaluated at a different time")

    k = np.repeat(grid.kx.astype(float), grid.ny)
    m_idx = np.tile(grid.my, grid.nx)
    eta = (2.0 * np.pi / grid.ly) * m_idx
    a = table.A.reshape(-1)
    lam = np.hypot(k, eta - k * t)

    af1 = np.abs(f1.coeffs[0].reshape(-1)) * a
    f2a = np.abs(f2.coeffs[0].reshape(-1))
    qc = np.abs(q.coeffs[0])

    dk = k[:, None] - k[None, :]
    dm = m_idx[:, None] - m_idx[None, :]
    de = eta[:, None] - eta[None, :]

    in_grid = (np.abs(dk) <= grid.nx // 2 - 1) & (np.abs(dm) <= grid.ny // 2 - 1)
    qv = np.zeros_like(dk)
    kk = (dk.astype(np.int64)) % grid.nx
    mm = (dm.astype(np.int64)) % grid.ny
    qv[in_grid] = qc[kk[in_grid], mm[in_grid]]

    # |eta l - k xi| / |k-l, eta-xi-(k-l)t|^(1+gamma)
    num = np.abs(eta[:, None] * k[None, :] - k[:, None] * eta[None, :])
    den2 = dk**2 + (de - dk * t) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        wgt = np.where(den2 > 0, num / den2 ** (0.5 * (1.0 + gamma)), 0.0)
        ratio = np.where(
            lam[None, :] > 0, (lam[:, None] / lam[None, :]) ** gamma_tilde, 0.0
        )
    comm = np.abs(ratio * a[:, None] - a[None, :])
    # the (l,xi) = origin column has zero transport numerator anyway
    comm[:, lam == 0] = 0.0

    terms = wgt * comm * af1[:, None] * f2a[None, :] * qv

    norm_lo = np.hypot(k, eta)[None, :]
    diff_norm = np.hypot(dk, de)
    is_avg = dk == 0
    is_reaction = (~is_avg) & (diff_norm > 8.0 * norm_lo)
    is_transport = (~is_avg) & (8.0 * diff_norm < norm_lo)
    is_remainder = ~(is_avg | is_reaction | is_transport)

    total = float(terms.sum())
    reaction = float(terms[is_reaction].sum())
    transport_ = float(terms[is_transport].sum())
    remainder = float(terms[is_remainder].sum())
    average = float(terms[is_avg].sum())

    with np.errstate(divide="ignore", invalid="ignore"):
        res_ratio = np.where(dk != 0, de / np.where(dk == 0, 1.0, dk), np.inf)
    chi_r = (res_ratio >= 0.5 * t) & (res_ratio <= 2.0 * t)
    reaction_res = float(terms[is_reaction & chi_r].sum())

    avg_reaction_mask = is_avg & (np.abs(de) >= np.hypot(k[:, None], eta[None, :]))
    average_reaction = float(terms[is_avg & avg_reaction_mask].sum())

    return TransferDecomposition(
        reaction=reaction,
        transport=transport_,
        remainder=remainder,
        average=average,
        total=total,
        reaction_resonant=reaction_res,
        reaction_nonresonant=reaction - reaction_res,
        average_reaction=average_reaction,
        average_transport=average - average_reaction,
    )


def damping_norms(state: State, spec: ModelSpec, bracket_mode: str = "quadratic") -> dict:
    """Time-weighted mixing norms of the model's velocity components."""
    t = state.t
    bt = float(bracket(t, bracket_mode))
    sym = None
    if spec.model in ("ns", "boussinesq"):
        sym = make_sheared_symbols(state.fields["w"].grid, t)
        v = velocity_from_vorticity(state.fields["w"], sym)
        vx = SpectralField(v.grid, v.coeffs[0])
        vy = SpectralField(v.grid, v.coeffs[1])
    if spec.model == "ns":
        out = {
            "x_neq": bt * vx.l2_norm_nonzero_x(),
            "y": bt**2 * vy.l2_norm(),
        }
    elif spec.model == "boussinesq":
        theta = state.fields["theta"]
        x_part = math.hypot(vx.l2_norm_nonzero_x(), theta.l2_norm_nonzero_x())
        out = {
            "x_neq": bt**0.5 * x_part,
            "y": bt**1.5 * vy.l2_norm(),
        }
    else:
        v = state.fields["v"]
        b = state.fields["b"]
        vx = SpectralField(v.grid, v.coeffs[0])
        bx = SpectralField(b.grid, b.coeffs[0])
        vy = SpectralField(v.grid, v.coeffs[1])
        by = SpectralField(b.grid, b.coeffs[1])
        out = {
            "x_neq": math.hypot(vx.l2_norm_nonzero_x(), bx.l2_norm_nonzero_x()),
            "y": bt * math.hypot(vy.l2_norm(), by.l2_norm()),
        }
    out["combined"] = out["x_neq"] + out["y"]
    return out


@dataclass
class EnergySeries:
    """Per-sample diagnostic records of one run."""

    model: str
    rows: list = field(default_factory=list)

    COLUMNS = (
        "t", "model", "norm_total", "norm_neq", "wnorm_sq", "E",
        "boot_diss", "boot_weight",
        "R", "T", "Rem", "NLeq",
        "damp_x_neq", "damp_y", "damp_total",
    )

    def append(self, row: dict):
        if self.rows and row["t"] <= self.rows[-1]["t"]:
            raise TimeMismatch("records must be strictly increasing in time")
        for key in ("norm_total", "wnorm_sq", "E"):
            if key in row and not np.isfinite(row[key]):
                raise NonpositiveNorm(f"non-finite record entry {key}")
        self.rows.append(row)

    @property
    def times(self) -> np.ndarray:
        return np.array([r["t"] for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        return np.array([r.get(name, math.nan) for r in self.rows])
