"""Simulation orchestration: seeded initial data, incremental energy CSV,
outcome classification, threshold bisection, and scaling-law fits.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig
from .diagnostics import (
    BootstrapIntegrals,
    EnergySeries,
    damping_norms,
    energy_boussinesq,
    fit_decay_rate,
    grid_weight_table,
    transfer_decomposition,
    weighted_norm_sq,
)
from .dynamics import ModelSpec, State, make_system
from .errors import (
    BracketFailure,
    InsufficientData,
    NonfiniteState,
    NonpositiveNorm,
)
from .spectral import SpectralField, SpectralGrid, leray_project, random_real_field
from .stepper import StepperConfig, advance


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


def _sobolev_envelope(grid: SpectralGrid, n_index: int) -> np.ndarray:
    """<k,eta>^-N: every band mode then carries comparable H^N content."""
    return (1.0 + grid.k2d**2 + grid.eta2d**2) ** (-n_index / 2.0)


def _scalar_profile(cfg: SimConfig, grid: SpectralGrid, rng, n_index: int) -> SpectralField:
    init = cfg.initial
    if init.profile == "random_band":
        f = random_real_field(
            grid, rng, k_band=init.k_band, m_band=init.m_band, mean_zero=True
        )
        f.coeffs *= _sobolev_envelope(grid, n_index)[None]
        return f
    if init.profile == "single_mode":
        k, m = init.mode
        return SpectralField.from_modes(grid, {(0, int(k), int(m)): 1.0 + 0.0j})
    k, m = init.mode
    k2, m2 = init.secondary_mode
    return SpectralField.from_modes(
        grid,
        {
            (0, int(k), int(m)): 1.0 + 0.0j,
            (0, int(k2), int(m2)): init.secondary_ratio + 0.0j,
        },
    )


def build_initial_state(cfg: SimConfig, grid: SpectralGrid, spec: ModelSpec) -> State:
    """Seeded initial perturbation, normalized to Sobolev size epsilon.

    The normalization uses the static H^N norm of all perturbation fields
    jointly (vector models are projected to their constraint first).
    """
    rng = np.random.default_rng(cfg.initial.seed)
    n_index = cfg.weights.N
    eps = cfg.initial.epsilon

    if spec.model == "ns":
        fields = {"w": _scalar_profile(cfg, grid, rng, n_index)}
    elif spec.model == "boussinesq":
        w = _scalar_profile(cfg, grid, rng, n_index)
        if cfg.initial.profile == "random_band":
            theta = _scalar_profile(cfg, grid, rng, n_index)
        else:
            theta = SpectralField.zeros(grid)
        fields = {"w": w, "theta": theta}
    else:
        from .spectral import apply_multiplier, make_sheared_symbols

        sym = make_sheared_symbols(grid, 0.0)
        if cfg.initial.profile == "random_band":
            env = _sobolev_envelope(grid, n_index)[None]
            v = random_real_field(
                grid, rng, 2, k_band=cfg.initial.k_band, m_band=cfg.initial.m_band
            )
            b = random_real_field(
                grid, rng, 2, k_band=cfg.initial.k_band, m_band=cfg.initial.m_band
            )
            v.coeffs *= env
            b.coeffs *= env
        else:
            phi = _scalar_profile(cfg, grid, rng, n_index)
            vx = apply_multiplier(phi, -sym.dyt)
            vy = apply_multiplier(phi, sym.dx)
            v = SpectralField(grid, np.concatenate([vx.coeffs, vy.coeffs]))
            b = SpectralField.zeros(grid, 2)
        v = leray_project(v, 0.0)
        b = leray_project(b, 0.0)
        v.coeffs[:, 0, 0] = 0.0
        b.coeffs[:, 0, 0] = 0.0
        fields = {"v": v, "b": b}

    total = math.sqrt(sum(f.sobolev_norm(n_index) ** 2 for f in fields.values()))
    scale = 0.0 if eps == 0.0 else (eps / total if total > 0 else 0.0)
    for f in fields.values():
        f.coeffs *= scale
    return State(0.0, fields)


# ---------------------------------------------------------------------------
# Single simulation
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    config: SimConfig
    run_id: str
    outcome: str
    max_ratio: float
    final_ratio: float
    base_wnorm_sq: float
    decay_rate: float
    rate_stderr: float
    wall_time: float
    series: EnergySeries
    final_state: State
    csv_path: str | None = None
    manifest_path: str | None = None


class _EarlyUnstable(Exception):
    """Raised by the sampler once the growth ratio is conclusively unstable."""


def _csv_value(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class _EnergyWriter:
    def __init__(self, path: Path | None, columns):
        self.path = path
        self.columns = columns
        self._fh = None
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(path, "w", newline="")
            self._fh.write(",".join(columns) + "\n")
            self._fh.flush()

    def write(self, row: dict):
        if self._fh is None:
            return
        self._fh.write(
            ",".join(_csv_value(row.get(c, math.nan)) for c in self.columns) + "\n"
        )
        self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def run_simulation(cfg: SimConfig) -> RunResult:
    """Run one configured simulation, writing its energy CSV incrementally.

    Deterministic for a fixed config (the seed lives in the config).  The
    outcome rule: stable when the weighted-energy ratio stays <= g_stable
    through t_end, unstable when it exceeds g_unstable or the state blows up.
    """
    t_start = time.perf_counter()
    grid = cfg.grid.to_grid()
    spec = cfg.model.to_spec()
    system = make_system(spec, grid)
    params = cfg.weights.to_params(spec)
    mu = spec.mu
    t_end = cfg.stepper.resolve_t_end(mu)
    step_cfg = StepperConfig(
        dt=cfg.stepper.dt,
        t_end=t_end,
        scheme=cfg.stepper.scheme,
        cfl_safety=cfg.stepper.cfl_safety,
        adapt=cfg.stepper.adapt,
    )
    state = build_initial_state(cfg, grid, spec)
    run_id = cfg.config_hash()

    out_dir = None
    csv_path = manifest_path = None
    if cfg.output.dir is not None:
        tag = cfg.output.tag or run_id
        out_dir = Path(cfg.output.dir) / f"run_{tag}"
        csv_path = out_dir / "energy.csv"
        manifest_path = out_dir / "manifest.json"

    series = EnergySeries(model=spec.model)
    writer = _EnergyWriter(csv_path, EnergySeries.COLUMNS)
    boots = BootstrapIntegrals(mu=mu)

    def sample(st: State):
        table = grid_weight_table(params, system.weight_model, st.t, grid, cfg.weights.N)
        adapted = system.adapted(st)
        wn = weighted_norm_sq(adapted, table, grid)
        if not math.isfinite(wn):
            # finite state but overflowed weighted norm: conclusively blown
            raise NonfiniteState(f"weighted energy overflow at t={st.t:.6g}")
        bd, bw = boots.update(adapted, table, grid, st.t)
        norm_total = math.sqrt(
            sum(f.l2_norm() ** 2 for f in st.fields.values())
        )
        norm_neq = math.sqrt(
            sum(f.l2_norm_nonzero_x() ** 2 for f in st.fields.values())
        )
        if spec.model == "boussinesq":
            z1, z2 = adapted["zeta1"], adapted["zeta2"]
            energy = energy_boussinesq(z1, z2, table, spec.beta)
        else:
            energy = wn
        damping = damping_norms(st, spec, cfg.weights.bracket_mode)
        row = {
            "t": st.t,
            "model": spec.model,
            "norm_total": norm_total,
            "norm_neq": norm_neq,
            "wnorm_sq": wn,
            "E": energy,
            "boot_diss": bd,
            "boot_weight": bw,
            "damp_x_neq": damping["x_neq"],
            "damp_y": damping["y"],
            "damp_total": damping["combined"],
        }
        if cfg.diagnostics.transfer:
            row.update(_transfer_row(st, adapted, table, spec, cfg))
        series.append(row)
        writer.write(row)
        if st.t >= 1.0:
            max_ratio, _, base = classify_ratios(series)
            if base > 0 and max_ratio > cfg.classify.g_unstable:
                raise _EarlyUnstable

    outcome = "stable"
    blewup = False
    try:
        state = advance(
            system, state, step_cfg, on_sample=sample, sample_dt=cfg.diagnostics.cadence
        )
    except NonfiniteState:
        blewup = True
    except _EarlyUnstable:
        pass
    finally:
        writer.close()

    max_ratio, final_ratio, base = classify_ratios(series)
    if blewup or max_ratio > cfg.classify.g_unstable:
        outcome = "unstable"
    elif max_ratio <= cfg.classify.g_stable:
        outcome = "stable"
    else:
        outcome = "inconclusive"

    rate, stderr = math.nan, math.nan
    if mu > 0:
        t_min = cfg.diagnostics.transient_fraction * mu ** (-1.0 / 3.0)
        try:
            fit = fit_decay_rate(series.times, series.column("norm_neq"), t_min=t_min)
            rate, stderr = fit.rate, fit.stderr
        except (InsufficientData, NonpositiveNorm):
            pass

    wall = time.perf_counter() - t_start
    result = RunResult(
        config=cfg,
        run_id=run_id,
        outcome=outcome,
        max_ratio=max_ratio,
        final_ratio=final_ratio,
        base_wnorm_sq=base,
        decay_rate=rate,
        rate_stderr=stderr,
        wall_time=wall,
        series=series,
        final_state=state,
        csv_path=str(csv_path) if csv_path else None,
        manifest_path=str(manifest_path) if manifest_path else None,
    )
    if manifest_path is not None:
        manifest = {
            "config": cfg.to_dict(),
            "config_hash": run_id,
            "seed": cfg.initial.seed,
            "outcome": outcome,
            "max_ratio": max_ratio,
            "decay_rate": rate,
            "wall_time_s": wall,
            "n_samples": len(series.rows),
            "versions": _versions(),
        }
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return result


def _versions() -> dict:
    import scipy

    return {"couettelab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _transfer_row(state, adapted, table, spec: ModelSpec, cfg: SimConfig) -> dict:
    from .spectral import apply_multiplier, compose_symbol, lambda_power, make_sheared_symbols

    if spec.model == "ns":
        f1 = f2 = q = state.fields["w"]
        gamma, gamma_tilde = 1.0, 0.0
    elif spec.model == "boussinesq":
        f1 = f2 = adapted["zeta2"]
        q = adapted["zeta1"]
        gamma, gamma_tilde = 0.5, 0.5
    else:
        sym = make_sheared_symbols(state.fields["v"].grid, state.t)
        v = state.fields["v"]
        wsym = compose_symbol(lambda_power(sym, -1.0), -sym.dyt)
        q1 = apply_multiplier(SpectralField(v.grid, v.coeffs[0]), wsym)
        q2 = apply_multiplier(
            SpectralField(v.grid, v.coeffs[1]), compose_symbol(lambda_power(sym, -1.0), sym.dx)
        )
        q = SpectralField(v.grid, q1.coeffs + q2.coeffs)
        f1 = f2 = SpectralField(v.grid, adapted["v_adapted"].coeffs[0])
        gamma, gamma_tilde = 0.0, 0.0
    dec = transfer_decomposition(
        f1, f2, q, gamma, gamma_tilde, table, state.t, cfg.diagnostics.pair_budget
    )
    return {
        "R": dec.reaction,
        "T": dec.transport,
        "Rem": dec.remainder,
        "NLeq": dec.average,
    }


def classify_ratios(series: EnergySeries) -> tuple[float, float, float]:
    """(max ratio, final ratio, base) of the weighted energy against t ~ 1.

    The base sample is the first one with t >= 1 (the bootstrap start); an
    all-zero run classifies as ratio 0.
    """
    times = series.times
    wn = series.column("wnorm_sq")
    if len(times) == 0:
        return 0.0, 0.0, 0.0
    idx = np.searchsorted(times, 1.0 - 1e-9)
    idx = min(idx, len(times) - 1)
    base = wn[idx]
    tail = wn[idx:]
    if base <= 0.0:
        big = float(np.max(tail)) if len(tail) else 0.0
        return (math.inf if big > 0 else 0.0), 0.0, 0.0
    return float(np.max(tail) / base), float(wn[-1] / base), float(base)


def outcome_from_rows(times, wnorm_sq, g_stable, g_unstable) -> str:
    """Recompute a run's outcome from its stored energy series."""
    s = EnergySeries(model="replay")
    for t, w in zip(times, wnorm_sq):
        s.append({"t": float(t), "norm_total": 0.0, "wnorm_sq": float(w), "E": 0.0})
    max_ratio, _, _ = classify_ratios(s)
    if not np.all(np.isfinite(wnorm_sq)) or max_ratio > g_unstable:
        return "unstable"
    if max_ratio <= g_stable:
        return "stable"
    return "inconclusive"


# ---------------------------------------------------------------------------
# Threshold bisection
# ---------------------------------------------------------------------------


@dataclass
class SweepRecord:
    model: str
    mu: float
    epsilon: float
    outcome: str
    max_ratio: float
    final_ratio: float
    decay_rate: float
    rate_stderr: float
    wall_time: float
    seed: int
    run_id: str

    COLUMNS = (
        "model", "mu", "epsilon", "outcome", "max_ratio", "final_ratio",
        "decay_rate", "rate_stderr", "wall_time", "seed", "run_id",
    )


def _record(result: RunResult, mu: float) -> SweepRecord:
    return SweepRecord(
        model=result.config.model.name,
        mu=mu,
        epsilon=result.config.initial.epsilon,
        outcome=result.outcome,
        max_ratio=result.max_ratio,
        final_ratio=result.final_ratio,
        decay_rate=result.decay_rate,
        rate_stderr=result.rate_stderr,
        wall_time=result.wall_time,
        seed=result.config.initial.seed,
        run_id=result.run_id,
    )


def _with_dissipation(cfg: SimConfig, mu: float) -> SimConfig:
    return cfg.replace(model={"nu": mu, "kappa": mu})


@dataclass
class ThresholdResult:
    mu: float
    eps_star: float
    eps_stable: float
    eps_unstable: float
    records: list = field(default_factory=list)


def bisect_threshold(
    cfg_template: SimConfig,
    mu: float,
    eps_lo: float | None = None,
    eps_hi: float | None = None,
    rel_tol: float = 0.1,
    max_probes: int = 40,
) -> ThresholdResult:
    """Bisect the stable/unstable amplitude boundary at one dissipation.

    Non-stable outcomes count as unstable for bracketing purposes; every
    probe is logged as a SweepRecord.  The default bracket seeds scale with
    mu^(1/3).
    """
    base = _with_dissipation(cfg_template, mu)
    mu13 = mu ** (1.0 / 3.0)
    lo = eps_lo if eps_lo is not None else 0.05 * mu13
    hi = eps_hi if eps_hi is not None else 10.0 * mu13
    records = []

    def probe(eps: float) -> str:
        run = run_simulation(base.replace(initial={"epsilon": eps}))
        records.append(_record(run, mu))
        return run.outcome

    probes = 0
    while probe(lo) != "stable":
        lo /= 4.0
        probes += 1
        if probes > 8:
            raise BracketFailure(f"no stable amplitude found down to eps={lo:.3g}")
    while probe(hi) == "stable":
        hi *= 4.0
        probes += 1
        if probes > 16:
            raise BracketFailure(f"no unstable amplitude found up to eps={hi:.3g}")

    while hi / lo > 1.0 + rel_tol and len(records) < max_probes:
        mid = math.sqrt(lo * hi)
        if probe(mid) == "stable":
            lo = mid
        else:
            hi = mid
    eps_star = math.sqrt(lo * hi)
    return ThresholdResult(
        mu=mu, eps_star=eps_star, eps_stable=lo, eps_unstable=hi, records=records
    )


@dataclass
class SlopeFit:
    slope: float
    stderr: float
    intercept: float
    residuals: list


def fit_threshold_slope(mu_values, eps_values, log_correction_r: float | None = None) -> SlopeFit:
    """Least-squares slope of log(eps*) against log(mu).

    With log_correction_r set, eps* is first multiplied by |log mu|^(1+r)
    (the expected logarithmic loss of the gamma = 0 regime).
    """
    mu_values = np.asarray(mu_values, dtype=float)
    eps_values = np.asarray(eps_values, dtype=float)
    if mu_values.size < 3:
        raise InsufficientData("need at least 3 threshold points")
    if np.any(eps_values <= 0) or np.any(mu_values <= 0):
        raise NonpositiveNorm("threshold fits need positive mu and eps")
    x = np.log(mu_values)
    y = np.log(eps_values)
    if log_correction_r is not None:
        y = y + (1.0 + log_correction_r) * np.log(np.abs(np.log(mu_values)))
    xb, yb = x.mean(), y.mean()
    sxx = float(np.sum((x - xb) ** 2))
    slope = float(np.sum((x - xb) * (y - yb)) / sxx)
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    dof = max(x.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return SlopeFit(slope=slope, stderr=stderr, intercept=intercept, residuals=resid.tolist())


def write_sweep_csv(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SweepRecord.COLUMNS)
        for rec in records:
            writer.writerow([_csv_value(getattr(rec, c)) for c in SweepRecord.COLUMNS])


def read_energy_csv(path) -> dict:
    """Columns of an energy CSV as float arrays (model column as strings)."""
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    out = {}
    if not rows:
        return out
    for col in rows[0]:
        if col == "model":
            out[col] = [r[col] for r in rows]
        else:
            out[col] = np.array([float(r[col]) for r in rows])
    return out
