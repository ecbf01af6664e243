"""Figure builders: decay curves, weight profiles, transfer stacks, and
log-log threshold scalings with fitted slopes.

Rendering is pure with respect to the input files: fixed inputs produce
byte-identical figures (timestamps are stripped from the outputs).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("decay", "weights", "transfer", "threshold")

_PNG_META = {"Software": None}
_PDF_META = {"CreationDate": None, "Producer": None, "Creator": None}


class MissingColumn(Exception):
    """An input CSV lacks a column the figure needs."""


class EmptyInput(Exception):
    """An input CSV has no usable data rows."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple
    kind: str
    out: str
    title: str | None = None
    mu: float | None = None
    k_select: int = 1
    formats: tuple = ("pdf", "png")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; known: {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass
class RenderResult:
    out_paths: list
    fit: dict = field(default_factory=dict)
    label: str = ""


def read_table(path) -> dict:
    """CSV columns as float arrays (non-numeric columns kept as strings)."""
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise EmptyInput(f"{path}: no data rows")
    out = {}
    for col in rows[0]:
        vals = [r[col] for r in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except (TypeError, ValueError):
            out[col] = vals
    return out


def _require(table: dict, columns, path) -> None:
    missing = [c for c in columns if c not in table]
    if missing:
        raise MissingColumn(f"{path}: missing columns {missing}")


def _least_squares(x, y):
    xb, yb = x.mean(), y.mean()
    sxx = float(np.sum((x - xb) ** 2))
    slope = float(np.sum((x - xb) * (y - yb)) / sxx)
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    dof = max(x.size - 2, 1)
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if x.size > 2 else 0.0
    return slope, intercept, stderr


def _save(fig, spec: FigureSpec) -> list:
    out_base = Path(spec.out)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt in spec.formats:
        path = out_base.with_suffix(f".{fmt}")
        meta = _PDF_META if fmt == "pdf" else _PNG_META
        fig.savefig(path, metadata=meta)
        paths.append(str(path))
    plt.close(fig)
    return paths


def render(spec: FigureSpec) -> RenderResult:
    """Build the requested figure; deterministic for fixed inputs."""
    builder = {
        "decay": _render_decay,
        "threshold": _render_threshold,
        "weights": _render_weights,
        "transfer": _render_transfer,
    }[spec.kind]
    return builder(spec)


def _render_decay(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    fit = {}
    label = ""
    for path in spec.inputs:
        table = read_table(path)
        _require(table, ("t", "norm_neq"), path)
        t = table["t"]
        y = table["norm_neq"]
        keep = np.isfinite(y) & (y > 0)
        if not np.any(keep):
            raise EmptyInput(f"{path}: no positive norm samples")
        t, y = t[keep], y[keep]
        ax.semilogy(t, y, lw=1.2, label=Path(path).parent.name or Path(path).name)
        # fit the post-transient half and overlay the decay guide
        half = t >= t[0] + 0.5 * (t[-1] - t[0])
        if np.count_nonzero(half) >= 3:
            slope, intercept, stderr = _least_squares(t[half], np.log(y[half]))
            rate = -slope
            guide = np.exp(intercept + slope * t[half])
            if spec.mu:
                c_fit = rate * spec.mu ** (-1.0 / 3.0)
                label = f"guide exp(-{c_fit:.3f} mu^(1/3) t)"
            else:
                label = f"guide exp(-{rate:.4f} t)"
            ax.semilogy(t[half], guide, "k--", lw=1.0, label=label)
            fit = {"rate": rate, "stderr": stderr}
    ax.set_xlabel("t")
    ax.set_ylabel("|| f (k != 0) ||")
    ax.set_title(spec.title or "decay of the non-averaged part")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return RenderResult(out_paths=_save(fig, spec), fit=fit, label=label)


def _render_threshold(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    slope = stderr = math.nan
    label = ""
    for path in spec.inputs:
        table = read_table(path)
        _require(table, ("mu", "eps_star"), path)
        mu = np.asarray(table["mu"], dtype=float)
        eps = np.asarray(table["eps_star"], dtype=float)
        keep = (mu > 0) & (eps > 0)
        if not np.any(keep):
            raise EmptyInput(f"{path}: no positive threshold rows")
        mu, eps = mu[keep], eps[keep]
        order = np.argsort(mu)
        mu, eps = mu[order], eps[order]
        ax.loglog(mu, eps, "o", ms=4, label=Path(path).name)
        slope, intercept, stderr = _least_squares(np.log(mu), np.log(eps))
        label = f"slope {slope:.3f} +/- {stderr:.3f}"
        ax.loglog(mu, np.exp(intercept + slope * np.log(mu)), "-", lw=1.0, label=label)
        # reference 1/3 scaling through the central point
        mid = len(mu) // 2
        ref = eps[mid] * (mu / mu[mid]) ** (1.0 / 3.0)
        ax.loglog(mu, ref, "k:", lw=1.0, label="slope 1/3 reference")
    ax.set_xlabel("mu")
    ax.set_ylabel("critical amplitude")
    ax.set_title(spec.title or "stability threshold scaling")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return RenderResult(
        out_paths=_save(fig, spec), fit={"slope": slope, "stderr": stderr}, label=label
    )


def _render_weights(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in spec.inputs:
        table = read_table(path)
        _require(table, ("t", "k", "eta", "m_gamma", "M_mu", "M_L", "m"), path)
        k = np.asarray(table["k"], dtype=float)
        t = np.asarray(table["t"], dtype=float)
        sel = (k == spec.k_select) & (t == t.max())
        if not np.any(sel):
            raise EmptyInput(f"{path}: no rows with k = {spec.k_select}")
        eta = np.asarray(table["eta"], dtype=float)[sel]
        order = np.argsort(eta)
        for col in ("m_gamma", "M_mu", "M_L", "m"):
            vals = np.asarray(table[col], dtype=float)[sel][order]
            ax.plot(eta[order], vals, lw=1.2, label=col)
    ax.set_xlabel("eta")
    ax.set_ylabel("multiplier value")
    ax.set_title(spec.title or f"weight profiles at k = {spec.k_select}, final time")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return RenderResult(out_paths=_save(fig, spec))


def _render_transfer(spec: FigureSpec) -> RenderResult:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in spec.inputs:
        table = read_table(path)
        _require(table, ("t", "R", "T", "Rem", "NLeq"), path)
        t = np.asarray(table["t"], dtype=float)
        parts = [np.asarray(table[c], dtype=float) for c in ("R", "T", "Rem", "NLeq")]
        keep = np.all([np.isfinite(p) for p in parts], axis=0)
        if not np.any(keep):
            raise EmptyInput(f"{path}: no finite transfer rows")
        ax.stackplot(
            t[keep],
            [p[keep] for p in parts],
            labels=["reaction", "transport", "remainder", "average"],
            alpha=0.85,
        )
    ax.set_xlabel("t")
    ax.set_ylabel("commutator magnitude")
    ax.set_title(spec.title or "transfer decomposition")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return RenderResult(out_paths=_save(fig, spec))
