"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import SimConfig
from .echo import sweep_critical_epsilon
from .errors import (
    BracketFailure,
    ConfigInvalid,
    CouetteLabError,
    NonfiniteState,
    TruncationBudgetExceeded,
)
from .harness import (
    SweepRecord,
    bisect_threshold,
    fit_threshold_slope,
    run_simulation,
    write_sweep_csv,
)
from .weights import AUDIT_IDS, SampleSpec, WeightParams, audit_lemma, build_weight_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _load_config(path: str | None) -> SimConfig:
    if path is None:
        return SimConfig()
    return SimConfig.from_json(path)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    if args.out is not None:
        cfg = cfg.replace(output={"dir": args.out})
    result = run_simulation(cfg)
    print(
        f"run {result.run_id}: outcome={result.outcome} "
        f"max_ratio={result.max_ratio:.4g} decay_rate={result.decay_rate:.4g}"
    )
    if result.csv_path:
        print(f"energy csv: {result.csv_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out_dir = Path(args.out or "sweep_out")
    records = []
    thresholds = []
    for mu in _float_list(args.mu_grid):
        res = bisect_threshold(cfg, mu, rel_tol=args.rel_tol)
        records.extend(res.records)
        thresholds.append((mu, res.eps_star))
        print(f"mu={mu:g}: eps*={res.eps_star:.6g} ({len(res.records)} probes)")
    write_sweep_csv(out_dir / "sweep_records.csv", records)
    with open(out_dir / "thresholds.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mu", "eps_star"])
        for mu, eps in thresholds:
            writer.writerow([_fmt(mu), _fmt(eps)])
    if len(thresholds) >= 3:
        fit = fit_threshold_slope(*zip(*thresholds))
        (out_dir / "slope.json").write_text(
            json.dumps({"slope": fit.slope, "stderr": fit.stderr}, indent=2)
        )
        print(f"fitted slope: {fit.slope:.4f} +/- {fit.stderr:.4f}")
    return EXIT_OK


def cmd_bisect(args) -> int:
    cfg = _load_config(args.config)
    if args.model is not None:
        cfg = cfg.replace(model={"name": args.model})
    res = bisect_threshold(cfg, args.mu, rel_tol=args.rel_tol)
    print(f"mu={args.mu:g}: eps*={res.eps_star:.6g}")
    if args.out:
        write_sweep_csv(Path(args.out) / "bisect_records.csv", res.records)
    return EXIT_OK


def cmd_echo(args) -> int:
    rows_all = []
    for gamma in _float_list(args.gamma):
        rows_all.extend(
            sweep_critical_epsilon(
                _float_list(args.mu_grid),
                gamma,
                r=args.r,
                k_start=args.k_start,
                eta_scale=args.eta_scale,
                threshold_pi=args.threshold,
            )
        )
    cols = ["mu", "gamma", "r", "eta", "k_start", "eps_star", "Pi_at_star"]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows_all:
            writer.writerow([_fmt(row[c]) for c in cols])
    print(f"wrote {len(rows_all)} rows to {out}")
    return EXIT_OK


def cmd_weights_dump(args) -> int:
    params = WeightParams(
        mu=args.mu, c=args.c, r=args.r, N=args.N, beta=args.beta,
        alpha=tuple(_float_list(args.alpha)), nu=args.nu, kappa=args.kappa,
    )
    k = np.arange(-args.k_max, args.k_max + 1, dtype=float)
    eta = np.linspace(-args.eta_max, args.eta_max, args.eta_count)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t", "k", "eta", "m_gamma", "m_tilde", "M_mu", "M_L", "m", "A", "dlog_m_dt"]
        )
        for t in _float_list(args.t_values):
            tab = build_weight_table(params, args.model, t, k, eta)
            for i in range(k.size):
                for j in range(eta.size):
                    writer.writerow(
                        [
                            _fmt(float(t)), _fmt(k[i]), _fmt(eta[j]),
                            _fmt(tab.m_gamma[i, j]), _fmt(tab.m_tilde[i, j]),
                            _fmt(tab.M_mu[i, j]), _fmt(tab.M_L[i, j]),
                            _fmt(tab.m[i, j]), _fmt(tab.A[i, j]),
                            _fmt(tab.dlog_m_dt[i, j]),
                        ]
                    )
    print(f"wrote weight table to {out}")
    return EXIT_OK


def cmd_verify_lemmas(args) -> int:
    params = WeightParams(
        mu=args.mu, c=args.c, r=args.r, beta=args.beta,
        alpha=tuple(_float_list(args.alpha)), n_max=args.n_max,
    )
    spec = SampleSpec(n_samples=args.samples, seed=args.seed, ceiling=args.ceiling)
    ids = list(AUDIT_IDS) if args.lemma == "all" else [args.lemma]
    failed = False
    for lemma in ids:
        rep = audit_lemma(lemma, params, spec)
        status = "pass" if rep.passed else "FAIL"
        if rep.kind == "exact":
            detail = f"max_violation={rep.max_violation:.3e}"
        else:
            detail = f"constant={rep.empirical_constant:.4g} stable={rep.stable}"
        note = f"  [{rep.notes}]" if rep.notes else ""
        print(f"{lemma:10s} {rep.kind:9s} {status}  {detail}{note}")
        failed = failed or not rep.passed
    return EXIT_NUMERICAL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="couettelab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configured simulation")
    s.add_argument("--config", help="JSON config file")
    s.add_argument("--out", help="output directory (overrides config)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="bisect thresholds over a mu grid")
    s.add_argument("--config", help="JSON config template")
    s.add_argument("--mu-grid", required=True, help="comma-separated mu values")
    s.add_argument("--out", help="output directory")
    s.add_argument("--rel-tol", type=float, default=0.1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("bisect", help="bisect the threshold at one mu")
    s.add_argument("--config", help="JSON config template")
    s.add_argument("--model", choices=["ns", "boussinesq", "mhd_horizontal", "mhd_vertical"])
    s.add_argument("--mu", type=float, required=True)
    s.add_argument("--out")
    s.add_argument("--rel-tol", type=float, default=0.1)
    s.set_defaults(func=cmd_bisect)

    s = sub.add_parser("echo", help="resonance-cascade threshold sweep")
    s.add_argument("--gamma", default="1.0", help="comma-separated gamma values")
    s.add_argument("--mu-grid", required=True)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--k-start", type=int, default=2)
    s.add_argument("--eta-scale", type=float, default=24.0)
    s.add_argument("--threshold", type=float, default=2.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_echo)

    s = sub.add_parser("weights", help="weight table utilities")
    wsub = s.add_subparsers(dest="weights_command", required=True)
    d = wsub.add_parser("dump", help="write a weight table CSV")
    d.add_argument("--model", default="ns",
                   choices=["ns", "boussinesq", "mhd_horizontal", "mhd_vertical", "none"])
    d.add_argument("--t-values", default="0.0,1.0,5.0")
    d.add_argument("--k-max", type=int, default=8)
    d.add_argument("--eta-max", type=float, default=10.0)
    d.add_argument("--eta-count", type=int, default=21)
    d.add_argument("--mu", type=float, default=1e-3)
    d.add_argument("--nu", type=float, default=None)
    d.add_argument("--kappa", type=float, default=None)
    d.add_argument("--c", type=float, default=0.1)
    d.add_argument("--r", type=float, default=1.0)
    d.add_argument("--N", type=int, default=12)
    d.add_argument("--beta", type=float, default=1.0)
    d.add_argument("--alpha", default="1.0,0.0")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_weights_dump)

    s = sub.add_parser("verify-lemmas", help="audit weight properties on samples")
    s.add_argument("--lemma", default="all", help=f"one of {', '.join(AUDIT_IDS)} or 'all'")
    s.add_argument("--samples", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mu", type=float, default=1e-3)
    s.add_argument("--c", type=float, default=0.1)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--alpha", default="0.5,1.0")
    s.add_argument("--n-max", type=int, default=80)
    s.add_argument("--ceiling", type=float, default=1e14)
    s.set_defaults(func=cmd_verify_lemmas)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketFailure, NonfiniteState, TruncationBudgetExceeded) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CouetteLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
