"""Command-line front end.

Subcommands: kernel-table | simulate | arbitrage | convergence.  Every
command is driven by a JSON run config (see ``config``), optionally
overridden by --seed/--trials/--out/--workers, and writes deterministic
primary artifacts plus an effective-config echo into the output
directory.  Re-running a command with the same config is byte-identical
for any worker count; wall-clock information goes to the run.log sidecar
only.

Exit codes: 0 success, 1 configured band failed, 2 config error,
3 precondition error, 4 numerical-regime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import arbitrage as arb
from . import convergence as conv
from .config import RunConfig, load_config
from .errors import (
    AllZeroDecayError,
    ConfigError,
    DomainError,
    MemoMarketError,
    NumericalRegimeError,
    PreconditionError,
)
from .lattice import build_coefficient_table
from .market import certify_no_arbitrage, min_periods_no_arbitrage
from .output import write_csv, write_json
from .paths import sample_path_direct, sample_path_fast, sample_prices
from .rng import InnovationSpec, sample_innovations

TERMINAL_NOISE = 0.01  # CI-scale slack for "strictly decreasing" KS ladders


def _echo(cfg: RunConfig, out_dir: str) -> None:
    write_json(os.path.join(out_dir, "effective_config.json"), cfg.effective_dict())


def _sidecar(out_dir: str, message: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "run.log"), "a", encoding="utf-8") as fh:
        fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} {message}\n")


def cmd_kernel_table(cfg: RunConfig, workers: int) -> int:
    kernel = cfg.kernel()
    grid = int(cfg.experiment["grid"])
    ts = np.linspace(0.0, cfg.horizon, grid)
    rows = []
    for t in ts:
        for u in ts:
            tf, uf = float(t), float(u)
            rows.append((tf, uf, kernel.l(tf, uf), kernel.z(tf, uf), kernel.y(tf, uf)))
    out = cfg.output_dir
    write_csv(os.path.join(out, "kernel_table.csv"), ("t", "u", "l", "z", "y"), rows)
    _echo(cfg, out)
    _sidecar(out, "kernel-table done")
    return 0


def cmd_simulate(cfg: RunConfig, workers: int) -> int:
    kernel = cfg.kernel()
    exp = cfg.experiment
    engine = exp["engine"]
    if engine == "auto":
        engine = "fast" if hasattr(kernel, "recursion_coefficients") else "direct"
    if engine == "fast" and not hasattr(kernel, "recursion_coefficients"):
        raise ConfigError("engine=fast needs a recursion-form kernel")
    out = cfg.output_dir
    n = cfg.n_values[0]
    params = cfg.market_params(n)
    table = build_coefficient_table(kernel, n, cfg.horizon) if engine == "direct" else None
    for p in range(int(exp["paths"])):
        spec = InnovationSpec(exp["law"], int(exp["seed"]), p)
        xi = sample_innovations(spec, params.steps)
        if engine == "fast":
            path = sample_path_fast(kernel, n, cfg.horizon, xi)
        else:
            path = sample_path_direct(table, xi)
        path = sample_prices(path, params.b, params.sigma, params.s0)
        rows = [
            (
                k,
                float(path.times[k]),
                float(path.xi[k - 1]) if k else 0.0,
                float(path.W[k]),
                float(path.Y[k]),
                float(path.S[k]),
            )
            for k in range(params.steps + 1)
        ]
        write_csv(
            os.path.join(out, f"path_{p:04d}.csv"),
            ("step", "t", "xi", "W", "Y", "S"),
            rows,
        )
    _echo(cfg, out)
    _sidecar(out, f"simulate done ({exp['paths']} paths, engine={engine})")
    return 0


def cmd_arbitrage(cfg: RunConfig, workers: int) -> int:
    kernel = cfg.kernel()
    exp = cfg.experiment
    out = cfg.output_dir
    sweep_rows = []
    p_by_n: list[tuple[int, float]] = []
    witness_payload = None
    for n in cfg.n_values:
        params = cfg.market_params(n)
        table = build_coefficient_table(kernel, n, cfg.horizon)
        n0 = None
        if exp["check_n0"]:
            n0 = min_periods_no_arbitrage(params, kernel.lipschitz)
        cert = certify_no_arbitrage(table, params, N0=n0)
        write_json(os.path.join(out, f"certificate_N{n}.json"), cert.to_dict())
        mode = exp["mode"]
        if mode == "auto":
            mode = "exact" if table.m <= int(exp["budget"]) else "mc"
        if mode == "exact":
            report = arb.violation_probability_exact(table, params, int(exp["budget"]))
        else:
            report = arb.violation_probability_mc(
                kernel, params, int(exp["trials"]), int(exp["seed"]), workers=workers
            )
        write_json(
            os.path.join(out, f"pn_N{n}.json"),
            report.to_dict(config_echo=cfg.effective_dict()),
        )
        sweep_rows.append(
            (n, report.p_hat, report.ci_low, report.ci_high, report.trials, exp["seed"])
        )
        p_by_n.append((n, report.p_hat))
        if exp["witness"] and witness_payload is None and not cert.free:
            hit = arb.worst_case_prefix(table, params)
            if hit is not None:
                prefix, step = hit
                witness = arb.extract_strategy(table, params, prefix, step)
                witness_payload = witness.to_dict()
                witness_payload["verified"] = arb.verify_strategy(witness, table, params)
                witness_payload["N"] = n
    write_csv(
        os.path.join(out, "pn_sweep.csv"),
        ("N", "p_hat", "ci_lo", "ci_hi", "trials", "seed"),
        sweep_rows,
    )
    if witness_payload is not None:
        write_json(os.path.join(out, "witness.json"), witness_payload)
    if exp["decay_fit"] and len(p_by_n) >= 3:
        try:
            fit = arb.fit_decay(p_by_n)
            decay = {
                "verdict": "fitted",
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residuals": list(fit.residuals),
                "points": [[n, p] for n, p in fit.used_points],
            }
        except AllZeroDecayError:
            decay = {"verdict": "identically zero on tested range"}
        except DomainError as exc:
            decay = {"verdict": "insufficient positive points", "detail": str(exc)}
        if exp["alpha"] is not None:
            decay["alpha"] = exp["alpha"]
            decay["decay_threshold_periods"] = arb.min_periods_for_decay(
                float(exp["alpha"]), cfg.market_params(cfg.n_values[0]), kernel.lipschitz
            )
        write_json(os.path.join(out, "decay_fit.json"), decay)
    _echo(cfg, out)
    _sidecar(out, f"arbitrage done over N={cfg.n_values}")
    return 0


def cmd_convergence(cfg: RunConfig, workers: int) -> int:
    kernel = cfg.kernel()
    exp = cfg.experiment
    out = cfg.output_dir
    n_list = [int(v) for v in exp["n_list"]]
    seed = int(exp["seed"])
    bands = exp["bands"]
    summary = {}
    failed = False
    mb = cfg.market_block
    for stat in exp["statistics"]:
        if stat == "variance":
            t_list = exp["t_list"] or [exp["t"]]
            rep = conv.variance_discrepancy(kernel, t_list, n_list)
        elif stat == "qv":
            rep = conv.qv_discrepancy(
                kernel, n_list, int(exp["paths"]), seed, T=cfg.horizon, workers=workers
            )
        elif stat == "jump":
            rep = conv.jump_moment(
                kernel, n_list, int(exp["paths"]), seed, T=cfg.horizon, workers=workers
            )
        elif stat == "fdd":
            vals = [
                conv.fdd_distance(
                    kernel, float(exp["t"]), n, int(exp["samples"]), seed, workers=workers
                )
                for n in n_list
            ]
            rep = conv.ConvergenceReport(
                statistic="fdd",
                n_values=tuple(n_list),
                values=tuple(vals),
                slope=conv.loglog_slope(n_list, vals),
            )
        else:  # terminal
            vals = [
                conv.terminal_price_distance(
                    kernel,
                    n,
                    int(exp["samples"]),
                    seed,
                    T=cfg.horizon,
                    sigma=mb["sigma"],
                    drift=mb["b"],
                    s0=mb["s0"],
                    workers=workers,
                )
                for n in n_list
            ]
            rep = conv.ConvergenceReport(
                statistic="terminal",
                n_values=tuple(n_list),
                values=tuple(vals),
                slope=conv.loglog_slope(n_list, vals),
            )
        verdict = _band_verdict(stat, rep, bands)
        entry = rep.to_dict()
        entry["passed"] = verdict
        summary[stat] = entry
        if verdict is False:
            failed = True
        header = ["n", "value"] + (["stderr"] if rep.stderr is not None else [])
        rows = [
            (n, v) + ((e,) if rep.stderr is not None else ())
            for n, v, e in zip(
                rep.n_values,
                rep.values,
                rep.stderr if rep.stderr is not None else [0.0] * len(rep.values),
            )
        ]
        write_csv(os.path.join(out, f"convergence_{stat}.csv"), header, rows)
    write_json(os.path.join(out, "convergence_summary.json"), summary)
    _echo(cfg, out)
    _sidecar(out, f"convergence done ({', '.join(exp['statistics'])})")
    return 1 if failed else 0


def _band_verdict(stat: str, rep: conv.ConvergenceReport, bands: dict) -> bool | None:
    if stat == "variance" and "variance_slope" in bands:
        lo, hi = bands["variance_slope"]
        return rep.slope is not None and lo <= rep.slope <= hi
    if stat == "qv" and "qv_max" in bands:
        return rep.values[-1] <= bands["qv_max"]
    if stat == "jump" and "jump_max" in bands:
        return max(rep.values) <= bands["jump_max"]
    if stat == "fdd" and "fdd_max" in bands:
        return rep.values[-1] <= bands["fdd_max"]
    if stat == "terminal" and bands.get("terminal_decreasing"):
        return all(
            later < earlier + TERMINAL_NOISE
            for earlier, later in zip(rep.values, rep.values[1:])
        )
    return None


_COMMANDS = {
    "kernel-table": cmd_kernel_table,
    "simulate": cmd_simulate,
    "arbitrage": cmd_arbitrage,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memomarket",
        description="Binary market lattices with Volterra-kernel memory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="override output.dir")
        p.add_argument("--seed", type=int, help="override experiment.seed")
        p.add_argument("--trials", type=int, help="override experiment.trials")
        p.add_argument("--workers", type=int, default=1, help="worker pool size")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        overrides = {}
        if args.seed is not None and "seed" in cfg.experiment:
            overrides["seed"] = args.seed
        if args.trials is not None and "trials" in cfg.experiment:
            overrides["trials"] = args.trials
        if overrides:
            experiment = dict(cfg.experiment)
            experiment.update(overrides)
            cfg = RunConfig(
                command=cfg.command,
                kernel_block=cfg.kernel_block,
                market_block=cfg.market_block,
                experiment=experiment,
                output_dir=cfg.output_dir,
                formats=cfg.formats,
            )
        if args.out is not None:
            cfg = RunConfig(
                command=cfg.command,
                kernel_block=cfg.kernel_block,
                market_block=cfg.market_block,
                experiment=cfg.experiment,
                output_dir=args.out,
                formats=cfg.formats,
            )
        return _COMMANDS[args.command](cfg, max(1, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 3
    except NumericalRegimeError as exc:
        step = f" (step {exc.step})" if exc.step is not None else ""
        print(f"numerical regime error: {exc}{step}", file=sys.stderr)
        return 4
    except MemoMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
