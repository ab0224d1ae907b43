"""Run-configuration parsing and validation.

A run config is UTF-8 JSON with four blocks:

    {
      "kernel":     {"kind": "memory", "p": .., "q": ..}
                    | {"kind": "constant", "c": ..},
      "market":     {"N": int | [int, ...], "T": .., "r": .., "b": ..,
                     "sigma": .., "s0": ..},
      "experiment": { command-specific knobs },
      "output":     {"dir": "...", "formats": ["csv", "json"]}   # optional
    }

Unknown keys are rejected everywhere; every module-level invariant is
validated before dispatch.  The parsed, default-filled form round-trips:
the echoed effective config re-parses to an equivalent RunConfig.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ConfigError, DomainError
from .kernels import KernelModel, kernel_from_config
from .market import MarketParams

_EXPERIMENT_KEYS = {
    "kernel-table": {"grid"},
    "simulate": {"paths", "seed", "engine", "law"},
    "arbitrage": {
        "mode",
        "trials",
        "seed",
        "budget",
        "check_n0",
        "witness",
        "alpha",
        "decay_fit",
    },
    "convergence": {
        "statistics",
        "n_list",
        "t",
        "t_list",
        "paths",
        "samples",
        "seed",
        "bands",
    },
}

_EXPERIMENT_DEFAULTS = {
    "kernel-table": {"grid": 101},
    "simulate": {"paths": 1, "seed": 0, "engine": "auto", "law": "rademacher"},
    "arbitrage": {
        "mode": "auto",
        "trials": 100_000,
        "seed": 0,
        "budget": 26,
        "check_n0": False,
        "witness": False,
        "alpha": None,
        "decay_fit": True,
    },
    "convergence": {
        "statistics": ["variance"],
        "n_list": [],
        "t": 1.0,
        "t_list": None,
        "paths": 200,
        "samples": 10_000,
        "seed": 0,
        "bands": {},
    },
}

_STATISTICS = ("variance", "qv", "jump", "fdd", "terminal")
_BAND_KEYS = {
    "variance_slope",
    "qv_max",
    "jump_max",
    "fdd_max",
    "terminal_decreasing",
    "decay_slope_max",
}


def _number(block: dict, key: str, where: str) -> float:
    try:
        v = block[key]
    except KeyError:
        raise ConfigError(f"{where} block is missing key {key!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class RunConfig:
    command: str
    kernel_block: dict
    market_block: dict
    experiment: dict
    output_dir: str
    formats: tuple[str, ...]

    @property
    def n_values(self) -> list[int]:
        n = self.market_block["N"]
        return list(n) if isinstance(n, list) else [n]

    @property
    def horizon(self) -> float:
        return float(self.market_block["T"])

    def kernel(self) -> KernelModel:
        return kernel_from_config(self.kernel_block, self.horizon)

    def market_params(self, n: int) -> MarketParams:
        mb = self.market_block
        try:
            return MarketParams(
                N=n,
                T=float(mb["T"]),
                r=float(mb["r"]),
                b=float(mb["b"]),
                sigma=float(mb["sigma"]),
                s0=float(mb["s0"]),
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def effective_dict(self) -> dict:
        return {
            "command": self.command,
            "kernel": dict(self.kernel_block),
            "market": dict(self.market_block),
            "experiment": dict(self.experiment),
            "output": {"dir": self.output_dir, "formats": list(self.formats)},
        }


def parse_config(raw: dict, command: str) -> RunConfig:
    if command not in _EXPERIMENT_KEYS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a JSON object")
    allowed_top = {"kernel", "market", "experiment", "output", "command"}
    extra = set(raw) - allowed_top
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    if raw.get("command", command) != command:
        raise ConfigError(
            f"config was echoed for command {raw['command']!r}, not {command!r}"
        )

    kernel_block = raw.get("kernel")
    if not isinstance(kernel_block, dict):
        raise ConfigError("kernel block is required")

    market_block = raw.get("market")
    if not isinstance(market_block, dict):
        raise ConfigError("market block is required")
    extra = set(market_block) - {"N", "T", "r", "b", "sigma", "s0"}
    if extra:
        raise ConfigError(f"unknown market keys: {sorted(extra)}")
    n_raw = market_block.get("N")
    if isinstance(n_raw, list):
        if not n_raw or not all(isinstance(v, int) and v >= 1 for v in n_raw):
            raise ConfigError("market.N list must hold integers >= 1")
        n_norm = list(n_raw)
    elif isinstance(n_raw, int) and not isinstance(n_raw, bool) and n_raw >= 1:
        n_norm = n_raw
    else:
        raise ConfigError(f"market.N must be an integer >= 1 or a list, got {n_raw!r}")
    market = {"N": n_norm}
    for key in ("T", "r", "b", "sigma", "s0"):
        market[key] = _number(market_block, key, "market")
    if market["T"] <= 0 or market["sigma"] <= 0 or market["s0"] <= 0:
        raise ConfigError("market needs T > 0, sigma > 0, s0 > 0")

    exp_raw = raw.get("experiment", {})
    if not isinstance(exp_raw, dict):
        raise ConfigError("experiment block must be an object")
    extra = set(exp_raw) - _EXPERIMENT_KEYS[command]
    if extra:
        raise ConfigError(f"unknown experiment keys for {command}: {sorted(extra)}")
    experiment = dict(_EXPERIMENT_DEFAULTS[command])
    experiment.update(exp_raw)
    _validate_experiment(command, experiment)

    out_raw = raw.get("output", {})
    if not isinstance(out_raw, dict):
        raise ConfigError("output block must be an object")
    extra = set(out_raw) - {"dir", "formats"}
    if extra:
        raise ConfigError(f"unknown output keys: {sorted(extra)}")
    output_dir = out_raw.get("dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output.dir must be a string")
    formats = out_raw.get("formats", ["csv", "json"])
    if not isinstance(formats, list) or not set(formats) <= {"csv", "json"}:
        raise ConfigError("output.formats must be a sublist of ['csv', 'json']")

    cfg = RunConfig(
        command=command,
        kernel_block=dict(kernel_block),
        market_block=market,
        experiment=experiment,
        output_dir=output_dir,
        formats=tuple(formats),
    )
    cfg.kernel()  # validates the kernel block eagerly
    for n in cfg.n_values:
        cfg.market_params(n)
    return cfg


def _validate_experiment(command: str, exp: dict) -> None:
    def pos_int(key, minimum=1):
        v = exp[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            raise ConfigError(f"experiment.{key} must be an integer >= {minimum}")

    if command == "kernel-table":
        pos_int("grid", 2)
    elif command == "simulate":
        pos_int("paths")
        pos_int("seed", 0)
        if exp["engine"] not in ("auto", "fast", "direct"):
            raise ConfigError("experiment.engine must be auto|fast|direct")
        if exp["law"] not in ("rademacher", "standard-normal"):
            raise ConfigError("experiment.law must be rademacher|standard-normal")
    elif command == "arbitrage":
        pos_int("trials")
        pos_int("seed", 0)
        pos_int("budget")
        if exp["mode"] not in ("auto", "exact", "mc"):
            raise ConfigError("experiment.mode must be auto|exact|mc")
        for key in ("check_n0", "witness", "decay_fit"):
            if not isinstance(exp[key], bool):
                raise ConfigError(f"experiment.{key} must be a boolean")
        if exp["alpha"] is not None:
            a = exp["alpha"]
            if isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 < a < 1:
                raise ConfigError("experiment.alpha must lie in (0, 1)")
    elif command == "convergence":
        stats = exp["statistics"]
        if (
            not isinstance(stats, list)
            or not stats
            or not set(stats) <= set(_STATISTICS)
        ):
            raise ConfigError(
                f"experiment.statistics must be a nonempty sublist of {_STATISTICS}"
            )
        nl = exp["n_list"]
        if not isinstance(nl, list) or not nl or not all(
            isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in nl
        ):
            raise ConfigError("experiment.n_list must be a nonempty list of integers >= 1")
        pos_int("paths")
        pos_int("samples")
        pos_int("seed", 0)
        if exp["t_list"] is not None and (
            not isinstance(exp["t_list"], list) or not exp["t_list"]
        ):
            raise ConfigError("experiment.t_list must be a nonempty list when given")
        bands = exp["bands"]
        if not isinstance(bands, dict) or not set(bands) <= _BAND_KEYS:
            raise ConfigError(f"experiment.bands keys must be within {sorted(_BAND_KEYS)}")


def load_config(path: str, command: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw, command)
