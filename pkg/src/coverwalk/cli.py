"""Experiment runner: named experiments, config files, seed manifests.

Every run writes its CSV outputs plus a ``manifest.json`` into the output
directory.  Outputs are byte-identical for identical configurations (the
manifest records a sha256 per output, which is how reruns are compared);
wall-clock timestamps live only in the manifest.

Exit codes: 0 success, 2 configuration error, 3 assertion-style
experiment failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

from . import __version__, estimate as est, lattice, sparse
from .walk import child_seed

DEFAULT_SEED = 7  # documented fixed default; override with --seed
DEFAULT_EPSILON = 0.5
DEFAULT_LEVEL = 0.95


class ConfigError(Exception):
    pass


class ExperimentFailure(Exception):
    pass


def _parse_scalar(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def load_config_file(path: str) -> dict:
    """Flat key = value text; '#' starts a comment; flags override these."""
    cfg = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        cfg[key.replace("-", "_")] = _parse_scalar(value)
    return cfg


class RunDir:
    """Output directory with sha256-checksummed files and a final manifest."""

    def __init__(self, out: str, command: str, config: dict):
        self.path = Path(out)
        self.path.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config = config
        self.checksums: dict[str, str] = {}
        self.started = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())

    def write(self, name: str, text: str) -> None:
        target = self.path / name
        target.write_text(text)
        self.checksums[name] = hashlib.sha256(text.encode()).hexdigest()

    def write_manifest(self) -> None:
        manifest = {
            "command": self.command,
            "config": {k: v for k, v in sorted(self.config.items())},
            "version": __version__,
            "started": self.started,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "outputs": self.checksums,
        }
        tmp = self.path / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, self.path / "manifest.json")


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.8f}"


def _result_lines(rows: list[dict], master_seed: int) -> str:
    """Rows may come from estimates run under derived per-index seeds; the
    CSV always reports the run's master seed."""
    header = est.CSV_FIELDS
    for row in rows:
        row["master_seed"] = master_seed
    return _csv(list(header), [[row.get(k, "") for k in header] for row in rows])


# ---------------------------------------------------------------------------
# subcommands

def cmd_sequence(cfg) -> int:
    eps = cfg["epsilon"]
    seed = cfg["seed"]
    run = RunDir(cfg["out"], "sequence", cfg)
    seq = sparse.sequence(eps)
    nk_rows = []
    for k in range(1, cfg["k_max"] + 1):
        nk_rows.append([k, seq.n_k(k), f"{seq.partial_sum(k):.10g}", seed])
    run.write("nk_table.csv", _csv(["k", "n_k", "partial_sum", "master_seed"], nk_rows))
    cn_rows = []
    for N in range(0, cfg["n_max"] + 1):
        c = seq.c_n(N)
        if N >= 2:
            lower = sparse.lemma_lower_bound(N, eps)
            cn_rows.append([N, c, f"{lower:.10g}", "pass" if c > lower else "fail", seed])
        else:
            cn_rows.append([N, c, "", "", seed])
    run.write("cn_table.csv",
              _csv(["N", "C_N", "lemma_lower", "pass", "master_seed"], cn_rows))
    run.write_manifest()
    return 0


def cmd_figure5(cfg) -> int:
    series = est.cover_series(cfg["i_max"], cfg["horizon"], cfg["trials"],
                              cfg["seed"], cfg["level"], cfg["workers"])
    run = RunDir(cfg["out"], "figure5", cfg)
    rows = []
    results = []
    for i, e in series.entries:
        ln_p = "" if e.p_hat == 0.0 else f"{math.log(e.p_hat):.8f}"
        rows.append([i, _fmt(e.p_hat), ln_p, _fmt(e.ci_low), _fmt(e.ci_high),
                     cfg["seed"]])
        results.append(est.result_row("cover_series", None, i, 3, e))
    run.write("cover_series.csv",
              _csv(["i", "p_hat", "ln_p_hat", "ci_low", "ci_high", "master_seed"], rows))
    # Fit over i >= 1 with nonzero estimates (i = 0 is the trivial p = 1 row).
    idx = series.indices()[1:]
    ps = [e.p_hat for e in series.values()][1:]
    slope, intercept, r2 = est.loglinear_fit(idx, ps)
    run.write("fit.csv", _csv(["slope", "intercept", "r_squared", "master_seed"],
                              [[_fmt(slope), _fmt(intercept), _fmt(r2), cfg["seed"]]]))
    run.write("results.csv", _result_lines(results, cfg["seed"]))
    run.write_manifest()
    return 0


def cmd_returns(cfg) -> int:
    ks = range(cfg["k_min"], cfg["k_max"] + 1)
    profile = est.return_profile(ks, cfg["epsilon"], cfg["horizon"], cfg["trials"],
                                 cfg["seed"], cfg["level"], cfg["workers"])
    baseline = est.polya_baseline(cfg["horizon"], cfg["trials"],
                                  child_seed(cfg["seed"], 0), cfg["level"],
                                  cfg["workers"])
    rows = [est.result_row("polya_baseline", None, 0, 3, baseline)]
    for k, e in profile.entries:
        rows.append(est.result_row("return_profile", cfg["epsilon"], k, 3, e))
    run = RunDir(cfg["out"], "returns", cfg)
    run.write("results.csv", _result_lines(rows, cfg["seed"]))
    run.write_manifest()
    return 0


def cmd_capacity(cfg) -> int:
    series = est.wiener_partial_sum(cfg["k_max"], cfg["epsilon"], cfg["horizon"],
                                    cfg["trials"], cfg["seed"], cfg["level"],
                                    cfg["workers"])
    meta = series.meta
    rows = []
    for pos, (k, summand) in enumerate(series.entries):
        ceiling = meta["summand_ceilings"][pos]
        rows.append([
            k, meta["slice_sizes"][pos], _fmt(meta["capacities"][pos]),
            _fmt(meta["capacity_half_widths"][pos]), _fmt(summand), _fmt(ceiling),
            "pass" if summand <= ceiling + 1e-12 else "fail",
            _fmt(meta["running_sum"][pos]), cfg["seed"],
        ])
    run = RunDir(cfg["out"], "capacity", cfg)
    run.write("capacity.csv", _csv(
        ["k", "slice_size", "capacity", "capacity_err", "summand", "ceiling",
         "ceiling_ok", "running_sum", "master_seed"], rows))
    run.write_manifest()
    return 0


def cmd_counterexample(cfg) -> int:
    k = cfg["k"]
    if k < 1:
        raise ConfigError(f"counterexample clusters need k >= 1, got {k}")
    if k > 6:
        raise ConfigError(f"exact enumeration rejected for k > 6 (cost 6^k), got {k}")
    rows = []
    all_forced = True
    for kk in range(1, k + 1):
        enum = sparse.forced_prefix_enumeration(kk)
        all_forced &= enum.forced
        rows.append([kk, enum.total, enum.avoiding, enum.avoiding_off_axis,
                     "pass" if enum.forced else "fail", f"{enum.escape_bound:.10g}",
                     cfg["seed"]])
    run = RunDir(cfg["out"], "counterexample", cfg)
    run.write("counterexample.csv", _csv(
        ["k", "total_prefixes", "avoiding", "avoiding_off_axis", "forced",
         "escape_bound", "master_seed"], rows))
    if cfg["statistical"]:
        stat_k = cfg["stat_k_max"]
        target = sparse.counterexample_set(stat_k + 2)
        results = []
        for kk in range(1, stat_k + 1):
            e = est.estimate_escape((2**kk, 0, 0), target, cfg["horizon"],
                                    cfg["trials"], child_seed(cfg["seed"], kk),
                                    cfg["level"], cfg["workers"])
            results.append(est.result_row("counterexample_escape", None, kk, 3, e))
        run.write("results.csv", _result_lines(results, cfg["seed"]))
    run.write_manifest()
    if not all_forced:
        raise ExperimentFailure("a set-avoiding prefix used a non-z step")
    return 0


def cmd_zwalk(cfg) -> int:
    rows = []
    for N in range(cfg["n_min"], cfg["n_max"] + 1):
        e, stats = est.interval_cover_z_detail(N, cfg["base_step_cap"],
                                               cfg["trials"], cfg["seed"],
                                               cfg["level"], cfg["workers"])
        rows.append([N, N // 3, stats.z_budget, _fmt(e.p_hat), _fmt(e.ci_low),
                     _fmt(e.ci_high), f"{stats.z_steps_mean:.4f}",
                     stats.z_steps_max, "exploratory", cfg["seed"]])
    run = RunDir(cfg["out"], "zwalk", cfg)
    run.write("zwalk.csv", _csv(
        ["N", "m_max", "z_budget", "p_hat", "ci_low", "ci_high", "z_steps_mean",
         "z_steps_max", "status", "master_seed"], rows))
    run.write_manifest()
    return 0


def cmd_compare_paths(cfg) -> int:
    N = cfg["n"]
    stair = lattice.staircase_path(3, N).trace()
    axis = lattice.axis_path(3, N).trace()
    start = lattice.origin(3)
    # Same master seed for both targets: paired trials.
    e_stair = est.estimate_cover(stair, start, cfg["horizon"], cfg["trials"],
                                 cfg["seed"], cfg["level"], cfg["workers"])
    e_axis = est.estimate_cover(axis, start, cfg["horizon"], cfg["trials"],
                                cfg["seed"], cfg["level"], cfg["workers"])
    rows = []
    for name, target, e in (("staircase", stair, e_stair), ("axis", axis, e_axis)):
        rows.append([N, name, len(target), e.trials, e.successes, _fmt(e.p_hat),
                     _fmt(e.ci_low), _fmt(e.ci_high), cfg["seed"]])
    run = RunDir(cfg["out"], "compare-paths", cfg)
    run.write("compare.csv", _csv(
        ["N", "path", "trace_size", "trials", "successes", "p_hat", "ci_low",
         "ci_high", "master_seed"], rows))
    diff = e_stair.p_hat - e_axis.p_hat
    joint = math.hypot(e_stair.ci_high - e_stair.ci_low,
                       e_axis.ci_high - e_axis.ci_low) / 2.0
    run.write("comparison.csv", _csv(
        ["N", "staircase_p", "axis_p", "difference", "joint_ci_half_width",
         "master_seed"],
        [[N, _fmt(e_stair.p_hat), _fmt(e_axis.p_hat), _fmt(diff), _fmt(joint),
          cfg["seed"]]]))
    run.write_manifest()
    return 0


# ---------------------------------------------------------------------------
# argument plumbing

COMMANDS = {
    "sequence": (cmd_sequence, {"k_max": 50, "n_max": 100}),
    "figure5": (cmd_figure5, {"i_max": 9, "horizon": 5000, "trials": 100000}),
    "returns": (cmd_returns, {"k_min": 1, "k_max": 10, "horizon": 100000,
                              "trials": 1000}),
    "capacity": (cmd_capacity, {"k_max": 8, "horizon": 10000, "trials": 200}),
    "counterexample": (cmd_counterexample, {"k": 3, "statistical": False,
                                            "stat_k_max": 6, "horizon": 10000,
                                            "trials": 1000}),
    "zwalk": (cmd_zwalk, {"n_min": 3, "n_max": 8, "base_step_cap": 100000,
                          "trials": 1000}),
    "compare-paths": (cmd_compare_paths, {"n": 4, "horizon": 5000,
                                          "trials": 100000}),
}

GLOBAL_DEFAULTS = {"epsilon": DEFAULT_EPSILON, "seed": DEFAULT_SEED,
                   "level": DEFAULT_LEVEL, "workers": 1}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coverwalk",
        description="Monte Carlo experiments on covering paths of 3-d random walks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_fn, extra) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--horizon", type=int)
        p.add_argument("--out", type=str)
        p.add_argument("--level", type=float)
        p.add_argument("--workers", type=int)
        p.add_argument("--config", type=str)
        for key, default in extra.items():
            if key in ("trials", "horizon"):
                continue  # already global flags; these only set defaults
            if isinstance(default, bool):
                p.add_argument(f"--{key.replace('_', '-')}", action="store_true",
                               default=None)
            else:
                p.add_argument(f"--{key.replace('_', '-')}", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    fn, extra = COMMANDS[args.command]
    cfg = dict(GLOBAL_DEFAULTS)
    cfg.update(extra)
    cfg["out"] = f"coverwalk-out/{args.command}"
    if args.config:
        file_cfg = load_config_file(args.config)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["epsilon"] <= 0:
        raise ConfigError(f"epsilon must be > 0, got {cfg['epsilon']}")
    if not 0 < cfg["level"] < 1:
        raise ConfigError(f"level must be in (0, 1), got {cfg['level']}")
    if cfg["workers"] < 1:
        raise ConfigError(f"workers must be >= 1, got {cfg['workers']}")
    for key in ("trials", "horizon", "base_step_cap"):
        if key in cfg and cfg[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {cfg[key]}")
    for key in ("k_max", "n_max", "i_max", "stat_k_max"):
        if key in cfg and cfg[key] < 0:
            raise ConfigError(f"{key} must be >= 0, got {cfg[key]}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        fn, _extra = COMMANDS[args.command]
        return fn(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ExperimentFailure as exc:
        print(f"experiment failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
