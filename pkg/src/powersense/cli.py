"""Command-line driver: threshold reports, analytic sweeps, Monte Carlo
validation, and fusion sweeps, all emitted as deterministic CSV.

Exit codes: 0 success, 2 configuration error, 3 degenerate threshold,
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .fusion import ResourceCapError, majority_matrix, majority_matrix_closed, optimal_matrix
from .metrics import bayes_risk_decide, decision_matrix, discrimination, offset_error, pfa_pd
from .regions import DegenerateThresholdError, Strategy, build_regions, np_threshold
from .scenario import make_scenario
from .simkit import SamplingMode, TrialPlan, empirical_matrix

DEFAULT_SEED = 12345
_DEFAULT_GRIDS = {"samples": "500:5000:500", "snr_db": "-16:-6:1", "users": "1:10:1"}
_STRATEGIES = {1: Strategy.PRESENCE_FIRST, 2: Strategy.LEVEL_FIRST}
_CROSSCHECK_VOTES = 20_000


@dataclass
class RunConfig:
    power_ratios: list = field(default_factory=lambda: [3.0, 5.0, 7.0, 9.0])
    snr_db: float = -12.0
    prior_off: float = 0.5
    priors_on: list = field(default_factory=lambda: [0.125, 0.125, 0.125, 0.125])
    gain: float = 1.0
    noise_var: float = 1.0
    samples: int = 1000
    users: int = 5
    strategy: int = 1
    trials: int = 200_000
    seed: int = DEFAULT_SEED
    rule: str = "both"
    axis: str = "samples"
    grid: str | None = None
    mode: str = "direct-gamma"
    workers: int = 1
    delta: int | None = None
    cost: str | None = None

    def scenario(self, **overrides):
        params = dict(
            power_ratios=self.power_ratios,
            snr_db=self.snr_db,
            prior_off=self.prior_off,
            priors_on=self.priors_on,
            gain=self.gain,
            noise_var=self.noise_var,
            samples=self.samples,
            users=self.users,
        )
        params.update(overrides)
        return make_scenario(**params)


def load_config(path: str) -> dict:
    with open(path) as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"config file {path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ValueError(f"config file {path}: expected a flat JSON object")
    known = set(RunConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ValueError(f"config file {path}: unknown key {key!r}")
    return data


def merge_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    if getattr(args, "config", None):
        merged.update(load_config(args.config))
    for name in RunConfig.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    cfg = RunConfig(**merged)
    if cfg.strategy not in _STRATEGIES:
        raise ValueError(f"strategy: must be 1 or 2, got {cfg.strategy}")
    if cfg.rule not in ("majority", "optimal", "both"):
        raise ValueError(f"rule: must be majority, optimal or both, got {cfg.rule!r}")
    if cfg.mode not in ("direct-gamma", "per-sample"):
        raise ValueError(f"mode: must be direct-gamma or per-sample, got {cfg.mode!r}")
    if cfg.trials < 1:
        raise ValueError(f"trials: must be >= 1, got {cfg.trials}")
    if cfg.workers < 1:
        raise ValueError(f"workers: must be >= 1, got {cfg.workers}")
    return cfg


def parse_grid(spec: str, as_int: bool) -> list:
    cast = int if as_int else float
    try:
        if ":" in spec:
            start, stop, step = (float(p) for p in spec.split(":"))
            if step <= 0:
                raise ValueError
            values = list(np.arange(start, stop + step / 2, step))
        else:
            values = [float(p) for p in spec.split(",")]
    except ValueError:
        raise ValueError(f"grid: expected START:STOP:STEP or comma list, got {spec!r}") from None
    out = [cast(v) for v in values]
    if not out:
        raise ValueError("grid: empty")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"grid: values must be strictly ascending, got {out}")
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _emit_csv(header: list[str], rows: list[list], out: str | None):
    text = ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    if out:
        with open(out, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _dump_config(cfg: RunConfig, path: str | None):
    if path:
        with open(path, "w") as f:
            json.dump(asdict(cfg), f, indent=2, sort_keys=True)
            f.write("\n")


def _scan_bayes_thresholds(s, costs: np.ndarray) -> list[tuple[float, int, int]]:
    # Locate decision changes of the risk minimizer on a log-dense grid,
    # then bisect each change point down to ~1e-12 relative.
    hi = 3.0 * s.samples * float(s.scales[-1])
    grid = np.geomspace(hi * 1e-9, hi, 4096)
    dec = bayes_risk_decide(grid, s, costs)
    edges = []
    for k in np.nonzero(np.diff(dec))[0]:
        lo, up = grid[k], grid[k + 1]
        a, b = int(dec[k]), int(dec[k + 1])
        while up - lo > 1e-12 * up:
            mid = 0.5 * (lo + up)
            if bayes_risk_decide(mid, s, costs) == a:
                lo = mid
            else:
                up = mid
        edges.append((0.5 * (lo + up), a, b))
    return edges


def cmd_regions(cfg: RunConfig, out: str | None) -> int:
    s = cfg.scenario()
    strategy = _STRATEGIES[cfg.strategy]
    r = build_regions(s, strategy)
    n = s.n_levels
    print(f"strategy {cfg.strategy} ({strategy.name.lower().replace('_', ' ')})")
    print(f"on/off threshold: {_fmt(r.onoff_threshold)}")
    for i in range(n + 1):
        tag = "  masked" if i in r.masked else ""
        print(f"level {i}: [{_fmt(float(r.thresholds[i]))}, {_fmt(float(r.thresholds[i + 1]))}){tag}")
    print(f"masked levels: {sorted(r.masked) if r.masked else 'none'}")
    on_priors = s.priors[1:]
    if max(on_priors) - min(on_priors) <= 1e-12:
        print("no mutual masking among nonzero levels")
    if cfg.cost:
        with open(cfg.cost) as f:
            costs = np.asarray(json.load(f), dtype=float)
        print("bayes-risk thresholds:")
        for y, a, b in _scan_bayes_thresholds(s, costs):
            print(f"  {_fmt(y)}: level {a} -> {b}")
    if out:
        rows = [
            [cfg.strategy, i, float(r.thresholds[i]), float(r.thresholds[i + 1]),
             int(i in r.masked), r.onoff_threshold]
            for i in range(n + 1)
        ]
        _emit_csv(
            ["strategy", "level", "lower", "upper", "masked", "onoff_threshold"], rows, out
        )
    return 0


def cmd_sweep(cfg: RunConfig, out: str | None) -> int:
    if cfg.axis not in ("samples", "snr_db"):
        raise ValueError(f"axis: sweep supports samples or snr_db, got {cfg.axis!r}")
    grid = parse_grid(cfg.grid or _DEFAULT_GRIDS[cfg.axis], as_int=cfg.axis == "samples")
    rows = []
    for value in grid:
        s = cfg.scenario(**{cfg.axis: value})
        for code, strategy in _STRATEGIES.items():
            r = build_regions(s, strategy)
            q = decision_matrix(s, r)
            p_fa, p_d = pfa_pd(q, s)
            rows.append(
                [value, code, p_fa, p_d, discrimination(q, s, "dis1"),
                 discrimination(q, s, "dis2"), len(r.masked)]
            )
    _emit_csv(
        ["axis_value", "strategy", "p_fa", "p_d", "p_dis1", "p_dis2", "masked_count"], rows, out
    )
    return 0


def cmd_montecarlo(cfg: RunConfig, out: str | None) -> int:
    s = cfg.scenario()
    r = build_regions(s, _STRATEGIES[cfg.strategy])
    analytic = decision_matrix(s, r)
    plan = TrialPlan(trials=cfg.trials, seed=cfg.seed, mode=SamplingMode(cfg.mode))
    empirical = empirical_matrix(plan, s, r, workers=cfg.workers)
    rows = []
    for i in range(s.n_levels + 1):
        for j in range(s.n_levels + 1):
            q = float(analytic.probs[i, j])
            se = math.sqrt(q * (1.0 - q) / cfg.trials)
            rows.append([i, j, q, float(empirical.probs[i, j]), se])
    _emit_csv(["true_level", "decided_level", "analytic", "empirical", "std_err"], rows, out)
    return 0


def cmd_fusion(cfg: RunConfig, out: str | None) -> int:
    if cfg.axis not in ("samples", "snr_db", "users"):
        raise ValueError(f"axis: fusion supports samples, snr_db or users, got {cfg.axis!r}")
    grid = parse_grid(cfg.grid or _DEFAULT_GRIDS[cfg.axis], as_int=cfg.axis != "snr_db")
    rules = ["majority", "optimal"] if cfg.rule == "both" else [cfg.rule]
    n = len(cfg.priors_on)
    delta_max = cfg.delta if cfg.delta is not None else n
    if not 1 <= delta_max <= n:
        raise ValueError(f"delta: must lie in 1..{n}, got {delta_max}")

    rows = []
    for value in grid:
        s = cfg.scenario(**{cfg.axis: value})
        r = build_regions(s, _STRATEGIES[cfg.strategy])
        local = decision_matrix(s, r)
        for rule in rules:
            if rule == "majority":
                fused = majority_matrix_closed(local, s.users)
                if math.comb(s.users + n, n) <= _CROSSCHECK_VOTES:
                    brute = majority_matrix(local, s.users)
                    if np.max(np.abs(fused.probs - brute.probs)) > 1e-12:
                        raise RuntimeError(
                            "internal inconsistency: closed-form majority fusion "
                            "disagrees with enumeration"
                        )
            else:
                fused = optimal_matrix(s, local, s.users)
            p_fa, p_d = pfa_pd(fused, s)
            row = [value, rule, p_fa, p_d, discrimination(fused, s, "dis1")]
            row += [offset_error(fused, s, d) for d in range(1, delta_max + 1)]
            rows.append(row)
    header = ["axis_value", "rule", "p_fa", "p_d", "p_dis1"]
    header += [f"error_delta_{d}" for d in range(1, delta_max + 1)]
    _emit_csv(header, rows, out)
    return 0


def cmd_np_threshold(cfg: RunConfig, target_pfa: float, out: str | None) -> int:
    s = cfg.scenario()
    theta = np_threshold(s, target_pfa)
    print(_fmt(theta))
    if out:
        _emit_csv(["target_pfa", "threshold"], [[target_pfa, theta]], out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--strategy", type=int, choices=(1, 2), help="sensing strategy")
    common.add_argument("--snr-db", dest="snr_db", type=float, help="average SNR in dB")
    common.add_argument("--samples", type=int, help="energy sample count M")
    common.add_argument("--users", type=int, help="cooperating sensor count K")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per hypothesis")
    common.add_argument("--seed", type=int, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--rule", choices=("majority", "optimal", "both"), help="fusion rule")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--delta", type=int, help="largest offset-error column to emit")
    common.add_argument("--axis", choices=("samples", "snr_db", "users"), help="sweep axis")
    common.add_argument("--grid", help="sweep grid: START:STOP:STEP or comma list")
    common.add_argument("--mode", choices=("direct-gamma", "per-sample"), help="sampling mode")
    common.add_argument("--workers", type=int, help="internal worker count")
    common.add_argument("--cost", help="JSON cost matrix for bayes-risk thresholds")
    common.add_argument("--dump-config", dest="dump_config", help="write the merged config as JSON")

    parser = argparse.ArgumentParser(
        prog="powersense",
        description="Multi-level spectrum sensing simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("regions", parents=[common], help="report decision thresholds and masks")
    sub.add_parser("sweep", parents=[common], help="analytic metrics over a parameter grid")
    sub.add_parser("montecarlo", parents=[common], help="analytic vs empirical decision matrix")
    sub.add_parser("fusion", parents=[common], help="cooperative fusion metrics over a grid")
    np_parser = sub.add_parser("np-threshold", parents=[common], help="threshold for a target false-alarm rate")
    np_parser.add_argument("--target-pfa", dest="target_pfa", type=float, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        _dump_config(cfg, getattr(args, "dump_config", None))
        if args.command == "regions":
            return cmd_regions(cfg, args.out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.out)
        if args.command == "montecarlo":
            return cmd_montecarlo(cfg, args.out)
        if args.command == "fusion":
            return cmd_fusion(cfg, args.out)
        if args.command == "np-threshold":
            return cmd_np_threshold(cfg, args.target_pfa, args.out)
        raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DegenerateThresholdError as e:
        print(f"degenerate threshold: {e}", file=sys.stderr)
        return 3
    except ResourceCapError as e:
        print(f"resource cap: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
