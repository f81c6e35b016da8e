"""Command line interface.

Three subcommands cover the simulate / estimate / check workflow:

* ``pdmpest simulate``: run the jump chain of a built-in model and write the
  trajectory to a delimited file;
* ``pdmpest estimate``: read a benchmark trajectory and write the estimated
  conditional inter-jump time density over a grid, optionally with the exact
  density column and a rendered figure;
* ``pdmpest oracle``: run the model self-consistency checks and report them.

Every long option can also come from a ``--config`` file of ``key=value``
lines (keys are the option names with underscores, ``#`` starts a comment).
Explicit flags win over the file, the file wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Any, Sequence

import numpy as np

from .bench import BenchParams, build_bench_model, default_partition, origin_state
from .errors import ConfigurationError, ParseError, PdmpError
from .estimate import EstimatorConfig, estimate_density_f
from .figures import render_estimate_figure
from .io import read_trajectory, write_estimate, write_trajectory
from .oracle import bench_exact_f, run_invariant_report
from .simulate import simulate_chain
from .toy import uniform_interval_model, zero_hazard_model

_MODEL_CHOICES = ("bench", "uniform", "nohazard")

# per-subcommand option tables: name -> (coercion, default); None default
# means the option is required
_SIMULATE_OPTS: dict[str, tuple[type, Any]] = {
    "model": (str, "bench"),
    "n_jumps": (int, 1000),
    "seed": (int, 0),
    "sigma2": (float, 1e-4),
    "epsilon": (float, 0.1),
    "rate": (float, 2.0),
    "out": (str, None),
}
_ESTIMATE_OPTS: dict[str, tuple[type, Any]] = {
    "traj": (str, None),
    "out": (str, None),
    "truth": (bool, False),
    "plot": (str, ""),
    "alpha": (float, 1.0 / 3.0),
    "horizon": (float, 0.8),
    "r1": (float, 0.05),
    "r2": (float, 0.75),
    "grid": (int, 128),
    "epsilon": (float, 0.1),
}
_ORACLE_OPTS: dict[str, tuple[type, Any]] = {
    "model": (str, "bench"),
    "seed": (int, 0),
    "states": (int, 20),
    "triples": (int, 8),
    "sigma2": (float, 1e-4),
    "epsilon": (float, 0.1),
    "rate": (float, 2.0),
}


def _coerce(key: str, text: str, kind: type) -> Any:
    if kind is bool:
        lowered = text.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ValueError(f"option {key!r} expects a boolean, got {text!r}")
    return kind(text)


def _load_config(path: str, opts: dict[str, tuple[type, Any]]) -> dict[str, Any]:
    values: dict[str, Any] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, text = line.partition("=")
            if not sep:
                raise ParseError(path, lineno, f"expected key=value, got {line!r}")
            key = key.strip()
            if key not in opts:
                raise ParseError(path, lineno, f"unknown option {key!r}")
            try:
                values[key] = _coerce(key, text.strip(), opts[key][0])
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc))
    return values


def _resolve(args: argparse.Namespace, opts: dict[str, tuple[type, Any]],
             parser: argparse.ArgumentParser) -> dict[str, Any]:
    """Merge flags, config file, and defaults in that order of precedence."""
    from_file: dict[str, Any] = {}
    if args.config is not None:
        from_file = _load_config(args.config, opts)
    resolved = {}
    for key, (_, default) in opts.items():
        flag = getattr(args, key)
        value = flag if flag is not None else from_file.get(key, default)
        if value is None:
            parser.error(f"--{key.replace('_', '-')} is required")
        resolved[key] = value
    return resolved


def _build_model(name: str, *, sigma2: float, epsilon: float, rate: float):
    if name == "bench":
        params = BenchParams(sigma2=sigma2, epsilon=epsilon)
        return build_bench_model(params), params
    if name == "uniform":
        return uniform_interval_model(rate), None
    if name == "nohazard":
        return zero_hazard_model(), None
    raise ConfigurationError(f"unknown model {name!r}")


def _start_state(name: str) -> np.ndarray:
    return origin_state() if name == "bench" else np.array([0.5])


def _state_sampler(name: str):
    if name == "bench":
        def sampler(rng: np.random.Generator) -> np.ndarray:
            radius = 0.9 * math.sqrt(rng.uniform())
            phi = rng.uniform(0.0, 2.0 * math.pi)
            heading = rng.uniform(0.1, 2.0 * math.pi - 0.1)
            return np.array([radius * math.cos(phi), radius * math.sin(phi), heading])
    else:
        def sampler(rng: np.random.Generator) -> np.ndarray:
            return np.array([rng.uniform(0.05, 0.95)])
    return sampler


def _cmd_simulate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    opt = _resolve(args, _SIMULATE_OPTS, parser)
    model, params = _build_model(
        opt["model"], sigma2=opt["sigma2"], epsilon=opt["epsilon"], rate=opt["rate"]
    )
    traj = simulate_chain(model, _start_state(opt["model"]), opt["n_jumps"], opt["seed"])
    write_trajectory(traj, opt["out"])
    print(f"wrote {opt['out']}: {traj.n_transitions} transitions, seed {opt['seed']}")
    if params is not None:
        square, _ = default_partition(params)
        visits = int(square.indicator(traj.states[:-1]).sum())
        fraction = visits / traj.n_transitions
        print(
            f"starts in {square.label}: {visits} of {traj.n_transitions}"
            f" ({fraction:.4f})"
        )
    return 0


def _cmd_estimate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    opt = _resolve(args, _ESTIMATE_OPTS, parser)
    traj = read_trajectory(opt["traj"])
    if traj.state_dim != 3:
        parser.error(
            f"estimate expects benchmark trajectories with 3 state coordinates,"
            f" got {traj.state_dim}"
        )
    params = BenchParams(epsilon=opt["epsilon"])
    square, rest = default_partition(params)
    config = EstimatorConfig(
        horizon_t=opt["horizon"],
        r1=opt["r1"],
        r2=opt["r2"],
        grid_points=opt["grid"],
        alpha=opt["alpha"],
    )
    estimate = estimate_density_f(
        traj, square, (square, rest), config, t_star_floor=square.exit_floor
    )
    truth = None
    if opt["truth"] or opt["plot"]:
        truth = np.array([bench_exact_f(t) for t in estimate.grid])
    write_estimate(estimate, opt["out"], truth=truth if opt["truth"] else None)
    print(
        f"wrote {opt['out']}: {estimate.grid.size} grid points on"
        f" [{estimate.grid[0]:g}, {estimate.grid[-1]:g}],"
        f" peak estimate {float(estimate.values.max()):.4f}"
    )
    for label, bandwidth in estimate.meta.bandwidths:
        rendered = "no matches" if bandwidth is None else f"bandwidth {bandwidth:.5f}"
        print(f"  target {label}: {rendered}")
    if opt["plot"]:
        render_estimate_figure(estimate, opt["plot"], truth=truth)
        print(f"wrote {opt['plot']}")
    return 0


def _cmd_oracle(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    opt = _resolve(args, _ORACLE_OPTS, parser)
    model, _ = _build_model(
        opt["model"], sigma2=opt["sigma2"], epsilon=opt["epsilon"], rate=opt["rate"]
    )
    report = run_invariant_report(
        model,
        _state_sampler(opt["model"]),
        seed=opt["seed"],
        n_states=opt["states"],
        n_triples=opt["triples"],
    )
    for line in report.lines():
        print(line)
    if report.passed:
        print(f"{opt['model']}: all checks passed")
        return 0
    print(f"{opt['model']}: checks FAILED", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdmpest",
        description="simulate piecewise-deterministic jump chains and estimate "
        "conditional inter-jump time distributions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a jump chain and write it to a file")
    p_sim.add_argument("--config", help="key=value option file")
    p_sim.add_argument("--model", choices=_MODEL_CHOICES)
    p_sim.add_argument("--n-jumps", dest="n_jumps", type=int)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--sigma2", type=float, help="relocation variance (bench)")
    p_sim.add_argument("--epsilon", type=float, help="half-width of the source square (bench)")
    p_sim.add_argument("--rate", type=float, help="constant hazard (uniform)")
    p_sim.add_argument("--out", help="trajectory output path")
    p_sim.set_defaults(run=_cmd_simulate)

    p_est = sub.add_parser(
        "estimate", help="estimate the conditional density from a trajectory file"
    )
    p_est.add_argument("--config", help="key=value option file")
    p_est.add_argument("--traj", help="trajectory input path")
    p_est.add_argument("--out", help="estimate output path")
    p_est.add_argument("--truth", action="store_true", default=None,
                       help="append the exact density column")
    p_est.add_argument("--plot", help="also render a figure to this path")
    p_est.add_argument("--alpha", type=float, help="bandwidth exponent")
    p_est.add_argument("--horizon", type=float, help="estimation horizon")
    p_est.add_argument("--r1", type=float, help="lower edge of the output window")
    p_est.add_argument("--r2", type=float, help="upper edge of the output window")
    p_est.add_argument("--grid", type=int, help="number of grid points")
    p_est.add_argument("--epsilon", type=float, help="half-width of the source square")
    p_est.set_defaults(run=_cmd_estimate)

    p_orc = sub.add_parser("oracle", help="run model self-consistency checks")
    p_orc.add_argument("--config", help="key=value option file")
    p_orc.add_argument("--model", choices=_MODEL_CHOICES)
    p_orc.add_argument("--seed", type=int)
    p_orc.add_argument("--states", type=int, help="states sampled per check")
    p_orc.add_argument("--triples", type=int, help="conditioning triples checked")
    p_orc.add_argument("--sigma2", type=float)
    p_orc.add_argument("--epsilon", type=float)
    p_orc.add_argument("--rate", type=float)
    p_orc.set_defaults(run=_cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args, parser)
    except (PdmpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
