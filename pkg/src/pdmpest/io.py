"""Delimited text formats for trajectories and density estimates.

Both formats are plain comma-separated text with ``#`` comment lines up
front carrying metadata. Floats are written with 17 significant digits so a
write/read round trip reproduces every value bit for bit, and writes use
explicit newlines so the files are byte-identical across platforms.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError
from .estimate import DensityEstimate, EstimateMeta
from .simulate import Trajectory

_FLOAT = "%.17g"


def _fmt(value: float) -> str:
    return _FLOAT % value


def write_trajectory(traj: Trajectory, path: str | Path) -> None:
    """Write a trajectory as one row per transition.

    Columns are the record index, the state coordinates, the sojourn time,
    and the forced-jump flag as 0/1. The seed, when the trajectory has one,
    goes in a leading comment so a round trip preserves it.
    """
    path = Path(path)
    d = traj.state_dim
    header = ",".join(["i"] + [f"z{k + 1}" for k in range(d)] + ["s", "forced"])
    with open(path, "w", newline="\n") as fh:
        if traj.seed is not None:
            fh.write(f"# seed={traj.seed}\n")
        fh.write(header + "\n")
        for i, record in enumerate(traj):
            coords = ",".join(_fmt(c) for c in record.state)
            fh.write(f"{i},{coords},{_fmt(record.sojourn)},{int(record.forced)}\n")


def read_trajectory(path: str | Path) -> Trajectory:
    """Parse a trajectory file, reporting the offending line on failure."""
    path = Path(path)
    seed: int | None = None
    header_cols: list[str] | None = None
    states: list[list[float]] = []
    sojourns: list[float] = []
    forced: list[bool] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("seed="):
                    try:
                        seed = int(body[len("seed="):])
                    except ValueError:
                        raise ParseError(path, lineno, f"malformed seed comment {body!r}")
                continue
            if header_cols is None:
                header_cols = line.split(",")
                d = len(header_cols) - 3
                expected = ["i"] + [f"z{k + 1}" for k in range(d)] + ["s", "forced"]
                if d < 1 or header_cols != expected:
                    raise ParseError(path, lineno, f"unexpected header {line!r}")
                continue
            tokens = line.split(",")
            if len(tokens) != len(header_cols):
                raise ParseError(
                    path, lineno,
                    f"expected {len(header_cols)} fields, got {len(tokens)}",
                )
            try:
                index = int(tokens[0])
                coords = [float(tok) for tok in tokens[1:-2]]
                sojourn = float(tokens[-2])
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc))
            if index != len(states):
                raise ParseError(
                    path, lineno, f"record index {index} out of order, expected {len(states)}"
                )
            if tokens[-1] not in ("0", "1"):
                raise ParseError(path, lineno, f"forced flag must be 0 or 1, got {tokens[-1]!r}")
            if not all(np.isfinite(coords)) or not np.isfinite(sojourn):
                raise ParseError(path, lineno, "non-finite value")
            if index == 0:
                if sojourn != 0.0 or tokens[-1] != "0":
                    raise ParseError(
                        path, lineno, "record 0 must have s=0 and forced=0"
                    )
            elif sojourn <= 0.0:
                raise ParseError(path, lineno, f"sojourn must be positive, got {sojourn}")
            states.append(coords)
            sojourns.append(sojourn)
            forced.append(tokens[-1] == "1")
    if header_cols is None:
        raise ParseError(path, 1, "no header line")
    if not states:
        raise ParseError(path, 1, "no transition records")
    return Trajectory(
        states=np.asarray(states, dtype=float),
        sojourns=np.asarray(sojourns, dtype=float),
        forced=np.asarray(forced, dtype=bool),
        seed=seed,
    )


def write_estimate(estimate: DensityEstimate, path: str | Path,
                   truth: np.ndarray | None = None) -> None:
    """Write a density estimate over its grid, optionally with a truth column.

    The metadata comments record everything needed to reproduce the run:
    transition count, conditioning region, horizon, seed, and the bandwidth
    used for each partition cell (``none`` for cells with no matches).
    """
    path = Path(path)
    meta = estimate.meta
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        if truth.shape != estimate.grid.shape:
            raise ValueError(
                f"truth column has shape {truth.shape}, grid has {estimate.grid.shape}"
            )
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# n_transitions={meta.n_transitions}\n")
        fh.write(f"# source={meta.source_label}\n")
        fh.write(f"# horizon={_fmt(meta.horizon_t)}\n")
        if meta.seed is not None:
            fh.write(f"# seed={meta.seed}\n")
        for label, bandwidth in meta.bandwidths:
            rendered = "none" if bandwidth is None else _fmt(bandwidth)
            fh.write(f"# bandwidth {label}={rendered}\n")
        fh.write("s,f_hat,f_true\n" if truth is not None else "s,f_hat\n")
        for j, s in enumerate(estimate.grid):
            row = f"{_fmt(s)},{_fmt(estimate.values[j])}"
            if truth is not None:
                row += f",{_fmt(truth[j])}"
            fh.write(row + "\n")


def read_estimate(path: str | Path) -> tuple[DensityEstimate, np.ndarray | None]:
    """Parse an estimate file back into a :class:`DensityEstimate`.

    Returns the estimate and the truth column when one is present.
    """
    path = Path(path)
    n_transitions = source = horizon = seed = None
    bandwidths: list[tuple[str, float | None]] = []
    header: list[str] | None = None
    grid: list[float] = []
    values: list[float] = []
    truth: list[float] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                try:
                    if body.startswith("n_transitions="):
                        n_transitions = int(body.split("=", 1)[1])
                    elif body.startswith("source="):
                        source = body.split("=", 1)[1]
                    elif body.startswith("horizon="):
                        horizon = float(body.split("=", 1)[1])
                    elif body.startswith("seed="):
                        seed = int(body.split("=", 1)[1])
                    elif body.startswith("bandwidth "):
                        label, _, rendered = body[len("bandwidth "):].rpartition("=")
                        if not label:
                            raise ValueError(f"malformed bandwidth comment {body!r}")
                        bandwidths.append(
                            (label, None if rendered == "none" else float(rendered))
                        )
                except ValueError as exc:
                    raise ParseError(path, lineno, str(exc))
                continue
            if header is None:
                header = line.split(",")
                if header not in (["s", "f_hat"], ["s", "f_hat", "f_true"]):
                    raise ParseError(path, lineno, f"unexpected header {line!r}")
                continue
            tokens = line.split(",")
            if len(tokens) != len(header):
                raise ParseError(
                    path, lineno, f"expected {len(header)} fields, got {len(tokens)}"
                )
            try:
                row = [float(tok) for tok in tokens]
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc))
            grid.append(row[0])
            values.append(row[1])
            if len(header) == 3:
                truth.append(row[2])
    if header is None:
        raise ParseError(path, 1, "no header line")
    if not grid:
        raise ParseError(path, 1, "no data rows")
    if n_transitions is None or source is None or horizon is None:
        raise ParseError(path, 1, "missing metadata comments")
    meta = EstimateMeta(
        n_transitions=n_transitions,
        source_label=source,
        horizon_t=horizon,
        bandwidths=tuple(bandwidths),
        seed=seed,
    )
    estimate = DensityEstimate(
        grid=np.asarray(grid, dtype=float),
        values=np.asarray(values, dtype=float),
        meta=meta,
    )
    return estimate, (np.asarray(truth, dtype=float) if truth else None)
