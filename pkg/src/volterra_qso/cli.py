"""Command-line front end.

    volterra-qso enumerate --m 3
    volterra-qso partition --m 4 --out classes.json
    volterra-qso classify --params 1,0,1
    volterra-qso simulate --m 2 --params 0 --x0 0.5,0.5 --steps 50 --format csv
    volterra-qso cesaro --bits 101 --checkpoints 10000,100000,1000000
    volterra-qso fixed-points --bits 110111

Exit status: 0 on success, 2 on a bad argument (the message names the flag),
3 when ``classify`` returns an Unclassified graph claim.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DEFAULT_CHECKPOINTS,
    DiagnosticProtocol,
    GraphClaim,
    cesaro_from,
    classification_report,
    fixed_points_extremal,
    iterate,
    set_threads_from_env,
)
from .simplex import SimplexError, make_point, sample_interior
from .tournament import class_report, partition_into_classes, tournament_from_extremal
from .volterra import GREEK, MAX_ENUM_M, DimensionTooLarge, ExtremalVolterra, enumerate_extremal

COMMANDS = ("enumerate", "classify", "simulate", "cesaro", "fixed-points", "partition")
EXIT_OK, EXIT_USAGE, EXIT_UNCLASSIFIED = 0, 2, 3


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"--{field}: {message}")
        self.field = field


@dataclass
class RunConfig:
    command: str
    m: int | None = None
    bits: str | None = None
    params: str | None = None
    class_index: int | None = None
    x0: str | None = None
    steps: int = 1000
    seed: int = 0
    checkpoints: str | None = None
    starts: int = 32
    stride: int = 1
    fmt: str = "json"
    out: str | None = None


def _int_list(text: str, field: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(field, f"expected comma-separated integers, got {text!r}") from None


def resolve_operator(cfg: RunConfig) -> ExtremalVolterra:
    chosen = [f for f in ("bits", "params", "class_index") if getattr(cfg, f) is not None]
    if not chosen:
        raise ConfigError("bits", "an operator is required (--bits, --params or --class-index)")
    if len(chosen) > 1:
        raise ConfigError(chosen[1].replace("_", "-"), "give only one operator selector")
    try:
        if cfg.bits is not None:
            E = ExtremalVolterra.from_bitstring(cfg.bits, cfg.m)
        elif cfg.params is not None:
            E = ExtremalVolterra.from_params(_int_list(cfg.params, "params"), cfg.m)
        else:
            if cfg.m is None:
                raise ConfigError("m", "--class-index needs --m")
            reps = list(_partition(cfg.m))
            if not 0 <= cfg.class_index < len(reps):
                raise ConfigError("class-index", f"must be in 0..{len(reps) - 1}")
            cid = reps[cfg.class_index]
            E = ExtremalVolterra.from_bitstring(cid.canonical, cfg.m)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(chosen[0].replace("_", "-"), str(exc)) from None
    if cfg.m is not None and E.m != cfg.m:
        raise ConfigError("m", f"operator has m={E.m} but --m {cfg.m} was given")
    return E


def _partition(m: int):
    try:
        return partition_into_classes(tournament_from_extremal(E) for E in enumerate_extremal(m))
    except DimensionTooLarge as exc:
        raise ConfigError("m", str(exc)) from None


def _initial_point(cfg: RunConfig, m: int) -> np.ndarray:
    if cfg.x0 is None:
        return sample_interior(m, cfg.seed)
    try:
        x = make_point([float(v) for v in cfg.x0.split(",")])
    except (ValueError, SimplexError) as exc:
        raise ConfigError("x0", str(exc)) from None
    if x.shape[0] != m:
        raise ConfigError("x0", f"expected {m} coordinates, got {x.shape[0]}")
    return x


def _checkpoints(cfg: RunConfig) -> tuple[int, ...]:
    if cfg.checkpoints is None:
        return DEFAULT_CHECKPOINTS
    cps = _int_list(cfg.checkpoints, "checkpoints")
    if not cps or any(c < 1 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
        raise ConfigError("checkpoints", "must be positive and strictly increasing")
    return tuple(cps)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def _validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"unknown command {cfg.command!r}")
    if cfg.fmt not in ("json", "csv"):
        raise ConfigError("format", f"must be json or csv, got {cfg.fmt!r}")
    if cfg.m is not None and cfg.m < 2:
        raise ConfigError("m", "must be >= 2")
    if cfg.steps < 1:
        raise ConfigError("steps", "must be >= 1")
    if cfg.stride < 1:
        raise ConfigError("stride", "must be >= 1")
    if cfg.starts < 1:
        raise ConfigError("starts", "must be >= 1")


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    _validate(cfg)
    set_threads_from_env()
    cmd = cfg.command

    if cmd == "enumerate":
        if cfg.m is None:
            raise ConfigError("m", "required")
        if cfg.m > MAX_ENUM_M:
            raise ConfigError("m", f"exceeds MAX_ENUM_M={MAX_ENUM_M}")
        ops = list(enumerate_extremal(cfg.m))
        if cfg.fmt == "csv":
            text = _csv([[E.bitstring] for E in ops], ["bits"])
        else:
            text = _dump_json(
                {
                    "m": cfg.m,
                    "count": len(ops),
                    "operators": [
                        {"bits": E.bitstring, "params": E.params() if E.m in GREEK else None}
                        for E in ops
                    ],
                }
            )
        _emit(cfg, text)
        return EXIT_OK

    if cmd == "partition":
        if cfg.m is None:
            raise ConfigError("m", "required")
        classes = _partition(cfg.m)
        reports = [class_report(cid, members) for cid, members in classes.items()]
        if cfg.fmt == "csv":
            text = _csv(
                [
                    [r["class_id"], r["size"], int(r["has_hamiltonian"]),
                     " ".join(map(str, r["sources"])), " ".join(map(str, r["sinks"])), r["cycle_structure"]]
                    for r in reports
                ],
                ["class_id", "size", "has_hamiltonian", "sources", "sinks", "cycle_structure"],
            )
        else:
            text = _dump_json(
                {
                    "m": cfg.m,
                    "n_operators": sum(r["size"] for r in reports),
                    "class_sizes": [r["size"] for r in reports],
                    "classes": reports,
                }
            )
        _emit(cfg, text)
        return EXIT_OK

    E = resolve_operator(cfg)

    if cmd == "classify":
        protocol = DiagnosticProtocol(n_starts=cfg.starts, checkpoints=_checkpoints(cfg), seed=cfg.seed)
        report = classification_report(E, protocol)
        _emit(cfg, _dump_json(report))
        claim = report["verdict"]["graph_claim"]
        return EXIT_UNCLASSIFIED if claim == GraphClaim.UNCLASSIFIED.value else EXIT_OK

    if cmd == "fixed-points":
        fps = fixed_points_extremal(E).to_list()
        if cfg.fmt == "csv":
            text = _csv(
                [[fp["provenance"], fp["residual"], *fp["point"]] for fp in fps],
                ["provenance", "residual", *(f"x{k}" for k in range(1, E.m + 1))],
            )
        else:
            text = _dump_json({"m": E.m, "bits": E.bitstring, "fixed_points": fps})
        _emit(cfg, text)
        return EXIT_OK

    x0 = _initial_point(cfg, E.m)

    if cmd == "simulate":
        traj = iterate(E, x0, cfg.steps)
        idx = list(range(0, cfg.steps + 1, cfg.stride))
        if idx[-1] != cfg.steps:
            idx.append(cfg.steps)
        pts = traj.points
        if cfg.fmt == "csv":
            text = _csv(
                [[n, *(repr(float(v)) for v in pts[n])] for n in idx],
                ["n", *(f"x{k}" for k in range(1, E.m + 1))],
            )
        else:
            text = _dump_json(
                {"m": E.m, "bits": E.bitstring, "n": idx, "points": [[float(v) for v in pts[n]] for n in idx]}
            )
        _emit(cfg, text)
        return EXIT_OK

    if cmd == "cesaro":
        seq = cesaro_from(E, x0, _checkpoints(cfg))
        out = {"m": E.m, "bits": E.bitstring, "x0": [float(v) for v in x0], **seq.to_dict()}
        _emit(cfg, _dump_json(out))
        return EXIT_OK

    raise ConfigError("command", f"unknown command {cmd!r}")  # pragma: no cover


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="volterra-qso", description="Extremal Volterra QSO toolkit")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--m", type=int, help="number of genotypes")
    p.add_argument("--bits", help="pair bits in canonical order, e.g. 110111")
    p.add_argument("--params", help="Greek tuple as a comma list, e.g. 1,0,1")
    p.add_argument("--class-index", type=int, dest="class_index",
                   help="representative of the k-th class of `partition` (0-based)")
    p.add_argument("--x0", help="initial point as a comma list (default: random interior point)")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoints", help="comma list of Cesaro checkpoint counts")
    p.add_argument("--starts", type=int, default=32, help="random starts for the classify diagnostic")
    p.add_argument("--stride", type=int, default=1, help="row stride for simulate output")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="output file (default: stdout)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
