"""Command line front end: ``tq <subcommand> <model.json> [options]``.

CSV is the primary output; every number is written with ``repr`` precision
so identical runs give byte-identical files whatever ``--threads`` is. JSON
output carries the same rows plus run metadata and wall time. Failures are
reported as one JSON object on stderr and mapped to exit codes 2
(validation), 3 (numerical) or 1 (anything else).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import fan, potential, quantization
from .bks import additivity_defect, bks, unitarity_derivative
from .errors import MalformedInput, ToricError
from .polytope import PX, ToricModel, load_model

SUBCOMMANDS = ("check", "basis", "norms", "degenerate", "bks", "unitarity", "holonomy")

DEFAULT_S = {
    "norms": (10.0, 40.0, 160.0, 640.0),
    "degenerate": (40.0, 160.0, 640.0),
    "bks": (0.0, 1.0, 3.0),
    "unitarity": (0.0, 5.0, 50.0),
}
# the finite-difference cross-check of the derivative needs a tight tolerance
DEFAULT_TOL = {"unitarity": 1e-11}


@dataclass(frozen=True)
class RunConfig:
    model_path: str
    subcommand: str
    modes: tuple[tuple[int, ...], ...] | None = None
    s_schedule: tuple[float, ...] = ()
    rel_tol: float = 1e-8
    max_cells: int = 2**20
    threads: int = 1
    points: tuple[tuple[Fraction, ...], ...] = ()
    out: str | None = None
    format: str = "csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise MalformedInput(f"unknown subcommand {self.subcommand!r}")
        if not (1e-14 < self.rel_tol < 1e-2):
            raise MalformedInput("--tol must lie in (1e-14, 1e-2)")
        if any(s < 0 for s in self.s_schedule):
            raise MalformedInput("--s values must be nonnegative")
        if list(self.s_schedule) != sorted(self.s_schedule):
            raise MalformedInput("--s values must be ascending")
        if self.format not in ("csv", "json"):
            raise MalformedInput("--format must be csv or json")
        if self.max_cells < 1 or self.threads < 1:
            raise MalformedInput("--max-cells and --threads must be positive")


@dataclass
class Report:
    columns: list[str]
    rows: list[list]
    summary: dict = field(default_factory=dict)


def _num(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_num(c) for c in v)
    return str(v)


def _json_safe(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, (tuple, list)):
        return [_json_safe(c) for c in v]
    if isinstance(v, dict):
        return {str(k): _json_safe(c) for k, c in v.items()}
    return v


def _modes(model: ToricModel, cfg: RunConfig):
    return list(cfg.modes) if cfg.modes is not None else model.lattice_points()


def _schedule(cfg: RunConfig):
    return list(cfg.s_schedule) if cfg.s_schedule else list(DEFAULT_S.get(cfg.subcommand, ()))


def _opts(cfg: RunConfig) -> dict:
    return {"max_cells": cfg.max_cells, "threads": cfg.threads}


# -- subcommands ----------------------------------------------------------------------


def run_check(model: ToricModel, cfg: RunConfig) -> Report:
    reg = potential.regularity_scan(model, raise_on_failure=False)
    parity = fan.parity_criterion(model)
    even = fan.even_divisor_criterion(model)
    rows = [
        ["delzant", True],
        ["dimension", model.n],
        ["facets", model.r],
        ["px_vertices", " ".join(_num(v) for v in model.vertices(PX))],
        ["pl_status", model.pl_status],
        ["pl_vertices", " ".join(_num(v) for v in model.pl_vertices)],
        ["quantum_dimension", model.quantum_dimension],
        ["sqrtk_parity", parity],
        ["sqrtk_even_divisor", even],
        ["sqrtk_exists", fan.sqrtk_exists(model)],
        ["regularity_min", reg.min_value],
        ["regularity_max", reg.max_value],
        ["regularity_passed", reg.passed],
    ]
    return Report(["field", "value"], rows)


def run_basis(model: ToricModel, cfg: RunConfig) -> Report:
    kahler = model.lattice_points()
    real = quantization.real_basis(model)
    return Report(["m"], [[m] for m in kahler], {"kahler": kahler, "real": real, "equal": kahler == real})


def run_norms(model: ToricModel, cfg: RunConfig) -> Report:
    rows = []
    for m in _modes(model, cfg):
        for s in _schedule(cfg):
            ratio, res = quantization.laplace_ratio(model, s, m, cfg.rel_tol, **_opts(cfg))
            pred = quantization.laplace_prediction(model, s, m)
            rows.append([model.name, m, float(s), res.value, pred, ratio, res.abs_error_estimate, res.cells_used])
    return Report(["model", "m", "s", "norm2", "laplace_pred", "ratio", "abs_err", "cells"], rows)


def run_degenerate(model: ToricModel, cfg: RunConfig) -> Report:
    rows = []
    for m in _modes(model, cfg):
        target = quantization.delta_target(model, m)
        for s in _schedule(cfg):
            if s <= 0:
                raise MalformedInput("degenerate needs positive s")
            value = quantization.delta_pairing(model, s, m, rel_tol=cfg.rel_tol, **_opts(cfg))
            mass = quantization.concentration_mass(model, s, m, rel_tol=cfg.rel_tol, **_opts(cfg))
            rows.append([m, float(s), value, target, mass])
    return Report(["m", "s", "delta_pairing", "target", "mass"], rows)


def run_bks(model: ToricModel, cfg: RunConfig) -> Report:
    sched = _schedule(cfg)
    rows = []
    defects = []
    for m in _modes(model, cfg):
        for i, sI in enumerate(sched):
            for sJ in sched[i:]:
                res = bks(model, sI, sJ, m, cfg.rel_tol, **_opts(cfg))
                rows.append([m, float(sI), float(sJ), res.value, res.abs_error_estimate])
        # moving weight between the two slots leaves the entry unchanged
        for i, sI in enumerate(sched):
            for sJ in sched[i + 1:]:
                delta = 0.5 * (sJ - sI)
                d = additivity_defect(model, m, sI, sJ, delta, cfg.rel_tol, **_opts(cfg))
                defects.append({"m": list(m), "s1": sI, "s2": sJ, "delta": delta, "defect": d})
    return Report(["m", "s_I", "s_J", "value", "abs_err"], rows, {"additivity": defects})


def run_unitarity(model: ToricModel, cfg: RunConfig) -> Report:
    rows = []
    signs = []
    for m in _modes(model, cfg):
        for s in _schedule(cfg):
            rep = unitarity_derivative(model, s, m, cfg.rel_tol, **_opts(cfg))
            rows.append([m, float(s), rep.derivative, rep.fd_check])
            sign = "positive" if rep.derivative > 0 else "negative" if rep.derivative < 0 else "zero"
            signs.append({
                "m": list(m), "s": s, "sign": sign,
                "error_bound": rep.abs_error_estimate,
                "margin": abs(rep.derivative) / rep.abs_error_estimate if rep.abs_error_estimate else math.inf,
            })
    return Report(["m", "s", "derivative", "fd_check"], rows, {"signs": signs})


def run_holonomy(model: ToricModel, cfg: RunConfig) -> Report:
    points = list(cfg.points) if cfg.points else model.integer_points(PX)
    rows = []
    verdicts = []
    for x in points:
        v = quantization.bs_condition(model, x)
        rows.append([";".join(str(c) for c in x), v.status.value])
        verdicts.append(v.as_dict())
    return Report(["point", "status"], rows, {"verdicts": verdicts})


RUNNERS = {
    "check": run_check,
    "basis": run_basis,
    "norms": run_norms,
    "degenerate": run_degenerate,
    "bks": run_bks,
    "unitarity": run_unitarity,
    "holonomy": run_holonomy,
}


# -- rendering ------------------------------------------------------------------------


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.columns)
    for row in report.rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def render_json(report: Report, cfg: RunConfig, model: ToricModel, wall: float) -> str:
    cfg_d = asdict(cfg)
    cfg_d["s_schedule"] = _schedule(cfg)
    doc = {
        "command": cfg.subcommand,
        "model": model.name,
        "config": cfg_d,
        "columns": report.columns,
        "rows": [[_json_safe(v) for v in row] for row in report.rows],
        "summary": report.summary,
        "wall_time_s": wall,
    }
    return json.dumps(_json_safe(doc), indent=2) + "\n"


def run(cfg: RunConfig) -> tuple[str, Report]:
    start = time.perf_counter()
    model = load_model(cfg.model_path)
    report = RUNNERS[cfg.subcommand](model, cfg)
    wall = time.perf_counter() - start
    text = render_csv(report) if cfg.format == "csv" else render_json(report, cfg, model, wall)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text, report


# -- argument parsing -----------------------------------------------------------------


def _parse_int_tuple(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(c) for c in text.split(";"))
    except ValueError as exc:
        raise MalformedInput(f"bad mode {text!r}; expected integers joined by ';'") from exc


def _parse_point(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(c) for c in text.split(";"))
    except (ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(f"bad point {text!r}; expected rationals joined by ';'") from exc


def _parse_schedule(text: str | None) -> tuple[float, ...]:
    if not text:
        return ()
    try:
        return tuple(float(c) for c in text.split(","))
    except ValueError as exc:
        raise MalformedInput(f"bad --s value {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tq", description="Half-form corrected quantization of toric manifolds.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("model", help="model JSON file")
    p.add_argument("--modes", metavar="M1,M2,...",
                   help="modes separated by ',', coordinates by ';' (e.g. 0;1,1;1); default all of P_L")
    p.add_argument("--s", dest="s", metavar="S1,S2,...", help="ascending comma-separated s values")
    p.add_argument("--points", metavar="X1,X2,...",
                   help="holonomy points separated by ',', coordinates by ';' (use --points=-1/2 for a leading minus)")
    p.add_argument("--tol", type=float, default=None,
                   help="relative quadrature tolerance (default 1e-8, 1e-11 for unitarity)")
    p.add_argument("--max-cells", type=int, default=2**20)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tol = args.tol if args.tol is not None else DEFAULT_TOL.get(args.subcommand, 1e-8)
    return RunConfig(
        model_path=args.model,
        subcommand=args.subcommand,
        modes=tuple(_parse_int_tuple(m) for m in args.modes.split(",")) if args.modes else None,
        s_schedule=_parse_schedule(args.s),
        rel_tol=tol,
        max_cells=args.max_cells,
        threads=args.threads,
        points=tuple(_parse_point(x) for x in args.points.split(",")) if args.points else (),
        out=args.out,
        format=args.format,
    )


def _diagnostic(exc: BaseException, code: int) -> None:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    report = getattr(exc, "report", None)
    if report is not None:
        doc["report"] = _json_safe(asdict(report))
    sys.stderr.write(json.dumps(doc) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        text, _ = run(cfg)
    except ToricError as exc:
        _diagnostic(exc, exc.exit_code)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        _diagnostic(exc, 2)
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as a structured diagnostic
        _diagnostic(exc, 1)
        return 1
    if not cfg.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
