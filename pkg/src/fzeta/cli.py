"""Command-line entry point: drum JSON in, deterministic CSV/JSON tables out."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import complex_dims as cd
from .constructions import build_algebraic_qp, build_hyperfractal, build_transcendental_qp
from .drums import DrumSpec, Norm, drum_from_json, make_tube
from .errors import (AbscissaError, ConfigError, FzetaError, InversionRangeError,
                     PoleProximityError, ToleranceError, UnsupportedError)
from .minkowski import (content_bounds, content_window, estimate_dimension, exact_dimension,
                        periodic_profile, tube_table)
from .verify import PRESETS, identity_suite, run_acceptance
from .zeta import ZetaHandle, best_handle

SCHEMA = "fzeta/1"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
TOL_RANGE = (1e-12, 1e-3)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)
    failed: bool = False


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    drum: DrumSpec | None
    out: Path | None
    fmt: str
    tol: float
    args: argparse.Namespace


# ---------------------------------------------------------------- parsing helpers


def parse_range(text: str, what: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise ConfigError(f"{what} must look like lo:hi:n, got {text!r}") from exc
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"{what} needs finite bounds and n >= 1")
    return lo, hi, n


def parse_s_grid(text: str) -> list[complex]:
    """'re0:re1:n,im0:im1:m' -> n*m complex points (row-major in Re)."""
    try:
        re_part, im_part = text.split(",")
    except ValueError as exc:
        raise ConfigError("--s-grid must look like re0:re1:n,im0:im1:m") from exc
    r0, r1, n = parse_range(re_part, "--s-grid real part")
    i0, i1, m = parse_range(im_part, "--s-grid imaginary part")
    res = np.linspace(r0, r1, n)
    ims = np.linspace(i0, i1, m)
    return [complex(x, y) for x in res for y in ims]


def parse_window(text: str) -> cd.Window:
    try:
        re_part, im_part = text.split(",")
        r0, r1 = (float(v) for v in re_part.split(":"))
        i0, i1 = (float(v) for v in im_part.split(":"))
    except ValueError as exc:
        raise ConfigError("--window must look like re0:re1,im0:im1") from exc
    return cd.Window(r0, r1, i0, i1)


def load_drum(args) -> DrumSpec | None:
    if getattr(args, "drum", None):
        try:
            text = Path(args.drum).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read drum file: {exc}") from exc
        return drum_from_json(text)
    if getattr(args, "preset", None):
        try:
            return PRESETS[args.preset]()
        except KeyError as exc:
            raise ConfigError(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}") \
                from exc
    return None


def _need_drum(cfg: RunConfig) -> DrumSpec:
    if cfg.drum is None:
        raise ConfigError(f"{cfg.subcommand} needs --drum FILE or --preset NAME")
    return cfg.drum


# ---------------------------------------------------------------- subcommands


def cmd_tube(cfg: RunConfig) -> Table:
    drum = _need_drum(cfg)
    a = cfg.args
    if a.profile:
        prof = periodic_profile(drum)
        tau, g = prof.samples(a.samples)
        return Table(["tau", "G"], [[float(x), float(y)] for x, y in zip(tau, g)],
                     {"period": prof.period, "min": prof.min_value, "max": prof.max_value})
    t0, t1, n = parse_range(a.t_grid, "--t-grid")
    if not 0 < t0 < t1:
        raise ConfigError("--t-grid needs 0 < t0 < t1")
    t = np.geomspace(t0, t1, n)
    rows = tube_table(make_tube(drum, a.norm), t, drum.dimension)
    return Table(["t", "volume", "normalized", "err"], [list(r) for r in rows],
                 {"norm": a.norm, "dimension": drum.dimension})


def cmd_dim(cfg: RunConfig) -> Table:
    drum = _need_drum(cfg)
    a = cfg.args
    t0, t1 = (float(v) for v in a.t_range.split(":")) if a.t_range else \
        (max(drum.x_inner, 1.0), max(drum.x_inner, 1.0) * 1e6)
    tube = make_tube(drum, a.norm)
    d_hat, err = estimate_dimension(tube, t0, t1)
    d, content = exact_dimension(drum)
    lo, hi = content_bounds(tube, d, content_window(drum))
    exact_lo, exact_hi = content if isinstance(content, tuple) else (content, content)
    return Table(["dimension", "estimate", "stderr", "content_lower", "content_upper",
                  "sampled_lower", "sampled_upper"],
                 [[d, d_hat, err, exact_lo, exact_hi, lo, hi]], {"t_range": [t0, t1]})


def _handle(cfg: RunConfig, drum: DrumSpec) -> ZetaHandle:
    a = cfg.args
    if a.method:
        return ZetaHandle(drum, a.kind, a.norm, T=a.T, method=a.method, tol=cfg.tol)
    return best_handle(drum, a.T, a.norm, a.kind).with_(tol=cfg.tol)


def cmd_zeta(cfg: RunConfig) -> Table:
    drum = _need_drum(cfg)
    h = _handle(cfg, drum)
    rows = []
    for s in parse_s_grid(cfg.args.s_grid):
        v, e = h.evaluate(s)
        rows.append([s.real, s.imag, v.real, v.imag, e])
    return Table(["re_s", "im_s", "re_zeta", "im_zeta", "err"], rows,
                 {"kind": h.kind.value, "norm": h.norm.value, "T": h.T, "method": h.method.value})


def _pole_rows(poles) -> list[list]:
    return [[p.location.real, p.location.imag, p.order, p.residue.real, p.residue.imag,
             p.provenance.value] for p in poles]


POLE_COLUMNS = ["re", "im", "order", "res_re", "res_im", "provenance"]


def _default_window(drum: DrumSpec) -> cd.Window:
    d = drum.dimension
    return cd.Window(d - 1.0 + 0.0123, d + 0.5 + 0.0123, -10.0, 10.0)


def cmd_poles(cfg: RunConfig) -> Table:
    drum = _need_drum(cfg)
    a = cfg.args
    window = parse_window(a.window) if a.window else _default_window(drum)
    if a.lattice:
        poles = cd.pole_lattice(drum, window, a.kind)
    else:
        h = ZetaHandle(drum, a.kind, Norm.SUP, T=a.T)
        poles = cd.locate_poles(h, window)
    return Table(POLE_COLUMNS, _pole_rows(poles), {"window": window.to_dict(), "kind": a.kind})


def cmd_residues(cfg: RunConfig) -> Table:
    drum = _need_drum(cfg)
    a = cfg.args
    window = parse_window(a.window) if a.window else _default_window(drum)
    h = ZetaHandle(drum, a.kind, Norm.SUP, T=a.T)
    out = []
    for p in cd.pole_lattice(drum, window, a.kind):
        radius = a.radius or 0.5 * cd.pole_gap(drum, p.location)
        res = cd.residue_contour(h, p.location, radius)
        out.append(cd.ComplexDimension(p.location, 1, res, cd.Provenance.CONTOUR))
    return Table(POLE_COLUMNS, _pole_rows(out), {"window": window.to_dict(), "kind": a.kind})


def cmd_construct(cfg: RunConfig) -> Table:
    a = cfg.args
    if (a.order is None) == (a.hyperfractal is None):
        raise ConfigError("construct needs exactly one of --order or --hyperfractal")
    if a.hyperfractal is not None:
        drum, rep = build_hyperfractal(a.dimension, a.hyperfractal)
    elif a.recipe == "algebraic":
        drum, rep = build_algebraic_qp(a.order, a.dimension, a.a1, a.allow_sup_profile)
    else:
        drum, rep = build_transcendental_qp(a.order, a.dimension, a.allow_sup_profile)
    rows = []
    for i, (aa, bb) in enumerate(rep.parameters, start=1):
        rows.append([i, aa, bb, math.log(1.0 / aa), 2.0 * math.pi / math.log(1.0 / aa)])
    return Table(["component", "a", "b", "quasiperiod", "oscillatory_period"], rows,
                 {"drum": drum.to_dict(), "report": rep.to_dict()})


def cmd_verify(cfg: RunConfig) -> Table:
    if cfg.args.acceptance:
        results = run_acceptance()
    else:
        results = identity_suite(_need_drum(cfg))
    # timings go to stderr so the table itself is reproducible byte for byte
    for r in results:
        sys.stderr.write(f"{r.name}: {r.seconds:.2f} s\n")
    rows = [[r.name, r.measured, r.tolerance, r.passed, r.detail] for r in results]
    return Table(["check", "measured", "tolerance", "passed", "detail"], rows,
                 failed=not all(r.passed for r in results))


COMMANDS = {"tube": cmd_tube, "dim": cmd_dim, "zeta-eval": cmd_zeta, "poles": cmd_poles,
            "residues": cmd_residues, "construct": cmd_construct, "verify": cmd_verify}


# ---------------------------------------------------------------- output


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def render(table: Table, cfg: RunConfig) -> str:
    if cfg.fmt == "json":
        doc = {"schema": SCHEMA, "command": cfg.subcommand, "columns": table.columns,
               "rows": [[_json_cell(v) for v in r] for r in table.rows], "meta": table.meta}
        return json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _json_cell(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _diagnose(exc: BaseException, code: int) -> None:
    doc = {"schema": SCHEMA, "error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(doc) + "\n")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ToleranceError, PoleProximityError)):
        return EXIT_NUMERIC
    if isinstance(exc, (ConfigError, UnsupportedError, AbscissaError, InversionRangeError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fzeta", description="Fractal zeta functions of drums at infinity.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(sp, drum=True):
        if drum:
            sp.add_argument("--drum", help="drum JSON file")
            sp.add_argument("--preset", help=f"named drum: {', '.join(sorted(PRESETS))}")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=["csv", "json"], default="csv")
        sp.add_argument("--tol", type=float, default=1e-12)

    sp = sub.add_parser("tube", help="tube volumes on a geometric t-grid")
    common(sp)
    sp.add_argument("--norm", choices=["euclid", "sup"], default="sup")
    sp.add_argument("--t-grid", default="10:1e6:51", help="t0:t1:n (geometric)")
    sp.add_argument("--profile", action="store_true", help="emit (tau, G) over one period")
    sp.add_argument("--samples", type=int, default=512)

    sp = sub.add_parser("dim", help="dimension estimate and content bounds")
    common(sp)
    sp.add_argument("--norm", choices=["euclid", "sup"], default="sup")
    sp.add_argument("--t-range", help="t0:t1 for the regression")

    for name, helptext in (("zeta-eval", "evaluate a zeta function on an s-grid"),
                           ("poles", "argument-principle pole search"),
                           ("residues", "contour residues at predicted poles")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--kind", choices=["distance", "tube"], default="distance")
        sp.add_argument("--T", type=float, default=None, help="reference radius")
        if name == "zeta-eval":
            sp.add_argument("--norm", choices=["euclid", "sup"], default="sup")
            sp.add_argument("--s-grid", required=True, help="re0:re1:n,im0:im1:m")
            sp.add_argument("--method", choices=["closed_form", "quadrature"])
        else:
            sp.add_argument("--window", help="re0:re1,im0:im1")
        if name == "poles":
            sp.add_argument("--lattice", action="store_true", help="predicted lattice only")
        if name == "residues":
            sp.add_argument("--radius", type=float, default=None)

    sp = sub.add_parser("construct", help="quasiperiodic and hyperfractal builders")
    common(sp, drum=False)
    sp.add_argument("--order", type=int)
    sp.add_argument("--hyperfractal", type=int, metavar="N_LEVELS")
    sp.add_argument("--dimension", type=float, required=True)
    sp.add_argument("--recipe", choices=["algebraic", "transcendental"], default="algebraic")
    sp.add_argument("--a1", type=float, default=0.25)
    sp.add_argument("--allow-sup-profile", action="store_true")

    sp = sub.add_parser("verify", help="identity suite on a drum, or the acceptance checks")
    common(sp)
    sp.add_argument("--acceptance", action="store_true")
    return p


VALUE_FLAGS = ("--s-grid", "--window", "--t-grid", "--t-range", "--dimension", "--T")


def _glue_values(argv: list[str]) -> list[str]:
    # values such as "-2.5:-1:4,0:0:1" start with '-' and would read as flags
    out, i = [], 0
    while i < len(argv):
        if argv[i] in VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def make_config(argv) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_values(argv))
    if not args.subcommand:
        raise ConfigError("a subcommand is required")
    if not TOL_RANGE[0] <= args.tol <= TOL_RANGE[1]:
        raise ConfigError(f"--tol must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}]")
    if getattr(args, "T", None) is not None and not args.T > 0:
        raise ConfigError("--T must be positive")
    drum = load_drum(args)
    out = Path(args.out) if args.out else None
    return RunConfig(args.subcommand, drum, out, args.format, args.tol, args)


def run(cfg: RunConfig) -> int:
    table = COMMANDS[cfg.subcommand](cfg)
    text = render(table, cfg)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(cfg.out, text)
    if table.failed:
        sys.stderr.write(json.dumps({"schema": SCHEMA, "error": "VerificationFailed",
                                     "message": "one or more checks failed",
                                     "exit_code": EXIT_NUMERIC}) + "\n")
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return run(make_config(argv))
    except FzetaError as exc:
        code = exit_code_for(exc)
        _diagnose(exc, code)
        return code


if __name__ == "__main__":
    sys.exit(main())
