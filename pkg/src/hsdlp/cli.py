"""Command-line front end.

    hsdlp solve model.mps [-o model.sol] [--presolve off] [--kkt dense] ...
    hsdlp solve master.uba --kkt block-angular
    hsdlp generate --blocks 64 --linking 8 --density 0.9 -o master.uba
    hsdlp bench a.mps b.mps --kkt ldl --kkt dense

Exit codes: 0 for any terminal solver status, 1 for I/O and unexpected
errors, 2 for parse errors, 3 for numerical failures.  Logs go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, ipm
from .arith import get_arithmetic
from .block_angular import read_uba, write_uba
from .colgen import generate_synthetic_master
from .kkt import NumericalBreakdown, UnsupportedMatrixKind
from .mps_io import MpsSyntaxError, UnknownRowName, UnsupportedSection, parse_mps, write_solution
from .problem import StandardLP, Status
from .solver import solve as solve_lp

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_NUMERICAL = 0, 1, 2, 3

log = logging.getLogger("hsdlp")


class ParseError(Exception):
    pass


@dataclass
class CliConfig:
    input: Path
    output: Path | None = None
    presolve: bool = True
    kkt: str = "ldl"
    tol_p: float | None = None
    tol_d: float | None = None
    tol_g: float | None = None
    tol_i: float | None = None
    max_iter: int = 100
    time_limit: float = math.inf
    precision: str = "double"
    seed: int = 0
    log_level: str = "INFO"

    def parameters(self) -> ipm.Parameters:
        return ipm.Parameters(eps_p=self.tol_p, eps_d=self.tol_d, eps_g=self.tol_g, eps_i=self.tol_i,
                              max_iter=self.max_iter, time_limit=self.time_limit)


def shifted_geomean(times, shift: float = 10.0) -> float:
    t = np.asarray(times, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    return float(np.exp(np.mean(np.log(t + shift))) - shift)


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return conv


def _at_least_one(kind):
    def conv(text):
        v = kind(text)
        if not v >= 1:
            raise argparse.ArgumentTypeError(f"expected a value >= 1, got {text}")
        return v
    return conv


def _add_solver_flags(p: argparse.ArgumentParser, multi_kkt=False):
    p.add_argument("--presolve", choices=("on", "off"), default="on")
    kkt = dict(choices=("ldl", "dense", "block-angular"))
    if multi_kkt:
        p.add_argument("--kkt", action="append", **kkt)
    else:
        p.add_argument("--kkt", default="ldl", **kkt)
    for name in ("p", "d", "g", "i"):
        p.add_argument(f"--tol-{name}", type=_positive(float), default=None)
    p.add_argument("--max-iter", type=_at_least_one(int), default=100)
    p.add_argument("--time-limit", type=_positive(float), default=math.inf, metavar="SECONDS")
    p.add_argument("--precision", choices=("double", "extended"), default="double")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hsdlp", description="Homogeneous interior-point LP solver")
    ap.add_argument("--version", action="version", version=f"hsdlp {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an MPS (.mps) or block-angular (.uba) file")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None, help="solution file (default: stdout)")
    _add_solver_flags(p)

    g = sub.add_parser("generate", help="write a synthetic block-angular master problem")
    g.add_argument("--blocks", "-R", type=_at_least_one(int), required=True)
    g.add_argument("--linking", "-m", type=int, required=True)
    g.add_argument("--density", type=float, default=0.9)
    g.add_argument("--columns-per-block", type=_at_least_one(int), default=8)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", type=Path, required=True)

    b = sub.add_parser("bench", help="time solves and report shifted geometric means")
    b.add_argument("inputs", type=Path, nargs="+")
    b.add_argument("--repeat", type=_at_least_one(int), default=1)
    b.add_argument("--shift", type=float, default=10.0)
    _add_solver_flags(b, multi_kkt=True)
    return ap


def _config(ns, path=None, kkt=None) -> CliConfig:
    return CliConfig(input=path or ns.input, output=getattr(ns, "output", None), presolve=ns.presolve == "on",
                     kkt=kkt or ns.kkt, tol_p=ns.tol_p, tol_d=ns.tol_d, tol_g=ns.tol_g, tol_i=ns.tol_i,
                     max_iter=ns.max_iter, time_limit=ns.time_limit, precision=ns.precision,
                     seed=ns.seed, log_level=ns.log_level)


def _read(path: Path):
    try:
        text = path.read_text()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text file ({exc})") from None
    try:
        if path.suffix.lower() == ".uba":
            mat, c, b = read_uba(text)
            if c is None or b is None:
                raise ValueError("block-angular input needs COST and RHS sections")
            return "uba", (mat, c, b)
        return "mps", parse_mps(text)
    except (MpsSyntaxError, UnknownRowName, UnsupportedSection, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def solve_config(cfg: CliConfig):
    """Run one configuration; returns ``(solution, names)`` for :func:`write_solution`."""
    np.random.seed(cfg.seed)
    kind, data = _read(cfg.input)
    ar = get_arithmetic(cfg.precision)
    params = cfg.parameters()
    emit = log.info
    log.info("hsdlp %s | arithmetic %s | KKT backend %s | presolve %s", __version__, ar.name, cfg.kkt,
             "on" if cfg.presolve and kind == "mps" else "off")
    if kind == "uba":
        mat, c, b = data
        std = StandardLP.create(mat if ar.dtype != object else mat.to_dense(), b, c, arith=ar)
        sol = ipm.solve(std, params, kkt=cfg.kkt, log=emit)
        return sol, None
    sol = solve_lp(data, params, kkt=cfg.kkt, presolve=cfg.presolve, arithmetic=ar, log=emit)
    return sol, data


def run(cfg: CliConfig) -> int:
    try:
        sol, names = solve_config(cfg)
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except OSError as exc:
        log.error("cannot read input: %s", exc)
        return EXIT_IO
    except NumericalBreakdown as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except UnsupportedMatrixKind as exc:
        log.error("backend %s cannot be used here: %s", cfg.kkt, exc)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001  (report, don't dump a traceback)
        log.error("internal error: %s: %s", type(exc).__name__, exc)
        return EXIT_IO
    text = write_solution(sol, names)
    try:
        if cfg.output is None:
            sys.stdout.write(text)
        else:
            cfg.output.write_text(text)
    except OSError as exc:
        log.error("cannot write solution: %s", exc)
        return EXIT_IO
    log.info("status %s  objective %s", sol.status, sol.objective)
    return EXIT_NUMERICAL if sol.status is Status.NumericalFailure else EXIT_OK


def _generate(ns) -> int:
    try:
        mat, c, b = generate_synthetic_master(ns.blocks, ns.linking, ns.density, ns.seed, ns.columns_per_block)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    try:
        ns.output.write_text(write_uba(mat, c, b))
    except OSError as exc:
        log.error("cannot write instance: %s", exc)
        return EXIT_IO
    log.info("wrote %s: %d rows, %d columns", ns.output, *mat.shape)
    return EXIT_OK


def _bench(ns) -> int:
    backends = ns.kkt or ["ldl"]
    times = {k: [] for k in backends}
    logging.getLogger("hsdlp").setLevel(logging.WARNING)
    print("instance\tkkt\tstatus\titerations\tobjective\tseconds")
    for path in ns.inputs:
        for k in backends:
            cfg = _config(ns, path, k)
            best = math.inf
            try:
                for _ in range(ns.repeat):
                    t = time.perf_counter()
                    sol, _ = solve_config(cfg)
                    best = min(best, time.perf_counter() - t)
            except ParseError as exc:
                print(f"parse error: {exc}", file=sys.stderr)
                return EXIT_PARSE
            except OSError as exc:
                print(f"cannot read input: {exc}", file=sys.stderr)
                return EXIT_IO
            except UnsupportedMatrixKind:
                print(f"{path.name}\t{k}\tunsupported\t-\t-\t-")
                continue
            times[k].append(best)
            print(f"{path.name}\t{k}\t{sol.status}\t{sol.iterations}\t{sol.objective:.10g}\t{best:.4f}")
    for k in backends:
        print(f"# shifted geomean ({k}, shift {ns.shift:g}s): {shifted_geomean(times[k], ns.shift):.4f}s")
    return EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    level = getattr(ns, "log_level", "INFO")
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level), format="%(message)s", force=True)
    if ns.command == "generate":
        return _generate(ns)
    if ns.command == "bench":
        return _bench(ns)
    return run(_config(ns))


if __name__ == "__main__":
    sys.exit(main())
