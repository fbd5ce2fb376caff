"""Free-format MPS reader/writer and the plain-text solution format.

Solution text format::

    status Optimal
    objective <value>
    iterations <k>
    columns
    <name> <primal> <reduced cost>
    rows
    <name> <activity> <dual>

Infeasible problems replace ``columns``/``rows`` by ``primal_ray`` (one
``<name> <value>`` line per column) or ``dual_ray`` (one line per row).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .problem import GeneralLP, Solution, Status


class MpsSyntaxError(SyntaxError):
    def __init__(self, msg, lineno=None):
        super().__init__(f"line {lineno}: {msg}" if lineno else msg)
        self.lineno = lineno


class UnknownRowName(ValueError):
    pass


class UnsupportedSection(ValueError):
    pass


_SECTIONS = {"NAME", "OBJSENSE", "OBJSENS", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}


def _num(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise MpsSyntaxError(f"expected a number, got {tok!r}", lineno) from None


def parse_mps(text: str) -> GeneralLP:
    """Parse free-format MPS ``text`` into a :class:`GeneralLP`."""
    name = ""
    sense = "min"
    section = None
    row_names: list[str] = []
    row_type: list[str] = []
    row_index: dict[str, int] = {}
    obj_row = None
    col_names: list[str] = []
    col_index: dict[str, int] = {}
    cost: dict[int, float] = {}
    I: list[int] = []
    J: list[int] = []
    V: list[float] = []
    rhs: dict[int, float] = {}
    ranges: dict[int, float] = {}
    c0 = 0.0
    lower: dict[int, float] = {}
    upper: dict[int, float] = {}
    lo_set: set[int] = set()
    seen_end = False

    def row_of(tok, lineno):
        if tok == obj_row:
            return -1
        try:
            return row_index[tok]
        except KeyError:
            raise UnknownRowName(f"line {lineno}: unknown row {tok!r}") from None

    def col_of(tok):
        j = col_index.get(tok)
        if j is None:
            j = col_index[tok] = len(col_names)
            col_names.append(tok)
        return j

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        toks = line.split()
        if not raw[0].isspace():
            head = toks[0].upper()
            if head in _SECTIONS:
                section = head
                if head == "NAME":
                    name = " ".join(toks[1:])
                elif head in ("OBJSENSE", "OBJSENS") and len(toks) > 1:
                    sense = _parse_sense(toks[1], lineno)
                    section = None
                elif head == "ENDATA":
                    seen_end = True
                    break
                elif len(toks) > 1 and head not in ("RHS", "RANGES", "BOUNDS"):
                    raise MpsSyntaxError(f"unexpected tokens after {head}", lineno)
                continue
            raise UnsupportedSection(f"line {lineno}: section {toks[0]} is not supported")
        if section is None:
            raise MpsSyntaxError("data line outside of any section", lineno)
        if section in ("OBJSENSE", "OBJSENS"):
            sense = _parse_sense(toks[0], lineno)
        elif section == "ROWS":
            if len(toks) != 2:
                raise MpsSyntaxError("ROWS entries need a type and a name", lineno)
            t, rn = toks[0].upper(), toks[1]
            if t not in ("N", "E", "L", "G"):
                raise MpsSyntaxError(f"unknown row type {toks[0]!r}", lineno)
            if rn in row_index or rn == obj_row:
                raise MpsSyntaxError(f"duplicate row {rn!r}", lineno)
            if t == "N" and obj_row is None:
                obj_row = rn
                continue
            row_index[rn] = len(row_names)
            row_names.append(rn)
            row_type.append(t)
        elif section == "COLUMNS":
            if "'MARKER'" in toks or "MARKER" in (tk.strip("'").upper() for tk in toks[1:2]):
                raise UnsupportedSection(f"line {lineno}: integer markers are not supported")
            if len(toks) not in (3, 5):
                raise MpsSyntaxError("COLUMNS entries need a column and one or two (row, value) pairs", lineno)
            j = col_of(toks[0])
            for k in range(1, len(toks), 2):
                i = row_of(toks[k], lineno)
                v = _num(toks[k + 1], lineno)
                if i < 0:
                    cost[j] = cost.get(j, 0.0) + v
                else:
                    I.append(i)
                    J.append(j)
                    V.append(v)
        elif section in ("RHS", "RANGES"):
            body = toks[1:] if len(toks) % 2 == 1 else toks
            if len(body) not in (2, 4):
                raise MpsSyntaxError(f"malformed {section} entry", lineno)
            for k in range(0, len(body), 2):
                i = row_of(body[k], lineno)
                v = _num(body[k + 1], lineno)
                if section == "RHS":
                    if i < 0:
                        c0 = -v
                    else:
                        rhs[i] = v
                else:
                    if i < 0:
                        raise MpsSyntaxError("RANGES on the objective row", lineno)
                    ranges[i] = v
        elif section == "BOUNDS":
            t = toks[0].upper()
            if t in ("BV", "LI", "UI", "SC", "SI"):
                raise MpsSyntaxError(f"bound type {t} declares an integer variable; integers are not supported", lineno)
            if t in ("FR", "MI", "PL"):
                if len(toks) not in (2, 3):
                    raise MpsSyntaxError(f"malformed {t} bound", lineno)
                cname, val = toks[-1], None
            elif t in ("UP", "LO", "FX"):
                if len(toks) not in (3, 4):
                    raise MpsSyntaxError(f"malformed {t} bound", lineno)
                cname, val = toks[-2], _num(toks[-1], lineno)
            else:
                raise MpsSyntaxError(f"unknown bound type {toks[0]!r}", lineno)
            if cname not in col_index:
                raise MpsSyntaxError(f"bound on unknown column {cname!r}", lineno)
            j = col_index[cname]
            if t == "UP":
                upper[j] = val
                if val < 0 and j not in lo_set:
                    lower[j] = -math.inf
            elif t == "LO":
                lower[j] = val
                lo_set.add(j)
            elif t == "FX":
                lower[j] = upper[j] = val
                lo_set.add(j)
            elif t == "FR":
                lower[j], upper[j] = -math.inf, math.inf
                lo_set.add(j)
            elif t == "MI":
                lower[j] = -math.inf
                lo_set.add(j)
            elif t == "PL":
                upper[j] = math.inf
        elif section == "NAME":
            name = " ".join(toks)
    if obj_row is None and not row_names and not col_names:
        raise MpsSyntaxError("empty MPS document")
    if not seen_end:
        raise MpsSyntaxError("missing ENDATA")

    m, n = len(row_names), len(col_names)
    A = sp.csc_matrix((V, (I, J)), shape=(m, n), dtype=float)
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    rl = np.empty(m)
    ru = np.empty(m)
    for i, t in enumerate(row_type):
        b = rhs.get(i, 0.0)
        r = ranges.get(i)
        if t == "E":
            rl[i] = ru[i] = b
            if r is not None:
                if r >= 0:
                    ru[i] = b + r
                else:
                    rl[i] = b + r
        elif t == "L":
            rl[i], ru[i] = (-math.inf, b) if r is None else (b - abs(r), b)
        elif t == "G":
            rl[i], ru[i] = (b, math.inf) if r is None else (b, b + abs(r))
        else:
            rl[i], ru[i] = -math.inf, math.inf
    cl = np.zeros(n)
    cu = np.full(n, math.inf)
    for j, v in lower.items():
        cl[j] = v
    for j, v in upper.items():
        cu[j] = v
    return GeneralLP(c=c, A=A, row_lower=rl, row_upper=ru, col_lower=cl, col_upper=cu, c0=c0,
                     sense=sense, row_names=tuple(row_names), col_names=tuple(col_names), name=name)


def _parse_sense(tok, lineno):
    t = tok.upper()
    if t in ("MAX", "MAXIMIZE", "MAXIMISE"):
        return "max"
    if t in ("MIN", "MINIMIZE", "MINIMISE"):
        return "min"
    raise MpsSyntaxError(f"unknown objective sense {tok!r}", lineno)


def read_mps(path) -> GeneralLP:
    with open(path) as fh:
        return parse_mps(fh.read())


def write_mps(lp: GeneralLP) -> str:
    """Serialize ``lp`` as free-format MPS (inverse of :func:`parse_mps`)."""
    out = [f"NAME {lp.name}" if lp.name else "NAME"]
    if lp.sense == "max":
        out += ["OBJSENSE", "    MAX"]
    obj = "OBJ"
    while obj in lp.row_names:
        obj += "_"
    out += ["ROWS", f" N  {obj}"]
    kinds = []
    for i, rn in enumerate(lp.row_names):
        lo, hi = lp.row_lower[i], lp.row_upper[i]
        if lo == hi:
            t = "E"
        elif math.isfinite(hi) and math.isfinite(lo) and hi - (hi - lo) != lo and lo + (hi - lo) == hi:
            # anchor the range at whichever end reproduces both bounds exactly
            t = "G"
        elif math.isfinite(hi):
            t = "L"
        elif math.isfinite(lo):
            t = "G"
        else:
            t = "N"
        kinds.append(t)
        out.append(f" {t}  {rn}")
    out.append("COLUMNS")
    A = lp.A.tocsc()
    for j, cn in enumerate(lp.col_names):
        if lp.c[j] != 0 or A.indptr[j] == A.indptr[j + 1]:
            # empty columns are declared through an explicit objective entry
            out.append(f"    {cn}  {obj}  {float(lp.c[j])!r}")
        for p in range(A.indptr[j], A.indptr[j + 1]):
            out.append(f"    {cn}  {lp.row_names[A.indices[p]]}  {float(A.data[p])!r}")
    out.append("RHS")
    if lp.c0 != 0:
        out.append(f"    RHS  {obj}  {-float(lp.c0)!r}")
    rng = []
    for i, t in enumerate(kinds):
        lo, hi = lp.row_lower[i], lp.row_upper[i]
        b = {"E": lo, "L": hi, "G": lo}.get(t, 0.0)
        if b != 0:
            out.append(f"    RHS  {lp.row_names[i]}  {float(b)!r}")
        if t in ("L", "G") and math.isfinite(lo) and math.isfinite(hi):
            rng.append(f"    RNG  {lp.row_names[i]}  {float(hi - lo)!r}")
    if rng:
        out.append("RANGES")
        out += rng
    bnd = []
    for j, cn in enumerate(lp.col_names):
        lo, hi = lp.col_lower[j], lp.col_upper[j]
        if lo == hi:
            bnd.append(f" FX BND  {cn}  {float(lo)!r}")
            continue
        if lo == -math.inf and hi == math.inf:
            bnd.append(f" FR BND  {cn}")
            continue
        if lo == -math.inf:
            bnd.append(f" MI BND  {cn}")
        elif lo != 0 or hi < 0:
            bnd.append(f" LO BND  {cn}  {float(lo)!r}")
        if hi != math.inf:
            bnd.append(f" UP BND  {cn}  {float(hi)!r}")
    if bnd:
        out.append("BOUNDS")
        out += bnd
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _names(names, m, n):
    if isinstance(names, GeneralLP):
        return list(names.row_names), list(names.col_names)
    rows, cols = names if names else ((), ())
    rows = list(rows) or [f"R{i + 1}" for i in range(m)]
    cols = list(cols) or [f"C{j + 1}" for j in range(n)]
    return rows, cols


def write_solution(sol: Solution, names=None) -> str:
    """Render ``sol`` in the solution text format.

    ``names`` is a :class:`GeneralLP` (which also enables row activities), a
    ``(row_names, col_names)`` pair, or ``None`` for synthesized names.
    """
    def size(v):
        return 0 if v is None else len(v)

    m = max(size(sol.y), size(sol.dual_ray))
    n = max(size(sol.x), size(sol.primal_ray), size(sol.s))
    if isinstance(names, GeneralLP):
        m, n = names.m, names.n
    rows, cols = _names(names, m, n)
    out = [f"status {sol.status.name}"]
    if sol.status is Status.Optimal or (sol.x is not None and sol.status not in (Status.PrimalInfeasible, Status.DualInfeasible)):
        out.append(f"objective {float(sol.objective)!r}")
    out.append(f"iterations {sol.iterations}")
    if sol.status is Status.PrimalInfeasible and sol.dual_ray is not None:
        out.append("dual_ray")
        out += [f"{rows[i]} {float(v)!r}" for i, v in enumerate(sol.dual_ray)]
        return "\n".join(out) + "\n"
    if sol.status is Status.DualInfeasible and sol.primal_ray is not None:
        out.append("primal_ray")
        out += [f"{cols[j]} {float(v)!r}" for j, v in enumerate(sol.primal_ray)]
        return "\n".join(out) + "\n"
    if sol.x is not None:
        out.append("columns")
        s = sol.s if sol.s is not None else [math.nan] * len(sol.x)
        out += [f"{cols[j]} {float(sol.x[j])!r} {float(s[j])!r}" for j in range(len(sol.x))]
    if sol.y is not None:
        out.append("rows")
        act = names.A @ np.asarray(sol.x, dtype=float) if isinstance(names, GeneralLP) and sol.x is not None else None
        for i in range(len(sol.y)):
            a = f"{float(act[i])!r}" if act is not None else "-"
            out.append(f"{rows[i]} {a} {float(sol.y[i])!r}")
    return "\n".join(out) + "\n"
