"""Instance files, random instance generation, and machine-readable reports.

The text format is line oriented: a header line, scalar fields, then sparse
triplets, one entry per line.  Floats are written with ``repr`` so parsing
followed by serialization is the identity.  Reports are JSON documents with
a ``schema_version`` field; benchmark aggregates use shifted geometric
means with the customary shifts of 1 second, 100 nodes, and 1 percent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import Box, ExponentVector, SignomialProgram

HEADER = "signomial-program"
SCHEMA_VERSION = 1

SGM_SHIFT_TIME = 1.0
SGM_SHIFT_NODES = 100.0
SGM_SHIFT_GAP = 0.01


class InstanceFormatError(ValueError):
    """Parse failure with the offending line and token."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _parse_float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise InstanceFormatError(line_no, f"bad float token {token!r}") from None


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceFormatError(line_no, f"bad integer token {token!r}") from None


def parse_text(text: str) -> SignomialProgram:
    """Parse an instance document; diagnostics carry line numbers."""
    scalars: dict[str, int] = {}
    c_entries: list[tuple[int, float]] = []
    a_entries: list[tuple[int, int, float]] = []
    b_entries: list[tuple[int, int, float]] = []
    d_entries: list[tuple[int, float]] = []
    term_entries: list[tuple[int, int, float]] = []
    bound_entries: list[tuple[int, float, float]] = []
    saw_header = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0]
        if not saw_header:
            if key != HEADER:
                raise InstanceFormatError(line_no, f"expected {HEADER!r} header, got {key!r}")
            if len(tokens) != 2 or _parse_int(tokens[1], line_no) != SCHEMA_VERSION:
                raise InstanceFormatError(line_no, "unsupported schema version")
            saw_header = True
            continue
        if key in ("n", "k", "m"):
            if len(tokens) != 2:
                raise InstanceFormatError(line_no, f"{key} takes one integer")
            scalars[key] = _parse_int(tokens[1], line_no)
        elif key == "c":
            if len(tokens) != 3:
                raise InstanceFormatError(line_no, "c takes: var value")
            c_entries.append((_parse_int(tokens[1], line_no), _parse_float(tokens[2], line_no)))
        elif key == "A":
            if len(tokens) != 4:
                raise InstanceFormatError(line_no, "A takes: row var value")
            a_entries.append((_parse_int(tokens[1], line_no), _parse_int(tokens[2], line_no),
                              _parse_float(tokens[3], line_no)))
        elif key == "B":
            if len(tokens) != 4:
                raise InstanceFormatError(line_no, "B takes: row term value")
            b_entries.append((_parse_int(tokens[1], line_no), _parse_int(tokens[2], line_no),
                              _parse_float(tokens[3], line_no)))
        elif key == "d":
            if len(tokens) != 3:
                raise InstanceFormatError(line_no, "d takes: row value")
            d_entries.append((_parse_int(tokens[1], line_no), _parse_float(tokens[2], line_no)))
        elif key == "term":
            if len(tokens) != 4:
                raise InstanceFormatError(line_no, "term takes: term var exponent")
            term_entries.append((_parse_int(tokens[1], line_no), _parse_int(tokens[2], line_no),
                                 _parse_float(tokens[3], line_no)))
        elif key == "bounds":
            if len(tokens) != 4:
                raise InstanceFormatError(line_no, "bounds takes: var lower upper")
            bound_entries.append((_parse_int(tokens[1], line_no), _parse_float(tokens[2], line_no),
                                  _parse_float(tokens[3], line_no)))
        else:
            raise InstanceFormatError(line_no, f"unknown field {key!r}")

    if not saw_header:
        raise InstanceFormatError(0, "empty document")
    for need in ("n", "k", "m"):
        if need not in scalars:
            raise InstanceFormatError(0, f"missing scalar field {need!r}")
    n, k, m = scalars["n"], scalars["k"], scalars["m"]

    c = np.zeros(n)
    for j, v in c_entries:
        if not 0 <= j < n:
            raise InstanceFormatError(0, f"objective index {j} outside [0, {n})")
        c[j] = v
    A = np.zeros((m, n))
    for i, j, v in a_entries:
        if not (0 <= i < m and 0 <= j < n):
            raise InstanceFormatError(0, f"A entry ({i}, {j}) out of range")
        A[i, j] = v
    Bmat = np.zeros((m, k))
    for i, t, v in b_entries:
        if not (0 <= i < m and 0 <= t < k):
            raise InstanceFormatError(0, f"B entry ({i}, {t}) out of range")
        Bmat[i, t] = v
    d = np.zeros(m)
    for i, v in d_entries:
        if not 0 <= i < m:
            raise InstanceFormatError(0, f"d index {i} outside [0, {m})")
        d[i] = v
    term_maps: list[dict[int, float]] = [dict() for _ in range(k)]
    for t, j, v in term_entries:
        if not 0 <= t < k:
            raise InstanceFormatError(0, f"term index {t} outside [0, {k})")
        if not 0 <= j < n:
            raise InstanceFormatError(0, f"term {t} references variable {j} outside [0, {n})")
        term_maps[t][j] = v
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    for j, lo, hi in bound_entries:
        if not 0 <= j < n:
            raise InstanceFormatError(0, f"bounds index {j} outside [0, {n})")
        lower[j], upper[j] = lo, hi
    terms = tuple(ExponentVector.from_map(tm) for tm in term_maps)
    return SignomialProgram(n, k, m, c, A, Bmat, d, terms, Box(lower, upper))


def serialize(program: SignomialProgram) -> str:
    """Canonical text form; stable ordering, repr floats (round-trip exact)."""
    out = [f"{HEADER} {SCHEMA_VERSION}"]
    out.append(f"n {program.n}")
    out.append(f"k {program.k}")
    out.append(f"m {program.m}")
    for j in range(program.n):
        if program.c[j] != 0.0:
            out.append(f"c {j} {float(program.c[j])!r}")
    for i in range(program.m):
        for j in range(program.n):
            if program.A[i, j] != 0.0:
                out.append(f"A {i} {j} {float(program.A[i, j])!r}")
    for i in range(program.m):
        for t in range(program.k):
            if program.Bmat[i, t] != 0.0:
                out.append(f"B {i} {t} {float(program.Bmat[i, t])!r}")
    for i in range(program.m):
        out.append(f"d {i} {float(program.d[i])!r}")
    for t, term in enumerate(program.terms):
        for j, a in zip(term.indices, term.exponents):
            out.append(f"term {t} {j} {float(a)!r}")
    for j in range(program.n):
        out.append(
            f"bounds {j} {float(program.bounds.lower[j])!r} {float(program.bounds.upper[j])!r}"
        )
    return "\n".join(out) + "\n"


def read_instance(path) -> SignomialProgram:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_text(fh.read())


def write_instance(path, program: SignomialProgram) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(program))


def generate(
    seed: int,
    n: int,
    k: int,
    max_degree: int = 3,
    density: float = 0.7,
    m: int | None = None,
) -> SignomialProgram:
    """Reproducible random instance, feasible by construction.

    Exponents are nonzero integers up to ``max_degree`` in magnitude on a
    random support; bounds sit inside [0.1, 5]; each row's right-hand side
    is the row value at a sampled interior point plus positive slack, so
    that point stays feasible.
    """
    if min(n, k, max_degree) < 1 or not 0.0 < density <= 1.0:
        raise ValueError("generator parameters must be positive")
    rng = np.random.default_rng(seed)
    if m is None:
        m = max(1, n - 1)
    lower = rng.uniform(0.1, 1.5, n)
    upper = lower + rng.uniform(0.5, 3.5, n)
    upper = np.minimum(upper, 5.0)
    terms = []
    for _ in range(k):
        support = np.nonzero(rng.random(n) < density)[0]
        if support.size == 0:
            support = np.array([rng.integers(0, n)])
        magnitudes = rng.integers(1, max_degree + 1, support.size)
        signs = rng.choice([-1.0, 1.0], support.size)
        terms.append(ExponentVector.from_map(
            {int(j): float(s * mag) for j, s, mag in zip(support, signs, magnitudes)}
        ))
    c = rng.uniform(-1.0, 1.0, n).round(6)
    A = np.where(rng.random((m, n)) < density, rng.uniform(-1.0, 1.0, (m, n)), 0.0).round(6)
    Bmat = np.where(rng.random((m, k)) < density, rng.uniform(-1.0, 1.0, (m, k)), 0.0).round(6)
    program_stub = SignomialProgram(
        n, k, m, c, A, Bmat, np.zeros(m), tuple(terms), Box(lower, upper)
    )
    x0 = rng.uniform(lower, upper)
    d = A @ x0 + Bmat @ program_stub.term_values(x0) + rng.uniform(0.1, 1.0, m)
    return SignomialProgram(n, k, m, c, A, Bmat, d.round(6), tuple(terms), Box(lower, upper))


def shifted_geometric_mean(values, shift: float) -> float:
    """``exp(mean(log(x + shift))) - shift`` over nonnegative values."""
    values = [float(v) for v in values]
    if not values:
        return 0.0
    if any(v + shift <= 0.0 for v in values):
        raise ValueError("shifted values must be positive")
    return math.exp(sum(math.log(v + shift) for v in values) / len(values)) - shift


@dataclass(frozen=True)
class BenchResult:
    """Per-mode aggregates over an instance list."""

    mode: str
    per_instance: list[dict]

    def sgm(self, key: str, shift: float) -> float:
        return shifted_geometric_mean([r[key] for r in self.per_instance], shift)


def solve_report_document(report_dict: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, "solve_report": report_dict}, indent=2)


def bench_document(results: list[BenchResult]) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "modes": {}}
    base_nodes = None
    for res in results:
        nodes = res.sgm("node_count", SGM_SHIFT_NODES)
        seconds = res.sgm("wall_time", SGM_SHIFT_TIME)
        gap = res.sgm("rel_gap_pct", SGM_SHIFT_GAP * 100.0)
        if res.mode == "disable":
            base_nodes = nodes
        doc["modes"][res.mode] = {
            "sgm_nodes": nodes,
            "sgm_time": seconds,
            "sgm_gap_pct": gap,
            "instances": res.per_instance,
        }
    if base_nodes:
        for mode in doc["modes"].values():
            mode["nodes_vs_disable"] = mode["sgm_nodes"] / base_nodes
    return json.dumps(doc, indent=2)
