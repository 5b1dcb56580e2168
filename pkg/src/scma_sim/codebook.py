"""SCMA codebooks: file format, validation, symbol encoding, superposition.

A codebook set holds one K x M complex matrix per user.  Each user's matrix
is nonzero on exactly N of the K rows (the user's resource footprint), which
is what makes the multiple access "sparse".  Symbol and user indices are
1-based everywhere in the public API, matching the bundled file format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "Codebook",
    "CodebookSet",
    "CodebookFormatError",
    "GraphCheck",
    "ValidationReport",
    "load_codebook_set",
    "load_codebook_file",
    "builtin_codebook_text",
    "load_builtin",
    "encode",
    "symbol_from_bits",
    "superpose",
    "validate_against_graph",
    "format_codebook_set",
    "parse_complex_literal",
    "format_complex_literal",
]

BUILTIN_NAMES = ("table1", "table2")


class CodebookFormatError(ValueError):
    """Raised when codebook file content is malformed or violates sparsity."""


_FLOAT = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_RE_FULL = re.compile(rf"^(?P<re>[+-]?{_FLOAT})(?P<im>[+-]{_FLOAT})i$")
_RE_IMAG = re.compile(rf"^(?P<im>[+-]?{_FLOAT})i$")
_RE_REAL = re.compile(rf"^(?P<re>[+-]?{_FLOAT})$")


def parse_complex_literal(token: str) -> complex:
    """Parse one complex literal of the form ``a``, ``bi``, ``a+bi`` or ``a-bi``."""
    tok = token.strip()
    m = _RE_FULL.match(tok)
    if m:
        return complex(float(m.group("re")), float(m.group("im")))
    m = _RE_IMAG.match(tok)
    if m:
        return complex(0.0, float(m.group("im")))
    m = _RE_REAL.match(tok)
    if m:
        return complex(float(m.group("re")), 0.0)
    raise CodebookFormatError(f"bad complex literal: {token!r}")


def format_complex_literal(z: complex, ndigits: int = 6) -> str:
    """Inverse of parse_complex_literal, shortest form with ``ndigits`` precision."""
    re_s = f"{z.real:.{ndigits}g}"
    im_s = f"{z.imag:.{ndigits}g}"
    if z.imag == 0.0:
        return re_s
    if z.real == 0.0:
        return f"{im_s}i"
    sign = "+" if z.imag > 0 else ""
    return f"{re_s}{sign}{im_s}i"


@dataclass(frozen=True, eq=False)
class Codebook:
    """One user's codebook: a K x M complex matrix, nonzero on N rows only.

    Column m is the codeword transmitted for data symbol m (1-based).
    """

    user_id: int
    entries: np.ndarray          # (K, M) complex
    nonzero_rows: tuple[int, ...]  # 1-based row indices, ascending

    @property
    def resource_count(self) -> int:
        return self.entries.shape[0]

    @property
    def modulation_order(self) -> int:
        return self.entries.shape[1]

    @property
    def n(self) -> int:
        """Number of occupied resource rows."""
        return len(self.nonzero_rows)

    def codeword(self, symbol: int) -> np.ndarray:
        """Column ``symbol`` (1-based) as a length-K vector."""
        if not 1 <= symbol <= self.modulation_order:
            raise ValueError(
                f"symbol {symbol} out of range 1..{self.modulation_order}")
        return self.entries[:, symbol - 1]

    def average_codeword_energy(self) -> float:
        """(1/M) sum_m ||x_m||^2 over the M codewords."""
        return float(np.mean(np.sum(np.abs(self.entries) ** 2, axis=0)))


@dataclass(frozen=True, eq=False)
class CodebookSet:
    """All J user codebooks of one system; immutable and shareable."""

    codebooks: tuple[Codebook, ...]

    @property
    def user_count(self) -> int:
        return len(self.codebooks)

    @property
    def resource_count(self) -> int:
        return self.codebooks[0].resource_count

    @property
    def modulation_order(self) -> int:
        return self.codebooks[0].modulation_order

    def codebook(self, user: int) -> Codebook:
        if not 1 <= user <= self.user_count:
            raise ValueError(f"user {user} out of range 1..{self.user_count}")
        return self.codebooks[user - 1]

    def sparsity_matrix(self) -> np.ndarray:
        """K x J binary matrix with a 1 where user j occupies resource k."""
        f = np.zeros((self.resource_count, self.user_count), dtype=np.int8)
        for j, cb in enumerate(self.codebooks):
            for k in cb.nonzero_rows:
                f[k - 1, j] = 1
        return f

    def resource_degrees(self) -> np.ndarray:
        """Number of colliding users per resource (d_f when regular)."""
        return self.sparsity_matrix().sum(axis=1)

    def as_array(self) -> np.ndarray:
        """(J, M, K) codeword tensor: [j, m] is user j+1's codeword for symbol m+1."""
        return np.stack([cb.entries.T for cb in self.codebooks])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def _build_codebook(user_id: int, entries: np.ndarray) -> Codebook:
    k, m = entries.shape
    nonzero = np.abs(entries) > 0.0
    row_any = nonzero.any(axis=1)
    row_all = nonzero.all(axis=1)
    bad = np.flatnonzero(row_any & ~row_all)
    if bad.size:
        raise CodebookFormatError(
            f"user {user_id}: sparsity violated, row {bad[0] + 1} is nonzero "
            "in some columns only")
    if not nonzero.any(axis=0).all():
        col = int(np.flatnonzero(~nonzero.any(axis=0))[0]) + 1
        raise CodebookFormatError(f"user {user_id}: column {col} is all zero")
    rows = tuple(int(r) + 1 for r in np.flatnonzero(row_any))
    n = len(rows)
    if not (m >= 2 and k >= 2 and 1 <= n < k):
        raise CodebookFormatError(
            f"user {user_id}: invalid dimensions K={k}, M={m}, N={n}")
    return Codebook(user_id=user_id, entries=_freeze(entries), nonzero_rows=rows)


def load_codebook_set(source: str) -> CodebookSet:
    """Parse codebook file content (see the data/*.cbk grammar) and validate it.

    Raises CodebookFormatError on parse failure, dimension mismatch across
    users, an all-zero codeword column, or a violated sparsity pattern.
    """
    lines = []
    for raw in source.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if len(lines) < 3:
        raise CodebookFormatError("missing J/K/M header")

    header = {}
    for key, line in zip(("J", "K", "M"), lines[:3]):
        parts = line.split()
        if len(parts) != 2 or parts[0] != key:
            raise CodebookFormatError(f"expected header '{key} <int>', got {line!r}")
        try:
            header[key] = int(parts[1])
        except ValueError as exc:
            raise CodebookFormatError(f"bad header value in {line!r}") from exc
    j_total, k_total, m_total = header["J"], header["K"], header["M"]
    if j_total < 1 or k_total < 2 or m_total < 2:
        raise CodebookFormatError(f"invalid header J={j_total} K={k_total} M={m_total}")

    books = []
    pos = 3
    for expect_id in range(1, j_total + 1):
        if pos >= len(lines) or lines[pos].split() != ["user", str(expect_id)]:
            got = lines[pos] if pos < len(lines) else "<eof>"
            raise CodebookFormatError(f"expected 'user {expect_id}', got {got!r}")
        pos += 1
        rows = []
        for r in range(k_total):
            if pos >= len(lines) or lines[pos].split()[0] == "user":
                raise CodebookFormatError(
                    f"user {expect_id}: dimension mismatch, expected "
                    f"{k_total} rows but block ended after {r}")
            tokens = lines[pos].split()
            if len(tokens) != m_total:
                raise CodebookFormatError(
                    f"user {expect_id}: dimension mismatch, row {r + 1} has "
                    f"{len(tokens)} entries, expected {m_total}")
            rows.append([parse_complex_literal(t) for t in tokens])
            pos += 1
        entries = np.array(rows, dtype=complex)
        books.append(_build_codebook(expect_id, entries))
    if pos != len(lines):
        raise CodebookFormatError(f"trailing content after user {j_total}: {lines[pos]!r}")
    return CodebookSet(codebooks=tuple(books))


def load_codebook_file(path) -> CodebookSet:
    with open(path, "r", encoding="utf-8") as fh:
        return load_codebook_set(fh.read())


def builtin_codebook_text(name: str) -> str:
    """Content of a bundled codebook file ('table1' or 'table2')."""
    if name not in BUILTIN_NAMES:
        raise ValueError(f"unknown builtin codebook {name!r}, expected one of {BUILTIN_NAMES}")
    return resources.files("scma_sim").joinpath(f"data/{name}.cbk").read_text()


def load_builtin(name: str) -> CodebookSet:
    return load_codebook_set(builtin_codebook_text(name))


def format_codebook_set(cbs: CodebookSet, header_comment: str = "", ndigits: int = 6) -> str:
    """Serialize a CodebookSet back into the file grammar."""
    out = []
    if header_comment:
        out.extend(f"# {line}" for line in header_comment.splitlines())
    out += [f"J {cbs.user_count}", f"K {cbs.resource_count}", f"M {cbs.modulation_order}"]
    for cb in cbs.codebooks:
        out.append(f"user {cb.user_id}")
        for row in cb.entries:
            out.append(" ".join(format_complex_literal(z, ndigits) for z in row))
    return "\n".join(out) + "\n"


def encode(cbs: CodebookSet, user: int, symbol: int) -> np.ndarray:
    """Codeword of ``user`` for data ``symbol``, both 1-based.

    Bit convention for M=4: symbol 1 carries bits [0,0], 2 carries [0,1],
    3 carries [1,0], 4 carries [1,1].
    """
    return cbs.codebook(user).codeword(symbol)


def symbol_from_bits(bits) -> int:
    """1-based symbol index for a bit tuple, MSB first (e.g. [1,0] -> 3)."""
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"bits must be 0/1, got {bits!r}")
        value = (value << 1) | b
    return value + 1


def superpose(codewords, powers) -> np.ndarray:
    """sum_j sqrt(P_j) x_j over equal-length codewords."""
    cws = [np.asarray(c, dtype=complex) for c in codewords]
    p = np.asarray(powers, dtype=float)
    if len(cws) != p.shape[0]:
        raise ValueError(f"{len(cws)} codewords but {p.shape[0]} powers")
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    k = cws[0].shape[0]
    for c in cws:
        if c.shape != (k,):
            raise ValueError("codeword length mismatch")
    out = np.zeros(k, dtype=complex)
    for c, pj in zip(cws, p):
        out += np.sqrt(pj) * c
    return out


@dataclass(frozen=True)
class GraphCheck:
    user_id: int
    expected_rows: tuple[int, ...]
    actual_rows: tuple[int, ...]
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    """Per-user sparsity-vs-graph checks plus average codeword energies."""

    checks: tuple[GraphCheck, ...]
    avg_codeword_energy: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_users(self) -> tuple[int, ...]:
        return tuple(c.user_id for c in self.checks if not c.passed)


def validate_against_graph(cbs: CodebookSet, fg) -> ValidationReport:
    """Check every codebook's footprint against the factor graph's columns.

    ``fg`` is a FactorGraph; its matrix must be K x J for this set.
    """
    if fg.resource_count != cbs.resource_count or fg.user_count != cbs.user_count:
        raise ValueError(
            f"graph is {fg.resource_count}x{fg.user_count}, codebooks are "
            f"{cbs.resource_count}x{cbs.user_count}")
    checks = []
    for j, cb in enumerate(cbs.codebooks, start=1):
        expected = fg.user_neighbors[j - 1]
        checks.append(GraphCheck(
            user_id=j,
            expected_rows=expected,
            actual_rows=cb.nonzero_rows,
            passed=expected == cb.nonzero_rows,
        ))
    energies = tuple(cb.average_codeword_energy() for cb in cbs.codebooks)
    return ValidationReport(checks=tuple(checks), avg_codeword_energy=energies)
