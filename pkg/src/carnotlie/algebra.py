"""Stratified nilpotent Lie algebras over the rationals.

A :class:`StratifiedAlgebra` stores structure constants ``[e_i, e_j] =
sum_k c[i][j][k] e_k`` in a sparse table together with a partition of the
basis into strata ``V_1, ..., V_s``.  The basis is always adapted to the
strata.  Nothing here uses floating point.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linalg import Subspace, Vector

Table = Mapping[tuple[int, int], Mapping[int, Fraction]]


class StructureError(ValueError):
    """Malformed input (bad indices, unknown names); not a mathematical defect."""


class StratificationError(ValueError):
    """A proposed first stratum does not generate a stratification."""


class ParseError(StructureError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class StratifiedAlgebra:
    dim: int
    basis_names: tuple[str, ...]
    structure_constants: dict[tuple[int, int], dict[int, Fraction]]
    strata: tuple[tuple[int, ...], ...]
    name: str = ""
    _weights: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if len(self.basis_names) != self.dim:
            raise StructureError(f"{len(self.basis_names)} basis names for dim {self.dim}")
        for (i, j), row in self.structure_constants.items():
            for k in row:
                if not all(0 <= t < self.dim for t in (i, j, k)):
                    raise StructureError(f"structure constant index ({i},{j},{k}) out of range")
        w = [0] * self.dim
        for s, idx in enumerate(self.strata, start=1):
            for i in idx:
                if not 0 <= i < self.dim:
                    raise StructureError(f"stratum index {i} out of range")
                w[i] = s
        object.__setattr__(self, "_weights", tuple(w))

    def __hash__(self):
        table = frozenset(
            (key, frozenset(row.items())) for key, row in self.structure_constants.items()
        )
        return hash((self.dim, self.basis_names, self.strata, table))

    @classmethod
    def from_brackets(
        cls,
        names: Sequence[str],
        brackets: Mapping[tuple[str, str], Mapping[str, object]],
        strata: Sequence[Sequence[str]],
        name: str = "",
    ) -> "StratifiedAlgebra":
        """Build from name-level data; ``[b, a]`` is filled in by antisymmetry."""
        pos = {n: i for i, n in enumerate(names)}

        def idx(n):
            try:
                return pos[n]
            except KeyError:
                raise StructureError(f"unknown basis element {n!r}") from None

        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (a, b), rhs in brackets.items():
            i, j = idx(a), idx(b)
            row = {idx(k): Fraction(v) for k, v in rhs.items() if Fraction(v)}
            neg = {k: -v for k, v in row.items()}
            if (i, j) in table and table[(i, j)] != row:
                raise StructureError(f"inconsistent brackets given for [{a},{b}]")
            if i == j and row:
                raise StructureError(f"[{a},{a}] must vanish")
            table[(i, j)] = row
            table[(j, i)] = neg
        table = {k: v for k, v in table.items() if v}
        return cls(
            len(names),
            tuple(names),
            table,
            tuple(tuple(idx(n) for n in s) for s in strata),
            name,
        )

    @property
    def step(self) -> int:
        return len(self.strata)

    @property
    def weights(self) -> tuple[int, ...]:
        """Stratum number (1-based) of each basis vector."""
        return self._weights

    @property
    def strata_dims(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strata)

    def stratum_position(self, i: int) -> int:
        return self.strata[self._weights[i] - 1].index(i)

    def c(self, i: int, j: int) -> Mapping[int, Fraction]:
        return self.structure_constants.get((i, j), {})

    def basis_vector(self, i: int) -> Vector:
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    def bracket(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vector:
        return bracket_vec(x, y, self)

    def index(self, name: str) -> int:
        try:
            return self.basis_names.index(name)
        except ValueError:
            raise StructureError(f"unknown basis element {name!r}") from None


def bracket_vec(x: Sequence[Fraction], y: Sequence[Fraction], alg: StratifiedAlgebra) -> Vector:
    """Bilinear extension of the structure constants."""
    if len(x) != alg.dim or len(y) != alg.dim:
        raise ValueError(f"vectors must have length {alg.dim}")
    out = [Fraction(0)] * alg.dim
    for (i, j), row in alg.structure_constants.items():
        xi, yj = x[i], y[j]
        if xi and yj:
            f = xi * yj
            for k, v in row.items():
                out[k] += f * v
    return tuple(out)


def _bracket_span(alg: StratifiedAlgebra, a: Subspace, b: Subspace) -> Subspace:
    return Subspace.span(
        [bracket_vec(u, v, alg) for u in a.basis for v in b.basis], alg.dim
    )


def _check_indices(alg: StratifiedAlgebra) -> None:
    for (i, j), row in alg.structure_constants.items():
        for k in row:
            if not all(0 <= t < alg.dim for t in (i, j, k)):
                raise StructureError(f"structure constant index ({i},{j},{k}) out of range")


def validate(alg: StratifiedAlgebra) -> list[str]:
    """Every violated identity of a stratified nilpotent algebra; empty if valid.

    Raises :class:`StructureError` for malformed tables.
    """
    _check_indices(alg)
    n = alg.dim
    names = alg.basis_names
    report: list[str] = []

    for i in range(n):
        if alg.c(i, i):
            report.append(f"antisymmetry: [{names[i]},{names[i]}] != 0")
        for j in range(i + 1, n):
            a, b = alg.c(i, j), alg.c(j, i)
            for k in set(a) | set(b):
                if a.get(k, 0) != -b.get(k, 0):
                    report.append(
                        f"antisymmetry: c[{names[i]}][{names[j]}][{names[k]}]={a.get(k, 0)}"
                        f" but c[{names[j]}][{names[i]}][{names[k]}]={b.get(k, 0)}"
                    )

    # Jacobi on i<j<k
    basis = [alg.basis_vector(i) for i in range(n)]
    for i, j, k in itertools.combinations(range(n), 3):
        ei, ej, ek = basis[i], basis[j], basis[k]
        t1 = bracket_vec(ei, bracket_vec(ej, ek, alg), alg)
        t2 = bracket_vec(ej, bracket_vec(ek, ei, alg), alg)
        t3 = bracket_vec(ek, bracket_vec(ei, ej, alg), alg)
        defect = [a + b + c for a, b, c in zip(t1, t2, t3)]
        if any(defect):
            terms = " + ".join(f"{v}*{names[m]}" for m, v in enumerate(defect) if v)
            report.append(f"Jacobi fails on ({names[i]},{names[j]},{names[k]}): defect {terms}")

    seen = sorted(itertools.chain.from_iterable(alg.strata))
    if seen != list(range(n)):
        report.append("strata do not partition the basis")
        return report
    if any(len(s) == 0 for s in alg.strata):
        report.append("empty stratum")

    w = alg.weights
    s = alg.step
    for (i, j), row in alg.structure_constants.items():
        if i > j:
            continue
        for k, v in row.items():
            if w[k] != w[i] + w[j]:
                target = f"V{w[i] + w[j]}" if w[i] + w[j] <= s else "0"
                report.append(
                    f"grading: [{names[i]},{names[j]}] has {names[k]}-component {v}"
                    f" (in V{w[k]}), expected in {target}"
                )

    strata = [Subspace.coordinate(st, n) for st in alg.strata]
    for j in range(1, s):
        generated = _bracket_span(alg, strata[0], strata[j - 1])
        if generated != strata[j]:
            report.append(
                f"stratification: V{j + 1} != [V1,V{j}] (dim V{j + 1}={strata[j].dim},"
                f" dim [V1,V{j}]={generated.dim})"
            )
    if s >= 1 and not report:
        top = _bracket_span(alg, strata[0], strata[s - 1])
        if top.dim:
            report.append(f"nilpotency: [V1,V{s}] != 0")
    return report


def lower_central_series(alg: StratifiedAlgebra) -> list[Subspace]:
    """g, [g,g], [g,[g,g]], ... up to and including the first repeated term."""
    _check_indices(alg)
    full = Subspace.full(alg.dim)
    series = [full]
    while True:
        nxt = _bracket_span(alg, full, series[-1])
        series.append(nxt)
        if nxt == series[-2] or nxt.dim == 0:
            if nxt == series[-2] and nxt.dim:
                series.pop()
            return series


def infer_stratification(alg: StratifiedAlgebra, v1: Subspace) -> list[Subspace]:
    """Strata ``V_j = [V_1, V_{j-1}]`` generated by ``v1``.

    Raises :class:`StratificationError` when the ``V_j`` overlap
    ("not a direct sum") or fail to span the algebra ("not bracket-generating").
    """
    if v1.ambient_dim != alg.dim:
        raise ValueError("V1 lives in the wrong ambient space")
    strata = [v1]
    total = v1
    while True:
        nxt = _bracket_span(alg, v1, strata[-1])
        if nxt.dim == 0:
            break
        new_total = total + nxt
        if new_total.dim != total.dim + nxt.dim:
            k = len(strata)
            earlier = "V1" if k == 1 else f"V1+...+V{k}"
            raise StratificationError(f"not a direct sum: V{k + 1} meets {earlier}")
        strata.append(nxt)
        total = new_total
    if total.dim != alg.dim:
        raise StratificationError(
            f"not bracket-generating: V1 generates a {total.dim}-dimensional subspace of {alg.dim}"
        )
    return strata


def strata_indices(alg: StratifiedAlgebra, strata: Sequence[Subspace]) -> tuple[tuple[int, ...], ...]:
    """Express subspace strata as basis index sets; requires an adapted basis."""
    out = []
    for sub in strata:
        idx = tuple(i for i in range(alg.dim) if sub.contains(alg.basis_vector(i)))
        out.append(idx)
    if sum(len(t) for t in out) != alg.dim:
        raise StructureError("basis is not adapted to the stratification")
    return tuple(out)


# ---------------------------------------------------------------------------
# free nilpotent algebras


def witt_dimension(m: int, n: int) -> int:
    """Dimension of the degree-n part of the free Lie algebra on m generators."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _mobius(d) * m ** (n // d)
    return total // n


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


@dataclass(frozen=True)
class HallBasis:
    """Hall basis of the free nilpotent Lie algebra, in Marshall Hall's convention.

    Element ``t`` is either a generator (``left[t] is None``) or the bracket
    ``[left[t], right[t]]`` with ``left > right`` and, when ``left`` is itself
    ``[a, b]``, ``b <= right``.  Elements are numbered by degree, then
    lexicographically by ``(left, right)``.
    """

    generators: int
    step: int
    degree: tuple[int, ...]
    left: tuple[int | None, ...]
    right: tuple[int | None, ...]

    def word(self, t: int) -> str:
        if self.left[t] is None:
            return f"X{t + 1}"
        return f"[{self.word(self.left[t])},{self.word(self.right[t])}]"


def hall_basis(m: int, s: int) -> HallBasis:
    degree, left, right = [], [], []
    for g in range(m):
        degree.append(1)
        left.append(None)
        right.append(None)
    for n in range(2, s + 1):
        count = len(degree)
        for a in range(count):
            for b in range(count):
                if degree[a] + degree[b] != n or a <= b:
                    continue
                if left[a] is not None and right[a] > b:
                    continue
                degree.append(n)
                left.append(a)
                right.append(b)
    return HallBasis(m, s, tuple(degree), tuple(left), tuple(right))


class _HallRewriter:
    """Expresses brackets of Hall elements in the Hall basis."""

    def __init__(self, hb: HallBasis):
        self.hb = hb
        self.index = {(l, r): t for t, (l, r) in enumerate(zip(hb.left, hb.right)) if l is not None}
        self.memo: dict[tuple[int, int], dict[int, Fraction]] = {}

    def bracket(self, a: int, b: int) -> dict[int, Fraction]:
        hb = self.hb
        if a == b or hb.degree[a] + hb.degree[b] > hb.step:
            return {}
        key = (a, b)
        if key in self.memo:
            return self.memo[key]
        if a < b:
            res = {k: -v for k, v in self.bracket(b, a).items()}
        elif hb.left[a] is None or hb.right[a] <= b:
            res = {self.index[(a, b)]: Fraction(1)}
        else:
            # [[x,y],b] = [[x,b],y] + [x,[y,b]]
            x, y = hb.left[a], hb.right[a]
            res = {}
            _accumulate(res, self.combo(self.bracket(x, b), {y: Fraction(1)}))
            _accumulate(res, self.combo({x: Fraction(1)}, self.bracket(y, b)))
        self.memo[key] = res
        return res

    def combo(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for a, ca in u.items():
            for b, cb in v.items():
                for k, ck in self.bracket(a, b).items():
                    out[k] = out.get(k, 0) + ca * cb * ck
        return {k: v for k, v in out.items() if v}


def _accumulate(acc: dict[int, Fraction], add: Mapping[int, Fraction]) -> None:
    for k, v in add.items():
        nv = acc.get(k, 0) + v
        if nv:
            acc[k] = nv
        else:
            acc.pop(k, None)


DEFAULT_MAX_DIM = 200


def free_nilpotent(m: int, s: int, max_dim: int = DEFAULT_MAX_DIM) -> StratifiedAlgebra:
    """Free nilpotent Lie algebra of rank ``m`` and step ``s`` in a Hall basis.

    Basis vectors are named ``X1..Xm`` for the generators and ``H<k>`` for
    the higher Hall elements (1-based position in the basis).
    """
    if m < 1 or s < 1:
        raise ValueError("need m >= 1 and s >= 1")
    predicted = sum(witt_dimension(m, n) for n in range(1, s + 1))
    if predicted > max_dim:
        raise ValueError(f"free_nilpotent({m},{s}) has dimension {predicted} > cap {max_dim}")
    hb = hall_basis(m, s)
    rw = _HallRewriter(hb)
    n = len(hb.degree)
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for a in range(n):
        for b in range(n):
            row = rw.bracket(a, b)
            if row:
                table[(a, b)] = dict(row)
    names = tuple(f"X{t + 1}" if hb.left[t] is None else f"H{t + 1}" for t in range(n))
    strata = tuple(tuple(t for t in range(n) if hb.degree[t] == d) for d in range(1, s + 1))
    # rank one: everything above degree one vanishes
    strata = tuple(st for st in strata if st)
    return StratifiedAlgebra(n, names, table, strata, name=f"free_nilpotent({m},{s})")


# ---------------------------------------------------------------------------
# text / JSON file format

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_BRACKET_RE = re.compile(rf"^\s*\[\s*({_NAME})\s*,\s*({_NAME})\s*\]\s*=\s*(.*?)\s*$")
_TERM_RE = re.compile(
    rf"\s*([+-]?)\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?({_NAME})\s*"
)


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        raise ValueError(f"not a rational p/q: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in {text!r}") from None


def _parse_rhs(rhs: str, line: int, col0: int) -> dict[str, Fraction]:
    if re.fullmatch(r"\s*0\s*", rhs):
        return {}
    out: dict[str, Fraction] = {}
    pos = 0
    first = True
    while pos < len(rhs):
        m = _TERM_RE.match(rhs, pos)
        if not m or m.end() == pos or (not first and not m.group(1)):
            raise ParseError(f"cannot parse term {rhs[pos:]!r}", line, col0 + pos + 1)
        sign, coef, nm = m.groups()
        try:
            q = Fraction(coef) if coef else Fraction(1)
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {coef!r}", line, col0 + m.start(2) + 1) from None
        if sign == "-":
            q = -q
        out[nm] = out.get(nm, 0) + q
        pos = m.end()
        first = False
    return out


def _parse_list(text: str, line: int, col: int) -> list:
    # strata lists use bare identifiers; quote them for the JSON parser
    quoted = re.sub(rf"(?<![\"\w])({_NAME})(?![\"\w])", r'"\1"', text)
    try:
        return json.loads(quoted)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed list: {exc.msg}", line, col + exc.colno - 1) from None


def parse_algebra(text: str) -> StratifiedAlgebra:
    """Parse the text algebra format (or its JSON embedding).

    Text form::

        name: heisenberg
        dim: 3
        step: 2
        strata: [[X, Y], [Z]]
        [X, Y] = Z
        [X, Z] = 1/2*W - 3*V

    Omitted brackets are zero; ``#`` starts a comment.
    """
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return algebra_from_json(data)

    header: dict[str, object] = {}
    brackets: dict[tuple[str, str], dict[str, Fraction]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if line.lstrip().startswith("["):
            m = _BRACKET_RE.match(line)
            if not m:
                raise ParseError("expected '[a, b] = rhs'", lineno, len(line) - len(line.lstrip()) + 1)
            a, b = m.group(1), m.group(2)
            rhs = _parse_rhs(m.group(3), lineno, m.start(3))
            for key in ((a, b), (b, a)):
                if key in brackets:
                    prev = brackets[key] if key == (a, b) else {k: -v for k, v in brackets[key].items()}
                    if {k: v for k, v in prev.items() if v} != {k: v for k, v in rhs.items() if v}:
                        raise ParseError(f"inconsistent brackets for [{a},{b}]", lineno, 1)
            brackets[(a, b)] = rhs
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", lineno, 1)
        key = key.strip()
        vcol = len(key) + 2
        value = value.strip()
        if key in ("dim", "step"):
            if not value.isdigit():
                raise ParseError(f"{key} must be a non-negative integer", lineno, vcol)
            header[key] = int(value)
        elif key == "strata":
            header["strata"] = _parse_list(value, lineno, vcol)
        elif key == "name":
            header["name"] = value
        else:
            raise ParseError(f"unknown header {key!r}", lineno, 1)
    return _assemble(header, brackets)


def _assemble(header: Mapping[str, object], brackets) -> StratifiedAlgebra:
    if "strata" not in header:
        raise StructureError("missing 'strata'")
    strata = header["strata"]
    if not isinstance(strata, list) or not all(isinstance(s, list) for s in strata):
        raise StructureError("'strata' must be a list of lists of names")
    names = [n for s in strata for n in s]
    if len(set(names)) != len(names):
        raise StructureError("a basis element appears in two strata")
    if "dim" in header and header["dim"] != len(names):
        raise StructureError(f"dim {header['dim']} does not match {len(names)} names in strata")
    if "step" in header and header["step"] != len(strata):
        raise StructureError(f"step {header['step']} does not match {len(strata)} strata")
    return StratifiedAlgebra.from_brackets(names, brackets, strata, str(header.get("name", "")))


def algebra_from_json(data: Mapping[str, object]) -> StratifiedAlgebra:
    brackets: dict[tuple[str, str], dict[str, Fraction]] = {}
    for n, entry in enumerate(data.get("brackets", []), start=1):
        m = _BRACKET_RE.match(entry)
        if not m:
            raise ParseError(f"bad bracket entry {entry!r}", n, 1)
        brackets[(m.group(1), m.group(2))] = _parse_rhs(m.group(3), n, m.start(3))
    return _assemble(data, brackets)


def _format_rhs(row: Mapping[int, Fraction], names: Sequence[str]) -> str:
    parts = []
    for k in sorted(row):
        v = row[k]
        sign = "-" if v < 0 else "+"
        mag = abs(v)
        term = names[k] if mag == 1 else f"{mag}*{names[k]}"
        parts.append((sign, term))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, term in parts[1:]:
        out += f" {sign} {term}"
    return out


def bracket_entries(alg: StratifiedAlgebra) -> list[str]:
    names = alg.basis_names
    return [
        f"[{names[i]}, {names[j]}] = {_format_rhs(row, names)}"
        for (i, j), row in sorted(alg.structure_constants.items())
        if i < j and row
    ]


def format_algebra(alg: StratifiedAlgebra) -> str:
    names = alg.basis_names
    lines = []
    if alg.name:
        lines.append(f"name: {alg.name}")
    lines.append(f"dim: {alg.dim}")
    lines.append(f"step: {alg.step}")
    strata = ", ".join("[" + ", ".join(names[i] for i in s) + "]" for s in alg.strata)
    lines.append(f"strata: [{strata}]")
    lines.extend(bracket_entries(alg))
    return "\n".join(lines) + "\n"


def algebra_to_json(alg: StratifiedAlgebra) -> dict[str, object]:
    names = alg.basis_names
    return {
        "name": alg.name,
        "dim": alg.dim,
        "step": alg.step,
        "strata": [[names[i] for i in s] for s in alg.strata],
        "brackets": bracket_entries(alg),
    }


# ---------------------------------------------------------------------------
# named algebras


def abelian(n: int) -> StratifiedAlgebra:
    names = [f"X{i + 1}" for i in range(n)]
    return StratifiedAlgebra.from_brackets(names, {}, [names], name=f"abelian({n})")


def heisenberg(n: int = 1) -> StratifiedAlgebra:
    """Heisenberg algebra of dimension 2n+1 with [X_i, Y_i] = Z."""
    if n == 1:
        names = ["X", "Y", "Z"]
        return StratifiedAlgebra.from_brackets(
            names, {("X", "Y"): {"Z": 1}}, [["X", "Y"], ["Z"]], name="heisenberg(1)"
        )
    xs = [f"X{i + 1}" for i in range(n)]
    ys = [f"Y{i + 1}" for i in range(n)]
    v1 = [v for pair in zip(xs, ys) for v in pair]
    brackets = {(x, y): {"Z": 1} for x, y in zip(xs, ys)}
    return StratifiedAlgebra.from_brackets(v1 + ["Z"], brackets, [v1, ["Z"]], name=f"heisenberg({n})")


def engel() -> StratifiedAlgebra:
    """Engel algebra: [X1, X2] = X3, [X1, X3] = X4; strata dims (2, 1, 1)."""
    return StratifiedAlgebra.from_brackets(
        ["X1", "X2", "X3", "X4"],
        {("X1", "X2"): {"X3": 1}, ("X1", "X3"): {"X4": 1}},
        [["X1", "X2"], ["X3"], ["X4"]],
        name="engel",
    )


def without_strata(alg: StratifiedAlgebra) -> StratifiedAlgebra:
    """The same bracket table with every basis vector placed in one stratum."""
    return StratifiedAlgebra(
        alg.dim, alg.basis_names, alg.structure_constants, (tuple(range(alg.dim)),), alg.name
    )


def with_strata(alg: StratifiedAlgebra, strata: Iterable[Iterable[int]]) -> StratifiedAlgebra:
    return StratifiedAlgebra(
        alg.dim, alg.basis_names, alg.structure_constants, tuple(tuple(s) for s in strata), alg.name
    )
