"""Exact representation and structural analysis of cubic and linear forms.

Everything in this module is exact: coefficients are integers or Fractions,
evaluation uses arbitrary-precision arithmetic, and polynomial identities are
checked coefficient by coefficient after symbolic expansion.  Floating point
never enters here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd, lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch, InconsistentBounds, ResourceLimit

Triple = Tuple[int, int, int]
Pair = Tuple[int, int]
Rat = Union[int, Fraction, str]


def as_fraction(v: Rat) -> Fraction:
    """Parse an exact rational from an int, Fraction, or 'p/q' string."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"not an exact rational: {v!r}")


def _sorted_triple(i: int, j: int, k: int) -> Triple:
    a, b, c = sorted((i, j, k))
    return (a, b, c)


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class CubicForm:
    """Integer-coefficient symmetric cubic in n variables.

    ``coeffs`` maps index triples (i, j, k), 1 <= i <= j <= k <= n, to nonzero
    integers.  Rational input is rescaled to integers at ingestion and the
    multiplier is recorded in ``rescale`` (zeros of the form are unaffected).
    The zero form (empty ``coeffs``) is representable so that degenerate
    integrands can be exercised; structural operations reject it.
    """

    n: int
    coeffs: Mapping[Triple, int]
    rescale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        for (i, j, k), c in self.coeffs.items():
            if not (1 <= i <= j <= k <= self.n):
                raise ValueError(f"bad monomial index {(i, j, k)} for n={self.n}")
            if not isinstance(c, int) or c == 0:
                raise ValueError(f"coefficient for {(i, j, k)} must be a nonzero int")

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Tuple[int, int, int, Rat]]) -> "CubicForm":
        """Build from (i, j, k, coeff) terms; indices are sorted and merged,
        rational coefficients are cleared to integers."""
        acc: Dict[Triple, Fraction] = {}
        for i, j, k, c in terms:
            key = _sorted_triple(i, j, k)
            acc[key] = acc.get(key, Fraction(0)) + as_fraction(c)
        acc = {key: c for key, c in acc.items() if c != 0}
        scale = Fraction(lcm(*(c.denominator for c in acc.values()), 1))
        coeffs = {key: int(c * scale) for key, c in sorted(acc.items())}
        return cls(n=n, coeffs=coeffs, rescale=scale)

    @classmethod
    def diagonal(cls, diag: Sequence[Rat]) -> "CubicForm":
        """The form sum_i d_i * x_i^3."""
        return cls.from_terms(len(diag), [(i, i, i, d) for i, d in enumerate(diag, 1) if d != 0])

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def variables_used(self) -> Tuple[int, ...]:
        used = sorted({v for key in self.coeffs for v in key})
        return tuple(used)

    def max_abs_value(self, box: int) -> int:
        """Upper bound for |C(x)| over the box |x| <= box (exact)."""
        return sum(abs(c) for c in self.coeffs.values()) * box**3


@dataclass(frozen=True)
class LinearForm:
    """A linear form in n variables with exact rational or float coefficients."""

    n: int
    coeffs: Tuple[Union[Fraction, float], ...]

    def __post_init__(self):
        if len(self.coeffs) != self.n:
            raise DimensionMismatch("coefficient vector length must equal n")

    @classmethod
    def rational(cls, coeffs: Sequence[Rat]) -> "LinearForm":
        return cls(len(coeffs), tuple(as_fraction(c) for c in coeffs))

    @classmethod
    def real(cls, coeffs: Sequence[float]) -> "LinearForm":
        return cls(len(coeffs), tuple(float(c) for c in coeffs))

    @property
    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def eval(self, x: Sequence[int]):
        if len(x) != self.n:
            raise DimensionMismatch("vector length must equal n")
        return sum(c * xi for c, xi in zip(self.coeffs, x))


@dataclass(frozen=True)
class QuadraticForm:
    """A quadratic form given by exact rational coefficients on (i, j), i <= j."""

    n: int
    coeffs: Mapping[Pair, Fraction]

    def __post_init__(self):
        for (i, j), c in self.coeffs.items():
            if not (1 <= i <= j <= self.n):
                raise ValueError(f"bad quadratic index {(i, j)} for n={self.n}")
            if not isinstance(c, Fraction):
                raise ValueError("quadratic coefficients must be Fractions")

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Tuple[int, int, Rat]]) -> "QuadraticForm":
        acc: Dict[Pair, Fraction] = {}
        for i, j, c in terms:
            key = (min(i, j), max(i, j))
            acc[key] = acc.get(key, Fraction(0)) + as_fraction(c)
        return cls(n, {k: c for k, c in sorted(acc.items()) if c != 0})


@dataclass(frozen=True)
class HDecomposition:
    """A list of (linear, quadratic) pairs whose products are meant to sum to C."""

    pairs: Tuple[Tuple[LinearForm, QuadraticForm], ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("decomposition needs at least one pair")
        n = self.pairs[0][0].n
        for a, b in self.pairs:
            if a.n != n or b.n != n:
                raise DimensionMismatch("all forms in a decomposition share n")
            if not a.is_rational:
                raise ValueError("decomposition linear forms must be rational")

    @property
    def n(self) -> int:
        return self.pairs[0][0].n

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class LinearSystem:
    """r real linear forms in n variables (rows of the matrix), plus the
    declared assumption that no nonzero rational combination of the rows is a
    rational form.  The assumption is carried, not checked; it is undecidable
    from finite-precision input."""

    r: int
    n: int
    rows: Tuple[Tuple[Union[Fraction, float], ...], ...]
    assume_irrational: bool = True

    def __post_init__(self):
        if not (0 <= self.r <= self.n):
            raise ValueError("need 0 <= r <= n")
        if len(self.rows) != self.r:
            raise ValueError("row count must equal r")
        for row in self.rows:
            if len(row) != self.n:
                raise DimensionMismatch("row length must equal n")
        if self.r > 0 and np.linalg.matrix_rank(self.matrix()) < self.r:
            raise ValueError("rows must be linearly independent over the reals")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Union[float, Rat]]], n: Optional[int] = None,
                  assume_irrational: bool = True) -> "LinearSystem":
        parsed = []
        for row in rows:
            entries = []
            for v in row:
                if isinstance(v, float):
                    entries.append(v)
                else:
                    entries.append(as_fraction(v))
            parsed.append(tuple(entries))
        if n is None:
            if not parsed:
                raise ValueError("cannot infer n from an empty system")
            n = len(parsed[0])
        return cls(r=len(parsed), n=n, rows=tuple(parsed), assume_irrational=assume_irrational)

    @classmethod
    def empty(cls, n: int) -> "LinearSystem":
        return cls(r=0, n=n, rows=(), assume_irrational=True)

    def matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.rows], dtype=float).reshape(self.r, self.n)

    def forms(self) -> List[LinearForm]:
        return [LinearForm(self.n, row) for row in self.rows]


# ---------------------------------------------------------------------------
# Evaluation


def eval_cubic(C: CubicForm, x: Sequence[int]) -> int:
    """Evaluate C at an integer vector, exactly."""
    if len(x) != C.n:
        raise DimensionMismatch(f"expected {C.n} coordinates, got {len(x)}")
    total = 0
    for (i, j, k), c in C.coeffs.items():
        total += c * x[i - 1] * x[j - 1] * x[k - 1]
    return total


def grad_cubic(C: CubicForm, x: Sequence[int]) -> Tuple[int, ...]:
    """Gradient of C at an integer vector; satisfies x . grad = 3 C(x)."""
    if len(x) != C.n:
        raise DimensionMismatch(f"expected {C.n} coordinates, got {len(x)}")
    g = [0] * C.n
    for (i, j, k), c in C.coeffs.items():
        g[i - 1] += c * x[j - 1] * x[k - 1]
        g[j - 1] += c * x[i - 1] * x[k - 1]
        g[k - 1] += c * x[i - 1] * x[j - 1]
    return tuple(g)


def eval_linear(Lsys: LinearSystem, x: Sequence[int]) -> List[float]:
    """Values (L_1(x), ..., L_r(x)).  Rational rows are evaluated exactly
    before the final conversion to float."""
    if len(x) != Lsys.n:
        raise DimensionMismatch(f"expected {Lsys.n} coordinates, got {len(x)}")
    out = []
    for row in Lsys.rows:
        out.append(float(sum(c * xi for c, xi in zip(row, x))))
    return out


# ---------------------------------------------------------------------------
# Exact polynomial expansion


def expand_decomposition(D: HDecomposition) -> Dict[Triple, Fraction]:
    """Expand sum_i A_i * B_i into a canonical cubic coefficient map."""
    acc: Dict[Triple, Fraction] = {}
    for a, b in D.pairs:
        for l, al in enumerate(a.coeffs, 1):
            if al == 0:
                continue
            for (u, v), buv in b.coeffs.items():
                key = _sorted_triple(l, u, v)
                acc[key] = acc.get(key, Fraction(0)) + al * buv
    return {k: c for k, c in acc.items() if c != 0}


def verify_h_decomposition(C: CubicForm, D: HDecomposition) -> bool:
    """True iff C - sum A_i B_i is the zero polynomial, by exact comparison.

    The comparison targets the stored (integer-rescaled) coefficients of C.
    """
    if D.n != C.n:
        raise DimensionMismatch("decomposition has wrong number of variables")
    expanded = expand_decomposition(D)
    target = {k: Fraction(c) for k, c in C.coeffs.items()}
    return expanded == target


def substitute_linear_span(C: CubicForm, vectors: Sequence[Sequence[int]]) -> Dict[Triple, int]:
    """Coefficients of t -> C(t_1 v_1 + ... + t_d v_d) as a cubic in d variables.

    Exact integer arithmetic; the result is empty iff C vanishes identically
    on the span of the vectors.
    """
    d = len(vectors)
    for v in vectors:
        if len(v) != C.n:
            raise DimensionMismatch("substitution vectors must have n coordinates")
    acc: Dict[Triple, int] = {}
    for (i, j, k), c in C.coeffs.items():
        vi = [vectors[a][i - 1] for a in range(d)]
        vj = [vectors[a][j - 1] for a in range(d)]
        vk = [vectors[a][k - 1] for a in range(d)]
        for a in range(d):
            if vi[a] == 0:
                continue
            for b in range(d):
                if vj[b] == 0:
                    continue
                for e in range(d):
                    if vk[e] == 0:
                        continue
                    key = _sorted_triple(a + 1, b + 1, e + 1)
                    acc[key] = acc.get(key, 0) + c * vi[a] * vj[b] * vk[e]
    return {k: v for k, v in acc.items() if v != 0}


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over Q by exact Gaussian elimination."""
    mat = [list(map(Fraction, row)) for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    col = 0
    while rank < len(mat) and col < ncols:
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            col += 1
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        pr = mat[rank]
        for r in range(rank + 1, len(mat)):
            if mat[r][col] != 0:
                f = mat[r][col] / pr[col]
                mat[r] = [a - f * b for a, b in zip(mat[r], pr)]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# Rational linear spaces inside the hypersurface, and h-invariant bounds


def _primitive_vectors(n: int, H: int, budget: int) -> List[Tuple[int, ...]]:
    """Canonical primitive vectors of sup-norm <= H, in ascending lex order.

    Canonical means the first nonzero coordinate is positive, so each line
    through the origin is represented once.
    """
    if (2 * H + 1) ** n > budget:
        raise ResourceLimit(f"vector enumeration ({(2*H+1)**n} candidates) exceeds budget {budget}")
    out = []
    for v in product(range(-H, H + 1), repeat=n):
        nz = next((c for c in v if c != 0), 0)
        if nz <= 0:
            continue
        if gcd(*v) != 1:
            continue
        out.append(v)
    return out


@dataclass(frozen=True)
class SpaceSearchParams:
    H: int = 2
    budget: int = 2_000_000


def find_rational_linear_space(C: CubicForm, d: int, H: int,
                               budget: int = 2_000_000) -> Optional[List[Tuple[int, ...]]]:
    """Search for d independent integer vectors of height <= H whose span lies
    inside {C = 0}, verified by exact symbolic substitution.

    Returns the first certificate in depth-first lex order, or None if the
    bounded search fails.  Failure is not a proof of nonexistence.
    """
    if C.is_zero:
        raise ValueError("the zero form contains every linear space")
    if not (1 <= d < C.n):
        raise ValueError("need 1 <= d < n")
    if H < 1:
        raise ValueError("need H >= 1")
    cands = [v for v in _primitive_vectors(C.n, H, budget) if eval_cubic(C, v) == 0]

    def extend(chosen: List[Tuple[int, ...]], start: int) -> Optional[List[Tuple[int, ...]]]:
        if len(chosen) == d:
            return list(chosen)
        for idx in range(start, len(cands)):
            v = cands[idx]
            trial = chosen + [v]
            if rational_rank(trial) < len(trial):
                continue
            if substitute_linear_span(C, trial):
                continue
            found = extend(trial, idx + 1)
            if found is not None:
                return found
        return None

    return extend([], 0)


def h_bounds(C: CubicForm, witness: Optional[HDecomposition] = None,
             search: SpaceSearchParams = SpaceSearchParams()) -> Tuple[int, int]:
    """Certified window (lower, upper) for the h-invariant.

    upper comes from a verified decomposition witness (h <= #pairs); lower is
    n - d_max with d_max the largest dimension at which the bounded space
    search succeeds.  The window is exact only when lower == upper; crossing
    bounds indicate an internal defect since both endpoints carry verified
    certificates.
    """
    if C.is_zero:
        raise ValueError("h-invariant is undefined for the zero form")
    if witness is not None and not verify_h_decomposition(C, witness):
        raise ValueError("witness decomposition does not reproduce C")
    upper = C.n if witness is None else min(C.n, len(witness))
    d_max = 0
    for d in range(1, C.n):
        if find_rational_linear_space(C, d, search.H, search.budget) is None:
            break
        d_max = d
    lower = C.n - d_max
    if lower > upper:
        raise InconsistentBounds(
            f"h window crossed: lower {lower} > upper {upper}; certificates disagree")
    return lower, upper


# ---------------------------------------------------------------------------
# File formats


def _rat_str(c: Union[int, Fraction]) -> str:
    f = Fraction(c)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def load_cubic_form(source: Union[str, dict]) -> CubicForm:
    """Load {"n": int, "monomials": [{"i","j","k","c"}]} with i <= j <= k required."""
    doc = json.load(open(source)) if isinstance(source, str) else source
    n = doc["n"]
    terms = []
    for m in doc["monomials"]:
        i, j, k = m["i"], m["j"], m["k"]
        if not (i <= j <= k):
            raise ValueError(f"monomial indices must satisfy i <= j <= k, got {(i, j, k)}")
        terms.append((i, j, k, as_fraction(m["c"])))
    return CubicForm.from_terms(n, terms)


def dump_cubic_form(C: CubicForm) -> dict:
    return {
        "n": C.n,
        "monomials": [{"i": i, "j": j, "k": k, "c": _rat_str(Fraction(c) / C.rescale)}
                      for (i, j, k), c in sorted(C.coeffs.items())],
    }


def load_linear_system(source: Union[str, dict]) -> LinearSystem:
    """Load {"r", "n", "rows", "assume_irrational"}; row entries are floats or
    'p/q' strings (exact rationals)."""
    doc = json.load(open(source)) if isinstance(source, str) else source
    rows = []
    for row in doc["rows"]:
        entries = []
        for v in row:
            if isinstance(v, str):
                entries.append(as_fraction(v))
            elif isinstance(v, (int, float)):
                entries.append(float(v))
            else:
                raise ValueError(f"bad linear coefficient {v!r}")
        rows.append(tuple(entries))
    sys = LinearSystem(r=doc["r"], n=doc["n"], rows=tuple(rows),
                       assume_irrational=bool(doc.get("assume_irrational", True)))
    return sys


def dump_linear_system(Lsys: LinearSystem) -> dict:
    rows = []
    for row in Lsys.rows:
        rows.append([_rat_str(v) if isinstance(v, Fraction) else float(v) for v in row])
    return {"r": Lsys.r, "n": Lsys.n, "rows": rows, "assume_irrational": Lsys.assume_irrational}


def load_h_decomposition(source: Union[str, dict]) -> HDecomposition:
    """Load {"n": int, "pairs": [{"A": [rat, ...], "B": [{"i","j","c"}]}]}."""
    doc = json.load(open(source)) if isinstance(source, str) else source
    n = doc["n"]
    pairs = []
    for p in doc["pairs"]:
        a = LinearForm.rational(p["A"])
        b = QuadraticForm.from_terms(n, [(t["i"], t["j"], as_fraction(t["c"])) for t in p["B"]])
        pairs.append((a, b))
    return HDecomposition(tuple(pairs))


def dump_h_decomposition(D: HDecomposition) -> dict:
    pairs = []
    for a, b in D.pairs:
        pairs.append({
            "A": [_rat_str(c) for c in a.coeffs],
            "B": [{"i": i, "j": j, "c": _rat_str(c)} for (i, j), c in sorted(b.coeffs.items())],
        })
    return {"n": D.n, "pairs": pairs}


# Standard small test form: two equal sums of cubes with a nontrivial zero (1, 12, 9, 10).
def taxicab_form() -> CubicForm:
    return CubicForm.diagonal([1, 1, -1, -1])


def taxicab_decomposition() -> HDecomposition:
    one = Fraction(1)
    a1 = LinearForm.rational([1, 1, 0, 0])
    b1 = QuadraticForm.from_terms(4, [(1, 1, one), (1, 2, -one), (2, 2, one)])
    a2 = LinearForm.rational([0, 0, -1, -1])
    b2 = QuadraticForm.from_terms(4, [(3, 3, one), (3, 4, -one), (4, 4, one)])
    return HDecomposition(((a1, b1), (a2, b2)))
