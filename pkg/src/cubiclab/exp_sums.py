"""Complete exponential sums mod q, weighted/unweighted generating sums,
oscillatory integrals with certified-tolerance quadrature, the Poisson
decomposition residual, and the rational-approximation quality functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._trig import cis
from .errors import DimensionMismatch, ResourceLimit, ToleranceNotMet
from .forms_core import CubicForm, LinearSystem
from .lattice_enum import weight_w

COMPLETE_SUM_BUDGET = 100_000_000
G_SUM_BUDGET = 1_000_000_000
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class ExpSumValue:
    """A complex value with an attached absolute-error bound (0 means exact up
    to the stated envelope; quadrature and Monte Carlo attach their bounds)."""

    value: complex
    abs_error: float = 0.0

    def __post_init__(self):
        if not (self.abs_error >= 0):
            raise ValueError("abs_error must be nonnegative")

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class RationalApproxPoint:
    """alpha0 = a/q + beta0 and lambda = a_vec/q + b_vec, the rational anchor
    of a frequency point."""

    q: int
    a: int
    avec: Tuple[int, ...]
    beta0: float
    bvec: Tuple[float, ...]

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")


def nearest_int(x: float) -> int:
    """Nearest integer, rounding halves down (toward minus infinity)."""
    f = math.floor(x)
    return f + 1 if x - f > 0.5 else f


def rational_approx_point(alpha0: float, lam: Sequence[float], q: int, a: int) -> RationalApproxPoint:
    avec = tuple(nearest_int(q * l) for l in lam)
    return RationalApproxPoint(
        q=q, a=a, avec=avec,
        beta0=alpha0 - a / q,
        bvec=tuple(l - av / q for l, av in zip(lam, avec)),
    )


# ---------------------------------------------------------------------------
# Complete sums mod q


def _phase_histogram(C: CubicForm, q: int, a: int, avec: Sequence[int],
                     budget: int) -> np.ndarray:
    """Counts of (a*C(y) + avec . y) mod q over y in (Z/q)^n.

    Collapsing to a histogram keeps the float work at O(q) regardless of q^n.
    """
    n = C.n
    if q**n > budget:
        raise ResourceLimit(f"complete sum over q^n = {q**n} residues exceeds budget {budget}")
    if len(avec) != n:
        raise DimensionMismatch("avec length must equal n")
    a_mod = a % q
    avec_mod = [v % q for v in avec]
    axis = np.arange(q, dtype=np.int64)
    hist = np.zeros(q, dtype=np.int64)
    if n == 1:
        slab_coords = [[axis]]
    else:
        rest = list(np.meshgrid(*([axis] * (n - 1)), indexing="ij"))
        slab_coords = ([np.full(rest[0].shape, x1, dtype=np.int64)] + rest for x1 in axis)
    for coords in slab_coords:
        phase = np.zeros(coords[-1].shape, dtype=np.int64)
        for (i, j, k), c in C.coeffs.items():
            t = (c % q) * coords[i - 1] % q
            t = t * coords[j - 1] % q
            t = t * coords[k - 1] % q
            phase = (phase + a_mod * t) % q
        for v, coord in zip(avec_mod, coords):
            if v:
                phase = (phase + v * coord) % q
        hist += np.bincount(np.ravel(phase), minlength=q)[:q]
    return hist


def residue_histogram(C: CubicForm, q: int, budget: int = COMPLETE_SUM_BUDGET) -> np.ndarray:
    """Counts of C(y) mod q over (Z/q)^n."""
    return _phase_histogram(C, q, 1, [0] * C.n, budget)


def complete_sum(C: CubicForm, q: int, a: int, avec: Sequence[int],
                 budget: int = COMPLETE_SUM_BUDGET) -> ExpSumValue:
    """S_{q,a,avec} = sum over y mod q of e_q(a C(y) + avec . y), exactly
    (abs_error covers only floating-point roundoff)."""
    if q < 1:
        raise ValueError("q must be positive")
    if q == 1:
        return ExpSumValue(1 + 0j, 0.0)
    hist = _phase_histogram(C, q, a, avec, budget)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    value = complex(np.dot(hist.astype(float), roots))
    return ExpSumValue(value, abs_error=q**C.n * 4 * _EPS)


def _factorize(q: int) -> List[Tuple[int, int]]:
    out = []
    d = 2
    while d * d <= q:
        if q % d == 0:
            e = 0
            while q % d == 0:
                q //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if q > 1:
        out.append((q, 1))
    return out


def complete_sum_crt(C: CubicForm, q: int, a: int, avec: Sequence[int],
                     budget: int = COMPLETE_SUM_BUDGET) -> ExpSumValue:
    """S_{q,a,avec} as a product over prime powers p^e || q.

    Splitting y across coprime moduli multiplies the sum; the cubic part picks
    up the square of the complementary modulus in each factor's numerator,
    while the linear part passes through unchanged.
    """
    if q < 1:
        raise ValueError("q must be positive")
    if math.gcd(a, q) != 1:
        raise ValueError("need gcd(a, q) = 1 for the CRT factorization")
    if q == 1:
        return ExpSumValue(1 + 0j, 0.0)
    factors = _factorize(q)
    value = 1 + 0j
    for p, e in factors:
        pe = p**e
        cof = q // pe
        a_pe = (a * cof * cof) % pe
        value *= complete_sum(C, pe, a_pe, avec, budget).value
    return ExpSumValue(value, abs_error=q**C.n * 4 * _EPS * len(factors))


@dataclass(frozen=True)
class SboundRow:
    q: int
    a: int
    avec: Tuple[int, ...]
    abs_sum: float
    ratio: float


@dataclass(frozen=True)
class SboundReport:
    exponent: float
    max_ratio: float
    witness: SboundRow
    per_q: Tuple[SboundRow, ...]


def sbound_check(C: CubicForm, h_lower: int, qmax: int, psi: float,
                 avec_samples: Optional[Sequence[Sequence[int]]] = None,
                 budget: int = COMPLETE_SUM_BUDGET) -> SboundReport:
    """Scan |S_{q,a,avec}| / q^(n - h_lower/8 + psi) over q <= qmax and report
    the worst observed ratio.  Diagnostic of the implied constant only; no
    pass/fail meaning.
    """
    n = C.n
    if avec_samples is None:
        avec_samples = [[0] * n, [1] + [0] * (n - 1), [1] * n]
    exponent = n - h_lower / 8 + psi
    rows: List[SboundRow] = []
    best: Optional[SboundRow] = None
    for q in range(1, qmax + 1):
        q_best: Optional[SboundRow] = None
        for a in range(1, q + 1):
            if math.gcd(a, q) != 1:
                continue
            for avec in avec_samples:
                s = complete_sum(C, q, a, avec, budget)
                ratio = abs(s.value) / q**exponent
                row = SboundRow(q, a, tuple(avec), abs(s.value), ratio)
                if q_best is None or row.ratio > q_best.ratio:
                    q_best = row
        if q_best is not None:
            rows.append(q_best)
            if best is None or q_best.ratio > best.ratio:
                best = q_best
    assert best is not None
    return SboundReport(exponent=exponent, max_ratio=best.ratio, witness=best, per_q=tuple(rows))


# ---------------------------------------------------------------------------
# Generating sums over boxes


def sum_g(C: CubicForm, P: float, alpha0: float, lam: Sequence[float],
          weighted: bool, budget: int = G_SUM_BUDGET) -> ExpSumValue:
    """g(alpha0, lambda) = sum over |x| < P of [w(x/P)] e(alpha0 C(x) + lambda . x).

    The support box is |x| <= ceil(P) - 1 for both the weighted and unweighted
    variants (the weight vanishes outside it anyway).
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    if len(lam) != C.n:
        raise DimensionMismatch("lambda length must equal n")
    B = math.ceil(P) - 1
    n = C.n
    box = (2 * B + 1) ** n
    if box > budget:
        raise ResourceLimit(f"g sum over {box} points exceeds budget {budget}")
    axis = np.arange(-B, B + 1, dtype=np.int64)
    lam_arr = np.asarray(lam, dtype=float)
    total = 0 + 0j
    max_phase = 0.0
    if n == 1:
        slab_coords = [[axis]]
    else:
        rest = list(np.meshgrid(*([axis] * (n - 1)), indexing="ij"))
        slab_coords = ([np.full(rest[0].shape, x1, dtype=np.int64)] + rest for x1 in axis)
    for coords in slab_coords:
        fcoords = [c.astype(float) for c in coords]
        cvals = np.zeros(fcoords[0].shape)
        for (i, j, k), c in C.coeffs.items():
            cvals = cvals + float(c) * fcoords[i - 1] * fcoords[j - 1] * fcoords[k - 1]
        phase = alpha0 * cvals
        for d in range(n):
            phase = phase + lam_arr[d] * fcoords[d]
        max_phase = max(max_phase, float(np.abs(phase).max(initial=0.0)))
        terms = cis(phase)
        if weighted:
            pts = np.stack([c.ravel() for c in fcoords], axis=1) / P
            terms = terms.ravel() * weight_w(pts)
        total += complex(np.sum(terms))
    err = box * _EPS * (4 + 2 * math.pi * max_phase)
    return ExpSumValue(total, abs_error=err)


# ---------------------------------------------------------------------------
# Oscillatory integrals


def _gl_nodes(panels: int, order: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [lo, hi]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _w1(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _osc_axis(c3: float, g: float, tol: float, weighted: bool,
              max_nodes: int = 400_000) -> Tuple[complex, float]:
    """integral over [-1,1] of [w(t)] e(c3 t^3 + g t) dt by panel doubling."""
    cycles = (3 * abs(c3) + abs(g))  # max phase derivative, in cycles per unit
    panels = max(8, int(math.ceil(2 * cycles)))
    prev = None
    while panels * 12 <= max_nodes:
        nodes, wts = _gl_nodes(panels, 12, -1.0, 1.0)
        f = cis(c3 * nodes**3 + g * nodes)
        if weighted:
            f = f * _w1(nodes)
        val = complex(np.sum(f * wts))
        if prev is not None:
            est = abs(val - prev)
            if est <= tol:
                return val, est
        prev = val
        panels *= 2
    raise ToleranceNotMet(f"1-d oscillatory panel budget hit before tol={tol}")


def _is_diagonal(C: CubicForm) -> bool:
    return all(i == j == k for (i, j, k) in C.coeffs)


def _diag_coeffs(C: CubicForm) -> np.ndarray:
    d = np.zeros(C.n)
    for (i, j, k), c in C.coeffs.items():
        d[i - 1] = c
    return d


def _osc_integral(C: CubicForm, gamma0: float, gamma: Sequence[float], tol: float,
                  weighted: bool, method: str, max_points: int) -> ExpSumValue:
    n = C.n
    if len(gamma) != n:
        raise DimensionMismatch("gamma length must equal n")
    if method == "auto":
        if _is_diagonal(C):
            method = "separable"
        elif n <= 4:
            method = "tensor"
        else:
            method = "mc"
    if method == "separable":
        if not _is_diagonal(C):
            raise ValueError("separable quadrature needs a diagonal form")
        axis_bound = 0.444 if weighted else 2.0
        amp = max(1.0, axis_bound) ** (n - 1)
        tol_axis = tol / (n * amp)
        diag = _diag_coeffs(C)
        value = 1 + 0j
        err = 0.0
        for d in range(n):
            v, e = _osc_axis(gamma0 * diag[d], float(gamma[d]), tol_axis, weighted)
            value *= v
            err += e * amp
        return ExpSumValue(value, abs_error=err)
    if method == "tensor":
        if n > 4:
            raise ResourceLimit("tensor quadrature limited to n <= 4; use method='mc'")
        coeff_sum = sum(abs(c) for c in C.coeffs.values())
        cycles = 3 * abs(gamma0) * coeff_sum + max((abs(g) for g in gamma), default=0.0)
        panels = max(4, int(math.ceil(1.5 * cycles ** (1 / 1))))
        prev = None
        while (panels * 8) ** n <= max_points:
            nodes, wts = _gl_nodes(panels, 8, -1.0, 1.0)
            grids = np.meshgrid(*([nodes] * n), indexing="ij")
            phase = gamma0 * sum(c * grids[i - 1] * grids[j - 1] * grids[k - 1]
                                 for (i, j, k), c in C.coeffs.items())
            for d in range(n):
                phase = phase + float(gamma[d]) * grids[d]
            f = cis(phase)
            if weighted:
                for d in range(n):
                    f = f * _w1(grids[d])
            wprod = wts
            for _ in range(n - 1):
                wprod = np.multiply.outer(wprod, wts)
            val = complex(np.sum(f * wprod))
            if prev is not None:
                est = abs(val - prev)
                if est <= tol:
                    return ExpSumValue(val, abs_error=est)
            prev = val
            panels *= 2
        raise ToleranceNotMet(f"tensor quadrature budget hit before tol={tol}")
    if method == "mc":
        from scipy.stats import qmc
        m = 18
        sampler = qmc.Sobol(d=n, scramble=True, seed=12345)
        pts = sampler.random_base2(m) * 2.0 - 1.0
        phase = gamma0 * sum(c * pts[:, i - 1] * pts[:, j - 1] * pts[:, k - 1]
                             for (i, j, k), c in C.coeffs.items())
        phase = phase + pts @ np.asarray(gamma, dtype=float)
        f = cis(phase)
        if weighted:
            f = f * weight_w(pts)
        vol = 2.0**n
        batches = f.reshape(64, -1).mean(axis=1) * vol
        value = complex(batches.mean())
        stderr = float(np.abs(batches - batches.mean()).std() / math.sqrt(64))
        return ExpSumValue(value, abs_error=3 * stderr)
    raise ValueError(f"unknown method {method!r}")


def osc_integral_I(C: CubicForm, gamma0: float, gamma: Sequence[float], tol: float = 1e-8,
                   method: str = "auto", max_points: int = 20_000_000) -> ExpSumValue:
    """I(gamma0, gamma) = integral of w(x) e(gamma0 C(x) + gamma . x) over R^n
    (support [-1,1]^n), with |value - true| <= abs_error <= tol for the
    deterministic methods."""
    return _osc_integral(C, gamma0, gamma, tol, weighted=True, method=method,
                         max_points=max_points)


def osc_integral_Iu(C: CubicForm, gamma0: float, gamma: Sequence[float], tol: float = 1e-8,
                    method: str = "auto", max_points: int = 20_000_000) -> ExpSumValue:
    """I_u(gamma0, gamma) = integral over the box [-1,1]^n without the weight."""
    return _osc_integral(C, gamma0, gamma, tol, weighted=False, method=method,
                         max_points=max_points)


def poisson_residual(C: CubicForm, P: float, alpha0: float, lam: Sequence[float],
                     c_cutoff: int, tol_inner: float = 1e-7) -> float:
    """|g(alpha0, lambda) - P^n sum over |c| <= cutoff of I(P^3 alpha0, P lambda - P c)|.

    The identity is exact with the sum over all c; the returned residual is
    the truncation tail plus quadrature error, so it should be small when
    alpha0 and lambda are small.
    """
    n = C.n
    if n > 2:
        raise ResourceLimit("poisson residual limited to n <= 2 (quadrature cost)")
    g = sum_g(C, P, alpha0, lam, weighted=True)
    total = 0 + 0j
    from itertools import product as iproduct
    for cvec in iproduct(range(-c_cutoff, c_cutoff + 1), repeat=n):
        gamma = [P * (lam[d] - cvec[d]) for d in range(n)]
        total += osc_integral_I(C, P**3 * alpha0, gamma, tol=tol_inner).value
    return abs(g.value - P**n * total)


# ---------------------------------------------------------------------------
# Rational-approximation quality functional


def irrationality_F(Lsys: LinearSystem, alpha: Sequence[float], P: float
                    ) -> Tuple[float, Tuple[int, Tuple[int, ...]]]:
    """Exact supremum over q >= 1 and integer vectors a of
    prod_v (q + P |q lambda_v - a_v|)^{-1}, with lambda = alpha . rows.

    Each factor is at most 1/q, so only q with q^{-n} above the running best
    can win; for each q the optimal a is the nearest-integer vector.
    Returns (value, (q, avec)) with the smallest maximizing q.
    """
    if P < 1:
        raise ValueError("P must be at least 1")
    if len(alpha) != Lsys.r:
        raise DimensionMismatch("alpha length must equal r")
    n = Lsys.n
    lam = Lsys.matrix().T @ np.asarray(alpha, dtype=float) if Lsys.r else np.zeros(n)
    best = -1.0
    witness: Tuple[int, Tuple[int, ...]] = (1, tuple([0] * n))
    q = 1
    while True:
        if best > 0 and q**-n <= best:
            break
        avec = tuple(nearest_int(q * l) for l in lam)
        val = 1.0
        for v in range(n):
            val /= q + P * abs(q * lam[v] - avec[v])
        if val > best:
            best = val
            witness = (q, avec)
        q += 1
    return best, witness
