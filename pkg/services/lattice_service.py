"""
Lattice Service Module - Exact and floating-point lattice algebra
Contains the core lattice operations: volumes, LLL reduction, shortest-vector
enumeration, well-roundedness classification, sublattice indices and the
Smith/Hermite normal forms behind coset structure.

Conventions:
  * basis matrices store basis vectors as COLUMNS (the lattice is B·Z^n);
  * lambda1 is always a SQUARED length;
  * integer lattices (and lattices with a known exact Gram matrix, such as
    embedded quadratic ideals) are handled with exact arithmetic.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import ZZ
from sympy.matrices.normalforms import hermite_normal_form, invariant_factors, smith_normal_decomp

from services.errors import (
    DegenerateLattice, EnumerationTooLarge, NotASublattice, NotOrthogonal,
    UnsupportedDimension, UsageFailure,
)

logger = logging.getLogger(__name__)

DEFAULT_LLL_DELTA = 0.99
DEFAULT_TOLERANCE = 1e-9
MAX_ENUMERATION_POINTS = 2_000_000

# gamma_n ** n for n = 1..8; all rational, which keeps the Hermite interval tests exact.
HERMITE_POWERS = {
    1: Fraction(1),
    2: Fraction(4, 3),
    3: Fraction(2),
    4: Fraction(4),
    5: Fraction(8),
    6: Fraction(64, 3),
    7: Fraction(64),
    8: Fraction(256),
}
HERMITE_TABLE = {n: float(power) ** (1.0 / n) for n, power in HERMITE_POWERS.items()}


class WrKind(str, Enum):
    NOT_WR = "NotWR"
    WR = "WR"
    STRONGLY_WR = "StronglyWR"


@dataclass(frozen=True, eq=False)
class Lattice:
    """
    Full-rank lattice B·Z^n.

    basis is the float view used for coordinates. integer_basis (rows of B)
    is set for exact-integer lattices; exact_gram holds an exact Gram matrix
    (ints or Fractions) whenever one is known, and the true Gram matrix is
    gram_scale * exact_gram. Scaling and orthogonal maps only touch basis and
    gram_scale, so exact minimal-vector data survives them.
    """

    basis: np.ndarray
    integer_basis: Optional[Tuple[Tuple[int, ...], ...]] = None
    exact_gram: Optional[Tuple[Tuple, ...]] = None
    gram_scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Lattice":
        """Build a lattice from the rows of its basis matrix (columns are basis vectors)."""
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise DegenerateLattice("basis matrix must be square and non-empty")
        if all(_is_integer_value(v) for row in rows for v in row):
            int_rows = tuple(tuple(int(v) for v in row) for row in rows)
            if _exact_det(int_rows) == 0:
                raise DegenerateLattice("basis is singular (determinant 0)")
            gram = _integer_gram(int_rows)
            return cls(np.array(int_rows, dtype=float), int_rows, gram, 1.0)

        basis = np.array([[float(v) for v in row] for row in rows], dtype=float)
        if abs(np.linalg.det(basis)) <= DEFAULT_TOLERANCE * max(1.0, np.abs(basis).max()) ** n:
            raise DegenerateLattice("basis is numerically singular")
        return cls(basis)

    @classmethod
    def from_exact_gram(cls, basis: np.ndarray, exact_gram: Sequence[Sequence]) -> "Lattice":
        """Float basis together with its exactly known Gram matrix."""
        gram = tuple(tuple(_to_exact(v) for v in row) for row in exact_gram)
        if _exact_det(gram) == 0:
            raise DegenerateLattice("Gram matrix is singular")
        return cls(np.array(basis, dtype=float), None, gram, 1.0)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def is_integral(self) -> bool:
        return self.integer_basis is not None

    @property
    def is_exact(self) -> bool:
        return self.exact_gram is not None

    @property
    def gram(self) -> np.ndarray:
        if self.exact_gram is not None:
            return self.gram_scale * np.array([[float(v) for v in row] for row in self.exact_gram])
        return self.basis.T @ self.basis

    def rows(self) -> List[List]:
        """Basis rows for output: ints for integer lattices, floats otherwise."""
        if self.integer_basis is not None:
            return [list(row) for row in self.integer_basis]
        return self.basis.tolist()


@dataclass(frozen=True)
class ShortVectorReport:
    lambda1: float
    minimal_vectors: Tuple[Tuple, ...]
    coefficients: Tuple[Tuple[int, ...], ...]
    lambda1_exact: Optional[Fraction] = None

    @property
    def count_with_signs(self) -> int:
        """Kissing number."""
        return 2 * len(self.minimal_vectors)


@dataclass(frozen=True)
class WrClass:
    kind: WrKind
    lambda1: float
    witness: Tuple[Tuple, ...] = ()

    @property
    def is_wr(self) -> bool:
        return self.kind is not WrKind.NOT_WR


# ---------------------------------------------------------------------------
# exact helpers
# ---------------------------------------------------------------------------

def _is_integer_value(v) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, (int, np.integer)):
        return True
    if isinstance(v, Fraction):
        return v.denominator == 1
    return False


def _to_exact(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else v
    raise TypeError(f"exact Gram entries must be int or Fraction, got {type(v).__name__}")


def _exact_det(rows) -> Fraction:
    value = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) if isinstance(v, Fraction) else v
                           for v in row] for row in rows]).det(method="bareiss")
    return Fraction(int(sympy.numer(value)), int(sympy.denom(value)))


def _integer_gram(int_rows) -> Tuple[Tuple[int, ...], ...]:
    n = len(int_rows)
    return tuple(
        tuple(sum(int_rows[k][i] * int_rows[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _exact_value(x: Fraction, scale: float):
    """Report an exact quantity under a float scale: int when possible."""
    if scale == 1.0:
        return int(x) if x.denominator == 1 else float(x)
    return float(x) * scale


def _matmul_int(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def _transpose(a):
    return [list(col) for col in zip(*a)]


# ---------------------------------------------------------------------------
# volume, scaling, rotation
# ---------------------------------------------------------------------------

def volume(lattice: Lattice):
    """
    |det(B)|: an exact int for integer lattices, a float otherwise.
    """
    if lattice.integer_basis is not None:
        return abs(int(_exact_det(lattice.integer_basis)))
    if lattice.exact_gram is not None:
        det_gram = _exact_det(lattice.exact_gram)
        return math.sqrt(float(det_gram)) * lattice.gram_scale ** (lattice.n / 2)
    return float(abs(np.linalg.det(lattice.basis)))


def scale_lattice(lattice: Lattice, c: float) -> Lattice:
    """c·Λ for c > 0; stays exact-integer when c is an integer."""
    if c <= 0:
        raise UsageFailure("scale factor must be positive")
    if lattice.integer_basis is not None and _is_integer_value(c):
        return Lattice.from_rows([[int(c) * v for v in row] for row in lattice.integer_basis])
    return Lattice(lattice.basis * c, None, lattice.exact_gram, lattice.gram_scale * c * c)


def apply_rotation(lattice: Lattice, rotation, tol: float = DEFAULT_TOLERANCE) -> Lattice:
    """
    Rotate a lattice: basis Q·B.

    Raises NotOrthogonal when max|Q^T Q - I| exceeds tol. The exact Gram data is
    carried over unchanged, so lambda1, volume and WR class are preserved.
    """
    q = np.asarray(rotation, dtype=float)
    if q.shape != (lattice.n, lattice.n):
        raise NotOrthogonal(f"rotation must be {lattice.n}x{lattice.n}, got {q.shape}")
    deviation = float(np.abs(q.T @ q - np.eye(lattice.n)).max())
    if deviation > tol:
        raise NotOrthogonal(f"max |Q^T Q - I| = {deviation:.3e} exceeds tolerance {tol:.1e}")

    if lattice.integer_basis is not None and np.array_equal(q, np.round(q)):
        rows = _matmul_int(np.round(q).astype(int).tolist(), [list(r) for r in lattice.integer_basis])
        return Lattice.from_rows(rows)
    return Lattice(q @ lattice.basis, None, lattice.exact_gram, lattice.gram_scale)


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------

def _exact_gram_or_float(lattice: Lattice):
    if lattice.exact_gram is not None:
        return [[Fraction(v) for v in row] for row in lattice.exact_gram], True
    return lattice.gram.tolist(), False


def _gram_schmidt(gram):
    n = len(gram)
    mu = [[0] * n for _ in range(n)]
    bstar = [0] * n
    for i in range(n):
        for j in range(i):
            s = gram[i][j]
            for k in range(j):
                s -= mu[j][k] * mu[i][k] * bstar[k]
            mu[i][j] = s / bstar[j]
        s = gram[i][i]
        for k in range(i):
            s -= mu[i][k] * mu[i][k] * bstar[k]
        bstar[i] = s
    return mu, bstar


def _congruent(gram, t):
    """T^T G T."""
    return _matmul_int(_matmul_int(_transpose(t), gram), t)


def lll_transform(gram, delta: float = DEFAULT_LLL_DELTA, exact: bool = True):
    """
    LLL on a Gram matrix.

    Returns (T, G') where T is unimodular (columns express the reduced basis in
    the input basis) and G' = T^T G T. Works in Fractions when exact is True.
    """
    if not 0.25 < delta <= 1:
        raise UsageFailure("LLL delta must lie in (0.25, 1]")
    n = len(gram)
    half = Fraction(1, 2) if exact else 0.5 + 1e-12
    d = Fraction(str(delta)) if exact else float(delta)
    t = [[int(i == j) for j in range(n)] for i in range(n)]
    g = [list(row) for row in gram]
    k = 1
    swaps = 0
    while k < n:
        mu, _ = _gram_schmidt(g)
        for j in range(k - 1, -1, -1):
            if abs(mu[k][j]) > half:
                q = math.floor(mu[k][j] + Fraction(1, 2)) if exact else int(math.floor(mu[k][j] + 0.5))
                for row in t:
                    row[k] -= q * row[j]
                g = _congruent(gram, t)
                mu, _ = _gram_schmidt(g)
        mu, bstar = _gram_schmidt(g)
        if bstar[k] >= (d - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            for row in t:
                row[k], row[k - 1] = row[k - 1], row[k]
            g = _congruent(gram, t)
            swaps += 1
            k = max(k - 1, 1)
    logger.debug("LLL finished with %d swaps in dimension %d", swaps, n)
    return t, g


def lll_reduce(lattice: Lattice, delta: float = DEFAULT_LLL_DELTA) -> Lattice:
    """
    LLL-reduced basis of the same lattice (size-reduced, Lovász condition with delta).
    """
    gram, exact = _exact_gram_or_float(lattice)
    t, reduced_gram = lll_transform(gram, delta, exact)
    if lattice.integer_basis is not None:
        return Lattice.from_rows(_matmul_int([list(r) for r in lattice.integer_basis], t))
    basis = lattice.basis @ np.array(t, dtype=float)
    if exact:
        return Lattice(basis, None, tuple(tuple(_to_exact(v) for v in row) for row in reduced_gram),
                       lattice.gram_scale)
    return Lattice(basis)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _enumerate_ball(gram: np.ndarray, radius_sq: float, max_points: int) -> np.ndarray:
    """
    Fincke-Pohst: every integer vector c with c^T G c <= radius_sq (with a
    relative slack of 1e-9; callers filter with exact norms where available).
    """
    n = gram.shape[0]
    r = np.linalg.cholesky(gram).T
    diag = np.diag(r).copy()
    mu = r / diag[:, None]
    bound = radius_sq * (1 + 1e-9) + 1e-12
    coeffs = np.zeros(n, dtype=np.int64)
    blocks = []
    count = 0

    def visit(i, partial):
        nonlocal count
        center = -float(mu[i, i + 1:] @ coeffs[i + 1:])
        remaining = bound - partial
        if remaining < 0:
            return
        half = math.sqrt(remaining) / diag[i]
        lo, hi = math.ceil(center - half), math.floor(center + half)
        if hi < lo:
            return
        if i == 0:
            block = np.repeat(coeffs[None, :], hi - lo + 1, axis=0)
            block[:, 0] = np.arange(lo, hi + 1)
            blocks.append(block)
            count += hi - lo + 1
            if count > max_points:
                raise EnumerationTooLarge(f"more than {max_points} lattice points inside radius^2 {radius_sq}")
            return
        for x in range(lo, hi + 1):
            coeffs[i] = x
            visit(i - 1, partial + (diag[i] * (x - center)) ** 2)
        coeffs[i] = 0

    visit(n - 1, 0.0)
    if not blocks:
        return np.zeros((0, n), dtype=np.int64)
    return np.vstack(blocks)


def _exact_norms(coeffs: np.ndarray, exact_gram) -> List[Fraction]:
    den = 1
    for row in exact_gram:
        for v in row:
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
    g_int = np.array([[int(v * den) for v in row] for row in exact_gram], dtype=object)
    c = coeffs.astype(object)
    numerators = np.sum((c @ g_int) * c, axis=1) if len(c) else []
    return [Fraction(int(v), den) for v in numerators]


def lattice_points_in_ball(lattice: Lattice, radius_sq: float,
                           max_points: int = MAX_ENUMERATION_POINTS):
    """
    All lattice points with squared norm <= radius_sq, origin included.

    Returns (coefficients in the lattice's own basis, squared norms). Norms are
    exact (Fraction, before gram_scale) for exact lattices and floats otherwise.
    Enumeration runs on an LLL-reduced basis and maps back.
    """
    gram, exact = _exact_gram_or_float(lattice)
    t, reduced = lll_transform(gram, DEFAULT_LLL_DELTA, exact)
    reduced_float = np.array([[float(v) for v in row] for row in reduced]) * (lattice.gram_scale if exact else 1.0)
    red_coeffs = _enumerate_ball(reduced_float, radius_sq, max_points)
    coeffs = red_coeffs @ np.array(t, dtype=np.int64).T
    if exact:
        norms = _exact_norms(coeffs, lattice.exact_gram)
        keep = [i for i, v in enumerate(norms) if float(v) * lattice.gram_scale <= radius_sq * (1 + 1e-12)]
        return coeffs[keep], [norms[i] for i in keep]
    g = lattice.gram
    norms = np.sum((coeffs @ g) * coeffs, axis=1)
    keep = norms <= radius_sq * (1 + 1e-9)
    return coeffs[keep], list(norms[keep])


def _canonical_sign(vec) -> Tuple[int, ...]:
    for v in vec:
        if v:
            return tuple(int(x) for x in vec) if v > 0 else tuple(-int(x) for x in vec)
    return tuple(int(x) for x in vec)


def _vectors_from_coeffs(lattice: Lattice, coeffs: Sequence[Sequence[int]]) -> Tuple[Tuple, ...]:
    if lattice.integer_basis is not None:
        b = lattice.integer_basis
        return tuple(tuple(sum(b[i][j] * c[j] for j in range(lattice.n)) for i in range(lattice.n))
                     for c in coeffs)
    return tuple(tuple(float(x) for x in lattice.basis @ np.array(c, dtype=float)) for c in coeffs)


def shortest_vectors(lattice: Lattice) -> ShortVectorReport:
    """
    lambda1 and the complete set S(Λ) of minimal vectors, one per ± pair.

    The search ball has the squared length of the shortest LLL-reduced basis
    column as radius, so it always contains every minimal vector.
    """
    cached = lattice._cache.get("short")
    if cached is not None:
        return cached

    gram, exact = _exact_gram_or_float(lattice)
    t, reduced = lll_transform(gram, DEFAULT_LLL_DELTA, exact)
    radius = min(float(reduced[i][i]) for i in range(lattice.n))
    scale = lattice.gram_scale if exact else 1.0
    red_coeffs = _enumerate_ball(np.array([[float(v) for v in row] for row in reduced]) * scale,
                                 radius * scale, MAX_ENUMERATION_POINTS)
    coeffs = red_coeffs @ np.array(t, dtype=np.int64).T
    nonzero = np.any(coeffs != 0, axis=1)
    coeffs = coeffs[nonzero]

    if exact:
        norms = _exact_norms(coeffs, lattice.exact_gram)
        lambda_exact = min(norms)
        chosen = [coeffs[i] for i, v in enumerate(norms) if v == lambda_exact]
        lambda1 = _exact_value(lambda_exact, lattice.gram_scale)
    else:
        norms = np.sum((coeffs @ lattice.gram) * coeffs, axis=1)
        lambda1 = float(norms.min())
        lambda_exact = None
        chosen = [coeffs[i] for i in np.flatnonzero(norms <= lambda1 * (1 + DEFAULT_TOLERANCE))]

    reps = sorted({_canonical_sign(c) for c in chosen}, reverse=True)
    report = ShortVectorReport(
        lambda1=lambda1,
        minimal_vectors=_vectors_from_coeffs(lattice, reps),
        coefficients=tuple(reps),
        lambda1_exact=lambda_exact,
    )
    logger.debug("lambda1=%s with %d minimal vectors up to sign", lambda1, len(reps))
    lattice._cache["short"] = report
    return report


# ---------------------------------------------------------------------------
# normal forms
# ---------------------------------------------------------------------------

def _int_matrix(matrix: Sequence[Sequence[int]]) -> sympy.Matrix:
    return sympy.Matrix([[int(v) for v in row] for row in matrix])


def column_hnf(matrix: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    """
    Column-style Hermite normal form of an n x k integer matrix of rank n.

    The result H is n x n upper triangular with H[i][i] > 0 and
    0 <= H[i][j] < H[i][i] for j > i; H·Z^n equals the column span of the
    input. Two bases generate the same lattice iff their HNFs are equal.
    """
    m = _int_matrix(matrix)
    n = m.rows
    if n == 0 or m.rank() < n:
        raise DegenerateLattice("matrix does not have full row rank")
    h = hermite_normal_form(m)
    if h.shape != (n, n):
        raise DegenerateLattice("matrix does not have full row rank")
    return tuple(tuple(int(h[i, j]) for j in range(n)) for i in range(n))


def smith_decomposition(matrix: Sequence[Sequence[int]]):
    """
    Smith normal form with transforms: returns (U, divisors, V) such that
    U·M·V = diag(divisors), U and V unimodular, d_1 | d_2 | ... | d_n.
    """
    m = _int_matrix(matrix)
    if m.rows == 0 or m.rows != m.cols:
        raise DegenerateLattice("coefficient matrix must be square")
    if m.det() == 0:
        raise DegenerateLattice("coefficient matrix is singular")
    smf, s, t = smith_normal_decomp(m, domain=ZZ)
    n = m.rows
    u = [[int(s[i, j]) for j in range(n)] for i in range(n)]
    v = [[int(t[i, j]) for j in range(n)] for i in range(n)]
    divisors = []
    for i in range(n):
        d = int(smf[i, i])
        if d < 0:
            u[i] = [-x for x in u[i]]
        divisors.append(abs(d))
    return u, tuple(divisors), v


def smith_quotient(coeff: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    """Elementary divisors d_1 | ... | d_n of Z^n / M·Z^n."""
    m = _int_matrix(coeff)
    if m.rows == 0 or m.rows != m.cols or m.det() == 0:
        raise DegenerateLattice("coefficient matrix must be square and non-singular")
    return tuple(abs(int(d)) for d in invariant_factors(m, domain=ZZ))



# ---------------------------------------------------------------------------
# sublattices and classification
# ---------------------------------------------------------------------------

def coefficient_matrix(sub: Lattice, sup: Lattice, tol: float = DEFAULT_TOLERANCE) -> List[List[int]]:
    """
    Integer M with sub = sup·M; raises NotASublattice when M is not integral.
    """
    if sub.n != sup.n:
        raise NotASublattice("lattices have different dimensions")
    if sub.integer_basis is not None and sup.integer_basis is not None:
        b_sup = sympy.Matrix(sup.integer_basis)
        m = b_sup.LUsolve(sympy.Matrix(sub.integer_basis))
        if any(not entry.is_integer for entry in m):
            raise NotASublattice("coefficients of the sublattice basis are not integers")
        return [[int(m[i, j]) for j in range(sub.n)] for i in range(sub.n)]

    m = np.linalg.solve(sup.basis, sub.basis)
    rounded = np.round(m)
    if np.abs(m - rounded).max() > tol * max(1.0, np.abs(m).max()):
        raise NotASublattice(f"coefficients deviate from integers by {np.abs(m - rounded).max():.3e}")
    return rounded.astype(int).tolist()


def sublattice_index(sub: Lattice, sup: Lattice, tol: float = DEFAULT_TOLERANCE) -> int:
    """[sup : sub] = vol(sub)/vol(sup), verified integral through the coefficient matrix."""
    m = coefficient_matrix(sub, sup, tol)
    index = abs(int(_exact_det(m)))
    if index == 0:
        raise DegenerateLattice("sublattice basis is singular")
    return index


def _rank(vectors: Sequence[Sequence]) -> int:
    if not vectors:
        return 0
    return sympy.Matrix([list(v) for v in vectors]).rank()


def classify_wr(lattice: Lattice) -> WrClass:
    """
    NotWR / WR / StronglyWR.

    WR when the minimal vectors span R^n; strongly WR when they also generate
    the lattice, i.e. the sublattice they span has index 1.
    """
    report = shortest_vectors(lattice)
    coeffs = [list(c) for c in report.coefficients]
    witness = []
    for c in coeffs:
        if _rank(witness + [c]) > len(witness):
            witness.append(c)
        if len(witness) == lattice.n:
            break
    if len(witness) < lattice.n:
        return WrClass(WrKind.NOT_WR, report.lambda1)

    witness_vectors = _vectors_from_coeffs(lattice, witness)
    columns = _transpose(coeffs)
    hnf = column_hnf(columns)
    index = math.prod(hnf[i][i] for i in range(lattice.n))
    kind = WrKind.STRONGLY_WR if index == 1 else WrKind.WR
    return WrClass(kind, report.lambda1, witness_vectors)


def gauss_reduce_form(a: int, b: int, c: int) -> Tuple[int, int, int]:
    """
    Lagrange-Gauss reduction of the binary Gram form [[a, b], [b, c]].

    The result satisfies |2b| <= a <= c; a planar lattice is WR iff a == c.
    """
    while True:
        if a > c:
            a, c = c, a
        m = (2 * b + a) // (2 * a)
        if m == 0:
            return a, b, c
        c = c - 2 * m * b + m * m * a
        b = b - m * a
        if a <= c:
            return a, b, c


# ---------------------------------------------------------------------------
# Hermite bounds
# ---------------------------------------------------------------------------

def _require_table(n: int) -> None:
    if n not in HERMITE_POWERS:
        raise UnsupportedDimension(f"Hermite constant is tabulated for n = 1..8 only, got n = {n}")


def hermite_candidate_norms(n: int, vol) -> range:
    """
    Integers m with vol^(2/n) <= m <= gamma_n·vol^(2/n): the only possible
    lambda1 values of an integral WR lattice with that volume.
    """
    _require_table(n)
    if vol <= 0:
        raise UsageFailure("volume must be positive")
    v2 = Fraction(vol) ** 2 if _is_integer_value(vol) or isinstance(vol, Fraction) else Fraction(float(vol) ** 2)
    lower = max(1, math.floor(float(v2) ** (1.0 / n)) - 1)
    while Fraction(lower) ** n < v2:
        lower += 1
    cap = HERMITE_POWERS[n] * v2
    upper = math.floor(float(cap) ** (1.0 / n)) + 1
    while Fraction(upper) ** n > cap:
        upper -= 1
    return range(lower, upper + 1)


def hermite_bound_holds(lattice: Lattice, tol: float = DEFAULT_TOLERANCE):
    """Returns (lower, lambda1, upper, ok) for vol^(2/n) <= lambda1 <= gamma_n·vol^(2/n)."""
    _require_table(lattice.n)
    base = float(volume(lattice)) ** (2.0 / lattice.n)
    lam = float(shortest_vectors(lattice).lambda1)
    lower, upper = base, HERMITE_TABLE[lattice.n] * base
    ok = lower * (1 - tol) <= lam <= upper * (1 + tol)
    return lower, lam, upper, ok
