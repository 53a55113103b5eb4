"""
Ideal Service Module - Real quadratic fields and principal ideal lattices
Contains exact arithmetic in O_F for F = Q(sqrt D), the canonical embedding,
principal ideal lattices σ((α)) ⊂ σ(O_F), and the search for well-rounded
principal ideals.

Elements are stored as (p + q·sqrt D)/2 with integers p, q. For D ≡ 1 (mod 4)
p and q must have equal parity; otherwise both must be even.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from sympy import integer_nthroot
from sympy.ntheory.factor_ import core
from sympy.solvers.diophantine.diophantine import diop_DN

from services.errors import DegenerateLattice, NotWellRounded, UsageFailure, ZeroGenerator
from services.lattice_service import (
    HERMITE_TABLE, Lattice, WrClass, WrKind, classify_wr, column_hnf, gauss_reduce_form, scale_lattice,
    shortest_vectors, volume,
)
from services.coset_service import NestedLatticePair, make_nested_pair

logger = logging.getLogger(__name__)

DEFAULT_UNIT_STEPS = 3
DEFAULT_BOX_SLACK = 2.0
MAX_GENERATOR_Q = 1_000_000


def is_squarefree(d: int) -> bool:
    return d >= 1 and core(d) == d


@dataclass(frozen=True)
class QuadraticField:
    d: int

    def __post_init__(self):
        if self.d <= 1 or not is_squarefree(self.d):
            raise UsageFailure(f"D must be a square-free integer > 1, got {self.d}")

    @property
    def half_integral(self) -> bool:
        """True when O_F = Z[(1 + sqrt D)/2]."""
        return self.d % 4 == 1

    @property
    def discriminant(self) -> int:
        return self.d if self.half_integral else 4 * self.d

    @property
    def omega(self) -> "QuadraticInteger":
        return QuadraticInteger(1, 1, self.d) if self.half_integral else QuadraticInteger(0, 2, self.d)

    def element(self, a: int, b: int) -> "QuadraticInteger":
        """a + b·sqrt D."""
        return QuadraticInteger(2 * a, 2 * b, self.d)


@dataclass(frozen=True)
class QuadraticInteger:
    p: int
    q: int
    d: int

    def __post_init__(self):
        if self.d % 4 == 1:
            if (self.p - self.q) % 2:
                raise UsageFailure(f"({self.p} + {self.q}√{self.d})/2 is not an algebraic integer")
        elif self.p % 2 or self.q % 2:
            raise UsageFailure(f"({self.p} + {self.q}√{self.d})/2 is not in Z[√{self.d}]")

    def __add__(self, other: "QuadraticInteger") -> "QuadraticInteger":
        return QuadraticInteger(self.p + other.p, self.q + other.q, self.d)

    def __sub__(self, other: "QuadraticInteger") -> "QuadraticInteger":
        return QuadraticInteger(self.p - other.p, self.q - other.q, self.d)

    def __neg__(self) -> "QuadraticInteger":
        return QuadraticInteger(-self.p, -self.q, self.d)

    def __mul__(self, other: "QuadraticInteger") -> "QuadraticInteger":
        return QuadraticInteger(
            (self.p * other.p + self.q * other.q * self.d) // 2,
            (self.p * other.q + self.q * other.p) // 2,
            self.d,
        )

    def __pow__(self, k: int) -> "QuadraticInteger":
        result = QuadraticInteger(2, 0, self.d)
        for _ in range(k):
            result = result * self
        return result

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def conjugate(self) -> "QuadraticInteger":
        return QuadraticInteger(self.p, -self.q, self.d)

    @property
    def norm(self) -> int:
        """Signed field norm σ1(x)·σ2(x)."""
        return (self.p * self.p - self.q * self.q * self.d) // 4

    @property
    def trace(self) -> int:
        return self.p

    @property
    def embedded_norm_sq(self) -> int:
        """||σ(x)||^2 = (p^2 + q^2 D)/2, an integer on O_F."""
        return (self.p * self.p + self.q * self.q * self.d) // 2

    def reduced(self) -> Tuple[int, int, int]:
        """(p, q, denom) with the value (p + q sqrt D)/denom in lowest terms."""
        if self.p % 2 == 0 and self.q % 2 == 0:
            return self.p // 2, self.q // 2, 1
        return self.p, self.q, 2

    def __str__(self) -> str:
        p, q, den = self.reduced()
        tail = "" if den == 1 else "/2"
        if q == 0:
            return f"{p}{tail}"
        sign = "-" if q < 0 else "+"
        coef = "" if abs(q) == 1 else str(abs(q))
        head = "" if p == 0 else f"{p}{tail} {sign} "
        if p == 0 and q < 0:
            head = "-"
        return f"{head}{coef}√{self.d}{tail}"


@dataclass(frozen=True, eq=False)
class IdealLattice:
    field: QuadraticField
    generator: QuadraticInteger
    lattice: Lattice
    norm: int
    coeff: Tuple[Tuple[int, int], Tuple[int, int]]
    parent: Lattice


@dataclass(frozen=True)
class ScanHit:
    d: int
    discriminant: int
    generator: QuadraticInteger
    index: int
    lambda1: int
    wr_class: WrKind
    largenorm_ok: bool


# ---------------------------------------------------------------------------
# embedding and norms
# ---------------------------------------------------------------------------

def canonical_embed(field: QuadraticField, x: QuadraticInteger) -> np.ndarray:
    """(σ1(x), σ2(x)) with σ1(sqrt D) = sqrt D and σ2(sqrt D) = -sqrt D."""
    root = math.sqrt(field.d)
    return np.array([(x.p + x.q * root) / 2.0, (x.p - x.q * root) / 2.0])


def element_norm(field: QuadraticField, x: QuadraticInteger) -> int:
    """|N(x)| = |p^2 - q^2 D| / 4, exact."""
    return abs(x.norm)


def _trace_pair(x: QuadraticInteger, y: QuadraticInteger) -> int:
    """<σ(x), σ(y)> = Tr(x·y)."""
    return (x.p * y.p + x.q * y.q * x.d) // 2


def _integral_coords(field: QuadraticField, x: QuadraticInteger) -> Tuple[int, int]:
    """Coordinates of x in the integral basis {1, ω}."""
    if field.half_integral:
        return (x.p - x.q) // 2, x.q
    return x.p // 2, x.q // 2


def _embedded_lattice(field: QuadraticField, elements) -> Lattice:
    basis = np.column_stack([canonical_embed(field, e) for e in elements])
    gram = [[_trace_pair(a, b) for b in elements] for a in elements]
    return Lattice.from_exact_gram(basis, gram)


def ring_of_integers_lattice(field: QuadraticField) -> Lattice:
    """Λ_F = σ(O_F) with basis σ(1), σ(ω); its volume is sqrt(Δ)."""
    return _embedded_lattice(field, [QuadraticInteger(2, 0, field.d), field.omega])


def principal_ideal_lattice(field: QuadraticField, alpha: QuadraticInteger) -> IdealLattice:
    """
    Λ_I = σ((α)) with Z-basis {α, α·ω}.

    The coefficient matrix against Λ_F has |det| = |N(α)|, the ideal norm.
    """
    if alpha.is_zero():
        raise ZeroGenerator("the zero element does not generate a lattice")
    if alpha.d != field.d:
        raise UsageFailure(f"generator lives in Q(√{alpha.d}), not Q(√{field.d})")
    beta = alpha * field.omega
    c1, c2 = _integral_coords(field, alpha), _integral_coords(field, beta)
    coeff = ((c1[0], c2[0]), (c1[1], c2[1]))
    norm = element_norm(field, alpha)
    det = abs(coeff[0][0] * coeff[1][1] - coeff[0][1] * coeff[1][0])
    if det != norm:
        raise DegenerateLattice(f"index {det} disagrees with the norm {norm} of {alpha}")
    return IdealLattice(field, alpha, _embedded_lattice(field, [alpha, beta]), norm, coeff,
                        ring_of_integers_lattice(field))


def ideal_pair(il: IdealLattice) -> NestedLatticePair:
    """Nested pair Λ_I ⊂ Λ_F with the exact coefficient matrix."""
    return make_nested_pair(il.parent, il.lattice, il.coeff)


def ideal_hnf(il: IdealLattice) -> Tuple[Tuple[int, ...], ...]:
    """Canonical form of the ideal: equal for associate generators."""
    return column_hnf(il.coeff)


def is_wr_ideal(il: IdealLattice) -> WrClass:
    return classify_wr(il.lattice)


def largenorm_check(il: IdealLattice) -> bool:
    """N(I) >= sqrt(3Δ)/4, tested exactly as 16·N^2 >= 3Δ."""
    if not is_wr_ideal(il).is_wr:
        raise NotWellRounded(f"ideal ({il.generator}) of Q(√{il.field.d}) is not well-rounded")
    return 16 * il.norm * il.norm >= 3 * il.field.discriminant


# ---------------------------------------------------------------------------
# units
# ---------------------------------------------------------------------------

def fundamental_unit(field: QuadraticField) -> QuadraticInteger:
    """
    Fundamental unit ε > 1 of O_F.

    The Pell unit x + y·sqrt D is the least solution of x^2 - D·y^2 = -1,
    or of x^2 - D·y^2 = 1 when the negative equation has none; for
    D ≡ 1 (mod 4) the unit of O_F may be its cube root, found exactly from
    the trace relation Tr(η) = t^3 - 3·N(ε)·t with t = Tr(ε).
    """
    d = field.d
    solutions = diop_DN(d, -1) or diop_DN(d, 1)
    h, k = min((abs(int(x)), abs(int(y))) for x, y in solutions)
    eta = QuadraticInteger(2 * h, 2 * k, d)
    if not field.half_integral:
        return eta

    two_x = eta.trace
    guess = int(integer_nthroot(two_x, 3)[0])
    for t in range(max(1, guess - 2), guess + 3):
        for n in (1, -1):
            if t ** 3 - 3 * n * t != two_x:
                continue
            q_sq, rem = divmod(t * t - 4 * n, d)
            q = math.isqrt(q_sq) if rem == 0 and q_sq > 0 else 0
            if q and q * q == q_sq and (t - q) % 2 == 0:
                eps = QuadraticInteger(t, q, d)
                if eps ** 3 == eta:
                    return eps
    return eta


def _unit_inverse(unit: QuadraticInteger) -> QuadraticInteger:
    c = unit.conjugate()
    return c if unit.norm == 1 else -c


def _generator_key(x: QuadraticInteger):
    return (x.embedded_norm_sq, x.p < 0, x.q < 0, abs(x.p), abs(x.q))


def canonical_generator(field: QuadraticField, alpha: QuadraticInteger,
                        unit_steps: int = DEFAULT_UNIT_STEPS,
                        unit: Optional[QuadraticInteger] = None) -> QuadraticInteger:
    """
    Associate of α (times ±ε^k, |k| <= unit_steps) with the smallest ||σ||^2;
    ties prefer non-negative p, then non-negative q.
    """
    unit = unit or fundamental_unit(field)
    inverse = _unit_inverse(unit)
    candidates = [alpha]
    up, down = alpha, alpha
    for _ in range(unit_steps):
        up, down = up * unit, down * inverse
        candidates.extend([up, down])
    candidates.extend([-c for c in candidates])
    return min(candidates, key=_generator_key)


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

def _unit_value(unit: QuadraticInteger) -> float:
    try:
        return (unit.p + unit.q * math.sqrt(unit.d)) / 2.0
    except OverflowError:
        return math.inf


def generator_radius(field: QuadraticField, bound: int, slack: float = DEFAULT_BOX_SLACK,
                     unit: Optional[QuadraticInteger] = None) -> Tuple[float, bool]:
    """
    Embedded squared-norm radius for the generator search, and whether it is complete.

    Every principal ideal of norm N has a generator with ||σ(α)||^2 <= N·(ε + 1/ε),
    so that radius makes the scan complete; it is clamped when the fundamental
    unit is too large to enumerate.
    """
    box = slack * HERMITE_TABLE[2] * bound * math.sqrt(field.discriminant)
    eps = _unit_value(unit or fundamental_unit(field))
    complete = bound * (eps + 1.0 / eps)
    cap = field.d * MAX_GENERATOR_Q * MAX_GENERATOR_Q / 2.0
    if complete <= cap:
        return max(box, complete), True
    return max(box, cap), False


def _generator_candidates(field: QuadraticField, bound: int, radius: float) -> List[QuadraticInteger]:
    """
    Nonzero α (one of ±α) with |N(α)| <= bound and ||σ(α)||^2 <= radius.

    Since |p^2 - q^2 D| <= 4·bound, p lies in a narrow window around ±q·sqrt(D).
    """
    d = field.d
    root = math.sqrt(d)
    q_max = math.isqrt(int(2 * radius / d)) + 1
    q = np.arange(0, q_max + 1, dtype=np.int64)
    width = np.empty_like(q)
    width[0] = math.isqrt(4 * bound) + 1
    width[1:] = np.ceil(4 * bound / (q[1:] * root)).astype(np.int64) + 1
    counts = 2 * width + 1
    qq = np.repeat(q, counts)
    starts = np.repeat(np.cumsum(counts) - counts, counts)
    offsets = np.arange(int(counts.sum()), dtype=np.int64) - starts - np.repeat(width, counts)
    centre = np.rint(qq * root).astype(np.int64)
    upper = qq > 0
    p = np.concatenate([centre + offsets, -centre[upper] + offsets[upper]])
    qq = np.concatenate([qq, qq[upper]])

    if field.half_integral:
        valid = (p - qq) % 2 == 0
    else:
        valid = (p % 2 == 0) & (qq % 2 == 0)
    valid &= (qq > 0) | (p > 0)
    norms = np.abs(p * p - qq * qq * d) // 4
    valid &= (norms >= 1) & (norms <= bound)
    valid &= (p * p + qq * qq * d) <= 2 * radius
    return [QuadraticInteger(int(a), int(b), d) for a, b in zip(p[valid], qq[valid])]


def scan_field(d: int, index_bound_factor: float = 2, unit_steps: int = DEFAULT_UNIT_STEPS,
               slack: float = DEFAULT_BOX_SLACK) -> List[ScanHit]:
    """WR principal ideals of Q(sqrt d) with index <= index_bound_factor·d."""
    field = QuadraticField(d)
    bound = int(index_bound_factor * d)
    unit = fundamental_unit(field)
    radius, complete = generator_radius(field, bound, slack, unit)
    if not complete:
        logger.warning("D=%d: fundamental unit too large, generator search limited to ||σ||^2 <= %.4g",
                       d, radius)
    candidates = _generator_candidates(field, bound, radius)
    omega = field.omega

    found = {}
    for alpha in candidates:
        beta = alpha * omega
        a, b, c = gauss_reduce_form(alpha.embedded_norm_sq, _trace_pair(alpha, beta), beta.embedded_norm_sq)
        if a != c:
            continue
        c1, c2 = _integral_coords(field, alpha), _integral_coords(field, beta)
        key = column_hnf(((c1[0], c2[0]), (c1[1], c2[1])))
        if key not in found or _generator_key(alpha) < _generator_key(found[key]):
            found[key] = alpha

    hits = []
    for alpha in found.values():
        if unit_steps:
            alpha = canonical_generator(field, alpha, unit_steps, unit)
        il = principal_ideal_lattice(field, alpha)
        wr = is_wr_ideal(il)
        if not wr.is_wr:
            logger.error("planar reduction and enumeration disagree for (%s) in Q(√%d)", alpha, d)
            continue
        hits.append(ScanHit(d, field.discriminant, alpha, il.norm, int(wr.lambda1), wr.kind,
                            largenorm_check(il)))
    hits.sort(key=lambda h: (h.d, h.index, _generator_key(h.generator)))
    logger.debug("D=%d: %d box candidates, %d WR principal ideals", d, len(candidates), len(hits))
    return hits


def wr_principal_scan(d_values: Iterable[int], index_bound_factor: float = 2,
                      unit_steps: int = DEFAULT_UNIT_STEPS, slack: float = DEFAULT_BOX_SLACK,
                      runner=None) -> List[ScanHit]:
    """
    All WR principal ideals of index <= index_bound_factor·D found in the
    generator box, for every D given. Deterministic; sorted by (D, index).

    Args:
        d_values: square-free integers > 1
        index_bound_factor: index bound as a multiple of D
        unit_steps: fundamental-unit multiplications used to canonicalize generators
        slack: generator box radius as a multiple of the Hermite bound
        runner: optional TrialRunner; fields are independent tasks
    """
    d_list = sorted(set(int(d) for d in d_values))
    for d in d_list:
        QuadraticField(d)
    tasks = [(d, index_bound_factor, unit_steps, slack) for d in d_list]
    if runner is None:
        results = [scan_field(*task) for task in tasks]
    else:
        results = runner.map(_scan_task, tasks)
    hits = [hit for per_field in results for hit in per_field]
    hits.sort(key=lambda h: (h.d, h.index, _generator_key(h.generator)))
    logger.info("scanned %d fields, %d WR principal ideals", len(d_list), len(hits))
    return hits


def _scan_task(task):
    return scan_field(*task)


def incomplete_fields(d_values: Iterable[int], index_bound_factor: float = 2,
                      slack: float = DEFAULT_BOX_SLACK) -> List[int]:
    """Fields whose generator radius is clamped, so their scan may miss ideals."""
    clamped = []
    for d in sorted(set(int(d) for d in d_values)):
        field = QuadraticField(d)
        if not generator_radius(field, int(index_bound_factor * d), slack)[1]:
            clamped.append(d)
    return clamped


# Reference WR principal ideals as (D, p, q, index), generator (p + q·sqrt D)/2.
REFERENCE_IDEALS = (
    (3, 6, 2, 6),
    (15, 10, 2, 10),
    (35, 14, 2, 14),
    (143, 26, 2, 26),
    (195, 30, 2, 30),
    (21, 7, -1, 7),
    (77, 11, 1, 11),
    (165, 15, 1, 15),
    (221, 17, 1, 17),
    (285, 19, 1, 19),
)


def missing_reference_ideals(hits: List[ScanHit], d_values: Optional[Iterable[int]] = None) -> List[str]:
    """
    Entries of REFERENCE_IDEALS whose ideal is absent from the hits, one diff line each.
    Ideals are compared by HNF, so any associate generator matches. With
    d_values only the rows of those fields are expected.
    """
    scanned = None if d_values is None else set(int(d) for d in d_values)
    found = {}
    for hit in hits:
        field = QuadraticField(hit.d)
        found.setdefault(hit.d, set()).add(ideal_hnf(principal_ideal_lattice(field, hit.generator)))
    missing = []
    for d, p, q, index in REFERENCE_IDEALS:
        if scanned is not None and d not in scanned:
            continue
        field = QuadraticField(d)
        expected = QuadraticInteger(p, q, d)
        if ideal_hnf(principal_ideal_lattice(field, expected)) not in found.get(d, set()):
            missing.append(f"- D={d} generator {expected} index {index}")
    return missing


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------

def normalize_to_covolume(lattice: Lattice, target_vol: float) -> Lattice:
    """Scale so that the volume equals target_vol; lambda1 scales by (target/vol)^(2/n)."""
    if target_vol <= 0:
        raise UsageFailure("target volume must be positive")
    current = float(volume(lattice))
    ratio = target_vol / current
    if ratio == 1.0:
        return lattice
    return scale_lattice(lattice, ratio ** (1.0 / lattice.n))


def normalize_pair_to_unit_base(pair: NestedLatticePair) -> NestedLatticePair:
    """Scale a nested pair so vol(Λ_B) = 1; then vol(Λ_E) equals the index."""
    c = float(volume(pair.lattice_b)) ** (-1.0 / pair.n)
    return make_nested_pair(scale_lattice(pair.lattice_b, c), scale_lattice(pair.lattice_e, c), pair.coeff)


def normalized_lambda1(lattice: Lattice, target_vol: float) -> float:
    return float(shortest_vectors(normalize_to_covolume(lattice, target_vol)).lambda1)
