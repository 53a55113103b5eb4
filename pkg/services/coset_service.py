"""
Coset Service Module - Nested lattice coset codes
Contains the nested pair Λ_E ⊂ Λ_B, coset labelling through the Smith normal
form, finite PAM codebooks, encoding of messages as random coset
representatives, and rate/energy accounting.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from services.errors import BoundsExceeded, EmptyCoset, NotInLattice, UsageFailure
from services.lattice_service import (
    DEFAULT_TOLERANCE, Lattice, apply_rotation, coefficient_matrix, smith_decomposition, volume,
)

logger = logging.getLogger(__name__)

MAX_CODEBOOK = 2 ** 20


@dataclass(frozen=True, eq=False)
class NestedLatticePair:
    lattice_b: Lattice
    lattice_e: Lattice
    coeff: Tuple[Tuple[int, ...], ...]
    divisors: Tuple[int, ...]
    index: int
    label_transform: Tuple[Tuple[int, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.lattice_b.n


@dataclass(frozen=True)
class CosetLabel:
    residues: Tuple[int, ...]


@dataclass(frozen=True)
class SignalingSet:
    m_pam: int

    def __post_init__(self):
        if self.m_pam <= 0 or self.m_pam % 2:
            raise UsageFailure(f"M_pam must be an even positive integer, got {self.m_pam}")

    @property
    def values(self) -> np.ndarray:
        return np.arange(-self.m_pam + 1, self.m_pam, 2)


@dataclass(frozen=True)
class Rates:
    total: float
    information: float
    confusion: float


@dataclass(frozen=True, eq=False)
class CosetCode:
    """
    A nested pair with its PAM box codebook.

    Codeword ordinals follow the lexicographic enumeration of values^n. The
    transmitted codeword is x = B_B·s for the PAM symbol vector s; its message
    is the coset of the Λ_B point with coordinates u = (s + M_pam - 1)/2, the
    PAM symbol indices, which codebook_coords holds.
    Codewords carrying message m are rep_order[rep_offsets[m]:rep_offsets[m+1]].
    """

    pair: NestedLatticePair
    signaling: SignalingSet
    codebook_coords: np.ndarray
    codebook: np.ndarray
    messages: np.ndarray
    rep_order: np.ndarray
    rep_offsets: np.ndarray

    @property
    def n(self) -> int:
        return self.pair.n

    @property
    def size(self) -> int:
        return len(self.codebook)


def make_nested_pair(lattice_b: Lattice, lattice_e: Lattice, coeff: Optional[Sequence[Sequence[int]]] = None,
                     tol: float = DEFAULT_TOLERANCE) -> NestedLatticePair:
    """
    Build Λ_E ⊂ Λ_B from two lattices; coeff (with Λ_E = Λ_B·M) may be given
    when it is known exactly, e.g. for embedded ideals.
    """
    m = [list(map(int, row)) for row in coeff] if coeff is not None else coefficient_matrix(lattice_e, lattice_b, tol)
    u, divisors, _ = smith_decomposition(m)
    index = math.prod(divisors)
    ratio = float(volume(lattice_e)) / float(volume(lattice_b))
    if abs(ratio - index) > 1e-6 * index:
        logger.warning("volume ratio %.9g differs from the coefficient index %d", ratio, index)
    return NestedLatticePair(lattice_b, lattice_e, tuple(tuple(r) for r in m), divisors, index,
                             tuple(tuple(r) for r in u))


def rotate_pair(pair: NestedLatticePair, rotation, tol: float = DEFAULT_TOLERANCE) -> NestedLatticePair:
    """Apply the same orthogonal map to both lattices; coset structure is unchanged."""
    return NestedLatticePair(
        apply_rotation(pair.lattice_b, rotation, tol),
        apply_rotation(pair.lattice_e, rotation, tol),
        pair.coeff, pair.divisors, pair.index, pair.label_transform,
    )


# ---------------------------------------------------------------------------
# labels
# ---------------------------------------------------------------------------

def coset_labels(pair: NestedLatticePair, coords: np.ndarray) -> np.ndarray:
    """Vectorized labels: rows of (U·c) mod d for integer coordinate rows c."""
    u = np.array(pair.label_transform, dtype=np.int64)
    d = np.array(pair.divisors, dtype=np.int64)
    return np.mod(np.asarray(coords, dtype=np.int64) @ u.T, d)


def coset_label(pair: NestedLatticePair, coords: Sequence) -> CosetLabel:
    """
    Label of the Λ_B point with the given coordinates in the Λ_B basis.

    Constant on cosets: label(x + r) = label(x) for every r in Λ_E.
    """
    c = np.asarray(coords, dtype=float)
    if c.shape != (pair.n,) or np.abs(c - np.round(c)).max(initial=0.0) > DEFAULT_TOLERANCE:
        raise NotInLattice(f"coordinates {list(coords)} are not an integer vector of length {pair.n}")
    label = coset_labels(pair, np.round(c).astype(np.int64)[None, :])[0]
    return CosetLabel(tuple(int(r) for r in label))


def point_coordinates(lattice: Lattice, point: Sequence[float], tol: float = DEFAULT_TOLERANCE) -> Tuple[int, ...]:
    """Integer coordinates of a lattice point in the lattice basis."""
    c = np.linalg.solve(lattice.basis, np.asarray(point, dtype=float))
    if np.abs(c - np.round(c)).max() > tol * max(1.0, np.abs(c).max()):
        raise NotInLattice(f"point {list(point)} is not in the lattice")
    return tuple(int(v) for v in np.round(c))


def label_to_message(pair: NestedLatticePair, labels: np.ndarray) -> np.ndarray:
    """Mixed-radix message index in [0, index) for each label row."""
    labels = np.atleast_2d(labels)
    result = np.zeros(len(labels), dtype=np.int64)
    for i, d in enumerate(pair.divisors):
        result = result * d + labels[:, i]
    return result


def message_to_label(pair: NestedLatticePair, message: int) -> CosetLabel:
    residues = []
    for d in reversed(pair.divisors):
        message, r = divmod(int(message), d)
        residues.append(r)
    return CosetLabel(tuple(reversed(residues)))


def all_labels(pair: NestedLatticePair):
    """Every label of Λ_B/Λ_E, in message-index order."""
    return [message_to_label(pair, m) for m in range(pair.index)]


# ---------------------------------------------------------------------------
# codes
# ---------------------------------------------------------------------------

def pam_box(signaling: SignalingSet, n: int) -> np.ndarray:
    """values^n in lexicographic order (first coordinate varies slowest)."""
    grids = np.meshgrid(*([signaling.values] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.int64)


def build_coset_code(pair: NestedLatticePair, m_pam: int, max_codebook: int = MAX_CODEBOOK) -> CosetCode:
    """
    Coset code with the symmetric PAM box codebook.

    Raises EmptyCoset when some message has no representative in the box.
    """
    signaling = SignalingSet(m_pam)
    size = m_pam ** pair.n
    if size > max_codebook:
        raise BoundsExceeded(f"codebook of {size} points exceeds the limit of {max_codebook}")

    symbols = pam_box(signaling, pair.n)
    coords = (symbols + (m_pam - 1)) // 2
    codebook = symbols @ pair.lattice_b.basis.T
    messages = label_to_message(pair, coset_labels(pair, coords))
    counts = np.bincount(messages, minlength=pair.index)
    empty = np.flatnonzero(counts == 0)
    if len(empty):
        raise EmptyCoset(message_to_label(pair, int(empty[0])).residues)

    order = np.argsort(messages, kind="stable")
    offsets = np.concatenate([[0], np.cumsum(counts)])
    if counts.min() != counts.max():
        logger.warning("unbalanced cosets: %d to %d representatives per message", counts.min(), counts.max())
    logger.info("built coset code: n=%d, index=%d, M_pam=%d, %d codewords", pair.n, pair.index, m_pam, size)
    return CosetCode(pair, signaling, coords, codebook, messages, order, offsets)


def representatives(code: CosetCode, message: int) -> np.ndarray:
    """Codebook ordinals that carry the given message index."""
    return code.rep_order[code.rep_offsets[message]:code.rep_offsets[message + 1]]


def codeword_ordinal(code: CosetCode, codeword: Sequence[float], tol: float = DEFAULT_TOLERANCE) -> int:
    """Codebook ordinal of a transmitted point x = B_B·s; raises NotInLattice off the codebook."""
    s = np.asarray(point_coordinates(code.pair.lattice_b, codeword, tol), dtype=np.int64)
    m = code.signaling.m_pam
    if np.any(s % 2 == 0) or np.any(np.abs(s) > m - 1):
        raise NotInLattice(f"point {list(codeword)} is not a codeword of the {m}-PAM box")
    ordinal = 0
    for u in (s + m - 1) // 2:
        ordinal = ordinal * m + int(u)
    return ordinal


def codeword_label(code: CosetCode, ordinal: int) -> CosetLabel:
    """
    Message carried by a codeword.

    The label is taken on the PAM index coordinates u = (s + M_pam - 1)/2,
    not on s itself: odd s alone meets only 2^n cosets of a pair such as
    (Z^4, 4Z^4).
    """
    if not 0 <= ordinal < code.size:
        raise UsageFailure(f"codeword ordinal {ordinal} is outside [0, {code.size})")
    return coset_label(code.pair, code.codebook_coords[ordinal])


def encode_messages(code: CosetCode, messages: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized encoding: one uniformly drawn representative ordinal per message index."""
    messages = np.asarray(messages, dtype=np.int64)
    start = code.rep_offsets[messages]
    count = code.rep_offsets[messages + 1] - start
    picks = start + np.floor(rng.random(len(messages)) * count).astype(np.int64)
    return code.rep_order[picks]


def encode(code: CosetCode, message: CosetLabel, rng: np.random.Generator) -> np.ndarray:
    """
    Uniformly random codeword of the message's coset.

    Args:
        code: the coset code
        message: coset label with 0 <= r_i < d_i
        rng: caller-owned numpy Generator

    Returns:
        np.ndarray: the codeword x = B_B·s, with
        codeword_label(code, codeword_ordinal(code, x)) == message
    """
    residues = np.array(message.residues, dtype=np.int64)
    if len(residues) != code.n or np.any(residues < 0) or np.any(residues >= np.array(code.pair.divisors)):
        raise UsageFailure(f"label {message.residues} is out of range for divisors {code.pair.divisors}")
    m = int(label_to_message(code.pair, residues[None, :])[0])
    ordinal = encode_messages(code, np.array([m]), rng)[0]
    return code.codebook[ordinal]


def rates(code: CosetCode) -> Rates:
    """R = log2 M_pam, R_i = log2(index)/n, R_c = R - R_i (bits per channel use)."""
    total = math.log2(code.signaling.m_pam)
    information = math.log2(code.pair.index) / code.n
    return Rates(total, information, total - information)


def average_energy(code: CosetCode) -> float:
    """
    Mean of ||x||^2 over the codebook: trace(G)·(M^2 - 1)/3 for independent
    zero-mean PAM coordinates.
    """
    m = code.signaling.m_pam
    return float(np.trace(code.pair.lattice_b.gram)) * (m * m - 1) / 3.0


def coset_balance(code: CosetCode) -> Tuple[int, int]:
    """(fewest, most) representatives over all messages."""
    counts = np.diff(code.rep_offsets)
    return int(counts.min()), int(counts.max())


def code_fingerprint(code: CosetCode) -> str:
    """Stable hash of the code's defining data for run metadata."""
    payload = {
        "basis_b": np.round(code.pair.lattice_b.basis, 12).tolist(),
        "coeff": [list(r) for r in code.pair.coeff],
        "m_pam": code.signaling.m_pam,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]
