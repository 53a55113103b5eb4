"""
Channel Service Module - Monte Carlo fast-fading wiretap simulation
Contains the real-baseband fast Rayleigh fading channel z = H·x + e, maximum
likelihood decoders for finite coset codebooks, Wilson confidence intervals,
the ECDP simulator and the side-by-side comparison of codes.

Eve knows H and decodes coherently over the whole codebook. A trial succeeds
when the decoded codeword lies in the transmitted coset; the representative
itself is irrelevant.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from services.coset_service import CosetCode, average_energy, code_fingerprint, coset_balance, encode_messages, rates
from services.errors import GridMismatch, UsageFailure
from services.runner_service import DEFAULT_BATCH_SIZE, batch_rng, batch_sizes

logger = logging.getLogger(__name__)

RAYLEIGH_SCALE = 1.0 / math.sqrt(2.0)
MIN_TRIALS = 1000
MAX_EXHAUSTIVE_CODEBOOK = 2 ** 20
AUTO_EXHAUSTIVE_CODEBOOK = 2 ** 16
AUDIT_EVERY = 100
DISTANCE_CHUNK = 2 ** 20
CONFIDENCE = 0.95
SNR_DEFINITION = "snr_db = 10*log10(average_energy / (n * sigma^2))"


class DecoderMode(str, Enum):
    AUTO = "auto"
    SLICER = "slicer"
    EXHAUSTIVE = "exhaustive"
    SPHERE = "sphere"


@dataclass(frozen=True)
class ChannelParams:
    sigma: float
    n: int
    rayleigh_scale: float = RAYLEIGH_SCALE

    def __post_init__(self):
        if not self.sigma > 0:
            raise UsageFailure(f"sigma must be positive, got {self.sigma}")
        if self.n < 1:
            raise UsageFailure("block length must be positive")


@dataclass(frozen=True, eq=False)
class SimPlan:
    code: CosetCode
    sigma_grid: Tuple[float, ...]
    trials: int
    master_seed: int = 0
    decoder: DecoderMode = DecoderMode.AUTO
    batch_size: int = DEFAULT_BATCH_SIZE
    label: str = ""

    def __post_init__(self):
        if not self.sigma_grid:
            raise UsageFailure("sigma grid must not be empty")
        if any(not s > 0 for s in self.sigma_grid):
            raise UsageFailure("every sigma in the grid must be positive")
        if self.trials < MIN_TRIALS:
            raise UsageFailure(f"at least {MIN_TRIALS} trials per grid point are required, got {self.trials}")
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))
        object.__setattr__(self, "decoder", DecoderMode(self.decoder))

    @classmethod
    def from_snr_db(cls, code: CosetCode, snr_grid: Sequence[float], trials: int, **kwargs) -> "SimPlan":
        return cls(code, tuple(sigma_from_snr_db(code, s) for s in snr_grid), trials, **kwargs)


@dataclass(frozen=True)
class EcdpPoint:
    grid_index: int
    sigma: float
    snr_db: float
    trials: int
    successes: int
    ecdp: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class EcdpCurve:
    points: Tuple[EcdpPoint, ...]
    code_hash: str
    seed: int
    decoder: str
    energy: float
    index: int
    rates: Dict[str, float] = field(default_factory=dict)
    balance: Tuple[int, int] = (0, 0)

    @property
    def lower_bound(self) -> float:
        """1/index, the ECDP of blind guessing."""
        return 1.0 / self.index

    def metadata(self) -> Dict:
        return {
            "seed": self.seed,
            "code_hash": self.code_hash,
            "decoder": self.decoder,
            "energy": self.energy,
            "index": self.index,
            "rates": self.rates,
            "coset_balance": list(self.balance),
            "lower_bound": self.lower_bound,
            "snr_definition": SNR_DEFINITION,
        }


@dataclass(frozen=True)
class ComparisonRow:
    grid_index: int
    sigma: float
    code_a: int
    code_b: int
    ecdp_a: float
    ecdp_b: float
    verdict: str


# ---------------------------------------------------------------------------
# channel and conversions
# ---------------------------------------------------------------------------

def sample_channel(params: ChannelParams, rng: np.random.Generator, trials: Optional[int] = None):
    """
    Rayleigh fading amplitudes with E[h^2] = 1 and Gaussian noise of standard
    deviation sigma. Returns (h, e) of shape (n,), or (trials, n) when given.
    """
    shape = params.n if trials is None else (trials, params.n)
    h = rng.rayleigh(scale=params.rayleigh_scale, size=shape)
    e = rng.normal(0.0, params.sigma, size=shape)
    return h, e


def snr_db(code: CosetCode, sigma: float) -> float:
    if not sigma > 0:
        raise UsageFailure("sigma must be positive")
    return 10.0 * math.log10(average_energy(code) / (code.n * sigma * sigma))


def sigma_from_snr_db(code: CosetCode, value_db: float) -> float:
    """Inverse of snr_db."""
    return math.sqrt(average_energy(code) / (code.n * 10.0 ** (value_db / 10.0)))


def cross_packing_index(t: int) -> int:
    """Index t^3 + 2t^2 + 2t + 2 of the four-dimensional cross-packing family."""
    return t ** 3 + 2 * t ** 2 + 2 * t + 2


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> Tuple[float, float]:
    if trials <= 0:
        raise UsageFailure("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, min(centre - half, p)), min(1.0, max(centre + half, p))


# ---------------------------------------------------------------------------
# decoders
# ---------------------------------------------------------------------------

def ml_decode(z: np.ndarray, h: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    """argmin_x ||z - H·x||^2 over the codebook rows; ties go to the smallest ordinal."""
    distances = np.sum((np.asarray(z)[None, :] - np.asarray(h)[None, :] * codebook) ** 2, axis=1)
    return codebook[int(np.argmin(distances))]


def _decode_exhaustive(codebook: np.ndarray, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    chunk = max(1, DISTANCE_CHUNK // len(codebook))
    out = np.empty(len(z), dtype=np.int64)
    for start in range(0, len(z), chunk):
        zs, hs = z[start:start + chunk], h[start:start + chunk]
        distances = np.sum((zs[:, None, :] - hs[:, None, :] * codebook[None, :, :]) ** 2, axis=2)
        out[start:start + chunk] = np.argmin(distances, axis=1)
    return out


def _is_diagonal(basis: np.ndarray) -> bool:
    return bool(np.all(basis[~np.eye(len(basis), dtype=bool)] == 0))


def _decode_slicer(code: CosetCode, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Per-coordinate ML for a diagonal Λ_B basis; exact and separable."""
    values = code.signaling.values.astype(float)
    gain = h * np.diag(code.pair.lattice_b.basis)[None, :]
    cost = (z[:, :, None] - gain[:, :, None] * values[None, None, :]) ** 2
    picks = np.argmin(cost, axis=2)
    m = len(values)
    weights = m ** np.arange(code.n - 1, -1, -1)
    return picks @ weights


def _sphere_search(y: np.ndarray, r: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, float]:
    """Depth-first Schnorr-Euchner search of min ||y - R·s|| over s in values^n."""
    n = len(y)
    best = {"dist": math.inf, "s": None}
    s = np.zeros(n)

    def search(level, partial):
        if partial >= best["dist"]:
            return
        if level < 0:
            best["dist"], best["s"] = partial, s.copy()
            return
        rhs = y[level] - float(r[level, level + 1:] @ s[level + 1:])
        diag = r[level, level]
        if abs(diag) > 1e-300:
            order = np.argsort(np.abs(values - rhs / diag), kind="stable")
        else:
            order = np.arange(len(values))
        for idx in order:
            s[level] = values[idx]
            search(level - 1, partial + (rhs - diag * values[idx]) ** 2)
        s[level] = 0.0

    search(n - 1, 0.0)
    return best["s"], best["dist"]


def _decode_sphere(code: CosetCode, z: np.ndarray, h: np.ndarray) -> np.ndarray:
    values = code.signaling.values.astype(float)
    basis = code.pair.lattice_b.basis
    m = len(values)
    weights = m ** np.arange(code.n - 1, -1, -1)
    out = np.empty(len(z), dtype=np.int64)
    for t in range(len(z)):
        q, r = np.linalg.qr(h[t][:, None] * basis)
        s, _ = _sphere_search(q.T @ z[t], r, values)
        out[t] = int(np.searchsorted(values, s).astype(np.int64) @ weights)
    return out


def resolve_decoder(code: CosetCode, mode: DecoderMode) -> DecoderMode:
    mode = DecoderMode(mode)
    if mode is DecoderMode.SLICER and not _is_diagonal(code.pair.lattice_b.basis):
        raise UsageFailure("slicer decoding needs a diagonal Λ_B basis")
    if mode is DecoderMode.EXHAUSTIVE and code.size > MAX_EXHAUSTIVE_CODEBOOK:
        raise UsageFailure(f"exhaustive decoding is limited to {MAX_EXHAUSTIVE_CODEBOOK} codewords")
    if mode is not DecoderMode.AUTO:
        return mode
    if _is_diagonal(code.pair.lattice_b.basis):
        return DecoderMode.SLICER
    if code.size <= AUTO_EXHAUSTIVE_CODEBOOK:
        return DecoderMode.EXHAUSTIVE
    return DecoderMode.SPHERE


def decode_batch(code: CosetCode, z: np.ndarray, h: np.ndarray, mode: DecoderMode = DecoderMode.AUTO) -> np.ndarray:
    """
    Codebook ordinals of the ML decisions for rows of z with fading rows h.

    In auto mode the sphere decoder is audited against exhaustive search on
    every AUDIT_EVERY-th trial, and the exhaustive decision wins on mismatch.
    """
    audit = DecoderMode(mode) is DecoderMode.AUTO
    mode = resolve_decoder(code, mode)
    if mode is DecoderMode.SLICER:
        return _decode_slicer(code, z, h)
    if mode is DecoderMode.EXHAUSTIVE:
        return _decode_exhaustive(code.codebook, z, h)

    decided = _decode_sphere(code, z, h)
    if audit and code.size <= MAX_EXHAUSTIVE_CODEBOOK:
        rows = np.arange(0, len(z), AUDIT_EVERY)
        checked = _decode_exhaustive(code.codebook, z[rows], h[rows])

        def cost(ords):
            return np.sum((z[rows] - h[rows] * code.codebook[ords]) ** 2, axis=1)

        worse = cost(decided[rows]) > cost(checked) * (1 + 1e-12)
        if worse.any():
            logger.warning("sphere decoder audit: %d of %d audited decisions were not optimal",
                           int(worse.sum()), len(rows))
            decided[rows[worse]] = checked[worse]
    return decided


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def _simulate_batch(task) -> int:
    """Correct coset decisions in one batch of trials."""
    code, sigma, size, seed, grid_index, batch, mode = task
    rng = batch_rng(seed, grid_index, batch)
    messages = rng.integers(0, code.pair.index, size=size)
    ordinals = encode_messages(code, messages, rng)
    h, e = sample_channel(ChannelParams(sigma, code.n), rng, size)
    z = h * code.codebook[ordinals] + e
    decided = decode_batch(code, z, h, mode)
    return int(np.count_nonzero(code.messages[decided] == messages))


def simulate_ecdp(plan: SimPlan, runner=None) -> EcdpCurve:
    """
    Monte Carlo ECDP over the plan's sigma grid.

    Trials are split into batches; batch b of grid point g uses the stream
    keyed by (master_seed, g, b). Counts are summed, so the curve is
    bit-identical for any runner.

    Args:
        plan: code, grid, trial count and seed
        runner: optional TrialRunner executing the batches

    Returns:
        EcdpCurve: one point per grid entry with a Wilson 95% interval
    """
    code = plan.code
    mode = resolve_decoder(code, plan.decoder)
    sizes = batch_sizes(plan.trials, plan.batch_size)
    tasks = [(code, sigma, size, plan.master_seed, g, b, plan.decoder)
             for g, sigma in enumerate(plan.sigma_grid) for b, size in enumerate(sizes)]
    counts = runner.map(_simulate_batch, tasks) if runner is not None else [_simulate_batch(t) for t in tasks]

    points = []
    per_point = len(sizes)
    for g, sigma in enumerate(plan.sigma_grid):
        successes = sum(counts[g * per_point:(g + 1) * per_point])
        lo, hi = wilson_interval(successes, plan.trials)
        points.append(EcdpPoint(g, sigma, snr_db(code, sigma), plan.trials, successes,
                                successes / plan.trials, lo, hi))
        logger.info("grid point %d: sigma=%g ecdp=%.5f [%.5f, %.5f]", g, sigma, successes / plan.trials, lo, hi)

    r = rates(code)
    return EcdpCurve(
        tuple(points), code_fingerprint(code), plan.master_seed, mode.value, average_energy(code),
        code.pair.index, {"total": r.total, "information": r.information, "confusion": r.confusion},
        coset_balance(code),
    )


def dominance(a: EcdpPoint, b: EcdpPoint) -> str:
    """'A<B' or 'A>B' when the intervals are disjoint, else 'tie'."""
    if a.ci_hi < b.ci_lo:
        return "A<B"
    if a.ci_lo > b.ci_hi:
        return "A>B"
    return "tie"


def compare_codes(plans: Sequence[SimPlan], runner=None) -> Tuple[List[EcdpCurve], List[ComparisonRow]]:
    """
    Simulate several codes on one grid and compare every pair pointwise.

    Raises GridMismatch unless all plans share the sigma grid and trial count,
    and UsageFailure when two plans share a seed: compared curves must come
    from independent streams (see derive_seed).
    """
    if len(plans) < 2:
        raise UsageFailure("a comparison needs at least two plans")
    seeds = [plan.master_seed for plan in plans]
    if len(set(seeds)) != len(seeds):
        raise UsageFailure(f"compared plans need distinct seeds, got {seeds}")
    first = plans[0]
    for plan in plans[1:]:
        if plan.sigma_grid != first.sigma_grid or plan.trials != first.trials:
            raise GridMismatch("plans must share the sigma grid and the number of trials")

    curves = [simulate_ecdp(plan, runner) for plan in plans]
    rows = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            for a, b in zip(curves[i].points, curves[j].points):
                rows.append(ComparisonRow(a.grid_index, a.sigma, i, j, a.ecdp, b.ecdp, dominance(a, b)))
    return curves, rows
