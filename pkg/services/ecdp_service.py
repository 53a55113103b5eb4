"""
ECDP Service Module - Analytic eavesdropper correct-decision figures

Contains the truncated lattice series approximating Eve's correct decision
probability on a fast Rayleigh fading channel, the term-wise bound obtained by
keeping the constant, linear and leading terms, and product-distance
diagnostics.

The series depends on the individual coordinates r_i of the points of Λ_E,
so it is NOT invariant under rotations: evaluate a code in the orientation it
is transmitted in.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from services.coset_service import NestedLatticePair
from services.errors import RadiusTooSmall, UsageFailure
from services.lattice_service import (
    DEFAULT_TOLERANCE, Lattice, lattice_points_in_ball, shortest_vectors, volume,
)

logger = logging.getLogger(__name__)

TRUNCATION_SIGMA_FACTOR = 25.0
TRUNCATION_LAMBDA_FACTOR = 4.0
LAST_SHELL_WARNING = 0.01


@dataclass(frozen=True)
class EcdpAnalyticParams:
    sigma_e: float
    pair: NestedLatticePair
    truncation_radius_sq: Optional[float] = None

    def __post_init__(self):
        if not self.sigma_e > 0:
            raise UsageFailure(f"sigma_e must be positive, got {self.sigma_e}")
        if self.truncation_radius_sq is not None and not self.truncation_radius_sq > 0:
            raise UsageFailure("truncation radius must be positive")


@dataclass(frozen=True)
class EcdpAnalyticResult:
    sigma_e: float
    value: float
    last_shell_fraction: float
    radius_sq: float
    shells: int
    points: int


def default_truncation_radius(pair: NestedLatticePair, sigma_e: float) -> float:
    """max(25·sigma^2, 4·lambda1(Λ_E))."""
    lam = float(shortest_vectors(pair.lattice_e).lambda1)
    return max(TRUNCATION_SIGMA_FACTOR * sigma_e ** 2, TRUNCATION_LAMBDA_FACTOR * lam)


def _series_terms(points: np.ndarray, sigma: float) -> np.ndarray:
    return np.prod((1.0 + (points / sigma) ** 2) ** -1.5, axis=1)


def _shell_ids(norms) -> np.ndarray:
    """Shell number of every point, shells ordered by squared norm."""
    if not norms:
        return np.zeros(0, dtype=np.int64)
    order = sorted(range(len(norms)), key=lambda i: norms[i])
    ids = np.empty(len(norms), dtype=np.int64)
    shell, prev = -1, None
    for i in order:
        v = norms[i]
        if prev is None or (v != prev if not isinstance(v, float) else v > prev * (1 + 1e-9) + 1e-12):
            shell += 1
            prev = v
        ids[i] = shell
    return ids


def ecdp_analytic(params: EcdpAnalyticParams, strict: bool = True) -> EcdpAnalyticResult:
    """
    (2σ)^(-n)·vol(Λ_B)·Σ_r ∏_i (1 + (r_i/σ)^2)^(-3/2) over r in Λ_E with
    ||r||^2 <= R^2, origin and both signs included.

    The sum is a comparative figure of merit and is not clipped to [0, 1].
    With strict=False a radius below lambda1(Λ_E) is allowed and sums the
    origin only; otherwise it raises RadiusTooSmall.
    """
    pair, sigma = params.pair, params.sigma_e
    lattice_e = pair.lattice_e
    radius = params.truncation_radius_sq or default_truncation_radius(pair, sigma)
    lam = float(shortest_vectors(lattice_e).lambda1)
    if radius < lam * (1 - DEFAULT_TOLERANCE) and strict:
        raise RadiusTooSmall(f"truncation radius^2 {radius} is below lambda1(Λ_E) = {lam}")

    coeffs, norms = lattice_points_in_ball(lattice_e, radius)
    points = coeffs @ lattice_e.basis.T
    terms = _series_terms(points, sigma)
    shells = _shell_ids(norms)
    total = math.fsum(terms)
    last = int(shells.max()) if len(shells) else 0
    last_sum = math.fsum(terms[shells == last])

    prefactor = float(volume(pair.lattice_b)) / (2.0 * sigma) ** pair.n
    fraction = last_sum / total if total else 0.0
    if last > 0 and fraction > LAST_SHELL_WARNING:
        logger.warning("sigma=%g: last shell carries %.2f%% of the series, radius^2 %g may be too small",
                       sigma, 100 * fraction, radius)
    return EcdpAnalyticResult(sigma, prefactor * total, fraction, float(radius), last + 1, len(terms))


def ecdp_curve(pair: NestedLatticePair, sigmas: Sequence[float],
               radius_sq: Optional[float] = None) -> List[EcdpAnalyticResult]:
    return [ecdp_analytic(EcdpAnalyticParams(float(s), pair, radius_sq)) for s in sigmas]


def term_bound_check(r: Sequence[float], sigma_e: float) -> Tuple[float, float]:
    """
    (lhs, rhs) with lhs = ∏(1 + x_i)^(-3/2) and rhs = (1 + Σx_i + ∏x_i)^(-3/2),
    x_i = (r_i/σ)^2; lhs <= rhs. In one dimension the linear and leading
    terms coincide and the expansion is exact.
    """
    x = (np.asarray(r, dtype=float) / sigma_e) ** 2
    lhs = float(np.prod((1.0 + x) ** -1.5))
    if len(x) == 1:
        return lhs, float((1.0 + x[0]) ** -1.5)
    rhs = float((1.0 + x.sum() + np.prod(x)) ** -1.5)
    return lhs, rhs


def min_product_distance(lattice: Lattice, radius_sq: float) -> float:
    """
    Smallest ∏|v_i| over nonzero lattice points with ||v||^2 <= radius_sq.

    Only points inside the ball are seen, so this is an upper bound on the
    minimum product distance of the whole lattice.
    """
    coeffs, _ = lattice_points_in_ball(lattice, radius_sq)
    nonzero = np.any(coeffs != 0, axis=1)
    if not nonzero.any():
        raise RadiusTooSmall(f"no nonzero lattice point within radius^2 {radius_sq}")
    points = coeffs[nonzero] @ lattice.basis.T
    products = np.prod(np.abs(points), axis=1)
    products[products < 1e-12 * max(1.0, radius_sq) ** (lattice.n / 2)] = 0.0
    return float(products.min())
