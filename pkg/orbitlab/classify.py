"""Finite-horizon classification of forward compositions.

Verdicts are assigned only when the evidence clears explicit margins; otherwise
the verdict is ``inconclusive``.
"""

import itertools
import logging
import math
import threading
import weakref
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .hypgeo import (
    boundary_distance,
    cayley_to_disc,
    euclidean_proximity_bound,
    hyperbolic_distance,
    hyperbolic_distortion,
)
from .mapfab import AffineHalfPlaneOp, InteriorValue, LogScalePoint, MapSequence, interior_orbit
from .models import ClassificationReport, ConvergenceReport
from .utils.error_handler import OrbitOverflowError, ValidationError

logger = logging.getLogger(__name__)

ISOMETRY_TOL = 1e-12
SCHWARZ_PICK_SLACK = 1e-12
MONOTONE_SLACK = 1e-10
DIVERGENCE_JUMP = 0.2
DIVERGENCE_RATIO = 0.75
TAIL_TOL = 1e-6
DECAY_EXPONENT = -1.2
FIT_R2 = 0.9
CONTRACTION_TOL = 1e-6
COLLISION_TOL = 1e-6


def _is_mobius_like(f) -> bool:
    if f.mobius is not None:
        return True
    return bool(f.boundary_ops) and all(isinstance(op, AffineHalfPlaneOp) for op in f.boundary_ops)


def distortion_series(seq: MapSequence, z: complex, N: int) -> List[float]:
    """lambda_n(z) for n = 1..N: distortion of f_n at F_{n-1}(z) between U_{n-1} and U_n.

    Values above 1 by more than rounding are logged and clamped.

    Raises:
        DerivativeUnavailableError: If a step map has no derivative.
    """
    orbit = interior_orbit(seq, z, N - 1)
    series = []
    for n in range(1, N + 1):
        f = seq.step(n)
        w = orbit[n - 1]
        if isinstance(w, LogScalePoint):
            if not _is_mobius_like(f):
                raise OrbitOverflowError(f"Distortion of {f.name} at a log-scale point is unavailable")
            series.append(1.0)
            continue
        value = hyperbolic_distortion(f, w, seq.domain(n - 1), seq.domain(n))
        if value > 1.0 + SCHWARZ_PICK_SLACK:
            logger.warning(f"Schwarz-Pick violation {value:.15g} at n={n} for {seq!r}; clamping to 1")
        series.append(min(max(value, 0.0), 1.0))
    return series


def _partial_sums(terms: Sequence[float]) -> List[float]:
    return [float(s) for s in np.cumsum(terms)] if len(terms) else []


def _sum_at(sums: Sequence[float], n: int) -> float:
    """S_n for the 1-based terms, S_0 = 0."""
    return sums[n - 1] if n >= 1 else 0.0


def _decay_fit(terms: Sequence[float]) -> Optional[Tuple[float, float]]:
    """(exponent, R^2) of a power-law fit to the positive terms over [N/4, N]."""
    N = len(terms)
    points = [(n, terms[n - 1]) for n in range(max(N // 4, 1), N + 1) if terms[n - 1] > 0.0]
    if len(points) < 10:
        return None
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    if np.ptp(y) == 0.0:
        return 0.0, 1.0
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.rvalue ** 2)


def _log_growth_fit(sums: Sequence[float]) -> Optional[Tuple[float, float]]:
    """(slope, R^2) of S_n against log n over [N/4, N]."""
    N = len(sums)
    ns = np.arange(max(N // 4, 1), N + 1)
    if len(ns) < 3:
        return None
    y = np.asarray([sums[n - 1] for n in ns])
    if np.ptp(y) == 0.0:
        return 0.0, 0.0
    fit = stats.linregress(np.log(ns), y)
    return float(fit.slope), float(fit.rvalue ** 2)


def _sums_diverge(sums: Sequence[float]) -> bool:
    """Late block sum clears the jump margins and S_n fits log-growth with R^2 > FIT_R2."""
    N = len(sums)
    late_jump = sums[-1] - _sum_at(sums, N // 2)
    early_jump = _sum_at(sums, N // 2) - _sum_at(sums, N // 4)
    if not (late_jump > DIVERGENCE_JUMP and late_jump >= DIVERGENCE_RATIO * early_jump):
        return False
    growth = _log_growth_fit(sums)
    return growth is not None and growth[0] > 0.0 and growth[1] > FIT_R2


def pairwise_distance_series(seq: MapSequence, points: Sequence[complex], N: int) -> List[List[float]]:
    """dist_{U_n}(F_n(z), F_n(z')) for every pair of sample points, n = 0..N."""
    orbits = [interior_orbit(seq, z, N) for z in points]
    series = []
    for i, j in itertools.combinations(range(len(points)), 2):
        row = []
        for n in range(N + 1):
            u, v = orbits[i][n], orbits[j][n]
            if isinstance(u, LogScalePoint) or isinstance(v, LogScalePoint):
                raise OrbitOverflowError(f"Pair ({i}, {j}) left the representable range at n={n}")
            row.append(hyperbolic_distance(seq.domain(n), u, v))
        series.append(row)
    return series


def _collided(row: Sequence[float]) -> bool:
    return any(b == 0.0 and a > COLLISION_TOL for a, b in zip(row, row[1:]))


def _nonincreasing(row: Sequence[float]) -> bool:
    return all(b <= a + MONOTONE_SLACK * (1.0 + a) for a, b in zip(row, row[1:]))


def classify_hyperbolic(seq: MapSequence, points: Sequence[complex], N: int) -> ClassificationReport:
    """Contracting / semi-contracting / eventually-isometric verdict from the distortion evidence."""
    if len(points) < 2:
        raise ValidationError(f"Classification needs at least 2 sample points, got {len(points)}")
    if N < 8:
        raise ValidationError(f"Classification needs a horizon of at least 8, got {N}")

    logger.info(f"Classifying {seq!r} at N={N} with {len(points)} sample points")
    distortions = distortion_series(seq, points[0], N)
    terms = [1.0 - lam for lam in distortions]
    sums = _partial_sums(terms)

    pairs = pairwise_distance_series(seq, points, N)
    excluded = [i for i, row in enumerate(pairs) if _collided(row)]
    for i in excluded:
        logger.warning(f"Orbit pair {i} of {seq!r} collided; excluded from the contraction test")
    kept = [row for i, row in enumerate(pairs) if i not in excluded]

    half, quarter = N // 2, N // 4
    isometric = all(abs(1.0 - lam) <= ISOMETRY_TOL for lam in distortions[half - 1:])
    late_jump = sums[-1] - _sum_at(sums, half)
    early_jump = _sum_at(sums, half) - _sum_at(sums, quarter)
    growth = _log_growth_fit(sums)
    divergent = _sums_diverge(sums)
    decay = _decay_fit(terms)
    convergent = late_jump < TAIL_TOL or (decay is not None and decay[0] < DECAY_EXPONENT and decay[1] > FIT_R2)
    collapsed = bool(kept) and all(row[-1] < CONTRACTION_TOL for row in kept)

    if isometric:
        verdict = "eventually-isometric"
    elif divergent and collapsed:
        verdict = "contracting"
    elif convergent and not divergent:
        verdict = "semi-contracting"
    else:
        verdict = "inconclusive"

    report = ClassificationReport(
        verdict=verdict,
        distortion_series=distortions,
        partial_sums=sums,
        pairwise_distance_series=pairs,
        excluded_pairs=excluded,
        heuristics={
            "horizon": N,
            "sequence_id": seq.sequence_id,
            "tail_sum": late_jump,
            "previous_block_sum": early_jump,
            "decay_exponent": decay[0] if decay else None,
            "decay_r2": decay[1] if decay else None,
            "log_growth_slope": growth[0] if growth else None,
            "log_growth_r2": growth[1] if growth else None,
            "pairs_nonincreasing": all(_nonincreasing(row) for row in kept),
            "max_scaled_defect": max((n * n * t for n, t in enumerate(terms, start=1)), default=0.0),
        },
    )
    logger.info(f"Classification of {seq!r}: {report.verdict_line()}")
    return report


# ---------------------------------------------------------------------------
# Boundary convergence of a single interior orbit
# ---------------------------------------------------------------------------

def _euclidean_boundary_distance(seq: MapSequence, n: int, w: InteriorValue) -> float:
    if isinstance(w, LogScalePoint):
        if seq.domain(n).model != "half-plane":
            raise OrbitOverflowError(f"Log-scale point outside a half-plane at n={n}")
        return math.exp(min(w.log_modulus, 709.0)) * math.cos(w.argument)
    return boundary_distance(seq.domain(n), w)


def _disc_defect(seq: MapSequence, n: int, w: InteriorValue) -> float:
    """1 - |disc point| for the uniformized position of w."""
    domain = seq.domain(n)
    if isinstance(w, LogScalePoint):
        # 1 - |(w - 1)/(w + 1)| ~ 2 Re(w)/|w|^2
        return 2.0 * math.cos(w.argument) * math.exp(-w.log_modulus)
    u = domain.to_model(w)
    if domain.model == "half-plane":
        u = cayley_to_disc(u)
    return max(1.0 - abs(u), 0.0)


class _DistanceCache:
    """delta_n series per (sequence, base point, horizon); cardioid distances are costly."""

    def __init__(self):
        self._store: "weakref.WeakKeyDictionary[MapSequence, Dict[Tuple[complex, int], List[float]]]" = (
            weakref.WeakKeyDictionary()
        )
        self._lock = threading.Lock()

    def get(self, seq: MapSequence, z0: complex, N: int, orbit: Optional[List[InteriorValue]] = None) -> List[float]:
        key = (complex(z0), N)
        with self._lock:
            cached = self._store.get(seq, {}).get(key)
        if cached is not None:
            return cached
        orbit = orbit if orbit is not None else interior_orbit(seq, z0, N)
        deltas = [_euclidean_boundary_distance(seq, n, w) for n, w in enumerate(orbit)]
        with self._lock:
            self._store.setdefault(seq, {})[key] = deltas
        return deltas


boundary_distance_cache = _DistanceCache()


def _trichotomy(deltas: Sequence[float]) -> Tuple[str, Dict[str, float]]:
    N = len(deltas) - 1
    q1, q2, q3 = N // 4, N // 2, (3 * N) // 4
    late_max = max(deltas[q3:])
    mid_max = max(deltas[q1:q2 + 1])
    tail_min = min(deltas[q2:])
    head_min = min(deltas[:q2 + 1])
    tail_max = max(deltas[q2:])
    margins = {"late_max": late_max, "mid_max": mid_max, "tail_min": tail_min,
               "head_min": head_min, "tail_max": tail_max}
    if late_max <= 0.5 * mid_max:
        return "converges", margins
    if tail_min >= 0.5 * head_min:
        return "stays-away", margins
    if tail_min <= 0.1 * tail_max and late_max >= 0.5 * mid_max:
        return "oscillates", margins
    return "inconclusive", margins


def convergence_report(seq: MapSequence, z0: complex, N: int, thmc_exponent: float = 0.5) -> ConvergenceReport:
    """Boundary distance series of the orbit of z0 with the two summability series.

    ``thmC_sum`` holds partial sums of dist^thmc_exponent; the default 1/2 is the
    square-root condition for domains with a uniform harmonic measure exponent 1/2.
    """
    if N < 4:
        raise ValidationError(f"Convergence report needs N >= 4, got {N}")
    orbit = interior_orbit(seq, z0, N)
    deltas = boundary_distance_cache.get(seq, z0, N, orbit)
    disc_terms = [_disc_defect(seq, n, w) for n, w in enumerate(orbit)]
    root_terms = [max(d, 0.0) ** thmc_exponent for d in deltas]
    verdict, margins = _trichotomy(deltas)

    thmb = _partial_sums(disc_terms)
    slope = _log_growth_fit(thmb[1:])
    heuristics = dict(margins)
    heuristics.update({
        "horizon": N,
        "thmc_exponent": thmc_exponent,
        "thmB_last_term": disc_terms[-1],
        "thmB_tail": float(sum(disc_terms[N // 2:])),
        "thmC_tail": float(sum(root_terms[N // 2:])),
        "thmB_log_slope": slope[0] if slope else None,
    })
    logger.info(f"Convergence report for {seq!r} from z0={z0}: {verdict} at N={N}")
    return ConvergenceReport(
        dist_series=deltas,
        thmB_sum=thmb,
        thmC_sum=_partial_sums(root_terms),
        verdict=verdict,
        heuristics=heuristics,
    )


def theorem_a_residual(seq: MapSequence, z: complex, z0: complex, N: int) -> float:
    """max_n |F_n(z) - F_n(z0)| - 2 d e^{2d} delta_n with d = dist_{U_0}(z, z0).

    A positive value beyond rounding is a failure of the proximity inequality.
    """
    d = hyperbolic_distance(seq.domain(0), z, z0)
    base = interior_orbit(seq, z0, N)
    moved = interior_orbit(seq, z, N)
    deltas = boundary_distance_cache.get(seq, z0, N, base)
    worst = -math.inf
    for n, (u, v) in enumerate(zip(moved, base)):
        if isinstance(u, LogScalePoint) or isinstance(v, LogScalePoint):
            raise OrbitOverflowError(f"Orbit left the representable range at n={n}")
        worst = max(worst, abs(u - v) - euclidean_proximity_bound(d, deltas[n]))
    logger.debug(f"Proximity residual for {seq!r}, z={z}, z0={z0}, N={N}: {worst:.3g}")
    return worst
