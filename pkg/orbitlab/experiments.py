"""Boundary-behaviour experiments over forward compositions.

Every experiment is deterministic under its seed and the configured chunk size:
sample angles are drawn per chunk from counter-based streams, evaluated on the
sample runner, and reduced in sample order.
"""

import cmath
import csv
import io
import logging
import math
import re
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from .circle_orbits import (
    BoundaryAngle,
    apply_boundary_ops,
    boundary_orbit,
    boundary_values,
    circular_distance,
    density_score,
    random_angle,
    require_precision,
)
from .classify import convergence_report
from .config import config
from .harmonic import (
    ArcSet,
    arcset_ops,
    harmonic_measure_disc,
    periodic_arc_overlap,
    shrinking_target_arcs,
    symmetric_arc,
)
from .hypgeo import cayley_to_disc
from .mapfab import (
    LogScalePoint,
    MapSequence,
    ParamSequence,
    SequenceKind,
    conjugate_to_disc,
    example_8_2_multiplier,
    interior_orbit,
    make_power_sequence,
)
from .models import (
    ConvergenceSplit,
    CrossRatioResult,
    DensityStatistics,
    DWEstimate,
    EscapeLedger,
    EscapeSample,
    GapRule,
    GrowthLedger,
    OverlapEntry,
    RunRecord,
    ShrinkingTargetReport,
    append_run_log,
    write_output_file,
)
from .precision import fraction_to_mpf, precision_context
from .services.sample_runner import SampleRunner, chunk_generators
from .utils.error_handler import (
    DWUndefinedError,
    ExcludedPointError,
    LedgerMissingError,
    OrbitOverflowError,
    SignLossError,
    ValidationError,
)

logger = logging.getLogger(__name__)

BAND_LOW = 0.05
BAND_HIGH = 0.95
WINDOWED_COPY_LIMIT = 4096
GAP_SLACK = 1e-9
GAP_RULES = ("nonincreasing", "block-max")


def _disc_base_point(seq: MapSequence, z0: complex) -> complex:
    if seq.domain(0).model == "half-plane":
        return cayley_to_disc(z0)
    return z0


def sample_angles(seed: int, n_samples: int, bits: int, chunk_size: Optional[int] = None) -> List[BoundaryAngle]:
    """Uniform angles in turns; chunk c draws its samples from its own stream."""
    if n_samples < 1:
        raise ValidationError(f"Need at least one sample, got {n_samples}")
    chunk_size = chunk_size or config.CHUNK_SIZE
    n_chunks = -(-n_samples // chunk_size)
    angles = []
    for c, rng in enumerate(chunk_generators(seed, n_chunks)):
        count = min(chunk_size, n_samples - c * chunk_size)
        angles.extend(random_angle(rng, bits) for _ in range(count))
    return angles


def _point(theta: BoundaryAngle) -> complex:
    return cmath.exp(2j * math.pi * float(theta))


def _poisson_weight(z0: complex, theta: BoundaryAngle) -> float:
    zeta = _point(theta)
    return (1.0 - abs(z0) ** 2) / abs(zeta - z0) ** 2


# ---------------------------------------------------------------------------
# Denjoy-Wolff fraction
# ---------------------------------------------------------------------------

def _gap_converged(gaps: Sequence[float], tol: float, rule: GapRule = "nonincreasing") -> bool:
    """gap_N < tol, and the window of gaps satisfies ``rule``.

    ``nonincreasing`` requires every step to be nonincreasing up to a relative
    GAP_SLACK. ``block-max`` only requires the later half of the window to peak no
    higher than the earlier half.
    """
    if gaps[-1] >= tol:
        return False
    if rule == "nonincreasing":
        return all(later <= earlier * (1.0 + GAP_SLACK) for earlier, later in zip(gaps, gaps[1:]))
    if rule == "block-max":
        mid = max(len(gaps) // 2, 1)
        return max(gaps[mid:]) <= max(gaps[:mid]) * (1.0 + GAP_SLACK)
    raise ValidationError(f"Unknown gap rule {rule!r}; expected one of {GAP_RULES}")


def boundary_gaps(seq: MapSequence, theta: BoundaryAngle, targets: Dict[int, complex]) -> List[float]:
    """|e^{2 pi i theta_n} - F_n(z0)| at the indices of ``targets`` (ascending)."""
    indices = sorted(targets)
    values = boundary_values(seq, theta, indices)
    return [abs(_point(value) - targets[n]) for n, value in zip(indices, values)]


def dw_fraction(
    seq: MapSequence,
    z0: complex,
    n_samples: int,
    N: int,
    tol: float,
    seed: int,
    workers: Optional[int] = None,
    precision: Optional[int] = None,
    gap_rule: GapRule = "nonincreasing",
) -> DWEstimate:
    """Share of boundary angles whose orbit joins the interior orbit of z0 by step N.

    Half-plane sequences are conjugated to the disc first. Samples are uniform in
    turns; a base point other than 0 reweights them by the Poisson kernel. A sample
    has joined when its gap over [3N/4, N] passes ``gap_rule`` (see _gap_converged).

    Raises:
        DWUndefinedError: If the interior orbit of z0 does not converge to the boundary.
        PrecisionExhaustedError: If a precision override is below the minimum for N.
    """
    start = time.monotonic()
    if gap_rule not in GAP_RULES:
        raise ValidationError(f"Unknown gap rule {gap_rule!r}; expected one of {GAP_RULES}")
    disc = conjugate_to_disc(seq)
    base = _disc_base_point(seq, z0)
    report = convergence_report(disc, base, N)
    if report.verdict != "converges":
        raise DWUndefinedError(
            f"Interior orbit of {z0} under {seq!r} {report.verdict} at N={N}",
            "The Denjoy-Wolff set is undefined: the interior orbit does not converge to the boundary.",
        )

    bits = require_precision(disc, N, precision)
    window = list(range((3 * N) // 4, N + 1))
    orbit = interior_orbit(disc, base, N)
    if any(isinstance(orbit[n], LogScalePoint) for n in window):
        raise OrbitOverflowError(f"Interior orbit of {seq!r} left the disc representation")
    targets = {n: complex(orbit[n]) for n in window}

    runner = SampleRunner(workers=workers)
    angles = sample_angles(seed, n_samples, bits, runner.chunk_size)
    logger.info(f"DW fraction for {seq!r}: {n_samples} samples, N={N}, tol={tol}, {bits} bits")

    def evaluate(chunk: List[BoundaryAngle]) -> List[List[float]]:
        return [boundary_gaps(disc, theta, targets) for theta in chunk]

    gap_series = runner.map_samples(evaluate, angles)
    converged = [_gap_converged(gaps, tol, gap_rule) for gaps in gap_series]
    if base == 0:
        fraction = sum(converged) / n_samples
    else:
        weights = [_poisson_weight(base, theta) for theta in angles]
        fraction = sum(w for w, ok in zip(weights, converged) if ok) / sum(weights)

    estimate = DWEstimate(
        fraction=min(max(fraction, 0.0), 1.0),
        n_samples=n_samples,
        horizon=N,
        tol=tol,
        seed=seed,
        sequence_id=seq.sequence_id,
        precision=bits,
        converged=converged,
        final_gaps=[gaps[-1] for gaps in gap_series],
        gap_rule=gap_rule,
        metadata={"wall_time": time.monotonic() - start},
    )
    logger.info(f"DW fraction for {seq!r}: {estimate.fraction:.4f} in {estimate.metadata['wall_time']:.1f}s")
    return estimate


# ---------------------------------------------------------------------------
# Orbit density
# ---------------------------------------------------------------------------

def orbit_density_experiment(
    seq: MapSequence,
    n_samples: int,
    K: int,
    N: int,
    min_visits: int = 1,
    seed: int = 0,
    workers: Optional[int] = None,
    precision: Optional[int] = None,
) -> DensityStatistics:
    """Density scores of boundary orbits over K equal arcs."""
    start = time.monotonic()
    disc = conjugate_to_disc(seq)
    bits = require_precision(disc, N, precision)
    runner = SampleRunner(workers=workers)
    angles = sample_angles(seed, n_samples, bits, runner.chunk_size)
    logger.info(f"Orbit density for {seq!r}: {n_samples} samples, K={K}, N={N}, {bits} bits")

    def evaluate(chunk: List[BoundaryAngle]) -> List[float]:
        return [density_score(boundary_orbit(disc, theta, N, cross_check=False), K, min_visits) for theta in chunk]

    scores = runner.map_samples(evaluate, angles)
    stats = DensityStatistics(
        scores=scores,
        mean_score=sum(scores) / len(scores),
        full_fraction=sum(1 for s in scores if s == 1.0) / len(scores),
        K=K,
        horizon=N,
        min_visits=min_visits,
        n_samples=n_samples,
        seed=seed,
        sequence_id=seq.sequence_id,
        metadata={"wall_time": time.monotonic() - start, "precision": bits},
    )
    logger.info(f"Orbit density for {seq!r}: mean {stats.mean_score:.3f}, full {stats.full_fraction:.3f}")
    return stats


def predicted_density_score(a: ParamSequence, K: int, N: int) -> float:
    """Density score that squaring-pull orbits are expected to reach by step N.

    B_n(zeta) = M_n(zeta^(2^n)) carries normalized arc length to harmonic measure
    seen from a_n, so arc k collects sum_n omega(a_n, arc_k) visits on average.
    Treating visits as independent, arc k is hit with probability 1 - exp(-visits).
    """
    if K < 2 or N < 0:
        raise ValidationError(f"Need K >= 2 and N >= 0, got K={K}, N={N}")
    arcs = [ArcSet.arc(Fraction(k, K), Fraction(1, K)) for k in range(K)]
    visits = [0.0] * K
    for n in range(N + 1):
        center = float(1 - a.epsilon(n))
        if center >= 1.0:
            # a_n rounds to 1: the whole orbit point sits in the arc at angle 0
            visits[0] += 1.0
            continue
        for k, arc in enumerate(arcs):
            visits[k] += harmonic_measure_disc(center, arc).value
    return sum(1.0 - math.exp(-v) for v in visits) / K


def convergence_split(
    seq: MapSequence,
    angles: Sequence,
    N: int,
    limit: Fraction = Fraction(0),
    tolerance: float = 0.05,
    precision: Optional[int] = None,
) -> ConvergenceSplit:
    """Largest distance from ``limit`` over the tail [N/2, N] of each boundary orbit."""
    disc = conjugate_to_disc(seq)
    bits = require_precision(disc, N, precision)
    tail = list(range(N // 2, N + 1))
    distances = []
    for turns in angles:
        theta = BoundaryAngle.from_turns(turns, bits)
        values = boundary_values(disc, theta, tail)
        distances.append(max(circular_distance(value.to_fraction(), Fraction(limit)) for value in values))
    return ConvergenceSplit(
        angles=[float(a) for a in angles],
        tail_max_distance=distances,
        converges=[d < tolerance for d in distances],
        limit_turns=float(limit),
        horizon=N,
    )


# ---------------------------------------------------------------------------
# Shrinking targets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonSequence:
    """Target widths eps_n for n >= 1, exact rationals in (0, 1]."""

    label: str
    rule: Callable[[int], Fraction]

    def __call__(self, n: int) -> Fraction:
        if n < 1:
            raise ValidationError(f"Target widths are indexed from 1, got {n}")
        value = self.rule(n)
        if not (0 < value <= 1):
            raise ValidationError(f"Target width {value} at n={n} is outside (0, 1]")
        return value


def epsilon_sequence(text: str) -> EpsilonSequence:
    """Parse ``1/n``, ``1/(n+k)``, ``2^-n`` or a constant such as ``1`` or ``1/4``."""
    label = text.replace(" ", "")
    if label == "1/n":
        return EpsilonSequence(label, lambda n: Fraction(1, n))
    match = re.fullmatch(r"1/\(n\+(\d+)\)", label)
    if match:
        k = int(match.group(1))
        return EpsilonSequence(label, lambda n: Fraction(1, n + k))
    if label in ("2^-n", "2^(-n)"):
        return EpsilonSequence("2^-n", lambda n: Fraction(1, 2 ** n))
    try:
        value = Fraction(label)
    except ValueError:
        raise ValidationError(f"Unknown target width sequence {text!r}; use 1/n, 1/(n+k), 2^-n or a constant")
    if not (0 < value <= 1):
        raise ValidationError(f"Constant target width must lie in (0, 1], got {value}")
    return EpsilonSequence(label, lambda n: value)


def _target_copy(m: int, eps: Fraction) -> ArcSet:
    """First of the 2^m arcs of A_m."""
    offset = (1 - eps) / 2
    return ArcSet([(offset / 2 ** m, (offset + eps) / 2 ** m)])


def target_overlap(m: int, n: int, epsilon: EpsilonSequence) -> Fraction:
    """Exact |A_m intersected with A_n| for m < n, using the 2^-m periodicity of both sets."""
    eps_m, eps_n = epsilon(m), epsilon(n)
    if eps_m == 1:
        return eps_n
    window = _target_copy(m, eps_m)
    if 2 ** (n - m) * eps_m <= WINDOWED_COPY_LIMIT:
        ops = arcset_ops(window, shrinking_target_arcs(n, eps_n, window))
        one_copy = ops["intersection"].measure()
    else:
        (start, end), = window.intervals
        one_copy = periodic_arc_overlap(start, end, n, eps_n)
    return 2 ** m * one_copy


def overlap_matrix(epsilon: EpsilonSequence, M: int) -> List[OverlapEntry]:
    entries = []
    for m in range(1, M + 1):
        for n in range(m + 1, M + 1):
            measure = target_overlap(m, n, epsilon)
            bound = 3 * epsilon(m) * epsilon(n)
            entries.append(OverlapEntry(
                m=m,
                n=n,
                measure=float(measure),
                exact=str(measure),
                bound=str(bound),
                within_bound=measure <= bound,
                disjoint_regime=Fraction(1, 2 ** (n - m + 1)) >= epsilon(m),
                empty=measure == 0,
            ))
    return entries


def _visit_count(trace_turns: Iterable[Fraction], epsilon: EpsilonSequence) -> int:
    visits = 0
    for n, turns in enumerate(trace_turns):
        if n >= 1 and symmetric_arc(Fraction(1, 2), epsilon(n) / 2).contains(turns):
            visits += 1
    return visits


def shrinking_target_report(
    epsilon: EpsilonSequence,
    M: int,
    N: int,
    n_samples: int,
    k: int,
    seed: int,
    workers: Optional[int] = None,
) -> ShrinkingTargetReport:
    """Exact overlaps |A_m n A_n| for m < n <= M, and visit statistics of doubling orbits.

    I_n is the arc of width eps_n centered at 1/2 turn and A_n its preimage under
    the n-th doubling; a sample visits when 2^n theta lies in I_n.
    """
    start = time.monotonic()
    overlaps = overlap_matrix(epsilon, M)
    doubling = make_power_sequence(2)
    bits = require_precision(doubling, N)
    runner = SampleRunner(workers=workers)
    angles = sample_angles(seed, n_samples, bits, runner.chunk_size)

    def evaluate(chunk: List[BoundaryAngle]) -> List[int]:
        return [_visit_count(boundary_orbit(doubling, theta, N, cross_check=False).turns(), epsilon) for theta in chunk]

    visits = runner.map_samples(evaluate, angles)
    fractions = {j: sum(1 for v in visits if v >= j) / n_samples for j in range(1, k + 1)}
    report = ShrinkingTargetReport(
        epsilon_description=epsilon.label,
        max_index=M,
        overlaps=overlaps,
        all_within_bound=all(entry.within_bound for entry in overlaps),
        disjointness_holds=all(entry.empty for entry in overlaps if entry.disjoint_regime),
        horizon=N,
        n_samples=n_samples,
        k=k,
        seed=seed,
        visit_fractions=fractions,
        metadata={"wall_time": time.monotonic() - start, "precision": bits},
    )
    logger.info(
        f"Shrinking targets eps={epsilon.label}: bound holds={report.all_within_bound}, "
        f"disjointness={report.disjointness_holds}, >= {k} visits: {report.limsup_fraction:.3f}"
    )
    return report


# ---------------------------------------------------------------------------
# Rotated pulls: escape ledger
# ---------------------------------------------------------------------------

def theorem_d_escape_check(seq: MapSequence, n_extra: int, N: int, seed: int = 0) -> EscapeLedger:
    """Escape indices of angle 0 and ``n_extra`` random angles, with exact image checks.

    At each escape index n the boundary image F_n(zeta) must leave the arc S,
    i.e. land in [h, 1 - h] turns up to the tracked error.

    Raises:
        LedgerMissingError: If ``seq`` carries no interval ledger.
    """
    ledger = seq.ledger
    if ledger is None:
        raise LedgerMissingError(f"{seq!r} has no escape interval ledger")
    start = time.monotonic()
    bits = config.ARC_PRECISION_BITS
    h = ledger.half_width
    wraps = ledger.wraps(N)
    ctx = precision_context(bits)
    lower, upper = fraction_to_mpf(ctx, h), fraction_to_mpf(ctx, 1 - h)

    phis = [Fraction(0)]
    if n_extra > 0:
        phis.extend(angle.to_fraction() for angle in sample_angles(seed, n_extra, bits))

    samples, images_ok = [], True
    for phi in phis:
        escapes = ledger.escape_indices(phi, N)
        theta = BoundaryAngle.from_turns(phi, bits)
        for n in escapes:
            image = apply_boundary_ops(seq.composite(n).boundary_ops, theta)
            slack = image.error + 2.0 ** (16 - bits)
            if not (lower - slack <= image.value <= upper + slack):
                logger.error(f"Escape image of angle {float(phi):.6f} at n={n} is {float(image):.9f}, inside S")
                images_ok = False
        samples.append(EscapeSample(angle=str(phi), escapes=escapes))

    interior = [abs(complex(w)) for w in interior_orbit(seq, 0j, N)]
    ledger_report = EscapeLedger(
        horizon=N,
        total_turns=str(float(ledger.total(N))),
        wraps=wraps,
        samples=samples,
        zeta_one_escapes=samples[0].escapes,
        all_covered=all(len(s.escapes) >= max(wraps, 1) for s in samples) if wraps >= 1 else False,
        interior_values=interior,
        image_checks_passed=images_ok,
        metadata={"wall_time": time.monotonic() - start},
    )
    logger.info(
        f"Escape ledger for {seq!r}: {wraps} wraps by N={N}, covered={ledger_report.all_covered}, "
        f"images ok={images_ok}"
    )
    return ledger_report


# ---------------------------------------------------------------------------
# Half-plane Joukowski family: boundary growth and interior identity
# ---------------------------------------------------------------------------

def example_8_2_growth_check(N: int, y0: float, start: int = 1, allow_sign_loss: bool = False) -> GrowthLedger:
    """Iterate y_{n+1} = (lam_n y_n - 1/(lam_n y_n))/2 from y_start = y0 at 128 bits.

    Reports the first index with y_n > n^{3/4} and whether the inequality persists to N.

    Raises:
        ValidationError: If y0 <= 0 or start >= N.
        SignLossError: If y_n <= 0 and ``allow_sign_loss`` is False.
    """
    if y0 <= 0:
        raise ValidationError(f"Growth check needs y0 > 0, got {y0}")
    if not (1 <= start < N):
        raise ValidationError(f"Need 1 <= start < N, got start={start}, N={N}")
    ctx = precision_context(config.ARC_PRECISION_BITS)
    y = ctx.mpf(y0)
    first, persists, sign_loss = None, True, None
    for n in range(start, N + 1):
        if y <= 0:
            if not allow_sign_loss:
                raise SignLossError(f"Boundary coordinate left the positive half-line at n={n}")
            sign_loss = n
            persists = False
            break
        above = y > ctx.mpf(n) ** ctx.mpf(0.75)
        if above and first is None:
            first = n
        elif not above and first is not None:
            persists = False
        if n == N:
            break
        lam = (n + 1 + ctx.sqrt(n * n + 2 * n)) / n
        y = (lam * y - 1 / (lam * y)) / 2

    lam_N = (N + 1 + ctx.sqrt(N * N + 2 * N)) / N
    ledger = GrowthLedger(
        start=start,
        y0=y0,
        horizon=N,
        first_exceed_index=first,
        persists=first is not None and persists,
        sign_loss_index=sign_loss,
        final_y=float(y) if sign_loss is None else None,
        fixed_point=float(1 / ctx.sqrt(lam_N * (lam_N - 2))),
    )
    logger.info(f"Growth from y_{start}={y0}: first exceed {first}, persists {ledger.persists}")
    return ledger


def example_8_2_interior_check(N: int) -> float:
    """Largest relative error of B_n(1) against n + 1 for n <= N, at 128 bits."""
    ctx = precision_context(config.ARC_PRECISION_BITS)
    w = ctx.mpf(1)
    worst = 0.0
    for n in range(1, N + 1):
        lam = (n + 1 + ctx.sqrt(n * n + 2 * n)) / n
        w = (lam * w + 1 / (lam * w)) / 2
        worst = max(worst, float(abs(w - (n + 1)) / (n + 1)))
    logger.debug(f"B_n(1) = n + 1 holds to relative error {worst:.3g} for n <= {N}")
    return worst


def example_8_2_float_drift(N: int) -> float:
    """Relative drift of the double-precision orbit of 1 from n + 1."""
    w, worst = 1.0, 0.0
    for n in range(1, N + 1):
        lam = example_8_2_multiplier(n)
        w = 0.5 * (lam * w + 1.0 / (lam * w))
        worst = max(worst, abs(w - (n + 1)) / (n + 1))
    return worst


# ---------------------------------------------------------------------------
# Möbius pulls: boundary cross-ratio
# ---------------------------------------------------------------------------

def cross_ratio_residual(seq: MapSequence, zeta_turns, N: int) -> CrossRatioResult:
    """Invariance of (1 - a)(M(zeta) + 1)/((1 + a)(1 - M(zeta))) along the pull sequence.

    Residuals are computed at 128 bits against (zeta + 1)/(1 - zeta). Angle 0 is the
    fixed point 1, reported as degenerate.

    Raises:
        ExcludedPointError: At zeta = -1.
        ValidationError: If ``seq`` is not a pull sequence.
    """
    if seq.kind is not SequenceKind.EXAMPLE_8_1:
        raise ValidationError(f"Cross-ratio invariance applies to pull sequences, got {seq!r}")
    turns = Fraction(zeta_turns) % 1
    if turns == Fraction(1, 2):
        raise ExcludedPointError("zeta = -1 is excluded: the target (zeta + 1)/(1 - zeta) vanishes on the pole side")
    if turns == 0:
        return CrossRatioResult(max_residual=0.0, consequence_residual=0.0, target="inf", horizon=N, degenerate=True)

    a = seq.param_sequence
    ctx = precision_context(config.ARC_PRECISION_BITS)
    zeta = ctx.expjpi(2 * fraction_to_mpf(ctx, turns))
    target = (zeta + 1) / (1 - zeta)
    ratio = abs(zeta - 1) / abs(zeta + 1)
    worst = consequence = 0.0
    for n in range(N + 1):
        an = fraction_to_mpf(ctx, a.value(n))
        M = (zeta + an) / (1 + an * zeta)
        value = (1 - an) * (M + 1) / ((1 + an) * (1 - M))
        worst = max(worst, float(abs(value - target)))
        predicted = (1 - an) / (1 + an) * ratio
        consequence = max(consequence, float(abs(abs(1 - M) / abs(1 + M) - predicted)))
    return CrossRatioResult(
        max_residual=worst,
        consequence_residual=consequence,
        target=str(complex(target)),
        horizon=N,
    )


def cross_ratio_passes(result: CrossRatioResult) -> bool:
    if result.degenerate:
        return True
    target = complex(result.target)
    return result.max_residual < 1e-10 * (1.0 + abs(target))


# ---------------------------------------------------------------------------
# Zero-one band, run records
# ---------------------------------------------------------------------------

def zero_one_band(estimates: Sequence[DWEstimate]) -> Dict[str, Any]:
    """Whether every DW fraction lies in [0, 0.05] or [0.95, 1]."""
    fractions = {e.sequence_id: e.fraction for e in estimates}
    middle = {sid: f for sid, f in fractions.items() if BAND_LOW < f < BAND_HIGH}
    return {"fractions": fractions, "in_band": not middle, "middle": middle}


def record_run(
    experiment: str,
    sequence_id: str,
    params: Dict[str, Any],
    seed: Optional[int],
    results: Dict[str, Any],
    wall_time: float,
    log_path: Optional[Path] = None,
) -> RunRecord:
    record = RunRecord(
        experiment=experiment,
        sequence_id=sequence_id,
        params=params,
        seed=seed,
        results=results,
        wall_time=wall_time,
    )
    path = append_run_log(record, log_path)
    logger.debug(f"Recorded {experiment} run in {path}")
    return record


def write_sample_csv(file_path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Per-sample data next to a report."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    write_output_file(Path(file_path), buffer.getvalue())
    return Path(file_path)
