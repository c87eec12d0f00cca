"""High-precision boundary orbits.

Angles are in turns and carried as mpmath numbers of a fixed mantissa width.
Doubling is an exact binary shift, so a squaring family loses one bit per step;
``precision_plan`` budgets the mantissa for a horizon and every step propagates a
first-order error bound through the boundary derivative.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .config import config
from .harmonic import ArcSet
from .mapfab import (
    AffineHalfPlaneOp,
    BlaschkeOp,
    BoundaryOp,
    HolomorphicMap,
    JoukowskiHalfPlaneOp,
    MapSequence,
    PowerOp,
    RealMobiusOp,
    RotationOp,
)
from .models import write_output_file
from .precision import fraction_to_mpf, mpf_to_fraction, precision_context
from .utils.error_handler import (
    PrecisionExhaustedError,
    UnknownBoundaryExtensionError,
    ValidationError,
)

logger = logging.getLogger(__name__)

SQUARING = "squaring"
MOBIUS = "mobius"
MIN_PRECISION = 64


@dataclass(frozen=True)
class BoundaryAngle:
    """Point e^{2 pi i value} of the unit circle; ``error`` bounds the accumulated error in turns."""

    value: Any
    precision: int
    error: float = 0.0

    def __post_init__(self):
        if self.precision < MIN_PRECISION:
            raise ValidationError(f"Boundary angles need at least {MIN_PRECISION} bits, got {self.precision}")

    @classmethod
    def from_turns(cls, turns, precision: int) -> "BoundaryAngle":
        ctx = precision_context(precision)
        if isinstance(turns, (Fraction, int, str)):
            value = fraction_to_mpf(ctx, Fraction(turns) % 1)
        else:
            value = ctx.frac(ctx.mpf(turns))
        return cls(ctx.frac(value), precision, 2.0 ** -precision)

    def at_precision(self, precision: int) -> "BoundaryAngle":
        ctx = precision_context(precision)
        return BoundaryAngle(ctx.frac(ctx.mpf(self.value)), precision, max(self.error, 2.0 ** -precision))

    def to_fraction(self) -> Fraction:
        return mpf_to_fraction(self.value)

    def __float__(self) -> float:
        return float(self.value)


def circular_distance(a, b) -> float:
    """Distance between two angles in turns, in [0, 1/2]."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        d = float((a - b) % 1)
    else:
        d = (float(a) - float(b)) % 1.0
    return min(d, 1.0 - d)


def _angle_gap(x: BoundaryAngle, y: BoundaryAngle) -> float:
    ctx = precision_context(max(x.precision, y.precision))
    d = ctx.frac(ctx.mpf(x.value) - ctx.mpf(y.value))
    return float(min(d, 1 - d))


@dataclass
class OrbitTrace:
    """Angles F_0(zeta), ..., F_N(zeta) with nondecreasing error bounds."""

    angles: List[BoundaryAngle]
    horizon: int
    precision_used: int
    error_bounds: List[float]

    def turns(self) -> List[Fraction]:
        return [angle.to_fraction() for angle in self.angles]

    def to_csv(self, file_path: Optional[Path] = None) -> str:
        """CSV with columns n, angle_turns (40 decimal digits), err_bound."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["n", "angle_turns", "err_bound"])
        for n, (angle, err) in enumerate(zip(self.angles, self.error_bounds)):
            writer.writerow([n, _decimal_turns(angle.to_fraction()), f"{err:.6e}"])
        text = buffer.getvalue()
        if file_path is not None:
            write_output_file(Path(file_path), text)
        return text


def _decimal_turns(value: Fraction, digits: int = 40) -> str:
    scaled = math.floor(value * 10 ** digits)
    return f"0.{scaled:0{digits}d}"


# ---------------------------------------------------------------------------
# Precision budgeting
# ---------------------------------------------------------------------------

def _target_bits(target_error: float) -> int:
    if not (0.0 < target_error < 1.0):
        raise ValidationError(f"Target error must lie in (0, 1), got {target_error}")
    return math.ceil(math.log2(1.0 / target_error))


def precision_plan(seq_kind: str, horizon: int, target_error: float = 1e-12,
                   gain_bits: int = 0, bits_per_step: int = 1) -> int:
    """Mantissa bits for an orbit of ``horizon`` steps.

    Squaring families get twice the bits they lose so that a rerun at half the
    plan still meets the alarm threshold; Möbius families get 128 bits plus
    4 bits per doubling of the horizon.
    """
    if horizon < 1:
        raise ValidationError(f"Horizon must be >= 1, got {horizon}")
    if seq_kind == SQUARING:
        return 2 * bits_per_step * horizon + 64 + _target_bits(target_error) + 2 * gain_bits
    if seq_kind == MOBIUS:
        return 128 + 4 * math.ceil(math.log2(horizon)) + 2 * gain_bits
    raise ValidationError(f"Unknown orbit family {seq_kind!r}")


def minimum_precision(seq_kind: str, horizon: int, target_error: float = 1e-12,
                      gain_bits: int = 0, bits_per_step: int = 1) -> int:
    """Fewest bits that can meet ``target_error`` after ``horizon`` steps."""
    if seq_kind == SQUARING:
        return bits_per_step * horizon + 64 + _target_bits(target_error) + gain_bits
    return 64 + _target_bits(target_error) + gain_bits


def _step_ops(seq: MapSequence, n: int) -> Tuple[BoundaryOp, ...]:
    return _ops_of(seq.step(n))


def _ops_of(f: HolomorphicMap) -> Tuple[BoundaryOp, ...]:
    if f.boundary_ops is None:
        raise UnknownBoundaryExtensionError(f"{f.name or f!r} has no known boundary extension")
    return f.boundary_ops


def orbit_family(seq: MapSequence) -> str:
    ops = _step_ops(seq, 1)
    if any(isinstance(op, (PowerOp, BlaschkeOp)) for op in ops):
        return SQUARING
    return MOBIUS


def bits_per_step(seq: MapSequence) -> int:
    bits = 0
    for op in _step_ops(seq, 1):
        if isinstance(op, PowerOp):
            bits += math.ceil(math.log2(op.p))
        elif isinstance(op, BlaschkeOp):
            stretch = sum((1 + abs(a)) / (1 - abs(a)) for a in op.zeros)
            bits += math.ceil(math.log2(max(stretch, 2.0)))
    return max(bits, 1)


def gain_bits(seq: MapSequence, horizon: int) -> int:
    """Bits lost to the strongest Möbius stretch (2 - eps)/eps up to the horizon."""
    a = seq.param_sequence
    if a is None:
        return 0
    eps = min(a.epsilon(horizon), a.epsilon(max(horizon - 1, 0)))
    return math.ceil(2 * math.log2(float((2 - eps) / eps))) if eps < 1 else 0


def plan_for(seq: MapSequence, horizon: int, target_error: float = 1e-12) -> int:
    family = orbit_family(seq)
    return precision_plan(family, horizon, target_error, gain_bits(seq, horizon), bits_per_step(seq))


def require_precision(seq: MapSequence, horizon: int, precision: Optional[int] = None,
                      target_error: float = 1e-12) -> int:
    """Planned bits, or the override after checking it against the minimum.

    Raises:
        PrecisionExhaustedError: If the override cannot reach the target at this horizon.
    """
    if precision is None:
        return plan_for(seq, horizon, target_error)
    family = orbit_family(seq)
    needed = minimum_precision(family, horizon, target_error, gain_bits(seq, horizon), bits_per_step(seq))
    if precision < needed:
        raise PrecisionExhaustedError(
            f"{precision} bits cannot carry a {family} orbit of {horizon} steps (needs {needed})",
            f"Precision exhausted: {horizon} steps need at least {needed} bits; "
            f"drop the precision override or raise it to {plan_for(seq, horizon, target_error)}.",
        )
    return precision


# ---------------------------------------------------------------------------
# Boundary operations at working precision
# ---------------------------------------------------------------------------

def _apply_op(ctx, op: BoundaryOp, theta):
    """(theta', |derivative|, rounding cost in ulps)."""
    if isinstance(op, RotationOp):
        return ctx.frac(theta + fraction_to_mpf(ctx, op.turns)), 1.0, 1

    if isinstance(op, PowerOp):
        exact = op.p & (op.p - 1) == 0
        return ctx.frac(theta * op.p), float(op.p), 0 if exact else 1

    if isinstance(op, RealMobiusOp):
        if op.eps == 1:
            return theta, 1.0, 0
        e = fraction_to_mpf(ctx, op.eps)
        u = ctx.pi * theta
        s, c = ctx.sin(u), ctx.cos(u)
        k = e / (2 - e)
        if op.inverse:
            out = ctx.atan2((2 - e) * s, e * c)
            slope = k / (k * k * c * c + s * s)
        else:
            out = ctx.atan2(e * s, (2 - e) * c)
            slope = k / (c * c + k * k * s * s)
        return ctx.frac(out / ctx.pi), float(slope), 8

    if isinstance(op, AffineHalfPlaneOp):
        scale = fraction_to_mpf(ctx, op.scale)
        if theta == 0:
            return theta, float(1 / scale), 0
        y = ctx.cot(ctx.pi * theta)
        Y = scale * y + fraction_to_mpf(ctx, op.shift)
        slope = scale * (1 + y * y) / (1 + Y * Y)
        return ctx.frac(ctx.atan2(1, Y) / ctx.pi), float(slope), 8

    if isinstance(op, JoukowskiHalfPlaneOp):
        n = op.n
        lam = (n + 1 + ctx.sqrt(n * n + 2 * n)) / n
        if theta == 0:
            return theta, float(2 / lam), 0
        if 2 * theta == 1:
            return ctx.mpf(0), float(2 * lam), 0
        y = ctx.cot(ctx.pi * theta)
        image = (lam * y - 1 / (lam * y)) / 2
        slope = (1 + y * y) / (1 + image * image) * (lam + 1 / (lam * y * y)) / 2
        return ctx.frac(ctx.atan2(1, image) / ctx.pi), float(slope), 10

    if isinstance(op, BlaschkeOp):
        zeta = ctx.expjpi(2 * theta)
        w = ctx.mpc(1)
        slope = ctx.mpf(0)
        for a in op.zeros:
            A = ctx.mpc(a.real, a.imag)
            w *= (zeta - A) / (1 - ctx.conj(A) * zeta)
            slope += (1 - abs(A) ** 2) / abs(zeta - A) ** 2
        out = ctx.arg(w) / (2 * ctx.pi) + fraction_to_mpf(ctx, op.rotation)
        return ctx.frac(out + 1), float(slope), 6 * len(op.zeros)

    raise UnknownBoundaryExtensionError(f"No boundary rule for {op!r}")


def apply_boundary_ops(ops: Sequence[BoundaryOp], theta: BoundaryAngle) -> BoundaryAngle:
    """Apply ``ops`` left to right, propagating the error bound.

    Raises:
        PrecisionExhaustedError: If the bound exceeds the alarm threshold.
    """
    ctx = precision_context(theta.precision)
    ulp = 2.0 ** -theta.precision
    value, err = theta.value, theta.error
    for op in ops:
        value, slope, cost = _apply_op(ctx, op, value)
        err = err * slope if cost == 0 else (err + 4 * ulp) * slope + cost * ulp
    err = max(err, theta.error)
    if err > config.PRECISION_ALARM_TURNS:
        raise PrecisionExhaustedError(
            f"Boundary error bound {err:.3g} turns exceeds {config.PRECISION_ALARM_TURNS:.3g} at {theta.precision} bits"
        )
    return BoundaryAngle(value, theta.precision, err)


def boundary_step(seq: MapSequence, n: int, theta: BoundaryAngle) -> BoundaryAngle:
    """f_n acting on one boundary angle."""
    return apply_boundary_ops(_step_ops(seq, n), theta)


def _closed_angle(seq: MapSequence, n: int, theta0: BoundaryAngle) -> BoundaryAngle:
    return apply_boundary_ops(_ops_of(seq.composite(n)), theta0)


def boundary_orbit(seq: MapSequence, theta0: BoundaryAngle, N: int, cross_check: bool = True) -> OrbitTrace:
    """Trace of F_0(zeta), ..., F_N(zeta) by repeated boundary steps.

    For closed-form families the composite path is evaluated too and both must
    agree within their error bounds.

    Raises:
        PrecisionExhaustedError: On an exceeded bound or a path disagreement.
    """
    angles = [apply_boundary_ops(_ops_of(seq.start_map()), theta0)]
    for n in range(1, N + 1):
        angles.append(boundary_step(seq, n, angles[-1]))

    if cross_check and seq.closed_form is not None:
        ulp = 2.0 ** -theta0.precision
        for n, stepped in enumerate(angles):
            direct = _closed_angle(seq, n, theta0)
            gap = _angle_gap(stepped, direct)
            if gap > stepped.error + direct.error + 16 * ulp:
                raise PrecisionExhaustedError(
                    f"Step and closed-form orbits differ by {gap:.3g} turns at n={n} "
                    f"(bounds {stepped.error:.3g}, {direct.error:.3g})"
                )

    return OrbitTrace(
        angles=angles,
        horizon=N,
        precision_used=theta0.precision,
        error_bounds=[angle.error for angle in angles],
    )


def boundary_values(seq: MapSequence, theta0: BoundaryAngle, indices: Sequence[int]) -> List[BoundaryAngle]:
    """F_n(zeta) at the requested indices, through the closed form when the family has one."""
    indices = list(indices)
    if not indices:
        return []
    if seq.closed_form is not None:
        return [_closed_angle(seq, n, theta0) for n in indices]
    trace = boundary_orbit(seq, theta0, max(indices), cross_check=False)
    return [trace.angles[n] for n in indices]


def random_angle(rng: np.random.Generator, bits: int) -> BoundaryAngle:
    """Uniform dyadic angle with ``bits`` random bits, exact at ``bits`` precision."""
    words = -(-bits // 64)
    raw = int.from_bytes(rng.bytes(8 * words), "big") >> (64 * words - bits)
    ctx = precision_context(bits)
    return BoundaryAngle(ctx.ldexp(ctx.mpf(raw), -bits), bits, 0.0)


def check_plan_adequacy(seq: MapSequence, theta0: BoundaryAngle, N: int, bits: Optional[int] = None) -> float:
    """Rerun at half the bits; every angle must move by less than the alarm threshold.

    Returns:
        Largest angle change in turns.

    Raises:
        PrecisionExhaustedError: If the plan is inadequate.
    """
    bits = bits or theta0.precision
    full = boundary_orbit(seq, theta0.at_precision(bits), N, cross_check=False)
    half = boundary_orbit(seq, theta0.at_precision(bits // 2), N, cross_check=False)
    worst = max(_angle_gap(x, y) for x, y in zip(full.angles, half.angles))
    if worst >= config.PRECISION_ALARM_TURNS:
        raise PrecisionExhaustedError(
            f"Halving {bits} bits moved an angle by {worst:.3g} turns; the precision plan is inadequate"
        )
    logger.debug(f"Plan of {bits} bits adequate for N={N}: worst half-precision change {worst:.3g}")
    return worst


def arc_visits(trace: OrbitTrace, A: ArcSet) -> List[int]:
    """Indices n with F_n(zeta) in A (half-open arcs)."""
    return [n for n, angle in enumerate(trace.angles) if A.contains(angle.to_fraction())]


def density_score(trace: OrbitTrace, K: int, min_visits: int = 1) -> float:
    """Fraction of the K equal arcs [k/K, (k+1)/K) visited at least ``min_visits`` times."""
    if K < 2:
        raise ValidationError(f"Need at least 2 arcs, got {K}")
    counts = [0] * K
    for angle in trace.angles:
        counts[math.floor(angle.to_fraction() * K) % K] += 1
    return sum(1 for c in counts if c >= min_visits) / K
