"""Harmonic measure: exact arc algebra on the circle, the disc formula, preimage arcs,
Monte Carlo walk-on-spheres for general domains and the related inequalities.

Angles and arc lengths are in turns, so the total measure of the circle is 1 and
harmonic measure from 0 is arc length.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, stats

from .config import config
from .hypgeo import DomainSpec, MoebiusTransform, moebius_inverse, turns_to_point
from .models import AlphaFit, HMEstimate
from .precision import mpf_to_fraction, precision_context
from .services.sample_runner import SampleRunner, chunk_generators, derived_seeds
from .utils.error_handler import (
    DegenerateFitError,
    NonCirclePreservingError,
    NonConvergenceError,
    ValidationError,
)

logger = logging.getLogger(__name__)

ONE = Fraction(1)
ZERO = Fraction(0)


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value)
    if hasattr(value, "man_exp"):
        return mpf_to_fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class CircleArc:
    """Half-open arc [start, start + length) in turns."""

    start: Fraction
    length: Fraction

    def __post_init__(self):
        start, length = _frac(self.start), _frac(self.length)
        if not (ZERO < length <= ONE):
            raise ValidationError(f"Arc length must lie in (0, 1], got {length}")
        if length == ONE:
            start = ZERO
        object.__setattr__(self, "start", start % 1)
        object.__setattr__(self, "length", length)

    @property
    def end(self) -> Fraction:
        return self.start + self.length

    def contains(self, theta) -> bool:
        return (_frac(theta) - self.start) % 1 < self.length

    def pieces(self) -> List[Tuple[Fraction, Fraction]]:
        """Disjoint [s, e) intervals inside [0, 1) covering the arc."""
        if self.end <= ONE:
            return [(self.start, self.end)]
        return [(self.start, ONE), (ZERO, self.end - 1)]


def symmetric_arc(center, half_width) -> CircleArc:
    """Arc of half-width ``half_width`` turns centered at ``center`` turns."""
    center, half_width = _frac(center), _frac(half_width)
    return CircleArc(center - half_width, 2 * half_width)


class ArcSet:
    """Finite union of disjoint half-open arcs with exact rational endpoints.

    Stored as sorted, merged, non-touching intervals of [0, 1); an arc crossing
    angle 0 is stored as two intervals and reported as one arc.
    """

    __slots__ = ("_intervals",)

    def __init__(self, intervals: Iterable[Tuple[Fraction, Fraction]] = ()):
        self._intervals = self._normalize(intervals)

    @staticmethod
    def _normalize(intervals) -> Tuple[Tuple[Fraction, Fraction], ...]:
        cleaned = sorted((_frac(s), _frac(e)) for s, e in intervals if _frac(e) > _frac(s))
        merged: List[List[Fraction]] = []
        for s, e in cleaned:
            if merged and s <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], e)
            else:
                merged.append([s, e])
        return tuple((s, e) for s, e in merged)

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls()

    @classmethod
    def full(cls) -> "ArcSet":
        return cls([(ZERO, ONE)])

    @classmethod
    def from_arcs(cls, arcs: Iterable[CircleArc]) -> "ArcSet":
        return cls(piece for arc in arcs for piece in arc.pieces())

    @classmethod
    def arc(cls, start, length) -> "ArcSet":
        return cls.from_arcs([CircleArc(start, length)])

    @property
    def intervals(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        return self._intervals

    @property
    def arcs(self) -> List[CircleArc]:
        pieces = list(self._intervals)
        if len(pieces) >= 2 and pieces[0][0] == ZERO and pieces[-1][1] == ONE:
            first, last = pieces.pop(0), pieces.pop()
            pieces.append((last[0], ONE + first[1]))
        return sorted((CircleArc(s, e - s) for s, e in pieces), key=lambda a: a.start)

    def measure(self) -> Fraction:
        return sum((e - s for s, e in self._intervals), ZERO)

    def is_empty(self) -> bool:
        return not self._intervals

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet(self._intervals + other._intervals)

    def intersection(self, other: "ArcSet") -> "ArcSet":
        out = []
        a, b = self._intervals, other._intervals
        i = j = 0
        while i < len(a) and j < len(b):
            s = max(a[i][0], b[j][0])
            e = min(a[i][1], b[j][1])
            if s < e:
                out.append((s, e))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return ArcSet(out)

    def complement(self) -> "ArcSet":
        out = []
        cursor = ZERO
        for s, e in self._intervals:
            if s > cursor:
                out.append((cursor, s))
            cursor = e
        if cursor < ONE:
            out.append((cursor, ONE))
        return ArcSet(out)

    def contains(self, theta) -> bool:
        theta = _frac(theta) % 1
        k = bisect.bisect_right([s for s, _ in self._intervals], theta) - 1
        return k >= 0 and theta < self._intervals[k][1]

    def contains_points(self, turns: np.ndarray) -> np.ndarray:
        """Vectorized membership for float angles in turns."""
        turns = np.mod(np.asarray(turns, dtype=float), 1.0)
        if not self._intervals:
            return np.zeros(turns.shape, dtype=bool)
        starts = np.array([float(s) for s, _ in self._intervals])
        ends = np.array([float(e) for _, e in self._intervals])
        k = np.searchsorted(starts, turns, side="right") - 1
        valid = k >= 0
        return valid & (turns < ends[np.clip(k, 0, None)])

    def __eq__(self, other) -> bool:
        return isinstance(other, ArcSet) and self._intervals == other._intervals

    def __hash__(self) -> int:
        return hash(self._intervals)

    def __len__(self) -> int:
        return len(self.arcs)

    def __repr__(self) -> str:
        return f"ArcSet({[(str(a.start), str(a.length)) for a in self.arcs]})"


def arcset_ops(a: ArcSet, b: ArcSet) -> dict:
    """Union, intersection, complements and measures of two arc sets."""
    return {
        "union": a.union(b),
        "intersection": a.intersection(b),
        "complement_a": a.complement(),
        "complement_b": b.complement(),
        "measure_a": a.measure(),
        "measure_b": b.measure(),
    }


@dataclass(frozen=True)
class PowerMap:
    """z -> z^p."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError(f"Power must be >= 1, got {self.p}")

    def __call__(self, z: complex) -> complex:
        return z ** self.p

    def derivative(self, z: complex) -> complex:
        return self.p * z ** (self.p - 1)


@dataclass(frozen=True)
class ContractionMap:
    """z -> r z with 0 < r < 1: not inner, so its boundary preimage of any arc is empty."""

    r: float

    def __call__(self, z: complex) -> complex:
        return self.r * z

    def derivative(self, z: complex) -> complex:
        return self.r


CircleMap = Union[MoebiusTransform, PowerMap, ContractionMap, Sequence]


def apply_map(f: CircleMap, z: complex) -> complex:
    """Evaluate a map or a composite list [f1, f2, ...] meaning f1 after f2 after ..."""
    if isinstance(f, (list, tuple)):
        for g in reversed(f):
            z = apply_map(g, z)
        return z
    return f(z)


def _mobius_angle(ctx, T: MoebiusTransform, theta: Fraction):
    zeta = ctx.expjpi(2 * ctx.mpf(theta.numerator) / theta.denominator)
    w = (ctx.mpc(T.a) * zeta + ctx.mpc(T.b)) / (ctx.mpc(T.c) * zeta + ctx.mpc(T.d))
    return ctx.frac(ctx.arg(w) / (2 * ctx.pi) + 1)


def _preimage_mobius(T: MoebiusTransform, A: ArcSet) -> ArcSet:
    inverse = moebius_inverse(T)
    for turns in (0.0, 1.0 / 3.0, 2.0 / 3.0):
        image = inverse(turns_to_point(turns))
        if abs(abs(image) - 1.0) > config.MOBIUS_TOLERANCE:
            raise NonCirclePreservingError(f"{T} does not preserve the unit circle")
    if A.measure() == ONE:
        return ArcSet.full()
    ctx = precision_context(config.ARC_PRECISION_BITS)
    arcs = []
    for arc in A.arcs:
        s = mpf_to_fraction(_mobius_angle(ctx, inverse, arc.start))
        e = mpf_to_fraction(_mobius_angle(ctx, inverse, arc.end % 1))
        m = mpf_to_fraction(_mobius_angle(ctx, inverse, (arc.start + arc.length / 2) % 1))
        length = (e - s) % 1
        if not CircleArc(s, length if length > 0 else ONE).contains(m):
            # orientation reversed
            s, length = e, (s - e) % 1
        if length > 0:
            arcs.append(CircleArc(s, length))
    return ArcSet.from_arcs(arcs)


def _preimage_power(p: int, A: ArcSet, window: Optional[ArcSet] = None) -> ArcSet:
    pieces = []
    for s, e in A.intervals:
        if window is None:
            ks: Iterable[int] = range(p)
        else:
            ks = _copies_meeting(p, s, e, window)
        for k in ks:
            pieces.append(((s + k) / p, (e + k) / p))
    result = ArcSet(pieces)
    return result if window is None else result.intersection(window)


def _copies_meeting(p: int, s: Fraction, e: Fraction, window: ArcSet) -> List[int]:
    # copy k occupies [(s+k)/p, (e+k)/p); it meets [ws, we) iff s+k < p*we and e+k > p*ws
    ks = set()
    for ws, we in window.intervals:
        lo = max(0, math.floor(p * ws - e) + 1)
        hi = min(p - 1, math.ceil(p * we - s) - 1)
        ks.update(range(lo, hi + 1))
    return sorted(ks)


def preimage_arcset(f: CircleMap, A: ArcSet, window: Optional[ArcSet] = None) -> ArcSet:
    """Boundary preimage of ``A`` under a circle-preserving map.

    Composites [f1, f2, ...] (f1 after f2 after ...) are chained right to left.
    ``window`` restricts power-map preimages to the arcs meeting it.

    Raises:
        NonCirclePreservingError: If a Möbius factor does not preserve the circle.
    """
    if isinstance(f, (list, tuple)):
        result = A
        for g in f:
            result = preimage_arcset(g, result)
        return result if window is None else result.intersection(window)
    if isinstance(f, MoebiusTransform):
        result = _preimage_mobius(f, A)
        return result if window is None else result.intersection(window)
    if isinstance(f, PowerMap):
        return _preimage_power(f.p, A, window)
    if isinstance(f, ContractionMap):
        return ArcSet.empty()
    raise NonCirclePreservingError(f"No boundary preimage rule for {f!r}")


def harmonic_measure_disc(z: complex, A: ArcSet) -> HMEstimate:
    """Exact omega(z, A, D): push A forward by w -> (w - z)/(1 - conj(z) w) and take arc length."""
    if abs(z) >= 1:
        raise ValidationError(f"Harmonic measure in the disc needs |z| < 1, got {z}")
    measure = A.measure()
    if measure in (ZERO, ONE) or z == 0:
        return HMEstimate(value=float(measure), method="exact")
    ctx = precision_context(config.ARC_PRECISION_BITS)
    T = MoebiusTransform(1, -z, -complex(z).conjugate(), 1)
    total = ctx.mpf(0)
    for s, e in A.intervals:
        start = _mobius_angle(ctx, T, s)
        end = _mobius_angle(ctx, T, e % 1)
        total += ctx.frac(end - start + 1)
    return HMEstimate(value=min(1.0, max(0.0, float(total))), method="exact")


def poisson_integral(z: complex, A: ArcSet) -> HMEstimate:
    """Adaptive quadrature of the Poisson kernel over A (an independent check)."""
    if abs(z) >= 1:
        raise ValidationError(f"Poisson integral needs |z| < 1, got {z}")
    r2 = abs(z) ** 2

    def kernel(t: float) -> float:
        return (1.0 - r2) / abs(turns_to_point(t) - z) ** 2

    total = 0.0
    for s, e in A.intervals:
        value, _ = integrate.quad(kernel, float(s), float(e), epsabs=1e-14, epsrel=1e-13, limit=400)
        total += value
    return HMEstimate(value=min(1.0, max(0.0, total)), method="quadrature")


def loewner_check(f: CircleMap, z: complex, S: ArcSet) -> float:
    """omega(f(z), S) - omega(z, f^{-1}(S)); never negative, zero for inner maps."""
    if abs(z) >= 1:
        raise ValidationError(f"Löwner check needs |z| < 1, got {z}")
    image = harmonic_measure_disc(apply_map(f, z), S).value
    preimage = harmonic_measure_disc(z, preimage_arcset(f, S)).value
    return image - preimage


def mobius_preimage_asymptotic_constant(theta: float, phi: float) -> float:
    """Limit of |M_a^{-1}(T)|/(1 - a) in radians for T = (e^{i theta}, e^{i phi}) as a -> 1."""
    u, v = complex(math.cos(theta), math.sin(theta)), complex(math.cos(phi), math.sin(phi))
    return 2.0 * abs(v - u) / abs((1 - v) * (1 - u))


def milloux_schmidt_bound(u_max: float, r: float, z_abs: float) -> float:
    """(4/pi) u_max arctan(sqrt(z_abs/r)) for 0 < z_abs < r."""
    if not (0.0 < z_abs < r):
        raise ValidationError(f"Milloux-Schmidt bound needs 0 < |z| < r, got {z_abs}, {r}")
    return 4.0 / math.pi * u_max * math.atan(math.sqrt(z_abs / r))


def shrinking_target_arcs(n: int, epsilon: Fraction, window: Optional[ArcSet] = None) -> ArcSet:
    """Preimage under z^{2^n} of the arc of length epsilon centered at 1/2 turn."""
    target = ArcSet.from_arcs([symmetric_arc(Fraction(1, 2), Fraction(epsilon) / 2)])
    return preimage_arcset(PowerMap(2 ** n), target, window)


def periodic_arc_overlap(start: Fraction, end: Fraction, n: int, epsilon: Fraction) -> Fraction:
    """Exact measure of [start, end) intersected with the 2^n copies of the shrinking-target arc.

    Copies are [(o + k)/2^n, (o + w + k)/2^n) with o = (1 - epsilon)/2 and w = epsilon;
    fully covered copies are counted rather than enumerated.
    """
    period = 2 ** n
    s, e = Fraction(start) * period, Fraction(end) * period
    o, w = (1 - Fraction(epsilon)) / 2, Fraction(epsilon)

    def piece(k: int) -> Fraction:
        return max(ZERO, min(e, o + w + k) - max(s, o + k))

    lo, hi = math.floor(s - o - w), math.ceil(e - o)
    full_lo, full_hi = math.ceil(s - o), math.floor(e - o - w)
    if full_hi - full_lo < 4:
        total = sum((piece(k) for k in range(lo, hi + 1)), ZERO)
    else:
        edges = set(range(lo, full_lo)) | set(range(full_hi + 1, hi + 1))
        total = (full_hi - full_lo + 1) * w + sum((piece(k) for k in edges), ZERO)
    return total / period


class BallRestriction:
    """V = U intersected with the disc D(center, radius), for exit-through-circle measures."""

    def __init__(self, domain: DomainSpec, center: complex, radius: float):
        self.domain = domain
        self.center = complex(center)
        self.radius = float(radius)
        self.kind = f"{domain.kind}-ball"
        self.diameter = 2.0 * self.radius

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius and self.domain.contains(z)

    def ball_gap(self, z: np.ndarray) -> np.ndarray:
        return self.radius - np.abs(z - self.center)

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        return np.minimum(self.domain.wos_distance(z), self.ball_gap(z))

    def circle_exit(self, shell: float) -> Callable[[np.ndarray], np.ndarray]:
        return lambda points: self.ball_gap(points) < shell


def arc_target(A: ArcSet) -> Callable[[np.ndarray], np.ndarray]:
    """Walk target on the unit circle given by an arc set."""
    return lambda points: A.contains_points(np.angle(points) / (2.0 * np.pi))


def _walk_chunk(region, z: complex, target, count: int, shell: float, rng: np.random.Generator):
    pos = np.full(count, complex(z), dtype=complex)
    steps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    hits = capped = 0
    while active.size:
        p = pos[active]
        radius = region.wos_distance(p)
        done = ~(radius >= shell)
        if done.any():
            hits += int(np.count_nonzero(target(p[done])))
        moving = active[~done]
        jump = radius[~done] * np.exp(2j * np.pi * rng.random(moving.size))
        pos[moving] += jump
        steps[moving] += 1
        over = steps[moving] >= config.WOS_STEP_CAP
        if over.any():
            capped += int(np.count_nonzero(over))
            moving = moving[~over]
        active = moving
    return hits, int(steps.sum()), capped


def walk_on_spheres(
    domain,
    z: complex,
    target: Union[ArcSet, Callable[[np.ndarray], np.ndarray]],
    n_walks: int,
    shell: Optional[float] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> HMEstimate:
    """Monte Carlo harmonic measure of the absorption set ``target`` seen from z.

    Each walk jumps to a uniform point of the largest inscribed circle (or a
    certified smaller one) until it is within ``shell`` of the boundary.

    Raises:
        NonConvergenceError: If the mean walk length exceeds the configured cap.
    """
    if n_walks < 1:
        raise ValidationError(f"n_walks must be positive, got {n_walks}")
    if not domain.contains(z):
        raise ValidationError(f"Walk start {z} is not inside the {domain.kind} region")
    seed = config.DEFAULT_SEED if seed is None else int(seed)
    if shell is None:
        shell = config.WOS_SHELL_FRACTION * (domain.diameter or 2.0)
    if isinstance(target, ArcSet):
        target = arc_target(target)

    per_chunk = config.WOS_CHUNK_WALKS
    counts = [min(per_chunk, n_walks - i) for i in range(0, n_walks, per_chunk)]
    generators = chunk_generators(seed, len(counts))
    runner = SampleRunner(workers=workers, chunk_size=1)
    results = runner.run(
        lambda job: _walk_chunk(domain, z, target, job[0], shell, job[1]),
        list(zip(counts, generators)),
    )
    hits = sum(r[0] for r in results)
    total_steps = sum(r[1] for r in results)
    capped = sum(r[2] for r in results)

    mean_steps = total_steps / n_walks
    if mean_steps > config.WOS_MEAN_STEP_CAP:
        raise NonConvergenceError(
            f"Mean walk length {mean_steps:.0f} exceeds cap {config.WOS_MEAN_STEP_CAP}"
        )
    if capped:
        logger.warning(f"{capped} of {n_walks} walks hit the step cap and were counted as misses")

    value = hits / n_walks
    logger.debug(f"Walk-on-spheres from {z}: {hits}/{n_walks} hits, mean {mean_steps:.1f} steps")
    return HMEstimate(
        value=value,
        std_error=math.sqrt(value * (1.0 - value) / n_walks),
        n_samples=n_walks,
        method="walk-on-spheres",
        seed=seed,
    )


def alpha_exponent_probe(
    domain: DomainSpec,
    zeta: complex,
    radii: Sequence[float],
    n_walks: int,
    ball_radius: float = 1.0,
    direction: complex = -1.0,
    shell: Optional[float] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> AlphaFit:
    """Fit omega(zeta + x direction, exit through the circle, V) ~ C x^alpha.

    Raises:
        ValidationError: Fewer than 4 radii or less than 1.5 decades spanned.
        DegenerateFitError: When fewer than two measures lie strictly in (0, 1).
    """
    radii = sorted(float(x) for x in radii)
    if len(radii) < 4 or radii[0] <= 0 or math.log10(radii[-1] / radii[0]) < 1.5:
        raise ValidationError("The alpha probe needs at least 4 positive radii spanning 1.5 decades")
    region = BallRestriction(domain, zeta, ball_radius)
    if shell is None:
        shell = config.WOS_SHELL_FRACTION * min(ball_radius, radii[0])
    target = region.circle_exit(shell)
    seed = config.DEFAULT_SEED if seed is None else int(seed)
    unit = complex(direction) / abs(direction)

    estimates = []
    for x, child_seed in zip(radii, derived_seeds(seed, len(radii))):
        start = complex(zeta) + x * unit
        estimates.append(walk_on_spheres(region, start, target, n_walks, shell=shell, seed=child_seed, workers=workers))

    usable = [(x, e.value) for x, e in zip(radii, estimates) if 0.0 < e.value < 1.0]
    if len(usable) < 2:
        raise DegenerateFitError("All harmonic measure estimates are 0 or 1; no slope can be fitted")
    log_x = np.log([x for x, _ in usable])
    log_w = np.log([w for _, w in usable])
    fit = stats.linregress(log_x, log_w)
    predicted = fit.intercept + fit.slope * log_x
    residual = float(np.sqrt(np.mean((log_w - predicted) ** 2)))
    logger.info(f"Alpha probe on {domain.kind} at {zeta}: slope {fit.slope:.4f}, rms residual {residual:.3g}")
    return AlphaFit(
        exponent=float(fit.slope),
        intercept=float(fit.intercept),
        residual=residual,
        r_squared=float(fit.rvalue ** 2),
        radii=radii,
        measures=[e.value for e in estimates],
        std_errors=[e.std_error for e in estimates],
    )
