"""Map families and forward-composition sequences.

A ``MapSequence`` yields step maps f_n (n >= 1) and, when known, the composites
F_n = f_n o ... o f_1 o F_0 in closed form. Every built-in map carries a list of
boundary operations describing its action on circle angles (in turns); the
circle_orbits module applies them at working precision.

Half-plane families act on the right half-plane; their boundary operations are
written for the disc conjugate, where the angle theta corresponds to the
boundary point i*cot(pi*theta) of the half-plane.
"""

import cmath
import logging
import math
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import config
from .hypgeo import (
    CAYLEY,
    INVERSE_CAYLEY,
    DomainSpec,
    MoebiusTransform,
    cardioid,
    moebius_compose,
    moebius_inverse,
    right_half_plane,
    unit_disc,
)
from .harmonic import symmetric_arc
from .precision import fraction_to_mpf, mpf_to_fraction, precision_context
from .utils.error_handler import (
    ArcConstraintError,
    DerivativeUnavailableError,
    OrbitOverflowError,
    UnknownIdError,
    ValidationError,
)

logger = logging.getLogger(__name__)

LOG_SCALE_THRESHOLD = 1e100


class SequenceKind(str, Enum):
    THEOREM_D = "theorem-d"
    EXAMPLE_7_3 = "example-7-3"
    EXAMPLE_8_1 = "example-8-1"
    EXAMPLE_8_2 = "example-8-2"
    EXAMPLE_8_3 = "example-8-3"
    EXAMPLE_4_3 = "example-4-3"
    CUSTOM = "custom"


# ---------------------------------------------------------------------------
# Parameter sequences
# ---------------------------------------------------------------------------

class ParamSequence:
    """Increasing parameters a_n in [0, 1) with a_0 = 0 and a_n -> 1.

    Values are exact rationals. ``epsilon(n)`` is 1 - a_n.
    """

    NAMES = ("one-minus-reciprocal", "geometric", "explicit")

    def __init__(self, name: str, shift: int = 0, ratio: Optional[Fraction] = None,
                 values: Optional[Sequence[Fraction]] = None):
        if name not in self.NAMES:
            raise ValidationError(f"Unknown parameter sequence {name!r}")
        self.name = name
        self.shift = int(shift)
        self.ratio = Fraction(ratio) if ratio is not None else None
        self.values = tuple(Fraction(v) for v in values) if values is not None else None
        self._cache: Dict[int, Fraction] = {}
        self._validate()

    def _validate(self) -> None:
        if self.name == "one-minus-reciprocal" and self.shift < 0:
            raise ValidationError(f"Reciprocal shift must be >= 0, got {self.shift}")
        if self.name == "geometric" and not (self.ratio is not None and 0 < self.ratio < 1):
            raise ValidationError(f"Geometric ratio must lie in (0, 1), got {self.ratio}")
        if self.name == "explicit":
            if not self.values or self.values[0] != 0:
                raise ValidationError("Explicit parameter lists must start with a_0 = 0")
            for prev, cur in zip(self.values, self.values[1:]):
                if not (prev <= cur < 1):
                    raise ValidationError(f"Explicit parameters must increase inside [0, 1): {prev} -> {cur}")

    @classmethod
    def one_minus_reciprocal(cls, shift: int = 0) -> "ParamSequence":
        return cls("one-minus-reciprocal", shift=shift)

    @classmethod
    def geometric(cls, ratio: Fraction = Fraction(1, 2)) -> "ParamSequence":
        return cls("geometric", ratio=ratio)

    @classmethod
    def explicit(cls, values: Sequence) -> "ParamSequence":
        return cls("explicit", values=values)

    def epsilon(self, n: int) -> Fraction:
        """1 - a_n, exact."""
        if n < 0:
            raise ValidationError(f"Parameter index must be >= 0, got {n}")
        cached = self._cache.get(n)
        if cached is not None:
            return cached
        if self.name == "one-minus-reciprocal":
            value = Fraction(1) if n == 0 else Fraction(1, n + self.shift)
        elif self.name == "geometric":
            value = self.ratio ** n
        else:
            if n >= len(self.values):
                raise ValidationError(f"Explicit parameter list has no entry {n}")
            value = 1 - self.values[n]
        self._cache[n] = value
        return value

    def value(self, n: int) -> Fraction:
        return 1 - self.epsilon(n)

    def __getitem__(self, n: int) -> float:
        return float(self.value(n))

    @property
    def label(self) -> str:
        if self.name == "one-minus-reciprocal":
            return "1-1/n" if self.shift == 0 else f"1-1/(n+{self.shift})"
        if self.name == "geometric":
            return "1-2^-n" if self.ratio == Fraction(1, 2) else f"1-({self.ratio})^n"
        return "list(" + ";".join(str(v) for v in self.values) + ")"

    @classmethod
    def parse(cls, label: str) -> "ParamSequence":
        text = label.replace(" ", "")
        if text == "1-1/n":
            return cls.one_minus_reciprocal()
        match = re.fullmatch(r"1-1/\(n\+(\d+)\)", text)
        if match:
            return cls.one_minus_reciprocal(int(match.group(1)))
        if text == "1-2^-n":
            return cls.geometric()
        match = re.fullmatch(r"1-\((\d+/\d+)\)\^n", text)
        if match:
            return cls.geometric(Fraction(match.group(1)))
        match = re.fullmatch(r"list\(([^)]*)\)", text)
        if match:
            try:
                return cls.explicit([Fraction(v) for v in match.group(1).split(";")])
            except (ValueError, ZeroDivisionError):
                raise ValidationError(f"Bad explicit parameter list {label!r}")
        raise ValidationError(
            f"Unknown parameter sequence {label!r}; use 1-1/n, 1-1/(n+k), 1-2^-n, 1-(p/q)^n or list(a0;a1;...)"
        )

    def __repr__(self) -> str:
        return f"ParamSequence({self.label!r})"


# ---------------------------------------------------------------------------
# Boundary operations (angles in turns)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RotationOp:
    """theta -> theta + turns."""
    turns: Fraction


@dataclass(frozen=True)
class RealMobiusOp:
    """Boundary action of M_a(z) = (z + a)/(1 + a z), a = 1 - eps, or its inverse."""
    eps: Fraction
    inverse: bool = False


@dataclass(frozen=True)
class PowerOp:
    """theta -> p * theta, the boundary action of z^p."""
    p: int


@dataclass(frozen=True)
class AffineHalfPlaneOp:
    """Half-plane boundary y -> scale * y + shift, with y = cot(pi * theta)."""
    scale: Fraction
    shift: Fraction


@dataclass(frozen=True)
class JoukowskiHalfPlaneOp:
    """Half-plane boundary y -> (lam y - 1/(lam y))/2 for the Example 8.2 multiplier of index n."""
    n: int


@dataclass(frozen=True)
class BlaschkeOp:
    """Boundary action of e^{2 pi i rotation} prod (z - a)/(1 - conj(a) z)."""
    zeros: Tuple[complex, ...]
    rotation: Fraction


BoundaryOp = Union[RotationOp, RealMobiusOp, PowerOp, AffineHalfPlaneOp, JoukowskiHalfPlaneOp, BlaschkeOp]


# ---------------------------------------------------------------------------
# Maps and sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogScalePoint:
    """Half-plane point tracked as log|w| and arg w once |w| exceeds 1e100."""

    log_modulus: float
    argument: float

    @classmethod
    def from_complex(cls, w: complex) -> "LogScalePoint":
        return cls(math.log(abs(w)), cmath.phase(w))

    @property
    def log10_modulus(self) -> float:
        return self.log_modulus / math.log(10.0)


InteriorValue = Union[complex, LogScalePoint]


@dataclass(frozen=True)
class HolomorphicMap:
    """A holomorphic map with optional derivative and boundary description.

    ``boundary_ops`` is applied left to right; None means the boundary extension
    is not known. ``asymptotic_scale`` is the factor s with f(w) ~ s w as
    |w| -> infinity, used to keep tracking half-plane orbits in log scale.
    """

    func: Callable[[complex], complex]
    derivative_func: Optional[Callable[[complex], complex]] = None
    boundary_ops: Optional[Tuple[BoundaryOp, ...]] = None
    name: str = ""
    asymptotic_scale: Optional[float] = None
    mobius: Optional[MoebiusTransform] = None

    def __call__(self, z: complex) -> complex:
        return self.func(z)

    def derivative(self, z: complex) -> complex:
        if self.derivative_func is None:
            raise DerivativeUnavailableError(f"Map {self.name or self.func!r} carries no derivative")
        return self.derivative_func(z)

    def __repr__(self) -> str:
        return f"HolomorphicMap({self.name!r})"


def _identity_map() -> HolomorphicMap:
    return HolomorphicMap(
        func=lambda z: z,
        derivative_func=lambda z: 1.0,
        boundary_ops=(),
        name="id",
        asymptotic_scale=1.0,
        mobius=MoebiusTransform.identity(),
    )


def _mobius_map(T: MoebiusTransform, ops: Tuple[BoundaryOp, ...], name: str) -> HolomorphicMap:
    return HolomorphicMap(func=T, derivative_func=T.derivative, boundary_ops=ops, name=name, mobius=T)


@dataclass(frozen=True, eq=False)
class MapSequence:
    """Forward-composition sequence F_n = f_n o ... o f_1 o F_0."""

    kind: SequenceKind
    generator: Callable[[int], HolomorphicMap]
    domain_seq: Callable[[int], DomainSpec]
    closed_form: Optional[Callable[[int], HolomorphicMap]] = None
    params: Dict[str, Any] = field(default_factory=dict)
    initial: Optional[HolomorphicMap] = None
    sequence_id: str = ""
    ledger: Optional["TheoremDLedger"] = None

    def step(self, n: int) -> HolomorphicMap:
        if n < 1:
            raise ValidationError(f"Step maps are indexed from 1, got {n}")
        return self.generator(n)

    def composite(self, n: int) -> Optional[HolomorphicMap]:
        """Closed-form F_n, or None when the family has no closed form."""
        if n < 0:
            raise ValidationError(f"Composite index must be >= 0, got {n}")
        if self.closed_form is None:
            return None
        return self.closed_form(n)

    def start_map(self) -> HolomorphicMap:
        return self.initial if self.initial is not None else _identity_map()

    def domain(self, n: int) -> DomainSpec:
        return self.domain_seq(n)

    @property
    def param_sequence(self) -> Optional[ParamSequence]:
        return self.params.get("a")

    def __repr__(self) -> str:
        return f"MapSequence({self.sequence_id or self.kind.value!r})"


# ---------------------------------------------------------------------------
# Interior evaluation
# ---------------------------------------------------------------------------

def _pow2n(z: complex, n: int) -> complex:
    """z^(2^n) through the exponent, with underflow to 0."""
    return _pow_int(z, 2 ** n)


def _pow_int(z: complex, m: int) -> complex:
    if z == 0:
        return 0j
    log_r = math.log(abs(z)) * m
    if log_r < -745.0:
        return 0j
    if log_r > 709.0:
        raise OrbitOverflowError(f"|z|^{m} overflows for z={z}")
    angle = math.fmod(cmath.phase(z) * m, 2.0 * math.pi)
    return cmath.rect(math.exp(log_r), angle)


def _step_value(f: HolomorphicMap, w: InteriorValue) -> InteriorValue:
    if isinstance(w, LogScalePoint):
        if f.asymptotic_scale is None:
            raise OrbitOverflowError(f"{f.name} has no asymptotic form for log-scale tracking")
        return LogScalePoint(w.log_modulus + math.log(f.asymptotic_scale), w.argument)
    value = complex(f(w))
    if not cmath.isfinite(value):
        raise OrbitOverflowError(f"{f.name} overflowed at {w}")
    if abs(value) > LOG_SCALE_THRESHOLD:
        if f.asymptotic_scale is None:
            raise OrbitOverflowError(f"Orbit left the representable range at {value}")
        logger.debug(f"Switching to log-scale tracking at |w| = {abs(value):.3g}")
        return LogScalePoint.from_complex(value)
    return value


def evaluate_interior(seq: MapSequence, n: int, z: complex) -> InteriorValue:
    """F_n(z): closed form when present, otherwise step-by-step composition.

    Raises:
        OutsideDomainError: If z is not inside domain_seq(0).
        OrbitOverflowError: If a value overflows and the step has no asymptotic form.
    """
    seq.domain(0).require(z)
    closed = seq.composite(n)
    if closed is not None:
        value = complex(closed(z))
        if not cmath.isfinite(value):
            raise OrbitOverflowError(f"F_{n}({z}) overflowed")
        return value
    return interior_orbit(seq, z, n, use_closed_form=False)[-1]


def interior_orbit(seq: MapSequence, z: complex, N: int, use_closed_form: bool = True) -> List[InteriorValue]:
    """[F_0(z), ..., F_N(z)]."""
    seq.domain(0).require(z)
    if use_closed_form and seq.closed_form is not None:
        return [complex(seq.composite(n)(z)) for n in range(N + 1)]
    values: List[InteriorValue] = [_step_value(seq.start_map(), z)]
    for n in range(1, N + 1):
        values.append(_step_value(seq.step(n), values[-1]))
    return values


# ---------------------------------------------------------------------------
# Example 8.1 / 8.3 / 4.3: pulls and squaring
# ---------------------------------------------------------------------------

def _pull(a: ParamSequence, n: int) -> MoebiusTransform:
    return MoebiusTransform.pull(float(a.value(n)))


def make_example_8_1(a: ParamSequence) -> MapSequence:
    """F_n = M_{a_n}; steps m_n = M_n o M_{n-1}^{-1}."""

    def closed(n: int) -> HolomorphicMap:
        return _mobius_map(_pull(a, n), (RealMobiusOp(a.epsilon(n)),), f"M_{n}")

    def step(n: int) -> HolomorphicMap:
        T = moebius_compose(_pull(a, n), moebius_inverse(_pull(a, n - 1)))
        ops = (RealMobiusOp(a.epsilon(n - 1), inverse=True), RealMobiusOp(a.epsilon(n)))
        return _mobius_map(T, ops, f"m_{n}")

    return MapSequence(
        kind=SequenceKind.EXAMPLE_8_1,
        generator=step,
        domain_seq=lambda n: unit_disc(),
        closed_form=closed,
        params={"a": a},
        sequence_id=canonical_sequence_id("ex8.1", {"a": a.label}),
    )


def _squaring_step(a: ParamSequence, n: int) -> HolomorphicMap:
    outer = _pull(a, n)
    inner = moebius_inverse(_pull(a, n - 1))

    def func(z: complex) -> complex:
        s = inner(z)
        return outer(s * s)

    def derivative(z: complex) -> complex:
        s = inner(z)
        return outer.derivative(s * s) * 2.0 * s * inner.derivative(z)

    ops = (RealMobiusOp(a.epsilon(n - 1), inverse=True), PowerOp(2), RealMobiusOp(a.epsilon(n)))
    return HolomorphicMap(func, derivative, ops, name=f"b_{n}")


def _squaring_composite(a: ParamSequence, n: int) -> HolomorphicMap:
    outer = _pull(a, n)
    power = 2 ** n

    def func(z: complex) -> complex:
        return outer(_pow2n(z, n))

    def derivative(z: complex) -> complex:
        if z == 0:
            return outer.derivative(0j) if n == 0 else 0j
        w = _pow2n(z, n)
        return outer.derivative(w) * power * w / z

    ops = (PowerOp(power), RealMobiusOp(a.epsilon(n)))
    return HolomorphicMap(func, derivative, ops, name=f"B_{n}")


def make_example_8_3(a: ParamSequence) -> MapSequence:
    """Steps b_n(z) = M_n((M_{n-1}^{-1}(z))^2); composites B_n(z) = M_n(z^(2^n))."""
    return MapSequence(
        kind=SequenceKind.EXAMPLE_8_3,
        generator=partial(_squaring_step, a),
        domain_seq=lambda n: unit_disc(),
        closed_form=partial(_squaring_composite, a),
        params={"a": a},
        sequence_id=canonical_sequence_id("ex8.3", {"a": a.label}),
    )


def make_example_4_3() -> MapSequence:
    """Cardioid self-maps F_n = phi o B_n o phi^{-1}, phi(z) = (z - 1)^2, a_n = 1 - 1/n."""
    a = ParamSequence.one_minus_reciprocal()
    domain = cardioid()

    def conjugated(inner: HolomorphicMap, name: str) -> HolomorphicMap:
        def func(z: complex) -> complex:
            return complex(domain.phi(inner(domain.preimage(z))))

        def derivative(z: complex) -> complex:
            w = domain.preimage(z)
            return complex(domain.dphi(inner(w))) * inner.derivative(w) / complex(domain.dphi(w))

        return HolomorphicMap(func, derivative, inner.boundary_ops, name=name)

    return MapSequence(
        kind=SequenceKind.EXAMPLE_4_3,
        generator=lambda n: conjugated(_squaring_step(a, n), f"f_{n}"),
        domain_seq=lambda n: domain,
        closed_form=lambda n: conjugated(_squaring_composite(a, n), f"F_{n}"),
        params={"a": a},
        sequence_id="ex4.3",
    )


# ---------------------------------------------------------------------------
# Theorem D: rotated pulls with an empty Denjoy-Wolff set
# ---------------------------------------------------------------------------

class TheoremDLedger:
    """Turn ledger tau_0 = 0, tau_{n+1} = tau_n + |M_{a_n}^{-1}(S^c)| for S centered at angle 0.

    I_n = [tau_n, tau_{n+1}] and the rotation of F_n centers the preimage arc on I_n.
    """

    def __init__(self, a: ParamSequence, half_width: Fraction):
        self.a = a
        self.half_width = Fraction(half_width)
        self._turns: List[Fraction] = [Fraction(0)]
        self._lock = threading.Lock()

    def length(self, n: int) -> Fraction:
        """|M_{a_n}^{-1}(S^c)| in turns, from the exact preimage endpoints at 128 bits."""
        ctx = precision_context(config.ARC_PRECISION_BITS)
        eps = fraction_to_mpf(ctx, self.a.epsilon(n))
        slope = ctx.tan(ctx.pi * fraction_to_mpf(ctx, self.half_width))
        return mpf_to_fraction(2 / ctx.pi * ctx.atan(eps / ((2 - eps) * slope)))

    def turns(self, n: int) -> Fraction:
        with self._lock:
            while len(self._turns) <= n:
                k = len(self._turns) - 1
                self._turns.append(self._turns[k] + self.length(k))
            return self._turns[n]

    def interval(self, n: int) -> Tuple[Fraction, Fraction]:
        return self.turns(n), self.turns(n + 1)

    def rotation(self, n: int) -> Fraction:
        lo, hi = self.interval(n)
        return (Fraction(1, 2) - (lo + hi) / 2) % 1

    def total(self, N: int) -> Fraction:
        """Theta_N = tau_{N+1}."""
        return self.turns(N + 1)

    def wraps(self, N: int) -> int:
        return math.floor(self.total(N))

    def escape_indices(self, phi: Fraction, N: int) -> List[int]:
        """Indices n <= N with phi congruent mod 1 to a point of I_n."""
        phi = Fraction(phi) % 1
        hits = []
        for n in range(N + 1):
            lo, hi = self.interval(n)
            k = math.ceil(lo - phi)
            if phi + k <= hi:
                hits.append(n)
        return hits

    def asymptotic_constant(self) -> float:
        """Limit of |I_n|/(1 - a_n) in turns."""
        return 1.0 / (math.pi * math.tan(math.pi * float(self.half_width)))


def _theorem_d_transform(a: ParamSequence, ledger: TheoremDLedger, n: int) -> MoebiusTransform:
    return moebius_compose(_pull(a, n), MoebiusTransform.rotation(float(ledger.rotation(n))))


def make_theorem_d(a: ParamSequence, S) -> MapSequence:
    """F_n(z) = (lam_n z + a_n)/(1 + lam_n a_n z) with lam_n rotating each preimage arc onto I_n.

    ``S`` is a CircleArc centered at angle 0 with half-width in (0, 1/8) turns.

    Raises:
        ArcConstraintError: If S is not such an arc.
    """
    half_width = Fraction(S.length) / 2
    center = (Fraction(S.start) + half_width) % 1
    if center != 0 or not (0 < half_width < Fraction(1, 8)):
        raise ArcConstraintError(
            f"S must be centered at angle 0 with half-width in (0, 1/8) turns, got start {S.start}, length {S.length}"
        )
    ledger = TheoremDLedger(a, half_width)

    def closed(n: int) -> HolomorphicMap:
        ops = (RotationOp(ledger.rotation(n)), RealMobiusOp(a.epsilon(n)))
        return _mobius_map(_theorem_d_transform(a, ledger, n), ops, f"F_{n}")

    def step(n: int) -> HolomorphicMap:
        T = moebius_compose(_theorem_d_transform(a, ledger, n), moebius_inverse(_theorem_d_transform(a, ledger, n - 1)))
        ops = (
            RealMobiusOp(a.epsilon(n - 1), inverse=True),
            RotationOp((ledger.rotation(n) - ledger.rotation(n - 1)) % 1),
            RealMobiusOp(a.epsilon(n)),
        )
        return _mobius_map(T, ops, f"f_{n}")

    theta = _half_width_label(half_width)
    return MapSequence(
        kind=SequenceKind.THEOREM_D,
        generator=step,
        domain_seq=lambda n: unit_disc(),
        closed_form=closed,
        params={"a": a, "half_width": half_width},
        initial=closed(0),
        sequence_id=canonical_sequence_id("thmD", {"a": a.label, "theta": theta}),
        ledger=ledger,
    )


# ---------------------------------------------------------------------------
# Half-plane families: Example 8.2 and Example 7.3
# ---------------------------------------------------------------------------

def example_8_2_multiplier(n: int) -> float:
    """lam_n = (n + 1 + sqrt(n^2 + 2n))/n, so that b_n(n) = n + 1."""
    if n < 1:
        raise ValidationError(f"Multiplier index must be >= 1, got {n}")
    return (n + 1 + math.sqrt(n * n + 2 * n)) / n


def make_example_8_2() -> MapSequence:
    """Half-plane steps b_n(z) = (lam_n z + 1/(lam_n z))/2 with B_n(1) = n + 1."""

    def step(n: int) -> HolomorphicMap:
        lam = example_8_2_multiplier(n)
        return HolomorphicMap(
            func=lambda z: 0.5 * (lam * z + 1.0 / (lam * z)),
            derivative_func=lambda z: 0.5 * (lam - 1.0 / (lam * z * z)),
            boundary_ops=(JoukowskiHalfPlaneOp(n),),
            name=f"b_{n}",
            asymptotic_scale=lam / 2.0,
        )

    return MapSequence(
        kind=SequenceKind.EXAMPLE_8_2,
        generator=step,
        domain_seq=lambda n: right_half_plane(),
        params={"hp_multiplier": example_8_2_multiplier},
        sequence_id="ex8.2",
    )


def example_7_3_indices(n: int) -> Optional[Tuple[int, int]]:
    """(j, k) with n = j(j+1)/2 + k, 0 <= k < j; None for n = 0 and unreached indices."""
    if n <= 0:
        return None
    j = (math.isqrt(8 * n + 1) - 1) // 2
    k = n - j * (j + 1) // 2
    return (j, k) if k < j else None


def example_7_3_flat_index(j: int, k: int) -> int:
    if not (0 <= k < j):
        raise ValidationError(f"Need 0 <= k < j, got j={j}, k={k}")
    return j * (j + 1) // 2 + k


def _example_7_3_affine(n: int) -> Tuple[Fraction, Fraction]:
    """(scale, shift) with M_n(iy) = i(scale y + shift); unreached indices repeat the previous map."""
    while n > 0 and example_7_3_indices(n) is None:
        n -= 1
    if n == 0:
        return Fraction(1), Fraction(0)
    j, k = example_7_3_indices(n)
    center = Fraction(-1) + Fraction(2 * k + 1, j)
    return Fraction(j), (1 - j) * center


def _affine_map(scale: Fraction, shift: Fraction, name: str) -> HolomorphicMap:
    s, t = float(scale), complex(0.0, float(shift))
    return HolomorphicMap(
        func=lambda w: s * w + t,
        derivative_func=lambda w: s,
        boundary_ops=(AffineHalfPlaneOp(scale, shift),),
        name=name,
        asymptotic_scale=s,
    )


def make_example_7_3() -> MapSequence:
    """M_n(w) = j(w - zeta_{j,k}) + zeta_{j,k} on the right half-plane, zeta_{j,k} = (-1 + (2k+1)/j) i."""

    def closed(n: int) -> HolomorphicMap:
        scale, shift = _example_7_3_affine(n)
        return _affine_map(scale, shift, f"M_{n}")

    def step(n: int) -> HolomorphicMap:
        s1, t1 = _example_7_3_affine(n)
        s0, t0 = _example_7_3_affine(n - 1)
        ratio = s1 / s0
        return _affine_map(ratio, t1 - ratio * t0, f"m_{n}")

    return MapSequence(
        kind=SequenceKind.EXAMPLE_7_3,
        generator=step,
        domain_seq=lambda n: right_half_plane(),
        closed_form=closed,
        sequence_id="ex7.3",
    )


def _conjugate_map(f: HolomorphicMap) -> HolomorphicMap:
    def func(z: complex) -> complex:
        return INVERSE_CAYLEY(f(CAYLEY(z)))

    def derivative(z: complex) -> complex:
        w = CAYLEY(z)
        return INVERSE_CAYLEY.derivative(f(w)) * f.derivative(w) * CAYLEY.derivative(z)

    mobius = None
    if f.mobius is not None:
        mobius = moebius_compose(INVERSE_CAYLEY, moebius_compose(f.mobius, CAYLEY))
    return HolomorphicMap(func, derivative, f.boundary_ops, name=f"conj({f.name})", mobius=mobius)


def _affine_mobius(f: HolomorphicMap) -> HolomorphicMap:
    op = f.boundary_ops[0]
    T = MoebiusTransform(float(op.scale), complex(0.0, float(op.shift)), 0, 1)
    return HolomorphicMap(f.func, f.derivative_func, f.boundary_ops, f.name, f.asymptotic_scale, T)


def conjugate_to_disc(seq: MapSequence) -> MapSequence:
    """Disc conjugate beta^{-1} o f_n o beta of a half-plane sequence, beta(z) = (1 + z)/(1 - z).

    Boundary operations carry over unchanged.
    """
    if seq.domain(0).model != "half-plane":
        return seq

    def lift(f: HolomorphicMap) -> HolomorphicMap:
        if f.boundary_ops and all(isinstance(op, AffineHalfPlaneOp) for op in f.boundary_ops):
            f = _affine_mobius(f)
        return _conjugate_map(f)

    closed = None
    if seq.closed_form is not None:
        closed = lambda n: lift(seq.composite(n))
    return MapSequence(
        kind=seq.kind,
        generator=lambda n: lift(seq.step(n)),
        domain_seq=lambda n: unit_disc(),
        closed_form=closed,
        params=dict(seq.params, conjugated=True),
        initial=lift(seq.initial) if seq.initial is not None else None,
        sequence_id=seq.sequence_id,
        ledger=seq.ledger,
    )


# ---------------------------------------------------------------------------
# Custom families
# ---------------------------------------------------------------------------

def make_power_sequence(p: int = 2) -> MapSequence:
    """Iteration of z^p; for p = 2 the boundary action is the doubling map."""
    if p < 2:
        raise ValidationError(f"Power sequences need p >= 2, got {p}")

    def closed(n: int) -> HolomorphicMap:
        m = p ** n

        def derivative(z: complex) -> complex:
            if z == 0:
                return 1.0 if m == 1 else 0j
            return m * _pow_int(z, m) / z

        return HolomorphicMap(lambda z: _pow_int(z, m), derivative, (PowerOp(m),), name=f"z^{m}")

    step_map = HolomorphicMap(lambda z: z ** p, lambda z: p * z ** (p - 1), (PowerOp(p),), name=f"z^{p}")
    return MapSequence(
        kind=SequenceKind.CUSTOM,
        generator=lambda n: step_map,
        domain_seq=lambda n: unit_disc(),
        closed_form=closed,
        params={"p": p},
        sequence_id=canonical_sequence_id("power", {"p": str(p)}),
    )


class BlaschkeProduct:
    """Finite Blaschke product e^{2 pi i rotation} prod (z - a_k)/(1 - conj(a_k) z)."""

    def __init__(self, zeros: Sequence[complex], rotation: Fraction = Fraction(0)):
        self.zeros = tuple(complex(a) for a in zeros)
        if any(abs(a) >= 1.0 for a in self.zeros):
            raise ValidationError("Blaschke zeros must lie in the open unit disc")
        self.rotation = Fraction(rotation) % 1
        self._unit = cmath.exp(2j * math.pi * float(self.rotation))

    def _factors(self, z: complex) -> List[complex]:
        return [(z - a) / (1 - a.conjugate() * z) for a in self.zeros]

    def __call__(self, z: complex) -> complex:
        value = self._unit
        for factor in self._factors(z):
            value *= factor
        return value

    def derivative(self, z: complex) -> complex:
        factors = self._factors(z)
        total = 0j
        for k, a in enumerate(self.zeros):
            term = (1 - abs(a) ** 2) / (1 - a.conjugate() * z) ** 2
            for j, factor in enumerate(factors):
                if j != k:
                    term *= factor
            total += term
        return self._unit * total

    def as_map(self, name: str) -> HolomorphicMap:
        return HolomorphicMap(self, self.derivative, (BlaschkeOp(self.zeros, self.rotation),), name=name)


def make_random_blaschke(seed: int, degree: int = 2, radius: float = 0.5) -> MapSequence:
    """Random Blaschke steps; step n is drawn from its own stream derived from (seed, n)."""
    if degree < 1 or not (0.0 < radius < 1.0):
        raise ValidationError(f"Need degree >= 1 and radius in (0, 1), got {degree}, {radius}")

    def step(n: int) -> HolomorphicMap:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), n])))
        moduli = radius * np.sqrt(rng.random(degree))
        angles = 2.0 * np.pi * rng.random(degree)
        zeros = [complex(r * math.cos(t), r * math.sin(t)) for r, t in zip(moduli, angles)]
        rotation = Fraction(int(rng.integers(0, 2 ** 53)), 2 ** 53)
        return BlaschkeProduct(zeros, rotation).as_map(f"b_{n}")

    return MapSequence(
        kind=SequenceKind.CUSTOM,
        generator=step,
        domain_seq=lambda n: unit_disc(),
        params={"seed": int(seed), "degree": degree},
        sequence_id=canonical_sequence_id("blaschke", {"seed": str(seed), "degree": str(degree)}),
    )


# ---------------------------------------------------------------------------
# Sequence identifiers
# ---------------------------------------------------------------------------

SEQUENCE_GRAMMAR = """\
<family>:<param>=<value>[,...]
  thmD:theta=pi/8[,a=1-1/(n+1)]   rotated pulls, S = (e^{-i theta}, e^{i theta}), 0 < theta < pi/4
  ex7.3                            affine half-plane maps j(w - zeta) + zeta
  ex8.1:a=<seq>                    Möbius pulls M_{a_n}
  ex8.2                            half-plane maps (lam_n z + 1/(lam_n z))/2
  ex8.3:a=<seq>                    M_n(z^(2^n))
  ex4.3                            cardioid conjugate of ex8.3 with a_n = 1 - 1/n
  power:p=<int>                    iteration of z^p
  blaschke:seed=<int>[,degree=<int>]  random finite Blaschke steps
<seq> is one of 1-1/n, 1-1/(n+k), 1-2^-n, 1-(p/q)^n, list(0;a1;a2;...)"""


def canonical_sequence_id(family: str, params: Dict[str, str]) -> str:
    if not params:
        return family
    return family + ":" + ",".join(f"{k}={params[k]}" for k in sorted(params))


def _half_width_label(half_width: Fraction) -> str:
    # theta = 2 pi h radians
    ratio = 2 * half_width
    if ratio.numerator == 1:
        return f"pi/{ratio.denominator}"
    return f"{ratio.numerator}*pi/{ratio.denominator}"


def _parse_theta(text: str) -> Fraction:
    """Half-width in turns from a radian angle such as pi/8, 3*pi/16 or 0.3."""
    match = re.fullmatch(r"(?:(\d+)\*)?pi(?:/(\d+))?", text)
    if match:
        return Fraction(int(match.group(1) or 1), 2 * int(match.group(2) or 1))
    try:
        return Fraction(float(text) / (2.0 * math.pi))
    except ValueError:
        raise ValidationError(f"Bad angle {text!r}; use pi/8, 3*pi/16 or a decimal in radians")


def _parse_int(params: Dict[str, str], key: str, default: Optional[int] = None) -> int:
    if key not in params:
        if default is None:
            raise ValidationError(f"Missing parameter {key!r}")
        return default
    try:
        return int(params[key])
    except ValueError:
        raise ValidationError(f"Parameter {key!r} must be an integer, got {params[key]!r}")


def _build_theorem_d(params: Dict[str, str]) -> MapSequence:
    half_width = _parse_theta(params.get("theta", "pi/8"))
    a = ParamSequence.parse(params.get("a", "1-1/(n+1)"))
    return make_theorem_d(a, symmetric_arc(0, half_width))


FAMILY_BUILDERS: Dict[str, Tuple[Tuple[str, ...], Callable[[Dict[str, str]], MapSequence]]] = {
    "thmD": (("theta", "a"), _build_theorem_d),
    "ex7.3": ((), lambda p: make_example_7_3()),
    "ex8.1": (("a",), lambda p: make_example_8_1(ParamSequence.parse(p.get("a", "1-1/n")))),
    "ex8.2": ((), lambda p: make_example_8_2()),
    "ex8.3": (("a",), lambda p: make_example_8_3(ParamSequence.parse(p.get("a", "1-1/n")))),
    "ex4.3": ((), lambda p: make_example_4_3()),
    "power": (("p",), lambda p: make_power_sequence(_parse_int(p, "p", 2))),
    "blaschke": (("seed", "degree"), lambda p: make_random_blaschke(_parse_int(p, "seed"), _parse_int(p, "degree", 2))),
}


def parse_sequence_id(text: str) -> MapSequence:
    """Build a sequence from ``<family>:<param>=<value>[,...]``.

    Raises:
        UnknownIdError: For an unknown family.
        ValidationError: For unknown or malformed parameters.
    """
    family, _, rest = text.strip().partition(":")
    if family not in FAMILY_BUILDERS:
        raise UnknownIdError(f"Unknown sequence family {family!r}; known: {', '.join(FAMILY_BUILDERS)}")
    allowed, builder = FAMILY_BUILDERS[family]
    params: Dict[str, str] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not value:
            raise ValidationError(f"Malformed parameter {item!r} in {text!r}")
        if key not in allowed:
            raise ValidationError(f"Family {family} takes no parameter {key!r}")
        params[key] = value
    seq = builder(params)
    logger.debug(f"Parsed sequence id {text!r} as {seq.sequence_id!r}")
    return seq
