"""Hyperbolic geometry of the disc, the right half-plane and conformally mapped domains.

Densities use the normalization rho_D(z) = 2/(1 - |z|^2), so that
dist_D(0, r) = log((1 + r)/(1 - r)) and rho_H(z) = 1/Re z on the right half-plane.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .config import config
from .utils.error_handler import (
    BoundaryProximityError,
    BranchError,
    DerivativeUnavailableError,
    NonCirclePreservingError,
    OutsideDomainError,
    PoleError,
    ValidationError,
)

logger = logging.getLogger(__name__)

TEST_TURNS = (0.0, 1.0 / 3.0, 2.0 / 3.0)


def turns_to_point(turns: float) -> complex:
    """Point e^{2 pi i turns} on the unit circle."""
    return cmath.exp(2j * math.pi * turns)


@dataclass(frozen=True)
class MoebiusTransform:
    """(az + b)/(cz + d) with coefficients renormalized to unit determinant."""

    a: complex
    b: complex
    c: complex
    d: complex
    disc_automorphism: bool = False

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0 or not cmath.isfinite(det):
            raise ValidationError(f"Degenerate Möbius coefficients: ad - bc = {det}")
        scale = cmath.sqrt(det)
        object.__setattr__(self, "a", a / scale)
        object.__setattr__(self, "b", b / scale)
        object.__setattr__(self, "c", c / scale)
        object.__setattr__(self, "d", d / scale)
        if self.disc_automorphism:
            self._check_disc_automorphism()

    def _check_disc_automorphism(self) -> None:
        tol = config.MOBIUS_TOLERANCE
        if abs(moebius_apply(self, 0j)) >= 1.0:
            raise NonCirclePreservingError(f"{self} does not map 0 into the unit disc")
        for turns in TEST_TURNS:
            image = moebius_apply(self, turns_to_point(turns))
            if abs(abs(image) - 1.0) > tol:
                raise NonCirclePreservingError(
                    f"{self} moves the circle point at {turns} turns to modulus {abs(image)}"
                )

    def __call__(self, z: complex) -> complex:
        return moebius_apply(self, z)

    def derivative(self, z: complex) -> complex:
        den = self.c * z + self.d
        if abs(den) < config.POLE_EPSILON:
            raise PoleError(f"Derivative pole at z={z}")
        return 1.0 / (den * den)

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1, 0, 0, 1, disc_automorphism=True)

    @classmethod
    def pull(cls, a: complex) -> "MoebiusTransform":
        """Disc automorphism M_a(z) = (z + a)/(1 + conj(a) z), sending 0 to a."""
        a = complex(a)
        if abs(a) >= 1.0:
            raise ValidationError(f"Pull parameter must lie in the open disc, got {a}")
        return cls(1, a, a.conjugate(), 1, disc_automorphism=True)

    @classmethod
    def rotation(cls, turns: float) -> "MoebiusTransform":
        lam = turns_to_point(turns)
        return cls(lam, 0, 0, 1, disc_automorphism=True)

    @classmethod
    def cayley(cls) -> "MoebiusTransform":
        """alpha(z) = (1 + z)/(1 - z), disc onto right half-plane."""
        return cls(1, 1, -1, 1)


def moebius_apply(T: MoebiusTransform, z: complex) -> complex:
    """Evaluate T at z.

    Raises:
        PoleError: If |cz + d| is below the configured pole epsilon.
    """
    den = T.c * z + T.d
    if abs(den) < config.POLE_EPSILON:
        raise PoleError(f"Pole of Möbius map at z={z}")
    return (T.a * z + T.b) / den


def moebius_compose(T1: MoebiusTransform, T2: MoebiusTransform) -> MoebiusTransform:
    """T1 after T2."""
    return MoebiusTransform(
        T1.a * T2.a + T1.b * T2.c,
        T1.a * T2.b + T1.b * T2.d,
        T1.c * T2.a + T1.d * T2.c,
        T1.c * T2.b + T1.d * T2.d,
        disc_automorphism=T1.disc_automorphism and T2.disc_automorphism,
    )


def moebius_inverse(T: MoebiusTransform) -> MoebiusTransform:
    return MoebiusTransform(T.d, -T.b, -T.c, T.a, disc_automorphism=T.disc_automorphism)


CAYLEY = MoebiusTransform.cayley()
INVERSE_CAYLEY = moebius_inverse(CAYLEY)


class DomainSpec:
    """A simply connected domain with a uniformization onto the disc or half-plane.

    Subclasses provide membership, the uniformizing map ``to_model`` with its
    derivative, the Euclidean boundary distance, and a vectorized lower bound
    on the boundary distance for walk-on-spheres.
    """

    kind: str = ""
    model: str = "disc"
    diameter: Optional[float] = None

    def contains(self, z: complex) -> bool:
        raise NotImplementedError

    def to_model(self, z: complex) -> complex:
        raise NotImplementedError

    def to_model_derivative(self, z: complex) -> complex:
        raise NotImplementedError

    def distance_to_boundary(self, z: complex) -> float:
        raise NotImplementedError

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def require(self, z: complex) -> None:
        if not self.contains(z):
            raise OutsideDomainError(f"{z} is not inside the {self.kind} domain")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(kind={self.kind!r})"


class UnitDisc(DomainSpec):
    kind = "unit-disc"
    model = "disc"
    diameter = 2.0

    def contains(self, z: complex) -> bool:
        return abs(z) < 1.0

    def to_model(self, z: complex) -> complex:
        return z

    def to_model_derivative(self, z: complex) -> complex:
        return 1.0

    def distance_to_boundary(self, z: complex) -> float:
        return 1.0 - abs(z)

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        return 1.0 - np.abs(z)


class RightHalfPlane(DomainSpec):
    kind = "right-half-plane"
    model = "half-plane"
    diameter = None

    def contains(self, z: complex) -> bool:
        return z.real > 0.0 and cmath.isfinite(z)

    def to_model(self, z: complex) -> complex:
        return z

    def to_model_derivative(self, z: complex) -> complex:
        return 1.0

    def distance_to_boundary(self, z: complex) -> float:
        return z.real

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        return z.real


class SectorComplement(DomainSpec):
    """Complement of the closed sector |arg z| <= beta/2 with vertex 0."""

    kind = "sector-complement"
    model = "half-plane"
    diameter = None

    def __init__(self, beta: float):
        if not (0.0 < beta < 2.0 * math.pi):
            raise ValidationError(f"Sector opening must lie in (0, 2pi), got {beta}")
        self.beta = beta
        self.exponent = math.pi / (2.0 * math.pi - beta)

    def contains(self, z: complex) -> bool:
        return z != 0 and abs(cmath.phase(z)) > self.beta / 2.0

    def to_model(self, z: complex) -> complex:
        return (-z) ** self.exponent

    def to_model_derivative(self, z: complex) -> complex:
        return -self.exponent * (-z) ** (self.exponent - 1.0)

    def distance_to_boundary(self, z: complex) -> float:
        excess = abs(cmath.phase(z)) - self.beta / 2.0
        if excess >= math.pi / 2.0:
            return abs(z)
        return abs(z) * math.sin(excess)

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        excess = np.abs(np.angle(z)) - self.beta / 2.0
        return np.where(excess >= np.pi / 2.0, np.abs(z), np.abs(z) * np.sin(excess))


class RiemannMappedDomain(DomainSpec):
    """Image U = phi(D) of the unit disc under an explicit univalent phi.

    ``phi``, ``dphi`` and ``phi_inv`` must accept numpy arrays as well as
    scalars. ``slit`` optionally flags points where phi_inv has its branch cut.
    """

    model = "disc"

    def __init__(
        self,
        phi: Callable,
        dphi: Callable,
        phi_inv: Callable,
        kind: str = "riemann-mapped",
        slit: Optional[Callable[[complex], bool]] = None,
        diameter: Optional[float] = None,
    ):
        self.phi = phi
        self.dphi = dphi
        self.phi_inv = phi_inv
        self.kind = kind
        self.slit = slit
        self.diameter = diameter

    def preimage(self, z: complex) -> complex:
        if self.slit is not None and self.slit(z):
            raise BranchError(f"{z} lies on the branch slit of the {self.kind} inverse map")
        return complex(self.phi_inv(z))

    def contains(self, z: complex) -> bool:
        if not cmath.isfinite(z):
            return False
        if self.slit is not None and self.slit(z):
            return False
        w = complex(self.phi_inv(z))
        if abs(w) >= 1.0:
            return False
        return abs(complex(self.phi(w)) - z) <= 1e-9 * (1.0 + abs(z))

    def to_model(self, z: complex) -> complex:
        return self.preimage(z)

    def to_model_derivative(self, z: complex) -> complex:
        return 1.0 / complex(self.dphi(self.preimage(z)))

    @cached_property
    def _boundary_samples(self) -> np.ndarray:
        t = np.arange(config.CARDIOID_BOUNDARY_SAMPLES) / config.CARDIOID_BOUNDARY_SAMPLES
        return np.asarray(self.phi(np.exp(2j * np.pi * t)), dtype=complex)

    def _boundary_gap(self, t: float, z: complex) -> float:
        return abs(complex(self.phi(turns_to_point(t))) - z)

    def distance_to_boundary(self, z: complex) -> float:
        samples = self._boundary_samples
        count = len(samples)
        gaps = np.abs(samples - z)
        k = int(np.argmin(gaps))
        best = float(gaps[k])
        h = 1.0 / count
        # local parameter u in [1, 3] keeps the golden-section tolerance relative
        def objective(u: float) -> float:
            return self._boundary_gap(k * h + (u - 2.0) * h, z)
        try:
            result = minimize_scalar(
                objective,
                bracket=(1.0, 2.0, 3.0),
                method="golden",
                tol=config.BOUNDARY_DISTANCE_RTOL,
            )
            best = min(best, float(result.fun))
        except ValueError:
            logger.debug(f"Flat bracket at sample {k} for {z}; keeping sampled distance")
        return best

    def wos_distance(self, z: np.ndarray) -> np.ndarray:
        # Koebe quarter theorem: dist(phi(w), boundary) >= (1 - |w|^2)|phi'(w)|/4
        w = self.phi_inv(z)
        return 0.25 * (1.0 - np.abs(w) ** 2) * np.abs(self.dphi(w))


def _cardioid_slit(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0


def unit_disc() -> UnitDisc:
    return UnitDisc()


def right_half_plane() -> RightHalfPlane:
    return RightHalfPlane()


def sector_complement(beta: float) -> SectorComplement:
    return SectorComplement(beta)


def cardioid() -> RiemannMappedDomain:
    """phi(D) for phi(z) = (z - 1)^2; inverse 1 - sqrt(z) so that phi^{-1}(1) = 0."""
    return RiemannMappedDomain(
        phi=lambda w: (w - 1.0) ** 2,
        dphi=lambda w: 2.0 * (w - 1.0),
        phi_inv=lambda z: 1.0 - np.sqrt(z + 0j),
        kind="cardioid",
        slit=_cardioid_slit,
        diameter=4.0,
    )


def riemann_mapped(
    phi: Callable,
    dphi: Callable,
    phi_inv: Callable,
    slit: Optional[Callable[[complex], bool]] = None,
    diameter: Optional[float] = None,
) -> RiemannMappedDomain:
    return RiemannMappedDomain(phi, dphi, phi_inv, slit=slit, diameter=diameter)


def _model_density(model: str, w: complex) -> float:
    if model == "disc":
        return 2.0 / (1.0 - abs(w) ** 2)
    return 1.0 / w.real


def density(domain: DomainSpec, z: complex) -> float:
    """Hyperbolic density of ``domain`` at z.

    Raises:
        OutsideDomainError: If z is not inside the domain.
    """
    domain.require(z)
    w = domain.to_model(z)
    return _model_density(domain.model, w) * abs(domain.to_model_derivative(z))


def _model_distance(model: str, z: complex, w: complex) -> float:
    if z == w:
        return 0.0
    if model == "disc":
        r = abs((z - w) / (1.0 - w.conjugate() * z))
    else:
        r = abs(z - w) / abs(z + w.conjugate())
    if r >= 1.0:
        raise BoundaryProximityError(f"Pseudo-hyperbolic distance {r} between {z} and {w} is not < 1")
    return 2.0 * math.atanh(r)


def hyperbolic_distance(domain: DomainSpec, z: complex, w: complex) -> float:
    """Hyperbolic distance in ``domain``; half-plane distances are computed natively."""
    domain.require(z)
    domain.require(w)
    return _model_distance(domain.model, domain.to_model(z), domain.to_model(w))


def hyperbolic_distortion(f, z: complex, dom: DomainSpec, codom: DomainSpec) -> float:
    """rho_codom(f(z)) |f'(z)| / rho_dom(z).

    Raises:
        DerivativeUnavailableError: If ``f`` has no derivative.
        BoundaryProximityError: If f(z) is not inside ``codom``.
    """
    derivative = getattr(f, "derivative", None)
    if derivative is None:
        raise DerivativeUnavailableError(f"Map {f!r} carries no derivative")
    fz = f(z)
    if not codom.contains(fz):
        raise BoundaryProximityError(f"Image {fz} of {z} is not inside the {codom.kind} codomain")
    return density(codom, fz) * abs(derivative(z)) / density(dom, z)


def euclidean_proximity_bound(d: float, delta: float) -> float:
    """2 d e^{2d} delta, the bound on |F_n(z) - F_n(z0)| for d = dist(z, z0)."""
    if d < 0 or delta < 0:
        raise ValidationError(f"Proximity bound needs d, delta >= 0, got {d}, {delta}")
    if d == 0:
        return 0.0
    return 2.0 * d * math.exp(2.0 * d) * delta


def boundary_distance(domain: DomainSpec, z: complex) -> float:
    domain.require(z)
    return domain.distance_to_boundary(z)


def cayley_to_half_plane(z: complex) -> complex:
    """Disc point to the right half-plane, z -> (1 + z)/(1 - z)."""
    return moebius_apply(CAYLEY, z)


def cayley_to_disc(w: complex) -> complex:
    """Right half-plane point to the disc, w -> (w - 1)/(w + 1)."""
    return moebius_apply(INVERSE_CAYLEY, w)
