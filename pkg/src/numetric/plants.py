"""Scalar transfer functions with dead time, evaluated on the unit disk.

A plant is a real-rational function plus an optional delay factor
exp(-s*T).  Half-plane functions are pulled back to the disk through the
Moebius map s = (1+z)/(1-z), which sends the open unit disk onto the open
right half-plane; disk functions are evaluated directly.  All the annulus
machinery downstream works with samples on circles |z| = r, so this module
is the single place where coordinates and singularities are handled.

Coefficient arrays are real and ascending: num[k] multiplies s**k (or
z**k for disk-domain functions).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

__all__ = [
    "Domain",
    "TransferFunction",
    "CirclePoint",
    "CircleSampling",
    "DomainError",
    "PoleHit",
    "UnsupportedDelay",
    "ValidationError",
    "evaluate",
    "eval_array",
    "sample_circle",
    "circle_grid",
    "transplant",
    "to_half_plane",
    "reduce_fraction",
    "poly_roots",
]

# Relative root-clustering tolerance for the lowest-terms check; callers
# that need a different tolerance go through reduce_fraction explicitly.
COMMON_ROOT_TOL = 1e-8

# Denominator magnitudes below this count as landing on a pole.
POLE_FLOOR = 1e-280

# Default exclusion arc (half-width) near z = 1 for dead-time functions
# sampled at or next to the boundary, where exp(-s*T) has no limit.
DEFAULT_EXCLUSION = 2.0 * math.pi / 1024.0
EXCLUSION_RADIUS = 0.999


class DomainError(ValueError):
    """Evaluation point outside the domain of definition."""


class PoleHit(ArithmeticError):
    """Evaluation landed on (or numerically under) a pole."""


class UnsupportedDelay(ValueError):
    """Operation defined only for delay-free or half-plane functions."""


class ValidationError(ValueError):
    """Constructor input violates a structural invariant."""


class Domain(enum.Enum):
    HALF_PLANE = "half-plane"
    DISK = "disk"


def _trim(coeffs) -> tuple[float, ...]:
    """Coerce to a float tuple with exact trailing zeros removed."""
    arr = [float(c) for c in coeffs]
    if not arr:
        raise ValidationError("empty coefficient array")
    for c in arr:
        if not math.isfinite(c):
            raise ValidationError("coefficients must be finite")
    while len(arr) > 1 and arr[-1] == 0.0:
        arr.pop()
    return tuple(arr)


def poly_roots(coeffs) -> np.ndarray:
    """Roots of an ascending-coefficient polynomial (empty for constants)."""
    c = np.asarray(coeffs, dtype=float)
    c = np.trim_zeros(c, "b")
    if c.size <= 1:
        return np.empty(0, dtype=complex)
    return npoly.polyroots(c)


def _common_root_pairs(num_roots: np.ndarray, den_roots: np.ndarray, tol: float):
    """Indices (i, j) of root pairs matching to relative tolerance."""
    pairs = []
    used = set()
    for i, r in enumerate(num_roots):
        best = None
        for j, p in enumerate(den_roots):
            if j in used:
                continue
            if abs(r - p) <= tol * max(1.0, abs(r), abs(p)):
                if best is None or abs(r - p) < abs(r - den_roots[best]):
                    best = j
        if best is not None:
            used.add(best)
            pairs.append((i, best))
    return pairs


def reduce_fraction(num, den, tol: float = COMMON_ROOT_TOL):
    """Cancel near-common roots of num/den.

    Returns (num, den, reduced).  When nothing matches within `tol` the
    inputs are returned bit-identical, so well-separated fractions are
    never perturbed by a root-finding round trip.
    """
    num = _trim(num)
    den = _trim(den)
    if num == (0.0,):
        return num, den, False
    nr = poly_roots(num)
    dr = poly_roots(den)
    pairs = _common_root_pairs(nr, dr, tol)
    if not pairs:
        return num, den, False
    keep_n = [r for i, r in enumerate(nr) if i not in {i_ for i_, _ in pairs}]
    keep_d = [r for j, r in enumerate(dr) if j not in {j_ for _, j_ in pairs}]
    new_num = num[-1] * npoly.polyfromroots(keep_n)
    new_den = den[-1] * npoly.polyfromroots(keep_d)
    # conjugate pairs cancel together, so the rebuilt coefficients are real
    return _trim(new_num.real), _trim(new_den.real), True


@dataclass(frozen=True)
class TransferFunction:
    """Real-rational function times an optional dead-time factor.

    Immutable after construction.  The fraction must be in lowest terms;
    use reduce_fraction (or cli.parse_plant, which warns) to clean inputs
    first.  Conjugate symmetry f(conj z) = conj f(z) holds automatically
    because the coefficients are real.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]
    delay: float = 0.0
    domain: Domain = Domain.HALF_PLANE

    def __post_init__(self):
        object.__setattr__(self, "num", _trim(self.num))
        object.__setattr__(self, "den", _trim(self.den))
        object.__setattr__(self, "delay", float(self.delay))
        if not isinstance(self.domain, Domain):
            object.__setattr__(self, "domain", Domain(self.domain))
        if self.den == (0.0,):
            raise ValidationError("denominator is the zero polynomial")
        if not (self.delay >= 0.0 and math.isfinite(self.delay)):
            raise ValidationError("delay must be finite and nonnegative")
        if self.domain is Domain.DISK and self.delay != 0.0:
            raise UnsupportedDelay("dead time is a half-plane notion; disk functions must have delay 0")
        if self.num != (0.0,):
            pairs = _common_root_pairs(poly_roots(self.num), poly_roots(self.den), COMMON_ROOT_TOL)
            if pairs:
                raise ValidationError(
                    "num and den share a root (to tolerance %g); reduce the fraction first" % COMMON_ROOT_TOL
                )

    @property
    def num_degree(self) -> int:
        return len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    @property
    def is_zero(self) -> bool:
        return self.num == (0.0,)

    def __neg__(self) -> "TransferFunction":
        return TransferFunction(tuple(-c for c in self.num), self.den, self.delay, self.domain)


@dataclass(frozen=True)
class CircleSampling:
    """Uniform sampling of the circle |z| = radius.

    count must be a power of two so downstream FFT passes can reuse the
    grid.  exclusion_angle is the half-width of an arc around theta = 0
    (the preimage of s = infinity) to skip; None selects the default rule:
    2*pi/1024 for dead-time functions sampled at radius >= 0.999, else 0.
    """

    radius: float
    count: int = 1024
    exclusion_angle: float | None = None

    def __post_init__(self):
        if not (0.0 < self.radius <= 1.0):
            raise ValidationError("radius must lie in (0, 1]")
        if self.count < 8 or self.count & (self.count - 1):
            raise ValidationError("count must be a power of two (and at least 8)")
        if self.exclusion_angle is not None and not (0.0 <= self.exclusion_angle < math.pi / 4):
            raise ValidationError("exclusion_angle must lie in [0, pi/4)")

    def resolve_exclusion(self, delay: float) -> float:
        if self.exclusion_angle is not None:
            return self.exclusion_angle
        if delay > 0.0 and self.radius >= EXCLUSION_RADIUS:
            return DEFAULT_EXCLUSION
        return 0.0


@dataclass(frozen=True)
class CirclePoint:
    """One evaluated sample: disk point, half-plane image, value."""

    z: complex
    s: complex
    value: complex


def disk_to_half_plane(z):
    """The Moebius map s = (1+z)/(1-z)."""
    z = np.asarray(z, dtype=complex)
    return (1.0 + z) / (1.0 - z)


def half_plane_to_disk(s):
    """Inverse map z = (s-1)/(s+1)."""
    s = np.asarray(s, dtype=complex)
    return (s - 1.0) / (s + 1.0)


def _ratio(num, den, w: np.ndarray) -> np.ndarray:
    """num(w)/den(w), using reversed coefficients for |w| > 1.

    The reversal n(w) = w**deg * nrev(1/w) keeps the evaluation stable for
    the huge |s| produced by circles hugging the boundary.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    w = np.asarray(w, dtype=complex)
    out = np.empty(w.shape, dtype=complex)
    near = np.abs(w) <= 1.0
    if near.any():
        dv = npoly.polyval(w[near], den)
        if np.any(np.abs(dv) < POLE_FLOOR):
            raise PoleHit("evaluation point lands on a pole")
        out[near] = npoly.polyval(w[near], num) / dv
    far = ~near
    if far.any():
        u = 1.0 / w[far]
        dv = npoly.polyval(u, den[::-1])
        if np.any(np.abs(dv) < POLE_FLOOR):
            raise PoleHit("evaluation point lands on a pole")
        out[far] = npoly.polyval(u, num[::-1]) / dv * w[far] ** (len(num) - len(den))
    return out


def _limit_at_infinity(f: TransferFunction) -> complex:
    """Value of the rational part as s -> infinity (z -> 1)."""
    if f.num_degree > f.den_degree:
        raise PoleHit("pole at infinity: numerator degree exceeds denominator degree")
    if f.is_zero or f.num_degree < f.den_degree:
        return 0.0 + 0.0j
    return complex(f.num[-1] / f.den[-1])


def eval_array(f: TransferFunction, z) -> np.ndarray:
    """Vectorized evaluation at disk points z (closed unit disk)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) > 1.0 + 1e-9):
        raise DomainError("evaluation point outside the closed unit disk")
    if f.domain is Domain.DISK:
        return _ratio(f.num, f.den, z)
    at_one = z == 1.0
    out = np.empty(z.shape, dtype=complex)
    if at_one.any():
        if f.delay > 0.0:
            raise DomainError("z = 1 is an essential singularity for dead-time functions")
        out[at_one] = _limit_at_infinity(f)
    rest = ~at_one
    if rest.any():
        s = disk_to_half_plane(z[rest])
        vals = _ratio(f.num, f.den, s)
        if f.delay > 0.0:
            vals = vals * np.exp(-s * f.delay)
        out[rest] = vals
    return out


def evaluate(f: TransferFunction, z: complex) -> complex:
    """Value of f at a single disk point."""
    return complex(eval_array(f, np.array([z], dtype=complex))[0])


def circle_grid(sampling: CircleSampling, delay: float = 0.0):
    """(theta, z) arrays for the sampling, exclusion arc applied."""
    theta = 2.0 * math.pi * np.arange(sampling.count) / sampling.count
    excl = sampling.resolve_exclusion(delay)
    if excl > 0.0:
        keep = np.minimum(theta, 2.0 * math.pi - theta) >= excl
        theta = theta[keep]
    z = sampling.radius * np.exp(1j * theta)
    if sampling.radius == 1.0:
        # keep the boundary point exactly representable (z = 1 at theta = 0)
        z[theta == 0.0] = 1.0 + 0.0j
    return theta, z


def sample_circle(f: TransferFunction, sampling: CircleSampling) -> list[CirclePoint]:
    """Evaluate f on a sampled circle, skipping the exclusion arc."""
    _, z = circle_grid(sampling, f.delay)
    values = eval_array(f, z)
    s = np.where(z == 1.0, complex(np.inf, 0.0), disk_to_half_plane(np.where(z == 1.0, 0.0, z)))
    return [CirclePoint(complex(zi), complex(si), complex(vi)) for zi, si, vi in zip(z, s, values)]


def _mobius_substitute(coeffs, top, bottom, total_degree: int) -> np.ndarray:
    """sum_k c_k * top(z)**k * bottom(z)**(total_degree - k), ascending coeffs."""
    coeffs = np.asarray(coeffs, dtype=float)
    acc = np.zeros(total_degree + 1)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        term = np.array([1.0])
        for _ in range(k):
            term = npoly.polymul(term, top)
        for _ in range(total_degree - k):
            term = npoly.polymul(term, bottom)
        acc[: len(term)] += c * term
    return acc


def _chop(coeffs: np.ndarray) -> tuple[float, ...]:
    """Drop coefficients that are pure cancellation noise."""
    scale = np.max(np.abs(coeffs)) if coeffs.size else 0.0
    if scale == 0.0:
        return (0.0,)
    cleaned = np.where(np.abs(coeffs) < 1e-12 * scale, 0.0, coeffs)
    return _trim(cleaned)


def transplant(f: TransferFunction) -> TransferFunction:
    """Rewrite a half-plane rational function in the disk variable.

    Substitutes s = (1+z)/(1-z) and clears the common power of (1-z).
    Dead time has an essential singularity at z = 1 and stays outside Disk
    representations.
    """
    if f.domain is Domain.DISK:
        return f
    if f.delay != 0.0:
        raise UnsupportedDelay("dead-time functions have no disk-rational form")
    m = max(f.num_degree, f.den_degree)
    top = np.array([1.0, 1.0])     # 1 + z
    bottom = np.array([1.0, -1.0])  # 1 - z
    num = _chop(_mobius_substitute(f.num, top, bottom, m))
    den = _chop(_mobius_substitute(f.den, top, bottom, m))
    return TransferFunction(num, den, 0.0, Domain.DISK)


def to_half_plane(f: TransferFunction) -> TransferFunction:
    """Inverse substitution z = (s-1)/(s+1) for disk-rational functions."""
    if f.domain is Domain.HALF_PLANE:
        return f
    m = max(f.num_degree, f.den_degree)
    top = np.array([-1.0, 1.0])   # s - 1
    bottom = np.array([1.0, 1.0])  # s + 1
    num = _chop(_mobius_substitute(f.num, top, bottom, m))
    den = _chop(_mobius_substitute(f.den, top, bottom, m))
    return TransferFunction(num, den, 0.0, Domain.HALF_PLANE)
