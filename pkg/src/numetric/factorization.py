"""Normalized coprime factorization of scalar plants.

For P = n/d the factors are N = (n/q) * exp(-s*T) and D = d/q where q is
the stable spectral factor of n(s)n(-s) + d(s)d(-s).  On the imaginary
axis |N|^2 + |D|^2 = 1, and q has all roots in the open left half-plane,
so both factors are stable.  The dead-time factor multiplies N only and
leaves the normalization untouched (|exp(-i w T)| = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .plants import (
    Domain,
    TransferFunction,
    ValidationError,
    disk_to_half_plane,
    eval_array,
    reduce_fraction,
    to_half_plane,
)

__all__ = [
    "AxisRoot",
    "NotCoprime",
    "SpectralFactor",
    "CoprimeFactors",
    "GraphSymbol",
    "spectral_factor",
    "normalize",
    "graph_symbols",
]

AXIS_TOL = 1e-8        # roots of the spectral polynomial this close to the axis are fatal
CORONA_FLOOR = 1e-6    # factors with inf(|N|+|D|) below this are not usably coprime
RESIDUAL_TOL = 1e-8    # allowed drift of |N|^2+|D|^2 from 1 on the verification grid


class AxisRoot(ArithmeticError):
    """The spectral polynomial has a root on (or hugging) the imaginary axis."""


class NotCoprime(ArithmeticError):
    """|N| + |D| dips below the corona floor somewhere on the closed disk."""


@dataclass(frozen=True)
class SpectralFactor:
    """Stable polynomial q with q(s)q(-s) = n(s)n(-s) + d(s)d(-s).

    scale is the (positive) leading coefficient of q; q/scale is monic.
    """

    q: tuple[float, ...]
    scale: float


def _alternate_signs(coeffs: np.ndarray) -> np.ndarray:
    out = coeffs.copy()
    out[1::2] *= -1.0
    return out


def spectral_factor(num, den) -> SpectralFactor:
    """Stable spectral factor of n(s)n(-s) + d(s)d(-s) by root pairing.

    The spectral polynomial is even and strictly positive on the axis for
    coprime (n, d), so its roots split into (-r, r) pairs; the left
    half-plane member of each pair goes into q.
    """
    n = np.trim_zeros(np.asarray(num, dtype=float), "b")
    d = np.trim_zeros(np.asarray(den, dtype=float), "b")
    if n.size == 0:
        n = np.zeros(1)
    if d.size == 0 or (d.size == 1 and d[0] == 0.0):
        raise ValidationError("denominator is the zero polynomial")
    p = npoly.polyadd(npoly.polymul(n, _alternate_signs(n)), npoly.polymul(d, _alternate_signs(d)))
    p = np.trim_zeros(np.asarray(p, dtype=float), "b")
    # odd coefficients vanish structurally; zero out the rounding residue
    p[1::2] = 0.0
    if p.size % 2 == 0:
        raise AxisRoot("spectral polynomial degenerated to odd degree")
    m = (p.size - 1) // 2
    lead = p[-1] * (-1.0) ** m
    if lead <= 0.0:
        raise AxisRoot("spectral polynomial is not positive at infinity on the axis")
    gamma = math.sqrt(lead)
    if m == 0:
        return SpectralFactor((gamma,), gamma)
    roots = npoly.polyroots(p)
    if np.any(np.abs(roots.real) <= AXIS_TOL * np.maximum(1.0, np.abs(roots))):
        raise AxisRoot("spectral polynomial has a root within %g of the imaginary axis" % AXIS_TOL)
    left = roots[roots.real < 0.0]
    if left.size != m:
        raise AxisRoot("root pairing failed: %d left-half-plane roots, expected %d" % (left.size, m))
    q = gamma * npoly.polyfromroots(left).real
    _check_spectral_identity(n, d, q)
    return SpectralFactor(tuple(float(c) for c in q), gamma)


def _check_spectral_identity(n, d, q, tol: float = RESIDUAL_TOL) -> None:
    # |q(iw)|^2 == |n(iw)|^2 + |d(iw)|^2 on a coarse frequency grid
    w = np.tan(math.pi * (np.arange(64) + 0.5) / 128.0)  # half-offset, covers (0, inf)
    s = 1j * w
    lhs = np.abs(npoly.polyval(s, q)) ** 2
    rhs = np.abs(npoly.polyval(s, n)) ** 2 + np.abs(npoly.polyval(s, d)) ** 2
    err = np.max(np.abs(lhs - rhs) / np.maximum(1.0, rhs))
    if err > tol:
        raise ArithmeticError("spectral identity violated (relative error %.3e)" % err)


@dataclass(frozen=True)
class CoprimeFactors:
    """Normalized stable factors of a plant: P = N/D."""

    N: TransferFunction
    D: TransferFunction
    normalization_residual: float
    corona_gap: float

    @property
    def delay(self) -> float:
        return self.N.delay


def _boundary_axis_grid(count: int = 1024) -> np.ndarray:
    # half-offset boundary grid: z = e^{i theta} avoiding theta = 0 exactly
    theta = 2.0 * math.pi * (np.arange(count) + 0.5) / count
    return np.exp(1j * theta)


def normalize(plant: TransferFunction) -> CoprimeFactors:
    """Normalized coprime factorization of a plant.

    Disk-domain plants are rewritten in the half-plane variable first.
    The residual is max ||N|^2 + |D|^2 - 1| over 1024 boundary samples;
    the corona gap is the minimum of |N| + |D| over a polar grid of the
    closed disk (coprimeness proxy).
    """
    if plant.domain is Domain.DISK:
        plant = to_half_plane(plant)
    sf = spectral_factor(plant.num, plant.den)
    n_num, n_den, _ = reduce_fraction(plant.num, sf.q)
    d_num, d_den, _ = reduce_fraction(plant.den, sf.q)
    if n_num == (0.0,):
        n_den = (1.0,)
    N = TransferFunction(n_num, n_den, plant.delay, Domain.HALF_PLANE)
    D = TransferFunction(d_num, d_den, 0.0, Domain.HALF_PLANE)

    zb = _boundary_axis_grid()
    nb = eval_array(N, zb)
    db = eval_array(D, zb)
    residual = float(np.max(np.abs(np.abs(nb) ** 2 + np.abs(db) ** 2 - 1.0)))
    if residual > RESIDUAL_TOL:
        raise ArithmeticError("normalization identity violated (residual %.3e)" % residual)

    gap = _corona_gap(N, D)
    if gap < CORONA_FLOOR:
        raise NotCoprime("corona gap %.3e below floor %g" % (gap, CORONA_FLOOR))
    return CoprimeFactors(N, D, residual, gap)


def _corona_gap(N: TransferFunction, D: TransferFunction) -> float:
    # 64 x 64 polar grid over the open disk plus a denser boundary ring
    radii = (np.arange(64) + 0.5) / 64.0
    angles = 2.0 * math.pi * (np.arange(64) + 0.5) / 64.0
    grid = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    ring = 0.999 * _boundary_axis_grid(256)
    z = np.concatenate([grid, ring, _boundary_axis_grid(256)])
    return float(np.min(np.abs(eval_array(N, z)) + np.abs(eval_array(D, z))))


@dataclass(frozen=True)
class GraphSymbol:
    """Stacked factor matrices for a plant (and optionally a controller).

    G = [N; D] and Gtilde = [-D, N]; for a controller K = [D_C; N_C] and
    Ktilde = [-N_C, D_C].  Scalar factors are kept alongside the matrix
    blocks so SISO paths can skip the generic matrix machinery.
    """

    G: tuple[tuple[TransferFunction, ...], ...]
    Gtilde: tuple[tuple[TransferFunction, ...], ...]
    K: tuple[tuple[TransferFunction, ...], ...] | None = None
    Ktilde: tuple[tuple[TransferFunction, ...], ...] | None = None
    factors: CoprimeFactors | None = None
    controller_factors: CoprimeFactors | None = None


def graph_symbols(
    plant_factors: CoprimeFactors,
    controller_factors: CoprimeFactors | None = None,
) -> GraphSymbol:
    """Assemble the graph and inverse-graph symbols from normalized factors."""
    N, D = plant_factors.N, plant_factors.D
    G = ((N,), (D,))
    Gtilde = ((-D, N),)
    K = Ktilde = None
    if controller_factors is not None:
        NC, DC = controller_factors.N, controller_factors.D
        K = ((DC,), (NC,))
        Ktilde = ((-NC, DC),)
    return GraphSymbol(G, Gtilde, K, Ktilde, plant_factors, controller_factors)
