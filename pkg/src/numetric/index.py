"""Winding numbers of sampled curves and index scans over annuli.

The winding of a closed sampled curve is the sum of principal-value
argument increments between consecutive samples, divided by 2*pi.  For a
closed loop that sum telescopes to an integer multiple of 2*pi exactly, so
rounding only absorbs floating-point dust; correctness is guarded by the
step bound instead: any increment of pi/2 or more forces re-sampling at
double density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .plants import TransferFunction, eval_array

__all__ = [
    "CurveThroughZero",
    "NeedsRefinement",
    "LengthNotPowerOfTwo",
    "WindingResult",
    "AnnulusIndexResult",
    "ToeplitzIndexResult",
    "winding_number",
    "circle_winding",
    "annulus_index",
    "index_product_check",
    "conjugate_index_check",
    "toeplitz_index",
]

MAX_REFINE_DEPTH = 12
STEP_BOUND = math.pi / 2.0
SNAP_TOL = 0.01


class CurveThroughZero(ArithmeticError):
    """A sample fell below the modulus floor; the winding is undefined."""

    def __init__(self, message: str, min_modulus: float = 0.0, radius: float | None = None):
        super().__init__(message)
        self.min_modulus = min_modulus
        self.radius = radius


class NeedsRefinement(ArithmeticError):
    """An argument step reached pi/2; the sampling is too coarse to trust."""


class LengthNotPowerOfTwo(ValueError):
    """FFT-based paths require power-of-two sample counts."""


@dataclass(frozen=True)
class WindingResult:
    winding: int
    raw_turns: float
    min_modulus: float
    refinement_depth: int


def winding_number(samples, floor: float = 0.0) -> WindingResult:
    """Winding of a closed sampled curve about the origin."""
    v = np.asarray(samples, dtype=complex)
    if v.size < 8:
        raise ValueError("need at least 8 samples of a closed curve")
    mods = np.abs(v)
    min_mod = float(np.min(mods))
    if min_mod <= floor or min_mod == 0.0:
        raise CurveThroughZero(
            "curve modulus %.3e at or below floor %.3e" % (min_mod, floor), min_modulus=min_mod
        )
    steps = np.angle(np.roll(v, -1) * np.conj(v))
    if np.max(np.abs(steps)) >= STEP_BOUND:
        raise NeedsRefinement("argument step of %.3f rad at the current density" % np.max(np.abs(steps)))
    raw = float(np.sum(steps) / (2.0 * math.pi))
    w = int(round(raw))
    if abs(raw - w) >= SNAP_TOL:
        raise ArithmeticError("winding failed to snap to an integer: raw %.6f" % raw)
    return WindingResult(w, raw, min_mod, 0)


def _as_handle(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, TransferFunction):
        return lambda z: eval_array(f, z)
    return f


def circle_winding(
    f,
    radius: float,
    count: int = 1024,
    floor: float = 0.0,
    max_depth: int = MAX_REFINE_DEPTH,
) -> WindingResult:
    """Winding of f on |z| = radius, doubling the density as needed."""
    handle = _as_handle(f)
    for depth in range(max_depth + 1):
        n = count << depth
        theta = 2.0 * math.pi * np.arange(n) / n
        z = radius * np.exp(1j * theta)
        if radius == 1.0:
            z[0] = 1.0 + 0.0j
        try:
            res = winding_number(handle(z), floor)
        except NeedsRefinement:
            continue
        return WindingResult(res.winding, res.raw_turns, res.min_modulus, depth)
    raise NeedsRefinement("still under-resolved at refinement depth %d (%d samples)" % (max_depth, count << max_depth))


@dataclass(frozen=True)
class AnnulusIndexResult:
    """Windings of one function across a family of scan circles.

    W is the common winding when every radius resolved and agreed, else
    None.  A curve through zero is a verdict (the function is not
    invertible on the scanned annulus), recorded via failed_radius.
    """

    W: int | None
    per_radius: tuple[tuple[float, WindingResult], ...]
    consistent: bool
    failed_radius: float | None = None
    failure: str | None = None


def annulus_index(f, radii: Sequence[float], count: int = 1024, floor: float = 0.0) -> AnnulusIndexResult:
    """Winding of f on each circle in radii, with a consistency verdict."""
    handle = _as_handle(f)
    collected: list[tuple[float, WindingResult]] = []
    for r in radii:
        try:
            collected.append((float(r), circle_winding(handle, float(r), count, floor)))
        except CurveThroughZero as exc:
            return AnnulusIndexResult(
                None, tuple(collected), False, failed_radius=float(r), failure="through-zero: %s" % exc
            )
        except NeedsRefinement as exc:
            return AnnulusIndexResult(
                None, tuple(collected), False, failed_radius=float(r), failure="unresolved: %s" % exc
            )
    windings = {res.winding for _, res in collected}
    consistent = len(windings) == 1
    return AnnulusIndexResult(windings.pop() if consistent else None, tuple(collected), consistent)


def index_product_check(f, g, radius: float, count: int = 1024) -> bool:
    """Winding is additive under pointwise products on a common circle."""
    fh, gh = _as_handle(f), _as_handle(g)
    wf = circle_winding(fh, radius, count).winding
    wg = circle_winding(gh, radius, count).winding
    wfg = circle_winding(lambda z: fh(z) * gh(z), radius, count).winding
    return wf + wg == wfg


def conjugate_index_check(f, radius: float, count: int = 1024) -> bool:
    """Pointwise conjugation negates the winding."""
    fh = _as_handle(f)
    wf = circle_winding(fh, radius, count).winding
    wc = circle_winding(lambda z: np.conj(fh(z)), radius, count).winding
    return wc == -wf


@dataclass(frozen=True)
class ToeplitzIndexResult:
    """Fredholm verdict for a Toeplitz symbol given by boundary samples.

    index is the Fredholm index (minus the winding of the smoothed symbol)
    when the tail of the smoothing schedule is uniformly invertible with a
    constant winding; fredholm is False otherwise and index is None.
    """

    fredholm: bool
    index: int | None
    per_radius: tuple[tuple[float, float, int | None], ...]


def _upsample_closed_curve(values: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric upsampling of a closed sampled curve (FFT zero-pad)."""
    n = values.size
    spec = np.fft.fft(values)
    m = n * factor
    padded = np.zeros(m, dtype=complex)
    half = n // 2
    padded[:half] = spec[:half]
    # the Nyquist bin rides along as the most negative frequency
    padded[m - half:] = spec[half:]
    return np.fft.ifft(padded) * factor


def _smoothed_winding(values: np.ndarray, eps: float) -> tuple[float, int | None]:
    """(min modulus, winding) of a smoothed closed curve, upsampling as needed."""
    v = values
    for _ in range(MAX_REFINE_DEPTH + 1):
        min_mod = float(np.min(np.abs(v)))
        if min_mod < eps:
            return min_mod, None
        steps = np.angle(np.roll(v, -1) * np.conj(v))
        if np.max(np.abs(steps)) < STEP_BOUND:
            raw = float(np.sum(steps) / (2.0 * math.pi))
            return min_mod, int(round(raw))
        v = _upsample_closed_curve(v, 2)
    return float(np.min(np.abs(v))), None


def toeplitz_index(
    boundary_samples,
    r_schedule: Sequence[float] = (0.9, 0.95, 0.98, 0.99, 0.995),
    eps: float = 1e-6,
    tail: int = 3,
) -> ToeplitzIndexResult:
    """Fredholm index of the Toeplitz operator with the sampled symbol.

    The boundary samples are radially smoothed by damping the k-th Fourier
    coefficient with r**|k| (harmonic extension restricted to |z| = r); the
    operator is declared Fredholm when the smoothed symbol stays uniformly
    away from zero along the tail of the schedule, and the index is minus
    the (constant) winding there.
    """
    v = np.asarray(boundary_samples, dtype=complex)
    n = v.size
    if n < 8 or n & (n - 1):
        raise LengthNotPowerOfTwo("boundary sample count must be a power of two (got %d)" % n)
    if tail < 1 or tail > len(r_schedule):
        raise ValueError("tail must lie in [1, len(r_schedule)]")
    coeffs = np.fft.fft(v) / n
    k = np.rint(np.fft.fftfreq(n) * n).astype(int)
    per_radius: list[tuple[float, float, int | None]] = []
    for r in r_schedule:
        smoothed = np.fft.ifft(coeffs * (float(r) ** np.abs(k))) * n
        min_mod, w = _smoothed_winding(smoothed, eps)
        per_radius.append((float(r), min_mod, w))
    tail_part = per_radius[-tail:]
    windings = {w for _, _, w in tail_part}
    if None in windings or len(windings) != 1:
        return ToeplitzIndexResult(False, None, tuple(per_radius))
    return ToeplitzIndexResult(True, -windings.pop(), tuple(per_radius))
