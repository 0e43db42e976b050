"""The nu-metric for stabilizable plants, over annuli hugging the boundary.

The distance between plants P1 and P2 is the H-infinity norm of the graph
mismatch Gtilde_2 * G_1 provided the determinant symbol det(G_1^* G_2)
stays invertible with zero winding on a tail of circles approaching the
unit circle; otherwise the distance is 1.  Dyadic radii 1 - 2**-k make the
tail scan cheap and reproducible, and a sliding window of `tail`
consecutive verdicts realizes the limit radius -> 1.

Dead-time plants are first-class: the only concession is an exclusion arc
around z = 1 on (near-)boundary circles, where exp(-s*T) has no limit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .factorization import CoprimeFactors, GraphSymbol, graph_symbols, normalize
from .index import CurveThroughZero, NeedsRefinement, circle_winding
from .plants import (
    DEFAULT_EXCLUSION,
    EXCLUSION_RADIUS,
    TransferFunction,
    UnsupportedDelay,
    eval_array,
)

__all__ = [
    "AnnulusScan",
    "RadiusDiagnostic",
    "ConditionVerdict",
    "SupNormDetail",
    "NuMetricResult",
    "DelayNotAllowed",
    "OperatorMap",
    "det_symbol",
    "winding_condition",
    "sup_norm",
    "sup_norm_detail",
    "nu_metric",
    "nu_metric_at",
    "classical_nu_metric",
    "mismatch_map",
    "matrix_map",
]

VALUE_AGREE_RTOL = 1e-6   # window values this close (relative) count as stabilized
REFINE_RTOL = 1e-6        # golden-section stop: relative movement of the norm estimate
MARGINAL_FACTOR = 10.0    # min |det| within this factor of eps_inv flags a marginal verdict
PROBE_COUNT = 50


class DelayNotAllowed(UnsupportedDelay):
    """The classical boundary metric is defined for rational plants only."""


@dataclass(frozen=True)
class AnnulusScan:
    """Scan configuration: dyadic radii 1 - 2**-k for k in [k_min, k_max]."""

    k_min: int = 3
    k_max: int = 14
    samples0: int = 1024
    eps_inv: float = 1e-9
    tail: int = 3

    def __post_init__(self):
        if not (1 <= self.k_min <= self.k_max):
            raise ValueError("need 1 <= k_min <= k_max")
        if self.samples0 < 8 or self.samples0 & (self.samples0 - 1):
            raise ValueError("samples0 must be a power of two (and at least 8)")
        if self.eps_inv <= 0.0:
            raise ValueError("eps_inv must be positive")
        if not (1 <= self.tail <= self.k_max - self.k_min + 1):
            raise ValueError("tail must fit inside the radius range")

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(1.0 - 2.0 ** -k for k in range(self.k_min, self.k_max + 1))


@dataclass(frozen=True)
class RadiusDiagnostic:
    radius: float
    min_modulus: float
    winding: int | None
    passed: bool
    marginal: bool
    note: str | None = None


@dataclass(frozen=True)
class ConditionVerdict:
    """Invertibility-with-zero-winding verdict for the determinant symbol."""

    holds: bool
    rho_star: float | None
    per_radius: tuple[RadiusDiagnostic, ...]
    eps_inv: float

    @property
    def any_marginal(self) -> bool:
        return any(d.marginal for d in self.per_radius)


@dataclass(frozen=True)
class SupNormDetail:
    value: float
    radius: float
    theta: float
    grid_value: float
    arc_edge_value: float | None = None
    probe_hit: bool = False


@dataclass(frozen=True)
class NuMetricResult:
    value: float
    condition: ConditionVerdict
    sup_norm: float | None
    converged: bool
    radii_used: tuple[float, ...]
    warning: str | None = None
    sup_detail: SupNormDetail | None = None


def _thread_count() -> int:
    raw = os.environ.get("NU_METRIC_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _ordered_map(fn, items):
    n = _thread_count()
    items = list(items)
    if n > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def as_factors(plant) -> CoprimeFactors:
    if isinstance(plant, CoprimeFactors):
        return plant
    if isinstance(plant, GraphSymbol):
        if plant.factors is None:
            raise ValueError("graph symbol carries no scalar factors")
        return plant.factors
    if isinstance(plant, TransferFunction):
        return normalize(plant)
    raise TypeError("expected a TransferFunction, CoprimeFactors, or GraphSymbol")


def as_symbol(plant) -> GraphSymbol:
    if isinstance(plant, GraphSymbol):
        return plant
    return graph_symbols(as_factors(plant))


def _entry_handle(entry) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(entry, TransferFunction):
        return lambda z: eval_array(entry, z)
    return entry


def _block_eval(entries, z: np.ndarray) -> np.ndarray:
    rows = len(entries)
    cols = len(entries[0])
    out = np.empty((z.size, rows, cols), dtype=complex)
    for i in range(rows):
        for j in range(cols):
            out[:, i, j] = _entry_handle(entries[i][j])(z)
    return out


def _matrix_delay(entries) -> float:
    worst = 0.0
    for row in entries:
        for e in row:
            if isinstance(e, TransferFunction):
                worst = max(worst, e.delay)
    return worst


def det_handle(sym1: GraphSymbol, sym2: GraphSymbol) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized z -> det(G_1(z)^* G_2(z))."""
    if sym1.factors is not None and sym2.factors is not None:
        N1, D1 = sym1.factors.N, sym1.factors.D
        N2, D2 = sym2.factors.N, sym2.factors.D

        def scalar(z: np.ndarray) -> np.ndarray:
            return np.conj(eval_array(N1, z)) * eval_array(N2, z) + np.conj(eval_array(D1, z)) * eval_array(D2, z)

        return scalar

    def generic(z: np.ndarray) -> np.ndarray:
        a = _block_eval(sym1.G, z)
        b = _block_eval(sym2.G, z)
        return np.linalg.det(np.einsum("zij,zik->zjk", np.conj(a), b))

    return generic


def det_symbol(sym1, sym2, z: complex) -> complex:
    """det(G_1^* G_2) at one disk point."""
    return complex(det_handle(as_symbol(sym1), as_symbol(sym2))(np.array([z], dtype=complex))[0])


def _radius_diagnostic(handle, radius: float, scan: AnnulusScan) -> RadiusDiagnostic:
    try:
        res = circle_winding(handle, radius, scan.samples0, floor=scan.eps_inv)
        return RadiusDiagnostic(
            radius,
            res.min_modulus,
            res.winding,
            res.winding == 0,
            res.min_modulus < MARGINAL_FACTOR * scan.eps_inv,
        )
    except CurveThroughZero as exc:
        return RadiusDiagnostic(radius, exc.min_modulus, None, False, True, "through-zero")
    except NeedsRefinement:
        theta = 2.0 * math.pi * np.arange(scan.samples0) / scan.samples0
        coarse = float(np.min(np.abs(handle(radius * np.exp(1j * theta)))))
        return RadiusDiagnostic(radius, coarse, None, False, coarse < MARGINAL_FACTOR * scan.eps_inv, "unresolved")


def winding_condition(sym1, sym2, scan: AnnulusScan | None = None) -> ConditionVerdict:
    """Scan the determinant symbol over the annulus radii.

    A radius passes when the sampled curve stays at or above eps_inv in
    modulus and winds zero times.  The verdict holds when the last `tail`
    radii all pass; rho_star is the start of the unbroken passing run.
    """
    scan = scan or AnnulusScan()
    handle = det_handle(as_symbol(sym1), as_symbol(sym2))
    diags = _ordered_map(lambda r: _radius_diagnostic(handle, r, scan), scan.radii)
    return _verdict_from(diags, scan)


def _verdict_from(diags: list[RadiusDiagnostic], scan: AnnulusScan) -> ConditionVerdict:
    tail = min(scan.tail, len(diags))
    holds = all(d.passed for d in diags[-tail:])
    rho_star = None
    if holds:
        start = len(diags) - 1
        while start > 0 and diags[start - 1].passed:
            start -= 1
        rho_star = diags[start].radius
    return ConditionVerdict(holds, rho_star, tuple(diags), scan.eps_inv)


@dataclass(frozen=True)
class OperatorMap:
    """A matrix-valued function on the disk with a sigma_max evaluator.

    scalar_fn short-circuits 1x1 maps; block_fn returns stacked matrices
    (npoints, rows, cols) for the generic SVD path; sigma_override lets
    structured maps (rank-one closed loops) supply sigma_max directly.
    delay_gaps lists dead-time differences worth probing at resonant
    boundary frequencies.
    """

    scalar_fn: Callable[[np.ndarray], np.ndarray] | None = None
    block_fn: Callable[[np.ndarray], np.ndarray] | None = None
    sigma_override: Callable[[np.ndarray], np.ndarray] | None = None
    max_delay: float = 0.0
    boundary: bool = True
    delay_gaps: tuple[float, ...] = ()

    def sigma(self, z: np.ndarray) -> np.ndarray:
        if self.sigma_override is not None:
            return np.asarray(self.sigma_override(z), dtype=float)
        if self.scalar_fn is not None:
            return np.abs(self.scalar_fn(z))
        if self.block_fn is None:
            raise ValueError("operator map has no evaluator")
        vals = self.block_fn(z)
        return np.linalg.svd(vals, compute_uv=False)[..., 0]


def mismatch_map(factors1: CoprimeFactors, factors2: CoprimeFactors) -> OperatorMap:
    """Gtilde_2 * G_1 = N_2 D_1 - D_2 N_1 for scalar plants."""
    N1, D1 = factors1.N, factors1.D
    N2, D2 = factors2.N, factors2.D

    if N1 == N2 and D1 == D2:
        # identical factor pairs annihilate identically; evaluating the two
        # products numerically leaves a fused-multiply residue of ~1 ulp
        def scalar(z: np.ndarray) -> np.ndarray:
            return np.zeros(np.shape(z), dtype=complex)

    else:

        def scalar(z: np.ndarray) -> np.ndarray:
            return eval_array(N2, z) * eval_array(D1, z) - eval_array(D2, z) * eval_array(N1, z)

    gap = abs(factors2.delay - factors1.delay)
    return OperatorMap(
        scalar_fn=scalar,
        max_delay=max(factors1.delay, factors2.delay),
        delay_gaps=(gap,) if gap > 0.0 else (),
    )


def matrix_map(entries) -> OperatorMap:
    """Generic operator map from a matrix of TransferFunctions or handles."""
    held = tuple(tuple(row) for row in entries)
    if len(held) == 1 and len(held[0]) == 1:
        h = _entry_handle(held[0][0])
        return OperatorMap(scalar_fn=h, max_delay=_matrix_delay(held))
    return OperatorMap(block_fn=lambda z: _block_eval(held, z), max_delay=_matrix_delay(held))


def _as_map(M) -> OperatorMap:
    if isinstance(M, OperatorMap):
        return M
    if isinstance(M, TransferFunction):
        return OperatorMap(scalar_fn=lambda z: eval_array(M, z), max_delay=M.delay)
    if callable(M):
        return OperatorMap(scalar_fn=M)
    return matrix_map(M)


def _exclusion_for(op: OperatorMap, radius: float) -> float:
    if op.max_delay > 0.0 and radius >= EXCLUSION_RADIUS:
        return DEFAULT_EXCLUSION
    return 0.0


def _probe_points(delay_gaps: Sequence[float], count: int = PROBE_COUNT) -> np.ndarray:
    zs = []
    for gap in delay_gaps:
        if gap <= 0.0:
            continue
        omega = (2.0 * np.arange(count) + 1.0) * math.pi / gap
        zs.append((1j * omega - 1.0) / (1j * omega + 1.0))
    if not zs:
        return np.empty(0, dtype=complex)
    return np.concatenate(zs)


@dataclass(frozen=True)
class _Candidate:
    value: float
    radius: float
    theta: float
    bracket: float
    from_probe: bool = False


def _circle_best(op: OperatorMap, radius: float, count: int) -> tuple[_Candidate, float | None]:
    """Best sigma on one sampled circle; also the value at the arc edge."""
    theta = 2.0 * math.pi * np.arange(count) / count
    excl = _exclusion_for(op, radius)
    arc_edge = None
    if excl > 0.0:
        keep = np.minimum(theta, 2.0 * math.pi - theta) >= excl
        theta = theta[keep]
    z = radius * np.exp(1j * theta)
    if radius == 1.0 and theta.size and theta[0] == 0.0:
        z[0] = 1.0 + 0.0j
    sig = op.sigma(z)
    i = int(np.argmax(sig))
    if excl > 0.0:
        # report how large the map still is where the scan stops looking
        edge = np.argmin(np.minimum(theta, 2.0 * math.pi - theta))
        arc_edge = float(sig[edge])
    return _Candidate(float(sig[i]), radius, float(theta[i]), 2.0 * math.pi / count), arc_edge


def _golden_refine(op: OperatorMap, cand: _Candidate) -> float:
    """Golden-section polish of sigma(radius * e^{i theta}) around a candidate."""
    lo = cand.theta - cand.bracket
    hi = cand.theta + cand.bracket
    if op.max_delay > 0.0 and cand.radius == 1.0:
        lo = max(lo, 1e-9)  # never step onto z = 1
    best = cand.value
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def g(t: float) -> float:
        return float(op.sigma(np.array([cand.radius * np.exp(1j * t)], dtype=complex))[0])

    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g(c), g(d)
    prev = best
    for _ in range(120):
        best = max(best, fc, fd)
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        if abs(best - prev) <= REFINE_RTOL * max(1e-30, best) and (b - a) < cand.bracket / 8.0:
            break
        prev = best
    return best


def _sup_scan(op: OperatorMap, radii: Sequence[float], count: int):
    """Per-circle maxima, boundary/probe candidates, and the refined best."""
    per_circle: list[_Candidate] = []
    for r in radii:
        cand, _ = _circle_best(op, float(r), count)
        per_circle.append(cand)
    boundary_cand = None
    arc_edge = None
    if op.boundary:
        boundary_cand, arc_edge = _circle_best(op, 1.0, count)
        probes = _probe_points(op.delay_gaps)
        if probes.size:
            sig = op.sigma(probes)
            j = int(np.argmax(sig))
            if float(sig[j]) > boundary_cand.value:
                theta = float(np.angle(probes[j])) % (2.0 * math.pi)
                boundary_cand = _Candidate(float(sig[j]), 1.0, theta, 2.0 * math.pi / count, True)
    return per_circle, boundary_cand, arc_edge


def _finish_sup(op: OperatorMap, per_circle, boundary_cand, arc_edge) -> SupNormDetail:
    cands = list(per_circle) + ([boundary_cand] if boundary_cand else [])
    best = max(cands, key=lambda c: c.value)
    refined = _golden_refine(op, best)
    return SupNormDetail(
        value=max(refined, best.value),
        radius=best.radius,
        theta=best.theta,
        grid_value=best.value,
        arc_edge_value=arc_edge,
        probe_hit=best.from_probe,
    )


def sup_norm_detail(M, scan: AnnulusScan | None = None) -> SupNormDetail:
    """Sup of sigma_max over the scanned annulus, with diagnostics."""
    scan = scan or AnnulusScan()
    op = _as_map(M)
    per_circle, boundary_cand, arc_edge = _sup_scan(op, scan.radii, scan.samples0)
    return _finish_sup(op, per_circle, boundary_cand, arc_edge)


def sup_norm(M, scan: AnnulusScan | None = None) -> float:
    """Sup of the largest singular value over the scanned annulus circles.

    The boundary circle (minus the exclusion arc for dead-time maps) is
    always included when evaluable; a golden-section pass polishes the
    grid argmax until the estimate moves by less than 1e-6 relative.
    """
    return sup_norm_detail(M, scan).value


def _windowed_result(
    diags: list[RadiusDiagnostic],
    scan: AnnulusScan,
    op: OperatorMap,
    radii: Sequence[float],
) -> tuple[float, float | None, bool, SupNormDetail | None]:
    """Sliding-window realization of the limit radius -> 1.

    Window k holds when the `tail` radii ending at k all pass; its value
    is the running sup (circles up to k, boundary, probes) or exactly 1.
    Converged means the last `tail` windows agree in verdict and value.
    """
    tail = min(scan.tail, len(diags))
    per_circle, boundary_cand, arc_edge = _sup_scan(op, radii, scan.samples0)
    running: list[_Candidate] = []
    best_so_far: list[_Candidate] = []
    top = None
    for cand in per_circle:
        top = cand if top is None or cand.value > top.value else top
        best_so_far.append(top)

    verdicts: list[bool] = []
    values: list[float] = []
    for k in range(tail - 1, len(diags)):
        ok = all(d.passed for d in diags[k - tail + 1 : k + 1])
        verdicts.append(ok)
        if not ok:
            values.append(1.0)
            continue
        cand = best_so_far[k]
        if boundary_cand is not None and boundary_cand.value > cand.value:
            cand = boundary_cand
        values.append(cand.value)

    last = values[-1]
    window = min(tail, len(verdicts))
    same_verdict = len(set(verdicts[-window:])) == 1
    close = all(abs(v - last) <= VALUE_AGREE_RTOL * max(1.0, abs(last)) for v in values[-window:])
    converged = same_verdict and close

    detail = None
    sup_value = None
    if verdicts[-1]:
        detail = _finish_sup(op, per_circle, boundary_cand, arc_edge)
        sup_value = detail.value
    return last, sup_value, converged, detail


def _nu_from_scan(f1: CoprimeFactors, f2: CoprimeFactors, radii, scan: AnnulusScan) -> NuMetricResult:
    s1, s2 = graph_symbols(f1), graph_symbols(f2)
    handle = det_handle(s1, s2)
    diags = _ordered_map(lambda r: _radius_diagnostic(handle, r, scan), radii)
    verdict = _verdict_from(diags, scan)
    op = mismatch_map(f1, f2)
    raw, sup_value, converged, detail = _windowed_result(diags, scan, op, radii)
    if verdict.holds:
        value = min(sup_value if sup_value is not None else raw, 1.0)
    else:
        value = 1.0
    warning = None
    if not converged:
        warning = "verdicts or values still moving at the largest scanned radius"
    return NuMetricResult(value, verdict, sup_value, converged, tuple(float(r) for r in radii), warning, detail)


def nu_metric(P1, P2, scan: AnnulusScan | None = None) -> NuMetricResult:
    """Extended nu-metric: the stabilized tail verdict over dyadic radii."""
    scan = scan or AnnulusScan()
    return _nu_from_scan(as_factors(P1), as_factors(P2), scan.radii, scan)


def nu_metric_at(P1, P2, rho: float, scan: AnnulusScan | None = None) -> NuMetricResult:
    """Nu-metric over the fixed annulus rho < |z| < 1 (scan radii above rho)."""
    scan = scan or AnnulusScan()
    radii = tuple(r for r in scan.radii if r > rho)
    if not radii:
        raise ValueError("no scan radii above rho = %g; raise k_max" % rho)
    return _nu_from_scan(as_factors(P1), as_factors(P2), radii, scan)


def classical_nu_metric(P1, P2, samples: int = 1024, eps_inv: float = 1e-9) -> float:
    """Boundary-circle nu-metric for rational (delay-free) plants."""
    f1, f2 = as_factors(P1), as_factors(P2)
    if f1.delay > 0.0 or f2.delay > 0.0:
        raise DelayNotAllowed("the classical metric requires delay-free plants")
    s1, s2 = graph_symbols(f1), graph_symbols(f2)
    handle = det_handle(s1, s2)
    try:
        res = circle_winding(handle, 1.0, samples, floor=eps_inv)
    except (CurveThroughZero, NeedsRefinement):
        return 1.0
    if res.winding != 0:
        return 1.0
    op = mismatch_map(f1, f2)
    cand, _ = _circle_best(op, 1.0, samples)
    return min(_golden_refine(op, cand), 1.0)
