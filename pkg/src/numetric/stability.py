"""Closed-loop map, stabilization verdict, margins, and the robustness bound.

With normalized factors P = N/D and C = N_C/D_C, the closed-loop transfer
matrix [P; 1] (1 - C P)^{-1} [-C, 1] collapses to G [-N_C, D_C] / Delta
where Delta = D_C D - N_C N.  The pair is stabilized exactly when Delta is
invertible over the tail annulus (bounded below with zero winding), and
the stability margin is the reciprocal of the closed-loop norm.

The rank-one structure gives sigma_max(H) = |[N; D]| * |[-N_C, D_C]| / |Delta|
pointwise, which the sup-norm machinery uses directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .factorization import CoprimeFactors
from .index import CurveThroughZero, NeedsRefinement, circle_winding
from .metric import AnnulusScan, OperatorMap, nu_metric, sup_norm_detail, as_factors
from .plants import eval_array

__all__ = [
    "DegeneratePair",
    "ClosedLoop",
    "MarginResult",
    "RobustnessReport",
    "closed_loop",
    "is_stabilized",
    "margin",
    "robustness_report",
]

BOUNDARY_SAMPLES = 1024


class DegeneratePair(ArithmeticError):
    """Delta is identically zero: the pair (P, C) has no closed loop."""


@dataclass
class ClosedLoop:
    """Closed-loop data for a plant/controller pair.

    stabilized and H_norm start as None and are filled by is_stabilized
    and margin.  delta_num is the numerator polynomial of Delta when both
    sides are delay-free (used by the rational pole cross-check and the
    degeneracy test); dead-time loops keep it as None.
    """

    plant: CoprimeFactors
    controller: CoprimeFactors
    delta_num: tuple[float, ...] | None
    stabilized: bool | None = None
    H_norm: float | None = None

    def delta(self, z) -> np.ndarray:
        P, C = self.plant, self.controller
        return eval_array(C.D, z) * eval_array(P.D, z) - eval_array(C.N, z) * eval_array(P.N, z)

    def sigma(self, z) -> np.ndarray:
        P, C = self.plant, self.controller
        gp = np.hypot(np.abs(eval_array(P.N, z)), np.abs(eval_array(P.D, z)))
        gc = np.hypot(np.abs(eval_array(C.N, z)), np.abs(eval_array(C.D, z)))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = gp * gc / np.abs(self.delta(z))
        return out

    @property
    def max_delay(self) -> float:
        return max(self.plant.delay, self.controller.delay)

    def operator_map(self) -> OperatorMap:
        return OperatorMap(sigma_override=self.sigma, max_delay=self.max_delay)


@dataclass(frozen=True)
class MarginResult:
    mu: float
    H_norm: float
    stabilized: bool
    robust_bound: float | None = None


@dataclass(frozen=True)
class RobustnessReport:
    mu_nominal: float
    mu_perturbed: float
    distance: float
    bound: float
    holds: bool
    slack: float


def closed_loop(P, C) -> ClosedLoop:
    """Assemble the closed-loop data for plant P and controller C."""
    pf, cf = as_factors(P), as_factors(C)
    delta_num: tuple[float, ...] | None = None
    # the polynomial form needs the unreduced common denominator q on each side
    plain = pf.N.den == pf.D.den and cf.N.den == cf.D.den
    if pf.delay == 0.0 and cf.delay == 0.0 and plain:
        cross = npoly.polysub(
            npoly.polymul(np.asarray(cf.D.num, dtype=float), np.asarray(pf.D.num, dtype=float)),
            npoly.polymul(np.asarray(cf.N.num, dtype=float), np.asarray(pf.N.num, dtype=float)),
        )
        scale = max(
            float(np.max(np.abs(npoly.polymul(cf.D.num, pf.D.num)))),
            float(np.max(np.abs(npoly.polymul(cf.N.num, pf.N.num)))),
            1e-30,
        )
        if np.max(np.abs(cross)) < 1e-12 * scale:
            raise DegeneratePair("Delta is identically zero for this pair")
        delta_num = tuple(float(c) for c in cross)
    cl = ClosedLoop(pf, cf, delta_num)
    # degeneracy for reduced or dead-time pairs: probe a few interior points
    probe = cl.delta(np.array([0.0 + 0.0j, 0.3 + 0.1j, -0.2 + 0.4j, 0.1 - 0.5j]))
    if np.max(np.abs(probe)) < 1e-14:
        raise DegeneratePair("Delta vanishes at every probe point")
    return cl


def is_stabilized(cl: ClosedLoop, scan: AnnulusScan | None = None) -> bool:
    """Invertibility of Delta over the tail annulus.

    Each tail circle must keep |Delta| >= eps_inv with zero winding.  For
    delay-free loops the boundary circle is sampled as well (z = 1 via the
    proper-rational limit), which catches loops whose Delta decays at
    infinity and is invertible on no annulus.
    """
    scan = scan or AnnulusScan()
    radii = scan.radii[-scan.tail:]
    verdict = True
    for r in radii:
        try:
            res = circle_winding(cl.delta, r, scan.samples0, floor=scan.eps_inv)
        except (CurveThroughZero, NeedsRefinement):
            verdict = False
            break
        if res.winding != 0:
            verdict = False
            break
    if verdict and cl.max_delay == 0.0:
        theta = 2.0 * math.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
        z = np.exp(1j * theta)
        z[0] = 1.0 + 0.0j
        if float(np.min(np.abs(cl.delta(z)))) < scan.eps_inv:
            verdict = False
    cl.stabilized = verdict
    return verdict


def margin(P, C=None, scan: AnnulusScan | None = None) -> MarginResult:
    """Stability margin mu = 1/||H(P, C)|| (0 when the pair is not stabilized)."""
    scan = scan or AnnulusScan()
    cl = P if isinstance(P, ClosedLoop) else closed_loop(P, C)
    stabilized = is_stabilized(cl, scan)
    detail = sup_norm_detail(cl.operator_map(), scan)
    h_norm = detail.value
    cl.H_norm = h_norm
    if not stabilized:
        return MarginResult(0.0, h_norm, False)
    mu = 1.0 / h_norm if h_norm > 0.0 else 0.0
    # normalized columns force ||H|| >= 1 on the boundary
    mu = min(mu, 1.0)
    return MarginResult(mu, h_norm, True)


def robustness_report(P0, P, C, scan: AnnulusScan | None = None) -> RobustnessReport:
    """Check mu(P, C) >= mu(P0, C) - d(P0, P) with a small numerical slack."""
    scan = scan or AnnulusScan()
    m0 = margin(P0, C, scan)
    m1 = margin(P, C, scan)
    dist = nu_metric(P0, P, scan).value
    bound = m0.mu - dist
    slack = m1.mu - bound
    return RobustnessReport(m0.mu, m1.mu, dist, bound, slack >= -1e-6, slack)
