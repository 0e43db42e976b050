"""Closed loops, stability margins, and the robustness inequality."""

import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from numetric import (
    DegeneratePair,
    TransferFunction,
    closed_loop,
    is_stabilized,
    margin,
    nu_metric,
    robustness_report,
)
from conftest import perturb, random_rational, stabilized_pair

P_UNSTABLE = TransferFunction((1.0,), (-1.0, 1.0))  # 1/(s-1)
C_GOOD = TransferFunction((-2.0,), (1.0,))
C_BAD = TransferFunction((2.0,), (1.0,))


def direct_sweep_norm(P, C, w):
    """Largest singular value of the 2x2 loop map on a frequency grid.

    Independent oracle: build H from P and C directly, no factorizations.
    H = [P; 1] (1 - CP)^{-1} [-C, 1].
    """
    s = 1j * w
    Pv = np.polyval(P.num[::-1], s) / np.polyval(P.den[::-1], s)
    Cv = np.polyval(C.num[::-1], s) / np.polyval(C.den[::-1], s)
    gain = np.sqrt((np.abs(Pv) ** 2 + 1.0) * (np.abs(Cv) ** 2 + 1.0))
    return (gain / np.abs(1.0 - Cv * Pv)).max()


def test_margin_matches_direct_sweep():
    res = margin(P_UNSTABLE, C_GOOD)
    assert res.stabilized
    w = np.linspace(0.0, 200.0, 200001)
    want = direct_sweep_norm(P_UNSTABLE, C_GOOD, w)
    assert abs(res.H_norm - want) < 1e-6 * want
    assert abs(res.mu - 1.0 / math.sqrt(10.0)) < 1e-9


def test_margin_zero_when_not_stabilized():
    res = margin(P_UNSTABLE, C_BAD)
    assert not res.stabilized
    assert res.mu == 0.0


def test_is_stabilized_boolean():
    cl = closed_loop(P_UNSTABLE, C_GOOD)
    assert is_stabilized(cl)
    assert cl.stabilized is True
    cl_bad = closed_loop(P_UNSTABLE, C_BAD)
    assert not is_stabilized(cl_bad)


def test_mu_is_bounded_by_one():
    rng = np.random.default_rng(31)
    for _ in range(10):
        P0, C, mu = stabilized_pair(rng)
        assert 0.0 < mu <= 1.0


def test_degenerate_pair_rejected():
    one = TransferFunction((1.0,), (1.0,))
    with pytest.raises(DegeneratePair):
        closed_loop(one, one)


def test_delay_plant_margin():
    # e^{-0.1 s}/(s+1) with a mild gain stays stable
    P = TransferFunction((1.0,), (1.0, 1.0), delay=0.1)
    C = TransferFunction((0.5,), (1.0,))
    res = margin(P, C)
    assert res.stabilized
    assert 0.0 < res.mu <= 1.0


def test_zero_plant_zero_controller():
    # H = [[0, 0], [0, 1]] pointwise, so the sup-norm is 1 and mu is exactly 1
    zero = TransferFunction((0.0,), (1.0,))
    res = margin(zero, zero)
    assert res.stabilized
    assert res.H_norm == pytest.approx(1.0, abs=1e-12)
    assert res.mu == pytest.approx(1.0, abs=1e-12)


def test_zero_controller_leaves_unstable_plant():
    res = margin(P_UNSTABLE, TransferFunction((0.0,), (1.0,)))
    assert not res.stabilized
    assert res.mu == 0.0


def _char_poly(P, C):
    """Closed-loop characteristic polynomial d_C d - n_C n, ascending coeffs."""
    dd = npoly.polymul(C.den, P.den)
    nn = npoly.polymul(C.num, P.num)
    m = max(len(dd), len(nn))
    chi = np.zeros(m)
    chi[: len(dd)] += dd
    chi[: len(nn)] -= nn
    return np.trim_zeros(chi, "b")


def test_is_stabilized_matches_direct_pole_check():
    # for delay-free coprime pairs the verdict is decided by the roots of
    # d_C d - n_C n alone; skip samples too close to the axis to call
    rng = np.random.default_rng(1209)
    checked = 0
    while checked < 50:
        P = random_rational(rng)
        C = random_rational(rng)
        chi = _char_poly(P, C)
        if len(chi) < 2:
            continue
        scale = max(np.abs(npoly.polymul(C.den, P.den)).max(), 1.0)
        if abs(chi[-1]) < 1e-6 * scale:
            continue
        roots = npoly.polyroots(chi)
        if np.abs(roots.real).min() < 1e-6:
            continue
        try:
            cl = closed_loop(P, C)
        except DegeneratePair:
            continue
        assert is_stabilized(cl) == bool(roots.real.max() < 0.0), (P, C, roots)
        checked += 1


def test_robustness_report_on_fixed_triple():
    P = TransferFunction((1.0,), (-1.1, 1.0))
    rep = robustness_report(P_UNSTABLE, P, C_GOOD)
    assert rep.holds
    assert rep.mu_perturbed >= rep.bound - 1e-6
    assert abs(rep.distance - nu_metric(P_UNSTABLE, P).value) < 1e-12


def test_robustness_random_triples():
    rng = np.random.default_rng(63)
    for _ in range(6):
        P0, C, mu0 = stabilized_pair(rng)
        P = perturb(rng, P0, scale=0.03)
        rep = robustness_report(P0, P, C)
        assert rep.mu_nominal == pytest.approx(mu0, rel=1e-9)
        assert rep.holds, (P0, P, C, rep)
