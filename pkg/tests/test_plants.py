"""Transfer-function construction, disk evaluation, and the Mobius maps."""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numetric import (
    CircleSampling,
    Domain,
    DomainError,
    TransferFunction,
    UnsupportedDelay,
    ValidationError,
    circle_grid,
    disk_to_half_plane,
    eval_array,
    evaluate,
    half_plane_to_disk,
    reduce_fraction,
    sample_circle,
    to_half_plane,
    transplant,
)

coeff = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


def test_trailing_zeros_trimmed():
    f = TransferFunction((1.0, 2.0, 0.0), (1.0, 1.0, 0.0, 0.0))
    assert f.num == (1.0, 2.0)
    assert f.den == (1.0, 1.0)


def test_zero_denominator_rejected():
    with pytest.raises(ValidationError):
        TransferFunction((1.0,), (0.0,))


def test_disk_domain_rejects_delay():
    with pytest.raises(UnsupportedDelay):
        TransferFunction((0.0, 1.0), (1.0,), delay=0.5, domain=Domain.DISK)


def test_negative_delay_rejected():
    with pytest.raises(ValidationError):
        TransferFunction((1.0,), (1.0, 1.0), delay=-1.0)


def test_common_root_rejected_until_reduced():
    # (s+1)(s+2) over (s+1)(s+3)
    num = (2.0, 3.0, 1.0)
    den = (3.0, 4.0, 1.0)
    with pytest.raises(ValidationError):
        TransferFunction(num, den)
    n2, d2, changed = reduce_fraction(num, den)
    assert changed
    f = TransferFunction(n2, d2)
    assert f.num_degree == 1 and f.den_degree == 1


def test_reduce_fraction_is_identity_when_coprime():
    num = (1.0, 0.25, 3.0)
    den = (0.5, 2.0)
    n2, d2, changed = reduce_fraction(num, den)
    assert not changed
    assert n2 == num and d2 == den  # bit-identical, not merely close


def test_evaluate_delay_plant_on_disk():
    # e^{-s} s/(s-1) at z=i maps through s = (1+i)/(1-i) = i
    f = TransferFunction((0.0, 1.0), (-1.0, 1.0), delay=1.0)
    got = evaluate(f, 1j)
    want = cmath.exp(-1j) * 1j / (1j - 1.0)
    assert abs(got - want) < 1e-14


def test_evaluate_far_half_plane_points_is_stable():
    # z = 0.99 maps to s = 199; reversed-coefficient path must not overflow
    f = TransferFunction((2.0, 1.0), (3.0, 1.0))
    s = 199.0
    assert abs(evaluate(f, 0.99) - (s + 2.0) / (s + 3.0)) < 1e-12


def test_boundary_point_one_is_the_limit_at_infinity():
    proper = TransferFunction((2.0, 1.0), (3.0, 4.0))
    assert abs(evaluate(proper, 1.0 + 0j) - 0.25) < 1e-15
    strictly = TransferFunction((1.0,), (1.0, 1.0))
    assert evaluate(strictly, 1.0 + 0j) == 0.0


def test_boundary_point_one_with_delay_raises():
    f = TransferFunction((1.0,), (1.0, 1.0), delay=1.0)
    with pytest.raises(DomainError):
        evaluate(f, 1.0 + 0j)


def test_outside_disk_rejected():
    f = TransferFunction((1.0,), (1.0, 1.0))
    with pytest.raises(DomainError):
        evaluate(f, 1.2 + 0j)


def test_point_maps_round_trip():
    for z in (0.3 + 0.4j, -0.9j, 0.99, -0.5 + 0.1j):
        s = disk_to_half_plane(z)
        assert s.real > 0 or abs(z) == 1
        assert abs(half_plane_to_disk(s) - z) < 1e-12


def test_transplant_of_inner_function_is_z():
    # (s-1)/(s+1) becomes the identity map on the disk
    t = transplant(TransferFunction((-1.0, 1.0), (1.0, 1.0)))
    assert t.domain is Domain.DISK
    for z in (0.5, -0.3 + 0.2j, 0.9j):
        assert abs(evaluate(t, z) - z) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4), st.lists(coeff, min_size=1, max_size=4))
def test_transplant_matches_composition(ncoef, dcoef):
    if abs(dcoef[-1]) < 1e-2 or max(abs(c) for c in dcoef) < 1e-2:
        return
    try:
        # extreme coefficient ratios overflow the companion-matrix scaling
        with np.errstate(over="ignore", invalid="ignore"):
            num, den, _ = reduce_fraction(tuple(ncoef), tuple(dcoef))
            f = TransferFunction(num, den)
            t = transplant(f)
    except (ValidationError, ZeroDivisionError, np.linalg.LinAlgError):
        return
    for z in (0.2 + 0.3j, -0.6, 0.1 - 0.7j):
        s = disk_to_half_plane(z)
        direct = np.polyval(num[::-1], s) / np.polyval(den[::-1], s)
        if not np.isfinite(direct) or abs(direct) > 1e8:
            continue
        assert abs(evaluate(t, z) - direct) < 1e-8 * max(1.0, abs(direct))


def test_transplant_rejects_delay():
    with pytest.raises(UnsupportedDelay):
        transplant(TransferFunction((1.0,), (1.0, 1.0), delay=1.0))


@settings(max_examples=40, deadline=None)
@given(st.lists(coeff, min_size=1, max_size=4), st.lists(coeff, min_size=1, max_size=4),
       st.floats(min_value=-0.95, max_value=0.95), st.floats(min_value=-0.95, max_value=0.95))
def test_conjugate_symmetry(ncoef, dcoef, x, y):
    # real coefficients force f(conj z) = conj f(z)
    z = complex(x, y)
    if abs(z) > 0.97 or abs(dcoef[-1]) < 1e-2:
        return
    try:
        num, den, _ = reduce_fraction(tuple(ncoef), tuple(dcoef))
        f = TransferFunction(num, den, delay=0.25)
    except (ValidationError, np.linalg.LinAlgError):
        return
    a = evaluate(f, z)
    b = evaluate(f, z.conjugate())
    assert abs(b - a.conjugate()) <= 1e-12 * max(1.0, abs(a))


def test_to_half_plane_round_trip():
    f = TransferFunction((1.0, 0.5), (2.0, 0.0, 1.0))
    back = to_half_plane(transplant(f))
    for z in (0.4, -0.2 + 0.5j):
        assert abs(evaluate(back, z) - evaluate(f, z)) < 1e-12


def test_circle_grid_pins_unity_and_excludes_arc():
    _, plain = circle_grid(CircleSampling(1.0, 64), delay=0.0)
    assert plain[0] == 1.0 + 0j
    assert len(plain) == 64

    theta, excl = circle_grid(CircleSampling(0.9995, 1024), delay=1.0)
    gap = np.minimum(theta, 2 * np.pi - theta)
    assert gap.min() >= 2 * np.pi / 1024 - 1e-12
    assert len(excl) < 1024

    # below the near-boundary threshold no arc is removed
    _, low = circle_grid(CircleSampling(0.9, 1024), delay=1.0)
    assert len(low) == 1024


def test_sample_circle_marks_infinity():
    f = TransferFunction((1.0,), (1.0, 1.0))
    pts = sample_circle(f, CircleSampling(1.0, 16))
    assert pts[0].z == 1.0 + 0j
    assert np.isinf(pts[0].s)
    assert all(np.isfinite(p.value) for p in pts)


def test_sample_circle_values_match_evaluate_exactly():
    f = TransferFunction((1.0, 0.5), (2.0, 1.0, 1.0), delay=0.2)
    for p in sample_circle(f, CircleSampling(0.75, 32)):
        assert p.value == evaluate(f, p.z)


def test_eval_array_matches_scalar_evaluate():
    f = TransferFunction((1.0, 2.0), (2.0, 0.5, 1.0), delay=0.3)
    z = 0.8 * np.exp(1j * np.linspace(0.1, 6.0, 11))
    vals = eval_array(f, z)
    for zk, vk in zip(z, vals):
        assert abs(evaluate(f, zk) - vk) < 1e-14
