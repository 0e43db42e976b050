"""Seeded random generators shared across the test modules.

Everything that samples randomness takes an explicit numpy Generator so
failures reproduce; the acceptance module records one summary line per
criterion which pytest prints at the end of the run.
"""

from __future__ import annotations

import numpy as np
import numpy.polynomial.polynomial as npoly

from numetric import TransferFunction, margin, reduce_fraction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = "CRITERION %02d: %s  %s" % (number, "PASS" if ok else "FAIL", detail)
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_rational(rng: np.random.Generator, max_degree: int = 3, stable: bool = False) -> TransferFunction:
    """Random proper plant in lowest terms; stable=True forces a Hurwitz denominator."""
    while True:
        deg_d = int(rng.integers(1, max_degree + 1))
        deg_n = int(rng.integers(0, deg_d + 1))
        if stable:
            den = npoly.polyfromroots(-rng.uniform(0.2, 2.5, size=deg_d)).real
        else:
            den = rng.normal(size=deg_d + 1)
            if abs(den[-1]) < 0.3:
                continue
        num = rng.normal(size=deg_n + 1)
        if abs(num[-1]) < 1e-3:
            continue
        num2, den2, _ = reduce_fraction(tuple(num), tuple(den))
        try:
            return TransferFunction(tuple(num2), tuple(den2))
        except ValueError:
            continue


def perturb(rng: np.random.Generator, plant: TransferFunction, scale: float = 0.02) -> TransferFunction:
    """Relative coefficient noise; keeps the delay and the sparsity pattern."""
    while True:
        num = np.asarray(plant.num) * (1.0 + scale * rng.normal(size=len(plant.num)))
        den = np.asarray(plant.den) * (1.0 + scale * rng.normal(size=len(plant.den)))
        num2, den2, _ = reduce_fraction(tuple(num), tuple(den))
        try:
            return TransferFunction(tuple(num2), tuple(den2), plant.delay, plant.domain)
        except ValueError:
            continue


def stabilized_pair(rng: np.random.Generator):
    """(P0, C, mu) with C verified stabilizing for P0 by the margin test itself.

    Mixes stable plants with random low-order controllers and unstable
    first-order plants with a gain picked to place the loop root in the
    left half-plane; every candidate is still verified, never assumed.
    """
    while True:
        if rng.random() < 0.6:
            P0 = random_rational(rng, max_degree=2, stable=True)
            candidates = [
                TransferFunction(tuple(rng.normal(scale=0.8, size=int(rng.integers(1, 3)))), (1.0,))
                for _ in range(80)
            ]
        else:
            a = float(rng.uniform(0.2, 2.0))
            b = float(rng.uniform(0.5, 2.0))
            P0 = TransferFunction((b,), (-a, 1.0))
            candidates = [TransferFunction((-(a + float(rng.uniform(0.5, 2.0))) / b,), (1.0,))]
        for C in candidates:
            try:
                m = margin(P0, C)
            except (ValueError, ArithmeticError):
                continue
            if m.stabilized and m.mu > 0.02:
                return P0, C, m.mu


def rational_symbol(rng: np.random.Generator, max_each: int = 2):
    """(handle, expected annulus winding) for a rational symbol whose zeros and
    poles sit inside |z| <= 0.75 or outside |z| >= 1.3, never on the annulus."""

    def draw_roots(n: int) -> list[complex]:
        out = []
        for _ in range(n):
            rad = rng.uniform(0.0, 0.75) if rng.random() < 0.5 else rng.uniform(1.3, 2.5)
            ang = rng.uniform(0.0, 2.0 * np.pi)
            out.append(rad * np.exp(1j * ang))
        return out

    zeros = draw_roots(int(rng.integers(0, max_each + 1)))
    poles = draw_roots(int(rng.integers(0, max_each + 1)))
    expect = sum(1 for z in zeros if abs(z) < 1) - sum(1 for p in poles if abs(p) < 1)

    def handle(z: np.ndarray) -> np.ndarray:
        out = np.ones_like(np.asarray(z, dtype=complex))
        for z0 in zeros:
            out = out * (z - z0)
        for p0 in poles:
            out = out / (z - p0)
        return out

    return handle, expect
