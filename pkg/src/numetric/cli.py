"""Command-line interface: plant JSON files in, verdicts out.

A plant file holds one object: {"num": [...], "den": [...], "delay": 0.0,
"domain": "half-plane"}, coefficients ascending.  Reports echo the
effective configuration so runs can be reproduced; identical inputs give
byte-identical JSON.  Exit codes: 0 computed, 1 verdict-level failure
(non-convergence or an undefined winding under --strict), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass

from .factorization import AxisRoot, NotCoprime, normalize
from .index import CurveThroughZero, LengthNotPowerOfTwo, NeedsRefinement, circle_winding
from .metric import AnnulusScan, NuMetricResult, classical_nu_metric, nu_metric
from .plants import (
    Domain,
    TransferFunction,
    UnsupportedDelay,
    ValidationError,
    reduce_fraction,
)
from .stability import DegeneratePair, closed_loop, margin, robustness_report

__all__ = ["ParseError", "RunConfig", "parse_plant", "emit_plant", "run", "main"]


class ParseError(ValueError):
    """A plant spec file is missing, malformed, or inconsistent."""


@dataclass(frozen=True)
class RunConfig:
    """Effective run configuration, echoed into every report."""

    command: str
    plants: tuple[str, ...]
    k_min: int = 3
    k_max: int = 14
    samples: int = 1024
    eps_inv: float = 1e-9
    tail: int = 3
    classical: bool = False
    radius: float | None = None
    strict: bool = False
    json_out: str | None = None

    def scan(self) -> AnnulusScan:
        return AnnulusScan(self.k_min, self.k_max, self.samples, self.eps_inv, self.tail)


def parse_plant(source) -> tuple[TransferFunction, bool]:
    """Load a plant from a JSON file path or a parsed dict.

    Returns (plant, reduced); reduced is True when common roots had to be
    cancelled to reach lowest terms (reported as a warning by the CLI).
    """
    if isinstance(source, dict):
        spec = source
        label = "<dict>"
    else:
        label = str(source)
        try:
            with open(source, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
        except OSError as exc:
            raise ParseError("cannot read %s: %s" % (label, exc)) from exc
        except json.JSONDecodeError as exc:
            raise ParseError("%s is not valid JSON: %s" % (label, exc)) from exc
    if not isinstance(spec, dict):
        raise ParseError("%s: plant spec must be a JSON object" % label)
    unknown = set(spec) - {"num", "den", "delay", "domain"}
    if unknown:
        raise ParseError("%s: unknown fields %s" % (label, sorted(unknown)))
    try:
        num = [float(c) for c in spec["num"]]
        den = [float(c) for c in spec["den"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("%s: num and den must be arrays of numbers" % label) from exc
    delay = spec.get("delay", 0.0)
    domain_name = spec.get("domain", "half-plane")
    try:
        domain = Domain(domain_name)
    except ValueError as exc:
        raise ParseError("%s: domain must be 'half-plane' or 'disk'" % label) from exc
    num, den, reduced = reduce_fraction(num, den)
    try:
        plant = TransferFunction(num, den, delay, domain)
    except (ValidationError, UnsupportedDelay) as exc:
        raise ParseError("%s: %s" % (label, exc)) from exc
    return plant, reduced


def emit_plant(f: TransferFunction) -> dict:
    """Plant spec dict; parse_plant(emit_plant(f)) reproduces f exactly."""
    return {
        "num": list(f.num),
        "den": list(f.den),
        "delay": f.delay,
        "domain": f.domain.value,
    }


def _condition_json(result: NuMetricResult) -> dict:
    cond = result.condition
    return {
        "holds": cond.holds,
        "rho_star": cond.rho_star,
        "eps_inv": cond.eps_inv,
        "per_radius": [
            {
                "radius": d.radius,
                "min_modulus": d.min_modulus,
                "winding": d.winding,
                "passed": d.passed,
                "marginal": d.marginal,
                "note": d.note,
            }
            for d in cond.per_radius
        ],
    }


def _load(cfg: RunConfig) -> list[TransferFunction]:
    plants = []
    for path in cfg.plants:
        plant, reduced = parse_plant(path)
        if reduced:
            print("warning: %s reduced to lowest terms" % path, file=sys.stderr)
        plants.append(plant)
    return plants


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns (exit_code, report)."""
    # the echo covers everything that affects the numbers; output
    # destination and exit-code policy stay out so reports stay comparable
    config = {k: v for k, v in asdict(cfg).items() if k not in ("json_out", "strict")}
    report: dict = {"command": cfg.command, "config": config}
    code = 0
    plants = _load(cfg)

    if cfg.command == "distance":
        p1, p2 = plants
        if cfg.classical:
            value = classical_nu_metric(p1, p2, cfg.samples, cfg.eps_inv)
            report.update({"value": value, "classical": True})
        else:
            res = nu_metric(p1, p2, cfg.scan())
            report.update(
                {
                    "value": res.value,
                    "classical": False,
                    "sup_norm": res.sup_norm,
                    "converged": res.converged,
                    "condition": _condition_json(res),
                    "radii_used": list(res.radii_used),
                    "warning": res.warning,
                }
            )
            if cfg.strict and not res.converged:
                code = 1

    elif cfg.command == "factorize":
        (p,) = plants
        factors = normalize(p)
        report.update(
            {
                "N": emit_plant(factors.N),
                "D": emit_plant(factors.D),
                "normalization_residual": factors.normalization_residual,
                "corona_gap": factors.corona_gap,
            }
        )

    elif cfg.command == "winding":
        (p,) = plants
        try:
            res = circle_winding(p, cfg.radius, cfg.samples)
            report.update(
                {
                    "radius": cfg.radius,
                    "winding": res.winding,
                    "raw_turns": res.raw_turns,
                    "min_modulus": res.min_modulus,
                    "refinement_depth": res.refinement_depth,
                }
            )
        except CurveThroughZero as exc:
            report.update({"radius": cfg.radius, "winding": None, "error": str(exc)})
            code = 1
        except NeedsRefinement as exc:
            report.update({"radius": cfg.radius, "winding": None, "error": str(exc)})
            code = 1

    elif cfg.command == "margin":
        p, c = plants
        res = margin(closed_loop(p, c), scan=cfg.scan())
        report.update({"mu": res.mu, "H_norm": res.H_norm, "stabilized": res.stabilized})

    elif cfg.command == "robust":
        p0, p, c = plants
        rep = robustness_report(p0, p, c, cfg.scan())
        report.update(
            {
                "mu_nominal": rep.mu_nominal,
                "mu_perturbed": rep.mu_perturbed,
                "distance": rep.distance,
                "bound": rep.bound,
                "holds": rep.holds,
                "slack": rep.slack,
            }
        )
        if cfg.strict and not rep.holds:
            code = 1

    else:
        raise ParseError("unknown command %r" % cfg.command)
    return code, report


def _summary(report: dict) -> str:
    cmd = report["command"]
    if cmd == "distance":
        kind = "classical nu distance" if report.get("classical") else "nu distance"
        line = "%s = %.9f" % (kind, report["value"])
        if not report.get("classical"):
            cond = "holds" if report["condition"]["holds"] else "fails"
            conv = "converged" if report["converged"] else "NOT converged"
            line += "  (condition %s, %s)" % (cond, conv)
        return line
    if cmd == "factorize":
        return "N num=%s den=%s delay=%g | D num=%s den=%s | residual=%.3e gap=%.3e" % (
            report["N"]["num"],
            report["N"]["den"],
            report["N"]["delay"],
            report["D"]["num"],
            report["D"]["den"],
            report["normalization_residual"],
            report["corona_gap"],
        )
    if cmd == "winding":
        if report.get("error"):
            return "winding undefined at radius %g: %s" % (report["radius"], report["error"])
        return "winding = %d at radius %g (min modulus %.3e, depth %d)" % (
            report["winding"],
            report["radius"],
            report["min_modulus"],
            report["refinement_depth"],
        )
    if cmd == "margin":
        return "mu = %.9f  (||H|| = %.6f, %s)" % (
            report["mu"],
            report["H_norm"],
            "stabilized" if report["stabilized"] else "not stabilized",
        )
    if cmd == "robust":
        return "mu_perturbed = %.6f >= %.6f = mu_nominal - distance: %s (slack %.3e)" % (
            report["mu_perturbed"],
            report["bound"],
            "holds" if report["holds"] else "VIOLATED",
            report["slack"],
        )
    return json.dumps(report, sort_keys=True)


def _add_scan_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--k-min", type=int, default=3, help="first dyadic radius exponent: r = 1 - 2^-k")
    sub.add_argument("--k-max", type=int, default=14, help="last dyadic radius exponent")
    sub.add_argument("--samples", type=int, default=1024, help="boundary samples per radius (power of two)")
    sub.add_argument("--eps-inv", type=float, default=1e-9, help="invertibility floor for the determinant modulus")
    sub.add_argument("--tail", type=int, default=3, help="consecutive agreeing radii required to converge")
    sub.add_argument("--json", dest="json_out", metavar="PATH", help="write the full JSON report to PATH")
    sub.add_argument("--strict", action="store_true", help="exit 1 on a negative or unconverged verdict")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numetric",
        description="nu-metric distances and stability margins",
        epilog='plant files are JSON objects {"num": [...], "den": [...], '
        '"delay": 0.0, "domain": "half-plane"} with polynomial '
        "coefficients in ascending order (constant term first)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="nu-metric distance between two plants")
    p.add_argument("plant1")
    p.add_argument("plant2")
    p.add_argument("--classical", action="store_true", help="boundary-circle metric (rational plants only)")
    _add_scan_args(p)

    p = sub.add_parser("factorize", help="normalized coprime factors of a plant")
    p.add_argument("plant")
    _add_scan_args(p)

    p = sub.add_parser("winding", help="winding number of a plant on a circle")
    p.add_argument("plant")
    p.add_argument("--radius", type=float, required=True)
    _add_scan_args(p)

    p = sub.add_parser("margin", help="closed-loop stability margin of (plant, controller)")
    p.add_argument("plant")
    p.add_argument("controller")
    _add_scan_args(p)

    p = sub.add_parser("robust", help="robustness inequality for (nominal, perturbed, controller)")
    p.add_argument("plant0")
    p.add_argument("plant")
    p.add_argument("controller")
    _add_scan_args(p)
    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    plant_order = {
        "distance": ("plant1", "plant2"),
        "factorize": ("plant",),
        "winding": ("plant",),
        "margin": ("plant", "controller"),
        "robust": ("plant0", "plant", "controller"),
    }[args.command]
    return RunConfig(
        command=args.command,
        plants=tuple(getattr(args, name) for name in plant_order),
        k_min=args.k_min,
        k_max=args.k_max,
        samples=args.samples,
        eps_inv=args.eps_inv,
        tail=args.tail,
        classical=getattr(args, "classical", False),
        radius=getattr(args, "radius", None),
        strict=args.strict,
        json_out=args.json_out,
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = _config_from(args)
    try:
        code, report = run(cfg)
    except (ParseError, ValidationError, UnsupportedDelay, AxisRoot, NotCoprime, DegeneratePair,
            LengthNotPowerOfTwo, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    print(_summary(report))
    if cfg.json_out:
        with open(cfg.json_out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
