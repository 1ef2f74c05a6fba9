"""Command-line front end.

Subcommands: ``law`` (evaluate a position law on a grid), ``simulate``
(Monte Carlo histogram + optional path traces), ``meanvel`` (conditional
mean velocity over a time grid), ``validate`` (conformance suite).

Scheme / intertime mini-language:

    --scheme bernoulli:p=0.3 | polya:b=1,r=2,A=1.5
    --intertimes linexp:lambda=1,mu=1 | gammaexp:lambda=1,mu=2 | iidexp:lambda=1,mu=1

``gammaexp`` inherits (b, r, A) from the Polya scheme and is rejected with a
Bernoulli scheme.  Exit codes: 0 ok, 1 validation failure, 2 usage error.
The first output line echoes the resolved configuration as JSON; re-running
the same configuration reproduces the output byte for byte.  The default
seed comes from the TRIALTELEGRAPH_SEED environment variable (else 0).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import intertimes as it
from .errors import ParameterError, TrialTelegraphError
from .law import MotionParams, damped_law, polya_law, series_law
from .meanvel import (
    mean_velocity_damped,
    mean_velocity_general,
    mean_velocity_polya,
)
from .simulate import estimate_law, estimate_mean_velocity, simulate_path
from .streams import PathStream
from .trials import Bernoulli, Direction, Polya
from .validate import (
    ValidationReport,
    check_empirical_vs_analytic,
    check_enumeration,
    check_normalization,
)

USAGE_ERROR = 2
VALIDATION_ERROR = 1


def _num(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParameterError(f"not a number: {text!r}")


def _parse_kv(body: str) -> dict[str, float]:
    out = {}
    if body:
        for item in body.split(","):
            if "=" not in item:
                raise ParameterError(f"expected key=value, got {item!r}")
            key, val = item.split("=", 1)
            out[key.strip()] = _num(val)
    return out


def _split_name_args(text: str) -> tuple[str, dict[str, float]]:
    name, _, body = text.partition(":")
    return name.strip().lower(), _parse_kv(body)


def parse_scheme(text: str):
    name, kv = _split_name_args(text)
    if name == "bernoulli":
        if set(kv) != {"p"}:
            raise ParameterError("bernoulli takes exactly p=..")
        return Bernoulli(p=kv["p"])
    if name == "polya":
        if set(kv) != {"b", "r", "A"}:
            raise ParameterError("polya takes exactly b=..,r=..,A=..")
        return Polya(b=kv["b"], r=kv["r"], A=kv["A"])
    raise ParameterError(f"unknown scheme {name!r} (bernoulli | polya)")


def parse_intertimes(text: str, scheme):
    name, kv = _split_name_args(text)
    if set(kv) != {"lambda", "mu"}:
        raise ParameterError(f"{name} takes exactly lambda=..,mu=..")
    lam, mu = kv["lambda"], kv["mu"]
    if name == "linexp":
        return it.LinearRateExponential(lam=lam, mu=mu)
    if name == "iidexp":
        return it.IidExponential(lam=lam, mu=mu)
    if name == "gammaexp":
        if not isinstance(scheme, Polya):
            raise ParameterError(
                "gammaexp intertimes take their Gamma shapes from the urn; "
                "use them with --scheme polya:.."
            )
        return it.GammaThenExponential(b=scheme.b, r=scheme.r, A=scheme.A, lam=lam, mu=mu)
    raise ParameterError(f"unknown intertime family {name!r} (linexp | gammaexp | iidexp)")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _default_seed() -> int:
    return int(os.environ.get("TRIALTELEGRAPH_SEED", "0"))


def _config_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True)


# ---------------------------------------------------------------------------
# law
# ---------------------------------------------------------------------------


def _run_law(config: dict) -> str:
    scheme = parse_scheme(config["scheme"])
    model = parse_intertimes(config["intertimes"], scheme)
    motion = MotionParams(c=config["c"], v=config["v"])
    t, grid, method = config["t"], config["grid"], config["method"]
    if method == "closed":
        if isinstance(scheme, Bernoulli) and isinstance(model, it.LinearRateExponential):
            law = damped_law(scheme.p, model.lam, model.mu, motion, t)
        elif isinstance(scheme, Polya) and isinstance(model, it.GammaThenExponential):
            law = polya_law(scheme.b, scheme.r, scheme.A, model.lam, model.mu, motion, t)
        else:
            raise ParameterError(
                "no closed form for this scheme/intertime pair; use --method series"
            )
    else:
        law = series_law(scheme, model, motion, t, k_max=config["kmax"])
    lo, hi = law.support
    xs = np.linspace(lo, hi, grid + 2)[1:-1]  # interior grid
    rows = []
    for x in xs:
        rows.append(
            (
                "density",
                x,
                law.density(x),
                law.density_given(x, Direction.FORWARD),
                law.density_given(x, Direction.BACKWARD),
            )
        )
    if config["format"] == "json":
        doc = {
            "config": config,
            "support": [lo, hi],
            "atom_forward": {"x": hi, "mass": law.atom_forward},
            "atom_backward": {"x": lo, "mass": law.atom_backward},
            "density": [
                {"x": x, "p": d, "p_given_forward": pc, "p_given_backward": pv}
                for (_, x, d, pc, pv) in rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    lines = [_config_line(config)]
    lines.append("kind,x,p,p_given_forward,p_given_backward")
    for kind, x, d, pc, pv in rows:
        lines.append(f"{kind},{_fmt(x)},{_fmt(d)},{_fmt(pc)},{_fmt(pv)}")
    lines.append(
        f"atom_forward,{_fmt(hi)},{_fmt(law.atom_forward)},"
        f"{_fmt(law.atom_given(Direction.FORWARD))},0"
    )
    lines.append(
        f"atom_backward,{_fmt(lo)},{_fmt(law.atom_backward)},0,"
        f"{_fmt(law.atom_given(Direction.BACKWARD))}"
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _run_simulate(config: dict) -> str:
    scheme = parse_scheme(config["scheme"])
    model = parse_intertimes(config["intertimes"], scheme)
    motion = MotionParams(c=config["c"], v=config["v"])
    t = config["t"]
    emp = estimate_law(
        scheme, model, motion, t, config["paths"], config["bins"], config["seed"]
    )
    lo, hi = motion.support(t)
    if config["format"] == "json":
        doc = {
            "config": config,
            "n_paths": emp.n_paths,
            "atom_forward": {"x": hi, "count": emp.atom_forward_count, "freq": emp.atom_forward_freq},
            "atom_backward": {"x": lo, "count": emp.atom_backward_count, "freq": emp.atom_backward_freq},
            "bins": [
                {
                    "left": float(emp.bin_edges[i]),
                    "right": float(emp.bin_edges[i + 1]),
                    "count": int(emp.bin_counts[i]),
                    "density": float(emp.bin_density[i]),
                    "std_err": float(emp.bin_density_se[i]),
                }
                for i in range(len(emp.bin_counts))
            ],
        }
        if config["trace"]:
            doc["traces"] = _traces_json(scheme, model, motion, t, config)
        return json.dumps(doc, indent=2) + "\n"
    lines = [_config_line(config)]
    lines.append("kind,left,right,count,estimate,std_err")
    se_fwd = (emp.atom_forward_freq * (1 - emp.atom_forward_freq) / emp.n_paths) ** 0.5
    se_bwd = (emp.atom_backward_freq * (1 - emp.atom_backward_freq) / emp.n_paths) ** 0.5
    lines.append(
        f"atom_backward,{_fmt(lo)},{_fmt(lo)},{emp.atom_backward_count},"
        f"{_fmt(emp.atom_backward_freq)},{_fmt(se_bwd)}"
    )
    for i in range(len(emp.bin_counts)):
        lines.append(
            f"bin,{_fmt(emp.bin_edges[i])},{_fmt(emp.bin_edges[i + 1])},"
            f"{int(emp.bin_counts[i])},{_fmt(emp.bin_density[i])},{_fmt(emp.bin_density_se[i])}"
        )
    lines.append(
        f"atom_forward,{_fmt(hi)},{_fmt(hi)},{emp.atom_forward_count},"
        f"{_fmt(emp.atom_forward_freq)},{_fmt(se_fwd)}"
    )
    if config["trace"]:
        lines.append("")
        lines.append("# trace")
        lines.append("path,k,T_k,velocity,position")
        for path_idx in range(config["trace"]):
            sp = simulate_path(scheme, model, motion, t, PathStream(config["seed"], path_idx))
            pos = 0.0
            for k, epoch in enumerate(sp.epochs):
                if k > 0:
                    pos += sp.displacements[k - 1]
                vel = sp.velocities[k] if k < len(sp.velocities) else sp.final_velocity
                lines.append(f"{path_idx},{k},{_fmt(epoch)},{_fmt(vel)},{_fmt(pos)}")
    return "\n".join(lines) + "\n"


def _traces_json(scheme, model, motion, t, config):
    traces = []
    for path_idx in range(config["trace"]):
        sp = simulate_path(scheme, model, motion, t, PathStream(config["seed"], path_idx))
        pos = [0.0]
        for d in sp.displacements:
            pos.append(pos[-1] + d)
        traces.append(
            {
                "path": path_idx,
                "epochs": sp.epochs,
                "velocities": sp.velocities,
                "positions": pos,
                "final_position": sp.final_position,
                "final_velocity": sp.final_velocity,
            }
        )
    return traces


# ---------------------------------------------------------------------------
# meanvel
# ---------------------------------------------------------------------------


def _run_meanvel(config: dict) -> str:
    scheme = parse_scheme(config["scheme"])
    model = parse_intertimes(config["intertimes"], scheme)
    motion = MotionParams(c=config["c"], v=config["v"])
    times = config["times"]
    method = config["method"]

    def analytic(t: float) -> float:
        if method == "general":
            return mean_velocity_general(scheme, model, motion, t)
        if isinstance(scheme, Bernoulli) and isinstance(model, it.LinearRateExponential):
            # the alternating closed form is only practical for short horizons
            if min(model.lam, model.mu) * t <= 2.5:
                return mean_velocity_damped(scheme.p, model.lam, model.mu, motion, t)
            return mean_velocity_general(scheme, model, motion, t)
        if isinstance(scheme, Polya) and isinstance(model, it.GammaThenExponential):
            return mean_velocity_polya(
                scheme.b, scheme.r, scheme.A, model.lam, model.mu, motion, t
            )
        return mean_velocity_general(scheme, model, motion, t)

    rows = []
    for t in times:
        row = {"t": t, "mean_velocity": analytic(t)}
        if config["mc"]:
            mean, se = estimate_mean_velocity(
                scheme, model, motion, t, config["mc"], Direction.FORWARD, config["seed"]
            )
            row["mc_mean"] = mean
            row["mc_std_err"] = se
        rows.append(row)
    if config["format"] == "json":
        return json.dumps({"config": config, "rows": rows}, indent=2) + "\n"
    lines = [_config_line(config)]
    if config["mc"]:
        lines.append("t,mean_velocity,mc_mean,mc_std_err")
        for row in rows:
            lines.append(
                f"{_fmt(row['t'])},{_fmt(row['mean_velocity'])},"
                f"{_fmt(row['mc_mean'])},{_fmt(row['mc_std_err'])}"
            )
    else:
        lines.append("t,mean_velocity")
        for row in rows:
            lines.append(f"{_fmt(row['t'])},{_fmt(row['mean_velocity'])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _run_validate(config: dict) -> tuple[str, ValidationReport]:
    suite = config["suite"]
    paths = config["paths"]
    seed = config["seed"]
    report = ValidationReport()
    if suite == "damped":
        scheme = Bernoulli(p=0.3)
        model = it.LinearRateExponential(lam=1.0, mu=1.0)
        motion = MotionParams(1.0, 1.0)
        t = 1.0
        law = damped_law(0.3, 1.0, 1.0, motion, t)
        mismatched = damped_law(0.5, 1.0, 1.0, motion, t)
    elif suite == "polya":
        scheme = Polya(b=1.0, r=1.0, A=1.0)
        model = it.GammaThenExponential(b=1.0, r=1.0, A=1.0, lam=1.0, mu=1.0)
        motion = MotionParams(1.0, 1.0)
        t = 1.0
        law = polya_law(1.0, 1.0, 1.0, 1.0, 1.0, motion, t)
        mismatched = polya_law(3.0, 1.0, 1.0, 1.0, 1.0, motion, t)
    else:
        raise ParameterError(f"unknown suite {suite!r} (damped | polya)")
    report.extend(check_enumeration(scheme, k_max=8))
    report.extend(check_normalization(law))
    emp = estimate_law(scheme, model, motion, t, paths, config["bins"], seed)
    target = mismatched if config["negative_control"] else law
    report.extend(check_empirical_vs_analytic(emp, target))
    text = "\n".join(report.summary_lines()) + "\n"
    return text, report


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", required=True, help="bernoulli:p=.. | polya:b=..,r=..,A=..")
    p.add_argument(
        "--intertimes",
        required=True,
        help="linexp:lambda=..,mu=.. | gammaexp:lambda=..,mu=.. | iidexp:lambda=..,mu=..",
    )
    p.add_argument("--c", type=float, required=True, help="forward speed")
    p.add_argument("--v", type=float, required=True, help="backward speed")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trialtelegraph",
        description="Trial-driven two-velocity random motion: laws, simulation, validation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_law = sub.add_parser("law", help="evaluate the position law on a grid")
    _add_common(p_law)
    p_law.add_argument("--t", type=float, required=True)
    p_law.add_argument("--grid", type=int, default=200, help="number of interior x points")
    p_law.add_argument("--method", choices=("closed", "series"), default="closed")
    p_law.add_argument("--kmax", type=int, default=200, help="series shells (method=series)")

    p_sim = sub.add_parser("simulate", help="Monte Carlo histogram of S_t")
    _add_common(p_sim)
    p_sim.add_argument("--t", type=float, required=True)
    p_sim.add_argument("--paths", type=int, default=100_000)
    p_sim.add_argument("--bins", type=int, default=50)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--trace", type=int, default=0, help="also dump this many path traces")

    p_mv = sub.add_parser("meanvel", help="conditional mean velocity E[V_t | V_0 = c]")
    _add_common(p_mv)
    p_mv.add_argument("--times", required=True, help="comma-separated t values")
    p_mv.add_argument("--method", choices=("auto", "general"), default="auto")
    p_mv.add_argument("--mc", type=int, default=0, help="add a Monte Carlo column (paths)")
    p_mv.add_argument("--seed", type=int, default=None)

    p_val = sub.add_parser("validate", help="run a conformance suite")
    p_val.add_argument("--suite", choices=("damped", "polya"), default="damped")
    p_val.add_argument("--paths", type=int, default=100_000)
    p_val.add_argument("--bins", type=int, default=50)
    p_val.add_argument("--seed", type=int, default=None)
    p_val.add_argument("--negative-control", action="store_true")
    p_val.add_argument("--out", default=None, help="write the JSON report here")
    return parser


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "law":
            config = {
                "command": "law",
                "scheme": args.scheme,
                "intertimes": args.intertimes,
                "c": args.c,
                "v": args.v,
                "t": args.t,
                "grid": args.grid,
                "method": args.method,
                "kmax": args.kmax,
                "format": args.format,
            }
            _write(_run_law(config), args.out)
            return 0
        if args.command == "simulate":
            config = {
                "command": "simulate",
                "scheme": args.scheme,
                "intertimes": args.intertimes,
                "c": args.c,
                "v": args.v,
                "t": args.t,
                "paths": args.paths,
                "bins": args.bins,
                "seed": args.seed if args.seed is not None else _default_seed(),
                "trace": args.trace,
                "format": args.format,
            }
            _write(_run_simulate(config), args.out)
            return 0
        if args.command == "meanvel":
            config = {
                "command": "meanvel",
                "scheme": args.scheme,
                "intertimes": args.intertimes,
                "c": args.c,
                "v": args.v,
                "times": [_num(s) for s in args.times.split(",")],
                "method": args.method,
                "mc": args.mc,
                "seed": args.seed if args.seed is not None else _default_seed(),
                "format": args.format,
            }
            _write(_run_meanvel(config), args.out)
            return 0
        if args.command == "validate":
            config = {
                "command": "validate",
                "suite": args.suite,
                "paths": args.paths,
                "bins": args.bins,
                "seed": args.seed if args.seed is not None else _default_seed(),
                "negative_control": bool(args.negative_control),
            }
            text, report = _run_validate(config)
            sys.stdout.write(_config_line(config) + "\n" + text)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(report.to_json())
            return 0 if report.passed else VALIDATION_ERROR
    except TrialTelegraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
