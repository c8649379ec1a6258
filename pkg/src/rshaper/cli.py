"""Command-line front-end: analyze, design, simulate, reproduce."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .design import (
    DelayCompensator,
    PiController,
    QuasiRationalLoop,
    design_report,
)
from .freq import FrequencyGrid, default_grid, sample_response, stability_margins
from .lti import RationalTransfer, StateSpaceModel, statespace_to_transfer
from .plants import paper_verbatim_statespace
from .sim import (
    ControllerConfig,
    Scenario,
    SimConfig,
    classify_trace,
    simulate_closed_loop,
    simulate_open_loop,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_OSCILLATING = 3

BUILTIN_PLANTS = ("builtin:paper-two-mass",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_plant(ref: str):
    """Resolve a plant reference to (StateSpaceModel | None, RationalTransfer)."""
    if ref == "builtin:paper-two-mass":
        ss = paper_verbatim_statespace()
        return ss, statespace_to_transfer(ss)
    if ref.startswith("builtin:"):
        raise UsageError(f"unknown builtin plant {ref!r}")
    try:
        doc = json.loads(Path(ref).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read plant file {ref!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"plant file {ref!r} is not valid JSON: {exc}") from exc
    if "A" in doc:
        ss = StateSpaceModel(doc["A"], doc["B"], doc["F"])
        return ss, statespace_to_transfer(ss)
    if "num" in doc:
        return None, RationalTransfer.from_json(json.dumps(doc))
    raise UsageError(f"plant file {ref!r} has neither state-space nor transfer keys")


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects two comma-separated numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_grid(text: str | None) -> FrequencyGrid:
    if text is None:
        return default_grid()
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--grid expects WMIN,WMAX,N, got {text!r}")
    return FrequencyGrid(float(parts[0]), float(parts[1]), int(parts[2]))


def _parse_scenario(text: str) -> Scenario:
    try:
        kind, rest = text.split(":", 1)
        if kind == "step":
            amp, t0 = rest.split("@")
            return Scenario("step-reference", float(amp), start_time=float(t0))
        if kind == "pulse":
            ampwidth, t0 = rest.split("@")
            amp, width = ampwidth.split(",")
            return Scenario(
                "open-loop-pulse",
                float(amp),
                start_time=float(t0),
                pulse_width=float(width),
            )
        if kind == "combo":
            steppart, distpart = rest.split(",", 1)
            amp, t0 = steppart.split("@")
            imp, td = distpart.split("@")
            return Scenario(
                "disturbance-step-combo",
                float(amp),
                start_time=float(t0),
                disturbance_time=float(td),
                disturbance_impulse=float(imp),
            )
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad scenario spec {text!r}: {exc}") from exc
    raise UsageError(f"unknown scenario kind in {text!r}")


def _controller_from_args(args) -> ControllerConfig:
    if args.controller:
        try:
            return ControllerConfig.from_json(Path(args.controller).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read controller file: {exc}") from exc
    if not args.pi:
        raise UsageError("need --pi KP,KI or --controller FILE")
    kp, ki = _parse_pair(args.pi, "--pi")
    kd, tau = (0.0, 0.0)
    if args.comp:
        kd, tau = _parse_pair(args.comp, "--comp")
    return ControllerConfig(
        pi=PiController(kp, ki),
        comp=DelayCompensator(kd, tau),
        gravity_ff=args.gravity_ff,
    )


def _write_manifest(out_dir: Path, command: str, inputs: dict, outputs: list):
    manifest = {
        "command": command,
        "inputs": inputs,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def cmd_analyze(args) -> int:
    _, g = _load_plant(args.plant)
    pi = comp = None
    if args.pi:
        kp, ki = _parse_pair(args.pi, "--pi")
        pi = PiController(kp, ki)
    if args.comp:
        kd, tau = _parse_pair(args.comp, "--comp")
        comp = DelayCompensator(kd, tau)
    loop = QuasiRationalLoop(g.num, g.den, compensator=comp, pi=pi)
    grid = _parse_grid(args.grid)
    resp = sample_response(loop, grid)
    resp.to_csv(args.out)
    report = stability_margins(resp)
    print(report.to_json())
    return EXIT_OK if report.stable_verdict != "margins-violated" else EXIT_UNSTABLE


def cmd_design(args) -> int:
    _, g = _load_plant(args.plant)
    report = design_report(g, omega0=args.omega0)
    print(json.dumps(report))
    return EXIT_OK


def cmd_simulate(args) -> int:
    ss, _ = _load_plant(args.plant)
    if ss is None:
        raise UsageError("simulate needs a state-space plant")
    sc = _parse_scenario(args.scenario)
    cfg = SimConfig(dt=args.dt, duration=args.duration)
    if sc.kind == "open-loop-pulse":
        t = np.arange(cfg.nsteps + 1) * cfg.dt
        u = np.where(
            (t >= sc.start_time) & (t < sc.start_time + sc.pulse_width),
            sc.amplitude,
            0.0,
        )
        tr = simulate_open_loop(ss, u, cfg, gravity_ff=args.gravity_ff)
        ref = 0.0
    else:
        ctl = _controller_from_args(args)
        tr = simulate_closed_loop(ss, ctl, sc, cfg)
        ref = sc.amplitude
    tr.to_csv(args.out)
    verdict = classify_trace(tr, ref, settle_band=args.settle_band)
    print(verdict.to_json())
    return {
        "settled": EXIT_OK,
        "diverged": EXIT_UNSTABLE,
        "oscillating": EXIT_OSCILLATING,
    }[verdict.verdict]


def cmd_reproduce(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig = args.figure
    builders = {
        "fig2": _repro_loop_damping,
        "fig3": _repro_comp_magnitude,
        "fig4": _repro_suppression_ratio,
        "fig6": _repro_loop_margins,
        "fig8a": _repro_pulse,
        "fig8b": _repro_pi_only,
        "fig8c": _repro_full_controller,
    }
    if fig not in builders:
        raise UsageError(
            f"unknown figure id {fig!r}; choose from {sorted(builders)}"
        )
    inputs, outputs = builders[fig](out_dir)
    manifest = _write_manifest(out_dir, f"reproduce {fig}", inputs, outputs)
    print(json.dumps({"outputs": [str(p) for p in outputs + [manifest]]}))
    return EXIT_OK


# Exemplary template used by the loop-shape and ratio figures.
_TEMPLATE = {"k": 1.0, "z1": 50.0, "p1": 100.0, "omega0": 10.0}


def _repro_loop_damping(out_dir: Path):
    from .lti import fourth_order_template

    grid = default_grid()
    outputs = []
    for zeta in (0.01, 0.7):
        g = fourth_order_template(zeta=zeta, **_TEMPLATE)
        path = out_dir / f"loop_zeta{zeta:g}.csv".replace(".", "_", 1)
        sample_response(g, grid).to_csv(path)
        outputs.append(path)
    return {"template": {**_TEMPLATE, "zeta": [0.01, 0.7]}}, outputs


def _repro_comp_magnitude(out_dir: Path):
    comp = DelayCompensator(kd=1.0, tau=0.3142)
    path = out_dir / "compensator_response.csv"
    sample_response(comp, default_grid()).to_csv(path)
    return {"kd": 1.0, "tau": 0.3142}, [path]


def _repro_suppression_ratio(out_dir: Path):
    from .lti import fourth_order_template, poly_eval

    g = fourth_order_template(zeta=0.01, **_TEMPLATE)
    rep = design_report(g)
    comp = DelayCompensator(kd=rep["kd"], tau=rep["tau"])
    ratio = lambda s: 1.0 + comp(s) * poly_eval(g.num, s) / poly_eval(g.den, s)
    path = out_dir / "suppression_ratio.csv"
    sample_response(ratio, default_grid()).to_csv(path)
    return {"template": {**_TEMPLATE, "zeta": 0.01}, "design": rep}, [path]


_PAPER_GAINS = {"kp": 100.0, "ki": 150.0, "kd": 100.0, "tau": 0.1923}


def _repro_loop_margins(out_dir: Path):
    g = statespace_to_transfer(paper_verbatim_statespace())
    pi = PiController(_PAPER_GAINS["kp"], _PAPER_GAINS["ki"])
    comp = DelayCompensator(_PAPER_GAINS["kd"], _PAPER_GAINS["tau"])
    grid = default_grid()
    outputs = []
    for name, loop in (
        ("cg_loop.csv", QuasiRationalLoop(g.num, g.den, pi=pi)),
        ("ch_loop.csv", QuasiRationalLoop(g.num, g.den, compensator=comp, pi=pi)),
    ):
        path = out_dir / name
        sample_response(loop, grid).to_csv(path)
        outputs.append(path)
    return {"plant": "builtin:paper-two-mass", "gains": _PAPER_GAINS}, outputs


def _repro_pulse(out_dir: Path):
    ss = paper_verbatim_statespace()
    cfg = SimConfig(dt=1e-4, duration=10.0)
    sc = {"amplitude": 1.0, "width": 0.1, "start": 0.5}
    t = np.arange(cfg.nsteps + 1) * cfg.dt
    u = np.where((t >= sc["start"]) & (t < sc["start"] + sc["width"]),
                 sc["amplitude"], 0.0)
    tr = simulate_open_loop(ss, u, cfg)
    path = out_dir / "open_loop_pulse.csv"
    tr.to_csv(path)
    inputs = {"plant": "builtin:paper-two-mass", "pulse": sc,
              "dt": cfg.dt, "duration": cfg.duration, "diverged": tr.diverged}
    return inputs, [path]


def _simulate_step(out_dir: Path, name: str, kd: float, sc: Scenario,
                   duration: float):
    ss = paper_verbatim_statespace()
    ctl = ControllerConfig(
        pi=PiController(_PAPER_GAINS["kp"], _PAPER_GAINS["ki"]),
        comp=DelayCompensator(kd, _PAPER_GAINS["tau"] if kd else 0.0),
    )
    cfg = SimConfig(dt=1e-4, duration=duration)
    tr = simulate_closed_loop(ss, ctl, sc, cfg)
    path = out_dir / name
    tr.to_csv(path)
    verdict = classify_trace(tr, sc.amplitude)
    inputs = {
        "plant": "builtin:paper-two-mass",
        "controller": json.loads(ctl.to_json()),
        "scenario": json.loads(sc.to_json()),
        "dt": cfg.dt,
        "duration": duration,
        "diverged": tr.diverged,
        "verdict": verdict.verdict,
    }
    return inputs, [path]


def _repro_pi_only(out_dir: Path):
    sc = Scenario("step-reference", 0.005, start_time=0.5)
    return _simulate_step(out_dir, "pi_only_step.csv", 0.0, sc, 20.0)


def _repro_full_controller(out_dir: Path):
    sc = Scenario(
        "disturbance-step-combo",
        0.005,
        start_time=0.5,
        disturbance_time=16.5,
        disturbance_impulse=-0.05,
    )
    return _simulate_step(
        out_dir, "full_controller_step.csv", _PAPER_GAINS["kd"], sc, 25.0
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="rshaper", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="Bode data and stability margins")
    pa.add_argument("--plant", required=True)
    pa.add_argument("--pi", metavar="KP,KI")
    pa.add_argument("--comp", metavar="KD,TAU")
    pa.add_argument("--grid", metavar="WMIN,WMAX,N")
    pa.add_argument("--out", default="bode.csv")
    pa.set_defaults(func=cmd_analyze)

    pd = sub.add_parser("design", help="delay and gain design from the plant")
    pd.add_argument("--plant", required=True)
    pd.add_argument("--omega0", type=float)
    pd.set_defaults(func=cmd_design)

    ps = sub.add_parser("simulate", help="closed/open-loop time simulation")
    ps.add_argument("--plant", required=True)
    ps.add_argument("--pi", metavar="KP,KI")
    ps.add_argument("--comp", metavar="KD,TAU")
    ps.add_argument("--controller", metavar="FILE")
    ps.add_argument("--gravity-ff", type=float, default=0.0)
    ps.add_argument("--scenario", required=True,
                    metavar="step:AMP@T | pulse:AMP,W@T | combo:AMP@T,IMP@TD")
    ps.add_argument("--dt", type=float, default=1e-4)
    ps.add_argument("--duration", type=float, default=20.0)
    ps.add_argument("--settle-band", type=float, default=0.02)
    ps.add_argument("--out", default="trace.csv")
    ps.set_defaults(func=cmd_simulate)

    pr = sub.add_parser("reproduce", help="emit the data behind a figure")
    pr.add_argument("figure")
    pr.add_argument("--out-dir", default=".")
    pr.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit:
        raise
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
