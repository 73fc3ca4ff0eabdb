"""Command-line front end.

Subcommands: ``run`` (simulate a preset scenario or a config file, emitting a
CSV log plus a metrics report), ``compare`` (tabulate logs and test pairwise
observable equivalence), ``check`` (score an attack-pair file against the
undetectability conditions), and ``synthesize`` (build an undetectable pair
from an observable gain matrix).

Exit codes: 0 success (``check``: undetectable), 1 ``check`` detectable,
2 bad input/arguments, 3 write failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .attacks import (
    PRESET_KINDS,
    SingularAttackError,
    check_conditions,
    load_attack_pair,
    load_matrix,
    preset_scenario,
    save_attack_pair,
    synthesize_undetectable,
)
from .controller import (
    ControllerGains,
    load_trajectory,
    smiley_start_offset,
    smiley_trajectory,
)
from .detector import DetectorGains
from .kinematics import builtin_model, forward_kinematics, load_model_file
from .scenarios import DEFAULT_Q0_DEG, DEFAULT_SMILEY_RADIUS, SCENARIO_NAMES, scenario_config
from .simulator import SimConfig, SimLog, compare_runs, compute_metrics, run_scenario

_OVERRIDE_KEYS = ("dt", "duration", "kp", "k1", "k2", "s_gain", "epsilon", "radius")
_CONFIG_KEYS = _OVERRIDE_KEYS + ("model", "attack", "trajectory", "q0_deg")


class CliError(Exception):
    """User-input problem; maps to exit code 2."""


def _parse_q0_deg(text: str) -> np.ndarray:
    toks = text.replace(",", " ").split()
    if len(toks) != 6:
        raise CliError(f"--q0-deg needs 6 values, got {len(toks)}")
    return np.array([float(t) for t in toks])


def _parse_overrides(pairs) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise CliError(f"--set expects key=value, got '{pair}'")
        key, value = pair.split("=", 1)
        key = key.strip()
        if key not in _OVERRIDE_KEYS:
            raise CliError(f"unknown override key '{key}' (have {_OVERRIDE_KEYS})")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise CliError(f"override {key}: {exc}") from None
    return out


def _read_config_file(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise CliError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key '{key}' (have {_CONFIG_KEYS})")
        raw[key] = value
    return raw


def _build_file_config(path: Path, overrides: dict[str, float]) -> SimConfig:
    raw = _read_config_file(path)
    values: dict[str, float] = {}
    for key, default in (
        ("dt", 0.01), ("duration", 60.0), ("kp", 5.0), ("k1", 10.0),
        ("k2", 200.0), ("s_gain", 50.0), ("epsilon", 0.01),
        ("radius", DEFAULT_SMILEY_RADIUS),
    ):
        values[key] = overrides.get(key, float(raw[key]) if key in raw else default)

    model_ref = raw.get("model", "lrmate")
    try:
        model, limits = builtin_model(model_ref)
    except ValueError:
        model, limits = load_model_file(model_ref)

    q0_deg = _parse_q0_deg(raw.get("q0_deg", " ".join(map(str, DEFAULT_Q0_DEG))))
    q0 = np.radians(q0_deg)

    attack_ref = raw.get("attack", "nominal")
    if attack_ref in PRESET_KINDS:
        attack = preset_scenario(attack_ref, q0)
    else:
        attack = load_attack_pair(attack_ref)

    traj_ref = raw.get("trajectory", "smiley")
    if traj_ref == "smiley":
        start_pose = forward_kinematics(q0, model)
        center = start_pose.copy()
        center[:3] -= smiley_start_offset(values["radius"])
        trajectory = smiley_trajectory(center, values["radius"], values["duration"])
    else:
        trajectory = load_trajectory(traj_ref)

    return SimConfig(
        model=model,
        limits=limits,
        trajectory=trajectory,
        attack=attack,
        q0=q0,
        controller_gains=ControllerGains(kp=values["kp"]),
        detector_gains=DetectorGains(
            k1=values["k1"], k2=values["k2"],
            s_gain=values["s_gain"], epsilon=values["epsilon"],
        ),
        dt=values["dt"],
        duration=values["duration"],
    )


def _write_metrics(path: Path, name: str, log: SimLog, dt: float) -> None:
    metrics = compute_metrics(log)
    lines = [
        f"run: {name}",
        f"samples: {len(log)}",
        f"dt_s: {dt:.17g}",
        f"duration_s: {log.t[-1]:.17g}",
        f"mean_observed_error_m: {metrics.mean_obs:.17g}",
        f"max_observed_error_m: {metrics.obs_errors.max():.17g}",
        f"mean_actual_error_m: {metrics.mean_act:.17g}",
        f"max_actual_error_m: {metrics.act_errors.max():.17g}",
        f"final_beta_hat: {log.beta_hat[-1]:.17g}",
        f"limit_clamp_steps: {int(log.clamped.sum())}",
        "",
    ]
    path.write_text("\n".join(lines), encoding="utf-8")


def cmd_run(args) -> int:
    overrides = _parse_overrides(args.set)
    if args.dt is not None:
        overrides["dt"] = args.dt
    if args.duration is not None:
        overrides["duration"] = args.duration

    if args.scenario is not None:
        if args.scenario not in SCENARIO_NAMES:
            raise CliError(
                f"unknown scenario '{args.scenario}' (have {SCENARIO_NAMES})"
            )
        name = args.scenario
        gain_keys = {"k1", "k2", "s_gain", "epsilon"}
        det = DetectorGains(**{k: overrides[k] for k in gain_keys & overrides.keys()})
        cfg = scenario_config(
            name,
            dt=overrides.get("dt", 0.01),
            duration=overrides.get("duration", 60.0),
            kp=overrides.get("kp", 5.0),
            detector_gains=det,
            smiley_radius=overrides.get("radius", DEFAULT_SMILEY_RADIUS),
        )
    else:
        path = Path(args.config)
        name = path.stem
        cfg = _build_file_config(path, overrides)

    log = run_scenario(cfg)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        log.to_csv(out_dir / f"{name}.csv")
        _write_metrics(out_dir / f"{name}.metrics.txt", name, log, cfg.dt)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out_dir / (name + '.csv')}")
    print(f"wrote {out_dir / (name + '.metrics.txt')}")
    return 0


def cmd_compare(args) -> int:
    if len(args.logs) < 2:
        raise CliError("compare needs at least two CSV logs")
    logs = []
    for path in args.logs:
        try:
            logs.append((Path(path).name, SimLog.from_csv(path)))
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot read log {path}: {exc}") from None

    header = f"{'run':28s} {'mean_obs_m':>14s} {'max_obs_m':>14s} {'mean_act_m':>14s} {'max_act_m':>14s}"
    print(header)
    for name, log in logs:
        m = compute_metrics(log)
        print(
            f"{name:28s} {m.mean_obs:14.6e} {m.obs_errors.max():14.6e} "
            f"{m.mean_act:14.6e} {m.act_errors.max():14.6e}"
        )

    base_name, base = logs[0]
    print(f"\nobservable equivalence vs {base_name} (tol={args.tol:g}):")
    for name, log in logs[1:]:
        try:
            cmp = compare_runs(base, log)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        verdict = "yes" if cmp.undetectable_consistent(args.tol) else "no"
        print(
            f"{name:28s} max|qtilde diff| = {cmp.max_abs['q_tilde']:.3e}  "
            f"undetectable-consistent: {verdict}"
        )
    return 0


def cmd_check(args) -> int:
    try:
        pair = load_attack_pair(args.attack_file)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read attack file: {exc}") from None
    q0 = np.radians(_parse_q0_deg(args.q0_deg))
    report = check_conditions(pair, q0, tol=args.tol)
    print(f"label: {pair.label or '(none)'}")
    print(f"cond1 gain-cancellation residual: {report.cond1_residual:.17g}")
    print(f"cond2 fixed-point residual_rad:   {report.cond2_residual:.17g}")
    print(f"cond3 command-offset residual:    {report.cond3_residual:.17g}")
    print(f"verdict: {report.verdict} (tol={report.tolerance:g})")
    return 0 if report.undetectable else 1


def cmd_synthesize(args) -> int:
    try:
        S_x = load_matrix(args.sx_file)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read gain matrix: {exc}") from None
    q0 = np.radians(_parse_q0_deg(args.q0_deg))
    try:
        pair = synthesize_undetectable(S_x, q0)
    except SingularAttackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        raise CliError(str(exc)) from None
    try:
        save_attack_pair(args.out_file, pair, units=args.units)
    except OSError as exc:
        print(f"error: cannot write {args.out_file}: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out_file}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdiasim",
        description="Closed-loop simulator for affine false-data injection "
        "attacks on kinematic manipulator control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario or config file")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help=f"one of {', '.join(SCENARIO_NAMES)}")
    src.add_argument("--config", help="path to a run-config file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--dt", type=float, default=None, help="step size (s)")
    p_run.add_argument("--duration", type=float, default=None, help="horizon (s)")
    p_run.add_argument(
        "--set", action="append", metavar="KEY=VALUE",
        help=f"override one of {', '.join(_OVERRIDE_KEYS)}",
    )
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="tabulate and cross-check CSV logs")
    p_cmp.add_argument("logs", nargs="+", help="two or more run CSVs on one grid")
    p_cmp.add_argument("--tol", type=float, default=1e-9)
    p_cmp.set_defaults(func=cmd_compare)

    p_chk = sub.add_parser("check", help="score an attack-pair file")
    p_chk.add_argument("attack_file")
    p_chk.add_argument("--q0-deg", default="0,-10,10,0,0,0", dest="q0_deg")
    p_chk.add_argument("--tol", type=float, default=1e-9)
    p_chk.set_defaults(func=cmd_check)

    p_syn = sub.add_parser("synthesize", help="build an undetectable pair")
    p_syn.add_argument("sx_file", help="observable gain matrix (plain text)")
    p_syn.add_argument("out_file", help="attack-pair file to write")
    p_syn.add_argument("--q0-deg", default="0,-10,10,0,0,0", dest="q0_deg")
    p_syn.add_argument("--units", choices=("deg", "rad"), default="deg")
    p_syn.set_defaults(func=cmd_synthesize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
