"""Command-line front end.

Every run is driven by a flat key=value config with section headers
(INI style).  Flags override config-file values, which override built-in
defaults; the fully-resolved config is written next to each output file
(``<out>.cfg``) so any result can be regenerated byte-identically with
``--config``.  Numbers in output files carry 17 significant digits and
line endings are always ``\\n``, so identical configs give identical bytes.

Exit codes: 0 success, 2 config error, 3 numerical divergence,
4 experiment-condition failure (e.g. a stabilization target that is not an
equilibrium).
"""

import argparse
import configparser
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .analysis import (
    LyapunovConfig,
    classify,
    equilibria,
    lyapunov_spectrum,
)
from .control import FeedbackGains, NotAnEquilibriumError, stabilize_experiment, validate_gains
from .integrators import DivergenceError, IntegrationConfig, integrate
from .models import ModelKind, SystemParams, make_field
from .sync import (
    SyncGains,
    active_experiment,
    adaptive_experiment,
    conditional_lyapunov_spectrum,
    sync_condition_check,
)

__all__ = ["main", "entrypoint", "run_config_file"]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config plumbing


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_vec(values) -> str:
    return ",".join(_fmt(v) for v in values)


def _parse_vec(text: str, n: int, what: str) -> list:
    parts = [t for t in text.split(",") if t.strip() != ""]
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [float(t) for t in parts]
    except ValueError as exc:
        raise ConfigError(f"bad number in {what}: {exc}") from exc


_DEFAULTS = {
    "model": {"kind": "linear", "p": _fmt(2.9851), "q": _fmt(3.0), "r": _fmt(2.0), "d": _fmt(0.0)},
    "integration": {
        "step": _fmt(0.005),
        "t_end": _fmt(500.0),
        "transient": _fmt(0.0),
        "record_every": "1",
        "renorm_interval": _fmt(1.0),
    },
    "initial": {
        "x0": "1.0023,1.0589,0.6503",
        "x0b": "",
        "response_x0": "1,1.414",
        "estimates_x0": "3.9,4",
    },
    "control": {
        "gains": "",
        "target": "",
        "update_law": "lyapunov",
        "coupled": "false",
    },
    "output": {"out": "", "plot": "false"},
}

_COMMAND_DEFAULTS = {
    "lyapunov": {"integration": {"t_end": _fmt(5000.0), "transient": _fmt(200.0)}},
    "stabilize": {"control": {"gains": "10,5,5", "target": ""}, "integration": {"t_end": _fmt(200.0)}},
    "sync-active": {"control": {"gains": "0.000024,1.345"}, "integration": {"t_end": _fmt(100.0)}},
    "sync-adaptive": {"control": {"gains": "0.0038,2"}, "integration": {"t_end": _fmt(500.0)}},
}


def _base_config(command: str) -> dict:
    cfg = {"run": {"command": command}}
    for sec, keys in _DEFAULTS.items():
        cfg[sec] = dict(keys)
    for sec, keys in _COMMAND_DEFAULTS.get(command, {}).items():
        cfg[sec].update(keys)
    return cfg


def _load_config_file(path: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    return {sec: dict(cp[sec]) for sec in cp.sections()}


def _merge(cfg: dict, overlay: dict) -> None:
    for sec, keys in overlay.items():
        cfg.setdefault(sec, {}).update(keys)


def write_config(path: str, cfg: dict) -> None:
    cp = configparser.ConfigParser(interpolation=None)
    for sec, keys in cfg.items():
        cp[sec] = {k: v for k, v in keys.items() if v != ""}
    with open(path, "w", newline="\n") as fh:
        cp.write(fh)


def _resolve(args: argparse.Namespace, command: str) -> dict:
    cfg = _base_config(command)
    if args.config:
        _merge(cfg, _load_config_file(args.config))
        cfg["run"]["command"] = command
    flag_map = [
        ("model_kind", "model", "kind"),
        ("step", "integration", "step"),
        ("t_end", "integration", "t_end"),
        ("transient", "integration", "transient"),
        ("record_every", "integration", "record_every"),
        ("renorm_every", "integration", "renorm_interval"),
        ("x0", "initial", "x0"),
        ("x0b", "initial", "x0b"),
        ("response_x0", "initial", "response_x0"),
        ("estimates_x0", "initial", "estimates_x0"),
        ("gains", "control", "gains"),
        ("target", "control", "target"),
        ("update_law", "control", "update_law"),
        ("out", "output", "out"),
    ]
    for attr, sec, key in flag_map:
        val = getattr(args, attr, None)
        if val is not None:
            cfg[sec][key] = str(val)
    if getattr(args, "params", None) is not None:
        parts = [t for t in args.params.split(",") if t.strip() != ""]
        if len(parts) not in (3, 4):
            raise ConfigError(f"--params needs p,q,r[,d], got {args.params!r}")
        for name, value in zip(("p", "q", "r", "d"), parts):
            try:
                cfg["model"][name] = _fmt(float(value))
            except ValueError as exc:
                raise ConfigError(f"bad number in --params: {exc}") from exc
    if getattr(args, "coupled", False):
        cfg["control"]["coupled"] = "true"
    if getattr(args, "plot", False):
        cfg["output"]["plot"] = "true"
    if not cfg["output"]["out"]:
        raise ConfigError("an output path is required (--out or output.out in the config)")
    return cfg


def _cfg_float(cfg, sec, key) -> float:
    try:
        return float(cfg[sec][key])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad or missing [{sec}] {key}") from exc


def _cfg_bool(cfg, sec, key) -> bool:
    text = cfg.get(sec, {}).get(key, "false").strip().lower()
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off", ""):
        return False
    raise ConfigError(f"bad boolean for [{sec}] {key}: {text!r}")


def _params_from(cfg: dict) -> SystemParams:
    try:
        return SystemParams(
            p=_cfg_float(cfg, "model", "p"),
            q=_cfg_float(cfg, "model", "q"),
            r=_cfg_float(cfg, "model", "r"),
            d=_cfg_float(cfg, "model", "d"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _kind_from(cfg: dict) -> ModelKind:
    token = cfg["model"]["kind"]
    try:
        return ModelKind(token)
    except ValueError as exc:
        raise ConfigError(f"unknown model kind {token!r} (use linear|ht2|ht3)") from exc


def _integration_from(cfg: dict) -> IntegrationConfig:
    try:
        return IntegrationConfig(
            step=_cfg_float(cfg, "integration", "step"),
            t_end=_cfg_float(cfg, "integration", "t_end"),
            record_every=int(cfg["integration"]["record_every"]),
            transient=_cfg_float(cfg, "integration", "transient"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _lyapunov_config_from(cfg: dict) -> LyapunovConfig:
    try:
        return LyapunovConfig(
            step=_cfg_float(cfg, "integration", "step"),
            t_total=_cfg_float(cfg, "integration", "t_end"),
            transient=_cfg_float(cfg, "integration", "transient"),
            renorm_interval=_cfg_float(cfg, "integration", "renorm_interval"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output helpers


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sidecar(path: str) -> str:
    return path + ".cfg"


def _plot_base(path: str) -> str:
    stem, _ = os.path.splitext(path)
    return stem


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit_warnings(caught) -> None:
    for w in caught:
        _diag(f"warning: {w.message}")


# ---------------------------------------------------------------------------
# commands


def _cmd_simulate(cfg: dict) -> int:
    params = _params_from(cfg)
    kind = _kind_from(cfg)
    icfg = _integration_from(cfg)
    x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
    out = cfg["output"]["out"]
    meta = {"model": kind.value, "params": params, "config": icfg}
    traj = integrate(make_field(kind, params), x0, icfg, meta=meta)
    _write_csv(out, ["t", "x1", "x2", "x3"], np.column_stack([traj.times, traj.states]))
    print(f"wrote {out} ({len(traj)} rows)")
    pair = None
    if cfg["initial"]["x0b"]:
        x0b = _parse_vec(cfg["initial"]["x0b"], 3, "x0b")
        traj_b = integrate(make_field(kind, params), x0b, icfg, meta=meta)
        stem, ext = os.path.splitext(out)
        out_b = f"{stem}_b{ext or '.csv'}"
        _write_csv(out_b, ["t", "x1", "x2", "x3"], np.column_stack([traj_b.times, traj_b.states]))
        print(f"wrote {out_b} ({len(traj_b)} rows)")
        pair = traj_b.states
        sep = np.sqrt(((traj.states - traj_b.states) ** 2).sum(axis=1))
        over = np.nonzero(sep > 0.1)[0]
        if over.size:
            print(f"separation exceeds 0.1 at t={_fmt(traj.times[over[0]])}")
        else:
            print("separation never exceeds 0.1 in this run")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_timeseries(traj.times, traj.states, base + "_timeseries.png", pair=pair)
        plots.save_attractor(traj.states, base + "_attractor.png")
        print(f"wrote {base}_timeseries.png, {base}_attractor.png")
    return 0


def _cmd_lyapunov(cfg: dict) -> int:
    params = _params_from(cfg)
    kind = _kind_from(cfg)
    lcfg = _lyapunov_config_from(cfg)
    out = cfg["output"]["out"]
    coupled = _cfg_bool(cfg, "control", "coupled")
    if coupled:
        if kind is not ModelKind.LINEAR:
            raise ConfigError("--coupled applies to the linear model only")
        gains_v = _parse_vec(cfg["control"]["gains"] or "0.000024,1.345", 2, "gains")
        try:
            gains = SyncGains(*gains_v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
        resp = _parse_vec(cfg["initial"]["response_x0"], 2, "response_x0")
        spec = conditional_lyapunov_spectrum(params, gains, np.array(x0 + resp), lcfg)
    else:
        x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
        spec = lyapunov_spectrum(kind, params, x0, lcfg)
    k = spec.history.shape[1]
    times = (np.arange(len(spec.history)) + 1.0) * lcfg.renorm_interval
    _write_csv(out, ["t"] + [f"L{i+1}" for i in range(k)], np.column_stack([times, spec.history]))
    summary = " ".join(f"L{i+1}={_fmt(v)}" for i, v in enumerate(spec.exponents))
    print(summary)
    if spec.transverse is not None:
        print(
            f"transverse_e2={_fmt(spec.transverse[0])} transverse_e3={_fmt(spec.transverse[1])}"
        )
    print(f"wrote {out} ({len(spec.history)} rows)")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_spectrum_history(times, spec.history, base + "_spectrum.png")
        print(f"wrote {base}_spectrum.png")
    return 0


def _cmd_equilibria(cfg: dict) -> int:
    params = _params_from(cfg)
    out = cfg["output"]["out"]
    points = equilibria(params)
    labels = ["origin", "axial", "planar", "prey-negative", "planar-negative"]
    reports = [classify(params, pt) for pt in points]
    rows = []
    for label, pt, rep in zip(labels, points, reports):
        feasible = bool(np.all(pt >= 0.0))
        eig_cols = []
        for z in rep.eigenvalues:
            eig_cols.extend([z.real, z.imag])
        rows.append([pt[0], pt[1], pt[2], 1.0 if feasible else 0.0, *rep.char_poly, *eig_cols])
        print(
            f"{label}: ({_fmt(pt[0])}, {_fmt(pt[1])}, {_fmt(pt[2])})"
            f" feasible={feasible} classification={rep.classification.value}"
        )
        print(
            "  char_poly: "
            + " ".join(f"c{2-i}={_fmt(c)}" for i, c in enumerate(rep.char_poly))
        )
        print(
            "  eigenvalues: "
            + ", ".join(f"{_fmt(z.real)}{z.imag:+.6g}j" for z in rep.eigenvalues)
        )
    header = (
        ["x1", "x2", "x3", "feasible", "c2", "c1", "c0"]
        + [f"{part}{i}" for i in (1, 2, 3) for part in ("re", "im")]
    )
    _write_csv(out, header, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_eigenvalue_map(reports, base + "_eigenvalues.png")
        print(f"wrote {base}_eigenvalues.png")
    return 0


def _require_linear(cfg: dict, command: str) -> None:
    if _kind_from(cfg) is not ModelKind.LINEAR:
        raise ConfigError(f"{command} is defined for the linear model only")


def _cmd_stabilize(cfg: dict) -> int:
    _require_linear(cfg, "stabilize")
    params = _params_from(cfg)
    icfg = _integration_from(cfg)
    x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
    gains_v = _parse_vec(cfg["control"]["gains"], 3, "gains")
    try:
        gains = FeedbackGains(*gains_v)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg["control"]["target"]:
        target = np.array(_parse_vec(cfg["control"]["target"], 3, "target"))
    else:
        target = np.array([1.0, 1.0 + params.r, 0.0])
    out = cfg["output"]["out"]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = stabilize_experiment(params, gains, target, x0, icfg)
    _emit_warnings(caught)
    traj = result.trajectory
    _write_csv(
        out,
        ["t", "x1", "x2", "x3", "err_norm"],
        np.column_stack([traj.times, traj.states, result.error_norms]),
    )
    report = result.gain_report
    print(f"gain_inequalities_ok={str(report.ok).lower()} margins={_fmt_vec(report.margins)}")
    if result.time_to_tolerance is None:
        print("not converged (error never dropped below tolerance)")
    else:
        print(f"error<1e-06 first at t={_fmt(result.time_to_tolerance)}")
    print(f"final_error={_fmt(result.final_error)}")
    print(f"wrote {out} ({len(traj)} rows)")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_error_decay(traj.times, [result.error_norms], base + "_convergence.png", ["|x-target|"])
        print(f"wrote {base}_convergence.png")
    return 0


def _cmd_sync_active(cfg: dict) -> int:
    _require_linear(cfg, "sync-active")
    params = _params_from(cfg)
    icfg = _integration_from(cfg)
    x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
    resp = _parse_vec(cfg["initial"]["response_x0"], 2, "response_x0")
    gains_v = _parse_vec(cfg["control"]["gains"], 2, "gains")
    try:
        gains = SyncGains(*gains_v)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = cfg["output"]["out"]
    result = active_experiment(params, gains, np.array(x0 + resp), icfg)
    traj = result.trajectory
    condition = sync_condition_check(
        params, gains, type(traj)(times=traj.times, states=traj.states[:, :3])
    )
    if not condition.ok:
        _diag(
            "warning: sufficient sync condition fails on this orbit "
            f"(margins {_fmt(condition.margin_e2)}, {_fmt(condition.margin_e3)});"
            " synchronization is not guaranteed"
        )
    _write_csv(
        out,
        ["t", "x1d", "x2d", "x3d", "x2r", "x3r", "e2", "e3"],
        np.column_stack([traj.times, traj.states, result.e2, result.e3]),
    )
    print(
        f"condition_ok={str(condition.ok).lower()}"
        f" margins={_fmt(condition.margin_e2)},{_fmt(condition.margin_e3)}"
    )
    print(f"final_errors={_fmt(result.final_errors[0])},{_fmt(result.final_errors[1])}")
    print(f"wrote {out} ({len(traj)} rows)")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_error_decay(traj.times, [result.e2, result.e3], base + "_errors.png", ["e2", "e3"])
        print(f"wrote {base}_errors.png")
    return 0


def _cmd_sync_adaptive(cfg: dict) -> int:
    _require_linear(cfg, "sync-adaptive")
    params = _params_from(cfg)
    icfg = _integration_from(cfg)
    x0 = _parse_vec(cfg["initial"]["x0"], 3, "x0")
    resp = _parse_vec(cfg["initial"]["response_x0"], 2, "response_x0")
    est = _parse_vec(cfg["initial"]["estimates_x0"], 2, "estimates_x0")
    gains_v = _parse_vec(cfg["control"]["gains"], 2, "gains")
    law = cfg["control"]["update_law"]
    try:
        gains = SyncGains(*gains_v)
        result = adaptive_experiment(params, gains, np.array(x0 + resp + est), icfg, update_law=law)
    except DivergenceError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    traj = result.trajectory
    out = cfg["output"]["out"]
    _write_csv(
        out,
        ["t", "x1d", "x2d", "x3d", "x2r", "x3r", "e2", "e3", "P", "Q", "Lyap"],
        np.column_stack(
            [
                traj.times,
                traj.states[:, :5],
                result.e2,
                result.e3,
                result.p_estimate,
                result.q_estimate,
                result.lyapunov,
            ]
        ),
    )
    print(f"synchronized={str(result.synchronized).lower()}")
    print(f"final_errors={_fmt(result.final_errors[0])},{_fmt(result.final_errors[1])}")
    print(f"wrote {out} ({len(traj)} rows)")
    write_config(_sidecar(out), cfg)
    if _cfg_bool(cfg, "output", "plot"):
        from . import plots

        base = _plot_base(out)
        plots.save_adaptive_report(
            traj.times,
            result.e2,
            result.e3,
            result.p_estimate,
            result.q_estimate,
            result.lyapunov,
            base + "_report.png",
        )
        print(f"wrote {base}_report.png")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "lyapunov": _cmd_lyapunov,
    "equilibria": _cmd_equilibria,
    "stabilize": _cmd_stabilize,
    "sync-active": _cmd_sync_active,
    "sync-adaptive": _cmd_sync_adaptive,
}


def run_config_file(path: str) -> int:
    """Execute one run fully described by a config file (sweep worker).

    Returns the same exit codes as ``main`` so concurrent failures surface as
    codes, not tracebacks.
    """
    try:
        cfg_file = _load_config_file(path)
        command = cfg_file.get("run", {}).get("command", "")
        if command not in _COMMANDS:
            raise ConfigError(f"config {path!r} has no valid [run] command")
        cfg = _base_config(command)
        _merge(cfg, cfg_file)
        if not cfg["output"]["out"]:
            raise ConfigError(f"config {path!r} does not set [output] out")
        return _COMMANDS[command](cfg)
    except NotAnEquilibriumError as exc:
        _diag(f"error ({path}): {exc}")
        return 4
    except DivergenceError as exc:
        _diag(f"error ({path}): {exc}")
        return 3
    except (ConfigError, ValueError) as exc:
        _diag(f"error ({path}): {exc}")
        return 2


def _cmd_sweep(args: argparse.Namespace) -> int:
    jobs = args.jobs or min(len(args.configs), os.cpu_count() or 1)
    rc = 0
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for path, result in zip(args.configs, pool.map(run_config_file, args.configs)):
            print(f"{path}: {'ok' if result == 0 else f'exit {result}'}")
            rc = rc or result
    return rc


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub: argparse.ArgumentParser, sync: bool = False) -> None:
    sub.add_argument("--params", help="model constants p,q,r[,d]")
    sub.add_argument("--model", dest="model_kind", choices=["linear", "ht2", "ht3"],
                     help="functional-response variant")
    sub.add_argument("--x0", help="initial state a,b,c")
    sub.add_argument("--step", type=float, help="integration step size h")
    sub.add_argument("--t-end", dest="t_end", type=float, help="integration horizon")
    sub.add_argument("--transient", type=float, help="time discarded before recording")
    sub.add_argument("--record-every", dest="record_every", type=int,
                     help="record every N-th step")
    sub.add_argument("--out", help="output CSV path")
    sub.add_argument("--config", help="config file supplying defaults for this run")
    sub.add_argument("--plot", action="store_true", default=None,
                     help="also render figures next to the CSV")
    if sync:
        sub.add_argument("--gains", help="feedback gains m1,m2[,m3]")
        sub.add_argument("--response-x0", dest="response_x0", help="response initial state a,b")
        sub.add_argument("--estimates-x0", dest="estimates_x0",
                         help="initial parameter estimates P0,Q0")
        sub.add_argument("--update-law", dest="update_law",
                         choices=["lyapunov", "paper-literal"],
                         help="estimate update law: energy-consistent form, or the "
                              "originally published one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glvsync",
        description="Simulate, analyze, stabilize and synchronize the 3-species "
                    "generalized Lotka-Volterra system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a model and write t,x1,x2,x3")
    _add_common(p)
    p.add_argument("--x0b", help="optional second initial state for a paired run")

    p = sub.add_parser("lyapunov", help="Lyapunov spectrum (running estimates + summary)")
    _add_common(p, sync=True)
    p.add_argument("--renorm-every", dest="renorm_every", type=float,
                   help="time between tangent reorthonormalizations")
    p.add_argument("--coupled", action="store_true", default=None,
                   help="5-D drive-response spectrum instead of the free model")

    p = sub.add_parser("equilibria", help="closed-form equilibria with stability reports")
    _add_common(p)

    p = sub.add_parser("stabilize", help="feedback stabilization experiment")
    _add_common(p, sync=True)
    p.add_argument("--target", help="equilibrium to stabilize (default: axial point)")

    p = sub.add_parser("sync-active", help="active-control synchronization experiment")
    _add_common(p, sync=True)

    p = sub.add_parser("sync-adaptive", help="adaptive synchronization with estimates")
    _add_common(p, sync=True)

    p = sub.add_parser("sweep", help="run several config files concurrently")
    p.add_argument("configs", nargs="+", help="config files to execute")
    p.add_argument("--jobs", type=int, help="max concurrent runs")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            return _cmd_sweep(args)
        cfg = _resolve(args, args.command)
        return _COMMANDS[args.command](cfg)
    except NotAnEquilibriumError as exc:
        _diag(f"error: {exc}")
        return 4
    except DivergenceError as exc:
        _diag(f"error: {exc}")
        return 3
    except (ConfigError, ValueError) as exc:
        _diag(f"error: {exc}")
        return 2


def entrypoint() -> None:
    sys.exit(main())
