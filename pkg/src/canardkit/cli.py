"""Command-line front end.

``canardkit simulate``, ``canardkit analyze {critical-set, bifurcations,
delays, transition}`` and ``canardkit perturb`` write CSV data plus a JSON
manifest that is enough to repeat the run (``--manifest FILE``).

Configuration is a flat key-value mapping layered as preset, then config
file, then flags. See the README for the key list.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import numpy as np

from . import __version__
from . import canard_formulas as cf
from . import models, slowfast
from .errors import (AssumptionError, BlowUpError, ConfigError, DivergenceError,
                     DomainError, IntegrationError, NoExitError)
from .numerics import IntegratorConfig, Section, Trajectory, integrate, integrate_stiff

OUTPUT_ENV = "CANARDKIT_OUTPUT_DIR"
DEFAULT_OUTPUT = "canardkit-out"

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_ASSUMPTION = 0, 2, 3, 4

RUN_KEYS = {"step", "max_time", "record_stride", "blowup", "t0"}
META_KEYS = {"system", "coords", "description", "command", "name", "i",
             "delta", "eta", "C", "k", "k2", "resolution", "slow.lo", "slow.hi",
             "branches", "alphas"}
PREFIXES = ("init.", "section.", "scale.")


# ------------------------------------------------------------ config

def load_presets():
    text = resources.files("canardkit").joinpath("data/presets.json").read_text()
    return json.loads(text)


def _coerce(value):
    if isinstance(value, (int, float)) or value is None:
        return value
    s = str(value).strip()
    try:
        v = float(s)
    except ValueError:
        return s
    return int(v) if s.lstrip("+-").isdigit() else v


def read_config_file(path):
    """Flat config: a JSON object, or ``key = value`` lines with ``#`` comments."""
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object of flat keys")
        return {k: _coerce(v) for k, v in data.items()}
    cfg = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        k, v = line.split("=", 1)
        cfg[k.strip()] = _coerce(v)
    return cfg


_FLAG_KEYS = {
    "system": "system", "coords": "coords", "epsilon": "epsilon", "alpha": "alpha",
    "a": "a", "b": "b", "a1": "a1", "b1": "b1", "d1": "d1", "a2": "a2", "b2": "b2",
    "d2": "d2", "x0": "init.x", "y0": "init.y", "z0": "init.z",
    "step": "step", "max_time": "max_time", "record_stride": "record_stride",
    "blowup": "blowup", "delta": "delta", "eta": "eta", "C": "C", "k": "k", "k2": "k2",
    "resolution": "resolution", "branches": "branches",
}


def resolve_config(args, index=None):
    """Merge preset, config file and flags into one flat mapping."""
    cfg = {}
    if getattr(args, "preset", None):
        presets = load_presets()["presets"]
        if args.preset not in presets:
            raise ConfigError(f"unknown preset {args.preset!r}; available: {', '.join(presets)}")
        cfg.update(presets[args.preset])
        cfg.setdefault("name", args.preset)
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    flags = {}
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr, None)
        if v is not None:
            flags[key] = v
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        flags[k.strip()] = _coerce(v)
    if index is not None:
        cfg["i"] = index
    i = cfg.get("i")
    for key in [k for k in cfg if k.startswith("scale.")]:
        if i is not None:
            cfg[key[len("scale."):]] = float(cfg[key]) * float(i)
        del cfg[key]
    cfg.update(flags)
    if getattr(args, "name", None):
        cfg["name"] = args.name
    if "system" not in cfg:
        raise ConfigError("no system given (use --system or --preset)")
    return cfg


def params_of(cfg):
    flat = {"system": cfg["system"]}
    for k, v in cfg.items():
        if k in RUN_KEYS or k in META_KEYS or k.startswith(PREFIXES):
            continue
        flat[k] = v
    return models.params_from_flat(flat)


def system_of(cfg):
    params = params_of(cfg)
    return models.make_system(cfg["system"], params, coords=cfg.get("coords", "raw"))


def integrator_of(cfg):
    try:
        return IntegratorConfig(
            step=float(cfg.get("step", 1e-4)), max_time=float(cfg.get("max_time", 10.0)),
            record_stride=int(cfg.get("record_stride", 1)),
            blowup=float(cfg.get("blowup", 1e8)), t0=float(cfg.get("t0", 0.0)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _physical_coords(system):
    return tuple(system.physical_coords or system.coords)


def initial_state(cfg, system):
    """Initial state in physical coordinates; unspecified entries default to 0.

    The Rossler block of the perturbed system comes from its parameters.
    """
    coords = _physical_coords(system)
    state = np.zeros(len(coords))
    for q, c in enumerate(coords):
        if f"init.{c}" in cfg:
            state[q] = float(cfg[f"init.{c}"])
    if system.name == "dtcp":
        if any(f"init.{c}" in cfg for c in "nuv"):
            raise ConfigError("set the Rossler initial state with rossler.n0, rossler.u0, rossler.v0")
        state[2:] = system.params.rossler_init
    extra = [k for k in cfg if k.startswith("init.") and k[5:] not in coords]
    if extra:
        raise ConfigError(f"unknown initial-state keys {extra} for coordinates {coords}")
    return state


def sections_of(cfg, system):
    idx = sorted({int(k.split(".")[1]) for k in cfg if k.startswith("section.")})
    out = []
    for i in idx:
        pre = f"section.{i}."
        axis = cfg.get(pre + "axis")
        if axis not in system.coords:
            raise ConfigError(f"section {i}: axis {axis!r} is not an integration coordinate "
                              f"of {system.name} ({', '.join(system.coords)})")
        try:
            out.append(Section(system.coords.index(axis), float(cfg[pre + "level"]),
                               direction=cfg.get(pre + "direction", "either"),
                               terminal=int(cfg.get(pre + "terminal", 0)),
                               name=f"{axis}={cfg[pre + 'level']}"))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"section {i}: {exc}") from exc
    return out


# ------------------------------------------------------------ running

def run_trajectory(cfg):
    """Integrate the configured system; returns a dict with the physical trajectory."""
    system = system_of(cfg)
    icfg = integrator_of(cfg)
    x0 = initial_state(cfg, system)
    sections = sections_of(cfg, system)
    result = {"system": system, "integrator": icfg, "initial_state": x0, "events": [],
              "status": "ok", "error": None}
    if cfg.get("coords") == "exterior":
        u0 = system.initial(x0)
        p = system.params

        def f(t, u):
            return system.field(u, t)

        n_out = int(round(icfg.max_time / (icfg.step * icfg.record_stride)))
        t_eval = icfg.t0 + np.linspace(0.0, icfg.max_time, n_out + 1)
        traj = integrate_stiff(f, u0, (icfg.t0, icfg.t0 + icfg.max_time), t_eval=t_eval,
                               jac=lambda t, u: models.jacobian_dtc_exterior(u, p),
                               coords=system.coords)
        result["trajectory"] = system.physical(traj)
        return result
    try:
        u0 = system.initial(x0)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        traj, events = integrate(system, u0, icfg, sections)
        result["status"] = "stopped" if traj.meta["stopped_by_event"] else "ok"
    except DivergenceError as exc:
        traj, events = exc.trajectory, exc.events
        result.update(status="diverged", error=str(exc))
    except IntegrationError as exc:
        traj, events = exc.trajectory, exc.events
        result.update(status="non-finite", error=str(exc))
    result["trajectory"] = system.physical(traj)
    result["events"] = events
    return result


def output_dir(args):
    d = getattr(args, "out", None) or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT
    os.makedirs(d, exist_ok=True)
    return d


def write_trajectory_csv(path, traj: Trajectory):
    data = np.column_stack([traj.t, traj.states])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=",".join(("t",) + tuple(traj.coords)), comments="")


def write_events_csv(path, events, coords):
    with open(path, "w") as fh:
        fh.write(",".join(("section", "t") + tuple(coords)) + "\n")
        for ev in events:
            vals = ",".join(f"{v:.17g}" for v in ev.state)
            fh.write(f"{ev.section_index},{ev.time:.17g},{vals}\n")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def write_manifest(path, command, cfg, result=None, outputs=(), wall=0.0, extra=None):
    man = {"tool": "canardkit", "version": __version__, "command": command,
           "config": cfg, "outputs": [os.path.basename(o) for o in outputs], "wall_time": wall}
    if result is not None:
        sysm = result["system"]
        man.update(system=sysm.name, coords=list(sysm.coords), params=sysm.param_dict(),
                   initial_state=result["initial_state"], integrator=result["integrator"].as_dict(),
                   status=result["status"])
    if extra:
        man.update(extra)
    write_json(path, man)


def _run_label(cfg):
    name = str(cfg.get("name") or cfg["system"])
    if "i" in cfg and cfg.get("i") is not None and "_i" not in name:
        name = f"{name}_i{cfg['i']}"
    return name


def _save_run(out, command, cfg, result, wall, extra=None):
    label = _run_label(cfg)
    traj = result["trajectory"]
    paths = [os.path.join(out, f"{label}.csv")]
    write_trajectory_csv(paths[0], traj)
    if result["events"]:
        paths.append(os.path.join(out, f"{label}.events.csv"))
        write_events_csv(paths[1], result["events"], traj.coords)
    mpath = os.path.join(out, f"{label}.manifest.json")
    write_manifest(mpath, command, cfg, result, paths, wall, extra)
    return paths, mpath


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


# ------------------------------------------------------------ commands

def cmd_simulate(args, cfgs=None):
    out = output_dir(args)
    if cfgs is None:
        indices = args.i if getattr(args, "i", None) else [None]
        cfgs = [resolve_config(args, i) for i in indices]

    def one(cfg):
        t0 = time.perf_counter()
        res = run_trajectory(cfg)
        wall = time.perf_counter() - t0
        paths, mpath = _save_run(out, "simulate", cfg, res, wall)
        return res, paths, mpath

    code = EXIT_OK
    for (res, paths, mpath) in _map(one, cfgs, getattr(args, "jobs", 1)):
        print(f"{res['status']}: {len(res['trajectory'])} samples -> {paths[0]}")
        if res["status"] in ("diverged", "non-finite"):
            print(f"error: {res['error']}", file=sys.stderr)
            code = EXIT_DIVERGED
    return code


def _analysis_system(cfg):
    cfg = dict(cfg)
    cfg.pop("coords", None)
    return system_of(cfg)


def cmd_critical_set(args, cfg=None):
    cfg = cfg or resolve_config(args)
    out = output_dir(args)
    t0 = time.perf_counter()
    system = _analysis_system(cfg)
    rng = None
    if "slow.lo" in cfg or "slow.hi" in cfg:
        rng = (float(cfg["slow.lo"]), float(cfg["slow.hi"]))
    branches = slowfast.critical_set(system, rng, int(cfg.get("resolution", 201)))
    label = _run_label(cfg)
    csv_path = os.path.join(out, f"{label}.critical_set.csv")
    with open(csv_path, "w") as fh:
        slowfast.branches_to_csv(branches, fh)
    summary = {"system": system.name, "branches": [
        {"label": b.label, "points": len(b), "classifications": sorted(set(b.classifications)),
         "slow_range": [float(b.slow_values.min()), float(b.slow_values.max())] if len(b) else []}
        for b in branches]}
    json_path = os.path.join(out, f"{label}.critical_set.json")
    write_json(json_path, summary)
    write_manifest(os.path.join(out, f"{label}.manifest.json"), "analyze critical-set", cfg,
                   outputs=[csv_path, json_path], wall=time.perf_counter() - t0)
    for b in summary["branches"]:
        print(f"{b['label']}: {b['points']} points, {', '.join(b['classifications'])}")
    return EXIT_OK


def cmd_bifurcations(args, cfg=None):
    cfg = cfg or resolve_config(args)
    out = output_dir(args)
    t0 = time.perf_counter()
    system = _analysis_system(cfg)
    extra = {}
    if system.name == "tritrophic":
        points = slowfast.find_bifurcations_tritrophic(system.params)
        z = {p.kind: p.slow_value for p in points}
        extra = {"z_T": z["saddle-node-transcritical"], "z_H": z["hopf"], "z_P": z["saddle-node"],
                 "ordered": z["saddle-node-transcritical"] < z["hopf"] < z["saddle-node"]}
    else:
        points = slowfast.line_transcritical_points(system)
    label = _run_label(cfg)
    path = os.path.join(out, f"{label}.bifurcations.json")
    text = slowfast.bifurcations_to_json(points, system=system.name, **extra)
    with open(path, "w") as fh:
        fh.write(text + "\n")
    write_manifest(os.path.join(out, f"{label}.manifest.json"), "analyze bifurcations", cfg,
                   outputs=[path], wall=time.perf_counter() - t0)
    print(text)
    return EXIT_OK


def cmd_delays(args, cfg=None):
    cfg = cfg or resolve_config(args)
    out = output_dir(args)
    t0 = time.perf_counter()
    res = run_trajectory(cfg)
    system = res["system"]
    delta = float(cfg.get("delta", 0.05))
    names = cfg.get("branches")
    if names is None:
        names = "x=-1,x=+1" if system.name in ("dtc", "dtcbb") else ""
    wanted = {n.strip() for n in str(names).split(",") if n.strip()}
    traj = res["trajectory"]
    slow = traj.states[:, system.slow[0]]
    span = (float(slow.min()) - 1.0, float(slow.max()) + 1.0)
    if system.name == "tritrophic":
        span = (0.0, max(span[1], 0.1))
    branches = [b for b in slowfast.critical_set(system, span, 401)
                if not wanted or b.label in wanted]
    report = {"delta": delta, "branches": {}}
    rows = []
    for b in branches:
        recs = slowfast.measure_delays(traj, b, delta)
        durs = [r.duration for r in recs if r.complete]
        report["branches"][b.label] = {
            "records": [r.as_dict() for r in recs],
            "complete_durations": durs,
            "nondecreasing": all(d1 >= d0 for d0, d1 in zip(durs, durs[1:])),
        }
        rows.extend(recs)
    report["nondecreasing"] = all(v["nondecreasing"] for v in report["branches"].values())
    label = _run_label(cfg)
    paths, _ = _save_run(out, "analyze delays", cfg, res, time.perf_counter() - t0)
    csv_path = os.path.join(out, f"{label}.delays.csv")
    with open(csv_path, "w") as fh:
        fh.write("branch,passage_index,entry_time,exit_time,duration,complete\n")
        for r in rows:
            fh.write(f"{r.branch},{r.passage_index},{r.entry_time:.17g},{r.exit_time:.17g},"
                     f"{r.duration:.17g},{int(r.complete)}\n")
    json_path = os.path.join(out, f"{label}.delays.json")
    write_json(json_path, report)
    write_manifest(os.path.join(out, f"{label}.manifest.json"), "analyze delays", cfg, res,
                   paths + [csv_path, json_path], time.perf_counter() - t0)
    for name, v in report["branches"].items():
        print(f"{name}: " + ", ".join(f"{d:.4g}" for d in v["complete_durations"])
              + ("  (nondecreasing)" if v["nondecreasing"] else "  (NOT nondecreasing)"))
    if res["status"] in ("diverged", "non-finite"):
        print(f"error: {res['error']}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def transition_comparison(cfg):
    """Formula, implicit-root and simulated passage through the saddle box."""
    system = _analysis_system(cfg)
    if system.name not in ("dtcbnl", "dtcbb_translated"):
        raise ConfigError("analyze transition needs --system dtcbnl or dtcbb_translated")
    try:
        b = float(system.params.b)
        setup = cf.TransitionSetup(b, float(cfg["delta"]), float(cfg["eta"]),
                                   float(system.params.epsilon))
        entry = cf.EntryParams(float(cfg["C"]), float(cfg["k"]))
    except KeyError as exc:
        raise ConfigError(f"analyze transition needs {exc.args[0]!r}") from exc
    T = cf.transition_time_exact(setup, entry)
    T_root = cf.transition_time_root(setup, entry)
    Y = cf.exit_value_exact(setup, entry)
    X0 = entry.x0(setup.epsilon)
    state0 = (X0, setup.delta)
    icfg = IntegratorConfig(step=float(cfg.get("step", 1e-6)), max_time=2.0 * T + 10.0,
                            record_stride=max(1, int(cfg.get("record_stride", 1000))))
    sigma_out = Section(0, setup.eta, "increasing", bounds={1: (0.0, setup.delta)})
    sigma_in = Section(1, setup.delta, "either", bounds={0: (0.0, setup.eta)})
    rec = slowfast.numeric_transition_map(system, state0, sigma_out, icfg, sigma_in)
    rows = [
        {"source": "formula", "T": T, "Y_out": Y},
        {"source": "root", "T": T_root, "Y_out": setup.delta * math.exp(-setup.epsilon * T_root)},
        {"source": "simulation", "T": rec.time, "Y_out": rec.exit[1]},
    ]
    for r in rows:
        r["T_rel_diff"] = abs(r["T"] - T) / T
        r["Y_rel_diff"] = abs(r["Y_out"] - Y) / setup.delta
    return {"system": system.name, "b": b, "delta": setup.delta, "eta": setup.eta,
            "epsilon": setup.epsilon, "C": entry.C, "k": entry.k, "X0": X0,
            "step": icfg.step, "T_leading": cf.transition_time_leading(setup, entry.k),
            "Y_out_leading": cf.exit_value_leading(setup, entry.k), "rows": rows}


def cmd_transition(args, cfg=None):
    cfg = cfg or resolve_config(args)
    out = output_dir(args)
    t0 = time.perf_counter()
    report = transition_comparison(cfg)
    label = _run_label(cfg)
    csv_path = os.path.join(out, f"{label}.transition.csv")
    with open(csv_path, "w") as fh:
        fh.write("source,T,Y_out,T_rel_diff,Y_rel_diff\n")
        for r in report["rows"]:
            fh.write(f"{r['source']},{r['T']:.17g},{r['Y_out']:.17g},"
                     f"{r['T_rel_diff']:.17g},{r['Y_rel_diff']:.17g}\n")
    json_path = os.path.join(out, f"{label}.transition.json")
    write_json(json_path, report)
    write_manifest(os.path.join(out, f"{label}.manifest.json"), "analyze transition", cfg,
                   outputs=[csv_path, json_path], wall=time.perf_counter() - t0)
    print(f"{'source':<12}{'T':>22}{'Y_out':>22}{'rel dT':>12}")
    for r in report["rows"]:
        print(f"{r['source']:<12}{r['T']:>22.15g}{r['Y_out']:>22.15g}{r['T_rel_diff']:>12.2e}")
    return EXIT_OK


def perturbation_report(result):
    """Strip exit, winding count at exit and the largest forcing ``alpha |n|``."""
    traj = result["trajectory"]
    p = result["system"].params
    exits = [ev for ev in result["events"] if abs(abs(ev.state[0]) - 1.0) < 1e-9]
    t_exit = exits[0].time if exits else None
    part = traj.until(t_exit) if t_exit is not None else traj
    return {"alpha": p.alpha, "exited": t_exit is not None, "exit_time": t_exit,
            "oscillations_at_exit": slowfast.count_oscillations(part, (0.0, 0.0)),
            "winding_turns": slowfast.winding_angle(part, (0.0, 0.0)) / (2.0 * math.pi),
            "max_perturbation": float(p.alpha * np.max(np.abs(part["n"]))),
            "status": result["status"]}


def cmd_perturb(args, cfgs=None):
    out = output_dir(args)
    if cfgs is None:
        if not getattr(args, "preset", None) and not getattr(args, "config", None):
            args.preset = "fig3"
        base = resolve_config(args)
        if base["system"] != "dtcp":
            raise ConfigError("perturb runs the Rossler-perturbed system (system = dtcp)")
        alphas = args.alphas if getattr(args, "alphas", None) else [float(base.get("alpha", 1e-4))]
        cfgs = []
        for a in alphas:
            c = dict(base, alpha=float(a))
            if len(alphas) > 1:
                c["name"] = f"{base.get('name', 'dtcp')}_alpha{a:g}"
            cfgs.append(c)
        if not any(k.startswith("section.") and k.endswith(".level") for k in base):
            for c in cfgs:
                c.update({"section.0.axis": "x", "section.0.level": 1.0,
                          "section.0.direction": "increasing", "section.0.terminal": 1,
                          "section.1.axis": "x", "section.1.level": -1.0,
                          "section.1.direction": "decreasing", "section.1.terminal": 1})

    def one(cfg):
        t0 = time.perf_counter()
        res = run_trajectory(cfg)
        rep = perturbation_report(res)
        _save_run(out, "perturb", cfg, res, time.perf_counter() - t0, {"report": rep})
        return rep

    reports = _map(one, cfgs, getattr(args, "jobs", 1))
    name = str(cfgs[0].get("name", "dtcp")).split("_alpha")[0]
    write_json(os.path.join(out, f"{name}.perturb.json"), {"runs": reports})
    with open(os.path.join(out, f"{name}.perturb.csv"), "w") as fh:
        fh.write("alpha,exited,exit_time,oscillations_at_exit,max_perturbation\n")
        for r in reports:
            et = "" if r["exit_time"] is None else f"{r['exit_time']:.17g}"
            fh.write(f"{r['alpha']:.17g},{int(r['exited'])},{et},{r['oscillations_at_exit']},"
                     f"{r['max_perturbation']:.17g}\n")
    for r in reports:
        where = f"exit at t={r['exit_time']:.6g}" if r["exited"] else "no strip exit"
        print(f"alpha={r['alpha']:g}: {where}, oscillations={r['oscillations_at_exit']}, "
              f"max |alpha n|={r['max_perturbation']:.3g}")
    return EXIT_DIVERGED if any(r["status"] in ("diverged", "non-finite") for r in reports) else EXIT_OK


_ANALYZE = {"critical-set": cmd_critical_set, "bifurcations": cmd_bifurcations,
            "delays": cmd_delays, "transition": cmd_transition}


def cmd_manifest(args):
    """Repeat the run recorded in a manifest."""
    with open(args.manifest) as fh:
        man = json.load(fh)
    cfg = man["config"]
    command = man["command"]
    if command == "simulate":
        return cmd_simulate(args, [cfg])
    if command == "perturb":
        return cmd_perturb(args, [cfg])
    if command.startswith("analyze "):
        return _ANALYZE[command.split(" ", 1)[1]](args, cfg)
    raise ConfigError(f"cannot replay command {command!r}")


# ------------------------------------------------------------ parser

def _common(p):
    p.add_argument("--preset", help="named preset from the bundled presets file")
    p.add_argument("--config", help="flat key = value (or JSON) config file")
    p.add_argument("--system", choices=models.SYSTEM_NAMES)
    p.add_argument("--coords", choices=("raw", "strip", "compact", "exterior"))
    for name in ("epsilon", "alpha", "a", "b", "a1", "b1", "d1", "a2", "b2", "d2",
                 "x0", "y0", "z0", "step", "blowup", "delta", "eta", "C", "k", "k2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--max-time", dest="max_time", type=float)
    p.add_argument("--record-stride", dest="record_stride", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--branches", help="comma-separated branch labels for delay analysis")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="any flat config key, e.g. rossler.c=14")
    p.add_argument("--name", help="basename of the output files")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")


def build_parser():
    parser = argparse.ArgumentParser(prog="canardkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"canardkit {__version__}")
    parser.add_argument("--manifest", help="repeat the run recorded in a manifest JSON")
    parser.add_argument("--out", help="output directory for --manifest replays")
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="integrate a system and write its trajectory")
    _common(sim)
    sim.add_argument("--i", type=int, nargs="+", help="family index (fig1: start at (0.05 i, 1))")
    sim.set_defaults(func=cmd_simulate)

    ana = sub.add_parser("analyze", help="critical sets, bifurcations, delays, transitions")
    asub = ana.add_subparsers(dest="analysis", required=True)
    for name, fn in _ANALYZE.items():
        a = asub.add_parser(name)
        _common(a)
        a.set_defaults(func=fn)

    per = sub.add_parser("perturb", help="Rossler-perturbed strip experiment")
    _common(per)
    per.add_argument("--alphas", type=float, nargs="+", help="sweep over perturbation sizes")
    per.set_defaults(func=cmd_perturb)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.manifest:
            return cmd_manifest(args)
        if not getattr(args, "func", None):
            parser.print_help()
            return EXIT_CONFIG
        return args.func(args)
    except AssumptionError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (DivergenceError, IntegrationError, NoExitError, BlowUpError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, DomainError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
