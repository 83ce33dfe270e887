"""Command-line front end: ``epred run | verify | sweep <config.json>``.

Exit codes: 0 success, 1 verification failure, 2 configuration error (nothing
is written), 3 numerical abort.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .algebra import AlgElem, DualElem
from .dynamics import (
    EquationFamily,
    IntegrationAbort,
    advection_residual,
    conservation_report,
    ep_operator,
    ep_residual,
    integrate,
)
from .invariance import (
    CheckReport,
    HPath,
    PathFamily,
    Schedule,
    check_derivative_equivariance,
    check_lagrangian_invariance,
    check_residual_equivariance,
    check_solution_transport,
)
from .lagrangian import fd_d_a, fd_d_xi
from .systems import SYSTEM_NAMES, build_system, negative_controls, reference_residual

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

CHECKS = ("lagrangian_invariance", "derivative_equivariance", "residual_equivariance",
          "solution_transport", "reference_match", "conservation")

REFERENCE_TOL = 1e-8
FD_ORACLE_TOL = 1e-6
RESIDUAL_STEP = 1e-3
CURVE_TIMES = (0.5, 1.0, 1.5, 2.0)

# drift tolerances of the conservation check (relative unless the reference value is zero)
CONSERVATION_TOL = {
    "energy": 1e-7,
    "gamma_norm_sq": 1e-9,
    "gamma_dot_mu": 1e-9,
    "sphere_norm": 1e-10,
    "spin_compatibility": 1e-12,
    "mu_mean": 1e-12,
}
# the density inertia operator does not telescope exactly; its mean is bounded
# by the kernel-drift abort threshold instead
DENSITY_MEAN_TOL = 1e-6
SPHERE_STEP_TOL = 1e-12


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


def _strict(section: dict, where: str, required=(), optional=()):
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = set(required) | set(optional)
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    missing = [k for k in required if k not in section]
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {', '.join(missing)}")


def _number(v, where, positive=True) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where} must be a finite number")
    if positive and v <= 0:
        raise ConfigError(f"{where} must be positive")
    return float(v)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return validate_config(cfg)


def validate_config(cfg) -> dict:
    _strict(cfg, "config", required=("system", "output"),
            optional=("params", "time", "init", "verify"))
    if cfg["system"] not in SYSTEM_NAMES:
        raise ConfigError(f"unknown system {cfg['system']!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    try:
        build_system(cfg["system"], params)
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc

    if "time" in cfg:
        _strict(cfg["time"], "time", required=("T", "dt"))
        T = _number(cfg["time"]["T"], "time.T")
        dt = _number(cfg["time"]["dt"], "time.dt")
        if not dt < T:
            raise ConfigError("time.dt must be smaller than time.T")
        steps = round(T / dt)
        if not math.isclose(steps * dt, T, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigError("time.T must be an integer multiple of time.dt")

    init = cfg.get("init", "default")
    if isinstance(init, str):
        if init not in ("default", "zero"):
            raise ConfigError("init preset must be 'default' or 'zero'")
    else:
        _strict(init, "init", required=("xi",), optional=("a",))

    out = cfg["output"]
    _strict(out, "output", required=("dir",), optional=("trajectory_format", "report"))
    if not isinstance(out["dir"], str) or not out["dir"]:
        raise ConfigError("output.dir must be a non-empty string")
    if out.get("trajectory_format", "csv") not in ("csv", "json"):
        raise ConfigError("output.trajectory_format must be 'csv' or 'json'")
    if out.get("report", "json") != "json":
        raise ConfigError("output.report must be 'json'")

    if "verify" in cfg:
        v = cfg["verify"]
        _strict(v, "verify", required=("checks",),
                optional=("h_path", "seed", "samples", "curves", "controls"))
        if not isinstance(v["checks"], list) or not v["checks"]:
            raise ConfigError("verify.checks must be a non-empty list")
        for c in v["checks"]:
            if c not in CHECKS:
                raise ConfigError(f"unknown check {c!r}")
        seed = v.get("seed", 42)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError("verify.seed must be an unsigned 64-bit integer")
        for key in ("samples", "curves"):
            n = v.get(key, 1)
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ConfigError(f"verify.{key} must be a positive integer")
        if not isinstance(v.get("controls", False), bool):
            raise ConfigError("verify.controls must be a boolean")
        if "h_path" in v:
            parse_h_path(v["h_path"])
    return cfg


_PATH_KEYS = ("family", "schedule", "theta0", "omega", "eps", "freq", "axis", "wavenumber",
              "residual_mode", "expected_fail")


def parse_h_path(entry) -> tuple[HPath, str, bool]:
    """``(path, residual mode, expected_fail)`` from a config ``h_path`` object."""
    _strict(entry, "verify.h_path", required=("family",), optional=_PATH_KEYS[1:])
    try:
        family = PathFamily(entry["family"])
        schedule = Schedule(entry.get("schedule", "constant"))
    except ValueError as exc:
        raise ConfigError(f"verify.h_path: {exc}") from exc
    kw = {k: _number(entry[k], f"verify.h_path.{k}", positive=False)
          for k in ("theta0", "omega", "eps", "freq") if k in entry}
    axis = entry.get("axis", [0.0, 0.0, 1.0])
    if not (isinstance(axis, list) and len(axis) == 3):
        raise ConfigError("verify.h_path.axis must be a 3-vector")
    axis = tuple(_number(a, "verify.h_path.axis", positive=False) for a in axis)
    if not any(axis):
        raise ConfigError("verify.h_path.axis must be nonzero")
    mode = entry.get("residual_mode", "evaluate")
    if mode not in ("evaluate", "transport"):
        raise ConfigError("verify.h_path.residual_mode must be 'evaluate' or 'transport'")
    expected_fail = entry.get("expected_fail", False)
    if not isinstance(expected_fail, bool):
        raise ConfigError("verify.h_path.expected_fail must be a boolean")
    wn = entry.get("wavenumber", 1)
    if isinstance(wn, bool) or not isinstance(wn, int) or wn < 1:
        raise ConfigError("verify.h_path.wavenumber must be a positive integer")
    return HPath(family, schedule, axis=axis, mode=wn, **kw), mode, expected_fail


def _system(cfg, overrides=None):
    params = dict(cfg.get("params", {}))
    params.update(overrides or {})
    return build_system(cfg["system"], params)


def _init(system, entry):
    if entry == "default":
        return system.default_init()
    if entry == "zero":
        return system.zero_init()
    try:
        return system.make_init(entry["xi"], entry.get("a"))
    except ValueError as exc:
        raise ConfigError(f"init: {exc}") from exc


def _time(cfg, system) -> tuple[float, float]:
    t = cfg.get("time") or system.default_time
    return float(t["T"]), float(t["dt"])


# ---------------------------------------------------------------------------
# output


def column_names(system) -> list[str]:
    if system.name == "heavy_top":
        return (["t"] + [f"mu_{i}" for i in (1, 2, 3)] + [f"omega_{i}" for i in (1, 2, 3)]
                + [f"gamma_{i}" for i in (1, 2, 3)])
    if system.name.startswith("nematic"):
        return (["t"] + [f"mu_{i}" for i in (1, 2, 3)] + [f"xi_{i}" for i in (1, 2, 3)]
                + [f"m_{i}" for i in (1, 2, 3)])
    n = system.algebra.grid_size
    if system.name == "spin_lattice":
        site = lambda p: [f"{p}_{j}_{c}" for j in range(n) for c in (1, 2, 3)]
        return ["t"] + site("mu") + site("xi") + site("gamma")
    cols = ["t"] + [f"mu_{j}" for j in range(n)] + [f"u_{j}" for j in range(n)]
    if system.name == "density_hs1d":
        cols += [f"rho_{j}" for j in range(n)]
    return cols


def trajectory_table(traj) -> np.ndarray:
    parts = [traj.times[:, None], traj.mu, traj.xi]
    if traj.a is not None:
        parts.append(traj.a)
    return np.hstack(parts)


def write_trajectory(path: Path, system, traj, fmt: str):
    cols = column_names(system)
    table = trajectory_table(traj)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for row in table:
                w.writerow([f"{v:.17g}" for v in row])
    else:
        with open(path, "w") as fh:
            json.dump({"system": system.name, "columns": cols, "data": table.tolist()}, fh)


def read_trajectory_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _dump(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _threads() -> int:
    raw = os.environ.get("EPRED_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# run


def _require_integrable(system):
    if not system.lagrangian.integrable:
        raise ConfigError(f"{system.lagrangian.name} has no inertia solve; use it in invariance checks only")


def cmd_run(cfg) -> int:
    system = _system(cfg)
    _require_integrable(system)
    xi0, a0 = _init(system, cfg.get("init", "default"))
    T, dt = _time(cfg, system)
    out = Path(cfg["output"]["dir"])
    fmt = cfg["output"].get("trajectory_format", "csv")
    start = time.perf_counter()
    try:
        traj = integrate(system, xi0, a0, T, dt)
    except IntegrationAbort as exc:
        print(f"epred: integration aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    wall = time.perf_counter() - start
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory(out / f"trajectory.{fmt}", system, traj, fmt)
    last = len(traj) - 1
    summary = {
        "system": system.name,
        "params": _public_params(system),
        "time": {"T": T, "dt": dt, "steps": traj.diagnostics["steps"]},
        "conserved": conservation_report(system, traj),
        "final_state": {"t": float(traj.times[last]), "mu": traj.mu[last],
                        "xi": traj.xi[last], "a": None if traj.a is None else traj.a[last]},
        "diagnostics": traj.diagnostics,
        "wall_time_s": wall,
    }
    _dump(out / "summary.json", _jsonable(summary))
    drift = summary["conserved"]["energy"]["drift"]
    print(f"{system.name}: {traj.diagnostics['steps']} steps, energy drift {drift:.3e}, "
          f"wall {wall:.2f}s -> {out}")
    return EXIT_OK


def _public_params(system) -> dict:
    return _jsonable(system.params)


# ---------------------------------------------------------------------------
# verify


def _fd_momentum(system, xi, a):
    lag = system.lagrangian
    eye = np.eye(xi.desc.dim)
    return np.array([fd_d_xi(lag, xi, a, AlgElem(xi.desc, e)) for e in eye])


def _fd_param(system, xi, a):
    lag = system.lagrangian
    g = np.array([fd_d_a(lag, xi, a, e) for e in np.eye(a.desc.size)])
    if a.desc.is_manifold:
        g = g - (g @ a.value) * a.value
    return g


def fd_oracle_residual(system, curve, t, h):
    """EP residual with every functional derivative replaced by central differences."""
    xi, a = curve(t)
    mu_of = lambda s: DualElem(system.algebra, _fd_momentum(system, *curve(s)))
    v_of = None if system.family is EquationFamily.PLAIN else (lambda s: _fd_param(system, *curve(s)))
    return ep_operator(system.family, mu_of, v_of, xi, a, t, h)


def reference_report(system, rng, n_curves: int) -> CheckReport:
    worst, worst_info = 0.0, {}
    use_ref = system.has_reference
    for i in range(n_curves):
        c = system.random_curve(rng)
        for t in CURVE_TIMES:
            gen = ep_residual(system.family, system.lagrangian, c, t, RESIDUAL_STEP).coords
            if use_ref:
                ref, ref_a = reference_residual(system, c, t, RESIDUAL_STEP)
                d = np.max(np.abs(gen - ref)) / max(1.0, np.max(np.abs(ref)))
                if ref_a.size:
                    adv = advection_residual(system.family, c, t, RESIDUAL_STEP)
                    d = max(d, np.max(np.abs(adv - ref_a)) / max(1.0, np.max(np.abs(ref_a))))
            else:
                ref = fd_oracle_residual(system, c, t, RESIDUAL_STEP).coords
                d = np.max(np.abs(gen - ref)) / max(1.0, np.max(np.abs(ref)))
            if d > worst or not worst_info:
                worst, worst_info = float(d), {"curve": i, "t": t}
    tol = REFERENCE_TOL if use_ref else FD_ORACLE_TOL
    oracle = "explicit equations" if use_ref else "finite-difference derivatives"
    return CheckReport("reference_match", worst, tol, worst <= tol, worst=worst_info,
                       details={"oracle": oracle, "curves": n_curves})


def conservation_reports(system, traj) -> list[CheckReport]:
    out = []
    for name, r in conservation_report(system, traj).items():
        tol = CONSERVATION_TOL[name]
        if name == "mu_mean" and system.name == "density_hs1d":
            tol = DENSITY_MEAN_TOL
        out.append(CheckReport(f"conservation:{name}", r["drift"], tol, r["drift"] <= tol,
                               details={"relative": r["relative"]}))
    if "sphere_defect_max" in traj.diagnostics:
        d = float(traj.diagnostics["sphere_defect_max"])
        out.append(CheckReport("conservation:sphere_step_defect", d, SPHERE_STEP_TOL, d <= SPHERE_STEP_TOL))
    return out


def _verify_tasks(cfg):
    """Independent check jobs; each builds its own bundle and random stream."""
    v = cfg["verify"]
    seed = v.get("seed", 42)
    n_samples = v.get("samples", 32)
    n_curves = v.get("curves", 4)
    probe = _system(cfg)
    if "h_path" in v:
        path, mode, xfail = parse_h_path(v["h_path"])
        try:
            path.element(0.0, probe.algebra)
        except ValueError as exc:
            raise ConfigError(f"verify.h_path: {exc}") from exc
        evaluate = [(path, mode, xfail)]
        transport = []
    else:
        evaluate = [(p, "evaluate", False) for p in probe.h_paths]
        transport = [(p, "transport", False) for p in probe.g_paths]

    jobs = []
    for check in v["checks"]:
        if check in ("lagrangian_invariance", "derivative_equivariance"):
            for path, _, xfail in evaluate:
                jobs.append((check, path, "evaluate", xfail, {}))
        elif check in ("residual_equivariance", "solution_transport"):
            for path, mode, xfail in evaluate + transport:
                jobs.append((check, path, mode, xfail, {}))
        else:
            jobs.append((check, None, None, False, {}))
    if v.get("controls", False):
        for ctl in negative_controls():
            if ctl.system == cfg["system"]:
                jobs.append((ctl.check, ctl.path, ctl.mode, True, dict(ctl.params, _control=ctl.name)))

    seeds = np.random.SeedSequence(seed).spawn(len(jobs))
    return [(job, s, n_samples, n_curves) for job, s in zip(jobs, seeds)]


def _run_job(cfg, job, seed_seq, n_samples, n_curves, traj_cache):
    check, path, mode, xfail, overrides = job
    overrides = dict(overrides)
    control = overrides.pop("_control", None)
    system = _system(cfg, overrides)
    rng = np.random.default_rng(seed_seq)
    label = check if path is None else f"{check}[{path.name}]"
    if control:
        label = f"control:{control}:{label}"

    if check == "lagrangian_invariance":
        samples = system.random_samples(rng, n_samples)
        reps = [check_lagrangian_invariance(system.lagrangian, path, samples, name=label,
                                            expected_fail=xfail)]
    elif check == "derivative_equivariance":
        samples = system.random_samples(rng, n_samples)
        reps = [check_derivative_equivariance(system.lagrangian, path, samples, name=label,
                                              expected_fail=xfail)]
    elif check == "residual_equivariance":
        tol = 1e-7 if not system.is_pde else 1e-6
        worst = None
        for _ in range(n_curves):
            r = check_residual_equivariance(system, path, system.random_curve(rng), CURVE_TIMES,
                                            h=RESIDUAL_STEP, mode=mode, name=label,
                                            tolerance=tol, expected_fail=xfail)
            if worst is None or r.max_defect > worst.max_defect:
                worst = r
        worst.passed = worst.max_defect <= worst.tolerance
        reps = [worst]
    elif check == "solution_transport":
        traj = traj_cache(system)
        reps = [check_solution_transport(system, path, None, *_time(cfg, system), mode=mode,
                                         name=label, expected_fail=xfail, trajectory=traj)]
    elif check == "reference_match":
        reps = [reference_report(system, rng, n_curves)]
    else:
        reps = conservation_reports(system, traj_cache(system))
    for r in reps:
        r.details.setdefault("seed_stream", int(seed_seq.spawn_key[-1]))
    return reps


def cmd_verify(cfg) -> int:
    if "verify" not in cfg:
        raise ConfigError("verify section is required for 'verify'")
    system = _system(cfg)
    init = _init(system, cfg.get("init", "default"))
    T, dt = _time(cfg, system)
    tasks = _verify_tasks(cfg)
    out = Path(cfg["output"]["dir"])

    cache = {}

    def traj_cache(sys_):
        # one shared integration; controls never need a trajectory
        if "traj" not in cache:
            cache["traj"] = integrate(system, *init, T, dt)
        return cache["traj"]

    needs_traj = any(job[0] in ("solution_transport", "conservation") for job, *_ in tasks)
    if needs_traj:
        _require_integrable(system)
    try:
        if needs_traj:
            traj_cache(system)
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            results = list(pool.map(lambda t: _run_job(cfg, *t, traj_cache), tasks))
    except IntegrationAbort as exc:
        print(f"epred: integration aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT

    reports = [r for rs in results for r in rs]
    ok = all(r.ok for r in reports)
    doc = {"system": system.name, "params": _public_params(system),
           "seed": cfg["verify"].get("seed", 42),
           "checks": [r.to_dict() for r in reports], "all_ok": ok}
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "verify.json", _jsonable(doc))
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        tag = " (expected)" if r.expected_fail else ""
        print(f"{status}{tag} {r.name}: defect {r.max_defect:.3e} (tol {r.tolerance:.1e})")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# sweep


def observed_orders(values, errors, param: str) -> list[float | None]:
    """Order from successive error ratios; None where undefined."""
    out = [None]
    for i in range(1, len(values)):
        e0, e1 = errors[i - 1], errors[i]
        v0, v1 = values[i - 1], values[i]
        h0, h1 = (v0, v1) if param == "dt" else (1.0 / v0, 1.0 / v1)
        if e0 > 0 and e1 > 0 and h0 != h1 and math.isfinite(e0) and math.isfinite(e1):
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
        else:
            out.append(None)
    return out


def _final_state(system, cfg, T, dt):
    xi0, a0 = _init(system, cfg.get("init", "default"))
    traj = integrate(system, xi0, a0, T, dt)
    last = len(traj) - 1
    mu = traj.mu[last].reshape(system.algebra.field_shape)
    parts = [mu.reshape(mu.shape[0], -1) if system.is_pde else mu[None, :]]
    if traj.a is not None:
        a = traj.a[last]
        parts.append(a.reshape(mu.shape[0], -1) if system.is_pde else a[None, :])
    return np.hstack(parts)


def cmd_sweep(cfg, param: str, values: list[float]) -> int:
    if param not in ("dt", "N"):
        raise ConfigError("--param must be dt or N")
    if len(values) < 3:
        raise ConfigError("a sweep needs at least three values")
    diffs = np.diff(values)
    if not (np.all(diffs >= 0) or np.all(diffs <= 0)):
        raise ConfigError("sweep values must be monotone")
    base = _system(cfg)
    _require_integrable(base)
    if param == "N":
        if not base.is_pde:
            raise ConfigError(f"{base.name} has no spatial grid")
        if not isinstance(cfg.get("init", "default"), str):
            raise ConfigError("an N sweep needs a preset init")
        ints = [int(v) for v in values]
        if any(i != v for i, v in zip(ints, values)):
            raise ConfigError("N values must be integers")
        values = ints
        finest = max(values)
        if any(finest % v for v in values):
            raise ConfigError("every N must divide the finest N")
        systems = [_system(cfg, {"N": v}) for v in values]
        T, dt = _time(cfg, base)
        jobs = [(s, T, dt) for s in systems]
    else:
        T, _ = _time(cfg, base)
        for v in values:
            if not v > 0 or not math.isclose(round(T / v) * v, T, rel_tol=1e-9):
                raise ConfigError(f"dt={v} does not divide T={T}")
        systems = [_system(cfg) for _ in values]
        jobs = [(s, T, float(v)) for s, v in zip(systems, values)]
        finest = min(values)
    out = Path(cfg["output"]["dir"])

    try:
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            finals = list(pool.map(lambda j: _final_state(j[0], cfg, j[1], j[2]), jobs))
    except IntegrationAbort as exc:
        print(f"epred: integration aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT

    ref = finals[values.index(finest)]
    errors = []
    for v, f in zip(values, finals):
        r = ref[::finest // v] if param == "N" else ref
        errors.append(float(np.max(np.abs(f - r))))
    orders = observed_orders(values, errors, param)
    rows = [{"value": v, "error": e, "p": p} for v, e, p in zip(values, errors, orders)]
    doc = {"system": base.name, "parameter": param, "T": T, "rows": rows}
    out.mkdir(parents=True, exist_ok=True)
    _dump(out / "sweep.json", _jsonable(doc))
    for row in rows:
        p = "null" if row["p"] is None else f"{row['p']:.3f}"
        print(f"{param}={row['value']:<10g} error={row['error']:.3e} p={p}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epred", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "integrate a system and write its trajectory"),
                       ("verify", "run the invariance and consistency checks"),
                       ("sweep", "convergence study over dt or N")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON configuration file")
        if name == "sweep":
            p.add_argument("--param", required=True, choices=("dt", "N"))
            p.add_argument("--values", required=True, help="comma-separated values")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_sweep(cfg, args.param, _parse_values(args.values))
    except ConfigError as exc:
        print(f"epred: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
