"""Scenario execution: config ingestion, sweeps, and plot-ready output.

A scenario is one [scenario] section in an INI-style config. Keys are
validated strictly per scenario kind; an unrecognised key is a config
error, because a typo in a physics parameter must never silently fall
back to a default.

Every run writes delimited text tables plus manifest.json. The manifest
records the full config, the code version, and what happened at every
sweep point (truncation used, or the error that point died with). Its
sha256 is stamped as a # header on each table, so a table can always be
traced back to the exact run that produced it.
"""

import configparser
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (ConfigError, GridTooSmall, JcsimError, NoRoot,
                     NotBimodal, TruncationExplosion, TruncationInsufficient)
from .master_equation import TAIL_TOL, steady_state
from .observables import (bloch_vector, field_amplitude, grid_peaks, husimi_q,
                          mean_photon, serialize_grid, wigner)
from .params import SystemParams, from_config
from .semiclassical import branch_curve, serialize_branch_curve, steady_amplitudes
from .spectrum import (blockade_detuning, dressed_frequencies, quasi_energies,
                       resonance_detuning, serialize_lines)
from .trajectories import (ScanSchedule, ensemble_mean, record_to_text,
                           run_trajectory)

KINDS = ("steady_scan", "qgrid", "wgrid", "trajectory",
         "semiclassical_curve", "spectrum_table", "boundary_search")
TRUNCATION_CAP = 400
_BASE_KEYS = {"kind", "g_over_kappa", "eps_over_g", "delta_over_g",
              "gamma_over_kappa", "n_max", "out", "workers", "tail_tol"}
_KIND_KEYS = {
    "steady_scan": {"sweep", "sweep_start", "sweep_stop", "sweep_points"},
    "qgrid": {"grid_halfwidth", "grid_points"},
    "wgrid": {"grid_halfwidth", "grid_points"},
    "trajectory": {"schedule", "schedule_start", "schedule_end", "t_total",
                   "sample_dt", "seeds", "seed", "refine"},
    "semiclassical_curve": {"control", "sweep_start", "sweep_stop",
                            "sweep_points"},
    "spectrum_table": {"n_lines", "omega0"},
    "boundary_search": {"control_min", "control_max", "grid_halfwidth",
                        "grid_points"},
}
_SWEEP_AXES = ("delta_over_g", "eps_over_g", "g_over_kappa")


@dataclass
class Scenario:
    kind: str
    config: dict
    out_dir: str = "."
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class RunResult:
    exit_code: int
    tables: list = field(default_factory=list)
    manifest_path: str = ""
    out_dir: str = "."


def load_scenario(path, overrides=None) -> Scenario:
    """Parse one [scenario] section; reject unknown sections and keys."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config {path!r}")
    if parser.sections() != ["scenario"]:
        raise ConfigError("config must contain exactly one [scenario] section")
    cfg = dict(parser["scenario"])
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = str(val)
    return scenario_from_dict(cfg)


def scenario_from_dict(cfg) -> Scenario:
    cfg = {k: str(v) for k, v in cfg.items()}
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"missing or unknown kind {kind!r}")
    allowed = _BASE_KEYS | _KIND_KEYS[kind]
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"unknown keys for {kind}: {sorted(unknown)}")
    required = {"eps_over_g"}
    if kind != "boundary_search":
        required.add("g_over_kappa")  # boundary sweeps it via control_min/max
    missing = required - set(cfg)
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")
    return Scenario(kind=kind, config=cfg,
                    out_dir=cfg.get("out", "."),
                    workers=int(cfg.get("workers", "1")))


def _ratios(cfg, **replace):
    base = {
        "g_over_kappa": float(cfg.get("g_over_kappa", "0")),
        "eps_over_g": float(cfg["eps_over_g"]),
        "delta_over_g": float(cfg.get("delta_over_g", "0")),
        "gamma_over_kappa": float(cfg.get("gamma_over_kappa", "0")),
    }
    base.update(replace)
    return base


def auto_truncation(params: SystemParams, cap=TRUNCATION_CAP) -> int:
    """Photon cutoff from mean-field estimates: max(20, ceil(mu + 8 sqrt(mu) + 10)).

    mu is the largest mean-field photon number the point can reach; the
    n_max carried by params is ignored. On resonance below threshold the
    mean field is zero although critical fluctuations are not, so the
    estimate is floored at sqrt(n_sc) once the drive passes 80% of
    threshold; that window is where the distribution stretches along the
    imaginary axis.
    """
    g, k, eps, dw = params.g, params.kappa, params.eps_d, params.delta_omega
    n_sc = (g / (2.0 * k)) ** 2
    if g == 0.0:
        mu = (eps / k) ** 2 / (1.0 + (dw / k) ** 2)
    else:
        try:
            mu = max(steady_amplitudes(params))
        except NoRoot:
            mu = 0.0
        if dw == 0.0 and params.gamma == 0.0 and 2.0 * eps / g >= 0.8:
            mu = max(mu, np.sqrt(n_sc))
    n_max = max(20, int(np.ceil(mu + 8.0 * np.sqrt(mu) + 10.0)))
    if n_max > cap:
        raise TruncationExplosion(
            f"estimated n_max {n_max} exceeds cap {cap}; "
            f"mean-field photon number {mu:.1f}")
    return n_max


def _resolve_params(cfg, ratios) -> tuple[SystemParams, str]:
    """SystemParams for one point; returns (params, 'auto'|'explicit')."""
    spec = cfg.get("n_max", "auto")
    if spec == "auto":
        probe = from_config({**ratios, "n_max": 1})
        return from_config({**ratios, "n_max": auto_truncation(probe)}), "auto"
    return from_config({**ratios, "n_max": int(spec)}), "explicit"


def _solve_point(cfg, ratios):
    """Steady state with the doubling retry loop for auto truncation."""
    tail_tol = float(cfg.get("tail_tol", TAIL_TOL))
    params, mode = _resolve_params(cfg, ratios)
    retries = 2 if mode == "auto" else 0
    while True:
        try:
            return steady_state(params, tail_tol=tail_tol), params.n_max
        except TruncationInsufficient:
            if retries == 0:
                raise
            retries -= 1
            doubled = 2 * params.n_max
            if doubled > TRUNCATION_CAP:
                raise TruncationExplosion(
                    f"doubling past the cap: {doubled} > {TRUNCATION_CAP}")
            params = from_config({**ratios, "n_max": doubled})


def _scan_worker(task):
    index, cfg, axis, value = task
    ratios = _ratios(cfg, **{axis: value})
    try:
        rho, n_used = _solve_point(cfg, ratios)
    except JcsimError as exc:
        return index, None, {"index": index, "control": value,
                             "status": "failed",
                             "error": f"{type(exc).__name__}: {exc}"}
    a = field_amplitude(rho)
    b = bloch_vector(rho)
    row = (value, mean_photon(rho), a.real, a.imag, b.x, b.y, b.z, n_used)
    return index, row, {"index": index, "control": value,
                        "status": "ok", "n_max": n_used}


def _traj_worker(task):
    index, cfg, seed = task
    try:
        ratios = _ratios(cfg)
        params, _ = _resolve_params(cfg, ratios)
        schedule = _schedule_from(cfg)
        sample_dt = (float(cfg["sample_dt"]) if "sample_dt" in cfg
                     else schedule.t_total / 512.0)
        record = run_trajectory(params, schedule, seed, sample_dt,
                                refine=int(cfg.get("refine", "1")))
    except JcsimError as exc:
        return index, None, {"index": index, "seed": seed, "status": "failed",
                             "error": f"{type(exc).__name__}: {exc}"}
    return index, (params, record), {"index": index, "seed": seed,
                                     "status": "ok", "n_max": params.n_max}


def _schedule_from(cfg):
    if "t_total" not in cfg:
        raise ConfigError("trajectory scenarios need t_total")
    return ScanSchedule(kind=cfg.get("schedule", "constant"),
                        t_total=float(cfg["t_total"]),
                        start=float(cfg.get("schedule_start", "0")),
                        end=float(cfg.get("schedule_end", "0")))


def _run_tasks(tasks, worker, workers):
    """Run point tasks, preserving index order regardless of pool scheduling."""
    if workers == 1:
        results = [worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(worker, tasks))
    return sorted(results, key=lambda r: r[0])


def _write(path, header_lines, body):
    text = "".join(f"# {line}\n" for line in header_lines) + body
    with open(path, "w") as fh:
        fh.write(text)


# Keys that describe how a run executes rather than what it computes.
# They stay out of the hash so reruns with a different worker count or
# output directory still stamp byte-identical tables.
_EXECUTION_KEYS = {"out", "workers"}


def _manifest_hash(manifest):
    payload = dict(manifest)
    payload["config"] = {k: v for k, v in manifest["config"].items()
                         if k not in _EXECUTION_KEYS}
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def run_scenario(scenario: Scenario) -> RunResult:
    os.makedirs(scenario.out_dir, exist_ok=True)
    cfg = scenario.config
    manifest = {"config": cfg, "code_version": __version__,
                "kind": scenario.kind, "points": [], "outputs": []}
    runner = _RUNNERS[scenario.kind]
    tables = runner(scenario, manifest)
    manifest["outputs"] = [os.path.basename(t) for t in tables]
    digest = _manifest_hash(manifest)
    manifest_path = os.path.join(scenario.out_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump({"sha256": digest, **manifest}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    failed = any(p.get("status") == "failed" for p in manifest["points"])
    # stamp the hash onto every table now that it is known
    for path in tables:
        with open(path) as fh:
            body = fh.read()
        with open(path, "w") as fh:
            fh.write(f"# manifest_sha256: {digest}\n" + body)
    return RunResult(exit_code=2 if failed else 0, tables=tables,
                     manifest_path=manifest_path, out_dir=scenario.out_dir)


def _sweep_values(cfg):
    start = float(cfg.get("sweep_start", cfg.get("delta_over_g", "0")))
    stop = float(cfg.get("sweep_stop", start))
    npts = int(cfg.get("sweep_points", "1"))
    if npts < 1:
        raise ConfigError("sweep_points must be >= 1")
    values = np.linspace(start, stop, npts)
    if npts > 1:
        diffs = np.diff(values)
        if np.any(diffs == 0) or len(set(np.sign(diffs))) != 1:
            raise ConfigError("sweep grid must be strictly monotone")
    return values


def _run_steady_scan(scenario, manifest):
    cfg = scenario.config
    axis = cfg.get("sweep", "delta_over_g")
    if axis not in _SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {_SWEEP_AXES}")
    values = _sweep_values(cfg)
    tasks = [(i, cfg, axis, float(v)) for i, v in enumerate(values)]
    results = _run_tasks(tasks, _scan_worker, scenario.workers)
    rows = []
    for _idx, row, point in results:
        manifest["points"].append(point)
        if row is not None:
            rows.append(" ".join(format(v, ".9g") for v in row[:-1])
                        + f" {row[-1]}")
    path = os.path.join(scenario.out_dir, "steady_scan.txt")
    _write(path, [f"kind: steady_scan sweep: {axis}",
                  "columns: control n re_a im_a x y z n_max"],
           "\n".join(rows) + ("\n" if rows else ""))
    return [path]


def _run_grid(scenario, manifest):
    cfg = scenario.config
    kind = scenario.kind
    func = husimi_q if kind == "qgrid" else wigner
    try:
        rho, n_used = _solve_point(cfg, _ratios(cfg))
        axes = {}
        if "grid_halfwidth" in cfg:
            hw = float(cfg["grid_halfwidth"])
            npts = int(cfg.get("grid_points", "201"))
            ax = np.linspace(-hw, hw, npts)
            axes = {"x_axis": ax, "y_axis": ax}
        grid = func(rho, **axes)
    except JcsimError as exc:
        manifest["points"].append({"index": 0, "status": "failed",
                                   "error": f"{type(exc).__name__}: {exc}"})
        return []
    manifest["points"].append({"index": 0, "status": "ok", "n_max": n_used})
    path = os.path.join(scenario.out_dir, f"{kind}.txt")
    with open(path, "w") as fh:
        fh.write(serialize_grid(grid))
    return [path]


def _run_trajectory_kind(scenario, manifest):
    cfg = scenario.config
    n_seeds = int(cfg.get("seeds", "1"))
    base_seed = int(cfg.get("seed", "1"))
    tasks = [(i, cfg, base_seed + i) for i in range(n_seeds)]
    results = _run_tasks(tasks, _traj_worker, scenario.workers)
    tables = []
    records = []
    for _idx, payload, point in results:
        manifest["points"].append(point)
        if payload is None:
            continue
        params, record = payload
        records.append(record)
        path = os.path.join(scenario.out_dir, f"traj_seed{record.seed}.txt")
        with open(path, "w") as fh:
            fh.write(record_to_text(record, params))
        tables.append(path)
    if len(records) >= 2:
        series = {obs: ensemble_mean(records, obs)
                  for obs in ("n", "re_a", "im_a", "x", "y", "z")}
        first = next(iter(series.values()))
        rows = []
        for k in range(len(first.times)):
            cells = [format(first.times[k], ".9g")]
            for obs in ("n", "re_a", "im_a", "x", "y", "z"):
                cells.append(format(series[obs].mean[k], ".9g"))
                cells.append(format(series[obs].stderr[k], ".9g"))
            rows.append(" ".join(cells))
        path = os.path.join(scenario.out_dir, "ensemble.txt")
        _write(path, [f"kind: trajectory ensemble records: {len(records)}",
                      "columns: time n n_err re_a re_a_err im_a im_a_err "
                      "x x_err y y_err z z_err"],
               "\n".join(rows) + "\n")
        tables.append(path)
    return tables


def _run_semiclassical(scenario, manifest):
    cfg = scenario.config
    control = cfg.get("control", "eps_over_g")
    values = _sweep_values(cfg)
    ratios = _ratios(cfg)
    params = from_config({**ratios, "n_max": 1})
    curve = branch_curve(params, control, values)
    for i, (v, roots) in enumerate(curve.points):
        manifest["points"].append({"index": i, "control": v, "status": "ok",
                                   "roots": len(roots)})
    path = os.path.join(scenario.out_dir, "semiclassical_curve.txt")
    with open(path, "w") as fh:
        fh.write(serialize_branch_curve(curve))
    return [path]


def _run_spectrum(scenario, manifest):
    cfg = scenario.config
    n_lines = int(cfg.get("n_lines", "5"))
    omega0 = float(cfg.get("omega0", "0"))
    ratios = _ratios(cfg)
    params = from_config({**ratios, "n_max": 1})
    lines = []
    for n in range(1, n_lines + 1):
        lines.extend(dressed_frequencies(n, omega0, params.g))
        lines.extend(resonance_detuning(n, params))
        lines.extend(blockade_detuning(n, params))
        try:
            lines.extend(quasi_energies(n, params))
            manifest["points"].append({"index": n, "status": "ok"})
        except JcsimError as exc:
            manifest["points"].append({"index": n, "status": "failed",
                                       "error": f"{type(exc).__name__}: {exc}"})
    path = os.path.join(scenario.out_dir, "spectrum_table.txt")
    with open(path, "w") as fh:
        fh.write(serialize_lines(lines))
    return [path]


def _classify_peaks(grid, split_radius):
    """Top-two local maxima, split into (dim, bright) by radius."""
    peaks = grid_peaks(grid)[:2]
    dim = bright = None
    for x, y, h in peaks:
        if np.hypot(x, y) >= split_radius:
            bright = h if bright is None else max(bright, h)
        else:
            dim = h if dim is None else max(dim, h)
    return dim, bright


def boundary_search(base_ratios, lo, hi, tail_tol=TAIL_TOL, rel_tol=1e-2,
                    n_max_spec="auto", log=None):
    """Bisect g/kappa until the two Q-function peaks have equal heights.

    The dim (small-radius) and bright (large-radius) peak trade
    dominance across the range; their normalised height difference is
    the sign function driving the bisection. Raises NotBimodal when the
    whole range shows a single peak.
    """
    def evaluate(gk):
        ratios = dict(base_ratios, g_over_kappa=gk)
        cfg = {"n_max": n_max_spec, "tail_tol": str(tail_tol)}
        rho, n_used = _solve_point(cfg, ratios)
        bright_root = max(steady_amplitudes(
            from_config({**ratios, "n_max": 1})))
        # span the grid out to the bright mean-field state even when the
        # quantum mean sits far below it; near the boundary the lobes
        # broaden well past coherent-state width, so retry wider on
        # boundary complaints instead of trusting a fixed margin
        margin = 6.0
        for _ in range(3):
            ax = np.linspace(-(np.sqrt(bright_root) + margin),
                             np.sqrt(bright_root) + margin, 201)
            try:
                grid = husimi_q(rho, x_axis=ax, y_axis=ax)
                break
            except GridTooSmall:
                margin *= 1.5
        else:
            grid = husimi_q(rho)
        dim, bright = _classify_peaks(grid, 0.5 * np.sqrt(max(bright_root, 1e-12)))
        if log is not None:
            log.append({"g_over_kappa": gk, "dim": dim, "bright": bright,
                        "n_max": n_used})
        if dim is None and bright is None:
            raise NotBimodal("no interior peak found")
        if dim is None:
            return 1.0
        if bright is None:
            return -1.0
        return (bright - dim) / max(bright, dim)

    s_lo, s_hi = evaluate(lo), evaluate(hi)
    if abs(s_lo) == 1.0 and abs(s_hi) == 1.0 and s_lo == s_hi:
        raise NotBimodal("single peak across the whole range")
    if s_lo > 0 or s_hi < 0:
        raise NoRoot("range does not bracket the equal-height point")
    a, b = lo, hi
    for _ in range(40):
        mid = 0.5 * (a + b)
        s = evaluate(mid)
        if abs(s) < rel_tol:
            return mid
        if s < 0:
            a = mid
        else:
            b = mid
    raise NoRoot("bisection failed to reach the height tolerance")


def _run_boundary(scenario, manifest):
    cfg = scenario.config
    lo = float(cfg["control_min"])
    hi = float(cfg["control_max"])
    log = []
    ratios = _ratios(cfg, g_over_kappa=1.0)
    del ratios["g_over_kappa"]
    try:
        result = boundary_search(ratios, lo, hi,
                                 tail_tol=float(cfg.get("tail_tol", TAIL_TOL)),
                                 n_max_spec=cfg.get("n_max", "auto"), log=log)
        final = {"status": "ok", "boundary_g_over_kappa": result}
    except JcsimError as exc:
        result = None
        final = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
    for i, entry in enumerate(log):
        manifest["points"].append({"index": i, "status": "ok", **entry})
    manifest["points"].append({"index": len(log), **final})
    rows = [" ".join(format(v, ".9g") for v in
                     (e["g_over_kappa"],
                      e["dim"] if e["dim"] is not None else float("nan"),
                      e["bright"] if e["bright"] is not None else float("nan")))
            for e in log]
    if result is not None:
        rows.append(f"# boundary: {result:.9g}")
    path = os.path.join(scenario.out_dir, "boundary_search.txt")
    _write(path, ["kind: boundary_search",
                  "columns: g_over_kappa dim_peak bright_peak"],
           "\n".join(rows) + "\n")
    return [path]


_RUNNERS = {
    "steady_scan": _run_steady_scan,
    "qgrid": _run_grid,
    "wgrid": _run_grid,
    "trajectory": _run_trajectory_kind,
    "semiclassical_curve": _run_semiclassical,
    "spectrum_table": _run_spectrum,
    "boundary_search": _run_boundary,
}
