"""Scenario configs: parsing, static validation, and the run pipeline.

A scenario is a single JSON document: window + k-grid + named state + an
optional dynamics block (continuous or walk) + output directory + tolerances.
Configs are versioned in the repository as golden fixtures; the pipeline is
deterministic end to end, so repeated runs produce byte-identical CSV and
JSON outputs (the manifest's wall-clock field is the one exception).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analytic import build_state
from .continuous import (
    DEFAULT_EPS_BOUNDARY,
    HamiltonianSpec,
    NoiseSpec,
    Potential,
    lindblad_rk4,
    lindblad_wigner_closed,
    linear_potential_propagate,
    spin_linear_propagate,
)
from .errors import ConfigError, InvariantViolation, LatticeWignerError
from .grids import KGrid
from .negativity import matrix_negativity, negativity_timeseries
from .output import (
    write_json,
    write_momentum_marginal_csv,
    write_position_marginal_csv,
    write_site_distribution_csv,
    write_timeseries_csv,
    write_wigner_csv,
)
from .states import SPIN_MATRICES, DensityOperator, LatticeWindow, PureState, density_from_pure
from .walk import CoinSpec, ProjectiveNoiseSpec, walk_trajectory
from .wigner import (
    WignerMatrix,
    hermiticity_defect,
    marginal_momentum,
    marginal_position,
    normalization_total,
    wigner_of_density,
)

_CLOSED_FORM_CHANNELS = ("sigma_z", "sigma_x")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.severity}: {self.message}"


@dataclass(frozen=True)
class Tolerances:
    eps_boundary: float = DEFAULT_EPS_BOUNDARY
    two_path: float = 1e-6


@dataclass(frozen=True)
class ContinuousDynamics:
    hamiltonian: HamiltonianSpec
    noise_terms: tuple  # (name or None, 2x2 matrix, gamma)
    method: str  # "closed_form" | "rk4" | "both"
    times: tuple
    dt: Optional[float] = None

    def noise_spec(self) -> Optional[NoiseSpec]:
        if not self.noise_terms:
            return None
        return NoiseSpec(tuple((m, g) for _, m, g in self.noise_terms))


@dataclass(frozen=True)
class WalkDynamics:
    coin: CoinSpec
    steps: int
    noise: Optional[ProjectiveNoiseSpec]
    mode: str  # "walk" | "noise_only"
    snapshot_steps: tuple


@dataclass(frozen=True)
class ScenarioConfig:
    window: LatticeWindow
    kgrid: KGrid
    state_name: str
    state_params: dict
    dynamics: object  # None | ContinuousDynamics | WalkDynamics
    out_dir: Optional[str]
    tolerances: Tolerances
    raw: dict = field(repr=False, default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _need(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"missing required field {where}.{key}")
    return doc[key]


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _as_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def _parse_potential(doc, where: str) -> Optional[Potential]:
    if doc is None:
        return None
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be an object or null")
    kind = _need(doc, "kind", where)
    try:
        if kind == "none":
            return None
        if kind == "linear":
            return Potential.linear(_as_number(_need(doc, "slope", where), f"{where}.slope"))
        if kind == "polynomial":
            coeffs = _need(doc, "coeffs", where)
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError(f"{where}.coeffs must be a non-empty list")
            return Potential.polynomial([_as_number(c, f"{where}.coeffs") for c in coeffs])
    except LatticeWignerError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}.kind must be one of none/linear/polynomial, got {kind!r}")


def _parse_noise_terms(doc, where: str) -> tuple:
    if doc is None:
        return ()
    entries = doc.get("lindblad") if isinstance(doc, dict) else None
    if entries is None:
        raise ConfigError(f"{where} must be an object with a 'lindblad' list")
    terms = []
    for i, entry in enumerate(entries):
        here = f"{where}.lindblad[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{here} must be an object")
        gamma = _as_number(_need(entry, "gamma", here), f"{here}.gamma")
        if gamma < 0.0:
            raise ConfigError(f"{here}.gamma must be >= 0")
        op = _need(entry, "op", here)
        if isinstance(op, str):
            if op not in SPIN_MATRICES:
                raise ConfigError(
                    f"{here}.op unknown: {op!r}; named operators: "
                    + ", ".join(sorted(SPIN_MATRICES))
                )
            terms.append((op, SPIN_MATRICES[op], gamma))
        else:
            try:
                mat = np.array(
                    [[complex(c[0], c[1]) for c in row] for row in op], dtype=complex
                )
            except (TypeError, IndexError) as exc:
                raise ConfigError(f"{here}.op must be a name or 2x2 [re,im] rows") from exc
            if mat.shape != (2, 2):
                raise ConfigError(f"{here}.op must be 2x2")
            terms.append((None, mat, gamma))
    return tuple(terms)


def _parse_continuous(doc: dict, where: str) -> ContinuousDynamics:
    hdoc = _need(doc, "hamiltonian", where)
    j_hop = _as_number(_need(hdoc, "j_hop", f"{where}.hamiltonian"), f"{where}.hamiltonian.j_hop")
    potential = _parse_potential(hdoc.get("potential"), f"{where}.hamiltonian.potential")
    spin_coupled = bool(hdoc.get("spin_coupled", False))
    method = doc.get("method", "closed_form")
    if method not in ("closed_form", "rk4", "both"):
        raise ConfigError(f"{where}.method must be closed_form/rk4/both, got {method!r}")
    times_doc = _need(doc, "times", where)
    if not isinstance(times_doc, list) or not times_doc:
        raise ConfigError(f"{where}.times must be a non-empty list")
    times = tuple(_as_number(t, f"{where}.times") for t in times_doc)
    if any(t < 0 for t in times):
        raise ConfigError(f"{where}.times must be >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ConfigError(f"{where}.times must be sorted ascending")
    dt = doc.get("dt")
    if dt is not None:
        dt = _as_number(dt, f"{where}.dt")
        if dt <= 0:
            raise ConfigError(f"{where}.dt must be positive")
    noise_terms = _parse_noise_terms(doc.get("noise"), where)
    return ContinuousDynamics(
        HamiltonianSpec(j_hop, potential, spin_coupled), noise_terms, method, times, dt
    )


def _parse_walk(doc: dict, where: str) -> WalkDynamics:
    theta = _as_number(_need(doc, "theta", where), f"{where}.theta")
    steps = _as_int(_need(doc, "steps", where), f"{where}.steps")
    if steps < 0:
        raise ConfigError(f"{where}.steps must be >= 0")
    mode = doc.get("mode", "walk")
    if mode not in ("walk", "noise_only"):
        raise ConfigError(f"{where}.mode must be 'walk' or 'noise_only', got {mode!r}")
    noise = None
    ndoc = doc.get("noise")
    if ndoc is not None:
        p = _as_number(_need(ndoc, "p", f"{where}.noise"), f"{where}.noise.p")
        basis = ndoc.get("basis", "spin")
        try:
            noise = ProjectiveNoiseSpec(p, basis)
        except LatticeWignerError as exc:
            raise ConfigError(f"{where}.noise: {exc}") from exc
    if mode == "noise_only" and noise is None:
        raise ConfigError(f"{where}: noise_only mode requires a noise block")
    snaps = doc.get("snapshot_steps")
    if snaps is None:
        snapshot_steps = tuple(range(steps + 1))
    else:
        snapshot_steps = tuple(_as_int(s, f"{where}.snapshot_steps") for s in snaps)
        if any(s < 0 or s > steps for s in snapshot_steps):
            raise ConfigError(f"{where}.snapshot_steps must lie in [0, steps]")
        if any(b <= a for a, b in zip(snapshot_steps, snapshot_steps[1:])):
            raise ConfigError(f"{where}.snapshot_steps must be strictly ascending")
    try:
        coin = CoinSpec(theta)
    except LatticeWignerError as exc:
        raise ConfigError(f"{where}.theta: {exc}") from exc
    return WalkDynamics(coin, steps, noise, mode, snapshot_steps)


def parse_config(doc: dict) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    wdoc = _need(doc, "window", "config")
    try:
        window = LatticeWindow(
            _as_int(_need(wdoc, "n_min", "window"), "window.n_min"),
            _as_int(_need(wdoc, "n_max", "window"), "window.n_max"),
            _as_number(wdoc.get("a", 1.0), "window.a"),
        )
    except LatticeWignerError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"window: {exc}") from exc
    gdoc = _need(doc, "kgrid", "config")
    try:
        kgrid = KGrid(_as_int(_need(gdoc, "n_k", "kgrid"), "kgrid.n_k"))
    except LatticeWignerError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"kgrid: {exc}") from exc
    sdoc = _need(doc, "state", "config")
    name = _need(sdoc, "name", "state")
    params = sdoc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("state.params must be an object")

    dyn_doc = doc.get("dynamics")
    dynamics = None
    if dyn_doc is not None:
        kind = _need(dyn_doc, "kind", "dynamics")
        if kind == "none":
            dynamics = None
        elif kind == "continuous":
            dynamics = _parse_continuous(dyn_doc, "dynamics")
        elif kind == "walk":
            dynamics = _parse_walk(dyn_doc, "dynamics")
        else:
            raise ConfigError(f"dynamics.kind must be none/continuous/walk, got {kind!r}")

    odoc = doc.get("outputs", {})
    out_dir = odoc.get("directory") if isinstance(odoc, dict) else None
    tdoc = doc.get("tolerances", {})
    tolerances = Tolerances(
        eps_boundary=_as_number(tdoc.get("eps_boundary", DEFAULT_EPS_BOUNDARY), "tolerances.eps_boundary"),
        two_path=_as_number(tdoc.get("two_path", 1e-6), "tolerances.two_path"),
    )
    return ScenarioConfig(window, kgrid, name, params, dynamics, out_dir, tolerances, doc)


# ---------------------------------------------------------------------------
# Static validation
# ---------------------------------------------------------------------------

def _state_m_support(cfg: ScenarioConfig):
    """Conservative [m_lo, m_hi] support estimate for the named state."""
    p = cfg.state_params
    name = cfg.state_name
    try:
        if name in ("double_delta",):
            sites = [int(p["n1"]), int(p["n2"])]
        elif name in ("werner", "cat"):
            sites = [int(p["a_site"]), int(p["b_site"])]
        elif name == "two_gaussian":
            reach = math.ceil(12.0 * float(p["sigma"]))
            lo = 2 * min(int(p["a_center"]), int(p["b_center"])) - reach
            hi = 2 * max(int(p["a_center"]), int(p["b_center"])) + reach
            return lo, hi
        elif name == "product_gaussian":
            reach = math.ceil(12.0 * float(p["sigma"]))
            return 2 * int(p["center"]) - reach, 2 * int(p["center"]) + reach
        else:
            return None
    except (KeyError, TypeError, ValueError):
        return None
    return 2 * min(sites), 2 * max(sites)


def validate_config(cfg: ScenarioConfig) -> list:
    """Static checks only; no dynamics are executed."""
    diags = []
    width = cfg.window.width
    need = 2 * width + 1
    if cfg.kgrid.n_k < need:
        diags.append(
            Diagnostic(
                "error",
                f"kgrid.n_k={cfg.kgrid.n_k} violates the quadrature exactness bound "
                f"n_k >= 2W+1 = {need} for window width W={width}",
            )
        )
    if cfg.state_name not in ("double_delta", "two_gaussian", "product_gaussian", "werner", "cat"):
        diags.append(Diagnostic("error", f"unknown state name {cfg.state_name!r}"))

    p = cfg.state_params
    if cfg.state_name in ("two_gaussian", "product_gaussian"):
        try:
            sigma = float(p["sigma"])
            centers = (
                [int(p["center"])]
                if cfg.state_name == "product_gaussian"
                else [int(p["a_center"]), int(p["b_center"])]
            )
            for c in centers:
                if c - 6 * sigma < cfg.window.n_min or c + 6 * sigma > cfg.window.n_max:
                    diags.append(
                        Diagnostic(
                            "warning",
                            f"Gaussian center {c} +- 6 sigma does not fit the window; "
                            "truncation error may exceed tolerances",
                        )
                    )
        except (KeyError, TypeError, ValueError):
            diags.append(Diagnostic("error", f"state.params incomplete for {cfg.state_name}"))

    dyn = cfg.dynamics
    if isinstance(dyn, ContinuousDynamics):
        h = dyn.hamiltonian
        if dyn.method in ("closed_form", "both"):
            if h.potential is None or h.potential.kind != "linear":
                diags.append(
                    Diagnostic("error", "closed-form evolution requires a linear potential")
                )
            unnamed = [1 for nm, _, g in dyn.noise_terms if g > 0 and nm not in _CLOSED_FORM_CHANNELS]
            active = [1 for _, _, g in dyn.noise_terms if g > 0]
            if unnamed:
                diags.append(
                    Diagnostic(
                        "error",
                        "closed-form decoherence supports only sigma_z or sigma_x channels",
                    )
                )
            if len(active) > 1:
                diags.append(
                    Diagnostic("error", "closed-form decoherence supports a single channel")
                )
            if h.potential is not None and h.potential.kind == "linear":
                lam_a = h.potential.slope * cfg.window.a
                kernel = math.ceil(abs(8.0 * h.j_hop / lam_a)) + 20
                support = _state_m_support(cfg)
                if support is not None:
                    lo, hi = support
                    slack = min(lo - 2 * cfg.window.n_min, 2 * cfg.window.n_max - hi)
                    if slack < kernel:
                        diags.append(
                            Diagnostic(
                                "warning",
                                f"propagator kernel needs about {kernel} empty m-rows, "
                                f"estimated slack is {slack}",
                            )
                        )
        if dyn.dt is not None:
            norm_est = h.norm_estimate(cfg.window) + 2.0 * sum(g for _, _, g in dyn.noise_terms)
            if norm_est > 0 and dyn.dt * norm_est > 0.5:
                diags.append(
                    Diagnostic(
                        "error",
                        f"dt={dyn.dt} exceeds the stability heuristic "
                        f"0.5/norm_estimate = {0.5 / norm_est:.3e}",
                    )
                )
    elif isinstance(dyn, WalkDynamics):
        support = _state_m_support(cfg)
        if support is not None and dyn.mode == "walk":
            lo, hi = support
            site_lo, site_hi = lo // 2, hi // 2 + 1
            if (
                site_lo - dyn.steps <= cfg.window.n_min
                or site_hi + dyn.steps >= cfg.window.n_max
            ):
                diags.append(
                    Diagnostic(
                        "warning",
                        f"{dyn.steps} walk steps may reach the window boundary",
                    )
                )
    return diags


# ---------------------------------------------------------------------------
# Run pipeline
# ---------------------------------------------------------------------------

def _wm_boundary_weight(w: WignerMatrix) -> float:
    vals = w.values
    return float(np.max(np.abs(np.concatenate([vals[:2].reshape(-1), vals[-2:].reshape(-1)]))))


def _closed_form_snapshots(cfg: ScenarioConfig, dyn: ContinuousDynamics, w0: WignerMatrix):
    h = dyn.hamiltonian
    lam_a = h.lambda_a(cfg.window)
    active = [(nm, g) for nm, _, g in dyn.noise_terms if g > 0]
    snapshots = []
    for t in dyn.times:
        if h.spin_coupled:
            wt = spin_linear_propagate(w0, h.j_hop, lam_a, t)
        else:
            wt = linear_potential_propagate(w0, h.j_hop, lam_a, t)
        for name, gamma in active:
            wt = lindblad_wigner_closed(wt, name, gamma, t)
        snapshots.append(wt)
    return snapshots


def _rk4_snapshots(cfg: ScenarioConfig, dyn: ContinuousDynamics, rho0: DensityOperator):
    noise = dyn.noise_spec()
    result = lindblad_rk4(
        rho0,
        dyn.hamiltonian,
        noise,
        t_final=dyn.times[-1],
        dt=dyn.dt,
        snapshot_times=dyn.times,
        eps_boundary=cfg.tolerances.eps_boundary,
    )
    return [wigner_of_density(s, cfg.kgrid) for s in result.snapshots], result


def _sidecar(cfg: ScenarioConfig, command: str, w: WignerMatrix) -> dict:
    return {
        "window": {"n_min": cfg.window.n_min, "n_max": cfg.window.n_max},
        "a": cfg.window.a,
        "n_k": cfg.kgrid.n_k,
        "m_min": w.m_min,
        "m_max": w.m_max,
        "provenance": {
            "package": "lattice-wigner",
            "version": __version__,
            "command": command,
            "state": cfg.state_name,
        },
    }


def _spin_populations(rho: DensityOperator) -> np.ndarray:
    diag = np.real(np.diagonal(rho.matrix))
    return diag.reshape(rho.window.width, 2)


def run(cfg: ScenarioConfig, command: str, out_dir, quiet: bool = False) -> dict:
    """Execute a scenario and write its outputs; returns the manifest dict.

    Raises ConfigError for statically detectable problems and
    InvariantViolation / BoundaryLeakError for numerical failures; the
    manifest is written before a two-path violation is raised so the
    deviation is inspectable.
    """
    t_start = time.perf_counter()
    errors = [d for d in validate_config(cfg) if d.severity == "error"]
    if errors:
        raise ConfigError("; ".join(d.message for d in errors))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    state = build_state(cfg.state_name, cfg.state_params, cfg.window)
    rho0 = density_from_pure(state) if isinstance(state, PureState) else state
    w0 = wigner_of_density(rho0, cfg.kgrid)

    files = []
    diagnostics = {
        "initial_hermiticity_defect": hermiticity_defect(w0),
        "initial_normalization_error": abs(normalization_total(w0) - 1.0),
    }

    def emit(name: str, writer, *args) -> None:
        writer(out / name, *args)
        files.append(name)

    dyn = cfg.dynamics
    two_path_dev = None
    boundary = rho0.boundary_population()

    if command == "state" or dyn is None:
        emit("wigner.csv", write_wigner_csv, w0)
        sites, blocks = marginal_position(w0)
        emit("marginal_position.csv", write_position_marginal_csv, sites, blocks)
        emit("marginal_momentum.csv", write_momentum_marginal_csv, cfg.kgrid.points, marginal_momentum(w0))
        if command == "negativity":
            report = matrix_negativity(w0)
            emit(
                "negativity.json",
                write_json,
                {
                    "eta": report.eta,
                    "per_m": [[m, c] for m, c in report.per_m_contributions],
                    "params": {"state": cfg.state_name, **{k: v for k, v in cfg.state_params.items()}},
                },
            )
    elif isinstance(dyn, ContinuousDynamics):
        closed = rk4_snaps = rk4_result = None
        if dyn.method in ("closed_form", "both"):
            closed = _closed_form_snapshots(cfg, dyn, w0)
        if dyn.method in ("rk4", "both"):
            rk4_snaps, rk4_result = _rk4_snapshots(cfg, dyn, rho0)
        primary = closed if closed is not None else rk4_snaps
        if dyn.method == "both":
            two_path_dev = max(
                float(np.max(np.abs(a.values - b.values))) for a, b in zip(closed, rk4_snaps)
            )
        for i, (t, wt) in enumerate(zip(dyn.times, primary)):
            emit(f"snapshot_{i:03d}.csv", write_wigner_csv, wt, t)
            sites, blocks = marginal_position(wt)
            emit(f"marginal_position_{i:03d}.csv", write_position_marginal_csv, sites, blocks)
        emit(
            "negativity_timeseries.csv",
            write_timeseries_csv,
            negativity_timeseries(primary, dyn.times),
        )
        if rk4_result is not None:
            boundary = max(boundary, rk4_result.boundary_leak)
        if closed is not None:
            diagnostics["wigner_boundary_weight"] = max(_wm_boundary_weight(s) for s in closed)
    elif isinstance(dyn, WalkDynamics):
        steps_list, densities = walk_trajectory(
            rho0,
            dyn.coin,
            dyn.steps,
            noise=dyn.noise,
            include_walk=dyn.mode == "walk",
            snapshot_steps=dyn.snapshot_steps,
        )
        wms = [wigner_of_density(d, cfg.kgrid) for d in densities]
        for i, (step, rho, wt) in enumerate(zip(steps_list, densities, wms)):
            emit(f"snapshot_{i:03d}.csv", write_wigner_csv, wt, float(step))
            emit(
                f"site_distribution_{i:03d}.csv",
                write_site_distribution_csv,
                cfg.window.sites,
                _spin_populations(rho),
            )
            boundary = max(boundary, rho.boundary_population())
        emit(
            "negativity_timeseries.csv",
            write_timeseries_csv,
            negativity_timeseries(wms, [float(s) for s in steps_list]),
        )
    else:
        raise ConfigError(f"command {command!r} incompatible with the dynamics block")

    if command == "negativity" and dyn is not None:
        report = matrix_negativity(w0)
        emit(
            "negativity.json",
            write_json,
            {
                "eta": report.eta,
                "per_m": [[m, c] for m, c in report.per_m_contributions],
                "params": {"state": cfg.state_name, **{k: v for k, v in cfg.state_params.items()}},
            },
        )

    emit("wigner_meta.json", write_json, _sidecar(cfg, command, w0))

    diagnostics["boundary_leak"] = boundary
    if two_path_dev is not None:
        diagnostics["two_path_max_deviation"] = two_path_dev

    manifest = {
        "command": command,
        "config": cfg.raw,
        "package_version": __version__,
        "files": sorted(files),
        "diagnostics": diagnostics,
        "wall_clock_seconds": round(time.perf_counter() - t_start, 6),
    }
    write_json(out / "manifest.json", manifest)

    _verify_outputs(out, manifest)

    if not quiet:
        for name in sorted(files + ["manifest.json"]):
            print(out / name)
    if two_path_dev is not None and two_path_dev > cfg.tolerances.two_path:
        raise InvariantViolation(
            f"two-path deviation {two_path_dev:.3e} exceeds tolerance "
            f"{cfg.tolerances.two_path:.3e}"
        )
    return manifest


def _verify_outputs(out: Path, manifest: dict) -> None:
    """Manifest contract: every listed file exists and parses."""
    import json as _json

    for name in manifest["files"]:
        path = out / name
        if not path.is_file():
            raise InvariantViolation(f"manifest lists missing file {name}")
        if name.endswith(".json"):
            _json.loads(path.read_text())
        elif name.endswith(".csv"):
            first = path.read_text().splitlines()[0]
            if "," not in first:
                raise InvariantViolation(f"{name} has no CSV header")
