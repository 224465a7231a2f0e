"""Scenario configuration, the coupled solver/drift/monitor loop and verification suites."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from .constants import (
    ContractionConfig,
    audit_config,
    build_contraction_config,
    default_box,
    find_ball_constants,
    find_velocity_band,
    oa_extents,
    shift_velocity,
)
from .drift import advance_drift, characteristics_drift_burgers, prop14_lower_bound
from .errors import ConfigError, ShockShiftError
from .grid import Grid1D
from .hugoniot import (
    ShockTriple,
    diperna_dissipation,
    lax_audit,
    lax_dissipation_identity,
    liu_strengthen_check,
    reflected_curve,
    rh_residual,
    shock_curve,
)
from .monitor import (
    SERIES_COLUMNS,
    RunSeries,
    contraction_verdict,
    dissipation_check,
    dissipation_summary,
    drift_bound_check,
    l2_stability_check,
    sandwich_summary,
)
from .relent import PseudoNormConfig, comparability_constants, pseudo_norm, shifted_l2_distance
from .solver import SolverConfig, initial_data, stable_dt, step, write_snapshot
from .systems import DomainBox, SystemDescriptor, compatibility_check, entropy_hessian, make_system, reflect

# ---------------------------------------------------------------------------
# configuration schema


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SystemSpec(_Strict):
    name: Literal["burgers", "isentropic", "euler"]
    gamma: Optional[float] = None
    pressure: Optional[Literal["power"]] = None


class ShockSpec(_Strict):
    """Either explicit ``left``/``right``/``sigma`` or a ``base`` state and curve parameter ``s``."""

    left: Optional[list[float]] = None
    right: Optional[list[float]] = None
    sigma: Optional[float] = None
    base: Optional[list[float]] = None
    s: Optional[float] = None

    @model_validator(mode="after")
    def _one_form(self):
        explicit = self.left is not None and self.right is not None and self.sigma is not None
        curve = self.base is not None and self.s is not None
        if explicit == curve:
            raise ValueError("give either left/right/sigma or base/s")
        return self


class GridSpec(_Strict):
    x_min: float
    x_max: float
    n_cells: int = Field(ge=8)


class SolverSpec(_Strict):
    T: float = Field(ge=0)
    cfl: float = Field(default=0.45, gt=0, le=1)
    boundary: Literal["farfield", "periodic"] = "farfield"
    scheme: Optional[Literal["godunov", "hll", "hllc", "rusanov"]] = None


class InitialSpec(_Strict):
    kind: Literal["pure_shock", "shock_plus_bump", "prop14", "random_perturbation"]
    params: dict = Field(default_factory=dict)


class ConstantsSpec(_Strict):
    v: Optional[float] = None
    a: Optional[float] = None
    n_samples: int = Field(default=10_000, ge=16)
    n_bases: int = Field(default=64, ge=4)
    n_s: int = Field(default=64, ge=8)


class DriftSpec(_Strict):
    window_cells: float = Field(default=4.0, gt=0)
    stencil_skip: int = Field(default=2, ge=0)


class MonitorSpec(_Strict):
    C_tol: float = Field(default=5.0, gt=0)
    dissipation_tol: Optional[float] = None
    snapshot_every: int = Field(default=0, ge=0)


class ScenarioConfig(_Strict):
    system: SystemSpec
    shock: ShockSpec
    grid: GridSpec
    solver: SolverSpec
    initial_data: InitialSpec
    constants: ConstantsSpec = Field(default_factory=ConstantsSpec)
    drift: DriftSpec = Field(default_factory=DriftSpec)
    monitor: MonitorSpec = Field(default_factory=MonitorSpec)
    output_dir: Optional[str] = None
    seed: int = 0


def load_scenario(source: Union[str, Path, dict]) -> ScenarioConfig:
    """Parse a scenario from a JSON file path or a dict; unknown keys are rejected."""
    try:
        if isinstance(source, dict):
            return ScenarioConfig.model_validate(source)
        text = Path(source).read_text()
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario: {exc}") from exc


def scenario_hash(config: ScenarioConfig) -> str:
    payload = config.model_dump(mode="json", exclude={"output_dir"})
    blob = json.dumps({"config": payload, "version": __version__}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def system_from_spec(spec: SystemSpec) -> SystemDescriptor:
    params = {}
    if spec.gamma is not None:
        params["gamma"] = spec.gamma
    if spec.pressure is not None:
        params["pressure"] = spec.pressure
    return make_system(spec.name, **params)


def shock_from_spec(system: SystemDescriptor, spec: ShockSpec) -> ShockTriple:
    """Build the shock and check the Rankine-Hugoniot invariant."""
    try:
        if spec.base is not None:
            curve = shock_curve(system, np.asarray(spec.base, float), 1, spec.s, 201)
            shock = ShockTriple(curve.base.copy(), curve.states[-1].copy(), float(curve.sigma[-1]))
        else:
            shock = ShockTriple(np.asarray(spec.left, float), np.asarray(spec.right, float), float(spec.sigma))
        shock.validate(system)
    except ShockShiftError as exc:
        raise ConfigError(f"shock rejected: {exc}") from exc
    return shock


# ---------------------------------------------------------------------------
# runs


@dataclass
class RunRecord:
    scenario_hash: str
    constants: ContractionConfig
    series: RunSeries
    verdicts: dict
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.get("pass", True) for v in self.verdicts.values() if isinstance(v, dict))


def constants_audit(config: ContractionConfig) -> dict:
    """The constants record written to ``constants.json``."""
    d = config.to_dict()
    audit = d.pop("audit")
    d["oa_radius"] = audit.get("oa_radius")
    d["seed"] = audit.get("seed")
    d["sample_counts"] = {
        "ball": audit.get("n_samples"),
        "bank_bases": audit.get("bank_bases"),
        "bank_s_points": audit.get("bank_s_points"),
    }
    d["margins"] = {
        "beta": d["beta"],
        "kappa": audit.get("kappa"),
        "delta": audit.get("delta"),
        "C_lemma": audit.get("C_lemma"),
        "identity_gap": audit.get("identity_gap"),
    }
    d["audit"] = audit
    return d


def _write_series(series: RunSeries, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SERIES_COLUMNS)
        for row in series.rows():
            w.writerow([repr(float(v)) for v in row])


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def run_scenario(config: Union[ScenarioConfig, dict, str, Path], out_dir: Optional[Union[str, Path]] = None, contraction: Optional[ContractionConfig] = None) -> RunRecord:
    """Run solver, drift and monitor in lockstep and evaluate the verdicts.

    ``contraction`` can be passed to reuse constants computed earlier.
    Output files are written when an output directory is given (argument
    or ``config.output_dir``); a failing run still writes its partial series.
    """
    if not isinstance(config, ScenarioConfig):
        config = load_scenario(config)
    started = time.time()
    system = system_from_spec(config.system)
    shock = shock_from_spec(system, config.shock)
    if config.initial_data.kind == "prop14":
        expected = (np.array([1.0]), np.array([-1.0]), 0.0)
        if system.name != "burgers" or not (
            np.allclose(shock.left, expected[0]) and np.allclose(shock.right, expected[1]) and shock.sigma == 0.0
        ):
            raise ConfigError("prop14 data needs the Burgers shock (1, -1, 0)")

    if contraction is None:
        contraction = build_contraction_config(
            system,
            shock,
            n_samples=config.constants.n_samples,
            seed=config.seed,
            v=config.constants.v,
            a=config.constants.a,
            n_bases=config.constants.n_bases,
            n_s=config.constants.n_s,
        )
    grid = Grid1D(config.grid.x_min, config.grid.x_max, config.grid.n_cells)
    sconf = SolverConfig(
        T=config.solver.T,
        cfl=config.solver.cfl,
        boundary=config.solver.boundary,
        left_state=shock.left,
        right_state=shock.right,
        scheme=config.solver.scheme,
    )
    fld = initial_data(system, config.initial_data.kind, config.initial_data.params, grid, shock.left, shock.right)
    window_h = config.drift.window_cells * grid.dx
    skip = config.drift.stencil_skip

    out = Path(out_dir) if out_dir is not None else (Path(config.output_dir) if config.output_dir else None)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(constants_audit(contraction), out / "constants.json")

    series = RunSeries()
    x = 0.0
    k = 0
    error = None
    try:
        while True:
            done = fld.time >= config.solver.T - 1e-14 * max(1.0, config.solver.T)
            dt = 0.0 if done else stable_dt(system, fld, sconf)
            nxt = fld if done else step(system, fld, sconf, dt)
            d = advance_drift(system, contraction, fld, x, dt, nxt, window_h, skip)
            Dt = dissipation_check(system, contraction, d.traces, d.xdot)
            norm_cfg = PseudoNormConfig(shock.left, shock.right, contraction.a, x)
            series.append(
                t=fld.time,
                Ea=pseudo_norm(system, fld, norm_cfg),
                l2_dist=shifted_l2_distance(fld, shock.left, shock.right, x),
                x=x,
                xdot=d.xdot,
                vmin=d.vmin,
                vmax=d.vmax,
                Dt=Dt,
            )
            if out is not None and config.monitor.snapshot_every and k % config.monitor.snapshot_every == 0:
                write_snapshot(system, fld, out / f"snap_{k}.csv")
            if done:
                break
            x = d.x_new
            fld = nxt
            k += 1
    except ShockShiftError as exc:
        error = exc
    finally:
        if out is not None:
            _write_series(series, out / "series.csv")
    if error is not None:
        raise error

    verdicts = evaluate_run(system, contraction, series, grid, config, shock)
    record = RunRecord(
        scenario_hash(config),
        contraction,
        series,
        verdicts,
        {"wall_seconds": time.time() - started, "steps": k, "version": __version__},
    )
    if out is not None:
        _dump_json({"scenario_hash": record.scenario_hash, **verdicts}, out / "verdicts.json")
    return record


def evaluate_run(system, contraction: ContractionConfig, series: RunSeries, grid: Grid1D, config: ScenarioConfig, shock: ShockTriple) -> dict:
    T = config.solver.T
    dx = grid.dx
    cv = contraction_verdict(series.Ea, dx, T, config.monitor.C_tol)
    t = series.array("t")
    disp = series.array("x") - shock.sigma * t
    U0 = series.l2_dist[0]
    if T >= 10:
        db = drift_bound_check(t, disp, dx, U0)
        drift = {"p": db.p, "constant": db.constant, "pass": db.passed, "vacuous": db.vacuous, "n_points": db.n_points}
    else:
        drift = {"p": None, "pass": True, "skipped": "needs T >= 10"}
    box = default_box(system, shock)
    omega = np.vstack([np.ravel(shock.left), np.ravel(shock.right)])
    C1, C2 = comparability_constants(system, omega, box, n_samples=4000, seed=config.seed)
    l2 = l2_stability_check(series.l2_dist, U0, C1, C2, contraction.a)
    tol = config.monitor.dissipation_tol
    if tol is None:
        tol = config.monitor.C_tol * dx
    diss = dissipation_summary(series.Dt, tol)
    sw = sandwich_summary(series.xdot, series.vmin, series.vmax)
    return {
        "contraction": {"pass": cv.passed, "max_violation": cv.value, "tolerance": cv.tolerance},
        "drift_bound": drift,
        "l2": {"pass": l2.passed, "ratio": l2.value, "K": l2.flags["K"], "C1": C1, "C2": C2},
        "dissipation": {"pass": diss.passed, "violations": diss.flags["violations"], "worst": diss.value, "tolerance": tol},
        "sandwich": {"pass": sw.passed, "violations": sw.flags["violations"], "fraction": sw.value},
    }


# ---------------------------------------------------------------------------
# explicit Burgers experiment


def _fit(t, v):
    slope, intercept = np.polyfit(np.log(t), np.log(v), 1)
    return float(slope), float(intercept)


def prop14_experiment(
    r: float,
    eps: float,
    T: float = 100.0,
    n_steps: Optional[int] = None,
    fv_cells: Optional[int] = None,
    fv_x_min: float = -50.0,
) -> dict:
    """Exact-characteristics drift for the explicit Burgers data against its lower bound.

    The growth exponent ``p`` is fitted as ``1 + slope`` of ``log x'`` against
    ``log t`` on the uniform time grid restricted to ``[1, T]``; the direct
    fit of ``log x`` is reported as ``p_logx``. Passing needs the bound on
    ``[1, T]`` and ``|p - (1/2 - r)| <= 0.05``.
    """
    if n_steps is None:
        n_steps = max(2000, int(200 * T))
    res = characteristics_drift_burgers(r, eps, T, n_steps)
    late = res.t >= 1.0
    target = 0.5 - r
    report = {
        "r": r,
        "eps": eps,
        "T": T,
        "n_steps": n_steps,
        "target_exponent": target,
        "checks": res.checks,
    }
    if eps == 0.0:
        report.update({"x_1": 0.0, "p": None, "p_logx": None, "bound_holds": True, "pass": True, "vacuous": True})
        return report
    bound = prop14_lower_bound(res.t[late], r, eps)
    corrected = prop14_lower_bound(res.t[late], r, eps, corrected=True)
    slope, _ = _fit(res.t[late], res.xdot[late])
    p = 1.0 + slope
    p_logx, _ = _fit(res.t[late], res.x[late])
    x1 = float(np.interp(1.0, res.t, res.x))
    holds = bool(np.all(res.x[late] >= bound))
    report.update(
        {
            "x_1": x1,
            "bound_1": float(prop14_lower_bound(1.0, r, eps)),
            "bound_holds": holds,
            "worst_bound_gap": float(np.min(res.x[late] - bound)),
            "corrected_bound_holds": bool(np.all(res.x[late] >= corrected)),
            "p": p,
            "p_logx": p_logx,
            "exponent_pass": abs(p - target) <= 0.05,
            "vacuous": False,
        }
    )
    report["pass"] = holds and report["exponent_pass"]
    if fv_cells:
        report["fv"] = _prop14_fv(r, eps, T, fv_cells, fv_x_min, res)
    return report


def _prop14_fv(r, eps, T, n_cells, x_min, exact):
    """Finite-volume counterpart: drift of the simulated solution against the exact one."""
    scenario = ScenarioConfig.model_validate(
        {
            "system": {"name": "burgers"},
            "shock": {"left": [1.0], "right": [-1.0], "sigma": 0.0},
            "grid": {"x_min": x_min, "x_max": 5.0, "n_cells": n_cells},
            "solver": {"T": T},
            "initial_data": {"kind": "prop14", "params": {"r": r, "eps": eps}},
        }
    )
    rec = run_scenario(scenario)
    t = rec.series.array("t")
    x = rec.series.array("x")
    x_exact = np.interp(t, exact.t, exact.x)
    dx = (5.0 - x_min) / n_cells
    return {
        "n_cells": n_cells,
        "x_T": float(x[-1]),
        "x_T_exact": float(exact.x[-1]),
        "max_abs_error": float(np.max(np.abs(x - x_exact))),
        "dx": dx,
        "verdicts": rec.verdicts,
    }


# ---------------------------------------------------------------------------
# verification suite

PINNED_BASES = {
    "burgers": np.array([1.0]),
    "isentropic": np.array([1.0, 0.0]),
    "euler": np.array([1.0, 0.0, 1.0]),
}
PINNED_BOXES = {
    "burgers": DomainBox({"u": (-2.0, 2.0)}),
    "isentropic": DomainBox({"rho": (0.1, 3.0), "u": (-3.0, 3.0)}),
    "euler": DomainBox({"rho": (0.1, 2.0), "u": (-2.0, 2.0), "e": (0.1, 2.0)}),
}


def _item(items, name, passed, **values):
    items.append({"name": name, "pass": bool(passed), **{k: _plain(v) for k, v in values.items()}})


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def verify_suite(seed: int = 0, systems: Optional[dict] = None, constants: bool = True) -> list[dict]:
    """Identity and hypothesis audits for the built-in systems at pinned parameters.

    ``systems`` maps names to descriptors and overrides the built-ins (used
    to inject defects). Returns one dict per item with a ``pass`` flag.
    """
    chosen = {"burgers": make_system("burgers"), "isentropic": make_system("isentropic"), "euler": make_system("euler")}
    if systems:
        chosen.update(systems)
    items: list[dict] = []
    for name, system in chosen.items():
        _verify_system(items, name, system, seed)
    if constants:
        _verify_constants(items, chosen["burgers"], seed)
    return items


def _guard(items, name, fn):
    try:
        fn()
    except Exception as exc:  # failures are report entries
        _item(items, name, False, error=f"{type(exc).__name__}: {exc}")


def _verify_system(items, name, system, seed):
    box = PINNED_BOXES[name]
    base = PINNED_BASES[name]
    samples = box.sample(system, 100, seed, interior_only=True)

    def compat():
        rep = compatibility_check(system, samples)
        _item(items, f"{name}:compatibility", rep.passed, residual=rep.residual, threshold=rep.threshold)

    def hessian():
        H = entropy_hessian(system, samples)
        lam = float(np.min(np.linalg.eigvalsh(0.5 * (H + np.swapaxes(H, -1, -2)))))
        _item(items, f"{name}:entropy_convexity", lam > 0, min_eigenvalue=lam)

    def comparability():
        C1, C2 = comparability_constants(system, base, box, n_samples=2000, seed=seed)
        ok = 0 < C1 <= C2
        if name == "burgers":
            ok = ok and abs(C1 - 0.5) < 1e-12 and abs(C2 - 0.5) < 1e-12
        _item(items, f"{name}:comparability", ok, C1=C1, C2=C2)

    def curves():
        curve = shock_curve(system, base, 1, 1.0, 101)
        rep = liu_strengthen_check(system, curve)
        _item(items, f"{name}:liu", rep.liu_pass, min_margin=float(np.min(rep.liu_margin[1:-1])))
        _item(items, f"{name}:strengthening", rep.strengthen_pass, min_margin=float(np.min(rep.strengthen_margin[1:-1])))
        _item(items, f"{name}:lax", lax_audit(system, curve) > 0, min_margin=lax_audit(system, curve))
        n_direct = shock_curve(system, base, "n", 1.0, 101)
        n_reflected = reflected_curve(system, shock_curve(reflect(system), base, 1, 1.0, 101))
        worst_res = 0.0
        for k in range(len(n_reflected.s)):
            left, right = n_reflected.pair(k)
            res, _ = rh_residual(system, left, right, n_reflected.sigma[k])
            worst_res = max(worst_res, float(np.max(np.abs(res))))
        gap = float(max(np.max(np.abs(n_direct.states - n_reflected.states)), np.max(np.abs(n_direct.sigma - n_reflected.sigma))))
        _item(items, f"{name}:reflection", worst_res < 1e-10 and gap < 1e-8, rh_residual=worst_res, curve_gap=gap)

        rng = np.random.default_rng(seed)
        tol = 1e-8 if system.closed_form and name == "burgers" else 1e-6
        worst = 0.0
        for _ in range(20):
            s = float(rng.uniform(0.05, 1.0))
            V = box.sample(system, 1, int(rng.integers(1 << 30)), interior_only=True)[0]
            worst = max(worst, abs(lax_dissipation_identity(system, base, s, V, curve).gap))
        _item(items, f"{name}:dissipation_identity", worst < tol, worst_gap=worst)

        s0 = 0.5
        res = diperna_dissipation(system, base, 0.25, s0, curve)
        Ds = [diperna_dissipation(system, base, float(s), s0, curve).D for s in np.linspace(0.0, 1.0, 11)]
        ok = max(Ds) <= 1e-12 and abs(res.D - res.D_integral) < 1e-6 and res.kappa > 0
        _item(items, f"{name}:diperna", ok, D=res.D, D_integral=res.D_integral, kappa=res.kappa, delta=res.delta)

    for label, fn in (("compatibility", compat), ("entropy_convexity", hessian), ("comparability", comparability), ("curves", curves)):
        _guard(items, f"{name}:{label}", fn)


def _verify_constants(items, system, seed):
    def run():
        shock = ShockTriple(np.array([1.0]), np.array([-1.0]), 0.0)
        v_lo, v_hi, v = find_velocity_band(system, shock)
        _item(items, "burgers:velocity_band", abs(v_lo - 2 / 3) < 1e-6 and abs(v_hi - 2) < 1e-6, v_lo=v_lo, v_hi=v_hi)
        C0, beta = find_ball_constants(system, shock, 4 / 3, seed=seed)
        _item(items, "burgers:ball_constants", 0.30 <= C0 <= 1 / 3 + 1e-6 and beta > 0, C0=C0, beta=beta)
        ext = oa_extents(system, shock.left, shock.right, 0.25, np.array([[1.0], [-1.0]]))
        ok = abs(1 + ext[0] - 3) < 1e-3 and abs(1 - ext[1] - 1 / 3) < 1e-3
        _item(items, "burgers:oa_quarter", ok, upper=float(1 + ext[0]), lower=float(1 - ext[1]))
        cfg = build_contraction_config(system, shock, seed=seed)
        _item(items, "burgers:weight", 0 < cfg.a <= 0.006, a=cfg.a, epsilon=cfg.epsilon)
        _item(items, "burgers:perturbed_identity", cfg.audit["identity_gap"] < 1e-10, gap=cfg.audit["identity_gap"])
        audit = audit_config(system, cfg, seed=seed + 1)
        ok = audit["band"] and audit["a_below_one"] and audit["oa_contained"] and audit["ball_margin"]
        _item(items, "burgers:resampled_audit", ok, **{k: v for k, v in audit.items() if not isinstance(v, bool)})
        U = PINNED_BOXES["burgers"].sample(system, 1000, seed)
        V = shift_velocity(system, U, cfg)
        from .drift import TracePair

        worst = max(
            dissipation_check(system, cfg, TracePair(u, u, 0), float(vv)) for u, vv in zip(U, np.atleast_1d(V))
        )
        _item(items, "burgers:constant_state_dissipation", worst <= 1e-12, worst=worst)

    _guard(items, "burgers:constants", run)
