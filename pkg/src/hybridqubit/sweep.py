"""Parameter sweeps, dynamics trajectories and validation reports.

Results are written as plain CSV (one file per observable, grid flattened
row-major) plus a JSON bundle that also carries provenance. Missing values
are empty CSV cells and JSON nulls.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, spins
from .dynamics import HBAR, evolve_closed_form, evolve_numeric, max_transfer, switching_time
from .errors import ConfigError, HybridQubitError, NumericalError, PerturbativeValidityWarning
from .fock import FockState, build_basis
from .hubbard import DotParameters, build_hubbard, check_hierarchy, exact_qubit_gap, exact_spectrum
from .spins import QubitState, bloch_coordinates, project_to_logical
from .sweff import (HIGH_ENERGY, LEFT_DOUBLE, REFERENCE, RIGHT_DOUBLE, EffectiveCouplings, denominators,
                    effective_couplings, extract_couplings_from_sw, numerical_sw, sw_spectral_deviation,
                    traceless)

OBSERVABLES = ("eigenvalues_2x2", "prob0_eig1", "prob0_eig2", "J1", "J2", "Jprime", "exact_gap", "sw_residual")
DEFAULT_RANGE = (0.3, 1.5)


# ---------------------------------------------------------------- config IO

def parse_config(data: dict) -> tuple[DotParameters, EffectiveCouplings | None]:
    """Flat DotParameters keys (meV); an optional ``couplings`` object with
    J1, J2, Jprime bypasses the Schrieffer-Wolff step for the qubit dynamics."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    override = data.pop("couplings", None)
    params = DotParameters.from_dict(data)
    if override is not None:
        if not isinstance(override, dict) or set(override) != {"J1", "J2", "Jprime"}:
            raise ConfigError("couplings must be an object with exactly J1, J2, Jprime")
        try:
            override = EffectiveCouplings(**{k: float(v) for k, v in override.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad couplings: {exc}") from exc
    return params, override


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def load_config(path) -> tuple[DotParameters, EffectiveCouplings | None]:
    return parse_config(_read_json(path))


# ------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.name not in DotParameters.field_names():
            raise ConfigError(f"axis parameter {self.name!r} is not a DotParameters field")
        if not isinstance(self.steps, int) or self.steps < 2:
            raise ConfigError(f"axis {self.name}: steps must be an integer >= 2")
        if not self.min < self.max:
            raise ConfigError(f"axis {self.name}: need min < max")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "steps": self.steps}


@dataclass(frozen=True)
class SweepSpec:
    base: DotParameters
    axis1: Axis
    axis2: Axis
    observables: tuple[str, ...] = OBSERVABLES
    superexchange_prefactor: float = 4.0

    def __post_init__(self):
        unknown = [o for o in self.observables if o not in OBSERVABLES]
        if unknown:
            raise ConfigError(f"unknown observable(s): {', '.join(unknown)}")
        if not self.observables:
            raise ConfigError("no observables requested")
        if self.axis1.name == self.axis2.name:
            raise ConfigError("the two sweep axes must be different parameters")
        object.__setattr__(self, "observables", tuple(self.observables))

    @classmethod
    def from_dict(cls, data: dict, base: DotParameters) -> "SweepSpec":
        allowed = {"axis1", "axis2", "observables", "superexchange_prefactor"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown sweep key(s): {', '.join(unknown)}")

        def axis(d):
            if not isinstance(d, dict) or set(d) != {"name", "min", "max", "steps"}:
                raise ConfigError("an axis needs exactly name, min, max, steps")
            return Axis(d["name"], float(d["min"]), float(d["max"]), d["steps"])

        try:
            return cls(base, axis(data["axis1"]), axis(data["axis2"]),
                       tuple(data.get("observables", OBSERVABLES)),
                       float(data.get("superexchange_prefactor", 4.0)))
        except KeyError as exc:
            raise ConfigError(f"sweep spec misses {exc}") from exc

    def to_dict(self) -> dict:
        return {"axis1": self.axis1.to_dict(), "axis2": self.axis2.to_dict(),
                "observables": list(self.observables),
                "superexchange_prefactor": self.superexchange_prefactor}


def default_sweep(base: DotParameters | None = None, steps: int = 50) -> SweepSpec:
    from .hubbard import SILICON_PARAMETERS
    lo, hi = DEFAULT_RANGE
    return SweepSpec(base or SILICON_PARAMETERS, Axis("t13", lo, hi, steps), Axis("t23", lo, hi, steps))


@dataclass
class SweepResult:
    axis1: Axis
    axis2: Axis
    data: dict[str, np.ndarray]
    provenance: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "axes": {"axis1": {**self.axis1.to_dict(), "values": _jsonable(self.axis1.values())},
                     "axis2": {**self.axis2.to_dict(), "values": _jsonable(self.axis2.values())}},
            "observables": {k: _jsonable(v) for k, v in self.data.items()},
            "provenance": self.provenance,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SweepResult":
        axes = d["axes"]

        def axis(a):
            return Axis(a["name"], a["min"], a["max"], a["steps"])

        data = {k: np.array(_from_jsonable(v), dtype=float) for k, v in d["observables"].items()}
        return cls(axis(axes["axis1"]), axis(axes["axis2"]), data, d.get("provenance", {}))

    def equals(self, other: "SweepResult") -> bool:
        return (self.axis1 == other.axis1 and self.axis2 == other.axis2
                and self.provenance == other.provenance
                and self.data.keys() == other.data.keys()
                and all(np.array_equal(self.data[k], other.data[k], equal_nan=True) for k in self.data))

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        g1, g2 = self.axis1.values(), self.axis2.values()
        for name, arr in self.data.items():
            path = out / f"{name}.csv"
            value_cols = ["eig1", "eig2"] if arr.ndim == 3 else [name]
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow([self.axis1.name, self.axis2.name, *value_cols])
                for i, x in enumerate(g1):
                    for j, y in enumerate(g2):
                        vals = arr[i, j] if arr.ndim == 3 else [arr[i, j]]
                        w.writerow([_fmt(x), _fmt(y), *(_fmt(v) for v in vals)])
            written.append(path)
        path = out / "sweep.json"
        path.write_text(json.dumps(self.to_json_dict(), indent=1, sort_keys=True) + "\n")
        written.append(path)
        return written


def read_sweep(path) -> SweepResult:
    return SweepResult.from_json_dict(json.loads(Path(path).read_text()))


def _fmt(v) -> str:
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _jsonable(a):
    if isinstance(a, np.ndarray):
        return [_jsonable(x) for x in a]
    v = float(a)
    return None if math.isnan(v) else v


def _from_jsonable(a):
    if isinstance(a, list):
        return [_from_jsonable(x) for x in a]
    return math.nan if a is None else a


def _cell(params: DotParameters, observables, prefactor: float) -> tuple[dict, str | None]:
    out = {}
    error = None
    need_sw = [o for o in observables if o not in ("exact_gap",)]
    if need_sw:
        try:
            c = effective_couplings(params, prefactor, warn=False)
            lh = project_to_logical(c)
            w, v = lh.eigh()
            p0 = np.abs(v[0, :]) ** 2
            vals = {"eigenvalues_2x2": w, "prob0_eig1": p0[0], "prob0_eig2": p0[1],
                    "J1": c.J1, "J2": c.J2, "Jprime": c.Jprime}
            if "sw_residual" in observables:
                vals["sw_residual"] = sw_spectral_deviation(params, prefactor)
            out.update({k: vals[k] for k in observables if k in vals})
        except HybridQubitError as exc:
            error = str(exc)
    if "exact_gap" in observables:
        out["exact_gap"] = exact_qubit_gap(params)
    return out, error


def run_sweep(spec: SweepSpec, workers: int = 1, timestamp: bool = True) -> SweepResult:
    """Evaluate the observables on the axis1 x axis2 grid.

    Cells are independent; with ``workers > 1`` they run in a thread pool and
    are assembled in grid order. Cells whose couplings are singular are NaN.
    """
    g1, g2 = spec.axis1.values(), spec.axis2.values()
    cells = [spec.base.replace(**{spec.axis1.name: float(x), spec.axis2.name: float(y)})
             for x in g1 for y in g2]

    def job(p):
        return _cell(p, spec.observables, spec.superexchange_prefactor)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(job, cells))
        else:
            results = [job(p) for p in cells]

    n1, n2 = len(g1), len(g2)
    data = {}
    for o in spec.observables:
        shape = (n1, n2, 2) if o == "eigenvalues_2x2" else (n1, n2)
        data[o] = np.full(shape, np.nan)
    failed = []
    for n, (vals, err) in enumerate(results):
        i, j = divmod(n, n2)
        for k, v in vals.items():
            data[k][i, j] = v
        if err:
            failed.append([i, j, err])
    return SweepResult(spec.axis1, spec.axis2, data, _provenance(
        {"parameters": spec.base.as_dict(), "sweep": spec.to_dict()}, timestamp, failed_cells=failed))


def _provenance(config: dict, timestamp: bool, **extra) -> dict:
    return {"artifact": "hybridqubit", "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None,
            "config": config, **extra}


# ----------------------------------------------------------------- dynamics

DYNAMICS_COLUMNS = ("t_ps", "re_a", "im_a", "re_b", "im_b", "prob1", "x", "y", "z")


@dataclass
class Trajectory:
    table: np.ndarray
    couplings: EffectiveCouplings
    provenance: dict = field(default_factory=dict)
    columns: tuple[str, ...] = DYNAMICS_COLUMNS

    def column(self, name: str) -> np.ndarray:
        return self.table[:, self.columns.index(name)]

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.table:
                w.writerow([_fmt(v) for v in row])
        path.with_suffix(".json").write_text(json.dumps(self.provenance, indent=1, sort_keys=True) + "\n")
        return path


def _resolve(source) -> EffectiveCouplings:
    if isinstance(source, EffectiveCouplings):
        return source
    if isinstance(source, tuple):
        params, override = source
        return override if override is not None else effective_couplings(params, warn=False)
    return effective_couplings(source, warn=False)


def run_dynamics(source, t_max: float, samples: int, psi0: QubitState | None = None,
                 seed: int = 0, hbar: float = HBAR, timestamp: bool = True) -> Trajectory:
    """Closed-form trajectory on an even time grid [0, t_max] (ps) with Bloch coordinates.

    ``source`` is DotParameters, EffectiveCouplings or the (params, override)
    pair returned by ``load_config``. Ten random times are re-evaluated with
    the eigendecomposition propagator; the worst deviation goes in the
    provenance and must stay below 1e-8.
    """
    if not isinstance(samples, int) or samples < 2:
        raise ConfigError("samples must be an integer >= 2")
    if not t_max > 0:
        raise ConfigError("t_max must be positive")
    psi0 = psi0 or QubitState.zero()
    c = _resolve(source)
    lh = project_to_logical(c)
    ts = np.linspace(0.0, t_max, samples)
    rows = []
    for t in ts:
        q = evolve_closed_form(lh, psi0, float(t), hbar)
        rows.append([t, q.a.real, q.a.imag, q.b.real, q.b.imag, abs(q.b) ** 2, *bloch_coordinates(q)])
    rng = np.random.default_rng(seed)
    check_t = np.sort(rng.uniform(0.0, t_max, 10))
    dev = max(float(np.abs(evolve_closed_form(lh, psi0, float(t), hbar).vector
                           - evolve_numeric(lh, psi0, float(t), hbar)).max()) for t in check_t)
    if dev > 1e-8:
        raise NumericalError(f"closed form and propagator disagree by {dev:.3e}")
    sw = switching_time(c, hbar)
    config = {"couplings": {"J1": c.J1, "J2": c.J2, "Jprime": c.Jprime},
              "psi0": [psi0.a.real, psi0.a.imag, psi0.b.real, psi0.b.imag],
              "t_max_ps": t_max, "samples": samples, "seed": seed, "hbar_meV_ps": hbar}
    if isinstance(source, tuple):
        config["parameters"] = source[0].as_dict()
    elif isinstance(source, DotParameters):
        config["parameters"] = source.as_dict()
    prov = _provenance(config, timestamp, oracle_check={"times_ps": check_t.tolist(), "max_deviation": dev},
                       switching={"t_star_ps": sw.t_star, "max_transfer": sw.max_transfer})
    return Trajectory(np.array(rows), c, prov)


# --------------------------------------------------------------- validation

def _p_weighted_levels(params: DotParameters) -> np.ndarray:
    """Exact levels of the eight eigenstates with the largest weight on (1,1,1)."""
    basis = build_basis(3)
    res = exact_spectrum(build_hubbard(params, basis))
    p_mask = np.array([FockState(s).orbital_occupancy() == REFERENCE for s in basis.states])
    weight = (np.abs(res.eigenvectors[p_mask, :]) ** 2).sum(axis=0)
    keep = np.sort(np.argsort(-weight, kind="stable")[:8])
    return res.eigenvalues[keep]


def validate(params: DotParameters, override: EffectiveCouplings | None = None,
             relative_threshold: float = 0.1) -> dict:
    """Diagnostics for one parameter set. Never raises on physics problems; records them."""
    rep: dict = {"parameters": params.as_dict(), "warnings": []}
    h = check_hierarchy(params)
    rep["hierarchy"] = {"ratios": h.ratios, "warnings": h.warnings}
    rep["warnings"] += h.warnings

    den = denominators(params, RIGHT_DOUBLE + LEFT_DOUBLE + HIGH_ENERGY)
    rep["denominators"] = {"".join(map(str, k)): {"value": v, "sign": "zero" if v == 0 else ("+" if v > 0 else "-"),
                                                  "retained": k not in HIGH_ENERGY}
                           for k, v in den.items()}
    for k, v in den.items():
        if k in HIGH_ENERGY:
            continue
        if v == 0:
            rep["warnings"].append(f"vanishing denominator E{k} - E(111)")
        elif v < 0:
            rep["warnings"].append(f"negative denominator E{k} - E(111) = {v:.4g} meV")

    couplings = override
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbativeValidityWarning)
        try:
            analytic = effective_couplings(params)
            couplings = couplings or analytic
            num = numerical_sw(params)
            fit = extract_couplings_from_sw(num)
            dev4 = sw_spectral_deviation(params, 4.0)
            dev2 = sw_spectral_deviation(params, 2.0)
            spread = float(np.ptp(np.linalg.eigvalsh(traceless(spins.heisenberg_hamiltonian(analytic).matrix))))
            rel = dev4 / spread if spread > 0 else (0.0 if dev4 == 0 else math.inf)
            exact = _p_weighted_levels(params)
            full = np.linalg.eigvalsh(numerical_sw(params, classes=RIGHT_DOUBLE + LEFT_DOUBLE + HIGH_ENERGY).matrix)
            exact_dev = float(np.abs(np.sort(exact) - full).max())
            rep["sw"] = {
                "analytic": {"J1": analytic.J1, "J2": analytic.J2, "Jprime": analytic.Jprime},
                "numerical_fit": {"J1": fit.couplings.J1, "J2": fit.couplings.J2,
                                  "Jprime": fit.couplings.Jprime, "residual": fit.residual},
                "spectral_deviation": dev4,
                "relative_deviation": rel,
                "spectral_deviation_prefactor2": dev2,
                "flagged": bool(rel > relative_threshold),
                "exact_deviation": exact_dev,
                "exact_flagged": bool(exact_dev > relative_threshold * max(spread, 1e-12)),
            }
            if rep["sw"]["flagged"]:
                rep["warnings"].append(f"analytic vs numerical Schrieffer-Wolff deviation {dev4:.4g} meV "
                                       f"({rel:.1%} of the exchange spectrum width)")
            if rep["sw"]["exact_flagged"]:
                rep["warnings"].append(f"second-order reduction misses exact levels by {exact_dev:.4g} meV")
        except HybridQubitError as exc:
            rep["sw"] = {"error": str(exc)}
            rep["warnings"].append(f"Schrieffer-Wolff step failed: {exc}")

    if couplings is not None:
        rep["doublets"] = _doublet_report(couplings)
        rep["switching"] = _switching_report(couplings)
    rep["right_dot_check"] = _doublet_report(EffectiveCouplings(0.0, 1.0, 0.0))
    return rep


def _doublet_report(c: EffectiveCouplings) -> dict:
    h = spins.heisenberg_hamiltonian(c).matrix
    s2, sz = spins.total_spin_operators()
    w = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.abs(w).max()))
    corrected = spins.doublet_energies(c)
    literal = spins.doublet_energies_literal(c)

    def is_eig(e):
        return bool(np.abs(w - e).min() <= 1e-10 * scale)

    return {"couplings": {"J1": c.J1, "J2": c.J2, "Jprime": c.Jprime},
            "corrected": list(corrected), "literal": list(literal),
            "corrected_are_eigenvalues": [is_eig(e) for e in corrected],
            "literal_are_eigenvalues": [is_eig(e) for e in literal]}


def _switching_report(c: EffectiveCouplings) -> dict:
    sw = switching_time(c)
    lit_jp = (c.J1 - c.J2) / math.sqrt(3)  # 3J' = sqrt(3)(J1 - J2)
    det_jp = (c.J1 + c.J2) / 2
    return {"t_star_ps": sw.t_star, "max_transfer": sw.max_transfer, "full_transfer": sw.full_transfer,
            "literal_condition": sw.literal_condition, "detuning_condition": sw.detuning_condition,
            "literal_Jprime": lit_jp, "literal_max_transfer": max_transfer(EffectiveCouplings(c.J1, c.J2, lit_jp)),
            "detuning_zero_Jprime": det_jp,
            "detuning_zero_max_transfer": max_transfer(EffectiveCouplings(c.J1, c.J2, det_jp))}


def format_report(rep: dict) -> str:
    lines = ["hierarchy ratios:"]
    lines += [f"  {k:18s} {v:.4g}" for k, v in rep["hierarchy"]["ratios"].items()]
    lines.append("denominators E_c - E(111) [meV]:")
    for k, d in rep["denominators"].items():
        tag = "" if d["retained"] else "  (dropped)"
        lines.append(f"  ({k[0]},{k[1]},{k[2]})  {d['value']:+.6g}{tag}")
    sw = rep.get("sw", {})
    if "error" in sw:
        lines.append(f"Schrieffer-Wolff: {sw['error']}")
    elif sw:
        a, f = sw["analytic"], sw["numerical_fit"]
        lines.append(f"couplings (closed form) J1={a['J1']:.6g} J2={a['J2']:.6g} J'={a['Jprime']:.6g} meV")
        lines.append(f"couplings (projector)   J1={f['J1']:.6g} J2={f['J2']:.6g} J'={f['Jprime']:.6g} meV")
        lines.append(f"spectral deviation {sw['spectral_deviation']:.4g} meV (relative {sw['relative_deviation']:.3g}); "
                     f"with superexchange prefactor 2: {sw['spectral_deviation_prefactor2']:.3g} meV")
        lines.append(f"second-order vs exact levels: {sw['exact_deviation']:.4g} meV")
    for key, title in (("doublets", "doublet energies"), ("right_dot_check", "right-dot limit (J2=1)")):
        if key in rep:
            d = rep[key]
            lines.append(f"{title}: corrected {_pair(d['corrected'])} eigenvalues={d['corrected_are_eigenvalues']}; "
                         f"literal {_pair(d['literal'])} eigenvalues={d['literal_are_eigenvalues']}")
    if "switching" in rep:
        s = rep["switching"]
        t = "none" if s["t_star_ps"] is None else f"{s['t_star_ps']:.6g} ps"
        lines.append(f"switching: t*={t}, max transfer {s['max_transfer']:.6g}")
        lines.append(f"  literal condition 3J'=sqrt3(J1-J2): J'={s['literal_Jprime']:.6g} -> max transfer "
                     f"{s['literal_max_transfer']:.6g}")
        lines.append(f"  zero detuning J'=(J1+J2)/2:        J'={s['detuning_zero_Jprime']:.6g} -> max transfer "
                     f"{s['detuning_zero_max_transfer']:.6g}")
    lines.append("warnings:" if rep["warnings"] else "warnings: none")
    lines += [f"  - {w}" for w in rep["warnings"]]
    return "\n".join(lines)


def _pair(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"
