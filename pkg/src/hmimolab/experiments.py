"""Experiment catalog, config parsing, and CSV persistence.

Config files are flat key = value lines inside [sections]; '#' starts a
comment.  Unknown sections or keys are hard errors so a typo can never fall
back to a silent default.  Every experiment writes a single CSV with the
fixed header below; floats carry 17 significant digits, rows end with LF,
and unset optional columns stay empty.

Scenario conventions each experiment records explicitly:

* ``pathloss_reference_m`` rescales the power law to
  sigma^2 = (d / reference)^(-alpha); the catalog defaults to the cell
  radius so variances are O(1) at the edge and grow inward.
* ``placement = equal-power`` puts every user at a common distance and
  normalizes variances so the matched-filter precoder meets the power
  budget in expectation, making comparisons against the exact-budget
  optimal beamformer power-fair.
* ``snr_reference`` maps the sweep axis to rho: ``transmit`` divides by M,
  ``received`` also divides by the mean user variance times trace(Q).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import throughput as tp
from .config import (SystemConfig, UserLayout, build_array_geometry,
                     dbm_to_watts, layout_with_variances, place_users)
from .coupling import CouplingModel, build_coupling_model, spectral_sum
from .mc import (ThroughputEstimate, estimate_throughput_mc,
                 harvest_mf_statistics, mf_sweep_estimates)
from .specfun import SeriesControl

CSV_HEADER = ("experiment,seed,mode,M,K,snr_db,x_name,x_value,"
              "analytic_nats,mc_mean_nats,mc_ci95,solver_t_star")

EXPERIMENT_IDS = ("snr-sweep", "aperture-coupling", "mf-vs-optimal",
                  "csi-error", "snr-levels")

_MF_MODES = ("full", "partial", "none")

# seed-stream component codes (spawn keys for SeedSequence)
_EXCITATION_STREAM = 101
_LAYOUT_STREAM = 202


class ConfigError(ValueError):
    """Config file failed to parse or validate."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    output_dir: str
    n_trials: int
    modes: tuple
    placement: str          # fixed | resampled | equal-power
    snr_reference: str      # transmit | received
    m_values: tuple
    k: int
    k_values: tuple
    p_watts: float
    n0_dbm: float
    carrier_ghz: float
    pathloss_exponent: float
    cell_radius_m: float
    min_distance_m: float
    pathloss_reference_m: float
    geometry: str           # spacing | aperture
    spacing_wavelengths: float
    aperture_side_m: float
    sweep_variable: str     # snr_db | m | error_db
    sweep_values: tuple
    snr_db: float           # fixed SNR for experiments not sweeping it
    snr_levels_db: tuple    # the level set of the snr-levels experiment
    user_distances_m: tuple  # pinned distances for explicit placement

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment id {self.experiment!r}")
        if not self.sweep_values:
            raise ConfigError("sweep values must be nonempty")
        diffs = np.diff(np.asarray(self.sweep_values, float))
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep values must be strictly monotone")
        for mode in self.modes:
            if mode not in ("full", "partial", "none", "maxmin"):
                raise ConfigError(f"unknown mode {mode!r}")
        if self.placement not in ("fixed", "resampled", "equal-power",
                                  "explicit"):
            raise ConfigError(f"unknown placement {self.placement!r}")
        if self.placement == "explicit" and len(self.user_distances_m) != self.k:
            raise ConfigError("explicit placement needs user_distances_m "
                              "with exactly k entries")
        if self.snr_reference not in ("transmit", "received"):
            raise ConfigError(f"unknown snr_reference {self.snr_reference!r}")
        if self.geometry not in ("spacing", "aperture"):
            raise ConfigError(f"unknown geometry {self.geometry!r}")
        if self.n_trials < 2:
            raise ConfigError("n_trials must be >= 2")
        return self

    @property
    def wavelength_m(self) -> float:
        return SystemConfig.wavelength_from_carrier(self.carrier_ghz * 1e9)

    @property
    def n0_watts(self) -> float:
        return dbm_to_watts(self.n0_dbm)

    def canonical_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = " ".join(repr(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]


_DEFAULTS = dict(
    seed=20260810,
    output_dir="results",
    placement="fixed",
    snr_reference="transmit",
    k=8,
    p_watts=1.0,
    n0_dbm=-104.0,
    carrier_ghz=1.6,
    pathloss_exponent=3.5,
    cell_radius_m=500.0,
    min_distance_m=10.0,
    pathloss_reference_m=500.0,
    geometry="spacing",
    spacing_wavelengths=0.5,
    aperture_side_m=1.0,
    snr_db=10.0,
    snr_levels_db=(-10.0, -5.0, 2.0),
    user_distances_m=(),
)


def default_config(experiment: str) -> ExperimentConfig:
    """Catalog defaults; every figure experiment is runnable out of the box."""
    base = dict(_DEFAULTS)
    if experiment == "snr-sweep":
        # pinned layout with a dominant near user: the only regime in which
        # the statistics-only precoder beats the structure-only one at every
        # SNR, as the reference curves require
        base.update(n_trials=10_000, seed=101,
                    modes=("full", "partial", "none"),
                    m_values=(16, 128), k_values=(8,), placement="explicit",
                    user_distances_m=(18.0, 300.0, 330.0, 360.0, 390.0,
                                      420.0, 450.0, 480.0),
                    sweep_variable="snr_db",
                    sweep_values=tuple(float(s) for s in range(-10, 31, 5)))
    elif experiment == "aperture-coupling":
        base.update(n_trials=2_000, modes=("full", "partial", "none"), k=4,
                    k_values=(4,), geometry="aperture", placement="explicit",
                    user_distances_m=(300.0, 300.0, 300.0, 300.0),
                    m_values=(4, 9, 16, 25), sweep_variable="m",
                    sweep_values=(4.0, 9.0, 16.0, 25.0),
                    snr_reference="transmit", snr_db=10.0)
    elif experiment == "mf-vs-optimal":
        base.update(n_trials=500, modes=("full", "maxmin"),
                    placement="equal-power", snr_reference="received",
                    m_values=(4, 9, 16, 25, 36), k_values=(3, 5, 8),
                    sweep_variable="m",
                    sweep_values=(4.0, 9.0, 16.0, 25.0, 36.0), snr_db=10.0)
    elif experiment == "csi-error":
        base.update(n_trials=600, modes=("full", "maxmin"),
                    placement="equal-power", snr_reference="received",
                    m_values=(32, 128), k_values=(8,),
                    sweep_variable="error_db",
                    sweep_values=tuple(float(s) for s in range(-30, 11, 5)),
                    snr_db=10.0)
    elif experiment == "snr-levels":
        base.update(n_trials=800, modes=("full", "maxmin"),
                    placement="equal-power", snr_reference="received", k=4,
                    k_values=(4,), m_values=(16, 32, 64), sweep_variable="m",
                    sweep_values=(16.0, 32.0, 64.0))
    else:
        raise ConfigError(f"unknown experiment id {experiment!r}")
    return ExperimentConfig(experiment=experiment, **base).validate()


_KEY_SCHEMA = {
    ("experiment", "id"): ("experiment", str),
    ("experiment", "seed"): ("seed", int),
    ("experiment", "output_dir"): ("output_dir", str),
    ("experiment", "n_trials"): ("n_trials", int),
    ("experiment", "modes"): ("modes", "str_list"),
    ("experiment", "placement"): ("placement", str),
    ("experiment", "snr_reference"): ("snr_reference", str),
    ("system", "m_values"): ("m_values", "int_list"),
    ("system", "k"): ("k", int),
    ("system", "k_values"): ("k_values", "int_list"),
    ("system", "p_watts"): ("p_watts", float),
    ("system", "n0_dbm"): ("n0_dbm", float),
    ("system", "carrier_ghz"): ("carrier_ghz", float),
    ("system", "pathloss_exponent"): ("pathloss_exponent", float),
    ("system", "cell_radius_m"): ("cell_radius_m", float),
    ("system", "min_distance_m"): ("min_distance_m", float),
    ("system", "pathloss_reference_m"): ("pathloss_reference_m", float),
    ("system", "user_distances_m"): ("user_distances_m", "float_list"),
    ("system", "geometry"): ("geometry", str),
    ("system", "spacing_wavelengths"): ("spacing_wavelengths", float),
    ("system", "aperture_side_m"): ("aperture_side_m", float),
    ("sweep", "variable"): ("sweep_variable", str),
    ("sweep", "values"): ("sweep_values", "float_list"),
    ("fixed", "snr_db"): ("snr_db", float),
    ("fixed", "snr_levels_db"): ("snr_levels_db", "float_list"),
}


def _convert(kind, raw: str):
    if kind is str:
        return raw
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind == "int_list":
        return tuple(int(tok) for tok in raw.split())
    if kind == "float_list":
        return tuple(float(tok) for tok in raw.split())
    if kind == "str_list":
        return tuple(raw.split())
    raise AssertionError(kind)


def parse_config_text(text: str) -> ExperimentConfig:
    section = None
    triples = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("experiment", "system", "sweep", "fixed"):
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any section")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if (section, key) not in _KEY_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        triples.append((section, key, value, lineno))

    exp_id = next((v for s, k, v, _ in triples if (s, k) == ("experiment", "id")),
                  None)
    if exp_id is None:
        raise ConfigError("config must set id in [experiment]")
    cfg = default_config(exp_id)
    overrides = {}
    for section, key, value, lineno in triples:
        field_name, kind = _KEY_SCHEMA[(section, key)]
        try:
            overrides[field_name] = _convert(kind, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return replace(cfg, **overrides).validate()


def parse_config(path) -> ExperimentConfig:
    return parse_config_text(Path(path).read_text())


def describe(experiment: str) -> str:
    cfg = default_config(experiment)
    return (
        f"[experiment]\n"
        f"id = {cfg.experiment}\n"
        f"seed = {cfg.seed}\n"
        f"output_dir = {cfg.output_dir}\n"
        f"n_trials = {cfg.n_trials}\n"
        f"modes = {' '.join(cfg.modes)}\n"
        f"placement = {cfg.placement}\n"
        f"snr_reference = {cfg.snr_reference}\n"
        f"[system]\n"
        f"m_values = {' '.join(str(m) for m in cfg.m_values)}\n"
        f"k = {cfg.k}\n"
        f"k_values = {' '.join(str(k) for k in cfg.k_values)}\n"
        f"p_watts = {cfg.p_watts}\n"
        f"n0_dbm = {cfg.n0_dbm}\n"
        f"carrier_ghz = {cfg.carrier_ghz}\n"
        f"pathloss_exponent = {cfg.pathloss_exponent}\n"
        f"cell_radius_m = {cfg.cell_radius_m}\n"
        f"min_distance_m = {cfg.min_distance_m}\n"
        f"pathloss_reference_m = {cfg.pathloss_reference_m}\n"
        f"geometry = {cfg.geometry}\n"
        f"spacing_wavelengths = {cfg.spacing_wavelengths}\n"
        f"aperture_side_m = {cfg.aperture_side_m}\n"
        + (f"user_distances_m = "
           f"{' '.join(f'{d:g}' for d in cfg.user_distances_m)}\n"
           if cfg.user_distances_m else "")
        + f"[sweep]\n"
        f"variable = {cfg.sweep_variable}\n"
        f"values = {' '.join(f'{v:g}' for v in cfg.sweep_values)}\n"
        f"[fixed]\n"
        f"snr_db = {cfg.snr_db}\n"
        f"snr_levels_db = {' '.join(f'{v:g}' for v in cfg.snr_levels_db)}\n")


# ---------------------------------------------------------------------------
# scenario assembly
# ---------------------------------------------------------------------------

def build_model_for(cfg: ExperimentConfig, m: int) -> CouplingModel:
    lam = cfg.wavelength_m
    if cfg.geometry == "aperture":
        geo = build_array_geometry(m, "aperture", cfg.aperture_side_m)
    else:
        # square counts get a planar grid, anything else a uniform line
        side = math.isqrt(m)
        geo = build_array_geometry(m, "spacing", cfg.spacing_wavelengths * lam,
                                   line=side * side != m)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(_EXCITATION_STREAM, m)))
    return build_coupling_model(geo, lam, rng)


def make_layout(cfg: ExperimentConfig, m: int, model: CouplingModel,
                k: int | None = None):
    """Layout (or per-trial layout factory for resampled placement)."""
    k = cfg.k if k is None else k
    if cfg.placement == "explicit":
        d = np.asarray(cfg.user_distances_m[:k], float)
        var = (d / cfg.pathloss_reference_m) ** (-cfg.pathloss_exponent)
        return layout_with_variances(d, var)
    if cfg.placement == "equal-power":
        l1 = spectral_sum(model.spectrum, 1)
        var = m / (k * l1)  # E||W_mf||_F^2 = P exactly
        d = 0.5 * cfg.cell_radius_m
        return layout_with_variances(np.full(k, d), np.full(k, var))
    draw = lambda rng: place_users(  # noqa: E731
        k, cfg.cell_radius_m, rng, cfg.pathloss_exponent,
        cfg.min_distance_m, cfg.pathloss_reference_m)
    if cfg.placement == "resampled":
        return draw
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.seed, spawn_key=(_LAYOUT_STREAM, m, k)))
    return draw(rng)


def mean_pathloss_variance(cfg: ExperimentConfig) -> float:
    """E[(d/ref)^(-alpha)] for the area-uniform, floor-clamped placement law."""
    a = cfg.pathloss_exponent
    r, d0, ref = cfg.cell_radius_m, cfg.min_distance_m, cfg.pathloss_reference_m
    u0 = (d0 / r) ** 2  # placements below u0 sit at the floor distance
    floor_part = u0 * (d0 / ref) ** (-a)
    c = (r / ref) ** (-a)
    if a == 2.0:
        tail = -c * math.log(u0)
    else:
        e = 1.0 - a / 2.0
        tail = c * (1.0 - u0 ** e) / e
    return floor_part + tail


def resolve_rho(cfg: ExperimentConfig, snr_db: float, m: int,
                model: CouplingModel, layout) -> float:
    """Map an SNR axis value to the power-normalized factor rho."""
    snr_lin = 10.0 ** (snr_db / 10.0)
    if cfg.snr_reference == "transmit":
        return snr_lin / m
    if callable(layout):
        mean_var = mean_pathloss_variance(cfg)
    else:
        mean_var = float(np.mean(layout.variances))
    return snr_lin / (mean_var * spectral_sum(model.spectrum, 1))


def analytic_mean_throughput(model: CouplingModel, layout: UserLayout,
                             mode: str, rho: float,
                             ctrl: SeriesControl = SeriesControl()) -> float:
    """User-averaged closed-form throughput (nats) for an MF mode."""
    v = layout.variances
    values = []
    for k in range(layout.k):
        interferers = np.delete(v, k)
        if mode == "full":
            res = tp.throughput_full_csi(model.spectrum, float(v[k]),
                                         interferers, rho, ctrl)
        elif mode == "partial":
            beam = tp.fit_beam_gain_exponential(model.q, float(v[k]))
            res = tp.throughput_partial_csi(beam, float(v[k]),
                                            float(interferers.sum()), rho)
        elif mode == "none":
            beam = tp.fit_beam_gain_exponential(model.q, float(v[k]))
            res = tp.throughput_no_csi(beam, rho)
        else:
            raise ValueError(f"no analytic throughput for mode {mode!r}")
        values.append(res.value_nats)
    return float(np.mean(values))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{x:.17g}"


@dataclass
class ResultRow:
    mode: str
    m: int
    k: int
    snr_db: float
    x_name: str
    x_value: float
    analytic_nats: float | None
    mc_mean_nats: float | None
    mc_ci95: float | None
    solver_t_star: float | None


def write_csv(path: Path, cfg: ExperimentConfig, rows: list) -> Path:
    tag = f"{cfg.experiment}@{cfg.config_hash()}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join([
                tag, str(cfg.seed), r.mode, str(r.m), str(r.k),
                _fmt(r.snr_db), r.x_name, _fmt(r.x_value),
                _fmt(r.analytic_nats), _fmt(r.mc_mean_nats),
                _fmt(r.mc_ci95), _fmt(r.solver_t_star)]) + "\n")
    return path


# ---------------------------------------------------------------------------
# experiment runners
# ---------------------------------------------------------------------------

def _mc_row_fields(est: ThroughputEstimate):
    return est.pooled.mean, est.pooled.half_width_95, est.t_star_mean


def _run_snr_sweep(cfg: ExperimentConfig) -> list:
    rows = []
    for m in cfg.m_values:
        model = build_model_for(cfg, m)
        layout = make_layout(cfg, m, model)
        fixed_layout = not callable(layout)
        stats = (harvest_mf_statistics(model, layout, cfg.n_trials, cfg.seed)
                 if fixed_layout else None)
        for snr_db in cfg.sweep_values:
            rho = resolve_rho(cfg, snr_db, m, model, layout)
            for mode in cfg.modes:
                if fixed_layout and mode in _MF_MODES:
                    est = mf_sweep_estimates(stats, layout, mode, rho)
                else:
                    est = estimate_throughput_mc(model, layout, mode, rho,
                                                 cfg.n_trials, cfg.seed)
                analytic = (analytic_mean_throughput(model, layout, mode, rho)
                            if (fixed_layout and mode in _MF_MODES) else None)
                mc_mean, ci, tstar = _mc_row_fields(est)
                rows.append(ResultRow(mode, m, cfg.k, snr_db, "snr_db", snr_db,
                                      analytic, mc_mean, ci, tstar))
    return rows


def _run_aperture(cfg: ExperimentConfig) -> list:
    rows = []
    for m in (int(v) for v in cfg.sweep_values):
        model = build_model_for(cfg, m)
        layout = make_layout(cfg, m, model)
        rho = resolve_rho(cfg, cfg.snr_db, m, model, layout)
        fixed_layout = not callable(layout)
        stats = (harvest_mf_statistics(model, layout, cfg.n_trials, cfg.seed)
                 if fixed_layout else None)
        for mode in cfg.modes:
            if fixed_layout and mode in _MF_MODES:
                est = mf_sweep_estimates(stats, layout, mode, rho)
                analytic = analytic_mean_throughput(model, layout, mode, rho)
            else:
                est = estimate_throughput_mc(model, layout, mode, rho,
                                             cfg.n_trials, cfg.seed)
                analytic = None
            mc_mean, ci, tstar = _mc_row_fields(est)
            rows.append(ResultRow(mode, m, cfg.k, cfg.snr_db, "m", float(m),
                                  analytic, mc_mean, ci, tstar))
    return rows


def _run_mf_vs_optimal(cfg: ExperimentConfig) -> list:
    rows = []
    for k in cfg.k_values:
        for m in (int(v) for v in cfg.sweep_values):
            model = build_model_for(cfg, m)
            layout = make_layout(cfg, m, model, k=k)
            rho = resolve_rho(cfg, cfg.snr_db, m, model, layout)
            for mode in cfg.modes:
                est = estimate_throughput_mc(model, layout, mode, rho,
                                             cfg.n_trials, cfg.seed)
                mc_mean, ci, tstar = _mc_row_fields(est)
                rows.append(ResultRow(mode, m, k, cfg.snr_db, "m", float(m),
                                      None, mc_mean, ci, tstar))
    return rows


def _run_csi_error(cfg: ExperimentConfig) -> list:
    rows = []
    for m in cfg.m_values:
        model = build_model_for(cfg, m)
        layout = make_layout(cfg, m, model)
        rho = resolve_rho(cfg, cfg.snr_db, m, model, layout)
        for error_db in cfg.sweep_values:
            for mode in cfg.modes:
                est = estimate_throughput_mc(model, layout, mode, rho,
                                             cfg.n_trials, cfg.seed,
                                             error_db=error_db)
                mc_mean, ci, tstar = _mc_row_fields(est)
                rows.append(ResultRow(mode, m, cfg.k, cfg.snr_db, "error_db",
                                      error_db, None, mc_mean, ci, tstar))
    return rows


def _run_snr_levels(cfg: ExperimentConfig) -> list:
    rows = []
    for snr_db in cfg.snr_levels_db:
        for m in (int(v) for v in cfg.sweep_values):
            model = build_model_for(cfg, m)
            layout = make_layout(cfg, m, model)
            rho = resolve_rho(cfg, snr_db, m, model, layout)
            for mode in cfg.modes:
                est = estimate_throughput_mc(model, layout, mode, rho,
                                             cfg.n_trials, cfg.seed)
                mc_mean, ci, tstar = _mc_row_fields(est)
                rows.append(ResultRow(mode, m, cfg.k, snr_db, "m", float(m),
                                      None, mc_mean, ci, tstar))
    return rows


_RUNNERS = {
    "snr-sweep": _run_snr_sweep,
    "aperture-coupling": _run_aperture,
    "mf-vs-optimal": _run_mf_vs_optimal,
    "csi-error": _run_csi_error,
    "snr-levels": _run_snr_levels,
}


def run_experiment(cfg: ExperimentConfig, output_dir=None) -> Path:
    cfg.validate()
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = _RUNNERS[cfg.experiment](cfg)
    return write_csv(out / f"{cfg.experiment}.csv", cfg, rows)
