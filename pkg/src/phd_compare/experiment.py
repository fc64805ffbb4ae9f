"""Config-driven experiment pipeline: scenario -> two filters -> comparison.

Per step the two trackers advance on their own observation streams, both get
discretized onto the comparison grid, the unit intensity is pushed through the
doctrine mask, and the requested Lp distances (optionally plus discrepancy
regions) are recorded. Artifacts are plain CSV plus gnuplot scripts so runs
are diffable and byte-reproducible from (config, seed).

Config files are flat "key = value" lines with '#' comments; unknown keys are
rejected. Presets select the doctrine tightness regime by setting the scenario
doctrine_sigma; everything else stays put.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .doctrine import DoctrineMask, DoctrineSpec, apply_doctrine, doctrine_mask, superpose
from .errors import ConfigurationError, NumericalFailureError
from .filtering import (
    BirthModel,
    FilterConfig,
    FilterDiagnostics,
    MotionModel,
    SensorModel,
    filter_step,
)
from .metrics import DiscrepancyRegion, distance, localize_failure
from .phd import GridPhd, GridSpec, ParticlePhd, discretize
from .scenario import GroundTruth, ObservationSet, ScenarioConfig, simulate

__all__ = [
    "PRESETS",
    "ExperimentConfig",
    "StepRecord",
    "Summary",
    "default_params",
    "parse_config_file",
    "parse_norms",
    "apply_preset",
    "materialize",
    "run",
    "summarize",
]

PRESETS = ("exact", "moderate", "loose")

_NORM_LABELS = {1.0: "1", 2.0: "2", math.inf: "inf"}

_FLOAT_KEYS = {
    "unit_velocity_mean",
    "unit_velocity_std",
    "doctrine_spacing",
    "doctrine_sigma",
    "p_detect",
    "obs_noise_position",
    "obs_noise_velocity",
    "x_start",
    "dt",
    "grid_x_min",
    "grid_x_max",
    "process_noise_position",
    "process_noise_velocity",
    "survival_probability",
    "clutter_intensity",
    "birth_mass_per_step",
    "birth_velocity_min",
    "birth_velocity_max",
    "transform_sigma",
    "truncation_radius_sigmas",
    "localize_threshold",
    "localize_min_width",
}
_INT_KEYS = {
    "n_steps",
    "seed",
    "grid_n_bins",
    "particles_per_target",
    "particles_per_birth",
    "burn_in",
    "snapshot_stride",
}
_FLOAT_LIST_KEYS = {"transform_offsets", "transform_weights"}
_STR_KEYS = {"output_dir"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _FLOAT_LIST_KEYS | _STR_KEYS | {"norms"}


def default_params() -> dict:
    """The full parameter set with its built-in defaults.

    x_start and the transform doctrine default to None and are derived at
    materialization time (grid center; doctrine matched to the scenario).
    """
    return {
        # scenario
        "unit_velocity_mean": 1.0,
        "unit_velocity_std": 0.2,
        "doctrine_spacing": 5.0,
        "doctrine_sigma": 2.0,
        "p_detect": 0.95,
        "obs_noise_position": 2.0,
        "obs_noise_velocity": 0.1,
        "x_start": None,
        "dt": 1.0,
        "n_steps": 100,
        "seed": 1,
        # comparison grid
        "grid_x_min": 0.0,
        "grid_x_max": 300.0,
        "grid_n_bins": 600,
        # filters (shared by the unit and sub-unit tracker)
        "particles_per_target": 500,
        "process_noise_position": 1.0,
        "process_noise_velocity": 0.3,
        "survival_probability": 0.99,
        "clutter_intensity": 0.0,
        "birth_mass_per_step": 0.02,
        "particles_per_birth": 100,
        "birth_velocity_min": -2.0,
        "birth_velocity_max": 4.0,
        # doctrine transform; None means "match the scenario doctrine"
        "transform_offsets": None,
        "transform_sigma": None,
        "transform_weights": None,
        "truncation_radius_sigmas": 5.0,
        # comparison and outputs
        "norms": (1.0, 2.0, math.inf),
        "localize_threshold": None,
        "localize_min_width": None,
        "burn_in": 20,
        "snapshot_stride": 25,
        "output_dir": "out",
    }


def parse_norms(text: str) -> tuple[float, ...]:
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise ConfigurationError("norms must name at least one of 1, 2, inf")
    mapping = {"1": 1.0, "2": 2.0, "inf": math.inf}
    orders = []
    for tok in tokens:
        if tok not in mapping:
            raise ConfigurationError(f"unknown norm order {tok!r} (expected 1, 2 or inf)")
        if mapping[tok] not in orders:
            orders.append(mapping[tok])
    return tuple(sorted(orders))


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if key == "norms":
            return parse_norms(raw)
        return raw
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key!r}: {raw!r}") from exc


def parse_config_file(path) -> dict:
    """Read a flat key = value config file; unknown keys are errors."""
    params: dict = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
        params[key] = _parse_value(key, raw)
    return params


def apply_preset(params: dict, preset: str) -> dict:
    """Return params with doctrine_sigma set by the named tightness regime."""
    out = dict(params)
    if preset == "exact":
        # realized as a hundredth of the position noise so nothing degenerates
        out["doctrine_sigma"] = 0.01 * out["obs_noise_position"]
    elif preset == "moderate":
        out["doctrine_sigma"] = out["obs_noise_position"]
    elif preset == "loose":
        out["doctrine_sigma"] = out["doctrine_spacing"]
    else:
        raise ConfigurationError(f"unknown preset {preset!r} (expected one of {PRESETS})")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig
    unit_filter: FilterConfig
    subunit_filter: FilterConfig
    doctrine: Union[DoctrineSpec, tuple[tuple[DoctrineSpec, float], ...]]
    grid: GridSpec
    norms: tuple[float, ...]
    localization: Optional[tuple[float, float]]
    output_dir: Optional[Path]
    burn_in: int = 20
    snapshot_stride: int = 25
    truncation_radius_sigmas: float = 5.0


def _derive_seed(master: int, stream: int) -> int:
    return int(np.random.SeedSequence([master, stream]).generate_state(1, np.uint64)[0])


def _check_grid_covers_scenario(grid: GridSpec, scenario: ScenarioConfig) -> None:
    travel = scenario.unit_velocity_mean * scenario.dt * scenario.n_steps
    walk = 3.0 * scenario.unit_velocity_std * scenario.dt * math.sqrt(scenario.n_steps)
    margin = (
        scenario.doctrine_spacing
        + 3.0 * scenario.doctrine_sigma
        + 3.0 * scenario.obs_noise_position
        + walk
    )
    lo = min(scenario.x_start, scenario.x_start + travel) - margin
    hi = max(scenario.x_start, scenario.x_start + travel) + margin
    if lo < grid.x_min or hi > grid.x_max:
        raise ConfigurationError(
            f"grid [{grid.x_min}, {grid.x_max}] does not cover the reachable "
            f"positions [{lo:.1f}, {hi:.1f}]; widen the grid or shorten the run"
        )


def materialize(params: dict) -> ExperimentConfig:
    """Build the full, validated experiment configuration from flat params."""
    unknown = set(params) - _ALL_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    p = default_params()
    p.update(params)

    try:
        grid = GridSpec(p["grid_x_min"], p["grid_x_max"], p["grid_n_bins"])
        x_start = p["x_start"]
        if x_start is None:
            x_start = 0.5 * (grid.x_min + grid.x_max)
        scenario = ScenarioConfig(
            unit_velocity_mean=p["unit_velocity_mean"],
            unit_velocity_std=p["unit_velocity_std"],
            doctrine_spacing=p["doctrine_spacing"],
            doctrine_sigma=p["doctrine_sigma"],
            p_detect=p["p_detect"],
            obs_noise_position=p["obs_noise_position"],
            obs_noise_velocity=p["obs_noise_velocity"],
            x_start=float(x_start),
            dt=p["dt"],
            n_steps=p["n_steps"],
            seed=p["seed"],
        )
        offsets = p["transform_offsets"]
        if offsets is None:
            offsets = (-scenario.doctrine_spacing, 0.0, scenario.doctrine_spacing)
        weights = p["transform_weights"]
        if weights is None:
            weights = (1.0,) * len(offsets)
        sigma = p["transform_sigma"]
        if sigma is None:
            sigma = scenario.doctrine_sigma
        doctrine = DoctrineSpec(tuple(offsets), float(sigma), tuple(weights))

        motion = MotionModel(
            position_noise_std=p["process_noise_position"],
            velocity_noise_std=p["process_noise_velocity"],
            survival_probability=p["survival_probability"],
        )
        sensor = SensorModel(
            detection_probability=p["p_detect"],
            position_noise_std=p["obs_noise_position"],
            velocity_noise_std=p["obs_noise_velocity"],
            clutter_intensity=p["clutter_intensity"],
        )
        birth = BirthModel(
            mass_per_step=p["birth_mass_per_step"],
            position_range=(grid.x_min, grid.x_max),
            velocity_range=(p["birth_velocity_min"], p["birth_velocity_max"]),
            particles_per_birth=p["particles_per_birth"],
        )
        unit_filter = FilterConfig(
            particles_per_expected_target=p["particles_per_target"],
            motion=motion,
            sensor=sensor,
            birth=birth,
            rng_seed=_derive_seed(scenario.seed, 1),
        )
        subunit_filter = replace(unit_filter, rng_seed=_derive_seed(scenario.seed, 2))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc

    if abs(doctrine.subunit_count - 3.0) > 1e-9:
        raise ConfigurationError(
            f"doctrine weights sum to {doctrine.subunit_count}, but the scenario "
            "has exactly 3 sub-units per unit"
        )
    _check_grid_covers_scenario(grid, scenario)

    threshold = p["localize_threshold"]
    min_width = p["localize_min_width"]
    if (threshold is None) != (min_width is None):
        raise ConfigurationError(
            "localize_threshold and localize_min_width must be set together"
        )
    localization = None if threshold is None else (float(threshold), float(min_width))

    burn_in = int(p["burn_in"])
    if burn_in < 0:
        raise ConfigurationError("burn_in must be >= 0")
    if burn_in >= scenario.n_steps:
        raise ConfigurationError("burn_in must be smaller than n_steps")
    stride = int(p["snapshot_stride"])
    if stride < 0:
        raise ConfigurationError("snapshot_stride must be >= 0")

    output_dir = p["output_dir"]
    return ExperimentConfig(
        scenario=scenario,
        unit_filter=unit_filter,
        subunit_filter=subunit_filter,
        doctrine=doctrine,
        grid=grid,
        norms=tuple(sorted(p["norms"])),
        localization=localization,
        output_dir=None if output_dir is None else Path(output_dir),
        burn_in=burn_in,
        snapshot_stride=stride,
        truncation_radius_sigmas=float(p["truncation_radius_sigmas"]),
    )


@dataclass(frozen=True)
class StepRecord:
    t: int
    mass_u: float
    mass_su: float
    mass_su_star: float
    d_1: Optional[float]
    d_2: Optional[float]
    d_inf: Optional[float]
    leaked_mass: float
    regions: Optional[tuple[DiscrepancyRegion, ...]] = None


class Summary(NamedTuple):
    mean: float
    std: float
    max: float


def transform_mask(config: ExperimentConfig) -> DoctrineMask:
    if isinstance(config.doctrine, DoctrineSpec):
        return doctrine_mask(
            config.doctrine, config.grid.dx, config.truncation_radius_sigmas
        )
    return superpose(config.doctrine, config.grid.dx, config.truncation_radius_sigmas)


def _check_finite(record: StepRecord) -> None:
    numbers = [
        record.mass_u,
        record.mass_su,
        record.mass_su_star,
        record.leaked_mass,
    ] + [d for d in (record.d_1, record.d_2, record.d_inf) if d is not None]
    if not all(math.isfinite(x) for x in numbers):
        raise NumericalFailureError(f"non-finite value in step record at t={record.t}")


def run(config: ExperimentConfig) -> list[StepRecord]:
    """Execute the pipeline; write artifacts when output_dir is set."""
    mask = transform_mask(config)
    truth, unit_obs, subunit_obs = simulate(config.scenario)
    rng_u = np.random.default_rng(config.unit_filter.rng_seed)
    rng_s = np.random.default_rng(config.subunit_filter.rng_seed)
    diag = FilterDiagnostics()
    phd_u = ParticlePhd.empty()
    phd_s = ParticlePhd.empty()
    dt = config.scenario.dt
    records: list[StepRecord] = []
    snapshots: dict[int, tuple[GridPhd, GridPhd, GridPhd]] = {}
    for t in range(config.scenario.n_steps):
        phd_u = filter_step(phd_u, unit_obs[t], config.unit_filter, dt, rng_u, diag)
        phd_s = filter_step(phd_s, subunit_obs[t], config.subunit_filter, dt, rng_s, diag)
        grid_u, dropped_u = discretize(phd_u, config.grid)
        grid_s, dropped_s = discretize(phd_s, config.grid)
        synthesized, conv_leak = apply_doctrine(grid_u, mask)
        dists = {p: distance(grid_s, synthesized, p) for p in config.norms}
        regions = None
        if config.localization is not None:
            threshold, min_width = config.localization
            regions = tuple(
                localize_failure(grid_s, synthesized, 1.0, threshold, min_width)
            )
        record = StepRecord(
            t=t,
            mass_u=grid_u.mass(),
            mass_su=grid_s.mass(),
            mass_su_star=synthesized.mass(),
            d_1=dists.get(1.0),
            d_2=dists.get(2.0),
            d_inf=dists.get(math.inf),
            leaked_mass=dropped_u + dropped_s + conv_leak,
            regions=regions,
        )
        _check_finite(record)
        records.append(record)
        if _want_snapshot(t, config):
            snapshots[t] = (grid_u, grid_s, synthesized)
    if config.output_dir is not None:
        _write_artifacts(config, truth, unit_obs, subunit_obs, records, snapshots)
    return records


def _want_snapshot(t: int, config: ExperimentConfig) -> bool:
    stride = config.snapshot_stride
    if stride <= 0:
        return False
    return (t + 1) % stride == 0 or t == config.scenario.n_steps - 1


def summarize(records: Sequence[StepRecord], burn_in: int = 20) -> dict[str, Summary]:
    """Post-burn-in mean, std and max of each recorded distance series."""
    if len(records) <= burn_in:
        raise ValueError(
            f"need more than burn_in={burn_in} records, got {len(records)}"
        )
    post = records[burn_in:]
    out: dict[str, Summary] = {}
    for label, getter in (
        ("1", lambda r: r.d_1),
        ("2", lambda r: r.d_2),
        ("inf", lambda r: r.d_inf),
    ):
        series = [getter(r) for r in post]
        if any(v is None for v in series):
            continue
        arr = np.array(series, dtype=float)
        out[label] = Summary(float(arr.mean()), float(arr.std()), float(arr.max()))
    return out


# --- CSV artifacts ---------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return repr(float(x))


def _write_records(path: Path, records: Sequence[StepRecord]) -> None:
    lines = ["t,mass_U,mass_SU,mass_SU_star,d_1,d_2,d_inf,leaked_mass"]
    for r in records:
        lines.append(
            f"{r.t},{_fmt(r.mass_u)},{_fmt(r.mass_su)},{_fmt(r.mass_su_star)},"
            f"{_fmt(r.d_1)},{_fmt(r.d_2)},{_fmt(r.d_inf)},{_fmt(r.leaked_mass)}"
        )
    path.write_text("\n".join(lines) + "\n")


def _write_summary(path: Path, summaries: dict[str, Summary]) -> None:
    lines = ["norm,mean,std,max"]
    for label in ("1", "2", "inf"):
        if label in summaries:
            s = summaries[label]
            lines.append(f"{label},{_fmt(s.mean)},{_fmt(s.std)},{_fmt(s.max)}")
    path.write_text("\n".join(lines) + "\n")


def _write_regions(path: Path, records: Sequence[StepRecord]) -> None:
    lines = ["t,a,b,local_distance,depth"]
    for r in records:
        for region in r.regions or ():
            lines.append(
                f"{r.t},{_fmt(region.a)},{_fmt(region.b)},"
                f"{_fmt(region.local_distance)},{region.depth}"
            )
    path.write_text("\n".join(lines) + "\n")


def _write_truth(path: Path, truth: GroundTruth) -> None:
    lines = ["t,object_id,kind,x,v"]
    for t in range(truth.n_steps):
        lines.append(
            f"{t},0,unit,{_fmt(truth.unit_positions[t])},{_fmt(truth.unit_velocities[t])}"
        )
        for i in range(3):
            lines.append(
                f"{t},{i},subunit,{_fmt(truth.subunit_positions[t, i])},"
                f"{_fmt(truth.unit_velocities[t])}"
            )
    path.write_text("\n".join(lines) + "\n")


def _write_observations(
    path: Path, unit_obs: Sequence[ObservationSet], subunit_obs: Sequence[ObservationSet]
) -> None:
    lines = ["t,sensor,x,v"]
    for obs_list, sensor in ((unit_obs, "unit"), (subunit_obs, "subunit")):
        for obs in obs_list:
            for x, v in obs.measurements:
                lines.append(f"{obs.t},{sensor},{_fmt(x)},{_fmt(v)}")
    path.write_text("\n".join(lines) + "\n")


def _write_snapshot(
    path: Path, grid_u: GridPhd, grid_s: GridPhd, synthesized: GridPhd
) -> None:
    centers = grid_u.spec.centers()
    absdiff = np.abs(grid_s.values - synthesized.values)
    lines = ["bin_center,D_U,D_SU,D_SU_star,absdiff"]
    for c, u, s, star, d in zip(
        centers, grid_u.values, grid_s.values, synthesized.values, absdiff
    ):
        lines.append(f"{_fmt(c)},{_fmt(u)},{_fmt(s)},{_fmt(star)},{_fmt(d)}")
    path.write_text("\n".join(lines) + "\n")


_RECORDS_GP = """\
# Plot the distance time series from records.csv:
#   gnuplot -p records.gp
set datafile separator ','
set key autotitle columnhead outside
set xlabel 't'
set ylabel 'distance'
plot 'records.csv' using 1:5 with lines, \\
     'records.csv' using 1:6 with lines, \\
     'records.csv' using 1:7 with lines
"""

_GRIDS_GP = """\
# Plot one grid snapshot (four stacked panels):
#   gnuplot -p -c grids.gp grids_<t>.csv
set datafile separator ','
set key autotitle columnhead
set multiplot layout 4,1
plot ARG1 using 1:2 with lines
plot ARG1 using 1:4 with lines
plot ARG1 using 1:3 with lines
plot ARG1 using 1:5 with lines
unset multiplot
"""


def _write_artifacts(config, truth, unit_obs, subunit_obs, records, snapshots) -> None:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    _write_records(out / "records.csv", records)
    _write_summary(out / "summary.csv", summarize(records, config.burn_in))
    _write_truth(out / "truth.csv", truth)
    _write_observations(out / "observations.csv", unit_obs, subunit_obs)
    if config.localization is not None:
        _write_regions(out / "regions.csv", records)
    for t, (grid_u, grid_s, synthesized) in sorted(snapshots.items()):
        _write_snapshot(out / f"grids_{t}.csv", grid_u, grid_s, synthesized)
    (out / "records.gp").write_text(_RECORDS_GP)
    (out / "grids.gp").write_text(_GRIDS_GP)
