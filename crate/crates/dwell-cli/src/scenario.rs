//! Scenario file schema, parsing and validation.
//!
//! Scenarios are JSON documents with units spelled out in the field names
//! (`horizon_ms`, `range_km`, `bearing_rad`, ...), which is the cheapest
//! defence against the mixed km/ms constants this domain runs on. One file
//! fully determines a run; every number in the emitted reports is
//! recomputable from the file alone.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::path::Path;

use dwell::detection::{Geometry, Point, RadarModel};
use dwell::fleet::{calibrate_scale, FleetScenario, Rule3};
use dwell::probmap::{GaussianPrior, SurveillanceGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MonoDeterministic,
    MonoProbabilistic,
    Fleet,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSpec {
    pub alpha_km4_per_ms: f64,
    #[serde(default = "default_p_fa")]
    pub p_fa: f64,
    #[serde(default)]
    pub position_km: [f64; 2],
    #[serde(default)]
    pub boresight_rad: f64,
}

fn default_p_fa() -> f64 {
    dwell::detection::DEFAULT_P_FA
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSpec {
    pub duration_ms: f64,
    pub probability: f64,
    pub distance_km: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub alpha_km4_per_ms: Option<f64>,
    #[serde(default)]
    pub p_fa: Option<f64>,
    #[serde(default)]
    pub position_km: Option<[f64; 2]>,
    #[serde(default)]
    pub boresight_rad: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default)]
    pub range_km: Option<f64>,
    #[serde(default)]
    pub bearing_rad: Option<f64>,
    #[serde(default)]
    pub position_km: Option<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min_km: f64,
    pub r_max_km: f64,
    pub n_range: usize,
    pub n_directions: usize,
    pub sector_start_rad: f64,
    pub sector_end_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StdSpec {
    Isotropic(f64),
    PerAxis([f64; 2]),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub mean_km: [f64; 2],
    pub std_km: StdSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionWeight {
    /// One-based direction number, matching the report columns.
    pub direction: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Rule3Spec {
    #[default]
    PerSensor,
    Global,
}

impl From<Rule3Spec> for Rule3 {
    fn from(r: Rule3Spec) -> Rule3 {
        match r {
            Rule3Spec::PerSensor => Rule3::PerSensor,
            Rule3Spec::Global => Rule3::Global,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PlannerSpec {
    #[serde(default)]
    pub rule3: Rule3Spec,
}

/// The raw scenario document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub mode: Mode,
    pub horizon_ms: f64,
    #[serde(default)]
    pub radar: Option<RadarSpec>,
    #[serde(default)]
    pub calibration: Option<CalibrationSpec>,
    #[serde(default)]
    pub scale_ms_per_km4: Option<f64>,
    #[serde(default)]
    pub sensors: Vec<SensorSpec>,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    /// `[sensor][target]` distances for calibrated fleet scenarios.
    #[serde(default)]
    pub sensor_target_distances_km: Option<Vec<Vec<f64>>>,
    /// Direct `[sensor][target]` time constants.
    #[serde(default)]
    pub tau_ms: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub priors: Vec<PriorSpec>,
    #[serde(default)]
    pub direction_weights: Vec<DirectionWeight>,
    #[serde(default)]
    pub planner: PlannerSpec,
}

/// Parses and schema-validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .with_context(|| format!("invalid scenario {}", path.display()))?;
    if !(file.horizon_ms > 0.0) {
        bail!(
            "field `horizon_ms` must be positive, got {}",
            file.horizon_ms
        );
    }
    Ok(file)
}

/// A deterministic-mode scenario resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct DetPrepared {
    pub target_names: Vec<String>,
    pub weights: Vec<f64>,
    pub taus_ms: Vec<f64>,
    pub horizon_ms: f64,
    /// Present when the scenario declared radar physics; enables
    /// elementary-look counts in the report.
    pub geometry: Option<(RadarModel, Vec<Geometry>)>,
    pub scale_used: Option<f64>,
}

/// A probabilistic-mode scenario resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct ProbPrepared {
    pub radar: RadarModel,
    pub grid: SurveillanceGrid,
    pub priors: Vec<GaussianPrior>,
    pub prior_names: Vec<String>,
    pub direction_weights: Vec<f64>,
    pub horizon_ms: f64,
}

/// A fleet-mode scenario resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct FleetPrepared {
    pub sensor_names: Vec<String>,
    pub target_names: Vec<String>,
    pub scenario: FleetScenario,
    pub rule3: Rule3,
    pub scale_used: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Prepared {
    Deterministic(DetPrepared),
    Probabilistic(ProbPrepared),
    Fleet(FleetPrepared),
}

fn resolve_scale(file: &ScenarioFile) -> Result<Option<f64>> {
    match (&file.scale_ms_per_km4, &file.calibration) {
        (Some(_), Some(_)) => {
            bail!("fields `scale_ms_per_km4` and `calibration` are mutually exclusive")
        }
        (Some(k), None) => {
            if !(*k > 0.0) {
                bail!("field `scale_ms_per_km4` must be positive, got {k}");
            }
            Ok(Some(*k))
        }
        (None, Some(c)) => {
            let k = calibrate_scale(c.duration_ms, c.probability, c.distance_km)
                .map_err(|e| anyhow!("field `calibration`: {e}"))?;
            Ok(Some(k))
        }
        (None, None) => Ok(None),
    }
}

fn radar_model(spec: &RadarSpec) -> Result<RadarModel> {
    RadarModel::new(
        spec.alpha_km4_per_ms,
        spec.p_fa,
        Point::new(spec.position_km[0], spec.position_km[1]),
        spec.boresight_rad,
    )
    .map_err(|e| anyhow!("field `radar`: {e}"))
}

fn default_names(prefix: &str, specs: &[Option<String>]) -> Vec<String> {
    specs
        .iter()
        .enumerate()
        .map(|(i, n)| n.clone().unwrap_or_else(|| format!("{prefix}{}", i + 1)))
        .collect()
}

/// Resolves a parsed scenario into validated solver inputs.
pub fn prepare(file: &ScenarioFile) -> Result<Prepared> {
    match file.mode {
        Mode::MonoDeterministic => prepare_deterministic(file).map(Prepared::Deterministic),
        Mode::MonoProbabilistic => prepare_probabilistic(file).map(Prepared::Probabilistic),
        Mode::Fleet => prepare_fleet(file).map(Prepared::Fleet),
    }
}

fn prepare_deterministic(file: &ScenarioFile) -> Result<DetPrepared> {
    if file.targets.is_empty() {
        bail!("field `targets` must list at least one target in mono-deterministic mode");
    }
    let scale = resolve_scale(file)?;
    let names = default_names(
        "T",
        &file
            .targets
            .iter()
            .map(|t| t.name.clone())
            .collect::<Vec<_>>(),
    );
    let weights: Vec<f64> = file.targets.iter().map(|t| t.weight).collect();

    let mut taus = Vec::with_capacity(file.targets.len());
    let mut geometry = None;
    match (&file.radar, scale) {
        (Some(_), Some(_)) => {
            bail!("declare either `radar` physics or a scale calibration, not both")
        }
        (Some(spec), None) => {
            let radar = radar_model(spec)?;
            let mut geoms = Vec::with_capacity(file.targets.len());
            for (i, t) in file.targets.iter().enumerate() {
                let range = t.range_km.ok_or_else(|| {
                    anyhow!("field `targets[{i}].range_km` is required in radar mode")
                })?;
                let bearing = t.bearing_rad.unwrap_or(0.0);
                let mut theta = bearing - radar.boresight_rad;
                while theta > std::f64::consts::PI {
                    theta -= 2.0 * std::f64::consts::PI;
                }
                while theta <= -std::f64::consts::PI {
                    theta += 2.0 * std::f64::consts::PI;
                }
                let geom = Geometry::new(range, theta)
                    .map_err(|e| anyhow!("field `targets[{i}]`: {e}"))?;
                taus.push(dwell::detection::time_constant(&radar, &geom));
                geoms.push(geom);
            }
            geometry = Some((radar, geoms));
        }
        (None, Some(k)) => {
            for (i, t) in file.targets.iter().enumerate() {
                let range = t.range_km.ok_or_else(|| {
                    anyhow!("field `targets[{i}].range_km` is required in calibrated mode")
                })?;
                if !(range > 0.0) {
                    bail!("field `targets[{i}].range_km` must be positive, got {range}");
                }
                taus.push(k * range.powi(4));
            }
        }
        (None, None) => {
            bail!("mono-deterministic mode needs `radar` physics or a `calibration`/`scale_ms_per_km4`")
        }
    }

    Ok(DetPrepared {
        target_names: names,
        weights,
        taus_ms: taus,
        horizon_ms: file.horizon_ms,
        geometry,
        scale_used: scale,
    })
}

fn prepare_probabilistic(file: &ScenarioFile) -> Result<ProbPrepared> {
    let radar_spec = file
        .radar
        .as_ref()
        .ok_or_else(|| anyhow!("field `radar` is required in mono-probabilistic mode"))?;
    let radar = radar_model(radar_spec)?;
    let grid_spec = file
        .grid
        .as_ref()
        .ok_or_else(|| anyhow!("field `grid` is required in mono-probabilistic mode"))?;
    let grid = SurveillanceGrid::new(
        radar.position,
        grid_spec.r_min_km,
        grid_spec.r_max_km,
        grid_spec.n_range,
        grid_spec.n_directions,
        grid_spec.sector_start_rad,
        grid_spec.sector_end_rad,
    )
    .map_err(|e| anyhow!("field `grid`: {e}"))?;

    if file.priors.is_empty() {
        bail!("field `priors` must list at least one target prior");
    }
    let mut priors = Vec::with_capacity(file.priors.len());
    for (i, p) in file.priors.iter().enumerate() {
        let (sx, sy) = match p.std_km {
            StdSpec::Isotropic(s) => (s, s),
            StdSpec::PerAxis([sx, sy]) => (sx, sy),
        };
        priors.push(
            GaussianPrior::new(Point::new(p.mean_km[0], p.mean_km[1]), sx, sy)
                .map_err(|e| anyhow!("field `priors[{i}]`: {e}"))?,
        );
    }
    let prior_names = default_names(
        "T",
        &file
            .priors
            .iter()
            .map(|p| p.name.clone())
            .collect::<Vec<_>>(),
    );

    let mut weights = vec![1.0; grid.n_directions];
    for (i, dw) in file.direction_weights.iter().enumerate() {
        if dw.direction == 0 || dw.direction > grid.n_directions {
            bail!(
                "field `direction_weights[{i}].direction` must be in 1..={}, got {}",
                grid.n_directions,
                dw.direction
            );
        }
        if !(dw.weight >= 0.0) {
            bail!("field `direction_weights[{i}].weight` must be non-negative");
        }
        weights[dw.direction - 1] = dw.weight;
    }

    Ok(ProbPrepared {
        radar,
        grid,
        priors,
        prior_names,
        direction_weights: weights,
        horizon_ms: file.horizon_ms,
    })
}

fn prepare_fleet(file: &ScenarioFile) -> Result<FleetPrepared> {
    if file.sensors.is_empty() {
        bail!("field `sensors` must list at least one sensor in fleet mode");
    }
    if file.targets.is_empty() {
        bail!("field `targets` must list at least one target in fleet mode");
    }
    let sensor_names = default_names(
        "S",
        &file
            .sensors
            .iter()
            .map(|s| s.name.clone())
            .collect::<Vec<_>>(),
    );
    let target_names = default_names(
        "T",
        &file
            .targets
            .iter()
            .map(|t| t.name.clone())
            .collect::<Vec<_>>(),
    );
    let weights: Vec<f64> = file.targets.iter().map(|t| t.weight).collect();
    let scale = resolve_scale(file)?;

    let check_matrix = |m: &Vec<Vec<f64>>, field: &str| -> Result<()> {
        if m.len() != file.sensors.len() {
            bail!(
                "field `{field}` has {} rows but {} sensors are declared",
                m.len(),
                file.sensors.len()
            );
        }
        for (s, row) in m.iter().enumerate() {
            if row.len() != file.targets.len() {
                bail!(
                    "field `{field}[{s}]` has {} entries but {} targets are declared",
                    row.len(),
                    file.targets.len()
                );
            }
        }
        Ok(())
    };

    let scenario = if let Some(tau) = &file.tau_ms {
        check_matrix(tau, "tau_ms")?;
        FleetScenario::from_tau_matrix(tau.clone(), weights, file.horizon_ms)
            .map_err(|e| anyhow!("field `tau_ms`: {e}"))?
    } else if let Some(d) = &file.sensor_target_distances_km {
        check_matrix(d, "sensor_target_distances_km")?;
        let k = scale.ok_or_else(|| {
            anyhow!("`sensor_target_distances_km` needs a `calibration` or `scale_ms_per_km4`")
        })?;
        FleetScenario::from_distances(d.clone(), k, weights, file.horizon_ms)
            .map_err(|e| anyhow!("field `sensor_target_distances_km`: {e}"))?
    } else {
        // Full geometry: each sensor carries radar physics, each target a position.
        let mut radars = Vec::with_capacity(file.sensors.len());
        for (i, s) in file.sensors.iter().enumerate() {
            let alpha = s.alpha_km4_per_ms.ok_or_else(|| {
                anyhow!("field `sensors[{i}].alpha_km4_per_ms` is required in geometry mode")
            })?;
            let p_fa = s
                .p_fa
                .ok_or_else(|| anyhow!("field `sensors[{i}].p_fa` is required in geometry mode"))?;
            let pos = s.position_km.ok_or_else(|| {
                anyhow!("field `sensors[{i}].position_km` is required in geometry mode")
            })?;
            radars.push(
                RadarModel::new(
                    alpha,
                    p_fa,
                    Point::new(pos[0], pos[1]),
                    s.boresight_rad.unwrap_or(0.0),
                )
                .map_err(|e| anyhow!("field `sensors[{i}]`: {e}"))?,
            );
        }
        let mut targets = Vec::with_capacity(file.targets.len());
        for (i, t) in file.targets.iter().enumerate() {
            let pos = t.position_km.ok_or_else(|| {
                anyhow!("field `targets[{i}].position_km` is required in geometry mode")
            })?;
            targets.push((Point::new(pos[0], pos[1]), t.weight));
        }
        FleetScenario::from_geometry(&radars, &targets, file.horizon_ms)
            .map_err(|e| anyhow!("fleet geometry: {e}"))?
    };

    Ok(FleetPrepared {
        sensor_names,
        target_names,
        scenario,
        rule3: file.planner.rule3.into(),
        scale_used: scale,
    })
}
