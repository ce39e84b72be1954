//! Multisensor multitarget planning.
//!
//! Several radars observe several targets over one shared horizon `T`.
//! The initial phase runs in three steps:
//!
//! 1. each sensor solves its own water-filling split over all targets
//!    ([`step1_allocations`]),
//! 2. every nonempty sensor subset (a *pseudo-sensor*) is scored per
//!    target by OR-fusing its members' detection probabilities at the
//!    group's shortest step-1 duration ([`pseudo_sensor_probability`]),
//! 3. an exhaustive search assigns each sensor to one target (or to
//!    none), maximizing the summed fused probabilities
//!    ([`step3_assignment`]).
//!
//! The planning phase ([`plan`]) then rolls the assignment forward in
//! time: whenever a sensor exhausts its step-1 duration on its current
//! target it is redirected by the re-planning rules until the horizon is
//! spent.

mod plan;

pub use plan::{plan, PlanOptions, PlanTimeline, ReplanEvent, Rule3, Segment};

use crate::detection::{optimal_probability, time_constant, Geometry, Point, RadarModel};
use crate::error::{domain, Error, Result};
use crate::waterfill::{allocate, AllocationProblem};

/// Pseudo-sensor enumeration (2^P − 1 subsets) is refused above this many
/// sensors.
pub const MAX_SENSORS: usize = 12;

/// Step-3 exhaustive search is refused above this many sensor-to-target
/// maps.
pub const MAX_ASSIGNMENT_MAPS: u128 = 200_000_000;

/// A fleet instance: per-(sensor, target) time constants, per-target
/// priority weights and the shared horizon.
///
/// The time-constant matrix can come from explicit values, from a distance
/// matrix under a calibrated scale (`τ = K·d⁴`, boresight-aligned), or
/// from full radar/target geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetScenario {
    tau_ms: Vec<Vec<f64>>,
    distances_km: Option<Vec<Vec<f64>>>,
    weights: Vec<f64>,
    horizon_ms: f64,
}

impl FleetScenario {
    /// Builds a scenario from an explicit `τ[sensor][target]` matrix.
    pub fn from_tau_matrix(
        tau_ms: Vec<Vec<f64>>,
        weights: Vec<f64>,
        horizon_ms: f64,
    ) -> Result<Self> {
        Self::validated(tau_ms, None, weights, horizon_ms)
    }

    /// Builds a scenario from sensor-target distances and a calibrated
    /// scale constant `K` (ms/km⁴), with all off-axis angles zero.
    pub fn from_distances(
        distances_km: Vec<Vec<f64>>,
        scale_ms_per_km4: f64,
        weights: Vec<f64>,
        horizon_ms: f64,
    ) -> Result<Self> {
        if !(scale_ms_per_km4 > 0.0) {
            return Err(domain(format!(
                "scale must be positive, got {scale_ms_per_km4}"
            )));
        }
        for row in &distances_km {
            if let Some(d) = row.iter().find(|d| !(**d > 0.0)) {
                return Err(domain(format!("distances must be positive, got {d}")));
            }
        }
        let tau = distances_km
            .iter()
            .map(|row| row.iter().map(|d| scale_ms_per_km4 * d.powi(4)).collect())
            .collect();
        Self::validated(tau, Some(distances_km), weights, horizon_ms)
    }

    /// Builds a scenario from radar models and target positions. Off-axis
    /// angles are taken from each radar's boresight against the bearing of
    /// each target.
    pub fn from_geometry(
        radars: &[RadarModel],
        targets: &[(Point, f64)],
        horizon_ms: f64,
    ) -> Result<Self> {
        let mut tau = Vec::with_capacity(radars.len());
        let mut distances = Vec::with_capacity(radars.len());
        for radar in radars {
            let mut tau_row = Vec::with_capacity(targets.len());
            let mut d_row = Vec::with_capacity(targets.len());
            for (pos, _) in targets {
                let d = radar.position.distance(pos);
                let mut theta = radar.position.bearing_to(pos) - radar.boresight_rad;
                while theta > std::f64::consts::PI {
                    theta -= 2.0 * std::f64::consts::PI;
                }
                while theta <= -std::f64::consts::PI {
                    theta += 2.0 * std::f64::consts::PI;
                }
                let geom = Geometry::new(d, theta)?;
                tau_row.push(time_constant(radar, &geom));
                d_row.push(d);
            }
            tau.push(tau_row);
            distances.push(d_row);
        }
        let weights = targets.iter().map(|(_, w)| *w).collect();
        Self::validated(tau, Some(distances), weights, horizon_ms)
    }

    fn validated(
        tau_ms: Vec<Vec<f64>>,
        distances_km: Option<Vec<Vec<f64>>>,
        weights: Vec<f64>,
        horizon_ms: f64,
    ) -> Result<Self> {
        if tau_ms.is_empty() {
            return Err(domain("fleet needs at least one sensor"));
        }
        if tau_ms.len() > MAX_SENSORS {
            return Err(Error::TooManySensors {
                sensors: tau_ms.len(),
                limit: MAX_SENSORS,
            });
        }
        let n_targets = tau_ms[0].len();
        if n_targets == 0 {
            return Err(domain("fleet needs at least one target"));
        }
        for row in &tau_ms {
            if row.len() != n_targets {
                return Err(domain("ragged time-constant matrix"));
            }
            if let Some(t) = row.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return Err(domain(format!("time constants must be positive, got {t}")));
            }
        }
        if weights.len() != n_targets {
            return Err(domain(format!(
                "{} weights for {n_targets} targets",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(domain(format!("weights must be non-negative, got {w}")));
        }
        if !(horizon_ms > 0.0 && horizon_ms.is_finite()) {
            return Err(domain(format!(
                "horizon must be positive, got {horizon_ms}"
            )));
        }
        Ok(FleetScenario {
            tau_ms,
            distances_km,
            weights,
            horizon_ms,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.tau_ms.len()
    }

    pub fn n_targets(&self) -> usize {
        self.tau_ms[0].len()
    }

    pub fn tau_ms(&self, sensor: usize, target: usize) -> f64 {
        self.tau_ms[sensor][target]
    }

    pub fn distances_km(&self) -> Option<&Vec<Vec<f64>>> {
        self.distances_km.as_ref()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn horizon_ms(&self) -> f64 {
        self.horizon_ms
    }
}

/// Backs the scale constant `K` of `τ = K·d⁴` out of one observed
/// (duration, probability, distance) triple: `K = (−t/ln(1−P))/d⁴`.
pub fn calibrate_scale(duration_ms: f64, probability: f64, distance_km: f64) -> Result<f64> {
    if !(duration_ms > 0.0) {
        return Err(domain(format!(
            "calibration duration must be positive, got {duration_ms}"
        )));
    }
    if !(probability > 0.0 && probability < 1.0) {
        return Err(domain(format!(
            "calibration probability must lie in (0,1), got {probability}"
        )));
    }
    if !(distance_km > 0.0) {
        return Err(domain(format!(
            "calibration distance must be positive, got {distance_km}"
        )));
    }
    Ok((-duration_ms / (1.0 - probability).ln()) / distance_km.powi(4))
}

/// Step-1 output: each sensor's own optimal split over the targets and
/// the matching detection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Step1 {
    /// `times_ms[sensor][target]`, each row summing to the horizon.
    pub times_ms: Vec<Vec<f64>>,
    /// `probabilities[sensor][target] = 1 − exp(−t/τ)`.
    pub probabilities: Vec<Vec<f64>>,
    /// Per-sensor water-filling multipliers.
    pub lambdas: Vec<f64>,
}

/// Runs the water-filling solver once per sensor.
pub fn step1_allocations(scenario: &FleetScenario) -> Result<Step1> {
    let mut times = Vec::with_capacity(scenario.n_sensors());
    let mut probs = Vec::with_capacity(scenario.n_sensors());
    let mut lambdas = Vec::with_capacity(scenario.n_sensors());
    for s in 0..scenario.n_sensors() {
        let problem = AllocationProblem::new(
            scenario.tau_ms[s].clone(),
            scenario.weights.clone(),
            scenario.horizon_ms,
        )?;
        let alloc = allocate(&problem)?;
        let p_row: Vec<f64> = alloc
            .times_ms
            .iter()
            .enumerate()
            .map(|(c, t)| optimal_probability(*t, scenario.tau_ms[s][c]))
            .collect();
        times.push(alloc.times_ms);
        probs.push(p_row);
        lambdas.push(alloc.lambda);
    }
    Ok(Step1 {
        times_ms: times,
        probabilities: probs,
        lambdas,
    })
}

/// OR fusion of independent detection probabilities: `1 − Π(1 − p_i)`.
pub fn fuse_or(probabilities: &[f64]) -> f64 {
    1.0 - probabilities.iter().map(|p| 1.0 - p).product::<f64>()
}

/// A nonempty group of sensors observing one target together.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PseudoSensor {
    members: Vec<usize>,
}

impl PseudoSensor {
    /// Sorted, deduplicated, nonempty member list.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(domain("a pseudo-sensor needs at least one member"));
        }
        members.sort_unstable();
        members.dedup();
        Ok(PseudoSensor { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// All 2^P − 1 pseudo-sensors of a P-sensor fleet, ordered by member set
/// as a bitmask. Refused above [`MAX_SENSORS`].
pub fn enumerate_pseudo_sensors(n_sensors: usize) -> Result<Vec<PseudoSensor>> {
    if n_sensors == 0 {
        return Err(domain("fleet needs at least one sensor"));
    }
    if n_sensors > MAX_SENSORS {
        return Err(Error::TooManySensors {
            sensors: n_sensors,
            limit: MAX_SENSORS,
        });
    }
    let mut groups = Vec::with_capacity((1usize << n_sensors) - 1);
    for mask in 1u32..(1u32 << n_sensors) {
        let members: Vec<usize> = (0..n_sensors).filter(|s| mask & (1 << s) != 0).collect();
        groups.push(PseudoSensor { members });
    }
    Ok(groups)
}

/// Fused detection probability of a pseudo-sensor on one target.
///
/// So that no member is committed beyond its own optimum, the group
/// observes for the *shortest* step-1 duration among its members; each
/// member's probability is evaluated at that shared duration and the
/// results are OR-fused.
pub fn pseudo_sensor_probability(
    scenario: &FleetScenario,
    step1: &Step1,
    group: &PseudoSensor,
    target: usize,
) -> f64 {
    let t_shared = group
        .members
        .iter()
        .map(|s| step1.times_ms[*s][target])
        .fold(f64::INFINITY, f64::min);
    let probs: Vec<f64> = group
        .members
        .iter()
        .map(|s| optimal_probability(t_shared, scenario.tau_ms[*s][target]))
        .collect();
    fuse_or(&probs)
}

/// A full sensor-to-target map with its fused per-target probabilities
/// and criterion value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `sensor_targets[s]` is the target sensor `s` starts on, or `None`
    /// for a sensor the search left idle.
    pub sensor_targets: Vec<Option<usize>>,
    /// Per-target group, `None` for unobserved targets.
    pub groups: Vec<Option<PseudoSensor>>,
    /// Per-target fused probability under the map.
    pub fused: Vec<f64>,
    /// `Σ ε_c · fused_c`.
    pub criterion: f64,
}

/// Scores one sensor-to-target map: groups co-assigned sensors into
/// pseudo-sensors and sums the weighted fused probabilities.
pub fn assignment_value(
    scenario: &FleetScenario,
    step1: &Step1,
    sensor_targets: &[Option<usize>],
) -> Result<Assignment> {
    if sensor_targets.len() != scenario.n_sensors() {
        return Err(domain(format!(
            "{} assignments for {} sensors",
            sensor_targets.len(),
            scenario.n_sensors()
        )));
    }
    let nt = scenario.n_targets();
    let mut member_lists: Vec<Vec<usize>> = vec![Vec::new(); nt];
    for (s, choice) in sensor_targets.iter().enumerate() {
        if let Some(c) = choice {
            if *c >= nt {
                return Err(domain(format!("sensor {s} assigned to unknown target {c}")));
            }
            member_lists[*c].push(s);
        }
    }
    let mut groups = Vec::with_capacity(nt);
    let mut fused = Vec::with_capacity(nt);
    let mut criterion = 0.0;
    for (c, members) in member_lists.into_iter().enumerate() {
        if members.is_empty() {
            groups.push(None);
            fused.push(0.0);
        } else {
            let group = PseudoSensor { members };
            let p = pseudo_sensor_probability(scenario, step1, &group, c);
            criterion += scenario.weights[c] * p;
            groups.push(Some(group));
            fused.push(p);
        }
    }
    Ok(Assignment {
        sensor_targets: sensor_targets.to_vec(),
        groups,
        fused,
        criterion,
    })
}

/// Exhaustive step-3 search over every sensor-to-target-or-idle map.
///
/// Ties are broken toward the first map in odometer order (sensor 0 is
/// the fastest-changing digit; `None` sorts after the targets), which
/// makes the result deterministic.
pub fn step3_assignment(scenario: &FleetScenario, step1: &Step1) -> Result<Assignment> {
    let p = scenario.n_sensors();
    let nt = scenario.n_targets();
    let choices = nt as u128 + 1;
    if choices.pow(p as u32) > MAX_ASSIGNMENT_MAPS {
        return Err(domain(format!(
            "step-3 search over {} maps exceeds the {MAX_ASSIGNMENT_MAPS} guard",
            choices.pow(p as u32)
        )));
    }

    let mut digits = vec![0usize; p]; // 0..nt-1 = target, nt = idle
    let mut best: Option<Assignment> = None;
    loop {
        let map: Vec<Option<usize>> = digits
            .iter()
            .map(|d| if *d < nt { Some(*d) } else { None })
            .collect();
        let cand = assignment_value(scenario, step1, &map)?;
        let better = match &best {
            None => true,
            Some(b) => cand.criterion > b.criterion,
        };
        if better {
            best = Some(cand);
        }

        // odometer increment
        let mut i = 0;
        loop {
            if i == p {
                return Ok(best.expect("at least one map was scored"));
            }
            digits[i] += 1;
            if digits[i] <= nt {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
