//! Solver orchestration: a prepared scenario in, a fully materialized
//! report out. Every number in a report is a pure function of the
//! scenario file, so identical inputs reproduce identical reports.

use anyhow::{anyhow, Result};

use dwell::fleet::{
    assignment_value, enumerate_pseudo_sensors, plan, step1_allocations, step3_assignment,
    Assignment, PlanOptions, PlanTimeline, Step1,
};
use dwell::probmap::{allocate_directions, DirectionAllocation};
use dwell::waterfill::{allocate, elementary_counts, AllocationProblem};

use crate::scenario::{DetPrepared, FleetPrepared, Prepared, ProbPrepared};

pub struct DetReport {
    pub target_names: Vec<String>,
    pub weights: Vec<f64>,
    pub taus_ms: Vec<f64>,
    pub times_ms: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Elementary-look counts; only available with declared radar physics.
    pub look_counts: Option<Vec<f64>>,
    pub lambda: f64,
    pub criterion: f64,
    pub scale_used: Option<f64>,
}

pub struct ProbReport {
    pub prior_names: Vec<String>,
    pub direction_weights: Vec<f64>,
    pub allocation: DirectionAllocation,
    pub horizon_ms: f64,
}

pub struct CandidateRow {
    pub description: String,
    pub criterion: f64,
}

pub struct FleetReport {
    pub sensor_names: Vec<String>,
    pub target_names: Vec<String>,
    pub tau_ms: Vec<Vec<f64>>,
    pub distances_km: Option<Vec<Vec<f64>>>,
    pub step1: Step1,
    /// Pseudo-sensor probability table: one row per group (label, per-target).
    pub pseudo: Vec<(String, Vec<f64>)>,
    pub assignment: Assignment,
    pub candidates: Vec<CandidateRow>,
    pub timeline: PlanTimeline,
    pub scale_used: Option<f64>,
    pub horizon_ms: f64,
}

pub enum RunReport {
    Deterministic(DetReport),
    Probabilistic(ProbReport),
    Fleet(Box<FleetReport>),
}

/// How many scored assignment candidates the fleet report keeps.
const CANDIDATE_ROWS: usize = 12;

pub fn run(prepared: &Prepared) -> Result<RunReport> {
    match prepared {
        Prepared::Deterministic(det) => run_deterministic(det).map(RunReport::Deterministic),
        Prepared::Probabilistic(prob) => run_probabilistic(prob).map(RunReport::Probabilistic),
        Prepared::Fleet(fleet) => run_fleet(fleet).map(|r| RunReport::Fleet(Box::new(r))),
    }
}

fn run_deterministic(det: &DetPrepared) -> Result<DetReport> {
    let problem = AllocationProblem::new(det.taus_ms.clone(), det.weights.clone(), det.horizon_ms)
        .map_err(|e| anyhow!("allocation setup: {e}"))?;
    let alloc = allocate(&problem).map_err(|e| anyhow!("allocation failed: {e}"))?;
    let probabilities: Vec<f64> = alloc
        .times_ms
        .iter()
        .zip(&det.taus_ms)
        .map(|(t, tau)| 1.0 - (-t / tau).exp())
        .collect();
    let look_counts = match &det.geometry {
        Some((radar, geoms)) => Some(
            elementary_counts(radar, geoms, &alloc.times_ms)
                .map_err(|e| anyhow!("look counts: {e}"))?,
        ),
        None => None,
    };
    Ok(DetReport {
        target_names: det.target_names.clone(),
        weights: det.weights.clone(),
        taus_ms: det.taus_ms.clone(),
        times_ms: alloc.times_ms,
        probabilities,
        look_counts,
        lambda: alloc.lambda,
        criterion: alloc.criterion,
        scale_used: det.scale_used,
    })
}

fn run_probabilistic(prob: &ProbPrepared) -> Result<ProbReport> {
    let allocation = allocate_directions(
        &prob.grid,
        &prob.priors,
        &prob.radar,
        &prob.direction_weights,
        prob.horizon_ms,
    )
    .map_err(|e| anyhow!("direction allocation failed: {e}"))?;
    Ok(ProbReport {
        prior_names: prob.prior_names.clone(),
        direction_weights: prob.direction_weights.clone(),
        allocation,
        horizon_ms: prob.horizon_ms,
    })
}

fn group_label(members: &[usize], sensor_names: &[String]) -> String {
    members
        .iter()
        .map(|s| sensor_names[*s].as_str())
        .collect::<Vec<_>>()
        .join("-")
}

fn run_fleet(fleet: &FleetPrepared) -> Result<FleetReport> {
    let sc = &fleet.scenario;
    let step1 = step1_allocations(sc).map_err(|e| anyhow!("step 1 failed: {e}"))?;

    let groups = enumerate_pseudo_sensors(sc.n_sensors())
        .map_err(|e| anyhow!("pseudo-sensor enumeration: {e}"))?;
    let pseudo: Vec<(String, Vec<f64>)> = groups
        .iter()
        .map(|g| {
            let row: Vec<f64> = (0..sc.n_targets())
                .map(|c| dwell::fleet::pseudo_sensor_probability(sc, &step1, g, c))
                .collect();
            (group_label(g.members(), &fleet.sensor_names), row)
        })
        .collect();

    let assignment = step3_assignment(sc, &step1).map_err(|e| anyhow!("step 3 failed: {e}"))?;

    // Score every sensor-to-target map again to report the leading
    // candidates next to the winner.
    let mut candidates = Vec::new();
    let nt = sc.n_targets();
    let p = sc.n_sensors();
    let mut digits = vec![0usize; p];
    'outer: loop {
        let map: Vec<Option<usize>> = digits
            .iter()
            .map(|d| if *d < nt { Some(*d) } else { None })
            .collect();
        let value =
            assignment_value(sc, &step1, &map).map_err(|e| anyhow!("candidate scoring: {e}"))?;
        let description = map
            .iter()
            .enumerate()
            .filter_map(|(s, c)| {
                c.map(|c| format!("{}->{}", fleet.sensor_names[s], fleet.target_names[c]))
            })
            .collect::<Vec<_>>()
            .join(" ");
        let description = if description.is_empty() {
            "(all idle)".to_string()
        } else {
            description
        };
        candidates.push(CandidateRow {
            description,
            criterion: value.criterion,
        });
        let mut i = 0;
        loop {
            if i == p {
                break 'outer;
            }
            digits[i] += 1;
            if digits[i] <= nt {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
    candidates.sort_by(|a, b| {
        b.criterion
            .partial_cmp(&a.criterion)
            .unwrap()
            .then_with(|| a.description.cmp(&b.description))
    });
    candidates.truncate(CANDIDATE_ROWS);

    let timeline = plan(sc, &step1, &assignment, PlanOptions { rule3: fleet.rule3 })
        .map_err(|e| anyhow!("planning failed: {e}"))?;

    Ok(FleetReport {
        sensor_names: fleet.sensor_names.clone(),
        target_names: fleet.target_names.clone(),
        tau_ms: (0..sc.n_sensors())
            .map(|s| (0..sc.n_targets()).map(|c| sc.tau_ms(s, c)).collect())
            .collect(),
        distances_km: sc.distances_km().cloned(),
        step1,
        pseudo,
        assignment,
        candidates,
        timeline,
        scale_used: fleet.scale_used,
        horizon_ms: sc.horizon_ms(),
    })
}
