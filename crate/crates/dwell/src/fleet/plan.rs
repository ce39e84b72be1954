//! Event-driven sensor planning over the horizon.
//!
//! The step-3 assignment is only valid until the first step-1 duration
//! runs out. From there the timeline is rolled forward by three rules:
//!
//! - rule 1: whenever a sensor finishes the step-1 duration of its current
//!   target, that sensor (and only that sensor) is redirected;
//! - rule 2: if target weights differ, the freed sensor goes to the
//!   unfinished target with the highest weight;
//! - rule 3: otherwise it goes to the target needing the lowest remaining
//!   nonzero observation time. By default "remaining time" means the freed
//!   sensor's own step-1 durations; [`Rule3::Global`] instead ranks
//!   targets by the smallest remaining duration across the whole fleet.
//!
//! A sensor never abandons a target early, so every sensor eventually
//! spends exactly its step-1 duration on every target it visits and its
//! segments tile `[0, T]`.

use super::{Assignment, FleetScenario, Step1};
use crate::error::{domain, Result};

/// Interpretation of rule 3's "lowest observation time".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rule3 {
    /// The freed sensor's own remaining step-1 durations (default).
    #[default]
    PerSensor,
    /// The smallest remaining duration for the target across all sensors.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanOptions {
    pub rule3: Rule3,
}

/// One contiguous observation of a target by a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub sensor: usize,
    pub target: usize,
    pub start_ms: f64,
    pub end_ms: f64,
}

/// A re-planning decision: the expiry that triggered it, the redirect, and
/// the remaining-duration matrix at that instant (in-progress visits show
/// their unfinished remainder).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplanEvent {
    pub time_ms: f64,
    pub sensor: usize,
    pub new_target: Option<usize>,
    pub remaining_ms: Vec<Vec<f64>>,
}

/// The full plan: ordered segments, the re-planning history, per-target
/// union observation spans and final detection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanTimeline {
    pub segments: Vec<Segment>,
    pub events: Vec<ReplanEvent>,
    /// Union (deduplicated) length of each target's observation intervals.
    pub observed_ms: Vec<f64>,
    /// `1 − Π exp(−Δt/τ)` over each target's segments.
    pub final_probabilities: Vec<f64>,
    /// `Σ ε_c · final_probabilities[c]`.
    pub criterion: f64,
    /// Criterion if the step-3 assignment had been held for the whole
    /// horizon instead.
    pub static_criterion: f64,
}

/// Zero threshold for remaining durations, relative to the horizon.
fn epsilon(scenario: &FleetScenario) -> f64 {
    1e-12 * scenario.horizon_ms()
}

/// Rolls the step-3 assignment forward over `[0, T]`.
pub fn plan(
    scenario: &FleetScenario,
    step1: &Step1,
    assignment: &Assignment,
    options: PlanOptions,
) -> Result<PlanTimeline> {
    let p = scenario.n_sensors();
    let nt = scenario.n_targets();
    if step1.times_ms.len() != p || assignment.sensor_targets.len() != p {
        return Err(domain(
            "step-1/assignment shape does not match the scenario",
        ));
    }
    let eps = epsilon(scenario);
    let rule2_active = scenario
        .weights()
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() > 0.0);

    let mut remaining = step1.times_ms.clone();
    // (current target, visit start, visit end) per busy sensor
    let mut current: Vec<Option<(usize, f64, f64)>> = vec![None; p];
    let mut segments = Vec::new();
    let mut events = Vec::new();

    let pick_next = |remaining: &Vec<Vec<f64>>, sensor: usize| -> Option<usize> {
        let candidates: Vec<usize> = (0..nt).filter(|c| remaining[sensor][*c] > eps).collect();
        if candidates.is_empty() {
            return None;
        }
        let chosen = if rule2_active {
            *candidates
                .iter()
                .max_by(|a, b| {
                    scenario.weights()[**a]
                        .partial_cmp(&scenario.weights()[**b])
                        .unwrap()
                        .then(b.cmp(a)) // tie: lowest target index wins the max
                })
                .unwrap()
        } else {
            let need = |c: usize| -> f64 {
                match options.rule3 {
                    Rule3::PerSensor => remaining[sensor][c],
                    Rule3::Global => (0..p)
                        .map(|s| remaining[s][c])
                        .filter(|t| *t > eps)
                        .fold(f64::INFINITY, f64::min),
                }
            };
            *candidates
                .iter()
                .min_by(|a, b| need(**a).partial_cmp(&need(**b)).unwrap().then(a.cmp(b)))
                .unwrap()
        };
        Some(chosen)
    };

    // Seed from the step-3 assignment; sensors it left idle (or whose
    // assigned target needs no time) are redirected immediately at t = 0.
    for s in 0..p {
        let start_on = match assignment.sensor_targets[s] {
            Some(c) if remaining[s][c] > eps => Some(c),
            _ => pick_next(&remaining, s),
        };
        if let Some(c) = start_on {
            current[s] = Some((c, 0.0, remaining[s][c]));
        }
    }

    loop {
        // Earliest expiry; ties resolve to the lowest sensor index.
        let mut next: Option<(f64, usize)> = None;
        for (s, st) in current.iter().enumerate() {
            if let Some((_, _, end)) = st {
                if next.is_none() || *end < next.unwrap().0 {
                    next = Some((*end, s));
                }
            }
        }
        let Some((now, s)) = next else { break };
        let (c, start, _) = current[s].take().unwrap();
        segments.push(Segment {
            sensor: s,
            target: c,
            start_ms: start,
            end_ms: now,
        });
        remaining[s][c] = 0.0;

        // Snapshot with in-progress visits reduced to their remainder.
        let mut snapshot = remaining.clone();
        for (s2, st) in current.iter().enumerate() {
            if let Some((c2, _, end2)) = st {
                snapshot[s2][*c2] = end2 - now;
            }
        }

        let next_target = pick_next(&remaining, s);
        events.push(ReplanEvent {
            time_ms: now,
            sensor: s,
            new_target: next_target,
            remaining_ms: snapshot,
        });
        if let Some(c2) = next_target {
            current[s] = Some((c2, now, now + remaining[s][c2]));
        }
    }

    // Union observation spans per target.
    let observed: Vec<f64> = (0..nt)
        .map(|c| {
            let mut spans: Vec<(f64, f64)> = segments
                .iter()
                .filter(|seg| seg.target == c)
                .map(|seg| (seg.start_ms, seg.end_ms))
                .collect();
            spans.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut total = 0.0;
            let mut open: Option<(f64, f64)> = None;
            for (lo, hi) in spans {
                match open {
                    None => open = Some((lo, hi)),
                    Some((olo, ohi)) => {
                        if lo <= ohi {
                            open = Some((olo, ohi.max(hi)));
                        } else {
                            total += ohi - olo;
                            open = Some((lo, hi));
                        }
                    }
                }
            }
            if let Some((olo, ohi)) = open {
                total += ohi - olo;
            }
            total
        })
        .collect();

    // Independent looks multiply the miss probabilities.
    let final_probabilities: Vec<f64> = (0..nt)
        .map(|c| {
            let exponent: f64 = segments
                .iter()
                .filter(|seg| seg.target == c)
                .map(|seg| (seg.end_ms - seg.start_ms) / scenario.tau_ms(seg.sensor, c))
                .sum();
            1.0 - (-exponent).exp()
        })
        .collect();
    let criterion = (0..nt)
        .map(|c| scenario.weights()[c] * final_probabilities[c])
        .sum();

    // Baseline: the initial assignment held for the whole horizon.
    let mut static_criterion = 0.0;
    for c in 0..nt {
        let mut exponent = 0.0;
        for s in 0..p {
            if assignment.sensor_targets[s] == Some(c) {
                exponent += scenario.horizon_ms() / scenario.tau_ms(s, c);
            }
        }
        if exponent > 0.0 {
            static_criterion += scenario.weights()[c] * (1.0 - (-exponent).exp());
        }
    }

    Ok(PlanTimeline {
        segments,
        events,
        observed_ms: observed,
        final_probabilities,
        criterion,
        static_criterion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::{step1_allocations, step3_assignment, FleetScenario};

    fn worked() -> (FleetScenario, Step1, Assignment) {
        let k = crate::fleet::calibrate_scale(2.5807, 0.4814, 45.0).unwrap();
        let sc = FleetScenario::from_distances(
            vec![
                vec![45.0, 51.0, 50.0],
                vec![26.0, 45.0, 33.0],
                vec![52.0, 25.0, 41.0],
            ],
            k,
            vec![1.0; 3],
            5.0,
        )
        .unwrap();
        let step1 = step1_allocations(&sc).unwrap();
        let assignment = step3_assignment(&sc, &step1).unwrap();
        (sc, step1, assignment)
    }

    #[test]
    fn first_replanning_matches_the_worked_example() {
        let (sc, step1, assignment) = worked();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        let first = &plan.events[0];
        assert!(
            (first.time_ms - 1.1462).abs() < 0.001,
            "first event at {}",
            first.time_ms
        );
        assert_eq!(first.sensor, 2);
        // Freed sensor moves to the target needing its lowest remaining time.
        assert_eq!(first.new_target, Some(0));
        // Remaining matrix right after the expiry.
        let want = [
            [1.4345, 1.0109, 1.4084],
            [1.1702, 1.8768, 0.8068],
            [0.9224, 0.0, 2.9314],
        ];
        for (s, row) in want.iter().enumerate() {
            for (c, w) in row.iter().enumerate() {
                assert!(
                    (first.remaining_ms[s][c] - w).abs() < 0.001,
                    "remaining[{s}][{c}] = {}, want {w}",
                    first.remaining_ms[s][c],
                );
            }
        }
    }

    #[test]
    fn worked_example_final_numbers() {
        let (sc, step1, assignment) = worked();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        for (got, want) in plan.observed_ms.iter().zip([3.1232, 3.5655, 4.8845]) {
            assert!((got - want).abs() < 0.01, "observed {got}, want {want}");
        }
        for (got, want) in plan
            .final_probabilities
            .iter()
            .zip([0.9686, 0.9751, 0.9520])
        {
            assert!(
                (got - want).abs() <= 0.005,
                "probability {got}, want {want}"
            );
        }
        assert!((plan.criterion - 2.8957).abs() <= 0.01);
        assert!((plan.static_criterion - 2.7075).abs() <= 0.01);
        assert!(plan.criterion > plan.static_criterion);
    }

    #[test]
    fn segments_tile_the_horizon_per_sensor() {
        let (sc, step1, assignment) = worked();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        for s in 0..3 {
            let mut segs: Vec<&Segment> =
                plan.segments.iter().filter(|seg| seg.sensor == s).collect();
            segs.sort_by(|a, b| a.start_ms.partial_cmp(&b.start_ms).unwrap());
            assert!(segs[0].start_ms.abs() < 1e-12);
            for w in segs.windows(2) {
                assert!((w[0].end_ms - w[1].start_ms).abs() < 1e-9);
            }
            assert!((segs.last().unwrap().end_ms - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn every_visit_spends_the_full_step1_duration() {
        let (sc, step1, assignment) = worked();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        for s in 0..sc.n_sensors() {
            for c in 0..sc.n_targets() {
                let spent: f64 = plan
                    .segments
                    .iter()
                    .filter(|seg| seg.sensor == s && seg.target == c)
                    .map(|seg| seg.end_ms - seg.start_ms)
                    .sum();
                assert!(
                    (spent - step1.times_ms[s][c]).abs() < 1e-9,
                    "sensor {s} target {c}: spent {spent}, step1 {}",
                    step1.times_ms[s][c]
                );
            }
        }
    }

    #[test]
    fn final_probability_matches_summed_exponent_identity() {
        let (sc, step1, assignment) = worked();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        for c in 0..3 {
            let exponent: f64 = (0..3).map(|s| step1.times_ms[s][c] / sc.tau_ms(s, c)).sum();
            let expected = 1.0 - (-exponent).exp();
            assert!((plan.final_probabilities[c] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rule2_prefers_heavy_targets() {
        // Two sensors, two targets with sharply different weights: every
        // redirect must land on the heavier unfinished target.
        let sc = FleetScenario::from_tau_matrix(
            vec![vec![1.0, 1.0], vec![1.5, 0.7]],
            vec![0.1, 0.9],
            4.0,
        )
        .unwrap();
        let step1 = step1_allocations(&sc).unwrap();
        let assignment = step3_assignment(&sc, &step1).unwrap();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        for ev in &plan.events {
            if let Some(c) = ev.new_target {
                // the heavy target is 1; it must be chosen while unfinished
                if ev.remaining_ms[ev.sensor][1] > 1e-9 {
                    assert_eq!(c, 1, "event at {} redirected to {c}", ev.time_ms);
                }
            }
        }
    }

    #[test]
    fn global_rule3_departs_from_per_sensor_choice() {
        // Crafted step-1 durations: when sensor 0 frees up at 1.2 ms its
        // own cheapest remaining target is 0 (1.8 ms), but target 1 is the
        // globally cheapest (sensor 1 would only need 0.5 ms there).
        let sc = FleetScenario::from_tau_matrix(
            vec![vec![2.0, 2.0, 2.0], vec![2.0, 2.0, 2.0]],
            vec![1.0; 3],
            6.0,
        )
        .unwrap();
        let step1 = Step1 {
            times_ms: vec![vec![1.8, 3.0, 1.2], vec![3.0, 0.5, 2.5]],
            probabilities: vec![vec![0.0; 3]; 2],
            lambdas: vec![0.0; 2],
        };
        let assignment = crate::fleet::assignment_value(&sc, &step1, &[Some(2), Some(0)]).unwrap();
        let per_sensor = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        let global = plan(
            &sc,
            &step1,
            &assignment,
            PlanOptions {
                rule3: Rule3::Global,
            },
        )
        .unwrap();

        let first_redirect = |p: &PlanTimeline| p.events[0].new_target;
        assert_eq!(first_redirect(&per_sensor), Some(0));
        assert_eq!(first_redirect(&global), Some(1));

        // Different visit orders, same spent-duration matrix, so the final
        // probabilities agree exactly.
        for c in 0..3 {
            assert!(
                (per_sensor.final_probabilities[c] - global.final_probabilities[c]).abs() < 1e-12
            );
        }
    }

    #[test]
    fn idle_step3_sensor_is_redirected_at_time_zero() {
        // One dominant sensor close to the only target, one useless far
        // sensor: step 3 may idle the far one, but the plan still uses it.
        let sc =
            FleetScenario::from_tau_matrix(vec![vec![0.5], vec![50.0]], vec![1.0], 3.0).unwrap();
        let step1 = step1_allocations(&sc).unwrap();
        let assignment = step3_assignment(&sc, &step1).unwrap();
        let plan = plan(&sc, &step1, &assignment, PlanOptions::default()).unwrap();
        // Both sensors spend the full horizon on the lone target.
        for s in 0..2 {
            let spent: f64 = plan
                .segments
                .iter()
                .filter(|seg| seg.sensor == s)
                .map(|seg| seg.end_ms - seg.start_ms)
                .sum();
            assert!((spent - 3.0).abs() < 1e-9);
        }
    }
}
