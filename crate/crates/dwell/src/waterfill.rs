//! Water-filling allocation of one observation budget across several
//! targets (or directions).
//!
//! Given per-target time constants `τ_i`, priority weights `ε_i` and a
//! budget `T`, the solver maximizes
//!
//! ```text
//! J(t) = Σ ε_i · (1 − exp(−t_i / τ_i))    subject to  Σ t_i = T, t_i ≥ 0
//! ```
//!
//! The KKT conditions give `t_i = τ_i · ⌊ln(T·ε_i / (τ_i·λ))⌋⁺` where the
//! multiplier `λ` is the unique positive root of the budget equation
//! `Σ (τ_i/T)·⌊ln(T·ε_i/(τ_i·λ))⌋⁺ = 1`. The left side is continuous and
//! decreasing in `λ` (strictly, wherever it is positive), so λ is found by
//! bisection rather than anything cleverer.
//!
//! Targets whose weight-to-difficulty ratio is too poor receive exactly
//! zero time; the clipped logarithm handles boundary ties continuously, so
//! no explicit tie-breaking is needed.

use crate::detection::{optimal_detection_count, Geometry, RadarModel};
use crate::error::{domain, Error, Result};

/// An instance of the constrained allocation problem.
///
/// Construction validates the invariants once; the solver then assumes
/// them. Time constants must be positive, at least one weight must be
/// positive for an allocation to exist (checked at solve time so the
/// error is reported by the operation that owns it).
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    taus_ms: Vec<f64>,
    weights: Vec<f64>,
    horizon_ms: f64,
}

impl AllocationProblem {
    pub fn new(taus_ms: Vec<f64>, weights: Vec<f64>, horizon_ms: f64) -> Result<Self> {
        if taus_ms.is_empty() {
            return Err(domain("allocation problem needs at least one target"));
        }
        if taus_ms.len() != weights.len() {
            return Err(domain(format!(
                "{} time constants but {} weights",
                taus_ms.len(),
                weights.len()
            )));
        }
        if let Some(tau) = taus_ms.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(domain(format!(
                "time constants must be positive and finite, got {tau}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(domain(format!(
                "weights must be non-negative and finite, got {w}"
            )));
        }
        if !(horizon_ms > 0.0 && horizon_ms.is_finite()) {
            return Err(domain(format!(
                "horizon must be positive, got {horizon_ms}"
            )));
        }
        Ok(AllocationProblem {
            taus_ms,
            weights,
            horizon_ms,
        })
    }

    pub fn taus_ms(&self) -> &[f64] {
        &self.taus_ms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn horizon_ms(&self) -> f64 {
        self.horizon_ms
    }

    pub fn len(&self) -> usize {
        self.taus_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus_ms.is_empty()
    }

    /// The criterion `Σ ε_i (1 − exp(−t_i/τ_i))` for a candidate split.
    pub fn criterion(&self, times_ms: &[f64]) -> f64 {
        self.taus_ms
            .iter()
            .zip(&self.weights)
            .zip(times_ms)
            .map(|((tau, w), t)| w * (1.0 - (-t / tau).exp()))
            .sum()
    }
}

/// The solved split: durations, the multiplier, the set of targets that
/// received time, and the criterion value recomputed from the durations.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub times_ms: Vec<f64>,
    pub lambda: f64,
    pub active: Vec<usize>,
    pub criterion: f64,
}

/// Clip to the non-negative half-line: `x` if `x > 0`, else 0.
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Budget equation residual `Σ (τ_i/T)·⌊ln(T·ε_i/(τ_i·λ))⌋⁺ − 1`.
fn budget_residual(problem: &AllocationProblem, lambda: f64) -> f64 {
    let t_total = problem.horizon_ms;
    let mut acc = -1.0;
    for (tau, w) in problem.taus_ms.iter().zip(&problem.weights) {
        if *w > 0.0 {
            acc += tau / t_total * positive_part((t_total * w / (tau * lambda)).ln());
        }
    }
    acc
}

/// Solves the budget equation for the multiplier λ by bisection.
///
/// The search runs over `ln λ`: the root can sit hundreds of orders of
/// magnitude below the upper bracket (a single easy target with a long
/// horizon puts it at `(T/τ)·e^(−T/τ)`), and log-space bisection reaches
/// it in a bounded number of halvings. The bracket starts at
/// `λ_hi = max_i T·ε_i/τ_i`, where the residual is exactly −1, and
/// expands downward exponentially until the residual turns non-negative;
/// bisection then narrows to the floating-point fixpoint so the budget
/// `Σ t_i = T` holds to ~1e-10·T even on extreme instances.
pub fn solve_lambda(problem: &AllocationProblem) -> Result<f64> {
    let t_total = problem.horizon_ms;
    let mut hi: f64 = 0.0;
    for (tau, w) in problem.taus_ms.iter().zip(&problem.weights) {
        if *w > 0.0 {
            hi = hi.max(t_total * w / tau);
        }
    }
    if hi == 0.0 {
        return Err(Error::NoAllocation("every weight is zero"));
    }

    let residual_at = |x: f64| budget_residual(problem, x.exp());
    let x_hi_start = hi.ln();
    let mut x_hi = x_hi_start;
    let mut x_lo;
    let mut step = 1.0;
    loop {
        x_lo = x_hi_start - step;
        if residual_at(x_lo) >= 0.0 {
            break;
        }
        step *= 2.0;
        if step > 1e6 {
            // Unreachable for a validated problem: the residual grows
            // without bound as lambda -> 0.
            return Err(domain("failed to bracket the allocation multiplier"));
        }
    }

    for _ in 0..2000 {
        let mid = 0.5 * (x_lo + x_hi);
        if mid == x_lo || mid == x_hi {
            break;
        }
        if residual_at(mid) >= 0.0 {
            x_lo = mid;
        } else {
            x_hi = mid;
        }
    }
    Ok((0.5 * (x_lo + x_hi)).exp())
}

/// Solves the allocation problem: `t_i = τ_i·ln(T·ε_i/(τ_i·λ))` on the
/// active set (`λ < T·ε_i/τ_i`), zero elsewhere.
pub fn allocate(problem: &AllocationProblem) -> Result<Allocation> {
    let lambda = solve_lambda(problem)?;
    let t_total = problem.horizon_ms;
    let mut times = Vec::with_capacity(problem.len());
    let mut active = Vec::new();
    for (i, (tau, w)) in problem.taus_ms.iter().zip(&problem.weights).enumerate() {
        let t = if *w > 0.0 {
            tau * positive_part((t_total * w / (tau * lambda)).ln())
        } else {
            0.0
        };
        if t > 0.0 {
            active.push(i);
        }
        times.push(t);
    }
    let criterion = problem.criterion(&times);
    Ok(Allocation {
        times_ms: times,
        lambda,
        active,
        criterion,
    })
}

/// Closed-form allocation for the regime where every target stays active:
///
/// ```text
/// t_i = [ Σ_j τ_j·ln(ε_i·τ_j / (ε_j·τ_i)) + T ] / [ Σ_j τ_j/τ_i ]
/// ```
///
/// Returns `None` when the formula does not apply (a zero weight, or any
/// resulting duration non-positive); in that case the clipped solver
/// [`allocate`] must be used. When it does apply the two routes agree.
pub fn closed_form_allocate(problem: &AllocationProblem) -> Result<Option<Allocation>> {
    if problem.weights.iter().any(|w| *w <= 0.0) {
        return Ok(None);
    }
    let t_total = problem.horizon_ms;
    let taus = &problem.taus_ms;
    let weights = &problem.weights;
    let n = problem.len();

    let mut times = Vec::with_capacity(n);
    for i in 0..n {
        let mut num = t_total;
        let mut den = 0.0;
        for j in 0..n {
            num += taus[j] * ((weights[i] * taus[j]) / (weights[j] * taus[i])).ln();
            den += taus[j] / taus[i];
        }
        let t_i = num / den;
        if !(t_i > 0.0) {
            return Ok(None);
        }
        times.push(t_i);
    }

    // All targets active; the multiplier is implied by any one of them.
    let lambda = t_total * weights[0] / taus[0] * (-times[0] / taus[0]).exp();
    let criterion = problem.criterion(&times);
    Ok(Some(Allocation {
        times_ms: times,
        lambda,
        active: (0..n).collect(),
        criterion,
    }))
}

/// Optimal elementary-look counts for a solved allocation: the count each
/// target would be split into during its `t_i`, zero where `t_i = 0`.
pub fn elementary_counts(
    radar: &RadarModel,
    geoms: &[Geometry],
    times_ms: &[f64],
) -> Result<Vec<f64>> {
    if geoms.len() != times_ms.len() {
        return Err(domain(format!(
            "{} geometries but {} durations",
            geoms.len(),
            times_ms.len()
        )));
    }
    geoms
        .iter()
        .zip(times_ms)
        .map(|(g, t)| {
            if *t > 0.0 {
                optimal_detection_count(radar, g, *t)
            } else {
                Ok(0.0)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::Point;

    const LN_2: f64 = std::f64::consts::LN_2;

    /// Scale constant backed out of one (duration, probability, distance)
    /// observation so that tau = K * d^4 reproduces it.
    fn scale_from(duration_ms: f64, probability: f64, distance_km: f64) -> f64 {
        (-duration_ms / (1.0 - probability).ln()) / distance_km.powi(4)
    }

    #[test]
    fn positive_part_clips() {
        assert_eq!(positive_part(-3.0), 0.0);
        assert_eq!(positive_part(0.0), 0.0);
        assert_eq!(positive_part(2.5), 2.5);
    }

    #[test]
    fn single_target_takes_everything() {
        let p = AllocationProblem::new(vec![3.0], vec![1.0], 7.0).unwrap();
        let a = allocate(&p).unwrap();
        assert!((a.times_ms[0] - 7.0).abs() < 1e-12);
        assert_eq!(a.active, vec![0]);
        // lambda = (T*eps/tau) * exp(-T/tau) for the forced full budget
        let expected = 7.0 / 3.0 * (-7.0f64 / 3.0).exp();
        assert!((a.lambda - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn identical_targets_split_evenly() {
        let p = AllocationProblem::new(vec![2.0, 2.0], vec![1.5, 1.5], 10.0).unwrap();
        let a = allocate(&p).unwrap();
        assert!((a.times_ms[0] - 5.0).abs() < 1e-10);
        assert!((a.times_ms[1] - 5.0).abs() < 1e-10);
    }

    #[test]
    fn zero_weight_is_excluded() {
        let p = AllocationProblem::new(vec![1.0, 1.0], vec![1.0, 0.0], 4.0).unwrap();
        let a = allocate(&p).unwrap();
        assert_eq!(a.times_ms[1], 0.0);
        assert!((a.times_ms[0] - 4.0).abs() < 1e-12);
        assert_eq!(a.active, vec![0]);
    }

    #[test]
    fn all_zero_weights_is_an_error() {
        let p = AllocationProblem::new(vec![1.0, 2.0], vec![0.0, 0.0], 4.0).unwrap();
        assert!(matches!(allocate(&p), Err(Error::NoAllocation(_))));
    }

    #[test]
    fn budget_and_kkt_hold_on_a_worked_instance() {
        // Distances 26/45/33 km under a scale calibrated from the
        // (2.5807 ms, 0.4814, 45 km) observation; T = 5 ms.
        let k = scale_from(2.5807, 0.4814, 45.0);
        let taus: Vec<f64> = [26.0f64, 45.0, 33.0]
            .iter()
            .map(|d| k * d.powi(4))
            .collect();
        let p = AllocationProblem::new(taus.clone(), vec![1.0; 3], 5.0).unwrap();
        let a = allocate(&p).unwrap();

        let total: f64 = a.times_ms.iter().sum();
        assert!((total - 5.0).abs() <= 1e-9 * 5.0);

        // On the active set the marginal rates equalize at lambda / T.
        let rate = a.lambda / 5.0;
        for &i in &a.active {
            let r = 1.0 / taus[i] * (-a.times_ms[i] / taus[i]).exp();
            assert!((r - rate).abs() <= 1e-8 * rate, "target {i}: {r} vs {rate}");
        }
        // The equalized rate for this instance sits near 0.1576.
        assert!((rate - 0.1576).abs() <= 0.002, "rate was {rate}");
    }

    #[test]
    fn reproduces_published_three_target_split() {
        // Ranges 45/51/50 km, equal weights, T = 5 ms, calibrated scale.
        let k = scale_from(2.5807, 0.4814, 45.0);
        let taus: Vec<f64> = [45.0f64, 51.0, 50.0]
            .iter()
            .map(|d| k * d.powi(4))
            .collect();
        let p = AllocationProblem::new(taus, vec![1.0; 3], 5.0).unwrap();
        let a = allocate(&p).unwrap();
        for (got, want) in a.times_ms.iter().zip([2.5807, 1.0109, 1.4084]) {
            assert!(
                (got - want).abs() <= 0.01 * want,
                "expected {want}, got {got}"
            );
        }
    }

    #[test]
    fn weighted_split_shifts_time_toward_heavy_direction() {
        // Three directions: a hopeless far one and two live ones with time
        // constants backed out of an unweighted run (26.32 ms, 1.86 ms).
        let tau_far = 152.0;
        let tau_single = -23.47 / (1.0f64 - 0.59).ln();
        let tau_pair = -6.53 / (1.0f64 - 0.97).ln();
        let p = AllocationProblem::new(
            vec![tau_far, tau_single, tau_pair],
            vec![0.07, 0.18, 0.74],
            30.0,
        )
        .unwrap();
        let a = allocate(&p).unwrap();
        assert_eq!(a.times_ms[0], 0.0);
        assert!(
            (a.times_ms[1] - 21.08).abs() <= 0.3,
            "got {}",
            a.times_ms[1]
        );
        assert!((a.times_ms[2] - 8.92).abs() <= 0.3, "got {}", a.times_ms[2]);
    }

    #[test]
    fn closed_form_single_target() {
        let p = AllocationProblem::new(vec![3.0], vec![2.0], 9.0).unwrap();
        let a = closed_form_allocate(&p).unwrap().unwrap();
        assert!((a.times_ms[0] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_symmetric_split() {
        let p = AllocationProblem::new(vec![2.0; 4], vec![0.7; 4], 6.0).unwrap();
        let a = closed_form_allocate(&p).unwrap().unwrap();
        for t in &a.times_ms {
            assert!((t - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_clipped_solver_on_published_column() {
        // Ranges 52/25/41 km: every duration positive, so the closed form
        // applies and must match both the solver and the published values.
        let k = scale_from(2.5807, 0.4814, 45.0);
        let taus: Vec<f64> = [52.0f64, 25.0, 41.0]
            .iter()
            .map(|d| k * d.powi(4))
            .collect();
        let p = AllocationProblem::new(taus, vec![1.0; 3], 5.0).unwrap();
        let cf = closed_form_allocate(&p).unwrap().unwrap();
        let wf = allocate(&p).unwrap();
        for (a, b) in cf.times_ms.iter().zip(&wf.times_ms) {
            assert!((a - b).abs() <= 1e-9);
        }
        for (got, want) in cf.times_ms.iter().zip([0.9224, 1.1462, 2.9314]) {
            assert!(
                (got - want).abs() <= 0.01 * want,
                "expected {want}, got {got}"
            );
        }
    }

    #[test]
    fn closed_form_refuses_starved_instances() {
        // One target 100x harder than the rest with a thin budget: the
        // all-active formula would give it negative time.
        let p = AllocationProblem::new(vec![1.0, 1.0, 100.0], vec![1.0; 3], 1.0).unwrap();
        assert_eq!(closed_form_allocate(&p).unwrap(), None);
        let a = allocate(&p).unwrap();
        assert_eq!(a.times_ms[2], 0.0);
    }

    #[test]
    fn criterion_is_recomputed_from_durations() {
        let p = AllocationProblem::new(vec![1.0, 4.0], vec![1.0, 2.0], 3.0).unwrap();
        let a = allocate(&p).unwrap();
        assert!((a.criterion - p.criterion(&a.times_ms)).abs() < 1e-15);
    }

    #[test]
    fn elementary_counts_follow_durations() {
        let radar = RadarModel::new(1.0e6, 1e-4, Point::default(), 0.0).unwrap();
        let geoms = vec![
            Geometry::new(40.0, 0.0).unwrap(),
            Geometry::new(55.0, 0.2).unwrap(),
        ];
        let times = vec![2.0, 0.0];
        let counts = elementary_counts(&radar, &geoms, &times).unwrap();
        let expected = optimal_detection_count(&radar, &geoms[0], 2.0).unwrap();
        assert!((counts[0] - expected).abs() < 1e-12);
        assert_eq!(counts[1], 0.0);

        // linear in the duration
        let doubled = elementary_counts(&radar, &geoms, &[4.0, 0.0]).unwrap();
        assert!((doubled[0] - 2.0 * counts[0]).abs() < 1e-9 * counts[0]);
    }

    #[test]
    fn lambda_is_the_budget_root() {
        let p = AllocationProblem::new(vec![0.5, 5.0, 2.0], vec![1.0, 0.3, 2.0], 4.0).unwrap();
        let lambda = solve_lambda(&p).unwrap();
        assert!(budget_residual(&p, lambda).abs() < 1e-9);
    }

    #[test]
    fn half_life_sanity() {
        // A target observed for tau*ln2 reaches probability one half, so a
        // two-target tie splits the budget at the same marginal rate.
        let p = AllocationProblem::new(vec![1.0, 1.0], vec![1.0, 1.0], 2.0 * LN_2).unwrap();
        let a = allocate(&p).unwrap();
        let prob = 1.0 - (-a.times_ms[0] / 1.0f64).exp();
        assert!((prob - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_malformed_problems() {
        assert!(AllocationProblem::new(vec![], vec![], 1.0).is_err());
        assert!(AllocationProblem::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![1.0], vec![-1.0], 1.0).is_err());
        assert!(AllocationProblem::new(vec![1.0], vec![1.0], 0.0).is_err());
    }
}
