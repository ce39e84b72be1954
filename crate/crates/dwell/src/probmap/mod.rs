//! Allocation under probabilistic target knowledge.
//!
//! When target positions are known only as probability densities, several
//! targets may share one angular direction and every direction must be
//! considered. The pipeline:
//!
//! 1. discretize the space into range rings x directions ([`SurveillanceGrid`]),
//! 2. integrate each prior into per-cell occupancy masses ([`integrate_prior`]),
//! 3. per direction, evaluate the probability of detecting at least one
//!    target as a function of the dwell time (cells sum per target,
//!    inclusion-exclusion across targets),
//! 4. fit that curve to the parametric family `exp(−ω·t^(−n))`,
//! 5. optimally split a direction's dwell into elementary looks, which
//!    collapses the fitted model to `1 − exp(−t/τ_j)`,
//! 6. hand the per-direction `(τ_j, ε_j)` to the water-filling solver.
//!
//! Directions with no prior mass (or outside the antenna's forward
//! half-space) are excluded before fitting; they can never receive time.

mod grid;

pub use grid::{integrate_prior, GaussianPrior, MassGrid, SurveillanceGrid};

use crate::detection::RadarModel;
use crate::error::{domain, Error, Result};
use crate::waterfill::{allocate, Allocation, AllocationProblem};

/// Exact union expansion is refused above this many targets per direction.
pub const UNION_TARGET_LIMIT: usize = 20;

/// Directions whose total prior mass is below this are excluded.
pub const EMPTY_DIRECTION_MASS: f64 = 1e-9;

/// Number of sample times used to fit each direction's detection curve.
pub const FIT_SAMPLES: usize = 32;

/// Least-squares fit of `p(t) ≈ exp(−ω·t^(−n))` for one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionFit {
    pub omega: f64,
    pub exponent: f64,
    /// Largest absolute residual between the fitted model and the supplied
    /// samples, in probability space.
    pub fit_error: f64,
}

/// Everything derived for one observable direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionModel {
    /// Zero-based direction index on the grid.
    pub direction: usize,
    pub omega: f64,
    pub exponent: f64,
    pub gamma_s: f64,
    pub tau_ms: f64,
    pub fit_error: f64,
    /// Total prior mass (all targets) in this direction.
    pub mass: f64,
}

/// Result of [`allocate_directions`]: per-direction models (None where a
/// direction was excluded), the time split, the optimal elementary-look
/// counts and the modelled detection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionAllocation {
    pub models: Vec<Option<DirectionModel>>,
    pub times_ms: Vec<f64>,
    pub counts: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub lambda: f64,
    /// Directions that received time, zero-based.
    pub active: Vec<usize>,
    pub criterion: f64,
}

/// Off-axis angle of direction `j` relative to the radar boresight,
/// wrapped to (−π, π].
pub fn direction_off_axis_rad(grid: &SurveillanceGrid, radar: &RadarModel, j: usize) -> f64 {
    let mut d = grid.direction_center_rad(j) - radar.boresight_rad;
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d <= -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d
}

/// Detection probability contributed by one cell: occupancy mass times the
/// high-SNR detection probability at the cell's centre range,
/// `ρ·exp(−δ·r⁴/t)` with `δ = ln(1/P_fa)/(α·cos²θ)`.
///
/// A zero dwell returns the limit value 0.
pub fn cell_detection_probability(
    rho: f64,
    range_km: f64,
    t_ms: f64,
    radar: &RadarModel,
    off_axis_rad: f64,
) -> f64 {
    if t_ms <= 0.0 || rho == 0.0 {
        return 0.0;
    }
    let c = off_axis_rad.cos();
    let delta = (1.0 / radar.p_fa).ln() / (radar.alpha_km4_per_ms * c * c);
    rho * (-delta * range_km.powi(4) / t_ms).exp()
}

/// Probability of detecting target `k` (its mass grid) in direction `j`
/// within `t_ms`: the sum of its cell contributions over the rings.
pub fn target_direction_probability(
    mass: &MassGrid,
    grid: &SurveillanceGrid,
    radar: &RadarModel,
    j: usize,
    t_ms: f64,
) -> f64 {
    let theta = direction_off_axis_rad(grid, radar, j);
    (0..grid.n_range)
        .map(|i| {
            cell_detection_probability(mass.at(i, j), grid.ring_center_km(i), t_ms, radar, theta)
        })
        .sum()
}

/// Probability of detecting at least one of several independent targets,
/// by the inclusion-exclusion expansion over their marginal probabilities.
///
/// Joint terms are products of marginals (independent detections). Refuses
/// more than [`UNION_TARGET_LIMIT`] targets; the complement-product form
/// `1 − Π(1−p_k)` is the cheap equivalent for larger instances.
pub fn inclusion_exclusion_union(probabilities: &[f64]) -> Result<f64> {
    let k = probabilities.len();
    if k > UNION_TARGET_LIMIT {
        return Err(Error::UnionTooLarge {
            targets: k,
            limit: UNION_TARGET_LIMIT,
        });
    }
    let mut union = 0.0;
    for subset in 1u32..(1u32 << k) {
        let mut product = 1.0;
        for (idx, p) in probabilities.iter().enumerate() {
            if subset & (1 << idx) != 0 {
                product *= p;
            }
        }
        if subset.count_ones() % 2 == 1 {
            union += product;
        } else {
            union -= product;
        }
    }
    Ok(union)
}

/// Union detection probability of direction `j` at dwell `t_ms`, across
/// all targets with mass in that direction.
pub fn union_probability(
    masses: &[MassGrid],
    grid: &SurveillanceGrid,
    radar: &RadarModel,
    j: usize,
    t_ms: f64,
) -> Result<f64> {
    let marginals: Vec<f64> = masses
        .iter()
        .filter(|m| m.direction_mass(j) > 0.0)
        .map(|m| target_direction_probability(m, grid, radar, j, t_ms))
        .collect();
    if marginals.is_empty() {
        return Ok(0.0);
    }
    inclusion_exclusion_union(&marginals)
}

/// Fits `ln(−ln p) = ln ω − n·ln t` by linear least squares over the given
/// `(t, p)` samples and reports the worst residual in probability space.
///
/// Samples must satisfy `0 < p < 1`; at least two are required.
pub fn fit_parametric_model(samples: &[(f64, f64)]) -> Result<DirectionFit> {
    if samples.len() < 2 {
        return Err(domain(format!(
            "parametric fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    for (t, p) in samples {
        if !(*t > 0.0) || !(*p > 0.0 && *p < 1.0) {
            return Err(domain(format!(
                "fit sample (t={t}, p={p}) outside (0,1) domain"
            )));
        }
    }
    let n = samples.len() as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, p) in samples {
        let x = t.ln();
        let y = (-p.ln()).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-14 * (n * sxx).abs().max(1.0) {
        return Err(domain("fit samples are degenerate (identical times)"));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let exponent = -slope;
    let omega = intercept.exp();

    let mut fit_error: f64 = 0.0;
    for (t, p) in samples {
        let model = (-omega * t.powf(-exponent)).exp();
        fit_error = fit_error.max((model - p).abs());
    }
    Ok(DirectionFit {
        omega,
        exponent,
        fit_error,
    })
}

/// Root of `(1−e^(−γ))·ln(1−e^(−γ)) + n·γ·e^(−γ) = 0`: the exponent of
/// the elementary detection probability when a dwell following the fitted
/// `exp(−ω·t^(−n))` law is optimally split into independent looks.
///
/// For `n = 1` this reduces to the single-target optimum `γ = ln 2`.
pub fn solve_gamma_s(n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(domain(format!("model exponent must be positive, got {n}")));
    }
    let f = |gamma: f64| -> f64 {
        let q = (-gamma).exp();
        let one_m_q = -(-gamma).exp_m1(); // 1 - e^{-gamma}, stable for small gamma
        one_m_q * one_m_q.ln() + n * gamma * q
    };

    // f < 0 for small gamma (it behaves like gamma*(ln gamma + n)) and
    // > 0 once n*gamma*e^{-gamma} dominates the vanishing first term.
    let mut lo = 0.5 * (-n).exp();
    while f(lo) >= 0.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE * 4.0 {
            return Err(domain(format!("failed to bracket gamma_s below for n={n}")));
        }
    }
    let mut hi = lo.max(1.0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(domain(format!("failed to bracket gamma_s above for n={n}")));
        }
    }

    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Time constant of the optimally split direction:
/// `τ_j = −(ω/γ_s)^(1/n) / ln(1 − e^(−γ_s))`.
pub fn direction_time_constant(omega: f64, n: f64, gamma_s: f64) -> f64 {
    let ln_one_minus = (-(-gamma_s).exp()).ln_1p();
    -(omega / gamma_s).powf(1.0 / n) / ln_one_minus
}

/// Optimal elementary-look count for a dwell of `t_ms` under the fitted
/// model: `m = t·(γ_s/ω)^(1/n)`.
pub fn optimal_look_count(t_ms: f64, omega: f64, n: f64, gamma_s: f64) -> f64 {
    if t_ms <= 0.0 {
        return 0.0;
    }
    t_ms * (gamma_s / omega).powf(1.0 / n)
}

/// Builds every observable direction's model and splits the budget across
/// directions with the water-filling solver.
///
/// `weights` carries one priority per direction (length `n_directions`).
/// Directions behind the antenna plane, with negligible prior mass, or
/// undetectable within the horizon are excluded and receive zero time.
pub fn allocate_directions(
    grid: &SurveillanceGrid,
    priors: &[GaussianPrior],
    radar: &RadarModel,
    weights: &[f64],
    horizon_ms: f64,
) -> Result<DirectionAllocation> {
    if weights.len() != grid.n_directions {
        return Err(domain(format!(
            "{} direction weights for {} directions",
            weights.len(),
            grid.n_directions
        )));
    }
    if !(horizon_ms > 0.0) {
        return Err(domain(format!(
            "horizon must be positive, got {horizon_ms}"
        )));
    }
    if priors.is_empty() {
        return Err(Error::NoAllocation("no target priors supplied"));
    }

    let masses: Vec<MassGrid> = priors.iter().map(|p| integrate_prior(p, grid)).collect();
    let nd = grid.n_directions;
    let mut models: Vec<Option<DirectionModel>> = vec![None; nd];

    for (j, slot) in models.iter_mut().enumerate() {
        let theta = direction_off_axis_rad(grid, radar, j);
        if theta.cos() <= 1e-9 {
            continue; // outside the forward half-space
        }
        let mass: f64 = masses.iter().map(|m| m.direction_mass(j)).sum();
        if mass < EMPTY_DIRECTION_MASS {
            continue;
        }

        // Log-spaced dwell samples spanning the water-filling operating
        // range; samples whose probability underflows or saturates are
        // dropped before fitting.
        let t_lo = horizon_ms / 100.0;
        let ratio = (horizon_ms / t_lo).powf(1.0 / (FIT_SAMPLES as f64 - 1.0));
        let mut samples = Vec::with_capacity(FIT_SAMPLES);
        for s in 0..FIT_SAMPLES {
            let t = t_lo * ratio.powi(s as i32);
            let p = union_probability(&masses, grid, radar, j, t)?;
            if p > 1e-290 && p < 1.0 - 1e-12 {
                samples.push((t, p));
            }
        }
        if samples.len() < 2 {
            continue; // undetectable (or saturated) within the horizon
        }

        let fit = fit_parametric_model(&samples)?;
        let gamma_s = solve_gamma_s(fit.exponent)?;
        let tau_ms = direction_time_constant(fit.omega, fit.exponent, gamma_s);
        *slot = Some(DirectionModel {
            direction: j,
            omega: fit.omega,
            exponent: fit.exponent,
            gamma_s,
            tau_ms,
            fit_error: fit.fit_error,
            mass,
        });
    }

    let included: Vec<usize> = models
        .iter()
        .enumerate()
        .filter_map(|(j, m)| m.as_ref().map(|_| j))
        .collect();
    if included.is_empty() {
        return Err(Error::NoAllocation(
            "every direction is empty or unobservable",
        ));
    }

    let taus: Vec<f64> = included
        .iter()
        .map(|j| models[*j].unwrap().tau_ms)
        .collect();
    let w: Vec<f64> = included.iter().map(|j| weights[*j]).collect();
    let problem = AllocationProblem::new(taus, w, horizon_ms)?;
    let sub: Allocation = allocate(&problem)?;

    let mut times = vec![0.0; nd];
    let mut counts = vec![0.0; nd];
    let mut probabilities = vec![0.0; nd];
    let mut active = Vec::new();
    for (pos, j) in included.iter().enumerate() {
        let m = models[*j].unwrap();
        let t = sub.times_ms[pos];
        times[*j] = t;
        counts[*j] = optimal_look_count(t, m.omega, m.exponent, m.gamma_s);
        if t > 0.0 {
            probabilities[*j] = 1.0 - (-t / m.tau_ms).exp();
            active.push(*j);
        }
    }
    let criterion = (0..nd).map(|j| weights[j] * probabilities[j]).sum();

    Ok(DirectionAllocation {
        models,
        times_ms: times,
        counts,
        probabilities,
        lambda: sub.lambda,
        active,
        criterion,
    })
}
