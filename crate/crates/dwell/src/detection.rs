//! Closed-form detection physics for a single electronically steered radar
//! observing a single target.
//!
//! The chain of results implemented here:
//!
//! 1. An echo collected for `t` milliseconds from range `r` at off-axis
//!    angle `θ` has `SNR = α·t·cos²θ / r⁴`.
//! 2. Under a Swerling-1 fluctuating target, one acquisition detects with
//!    probability `P_fa^(1/(1+SNR))`, approximated by `P_fa^(1/SNR)` in the
//!    high-SNR regime.
//! 3. Splitting the observation into `N` independent short looks (one
//!    emission frequency per look) and cumulating them as
//!    `1 − (1 − P_de)^N` is optimal at a count where each look detects
//!    with probability exactly 1/2.
//! 4. At that optimum the cumulative probability collapses to the
//!    exponential form `1 − exp(−t/τ)`, with a time constant `τ`
//!    proportional to `r⁴` and inversely proportional to `α·cos²θ`.
//!
//! Everything is a pure function: no state, safe to call from any thread.
//! Units are fixed crate-wide: kilometres, milliseconds, radians.

use crate::error::{domain, Result};

/// Exponent of the elementary detection probability at the optimal split,
/// `−ln(P_de) = ln 2`.
pub const GAMMA_R: f64 = std::f64::consts::LN_2;

/// Default false-alarm probability used when a scenario does not set one.
/// "One false alarm per second and per resolution cell" has no single
/// numeric reading, so the threshold is an explicit, overridable constant.
pub const DEFAULT_P_FA: f64 = 1e-4;

/// A 2-D position in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x_km: f64,
    pub y_km: f64,
}

impl Point {
    pub fn new(x_km: f64, y_km: f64) -> Self {
        Point { x_km, y_km }
    }

    /// Euclidean distance to another point, in km.
    pub fn distance(&self, other: &Point) -> f64 {
        ((self.x_km - other.x_km).powi(2) + (self.y_km - other.y_km).powi(2)).sqrt()
    }

    /// Bearing of `other` as seen from `self`, in radians in (−π, π].
    pub fn bearing_to(&self, other: &Point) -> f64 {
        (other.y_km - self.y_km).atan2(other.x_km - self.x_km)
    }
}

/// Per-sensor physics constants.
///
/// `alpha_km4_per_ms` is the operational scale constant of the radar
/// equation (it absorbs emitted power, antenna gain and the common target
/// cross-section), chosen so that `α·t/r⁴` is dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarModel {
    pub alpha_km4_per_ms: f64,
    pub p_fa: f64,
    pub position: Point,
    pub boresight_rad: f64,
}

impl RadarModel {
    /// Validates `alpha > 0`, `0 < p_fa < 1` and `boresight ∈ (−π, π]`.
    pub fn new(
        alpha_km4_per_ms: f64,
        p_fa: f64,
        position: Point,
        boresight_rad: f64,
    ) -> Result<Self> {
        if !(alpha_km4_per_ms > 0.0) {
            return Err(domain(format!(
                "alpha must be positive, got {alpha_km4_per_ms}"
            )));
        }
        if !(p_fa > 0.0 && p_fa < 1.0) {
            return Err(domain(format!("p_fa must lie in (0, 1), got {p_fa}")));
        }
        if !(boresight_rad > -std::f64::consts::PI && boresight_rad <= std::f64::consts::PI) {
            return Err(domain(format!(
                "boresight must lie in (-pi, pi], got {boresight_rad}"
            )));
        }
        Ok(RadarModel {
            alpha_km4_per_ms,
            p_fa,
            position,
            boresight_rad,
        })
    }
}

/// Target geometry relative to one radar: range and off-axis angle.
///
/// The off-axis angle is measured against the antenna's mechanical axis and
/// must keep the target in the forward half-space (`cos θ > 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub range_km: f64,
    pub off_axis_rad: f64,
}

impl Geometry {
    pub fn new(range_km: f64, off_axis_rad: f64) -> Result<Self> {
        if !(range_km > 0.0) {
            return Err(domain(format!("range must be positive, got {range_km}")));
        }
        if !(off_axis_rad.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(domain(format!(
                "off-axis angle must satisfy |theta| < pi/2, got {off_axis_rad}"
            )));
        }
        Ok(Geometry {
            range_km,
            off_axis_rad,
        })
    }
}

/// Derived constants of the optimal-split detection law for one
/// radar/target pair: the exponent `γ_r = ln 2` and the time constant
/// `τ_r` of `P_d = 1 − exp(−t/τ_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConstants {
    pub gamma_r: f64,
    pub tau_r_ms: f64,
}

/// Floor/ceil integer-count report around the (real-valued) optimal look
/// count. Informational only: the solvers keep the count real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountRounding {
    pub floor_count: f64,
    pub floor_probability: f64,
    pub ceil_count: f64,
    pub ceil_probability: f64,
}

/// Signal-to-noise ratio of a single echo: `α·t·cos²θ / r⁴`.
///
/// Strictly increasing in the observation time and strictly decreasing in
/// range (fourth-power law).
pub fn snr(radar: &RadarModel, geom: &Geometry, t_obs_ms: f64) -> Result<f64> {
    if !(t_obs_ms > 0.0) {
        return Err(domain(format!(
            "observation time must be positive, got {t_obs_ms}"
        )));
    }
    if !(geom.range_km > 0.0) {
        return Err(domain(format!(
            "range must be positive, got {}",
            geom.range_km
        )));
    }
    let c = geom.off_axis_rad.cos();
    Ok(radar.alpha_km4_per_ms * t_obs_ms * c * c / geom.range_km.powi(4))
}

/// Swerling-1 detection probability of one acquisition: `P_fa^(1/(1+SNR))`.
///
/// Tends to `p_fa` as the SNR vanishes and to 1 as it grows.
pub fn detection_probability(p_fa: f64, snr: f64) -> f64 {
    p_fa.powf(1.0 / (1.0 + snr))
}

/// High-SNR elementary detection probability: `P_fa^(1/SNR)`.
///
/// The approximation is undefined at zero SNR, which is rejected.
pub fn elementary_detection_probability(p_fa: f64, snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(domain(format!(
            "elementary detection needs snr > 0, got {snr}"
        )));
    }
    Ok(p_fa.powf(1.0 / snr))
}

/// Cumulative probability of `n` independent looks, `1 − (1 − p_de)^n`.
///
/// `n` is real-valued; `n = 0` means no look and yields 0 even when
/// `p_de = 1` (empty-product convention).
pub fn cumulative_detection(p_de: f64, n: f64) -> f64 {
    1.0 - (1.0 - p_de).powf(n)
}

/// β, the per-look decay rate of the elementary detection probability:
/// `P_de = exp(−β·N)` with `β = r⁴·ln(1/P_fa) / (α·T·cos²θ)`.
pub fn beta(radar: &RadarModel, geom: &Geometry, t_total_ms: f64) -> Result<f64> {
    if !(t_total_ms > 0.0) {
        return Err(domain(format!(
            "total time must be positive, got {t_total_ms}"
        )));
    }
    let c = geom.off_axis_rad.cos();
    Ok(geom.range_km.powi(4) * (1.0 / radar.p_fa).ln()
        / (radar.alpha_km4_per_ms * t_total_ms * c * c))
}

/// The look count that maximizes the cumulative detection probability over
/// real `N`: `N_opt = γ_r·α·T·cos²θ / (r⁴·ln(1/P_fa))`, i.e. `γ_r/β`.
///
/// At this count each look detects with probability exactly 1/2.
pub fn optimal_detection_count(
    radar: &RadarModel,
    geom: &Geometry,
    t_total_ms: f64,
) -> Result<f64> {
    Ok(GAMMA_R / beta(radar, geom, t_total_ms)?)
}

/// Time constant of the optimally split observation:
/// `τ_r = r⁴·ln(1/P_fa) / (α·cos²θ·(ln 2)²)`.
///
/// Homogeneous of degree 4 in range and degree −1 in α.
pub fn time_constant(radar: &RadarModel, geom: &Geometry) -> f64 {
    let c = geom.off_axis_rad.cos();
    geom.range_km.powi(4) * (1.0 / radar.p_fa).ln()
        / (radar.alpha_km4_per_ms * c * c * (GAMMA_R * GAMMA_R))
}

/// Both derived constants of the optimal-split law in one record.
pub fn detection_constants(radar: &RadarModel, geom: &Geometry) -> DetectionConstants {
    DetectionConstants {
        gamma_r: GAMMA_R,
        tau_r_ms: time_constant(radar, geom),
    }
}

/// Detection probability achieved by the optimal split over `t` ms:
/// `1 − exp(−t/τ)`. Monotone increasing and concave in `t`.
pub fn optimal_probability(t_total_ms: f64, tau_ms: f64) -> f64 {
    1.0 - (-t_total_ms / tau_ms).exp()
}

/// Cumulative probability at the floor and ceiling of the optimal count,
/// for operators who want an integer number of looks.
pub fn count_rounding(
    radar: &RadarModel,
    geom: &Geometry,
    t_total_ms: f64,
) -> Result<CountRounding> {
    let b = beta(radar, geom, t_total_ms)?;
    let n_opt = GAMMA_R / b;
    let lo = n_opt.floor();
    let hi = n_opt.ceil();
    let prob_at = |n: f64| -> f64 {
        if n < 1.0 {
            0.0
        } else {
            cumulative_detection((-b * n).exp(), n)
        }
    };
    Ok(CountRounding {
        floor_count: lo,
        floor_probability: prob_at(lo),
        ceil_count: hi,
        ceil_probability: prob_at(hi),
    })
}
