//! Polar discretization of the surveillance space and integration of
//! Gaussian position priors into per-cell occupancy masses.

use crate::detection::Point;
use crate::error::{domain, Result};

/// The surveillance space around one radar, sampled into `n_range` uniform
/// range rings crossed with `n_directions` uniform angular sectors.
///
/// Ring index `i` and direction index `j` are zero-based throughout the
/// crate; reports may present one-based direction numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveillanceGrid {
    pub origin: Point,
    pub r_min_km: f64,
    pub r_max_km: f64,
    pub n_range: usize,
    pub n_directions: usize,
    pub sector_start_rad: f64,
    pub sector_end_rad: f64,
}

impl SurveillanceGrid {
    pub fn new(
        origin: Point,
        r_min_km: f64,
        r_max_km: f64,
        n_range: usize,
        n_directions: usize,
        sector_start_rad: f64,
        sector_end_rad: f64,
    ) -> Result<Self> {
        if !(r_min_km > 0.0 && r_max_km > r_min_km) {
            return Err(domain(format!(
                "need 0 < r_min < r_max, got r_min={r_min_km}, r_max={r_max_km}"
            )));
        }
        if n_range == 0 || n_directions == 0 {
            return Err(domain("grid needs at least one ring and one direction"));
        }
        if !(sector_end_rad > sector_start_rad) {
            return Err(domain(format!(
                "sector end {sector_end_rad} must exceed sector start {sector_start_rad}"
            )));
        }
        if sector_end_rad - sector_start_rad > 2.0 * std::f64::consts::PI + 1e-12 {
            return Err(domain("sector spans more than a full circle"));
        }
        Ok(SurveillanceGrid {
            origin,
            r_min_km,
            r_max_km,
            n_range,
            n_directions,
            sector_start_rad,
            sector_end_rad,
        })
    }

    pub fn ring_step_km(&self) -> f64 {
        (self.r_max_km - self.r_min_km) / self.n_range as f64
    }

    pub fn direction_step_rad(&self) -> f64 {
        (self.sector_end_rad - self.sector_start_rad) / self.n_directions as f64
    }

    /// Centre range of ring `i`.
    pub fn ring_center_km(&self, i: usize) -> f64 {
        self.r_min_km + (i as f64 + 0.5) * self.ring_step_km()
    }

    /// Centre bearing of direction `j`, in the world frame.
    pub fn direction_center_rad(&self, j: usize) -> f64 {
        self.sector_start_rad + (j as f64 + 0.5) * self.direction_step_rad()
    }

    /// Inner/outer range bounds of ring `i`.
    pub fn ring_bounds_km(&self, i: usize) -> (f64, f64) {
        let step = self.ring_step_km();
        (
            self.r_min_km + i as f64 * step,
            self.r_min_km + (i + 1) as f64 * step,
        )
    }

    /// Bearing bounds of direction `j`.
    pub fn direction_bounds_rad(&self, j: usize) -> (f64, f64) {
        let step = self.direction_step_rad();
        (
            self.sector_start_rad + j as f64 * step,
            self.sector_start_rad + (j + 1) as f64 * step,
        )
    }
}

/// A 2-D Gaussian position prior for one target, axis-aligned in the world
/// frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPrior {
    pub mean: Point,
    pub std_x_km: f64,
    pub std_y_km: f64,
}

impl GaussianPrior {
    pub fn new(mean: Point, std_x_km: f64, std_y_km: f64) -> Result<Self> {
        if !(std_x_km > 0.0 && std_y_km > 0.0) {
            return Err(domain(format!(
                "standard deviations must be positive, got ({std_x_km}, {std_y_km})"
            )));
        }
        Ok(GaussianPrior {
            mean,
            std_x_km,
            std_y_km,
        })
    }

    /// Isotropic prior with one standard deviation on both axes.
    pub fn isotropic(mean: Point, std_km: f64) -> Result<Self> {
        GaussianPrior::new(mean, std_km, std_km)
    }

    pub fn density(&self, p: Point) -> f64 {
        let dx = (p.x_km - self.mean.x_km) / self.std_x_km;
        let dy = (p.y_km - self.mean.y_km) / self.std_y_km;
        (-0.5 * (dx * dx + dy * dy)).exp()
            / (2.0 * std::f64::consts::PI * self.std_x_km * self.std_y_km)
    }
}

/// Per-cell occupancy mass of one target on a grid: `mass(i, j)` is the
/// prior probability that the target sits in ring `i`, direction `j`.
/// Masses sum to at most 1; the remainder leaks outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MassGrid {
    n_range: usize,
    n_directions: usize,
    data: Vec<f64>,
}

impl MassGrid {
    pub fn zeros(n_range: usize, n_directions: usize) -> Self {
        MassGrid {
            n_range,
            n_directions,
            data: vec![0.0; n_range * n_directions],
        }
    }

    pub fn at(&self, ring: usize, direction: usize) -> f64 {
        self.data[ring * self.n_directions + direction]
    }

    pub fn set(&mut self, ring: usize, direction: usize, value: f64) {
        self.data[ring * self.n_directions + direction] = value;
    }

    /// Total mass captured by the grid.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Mass of one direction, summed over rings.
    pub fn direction_mass(&self, direction: usize) -> f64 {
        (0..self.n_range).map(|i| self.at(i, direction)).sum()
    }

    pub fn n_range(&self) -> usize {
        self.n_range
    }

    pub fn n_directions(&self) -> usize {
        self.n_directions
    }
}

/// Integrates a Gaussian prior over every cell of the grid by a midpoint
/// rule in polar coordinates.
///
/// The base rule uses 4x4 sub-samples per cell; cells near the prior mean
/// are refined until the sub-sample spacing is at most half the smaller
/// standard deviation, which keeps sharply concentrated priors (std well
/// below the cell size) exact instead of aliased. Mass falling outside the
/// grid is silently dropped.
pub fn integrate_prior(prior: &GaussianPrior, grid: &SurveillanceGrid) -> MassGrid {
    let mut mass = MassGrid::zeros(grid.n_range, grid.n_directions);
    let sigma_min = prior.std_x_km.min(prior.std_y_km);
    let sigma_max = prior.std_x_km.max(prior.std_y_km);
    let target_spacing = 0.5 * sigma_min;
    let dphi = grid.direction_step_rad();
    let dr = grid.ring_step_km();

    for i in 0..grid.n_range {
        let (r_lo, _) = grid.ring_bounds_km(i);
        let r_c = grid.ring_center_km(i);
        for j in 0..grid.n_directions {
            let (phi_lo, _) = grid.direction_bounds_rad(j);
            let phi_c = grid.direction_center_rad(j);

            // Refine only where the prior can put meaningful mass.
            let center = Point::new(
                grid.origin.x_km + r_c * phi_c.cos(),
                grid.origin.y_km + r_c * phi_c.sin(),
            );
            let arc = r_c * dphi;
            let half_diag = 0.5 * (dr * dr + arc * arc).sqrt();
            let near = center.distance(&prior.mean) <= half_diag + 8.0 * sigma_max;

            let (n_r, n_phi) = if near {
                (
                    ((dr / target_spacing).ceil() as usize).clamp(4, 400),
                    ((arc / target_spacing).ceil() as usize).clamp(4, 400),
                )
            } else {
                (4, 4)
            };

            let sub_r = dr / n_r as f64;
            let sub_phi = dphi / n_phi as f64;
            let mut acc = 0.0;
            for a in 0..n_r {
                let r = r_lo + (a as f64 + 0.5) * sub_r;
                for b in 0..n_phi {
                    let phi = phi_lo + (b as f64 + 0.5) * sub_phi;
                    let p = Point::new(
                        grid.origin.x_km + r * phi.cos(),
                        grid.origin.y_km + r * phi.sin(),
                    );
                    acc += prior.density(p) * r;
                }
            }
            mass.set(i, j, acc * sub_r * sub_phi);
        }
    }
    mass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter_grid() -> SurveillanceGrid {
        SurveillanceGrid::new(
            Point::default(),
            10.0,
            110.0,
            40,
            20,
            0.0,
            std::f64::consts::FRAC_PI_2,
        )
        .unwrap()
    }

    #[test]
    fn single_cell_grid_covers_the_sector() {
        let g = SurveillanceGrid::new(Point::default(), 1.0, 2.0, 1, 1, 0.0, 1.0).unwrap();
        assert_eq!(g.ring_bounds_km(0), (1.0, 2.0));
        assert_eq!(g.direction_bounds_rad(0), (0.0, 1.0));
        assert!((g.ring_center_km(0) - 1.5).abs() < 1e-15);
        assert!((g.direction_center_rad(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn forty_directions_tile_the_sector() {
        let g = SurveillanceGrid::new(Point::default(), 5.0, 50.0, 10, 40, -0.02, 1.55).unwrap();
        let step = g.direction_step_rad();
        assert!((step - (1.55 + 0.02) / 40.0).abs() < 1e-15);
        let (lo, _) = g.direction_bounds_rad(0);
        let (_, hi) = g.direction_bounds_rad(39);
        assert!((lo - -0.02).abs() < 1e-15);
        assert!((hi - 1.55).abs() < 1e-12);
    }

    #[test]
    fn ring_centers_increase() {
        let g = quarter_grid();
        for i in 1..g.n_range {
            assert!(g.ring_center_km(i) > g.ring_center_km(i - 1));
        }
    }

    #[test]
    fn grid_rejects_bad_bounds() {
        let o = Point::default();
        assert!(SurveillanceGrid::new(o, 0.0, 10.0, 4, 4, 0.0, 1.0).is_err());
        assert!(SurveillanceGrid::new(o, 10.0, 5.0, 4, 4, 0.0, 1.0).is_err());
        assert!(SurveillanceGrid::new(o, 1.0, 5.0, 0, 4, 0.0, 1.0).is_err());
        assert!(SurveillanceGrid::new(o, 1.0, 5.0, 4, 4, 1.0, 0.5).is_err());
        assert!(SurveillanceGrid::new(o, 1.0, 5.0, 4, 4, 0.0, 7.0).is_err());
    }

    #[test]
    fn concentrated_prior_lands_in_one_cell() {
        let g = quarter_grid();
        // Centre of ring 12, direction 7, far from all cell boundaries.
        let r = g.ring_center_km(12);
        let phi = g.direction_center_rad(7);
        let prior =
            GaussianPrior::isotropic(Point::new(r * phi.cos(), r * phi.sin()), 0.1).unwrap();
        let mass = integrate_prior(&prior, &g);
        assert!(mass.at(12, 7) > 0.999, "got {}", mass.at(12, 7));
        assert!((mass.total() - 1.0).abs() < 1e-6);
        for i in 0..g.n_range {
            for j in 0..g.n_directions {
                if (i, j) != (12, 7) {
                    assert!(mass.at(i, j) < 1e-3);
                }
            }
        }
    }

    #[test]
    fn straddling_prior_splits_evenly() {
        let g = quarter_grid();
        // Mean exactly on the bearing boundary between directions 7 and 8,
        // isotropic: reflection symmetry forces equal masses.
        let r = g.ring_center_km(12);
        let (_, phi_boundary) = g.direction_bounds_rad(7);
        let prior = GaussianPrior::isotropic(
            Point::new(r * phi_boundary.cos(), r * phi_boundary.sin()),
            0.4,
        )
        .unwrap();
        let mass = integrate_prior(&prior, &g);
        let left = mass.direction_mass(7);
        let right = mass.direction_mass(8);
        assert!(left > 0.4);
        assert!((left - right).abs() < 1e-6, "left {left}, right {right}");
    }

    #[test]
    fn captured_mass_matches_high_resolution_oracle() {
        let g = quarter_grid();
        let prior = GaussianPrior::new(Point::new(30.0, 42.0), 1.0, 1.3).unwrap();
        let mass = integrate_prior(&prior, &g);

        // A prior this far inside the grid loses only invisible tail mass.
        assert!((mass.total() - 1.0).abs() < 1e-9, "total {}", mass.total());

        // Fixed fine-resolution midpoint oracle, 10x the adaptive target
        // spacing, over the cells around the mean.
        for i in 26..34 {
            for j in 9..14 {
                let (r_lo, r_hi) = g.ring_bounds_km(i);
                let (phi_lo, phi_hi) = g.direction_bounds_rad(j);
                let n = 200usize;
                let dr = (r_hi - r_lo) / n as f64;
                let dphi = (phi_hi - phi_lo) / n as f64;
                let mut acc = 0.0;
                for a in 0..n {
                    let r = r_lo + (a as f64 + 0.5) * dr;
                    for b in 0..n {
                        let phi = phi_lo + (b as f64 + 0.5) * dphi;
                        acc += prior.density(Point::new(r * phi.cos(), r * phi.sin())) * r;
                    }
                }
                acc *= dr * dphi;
                assert!(
                    (acc - mass.at(i, j)).abs() < 1e-9,
                    "cell ({i},{j}): oracle {acc}, got {}",
                    mass.at(i, j)
                );
            }
        }
    }

    #[test]
    fn off_grid_mass_leaks() {
        let g = quarter_grid();
        // Mean beyond r_max: nearly everything falls outside.
        let prior = GaussianPrior::isotropic(Point::new(200.0, 10.0), 0.5).unwrap();
        let mass = integrate_prior(&prior, &g);
        assert!(mass.total() < 1e-6);
    }
}
