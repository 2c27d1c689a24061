//! Radial grids: logarithmic near the origin to resolve r^(+-gamma),
//! uniform further out with the step tied to the oscillation e^(i eps r)
//! and the quadrature accuracy target.

#[derive(Debug, Clone)]
pub struct RadialGrid {
    points: Vec<f64>,
}

impl RadialGrid {
    pub fn from_points(points: Vec<f64>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[1] > w[0]));
        RadialGrid { points }
    }

    /// Log section [r_min, r_switch] at `per_decade` points per decade,
    /// then uniform with step h up to r_max.
    pub fn log_uniform(r_min: f64, r_switch: f64, r_max: f64, per_decade: usize, h: f64) -> Self {
        let mut points = Vec::new();
        let mut r = r_min;
        let factor = 10f64.powf(1.0 / per_decade as f64);
        while r < r_switch {
            points.push(r);
            r *= factor;
        }
        let n = ((r_max - r_switch) / h).ceil() as usize;
        let h = (r_max - r_switch) / n as f64;
        for j in 0..=n {
            points.push(r_switch + j as f64 * h);
        }
        RadialGrid { points }
    }

    pub fn uniform(r_min: f64, r_max: f64, h: f64) -> Self {
        let n = ((r_max - r_min) / h).ceil().max(1.0) as usize;
        let h = (r_max - r_min) / n as f64;
        RadialGrid {
            points: (0..=n).map(|j| r_min + j as f64 * h).collect(),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    /// Index of the first grid point >= r.
    pub fn index_at_or_after(&self, r: f64) -> usize {
        self.points.partition_point(|&p| p < r)
    }
}

/// Grid for the Volterra solvers at one energy: the trapezoid step keeps
/// the cumulative quadrature error of the e^(2 i eps r)-modulated kernel
/// near 1e-7, with at least 25 points per oscillation period.
pub fn solver_grid(epsilon: f64, r_min: f64, r_max: f64) -> RadialGrid {
    let h_acc = 8e-4 / epsilon.max(1.0);
    let h_osc = std::f64::consts::PI / (25.0 * epsilon);
    let h = h_acc.min(h_osc);
    let r_switch = 0.5f64.min(r_max / 2.0);
    RadialGrid::log_uniform(r_min, r_switch, r_max, 120, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_uniform_monotone_and_covering() {
        let g = RadialGrid::log_uniform(1e-6, 0.5, 30.0, 120, 1e-3);
        assert!(g.points().windows(2).all(|w| w[1] > w[0]));
        assert!(g.points()[0] <= 1e-6);
        assert!((g.r_max() - 30.0).abs() < 1e-12);
        let i = g.index_at_or_after(0.5);
        assert!((g.points()[i] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn uniform_exact_endpoints() {
        let g = RadialGrid::uniform(0.0, 10.0, 0.3);
        assert_eq!(g.points()[0], 0.0);
        assert!((g.r_max() - 10.0).abs() < 1e-12);
    }
}
