//! 1-D cell-centered grids, state fields and centered difference operators.

use crate::error::{RelaxError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    Periodic,
    /// Ghost cells frozen at constant left/right states (one value per component).
    FarField {
        left: Vec<f64>,
        right: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(n: usize, x_min: f64, x_max: f64, boundary: Boundary) -> Result<Self> {
        if n < 16 {
            return Err(RelaxError::Config(format!("grid needs N >= 16 cells, got {n}")));
        }
        if !(x_max > x_min) {
            return Err(RelaxError::Config(format!(
                "grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Grid {
            n,
            x_min,
            x_max,
            boundary,
        })
    }

    pub fn periodic(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Grid::new(n, x_min, x_max, Boundary::Periodic)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    /// Cell center coordinates.
    pub fn centers(&self) -> Vec<f64> {
        let h = self.dx();
        (0..self.n)
            .map(|i| self.x_min + (i as f64 + 0.5) * h)
            .collect()
    }

    /// Ghost values to the left and right of the domain for component `comp`.
    pub fn ghosts(&self, data: &[f64], comp: usize) -> (f64, f64) {
        match &self.boundary {
            Boundary::Periodic => (data[data.len() - 1], data[0]),
            Boundary::FarField { left, right } => (left[comp], right[comp]),
        }
    }

    /// Centered first derivative with explicit ghost values for derived
    /// quantities. Periodic grids wrap and ignore the ghosts.
    pub fn dx_ext(&self, data: &[f64], far_left: f64, far_right: f64) -> Vec<f64> {
        let n = data.len();
        let inv2h = 0.5 / self.dx();
        let (gl, gr) = match &self.boundary {
            Boundary::Periodic => (data[n - 1], data[0]),
            Boundary::FarField { .. } => (far_left, far_right),
        };
        (0..n)
            .map(|i| {
                let l = if i == 0 { gl } else { data[i - 1] };
                let r = if i + 1 == n { gr } else { data[i + 1] };
                (r - l) * inv2h
            })
            .collect()
    }

    /// Second-order centered first derivative of state component `comp`.
    pub fn dx_op(&self, data: &[f64], comp: usize) -> Vec<f64> {
        let (gl, gr) = self.ghosts(data, comp);
        self.dx_ext(data, gl, gr)
    }

    /// Compact centered Laplacian with explicit ghost values.
    pub fn lap_ext(&self, data: &[f64], far_left: f64, far_right: f64) -> Vec<f64> {
        let n = data.len();
        let h = self.dx();
        let invh2 = 1.0 / (h * h);
        let (gl, gr) = match &self.boundary {
            Boundary::Periodic => (data[n - 1], data[0]),
            Boundary::FarField { .. } => (far_left, far_right),
        };
        (0..n)
            .map(|i| {
                let l = if i == 0 { gl } else { data[i - 1] };
                let r = if i + 1 == n { gr } else { data[i + 1] };
                (r - 2.0 * data[i] + l) * invh2
            })
            .collect()
    }

    /// Compact centered Laplacian of state component `comp`.
    pub fn lap_op(&self, data: &[f64], comp: usize) -> Vec<f64> {
        let (gl, gr) = self.ghosts(data, comp);
        self.lap_ext(data, gl, gr)
    }
}

/// Cell averages of the state components at a fixed time.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Grid,
    pub components: Vec<Vec<f64>>,
    pub t: f64,
}

impl GridField {
    pub fn zeros(grid: Grid, dim: usize) -> Self {
        let n = grid.n;
        GridField {
            grid,
            components: vec![vec![0.0; n]; dim],
            t: 0.0,
        }
    }

    pub fn from_profiles(grid: Grid, profiles: &[&dyn Fn(f64) -> f64]) -> Self {
        let xs = grid.centers();
        let components = profiles
            .iter()
            .map(|f| xs.iter().map(|&x| f(x)).collect())
            .collect();
        GridField {
            grid,
            components,
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Midpoint-rule integral of component `comp` over the domain.
    pub fn integral(&self, comp: usize) -> f64 {
        self.components[comp].iter().sum::<f64>() * self.grid.dx()
    }

    pub fn assert_finite(&self) -> Result<()> {
        for (c, data) in self.components.iter().enumerate() {
            if let Some(i) = data.iter().position(|v| !v.is_finite()) {
                return Err(RelaxError::SolverAbort(format!(
                    "non-finite value in component {c}, cell {i}, t = {}",
                    self.t
                )));
            }
        }
        Ok(())
    }
}
