//! TOML run configuration: system selection, constitutive parameters, grid,
//! initial data profiles and solver settings.

use std::path::Path;

use serde::Deserialize;

use crate::constitutive::{PressureLaw, StressLaw};
use crate::error::{RelaxError, Result};
use crate::grid::{Boundary, Grid, GridField};
use crate::systems::{reconstruct_bar, RelaxationSystem};

fn default_mu() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.45
}
fn default_stride() -> usize {
    16
}
fn default_flux() -> String {
    "rusanov".into()
}
fn default_source() -> String {
    "exact".into()
}
fn default_grid_rule() -> String {
    "eps2".into()
}
fn default_cert_cap() -> f64 {
    1e3
}
fn default_boundary() -> String {
    "periodic".into()
}
fn default_profile() -> String {
    "sine".into()
}
fn default_amplitude() -> f64 {
    0.5
}
fn default_mean() -> f64 {
    2.0
}
fn default_width() -> f64 {
    0.1
}
fn default_preparation() -> String {
    "well".into()
}
fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub kind: String,
    #[serde(default = "default_mu")]
    pub mu: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstitutiveSection {
    pub k: Option<f64>,
    pub gamma: Option<f64>,
    pub linear: Option<f64>,
    pub cubic: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub x_min: f64,
    pub x_max: f64,
    #[serde(default = "default_boundary")]
    pub boundary: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_mean")]
    pub mean: f64,
    pub left: Option<f64>,
    pub right: Option<f64>,
    #[serde(default = "default_width")]
    pub width: f64,
    /// "well": relaxation data on the discrete closure; "ill": damped
    /// component set to `momentum` so phi(0) = O(1).
    #[serde(default = "default_preparation")]
    pub preparation: String,
    #[serde(default)]
    pub momentum: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            profile: default_profile(),
            amplitude: default_amplitude(),
            mean: default_mean(),
            left: None,
            right: None,
            width: default_width(),
            preparation: default_preparation(),
            momentum: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub epsilon: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_flux")]
    pub flux: String,
    #[serde(default = "default_source")]
    pub source: String,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    /// Cell-count rule across a sweep: "fixed" keeps grid.n; "eps2" scales
    /// N proportional to (eps0/eps)^2 from the first sweep point; "eps3"
    /// scales cubically, pushing first-order flux viscosity below the
    /// eps^4 signal.
    #[serde(default = "default_grid_rule")]
    pub grid_rule: String,
    /// Certification cap on the entropy-residual constant.
    #[serde(default = "default_cert_cap")]
    pub cert_cap: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub constitutive: ConstitutiveSection,
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| RelaxError::Config(format!("parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        match self.system.kind.as_str() {
            "euler" | "psystem" | "visco" => {}
            other => {
                return Err(RelaxError::Config(format!(
                    "unknown system kind {other:?} (expected euler, psystem or visco)"
                )))
            }
        }
        if self.system.kind == "visco" && !(self.system.mu > 0.0) {
            return Err(RelaxError::Config(format!(
                "visco needs mu > 0, got {}",
                self.system.mu
            )));
        }
        match self.run.flux.as_str() {
            "rusanov" | "hll" => {}
            other => return Err(RelaxError::Config(format!("unknown flux scheme {other:?}"))),
        }
        match self.run.source.as_str() {
            "exact" | "implicit" => {}
            other => {
                return Err(RelaxError::Config(format!(
                    "unknown source scheme {other:?}"
                )))
            }
        }
        match self.run.grid_rule.as_str() {
            "fixed" | "eps2" | "eps3" => {}
            other => return Err(RelaxError::Config(format!("unknown grid rule {other:?}"))),
        }
        if !(self.run.cfl > 0.0 && self.run.cfl <= 1.0) {
            return Err(RelaxError::Config(format!(
                "cfl must lie in (0, 1], got {}",
                self.run.cfl
            )));
        }
        if !(self.run.t_end > 0.0) {
            return Err(RelaxError::Config(format!(
                "t_end must be positive, got {}",
                self.run.t_end
            )));
        }
        if self.run.output_stride == 0 {
            return Err(RelaxError::Config("output_stride must be >= 1".into()));
        }
        if self.run.epsilon.is_none() && self.run.epsilons.is_none() {
            return Err(RelaxError::Config(
                "one of run.epsilon or run.epsilons is required".into(),
            ));
        }
        if let Some(e) = self.run.epsilon {
            if !(e > 0.0) {
                return Err(RelaxError::Config(format!("epsilon must be positive: {e}")));
            }
        }
        if let Some(list) = &self.run.epsilons {
            if list.is_empty() {
                return Err(RelaxError::Config("epsilons list is empty".into()));
            }
            for w in list.windows(2) {
                if !(w[1] < w[0]) {
                    return Err(RelaxError::Config(format!(
                        "epsilons must be strictly decreasing, got {:?}",
                        list
                    )));
                }
            }
            if !(list[list.len() - 1] > 0.0) {
                return Err(RelaxError::Config("epsilons must be positive".into()));
            }
        }
        match self.initial.profile.as_str() {
            "constant" | "sine" | "gauss-bump" => {}
            "two-state" => {
                if self.initial.left.is_none() || self.initial.right.is_none() {
                    return Err(RelaxError::Config(
                        "two-state profile needs initial.left and initial.right".into(),
                    ));
                }
            }
            other => {
                return Err(RelaxError::Config(format!(
                    "unknown initial profile {other:?}"
                )))
            }
        }
        match self.initial.preparation.as_str() {
            "well" | "ill" => {}
            other => {
                return Err(RelaxError::Config(format!(
                    "unknown preparation {other:?} (expected well or ill)"
                )))
            }
        }
        match self.grid.boundary.as_str() {
            "periodic" | "farfield" => {}
            other => {
                return Err(RelaxError::Config(format!(
                    "unknown boundary {other:?} (expected periodic or farfield)"
                )))
            }
        }
        Ok(())
    }

    pub fn build_system(&self) -> Result<RelaxationSystem> {
        match self.system.kind.as_str() {
            "euler" => {
                let k = self.constitutive.k.unwrap_or(1.0);
                let gamma = self.constitutive.gamma.unwrap_or(2.0);
                Ok(RelaxationSystem::euler(PressureLaw::gamma_law(k, gamma)?))
            }
            "psystem" => Ok(RelaxationSystem::psystem(self.stress_law()?)),
            "visco" => RelaxationSystem::visco(self.stress_law()?, self.system.mu),
            _ => unreachable!("validated"),
        }
    }

    fn stress_law(&self) -> Result<StressLaw> {
        let lin = self.constitutive.linear.unwrap_or(1.0);
        let cub = self.constitutive.cubic.unwrap_or(1.0);
        StressLaw::linear_cubic(lin, cub)
    }

    /// Primary limit-profile value at position x (density or strain).
    pub fn profile_value(&self, x: f64) -> f64 {
        let ini = &self.initial;
        let (a, b) = (self.grid.x_min, self.grid.x_max);
        let len = b - a;
        match ini.profile.as_str() {
            "constant" => ini.mean,
            "sine" => {
                ini.mean + ini.amplitude * (2.0 * std::f64::consts::PI * (x - a) / len).sin()
            }
            "gauss-bump" => {
                let c = 0.5 * (a + b);
                let w = ini.width * len;
                ini.mean + ini.amplitude * (-((x - c) / w).powi(2)).exp()
            }
            "two-state" => {
                let l = ini.left.unwrap();
                let r = ini.right.unwrap();
                let c = 0.5 * (a + b);
                l + (r - l) * 0.5 * (1.0 + ((x - c) / ini.width).tanh())
            }
            _ => unreachable!("validated"),
        }
    }

    /// Grid for a run at cell count `n`, including far-field ghost states for
    /// the limit profile.
    pub fn make_limit_grid(&self, n: usize, limit_dim: usize) -> Result<Grid> {
        let boundary = match self.grid.boundary.as_str() {
            "periodic" => Boundary::Periodic,
            _ => {
                let mut left = vec![0.0; limit_dim];
                let mut right = vec![0.0; limit_dim];
                left[0] = self.profile_value(self.grid.x_min);
                right[0] = self.profile_value(self.grid.x_max);
                Boundary::FarField { left, right }
            }
        };
        Grid::new(n, self.grid.x_min, self.grid.x_max, boundary)
    }

    /// Initial limit profile: primary component from the named profile, any
    /// further components (visco velocity) zero.
    pub fn initial_limit_profile(&self, sys: &RelaxationSystem, n: usize) -> Result<GridField> {
        let grid = self.make_limit_grid(n, sys.limit_dim())?;
        let mut field = GridField::zeros(grid, sys.limit_dim());
        let xs = field.grid.centers();
        for (c, &x) in field.components[0].iter_mut().zip(xs.iter()) {
            *c = self.profile_value(x);
        }
        Ok(field)
    }

    /// Initial relaxation data: well-prepared data sit on the discrete closure
    /// (the reconstructed bar state); ill-prepared data overwrite the damped
    /// component with the configured constant.
    pub fn initial_relaxation_state(
        &self,
        sys: &RelaxationSystem,
        n: usize,
        eps: f64,
    ) -> Result<GridField> {
        let profile = self.initial_limit_profile(sys, n)?;
        let mut state = reconstruct_bar(sys, &profile, eps)?;
        if self.initial.preparation == "ill" {
            let idx = sys.damped_index();
            state.components[idx].fill(self.initial.momentum);
        }
        Ok(state)
    }

    /// Cell count for sweep point `i` under the configured grid rule.
    pub fn cells_for(&self, eps_list: &[f64], i: usize) -> usize {
        let ratio = eps_list[0] / eps_list[i];
        let scale = match self.run.grid_rule.as_str() {
            "fixed" => return self.grid.n,
            "eps3" => ratio * ratio * ratio,
            _ => ratio * ratio,
        };
        let n = (self.grid.n as f64 * scale).round() as usize;
        // keep N even so composed-difference sublattices match up
        n + n % 2
    }
}
