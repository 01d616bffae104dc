//! JSON run configuration. Physical inputs are ratios to U; U = 1 internally.

use std::path::{Path, PathBuf};

use latticevar_core::coherent::{FlowOptions, DEFAULT_STARTS};
use latticevar_core::ed::EdOptions;
use latticevar_core::gaussian::{GaussianFlowOptions, DEFAULT_GAUSSIAN_STARTS};
use latticevar_core::meanfield::{ScfOptions, DEFAULT_CLASSIFY_TOL, DEFAULT_N_MAX, DEFAULT_RANDOM_STARTS};
use latticevar_core::{LatticeSpec, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ed,
    Mf,
    Coherent,
    Gaussian,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ed => "ed",
            Method::Mf => "mf",
            Method::Coherent => "coherent",
            Method::Gaussian => "gaussian",
        }
    }
}

/// One of the four dimensionless couplings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Mu,
    TwoJ,
    TwoV,
    Eps,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Mu => "mu",
            AxisName::TwoJ => "two_j",
            AxisName::TwoV => "two_v",
            AxisName::Eps => "eps",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mu" => Some(AxisName::Mu),
            "two_j" => Some(AxisName::TwoJ),
            "two_v" => Some(AxisName::TwoV),
            "eps" => Some(AxisName::Eps),
            _ => None,
        }
    }
}

/// μ/U, 2J/U, 2V/U, ε/U.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ratios {
    pub mu: f64,
    pub two_j: f64,
    pub two_v: f64,
    #[serde(default)]
    pub eps: f64,
}

impl Ratios {
    pub fn params(&self) -> latticevar_core::Result<ModelParams> {
        ModelParams::from_ratios(self.mu, self.two_j, self.two_v, self.eps)
    }

    pub fn get(&self, name: AxisName) -> f64 {
        match name {
            AxisName::Mu => self.mu,
            AxisName::TwoJ => self.two_j,
            AxisName::TwoV => self.two_v,
            AxisName::Eps => self.eps,
        }
    }

    pub fn with(mut self, name: AxisName, value: f64) -> Self {
        match name {
            AxisName::Mu => self.mu = value,
            AxisName::TwoJ => self.two_j = value,
            AxisName::TwoV => self.two_v = value,
            AxisName::Eps => self.eps = value,
        }
        self
    }
}

/// Evenly spaced values `min..=max`. A single-point axis needs `min == max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| if k + 1 == self.steps { self.max } else { self.min + h * k as f64 })
            .collect()
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(format!("axis {} has non-finite bounds", self.name.as_str()));
        }
        let ok = (self.steps >= 2 && self.min < self.max) || (self.steps == 1 && self.min == self.max);
        if !ok {
            return Err(format!(
                "axis {} needs min < max and steps >= 2 (or steps = 1 with min = max)",
                self.name.as_str()
            ));
        }
        Ok(())
    }
}

/// Bisection interval of a boundary trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub sites: usize,
    pub n_max: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { sites: 4, n_max: 3 }
    }
}

impl LatticeConfig {
    pub fn spec(&self) -> latticevar_core::Result<LatticeSpec> {
        LatticeSpec::new(self.sites, self.n_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MfConfig {
    pub n_max: usize,
    pub random_starts: usize,
    pub mixing: f64,
    pub tol_energy: f64,
    pub tol_params: f64,
    pub max_iterations: usize,
    pub anderson_depth: usize,
    pub tol_phi: f64,
    pub tol_rho: f64,
}

impl Default for MfConfig {
    fn default() -> Self {
        let s = ScfOptions::default();
        MfConfig {
            n_max: DEFAULT_N_MAX,
            random_starts: DEFAULT_RANDOM_STARTS,
            mixing: s.mixing,
            tol_energy: s.tol_energy,
            tol_params: s.tol_params,
            max_iterations: s.max_iterations,
            anderson_depth: s.anderson_depth,
            tol_phi: DEFAULT_CLASSIFY_TOL,
            tol_rho: DEFAULT_CLASSIFY_TOL,
        }
    }
}

impl MfConfig {
    pub fn scf(&self) -> ScfOptions {
        ScfOptions {
            mixing: self.mixing,
            tol_energy: self.tol_energy,
            tol_params: self.tol_params,
            max_iterations: self.max_iterations,
            anderson_depth: self.anderson_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdConfig {
    /// Raise n_max from 2 until the energy changes by less than `truncation_tol`.
    pub converge_truncation: bool,
    pub truncation_tol: f64,
    pub tol: f64,
    pub dense_threshold: usize,
    /// Correlation-ratio threshold above which long-range order is reported.
    pub ratio_threshold: f64,
}

impl Default for EdConfig {
    fn default() -> Self {
        let o = EdOptions::default();
        EdConfig {
            converge_truncation: false,
            truncation_tol: 1e-8,
            tol: o.tol,
            dense_threshold: o.dense_threshold,
            ratio_threshold: 0.5,
        }
    }
}

impl EdConfig {
    pub fn options(&self) -> EdOptions {
        EdOptions { tol: self.tol, dense_threshold: self.dense_threshold, ..EdOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherentConfig {
    pub starts: usize,
    pub step: f64,
    pub grad_tol: f64,
    pub max_steps: usize,
    pub tol_phi: f64,
    pub tol_rho: f64,
}

impl Default for CoherentConfig {
    fn default() -> Self {
        let f = FlowOptions::default();
        CoherentConfig {
            starts: DEFAULT_STARTS,
            step: f.step,
            grad_tol: f.grad_tol,
            max_steps: f.max_steps,
            tol_phi: DEFAULT_CLASSIFY_TOL,
            tol_rho: DEFAULT_CLASSIFY_TOL,
        }
    }
}

impl CoherentConfig {
    pub fn flow(&self) -> FlowOptions {
        FlowOptions { step: self.step, grad_tol: self.grad_tol, max_steps: self.max_steps, record_trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussianConfig {
    pub starts: usize,
    pub step: f64,
    pub grad_tol: f64,
    pub max_steps: usize,
    pub purity_tol: f64,
    pub tol_phi: f64,
    pub tol_rho: f64,
}

impl Default for GaussianConfig {
    fn default() -> Self {
        let g = GaussianFlowOptions::default();
        GaussianConfig {
            starts: DEFAULT_GAUSSIAN_STARTS,
            step: g.flow.step,
            grad_tol: g.flow.grad_tol,
            max_steps: g.flow.max_steps,
            purity_tol: g.purity_tol,
            tol_phi: DEFAULT_CLASSIFY_TOL,
            tol_rho: DEFAULT_CLASSIFY_TOL,
        }
    }
}

impl GaussianConfig {
    pub fn flow(&self) -> GaussianFlowOptions {
        GaussianFlowOptions {
            flow: FlowOptions { step: self.step, grad_tol: self.grad_tol, max_steps: self.max_steps, record_trace: false },
            purity_tol: self.purity_tol,
        }
    }
}

/// Which side of a boundary a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    /// MI or DW versus SF or SS.
    Insulating,
    /// DW or SS (ρ_o ≠ ρ_e) versus MI or SF.
    Staggered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub bisect: Range,
    pub sweep: Axis,
    pub classifier: Classifier,
    #[serde(default = "default_bisect_tol")]
    pub tol: f64,
}

fn default_bisect_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FssConfig {
    pub sizes: Vec<usize>,
    /// μ/U grid on which each Binder curve is sampled.
    pub mu: MuGrid,
    #[serde(default = "default_zero_tol")]
    pub zero_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl MuGrid {
    pub fn values(&self) -> Vec<f64> {
        Axis { name: AxisName::Mu, min: self.min, max: self.max, steps: self.steps }.values()
    }
}

fn default_zero_tol() -> f64 {
    latticevar_core::analysis::DEFAULT_ZERO_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub params: Ratios,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub mf: Option<MfConfig>,
    #[serde(default)]
    pub ed: Option<EdConfig>,
    #[serde(default)]
    pub coherent: Option<CoherentConfig>,
    #[serde(default)]
    pub gaussian: Option<GaussianConfig>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
    #[serde(default)]
    pub fss: Option<FssConfig>,
}

impl RunConfig {
    /// Parse and validate. Syntax errors carry the line number.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let msg = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
            CliError::Config(format!("line {}, column {}: {msg}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let block_present = match self.method {
            Method::Ed => self.ed.is_some(),
            Method::Mf => self.mf.is_some(),
            Method::Coherent => self.coherent.is_some(),
            Method::Gaussian => self.gaussian.is_some(),
        };
        if !block_present {
            return bad(format!("method {0} needs a \"{0}\" options block", self.method.as_str()));
        }
        if self.axes.len() > 2 {
            return bad("at most two scan axes".into());
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return bad("scan axes must differ".into());
        }
        for a in &self.axes {
            a.validate().map_err(CliError::Config)?;
        }
        if let Err(e) = self.params.params() {
            return bad(format!("params: {e}"));
        }
        for a in &self.axes {
            for x in [a.min, a.max] {
                if let Err(e) = self.params.with(a.name, x).params() {
                    return bad(format!("axis {}: {e}", a.name.as_str()));
                }
            }
        }
        if self.method != Method::Mf {
            if let Err(e) = self.lattice.spec() {
                return bad(format!("lattice: {e}"));
            }
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some(b) = &self.boundary {
            b.sweep.validate().map_err(CliError::Config)?;
            if b.sweep.name == b.bisect.name {
                return bad("boundary sweep and bisection axes must differ".into());
            }
            if !(b.bisect.min < b.bisect.max) || !(b.tol > 0.0) {
                return bad("boundary bisection needs min < max and tol > 0".into());
            }
        }
        if let Some(f) = &self.fss {
            if !matches!(self.method, Method::Gaussian | Method::Ed) {
                return bad("fss needs method gaussian or ed".into());
            }
            if f.sizes.is_empty() || f.sizes.iter().any(|&l| l < 4 || l % 2 != 0) {
                return bad("fss sizes must be even and >= 4".into());
            }
            if !(f.mu.steps >= 4 && f.mu.min < f.mu.max) {
                return bad("fss mu grid needs min < max and steps >= 4".into());
            }
        }
        Ok(())
    }

    pub fn mf(&self) -> MfConfig {
        self.mf.unwrap_or_default()
    }

    pub fn ed(&self) -> EdConfig {
        self.ed.unwrap_or_default()
    }

    pub fn coherent(&self) -> CoherentConfig {
        self.coherent.unwrap_or_default()
    }

    pub fn gaussian(&self) -> GaussianConfig {
        self.gaussian.unwrap_or_default()
    }
}
