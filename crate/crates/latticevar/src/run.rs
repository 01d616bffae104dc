//! The batch commands, independent of argument parsing.

use latticevar_core::analysis::{boundary_bisect, critical_mu_zero_threshold, fss_fit, binder_from_moments, Bisection, Curve, FssFit};
use latticevar_core::coherent::analytic_phase;
use latticevar_core::ed::{self, observables};
use latticevar_core::gaussian::{binder_dw, gaussian_multistart};
use latticevar_core::{Error, LatticeSpec};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Classifier, Method, Ratios, RunConfig};
use crate::csvio::{self, fmt_f64, TableKind};
use crate::error::{error_code, CliError};
use crate::point::{evaluate, PointResult};

pub const WORKERS_ENV: &str = "LATTICEVAR_WORKERS";

/// Worker count: flag, then config, then `LATTICEVAR_WORKERS`, then the available cores.
pub fn resolve_workers(flag: Option<usize>, config: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = flag.or(config) {
        return if n == 0 { Err(CliError::Config("workers must be at least 1".into())) } else { Ok(n) };
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        };
    }
    Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Seed of grid point `index`: one ChaCha stream per point, so results do not depend on
/// evaluation order.
pub fn point_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Order-preserving parallel map over `0..n` on a pool of `workers` threads.
fn par_map<T: Send>(workers: usize, n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<PointResult, CliError> {
    if !cfg.axes.is_empty() {
        return Err(CliError::Config("solve takes no scan axes".into()));
    }
    Ok(evaluate(cfg, cfg.params, cfg.seed)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub x_name: &'static str,
    pub x: f64,
    pub y_name: &'static str,
    pub y: f64,
    pub result: Result<PointResult, Error>,
}

/// Grid in row order: the first axis varies fastest.
pub fn scan_grid(cfg: &RunConfig) -> Result<Vec<(f64, Option<f64>, Ratios)>, CliError> {
    match cfg.axes.as_slice() {
        [a] => Ok(a.values().into_iter().map(|x| (x, None, cfg.params.with(a.name, x))).collect()),
        [a, b] => {
            let xs = a.values();
            let mut out = Vec::with_capacity(xs.len() * b.steps);
            for y in b.values() {
                for &x in &xs {
                    out.push((x, Some(y), cfg.params.with(a.name, x).with(b.name, y)));
                }
            }
            Ok(out)
        }
        _ => Err(CliError::Config("scan needs one or two axes".into())),
    }
}

pub fn cmd_scan(cfg: &RunConfig, workers: usize) -> Result<Vec<ScanRow>, CliError> {
    let grid = scan_grid(cfg)?;
    let x_name = cfg.axes[0].name.as_str();
    let y_name = cfg.axes.get(1).map_or("none", |a| a.name.as_str());
    par_map(workers, grid.len(), |i| {
        let (x, y, ratios) = grid[i];
        ScanRow { x_name, x, y_name, y: y.unwrap_or(f64::NAN), result: evaluate(cfg, ratios, point_seed(cfg.seed, i)) }
    })
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![r.x_name.to_owned(), fmt_f64(r.x), r.y_name.to_owned(), fmt_f64(r.y)];
            match &r.result {
                Ok(p) => {
                    rec.extend([fmt_f64(p.energy), p.phase.as_str().to_owned()]);
                    rec.extend([p.phi_o, p.phi_e, p.rho_o, p.rho_e].map(fmt_f64));
                    rec.extend([p.converged.to_string(), String::new()]);
                }
                Err(e) => {
                    rec.extend([fmt_f64(f64::NAN), "none".to_owned()]);
                    rec.extend([f64::NAN; 4].map(fmt_f64));
                    rec.extend(["false".to_owned(), error_code(e).to_owned()]);
                }
            }
            rec
        })
        .collect();
    csvio::render(TableKind::Scan, &records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRow {
    pub sweep_name: &'static str,
    pub sweep: f64,
    pub critical_name: &'static str,
    pub result: Result<Bisection, Error>,
}

/// Which side of the boundary a point lies on. The coherent method uses the closed-form
/// lowest stationary point, which the multistart flow reproduces.
fn side(cfg: &RunConfig, classifier: Classifier, ratios: Ratios, seed: u64) -> latticevar_core::Result<bool> {
    let phase = match cfg.method {
        Method::Coherent => analytic_phase(&ratios.params()?),
        _ => evaluate(cfg, ratios, seed)?.phase,
    };
    Ok(match classifier {
        Classifier::Insulating => phase.is_insulating(),
        Classifier::Staggered => matches!(phase, latticevar_core::meanfield::PhaseLabel::DW | latticevar_core::meanfield::PhaseLabel::SS),
    })
}

pub fn cmd_boundary(cfg: &RunConfig, workers: usize) -> Result<Vec<BoundaryRow>, CliError> {
    let b = cfg.boundary.ok_or_else(|| CliError::Config("boundary needs a \"boundary\" block".into()))?;
    let sweep = b.sweep.values();
    par_map(workers, sweep.len(), |i| {
        let base = cfg.params.with(b.sweep.name, sweep[i]);
        let seed = point_seed(cfg.seed, i);
        let result = boundary_bisect(|x| side(cfg, b.classifier, base.with(b.bisect.name, x), seed), b.bisect.min, b.bisect.max, b.tol)
            .map_err(|e| match e {
                // equal labels at both ends: nothing to bisect
                Error::Precondition(_) => Error::NoCrossing,
                other => other,
            });
        BoundaryRow { sweep_name: b.sweep.name.as_str(), sweep: sweep[i], critical_name: b.bisect.name.as_str(), result }
    })
}

pub fn boundary_csv(rows: &[BoundaryRow]) -> String {
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let (crit, iters, err) = match &r.result {
                Ok(b) => (b.value, b.iterations, ""),
                Err(e) => (f64::NAN, 0, error_code(e)),
            };
            vec![
                r.sweep_name.to_owned(),
                fmt_f64(r.sweep),
                r.critical_name.to_owned(),
                fmt_f64(crit),
                iters.to_string(),
                err.to_owned(),
            ]
        })
        .collect();
    csvio::render(TableKind::Boundary, &records)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub mu_inf: f64,
    pub beta: f64,
    pub eta: f64,
    pub rms_residual: f64,
}

impl From<FssFit> for FitSummary {
    fn from(f: FssFit) -> Self {
        FitSummary { mu_inf: f.mu_inf, beta: f.beta, eta: f.eta, rms_residual: f.rms_residual }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FssReport {
    /// (L, μ_c(L)) in the order of the configured sizes.
    pub points: Vec<(usize, f64)>,
    pub fit: FitSummary,
}

/// Binder curve per size → zero-threshold critical point → power-law fit.
/// `binder(L, μ/U)` is evaluated on every grid point, in parallel.
pub fn run_fss_with<F>(sizes: &[usize], mus: &[f64], zero_tol: f64, workers: usize, binder: F) -> Result<FssReport, CliError>
where
    F: Fn(usize, f64) -> latticevar_core::Result<f64> + Sync + Send,
{
    let n = mus.len();
    let values = par_map(workers, sizes.len() * n, |i| binder(sizes[i / n], mus[i % n]))?;
    let mut points = Vec::with_capacity(sizes.len());
    for (k, &l) in sizes.iter().enumerate() {
        let y = values[k * n..(k + 1) * n].iter().cloned().collect::<latticevar_core::Result<Vec<f64>>>()?;
        let curve = Curve::new(mus.to_vec(), y, l)?;
        points.push((l, critical_mu_zero_threshold(&curve, zero_tol)?));
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|&(l, m)| (l as f64, m)).collect();
    let fit = fss_fit(&pairs)?;
    Ok(FssReport { points, fit: fit.into() })
}

/// Binder parameter of the chosen method at size `sites`; a vanishing ⟨φ²⟩ counts as B = 0.
pub fn method_binder(cfg: &RunConfig, sites: usize, mu: f64, seed: u64) -> latticevar_core::Result<f64> {
    let params = cfg.params.with(crate::config::AxisName::Mu, mu).params()?;
    let b = match cfg.method {
        Method::Gaussian => {
            let g = cfg.gaussian();
            let (state, _) = gaussian_multistart(&params, sites, g.starts, seed, &g.flow())?;
            binder_dw(&state)
        }
        Method::Ed => {
            let st = ed::solve(&params, &LatticeSpec::new(sites, cfg.lattice.n_max)?, &cfg.ed().options())?;
            let obs = observables(&st);
            binder_from_moments(obs.phi2, obs.phi4)
        }
        _ => return Err(Error::InvalidParameter("Binder curves need method gaussian or ed")),
    };
    match b {
        Err(Error::Degenerate(_)) => Ok(0.0),
        r => r,
    }
}

pub fn cmd_fss(cfg: &RunConfig, workers: usize) -> Result<FssReport, CliError> {
    let f = cfg.fss.as_ref().ok_or_else(|| CliError::Config("fss needs an \"fss\" block".into()))?;
    // one stream per (L, μ) pair, independent of the evaluation order
    let seed = |l: usize, mu: f64| point_seed(cfg.seed ^ ((l as u64) << 48), mu.to_bits() as usize);
    run_fss_with(&f.sizes, &f.mu.values(), f.zero_tol, workers, |l, mu| method_binder(cfg, l, mu, seed(l, mu)))
}

pub fn fss_csv(report: &FssReport) -> String {
    let records: Vec<Vec<String>> = report.points.iter().map(|&(l, m)| vec![l.to_string(), fmt_f64(m)]).collect();
    csvio::render(TableKind::Fss, &records)
}
