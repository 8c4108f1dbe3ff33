//! Kuramoto phase dynamics on QL graphs.
//!
//! `dθ_i/dt = ε_i + (K/N) Σ_j |a_ij| sin(θ_j - θ_i)` in the frame rotating
//! with the mean frequency. Edge phases never enter the dynamics; they only
//! meet the oscillator phases through [`phase_transform`].

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::g12;
use crate::graph::BiasedGraph;
use crate::product::{build_product, ProductBasis, ProductSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spectral::eigendecompose;
use crate::state::{density_from_state, ensemble_purity, uniform_mixture};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillatorState {
    pub theta: Vec<f64>,
    /// Offsets from the mean frequency; sums to zero.
    pub epsilon: Vec<f64>,
    pub t: f64,
}

impl OscillatorState {
    /// Rejects mismatched lengths and offsets whose mean exceeds `1e-12`.
    pub fn new(theta: Vec<f64>, epsilon: Vec<f64>) -> Result<Self> {
        if theta.len() != epsilon.len() {
            return Err(Error::InvalidArgument(format!("{} phases but {} frequencies", theta.len(), epsilon.len())));
        }
        let mean = epsilon.iter().sum::<f64>() / epsilon.len().max(1) as f64;
        if mean.abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("frequency offsets have mean {mean:e}, expected 0")));
        }
        Ok(Self { theta, epsilon, t: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Phases reduced to `[0, 2π)`.
    pub fn reduced_phases(&self) -> Vec<f64> {
        self.theta.iter().map(|x| x.rem_euclid(TAU)).collect()
    }
}

/// Subtracts the mean so the offsets describe a rotating frame.
pub fn centered(mut epsilon: Vec<f64>) -> Vec<f64> {
    let mean = epsilon.iter().sum::<f64>() / epsilon.len().max(1) as f64;
    epsilon.iter_mut().for_each(|e| *e -= mean);
    epsilon
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Euler,
    #[default]
    Rk4,
}

/// Magnitude-weighted coupling lists, built once per graph.
#[derive(Debug, Clone)]
pub struct Coupling {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Coupling {
    pub fn new(g: &BiasedGraph) -> Self {
        let neighbors = g.adjacency_lists().into_iter().map(|l| l.into_iter().map(|(j, a)| (j, a.norm())).collect()).collect();
        Self { neighbors }
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    /// Right-hand side of the phase equation.
    pub fn velocity(&self, theta: &[f64], epsilon: &[f64], k: f64) -> Vec<f64> {
        let scale = k / self.n() as f64;
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| epsilon[i] + scale * nb.iter().map(|&(j, a)| a * (theta[j] - theta[i]).sin()).sum::<f64>())
            .collect()
    }

    pub fn step(&self, s: &OscillatorState, k: f64, dt: f64, integrator: Integrator) -> OscillatorState {
        let f = |th: &[f64]| self.velocity(th, &s.epsilon, k);
        let axpy = |a: f64, x: &[f64]| s.theta.iter().zip(x).map(|(t, v)| t + a * v).collect::<Vec<_>>();
        let theta = match integrator {
            Integrator::Euler => axpy(dt, &f(&s.theta)),
            Integrator::Rk4 => {
                let k1 = f(&s.theta);
                let k2 = f(&axpy(dt / 2.0, &k1));
                let k3 = f(&axpy(dt / 2.0, &k2));
                let k4 = f(&axpy(dt, &k3));
                (0..s.len()).map(|i| s.theta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
            }
        };
        OscillatorState { theta, epsilon: s.epsilon.clone(), t: s.t + dt }
    }
}

/// Advances `state` by one step of size `dt`.
pub fn step(state: &OscillatorState, g: &BiasedGraph, k: f64, dt: f64, integrator: Integrator) -> OscillatorState {
    Coupling::new(g).step(state, k, dt, integrator)
}

/// `|(1/N) Σ_j e^{iθ_j}|`.
pub fn order_parameter(theta: &[f64]) -> f64 {
    if theta.is_empty() {
        return 0.0;
    }
    let z: Complex64 = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).sum();
    z.norm() / theta.len() as f64
}

/// `A' = Φ^-1 A Φ` with `Φ = diag(e^{iθ})`, i.e. `a'_ij = a_ij e^{i(θ_j - θ_i)}`.
pub fn phase_transform(g: &BiasedGraph, theta: &[f64]) -> Result<BiasedGraph> {
    if theta.len() != g.n() {
        return Err(Error::InvalidArgument(format!("{} phases for {} vertices", theta.len(), g.n())));
    }
    Ok(g.map_edges(|e| e.value * Complex64::from_polar(1.0, theta[e.v] - theta[e.u])))
}

/// Initial phase distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitPhases {
    /// `θ_i ~ Uniform[0, width)`; `width = 2π` is the uniform distribution.
    UniformPhases {
        #[serde(default = "full_turn")]
        width: f64,
    },
    /// `θ_i ~ Normal(0, width)`.
    Normal { width: f64 },
}

fn full_turn() -> f64 {
    TAU
}

impl Default for InitPhases {
    fn default() -> Self {
        Self::UniformPhases { width: TAU }
    }
}

impl InitPhases {
    fn sample(self, n: usize, rng: &mut impl rand::Rng) -> Result<Vec<f64>> {
        match self {
            Self::UniformPhases { width } if width >= 0.0 => Ok((0..n).map(|_| rng.random::<f64>() * width).collect()),
            Self::Normal { width } if width >= 0.0 => {
                let dist = Normal::new(0.0, width).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok((0..n).map(|_| dist.sample(rng)).collect())
            }
            _ => Err(Error::InvalidArgument("initial phase width must be non-negative".into())),
        }
    }
}

/// Which density matrix the `purity` column reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PurityMode {
    /// Ensemble mixture of the full emergent eigenvectors.
    #[default]
    Raw,
    /// Ensemble mixture of renormalized product-basis effective states.
    Effective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncRunConfig {
    pub graph: ProductSpec,
    #[serde(rename = "K")]
    pub k: f64,
    /// Defaults to `1e-3 N/K` (or `1e-3` when `K = 0`).
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub init: InitPhases,
    /// Spread of the frequency offsets; defaults to `0.1 K/N`.
    #[serde(default)]
    pub sigma_epsilon: Option<f64>,
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub purity: PurityMode,
    /// Draw a fresh graph from `graph` for every realization.
    #[serde(default = "yes")]
    pub vary_graph: bool,
}

fn yes() -> bool {
    true
}

fn default_record_every() -> usize {
    10
}

impl SyncRunConfig {
    pub fn new(graph: ProductSpec, k: f64, t_end: f64, realizations: usize, seed: u64) -> Self {
        Self {
            graph,
            k,
            dt: None,
            t_end,
            integrator: Integrator::Rk4,
            init: InitPhases::default(),
            sigma_epsilon: None,
            realizations,
            seed,
            record_every: default_record_every(),
            purity: PurityMode::Raw,
            vary_graph: true,
        }
    }

    pub fn dt_for(&self, n: usize) -> f64 {
        self.dt.unwrap_or(if self.k > 0.0 { 1e-3 * n as f64 / self.k } else { 1e-3 })
    }

    pub fn sigma_for(&self, n: usize) -> f64 {
        self.sigma_epsilon.unwrap_or(0.1 * self.k / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.k >= 0.0) {
            return bad("K must be non-negative");
        }
        if self.dt.is_some_and(|dt| !(dt > 0.0)) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0) {
            return bad("t_end must be non-negative");
        }
        if self.realizations == 0 || self.record_every == 0 {
            return bad("realizations and record_every must be positive");
        }
        if self.sigma_epsilon.is_some_and(|s| !(s >= 0.0)) {
            return bad("sigma_epsilon must be non-negative");
        }
        Ok(())
    }
}

/// Ensemble time series; one entry per recorded step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncSeries {
    pub t: Vec<f64>,
    /// Ensemble mean of `r(t)`.
    pub order_parameter: Vec<f64>,
    /// Column selected by [`PurityMode`].
    pub purity: Vec<f64>,
    pub purity_raw: Vec<f64>,
    pub purity_effective: Vec<f64>,
    /// Ensemble mean of the top eigenvalue of `A'`.
    pub eigenvalue_top: Vec<f64>,
    /// Largest eigenvalue deviation of `A'` from `A` seen anywhere.
    pub max_spectrum_drift: f64,
}

impl SyncSeries {
    /// CSV `t,order_parameter,purity,eigenvalue_top`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,order_parameter,purity,eigenvalue_top")?;
        for i in 0..self.t.len() {
            let row = [self.t[i], self.order_parameter[i], self.purity[i], self.eigenvalue_top[i]];
            writeln!(w, "{}", row.map(g12).join(","))?;
        }
        Ok(())
    }
}

/// One recorded sample of a single realization.
struct Sample {
    r: f64,
    top: f64,
    vector: DVector<Complex64>,
    effective: Vec<Complex64>,
    drift: f64,
}

fn sample(g: &BiasedGraph, base: &[f64], basis: &ProductBasis, theta: &[f64]) -> Result<Sample> {
    let spec = eigendecompose(&phase_transform(g, theta)?)?;
    let drift = spec.eigenvalues().iter().zip(base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let vector = spec.eigenvector(0);
    let effective = basis.project(&vector)?.normalized()?;
    Ok(Sample { r: order_parameter(theta), top: spec.eigenvalue(0), vector, effective, drift })
}

fn run_realization(cfg: &SyncRunConfig, shared: Option<&BiasedGraph>, seed: u64) -> Result<Vec<Sample>> {
    let owned;
    let g = match shared {
        Some(g) => g,
        None => {
            owned = build_product(&cfg.graph.reseeded(derive_seed(seed, 1)))?;
            &owned
        }
    };
    let basis = ProductBasis::from_graph(g)?;
    let base = eigendecompose(g)?.eigenvalues().to_vec();
    let n = g.n();
    let mut rng = rng_from_seed(derive_seed(seed, 0));
    let theta = cfg.init.sample(n, &mut rng)?;
    let sigma = cfg.sigma_for(n);
    let epsilon = if sigma > 0.0 {
        let dist = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        centered((0..n).map(|_| dist.sample(&mut rng)).collect())
    } else {
        vec![0.0; n]
    };
    let mut state = OscillatorState { theta, epsilon, t: 0.0 };
    let coupling = Coupling::new(g);
    let dt = cfg.dt_for(n);
    let steps = (cfg.t_end / dt).round() as usize;
    let mut out = vec![sample(g, &base, &basis, &state.theta)?];
    for s in 1..=steps {
        let excursion = coupling.velocity(&state.theta, &state.epsilon, cfg.k).iter().fold(0.0f64, |m, v| m.max(v.abs())) * dt;
        if excursion > PI {
            return Err(Error::Unstable { t: state.t, excursion });
        }
        state = coupling.step(&state, cfg.k, dt, cfg.integrator);
        if s % cfg.record_every == 0 || s == steps {
            out.push(sample(g, &base, &basis, &state.theta)?);
        }
    }
    Ok(out)
}

/// Integrates `realizations` independent phase trajectories and records
/// ensemble observables every `record_every` steps.
///
/// With `vary_graph` every realization draws its own product graph from the
/// spec; otherwise all share the graph built from it directly. Raw purity is
/// `tr(ρ²)` of the equal mixture of full emergent eigenvectors, effective
/// purity that of the renormalized product-basis states.
pub fn run_sync_experiment(cfg: &SyncRunConfig) -> Result<SyncSeries> {
    cfg.validate()?;
    let shared = if cfg.vary_graph { None } else { Some(build_product(&cfg.graph)?) };
    let runs = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| run_realization(cfg, shared.as_ref(), derive_seed(cfg.seed, r as u64)))
        .collect::<Result<Vec<_>>>()?;

    let n = match &shared {
        Some(g) => g.n(),
        None => runs[0][0].vector.len(),
    };
    let dt = cfg.dt_for(n);
    let steps = (cfg.t_end / dt).round() as usize;
    let mut t: Vec<f64> = (0..=steps).filter(|s| s % cfg.record_every == 0).map(|s| s as f64 * dt).collect();
    if steps % cfg.record_every != 0 {
        t.push(steps as f64 * dt);
    }
    debug_assert_eq!(t.len(), runs[0].len());

    let rr = cfg.realizations as f64;
    let columns = (0..t.len())
        .into_par_iter()
        .map(|i| {
            let at: Vec<&Sample> = runs.iter().map(|run| &run[i]).collect();
            let vectors: Vec<DVector<Complex64>> = at.iter().map(|s| s.vector.clone()).collect();
            let rhos = at.iter().map(|s| density_from_state(&s.effective)).collect::<Result<Vec<_>>>()?;
            Ok((
                at.iter().map(|s| s.r).sum::<f64>() / rr,
                ensemble_purity(&vectors)?,
                uniform_mixture(&rhos)?.purity(),
                at.iter().map(|s| s.top).sum::<f64>() / rr,
                at.iter().map(|s| s.drift).fold(0.0, f64::max),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let purity_raw: Vec<f64> = columns.iter().map(|c| c.1).collect();
    let purity_effective: Vec<f64> = columns.iter().map(|c| c.2).collect();
    Ok(SyncSeries {
        t,
        order_parameter: columns.iter().map(|c| c.0).collect(),
        purity: match cfg.purity {
            PurityMode::Raw => purity_raw.clone(),
            PurityMode::Effective => purity_effective.clone(),
        },
        purity_raw,
        purity_effective,
        eigenvalue_top: columns.iter().map(|c| c.3).collect(),
        max_spectrum_drift: columns.iter().map(|c| c.4).fold(0.0, f64::max),
    })
}
