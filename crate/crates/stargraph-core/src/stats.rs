//! Empirical distributions of matrix elements over the spectrum, and
//! sup-norm comparisons against the analytic limit CDF.

use crate::graph::{sample_lengths, GraphConfig, GraphError, SplitObservable, StarGraph};
use crate::limitdist::CdfTable;
use crate::spectrum::{solve_range, SolverConfig, SpectrumError};
use crate::wavefunction::indicator_element_at;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    Empty,
    Graph(GraphError),
    Spectrum(SpectrumError),
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::Empty => write!(f, "empty sample set"),
            StatsError::Graph(e) => write!(f, "{e}"),
            StatsError::Spectrum(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for StatsError {}

impl From<GraphError> for StatsError {
    fn from(e: GraphError) -> Self {
        StatsError::Graph(e)
    }
}
impl From<SpectrumError> for StatsError {
    fn from(e: SpectrumError) -> Self {
        StatsError::Spectrum(e)
    }
}

/// Sorted sample set with right-continuous ECDF queries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::Empty);
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalDistribution { samples })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `ECDF(x) = #{samples <= x} / N` (right-continuous).
    pub fn ecdf(&self, x: f64) -> f64 {
        let n = self.samples.len();
        let idx = self.samples.partition_point(|&s| s <= x);
        idx as f64 / n as f64
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Matrix-element samples over eigenvalue records.
///
/// `use_leading` selects the sec^2-weighted ratio (the limit law's variable);
/// otherwise the exact matrix element is collected.
pub fn collect_from_records(
    records: &[crate::spectrum::EigenvalueRecord],
    graph: &StarGraph,
    obs: &SplitObservable,
    use_leading: bool,
) -> Result<EmpiricalDistribution, StatsError> {
    obs.check_compatible(graph)?;
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        let me = indicator_element_at(graph, rec.k, rec.k_lo, obs.v);
        out.push(if use_leading { me.leading } else { me.exact });
    }
    EmpiricalDistribution::from_samples(out)
}

/// Solve the first `count` roots and collect their matrix elements.
pub fn collect_matrix_elements(
    graph: &StarGraph,
    obs: &SplitObservable,
    count: usize,
    use_leading: bool,
    cfg: &SolverConfig,
) -> Result<EmpiricalDistribution, StatsError> {
    let records = solve_range(graph, 1, count, cfg)?;
    collect_from_records(&records, graph, obs, use_leading)
}

/// Kolmogorov-Smirnov-style sup distance between an ECDF and a CDF table,
/// evaluated on both sides of every sample step and at every grid point.
pub fn sup_distance(emp: &EmpiricalDistribution, cdf: &CdfTable) -> f64 {
    sup_distance_fn(emp, &cdf.rs, |r| cdf.eval(r))
}

/// As [`sup_distance`] but against an arbitrary CDF; `extra_points` are
/// grid points checked in addition to the sample steps (pass discontinuity
/// abscissae when comparing against a step CDF).
pub fn sup_distance_fn<F: Fn(f64) -> f64>(
    emp: &EmpiricalDistribution,
    extra_points: &[f64],
    cdf: F,
) -> f64 {
    let n = emp.len() as f64;
    let mut sup = 0.0_f64;
    for (i, &x) in emp.samples().iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - f).abs());
    }
    for &r in extra_points {
        sup = sup.max((emp.ecdf(r) - cdf(r)).abs());
        // Left limit of the reference at jump points.
        sup = sup.max((emp.ecdf(r - 1e-12) - cdf(r - 1e-12)).abs());
    }
    sup
}

/// One convergence-study point: fresh lengths, spectrum, ECDF, sup distance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub v: usize,
    pub d_v: f64,
    pub count: usize,
    pub seed: u64,
}

/// Report of sup distances `D_v = sup_R |ECDF_v(R) - F(R)|` over a list of
/// graph sizes at fixed `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub alpha: u32,
    pub entries: Vec<ConvergenceEntry>,
}

/// Ensemble recipe for the convergence study: lengths uniform in
/// `[l_bar, l_bar (1 + spread_c / v^2)]`, so `v * delta_l -> 0`.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleRecipe {
    pub l_bar: f64,
    pub spread_c: f64,
    pub l_min: f64,
}

impl Default for EnsembleRecipe {
    fn default() -> Self {
        EnsembleRecipe { l_bar: 1.0, spread_c: 8.0, l_min: 0.5 }
    }
}

impl EnsembleRecipe {
    pub fn delta_l(&self, v: usize) -> f64 {
        self.l_bar * self.spread_c / (v as f64 * v as f64)
    }

    pub fn build_graph(&self, v: usize, alpha: u32, seed: u64) -> Result<StarGraph, GraphError> {
        let lengths = sample_lengths(v, alpha as usize, self.l_bar, self.delta_l(v), seed)?;
        let cfg = GraphConfig { l_min: self.l_min, ..Default::default() };
        StarGraph::with_config(lengths, &cfg)
    }
}

/// `D_v` for one `v` (serial; the CLI fans these out per `v`).
pub fn convergence_point(
    v: usize,
    alpha: u32,
    recipe: &EnsembleRecipe,
    seed: u64,
    count: usize,
    cdf: &CdfTable,
    cfg: &SolverConfig,
) -> Result<ConvergenceEntry, StatsError> {
    let graph = recipe.build_graph(v, alpha, seed)?;
    let obs = SplitObservable::new(v, alpha as usize)?;
    let emp = collect_matrix_elements(&graph, &obs, count, true, cfg)?;
    Ok(ConvergenceEntry { v, d_v: sup_distance(&emp, cdf), count, seed })
}

/// Full study over a `v` list (one seed per entry, rotated from `seed0`).
pub fn convergence_study(
    v_list: &[usize],
    alpha: u32,
    recipe: &EnsembleRecipe,
    seed0: u64,
    count: usize,
    cdf: &CdfTable,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport, StatsError> {
    if v_list.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut entries = Vec::with_capacity(v_list.len());
    for (i, &v) in v_list.iter().enumerate() {
        entries.push(convergence_point(v, alpha, recipe, seed0 + i as u64, count, cdf, cfg)?);
    }
    Ok(ConvergenceReport { alpha, entries })
}
