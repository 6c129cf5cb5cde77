//! Subcommand orchestration: load inputs, fan work across the pool, write
//! outputs atomically.

use crate::config::{cfg_err, parse_budget, parse_grid, parse_list, Cli, Command, GraphSpec, RunConfig};
use crate::csvio;
use crate::figures::{svg_chart, thin_ecdf, Series, SeriesKind, PALETTE};
use rayon::prelude::*;
use serde::Serialize;
use stargraph_core::graph::{sample_lengths, GraphConfig, SplitObservable, StarGraph};
use stargraph_core::limitdist::{limit_cdf, qe_step_cdf, CdfTable, LimitParams};
use stargraph_core::scars::scar_sequence;
use stargraph_core::spectrum::{solve_range, EigenvalueRecord, SolverConfig};
use stargraph_core::stats::{collect_from_records, sup_distance, EmpiricalDistribution, EnsembleRecipe};
use stargraph_core::wavefunction::{indicator_element_at, IndicatorElement};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let rc = cli.resolve()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(rc.threads)
        .build_global()
        .ok(); // already built in tests; the pool size is best-effort
    match &cli.cmd {
        Command::Spectrum { graph, count, out } => run_spectrum(&rc, graph, *count, out),
        Command::MatrixElements { graph, v, alpha, count, out } => {
            run_matrix_elements(&rc, graph, *v, *alpha, *count, out)
        }
        Command::LimitCdf { alpha, r_grid, cutoff, out } => {
            run_limit_cdf(&rc, *alpha, r_grid, *cutoff, out)
        }
        Command::Compare { graph, v, alpha, count, cdf, out, exact } => {
            run_compare(&rc, graph, *v, *alpha, *count, cdf, out, *exact)
        }
        Command::Scars { graph, bonds, eps, budget, out } => {
            run_scars(&rc, graph, bonds, eps, budget, out)
        }
        Command::Figures { id, alpha, v, v_list, count, l_bar, spread_c } => {
            run_figures(&rc, id, *alpha, *v, v_list.as_deref(), *count, *l_bar, *spread_c)
        }
    }
}

fn load_graph(path: &Path) -> anyhow::Result<StarGraph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::config::ConfigError(format!("cannot read graph {path:?}: {e}")))?;
    let spec: GraphSpec = serde_json::from_str(&text)
        .map_err(|e| crate::config::ConfigError(format!("bad graph spec {path:?}: {e}")))?;
    let (lengths, l_min) = match spec {
        GraphSpec::Lengths { lengths, l_min } => (lengths, l_min),
        GraphSpec::Ensemble { v, alpha, l_bar, delta_l, seed, l_min } => {
            (sample_lengths(v, alpha, l_bar, delta_l, seed)?, l_min)
        }
    };
    let mut gc = GraphConfig::default();
    if let Some(lm) = l_min {
        gc.l_min = lm;
    } else {
        let smallest = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        gc.l_min = gc.l_min.min(0.4 * smallest.max(1e-6));
    }
    let graph = StarGraph::with_config(lengths, &gc)?;
    for w in graph.independence_warnings(&gc).iter().take(5) {
        eprintln!(
            "warning: bond lengths L{}/L{} within {:.1e} of {}/{} (near-commensurate)",
            w.bond_i, w.bond_j, w.deviation, w.p, w.q
        );
    }
    Ok(graph)
}

fn solver_config(rc: &RunConfig) -> SolverConfig {
    SolverConfig { rel_tol: rc.tol, ..Default::default() }
}

/// Chunked parallel sweep; records are identical to one serial sweep because
/// each gap is solved independently from exact pole seeds.
pub fn solve_parallel(
    graph: &StarGraph,
    count: usize,
    cfg: &SolverConfig,
) -> anyhow::Result<Vec<EigenvalueRecord>> {
    const CHUNK: usize = 4096;
    let starts: Vec<u64> = (0..count).step_by(CHUNK).map(|i| i as u64 + 1).collect();
    let chunks: Result<Vec<Vec<EigenvalueRecord>>, _> = starts
        .par_iter()
        .map(|&s| {
            let len = CHUNK.min(count - (s as usize - 1));
            solve_range(graph, s, len, cfg)
        })
        .collect();
    Ok(chunks?.into_iter().flatten().collect())
}

fn out_path(rc: &RunConfig, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        rc.out_dir.join(p)
    }
}

fn run_spectrum(rc: &RunConfig, graph: &Path, count: usize, out: &Path) -> anyhow::Result<()> {
    if count == 0 {
        return cfg_err("count must be positive");
    }
    let g = load_graph(graph)?;
    let t0 = Instant::now();
    let records = solve_parallel(&g, count, &solver_config(rc))?;
    csvio::write_atomic(&out_path(rc, out), &csvio::spectrum_csv(&records))?;
    eprintln!(
        "spectrum: {} roots of a {}-bond graph in {:.2}s (k_max = {:.6})",
        records.len(),
        g.bond_count(),
        t0.elapsed().as_secs_f64(),
        records.last().map(|r| r.k).unwrap_or(0.0)
    );
    Ok(())
}

fn matrix_element_rows(
    graph: &StarGraph,
    records: &[EigenvalueRecord],
    v: usize,
) -> Vec<(u64, f64, IndicatorElement)> {
    records
        .par_iter()
        .map(|r| (r.n, r.k, indicator_element_at(graph, r.k, r.k_lo, v)))
        .collect()
}

fn run_matrix_elements(
    rc: &RunConfig,
    graph: &Path,
    v: usize,
    alpha: usize,
    count: usize,
    out: &Path,
) -> anyhow::Result<()> {
    let g = load_graph(graph)?;
    let obs = SplitObservable::new(v, alpha)?;
    obs.check_compatible(&g)?;
    let records = solve_parallel(&g, count, &solver_config(rc))?;
    let rows = matrix_element_rows(&g, &records, v);
    csvio::write_atomic(&out_path(rc, out), &csvio::matrix_elements_csv(&rows))?;
    Ok(())
}

/// Grid points evaluated in parallel, reassembled in order.
pub fn build_cdf_parallel(alpha: u32, rs: &[f64], cutoff: f64) -> anyhow::Result<CdfTable> {
    let base = LimitParams { alpha, eta: 1.0, cutoff, tol: 1e-9 };
    base.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    let pts: Result<Vec<(f64, f64)>, _> =
        rs.par_iter().map(|&r| limit_cdf(r, &base)).collect();
    let pts = pts?;
    Ok(CdfTable::from_values(
        rs.to_vec(),
        pts.iter().map(|p| p.0).collect(),
        pts.iter().map(|p| p.1).collect(),
    ))
}

fn run_limit_cdf(
    rc: &RunConfig,
    alpha: u32,
    r_grid: &str,
    cutoff: f64,
    out: &Path,
) -> anyhow::Result<()> {
    let rs = parse_grid(r_grid)?;
    if rs.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return cfg_err("R grid must lie strictly inside (0, 1)");
    }
    let table = build_cdf_parallel(alpha, &rs, cutoff)?;
    csvio::write_atomic(&out_path(rc, out), &csvio::cdf_csv(&table))?;
    Ok(())
}

#[derive(Serialize)]
struct CompareReport {
    d_v: f64,
    d_qe_step: f64,
    n: usize,
    v: usize,
    alpha: usize,
    seed: Option<u64>,
    use_leading: bool,
    runtime_s: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_compare(
    rc: &RunConfig,
    graph: &Path,
    v: usize,
    alpha: usize,
    count: usize,
    cdf: &Path,
    out: &Path,
    exact: bool,
) -> anyhow::Result<()> {
    let t0 = Instant::now();
    let g = load_graph(graph)?;
    let obs = SplitObservable::new(v, alpha)?;
    obs.check_compatible(&g)?;
    let table = csvio::read_cdf_csv(cdf)?;
    let records = solve_parallel(&g, count, &solver_config(rc))?;
    let emp = collect_from_records(&records, &g, &obs, !exact)?;
    let d_v = sup_distance(&emp, &table);
    let jump = 1.0 / alpha as f64;
    let d_qe = stargraph_core::stats::sup_distance_fn(&emp, &[jump], |r| {
        qe_step_cdf(r, alpha as u32)
    });
    let report = CompareReport {
        d_v,
        d_qe_step: d_qe,
        n: emp.len(),
        v,
        alpha,
        seed: rc.seed,
        use_leading: !exact,
        runtime_s: t0.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&report)?;
    csvio::write_atomic(&out_path(rc, out), &json)?;
    eprintln!("compare: D_v = {d_v:.4}, D_step = {d_qe:.4} over {} samples", emp.len());
    Ok(())
}

fn run_scars(
    rc: &RunConfig,
    graph: &Path,
    bonds: &str,
    eps: &str,
    budget: &str,
    out: &Path,
) -> anyhow::Result<()> {
    let g = load_graph(graph)?;
    let bond_list: Vec<usize> = parse_list(bonds, "bond index")?;
    if bond_list.len() != 2 {
        return cfg_err("exactly two target bonds required, e.g. --bonds 1,2");
    }
    let eps_list: Vec<f64> = parse_list(eps, "epsilon")?;
    let budget = parse_budget(budget)?;
    let certs = scar_sequence(
        &g,
        bond_list[0],
        bond_list[1],
        &eps_list,
        budget,
        &solver_config(rc),
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    for c in &certs {
        eprintln!(
            "scar eps={:.3}: torus n={} spectral n={} k={:.6} mass={:.5} ratio={:.4}",
            c.epsilon, c.n, c.n_spectral, c.k, c.mass, c.sec2_ratio
        );
    }
    csvio::write_atomic(&out_path(rc, out), &csvio::scars_csv(&certs))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_figures(
    rc: &RunConfig,
    id: &str,
    alpha: u32,
    v: Option<usize>,
    v_list: Option<&str>,
    count: Option<usize>,
    l_bar: Option<f64>,
    spread_c: Option<f64>,
) -> anyhow::Result<()> {
    let seed = match rc.seed {
        Some(s) => s,
        None => return cfg_err("--seed is required for figure reproduction (lengths are sampled)"),
    };
    let recipe = figure_recipe(l_bar, spread_c);
    match id {
        "fig5" => {
            let v = v.unwrap_or(30);
            if v_list.is_some() {
                return cfg_err("fig5 takes a single --v, not --v-list");
            }
            let count = count.unwrap_or(100_000);
            fig5(rc, alpha, v, count, seed, &recipe)
        }
        "fig6" => {
            if v.is_some() {
                return cfg_err("fig6 takes --v-list, not a single --v");
            }
            let vs: Vec<usize> = match v_list {
                Some(s) => parse_list(s, "v")?,
                None => vec![5, 10, 15, 20, 25, 30],
            };
            let count = count.unwrap_or(50_000);
            fig6(rc, alpha, &vs, count, seed, &recipe)
        }
        other => cfg_err(format!("unknown figure id {other:?} (use fig5 or fig6)")),
    }
}

/// Length ensemble used by the figures: mean 0.2 with spread 8/v^2 relative,
/// which keeps `v * delta_l / l_bar` small (the limit-law hypothesis) while
/// the spectrum still wraps the phase-difference torus many times within the
/// eigenvalue budget.
pub fn figure_recipe(l_bar: Option<f64>, spread_c: Option<f64>) -> EnsembleRecipe {
    let l_bar = l_bar.unwrap_or(0.2);
    EnsembleRecipe {
        l_bar,
        spread_c: spread_c.unwrap_or(8.0),
        l_min: 0.4 * l_bar,
    }
}

fn default_grid() -> Vec<f64> {
    stargraph_core::limitdist::uniform_grid(0.01, 0.99, 0.01)
}

fn fig5(
    rc: &RunConfig,
    alpha: u32,
    v: usize,
    count: usize,
    seed: u64,
    recipe: &EnsembleRecipe,
) -> anyhow::Result<()> {
    let t0 = Instant::now();
    let g = recipe.build_graph(v, alpha, seed)?;
    let records = solve_parallel(&g, count, &solver_config(rc))?;
    let rows = matrix_element_rows(&g, &records, v);
    csvio::write_atomic(&out_path(rc, Path::new("me.csv")), &csvio::matrix_elements_csv(&rows))?;

    let table = build_cdf_parallel(alpha, &default_grid(), 200.0)?;
    csvio::write_atomic(&out_path(rc, Path::new("F.csv")), &csvio::cdf_csv(&table))?;

    let emp = EmpiricalDistribution::from_samples(rows.iter().map(|r| r.2.leading).collect())?;
    let d_f = sup_distance(&emp, &table);
    let jump = 1.0 / alpha as f64;
    let d_step =
        stargraph_core::stats::sup_distance_fn(&emp, &[jump], |r| qe_step_cdf(r, alpha));

    let series = vec![
        Series {
            name: format!("ECDF (v={v}, N={count})"),
            color: PALETTE[0],
            kind: SeriesKind::Step,
            dashed: false,
            points: thin_ecdf(emp.samples(), 1200),
        },
        Series {
            name: "analytic F(R)".into(),
            color: PALETTE[1],
            kind: SeriesKind::Line,
            dashed: false,
            points: table.rs.iter().cloned().zip(table.fs.iter().cloned()).collect(),
        },
        Series {
            name: format!("QE step at 1/{alpha}"),
            color: PALETTE[7],
            kind: SeriesKind::Step,
            dashed: true,
            points: vec![(0.0, 0.0), (jump, 1.0), (1.0, 1.0)],
        },
    ];
    let svg = svg_chart(
        &format!("Matrix-element distribution, alpha={alpha}, v={v} (D_F={d_f:.3}, D_step={d_step:.3})"),
        "R",
        "F(R)",
        &series,
    );
    csvio::write_atomic(&out_path(rc, Path::new("fig5.svg")), &svg)?;
    eprintln!(
        "fig5: D(ecdf, F) = {d_f:.4}, D(ecdf, step) = {d_step:.4}, runtime {:.1}s",
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}

fn fig6(
    rc: &RunConfig,
    alpha: u32,
    vs: &[usize],
    count: usize,
    seed: u64,
    recipe: &EnsembleRecipe,
) -> anyhow::Result<()> {
    let t0 = Instant::now();
    let grid = default_grid();
    let table = build_cdf_parallel(alpha, &grid, 200.0)?;
    csvio::write_atomic(&out_path(rc, Path::new("F.csv")), &csvio::cdf_csv(&table))?;

    let mut dev_rows: Vec<(usize, f64, f64)> = Vec::new();
    let mut dv_summary: Vec<(usize, f64)> = Vec::new();
    let mut series = Vec::new();
    for (i, &v) in vs.iter().enumerate() {
        let g = recipe.build_graph(v, alpha, seed + i as u64)?;
        let records = solve_parallel(&g, count, &solver_config(rc))?;
        let obs = SplitObservable::new(v, alpha as usize)?;
        let emp = collect_from_records(&records, &g, &obs, true)?;
        let d_v = sup_distance(&emp, &table);
        dv_summary.push((v, d_v));
        let mut pts = Vec::with_capacity(grid.len());
        for &r in &grid {
            let dev = emp.ecdf(r) - table.eval(r);
            dev_rows.push((v, r, dev));
            pts.push((r, dev));
        }
        series.push(Series {
            name: format!("v={v} (D={d_v:.3})"),
            color: PALETTE[i % PALETTE.len()],
            kind: SeriesKind::Line,
            dashed: false,
            points: pts,
        });
        eprintln!("fig6: v={v} D_v={d_v:.4}");
    }
    csvio::write_atomic(
        &out_path(rc, Path::new("fig6_deviations.csv")),
        &csvio::fig6_deviation_csv(&dev_rows),
    )?;
    let mut dv_csv = String::from(csvio::FORMAT_TAG);
    dv_csv.push_str(" fig6-dv\nv,d_v,count,seed\n");
    for (i, (v, d)) in dv_summary.iter().enumerate() {
        dv_csv.push_str(&format!("{},{},{},{}\n", v, d, count, seed + i as u64));
    }
    csvio::write_atomic(&out_path(rc, Path::new("fig6_dv.csv")), &dv_csv)?;
    let svg = svg_chart(
        &format!("Deviation of ECDF_v from F(R), alpha={alpha}, N={count}"),
        "R",
        "ECDF_v(R) - F(R)",
        &series,
    );
    csvio::write_atomic(&out_path(rc, Path::new("fig6.svg")), &svg)?;
    eprintln!("fig6 complete in {:.1}s", t0.elapsed().as_secs_f64());
    Ok(())
}
