//! One handler per subcommand. Each handler reads what it needs from the
//! experiment config, calls into `pam_core`, and returns flat output maps
//! plus optional table and plot artifacts for the runner to persist.

use std::collections::BTreeMap;

use pam_core::hurst::HurstParams;
use pam_core::moments::{self, MomentEstimate};
use pam_core::regime;
use pam_core::renorm;
use pam_core::spectral::MollifiedSpectralMeasure;
use pam_core::streams::{Domain, StreamFactory};
use pam_core::variational::{self, SearchConfig, TrialFamily, TrialFunction};
use rand::Rng;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::record::{fmt_f64, OutputMap, PlotSeries, Table};

/// Everything a subcommand produces: one output map per result line, and
/// optionally a CSV table with a plot script that reads it.
pub struct CommandOutput {
    pub outputs: Vec<BTreeMap<String, Value>>,
    pub table: Option<Table>,
    pub plot: Option<String>,
}

impl CommandOutput {
    fn records(outputs: Vec<BTreeMap<String, Value>>) -> Self {
        CommandOutput {
            outputs,
            table: None,
            plot: None,
        }
    }

    fn single(out: OutputMap) -> Self {
        CommandOutput::records(vec![out.into_map()])
    }
}

pub fn execute(slug: &str, cfg: &ExperimentConfig) -> Result<CommandOutput> {
    match slug {
        "regime" => regime_report(cfg),
        "constants" => constants(cfg),
        "kappa-townes" => kappa_townes(cfg),
        "kappa-trial" => kappa_trial(cfg),
        "critical-time" => critical_time(cfg),
        "moments" => moment_estimates(cfg),
        "beta-mean" => beta_mean(cfg),
        "renorm" => renorm_constants(cfg),
        "gap" => gap(cfg),
        "blowup-scan" => blowup_scan(cfg),
        "certificate" => certificate(cfg),
        "check-hyper" => check_hyper(cfg),
        "check-subadd" => check_subadd(cfg),
        "check-scaling" => check_scaling(cfg),
        "check-identity" => check_identity(cfg),
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(",")
}

fn trial_family(cfg: &ExperimentConfig) -> Result<TrialFamily> {
    match cfg.str_or("family", "gaussian")? {
        "gaussian" => Ok(TrialFamily::GaussianProduct),
        "modulated" => Ok(TrialFamily::TimeModulatedGaussian),
        other => Err(CliError::Config(format!(
            "unknown trial family {other}, expected gaussian or modulated"
        ))),
    }
}

fn search_config(cfg: &ExperimentConfig) -> Result<SearchConfig> {
    let defaults = SearchConfig::default();
    Ok(SearchConfig {
        sweeps: cfg.usize_or("search.sweeps", defaults.sweeps)?,
        rel_tol: cfg.f64_or("search.rel_tol", defaults.rel_tol)?,
        initial_width: cfg.f64_or("search.initial_width", defaults.initial_width)?,
    })
}

fn describe_trial(out: &mut OutputMap, trial: &TrialFunction) {
    out.text("trial_widths", &join_f64(trial.widths()));
    if let TrialFunction::TimeModulatedGaussian { rate, .. } = trial {
        out.number_tol("trial_rate", *rate, 0.0);
    }
}

/// Resolves the interaction constant from `kappa.value`, the reference
/// oracle, or a trial-family search. Returns the value, its tolerance,
/// and a label saying where it came from.
fn resolve_kappa(cfg: &ExperimentConfig, params: &HurstParams) -> Result<(f64, f64, String)> {
    if let Some(v) = cfg.opt_f64("kappa.value")? {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!(
                "kappa.value must be positive and finite, got {v}"
            )));
        }
        return Ok((v, 0.0, "value".to_owned()));
    }
    match cfg.str_or("kappa.source", "townes")? {
        "townes" => {
            let oracle = variational::gn_kappa_townes()?;
            Ok((oracle.kappa, oracle.kappa * 1e-9, "townes".to_owned()))
        }
        "trial" => {
            let family = trial_family(cfg)?;
            let search = search_config(cfg)?;
            let bound = variational::kappa_lower_bound(params, family, &search)?;
            Ok((
                bound.kappa_lb,
                bound.kappa_lb * search.rel_tol,
                "trial".to_owned(),
            ))
        }
        other => Err(CliError::Config(format!(
            "unknown kappa.source {other}, expected townes or trial"
        ))),
    }
}

fn regime_report(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let report = regime::classify(&params);
    let mut out = OutputMap::new();
    out.count("d", params.d() as u64)
        .count("d_star", report.d_star as u64)
        .number_tol("h_star", report.h_star, 0.0)
        .number_tol("h_sum", report.h_sum, 0.0)
        .text("skorohod", &format!("{:?}", report.skorohod))
        .flag("stratonovich_ok", report.stratonovich_ok)
        .text("notes", &report.notes.join("; "));
    Ok(CommandOutput::single(out))
}

fn constants(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let eps_time = cfg.f64_or("eps.time", 1.0)?;
    let eps_space = cfg.f64_or("eps.space", 1.0)?;
    let measure = MollifiedSpectralMeasure::new(params.clone(), eps_time, eps_space)?;
    let mut out = OutputMap::new();
    let mut c_squared = measure.c0();
    out.number_tol("c_time", measure.c0(), 0.0);
    for (j, &c) in measure.c_spatial().iter().enumerate() {
        c_squared *= c;
        out.number_tol(&format!("c_space_{}", j + 1), c, 0.0);
    }
    out.number_tol("c_squared", c_squared, 0.0);
    out.number_tol("spectral_mass", measure.spectral_mass()?, 1e-8);
    Ok(CommandOutput::single(out))
}

fn kappa_townes(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let step = cfg.f64_or("step", 5e-4)?;
    let oracle = variational::gn_kappa_townes_with_step(step)?;
    let mut out = OutputMap::new();
    out.number_tol("amplitude", oracle.amplitude, 1e-9)
        .number_tol("q_mass", oracle.q_mass, oracle.q_mass * 1e-6)
        .number_tol("kappa", oracle.kappa, oracle.kappa * 1e-9)
        .number_tol("ode_residual", oracle.ode_residual, 0.0);
    Ok(CommandOutput::single(out))
}

fn kappa_trial(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let family = trial_family(cfg)?;
    let search = search_config(cfg)?;
    let bound = variational::kappa_lower_bound(&params, family, &search)?;
    let mut out = OutputMap::new();
    out.number_tol("kappa_lb", bound.kappa_lb, bound.kappa_lb * search.rel_tol)
        .number_tol("ratio", bound.ratio, bound.ratio * search.rel_tol)
        .flag("converged", bound.converged)
        .count("sweeps_used", bound.sweeps_used as u64)
        .text("family", cfg.str_or("family", "gaussian")?);
    describe_trial(&mut out, &bound.best_trial);
    Ok(CommandOutput::single(out))
}

fn critical_time(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let p = cfg.f64("p")?;
    let (kappa, kappa_tol, source) = resolve_kappa(cfg, &params)?;
    let t_zero = regime::critical_time(p, &params, kappa)?;
    // t0 scales like kappa^{-4/(2 h0 - 1)}, so a relative error in kappa
    // is amplified by that exponent.
    let h0 = params.h0_f64();
    let t_tol = (4.0 / (2.0 * h0 - 1.0)).abs() * t_zero * (kappa_tol / kappa);
    let mut out = OutputMap::new();
    out.number_tol("t_zero", t_zero, t_tol)
        .number_tol("p", p, 0.0)
        .number_tol("kappa", kappa, kappa_tol)
        .text("kappa_source", &source);
    Ok(CommandOutput::single(out))
}

fn moment_record(m: &MomentEstimate, p: u32) -> BTreeMap<String, Value> {
    let mut out = OutputMap::new();
    out.number_tol("t", m.t, 0.0)
        .count("p", p as u64)
        .number_tol("eps_time", m.eps_time, 0.0)
        .number_tol("eps_space", m.eps_space, 0.0)
        .number_se("value", m.value, m.std_error)
        .flag("stable", m.stable)
        .number_tol("spectral_sensitivity", m.spectral_sensitivity, 0.0)
        .count("samples", m.samples as u64);
    if let Some(n) = m.level {
        out.count("level", n as u64);
    }
    out.into_map()
}

fn moment_estimates(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let mc = cfg.mc()?;
    let p = cfg.u32_or("p", 2)?;
    let ts = if cfg.contains("t_grid") {
        cfg.f64_list("t_grid")?
    } else {
        vec![cfg.f64("t")?]
    };
    if ts.is_empty() {
        return Err(CliError::Config("t_grid must be non-empty".to_owned()));
    }
    let interpretation = cfg.str_or("interpretation", "skorohod")?;
    let mut estimates = Vec::with_capacity(ts.len());
    match interpretation {
        "skorohod" => {
            let eps = cfg.f64("eps")?;
            for &t in &ts {
                estimates.push(moments::skorohod_moment(t, p, eps, &params, &mc)?);
            }
        }
        "stratonovich" => {
            let level = cfg.u32("level")?;
            for &t in &ts {
                estimates.push(moments::stratonovich_moment(t, p, level, &params, &mc)?);
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown interpretation {other}, expected skorohod or stratonovich"
            )));
        }
    }
    let outputs = estimates.iter().map(|m| moment_record(m, p)).collect();
    if estimates.len() < 2 {
        return Ok(CommandOutput::records(outputs));
    }
    let mut table = Table::new(&["t", "value", "std_error", "stable"]);
    for m in &estimates {
        table.push_row(vec![
            fmt_f64(m.t),
            fmt_f64(m.value),
            fmt_f64(m.std_error),
            m.stable.to_string(),
        ]);
    }
    let plot = crate::record::plot_script(
        &table,
        &format!("moment of order {p} ({interpretation})"),
        "t",
        "E[u^p]",
        &[PlotSeries {
            x: 1,
            y: 2,
            y_err: Some(3),
            title: format!("p={p}"),
        }],
    );
    Ok(CommandOutput {
        outputs,
        table: Some(table),
        plot: Some(plot),
    })
}

fn beta_mean(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let t = cfg.f64("t")?;
    let (eps_time, eps_space) = if let Some(eps) = cfg.opt_f64("eps")? {
        (eps * eps, eps)
    } else {
        (cfg.f64("eps.time")?, cfg.f64("eps.space")?)
    };
    let value = pam_core::montecarlo::beta_mean_quadrature(t, eps_time, eps_space, &params)?;
    let mut out = OutputMap::new();
    out.number_tol("t", t, 0.0)
        .number_tol("eps_time", eps_time, 0.0)
        .number_tol("eps_space", eps_space, 0.0)
        .number_tol("beta_mean", value, value.abs() * 1e-8);
    Ok(CommandOutput::single(out))
}

fn renorm_constants(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let n_max = cfg.usize_or("n_max", 6)?;
    if n_max == 0 {
        return Err(CliError::Config("n_max must be at least 1".to_owned()));
    }
    let branch = format!("{:?}", renorm::renorm_regime(&params)?);
    let mut constants = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        constants.push(renorm::renorm_constant(n, &params)?);
    }
    let mut outputs = Vec::with_capacity(n_max);
    let mut table = Table::new(&["n", "c_n", "log2_ratio"]);
    for (i, &c_n) in constants.iter().enumerate() {
        let n = i + 1;
        let mut out = OutputMap::new();
        out.count("n", n as u64)
            .text("regime", &branch)
            .number_tol("c_n", c_n, c_n.abs() * 1e-6);
        let mut ratio_cell = String::new();
        if i > 0 {
            let log2_ratio = (c_n / constants[i - 1]).log2();
            out.number_tol("log2_ratio", log2_ratio, 1e-9);
            ratio_cell = fmt_f64(log2_ratio);
        }
        outputs.push(out.into_map());
        table.push_row(vec![n.to_string(), fmt_f64(c_n), ratio_cell]);
    }
    let plot = crate::record::plot_script(
        &table,
        "renormalization constants by mollification level",
        "n",
        "c_n",
        &[PlotSeries {
            x: 1,
            y: 2,
            y_err: None,
            title: "c_n".to_owned(),
        }],
    );
    Ok(CommandOutput {
        outputs,
        table: Some(table),
        plot: Some(plot),
    })
}

fn gap(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let t = cfg.f64("t")?;
    let n_max = cfg.usize_or("n_max", 6)?;
    let report = renorm::gap_report(t, n_max, &params)?;
    let mut outputs = Vec::with_capacity(report.rows.len() + 1);
    let mut table = Table::new(&["n", "c_n", "half_e_beta", "gap"]);
    for row in &report.rows {
        let mut out = OutputMap::new();
        out.count("n", row.n as u64)
            .text("regime", &format!("{:?}", row.regime))
            .number_tol("c_n", row.c_n, row.c_n.abs() * 1e-6)
            .number_tol("half_e_beta", row.half_e_beta, row.half_e_beta.abs() * 1e-6)
            .number_tol("gap", row.gap, row.gap.abs() * 1e-4);
        if let Some(r_n) = row.r_n {
            out.number_tol("r_n", r_n, r_n.abs() * 1e-6);
        }
        if let Some(j) = row.j_integral {
            out.number_tol("j_integral", j, j.abs() * 1e-6);
        }
        outputs.push(out.into_map());
        table.push_row(vec![
            row.n.to_string(),
            fmt_f64(row.c_n),
            fmt_f64(row.half_e_beta),
            fmt_f64(row.gap),
        ]);
    }
    let mut summary = OutputMap::new();
    summary
        .number_tol("t", t, 0.0)
        .count("levels", report.rows.len() as u64)
        .number_tol("mean_gap", report.mean_gap, report.mean_gap.abs() * 1e-4)
        .number_tol("slope", report.slope, 0.0)
        .flag("growth_flagged", report.growth_flagged);
    outputs.push(summary.into_map());
    let plot = crate::record::plot_script(
        &table,
        &format!("gap between c_n t and E[beta]/2 at t={}", fmt_f64(t)),
        "n",
        "gap",
        &[PlotSeries {
            x: 1,
            y: 4,
            y_err: None,
            title: "gap".to_owned(),
        }],
    );
    Ok(CommandOutput {
        outputs,
        table: Some(table),
        plot: Some(plot),
    })
}

fn blowup_scan(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let mc = cfg.mc()?;
    let p = cfg.u32_or("p", 2)?;
    let (kappa, kappa_tol, source) = resolve_kappa(cfg, &params)?;
    let threshold = cfg.f64_or("threshold", moments::DIVERGENCE_THRESHOLD)?;
    let eps_grid = cfg
        .opt_f64_list("eps_grid")?
        .unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.125]);
    let ts = if cfg.contains("t_grid") {
        cfg.f64_list("t_grid")?
    } else if cfg.contains("t_grid_t0") {
        let t_zero = regime::critical_time(p as f64, &params, kappa)?;
        cfg.f64_list("t_grid_t0")?
            .into_iter()
            .map(|m| m * t_zero)
            .collect()
    } else {
        return Err(CliError::Config(
            "blowup-scan needs t_grid (absolute times) or t_grid_t0 (multiples of the critical time)"
                .to_owned(),
        ));
    };
    let scan = moments::blowup_scan(p, &ts, &eps_grid, kappa, threshold, &params, &mc)?;

    let mut outputs = Vec::with_capacity(scan.rows.len() + 1);
    let mut header = OutputMap::new();
    header
        .count("p", p as u64)
        .number_tol("kappa", kappa, kappa_tol)
        .text("kappa_source", &source)
        .number_tol("threshold", scan.threshold, 0.0);
    if let Some(t_zero) = scan.t_zero {
        header.number_tol("t_zero", t_zero, 0.0);
    }
    outputs.push(header.into_map());
    for row in &scan.rows {
        let mut out = OutputMap::new();
        out.number_tol("t", row.t, 0.0)
            .number_se("slope", row.slope, row.slope_std_error)
            .text("classification", &format!("{:?}", row.classification))
            .flag("tail_warning", row.tail_warning);
        outputs.push(out.into_map());
    }

    let mut columns = vec!["eps".to_owned(), "log_inv_eps".to_owned()];
    for i in 1..=ts.len() {
        columns.push(format!("log_moment_{i}"));
        columns.push(format!("std_error_{i}"));
        columns.push(format!("stable_{i}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut table = Table::new(&column_refs);
    for (j, &eps) in eps_grid.iter().enumerate() {
        let mut row = vec![fmt_f64(eps), fmt_f64((1.0 / eps).ln())];
        for i in 0..ts.len() {
            let cell = &scan.cells[i * eps_grid.len() + j];
            row.push(fmt_f64(cell.log_moment));
            row.push(fmt_f64(cell.std_error));
            row.push(cell.stable.to_string());
        }
        table.push_row(row);
    }
    let series: Vec<PlotSeries> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| PlotSeries {
            x: 2,
            y: 3 + 3 * i,
            y_err: Some(4 + 3 * i),
            title: format!("t={}", fmt_f64(t)),
        })
        .collect();
    let plot = crate::record::plot_script(
        &table,
        &format!("log moment of order {p} against mollification scale"),
        "ln(1/eps)",
        "ln E[u^p]",
        &series,
    );
    Ok(CommandOutput {
        outputs,
        table: Some(table),
        plot: Some(plot),
    })
}

fn certificate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let t = cfg.f64("t")?;
    let p = cfg.f64_or("p", 2.0)?;
    let trial = if let Some(widths) = cfg.opt_f64_list("trial.widths")? {
        if let Some(rate) = cfg.opt_f64("trial.rate")? {
            TrialFunction::time_modulated(widths, rate)?
        } else {
            TrialFunction::gaussian_product(widths)?
        }
    } else {
        let family = trial_family(cfg)?;
        let search = search_config(cfg)?;
        variational::kappa_lower_bound(&params, family, &search)?.best_trial
    };
    let report = variational::blowup_certificate(t, p, &trial, &params)?;
    let t_cross = variational::zero_margin_time(p, &trial, &params)?;
    let mut out = OutputMap::new();
    out.number_tol("t", t, 0.0)
        .number_tol("p", p, 0.0)
        .number_tol("numerator", report.numerator, report.numerator.abs() * 1e-9)
        .number_tol("gradient_energy", report.gradient_energy, 0.0)
        .number_tol(
            "margin",
            report.margin,
            report.margin.abs() * 1e-9 + 1e-12,
        )
        .flag("certified", report.certified)
        .number_tol("zero_margin_time", t_cross, t_cross * 1e-9);
    describe_trial(&mut out, &trial);
    Ok(CommandOutput::single(out))
}

fn check_hyper(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let mc = cfg.mc()?;
    let t = cfg.f64("t")?;
    let p = cfg.u32_or("p", 3)?;
    let eps = cfg.f64("eps")?;
    let report = moments::hypercontractivity_check(t, p, eps, &params, &mc)?;
    let mut out = OutputMap::new();
    out.number_tol("t", report.t, 0.0)
        .count("p", report.p as u64)
        .number_tol("eps", report.eps, 0.0)
        .number_tol("rescaled_t", report.rescaled_t, 0.0)
        .number_se("lhs", report.lhs, report.lhs_std_error)
        .number_se("rhs", report.rhs, report.rhs_std_error)
        .flag("holds_within_ci", report.holds_within_ci)
        .flag("stable", report.stable);
    Ok(CommandOutput::single(out))
}

fn check_subadd(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let mc = cfg.mc()?;
    let t1 = cfg.f64("t1")?;
    let t2 = cfg.f64("t2")?;
    let theta = cfg.f64("theta")?;
    let n_max = cfg.u32_or("n_max", 6)?;
    let eps = cfg.f64("eps")?;
    let report = moments::subadditivity_check(t1, t2, theta, n_max, eps, &params, &mc)?;
    let mut out = OutputMap::new();
    out.number_tol("t1", report.t1, 0.0)
        .number_tol("t2", report.t2, 0.0)
        .number_tol("theta", report.theta, 0.0)
        .count("n_max", report.n_max as u64)
        .number_se("lhs", report.lhs, report.lhs_std_error)
        .number_se("factor1", report.factor1, report.factor1_std_error)
        .number_se("factor2", report.factor2, report.factor2_std_error)
        .number_se("rhs", report.rhs, report.rhs_std_error)
        .number_tol("truncation_share_lhs", report.truncation_shares[0], 0.0)
        .number_tol("truncation_share_1", report.truncation_shares[1], 0.0)
        .number_tol("truncation_share_2", report.truncation_shares[2], 0.0)
        .text("verdict", &format!("{:?}", report.verdict));
    Ok(CommandOutput::single(out))
}

fn check_scaling(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let t = cfg.f64("t")?;
    let b = cfg.f64("b")?;
    let tol = cfg.f64_or("tol", 1e-3)?;
    let report = pam_core::montecarlo::scaling_identity_check(t, b, &params, tol)?;
    let mut out = OutputMap::new();
    out.number_tol("t", report.t, 0.0)
        .number_tol("b", report.b, 0.0)
        .number_tol("lhs", report.lhs, report.lhs.abs() * 1e-8)
        .number_tol("rhs", report.rhs, report.rhs.abs() * 1e-8)
        .number_tol("rel_discrepancy", report.rel_discrepancy, 0.0)
        .number_tol("tol", report.tol, 0.0)
        .flag("passed", report.passed);
    Ok(CommandOutput::single(out))
}

/// Cross-checks the two routes to the blowup horizon on random Gaussian
/// trials: the zero of the certificate margin against the closed-form
/// critical time evaluated at the trial's own interaction constant.
fn check_identity(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let params = cfg.hurst()?;
    let p = cfg.f64_or("p", 2.0)?;
    let trials = cfg.usize_or("trials", 5)?;
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".to_owned()));
    }
    let tol = cfg.f64_or("tol", 1e-10)?;
    let factory = StreamFactory::new(cfg.mc()?.seed);
    let mut outputs = Vec::with_capacity(trials + 1);
    let mut all_hold = true;
    for i in 0..trials {
        let mut rng = factory.stream(Domain::Trials, 0, i as u64);
        let widths: Vec<f64> = (0..params.d())
            .map(|_| {
                let u: f64 = rng.random();
                (std::f64::consts::LN_2 * (2.0 * u - 1.0)).exp()
            })
            .collect();
        let trial = TrialFunction::gaussian_product(widths)?;
        let t_margin = variational::zero_margin_time(p, &trial, &params)?;
        let ratio = variational::rayleigh_ratio(&trial, &params)?;
        if !(ratio > 0.0) {
            return Err(CliError::Guard(
                "trial produced a nonpositive interaction ratio".to_owned(),
            ));
        }
        let t_formula = regime::critical_time(p, &params, ratio.powf(0.25))?;
        let rel_gap = (t_margin / t_formula - 1.0).abs();
        let holds = rel_gap <= tol;
        all_hold &= holds;
        let mut out = OutputMap::new();
        out.count("trial", i as u64)
            .number_tol("zero_margin_time", t_margin, t_margin * tol)
            .number_tol("critical_time", t_formula, t_formula * tol)
            .number_tol("rel_gap", rel_gap, 0.0)
            .flag("holds", holds);
        describe_trial(&mut out, &trial);
        outputs.push(out.into_map());
    }
    let mut summary = OutputMap::new();
    summary
        .count("trials", trials as u64)
        .number_tol("tol", tol, 0.0)
        .flag("all_hold", all_hold);
    outputs.push(summary.into_map());
    Ok(CommandOutput::records(outputs))
}
