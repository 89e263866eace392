//! One function per experiment. Each returns the formatted output document
//! plus the per-row stdout summary lines; the caller owns file writing and
//! exit-status mapping.

use beltrami::dd::Dd;
use beltrami::diagnostics::poincare_sweep;
use beltrami::manifold::enumerate_spectrum;
use beltrami::pointset::AdmissibleSet;
use beltrami::ritz::{
    convergence_study, eigenfunction_reconstruction, exact_eigenvalues_upto, ritz_eigenvalues,
};
use beltrami::scalar::Scalar;
use beltrami::spectral::random_band_limited;
use beltrami::spline::{CutoffPolicy, SplineSpace};
use beltrami::zeta::zeta_convergence_sweep;
use beltrami::Result;

use crate::config::{OutputFormat, Precision, RunConfig};

pub struct RunOutput {
    pub document: Vec<u8>,
    pub summaries: Vec<String>,
    pub warnings: Vec<String>,
}

/// Significant-digit float formatting for CSV cells.
fn fmt(x: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), x)
}

pub fn run(config: &RunConfig) -> Result<RunOutput> {
    use crate::config::Experiment::*;
    match config.experiment {
        Spectrum => spectrum(config),
        Pointset => pointset(config),
        Eigs => with_scalar(config, eigs::<f64>, eigs::<Dd>),
        Convergence => with_scalar(config, convergence::<f64>, convergence::<Dd>),
        Reconstruct => with_scalar(config, reconstruct::<f64>, reconstruct::<Dd>),
        Poincare => with_scalar(config, poincare::<f64>, poincare::<Dd>),
        Zeta => with_scalar(config, zeta::<f64>, zeta::<Dd>),
    }
}

fn with_scalar(
    config: &RunConfig,
    narrow: fn(&RunConfig) -> Result<RunOutput>,
    wide: fn(&RunConfig) -> Result<RunOutput>,
) -> Result<RunOutput> {
    match config.resolved_precision() {
        Precision::Dd => wide(config),
        _ => narrow(config),
    }
}

fn spectrum(config: &RunConfig) -> Result<RunOutput> {
    let levels = enumerate_spectrum(&config.manifold, config.lambda_max)?;
    let mut summaries = Vec::new();
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("eigenvalue,multiplicity\n");
            for level in &levels {
                out.push_str(&format!(
                    "{},{}\n",
                    fmt(level.eigenvalue, config.digits),
                    level.multiplicity
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Json => serde_json::to_vec_pretty(&serde_json::json!({
            "manifold": config.manifold.kind.to_string(),
            "lambda_max": config.lambda_max,
            "levels": levels.iter().map(|l| serde_json::json!({
                "eigenvalue": l.eigenvalue,
                "multiplicity": l.multiplicity,
                "descriptors": l.basis_descriptors.iter().map(|d| d.to_string())
                    .collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        }))
        .expect("json encoding cannot fail"),
    };
    for level in &levels {
        summaries.push(format!(
            "lambda = {:<12} multiplicity = {}",
            level.eigenvalue, level.multiplicity
        ));
    }
    Ok(RunOutput {
        document,
        summaries,
        warnings: Vec::new(),
    })
}

fn pointset(config: &RunConfig) -> Result<RunOutput> {
    let set = AdmissibleSet::generate(&config.manifold, config.rho, config.seed)?;
    let report = set.validate(config.probes)?;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut buf: Vec<u8> = Vec::new();
            set.write_csv(&mut buf)?;
            buf
        }
        OutputFormat::Json => serde_json::to_vec_pretty(&serde_json::json!({
            "manifold": config.manifold.kind.to_string(),
            "rho": set.rho,
            "n_nodes": set.len(),
            "validation": report,
            "nodes": set.nodes.iter().map(|p| p.coords()).collect::<Vec<_>>(),
        }))
        .expect("json encoding cannot fail"),
    };
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let summaries = vec![format!(
        "N = {} packing = {} covering = {} multiplicity = {} ({})",
        set.len(),
        verdict(report.packing_pass),
        verdict(report.covering_pass),
        report.metrics.multiplicity_rho,
        verdict(report.multiplicity_pass),
    )];
    Ok(RunOutput {
        document,
        summaries,
        warnings: Vec::new(),
    })
}

fn eigs<T: Scalar>(config: &RunConfig) -> Result<RunOutput> {
    let set = AdmissibleSet::generate(&config.manifold, config.rho, config.seed)?;
    let space = SplineSpace::<T>::build(&set, config.k, CutoffPolicy::default())?;
    let ritz = ritz_eigenvalues(&space)?;
    let exact = exact_eigenvalues_upto(&config.manifold, config.omega)?;

    // gaps in working precision; the j index is 1-based with j = 1 the
    // zero mode, matching the convergence reports
    let rows: Vec<(usize, f64, f64, f64)> = exact
        .iter()
        .zip(&ritz.ritz_values)
        .enumerate()
        .map(|(idx, (ev, rv))| (idx + 1, *ev, rv.as_f64(), (*rv - T::of(*ev)).as_f64()))
        .collect();

    let mut summaries = Vec::new();
    for (j, ev, rv, gap) in &rows {
        summaries.push(format!(
            "j = {j:<4} exact = {ev:<10} ritz = {rv:<24.16e} gap = {gap:.3e}"
        ));
    }
    let d = config.digits;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("j,lambda_exact,lambda_ritz,gap\n");
            for (j, ev, rv, gap) in &rows {
                out.push_str(&format!(
                    "{j},{},{},{}\n",
                    fmt(*ev, d),
                    fmt(*rv, d),
                    fmt(*gap, d)
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Json => serde_json::to_vec_pretty(&serde_json::json!({
            "manifold": config.manifold.kind.to_string(),
            "rho": config.rho,
            "n_nodes": set.len(),
            "k": config.k,
            "omega": config.omega,
            "diagnostics": ritz.diagnostics,
            "rows": rows.iter().map(|(j, ev, rv, gap)| serde_json::json!({
                "j": j, "lambda_exact": ev, "lambda_ritz": rv, "gap": gap,
            })).collect::<Vec<_>>(),
        }))
        .expect("json encoding cannot fail"),
    };
    Ok(RunOutput {
        document,
        summaries,
        warnings: Vec::new(),
    })
}

fn convergence<T: Scalar>(config: &RunConfig) -> Result<RunOutput> {
    let report = convergence_study::<T>(
        &config.manifold,
        config.omega,
        &config.rho_schedule,
        &config.k_schedule,
        config.seed,
        CutoffPolicy::default(),
    )?;
    let d = config.digits;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("manifold,rho,n,k,j,lambda_exact,lambda_ritz,gap,bound\n");
            for r in &report.records {
                let bound = r.bound.map(|b| fmt(b, d)).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{bound}\n",
                    report.manifold,
                    fmt(r.rho, d),
                    r.n_nodes,
                    r.k,
                    r.j,
                    fmt(r.lambda_exact, d),
                    fmt(r.lambda_ritz, d),
                    fmt(r.gap, d),
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Json => {
            serde_json::to_vec_pretty(&report).expect("json encoding cannot fail")
        }
    };
    let mut summaries = Vec::new();
    for r in &report.records {
        if r.j == report.tracked_j {
            summaries.push(format!(
                "rho = {:<8} k = {} tracked lambda = {:<6} gap = {:.3e}",
                r.rho, r.k, r.lambda_exact, r.gap
            ));
        }
    }
    if let Some(c0) = report.c0_hat {
        summaries.push(format!("fitted constant C0_hat = {c0:.6e}"));
    }
    let warnings = report
        .failures
        .iter()
        .map(|f| format!("rho = {}, k = {}: {}", f.rho, f.k, f.message))
        .collect();
    Ok(RunOutput {
        document,
        summaries,
        warnings,
    })
}

fn reconstruct<T: Scalar>(config: &RunConfig) -> Result<RunOutput> {
    let set = AdmissibleSet::generate(&config.manifold, config.rho, config.seed)?;
    let space = SplineSpace::<T>::build(&set, config.k, CutoffPolicy::default())?;
    let report = eigenfunction_reconstruction(&space, config.omega)?;
    let d = config.digits;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("j,descriptor,lambda,l2_error,sup_error\n");
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.j,
                    r.descriptor,
                    fmt(r.lambda, d),
                    fmt(r.l2_error, d),
                    fmt(r.sup_error, d)
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Json => {
            serde_json::to_vec_pretty(&report).expect("json encoding cannot fail")
        }
    };
    let mut summaries = Vec::new();
    for r in &report.rows {
        summaries.push(format!(
            "j = {:<4} {:<12} lambda = {:<8} l2 = {:.3e} sup = {:.3e}",
            r.j, r.descriptor, r.lambda, r.l2_error, r.sup_error
        ));
    }
    summaries.push(format!(
        "projected rank {} of band dimension {}",
        report.projected_rank, report.band_dimension
    ));
    Ok(RunOutput {
        document,
        summaries,
        warnings: Vec::new(),
    })
}

fn poincare<T: Scalar>(config: &RunConfig) -> Result<RunOutput> {
    let mut spaces: Vec<SplineSpace<T>> = Vec::new();
    for &rho in &config.rho_schedule {
        let set = AdmissibleSet::generate(&config.manifold, rho, config.seed)?;
        spaces.push(SplineSpace::<T>::build(
            &set,
            config.k,
            CutoffPolicy::default(),
        )?);
    }
    let refs: Vec<&SplineSpace<T>> = spaces.iter().collect();
    let g = random_band_limited::<T>(&config.manifold, config.omega, config.seed, false)?;
    let fit = poincare_sweep(&refs, &g, config.m)?;
    let d = config.digits;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("rho,ratio\n");
            for (rho, ratio) in &fit.samples {
                out.push_str(&format!("{},{}\n", fmt(*rho, d), fmt(*ratio, d)));
            }
            out.into_bytes()
        }
        OutputFormat::Json => serde_json::to_vec_pretty(&fit).expect("json encoding cannot fail"),
    };
    let mut summaries = Vec::new();
    for (rho, ratio) in &fit.samples {
        summaries.push(format!("rho = {rho:<8} ratio = {ratio:.6e}"));
    }
    summaries.push(format!(
        "fitted exponent = {:.4} constant = {:.4e} residual = {:.4}",
        fit.exponent, fit.constant, fit.residual
    ));
    Ok(RunOutput {
        document,
        summaries,
        warnings: Vec::new(),
    })
}

fn zeta<T: Scalar>(config: &RunConfig) -> Result<RunOutput> {
    let report = zeta_convergence_sweep::<T>(
        &config.manifold,
        config.k,
        &config.rho_schedule,
        &config.s_grid,
        config.seed,
        CutoffPolicy::default(),
        config.tail_tol,
    )?;
    if report.rows.is_empty() {
        if let Some(first) = report.failures.first() {
            return Err(beltrami::Error::Precondition(format!(
                "every zeta cell failed; first failure: {first}"
            )));
        }
    }
    let d = config.digits;
    let document = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "manifold,rho,n,k,re_s,im_s,re_zeta,im_zeta,re_zeta_discrete,im_zeta_discrete,abs_error\n",
            );
            for r in &report.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    report.manifold,
                    fmt(r.rho, d),
                    r.n_nodes,
                    r.k,
                    fmt(r.s.re, d),
                    fmt(r.s.im, d),
                    fmt(r.exact.re, d),
                    fmt(r.exact.im, d),
                    fmt(r.discrete.re, d),
                    fmt(r.discrete.im, d),
                    fmt(r.abs_error, d),
                ));
            }
            out.into_bytes()
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = report
                .rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "rho": r.rho,
                        "n_nodes": r.n_nodes,
                        "k": r.k,
                        "s": {"re": r.s.re, "im": r.s.im},
                        "zeta_exact": {"re": r.exact.re, "im": r.exact.im},
                        "zeta_discrete": {"re": r.discrete.re, "im": r.discrete.im},
                        "abs_error": r.abs_error,
                    })
                })
                .collect();
            serde_json::to_vec_pretty(&serde_json::json!({
                "manifold": report.manifold.to_string(),
                "rows": rows,
                "sup_errors": report.sup_errors,
                "non_increasing": report.non_increasing,
                "failures": report.failures,
            }))
            .expect("json encoding cannot fail")
        }
    };
    let mut summaries = Vec::new();
    for r in &report.rows {
        summaries.push(format!(
            "rho = {:<8} n = {:<5} s = {}+{}i |zeta_d - zeta| = {:.3e}",
            r.rho, r.n_nodes, r.s.re, r.s.im, r.abs_error
        ));
    }
    for (rho, sup) in &report.sup_errors {
        summaries.push(format!("rho = {rho:<8} sup error over grid = {sup:.6e}"));
    }
    summaries.push(format!(
        "sup errors non-increasing across schedule: {}",
        report.non_increasing
    ));
    Ok(RunOutput {
        document,
        summaries,
        warnings: report.failures.clone(),
    })
}
