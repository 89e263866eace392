//! Empirical checks of the inequalities behind the convergence machinery:
//! the Poincare-type bound for functions vanishing on a node set, its
//! exponentiated form, and the interpolation error rate. Constants in
//! these inequalities are existential, so everything is verified as a
//! scaling law (fitted exponents, monotonicity), never as absolute bounds.

use crate::error::{Error, Result};
use crate::pointset::{dense_grid, AdmissibleSet};
use crate::scalar::Scalar;
use crate::spectral::SpectralVector;
use crate::spline::{CutoffPolicy, SplineSpace};

/// Least-squares power law through sample points.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ScalingFit {
    /// What was swept: "rho", "k", or "m".
    pub variable: String,
    pub samples: Vec<(f64, f64)>,
    /// Slope in transformed coordinates: log-log for "rho"/"m" sweeps
    /// (a power), semilog in (k - d) for "k" sweeps (a geometric base).
    pub exponent: f64,
    pub constant: f64,
    pub residual: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (intercept, slope, rms)
}

/// Fits value = constant * x^exponent. Requires >= 3 samples with positive
/// coordinates and values.
pub fn fit_loglog(variable: &str, samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(Error::Parameter(format!(
            "power-law fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Parameter(
            "power-law fit needs positive sample coordinates".into(),
        ));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (intercept, slope, rms) = least_squares(&xs, &ys);
    Ok(ScalingFit {
        variable: variable.to_string(),
        samples: samples.to_vec(),
        exponent: slope,
        constant: intercept.exp(),
        residual: rms,
    })
}

/// Fits value = constant * base^x (x typically k - d); exponent holds
/// ln(base). Requires >= 3 samples with positive values.
pub fn fit_semilog(variable: &str, samples: &[(f64, f64)]) -> Result<ScalingFit> {
    if samples.len() < 3 {
        return Err(Error::Parameter(format!(
            "semilog fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|&(_, y)| y <= 0.0) {
        return Err(Error::Parameter(
            "semilog fit needs positive sample values".into(),
        ));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (intercept, slope, rms) = least_squares(&xs, &ys);
    Ok(ScalingFit {
        variable: variable.to_string(),
        samples: samples.to_vec(),
        exponent: slope,
        constant: intercept.exp(),
        residual: rms,
    })
}

/// Relative size below which a remainder counts as zero: half the working
/// digits cancelled. Interpolating an element of the space back into it
/// leaves conditioning noise well under this, while genuine interpolation
/// errors of band-limited functions stay well above it.
pub fn in_space_floor<T: Scalar>() -> f64 {
    T::epsilon().as_f64().sqrt()
}

/// Relative interpolation error below which the space has reproduced f to
/// working precision (three quarters of the digits cancelled); such rows
/// carry no rate information. The err measure divides by the stiff norm
/// ||Delta^k f||, which pushes reproduction noise further down than the
/// plain norm ratio, hence the tighter floor.
pub fn reproduction_floor<T: Scalar>() -> f64 {
    T::epsilon().as_f64().powf(0.75)
}

/// ||f|| / ||Delta^{dm} f|| for f = g - s_k(g), which vanishes on the node
/// set. Returns 0 when g is (numerically) already in the spline space.
pub fn poincare_ratio<T: Scalar>(
    space: &SplineSpace<T>,
    g: &SpectralVector<T>,
    m: u32,
) -> Result<f64> {
    if m == 0 || !m.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "m must be a power of two, got {m}"
        )));
    }
    let (_, sg) = space.interpolate_function(g)?;
    let f = g.sub(&sg);
    let f_norm = f.norm().as_f64();
    if f_norm <= in_space_floor::<T>() * g.norm().as_f64().max(1e-300) {
        return Ok(0.0);
    }
    let t = (space.manifold().dimension * m) as f64;
    let denom = f.laplacian_norm(t).as_f64();
    // a nonzero remainder always has nonzero-frequency content: the
    // interpolant reproduces the mean-free part only up to it
    assert!(
        denom > 0.0,
        "vanishing-energy remainder with norm {f_norm:.3e}"
    );
    Ok(f_norm / denom)
}

/// Poincare ratios across spaces of shrinking rho (same g, same m), fitted
/// as a power of rho. The spaces must share the manifold and order.
pub fn poincare_sweep<T: Scalar>(
    spaces: &[&SplineSpace<T>],
    g: &SpectralVector<T>,
    m: u32,
) -> Result<ScalingFit> {
    let mut samples = Vec::new();
    for space in spaces {
        let ratio = poincare_ratio(space, g, m)?;
        if ratio > 0.0 {
            samples.push((space.set.rho, ratio));
        }
    }
    fit_loglog("rho", &samples)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ExponentiationRow {
    pub m: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// (rhs - lhs) / rhs; negative would be a violation.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ExponentiationReport {
    /// Sharp constant ||f|| / ||Delta^s f|| over the mean-free part.
    pub a: f64,
    /// True when f has no nonzero-frequency content, making the
    /// hypothesis norm zero and the inequality vacuous.
    pub vacuous: bool,
    pub rows: Vec<ExponentiationRow>,
    pub all_pass: bool,
}

pub const EXPONENTIATION_SLACK: f64 = 1e-10;

/// Verifies ||Delta^t f|| <= a^m ||Delta^{ms+t} f|| for m = 2^l, l <= l_max,
/// with the sharp a. Holds for every finite spectral vector by moment
/// log-convexity; failures beyond the relative slack indicate a bug.
pub fn exponentiation_check<T: Scalar>(
    f: &SpectralVector<T>,
    s: f64,
    t: f64,
    l_max: u32,
) -> Result<ExponentiationReport> {
    if !(s > 0.0) || !(t >= 0.0) {
        return Err(Error::Parameter(format!(
            "exponentiation check needs s > 0 and t >= 0, got s={s}, t={t}"
        )));
    }
    if f.is_zero() {
        return Err(Error::Parameter(
            "exponentiation check needs a nonzero f".into(),
        ));
    }
    // constants are annihilated by every positive power of Delta; the
    // inequality concerns the mean-free part
    let g = SpectralVector::from_terms(T::zero(), f.terms.clone());
    let g_norm = g.laplacian_norm(0.0).as_f64();
    let denom = g.laplacian_norm(s).as_f64();
    if g_norm == 0.0 || denom == 0.0 {
        return Ok(ExponentiationReport {
            a: f64::NAN,
            vacuous: true,
            rows: Vec::new(),
            all_pass: true,
        });
    }
    let a = g_norm / denom;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for l in 0..=l_max {
        let m = 1u32 << l;
        let lhs = g.laplacian_norm(t).as_f64();
        let rhs = a.powi(m as i32) * g.laplacian_norm(m as f64 * s + t).as_f64();
        let slack = (rhs - lhs) / rhs.max(1e-300);
        let pass = lhs <= rhs * (1.0 + EXPONENTIATION_SLACK);
        all_pass &= pass;
        rows.push(ExponentiationRow {
            m,
            lhs,
            rhs,
            slack,
            pass,
        });
    }
    Ok(ExponentiationReport {
        a,
        vacuous: false,
        rows,
        all_pass,
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RateRow {
    pub k: u32,
    /// ||Delta^t (s_k(f) - f)|| / ||Delta^k f||.
    pub err: f64,
    /// Probe-grid sup of |s_k(f) - f|, reported alongside, unnormalized.
    pub sup_err: f64,
    /// err this small means f is in the space at this k; excluded from fits.
    pub excluded: bool,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ApproximationReport {
    pub rho: f64,
    pub t: f64,
    pub rows: Vec<RateRow>,
    /// Fitted geometric base of err over (k - d); the model base is
    /// C(M) rho^2.
    pub fit: Option<ScalingFit>,
    pub fitted_base: Option<f64>,
    pub fitted_c: Option<f64>,
    /// rho below which the fitted base drops under 1.
    pub empirical_rho_threshold: Option<f64>,
    /// Conditioning failures truncate the schedule; each is recorded.
    pub warnings: Vec<String>,
}

/// Interpolation error rate over an order schedule at fixed nodes.
pub fn approximation_rate<T: Scalar>(
    set: &AdmissibleSet,
    k_schedule: &[u32],
    f: &SpectralVector<T>,
    t: f64,
    policy: CutoffPolicy,
) -> Result<ApproximationReport> {
    let d = set.manifold.dimension;
    if t > d as f64 {
        return Err(Error::Parameter(format!(
            "error norm order t = {t} exceeds the manifold dimension {d}"
        )));
    }
    if k_schedule.is_empty() {
        return Err(Error::Parameter("order schedule must be nonempty".into()));
    }
    let grid = dense_grid(&set.manifold, 10_000);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &k in k_schedule {
        let space = match SplineSpace::<T>::build(set, k, policy) {
            Ok(s) => s,
            Err(e @ (Error::IllConditioned { .. } | Error::NotPositiveDefinite { .. })) => {
                warnings.push(format!("k = {k} dropped: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let (_, sf) = space.interpolate_function(f)?;
        let diff = sf.sub(f);
        let denom = f.laplacian_norm(k as f64).as_f64();
        if denom == 0.0 {
            return Err(Error::Parameter(
                "rate check needs f with nonzero-frequency content".into(),
            ));
        }
        let err = diff.laplacian_norm(t).as_f64() / denom;
        let sup_err = diff
            .to_f64()
            .evaluate_batch(&set.manifold, &grid)?
            .into_iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        rows.push(RateRow {
            k,
            err,
            sup_err,
            excluded: err <= reproduction_floor::<T>(),
        });
    }
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r.excluded)
        .map(|r| (r.k as f64 - d as f64, r.err))
        .collect();
    let fit = fit_semilog("k", &samples).ok();
    let fitted_base = fit.as_ref().map(|f| f.exponent.exp());
    let fitted_c = fitted_base.map(|b| b / (set.rho * set.rho));
    let empirical_rho_threshold = fitted_c.map(|c| c.recip().sqrt());
    Ok(ApproximationReport {
        rho: set.rho,
        t,
        rows,
        fit,
        fitted_base,
        fitted_c,
        empirical_rho_threshold,
        warnings,
    })
}
