//! Rayleigh-Ritz over a polyharmonic spline space: the Lagrangian basis is
//! not orthonormal, so the min-max eigenvalues are those of the pencil
//! (A, B) with A the energy Gram and B the mass Gram. The matrix of
//! integrated-by-parts entries ("D") equals A by self-adjointness and is
//! assembled through a different floating path as a witness; its raw
//! eigenvalues are recorded separately since they are NOT the Ritz values
//! in a non-orthonormal basis.

use crate::error::{Error, Result};
use crate::linalg::{generalized_sym_eigen, sym_eigen, SymMatrix};
use crate::manifold::{enumerate_spectrum, ManifoldModel};
use crate::pointset::{dense_grid, AdmissibleSet};
use crate::scalar::Scalar;
use crate::spectral::SpectralVector;
use crate::spline::{CutoffPolicy, SplineSpace};

/// Relative threshold for dropping mass-matrix directions in the pencil.
pub const MASS_RANK_TOL: f64 = 1e-12;
/// Numerical-rank threshold (on singular values, relative) for the
/// projected band space dimension.
pub const PROJECTED_RANK_TOL: f64 = 1e-6;
/// Probe-grid size floor for sup-norm error estimation.
pub const SUP_GRID_FLOOR: usize = 10_000;

#[derive(Clone, Debug, serde::Serialize)]
pub struct RitzDiagnostics {
    pub scalar: &'static str,
    pub cutoff: f64,
    pub tail_bound: f64,
    pub condition_estimate: f64,
    pub max_lagrange_residual: f64,
    /// max |D - A| relative to max |A|; self-adjointness witness.
    pub d_matrix_agreement: f64,
}

pub struct RitzResult<T: Scalar> {
    pub energy_matrix: SymMatrix<T>,
    pub mass_matrix: SymMatrix<T>,
    pub d_matrix: SymMatrix<T>,
    /// Pencil eigenvalues ascending, kept in working precision: the
    /// interesting quantity is the gap over an exact eigenvalue, which can
    /// sit far below f64 resolution relative to the eigenvalue itself.
    pub ritz_values: Vec<T>,
    /// Eigenvalues of D alone, for comparison against the pencil values.
    pub raw_d_values: Vec<f64>,
    pub effective_rank: usize,
    pub diagnostics: RitzDiagnostics,
}

impl<T: Scalar> RitzResult<T> {
    pub fn values_f64(&self) -> Vec<f64> {
        self.ritz_values.iter().map(|v| v.as_f64()).collect()
    }
}

pub struct Assembled<T: Scalar> {
    pub energy: SymMatrix<T>,
    pub mass: SymMatrix<T>,
    pub d_matrix: SymMatrix<T>,
}

/// Gram matrices of the Lagrangian basis in spectral coordinates:
/// A through sqrt-weights on both sides (PSD by construction), B from the
/// plain coefficients plus the constant-mode outer product, D through
/// one-sided eigenvalue weights.
pub fn assemble<T: Scalar>(space: &SplineSpace<T>) -> Result<Assembled<T>> {
    let c = &space.coeff;
    let sqrt_w: Vec<T> = space.lambdas.iter().map(|&l| T::of(l).sqrt()).collect();
    let full_w: Vec<T> = space.lambdas.iter().map(|&l| T::of(l)).collect();

    let mut sc = c.clone();
    sc.scale_rows(&sqrt_w);
    let energy = SymMatrix::from_mat(sc.tr_mul(&sc))?;

    let mut lc = c.clone();
    lc.scale_rows(&full_w);
    let d_matrix = SymMatrix::from_mat(c.tr_mul(&lc))?;

    let mut mass_raw = c.tr_mul(c);
    let n = space.n();
    for g in 0..n {
        let cg = space.coeff_const[g];
        for nu in 0..n {
            mass_raw[(g, nu)] += cg * space.coeff_const[nu];
        }
    }
    let mass = SymMatrix::from_mat(mass_raw)?;

    Ok(Assembled {
        energy,
        mass,
        d_matrix,
    })
}

pub fn ritz_eigenvalues<T: Scalar>(space: &SplineSpace<T>) -> Result<RitzResult<T>> {
    let asm = assemble(space)?;
    let gen = generalized_sym_eigen(&asm.energy, &asm.mass, MASS_RANK_TOL).map_err(|e| {
        match e {
            // attach the spline-space conditioning context
            Error::MassNotPsd {
                min_eigenvalue,
                tol,
            } => Error::IllConditioned {
                k: space.k,
                n: space.n(),
                scalar: T::NAME,
                residual: min_eigenvalue.abs(),
                gate: tol,
                condition: space.condition_estimate,
            },
            other => other,
        }
    })?;

    let values = gen.eigenvalues;
    if values.len() >= 2 {
        let zero_gate = values[1].as_f64().abs() * 1e-8;
        if values[0].as_f64().abs() > zero_gate.max(1e-300) {
            return Err(Error::Precondition(format!(
                "constant mode did not produce a zero Ritz value: {:.3e} vs gate {:.3e}",
                values[0].as_f64(),
                zero_gate
            )));
        }
    }

    let (raw, _) = sym_eigen(&asm.d_matrix)?;
    let raw_d_values: Vec<f64> = raw.iter().map(|v| v.as_f64()).collect();

    let mut dev = T::zero();
    for i in 0..asm.energy.n {
        for j in 0..asm.energy.n {
            dev = dev.max((asm.d_matrix.at(i, j) - asm.energy.at(i, j)).abs());
        }
    }
    let a_scale = asm.energy.mat.max_abs().as_f64().max(1e-300);
    let diagnostics = RitzDiagnostics {
        scalar: T::NAME,
        cutoff: space.cutoff,
        tail_bound: space.tail_bound,
        condition_estimate: space.condition_estimate,
        max_lagrange_residual: space.max_lagrange_residual,
        d_matrix_agreement: dev.as_f64() / a_scale,
    };

    Ok(RitzResult {
        energy_matrix: asm.energy,
        mass_matrix: asm.mass,
        d_matrix: asm.d_matrix,
        ritz_values: values,
        raw_d_values,
        effective_rank: gen.effective_rank,
        diagnostics,
    })
}

/// Exact eigenvalues with multiplicity, ascending, zero included, up to and
/// including omega.
pub fn exact_eigenvalues_upto(manifold: &ManifoldModel, omega: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for level in enumerate_spectrum(manifold, omega)? {
        for _ in 0..level.multiplicity {
            out.push(level.eigenvalue);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CellRecord {
    pub rho: f64,
    pub n_nodes: usize,
    pub k: u32,
    /// 1-based index into the exact spectrum including the zero mode, so
    /// the first nonzero eigenvalue is j = 2.
    pub j: usize,
    pub lambda_exact: f64,
    pub lambda_ritz: f64,
    /// lambda_ritz - lambda_exact, computed in working precision before
    /// rounding; may sit far below eps * lambda_exact.
    pub gap: f64,
    /// omega^{2d} (C0_hat rho^2 omega)^{2(k-d)} with the fitted constant.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CellFailure {
    pub rho: f64,
    pub k: u32,
    pub message: String,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ConvergenceReport {
    pub manifold: String,
    pub omega: f64,
    pub rho_schedule: Vec<f64>,
    pub k_schedule: Vec<u32>,
    pub records: Vec<CellRecord>,
    pub failures: Vec<CellFailure>,
    /// Fitted constant of the gap model, pooled geometrically over the
    /// per-rho least-squares fits of log gap against (k - d).
    pub c0_hat: Option<f64>,
    pub fit_residual: Option<f64>,
    pub gaps_monotone_in_k: bool,
    pub gaps_monotone_in_rho: bool,
    /// Index (j) of the tracked eigenvalue: the top of the requested band,
    /// where the gap stays well above the floating-point floor. Low modes
    /// converge so fast they saturate at rounding level.
    pub tracked_j: usize,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("manifold,rho,n,k,j,lambda_exact,lambda_ritz,gap,bound\n");
        for r in &self.records {
            let bound = r.bound.map(|b| format!("{:.16e}", b)).unwrap_or_default();
            out.push_str(&format!(
                "{},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{}\n",
                self.manifold,
                r.rho,
                r.n_nodes,
                r.k,
                r.j,
                r.lambda_exact,
                r.lambda_ritz,
                r.gap,
                bound
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Tracked-eigenvalue gap for one study cell, if that cell succeeded.
    pub fn tracked_gap(&self, rho: f64, k: u32) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.rho == rho && r.k == k && r.j == self.tracked_j)
            .map(|r| r.gap)
    }
}

/// Plain least squares of y against x; returns (intercept, slope, rms).
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
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

/// Runs the (rho, k) grid: builds each node set once per rho, assembles and
/// solves each cell, records per-eigenvalue gaps over the band [0, omega],
/// and fits the gap model on the tracked band-edge eigenvalue.
pub fn convergence_study<T: Scalar>(
    manifold: &ManifoldModel,
    omega: f64,
    rho_schedule: &[f64],
    k_schedule: &[u32],
    seed: u64,
    policy: CutoffPolicy,
) -> Result<ConvergenceReport> {
    if !(omega > 0.0) {
        return Err(Error::Parameter(format!("omega must be > 0, got {omega}")));
    }
    if rho_schedule.is_empty() || k_schedule.is_empty() {
        return Err(Error::Parameter(
            "rho and k schedules must be nonempty".into(),
        ));
    }
    let exact = exact_eigenvalues_upto(manifold, omega)?;
    let tracked_j = exact.len();
    let d = manifold.dimension;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for &rho in rho_schedule {
        let set = match AdmissibleSet::generate(manifold, rho, seed) {
            Ok(s) => s,
            Err(e) => {
                for &k in k_schedule {
                    failures.push(CellFailure {
                        rho,
                        k,
                        message: e.to_string(),
                    });
                }
                continue;
            }
        };
        for &k in k_schedule {
            let cell =
                SplineSpace::<T>::build(&set, k, policy).and_then(|space| ritz_eigenvalues(&space));
            match cell {
                Ok(ritz) => {
                    for (idx, &lambda) in exact.iter().enumerate().skip(1) {
                        if idx >= ritz.ritz_values.len() {
                            failures.push(CellFailure {
                                rho,
                                k,
                                message: format!(
                                    "band index {} beyond retained rank {}",
                                    idx + 1,
                                    ritz.ritz_values.len()
                                ),
                            });
                            break;
                        }
                        let rv = ritz.ritz_values[idx];
                        let gap = (rv - T::of(lambda)).as_f64();
                        records.push(CellRecord {
                            rho,
                            n_nodes: set.nodes.len(),
                            k,
                            j: idx + 1,
                            lambda_exact: lambda,
                            lambda_ritz: rv.as_f64(),
                            gap,
                            bound: None,
                        });
                    }
                }
                Err(e) => failures.push(CellFailure {
                    rho,
                    k,
                    message: e.to_string(),
                }),
            }
        }
    }

    // per-rho least squares of log gap (tracked j) against (k - d)
    let mut log_c0 = Vec::new();
    let mut worst_residual: Option<f64> = None;
    for &rho in rho_schedule {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in records
            .iter()
            .filter(|r| r.rho == rho && r.j == tracked_j && r.gap > 0.0)
        {
            xs.push(r.k as f64 - d as f64);
            ys.push(r.gap.ln());
        }
        if xs.len() >= 2 {
            let (_, slope, rms) = line_fit(&xs, &ys);
            let gamma = (slope / 2.0).exp();
            log_c0.push((gamma / (rho * rho * omega)).ln());
            worst_residual = Some(worst_residual.map_or(rms, |w: f64| w.max(rms)));
        }
    }
    let c0_hat = if log_c0.is_empty() {
        None
    } else {
        Some((log_c0.iter().sum::<f64>() / log_c0.len() as f64).exp())
    };
    if let Some(c0) = c0_hat {
        for r in &mut records {
            let gamma = c0 * r.rho * r.rho * omega;
            r.bound = Some(omega.powi(2 * d as i32) * gamma.powi(2 * (r.k as i32 - d as i32)));
        }
    }

    // monotonicity of the tracked gap along each regime
    let tracked = |rho: f64, k: u32| -> Option<f64> {
        records
            .iter()
            .find(|r| r.rho == rho && r.k == k && r.j == tracked_j)
            .map(|r| r.gap)
    };
    let mut mono_k = true;
    for &rho in rho_schedule {
        let gaps: Vec<f64> = k_schedule.iter().filter_map(|&k| tracked(rho, k)).collect();
        mono_k &= gaps.windows(2).all(|w| w[1] < w[0]);
    }
    let mut mono_rho = true;
    for &k in k_schedule {
        let gaps: Vec<f64> = rho_schedule
            .iter()
            .filter_map(|&rho| tracked(rho, k))
            .collect();
        mono_rho &= gaps.windows(2).all(|w| w[1] < w[0]);
    }

    Ok(ConvergenceReport {
        manifold: manifold.kind.to_string(),
        omega,
        rho_schedule: rho_schedule.to_vec(),
        k_schedule: k_schedule.to_vec(),
        records,
        failures,
        c0_hat,
        fit_residual: worst_residual,
        gaps_monotone_in_k: mono_k,
        gaps_monotone_in_rho: mono_rho,
        tracked_j,
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ReconstructionRow {
    pub j: usize,
    pub descriptor: String,
    pub lambda: f64,
    pub l2_error: f64,
    pub sup_error: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ReconstructionReport {
    pub rows: Vec<ReconstructionRow>,
    /// Numerical rank (relative singular-value tolerance 1e-6) of the
    /// interpolated band: equals band_dimension when reconstruction works.
    pub projected_rank: usize,
    pub band_dimension: usize,
}

impl ReconstructionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,descriptor,lambda,l2_error,sup_error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e}\n",
                r.j, r.descriptor, r.lambda, r.l2_error, r.sup_error
            ));
        }
        out
    }
}

/// Interpolates every exact eigenfunction with lambda <= omega and reports
/// spectral L2 and probe-grid sup errors plus the dimension of the
/// projected band space. Sup errors are measured in f64: they sit orders
/// of magnitude above f64 noise whenever they are interesting.
pub fn eigenfunction_reconstruction<T: Scalar>(
    space: &SplineSpace<T>,
    omega: f64,
) -> Result<ReconstructionReport> {
    if omega > space.cutoff {
        return Err(Error::Parameter(format!(
            "band omega = {omega} exceeds the space cutoff {}",
            space.cutoff
        )));
    }
    let manifold = space.manifold().clone();
    let grid = dense_grid(&manifold, SUP_GRID_FLOOR);
    let mut rows = Vec::new();
    let mut images: Vec<SpectralVector<T>> = Vec::new();
    let mut j = 0usize;
    for level in enumerate_spectrum(&manifold, omega)? {
        for desc in &level.basis_descriptors {
            j += 1;
            let f = if level.eigenvalue == 0.0 {
                SpectralVector::constant(T::one())
            } else {
                SpectralVector::mode(*desc)
            };
            let (_, s) = space.interpolate_function(&f)?;
            let diff = s.sub(&f);
            let l2 = diff.norm().as_f64();
            let sup = diff
                .to_f64()
                .evaluate_batch(&manifold, &grid)?
                .into_iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            rows.push(ReconstructionRow {
                j,
                descriptor: desc.to_string(),
                lambda: level.eigenvalue,
                l2_error: l2,
                sup_error: sup,
            });
            images.push(s);
        }
    }

    // numerical rank of the projected band via the Gram of the images
    let band = images.len();
    let mut gram = crate::linalg::Mat::<T>::zeros(band, band);
    for a in 0..band {
        for b in a..band {
            let v = images[a].dot(&images[b]);
            gram[(a, b)] = v;
            gram[(b, a)] = v;
        }
    }
    let (eigs, _) = sym_eigen(&SymMatrix::from_mat(gram)?)?;
    let max_sv = eigs
        .last()
        .map(|v| v.as_f64().max(0.0))
        .unwrap_or(0.0)
        .sqrt();
    let projected_rank = eigs
        .iter()
        .filter(|v| v.as_f64().max(0.0).sqrt() > PROJECTED_RANK_TOL * max_sv)
        .count();

    Ok(ReconstructionReport {
        rows,
        projected_rank,
        band_dimension: band,
    })
}
