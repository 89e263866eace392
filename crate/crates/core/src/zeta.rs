//! Spectral zeta functions: the exact series over the manifold spectrum,
//! its finite-dimensional counterpart over a Ritz spectrum, and the sweep
//! comparing the two along a shrinking-density schedule.
//!
//! All bases are positive reals, so complex powers use the principal
//! branch without ambiguity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldModel};
use crate::pointset::AdmissibleSet;
use crate::ritz::{ritz_eigenvalues, RitzResult};
use crate::scalar::Scalar;
use crate::spline::{CutoffPolicy, SplineSpace};

/// Hard margin above the convergence abscissa d/2 demanded of every
/// exact-series evaluation, so tail bounds stay controllable.
pub const DOMAIN_MARGIN: f64 = 0.1;

/// values[1] scaled by this gives the threshold under which a Ritz value
/// counts as the zero mode.
pub const ZERO_TOL_FACTOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct ZetaEval {
    pub s: Complex64,
    pub value: Complex64,
    /// Series cutoff the truncation stopped at: max frequency, lattice
    /// radius, or degree for exact sums; term count for discrete sums.
    pub truncation_level: f64,
    /// Rigorous bound on the part of the series beyond the cutoff that the
    /// closed-form corrections do not already account for; 0 for finite sums.
    pub tail_bound: f64,
}

/// Convergence abscissa d/2; the series is evaluated only at
/// Re s >= d/2 + DOMAIN_MARGIN (up to an epsilon so the boundary value
/// itself is accepted).
pub fn domain_abscissa(manifold: &ManifoldModel) -> f64 {
    manifold.dimension as f64 / 2.0 + DOMAIN_MARGIN
}

fn check_domain(manifold: &ManifoldModel, s: Complex64) -> Result<()> {
    let abscissa = domain_abscissa(manifold);
    if s.re < abscissa - 1e-12 {
        return Err(Error::ZetaDomain { re: s.re, abscissa });
    }
    Ok(())
}

/// Complex power with a positive real base.
fn powc(base: f64, e: Complex64) -> Complex64 {
    debug_assert!(base > 0.0);
    (e * base.ln()).exp()
}

/// Riemann zeta at w = 2s via Euler-Maclaurin through the third Bernoulli
/// correction: sum_{m<=M} m^{-w} + M^{1-w}/(w-1) + M^{-w}/2
/// + sum_j B_{2j}/(2j)! (w)_{2j-1} M^{-w-2j+1}. The remainder is bounded
/// by the first omitted term inflated by |w+7|/(Re w+7).
fn riemann_zeta_em(w: Complex64, tol: f64) -> Result<(Complex64, f64, f64)> {
    const B: [f64; 3] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0];
    let mut m_cut = 50usize;
    loop {
        // remainder term: B8/8! * prod_{i=0}^{6} (w+i) * M^{-w-7}
        let mut prod = Complex64::new(1.0, 0.0);
        for i in 0..7 {
            prod *= w + i as f64;
        }
        let b8_over_f8 = (1.0 / 30.0) / 40_320.0;
        let m = m_cut as f64;
        let bound =
            b8_over_f8 * prod.norm() * m.powf(-w.re - 7.0) * (w + 7.0).norm() / (w.re + 7.0);
        if bound <= tol {
            let mut sum = Complex64::new(0.0, 0.0);
            for i in 1..=m_cut {
                sum += powc(i as f64, -w);
            }
            sum += powc(m, 1.0 - w) / (w - 1.0);
            sum -= powc(m, -w) / 2.0;
            // rising factorial (w)(w+1)...(w+2j-2), extended per term
            let mut rising = Complex64::new(1.0, 0.0);
            let mut shift = 0usize;
            for (j, b) in B.iter().enumerate() {
                let order = 2 * (j + 1);
                while shift < order - 1 {
                    rising *= w + shift as f64;
                    shift += 1;
                }
                sum += (b / fact(order)) * rising * powc(m, -w - (order as f64 - 1.0));
            }
            return Ok((sum, m, bound));
        }
        if m_cut > 1_000_000 {
            return Err(Error::Parameter(format!(
                "zeta tail tolerance {tol:e} unreachable at Re w = {}; best bound {bound:e}",
                w.re
            )));
        }
        m_cut *= 2;
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Torus lattice sum over the Euclidean ball |n| <= R plus the radial
/// integral of the Weyl density over |x| > R; what remains is the
/// lattice-count fluctuation, bounded by shell cells around the sphere.
fn torus_zeta_lattice(d: u32, s: Complex64, tol: f64) -> Result<(Complex64, f64, f64)> {
    let sqrt_d = (d as f64).sqrt();
    // |N(r) - V_d r^d| <= A_d (r + sqrt(d))^{d-1} from cells straddling
    // the sphere; integration by parts spends it at the rate below
    let a_d = match d {
        2 => std::f64::consts::PI * 2.0 * 2.0 * std::f64::consts::SQRT_2,
        3 => (4.0 * std::f64::consts::PI / 3.0) * 3.0 * 2.0 * 3.0f64.sqrt(),
        _ => unreachable!("lattice path is for d in {{2, 3}}"),
    };
    let s_d = match d {
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    };
    let u = s.re;
    let r_cap = if d == 2 { 4096.0 } else { 192.0 };
    let mut r = 8.0 * sqrt_d;
    let fluct = |r: f64| {
        a_d * (1.0 + sqrt_d / r).powi(d as i32 - 1)
            * r.powf(d as f64 - 1.0 - 2.0 * u)
            * (1.0 + 2.0 * s.norm() / (2.0 * u - d as f64 + 1.0))
    };
    while fluct(r) > tol {
        if r >= r_cap {
            return Err(Error::Parameter(format!(
                "zeta tail tolerance {tol:e} unreachable on the {d}-torus at Re s = {u}; \
                 best bound {:e} at lattice radius {r_cap}",
                fluct(r_cap)
            )));
        }
        r = (r * 2.0).min(r_cap);
    }
    let bound = fluct(r);
    let r_int = r.ceil() as i64;
    let r2 = r * r;
    let mut sum = Complex64::new(0.0, 0.0);
    // radial multiplicity table: values of |n|^2 are integers <= r^2
    let mut counts = vec![0u64; (r2.floor() as usize) + 1];
    let mut n = vec![-r_int; d as usize];
    'outer: loop {
        let q: i64 = n.iter().map(|&c| c * c).sum();
        if q > 0 && (q as f64) <= r2 {
            counts[q as usize] += 1;
        }
        for axis in 0..d as usize {
            n[axis] += 1;
            if n[axis] <= r_int {
                continue 'outer;
            }
            n[axis] = -r_int;
        }
        break;
    }
    for (q, &count) in counts.iter().enumerate().skip(1) {
        if count > 0 {
            sum += count as f64 * powc(q as f64, -s);
        }
    }
    sum += s_d * powc(r, d as f64 - 2.0 * s) / (2.0 * s - d as f64);
    Ok((sum, r, bound))
}

/// Sphere series: degrees up to L summed directly, the rest replaced by
/// the exact integral of (2x+1)(x(x+1))^{-s} from L+1/2, which is the
/// midpoint rule; its error is spent through the integrand's derivatives.
fn sphere_zeta(s: Complex64, tol: f64) -> Result<(Complex64, f64, f64)> {
    let u = s.re;
    let bound = |l: f64| {
        let mu = l + 0.5;
        let p = mu * (mu + 1.0);
        let lin = 2.0 * mu + 1.0;
        let g1 = p.powf(-u) * (2.0 + s.norm() * lin * lin / p);
        let g2 =
            p.powf(-u - 1.0) * lin * (s.norm() * (s.norm() + 1.0) * lin * lin / p + 4.0 * s.norm());
        (g1 + g2) / 12.0
    };
    let mut l_cut = 32usize;
    while bound(l_cut as f64) > tol {
        if l_cut > 4_000_000 {
            return Err(Error::Parameter(format!(
                "zeta tail tolerance {tol:e} unreachable on the sphere at Re s = {u}; \
                 best bound {:e}",
                bound(l_cut as f64)
            )));
        }
        l_cut *= 2;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 1..=l_cut {
        let lf = l as f64;
        sum += (2.0 * lf + 1.0) * powc(lf * (lf + 1.0), -s);
    }
    let mu = l_cut as f64 + 0.5;
    sum += powc(mu * (mu + 1.0), 1.0 - s) / (s - 1.0);
    Ok((sum, l_cut as f64, bound(l_cut as f64)))
}

/// The spectral zeta function sum_{lambda_i != 0} lambda_i^{-s} with
/// multiplicities, truncated so the remaining tail is below tail_tol.
pub fn zeta_exact(manifold: &ManifoldModel, s: Complex64, tail_tol: f64) -> Result<ZetaEval> {
    check_domain(manifold, s)?;
    if !(tail_tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tail tolerance must be positive, got {tail_tol}"
        )));
    }
    let (value, truncation_level, tail_bound) = match manifold.kind {
        // eigenvalues m^2, each twice: 2 zeta_R(2s)
        ManifoldKind::Circle | ManifoldKind::FlatTorus { d: 1 } => {
            let (z, m, b) = riemann_zeta_em(2.0 * s, tail_tol / 2.0)?;
            (2.0 * z, m, 2.0 * b)
        }
        ManifoldKind::FlatTorus { d } => torus_zeta_lattice(d, s, tail_tol)?,
        ManifoldKind::Sphere2 => sphere_zeta(s, tail_tol)?,
    };
    Ok(ZetaEval {
        s,
        value,
        truncation_level,
        tail_bound,
    })
}

/// Finite sum over the nonzero part of a Ritz spectrum. The zero mode is
/// identified relative to the second value (the first nonzero eigenvalue
/// of every connected manifold).
pub fn zeta_discrete<T: Scalar>(ritz: &RitzResult<T>, s: Complex64) -> Result<ZetaEval> {
    let values = ritz.values_f64();
    if values.len() < 2 {
        return Err(Error::DegenerateSpectrum { zero_tol: 0.0 });
    }
    let zero_tol = ZERO_TOL_FACTOR * values[1];
    let survivors: Vec<f64> = values.iter().copied().filter(|&v| v > zero_tol).collect();
    if survivors.is_empty() {
        return Err(Error::DegenerateSpectrum { zero_tol });
    }
    let mut value = Complex64::new(0.0, 0.0);
    for &v in &survivors {
        value += powc(v, -s);
    }
    Ok(ZetaEval {
        s,
        value,
        truncation_level: survivors.len() as f64,
        tail_bound: 0.0,
    })
}

#[derive(Clone, Debug)]
pub struct ZetaSweepRow {
    pub rho: f64,
    pub n_nodes: usize,
    pub k: u32,
    pub s: Complex64,
    pub exact: Complex64,
    pub discrete: Complex64,
    pub abs_error: f64,
}

#[derive(Clone, Debug)]
pub struct ZetaSweepReport {
    pub manifold: ManifoldKind,
    pub rows: Vec<ZetaSweepRow>,
    /// (rho, max over the s-grid of |zeta - zeta_discrete|), schedule order.
    pub sup_errors: Vec<(f64, f64)>,
    /// Largest consecutive increase allowed is 10%, room for
    /// discretization noise; vacuous for schedules shorter than 2.
    pub non_increasing: bool,
    pub failures: Vec<String>,
}

impl ZetaSweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "manifold,rho,n,k,re_s,im_s,re_zeta,im_zeta,re_zeta_discrete,im_zeta_discrete,abs_error\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.manifold,
                r.rho,
                r.n_nodes,
                r.k,
                r.s.re,
                r.s.im,
                r.exact.re,
                r.exact.im,
                r.discrete.re,
                r.discrete.im,
                r.abs_error
            ));
        }
        out
    }
}

/// For each rho, builds the spline space, computes the Ritz spectrum, and
/// measures the sup over the s-grid of |zeta - zeta_discrete|. The whole
/// grid is domain-checked before any expensive work.
pub fn zeta_convergence_sweep<T: Scalar>(
    manifold: &ManifoldModel,
    k: u32,
    rho_schedule: &[f64],
    s_grid: &[Complex64],
    seed: u64,
    policy: CutoffPolicy,
    tail_tol: f64,
) -> Result<ZetaSweepReport> {
    if rho_schedule.is_empty() || s_grid.is_empty() {
        return Err(Error::Parameter(
            "zeta sweep needs a nonempty rho schedule and s grid".into(),
        ));
    }
    for &s in s_grid {
        check_domain(manifold, s)?;
    }
    let exact: Vec<ZetaEval> = s_grid
        .iter()
        .map(|&s| zeta_exact(manifold, s, tail_tol))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut sup_errors = Vec::new();
    let mut failures = Vec::new();
    for &rho in rho_schedule {
        let cell = (|| -> Result<Vec<ZetaSweepRow>> {
            let set = AdmissibleSet::generate(manifold, rho, seed)?;
            let space = SplineSpace::<T>::build(&set, k, policy)?;
            let ritz = ritz_eigenvalues(&space)?;
            exact
                .iter()
                .map(|e| {
                    let disc = zeta_discrete(&ritz, e.s)?;
                    Ok(ZetaSweepRow {
                        rho,
                        n_nodes: set.nodes.len(),
                        k,
                        s: e.s,
                        exact: e.value,
                        discrete: disc.value,
                        abs_error: (e.value - disc.value).norm(),
                    })
                })
                .collect()
        })();
        match cell {
            Ok(cell_rows) => {
                let sup = cell_rows.iter().fold(0.0f64, |m, r| m.max(r.abs_error));
                sup_errors.push((rho, sup));
                rows.extend(cell_rows);
            }
            Err(e) => failures.push(format!("rho = {rho}: {e}")),
        }
    }
    let non_increasing = sup_errors.windows(2).all(|w| w[1].1 <= w[0].1 * 1.1);
    Ok(ZetaSweepReport {
        manifold: manifold.kind,
        rows,
        sup_errors,
        non_increasing,
        failures,
    })
}
