//! Fully normalized associated Legendre functions, with the spherical
//! harmonic normalization baked in: Y_{l,0}(theta, .) = Pbar_l^0(cos theta)
//! and the real harmonics are sqrt(2) Pbar_l^m times cos/sin(m phi).
//!
//! The three-term recurrences below work entirely on normalized values, so
//! no factorials or overflow-prone intermediates appear; they are stable to
//! degrees far beyond the cap used by the sphere model.

use crate::scalar::Scalar;

/// Index into a packed lower-triangular table of (l, m), m <= l.
pub fn tri_index(l: u32, m: u32) -> usize {
    debug_assert!(m <= l);
    (l as usize * (l as usize + 1)) / 2 + m as usize
}

fn seed<T: Scalar>() -> T {
    // 1/sqrt(4 pi)
    (T::of(4.0) * T::PI()).sqrt().recip()
}

/// Diagonal step Pbar_m^m -> Pbar_{m+1}^{m+1} factor times sin(theta).
fn diag_step<T: Scalar>(m: u32) -> T {
    let mm = T::of(m as f64);
    -(((T::of(2.0) * mm) + T::one()) / (T::of(2.0) * mm)).sqrt()
}

fn a_coef<T: Scalar>(l: u32, m: u32) -> T {
    let lf = T::of(l as f64);
    let mf = T::of(m as f64);
    ((T::of(4.0) * lf * lf - T::one()) / (lf * lf - mf * mf)).sqrt()
}

fn b_coef<T: Scalar>(l: u32, m: u32) -> T {
    let lf = T::of(l as f64);
    let mf = T::of(m as f64);
    let lm1 = lf - T::one();
    (((T::of(2.0) * lf + T::one()) * (lm1 * lm1 - mf * mf))
        / ((T::of(2.0) * lf - T::of(3.0)) * (lf * lf - mf * mf)))
        .sqrt()
}

/// Pbar_l^m(cos theta) for a single (l, m), given ct = cos theta and
/// st = sin theta >= 0.
pub fn normalized_assoc_legendre<T: Scalar>(l: u32, m: u32, ct: T, st: T) -> T {
    debug_assert!(m <= l);
    let mut pmm = seed::<T>();
    for k in 1..=m {
        pmm = diag_step::<T>(k) * st * pmm;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mf = T::of(m as f64);
    let mut curr = (T::of(2.0) * mf + T::of(3.0)).sqrt() * ct * pmm;
    for ll in (m + 2)..=l {
        let next = a_coef::<T>(ll, m) * ct * curr - b_coef::<T>(ll, m) * prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// All Pbar_l^m for l <= l_max in one pass, packed by `tri_index`.
pub fn normalized_assoc_legendre_table<T: Scalar>(l_max: u32, ct: T, st: T) -> Vec<T> {
    let n = tri_index(l_max, l_max) + 1;
    let mut p = vec![T::zero(); n];
    p[0] = seed::<T>();
    for m in 1..=l_max {
        p[tri_index(m, m)] = diag_step::<T>(m) * st * p[tri_index(m - 1, m - 1)];
    }
    for m in 0..l_max {
        let mf = T::of(m as f64);
        p[tri_index(m + 1, m)] = (T::of(2.0) * mf + T::of(3.0)).sqrt() * ct * p[tri_index(m, m)];
        for l in (m + 2)..=l_max {
            p[tri_index(l, m)] = a_coef::<T>(l, m) * ct * p[tri_index(l - 1, m)]
                - b_coef::<T>(l, m) * p[tri_index(l - 2, m)];
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    #[test]
    fn low_degree_closed_forms() {
        // Pbar_0^0 = 1/sqrt(4 pi); Pbar_1^0 = sqrt(3/(4 pi)) x;
        // Pbar_1^1 = -sqrt(3/(8 pi)) sin; Pbar_2^0 = sqrt(5/(16 pi)) (3x^2 - 1).
        let fourpi = 4.0 * std::f64::consts::PI;
        for &theta in &[0.0, 0.4, 1.1, 2.0, std::f64::consts::PI] {
            let (st, ct) = theta.sin_cos();
            let st = st.abs();
            assert!(
                (normalized_assoc_legendre::<f64>(0, 0, ct, st) - 1.0 / fourpi.sqrt()).abs()
                    < 1e-15
            );
            assert!(
                (normalized_assoc_legendre::<f64>(1, 0, ct, st) - (3.0 / fourpi).sqrt() * ct).abs()
                    < 1e-15
            );
            assert!(
                (normalized_assoc_legendre::<f64>(1, 1, ct, st)
                    + (3.0 / (2.0 * fourpi)).sqrt() * st)
                    .abs()
                    < 1e-15
            );
            assert!(
                (normalized_assoc_legendre::<f64>(2, 0, ct, st)
                    - (5.0 / (4.0 * fourpi)).sqrt() * (3.0 * ct * ct - 1.0))
                    .abs()
                    < 1e-14
            );
        }
    }

    #[test]
    fn table_agrees_with_single_path() {
        let (ct, st) = (0.37f64, (1.0 - 0.37f64 * 0.37).sqrt());
        let table = normalized_assoc_legendre_table::<f64>(20, ct, st);
        for l in 0..=20u32 {
            for m in 0..=l {
                let single = normalized_assoc_legendre::<f64>(l, m, ct, st);
                assert!(
                    (single - table[tri_index(l, m)]).abs() < 1e-13 * (1.0 + single.abs()),
                    "l={l} m={m}"
                );
            }
        }
    }

    /// Orthonormality in l at fixed m under Gauss-type quadrature would
    /// repeat the manifold tests; instead check the addition theorem:
    /// sum_m Ybar_{l,m}(x)^2 = (2l+1)/(4 pi) pointwise (independent of x).
    #[test]
    fn addition_theorem() {
        for &theta in &[0.2f64, 0.9, 1.8, 3.0] {
            let (st, ct) = theta.sin_cos();
            let st = st.abs();
            let table = normalized_assoc_legendre_table::<f64>(40, ct, st);
            for l in [0u32, 1, 5, 17, 40] {
                let mut s = table[tri_index(l, 0)].powi(2);
                for m in 1..=l {
                    // the two real harmonics at +/-m contribute
                    // 2 Pbar^2 (cos^2 + sin^2)/2 each... i.e. 2 Pbar^2 total
                    s += 2.0 * table[tri_index(l, m)].powi(2);
                }
                let want = (2.0 * l as f64 + 1.0) / (4.0 * std::f64::consts::PI);
                assert!(
                    (s - want).abs() < 1e-12 * want,
                    "l={l} theta={theta}: {s} vs {want}"
                );
            }
        }
    }

    #[test]
    fn generic_scalar_matches_f64() {
        let theta = 1.234f64;
        let (st, ct) = theta.sin_cos();
        let f = normalized_assoc_legendre::<f64>(13, 7, ct, st);
        let d = normalized_assoc_legendre::<Dd>(13, 7, Dd::from_f64(ct), Dd::from_f64(st));
        assert!((f - d.to_f64()).abs() < 1e-13 * f.abs());
    }

    #[test]
    fn high_degree_stays_bounded() {
        // normalized values satisfy |Pbar_l^m| <= sqrt((2l+1)/(4 pi))
        let (ct, st) = (0.1f64, (1.0 - 0.01f64).sqrt());
        let table = normalized_assoc_legendre_table::<f64>(200, ct, st);
        let bound = (401.0 / (4.0 * std::f64::consts::PI)).sqrt();
        for v in table {
            assert!(v.is_finite() && v.abs() <= bound * 1.000001);
        }
    }
}
