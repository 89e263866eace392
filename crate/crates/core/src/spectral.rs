//! Truncated spectral representation of functions: a coefficient against
//! the normalized constant plus coefficients against the nonzero-eigenvalue
//! eigenfunctions up to a cutoff. All Sobolev-type norms reduce to diagonal
//! sums here, which is what makes the interpolation and Ritz identities
//! checkable without manifold quadrature.

use crate::error::{Error, Result};
use crate::manifold::{
    eval_eigenfunction, sphere_harmonics_table, EigenDescriptor, ManifoldKind, ManifoldModel,
    ManifoldPoint,
};
use crate::parallel;
use crate::scalar::Scalar;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// f = constant_coefficient * phi_0 + sum c_i phi_i, phi_0 = 1/sqrt(Vol).
/// Terms are (descriptor, exact eigenvalue, coefficient), sorted by
/// (eigenvalue, descriptor) with no duplicate descriptors.
#[derive(Clone, Debug)]
pub struct SpectralVector<T> {
    pub constant_coefficient: T,
    pub terms: Vec<(EigenDescriptor, f64, T)>,
}

impl<T: Scalar> SpectralVector<T> {
    pub fn zero() -> Self {
        SpectralVector {
            constant_coefficient: T::zero(),
            terms: vec![],
        }
    }

    pub fn constant(c: T) -> Self {
        SpectralVector {
            constant_coefficient: c,
            terms: vec![],
        }
    }

    /// Single eigenfunction with unit coefficient.
    pub fn mode(descriptor: EigenDescriptor) -> Self {
        let lambda = descriptor.lambda();
        if lambda == 0.0 {
            Self::constant(T::one())
        } else {
            SpectralVector {
                constant_coefficient: T::zero(),
                terms: vec![(descriptor, lambda, T::one())],
            }
        }
    }

    pub fn from_terms(constant_coefficient: T, mut terms: Vec<(EigenDescriptor, f64, T)>) -> Self {
        terms.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        terms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.2 += b.2;
                true
            } else {
                false
            }
        });
        terms.retain(|t| t.2 != T::zero());
        SpectralVector {
            constant_coefficient,
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant_coefficient == T::zero() && self.terms.is_empty()
    }

    /// L2 norm: sqrt(const^2 + sum c_i^2).
    pub fn norm(&self) -> T {
        let mut s = self.constant_coefficient * self.constant_coefficient;
        for (_, _, c) in &self.terms {
            s += *c * *c;
        }
        s.sqrt()
    }

    /// ||Delta^t f|| = sqrt(sum lambda_i^{2t} c_i^2) for t > 0; t = 0 is the
    /// plain norm (the constant survives only there).
    pub fn laplacian_norm(&self, t: f64) -> T {
        if t == 0.0 {
            return self.norm();
        }
        let mut s = T::zero();
        for (_, lambda, c) in &self.terms {
            let w = T::of(*lambda).powf(T::of(t));
            s += w * w * *c * *c;
        }
        s.sqrt()
    }

    /// Plain L2 inner product.
    pub fn dot(&self, other: &Self) -> T {
        let mut s = self.constant_coefficient * other.constant_coefficient;
        s += merged_sum(self, other, |_| T::one());
        s
    }

    /// <Delta^p f, Delta^p g> = sum lambda^{2p} c_i d_i (constants drop out
    /// for p > 0).
    pub fn energy_dot(&self, other: &Self, p: f64) -> T {
        if p == 0.0 {
            return self.dot(other);
        }
        merged_sum(self, other, |lambda| {
            let w = T::of(lambda).powf(T::of(p));
            w * w
        })
    }

    pub fn scale(&self, a: T) -> Self {
        SpectralVector {
            constant_coefficient: self.constant_coefficient * a,
            terms: self.terms.iter().map(|&(d, l, c)| (d, l, c * a)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, T::one(), -T::one())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one(), T::one())
    }

    /// a*self + b*other with term merging.
    pub fn combine(&self, other: &Self, a: T, b: T) -> Self {
        let mut terms: Vec<(EigenDescriptor, f64, T)> =
            self.terms.iter().map(|&(d, l, c)| (d, l, c * a)).collect();
        terms.extend(other.terms.iter().map(|&(d, l, c)| (d, l, c * b)));
        Self::from_terms(
            self.constant_coefficient * a + other.constant_coefficient * b,
            terms,
        )
    }

    /// Pointwise value; phases and the coefficient arithmetic run in T.
    pub fn evaluate(&self, manifold: &ManifoldModel, p: &ManifoldPoint) -> Result<T> {
        let mut v = self.constant_coefficient / T::of(manifold.volume).sqrt();
        for (d, _, c) in &self.terms {
            v += *c * eval_eigenfunction::<T>(manifold, d, p)?;
        }
        Ok(v)
    }

    /// Values at many points. On the sphere a per-point harmonics table
    /// makes the cost O(l_max^2) per point instead of O(l) per term.
    pub fn evaluate_batch(
        &self,
        manifold: &ManifoldModel,
        points: &[ManifoldPoint],
    ) -> Result<Vec<T>> {
        if manifold.kind != ManifoldKind::Sphere2 {
            return parallel::par_map(points.len(), |i| self.evaluate(manifold, &points[i]))
                .into_iter()
                .collect();
        }
        let mut l_max = 0u32;
        for (d, _, _) in &self.terms {
            match d {
                EigenDescriptor::SphereY { l, .. } => l_max = l_max.max(*l),
                other => {
                    return Err(Error::DescriptorMismatch {
                        descriptor: other.to_string(),
                        manifold: manifold.kind.to_string(),
                    })
                }
            }
        }
        let base = self.constant_coefficient / T::of(manifold.volume).sqrt();
        parallel::par_map(points.len(), |i| -> Result<T> {
            let ManifoldPoint::Sphere { xyz } = &points[i] else {
                return Err(Error::Dimension("expected a sphere point".into()));
            };
            let table = sphere_harmonics_table::<T>(l_max, xyz)?;
            let mut acc = base;
            for (d, _, c) in &self.terms {
                if let EigenDescriptor::SphereY { l, m } = d {
                    acc += *c * table[(*l * *l) as usize + (*m + *l as i32) as usize];
                }
            }
            Ok(acc)
        })
        .into_iter()
        .collect()
    }

    pub fn max_lambda(&self) -> f64 {
        self.terms.last().map(|t| t.1).unwrap_or(0.0)
    }

    pub fn to_f64(&self) -> SpectralVector<f64> {
        SpectralVector {
            constant_coefficient: self.constant_coefficient.as_f64(),
            terms: self
                .terms
                .iter()
                .map(|&(d, l, c)| (d, l, c.as_f64()))
                .collect(),
        }
    }
}

fn merged_sum<T: Scalar>(
    a: &SpectralVector<T>,
    b: &SpectralVector<T>,
    weight: impl Fn(f64) -> T,
) -> T {
    let mut s = T::zero();
    let mut j = 0usize;
    for (d, lambda, c) in &a.terms {
        while j < b.terms.len() && (b.terms[j].1, b.terms[j].0) < (*lambda, *d) {
            j += 1;
        }
        if j < b.terms.len() && b.terms[j].0 == *d {
            s += weight(*lambda) * *c * b.terms[j].2;
        }
    }
    s
}

/// Seeded random band-limited function: every eigenfunction with
/// 0 < lambda <= omega gets a uniform [-1, 1) coefficient, plus a constant
/// part when include_constant is set. The experiment drivers use these as
/// reproducible test functions.
pub fn random_band_limited<T: Scalar>(
    manifold: &ManifoldModel,
    omega: f64,
    seed: u64,
    include_constant: bool,
) -> Result<SpectralVector<T>> {
    let levels = crate::manifold::enumerate_spectrum(manifold, omega)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let constant = if include_constant {
        T::of(2.0 * rng.random::<f64>() - 1.0)
    } else {
        let _: f64 = rng.random();
        T::zero()
    };
    let mut terms = Vec::new();
    for level in levels.iter().filter(|l| l.eigenvalue > 0.0) {
        for d in &level.basis_descriptors {
            terms.push((*d, level.eigenvalue, T::of(2.0 * rng.random::<f64>() - 1.0)));
        }
    }
    if terms.is_empty() && !include_constant {
        return Err(Error::Parameter(format!(
            "no nonzero modes below omega = {omega} on {}",
            manifold.kind
        )));
    }
    Ok(SpectralVector::from_terms(constant, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldModel;

    #[test]
    fn norms_and_dots() {
        let m = EigenDescriptor::CircleCos { m: 2 };
        let n = EigenDescriptor::CircleSin { m: 3 };
        let f = SpectralVector::from_terms(3.0f64, vec![(m, 4.0, 2.0), (n, 9.0, 1.0)]);
        assert!((f.norm() - (9.0f64 + 4.0 + 1.0).sqrt()).abs() < 1e-15);
        // ||Delta f||^2 = 16*4 + 81*1
        assert!((f.laplacian_norm(1.0) - (64.0f64 + 81.0).sqrt()).abs() < 1e-12);
        // half power: lambda^1 weights
        assert!((f.laplacian_norm(0.5) - (4.0f64 * 4.0 + 9.0).sqrt()).abs() < 1e-12);

        let g = SpectralVector::from_terms(1.0f64, vec![(m, 4.0, 0.5)]);
        assert!((f.dot(&g) - (3.0 + 1.0)).abs() < 1e-15);
        assert!((f.energy_dot(&g, 1.0) - 16.0).abs() < 1e-12);

        let d = f.sub(&g);
        assert!((d.constant_coefficient - 2.0).abs() < 1e-15);
        assert_eq!(d.terms.len(), 2);
    }

    #[test]
    fn merging_and_cancellation() {
        let m = EigenDescriptor::CircleCos { m: 1 };
        let f = SpectralVector::from_terms(0.0f64, vec![(m, 1.0, 2.0)]);
        let g = SpectralVector::from_terms(0.0f64, vec![(m, 1.0, 2.0)]);
        let z = f.sub(&g);
        assert!(z.is_zero());
        let s = f.add(&g);
        assert_eq!(s.terms.len(), 1);
        assert_eq!(s.terms[0].2, 4.0);
    }

    #[test]
    fn evaluation_matches_hand_sum() {
        let c = ManifoldModel::circle();
        let f: SpectralVector<f64> = SpectralVector::from_terms(
            2.0,
            vec![
                (EigenDescriptor::CircleCos { m: 1 }, 1.0, 0.7),
                (EigenDescriptor::CircleSin { m: 2 }, 4.0, -0.3),
            ],
        );
        let theta = 0.9f64;
        let p = ManifoldPoint::circle(theta);
        let want = 2.0 / std::f64::consts::TAU.sqrt()
            + 0.7 * theta.cos() / std::f64::consts::PI.sqrt()
            - 0.3 * (2.0 * theta).sin() / std::f64::consts::PI.sqrt();
        assert!((f.evaluate(&c, &p).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn random_band_limited_is_reproducible_and_banded() {
        let t = ManifoldModel::flat_torus(2).unwrap();
        let f: SpectralVector<f64> = random_band_limited(&t, 5.0, 99, false).unwrap();
        let g: SpectralVector<f64> = random_band_limited(&t, 5.0, 99, false).unwrap();
        assert_eq!(f.terms.len(), g.terms.len());
        for (a, b) in f.terms.iter().zip(&g.terms) {
            assert_eq!(a.0, b.0);
            assert_eq!(a.2.to_bits(), b.2.to_bits());
        }
        assert_eq!(f.constant_coefficient, 0.0);
        assert!(f.max_lambda() <= 5.0);
        // 4 + 4 + 4 + 8 modes below lambda = 5 on T^2
        assert_eq!(f.terms.len(), 20);
        let h: SpectralVector<f64> = random_band_limited(&t, 5.0, 100, false).unwrap();
        assert!(f.terms.iter().zip(&h.terms).any(|(a, b)| a.2 != b.2));
    }
}
