//! Model manifolds with closed-form spectra: the circle, flat tori T^d for
//! d in {1,2,3}, and the round unit sphere. Everything downstream (kernels,
//! interpolation, Ritz values, zeta sums) consumes exact eigenvalues and
//! orthonormal eigenfunctions from here.

use crate::error::{Error, Result};
use crate::legendre;
use crate::scalar::Scalar;
use std::fmt;

pub const LEGENDRE_DEGREE_CAP: u32 = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Circle,
    FlatTorus { d: u32 },
    Sphere2,
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Circle => write!(f, "circle"),
            ManifoldKind::FlatTorus { d } => write!(f, "torus{d}"),
            ManifoldKind::Sphere2 => write!(f, "sphere2"),
        }
    }
}

/// A compact model manifold: geometry constants plus its exact spectral
/// decomposition. All three models are homogeneous, so the volume
/// comparability constant is exactly 1 and the curvature bound in the
/// covering-multiplicity constant is 0.
#[derive(Clone, Copy, Debug)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
    pub dimension: u32,
    pub volume: f64,
    pub injectivity_radius: f64,
    pub curvature_bound: f64,
    pub volume_comparability: f64,
    pub r0_constant: f64,
}

impl ManifoldModel {
    pub fn circle() -> Self {
        Self::build(ManifoldKind::Circle, 1, std::f64::consts::TAU)
    }

    pub fn flat_torus(d: u32) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Parameter(format!(
                "flat torus dimension must be 1, 2, or 3; got {d}"
            )));
        }
        Ok(Self::build(
            ManifoldKind::FlatTorus { d },
            d,
            std::f64::consts::TAU.powi(d as i32),
        ))
    }

    pub fn sphere2() -> Self {
        Self::build(ManifoldKind::Sphere2, 2, 4.0 * std::f64::consts::PI)
    }

    fn build(kind: ManifoldKind, d: u32, volume: f64) -> Self {
        let curvature_bound = 0.0;
        let b = 1.0;
        let r = std::f64::consts::PI;
        ManifoldModel {
            kind,
            dimension: d,
            volume,
            injectivity_radius: r,
            curvature_bound,
            volume_comparability: b,
            r0_constant: 12f64.powi(d as i32)
                * b
                * (curvature_bound * r * (d as f64 - 1.0)).sqrt().exp(),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "circle" | "s1" => Ok(Self::circle()),
            "torus1" => Self::flat_torus(1),
            "torus2" | "torus" => Self::flat_torus(2),
            "torus3" => Self::flat_torus(3),
            "sphere2" | "sphere" | "s2" => Ok(Self::sphere2()),
            other => Err(Error::Parameter(format!(
                "unknown manifold '{other}' (expected circle, torus1, torus2, torus3, or sphere2)"
            ))),
        }
    }

    /// Geodesic distance between two points of this manifold.
    pub fn distance(&self, p: &ManifoldPoint, q: &ManifoldPoint) -> f64 {
        match (self.kind, p, q) {
            (
                ManifoldKind::Circle,
                ManifoldPoint::Circle { theta: a },
                ManifoldPoint::Circle { theta: b },
            ) => wrap_angle_distance(a - b),
            (
                ManifoldKind::FlatTorus { d },
                ManifoldPoint::Torus { angles: a },
                ManifoldPoint::Torus { angles: b },
            ) => {
                let mut s = 0.0;
                for i in 0..d as usize {
                    let w = wrap_angle_distance(a[i] - b[i]);
                    s += w * w;
                }
                s.sqrt()
            }
            (
                ManifoldKind::Sphere2,
                ManifoldPoint::Sphere { xyz: a },
                ManifoldPoint::Sphere { xyz: b },
            ) => {
                let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                dot.clamp(-1.0, 1.0).acos()
            }
            _ => panic!("point/manifold kind mismatch in distance"),
        }
    }

    /// Weyl prediction c_d * Vol * omega^{d/2} for the number of eigenvalues
    /// (with multiplicity) below omega, c_d = vol(unit d-ball)/(2 pi)^d.
    pub fn weyl_count(&self, omega: f64) -> f64 {
        let d = self.dimension;
        let ball = match d {
            1 => 2.0,
            2 => std::f64::consts::PI,
            _ => 4.0 * std::f64::consts::PI / 3.0,
        };
        let c = ball / std::f64::consts::TAU.powi(d as i32);
        c * self.volume * omega.powf(d as f64 / 2.0)
    }
}

/// A point in intrinsic coordinates: one angle on the circle, d angles on a
/// torus, a unit vector on the sphere. Constructors normalize (angles into
/// [0, 2 pi), sphere vectors to unit length).
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldPoint {
    Circle { theta: f64 },
    Torus { angles: [f64; 3] },
    Sphere { xyz: [f64; 3] },
}

fn wrap_unit(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    // rem_euclid can return the modulus itself when theta is a tiny negative
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

fn wrap_angle_distance(delta: f64) -> f64 {
    let d = delta.rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

impl ManifoldPoint {
    pub fn circle(theta: f64) -> Self {
        ManifoldPoint::Circle {
            theta: wrap_unit(theta),
        }
    }

    /// Torus point from up to three angles; unused trailing coordinates stay 0.
    pub fn torus(angles: &[f64]) -> Self {
        let mut a = [0.0; 3];
        for (i, &t) in angles.iter().take(3).enumerate() {
            a[i] = wrap_unit(t);
        }
        ManifoldPoint::Torus { angles: a }
    }

    pub fn sphere(xyz: [f64; 3]) -> Result<Self> {
        let n = (xyz[0] * xyz[0] + xyz[1] * xyz[1] + xyz[2] * xyz[2]).sqrt();
        if n < 1e-12 {
            return Err(Error::Parameter("sphere point has zero norm".into()));
        }
        Ok(ManifoldPoint::Sphere {
            xyz: [xyz[0] / n, xyz[1] / n, xyz[2] / n],
        })
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            ManifoldPoint::Circle { theta } => vec![*theta],
            ManifoldPoint::Torus { angles } => angles.to_vec(),
            ManifoldPoint::Sphere { xyz } => xyz.to_vec(),
        }
    }
}

/// Label of one real orthonormal eigenfunction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EigenDescriptor {
    /// The constant 1/sqrt(Vol), eigenvalue 0, on any manifold.
    Constant,
    /// cos(m theta)/sqrt(pi) on the circle, m >= 1.
    CircleCos { m: u32 },
    /// sin(m theta)/sqrt(pi) on the circle, m >= 1.
    CircleSin { m: u32 },
    /// sqrt(2/Vol) cos(m . x) for a canonical lattice vector m (first nonzero
    /// coordinate positive).
    TorusCos { m: [i32; 3] },
    /// sqrt(2/Vol) sin(m . x), same canonical vectors.
    TorusSin { m: [i32; 3] },
    /// Real spherical harmonic Y_{l,m}, -l <= m <= l.
    SphereY { l: u32, m: i32 },
}

impl fmt::Display for EigenDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EigenDescriptor::Constant => write!(f, "const"),
            EigenDescriptor::CircleCos { m } => write!(f, "cos:{m}"),
            EigenDescriptor::CircleSin { m } => write!(f, "sin:{m}"),
            EigenDescriptor::TorusCos { m } => write!(f, "cos:{};{};{}", m[0], m[1], m[2]),
            EigenDescriptor::TorusSin { m } => write!(f, "sin:{};{};{}", m[0], m[1], m[2]),
            EigenDescriptor::SphereY { l, m } => write!(f, "Y:{l},{m}"),
        }
    }
}

impl EigenDescriptor {
    /// The eigenvalue this descriptor belongs to (exact in f64: small sums
    /// of integer squares).
    pub fn lambda(&self) -> f64 {
        match self {
            EigenDescriptor::Constant => 0.0,
            EigenDescriptor::CircleCos { m } | EigenDescriptor::CircleSin { m } => {
                (*m as f64) * (*m as f64)
            }
            EigenDescriptor::TorusCos { m } | EigenDescriptor::TorusSin { m } => {
                m.iter().map(|&c| (c as f64) * (c as f64)).sum()
            }
            EigenDescriptor::SphereY { l, .. } => (*l as f64) * (*l as f64 + 1.0),
        }
    }

    fn belongs_to(&self, kind: ManifoldKind) -> bool {
        match self {
            EigenDescriptor::Constant => true,
            EigenDescriptor::CircleCos { .. } | EigenDescriptor::CircleSin { .. } => {
                kind == ManifoldKind::Circle
            }
            EigenDescriptor::TorusCos { m } | EigenDescriptor::TorusSin { m } => match kind {
                ManifoldKind::FlatTorus { d } => m.iter().skip(d as usize).all(|&c| c == 0),
                _ => false,
            },
            EigenDescriptor::SphereY { .. } => kind == ManifoldKind::Sphere2,
        }
    }
}

/// One distinct eigenvalue with its full real eigenbasis.
#[derive(Clone, Debug)]
pub struct EigenLevel {
    pub level_index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
    pub basis_descriptors: Vec<EigenDescriptor>,
}

/// Every distinct eigenvalue <= lambda_max, ascending, with exact
/// multiplicities. The zero level (constants) is always present.
pub fn enumerate_spectrum(manifold: &ManifoldModel, lambda_max: f64) -> Result<Vec<EigenLevel>> {
    if !(lambda_max > 0.0) {
        return Err(Error::Parameter(format!(
            "lambda_max must be > 0, got {lambda_max}"
        )));
    }
    let mut levels: Vec<(f64, Vec<EigenDescriptor>)> = vec![(0.0, vec![EigenDescriptor::Constant])];

    match manifold.kind {
        ManifoldKind::Circle => {
            let mut m = 1u32;
            while (m as f64) * (m as f64) <= lambda_max {
                levels.push((
                    (m as f64) * (m as f64),
                    vec![
                        EigenDescriptor::CircleCos { m },
                        EigenDescriptor::CircleSin { m },
                    ],
                ));
                m += 1;
            }
        }
        ManifoldKind::FlatTorus { d } => {
            let mut by_norm: std::collections::BTreeMap<u64, Vec<[i32; 3]>> =
                std::collections::BTreeMap::new();
            let r = lambda_max.sqrt().floor() as i64 + 1;
            let range = |active: bool| if active { (-r, r) } else { (0, 0) };
            let (x0, x1) = range(true);
            let (y0, y1) = range(d >= 2);
            let (z0, z1) = range(d >= 3);
            for mx in x0..=x1 {
                for my in y0..=y1 {
                    for mz in z0..=z1 {
                        let n2 = (mx * mx + my * my + mz * mz) as u64;
                        if n2 == 0 || n2 as f64 > lambda_max {
                            continue;
                        }
                        // canonical representative of the +/- pair
                        let first_nonzero = [mx, my, mz].into_iter().find(|&c| c != 0).unwrap();
                        if first_nonzero < 0 {
                            continue;
                        }
                        by_norm
                            .entry(n2)
                            .or_default()
                            .push([mx as i32, my as i32, mz as i32]);
                    }
                }
            }
            for (n2, mut reps) in by_norm {
                reps.sort();
                let descs = reps
                    .iter()
                    .flat_map(|&m| {
                        [
                            EigenDescriptor::TorusCos { m },
                            EigenDescriptor::TorusSin { m },
                        ]
                    })
                    .collect();
                levels.push((n2 as f64, descs));
            }
        }
        ManifoldKind::Sphere2 => {
            let mut l = 1u32;
            while (l as f64) * (l as f64 + 1.0) <= lambda_max {
                let descs = (-(l as i32)..=l as i32)
                    .map(|m| EigenDescriptor::SphereY { l, m })
                    .collect();
                levels.push(((l as f64) * (l as f64 + 1.0), descs));
                l += 1;
            }
        }
    }

    Ok(levels
        .into_iter()
        .enumerate()
        .map(|(i, (eigenvalue, basis_descriptors))| EigenLevel {
            level_index: i,
            eigenvalue,
            multiplicity: basis_descriptors.len(),
            basis_descriptors,
        })
        .collect())
}

/// Value of the real orthonormal eigenfunction `descriptor` at `p`, in the
/// caller's scalar type. Points are exact f64 data; promotion is exact, and
/// the trigonometric work happens in `T`.
pub fn eval_eigenfunction<T: Scalar>(
    manifold: &ManifoldModel,
    descriptor: &EigenDescriptor,
    p: &ManifoldPoint,
) -> Result<T> {
    if !descriptor.belongs_to(manifold.kind) {
        return Err(Error::DescriptorMismatch {
            descriptor: descriptor.to_string(),
            manifold: manifold.kind.to_string(),
        });
    }
    match (descriptor, p) {
        (EigenDescriptor::Constant, _) => Ok(T::of(manifold.volume).sqrt().recip()),
        (EigenDescriptor::CircleCos { m }, ManifoldPoint::Circle { theta }) => {
            let phase = T::of(*m as f64) * T::of(*theta);
            Ok(phase.cos() / T::PI().sqrt())
        }
        (EigenDescriptor::CircleSin { m }, ManifoldPoint::Circle { theta }) => {
            let phase = T::of(*m as f64) * T::of(*theta);
            Ok(phase.sin() / T::PI().sqrt())
        }
        (EigenDescriptor::TorusCos { m }, ManifoldPoint::Torus { angles }) => {
            Ok(torus_norm::<T>(manifold) * torus_phase::<T>(m, angles).cos())
        }
        (EigenDescriptor::TorusSin { m }, ManifoldPoint::Torus { angles }) => {
            Ok(torus_norm::<T>(manifold) * torus_phase::<T>(m, angles).sin())
        }
        (EigenDescriptor::SphereY { l, m }, ManifoldPoint::Sphere { xyz }) => {
            sphere_harmonic::<T>(*l, *m, xyz)
        }
        _ => Err(Error::DescriptorMismatch {
            descriptor: descriptor.to_string(),
            manifold: manifold.kind.to_string(),
        }),
    }
}

fn torus_phase<T: Scalar>(m: &[i32; 3], angles: &[f64; 3]) -> T {
    let mut phase = T::zero();
    for i in 0..3 {
        if m[i] != 0 {
            phase += T::of(m[i] as f64) * T::of(angles[i]);
        }
    }
    phase
}

fn torus_norm<T: Scalar>(manifold: &ManifoldModel) -> T {
    (T::of(2.0) / T::of(manifold.volume)).sqrt()
}

/// Real Y_{l,m}: the azimuth phi is taken at f64 accuracy (the polar part
/// runs in T); sphere assemblies are f64 work in practice.
fn sphere_harmonic<T: Scalar>(l: u32, m: i32, xyz: &[f64; 3]) -> Result<T> {
    if l > LEGENDRE_DEGREE_CAP {
        return Err(Error::DegreeCap {
            l,
            cap: LEGENDRE_DEGREE_CAP,
        });
    }
    let ct = T::of(xyz[2]);
    let st = (T::of(xyz[0]) * T::of(xyz[0]) + T::of(xyz[1]) * T::of(xyz[1])).sqrt();
    let ma = m.unsigned_abs();
    let p = legendre::normalized_assoc_legendre::<T>(l, ma, ct, st);
    if m == 0 {
        return Ok(p);
    }
    let phi = xyz[1].atan2(xyz[0]);
    let phase = T::of(ma as f64) * T::of(phi);
    let sqrt2 = T::SQRT_2();
    Ok(if m > 0 {
        sqrt2 * p * phase.cos()
    } else {
        sqrt2 * p * phase.sin()
    })
}

/// Tabulates all Y_{l,m} with l <= l_max at one point, indexed l*l + (m+l).
/// One pass of the recurrences, O(l_max^2) total.
pub fn sphere_harmonics_table<T: Scalar>(l_max: u32, xyz: &[f64; 3]) -> Result<Vec<T>> {
    if l_max > LEGENDRE_DEGREE_CAP {
        return Err(Error::DegreeCap {
            l: l_max,
            cap: LEGENDRE_DEGREE_CAP,
        });
    }
    let ct = T::of(xyz[2]);
    let st = (T::of(xyz[0]) * T::of(xyz[0]) + T::of(xyz[1]) * T::of(xyz[1])).sqrt();
    let p = legendre::normalized_assoc_legendre_table::<T>(l_max, ct, st);
    let phi = xyz[1].atan2(xyz[0]);
    let sqrt2 = T::SQRT_2();
    let n = ((l_max + 1) * (l_max + 1)) as usize;
    let mut out = vec![T::zero(); n];
    for l in 0..=l_max {
        let base = (l * l + l) as usize;
        out[base] = p[legendre::tri_index(l, 0)];
        for m in 1..=l {
            let pv = p[legendre::tri_index(l, m)];
            let phase = T::of(m as f64) * T::of(phi);
            out[base + m as usize] = sqrt2 * pv * phase.cos();
            out[base - m as usize] = sqrt2 * pv * phase.sin();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level_map(levels: &[EigenLevel]) -> Vec<(f64, usize)> {
        levels
            .iter()
            .map(|l| (l.eigenvalue, l.multiplicity))
            .collect()
    }

    #[test]
    fn circle_spectrum_to_ten() {
        let m = ManifoldModel::circle();
        let levels = enumerate_spectrum(&m, 10.0).unwrap();
        assert_eq!(
            level_map(&levels),
            vec![(0.0, 1), (1.0, 2), (4.0, 2), (9.0, 2)]
        );
        for (i, l) in levels.iter().enumerate() {
            assert_eq!(l.level_index, i);
            assert_eq!(l.multiplicity, l.basis_descriptors.len());
        }
    }

    #[test]
    fn sphere_spectrum_to_seven() {
        let m = ManifoldModel::sphere2();
        let levels = enumerate_spectrum(&m, 7.0).unwrap();
        assert_eq!(level_map(&levels), vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
    }

    #[test]
    fn torus2_spectrum_to_five() {
        let m = ManifoldModel::flat_torus(2).unwrap();
        let levels = enumerate_spectrum(&m, 5.0).unwrap();
        assert_eq!(
            level_map(&levels),
            vec![(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4), (5.0, 8)]
        );
    }

    #[test]
    fn torus3_multiplicities_match_brute_force() {
        let m = ManifoldModel::flat_torus(3).unwrap();
        let levels = enumerate_spectrum(&m, 14.0).unwrap();
        // lattice point counts for |m|^2 = 1..14 in Z^3 (0 skipped where none)
        for level in levels.iter().skip(1) {
            let n2 = level.eigenvalue as i64;
            let r = (n2 as f64).sqrt() as i64 + 1;
            let mut count = 0;
            for x in -r..=r {
                for y in -r..=r {
                    for z in -r..=r {
                        if x * x + y * y + z * z == n2 {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(
                level.multiplicity, count as usize,
                "per-level count at {n2}"
            );
        }
    }

    #[test]
    fn below_first_eigenvalue_only_constants() {
        let m = ManifoldModel::circle();
        let levels = enumerate_spectrum(&m, 0.5).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].eigenvalue, 0.0);
    }

    #[test]
    fn eigenfunction_point_values() {
        let c = ManifoldModel::circle();
        let p0 = ManifoldPoint::circle(0.0);
        let v: f64 = eval_eigenfunction(&c, &EigenDescriptor::Constant, &p0).unwrap();
        assert!((v - 1.0 / std::f64::consts::TAU.sqrt()).abs() < 1e-15);
        let v: f64 = eval_eigenfunction(&c, &EigenDescriptor::CircleCos { m: 1 }, &p0).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);

        let s = ManifoldModel::sphere2();
        let north = ManifoldPoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let v: f64 =
            eval_eigenfunction(&s, &EigenDescriptor::SphereY { l: 1, m: 0 }, &north).unwrap();
        assert!((v - (3.0 / (4.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-14);

        // descriptor/manifold mismatch is an error
        let r = eval_eigenfunction::<f64>(&s, &EigenDescriptor::CircleCos { m: 1 }, &north);
        assert!(matches!(r, Err(Error::DescriptorMismatch { .. })));
    }

    #[test]
    fn distances() {
        let c = ManifoldModel::circle();
        let d = c.distance(
            &ManifoldPoint::circle(0.1),
            &ManifoldPoint::circle(std::f64::consts::TAU - 0.1),
        );
        assert!((d - 0.2).abs() < 1e-12);

        let s = ManifoldModel::sphere2();
        let n = ManifoldPoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let sp = ManifoldPoint::sphere([0.0, 0.0, -1.0]).unwrap();
        assert!((s.distance(&n, &sp) - std::f64::consts::PI).abs() < 1e-15);

        let t = ManifoldModel::flat_torus(2).unwrap();
        let a = ManifoldPoint::torus(&[0.0, 0.0]);
        let b = ManifoldPoint::torus(&[std::f64::consts::PI, std::f64::consts::PI]);
        assert!((t.distance(&a, &b) - std::f64::consts::PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weyl_count_against_exact_enumeration() {
        let c = ManifoldModel::circle();
        assert!((c.weyl_count(100.0) - 20.0).abs() < 1e-12);
        let exact: usize = enumerate_spectrum(&c, 100.0)
            .unwrap()
            .iter()
            .skip(1)
            .map(|l| l.multiplicity)
            .sum();
        assert_eq!(exact, 20);
        assert!(c.weyl_count(0.5) < 2.0);

        let t = ManifoldModel::flat_torus(2).unwrap();
        let w = t.weyl_count(25.0);
        let exact: usize = enumerate_spectrum(&t, 25.0)
            .unwrap()
            .iter()
            .skip(1)
            .map(|l| l.multiplicity)
            .sum();
        assert_eq!(exact, 80);
        assert!(
            (w - exact as f64).abs() / (exact as f64) < 0.30,
            "weyl {w} vs exact {exact}"
        );
    }

    #[test]
    fn r0_constants() {
        assert_eq!(ManifoldModel::circle().r0_constant, 12.0);
        assert_eq!(ManifoldModel::flat_torus(2).unwrap().r0_constant, 144.0);
        assert_eq!(ManifoldModel::sphere2().r0_constant, 144.0);
        assert_eq!(ManifoldModel::flat_torus(3).unwrap().r0_constant, 1728.0);
    }

    #[test]
    fn point_normalization() {
        let p = ManifoldPoint::circle(-0.5);
        if let ManifoldPoint::Circle { theta } = p {
            assert!((0.0..std::f64::consts::TAU).contains(&theta));
            assert!((theta - (std::f64::consts::TAU - 0.5)).abs() < 1e-12);
        }
        let q = ManifoldPoint::sphere([3.0, 0.0, 4.0]).unwrap();
        if let ManifoldPoint::Sphere { xyz } = q {
            assert!((xyz[0] - 0.6).abs() < 1e-15);
            assert!((xyz[2] - 0.8).abs() < 1e-15);
        }
        assert!(ManifoldPoint::sphere([0.0, 0.0, 0.0]).is_err());
    }

    /// Orthonormality of the first 20 eigenfunctions under quadrature.
    #[test]
    fn orthonormality_circle_torus() {
        let c = ManifoldModel::circle();
        let descs: Vec<EigenDescriptor> = enumerate_spectrum(&c, 200.0)
            .unwrap()
            .iter()
            .flat_map(|l| l.basis_descriptors.clone())
            .take(20)
            .collect();
        let n = 4096;
        let h = std::f64::consts::TAU / n as f64;
        let mut vals = vec![vec![0.0f64; n]; descs.len()];
        for (i, d) in descs.iter().enumerate() {
            for j in 0..n {
                let p = ManifoldPoint::circle(j as f64 * h);
                vals[i][j] = eval_eigenfunction(&c, d, &p).unwrap();
            }
        }
        for i in 0..descs.len() {
            for j in i..descs.len() {
                let g: f64 = (0..n).map(|t| vals[i][t] * vals[j][t]).sum::<f64>() * h;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8, "circle gram[{i}][{j}] = {g}");
            }
        }

        let t = ManifoldModel::flat_torus(2).unwrap();
        let descs: Vec<EigenDescriptor> = enumerate_spectrum(&t, 10.0)
            .unwrap()
            .iter()
            .flat_map(|l| l.basis_descriptors.clone())
            .take(20)
            .collect();
        let g = 64;
        let h = std::f64::consts::TAU / g as f64;
        let mut vals = vec![vec![0.0f64; g * g]; descs.len()];
        for (i, d) in descs.iter().enumerate() {
            for a in 0..g {
                for b in 0..g {
                    let p = ManifoldPoint::torus(&[a as f64 * h, b as f64 * h]);
                    vals[i][a * g + b] = eval_eigenfunction(&t, d, &p).unwrap();
                }
            }
        }
        for i in 0..descs.len() {
            for j in i..descs.len() {
                let s: f64 = (0..g * g).map(|t| vals[i][t] * vals[j][t]).sum();
                let gram = s * h * h;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram - want).abs() < 1e-8, "torus gram[{i}][{j}] = {gram}");
            }
        }
    }

    /// Gauss-Legendre nodes/weights by Newton iteration, for the sphere
    /// quadrature oracle below.
    fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0; n];
        let mut ws = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, 0.0f64);
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
                }
                let dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
                let dx = p0 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            xs[i] = x;
            ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (xs, ws)
    }

    #[test]
    fn orthonormality_sphere() {
        let s = ManifoldModel::sphere2();
        let descs: Vec<EigenDescriptor> = enumerate_spectrum(&s, 13.0)
            .unwrap()
            .iter()
            .flat_map(|l| l.basis_descriptors.clone())
            .take(20)
            .collect();
        let (ct, w) = gauss_legendre(24);
        let nphi = 32;
        let hphi = std::f64::consts::TAU / nphi as f64;
        let mut gram = vec![vec![0.0f64; descs.len()]; descs.len()];
        for (t, &c) in ct.iter().enumerate() {
            let st = (1.0 - c * c).sqrt();
            for a in 0..nphi {
                let phi = a as f64 * hphi;
                let p = ManifoldPoint::Sphere {
                    xyz: [st * phi.cos(), st * phi.sin(), c],
                };
                let vals: Vec<f64> = descs
                    .iter()
                    .map(|d| eval_eigenfunction(&s, d, &p).unwrap())
                    .collect();
                for i in 0..descs.len() {
                    for j in i..descs.len() {
                        gram[i][j] += vals[i] * vals[j] * w[t] * hphi;
                    }
                }
            }
        }
        for i in 0..descs.len() {
            for j in i..descs.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[i][j] - want).abs() < 1e-8,
                    "sphere gram[{i}][{j}] = {}",
                    gram[i][j]
                );
            }
        }
    }

    /// Spot check of the eigenfunction property via a high-order central
    /// difference: phi'' = -lambda phi on the circle, and the 2-D analogue on
    /// the torus.
    #[test]
    fn finite_difference_eigencheck() {
        let c = ManifoldModel::circle();
        let h = 1e-3;
        for m in [1u32, 2, 4] {
            let d = EigenDescriptor::CircleCos { m };
            let lambda = d.lambda();
            for theta in [0.3, 1.7, 4.0] {
                let f = |t: f64| -> f64 {
                    eval_eigenfunction(&c, &d, &ManifoldPoint::circle(t)).unwrap()
                };
                let lap = (-f(theta - 2.0 * h) + 16.0 * f(theta - h) - 30.0 * f(theta)
                    + 16.0 * f(theta + h)
                    - f(theta + 2.0 * h))
                    / (12.0 * h * h);
                let rel = (lap + lambda * f(theta)).abs() / (lambda * f(theta).abs()).max(1e-3);
                assert!(rel < 1e-4, "circle m={m} theta={theta}: rel {rel}");
            }
        }

        let t2 = ManifoldModel::flat_torus(2).unwrap();
        let d = EigenDescriptor::TorusCos { m: [2, -1, 0] };
        let lambda = d.lambda();
        let f = |x: f64, y: f64| -> f64 {
            eval_eigenfunction(&t2, &d, &ManifoldPoint::torus(&[x, y])).unwrap()
        };
        let (x0, y0) = (0.9, 2.2);
        let lap = (f(x0 + h, y0) + f(x0 - h, y0) + f(x0, y0 + h) + f(x0, y0 - h) - 4.0 * f(x0, y0))
            / (h * h);
        let rel = (lap + lambda * f(x0, y0)).abs() / (lambda * f(x0, y0).abs());
        assert!(rel < 1e-4, "torus rel {rel}");
    }

    #[test]
    fn harmonics_table_matches_single_evaluations() {
        let s = ManifoldModel::sphere2();
        let p = ManifoldPoint::sphere([0.3, -0.5, 0.81]).unwrap();
        let xyz = match &p {
            ManifoldPoint::Sphere { xyz } => *xyz,
            _ => unreachable!(),
        };
        let table = sphere_harmonics_table::<f64>(8, &xyz).unwrap();
        for l in 0..=8u32 {
            for m in -(l as i32)..=l as i32 {
                let v: f64 =
                    eval_eigenfunction(&s, &EigenDescriptor::SphereY { l, m }, &p).unwrap();
                let idx = (l * l) as usize + (m + l as i32) as usize;
                assert!(
                    (v - table[idx]).abs() < 1e-13,
                    "table mismatch at l={l} m={m}: {v} vs {}",
                    table[idx]
                );
            }
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let r = sphere_harmonics_table::<f64>(201, &[0.0, 0.0, 1.0]);
        assert!(matches!(r, Err(Error::DegreeCap { .. })));
    }
}
