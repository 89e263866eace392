//! Generation and validation of rho-admissible node sets: min pairwise
//! distance at least rho/2, covering radius at most rho/2, bounded covering
//! multiplicity, and rho below a sixth of the injectivity radius.
//!
//! Circle and torus sets are regular lattices with spacing in (rho/2, rho].
//! Sphere sets realize the existence argument constructively: a coarse
//! well-spread skeleton is inserted first, then a dense low-discrepancy
//! candidate stream in seeded random order is thinned greedily to a maximal
//! rho/2-packing. Maximality gives covering <= rho/2 up to the candidate
//! mesh, which is sized well under the 1% verification slack.

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldModel, ManifoldPoint};
use crate::parallel;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::io::{BufRead, Write};

pub const DEFAULT_PROBE_COUNT: usize = 10_000;

/// Slack factor on the covering threshold: probe maximization plus a finite
/// candidate mesh cannot certify rho/2 exactly.
pub const COVERING_SLACK: f64 = 1.01;

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct SetMetrics {
    pub min_pairwise_distance: f64,
    pub covering_radius: f64,
    pub multiplicity_rho: usize,
}

#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct ValidationReport {
    pub packing_pass: bool,
    pub covering_pass: bool,
    pub multiplicity_pass: bool,
    pub metrics: SetMetrics,
    pub probe_count: usize,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.packing_pass && self.covering_pass && self.multiplicity_pass
    }
}

#[derive(Clone, Debug)]
pub struct AdmissibleSet {
    pub manifold: ManifoldModel,
    pub rho: f64,
    pub nodes: Vec<ManifoldPoint>,
    pub metrics: SetMetrics,
}

/// Vol(M) / rho^d, the comparability target for |M_rho|.
pub fn cardinality_estimate(manifold: &ManifoldModel, rho: f64) -> f64 {
    manifold.volume / rho.powi(manifold.dimension as i32)
}

fn check_rho(manifold: &ManifoldModel, rho: f64) -> Result<()> {
    let limit = manifold.injectivity_radius / 6.0;
    if !(rho > 0.0 && rho < limit) {
        return Err(Error::Parameter(format!(
            "rho must lie in (0, {limit:.6}) for {}; got {rho}",
            manifold.kind
        )));
    }
    Ok(())
}

impl AdmissibleSet {
    /// Deterministic construction of an admissible set. The seed only
    /// influences the sphere (ordering of the dense fill candidates);
    /// lattice models ignore it.
    pub fn generate(manifold: &ManifoldModel, rho: f64, seed: u64) -> Result<Self> {
        check_rho(manifold, rho)?;
        let nodes = match manifold.kind {
            ManifoldKind::Circle => {
                let n = (std::f64::consts::TAU / (0.8 * rho) - 1e-9).ceil() as usize;
                let h = std::f64::consts::TAU / n as f64;
                (0..n)
                    .map(|j| ManifoldPoint::circle(j as f64 * h))
                    .collect()
            }
            ManifoldKind::FlatTorus { d: 2 } => {
                // Centered square lattice: odd rows are shifted by half a
                // spacing, which puts the deepest hole at 0.625 * spacing
                // instead of the 0.707 * spacing of the aligned grid. A
                // spacing of 0.8 * rho therefore meets the rho/2 covering
                // bound exactly. The row count must stay even or the
                // stagger would break across the periodic seam.
                let rows = 2 * ((1.25 * std::f64::consts::PI / rho - 1e-9).ceil() as usize).max(1);
                let h = std::f64::consts::TAU / rows as f64;
                let mut nodes = Vec::with_capacity(rows * rows);
                for j in 0..rows {
                    let offset = 0.5 * (j % 2) as f64;
                    for i in 0..rows {
                        let x = ((i as f64 + offset) * h) % std::f64::consts::TAU;
                        nodes.push(ManifoldPoint::torus(&[x, j as f64 * h]));
                    }
                }
                nodes
            }
            ManifoldKind::FlatTorus { d } => {
                // aligned cubic lattice; covering radius is spacing * sqrt(d) / 2
                let per_axis =
                    (std::f64::consts::TAU * (d as f64).sqrt() / rho - 1e-9).ceil() as usize;
                let h = std::f64::consts::TAU / per_axis as f64;
                let mut nodes = Vec::with_capacity(per_axis.pow(d));
                let idx_max = per_axis.pow(d);
                for flat in 0..idx_max {
                    let mut rem = flat;
                    let mut angles = [0.0f64; 3];
                    for a in angles.iter_mut().take(d as usize) {
                        *a = (rem % per_axis) as f64 * h;
                        rem /= per_axis;
                    }
                    nodes.push(ManifoldPoint::torus(&angles[..d as usize]));
                }
                nodes
            }
            ManifoldKind::Sphere2 => sphere_greedy_packing(rho, seed),
        };

        let metrics = compute_metrics(manifold, rho, &nodes, DEFAULT_PROBE_COUNT);
        // maximality of the packing makes these unreachable; a violation
        // means the generator itself is broken
        assert!(
            metrics.min_pairwise_distance >= rho / 2.0,
            "bug: generated packing below rho/2"
        );
        assert!(
            metrics.covering_radius <= COVERING_SLACK * rho / 2.0,
            "bug: generated covering radius {} above rho/2",
            metrics.covering_radius
        );
        Ok(AdmissibleSet {
            manifold: *manifold,
            rho,
            nodes,
            metrics,
        })
    }

    /// Wraps externally supplied nodes (CLI node files). Metrics are
    /// computed but invariants are not enforced; run `validate` to judge.
    pub fn from_nodes(
        manifold: &ManifoldModel,
        rho: f64,
        nodes: Vec<ManifoldPoint>,
    ) -> Result<Self> {
        check_rho(manifold, rho)?;
        if nodes.is_empty() {
            return Err(Error::Parameter("node set is empty".into()));
        }
        let metrics = compute_metrics(manifold, rho, &nodes, DEFAULT_PROBE_COUNT);
        Ok(AdmissibleSet {
            manifold: *manifold,
            rho,
            nodes,
            metrics,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Recomputes the three admissibility properties and reports pass/fail
    /// per property. Failures are reported, never thrown.
    pub fn validate(&self, probe_count: usize) -> Result<ValidationReport> {
        if probe_count < 1000 {
            return Err(Error::Parameter(format!(
                "probe_count must be at least 1000, got {probe_count}"
            )));
        }
        let metrics = compute_metrics(&self.manifold, self.rho, &self.nodes, probe_count);
        Ok(ValidationReport {
            packing_pass: metrics.min_pairwise_distance >= self.rho / 2.0,
            covering_pass: metrics.covering_radius <= COVERING_SLACK * self.rho / 2.0,
            multiplicity_pass: (metrics.multiplicity_rho as f64) <= self.manifold.r0_constant,
            metrics,
            probe_count,
        })
    }

    /// One row per node in intrinsic coordinates, with a comment header
    /// carrying the manifold and rho.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# manifold={} rho={}", self.manifold.kind, self.rho)?;
        let cols = match self.manifold.kind {
            ManifoldKind::Circle => "theta".to_string(),
            ManifoldKind::FlatTorus { d } => (0..d)
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join(","),
            ManifoldKind::Sphere2 => "x,y,z".to_string(),
        };
        writeln!(w, "{cols}")?;
        for p in &self.nodes {
            let coords = p.coords();
            let take = match self.manifold.kind {
                ManifoldKind::FlatTorus { d } => d as usize,
                _ => coords.len(),
            };
            let row: Vec<String> = coords.iter().take(take).map(|c| format!("{c}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut manifold: Option<ManifoldModel> = None;
        let mut rho: Option<f64> = None;
        let mut nodes: Vec<ManifoldPoint> = Vec::new();
        let mut saw_columns = false;
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("manifold=") {
                        manifold = Some(ManifoldModel::parse(v)?);
                    } else if let Some(v) = tok.strip_prefix("rho=") {
                        rho = Some(v.parse().map_err(|_| {
                            Error::Parse(format!("bad rho value '{v}' in node file header"))
                        })?);
                    }
                }
                continue;
            }
            if !saw_columns {
                saw_columns = true;
                continue;
            }
            let m = manifold.as_ref().ok_or_else(|| {
                Error::Parse("node file lacks '# manifold=... rho=...' header".into())
            })?;
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad coordinate '{t}' in node file")))
                })
                .collect::<Result<_>>()?;
            let expect = match m.kind {
                ManifoldKind::Circle => 1,
                ManifoldKind::FlatTorus { d } => d as usize,
                ManifoldKind::Sphere2 => 3,
            };
            if vals.len() != expect {
                return Err(Error::Parse(format!(
                    "expected {expect} coordinates per row for {}, got {}",
                    m.kind,
                    vals.len()
                )));
            }
            nodes.push(match m.kind {
                ManifoldKind::Circle => ManifoldPoint::circle(vals[0]),
                ManifoldKind::FlatTorus { .. } => ManifoldPoint::torus(&vals),
                ManifoldKind::Sphere2 => ManifoldPoint::sphere([vals[0], vals[1], vals[2]])?,
            });
        }
        let manifold =
            manifold.ok_or_else(|| Error::Parse("node file lacks manifold header".into()))?;
        let rho = rho.ok_or_else(|| Error::Parse("node file lacks rho header".into()))?;
        Self::from_nodes(&manifold, rho, nodes)
    }
}

/// Greedy maximal rho/2-packing on the sphere: skeleton lattice first, then
/// a dense Fibonacci stream in seeded random order. Accepted nodes are kept
/// sorted by z so each insertion test only scans a |dz| <= rho/2 band.
fn sphere_greedy_packing(rho: f64, seed: u64) -> Vec<ManifoldPoint> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let rotation: f64 = rng.random();

    let est = 4.0 * std::f64::consts::PI / (rho * rho);
    let n_skeleton = (2.0 * est).round().max(4.0) as usize;
    // fill mesh must stay well under the 1% covering slack on rho/2
    let n_fill = (((2000.0 / rho) * (2000.0 / rho)) as usize).clamp(300_000, 6_000_000);

    let cos_half = (rho / 2.0).cos();
    let mut accepted: Vec<[f64; 3]> = Vec::new(); // sorted by z

    let try_insert = |p: [f64; 3], accepted: &mut Vec<[f64; 3]>| {
        let lo = accepted.partition_point(|q| q[2] < p[2] - rho / 2.0);
        let hi = accepted.partition_point(|q| q[2] <= p[2] + rho / 2.0);
        for q in &accepted[lo..hi] {
            // dot > cos(rho/2) means geodesic distance below rho/2
            if p[0] * q[0] + p[1] * q[1] + p[2] * q[2] > cos_half {
                return;
            }
        }
        let at = accepted.partition_point(|q| q[2] < p[2]);
        accepted.insert(at, p);
    };

    for i in 0..n_skeleton {
        try_insert(fibonacci_point(i, n_skeleton, rotation), &mut accepted);
    }
    let mut order: Vec<u32> = (0..n_fill as u32).collect();
    order.shuffle(&mut rng);
    for i in order {
        try_insert(fibonacci_point(i as usize, n_fill, rotation), &mut accepted);
    }

    accepted
        .into_iter()
        .map(|xyz| ManifoldPoint::Sphere { xyz })
        .collect()
}

const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9; // 1/phi

fn fibonacci_point(i: usize, n: usize, rotation: f64) -> [f64; 3] {
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let st = (1.0 - z * z).max(0.0).sqrt();
    let phi = std::f64::consts::TAU * ((i as f64 * GOLDEN_FRAC + rotation).fract());
    [st * phi.cos(), st * phi.sin(), z]
}

/// Deterministic quasi-random probe points, distinct from any generated
/// node set; used for covering and multiplicity estimation and reused by
/// sup-norm grids elsewhere.
pub fn probe_points(manifold: &ManifoldModel, count: usize) -> Vec<ManifoldPoint> {
    // Kronecker sequence parameters per dimension
    const A1: f64 = 0.618_033_988_749_894_9;
    const A2: [f64; 2] = [0.754_877_666_246_692_7, 0.569_840_290_998_053_2];
    const A3: [f64; 3] = [
        0.819_172_513_396_164_5,
        0.671_043_606_703_789_3,
        0.549_700_477_901_970_3,
    ];
    match manifold.kind {
        ManifoldKind::Circle => (0..count)
            .map(|i| ManifoldPoint::circle(std::f64::consts::TAU * (0.5 + i as f64 * A1).fract()))
            .collect(),
        ManifoldKind::FlatTorus { d } => (0..count)
            .map(|i| {
                let alpha: &[f64] = match d {
                    1 => std::slice::from_ref(&A1),
                    2 => &A2,
                    _ => &A3,
                };
                let angles: Vec<f64> = alpha
                    .iter()
                    .map(|a| std::f64::consts::TAU * (0.5 + i as f64 * a).fract())
                    .collect();
                ManifoldPoint::torus(&angles)
            })
            .collect(),
        ManifoldKind::Sphere2 => (0..count)
            .map(|i| {
                // half-step offset keeps probes off the candidate lattice
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let st = (1.0 - z * z).max(0.0).sqrt();
                let phi = std::f64::consts::TAU * (i as f64 * GOLDEN_FRAC + 0.5).fract();
                ManifoldPoint::Sphere {
                    xyz: [st * phi.cos(), st * phi.sin(), z],
                }
            })
            .collect(),
    }
}

/// Regular evaluation grid with at least `target` points: uniform on the
/// circle, per-axis product on tori, theta-phi product on the sphere.
pub fn dense_grid(manifold: &ManifoldModel, target: usize) -> Vec<ManifoldPoint> {
    let target = target.max(4);
    match manifold.kind {
        ManifoldKind::Circle => (0..target)
            .map(|i| ManifoldPoint::circle(std::f64::consts::TAU * i as f64 / target as f64))
            .collect(),
        ManifoldKind::FlatTorus { d } => {
            let per = (target as f64).powf(1.0 / d as f64).ceil() as usize;
            let total = per.pow(d);
            (0..total)
                .map(|flat| {
                    let mut rest = flat;
                    let mut angles = Vec::with_capacity(d as usize);
                    for _ in 0..d {
                        angles.push(std::f64::consts::TAU * (rest % per) as f64 / per as f64);
                        rest /= per;
                    }
                    ManifoldPoint::torus(&angles)
                })
                .collect()
        }
        ManifoldKind::Sphere2 => {
            // half-step colatitudes avoid the poles where phi degenerates
            let n_theta = ((target as f64 / 2.0).sqrt().ceil() as usize).max(2);
            let n_phi = 2 * n_theta;
            let mut out = Vec::with_capacity(n_theta * n_phi);
            for j in 0..n_theta {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / n_theta as f64;
                let (st, ct) = theta.sin_cos();
                for i in 0..n_phi {
                    let phi = std::f64::consts::TAU * i as f64 / n_phi as f64;
                    out.push(ManifoldPoint::Sphere {
                        xyz: [st * phi.cos(), st * phi.sin(), ct],
                    });
                }
            }
            out
        }
    }
}

fn compute_metrics(
    manifold: &ManifoldModel,
    rho: f64,
    nodes: &[ManifoldPoint],
    probe_count: usize,
) -> SetMetrics {
    let n = nodes.len();
    let mut min_pair = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = manifold.distance(&nodes[i], &nodes[j]);
            if d < min_pair {
                min_pair = d;
            }
        }
    }
    if n == 1 {
        min_pair = f64::INFINITY;
    }

    let probes = probe_points(manifold, probe_count);
    let stats = parallel::par_map(probes.len(), |i| {
        let p = &probes[i];
        let mut nearest = f64::INFINITY;
        let mut within = 0usize;
        for q in nodes {
            let d = manifold.distance(p, q);
            if d < nearest {
                nearest = d;
            }
            if d < rho {
                within += 1;
            }
        }
        (nearest, within)
    });
    let mut covering = 0.0f64;
    let mut mult = 0usize;
    for (nearest, within) in stats {
        covering = covering.max(nearest);
        mult = mult.max(within);
    }

    SetMetrics {
        min_pairwise_distance: min_pair,
        covering_radius: covering,
        multiplicity_rho: mult,
    }
}
