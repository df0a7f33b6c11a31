//! Spherical Voronoi diagrams on S² from the convex hull, the covering
//! radius `α_C(N)`, a Monte-Carlo fallback in any dimension, and rate fits.

pub mod hull;
pub mod kdtree;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, EmbeddedSet};
pub use kdtree::KdTree;

const MERGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalVoronoi {
    pub samples: Vec<[f64; 3]>,
    pub delaunay_facets: Vec<[usize; 3]>,
    pub voronoi_vertices: Vec<[f64; 3]>,
    /// Merged vertex index of each facet.
    pub facet_vertex: Vec<usize>,
    pub region_vertices: Vec<Vec<usize>>,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(u: &[f64; 3], w: &[f64; 3]) -> [f64; 3] {
    [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]
}

/// Orthodromic distance between unit vectors, clamped.
pub fn arc(x: &[f64], y: &[f64]) -> f64 {
    dot(x, y).clamp(-1.0, 1.0).acos()
}

fn chord_to_arc(d2: f64) -> f64 {
    // chord c = 2 sin(θ/2)
    2.0 * (d2.sqrt() / 2.0).min(1.0).asin()
}

fn union_find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Fails on duplicate samples (closer than 1e-12).
pub fn check_distinct(points: &[Vec<f64>]) -> Result<()> {
    let tree = KdTree::new(points);
    for (i, p) in points.iter().enumerate() {
        if let Some(j) = tree.within(p, 1e-12).into_iter().find(|&j| j != i) {
            return Err(Error::Degenerate(format!(
                "samples {} and {} coincide",
                i.min(j),
                i.max(j)
            )));
        }
    }
    Ok(())
}

/// Delaunay triangulation of unit vectors on S² as the faces of their convex
/// hull, with Voronoi vertices at the outward unit normals of the faces.
///
/// Circumcenters closer than 1e-9 are merged into one vertex.
pub fn spherical_delaunay(points: &[Vec<f64>]) -> Result<SphericalVoronoi> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!(
            "spherical Delaunay needs at least 4 points, got {}",
            points.len()
        )));
    }
    let mut samples = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: p.len(),
            });
        }
        let n = dot(p, p).sqrt();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("sample norm {n} is not 1")));
        }
        samples.push([p[0], p[1], p[2]]);
    }
    check_distinct(points)?;
    let facets = hull::convex_hull(&samples)?;

    let mut centers = Vec::with_capacity(facets.len());
    for f in &facets {
        let [a, b, c] = f.map(|i| samples[i]);
        let nrm = cross(&sub(&b, &a), &sub(&c, &a));
        let len = dot(&nrm, &nrm).sqrt();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::Numerical("degenerate Delaunay facet".into()));
        }
        centers.push(nrm.map(|x| x / len));
    }

    let as_vecs: Vec<Vec<f64>> = centers.iter().map(|c| c.to_vec()).collect();
    let tree = KdTree::new(&as_vecs);
    let mut parent: Vec<usize> = (0..centers.len()).collect();
    for (i, c) in as_vecs.iter().enumerate() {
        for j in tree.within(c, MERGE_TOL) {
            let (ri, rj) = (union_find_root(&mut parent, i), union_find_root(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut merged_id = vec![usize::MAX; centers.len()];
    let mut voronoi_vertices = Vec::new();
    let mut facet_vertex = Vec::with_capacity(centers.len());
    for i in 0..centers.len() {
        let r = union_find_root(&mut parent, i);
        if merged_id[r] == usize::MAX {
            merged_id[r] = voronoi_vertices.len();
            voronoi_vertices.push(centers[r]);
        }
        facet_vertex.push(merged_id[r]);
    }

    let mut region_vertices = vec![Vec::new(); samples.len()];
    for (f, tri) in facets.iter().enumerate() {
        for &s in tri {
            let v = facet_vertex[f];
            if !region_vertices[s].contains(&v) {
                region_vertices[s].push(v);
            }
        }
    }
    Ok(SphericalVoronoi {
        samples,
        delaunay_facets: facets,
        voronoi_vertices,
        facet_vertex,
        region_vertices,
    })
}

impl SphericalVoronoi {
    /// `max_δ max_{v ∈ V_δ} d(δ, v)`.
    pub fn alpha_by_region(&self) -> f64 {
        self.region_vertices
            .iter()
            .enumerate()
            .flat_map(|(s, vs)| vs.iter().map(move |&v| (s, v)))
            .map(|(s, v)| arc(&self.samples[s], &self.voronoi_vertices[v]))
            .fold(0.0, f64::max)
    }

    /// `max_v min_j d(v, δ_j)`, the reference evaluation.
    pub fn alpha_by_vertex_sweep(&self) -> f64 {
        let pts: Vec<Vec<f64>> = self.samples.iter().map(|s| s.to_vec()).collect();
        let tree = KdTree::new(&pts);
        self.voronoi_vertices
            .iter()
            .map(|v| {
                let (j, _) = tree.nearest(v).expect("samples are non-empty");
                arc(v, &self.samples[j])
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaMethod {
    VoronoiExact,
    MonteCarlo {
        test_points: usize,
        seed: u64,
    },
    /// Fewer than two distinct samples: the covering radius is π.
    Degenerate,
    /// The samples lie in a proper subspace; α is at least π/2.
    RankDeficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub value: f64,
    pub n: usize,
    pub method: AlphaMethod,
    pub is_upper_bound_estimate: bool,
    pub embedding: String,
}

/// Both evaluation orders, which must agree within 1e-9.
pub fn alpha_from_voronoi(sv: &SphericalVoronoi, embedding: &str) -> Result<AlphaEstimate> {
    let reference = sv.alpha_by_vertex_sweep();
    let by_region = sv.alpha_by_region();
    if (reference - by_region).abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "Voronoi alpha evaluations disagree: {reference} vs {by_region}"
        )));
    }
    Ok(AlphaEstimate {
        value: reference,
        n: sv.samples.len(),
        method: AlphaMethod::VoronoiExact,
        is_upper_bound_estimate: true,
        embedding: embedding.to_string(),
    })
}

/// Uniform points on `S^{D−1}` from normalized Gaussians.
pub fn uniform_sphere_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = dot(&v, &v).sqrt();
        if len > 1e-12 {
            out.push(v.into_iter().map(|x| x / len).collect());
        }
    }
    out
}

/// Max over random test points of the distance to the nearest sample.
/// Never exceeds the true covering radius.
pub fn alpha_monte_carlo(samples: &EmbeddedSet, n_test: usize, seed: u64) -> Result<AlphaEstimate> {
    if n_test == 0 {
        return Err(Error::InvalidArgument("need at least one test point".into()));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let tree = KdTree::new(&samples.points);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut value: f64 = 0.0;
    let mut x = vec![0.0; samples.dim];
    for _ in 0..n_test {
        let len = loop {
            x.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
            let len = dot(&x, &x).sqrt();
            if len > 1e-12 {
                break len;
            }
        };
        x.iter_mut().for_each(|v| *v /= len);
        let (_, d2) = tree.nearest(&x).expect("samples are non-empty");
        value = value.max(chord_to_arc(d2));
    }
    Ok(AlphaEstimate {
        value,
        n: samples.len(),
        method: AlphaMethod::MonteCarlo {
            test_points: n_test,
            seed,
        },
        is_upper_bound_estimate: false,
        embedding: samples.embedding.name().to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub prefactor: f64,
    pub exponent: f64,
}

/// Least squares of `log α = log c + ρ log N`.
pub fn fit_rate(series: &[(f64, f64)]) -> Result<RateFit> {
    if series.len() < 3 {
        return Err(Error::InvalidArgument("rate fit needs at least 3 points".into()));
    }
    if series
        .iter()
        .any(|&(n, a)| !(n > 0.0 && a > 0.0 && n.is_finite() && a.is_finite()))
    {
        return Err(Error::InvalidArgument("rate fit needs positive finite values".into()));
    }
    let k = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("rate fit needs at least two distinct N".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    Ok(RateFit {
        prefactor: (my - exponent * mx).exp(),
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::EmbeddingKind;

    fn octahedron() -> Vec<Vec<f64>> {
        let mut pts = Vec::new();
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = vec![0.0; 3];
                p[k] = s;
                pts.push(p);
            }
        }
        pts
    }

    fn tetrahedron() -> Vec<Vec<f64>> {
        let r = 1.0 / 3f64.sqrt();
        vec![vec![r, r, r], vec![r, -r, -r], vec![-r, r, -r], vec![-r, -r, r]]
    }

    #[test]
    fn octahedron_dual_is_cube() {
        let sv = spherical_delaunay(&octahedron()).unwrap();
        assert_eq!(sv.delaunay_facets.len(), 8);
        assert_eq!(sv.voronoi_vertices.len(), 8);
        let r = 1.0 / 3f64.sqrt();
        for v in &sv.voronoi_vertices {
            assert!(v.iter().all(|x| (x.abs() - r).abs() < 1e-15));
        }
        let a = alpha_from_voronoi(&sv, "bloch").unwrap();
        assert!((a.value - r.acos()).abs() < 1e-12);
        assert!((r.acos() - 0.95532).abs() < 1e-5);
    }

    #[test]
    fn tetrahedron_vertices_are_opposite_antipodes() {
        let pts = tetrahedron();
        let sv = spherical_delaunay(&pts).unwrap();
        assert_eq!(sv.voronoi_vertices.len(), 4);
        for v in &sv.voronoi_vertices {
            assert!(pts.iter().any(|p| (dot(p, v) + 1.0).abs() < 1e-12));
        }
        let a = alpha_from_voronoi(&sv, "bloch").unwrap();
        assert!((a.value - (1.0f64 / 3.0).acos()).abs() < 1e-12);
    }

    #[test]
    fn duplicates_rejected() {
        let mut pts = octahedron();
        pts.push(pts[2].clone());
        assert!(matches!(spherical_delaunay(&pts), Err(Error::Degenerate(_))));
    }

    #[test]
    fn hemisphere_samples_keep_the_empty_side_vertex() {
        // four points near the north pole; the far side is uncovered
        let mut pts: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let t = k as f64 * std::f64::consts::FRAC_PI_2 + 0.1;
                let s = 0.3f64;
                vec![s * t.cos(), s * t.sin(), (1.0 - s * s).sqrt()]
            })
            .collect();
        pts.push(vec![0.0, 0.0, 1.0]);
        let sv = spherical_delaunay(&pts).unwrap();
        let a = alpha_from_voronoi(&sv, "bloch").unwrap();
        assert!((a.value - (std::f64::consts::PI - 0.3f64.asin())).abs() < 1e-12);
    }

    #[test]
    fn cocircular_facets_merge() {
        let mut pts = octahedron();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        pts.push(vec![r, r, 0.0]);
        pts.push(vec![-r, r, 0.0]);
        let sv = spherical_delaunay(&pts).unwrap();
        let a = alpha_from_voronoi(&sv, "bloch").unwrap();
        let mc = alpha_monte_carlo(&EmbeddedSet::from_points(pts, EmbeddingKind::Bloch).unwrap(), 20_000, 1).unwrap();
        assert!(mc.value <= a.value + 1e-9);
        assert!(a.value - mc.value < 0.05);
    }

    #[test]
    fn monte_carlo_single_sample_and_octahedron() {
        let north = EmbeddedSet::from_points(vec![vec![0.0, 0.0, 1.0]], EmbeddingKind::Bloch).unwrap();
        let a = alpha_monte_carlo(&north, 10_000, 2).unwrap();
        assert!(a.value <= std::f64::consts::PI && a.value > 3.0);
        let oct = EmbeddedSet::from_points(octahedron(), EmbeddingKind::Bloch).unwrap();
        let a = alpha_monte_carlo(&oct, 1_000_000, 3).unwrap();
        assert!(((1.0 / 3f64.sqrt()).acos() - a.value).abs() < 0.01);
        assert!(!a.is_upper_bound_estimate);
    }

    #[test]
    fn rate_fits() {
        let s: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0]
            .iter()
            .map(|&n| (n, 2.0 / f64::sqrt(n)))
            .collect();
        let f = fit_rate(&s).unwrap();
        assert!((f.prefactor - 2.0).abs() < 1e-12 && (f.exponent + 0.5).abs() < 1e-12);
        let f = fit_rate(&[(1.0, 0.3), (2.0, 0.3), (4.0, 0.3)]).unwrap();
        assert!(f.exponent.abs() < 1e-15);
        assert!(fit_rate(&[(1.0, 0.3), (2.0, 0.0), (4.0, 0.3)]).is_err());
        assert!(fit_rate(&[(1.0, 0.3), (2.0, 0.1)]).is_err());
    }
}
