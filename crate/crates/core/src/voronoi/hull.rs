//! Randomized incremental 3D convex hull with conflict lists and exact
//! orientation predicates.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust::{orient3d, Coord3D};

use crate::error::{Error, Result};

fn coord(p: &[f64; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Positive iff `d` is on the inner side of the counter-clockwise face `abc`.
fn orient(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> f64 {
    orient3d(coord(a), coord(b), coord(c), coord(d))
}

struct Facet {
    v: [usize; 3],
    alive: bool,
    conflicts: Vec<usize>,
}

/// Triangles of the hull, each counter-clockwise seen from outside.
/// Points strictly inside the hull of the others are not used.
pub fn convex_hull(points: &[[f64; 3]]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::Degenerate(format!("hull needs at least 4 points, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed_4a11));

    // initial tetrahedron
    let i0 = order[0];
    let i1 = order[1..]
        .iter()
        .position(|&j| points[j] != points[i0])
        .map(|k| k + 1)
        .ok_or_else(|| Error::Degenerate("all points coincide".into()))?;
    order.swap(1, i1);
    let (p0, p1) = (points[order[0]], points[order[1]]);
    let i2 = order[2..]
        .iter()
        .position(|&j| {
            let p = points[j];
            let u = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
            let w = [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]];
            let c = [
                u[1] * w[2] - u[2] * w[1],
                u[2] * w[0] - u[0] * w[2],
                u[0] * w[1] - u[1] * w[0],
            ];
            c != [0.0; 3]
        })
        .map(|k| k + 2)
        .ok_or_else(|| Error::Degenerate("all points collinear".into()))?;
    order.swap(2, i2);
    let p2 = points[order[2]];
    let i3 = order[3..]
        .iter()
        .position(|&j| orient(&p0, &p1, &p2, &points[j]) != 0.0)
        .map(|k| k + 3)
        .ok_or_else(|| Error::Degenerate("all points coplanar".into()))?;
    order.swap(3, i3);
    if orient(&p0, &p1, &p2, &points[order[3]]) < 0.0 {
        order.swap(1, 2);
    }
    let [a, b, c, d] = [order[0], order[1], order[2], order[3]];

    let mut facets: Vec<Facet> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let mut point_conflicts: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut done = vec![false; n];
    for &i in &order[..4] {
        done[i] = true;
    }

    let visible = |f: &[usize; 3], p: usize| orient(&points[f[0]], &points[f[1]], &points[f[2]], &points[p]) < 0.0;

    for v in [[a, b, c], [a, d, b], [b, d, c], [c, d, a]] {
        let id = facets.len();
        let conflicts: Vec<usize> = order[4..].iter().copied().filter(|&p| visible(&v, p)).collect();
        for &p in &conflicts {
            point_conflicts[p].push(id);
        }
        for k in 0..3 {
            edges.insert((v[k], v[(k + 1) % 3]), id);
        }
        facets.push(Facet {
            v,
            alive: true,
            conflicts,
        });
    }

    let mut stamp = vec![usize::MAX; n];
    let mut is_visible = Vec::new();
    for step in 4..n {
        let p = order[step];
        done[p] = true;
        let vis: Vec<usize> = point_conflicts[p]
            .iter()
            .copied()
            .filter(|&f| facets[f].alive)
            .collect();
        point_conflicts[p] = Vec::new();
        if vis.is_empty() {
            continue;
        }
        is_visible.resize(facets.len(), false);
        for &f in &vis {
            is_visible[f] = true;
        }
        let mut horizon = Vec::new();
        for &f in &vis {
            let v = facets[f].v;
            for k in 0..3 {
                let (u, w) = (v[k], v[(k + 1) % 3]);
                let g = edges[&(w, u)];
                if !is_visible[g] {
                    horizon.push((u, w, f, g));
                }
            }
        }
        for &f in &vis {
            facets[f].alive = false;
            let v = facets[f].v;
            for k in 0..3 {
                edges.remove(&(v[k], v[(k + 1) % 3]));
            }
        }
        for (u, w, f, g) in horizon {
            let id = facets.len();
            let v = [u, w, p];
            let mut conflicts = Vec::new();
            for &q in facets[f].conflicts.iter().chain(&facets[g].conflicts) {
                if done[q] || stamp[q] == id {
                    continue;
                }
                stamp[q] = id;
                if visible(&v, q) {
                    conflicts.push(q);
                    point_conflicts[q].push(id);
                }
            }
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]), id);
            }
            facets.push(Facet {
                v,
                alive: true,
                conflicts,
            });
        }
        for &f in &vis {
            is_visible[f] = false;
            facets[f].conflicts = Vec::new();
        }
    }
    Ok(facets.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_sphere(n: usize, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..1.0);
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                [r * t.cos(), r * t.sin(), z]
            })
            .collect()
    }

    #[test]
    fn sphere_points_are_all_on_the_hull() {
        let pts = random_sphere(400, 3);
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 2 * pts.len() - 4);
        for f in &hull {
            for q in 0..pts.len() {
                assert!(orient(&pts[f[0]], &pts[f[1]], &pts[f[2]], &pts[q]) >= 0.0);
            }
        }
    }

    #[test]
    fn octahedron_has_eight_faces() {
        let mut pts = Vec::new();
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[k] = s;
                pts.push(p);
            }
        }
        assert_eq!(convex_hull(&pts).unwrap().len(), 8);
    }

    #[test]
    fn interior_point_is_skipped() {
        let pts = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [-1.0, -1.0, -1.0],
            [0.0, 0.0, 0.0],
        ];
        let hull = convex_hull(&pts).unwrap();
        assert_eq!(hull.len(), 4);
        assert!(hull.iter().all(|f| !f.contains(&4)));
    }

    #[test]
    fn coplanar_input_rejected() {
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        assert!(matches!(convex_hull(&pts), Err(Error::Degenerate(_))));
    }
}
