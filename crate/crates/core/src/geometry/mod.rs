//! Parameter sampling, state embeddings into real unit spheres, distances,
//! and the rank gate.

pub mod sobol;

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::circuit::{evaluate, ParametricCircuit, StateVector};
use crate::error::{Error, Result};
use crate::io::fmt12;
pub use sobol::Sobol;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SampleSource {
    /// `scramble = None` is the plain sequence.
    Sobol {
        scramble: Option<u64>,
    },
    Grid,
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub thetas: Vec<Vec<f64>>,
    pub source: SampleSource,
    pub circuit_ref: String,
}

fn check_ranges(ranges: &[(f64, f64)]) -> Result<()> {
    for &(lo, hi) in ranges {
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::InvalidArgument(format!("bad sampling range [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// First `n_points` of a Sobol' sequence mapped affinely onto the box.
pub fn sobol_box(n_points: usize, ranges: &[(f64, f64)], scramble: Option<u64>) -> Result<SampleSet> {
    if n_points == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    check_ranges(ranges)?;
    let mut seq = Sobol::new(ranges.len(), scramble)?;
    let thetas = (0..n_points)
        .map(|_| {
            seq.next_point()
                .iter()
                .zip(ranges)
                .map(|(u, (lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect();
    Ok(SampleSet {
        thetas,
        source: SampleSource::Sobol { scramble },
        circuit_ref: String::new(),
    })
}

/// Owen-scrambled Sobol' samples, seeded.
pub fn sobol_torus(n_points: usize, ranges: &[(f64, f64)], seed: u64) -> Result<SampleSet> {
    sobol_box(n_points, ranges, Some(seed))
}

/// `[0, period)` for every slot.
pub fn period_box(circuit: &ParametricCircuit) -> Vec<(f64, f64)> {
    circuit.params().iter().map(|p| (0.0, p.period)).collect()
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn with_circuit_ref(mut self, name: impl Into<String>) -> Self {
        self.circuit_ref = name.into();
        self
    }

    /// One θ per row, header `theta_0,…`.
    pub fn to_csv(&self) -> String {
        let dim = self.thetas.first().map_or(0, Vec::len);
        let mut out = (0..dim).map(|i| format!("theta_{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for t in &self.thetas {
            out.push_str(&t.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut thetas = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::InvalidArgument(format!("sample CSV: {e}")))?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::InvalidArgument(format!("sample CSV: bad number {f:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            thetas.push(row);
        }
        Ok(SampleSet {
            thetas,
            source: SampleSource::Explicit,
            circuit_ref: String::new(),
        })
    }

    /// Checks arity and that every θ lies in `[0, period]` of its slot.
    pub fn check_against(&self, circuit: &ParametricCircuit) -> Result<()> {
        for t in &self.thetas {
            if t.len() != circuit.num_params() {
                return Err(Error::DimensionMismatch {
                    expected: circuit.num_params(),
                    got: t.len(),
                });
            }
            for (x, p) in t.iter().zip(circuit.params()) {
                if !(0.0..=p.period).contains(x) {
                    return Err(Error::InvalidArgument(format!(
                        "sample value {x} outside [0, {}]",
                        p.period
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `(Re ψ; Im ψ)`.
pub fn real_embed(state: &StateVector) -> Vec<f64> {
    let a = state.amplitudes();
    a.iter().map(|z| z.re).chain(a.iter().map(|z| z.im)).collect()
}

/// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a one-qubit state.
pub fn bloch_project(state: &StateVector) -> Result<[f64; 3]> {
    if state.num_qubits() != 1 {
        return Err(Error::InvalidArgument(format!(
            "Bloch projection needs one qubit, got {}",
            state.num_qubits()
        )));
    }
    let (a, b) = (state.amplitudes()[0], state.amplitudes()[1]);
    let ab = a.conj() * b;
    let v = [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::InvalidArgument("zero state".into()));
    }
    Ok(v.map(|x| x / n))
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Great-circle distance between unit vectors.
pub fn orthodromic(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    for v in [x, y] {
        let n = dot(v, v).sqrt();
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("vector norm {n} is not 1")));
        }
    }
    Ok(dot(x, y).clamp(-1.0, 1.0).acos())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    RealDoubling,
    Bloch,
    GramSchmidt,
}

impl EmbeddingKind {
    pub fn name(self) -> &'static str {
        match self {
            EmbeddingKind::RealDoubling => "real_doubling",
            EmbeddingKind::Bloch => "bloch",
            EmbeddingKind::GramSchmidt => "gram_schmidt",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedSet {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
    pub basis_rank: usize,
    pub embedding: EmbeddingKind,
}

pub const DEFAULT_GS_TOL: f64 = 1e-7;

impl EmbeddedSet {
    /// Wraps explicit coordinates; the rank is found by the Gram–Schmidt
    /// recursion on their dot products.
    pub fn from_points(points: Vec<Vec<f64>>, embedding: EmbeddingKind) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            let n = dot(p, p).sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("embedded point norm {n} is not 1")));
            }
        }
        let basis_rank = if points.is_empty() {
            0
        } else {
            gram_schmidt_embed(|i, j| dot(&points[i], &points[j]), points.len(), DEFAULT_GS_TOL)?.basis_rank
        };
        Ok(EmbeddedSet {
            points,
            dim,
            basis_rank,
            embedding,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Header comment with `D`, `r` and the embedding, then one point per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# D={},r={},embedding={}",
            self.dim,
            self.basis_rank,
            self.embedding.name()
        );
        let header: Vec<String> = (0..self.dim).map(|i| format!("x{i}")).collect();
        let _ = writeln!(out, "{}", header.join(","));
        for p in &self.points {
            let _ = writeln!(out, "{}", p.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(","));
        }
        out
    }
}

/// Maps `k` unit vectors known only through their real inner products
/// `oracle(i, j)` to coordinates in `R^r`, `r` the rank of the set.
///
/// A point joins the basis iff its squared residual coordinate `1 − Σ v²`
/// exceeds `tol`, which keeps every pivot above `sqrt(tol)`.
pub fn gram_schmidt_embed(mut oracle: impl FnMut(usize, usize) -> f64, k: usize, tol: f64) -> Result<EmbeddedSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("nothing to embed".into()));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be finite and >= 0"
        )));
    }
    let mut basis: Vec<usize> = Vec::new();
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = Vec::with_capacity(basis.len() + 1);
        for (j, &b) in basis.iter().enumerate() {
            let o = oracle(i, b);
            if !o.is_finite() || o.abs() > 1.0 + tol {
                return Err(Error::InvalidArgument(format!(
                    "inner product {o} out of range at ({i}, {b})"
                )));
            }
            let vb = &coords[b];
            let s: f64 = v.iter().zip(vb).map(|(x, y)| x * y).sum();
            v.push((o - s) / vb[j]);
        }
        let resid = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
        if resid < -tol {
            return Err(Error::Numerical(format!("negative residual {resid:e} at point {i}")));
        }
        if resid > tol {
            v.push(resid.sqrt());
            basis.push(i);
        }
        coords.push(v);
    }
    let r = basis.len();
    for v in &mut coords {
        v.resize(r, 0.0);
        let n = dot(v, v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
    }
    Ok(EmbeddedSet {
        points: coords,
        dim: r,
        basis_rank: r,
        embedding: EmbeddingKind::GramSchmidt,
    })
}

/// Gram–Schmidt embedding of states through `Re⟨a, b⟩`.
pub fn embed_states(states: &[StateVector], tol: f64) -> Result<EmbeddedSet> {
    gram_schmidt_embed(
        |i, j| states[i].inner(&states[j]).map(|z| z.re).unwrap_or(f64::NAN),
        states.len(),
        tol,
    )
}

/// Bloch vectors of one-qubit states.
pub fn embed_bloch(states: &[StateVector]) -> Result<EmbeddedSet> {
    let points = states
        .iter()
        .map(|s| bloch_project(s).map(|v| v.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    EmbeddedSet::from_points(points, EmbeddingKind::Bloch)
}

/// Circuit outputs at every θ of the sample set.
pub fn evaluate_samples(circuit: &ParametricCircuit, samples: &SampleSet) -> Result<Vec<StateVector>> {
    samples.thetas.iter().map(|t| evaluate(circuit, t)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum RankGate {
    Pass,
    Fail { alpha_lower_bound: f64 },
}

impl RankGate {
    pub fn passed(&self) -> bool {
        matches!(self, RankGate::Pass)
    }
}

/// Passes iff the samples span all `required_d` dimensions. Otherwise every
/// sample is orthogonal to some unit vector, so the covering radius is at
/// least π/2.
pub fn rank_gate(embedded: &EmbeddedSet, required_d: usize) -> RankGate {
    if embedded.basis_rank >= required_d.max(1) {
        RankGate::Pass
    } else {
        RankGate::Fail {
            alpha_lower_bound: PI / 2.0,
        }
    }
}

/// Quasi-equidistant points on the circle (`D = 2`) or sphere (`D = 3`) by
/// latitude bands spaced `π/k` apart, `k` the integer nearest to `π/d`.
pub fn latitude_band_points(n_target: usize, d: usize) -> Result<Vec<Vec<f64>>> {
    if n_target < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    match d {
        2 => Ok((0..n_target)
            .map(|j| {
                let a = 2.0 * PI * j as f64 / n_target as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()),
        3 => {
            let d_target = (4.0 * PI / n_target as f64).sqrt();
            let bands = ((PI / d_target).round() as usize).max(1);
            let d1 = PI / bands as f64;
            let mut pts = Vec::new();
            for j in 0..=bands {
                let phi = j as f64 * d1;
                let m = if j == 0 || j == bands {
                    1
                } else {
                    ((2.0 * PI * phi.sin() / d1).round() as usize).max(1)
                };
                let offset = if j % 2 == 1 { 0.5 } else { 0.0 };
                for i in 0..m {
                    let lon = 2.0 * PI * (i as f64 + offset) / m as f64;
                    let (s, c) = if j == bands {
                        (0.0, -1.0)
                    } else {
                        (phi.sin(), phi.cos())
                    };
                    pts.push(vec![s * lon.cos(), s * lon.sin(), c]);
                }
            }
            Ok(pts)
        }
        _ => Err(Error::Unsupported(format!("latitude bands in dimension {d}"))),
    }
}
