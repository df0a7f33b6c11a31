//! Metric tensor and volume of the circuit image, covering-radius scaling
//! laws and volume-based bounds, and the spiral test circuits.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::circuit::{evaluate, tangent_vector, Angle, Gate, ParamSpec, ParametricCircuit, StateVector};
use crate::dea::{full_gram, DeaMode, GramKind, GramMatrix};
use crate::error::{Error, Result};
use crate::geometry::sobol_torus;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// `Re⟨∂_j C, ∂_k C⟩` on the Hilbert sphere.
    Hilbert,
    /// Pullback of the Bloch-sphere metric; one qubit only.
    Bloch,
}

/// Derivatives of the Bloch vector: `∂b_i = 2 Re⟨C|σ_i|∂C⟩`.
fn bloch_jacobian(state: &StateVector, tangents: &[StateVector]) -> DMatrix<f64> {
    let (a, b) = (state.amplitudes()[0], state.amplitudes()[1]);
    let mut j = DMatrix::zeros(3, tangents.len());
    for (col, t) in tangents.iter().enumerate() {
        let (da, db) = (t.amplitudes()[0], t.amplitudes()[1]);
        // σ_x ψ = (b, a), σ_y ψ = (−i b, i a), σ_z ψ = (a, −b)
        let x = a.conj() * db + b.conj() * da;
        let y = a.conj() * db - b.conj() * da;
        let z = a.conj() * da - b.conj() * db;
        j[(0, col)] = 2.0 * x.re;
        j[(1, col)] = 2.0 * y.im;
        j[(2, col)] = 2.0 * z.re;
    }
    j
}

/// `g(θ)` in the requested gauge.
pub fn metric(circuit: &ParametricCircuit, theta: &[f64], gauge: Gauge) -> Result<GramMatrix> {
    match gauge {
        Gauge::Hilbert => {
            let g = full_gram(circuit, theta, DeaMode::Exact)?;
            GramMatrix::new(g.entries().clone(), GramKind::Metric)
        }
        Gauge::Bloch => {
            if circuit.num_qubits() != 1 {
                return Err(Error::InvalidArgument(format!(
                    "Bloch gauge needs a one-qubit circuit, got {} qubits",
                    circuit.num_qubits()
                )));
            }
            let state = evaluate(circuit, theta)?;
            let tangents = (0..circuit.num_params())
                .map(|k| tangent_vector(circuit, theta, k))
                .collect::<Result<Vec<_>>>()?;
            let j = bloch_jacobian(&state, &tangents);
            GramMatrix::new(j.transpose() * j, GramKind::Metric)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricSample {
    pub theta: Vec<f64>,
    pub g: GramMatrix,
    pub sqrt_det_g: f64,
}

pub fn metric_sample(circuit: &ParametricCircuit, theta: &[f64], gauge: Gauge) -> Result<MetricSample> {
    let g = metric(circuit, theta, gauge)?;
    let sqrt_det_g = g.determinant().max(0.0).sqrt();
    Ok(MetricSample {
        theta: theta.to_vec(),
        g,
        sqrt_det_g,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quadrature {
    TensorTrapezoid { points_per_dim: usize },
    Qmc { n: usize, seed: u64 },
}

/// Tensor trapezoid for up to three slots, scrambled Sobol' beyond.
pub fn default_quadrature(num_params: usize) -> Quadrature {
    match num_params {
        0 | 1 => Quadrature::TensorTrapezoid { points_per_dim: 4096 },
        2 => Quadrature::TensorTrapezoid { points_per_dim: 256 },
        3 => Quadrature::TensorTrapezoid { points_per_dim: 48 },
        _ => Quadrature::Qmc { n: 1 << 16, seed: 0 },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub volume: f64,
    pub quadrature: Quadrature,
    pub gauge: Gauge,
    pub dim_m: usize,
    /// `None` when the volume vanishes or the image has the full dimension
    /// of the state sphere, where the bound says nothing.
    pub alpha_lower_bound: Option<f64>,
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `Σ_j ω_j sqrt(det g(θ_j))` over the periodic parameter box.
pub fn volume(circuit: &ParametricCircuit, quadrature: Quadrature, gauge: Gauge) -> Result<VolumeReport> {
    let d = circuit.num_params();
    if d == 0 {
        return Err(Error::InvalidArgument("circuit has no parameters".into()));
    }
    let periods = circuit.periods();
    let box_volume: f64 = periods.iter().product();
    let (nodes, weight): (Vec<Vec<f64>>, f64) = match quadrature {
        Quadrature::TensorTrapezoid { points_per_dim: k } => {
            if k < 2 {
                return Err(Error::InvalidArgument(
                    "trapezoid needs at least 2 points per slot".into(),
                ));
            }
            let total = (k as u128)
                .checked_pow(d as u32)
                .filter(|&t| t <= 1 << 26)
                .ok_or_else(|| Error::InvalidArgument(format!("{k}^{d} trapezoid nodes is too many; use qmc")))?
                as usize;
            let nodes = (0..total)
                .map(|mut idx| {
                    (0..d)
                        .map(|s| {
                            let i = idx % k;
                            idx /= k;
                            periods[s] * i as f64 / k as f64
                        })
                        .collect()
                })
                .collect();
            (nodes, box_volume / total as f64)
        }
        Quadrature::Qmc { n, seed } => {
            if n < 2 {
                return Err(Error::InvalidArgument("qmc needs at least 2 points".into()));
            }
            let ranges: Vec<(f64, f64)> = periods.iter().map(|&p| (0.0, p)).collect();
            (sobol_torus(n, &ranges, seed)?.thetas, box_volume / n as f64)
        }
    };
    let values = nodes
        .iter()
        .map(|t| Ok(metric_sample(circuit, t, gauge)?.sqrt_det_g))
        .collect::<Result<Vec<f64>>>()?;
    let volume = weight * pairwise_sum(&values);
    let sphere_dim = match gauge {
        Gauge::Bloch => 2,
        Gauge::Hilbert => (2usize << circuit.num_qubits()) - 1,
    };
    let alpha_lower_bound = if volume > 0.0 && d < sphere_dim {
        Some(alpha_lower_bound_from_volume(volume, d)?)
    } else {
        None
    };
    Ok(VolumeReport {
        volume,
        quadrature,
        gauge,
        dim_m: d,
        alpha_lower_bound,
    })
}

/// Area of the unit sphere `S^{m−1} ⊂ R^m`: `2π^{m/2}/Γ(m/2)`.
pub fn sphere_area(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Covering radius of `n` ideally spread points on `S^{D−1}`.
pub fn alpha_opt(n: usize, d: usize) -> Result<f64> {
    if n == 0 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "alpha_opt needs N >= 1 and D >= 2, got N={n}, D={d}"
        )));
    }
    Ok((sphere_area(d) / n as f64).powf(1.0 / (d as f64 - 1.0)) * (d as f64).sqrt() / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyBounds {
    pub v1: f64,
    pub v2: f64,
    /// Band count `n` with `2α ≈ π/n` used for `V1`.
    pub bands: usize,
}

/// Volumes of the two greedy covering paths of a `dim_m`-dimensional image
/// with covering radius `alpha`.
pub fn greedy_path_bounds(alpha: f64, dim_m: usize) -> Result<GreedyBounds> {
    if !(alpha > 0.0 && alpha.is_finite()) || dim_m == 0 {
        return Err(Error::InvalidArgument(format!(
            "greedy bounds need alpha > 0 and dim M >= 1, got {alpha}, {dim_m}"
        )));
    }
    let n = ((PI / (2.0 * alpha)).round() as usize).max(1);
    let nf = n as f64;
    let l1 = PI / nf + 2.0 * PI / (PI / (2.0 * nf)).tan();
    let l1 = if n == 1 { PI } else { l1 };
    let area = sphere_area(dim_m);
    let h = dim_m as f64 / 2.0;
    Ok(GreedyBounds {
        v1: l1 * area,
        v2: 2.0 * PI.powf(h + 1.0) * (1.0 + PI * PI / (alpha * alpha)).sqrt() / gamma(h),
        bands: n,
    })
}

/// Heuristic lower estimate `4π^{m/2+1}/(Γ(m/2)·vol)`, capped at π.
pub fn alpha_lower_bound_from_volume(vol: f64, dim_m: usize) -> Result<f64> {
    if !(vol > 0.0) || dim_m == 0 {
        return Err(Error::InvalidArgument(format!(
            "volume bound needs vol > 0 and dim M >= 1, got {vol}"
        )));
    }
    let h = dim_m as f64 / 2.0;
    Ok((4.0 * PI.powf(h + 1.0) / (gamma(h) * vol)).min(PI))
}

/// `R_Z(2nθ) R_Y(θ mod π)|0⟩`, Bloch curve
/// `(sin(θ mod π) cos 2nθ, sin(θ mod π) sin 2nθ, cos(θ mod π))`.
pub fn spiral_circuit(n: u32) -> ParametricCircuit {
    ParametricCircuit::new(
        1,
        vec![ParamSpec::default()],
        vec![
            Gate::ry(
                0,
                Angle::Slot {
                    index: 0,
                    scale: 1.0,
                    wrap: Some(PI),
                },
            ),
            Gate::rz(0, Angle::scaled(0, 2.0 * n as f64)),
        ],
    )
    .expect("spiral circuit is valid")
}
