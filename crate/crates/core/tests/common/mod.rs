#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use expressivity::circuit::{Angle, Control, Gate, Generator, ParamSpec, ParametricCircuit, StateVector};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Normalized complex Gaussian vector, i.e. a Haar-random state.
pub fn haar_state(num_qubits: usize, rng: &mut ChaCha20Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1usize << num_qubits)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::new(amps.into_iter().map(|a| a / n).collect()).unwrap()
}

fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        let mut e = vec![Complex64::new(0.0, 0.0); v.len()];
        e[0] = Complex64::new(1.0, 0.0);
        return e;
    }
    v.iter().map(|a| a / n).collect()
}

/// `RY(c) RZ(b) RX(a) |0⟩ = t`, phase included.
fn solve_one_qubit(t: &[Complex64]) -> [f64; 3] {
    let (t0, t1) = (t[0], t[1]);
    // u = RY(−c) t has u0·u1 = ½ sin c (t1² − t0²) + cos c · t0 t1, which must be −i·|u0 u1|.
    let p = t1 * t1 - t0 * t0;
    let r = t0 * t1;
    let mut c = (-2.0 * r.re).atan2(p.re);
    let u_at = |c: f64| {
        let (s, co) = ((c / 2.0).sin(), (c / 2.0).cos());
        (co * t0 + s * t1, -s * t0 + co * t1)
    };
    if (u_at(c).0 * u_at(c).1).im > 0.0 {
        c += PI;
    }
    let (u0, u1) = u_at(c);
    let a = 2.0 * u1.norm().atan2(u0.norm());
    let b = if u0.norm() > 1e-12 {
        -2.0 * u0.arg()
    } else {
        2.0 * (u1.arg() + PI / 2.0)
    };
    [a, b, c]
}

/// Parameters of the global-phase MMEC on `q` qubits that prepare `target` exactly.
///
/// Splits `target = |0⟩ψ₀ + |1⟩ψ₁` on the first qubit, picks `θ₁` from the
/// branch norms and recurses on `iψ₀/|ψ₀|` and `ψ₁/|ψ₁|`.
pub fn solve_mmec(target: &[Complex64]) -> Vec<f64> {
    if target.len() == 2 {
        return solve_one_qubit(target).to_vec();
    }
    let half = target.len() / 2;
    let (psi0, psi1) = target.split_at(half);
    let n0 = psi0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let n1 = psi1.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let theta1 = 2.0 * n0.atan2(n1);
    let i = Complex64::new(0.0, 1.0);
    let first: Vec<Complex64> = psi0.iter().map(|a| i * a).collect();
    let mut out = vec![theta1];
    out.extend(solve_mmec(&normalized(&first)));
    out.extend(solve_mmec(&normalized(psi1)));
    out
}

/// Random rotations, CNOTs and controlled rotations on `q` qubits, one slot per rotation.
///
/// `real_only` keeps amplitudes real (Y rotations and CNOTs only).
pub fn random_circuit(q: usize, n_gates: usize, real_only: bool, rng: &mut ChaCha20Rng) -> ParametricCircuit {
    let mut gates = Vec::new();
    let mut slots = 0;
    for _ in 0..n_gates {
        let target = rng.random_range(0..q);
        let kind = rng.random_range(0..if q > 1 { 4 } else { 2 });
        match kind {
            0 | 1 => {
                let pauli = if real_only {
                    'Y'
                } else {
                    ['X', 'Y', 'Z'][rng.random_range(0..3)]
                };
                let mut s: Vec<char> = vec!['I'; q];
                s[target] = pauli;
                let g = Generator::parse(&s.iter().collect::<String>(), vec![]).unwrap();
                gates.push(Gate::rotation(g, Angle::slot(slots)));
                slots += 1;
            }
            2 => {
                let control = (target + rng.random_range(1..q)) % q;
                gates.push(Gate::cnot(control, target));
            }
            _ => {
                let control = (target + rng.random_range(1..q)) % q;
                let pauli = if real_only {
                    'Y'
                } else {
                    ['X', 'Y', 'Z'][rng.random_range(0..3)]
                };
                let mut s: Vec<char> = vec!['I'; q];
                s[target] = pauli;
                let c = if rng.random_bool(0.5) {
                    Control::on_one(control)
                } else {
                    Control::on_zero(control)
                };
                let g = Generator::parse(&s.iter().collect::<String>(), vec![c]).unwrap();
                gates.push(Gate::rotation(g, Angle::slot(slots)));
                slots += 1;
            }
        }
    }
    if slots == 0 {
        gates.push(Gate::ry(0, Angle::slot(0)));
        slots = 1;
    }
    ParametricCircuit::new(q, vec![ParamSpec::default(); slots], gates).unwrap()
}

/// Numerical rank of the rows of `rows` by SVD, relative threshold.
pub fn svd_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
