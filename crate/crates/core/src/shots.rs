//! Ancilla interferometry for `Re⟨γ_m, γ_n⟩` and `Re⟨C_1, C_2⟩`, simulated
//! with finite measurement statistics.
//!
//! The ancilla is qubit 0 of the interference circuit; the base register is
//! shifted up by one. The ancilla starts in `|0⟩`, is put into
//! `(|0⟩ + |1⟩)/√2` by a Hadamard, conditions the two branches, and is
//! recombined by a final Hadamard so that `P(anc = 0) = (1 + Re⟨a, b⟩)/2`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::circuit::{evaluate, Angle, Control, Gate, Generator, ParametricCircuit, StateVector};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum InterferenceMode {
    /// Estimate `Re⟨γ_m, γ_n⟩` of the base circuit.
    DerivativePair { m: usize, n: usize },
    /// Estimate `Re⟨C_base(θ), C_other(θ')⟩`.
    CircuitPair {
        other: ParametricCircuit,
        other_theta: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct InterferenceJob {
    pub base_circuit: ParametricCircuit,
    pub theta: Vec<f64>,
    pub mode: InterferenceMode,
    pub shots: u64,
    pub rng_seed: u64,
}

/// One interference circuit. The requested real inner product is
/// `Σ weight · (2 P(anc = 0) − 1)` over the terms of a job.
#[derive(Clone, Debug)]
pub struct InterferenceTerm {
    pub weight: f64,
    pub circuit: ParametricCircuit,
    pub theta: Vec<f64>,
}

impl InterferenceTerm {
    /// Exact marginal probability of measuring the ancilla in `|0⟩`.
    pub fn prob_anc0(&self) -> Result<f64> {
        let state = evaluate(&self.circuit, &self.theta)?;
        Ok(ancilla_zero_probability(&state))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub shots: u64,
}

fn ancilla_zero_probability(state: &StateVector) -> f64 {
    let half = state.len() / 2;
    let p: f64 = state.amplitudes()[..half].iter().map(|a| a.norm_sqr()).sum();
    p.clamp(0.0, 1.0)
}

/// SplitMix64 finalizer; derives independent per-item seeds from one user seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn lift_initial_state(base: &StateVector) -> Result<StateVector> {
    let mut amps = base.amplitudes().to_vec();
    amps.resize(2 * base.len(), num_complex::Complex64::new(0.0, 0.0));
    StateVector::from_amplitudes(amps)
}

fn insertion_gate(circuit: &ParametricCircuit, slot: usize) -> Result<usize> {
    if slot >= circuit.num_params() {
        return Err(Error::SlotOutOfRange {
            slot,
            num_params: circuit.num_params(),
        });
    }
    let gates = circuit.gates_for_slot(slot);
    match (gates.as_slice(), gates.first().map(|&k| &circuit.gates()[k])) {
        (
            [k],
            Some(Gate::Rotation {
                angle: Angle::Slot { scale, .. },
                ..
            }),
        ) if *scale == 1.0 => Ok(*k),
        _ => Err(Error::Unsupported(format!(
            "slot {slot} must drive exactly one rotation with unit multiplier"
        ))),
    }
}

fn rotation_generator(circuit: &ParametricCircuit, gate: usize) -> &Generator {
    match &circuit.gates()[gate] {
        Gate::Rotation { generator, .. } => generator,
        _ => unreachable!("insertion gate is a rotation"),
    }
}

fn derivative_terms(job: &InterferenceJob, m: usize, n: usize) -> Result<Vec<InterferenceTerm>> {
    let base = &job.base_circuit;
    base.check_theta(&job.theta)?;
    let gate_m = insertion_gate(base, m)?;
    let gate_n = insertion_gate(base, n)?;
    let anc = Control::on_one(0);
    let initial = lift_initial_state(base.initial_state())?;
    let mut terms = Vec::new();
    for (wm, gm) in rotation_generator(base, gate_m).unitary_expansion() {
        for (wn, gn) in rotation_generator(base, gate_n).unitary_expansion() {
            let mut gates = vec![Gate::h(0)];
            for (k, gate) in base.gates().iter().enumerate() {
                gates.push(gate.shifted(1, 0));
                if k == gate_m {
                    gates.push(Gate::x(0));
                    gates.push(Gate::Pauli(gm.shifted(1).with_control(anc)?));
                    gates.push(Gate::x(0));
                }
                if k == gate_n {
                    gates.push(Gate::Pauli(gn.shifted(1).with_control(anc)?));
                }
            }
            gates.push(Gate::h(0));
            let circuit = ParametricCircuit::new(base.num_qubits() + 1, base.params().to_vec(), gates)?
                .with_initial_state(initial.clone())?;
            terms.push(InterferenceTerm {
                weight: wm * wn,
                circuit,
                theta: job.theta.clone(),
            });
        }
    }
    Ok(terms)
}

fn circuit_pair_term(
    job: &InterferenceJob,
    other: &ParametricCircuit,
    other_theta: &[f64],
) -> Result<InterferenceTerm> {
    let base = &job.base_circuit;
    base.check_theta(&job.theta)?;
    other.check_theta(other_theta)?;
    if other.num_qubits() != base.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: base.num_qubits(),
            got: other.num_qubits(),
        });
    }
    if other.initial_state() != base.initial_state() {
        return Err(Error::InvalidArgument(
            "circuit pair must share the initial state".into(),
        ));
    }
    let offset = base.num_params();
    let mut gates = vec![Gate::h(0)];
    for gate in base.gates() {
        gates.push(gate.shifted(1, 0).with_control(Control::on_zero(0))?);
    }
    for gate in other.gates() {
        gates.push(gate.shifted(1, offset).with_control(Control::on_one(0))?);
    }
    gates.push(Gate::h(0));
    let mut params = base.params().to_vec();
    params.extend_from_slice(other.params());
    let mut theta = job.theta.clone();
    theta.extend_from_slice(other_theta);
    let circuit = ParametricCircuit::new(base.num_qubits() + 1, params, gates)?
        .with_initial_state(lift_initial_state(base.initial_state())?)?;
    Ok(InterferenceTerm {
        weight: 1.0,
        circuit,
        theta,
    })
}

/// Builds the ancilla interference circuit(s) of a job.
///
/// Derivative pairs of uncontrolled generators give exactly one circuit with
/// one ancilla and six extra gates. A controlled generator `P ⊗ Π` is expanded
/// into unitary Pauli strings, one circuit per pair of expansion terms.
pub fn build_interference_circuit(job: &InterferenceJob) -> Result<Vec<InterferenceTerm>> {
    match &job.mode {
        InterferenceMode::DerivativePair { m, n } => derivative_terms(job, *m, *n),
        InterferenceMode::CircuitPair { other, other_theta } => Ok(vec![circuit_pair_term(job, other, other_theta)?]),
    }
}

/// `Σ weight · (2 P_k(anc = 0) − 1)` evaluated exactly.
pub fn exact_real_inner(job: &InterferenceJob) -> Result<f64> {
    build_interference_circuit(job)?
        .iter()
        .map(|t| Ok(t.weight * (2.0 * t.prob_anc0()? - 1.0)))
        .sum()
}

/// Exact ancilla-zero probability. For multi-term jobs this is the effective
/// probability `(1 + Re⟨·,·⟩)/2` of the recombined estimate.
pub fn prob_anc0_exact(job: &InterferenceJob) -> Result<f64> {
    let terms = build_interference_circuit(job)?;
    if let [single] = terms.as_slice() {
        if single.weight == 1.0 {
            return single.prob_anc0();
        }
    }
    let re: f64 = terms
        .iter()
        .map(|t| Ok(t.weight * (2.0 * t.prob_anc0()? - 1.0)))
        .sum::<Result<f64>>()?;
    Ok(((1.0 + re) / 2.0).clamp(0.0, 1.0))
}

/// Samples `shots` ancilla measurements per interference circuit.
///
/// Single-term jobs return `2·freq − 1` with standard error
/// `2·sqrt(p̂(1 − p̂)/shots)`. Deterministic for a fixed seed.
pub fn estimate_real_inner(job: &InterferenceJob) -> Result<ShotEstimate> {
    if job.shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let terms = build_interference_circuit(job)?;
    let mut estimate = 0.0;
    let mut variance = 0.0;
    for (k, term) in terms.iter().enumerate() {
        let p = term.prob_anc0()?;
        let mut rng = ChaCha20Rng::seed_from_u64(job.rng_seed);
        rng.set_stream(k as u64);
        let hits = Binomial::new(job.shots, p)
            .map_err(|e| Error::Numerical(format!("binomial sampler: {e}")))?
            .sample(&mut rng);
        let freq = hits as f64 / job.shots as f64;
        estimate += term.weight * (2.0 * freq - 1.0);
        variance += term.weight * term.weight * 4.0 * freq * (1.0 - freq) / job.shots as f64;
    }
    Ok(ShotEstimate {
        estimate,
        std_error: variance.sqrt(),
        shots: job.shots,
    })
}
