use num_complex::Complex64;

use super::{Gate, Generator, ParametricCircuit, Pauli, Polarity, StateVector};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Bit masks describing a (controlled) Pauli string on a register.
struct PauliMasks {
    ctrl_mask: usize,
    ctrl_value: usize,
    x_mask: usize,
    yz_mask: usize,
    y_phase: Complex64,
}

fn qubit_bit(num_qubits: usize, q: usize) -> usize {
    1 << (num_qubits - 1 - q)
}

fn control_masks(num_qubits: usize, controls: &[super::Control]) -> (usize, usize) {
    let mut mask = 0;
    let mut value = 0;
    for c in controls {
        let b = qubit_bit(num_qubits, c.qubit);
        mask |= b;
        if c.polarity == Polarity::One {
            value |= b;
        }
    }
    (mask, value)
}

impl PauliMasks {
    fn new(num_qubits: usize, g: &Generator) -> Self {
        let (ctrl_mask, ctrl_value) = control_masks(num_qubits, g.controls());
        let mut x_mask = 0;
        let mut yz_mask = 0;
        let mut n_y = 0;
        for &(q, p) in g.factors() {
            let b = qubit_bit(num_qubits, q);
            match p {
                Pauli::X => x_mask |= b,
                Pauli::Y => {
                    x_mask |= b;
                    yz_mask |= b;
                    n_y += 1;
                }
                Pauli::Z => yz_mask |= b,
                Pauli::I => {}
            }
        }
        let y_phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => I,
            2 => Complex64::new(-1.0, 0.0),
            _ => -I,
        };
        PauliMasks {
            ctrl_mask,
            ctrl_value,
            x_mask,
            yz_mask,
            y_phase,
        }
    }

    #[inline]
    fn active(&self, i: usize) -> bool {
        i & self.ctrl_mask == self.ctrl_value
    }

    /// Phase `c` with `P|i⟩ = c |i ^ x_mask⟩`.
    #[inline]
    fn phase(&self, i: usize) -> Complex64 {
        if (i & self.yz_mask).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }
}

fn apply_pauli(amps: &mut [Complex64], m: &PauliMasks) {
    if m.x_mask == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            if m.active(i) {
                *a *= m.phase(i);
            }
        }
        return;
    }
    for i in 0..amps.len() {
        let j = i ^ m.x_mask;
        if i < j && m.active(i) {
            let (ai, aj) = (amps[i], amps[j]);
            amps[j] = m.phase(i) * ai;
            amps[i] = m.phase(j) * aj;
        }
    }
}

fn apply_rotation(amps: &mut [Complex64], m: &PauliMasks, angle: f64) {
    let (s, c) = (0.5 * angle).sin_cos();
    let is = I * s;
    if m.x_mask == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            if m.active(i) {
                *a *= c - is * m.phase(i);
            }
        }
        return;
    }
    for i in 0..amps.len() {
        let j = i ^ m.x_mask;
        if i < j && m.active(i) {
            let (ai, aj) = (amps[i], amps[j]);
            amps[i] = c * ai - is * m.phase(j) * aj;
            amps[j] = c * aj - is * m.phase(i) * ai;
        }
    }
}

fn apply_hadamard(amps: &mut [Complex64], num_qubits: usize, qubit: usize, controls: &[super::Control]) {
    let (ctrl_mask, ctrl_value) = control_masks(num_qubits, controls);
    let b = qubit_bit(num_qubits, qubit);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..amps.len() {
        if i & b == 0 && i & ctrl_mask == ctrl_value {
            let j = i | b;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = (a0 + a1) * r;
            amps[j] = (a0 - a1) * r;
        }
    }
}

pub(crate) fn apply_gate(amps: &mut [Complex64], num_qubits: usize, gate: &Gate, theta: &[f64]) {
    match gate {
        Gate::Rotation { generator, angle } => {
            let m = PauliMasks::new(num_qubits, generator);
            apply_rotation(amps, &m, angle.resolve(theta));
        }
        Gate::Pauli(g) => apply_pauli(amps, &PauliMasks::new(num_qubits, g)),
        Gate::Hadamard { qubit, controls } => apply_hadamard(amps, num_qubits, *qubit, controls),
    }
}

/// Applies `P ⊗ Π_controls`: the Pauli string on the controlled subspace, zero elsewhere.
fn apply_projected_generator(amps: &mut [Complex64], num_qubits: usize, g: &Generator) {
    let m = PauliMasks::new(num_qubits, g);
    for (i, a) in amps.iter_mut().enumerate() {
        if !m.active(i) {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    apply_pauli(amps, &m);
}

enum Insertion<'a> {
    /// Exact derivative factor `P ⊗ Π` of the rotation's own generator.
    Projected,
    /// A unitary Pauli string applied as-is.
    Unitary(&'a Generator),
}

fn run(circuit: &ParametricCircuit, theta: &[f64], insert_after: Option<(usize, Insertion<'_>)>) -> Vec<Complex64> {
    let nq = circuit.num_qubits();
    let mut amps = circuit.initial_state().amplitudes().to_vec();
    for (k, gate) in circuit.gates().iter().enumerate() {
        apply_gate(&mut amps, nq, gate, theta);
        if let Some((at, ins)) = &insert_after {
            if *at == k {
                match ins {
                    Insertion::Projected => {
                        if let Gate::Rotation { generator, .. } = gate {
                            apply_projected_generator(&mut amps, nq, generator);
                        }
                    }
                    Insertion::Unitary(g) => apply_pauli(&mut amps, &PauliMasks::new(nq, g)),
                }
            }
        }
    }
    amps
}

/// `C(θ)`: applies the gates left to right to the initial state.
pub fn evaluate(circuit: &ParametricCircuit, theta: &[f64]) -> Result<StateVector> {
    circuit.check_theta(theta)?;
    StateVector::from_amplitudes(run(circuit, theta, None))
}

fn single_gate_of_slot(circuit: &ParametricCircuit, n: usize) -> Result<usize> {
    if n >= circuit.num_params() {
        return Err(Error::SlotOutOfRange {
            slot: n,
            num_params: circuit.num_params(),
        });
    }
    let gates = circuit.gates_for_slot(n);
    if gates.len() != 1 {
        return Err(Error::Unsupported(format!(
            "slot {n} drives {} gates; derivative insertion needs exactly one",
            gates.len()
        )));
    }
    if let Gate::Rotation {
        angle: super::Angle::Slot { scale, .. },
        ..
    } = &circuit.gates()[gates[0]]
    {
        if *scale != 1.0 {
            return Err(Error::Unsupported(format!(
                "slot {n} has angle multiplier {scale}; derivative insertion needs 1"
            )));
        }
    }
    Ok(gates[0])
}

/// `γ_n`: the circuit with `G_n` inserted right after `R_{G_n}(θ_n)`, so
/// that `∂_n C(θ) = -(i/2) γ_n`.
///
/// For a controlled generator the inserted operator is `P ⊗ Π_controls`, so
/// `γ_n` may have norm below one.
pub fn derivative_state(circuit: &ParametricCircuit, theta: &[f64], n: usize) -> Result<StateVector> {
    circuit.check_theta(theta)?;
    let k = single_gate_of_slot(circuit, n)?;
    StateVector::from_amplitudes(run(circuit, theta, Some((k, Insertion::Projected))))
}

/// All `γ_n`, in slot order.
pub fn derivative_states(circuit: &ParametricCircuit, theta: &[f64]) -> Result<Vec<StateVector>> {
    (0..circuit.num_params())
        .map(|n| derivative_state(circuit, theta, n))
        .collect()
}

/// The circuit with an arbitrary unitary Pauli string inserted after slot `n`'s gate.
pub fn inserted_state(
    circuit: &ParametricCircuit,
    theta: &[f64],
    n: usize,
    generator: &Generator,
) -> Result<StateVector> {
    circuit.check_theta(theta)?;
    let k = single_gate_of_slot(circuit, n)?;
    if generator.max_qubit() >= circuit.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: generator.max_qubit(),
            num_qubits: circuit.num_qubits(),
        });
    }
    StateVector::from_amplitudes(run(circuit, theta, Some((k, Insertion::Unitary(generator)))))
}

/// `∂_n C(θ)` by the product rule over every gate driven by slot `n`.
///
/// Unlike [`derivative_state`] this accepts shared and rescaled slots; wrapped
/// angles are differentiated away from their wrap points.
pub fn tangent_vector(circuit: &ParametricCircuit, theta: &[f64], n: usize) -> Result<StateVector> {
    circuit.check_theta(theta)?;
    if n >= circuit.num_params() {
        return Err(Error::SlotOutOfRange {
            slot: n,
            num_params: circuit.num_params(),
        });
    }
    let mut total = vec![Complex64::new(0.0, 0.0); 1 << circuit.num_qubits()];
    for k in circuit.gates_for_slot(n) {
        let scale = match &circuit.gates()[k] {
            Gate::Rotation {
                angle: super::Angle::Slot { scale, .. },
                ..
            } => *scale,
            _ => unreachable!("gates_for_slot only yields slot rotations"),
        };
        let term = run(circuit, theta, Some((k, Insertion::Projected)));
        let factor = -0.5 * I * scale;
        for (t, a) in total.iter_mut().zip(term) {
            *t += factor * a;
        }
    }
    StateVector::from_amplitudes(total)
}

/// `Re ⟨a, b⟩`.
pub fn real_inner(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.re)
}
