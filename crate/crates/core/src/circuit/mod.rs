//! Parametric quantum circuits and dense statevector evaluation.
//!
//! Qubit `q` of a `Q`-qubit register is the `q`-th tensor factor from the
//! left, i.e. bit `Q - 1 - q` of a computational basis index. Rotation gates
//! are `R_G(θ) = exp(-i θ/2 G)` for Pauli strings `G`; a controlled rotation
//! acts as `R_G(θ)` on the subspace selected by its controls and as the
//! identity elsewhere.

mod file;
mod sim;
mod state;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{CircuitFile, FileControl, FileGate, FileParam};
pub use sim::{derivative_state, derivative_states, evaluate, inserted_state, real_inner, tangent_vector};
pub use state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Which control value activates a controlled operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    /// Active when the control qubit is `|0⟩`.
    Zero,
    /// Active when the control qubit is `|1⟩`.
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn on_one(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::One,
        }
    }

    pub fn on_zero(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: Polarity::Zero,
        }
    }
}

/// A (possibly controlled) Pauli string. Squares to the identity on its
/// controlled subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Non-identity factors, sorted by qubit.
    factors: Vec<(usize, Pauli)>,
    controls: Vec<Control>,
}

impl Generator {
    pub fn new(factors: Vec<(usize, Pauli)>, controls: Vec<Control>) -> Result<Self> {
        let mut factors: Vec<(usize, Pauli)> = factors.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        factors.sort_by_key(|(q, _)| *q);
        if factors.is_empty() {
            return Err(Error::InvalidCircuit(
                "generator needs at least one non-identity Pauli factor".into(),
            ));
        }
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidCircuit(
                "generator has two Pauli factors on one qubit".into(),
            ));
        }
        let mut seen: Vec<usize> = Vec::new();
        for c in &controls {
            if factors.iter().any(|(q, _)| *q == c.qubit) {
                return Err(Error::InvalidCircuit(format!(
                    "control qubit {} overlaps the Pauli support",
                    c.qubit
                )));
            }
            if seen.contains(&c.qubit) {
                return Err(Error::InvalidCircuit(format!(
                    "qubit {} used twice as a control",
                    c.qubit
                )));
            }
            seen.push(c.qubit);
        }
        Ok(Generator { factors, controls })
    }

    pub fn single(qubit: usize, pauli: Pauli) -> Self {
        Generator::new(vec![(qubit, pauli)], Vec::new()).expect("single-qubit Pauli is valid")
    }

    /// Parses a dense Pauli string such as `"XIY"` (character `i` acts on qubit `i`).
    pub fn parse(paulis: &str, controls: Vec<Control>) -> Result<Self> {
        let mut factors = Vec::new();
        for (q, c) in paulis.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or_else(|| Error::InvalidCircuit(format!("bad Pauli character {c:?}")))?;
            factors.push((q, p));
        }
        Generator::new(factors, controls)
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn is_controlled(&self) -> bool {
        !self.controls.is_empty()
    }

    /// Adds one more control. Fails when the qubit is already in use.
    pub fn with_control(&self, control: Control) -> Result<Self> {
        let mut controls = self.controls.clone();
        controls.push(control);
        Generator::new(self.factors.clone(), controls)
    }

    /// Relabels every qubit `q` as `q + offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Generator {
            factors: self.factors.iter().map(|&(q, p)| (q + offset, p)).collect(),
            controls: self
                .controls
                .iter()
                .map(|c| Control {
                    qubit: c.qubit + offset,
                    polarity: c.polarity,
                })
                .collect(),
        }
    }

    /// Dense Pauli string over `num_qubits` qubits (controls shown as `I`).
    pub fn pauli_string(&self, num_qubits: usize) -> String {
        let mut s = vec!['I'; num_qubits];
        for &(q, p) in &self.factors {
            if q < num_qubits {
                s[q] = p.as_char();
            }
        }
        s.into_iter().collect()
    }

    pub fn max_qubit(&self) -> usize {
        self.factors
            .iter()
            .map(|(q, _)| *q)
            .chain(self.controls.iter().map(|c| c.qubit))
            .max()
            .unwrap_or(0)
    }

    /// Writes `P ⊗ Π_controls` as a real combination of unitary, uncontrolled
    /// Pauli strings: `Π = ∏_k (I ± Z_k)/2`, expanded over control subsets.
    ///
    /// An uncontrolled generator yields itself with weight 1.
    pub fn unitary_expansion(&self) -> Vec<(f64, Generator)> {
        let k = self.controls.len();
        let weight = 0.5f64.powi(k as i32);
        (0..1usize << k)
            .map(|subset| {
                let mut sign = 1.0;
                let mut factors = self.factors.clone();
                for (bit, c) in self.controls.iter().enumerate() {
                    if subset >> bit & 1 == 1 {
                        if c.polarity == Polarity::One {
                            sign = -sign;
                        }
                        factors.push((c.qubit, Pauli::Z));
                    }
                }
                let generator = Generator::new(factors, Vec::new()).expect("disjoint supports stay valid");
                (sign * weight, generator)
            })
            .collect()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (q, p)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.as_char(), q)?;
        }
        for c in &self.controls {
            let pol = match c.polarity {
                Polarity::Zero => 0,
                Polarity::One => 1,
            };
            write!(f, " |c{}={}", c.qubit, pol)?;
        }
        Ok(())
    }
}

/// Angle of a rotation gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// `scale · θ[index]`, optionally reduced modulo `wrap`.
    Slot {
        index: usize,
        scale: f64,
        wrap: Option<f64>,
    },
    Fixed(f64),
}

impl Angle {
    pub fn slot(index: usize) -> Self {
        Angle::Slot {
            index,
            scale: 1.0,
            wrap: None,
        }
    }

    pub fn scaled(index: usize, scale: f64) -> Self {
        Angle::Slot {
            index,
            scale,
            wrap: None,
        }
    }

    pub fn resolve(&self, theta: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(a) => a,
            Angle::Slot { index, scale, wrap } => {
                let a = scale * theta[index];
                match wrap {
                    Some(w) => a.rem_euclid(w),
                    None => a,
                }
            }
        }
    }

    pub fn slot_index(&self) -> Option<usize> {
        match self {
            Angle::Slot { index, .. } => Some(*index),
            Angle::Fixed(_) => None,
        }
    }

    /// The same angle multiplied by `factor`. Wrapped slots cannot be scaled.
    pub fn times(&self, factor: f64) -> Result<Angle> {
        match *self {
            Angle::Fixed(a) => Ok(Angle::Fixed(a * factor)),
            Angle::Slot {
                index,
                scale,
                wrap: None,
            } => Ok(Angle::Slot {
                index,
                scale: scale * factor,
                wrap: None,
            }),
            Angle::Slot { wrap: Some(_), .. } => {
                Err(Error::Unsupported("cannot rescale a wrapped parameter angle".into()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `exp(-i angle/2 · G)` on the controlled subspace of `G`.
    Rotation {
        generator: Generator,
        angle: Angle,
    },
    /// The (controlled) Pauli string itself: X, CNOT, Toffoli, inserted generators.
    Pauli(Generator),
    Hadamard {
        qubit: usize,
        controls: Vec<Control>,
    },
}

impl Gate {
    pub fn rotation(generator: Generator, angle: Angle) -> Self {
        Gate::Rotation { generator, angle }
    }

    pub fn rx(qubit: usize, angle: Angle) -> Self {
        Gate::rotation(Generator::single(qubit, Pauli::X), angle)
    }

    pub fn ry(qubit: usize, angle: Angle) -> Self {
        Gate::rotation(Generator::single(qubit, Pauli::Y), angle)
    }

    pub fn rz(qubit: usize, angle: Angle) -> Self {
        Gate::rotation(Generator::single(qubit, Pauli::Z), angle)
    }

    pub fn x(qubit: usize) -> Self {
        Gate::Pauli(Generator::single(qubit, Pauli::X))
    }

    pub fn h(qubit: usize) -> Self {
        Gate::Hadamard {
            qubit,
            controls: Vec::new(),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Pauli(
            Generator::new(vec![(target, Pauli::X)], vec![Control::on_one(control)])
                .expect("distinct control and target"),
        )
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate::Pauli(
            Generator::new(vec![(target, Pauli::X)], vec![Control::on_one(c1), Control::on_one(c2)])
                .expect("distinct qubits"),
        )
    }

    pub fn controls(&self) -> &[Control] {
        match self {
            Gate::Rotation { generator, .. } | Gate::Pauli(generator) => generator.controls(),
            Gate::Hadamard { controls, .. } => controls,
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match self {
            Gate::Rotation { angle, .. } => angle.slot_index(),
            _ => None,
        }
    }

    pub fn with_control(&self, control: Control) -> Result<Gate> {
        Ok(match self {
            Gate::Rotation { generator, angle } => Gate::Rotation {
                generator: generator.with_control(control)?,
                angle: *angle,
            },
            Gate::Pauli(g) => Gate::Pauli(g.with_control(control)?),
            Gate::Hadamard { qubit, controls } => {
                if *qubit == control.qubit || controls.iter().any(|c| c.qubit == control.qubit) {
                    return Err(Error::InvalidCircuit(format!(
                        "qubit {} already used by Hadamard gate",
                        control.qubit
                    )));
                }
                let mut controls = controls.clone();
                controls.push(control);
                Gate::Hadamard {
                    qubit: *qubit,
                    controls,
                }
            }
        })
    }

    /// Relabels qubits by `offset` and parameter slots by `slot_offset`.
    pub fn shifted(&self, offset: usize, slot_offset: usize) -> Gate {
        match self {
            Gate::Rotation { generator, angle } => Gate::Rotation {
                generator: generator.shifted(offset),
                angle: match *angle {
                    Angle::Slot { index, scale, wrap } => Angle::Slot {
                        index: index + slot_offset,
                        scale,
                        wrap,
                    },
                    a => a,
                },
            },
            Gate::Pauli(g) => Gate::Pauli(g.shifted(offset)),
            Gate::Hadamard { qubit, controls } => Gate::Hadamard {
                qubit: qubit + offset,
                controls: controls
                    .iter()
                    .map(|c| Control {
                        qubit: c.qubit + offset,
                        polarity: c.polarity,
                    })
                    .collect(),
            },
        }
    }

    fn max_qubit(&self) -> usize {
        match self {
            Gate::Rotation { generator, .. } | Gate::Pauli(generator) => generator.max_qubit(),
            Gate::Hadamard { qubit, controls } => controls
                .iter()
                .map(|c| c.qubit)
                .chain(std::iter::once(*qubit))
                .max()
                .unwrap_or(*qubit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    /// Period of the slot in radians (2π or 4π for plain rotations).
    pub period: f64,
}

impl Default for ParamSpec {
    fn default() -> Self {
        ParamSpec { period: 2.0 * PI }
    }
}

/// An ordered gate list acting on an initial state, with `N` real parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricCircuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    params: Vec<ParamSpec>,
    initial_state: StateVector,
}

impl ParametricCircuit {
    /// Builds and validates a circuit starting from `|0…0⟩`.
    pub fn new(num_qubits: usize, params: Vec<ParamSpec>, gates: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidCircuit("need at least one qubit".into()));
        }
        let circuit = ParametricCircuit {
            num_qubits,
            gates,
            params,
            initial_state: StateVector::zero(num_qubits),
        };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn with_initial_state(mut self, state: StateVector) -> Result<Self> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.num_qubits,
                got: state.len(),
            });
        }
        state.check_unit(1e-12)?;
        self.initial_state = state;
        Ok(self)
    }

    /// Replaces the period of one slot, e.g. 4π to separate `|ψ⟩` from `−|ψ⟩`.
    pub fn with_period(mut self, slot: usize, period: f64) -> Result<Self> {
        let n = self.params.len();
        let p = self
            .params
            .get_mut(slot)
            .ok_or(Error::SlotOutOfRange { slot, num_params: n })?;
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidCircuit(format!("bad period {period}")));
        }
        p.period = period;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for gate in &self.gates {
            let q = gate.max_qubit();
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if let Gate::Rotation { angle, .. } = gate {
                match *angle {
                    Angle::Slot { index, scale, wrap } => {
                        if index >= self.params.len() {
                            return Err(Error::SlotOutOfRange {
                                slot: index,
                                num_params: self.params.len(),
                            });
                        }
                        if !scale.is_finite() || wrap.is_some_and(|w| !(w > 0.0)) {
                            return Err(Error::InvalidCircuit("bad slot scale or wrap".into()));
                        }
                    }
                    Angle::Fixed(a) if !a.is_finite() => {
                        return Err(Error::InvalidCircuit("non-finite fixed angle".into()));
                    }
                    _ => {}
                }
            }
        }
        for (slot, p) in self.params.iter().enumerate() {
            if !(p.period > 0.0 && p.period.is_finite()) {
                return Err(Error::InvalidCircuit(format!("slot {slot} has non-positive period")));
            }
            if !self.gates.iter().any(|g| g.slot() == Some(slot)) {
                return Err(Error::InvalidCircuit(format!(
                    "slot {slot} is not referenced by any rotation gate"
                )));
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn periods(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.period).collect()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn has_default_initial_state(&self) -> bool {
        self.initial_state == StateVector::zero(self.num_qubits)
    }

    /// Indices of the gates driven by `slot`.
    pub fn gates_for_slot(&self, slot: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.slot() == Some(slot))
            .map(|(i, _)| i)
            .collect()
    }

    pub(crate) fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                got: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter value".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_rejects_identity_and_overlap() {
        assert!(Generator::parse("II", vec![]).is_err());
        assert!(Generator::parse("XI", vec![Control::on_one(0)]).is_err());
        assert!(Generator::parse("XIY", vec![Control::on_one(1)]).is_ok());
    }

    #[test]
    fn unreferenced_slot_is_rejected() {
        let err = ParametricCircuit::new(1, vec![ParamSpec::default(); 2], vec![Gate::rx(0, Angle::slot(0))]);
        assert!(matches!(err, Err(Error::InvalidCircuit(_))));
    }

    #[test]
    fn out_of_range_qubit_is_rejected() {
        let err = ParametricCircuit::new(1, vec![ParamSpec::default()], vec![Gate::rx(1, Angle::slot(0))]);
        assert!(matches!(err, Err(Error::QubitOutOfRange { qubit: 1, .. })));
    }

    #[test]
    fn expansion_weights_reproduce_projector() {
        // P ⊗ Π with one on-1 control: (P - P Z_c)/2
        let g = Generator::new(vec![(1, Pauli::X)], vec![Control::on_one(0)]).unwrap();
        let terms = g.unitary_expansion();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].0, 0.5);
        assert_eq!(terms[1].0, -0.5);
        assert_eq!(terms[1].1.pauli_string(2), "ZX");
    }

    #[test]
    fn wrapped_angle_reduces() {
        let a = Angle::Slot {
            index: 0,
            scale: 1.0,
            wrap: Some(PI),
        };
        assert!((a.resolve(&[1.5 * PI]) - 0.5 * PI).abs() < 1e-15);
        assert!(a.times(2.0).is_err());
    }
}
