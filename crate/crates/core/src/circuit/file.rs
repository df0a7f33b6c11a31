//! JSON circuit description files.
//!
//! ```json
//! {"num_qubits": 1,
//!  "params": [{"period": 6.283185307179586}],
//!  "gates": [{"type": "rot", "pauli": "Y", "slot": 0},
//!            {"type": "cnot", "qubits": [0, 1]}]}
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Angle, Control, Gate, Generator, ParamSpec, ParametricCircuit, Pauli, Polarity, StateVector};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileControl {
    pub q: usize,
    /// 0 or 1.
    pub polarity: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileParam {
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FileGate {
    Rot {
        pauli: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<FileControl>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slot: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        wrap: Option<f64>,
    },
    X {
        qubits: Vec<usize>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<FileControl>,
    },
    H {
        qubits: Vec<usize>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<FileControl>,
    },
    Cnot {
        qubits: Vec<usize>,
    },
    Toffoli {
        qubits: Vec<usize>,
    },
    Pauli {
        pauli: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        controls: Vec<FileControl>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitFile {
    pub num_qubits: usize,
    pub params: Vec<FileParam>,
    pub gates: Vec<FileGate>,
    /// Optional `[re, im]` pairs; defaults to `|0…0⟩`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<[f64; 2]>>,
}

fn controls_from_file(controls: &[FileControl]) -> Result<Vec<Control>> {
    controls
        .iter()
        .map(|c| {
            let polarity = match c.polarity {
                0 => Polarity::Zero,
                1 => Polarity::One,
                p => return Err(Error::InvalidCircuit(format!("control polarity {p} is not 0 or 1"))),
            };
            Ok(Control { qubit: c.q, polarity })
        })
        .collect()
}

fn controls_to_file(controls: &[Control]) -> Vec<FileControl> {
    controls
        .iter()
        .map(|c| FileControl {
            q: c.qubit,
            polarity: match c.polarity {
                Polarity::Zero => 0,
                Polarity::One => 1,
            },
        })
        .collect()
}

fn expect_qubits(qubits: &[usize], n: usize, kind: &str) -> Result<()> {
    if qubits.len() != n {
        return Err(Error::InvalidCircuit(format!(
            "{kind} gate needs {n} qubit(s), got {}",
            qubits.len()
        )));
    }
    Ok(())
}

impl FileGate {
    fn to_gate(&self) -> Result<Gate> {
        Ok(match self {
            FileGate::Rot {
                pauli,
                controls,
                slot,
                angle,
                scale,
                wrap,
            } => {
                let generator = Generator::parse(pauli, controls_from_file(controls)?)?;
                let angle = match (slot, angle) {
                    (Some(index), None) => Angle::Slot {
                        index: *index,
                        scale: scale.unwrap_or(1.0),
                        wrap: *wrap,
                    },
                    (None, Some(a)) => Angle::Fixed(*a),
                    _ => {
                        return Err(Error::InvalidCircuit(
                            "rotation needs exactly one of `slot` or `angle`".into(),
                        ))
                    }
                };
                Gate::Rotation { generator, angle }
            }
            FileGate::X { qubits, controls } => {
                expect_qubits(qubits, 1, "x")?;
                Gate::Pauli(Generator::new(
                    vec![(qubits[0], Pauli::X)],
                    controls_from_file(controls)?,
                )?)
            }
            FileGate::H { qubits, controls } => {
                expect_qubits(qubits, 1, "h")?;
                let gate = Gate::h(qubits[0]);
                controls_from_file(controls)?
                    .into_iter()
                    .try_fold(gate, |g, c| g.with_control(c))?
            }
            FileGate::Cnot { qubits } => {
                expect_qubits(qubits, 2, "cnot")?;
                Gate::Pauli(Generator::new(
                    vec![(qubits[1], Pauli::X)],
                    vec![Control::on_one(qubits[0])],
                )?)
            }
            FileGate::Toffoli { qubits } => {
                expect_qubits(qubits, 3, "toffoli")?;
                Gate::Pauli(Generator::new(
                    vec![(qubits[2], Pauli::X)],
                    vec![Control::on_one(qubits[0]), Control::on_one(qubits[1])],
                )?)
            }
            FileGate::Pauli { pauli, controls } => Gate::Pauli(Generator::parse(pauli, controls_from_file(controls)?)?),
        })
    }

    fn from_gate(gate: &Gate, num_qubits: usize) -> FileGate {
        match gate {
            Gate::Rotation { generator, angle } => {
                let (slot, fixed, scale, wrap) = match *angle {
                    Angle::Slot { index, scale, wrap } => (Some(index), None, (scale != 1.0).then_some(scale), wrap),
                    Angle::Fixed(a) => (None, Some(a), None, None),
                };
                FileGate::Rot {
                    pauli: generator.pauli_string(num_qubits),
                    controls: controls_to_file(generator.controls()),
                    slot,
                    angle: fixed,
                    scale,
                    wrap,
                }
            }
            Gate::Pauli(g) => {
                let single_x = g.factors().len() == 1 && g.factors()[0].1 == Pauli::X;
                let all_on = g.controls().iter().all(|c| c.polarity == Polarity::One);
                let target = g.factors()[0].0;
                let cq: Vec<usize> = g.controls().iter().map(|c| c.qubit).collect();
                match (single_x, all_on, cq.len()) {
                    (true, _, 0) => FileGate::X {
                        qubits: vec![target],
                        controls: Vec::new(),
                    },
                    (true, true, 1) => FileGate::Cnot {
                        qubits: vec![cq[0], target],
                    },
                    (true, true, 2) => FileGate::Toffoli {
                        qubits: vec![cq[0], cq[1], target],
                    },
                    _ => FileGate::Pauli {
                        pauli: g.pauli_string(num_qubits),
                        controls: controls_to_file(g.controls()),
                    },
                }
            }
            Gate::Hadamard { qubit, controls } => FileGate::H {
                qubits: vec![*qubit],
                controls: controls_to_file(controls),
            },
        }
    }
}

impl CircuitFile {
    pub fn from_circuit(circuit: &ParametricCircuit) -> Self {
        let initial_state = (!circuit.has_default_initial_state()).then(|| {
            circuit
                .initial_state()
                .amplitudes()
                .iter()
                .map(|a| [a.re, a.im])
                .collect()
        });
        CircuitFile {
            num_qubits: circuit.num_qubits(),
            params: circuit
                .params()
                .iter()
                .map(|p| FileParam { period: p.period })
                .collect(),
            gates: circuit
                .gates()
                .iter()
                .map(|g| FileGate::from_gate(g, circuit.num_qubits()))
                .collect(),
            initial_state,
        }
    }

    pub fn to_circuit(&self) -> Result<ParametricCircuit> {
        let gates = self.gates.iter().map(FileGate::to_gate).collect::<Result<Vec<_>>>()?;
        let params = self.params.iter().map(|p| ParamSpec { period: p.period }).collect();
        let circuit = ParametricCircuit::new(self.num_qubits, params, gates)?;
        match &self.initial_state {
            None => Ok(circuit),
            Some(amps) => {
                let state = StateVector::new(amps.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())?;
                circuit.with_initial_state(state)
            }
        }
    }
}

impl ParametricCircuit {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<CircuitFile>(text)?.to_circuit()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitFile::from_circuit(self)).expect("circuit file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ParametricCircuit::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_atomic(path, self.to_json().as_bytes())
    }
}
