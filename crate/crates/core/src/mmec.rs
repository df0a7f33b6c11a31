//! Minimal, maximally expressive circuits built qubit by qubit, their
//! compilation to CNOT plus single-qubit gates, and phase-parameter insertion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{
    evaluate, Angle, Control, Gate, Generator, ParamSpec, ParametricCircuit, Pauli, Polarity, StateVector,
};
use crate::dea::{full_gram, random_probe, DeaMode};
use crate::error::{Error, Result};
use crate::shots::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    WithGlobalPhase,
    PhaseFree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileMode {
    NativeControls,
    CnotBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MmecSpec {
    pub num_qubits: usize,
    pub phase_mode: PhaseMode,
    pub compile_mode: CompileMode,
}

/// Number of parameters of the built circuit.
pub fn parameter_count(num_qubits: usize, phase_mode: PhaseMode) -> usize {
    match phase_mode {
        PhaseMode::WithGlobalPhase => (1 << (num_qubits + 1)) - 1,
        PhaseMode::PhaseFree => (1 << (num_qubits + 1)) - 2,
    }
}

/// Gates on qubits `0..q` using slots from `0`.
fn mmec_gates(q: usize, phase_mode: PhaseMode) -> Vec<Gate> {
    if q == 1 {
        return match phase_mode {
            PhaseMode::WithGlobalPhase => vec![
                Gate::rx(0, Angle::slot(0)),
                Gate::rz(0, Angle::slot(1)),
                Gate::ry(0, Angle::slot(2)),
            ],
            PhaseMode::PhaseFree => vec![Gate::rx(0, Angle::slot(0)), Gate::rz(0, Angle::slot(1))],
        };
    }
    let sub = mmec_gates(q - 1, phase_mode);
    let p_sub = parameter_count(q - 1, phase_mode);
    let on = Control::on_one(0);
    let mut gates = vec![Gate::rx(0, Angle::slot(0))];
    let mut next = 1;
    if phase_mode == PhaseMode::PhaseFree {
        gates.push(
            Gate::rz(1, Angle::slot(1))
                .with_control(on)
                .expect("fresh control qubit"),
        );
        next = 2;
    }
    let controlled = |slot_offset: usize| {
        sub.iter()
            .map(move |g| g.shifted(1, slot_offset).with_control(on).expect("fresh control qubit"))
    };
    gates.extend(controlled(next));
    gates.push(Gate::x(0));
    gates.extend(controlled(next + p_sub));
    gates
}

/// Builds `C_Q`. The new qubit of each recursion step is qubit 0; its state
/// is `cos(θ₁/2)|1⟩⊗C(θ″) − i sin(θ₁/2)|0⟩⊗C(θ′)` with slot order
/// `(θ₁, θ′, θ″)`, and `(θ₁, θ₂, θ′, θ″)` in phase-free mode.
pub fn build(spec: MmecSpec) -> Result<ParametricCircuit> {
    if spec.num_qubits == 0 {
        return Err(Error::InvalidArgument("MMEC needs at least one qubit".into()));
    }
    if spec.num_qubits > 20 {
        return Err(Error::InvalidArgument(format!(
            "{} qubits is beyond the statevector limit",
            spec.num_qubits
        )));
    }
    let n = parameter_count(spec.num_qubits, spec.phase_mode);
    let circuit = ParametricCircuit::new(
        spec.num_qubits,
        vec![ParamSpec::default(); n],
        mmec_gates(spec.num_qubits, spec.phase_mode),
    )?;
    match spec.compile_mode {
        CompileMode::NativeControls => Ok(circuit),
        CompileMode::CnotBasis => compile_to_cnot_basis(&circuit),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressivityReport {
    pub target_dim: usize,
    pub max_rank: usize,
    pub ranks: Vec<usize>,
    pub reached: bool,
}

/// Rank of the full Gram matrix at `probes` random points.
pub fn expressivity_check(
    circuit: &ParametricCircuit,
    target_dim: usize,
    probes: usize,
    seed: u64,
) -> Result<ExpressivityReport> {
    if probes == 0 {
        return Err(Error::InvalidArgument("need at least one probe".into()));
    }
    let ranks = (0..probes)
        .map(|k| {
            let theta = random_probe(circuit, derive_seed(seed, k as u64));
            Ok(full_gram(circuit, &theta, DeaMode::Exact)?.rank(1e-8))
        })
        .collect::<Result<Vec<usize>>>()?;
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    Ok(ExpressivityReport {
        target_dim,
        max_rank,
        ranks,
        reached: max_rank == target_dim,
    })
}

fn single(q: usize, p: Pauli) -> Generator {
    Generator::single(q, p)
}

fn rot(q: usize, p: Pauli, angle: Angle) -> Gate {
    Gate::rotation(single(q, p), angle)
}

fn fixed_rot(q: usize, p: Pauli, a: f64) -> Gate {
    rot(q, p, Angle::Fixed(a))
}

/// Controlled `R_P(angle)` on `target`, all controls on `|1⟩`.
fn controlled_rotation(out: &mut Vec<Gate>, target: usize, p: Pauli, angle: Angle, ctrl: &[usize]) -> Result<()> {
    match (p, ctrl) {
        (_, []) => out.push(rot(target, p, angle)),
        (Pauli::X, _) => {
            out.push(Gate::h(target));
            controlled_rotation(out, target, Pauli::Z, angle, ctrl)?;
            out.push(Gate::h(target));
        }
        (Pauli::Y | Pauli::Z, [c]) => {
            out.push(rot(target, p, angle.times(0.5)?));
            out.push(Gate::cnot(*c, target));
            out.push(rot(target, p, angle.times(-0.5)?));
            out.push(Gate::cnot(*c, target));
        }
        (Pauli::Y | Pauli::Z, [rest @ .., last]) => {
            controlled_rotation(out, target, p, angle.times(0.5)?, &[*last])?;
            controlled_x(out, *last, rest)?;
            controlled_rotation(out, target, p, angle.times(-0.5)?, &[*last])?;
            controlled_x(out, *last, rest)?;
            controlled_rotation(out, target, p, angle.times(0.5)?, rest)?;
        }
        (Pauli::I, _) => unreachable!("generators have no identity factors"),
    }
    Ok(())
}

/// Multiplies the all-ones control subspace by `e^{iα}`.
fn controlled_phase(out: &mut Vec<Gate>, alpha: f64, ctrl: &[usize]) -> Result<()> {
    if let [rest @ .., last] = ctrl {
        // diag(1, e^{iα}) on `last` is e^{iα/2} R_Z(α)
        controlled_rotation(out, *last, Pauli::Z, Angle::Fixed(alpha), rest)?;
        controlled_phase(out, alpha / 2.0, rest)?;
    }
    Ok(())
}

/// Multi-controlled X as `i·C R_X(π)`, all controls on `|1⟩`.
fn controlled_x(out: &mut Vec<Gate>, target: usize, ctrl: &[usize]) -> Result<()> {
    match ctrl {
        [] => out.push(Gate::x(target)),
        [c] => out.push(Gate::cnot(*c, target)),
        _ => {
            controlled_rotation(out, target, Pauli::X, Angle::Fixed(PI), ctrl)?;
            controlled_phase(out, PI / 2.0, ctrl)?;
        }
    }
    Ok(())
}

fn controlled_pauli(out: &mut Vec<Gate>, target: usize, p: Pauli, ctrl: &[usize]) -> Result<()> {
    match (p, ctrl) {
        (_, []) => out.push(Gate::Pauli(single(target, p))),
        (Pauli::X, _) => controlled_x(out, target, ctrl)?,
        (Pauli::Z, _) => {
            out.push(Gate::h(target));
            controlled_x(out, target, ctrl)?;
            out.push(Gate::h(target));
        }
        (Pauli::Y, _) => {
            // R_Z(π/2) X R_Z(−π/2) = Y
            out.push(fixed_rot(target, Pauli::Z, -PI / 2.0));
            controlled_x(out, target, ctrl)?;
            out.push(fixed_rot(target, Pauli::Z, PI / 2.0));
        }
        (Pauli::I, _) => unreachable!("generators have no identity factors"),
    }
    Ok(())
}

fn compile_gate(out: &mut Vec<Gate>, gate: &Gate) -> Result<()> {
    let zero: Vec<usize> = gate
        .controls()
        .iter()
        .filter(|c| c.polarity == Polarity::Zero)
        .map(|c| c.qubit)
        .collect();
    let ctrl: Vec<usize> = gate.controls().iter().map(|c| c.qubit).collect();
    out.extend(zero.iter().map(|&q| Gate::x(q)));
    match gate {
        Gate::Hadamard { qubit, controls } => {
            if !controls.is_empty() {
                return Err(Error::Unsupported("controlled Hadamard".into()));
            }
            out.push(Gate::h(*qubit));
        }
        Gate::Pauli(g) => {
            for &(q, p) in g.factors() {
                controlled_pauli(out, q, p, &ctrl)?;
            }
        }
        Gate::Rotation { generator, angle } => {
            if let Angle::Slot { wrap: Some(_), .. } = angle {
                if !ctrl.is_empty() || generator.factors().len() > 1 {
                    return Err(Error::Unsupported("wrapped angle inside a decomposed rotation".into()));
                }
            }
            let factors = generator.factors();
            if let [(q, p)] = factors {
                controlled_rotation(out, *q, *p, *angle, &ctrl)?;
            } else {
                // Map the Pauli string onto Z on its last qubit.
                let mut basis = Vec::new();
                for &(q, p) in factors {
                    match p {
                        Pauli::X => basis.push((Gate::h(q), Gate::h(q))),
                        Pauli::Y => basis.push((fixed_rot(q, Pauli::X, PI / 2.0), fixed_rot(q, Pauli::X, -PI / 2.0))),
                        _ => {}
                    }
                }
                let ladder: Vec<Gate> = factors.windows(2).map(|w| Gate::cnot(w[0].0, w[1].0)).collect();
                out.extend(basis.iter().map(|b| b.0.clone()));
                out.extend(ladder.iter().cloned());
                let last = factors[factors.len() - 1].0;
                controlled_rotation(out, last, Pauli::Z, *angle, &ctrl)?;
                out.extend(ladder.iter().rev().cloned());
                out.extend(basis.iter().map(|b| b.1.clone()));
            }
        }
    }
    out.extend(zero.iter().map(|&q| Gate::x(q)));
    Ok(())
}

/// Rewrites the circuit with single-qubit gates and CNOTs only.
///
/// Equal to the input up to a global phase at every θ. Controlled Hadamards
/// and wrapped slot angles under controls are not supported.
pub fn compile_to_cnot_basis(circuit: &ParametricCircuit) -> Result<ParametricCircuit> {
    let mut gates = Vec::new();
    for g in circuit.gates() {
        compile_gate(&mut gates, g)?;
    }
    ParametricCircuit::new(circuit.num_qubits(), circuit.params().to_vec(), gates)?
        .with_initial_state(circuit.initial_state().clone())
}

/// True when every gate is single-qubit or a plain CNOT.
pub fn is_cnot_basis(circuit: &ParametricCircuit) -> bool {
    circuit.gates().iter().all(|g| match g {
        Gate::Rotation { generator, .. } => generator.controls().is_empty() && generator.factors().len() == 1,
        Gate::Hadamard { controls, .. } => controls.is_empty(),
        Gate::Pauli(g) => {
            g.factors().len() == 1
                && (g.controls().is_empty()
                    || (g.factors()[0].1 == Pauli::X && matches!(g.controls(), [c] if c.polarity == Polarity::One)))
        }
    })
}

/// Prepends a phase parameter `φ` (slot 0, period 4π): the new circuit starts
/// at `|0…0⟩` and applies `R_Z(φ)` on qubit 0, then `u_init`, then the
/// original gates.
///
/// `u_init` must consist of fixed-angle gates mapping `|0…0⟩` exactly to the
/// circuit's initial state.
pub fn add_phase_parameter(circuit: &ParametricCircuit, u_init: &[Gate]) -> Result<ParametricCircuit> {
    if u_init.iter().any(|g| g.slot().is_some()) {
        return Err(Error::InvalidArgument("u_init gates must have fixed angles".into()));
    }
    let prep = ParametricCircuit::new(circuit.num_qubits(), Vec::new(), u_init.to_vec())?;
    let prepared = evaluate(&prep, &[])?;
    let diff: f64 = prepared
        .amplitudes()
        .iter()
        .zip(circuit.initial_state().amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if diff > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "u_init does not prepare the initial state (distance {diff:e})"
        )));
    }
    let mut params = vec![ParamSpec { period: 4.0 * PI }];
    params.extend_from_slice(circuit.params());
    let mut gates = vec![Gate::rz(0, Angle::slot(0))];
    gates.extend(u_init.iter().cloned());
    gates.extend(circuit.gates().iter().map(|g| g.shifted(0, 1)));
    ParametricCircuit::new(circuit.num_qubits(), params, gates)
}

/// `|⟨a, b⟩|`.
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(q: usize, phase_mode: PhaseMode) -> MmecSpec {
        MmecSpec {
            num_qubits: q,
            phase_mode,
            compile_mode: CompileMode::NativeControls,
        }
    }

    fn assert_equivalent(a: &ParametricCircuit, b: &ParametricCircuit, seed: u64) {
        let theta = random_probe(a, seed);
        let sa = evaluate(a, &theta).unwrap();
        let sb = evaluate(b, &theta).unwrap();
        let o = overlap(&sa, &sb).unwrap();
        assert!((o - 1.0).abs() < 1e-10, "overlap {o}");
    }

    #[test]
    fn parameter_counts() {
        for q in 1..=4 {
            assert_eq!(
                build(spec(q, PhaseMode::WithGlobalPhase)).unwrap().num_params(),
                (1 << (q + 1)) - 1
            );
            assert_eq!(
                build(spec(q, PhaseMode::PhaseFree)).unwrap().num_params(),
                (1 << (q + 1)) - 2
            );
        }
    }

    #[test]
    fn c1_and_c2_reach_full_rank() {
        let c1 = build(spec(1, PhaseMode::WithGlobalPhase)).unwrap();
        assert!(expressivity_check(&c1, 3, 3, 0).unwrap().reached);
        let c2 = build(spec(2, PhaseMode::WithGlobalPhase)).unwrap();
        assert!(expressivity_check(&c2, 7, 3, 0).unwrap().reached);
        let f2 = build(spec(2, PhaseMode::PhaseFree)).unwrap();
        assert!(expressivity_check(&f2, 6, 3, 0).unwrap().reached);
    }

    #[test]
    fn single_ry_is_rank_one() {
        let c = ParametricCircuit::new(1, vec![ParamSpec::default()], vec![Gate::ry(0, Angle::slot(0))]).unwrap();
        let r = expressivity_check(&c, 3, 2, 1).unwrap();
        assert_eq!(r.max_rank, 1);
        assert!(!r.reached);
    }

    #[test]
    fn controlled_rz_compiles_to_two_cnots() {
        let c = ParametricCircuit::new(
            2,
            vec![ParamSpec::default()],
            vec![
                Gate::h(0),
                Gate::rz(1, Angle::slot(0)).with_control(Control::on_one(0)).unwrap(),
            ],
        )
        .unwrap();
        let k = compile_to_cnot_basis(&c).unwrap();
        assert!(is_cnot_basis(&k));
        let cnots = k.gates().iter().filter(|g| !g.controls().is_empty()).count();
        assert_eq!(cnots, 2);
        for seed in 0..5 {
            assert_equivalent(&c, &k, seed);
        }
    }

    #[test]
    fn uncontrolled_circuit_is_unchanged() {
        let c = build(spec(1, PhaseMode::WithGlobalPhase)).unwrap();
        assert_eq!(compile_to_cnot_basis(&c).unwrap(), c);
    }

    #[test]
    fn compiled_mmec_matches_native() {
        for q in 2..=4 {
            let native = build(spec(q, PhaseMode::WithGlobalPhase)).unwrap();
            let compiled = build(MmecSpec {
                compile_mode: CompileMode::CnotBasis,
                ..spec(q, PhaseMode::WithGlobalPhase)
            })
            .unwrap();
            assert!(is_cnot_basis(&compiled));
            for seed in 0..5 {
                assert_equivalent(&native, &compiled, seed);
            }
        }
    }

    #[test]
    fn multi_controlled_paulis_and_strings_compile() {
        let g = |s: &str, ctrl: Vec<Control>| Generator::parse(s, ctrl).unwrap();
        let c = ParametricCircuit::new(
            4,
            vec![ParamSpec::default(); 2],
            vec![
                Gate::h(0),
                Gate::h(1),
                Gate::ry(2, Angle::Fixed(0.8)),
                Gate::h(3),
                Gate::Pauli(g(
                    "IIIY",
                    vec![Control::on_one(0), Control::on_zero(1), Control::on_one(2)],
                )),
                Gate::rotation(g("IXYZ", vec![Control::on_zero(0)]), Angle::slot(0)),
                Gate::rotation(
                    g("IIZI", vec![Control::on_one(0), Control::on_one(1), Control::on_one(3)]),
                    Angle::scaled(1, 1.5),
                ),
                Gate::Pauli(g("ZIIX", vec![Control::on_one(1), Control::on_one(2)])),
            ],
        )
        .unwrap();
        let k = compile_to_cnot_basis(&c).unwrap();
        assert!(is_cnot_basis(&k));
        for seed in 0..5 {
            assert_equivalent(&c, &k, seed);
        }
    }

    #[test]
    fn controlled_hadamard_unsupported() {
        let c = ParametricCircuit::new(
            2,
            vec![ParamSpec::default()],
            vec![
                Gate::ry(0, Angle::slot(0)),
                Gate::h(1).with_control(Control::on_one(0)).unwrap(),
            ],
        )
        .unwrap();
        assert!(matches!(compile_to_cnot_basis(&c), Err(Error::Unsupported(_))));
    }

    #[test]
    fn phase_parameter_acts_as_phase() {
        let c = build(spec(2, PhaseMode::PhaseFree)).unwrap();
        let aug = add_phase_parameter(&c, &[]).unwrap();
        assert_eq!(aug.num_params(), c.num_params() + 1);
        let theta = random_probe(&c, 3);
        let orig = evaluate(&c, &theta).unwrap();
        let mut t0 = vec![0.0];
        t0.extend_from_slice(&theta);
        assert_eq!(evaluate(&aug, &t0).unwrap(), orig);
        t0[0] = PI;
        let rotated = evaluate(&aug, &t0).unwrap();
        let phase = orig.inner(&rotated).unwrap();
        assert!((phase - num_complex::Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(expressivity_check(&aug, 7, 2, 0).unwrap().reached);
    }

    #[test]
    fn phase_parameter_checks_u_init() {
        let c = ParametricCircuit::new(1, vec![ParamSpec::default()], vec![Gate::ry(0, Angle::slot(0))])
            .unwrap()
            .with_initial_state(StateVector::basis(1, 1))
            .unwrap();
        assert!(add_phase_parameter(&c, &[]).is_err());
        assert!(add_phase_parameter(&c, &[Gate::x(0)]).is_ok());
    }
}
