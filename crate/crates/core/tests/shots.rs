use expressivity::circuit::{derivative_state, real_inner};
use expressivity::dea;
use expressivity::mmec::{build, CompileMode, MmecSpec, PhaseMode};
use expressivity::pipeline::bloch_sphere_circuit;
use expressivity::shots::{
    build_interference_circuit, derive_seed, estimate_real_inner, exact_real_inner, prob_anc0_exact, InterferenceJob,
    InterferenceMode,
};

fn c2() -> expressivity::circuit::ParametricCircuit {
    build(MmecSpec {
        num_qubits: 2,
        phase_mode: PhaseMode::WithGlobalPhase,
        compile_mode: CompileMode::NativeControls,
    })
    .unwrap()
}

fn job(
    c: &expressivity::circuit::ParametricCircuit,
    theta: &[f64],
    m: usize,
    n: usize,
    shots: u64,
    seed: u64,
) -> InterferenceJob {
    InterferenceJob {
        base_circuit: c.clone(),
        theta: theta.to_vec(),
        mode: InterferenceMode::DerivativePair { m, n },
        shots,
        rng_seed: seed,
    }
}

#[test]
fn exact_probability_matches_inner_product() {
    for c in [bloch_sphere_circuit(), c2()] {
        let theta = dea::random_probe(&c, 17);
        let k = c.num_params();
        let gammas: Vec<_> = (0..k).map(|s| derivative_state(&c, &theta, s).unwrap()).collect();
        for m in 0..k {
            for n in 0..k {
                let j = job(&c, &theta, m, n, 1, 0);
                let re = real_inner(&gammas[m], &gammas[n]).unwrap();
                assert!((prob_anc0_exact(&j).unwrap() - (1.0 + re) / 2.0).abs() < 1e-10);
                assert!((exact_real_inner(&j).unwrap() - re).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn derivative_mode_adds_one_ancilla_and_six_gates() {
    let c = bloch_sphere_circuit();
    let terms = build_interference_circuit(&job(&c, &[0.4, 1.1], 0, 1, 1, 0)).unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0].circuit.num_qubits(), c.num_qubits() + 1);
    assert_eq!(terms[0].circuit.gates().len(), c.gates().len() + 6);
}

#[test]
fn estimates_within_four_sigma() {
    let c = bloch_sphere_circuit();
    let k = c.num_params();
    let mut inside = 0;
    let trials = 1000;
    for t in 0..trials {
        let theta = dea::random_probe(&c, 1000 + t);
        let (m, n) = ((t as usize) % k, (t as usize / k) % k);
        let j = job(&c, &theta, m, n, 10_000, derive_seed(7, t));
        let exact = exact_real_inner(&j).unwrap();
        let est = estimate_real_inner(&j).unwrap();
        if (est.estimate - exact).abs() <= 4.0 * est.std_error + 1e-12 {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.99 * trials as f64, "{inside}/{trials}");
}

#[test]
fn circuit_pair_overlap() {
    let c = c2();
    let (a, b) = (dea::random_probe(&c, 1), dea::random_probe(&c, 2));
    let j = InterferenceJob {
        base_circuit: c.clone(),
        theta: a.clone(),
        mode: InterferenceMode::CircuitPair {
            other: c.clone(),
            other_theta: b.clone(),
        },
        shots: 100_000,
        rng_seed: 3,
    };
    let sa = expressivity::circuit::evaluate(&c, &a).unwrap();
    let sb = expressivity::circuit::evaluate(&c, &b).unwrap();
    let want = real_inner(&sa, &sb).unwrap();
    assert!((exact_real_inner(&j).unwrap() - want).abs() < 1e-10);
    let est = estimate_real_inner(&j).unwrap();
    assert!((est.estimate - want).abs() <= 5.0 * est.std_error);
    assert_eq!(est, estimate_real_inner(&j).unwrap());
}
