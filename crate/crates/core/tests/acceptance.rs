//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing the table; set `ACCEPTANCE_STRICT=1` to exit
//! non-zero when any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use expressivity::circuit::{derivative_state, evaluate, real_inner, Angle, Gate, ParamSpec, ParametricCircuit};
use expressivity::dea::{self, full_gram, DeaMode};
use expressivity::geometry::{
    dot, embed_states, evaluate_samples, period_box, real_embed, sobol_torus, RankGate, DEFAULT_GS_TOL,
};
use expressivity::mmec::{build, compile_to_cnot_basis, overlap, CompileMode, MmecSpec, PhaseMode};
use expressivity::pipeline::{
    bloch_demo, bloch_demo_n_list, bloch_sphere_circuit, embed_circuit, estimate_alpha, spiral_demo, AlphaConfig,
    EmbeddingChoice,
};
use expressivity::shots::{
    build_interference_circuit, derive_seed, estimate_real_inner, exact_real_inner, prob_anc0_exact, InterferenceJob,
    InterferenceMode,
};
use expressivity::special::elliptic_e;
use expressivity::volume::{
    alpha_lower_bound_from_volume, greedy_path_bounds, metric, spiral_circuit, volume, Gauge, Quadrature,
};
use expressivity::voronoi::{alpha_monte_carlo, arc, spherical_delaunay, uniform_sphere_points, KdTree};

use common::{haar_state, random_circuit, rng, solve_mmec, svd_rank};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn fig1() -> Outcome {
    let t = Instant::now();
    let r = bloch_demo(&bloch_demo_n_list(), 0).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let fit = r.fit.ok_or("no fit")?;
    let ratios: Vec<f64> = r
        .rows
        .iter()
        .filter(|row| row.n >= 1024)
        .map(|row| row.alpha / row.alpha_opt)
        .collect();
    let ok = (-0.52..=-0.40).contains(&fit.exponent)
        && (2.8..=4.2).contains(&fit.prefactor)
        && ratios.len() == 4
        && ratios.iter().all(|q| (0.8..=1.8).contains(q))
        && secs <= 120.0;
    check(
        ok,
        format!(
            "alpha ~ {:.3} N^{:.3}, alpha/alpha_opt for N>=2^10 in [{:.2}, {:.2}], {secs:.1}s",
            fit.prefactor,
            fit.exponent,
            ratios.iter().copied().fold(f64::INFINITY, f64::min),
            ratios.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn great_circle() -> Outcome {
    let t = Instant::now();
    let c = ParametricCircuit::new(1, vec![ParamSpec::default()], vec![Gate::ry(0, Angle::slot(0))]).unwrap();
    let r = estimate_alpha(&c, AlphaConfig::new(64, 0)).map_err(|e| e.to_string())?;
    let e = embed_circuit(&c, 64, 0, EmbeddingChoice::Bloch, DEFAULT_GS_TOL).map_err(|e| e.to_string())?;
    let mc = alpha_monte_carlo(&e.set, 100_000, 0).map_err(|e| e.to_string())?.value;
    let secs = t.elapsed().as_secs_f64();
    let gate_ok = matches!(r.rank_gate, RankGate::Fail { alpha_lower_bound } if alpha_lower_bound >= PI / 2.0);
    let ok = r.basis_rank == 2 && r.required_dim == 3 && gate_ok && (mc - PI / 2.0).abs() <= 0.02 && secs <= 5.0;
    check(
        ok,
        format!(
            "rank {}/{} gate {:?}, Monte Carlo alpha {mc:.4} (pi/2 = {:.4}), {secs:.2}s",
            r.basis_rank,
            r.required_dim,
            r.rank_gate,
            PI / 2.0
        ),
    )
}

fn fig2() -> Outcome {
    let t = Instant::now();
    let r = spiral_demo(&[1, 2, 4, 8], 1 << 15, 0).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let mut worst_rel: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for row in &r.rows {
        worst_rel = worst_rel.max(((row.alpha_voronoi - row.bound_exact) / row.bound_exact).abs());
        worst_excess = worst_excess.max(row.bound - row.alpha_voronoi);
    }
    let ok = worst_rel <= 0.25 && worst_excess <= 1e-3 && secs <= 180.0;
    check(
        ok,
        format!(
            "max |alpha/(pi/E) - 1| = {:.3}, max(bound - alpha) = {worst_excess:.4}, {secs:.1}s",
            worst_rel
        ),
    )
}

fn spiral_analytics() -> Outcome {
    let mut worst_vol: f64 = 0.0;
    for n in 0..=8u32 {
        let want = 4.0 * elliptic_e(-4.0 * (n as f64).powi(2)).map_err(|e| e.to_string())?;
        let v = volume(
            &spiral_circuit(n),
            Quadrature::TensorTrapezoid { points_per_dim: 4096 },
            Gauge::Bloch,
        )
        .map_err(|e| e.to_string())?;
        worst_vol = worst_vol.max(((v.volume - want) / want).abs());
    }
    let mut r = rng(4);
    let mut worst_det: f64 = 0.0;
    for n in [1u32, 2, 4, 8] {
        let c = spiral_circuit(n);
        for _ in 0..50 {
            let theta = r.random::<f64>() * 2.0 * PI;
            let g = metric(&c, &[theta], Gauge::Bloch)
                .map_err(|e| e.to_string())?
                .determinant();
            let want = 1.0 + 4.0 * (n as f64).powi(2) * (theta % PI).sin().powi(2);
            worst_det = worst_det.max((g - want).abs());
        }
    }
    check(
        worst_vol <= 1e-6 && worst_det <= 1e-9,
        format!("volume rel. error {worst_vol:.2e} (n<=8), det g error {worst_det:.2e}"),
    )
}

fn mmec() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut r = rng(11);
    for q in 1..=3 {
        let spec = MmecSpec {
            num_qubits: q,
            phase_mode: PhaseMode::WithGlobalPhase,
            compile_mode: CompileMode::NativeControls,
        };
        let c = build(spec).map_err(|e| e.to_string())?;
        let want = (1 << (q + 1)) - 1;
        if c.num_params() != want {
            ok = false;
            notes.push(format!("Q={q}: {} params", c.num_params()));
        }
        let mut full_rank = false;
        for seed in 0..20 {
            let probe = dea::random_probe(&c, seed);
            let report = dea::scan(&c, &probe, None, DeaMode::Exact).map_err(|e| e.to_string())?;
            if let Some(red) = report.redundant_slots.first() {
                ok = false;
                notes.push(format!(
                    "Q={q} probe {seed}: slot {} redundant (sigma {:.2e})",
                    red.slot, report.smallest_singular_values[red.slot]
                ));
            }
            let s = full_gram(&c, &probe, DeaMode::Exact).map_err(|e| e.to_string())?;
            full_rank |= s.rank(1e-8) == want;
        }
        if !full_rank {
            ok = false;
            notes.push(format!("Q={q}: no full-rank probe"));
        }
        let mut worst: f64 = 1.0;
        for _ in 0..50 {
            let target = haar_state(q, &mut r);
            let theta = solve_mmec(target.amplitudes());
            let got = evaluate(&c, &theta).map_err(|e| e.to_string())?;
            worst = worst.min(overlap(&got, &target).map_err(|e| e.to_string())?);
        }
        if worst <= 1.0 - 1e-8 {
            ok = false;
            notes.push(format!("Q={q}: solver overlap {worst}"));
        }
        let compiled = compile_to_cnot_basis(&c).map_err(|e| e.to_string())?;
        for seed in 0..20 {
            let theta = dea::random_probe(&c, 100 + seed);
            let a = evaluate(&c, &theta).map_err(|e| e.to_string())?;
            let b = evaluate(&compiled, &theta).map_err(|e| e.to_string())?;
            let ov = overlap(&a, &b).map_err(|e| e.to_string())?;
            if (ov - 1.0).abs() > 1e-10 {
                ok = false;
                notes.push(format!("Q={q}: compiled overlap {ov}"));
            }
        }
    }
    if notes.is_empty() {
        notes.push("counts 3/7/15, no redundancy at 20 probes, full rank, 150 targets solved, CNOT basis equal".into());
    }
    check(ok, notes.join("; "))
}

fn interferometry() -> Outcome {
    let c2 = build(MmecSpec {
        num_qubits: 2,
        phase_mode: PhaseMode::WithGlobalPhase,
        compile_mode: CompileMode::NativeControls,
    })
    .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for c in [bloch_sphere_circuit(), c2] {
        let theta = dea::random_probe(&c, 17);
        let k = c.num_params();
        let gammas = (0..k)
            .map(|s| derivative_state(&c, &theta, s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for m in 0..k {
            for n in 0..k {
                let job = InterferenceJob {
                    base_circuit: c.clone(),
                    theta: theta.clone(),
                    mode: InterferenceMode::DerivativePair { m, n },
                    shots: 1,
                    rng_seed: 0,
                };
                let re = real_inner(&gammas[m], &gammas[n]).map_err(|e| e.to_string())?;
                worst = worst.max((prob_anc0_exact(&job).map_err(|e| e.to_string())? - (1.0 + re) / 2.0).abs());
            }
        }
    }
    let c = bloch_sphere_circuit();
    let mut inside = 0;
    for t in 0..1000u64 {
        let theta = dea::random_probe(&c, 1000 + t);
        let job = InterferenceJob {
            base_circuit: c.clone(),
            theta,
            mode: InterferenceMode::DerivativePair {
                m: (t % 2) as usize,
                n: ((t / 2) % 2) as usize,
            },
            shots: 10_000,
            rng_seed: derive_seed(7, t),
        };
        let exact = exact_real_inner(&job).map_err(|e| e.to_string())?;
        let est = estimate_real_inner(&job).map_err(|e| e.to_string())?;
        // 1e-12 absorbs rounding when the exact probability is 1.
        if (est.estimate - exact).abs() <= 4.0 * est.std_error + 1e-12 {
            inside += 1;
        }
    }
    let terms = build_interference_circuit(&InterferenceJob {
        base_circuit: c.clone(),
        theta: vec![0.4, 1.1],
        mode: InterferenceMode::DerivativePair { m: 0, n: 1 },
        shots: 1,
        rng_seed: 0,
    })
    .map_err(|e| e.to_string())?;
    let shape = terms.len() == 1
        && terms[0].circuit.num_qubits() == c.num_qubits() + 1
        && terms[0].circuit.gates().len() == c.gates().len() + 6;
    check(
        worst <= 1e-10 && inside >= 990 && shape,
        format!("probability error {worst:.1e}, {inside}/1000 within 4 sigma, one ancilla + six gates: {shape}"),
    )
}

fn embedding() -> Outcome {
    let mut r = rng(21);
    let mut worst: f64 = 0.0;
    for case in 0..20u64 {
        let q = 1 + (case % 3) as usize;
        let c = random_circuit(q, 4 + (case % 7) as usize, false, &mut r);
        let samples = sobol_torus(64, &period_box(&c), case).map_err(|e| e.to_string())?;
        let states = evaluate_samples(&c, &samples).map_err(|e| e.to_string())?;
        let set = embed_states(&states, DEFAULT_GS_TOL).map_err(|e| e.to_string())?;
        for i in 0..64 {
            for j in 0..=i {
                let want = real_inner(&states[i], &states[j]).map_err(|e| e.to_string())?;
                worst = worst.max((dot(&set.points[i], &set.points[j]) - want).abs());
            }
        }
    }
    let mut mismatches = Vec::new();
    let mut deficient = 0;
    for case in 0..20u64 {
        let q = 1 + (case % 3) as usize;
        // Alternate real-only circuits (rank at most 2^Q) with general ones.
        let real_only = case % 2 == 0;
        let c = random_circuit(q, 2 + (case % 5) as usize, real_only, &mut r);
        let samples = sobol_torus(64, &period_box(&c), 500 + case).map_err(|e| e.to_string())?;
        let states = evaluate_samples(&c, &samples).map_err(|e| e.to_string())?;
        let set = embed_states(&states, DEFAULT_GS_TOL).map_err(|e| e.to_string())?;
        let rows: Vec<Vec<f64>> = states.iter().map(real_embed).collect();
        let oracle = svd_rank(&rows, 1e-6);
        if oracle < 2 << q {
            deficient += 1;
        }
        if set.basis_rank != oracle {
            mismatches.push(format!("case {case}: {} vs {oracle}", set.basis_rank));
        }
    }
    check(
        worst <= 1e-9 && mismatches.is_empty() && deficient > 0,
        format!(
            "inner-product error {worst:.1e}, rank agrees with SVD in {}/20 cases ({deficient} rank-deficient){}",
            20 - mismatches.len(),
            if mismatches.is_empty() {
                String::new()
            } else {
                format!(": {}", mismatches.join(", "))
            }
        ),
    )
}

fn voronoi() -> Outcome {
    let mut r = rng(8);
    let mut worst_equi: f64 = 0.0;
    let mut worst_cap: f64 = 0.0;
    let mut worst_cover: f64 = 0.0;
    for case in 0..200u64 {
        let n = r.random_range(4..=512);
        let pts = uniform_sphere_points(3, n, case);
        let sv = spherical_delaunay(&pts).map_err(|e| e.to_string())?;
        let tree = KdTree::new(&pts);
        let chord_arc = |d2: f64| 2.0 * (d2.sqrt() / 2.0).min(1.0).asin();
        for (f, tri) in sv.delaunay_facets.iter().enumerate() {
            let v = &sv.voronoi_vertices[sv.facet_vertex[f]];
            let d: Vec<f64> = tri.iter().map(|&s| arc(v, &sv.samples[s])).collect();
            worst_equi = worst_equi.max((d[0] - d[1]).abs().max((d[0] - d[2]).abs()));
            let (_, d2) = tree.nearest(v).unwrap();
            worst_cap = worst_cap.max(d[0] - chord_arc(d2));
        }
        let alpha = sv.alpha_by_region();
        for x in uniform_sphere_points(3, 10_000, 1_000_000 + case) {
            let (_, d2) = tree.nearest(&x).unwrap();
            worst_cover = worst_cover.max(chord_arc(d2) - alpha);
        }
    }
    check(
        worst_equi <= 1e-9 && worst_cap <= 1e-9 && worst_cover <= 1e-9,
        format!(
            "equidistance {worst_equi:.1e}, circumcap violation {worst_cap:.1e}, test-point excess {worst_cover:.1e}"
        ),
    )
}

fn bounds() -> Outcome {
    let g = greedy_path_bounds(1e-3, 1).map_err(|e| e.to_string())?;
    let ratio = g.v1 / g.v2;
    let rel = (ratio / (2.0 / PI) - 1.0).abs();
    let mut worst: f64 = 0.0;
    for n in [1.0f64, 2.0, 4.0, 8.0] {
        let e = elliptic_e(-4.0 * n * n).map_err(|e| e.to_string())?;
        let b = alpha_lower_bound_from_volume(4.0 * e, 1).map_err(|e| e.to_string())?;
        worst = worst.max((b - PI / e).abs());
    }
    check(
        rel <= 0.02 && worst <= 1e-10,
        format!(
            "V1/V2 = {ratio:.5} vs 2/pi = {:.5}, identity error {worst:.1e}",
            2.0 / PI
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Bloch-sphere convergence", fig1),
        ("great-circle rank gate", great_circle),
        ("spiral curves", fig2),
        ("spiral analytics", spiral_analytics),
        ("MMEC construction", mmec),
        ("interferometry", interferometry),
        ("embedding", embedding),
        ("Voronoi correctness", voronoi),
        ("bounds algebra", bounds),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
