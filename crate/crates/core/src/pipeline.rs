//! End-to-end analyses: sample, embed, rank gate, covering radius; plus the
//! convergence study, the figure data sets and the initial-guess bank.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::circuit::{derivative_state, real_inner, Angle, Gate, ParamSpec, ParametricCircuit, StateVector};
use crate::error::{Error, Result};
use crate::geometry::{
    embed_bloch, embed_states, evaluate_samples, period_box, rank_gate, sobol_torus, EmbeddedSet, RankGate, SampleSet,
    DEFAULT_GS_TOL,
};
use crate::io::fmt12;
use crate::shots::{derive_seed, estimate_real_inner, InterferenceJob, InterferenceMode};
use crate::special::elliptic_e;
use crate::volume::{alpha_opt, spiral_circuit, volume, Gauge, Quadrature};
use crate::voronoi::{
    alpha_from_voronoi, alpha_monte_carlo, check_distinct, fit_rate, spherical_delaunay, AlphaEstimate, AlphaMethod,
    KdTree, RateFit,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingChoice {
    Bloch,
    Real,
    /// Bloch for one qubit, real doubling otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exact on S²; other dimensions fall back to Monte Carlo with `fallback_tests` points.
    Voronoi {
        fallback_tests: usize,
    },
    MonteCarlo {
        test_points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaConfig {
    pub samples: usize,
    pub seed: u64,
    pub embedding: EmbeddingChoice,
    pub method: MethodChoice,
    pub gs_tolerance: f64,
}

impl AlphaConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        AlphaConfig {
            samples,
            seed,
            embedding: EmbeddingChoice::Auto,
            method: MethodChoice::Voronoi {
                fallback_tests: 100_000,
            },
            gs_tolerance: DEFAULT_GS_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub schema_version: u32,
    pub config: AlphaConfig,
    pub embedding: String,
    pub n_samples: usize,
    pub n_distinct: usize,
    pub basis_rank: usize,
    pub required_dim: usize,
    pub rank_gate: RankGate,
    /// Covering-radius estimate; absent when the rank gate fails.
    pub alpha: Option<f64>,
    pub alpha_lower_bound: Option<f64>,
    pub method: Option<AlphaMethod>,
    pub degenerate: bool,
    pub runtime_seconds: f64,
}

/// Samples, their states and the embedded point set.
pub struct Embedded {
    pub samples: SampleSet,
    pub states: Vec<StateVector>,
    pub set: EmbeddedSet,
    pub required_dim: usize,
}

pub fn embed_circuit(
    circuit: &ParametricCircuit,
    samples: usize,
    seed: u64,
    choice: EmbeddingChoice,
    gs_tol: f64,
) -> Result<Embedded> {
    let samples = sobol_torus(samples, &period_box(circuit), seed)?;
    let states = evaluate_samples(circuit, &samples)?;
    let bloch = match choice {
        EmbeddingChoice::Bloch => true,
        EmbeddingChoice::Real => false,
        EmbeddingChoice::Auto => circuit.num_qubits() == 1,
    };
    let (set, required_dim) = if bloch {
        (embed_bloch(&states)?, 3)
    } else {
        let mut set = embed_states(&states, gs_tol)?;
        set.embedding = crate::geometry::EmbeddingKind::RealDoubling;
        (set, 2usize << circuit.num_qubits())
    };
    Ok(Embedded {
        samples,
        states,
        set,
        required_dim,
    })
}

/// Indices of the first occurrence of each point, dropping repeats closer than 1e-12.
pub fn distinct_indices(points: &[Vec<f64>]) -> Vec<usize> {
    let tree = KdTree::new(points);
    let mut keep = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if tree.within(p, 1e-12).into_iter().all(|j| j >= i) {
            keep.push(i);
        }
    }
    keep
}

/// Covering radius of an embedded point set, gated on its rank.
pub fn alpha_of_set(
    set: &EmbeddedSet,
    required_dim: usize,
    method: MethodChoice,
    seed: u64,
) -> Result<(RankGate, Option<AlphaEstimate>, usize)> {
    let keep = distinct_indices(&set.points);
    let distinct = EmbeddedSet {
        points: keep.iter().map(|&i| set.points[i].clone()).collect(),
        ..set.clone()
    };
    let name = set.embedding.name().to_string();
    if keep.len() == 1 {
        let est = AlphaEstimate {
            value: PI,
            n: 1,
            method: AlphaMethod::Degenerate,
            is_upper_bound_estimate: true,
            embedding: name,
        };
        return Ok((rank_gate(set, required_dim), Some(est), 1));
    }
    let gate = rank_gate(set, required_dim);
    if !gate.passed() {
        return Ok((gate, None, keep.len()));
    }
    let mc_seed = derive_seed(seed, 0xa1fa);
    let est = match method {
        MethodChoice::Voronoi { .. } if distinct.dim == 3 && distinct.len() >= 4 => {
            check_distinct(&distinct.points)?;
            alpha_from_voronoi(&spherical_delaunay(&distinct.points)?, &name)?
        }
        MethodChoice::Voronoi { fallback_tests } => alpha_monte_carlo(&distinct, fallback_tests, mc_seed)?,
        MethodChoice::MonteCarlo { test_points } => alpha_monte_carlo(&distinct, test_points, mc_seed)?,
    };
    Ok((gate, Some(est), keep.len()))
}

/// Sample → embed → rank gate → Voronoi or Monte-Carlo covering radius.
pub fn estimate_alpha(circuit: &ParametricCircuit, config: AlphaConfig) -> Result<AlphaReport> {
    let start = Instant::now();
    let e = embed_circuit(
        circuit,
        config.samples,
        config.seed,
        config.embedding,
        config.gs_tolerance,
    )?;
    let (gate, est, n_distinct) = alpha_of_set(&e.set, e.required_dim, config.method, config.seed)?;
    let alpha_lower_bound = match gate {
        RankGate::Fail { alpha_lower_bound } => Some(alpha_lower_bound),
        RankGate::Pass => None,
    };
    let degenerate = matches!(est.as_ref().map(|a| &a.method), Some(AlphaMethod::Degenerate));
    Ok(AlphaReport {
        schema_version: SCHEMA_VERSION,
        config,
        embedding: e.set.embedding.name().to_string(),
        n_samples: e.set.len(),
        n_distinct,
        basis_rank: e.set.basis_rank,
        required_dim: e.required_dim,
        rank_gate: gate,
        alpha: est.as_ref().map(|a| a.value),
        alpha_lower_bound,
        method: est.map(|a| a.method),
        degenerate,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub alpha: f64,
    pub alpha_opt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub config: AlphaConfig,
    pub embedding: String,
    pub rows: Vec<ConvergenceRow>,
    /// Absent when fewer than three sizes pass the rank gate.
    pub fit: Option<RateFit>,
    pub runtime_seconds: f64,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,alpha,alpha_opt\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, fmt12(r.alpha), fmt12(r.alpha_opt)));
        }
        out
    }
}

/// `α_C(N)` for each `N` (prefixes of one scrambled sequence) and a power-law fit.
pub fn convergence(circuit: &ParametricCircuit, n_list: &[usize], config: AlphaConfig) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidArgument("empty N list".into()));
    }
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut embedding = String::new();
    for &n in n_list {
        let e = embed_circuit(circuit, n, config.seed, config.embedding, config.gs_tolerance)?;
        embedding = e.set.embedding.name().to_string();
        let (_, est, _) = alpha_of_set(&e.set, e.required_dim, config.method, config.seed)?;
        if let Some(est) = est {
            rows.push(ConvergenceRow {
                n,
                alpha: est.value,
                alpha_opt: alpha_opt(n, e.set.dim.max(2))?,
            });
        }
    }
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.alpha)).collect();
    let fit = if series.len() >= 3 {
        Some(fit_rate(&series)?)
    } else {
        None
    };
    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        config,
        embedding,
        rows,
        fit,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// `R_Z(θ₂) R_Y(θ₁)|0⟩` with `θ₁ ∈ [0, π]`, `θ₂ ∈ [0, 2π]`: the whole Bloch sphere.
pub fn bloch_sphere_circuit() -> ParametricCircuit {
    ParametricCircuit::new(
        1,
        vec![ParamSpec { period: PI }, ParamSpec { period: 2.0 * PI }],
        vec![Gate::ry(0, Angle::slot(0)), Gate::rz(0, Angle::slot(1))],
    )
    .expect("Bloch-sphere circuit is valid")
}

pub fn bloch_demo_n_list() -> Vec<usize> {
    (6..=13).map(|k| 1usize << k).collect()
}

/// Convergence of `α_C(N)` for the Bloch-sphere circuit.
pub fn bloch_demo(n_list: &[usize], seed: u64) -> Result<ConvergenceReport> {
    convergence(&bloch_sphere_circuit(), n_list, AlphaConfig::new(0, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralRow {
    pub n: u32,
    pub volume: f64,
    /// `4π/vol`, from quadrature.
    pub bound: f64,
    /// `π/E(−4n²)`, closed form.
    pub bound_exact: f64,
    pub alpha_voronoi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralReport {
    pub schema_version: u32,
    pub samples: usize,
    pub seed: u64,
    pub quadrature: Quadrature,
    pub rows: Vec<SpiralRow>,
    pub runtime_seconds: f64,
}

impl SpiralReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,vol,bound,bound_exact,alpha_voronoi\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt12(r.volume),
                fmt12(r.bound),
                fmt12(r.bound_exact),
                fmt12(r.alpha_voronoi)
            ));
        }
        out
    }
}

/// Volume bound against the Voronoi covering radius for spirals `C_n`.
pub fn spiral_demo(n_list: &[u32], samples: usize, seed: u64) -> Result<SpiralReport> {
    let start = Instant::now();
    let quadrature = Quadrature::TensorTrapezoid { points_per_dim: 4096 };
    let mut rows = Vec::new();
    for &n in n_list {
        let c = spiral_circuit(n);
        let v = volume(&c, quadrature, Gauge::Bloch)?;
        let e = embed_circuit(&c, samples, seed, EmbeddingChoice::Bloch, DEFAULT_GS_TOL)?;
        let keep = distinct_indices(&e.set.points);
        let pts: Vec<Vec<f64>> = keep.iter().map(|&i| e.set.points[i].clone()).collect();
        let alpha = alpha_from_voronoi(&spherical_delaunay(&pts)?, "bloch")?.value;
        let m = -4.0 * (n as f64).powi(2);
        rows.push(SpiralRow {
            n,
            volume: v.volume,
            bound: v.alpha_lower_bound.unwrap_or(PI),
            bound_exact: PI / elliptic_e(m)?,
            alpha_voronoi: alpha,
        });
    }
    Ok(SpiralReport {
        schema_version: SCHEMA_VERSION,
        samples,
        seed,
        quadrature,
        rows,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Keep guesses whose cost `Σ_i diag_i |ψ_i|²` is within `band` of the minimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostFilter {
    pub diagonal: Vec<f64>,
    pub band: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Guess {
    pub index: usize,
    pub theta: Vec<f64>,
    pub state: Vec<[f64; 2]>,
    pub cost: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessBank {
    pub schema_version: u32,
    pub alpha: AlphaReport,
    pub guarantee: String,
    pub filter: Option<CostFilter>,
    pub guesses: Vec<Guess>,
}

fn guarantee_line(report: &AlphaReport) -> String {
    match (report.alpha, report.alpha_lower_bound) {
        (Some(a), _) if report.degenerate => format!(
            "every state is within alpha={} of some guess (degenerate sample set)",
            fmt12(a)
        ),
        (Some(a), _) => format!("every state is within alpha={} of some guess", fmt12(a)),
        (None, Some(b)) => format!(
            "rank gate failed: some state is at least alpha>={} from every guess",
            fmt12(b)
        ),
        (None, None) => "no covering radius available".to_string(),
    }
}

/// The sample points as a bank of initial guesses, with the covering radius.
pub fn export_init_guesses(
    circuit: &ParametricCircuit,
    config: AlphaConfig,
    filter: Option<CostFilter>,
) -> Result<GuessBank> {
    let alpha = estimate_alpha(circuit, config)?;
    let samples = sobol_torus(config.samples, &period_box(circuit), config.seed)?;
    let states = evaluate_samples(circuit, &samples)?;
    if let Some(f) = &filter {
        if f.diagonal.len() != 1 << circuit.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: 1 << circuit.num_qubits(),
                got: f.diagonal.len(),
            });
        }
        if !(f.band >= 0.0 && f.band.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cost band {} must be finite and >= 0",
                f.band
            )));
        }
    }
    let cost = |s: &StateVector| {
        filter.as_ref().map(|f| {
            f.diagonal
                .iter()
                .zip(s.amplitudes())
                .map(|(d, a)| d * a.norm_sqr())
                .sum::<f64>()
        })
    };
    let mut guesses: Vec<Guess> = samples
        .thetas
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(index, (t, s))| Guess {
            index,
            theta: t.clone(),
            state: s.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
            cost: cost(s),
        })
        .collect();
    if let Some(f) = &filter {
        let min = guesses.iter().filter_map(|g| g.cost).fold(f64::INFINITY, f64::min);
        guesses.retain(|g| g.cost.is_some_and(|c| c <= min + f.band));
    }
    let mut guarantee = guarantee_line(&alpha);
    if filter.is_some() {
        guarantee.push_str(" (before cost filtering)");
    }
    Ok(GuessBank {
        schema_version: SCHEMA_VERSION,
        alpha,
        guarantee,
        filter,
        guesses,
    })
}

impl GuessBank {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.guarantee);
        let (np, ns) = self.guesses.first().map_or((0, 0), |g| (g.theta.len(), g.state.len()));
        let mut header = vec!["index".to_string()];
        header.extend((0..np).map(|i| format!("theta_{i}")));
        for k in 0..ns {
            header.push(format!("re_{k}"));
            header.push(format!("im_{k}"));
        }
        header.push("cost".into());
        out.push_str(&header.join(","));
        out.push('\n');
        for g in &self.guesses {
            let mut row = vec![g.index.to_string()];
            row.extend(g.theta.iter().map(|x| fmt12(*x)));
            for [re, im] in &g.state {
                row.push(fmt12(*re));
                row.push(fmt12(*im));
            }
            row.push(g.cost.map(fmt12).unwrap_or_default());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRow {
    pub m: usize,
    pub n: usize,
    pub exact: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// Shot estimates of `Re⟨γ_m, γ_n⟩` for all slot pairs `m ≤ n`.
pub fn interference_table(
    circuit: &ParametricCircuit,
    theta: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<InterferenceRow>> {
    let k = circuit.num_params();
    let gammas = (0..k)
        .map(|s| derivative_state(circuit, theta, s))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for m in 0..k {
        for n in m..k {
            let job = InterferenceJob {
                base_circuit: circuit.clone(),
                theta: theta.to_vec(),
                mode: InterferenceMode::DerivativePair { m, n },
                shots,
                rng_seed: derive_seed(seed, (m * k + n) as u64),
            };
            let est = estimate_real_inner(&job)?;
            rows.push(InterferenceRow {
                m,
                n,
                exact: real_inner(&gammas[m], &gammas[n])?,
                estimate: est.estimate,
                std_error: est.std_error,
                shots,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn great_circle_fails_gate() {
        let c = ParametricCircuit::new(1, vec![ParamSpec::default()], vec![Gate::ry(0, Angle::slot(0))]).unwrap();
        let r = estimate_alpha(&c, AlphaConfig::new(64, 0)).unwrap();
        assert_eq!(r.basis_rank, 2);
        assert_eq!(r.alpha_lower_bound, Some(PI / 2.0));
        assert!(r.alpha.is_none());
    }

    #[test]
    fn bloch_circuit_alpha_near_optimal() {
        let r = estimate_alpha(&bloch_sphere_circuit(), AlphaConfig::new(1024, 0)).unwrap();
        assert!(r.rank_gate.passed());
        let a = r.alpha.unwrap();
        let opt = alpha_opt(1024, 3).unwrap();
        assert!((0.8 * opt..=1.8 * opt).contains(&a), "{a}");
        assert_eq!(r.method, Some(AlphaMethod::VoronoiExact));
    }

    #[test]
    fn single_sample_is_degenerate() {
        let r = estimate_alpha(&bloch_sphere_circuit(), AlphaConfig::new(1, 0)).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.alpha, Some(PI));
    }

    #[test]
    fn two_qubit_circuit_uses_monte_carlo() {
        let c = crate::mmec::build(crate::mmec::MmecSpec {
            num_qubits: 2,
            phase_mode: crate::mmec::PhaseMode::WithGlobalPhase,
            compile_mode: crate::mmec::CompileMode::NativeControls,
        })
        .unwrap();
        let mut cfg = AlphaConfig::new(256, 1);
        cfg.method = MethodChoice::Voronoi { fallback_tests: 2000 };
        let r = estimate_alpha(&c, cfg).unwrap();
        assert_eq!(r.required_dim, 8);
        assert!(r.rank_gate.passed());
        assert!(matches!(r.method, Some(AlphaMethod::MonteCarlo { .. })));
    }

    #[test]
    fn guess_bank_and_filter() {
        let c = spiral_circuit(4);
        let bank = export_init_guesses(&c, AlphaConfig::new(256, 2), None).unwrap();
        assert_eq!(bank.guesses.len(), 256);
        assert!(bank.guarantee.starts_with("every state is within alpha="));
        let csv = bank.to_csv();
        assert_eq!(csv.lines().count(), 258);
        let f = CostFilter {
            diagonal: vec![1.0, -1.0],
            band: 0.1,
        };
        let filtered = export_init_guesses(&c, AlphaConfig::new(256, 2), Some(f)).unwrap();
        assert!(!filtered.guesses.is_empty() && filtered.guesses.len() < 256);
        assert!(filtered.guesses.iter().all(|g| g.cost.unwrap() <= -0.89));
    }

    #[test]
    fn interference_rows_track_exact_values() {
        let rows = interference_table(&bloch_sphere_circuit(), &[0.4, 1.1], 10_000, 3).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert!((r.estimate - r.exact).abs() <= 5.0 * r.std_error + 1e-12);
        }
    }
}
