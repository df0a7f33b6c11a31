//! Dimensional expressivity analysis: Gram matrices of circuit tangents,
//! independence tests and the inductive redundancy scan.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{tangent_vector, Angle, Gate, ParametricCircuit, StateVector};
use crate::error::{Error, Result};
use crate::shots::{derive_seed, estimate_real_inner, InterferenceJob, InterferenceMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramKind {
    Jacobian,
    Sample,
    Metric,
}

/// Real symmetric positive semi-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    kind: GramKind,
}

impl GramMatrix {
    /// Checks symmetry within 1e-10 and symmetrizes the stored entries.
    pub fn new(entries: DMatrix<f64>, kind: GramKind) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("non-finite Gram entry".into()));
        }
        let asym = (&entries - entries.transpose()).abs().max();
        if asym > 1e-10 {
            return Err(Error::Numerical(format!("Gram matrix asymmetric by {asym:e}")));
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(GramMatrix { entries, kind })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> GramKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.entries.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        if self.dim() == 0 {
            return 0;
        }
        self.entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .filter(|s| **s > tol)
            .count()
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DeaMode {
    Exact,
    Shots { shots: u64, seed: u64 },
}

/// Default independence tolerance for a `k × k` Gram matrix.
///
/// Shot mode uses five standard errors of a single entry, `0.25/sqrt(shots)`,
/// times `k`.
pub fn default_tolerance(mode: DeaMode, k: usize) -> f64 {
    match mode {
        DeaMode::Exact => 1e-8,
        DeaMode::Shots { shots, .. } => 5.0 * 0.25 / (shots as f64).sqrt() * k.max(1) as f64,
    }
}

/// True iff the smallest singular value of `s` exceeds `tol`.
pub fn is_independent(s: &GramMatrix, tol: f64) -> bool {
    s.dim() > 0 && s.smallest_singular_value() > tol
}

/// Lazily measured `Re⟨∂_a C, ∂_b C⟩` entries at one θ.
struct EntrySource<'a> {
    circuit: &'a ParametricCircuit,
    theta: &'a [f64],
    mode: DeaMode,
    tangents: Vec<Option<StateVector>>,
    cache: std::collections::HashMap<(usize, usize), f64>,
}

impl<'a> EntrySource<'a> {
    fn new(circuit: &'a ParametricCircuit, theta: &'a [f64], mode: DeaMode) -> Result<Self> {
        circuit.check_theta(theta)?;
        if let DeaMode::Shots { shots: 0, .. } = mode {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        Ok(EntrySource {
            circuit,
            theta,
            mode,
            tangents: vec![None; circuit.num_params()],
            cache: Default::default(),
        })
    }

    fn tangent(&mut self, slot: usize) -> Result<&StateVector> {
        if self.tangents[slot].is_none() {
            self.tangents[slot] = Some(tangent_vector(self.circuit, self.theta, slot)?);
        }
        Ok(self.tangents[slot].as_ref().expect("filled above"))
    }

    fn entry(&mut self, a: usize, b: usize) -> Result<f64> {
        let key = (a.min(b), a.max(b));
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let value = match self.mode {
            DeaMode::Exact => {
                let ta = self.tangent(key.0)?.clone();
                ta.inner(self.tangent(key.1)?)?.re
            }
            DeaMode::Shots { shots, seed } => {
                let job = InterferenceJob {
                    base_circuit: self.circuit.clone(),
                    theta: self.theta.to_vec(),
                    mode: InterferenceMode::DerivativePair { m: key.0, n: key.1 },
                    shots,
                    rng_seed: derive_seed(seed, (key.0 * self.circuit.num_params() + key.1) as u64),
                };
                0.25 * estimate_real_inner(&job)?.estimate
            }
        };
        self.cache.insert(key, value);
        Ok(value)
    }

    fn gram(&mut self, slots: &[usize]) -> Result<GramMatrix> {
        let k = slots.len();
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v = self.entry(slots[a], slots[b])?;
                m[(a, b)] = v;
                m[(b, a)] = v;
            }
        }
        GramMatrix::new(m, GramKind::Jacobian)
    }
}

fn check_slots(circuit: &ParametricCircuit, slots: &[usize]) -> Result<()> {
    for (i, &s) in slots.iter().enumerate() {
        if s >= circuit.num_params() {
            return Err(Error::SlotOutOfRange {
                slot: s,
                num_params: circuit.num_params(),
            });
        }
        if slots[..i].contains(&s) {
            return Err(Error::InvalidArgument(format!("slot {s} listed twice")));
        }
    }
    Ok(())
}

/// `S = (Re⟨∂_a C, ∂_b C⟩)` over `slots`, i.e. `¼ Re⟨γ_a, γ_b⟩` for
/// single-gate slots.
pub fn jacobian_gram(circuit: &ParametricCircuit, theta: &[f64], slots: &[usize], mode: DeaMode) -> Result<GramMatrix> {
    check_slots(circuit, slots)?;
    EntrySource::new(circuit, theta, mode)?.gram(slots)
}

/// Gram matrix over every slot.
pub fn full_gram(circuit: &ParametricCircuit, theta: &[f64], mode: DeaMode) -> Result<GramMatrix> {
    let slots: Vec<usize> = (0..circuit.num_params()).collect();
    jacobian_gram(circuit, theta, &slots, mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedundantSlot {
    pub slot: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeaReport {
    pub independent_slots: Vec<usize>,
    pub redundant_slots: Vec<RedundantSlot>,
    pub probe_theta: Vec<f64>,
    pub tolerance: f64,
    pub mode: DeaMode,
    /// Smallest singular value of the Gram matrix tested when each slot was visited.
    pub smallest_singular_values: Vec<f64>,
}

/// Visits slots in order and keeps slot `k` iff the Gram matrix over the kept
/// slots plus `k` is invertible. Entries already measured are reused.
///
/// `tol = None` picks [`default_tolerance`] for the size of each tested matrix.
pub fn scan(circuit: &ParametricCircuit, probe_theta: &[f64], tol: Option<f64>, mode: DeaMode) -> Result<DeaReport> {
    if circuit.num_params() == 0 {
        return Err(Error::InvalidArgument("circuit has no parameters".into()));
    }
    if let Some(t) = tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {t} must be finite and >= 0")));
        }
    }
    let mut source = EntrySource::new(circuit, probe_theta, mode)?;
    let mut kept: Vec<usize> = Vec::new();
    let mut redundant = Vec::new();
    let mut sigmas = Vec::new();
    for slot in 0..circuit.num_params() {
        let mut trial = kept.clone();
        trial.push(slot);
        let s = source.gram(&trial)?;
        let t = tol.unwrap_or_else(|| default_tolerance(mode, trial.len()));
        let sigma = s.smallest_singular_value();
        sigmas.push(sigma);
        if sigma > t {
            kept = trial;
        } else {
            redundant.push(RedundantSlot {
                slot,
                value: probe_theta[slot],
            });
        }
    }
    Ok(DeaReport {
        independent_slots: kept,
        redundant_slots: redundant,
        probe_theta: probe_theta.to_vec(),
        tolerance: tol.unwrap_or_else(|| default_tolerance(mode, circuit.num_params())),
        mode,
        smallest_singular_values: sigmas,
    })
}

/// The circuit with redundant slots frozen to their probe values and the
/// remaining slots renumbered in order.
pub fn restrict(circuit: &ParametricCircuit, report: &DeaReport) -> Result<ParametricCircuit> {
    let n = circuit.num_params();
    let mut new_index = vec![None; n];
    for (i, &s) in report.independent_slots.iter().enumerate() {
        if s >= n {
            return Err(Error::SlotOutOfRange { slot: s, num_params: n });
        }
        new_index[s] = Some(i);
    }
    let mut frozen = vec![None; n];
    for r in &report.redundant_slots {
        if r.slot >= n {
            return Err(Error::SlotOutOfRange {
                slot: r.slot,
                num_params: n,
            });
        }
        frozen[r.slot] = Some(r.value);
    }
    let gates = circuit
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Rotation { generator, angle } => {
                let angle = match *angle {
                    Angle::Slot { index, scale, wrap } => match (new_index[index], frozen[index]) {
                        (Some(i), _) => Angle::Slot { index: i, scale, wrap },
                        (None, Some(_)) => {
                            let mut theta = vec![0.0; n];
                            theta[index] = frozen[index].unwrap_or(0.0);
                            Angle::Fixed(angle.resolve(&theta))
                        }
                        (None, None) => {
                            return Err(Error::InvalidArgument(format!(
                                "slot {index} is neither independent nor redundant"
                            )))
                        }
                    },
                    a => a,
                };
                Ok(Gate::Rotation {
                    generator: generator.clone(),
                    angle,
                })
            }
            other => Ok(other.clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    let params = report.independent_slots.iter().map(|&s| circuit.params()[s]).collect();
    ParametricCircuit::new(circuit.num_qubits(), params, gates)?.with_initial_state(circuit.initial_state().clone())
}

/// Uniform random θ over each slot's period.
pub fn random_probe(circuit: &ParametricCircuit, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    circuit
        .params()
        .iter()
        .map(|p| rng.random::<f64>() * p.period)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityCertificate {
    pub min_eigenvalue: f64,
    pub per_probe: Vec<f64>,
}

/// Worst-case smallest eigenvalue of the full Gram matrix over `probes`.
pub fn minimality_certificate(circuit: &ParametricCircuit, probes: &[Vec<f64>]) -> Result<MinimalityCertificate> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("need at least one probe".into()));
    }
    let per_probe = probes
        .iter()
        .map(|theta| Ok(full_gram(circuit, theta, DeaMode::Exact)?.smallest_eigenvalue()))
        .collect::<Result<Vec<f64>>>()?;
    let min_eigenvalue = per_probe.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MinimalityCertificate {
        min_eigenvalue,
        per_probe,
    })
}
