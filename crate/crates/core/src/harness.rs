//! Measurement configurations for the nine terms, finite-statistics
//! coincidence counting, term estimation and the aggregated violation report.
//!
//! Every configuration is modeled as an analyzer unitary `U` followed by
//! detection of the four qubits in the computational basis, so the effective
//! projector of joint outcome `j` is `U†|j⟩⟨j|U`. Outcome index bits follow
//! the global slot order `(π₁, k₁, π₂, k₂)`; bit value 0 carries label +1.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    analyzer_waveplate, bs_operator, hwp_operator, BasisChoice, KBasis, PiBasis,
};
use crate::error::{Error, Result};
use crate::lhv::CLASSICAL_BOUND;
use crate::linalg::{
    tensor_all, DensityMatrix, Ket, Operator, ALGEBRA_TOL, GLOBAL_DIM, NUM_QUBITS, ONE,
};
use crate::observables::{group_operator, term, terms, Dof, TermSpec, NUM_TERMS};
use crate::states::{apply_noise, HyperState, NoiseModel};

/// Events per setting giving a ±0.0030 error at |E| ≈ 0.94.
pub const DEFAULT_EVENTS_PER_SETTING: u64 = 13_000;

/// Nominal duration of one measurement run, in seconds.
pub const RUN_DURATION_S: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setup {
    /// Modes sent straight to the analyzers.
    Direct,
    /// Mode pairs recombined on the beam splitter before the analyzers.
    BsCombined,
    /// Beam-splitter setup with the `HW*` plate removed: a Bell-state
    /// analysis of each photon's two degrees of freedom.
    BsCombinedNoHwStar,
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Setup::Direct => "direct",
            Setup::BsCombined => "bs_combined",
            Setup::BsCombinedNoHwStar => "bs_combined_no_hwstar",
        };
        f.write_str(s)
    }
}

/// How same-photon composite observables such as `z₁z₁′` are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeMode {
    /// Product of the single-qubit outcome labels.
    #[default]
    Factorized,
    /// Eigenvalue of the joint projector that contains the outcome.
    Joint,
}

impl std::str::FromStr for CompositeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factorized" => Ok(CompositeMode::Factorized),
            "joint" => Ok(CompositeMode::Joint),
            _ => Err(Error::InvalidArgument(format!(
                "unknown composite mode '{s}'"
            ))),
        }
    }
}

/// Apparatus configuration that measures one term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub term_id: u8,
    pub setup: Setup,
    /// Analyzer bases for photon 1 (Alice) and photon 2 (Bob).
    pub bases: [BasisChoice; 2],
    pub composite_mode: CompositeMode,
}

fn setup_for(term_id: u8) -> Setup {
    match term_id {
        1 | 2 | 3 | 5 | 8 => Setup::Direct,
        4 | 6 | 7 => Setup::BsCombined,
        _ => Setup::BsCombinedNoHwStar,
    }
}

/// The configuration that measures term `term_id`, with factorized
/// composites.
pub fn setting_for_term(term_id: u8) -> Result<MeasurementSetting> {
    let spec = term(term_id)?;
    let setup = setup_for(term_id);
    let k = match setup {
        Setup::Direct => KBasis::Modes,
        Setup::BsCombined | Setup::BsCombinedNoHwStar => KBasis::Superposed,
    };
    let mut bases = [BasisChoice::new(PiBasis::Hv, k); 2];
    if setup != Setup::BsCombinedNoHwStar {
        for obs in spec.factors() {
            if obs.dof == Dof::Polarization && obs.axis == crate::observables::Axis::X {
                bases[obs.slot() / 2].pi = PiBasis::Diagonal;
            }
        }
    }
    let setting = MeasurementSetting {
        term_id,
        setup,
        bases,
        composite_mode: CompositeMode::Factorized,
    };
    setting.validate()?;
    Ok(setting)
}

/// All nine configurations in term order.
pub fn all_settings(mode: CompositeMode) -> Vec<MeasurementSetting> {
    (1..=NUM_TERMS as u8)
        .map(|id| {
            setting_for_term(id)
                .expect("canonical term")
                .with_composite_mode(mode)
        })
        .collect()
}

/// `CNOT` on one photon's `(π, k)` pair with `k` as control.
fn cnot_k_controls_pi() -> Operator {
    // |π k⟩ → |π⊕k, k⟩
    let mut m = Operator::zeros(4).entries().to_vec();
    for col in 0..4usize {
        let (pi, k) = (col >> 1, col & 1);
        let row = ((pi ^ k) << 1) | k;
        m[row * 4 + col] = ONE;
    }
    Operator::new(4, m).expect("4x4")
}

fn photon_pair(a: &Operator, b: &Operator) -> Operator {
    crate::linalg::kron(a, b)
}

impl MeasurementSetting {
    pub fn with_composite_mode(mut self, mode: CompositeMode) -> Self {
        self.composite_mode = mode;
        self
    }

    pub fn term(&self) -> TermSpec {
        term(self.term_id).expect("validated term id")
    }

    /// Checks the basis choices against what the setup can realize and the
    /// projector decomposition against the term operator.
    pub fn validate(&self) -> Result<()> {
        let spec = term(self.term_id)?;
        for b in &self.bases {
            let ok = match self.setup {
                Setup::Direct => b.k == KBasis::Modes,
                Setup::BsCombined => b.k == KBasis::Superposed,
                Setup::BsCombinedNoHwStar => b.k == KBasis::Superposed && b.pi == PiBasis::Hv,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!(
                    "basis {b:?} cannot be realized by the {} setup",
                    self.setup
                )));
            }
        }
        let rebuilt = self.observable()?;
        let target = crate::observables::term_operator(&spec)?;
        let diff = rebuilt.max_abs_diff(&target)?;
        if diff > ALGEBRA_TOL {
            return Err(Error::InvalidArgument(format!(
                "setting for term {} measures a different observable (deviation {diff:e})",
                self.term_id
            )));
        }
        Ok(())
    }

    /// Unitary taking the state frame to the detection frame.
    pub fn analyzer_unitary(&self) -> Operator {
        match self.setup {
            Setup::Direct | Setup::BsCombined => {
                let mut per_qubit = Vec::with_capacity(NUM_QUBITS);
                for b in &self.bases {
                    per_qubit.push(hwp_operator(analyzer_waveplate(b.pi)));
                    per_qubit.push(match b.k {
                        KBasis::Modes => Operator::identity(2),
                        KBasis::Superposed => bs_operator(),
                    });
                }
                tensor_all(&per_qubit)
            }
            Setup::BsCombinedNoHwStar => {
                let id = Operator::identity(2);
                let bs_k = photon_pair(&id, &bs_operator());
                let bell = &bs_k * &cnot_k_controls_pi();
                // Alice reads (z·z′, x·x′), Bob reads (z·x′, x·z′): Bob's
                // momentum is rotated into the superposed basis first.
                let bob = &bell * &bs_k;
                photon_pair(&bell, &bob)
            }
        }
    }

    /// Effective projectors `U†|j⟩⟨j|U` for the 16 joint outcomes.
    pub fn outcome_projectors(&self) -> Vec<Operator> {
        let u = self.analyzer_unitary();
        let ud = u.dagger();
        (0..GLOBAL_DIM)
            .map(|j| {
                // U†|j⟩ is the j-th column of U†.
                let col: Vec<_> = (0..GLOBAL_DIM).map(|i| ud.get(i, j)).collect();
                Ket::new(col).expect("non-empty").projector()
            })
            .collect()
    }

    /// Detector slots whose labels are multiplied for each readout group of
    /// the term, in group order.
    pub fn readout_slots(&self) -> Vec<Vec<usize>> {
        let spec = self.term();
        match self.setup {
            Setup::BsCombinedNoHwStar => {
                // Each composite lands on one detector after the Bell analyzer.
                vec![vec![0], vec![1], vec![2], vec![3]]
            }
            _ => spec
                .groups
                .iter()
                .map(|g| g.iter().map(|o| o.slot()).collect())
                .collect(),
        }
    }

    /// ±1 weight of each joint outcome for this term.
    pub fn outcome_labels(&self) -> Result<[i8; GLOBAL_DIM]> {
        let mut labels = [1i8; GLOBAL_DIM];
        match self.composite_mode {
            CompositeMode::Factorized => {
                let slots = self.readout_slots();
                for (j, label) in labels.iter_mut().enumerate() {
                    for group in &slots {
                        for &q in group {
                            if (j >> (NUM_QUBITS - 1 - q)) & 1 == 1 {
                                *label = -*label;
                            }
                        }
                    }
                }
            }
            CompositeMode::Joint => {
                let u = self.analyzer_unitary();
                for group in &self.term().groups {
                    let g = group_operator(group).conjugate_by(&u)?;
                    for (j, label) in labels.iter_mut().enumerate() {
                        let d = g.get(j, j);
                        let off = (0..GLOBAL_DIM)
                            .filter(|&i| i != j)
                            .map(|i| g.get(i, j).norm())
                            .fold(0.0, f64::max);
                        if off > ALGEBRA_TOL || (d.norm() - 1.0).abs() > ALGEBRA_TOL {
                            return Err(Error::Numerical(format!(
                                "term {} composite is not diagonal in the detection basis",
                                self.term_id
                            )));
                        }
                        if d.re < 0.0 {
                            *label = -*label;
                        }
                    }
                }
            }
        }
        Ok(labels)
    }

    /// `Σ_j label_j · Π_j`, the observable this setting estimates.
    pub fn observable(&self) -> Result<Operator> {
        let labels = self.outcome_labels()?;
        Ok(self
            .outcome_projectors()
            .iter()
            .zip(labels)
            .fold(Operator::zeros(GLOBAL_DIM), |acc, (p, s)| {
                &acc + &p.scale_real(f64::from(s))
            }))
    }

    /// Born-rule probabilities of the 16 joint outcomes.
    pub fn outcome_probabilities(&self, rho: &DensityMatrix) -> Result<[f64; GLOBAL_DIM]> {
        let rotated = rho.evolve(&self.analyzer_unitary())?;
        let mut probs = [0.0; GLOBAL_DIM];
        let mut total = 0.0;
        for (j, p) in probs.iter_mut().enumerate() {
            let d = rotated.matrix().get(j, j);
            if d.re < -1e-9 || d.im.abs() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "outcome {j} has invalid probability {d}"
                )));
            }
            *p = d.re.max(0.0);
            total += *p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "outcome probabilities sum to {total}"
            )));
        }
        Ok(probs)
    }
}

/// Sampled coincidence counts for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub counts: [u64; GLOBAL_DIM],
    pub total: u64,
    pub duration_s: f64,
}

/// Generator for one measurement stream: the master seed fixes the key and
/// the term id selects an independent stream.
fn stream_rng(seed: u64, term_id: u8) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(term_id));
    rng
}

/// Multinomial draw of `n_events` outcomes from `rho` under `setting`.
pub fn sample_counts(
    rho: &DensityMatrix,
    setting: &MeasurementSetting,
    n_events: u64,
    seed: u64,
) -> Result<CountRecord> {
    if n_events == 0 {
        return Err(Error::InvalidArgument("n_events must be positive".into()));
    }
    let probs = setting.outcome_probabilities(rho)?;
    let mut rng = stream_rng(seed, setting.term_id);
    let mut counts = [0u64; GLOBAL_DIM];
    let mut remaining = n_events;
    let mut mass = 1.0f64;
    for (j, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if j == GLOBAL_DIM - 1 {
            counts[j] = remaining;
            break;
        }
        let q = if mass > 0.0 {
            (p / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::Numerical(format!("binomial parameters: {e}")))?
            .sample(&mut rng);
        counts[j] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(CountRecord {
        setting: setting.clone(),
        counts,
        total: n_events,
        duration_s: RUN_DURATION_S,
    })
}

/// Estimated expectation of one term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term_id: u8,
    pub value: f64,
    pub stderr: f64,
    /// Number of events behind the estimate, when known.
    pub n: Option<u64>,
}

impl TermEstimate {
    pub fn new(term_id: u8, value: f64, stderr: f64) -> Self {
        TermEstimate {
            term_id,
            value,
            stderr,
            n: None,
        }
    }
}

pub fn estimate_term(rec: &CountRecord) -> Result<TermEstimate> {
    if rec.total == 0 {
        return Err(Error::EmptyRecord);
    }
    let summed: u64 = rec.counts.iter().sum();
    if summed != rec.total {
        return Err(Error::Numerical(format!(
            "counts sum to {summed}, record total is {}",
            rec.total
        )));
    }
    let labels = rec.setting.outcome_labels()?;
    let signed: i128 = rec
        .counts
        .iter()
        .zip(labels)
        .map(|(&c, s)| i128::from(s) * i128::from(c))
        .sum();
    let n = rec.total as f64;
    let value = signed as f64 / n;
    let stderr = ((1.0 - value * value).max(0.0) / n).sqrt();
    Ok(TermEstimate {
        term_id: rec.setting.term_id,
        value,
        stderr,
        n: Some(rec.total),
    })
}

/// Nine term estimates combined into the operator value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvnReport {
    pub estimates: Vec<TermEstimate>,
    pub o_value: f64,
    pub o_sigma: f64,
    pub n_sigma: f64,
    pub violated: bool,
}

/// Applies the term signs, adds errors in quadrature and measures the excess
/// over the classical bound in units of the combined error.
pub fn aggregate(estimates: &[TermEstimate]) -> Result<AvnReport> {
    let mut slots: [Option<&TermEstimate>; NUM_TERMS] = [None; NUM_TERMS];
    for e in estimates {
        let idx = usize::from(e.term_id)
            .checked_sub(1)
            .filter(|&i| i < NUM_TERMS)
            .ok_or_else(|| Error::IncompleteTerms(format!("unknown term id {}", e.term_id)))?;
        if slots[idx].replace(e).is_some() {
            return Err(Error::IncompleteTerms(format!(
                "term {} given more than once",
                e.term_id
            )));
        }
    }
    let missing: Vec<String> = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteTerms(format!(
            "missing terms {}",
            missing.join(", ")
        )));
    }
    let ordered: Vec<TermEstimate> = slots.iter().map(|s| (*s.unwrap()).clone()).collect();
    let specs = terms();
    let o_value: f64 = ordered
        .iter()
        .zip(&specs)
        .map(|(e, t)| f64::from(t.sign) * e.value)
        .sum();
    let o_sigma = ordered
        .iter()
        .map(|e| e.stderr * e.stderr)
        .sum::<f64>()
        .sqrt();
    let excess = o_value - f64::from(CLASSICAL_BOUND);
    let n_sigma = if o_sigma > 0.0 {
        excess / o_sigma
    } else if excess == 0.0 {
        0.0
    } else {
        excess.signum() * f64::INFINITY
    };
    Ok(AvnReport {
        estimates: ordered,
        o_value,
        o_sigma,
        n_sigma,
        violated: o_value > f64::from(CLASSICAL_BOUND),
    })
}

/// Samples every term under `noise` and aggregates. Deterministic for a
/// fixed seed regardless of how the nine runs are scheduled.
pub fn run_avn(
    state: &HyperState,
    noise: &NoiseModel,
    n_per_setting: u64,
    seed: u64,
    mode: CompositeMode,
) -> Result<AvnReport> {
    let rho = apply_noise(state, noise)?;
    run_avn_on(&rho, n_per_setting, seed, mode)
}

/// [`run_avn`] on an already prepared density matrix.
pub fn run_avn_on(
    rho: &DensityMatrix,
    n_per_setting: u64,
    seed: u64,
    mode: CompositeMode,
) -> Result<AvnReport> {
    let estimates = all_settings(mode)
        .par_iter()
        .map(|s| estimate_term(&sample_counts(rho, s, n_per_setting, seed)?))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&estimates)
}

/// Values and errors read off the published bar chart.
pub fn fig3_dataset() -> Vec<TermEstimate> {
    vec![
        TermEstimate::new(1, -0.9428, 0.0030),
        TermEstimate::new(2, -0.9953, 0.0033),
        TermEstimate::new(3, -0.9215, 0.0033),
        TermEstimate::new(4, -0.8642, 0.0043),
        TermEstimate::new(5, 0.9424, 0.0030),
        TermEstimate::new(6, 0.8542, 0.0040),
        TermEstimate::new(7, 0.8039, 0.0040),
        TermEstimate::new(8, 0.9217, 0.0033),
        TermEstimate::new(9, -0.8678, 0.0043),
    ]
}

/// Preliminary values from the joint-measurement method (three terms only).
pub fn note_in_proof_dataset() -> Vec<TermEstimate> {
    vec![
        TermEstimate::new(2, -0.9893, 0.0031),
        TermEstimate::new(1, -0.9348, 0.0037),
        TermEstimate::new(5, 0.9218, 0.0037),
    ]
}

/// Built-in reference data by id (`fig3` or `note-in-proof`).
pub fn reference_dataset(id: &str) -> Result<Vec<TermEstimate>> {
    match id {
        "fig3" => Ok(fig3_dataset()),
        "note-in-proof" => Ok(note_in_proof_dataset()),
        _ => Err(Error::InvalidArgument(format!(
            "unknown dataset '{id}' (expected fig3 or note-in-proof)"
        ))),
    }
}

/// Per-degree-of-freedom visibilities that best fit the single-DOF terms
/// `z₁z₂, x₁x₂` (polarization) and `z₁′z₂′, x₁′x₂′` (momentum) under the
/// Werner model, where each such term equals `−v`.
pub fn fit_per_dof_visibilities(data: &[TermEstimate]) -> Result<(f64, f64)> {
    let get = |id: u8| {
        data.iter()
            .find(|e| e.term_id == id)
            .map(|e| e.value)
            .ok_or_else(|| Error::IncompleteTerms(format!("term {id} needed for the fit")))
    };
    let v_pi = -(get(1)? + get(3)?) / 2.0;
    let v_k = -(get(2)? + get(4)?) / 2.0;
    Ok((v_pi.clamp(0.0, 1.0), v_k.clamp(0.0, 1.0)))
}

/// Exact `Tr(ρ·T)` for each of the nine terms, in term order.
pub fn exact_term_values(rho: &DensityMatrix) -> Result<Vec<f64>> {
    terms()
        .iter()
        .map(|t| crate::linalg::expectation(&crate::observables::term_operator(t)?, rho))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::term_operator;
    use crate::states::xi_minus_minus;

    fn pure_rho() -> DensityMatrix {
        DensityMatrix::from_pure(xi_minus_minus().ket()).unwrap()
    }

    #[test]
    fn setup_table() {
        let setups: Vec<Setup> = (1..=9)
            .map(|id| setting_for_term(id).unwrap().setup)
            .collect();
        use Setup::*;
        assert_eq!(
            setups,
            vec![
                Direct,
                Direct,
                Direct,
                BsCombined,
                Direct,
                BsCombined,
                BsCombined,
                Direct,
                BsCombinedNoHwStar
            ]
        );
    }

    #[test]
    fn named_settings() {
        let s1 = setting_for_term(1).unwrap();
        assert_eq!(s1.bases[0].pi, PiBasis::Hv);
        assert_eq!(s1.bases[1].pi, PiBasis::Hv);
        let s4 = setting_for_term(4).unwrap();
        assert_eq!(s4.bases[0].k, KBasis::Superposed);
        assert_eq!(s4.bases[1].k, KBasis::Superposed);
        let s9 = setting_for_term(9).unwrap();
        assert!(s9.bases.iter().all(|b| b.pi == PiBasis::Hv));
        assert!(setting_for_term(0).is_err());
        assert!(setting_for_term(10).is_err());
    }

    #[test]
    fn projector_decomposition_reconstructs_each_term() {
        for mode in [CompositeMode::Factorized, CompositeMode::Joint] {
            for s in all_settings(mode) {
                let target = term_operator(&s.term()).unwrap();
                let diff = s.observable().unwrap().max_abs_diff(&target).unwrap();
                assert!(diff < ALGEBRA_TOL, "term {} {mode:?}: {diff:e}", s.term_id);
            }
        }
    }

    #[test]
    fn projectors_are_complete() {
        for s in all_settings(CompositeMode::Factorized) {
            let sum = s
                .outcome_projectors()
                .iter()
                .fold(Operator::zeros(16), |acc, p| &acc + p);
            assert!(sum.approx_eq(&Operator::identity(16), ALGEBRA_TOL));
        }
    }

    #[test]
    fn wrong_basis_rejected() {
        let mut s = setting_for_term(3).unwrap();
        s.bases[1].pi = PiBasis::Hv;
        assert!(s.validate().is_err());
        let mut s = setting_for_term(1).unwrap();
        s.bases[0].k = KBasis::Superposed;
        assert!(s.validate().is_err());
    }

    #[test]
    fn term_one_anticorrelation() {
        let s = setting_for_term(1).unwrap();
        let p = s.outcome_probabilities(&pure_rho()).unwrap();
        for (j, prob) in p.iter().enumerate() {
            let pi1 = (j >> 3) & 1;
            let pi2 = (j >> 1) & 1;
            if pi1 == pi2 {
                assert!(*prob < 1e-15, "outcome {j}: {prob}");
            }
        }
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let rho = DensityMatrix::maximally_mixed(16);
        for s in all_settings(CompositeMode::Joint) {
            for p in s.outcome_probabilities(&rho).unwrap() {
                assert!((p - 1.0 / 16.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let rho =
            apply_noise(&xi_minus_minus(), &NoiseModel::UniformVisibility { v: 0.8 }).unwrap();
        let s = setting_for_term(6).unwrap();
        let a = sample_counts(&rho, &s, 5000, 11).unwrap();
        let b = sample_counts(&rho, &s, 5000, 11).unwrap();
        let c = sample_counts(&rho, &s, 5000, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
        assert_eq!(a.counts.iter().sum::<u64>(), 5000);
        assert!(sample_counts(&rho, &s, 0, 1).is_err());
    }

    #[test]
    fn estimate_extremes() {
        let s = setting_for_term(1).unwrap();
        let labels = s.outcome_labels().unwrap();
        let mut counts = [0u64; 16];
        for (j, l) in labels.iter().enumerate() {
            if *l == 1 {
                counts[j] = 10;
            }
        }
        let total = counts.iter().sum();
        let rec = CountRecord {
            setting: s.clone(),
            counts,
            total,
            duration_s: 30.0,
        };
        let e = estimate_term(&rec).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.stderr, 0.0);

        let rec = CountRecord {
            setting: s.clone(),
            counts: [7; 16],
            total: 112,
            duration_s: 30.0,
        };
        let e = estimate_term(&rec).unwrap();
        assert_eq!(e.value, 0.0);
        assert!((e.stderr - 1.0 / 112f64.sqrt()).abs() < 1e-15);

        let rec = CountRecord {
            setting: s,
            counts: [0; 16],
            total: 0,
            duration_s: 30.0,
        };
        assert_eq!(estimate_term(&rec), Err(Error::EmptyRecord));
    }

    #[test]
    fn stderr_scale_at_default_events() {
        // sqrt((1 − 0.9428²)/n) = 0.0030  ⇒  n ≈ 12 348, i.e. about 1.3×10⁴
        let n = (1.0 - 0.9428f64.powi(2)) / 0.0030f64.powi(2);
        assert!((n - 12_347.57).abs() < 0.01, "{n}");
        let se = ((1.0 - 0.9428f64.powi(2)) / DEFAULT_EVENTS_PER_SETTING as f64).sqrt();
        assert!((se - 0.0030).abs() < 1e-4, "{se}");
    }

    #[test]
    fn aggregate_errors() {
        let mut d = fig3_dataset();
        d.pop();
        assert!(matches!(aggregate(&d), Err(Error::IncompleteTerms(_))));
        let mut d = fig3_dataset();
        d.push(d[0].clone());
        assert!(matches!(aggregate(&d), Err(Error::IncompleteTerms(_))));
        let mut d = fig3_dataset();
        d[0].term_id = 12;
        assert!(aggregate(&d).is_err());
        assert!(aggregate(&note_in_proof_dataset()).is_err());
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let a = aggregate(&fig3_dataset()).unwrap();
        let mut d = fig3_dataset();
        d.reverse();
        d.swap(2, 5);
        let b = aggregate(&d).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn datasets_by_id() {
        assert_eq!(reference_dataset("fig3").unwrap().len(), 9);
        assert_eq!(reference_dataset("note-in-proof").unwrap().len(), 3);
        assert!(reference_dataset("fig4").is_err());
    }

    #[test]
    fn fitted_visibilities() {
        let (v_pi, v_k) = fit_per_dof_visibilities(&fig3_dataset()).unwrap();
        assert!((v_pi - 0.93215).abs() < 1e-12);
        assert!((v_k - 0.92975).abs() < 1e-12);
    }

    #[test]
    fn composite_mode_parse() {
        assert_eq!(
            "joint".parse::<CompositeMode>().unwrap(),
            CompositeMode::Joint
        );
        assert!("both".parse::<CompositeMode>().is_err());
    }
}
