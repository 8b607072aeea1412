//! Polarization and momentum Bell states, the hyperentangled product states
//! built from them, and white-noise models that turn them into mixed states.
//!
//! Qubit slots of the global space are `(π₁, k₁, π₂, k₂)`. Polarization uses
//! `H → 0, V → 1`; photon 1 momentum uses `a₁ → 0, a₂ → 1` and photon 2 uses
//! `b₁ → 0, b₂ → 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, kron_ket, DensityMatrix, Ket, Operator, GLOBAL_DIM, ZERO};

/// Which polarization Bell family the source emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiFlavor {
    /// `(|HH⟩ + e^{iθ}|VV⟩)/√2`
    Phi,
    /// `(|HV⟩ + e^{iθ}|VH⟩)/√2`
    Psi,
}

impl fmt::Display for PiFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PiFlavor::Phi => write!(f, "Phi"),
            PiFlavor::Psi => write!(f, "Psi"),
        }
    }
}

/// Relative phases: `theta` for polarization, `phi` for momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSetting {
    pub theta: f64,
    pub phi: f64,
}

impl PhaseSetting {
    pub fn new(theta: f64, phi: f64) -> Self {
        PhaseSetting { theta, phi }
    }
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Two-photon polarization Bell state in `π₁ ⊗ π₂` ordering.
pub fn bell_pi(flavor: PiFlavor, theta: f64) -> Ket {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![ZERO; 4];
    match flavor {
        PiFlavor::Phi => {
            amps[0] = s;
            amps[3] = s * phase(theta);
        }
        PiFlavor::Psi => {
            amps[1] = s;
            amps[2] = s * phase(theta);
        }
    }
    Ket::new(amps).expect("non-empty")
}

/// Two-photon momentum Bell state `(|a₁⟩|b₂⟩ + e^{iφ}|b₁⟩|a₂⟩)/√2` in
/// `k₁ ⊗ k₂` ordering.
pub fn bell_k(phi: f64) -> Ket {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    // a₁b₂ → (k₁=0, k₂=1); a₂b₁ → (k₁=1, k₂=0)
    Ket::new(vec![ZERO, s, s * phase(phi), ZERO]).expect("non-empty")
}

/// Maps an index in `(π₁, π₂, k₁, k₂)` order to `(π₁, k₁, π₂, k₂)` order.
/// The map swaps the two middle bits and is its own inverse.
fn dof_major_to_photon_major(index: usize) -> usize {
    let b2 = (index >> 2) & 1;
    let b1 = (index >> 1) & 1;
    (index & 0b1001) | (b1 << 2) | (b2 << 1)
}

/// Reorders a 16-dimensional ket from `π ⊗ k` to the global slot order.
pub fn reorder_ket(ket: &Ket) -> Result<Ket> {
    if ket.dim() != GLOBAL_DIM {
        return Err(Error::DimensionMismatch {
            expected: GLOBAL_DIM,
            got: ket.dim(),
        });
    }
    let mut amps = vec![ZERO; GLOBAL_DIM];
    for (i, a) in ket.amplitudes().iter().enumerate() {
        amps[dof_major_to_photon_major(i)] = *a;
    }
    Ket::new(amps)
}

/// Reorders a 16-dimensional operator from `π ⊗ k` to the global slot order.
pub fn reorder_operator(op: &Operator) -> Result<Operator> {
    if op.dim() != GLOBAL_DIM {
        return Err(Error::DimensionMismatch {
            expected: GLOBAL_DIM,
            got: op.dim(),
        });
    }
    let mut entries = vec![ZERO; GLOBAL_DIM * GLOBAL_DIM];
    for i in 0..GLOBAL_DIM {
        for j in 0..GLOBAL_DIM {
            let (ri, rj) = (dof_major_to_photon_major(i), dof_major_to_photon_major(j));
            entries[ri * GLOBAL_DIM + rj] = op.get(i, j);
        }
    }
    Operator::new(GLOBAL_DIM, entries)
}

/// A pure hyperentangled state together with the parameters that built it.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperState {
    pub pi_flavor: PiFlavor,
    pub phases: PhaseSetting,
    pi_pair: Ket,
    k_pair: Ket,
    ket: Ket,
}

impl HyperState {
    /// The 16-amplitude state in global slot order.
    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    /// Polarization Bell pair in `π₁ ⊗ π₂` order.
    pub fn polarization_pair(&self) -> &Ket {
        &self.pi_pair
    }

    /// Momentum Bell pair in `k₁ ⊗ k₂` order.
    pub fn momentum_pair(&self) -> &Ket {
        &self.k_pair
    }

    /// Short label such as `Psi- x psi-`; non-canonical phases print as `?`.
    pub fn label(&self) -> String {
        let sign = |x: f64| {
            let c = x.cos();
            if (c - 1.0).abs() < 1e-9 {
                "+"
            } else if (c + 1.0).abs() < 1e-9 {
                "-"
            } else {
                "?"
            }
        };
        format!(
            "{}{} x psi{}",
            self.pi_flavor,
            sign(self.phases.theta),
            sign(self.phases.phi)
        )
    }
}

/// `|Ψ/Φ(θ)⟩ ⊗ |ψ(φ)⟩` rearranged into the global `(π₁, k₁, π₂, k₂)` order.
pub fn hyper_state(pi_flavor: PiFlavor, theta: f64, phi: f64) -> HyperState {
    let pi_pair = bell_pi(pi_flavor, theta);
    let k_pair = bell_k(phi);
    let ket = reorder_ket(&kron_ket(&pi_pair, &k_pair)).expect("16-dimensional");
    HyperState {
        pi_flavor,
        phases: PhaseSetting { theta, phi },
        pi_pair,
        k_pair,
        ket,
    }
}

/// The state used for the nonlocality test, `|Ψ⁻⟩ ⊗ |ψ⁻⟩`.
pub fn xi_minus_minus() -> HyperState {
    hyper_state(PiFlavor::Psi, PI, PI)
}

/// White-noise degradation of a pure hyperentangled state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// `ρ = v|Ξ⟩⟨Ξ| + (1−v) I/16`
    UniformVisibility { v: f64 },
    /// Independent Werner admixture on each degree of freedom.
    WernerPerDof { v_pi: f64, v_k: f64 },
}

impl NoiseModel {
    pub fn none() -> Self {
        NoiseModel::UniformVisibility { v: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                Err(Error::InvalidArgument(format!(
                    "visibility {name} = {v} is outside [0, 1]"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            NoiseModel::UniformVisibility { v } => check("v", v),
            NoiseModel::WernerPerDof { v_pi, v_k } => {
                check("v_pi", v_pi)?;
                check("v_k", v_k)
            }
        }
    }
}

fn werner(pair: &Ket, v: f64) -> Operator {
    &pair.projector().scale_real(v) + &Operator::identity(4).scale_real((1.0 - v) / 4.0)
}

/// Mixes `state` with white noise according to `model`.
pub fn apply_noise(state: &HyperState, model: &NoiseModel) -> Result<DensityMatrix> {
    model.validate()?;
    let matrix = match *model {
        NoiseModel::UniformVisibility { v } => {
            &state.ket.projector().scale_real(v)
                + &Operator::identity(GLOBAL_DIM).scale_real((1.0 - v) / GLOBAL_DIM as f64)
        }
        NoiseModel::WernerPerDof { v_pi, v_k } => reorder_operator(&kron(
            &werner(&state.pi_pair, v_pi),
            &werner(&state.k_pair, v_k),
        ))?,
    };
    DensityMatrix::new(matrix)
}
