//! Local Pauli observables, the nine correlation terms and the assembled
//! nine-term operator whose quantum maximum is 9 and classical bound is 7.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, embed, Ket, Operator, GLOBAL_DIM, HERMITIAN_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dof {
    Polarization,
    Momentum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
}

/// One of the eight single-qubit observables `z₁, x₁, z₁′, x₁′, z₂, x₂, z₂′, x₂′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalObservable {
    pub party: Party,
    pub dof: Dof,
    pub axis: Axis,
}

impl LocalObservable {
    pub const fn new(party: Party, dof: Dof, axis: Axis) -> Self {
        LocalObservable { party, dof, axis }
    }

    /// Qubit slot in the global `(π₁, k₁, π₂, k₂)` space.
    pub fn slot(&self) -> usize {
        let photon = match self.party {
            Party::Alice => 0,
            Party::Bob => 2,
        };
        let dof = match self.dof {
            Dof::Polarization => 0,
            Dof::Momentum => 1,
        };
        photon + dof
    }

    /// Index 0..8 used to address LHV assignments.
    pub fn index(&self) -> usize {
        2 * self.slot()
            + match self.axis {
                Axis::Z => 0,
                Axis::X => 1,
            }
    }

    /// All eight observables, ordered by [`LocalObservable::index`].
    pub fn all() -> [LocalObservable; 8] {
        let mut out = [Z1; 8];
        for party in [Party::Alice, Party::Bob] {
            for dof in [Dof::Polarization, Dof::Momentum] {
                for axis in [Axis::Z, Axis::X] {
                    let o = LocalObservable::new(party, dof, axis);
                    out[o.index()] = o;
                }
            }
        }
        out
    }

    pub fn pauli(&self) -> Operator {
        match self.axis {
            Axis::Z => Operator::pauli_z(),
            Axis::X => Operator::pauli_x(),
        }
    }
}

impl fmt::Display for LocalObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::Z => 'z',
            Axis::X => 'x',
        };
        let party = match self.party {
            Party::Alice => '1',
            Party::Bob => '2',
        };
        let prime = match self.dof {
            Dof::Polarization => "",
            Dof::Momentum => "'",
        };
        write!(f, "{axis}{party}{prime}")
    }
}

pub const Z1: LocalObservable = LocalObservable::new(Party::Alice, Dof::Polarization, Axis::Z);
pub const X1: LocalObservable = LocalObservable::new(Party::Alice, Dof::Polarization, Axis::X);
pub const Z1P: LocalObservable = LocalObservable::new(Party::Alice, Dof::Momentum, Axis::Z);
pub const X1P: LocalObservable = LocalObservable::new(Party::Alice, Dof::Momentum, Axis::X);
pub const Z2: LocalObservable = LocalObservable::new(Party::Bob, Dof::Polarization, Axis::Z);
pub const X2: LocalObservable = LocalObservable::new(Party::Bob, Dof::Polarization, Axis::X);
pub const Z2P: LocalObservable = LocalObservable::new(Party::Bob, Dof::Momentum, Axis::Z);
pub const X2P: LocalObservable = LocalObservable::new(Party::Bob, Dof::Momentum, Axis::X);

/// One correlation term of the operator.
///
/// `groups` lists what is read out as a single ±1 value: a lone local
/// observable, or a same-photon composite such as `z₁z₁′`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSpec {
    pub id: u8,
    pub groups: Vec<Vec<LocalObservable>>,
    pub sign: i8,
}

impl TermSpec {
    /// Every local factor, in the written order.
    pub fn factors(&self) -> impl Iterator<Item = LocalObservable> + '_ {
        self.groups.iter().flatten().copied()
    }

    /// Composite (two-observable) groups in this term.
    pub fn composites(&self) -> impl Iterator<Item = &[LocalObservable]> + '_ {
        self.groups
            .iter()
            .filter(|g| g.len() > 1)
            .map(|g| g.as_slice())
    }

    /// Printed form, e.g. `z1z1'·z2·z2'`.
    pub fn label(&self) -> String {
        self.groups
            .iter()
            .map(|g| g.iter().map(|o| o.to_string()).collect::<String>())
            .collect::<Vec<_>>()
            .join("·")
    }
}

/// Number of terms in the operator.
pub const NUM_TERMS: usize = 9;

/// The nine terms in printed order with their signs `(−,−,−,−,+,+,+,+,−)`.
pub fn terms() -> Vec<TermSpec> {
    let t = |id: u8, sign: i8, groups: &[&[LocalObservable]]| TermSpec {
        id,
        groups: groups.iter().map(|g| g.to_vec()).collect(),
        sign,
    };
    vec![
        t(1, -1, &[&[Z1], &[Z2]]),
        t(2, -1, &[&[Z1P], &[Z2P]]),
        t(3, -1, &[&[X1], &[X2]]),
        t(4, -1, &[&[X1P], &[X2P]]),
        t(5, 1, &[&[Z1, Z1P], &[Z2], &[Z2P]]),
        t(6, 1, &[&[X1, X1P], &[X2], &[X2P]]),
        t(7, 1, &[&[Z1], &[X1P], &[Z2, X2P]]),
        t(8, 1, &[&[X1], &[Z1P], &[X2, Z2P]]),
        t(9, -1, &[&[Z1, Z1P], &[X1, X1P], &[Z2, X2P], &[X2, Z2P]]),
    ]
}

/// Looks up a term by its 1-based id.
pub fn term(id: u8) -> Result<TermSpec> {
    terms()
        .into_iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::InvalidArgument(format!("term id {id} is not in 1..=9")))
}

/// A local observable embedded in the 16-dimensional space.
pub fn local_operator(obs: LocalObservable) -> Operator {
    embed(&obs.pauli(), obs.slot()).expect("slot in range")
}

/// Product of a group's local operators (a composite observable).
pub fn group_operator(group: &[LocalObservable]) -> Operator {
    group
        .iter()
        .fold(Operator::identity(GLOBAL_DIM), |acc, &o| {
            &acc * &local_operator(o)
        })
}

/// Ordered product of the embedded factors of `spec`.
pub fn term_operator(spec: &TermSpec) -> Result<Operator> {
    let canonical = term(spec.id)?;
    if canonical != *spec {
        return Err(Error::InvalidArgument(format!(
            "term {} does not match the canonical expansion",
            spec.id
        )));
    }
    Ok(spec
        .factors()
        .fold(Operator::identity(GLOBAL_DIM), |acc, o| {
            &acc * &local_operator(o)
        }))
}

/// The assembled operator and its terms.
#[derive(Clone, Debug)]
pub struct CabelloOperator {
    pub matrix: Operator,
    pub terms: Vec<TermSpec>,
    pub term_matrices: Vec<Operator>,
}

impl CabelloOperator {
    pub fn build() -> Self {
        let terms = terms();
        let term_matrices: Vec<Operator> = terms
            .iter()
            .map(|t| term_operator(t).expect("canonical term"))
            .collect();
        let matrix = terms
            .iter()
            .zip(&term_matrices)
            .fold(Operator::zeros(GLOBAL_DIM), |acc, (t, m)| {
                &acc + &m.scale_real(f64::from(t.sign))
            });
        CabelloOperator {
            matrix,
            terms,
            term_matrices,
        }
    }
}

pub fn cabello_operator() -> CabelloOperator {
    CabelloOperator::build()
}

/// Outcome of checking one term's eigen-relation on a state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenRelation {
    pub term_id: u8,
    /// `Some(λ)` when `T|ψ⟩ = λ|ψ⟩` up to the residual tolerance.
    pub eigenvalue: Option<f64>,
    /// `‖T|ψ⟩ − λ|ψ⟩‖` with `λ = ⟨ψ|T|ψ⟩`.
    pub residual: f64,
}

/// Checks whether `state` is an eigenvector of each of the nine terms.
pub fn verify_eigenvalues(state: &Ket) -> Result<Vec<EigenRelation>> {
    if state.dim() != GLOBAL_DIM {
        return Err(Error::DimensionMismatch {
            expected: GLOBAL_DIM,
            got: state.dim(),
        });
    }
    if !state.is_normalized() {
        return Err(Error::InvalidArgument("state is not normalized".into()));
    }
    terms()
        .iter()
        .map(|t| {
            let op = term_operator(t)?;
            let image = apply(&op, state)?;
            let lambda = state.inner(&image)?;
            let residual = image.distance(&state.scale(lambda))?;
            let eigenvalue = (residual < HERMITIAN_TOL).then_some(lambda.re);
            Ok(EigenRelation {
                term_id: t.id,
                eigenvalue,
                residual,
            })
        })
        .collect()
}
