//! Exhaustive enumeration of deterministic local-hidden-variable models.
//!
//! An assignment fixes a ±1 value for each of the eight local observables.
//! Because one assignment fixes all four values carried by a photon, mixtures
//! of assignments can represent arbitrary correlations between the two
//! degrees of freedom of the same photon.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::observables::{terms, LocalObservable, TermSpec};

/// Largest value of the operator attainable by any local model.
pub const CLASSICAL_BOUND: i32 = 7;

/// Quantum-mechanical value on the ideal state.
pub const QUANTUM_VALUE: i32 = 9;

/// A deterministic ±1 valuation of the eight local observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LhvAssignment {
    /// Indexed by [`LocalObservable::index`].
    pub values: [i8; 8],
}

impl LhvAssignment {
    /// Bit `i` of `bits` set means observable `i` takes the value −1.
    pub fn from_bits(bits: u8) -> Self {
        let mut values = [1i8; 8];
        for (i, v) in values.iter_mut().enumerate() {
            if bits >> i & 1 == 1 {
                *v = -1;
            }
        }
        LhvAssignment { values }
    }

    pub fn all_plus() -> Self {
        LhvAssignment { values: [1; 8] }
    }

    pub fn value(&self, obs: LocalObservable) -> i32 {
        i32::from(self.values[obs.index()])
    }

    pub fn with(mut self, obs: LocalObservable, value: i8) -> Self {
        assert!(value == 1 || value == -1, "LHV values are ±1");
        self.values[obs.index()] = value;
        self
    }
}

impl fmt::Display for LhvAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = LocalObservable::all()
            .iter()
            .map(|o| format!("{o}={:+}", self.value(*o)))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn term_value(t: &TermSpec, a: &LhvAssignment) -> i32 {
    t.factors().map(|o| a.value(o)).product()
}

/// Operator value under `a`, with composites evaluated as products of their
/// elementary values.
pub fn lhv_value(a: &LhvAssignment) -> i32 {
    terms()
        .iter()
        .map(|t| i32::from(t.sign) * term_value(t, a))
        .sum()
}

/// `o_value − 7`
pub fn violation_margin(o_value: f64) -> f64 {
    o_value - f64::from(CLASSICAL_BOUND)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub assignments: u64,
    pub max_value: i32,
    pub min_value: i32,
    pub histogram: BTreeMap<i32, u64>,
    pub maximizers: Vec<LhvAssignment>,
}

#[derive(Default)]
struct Tally {
    hist: BTreeMap<i32, u64>,
    max: Option<(i32, Vec<u32>)>,
    min: Option<i32>,
}

impl Tally {
    fn push(mut self, code: u32, value: i32) -> Self {
        *self.hist.entry(value).or_default() += 1;
        match &mut self.max {
            Some((m, who)) if *m == value => who.push(code),
            Some((m, _)) if *m > value => {}
            _ => self.max = Some((value, vec![code])),
        }
        self.min = Some(self.min.map_or(value, |m| m.min(value)));
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        for (k, v) in other.hist {
            *self.hist.entry(k).or_default() += v;
        }
        self.max = match (self.max, other.max) {
            (Some((a, mut wa)), Some((b, wb))) if a == b => {
                wa.extend(wb);
                Some((a, wa))
            }
            (Some(a), Some(b)) => Some(if a.0 > b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self.min = match (self.min, other.min) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

fn sweep(n_bits: u32, value: impl Fn(u32) -> i32 + Sync) -> Tally {
    let mut tally = (0..1u32 << n_bits)
        .into_par_iter()
        .fold(Tally::default, |t, code| t.push(code, value(code)))
        .reduce(Tally::default, Tally::merge);
    if let Some((_, who)) = &mut tally.max {
        who.sort_unstable();
    }
    tally
}

/// Enumerates all 2⁸ assignments.
pub fn classical_bound() -> BoundReport {
    let tally = sweep(8, |code| lhv_value(&LhvAssignment::from_bits(code as u8)));
    let (max_value, who) = tally.max.expect("non-empty sweep");
    BoundReport {
        assignments: 256,
        max_value,
        min_value: tally.min.expect("non-empty sweep"),
        histogram: tally.hist,
        maximizers: who
            .into_iter()
            .map(|c| LhvAssignment::from_bits(c as u8))
            .collect(),
    }
}

/// Distinct same-photon composite observables that appear in the operator,
/// in first-appearance order: `z₁z₁′, x₁x₁′, z₂x₂′, x₂z₂′`.
pub fn composite_observables() -> Vec<Vec<LocalObservable>> {
    let mut out: Vec<Vec<LocalObservable>> = Vec::new();
    for t in terms() {
        for g in t.composites() {
            if !out.iter().any(|c| c.as_slice() == g) {
                out.push(g.to_vec());
            }
        }
    }
    out
}

/// Result of the sweep where composites carry their own ±1 values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendedBoundReport {
    pub composites: Vec<String>,
    pub assignments: u64,
    pub max_value: i32,
    pub min_value: i32,
    pub histogram: BTreeMap<i32, u64>,
    /// Number of maximizing assignments.
    pub maximizer_count: usize,
}

/// Enumerates assignments in which every composite observable is an
/// independent ±1 value instead of the product of its parts.
pub fn extended_bound() -> ExtendedBoundReport {
    let composites = composite_observables();
    let n_comp = composites.len() as u32;
    let ts = terms();
    let value = |code: u32| -> i32 {
        let elementary = LhvAssignment::from_bits((code & 0xff) as u8);
        let comp_value = |g: &[LocalObservable]| -> i32 {
            let k = composites
                .iter()
                .position(|c| c.as_slice() == g)
                .expect("known composite");
            if code >> (8 + k) & 1 == 1 {
                -1
            } else {
                1
            }
        };
        ts.iter()
            .map(|t| {
                let prod: i32 = t
                    .groups
                    .iter()
                    .map(|g| {
                        if g.len() == 1 {
                            elementary.value(g[0])
                        } else {
                            comp_value(g)
                        }
                    })
                    .product();
                i32::from(t.sign) * prod
            })
            .sum()
    };
    let tally = sweep(8 + n_comp, value);
    let (max_value, who) = tally.max.expect("non-empty sweep");
    ExtendedBoundReport {
        composites: composites
            .iter()
            .map(|g| g.iter().map(|o| o.to_string()).collect())
            .collect(),
        assignments: 1u64 << (8 + n_comp),
        max_value,
        min_value: tally.min.expect("non-empty sweep"),
        histogram: tally.hist,
        maximizer_count: who.len(),
    }
}
