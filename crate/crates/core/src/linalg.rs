//! Dense complex linear algebra over the small Hilbert spaces used here
//! (single qubits, qubit pairs and the 16-dimensional two-photon space).
//!
//! Matrices are stored row-major. Kronecker products follow the usual
//! convention `(A ⊗ B)[i·db + k, j·db + l] = A[i,j]·B[k,l]`, so the first
//! factor is the most significant index.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of qubits in the global two-photon space.
pub const NUM_QUBITS: usize = 4;
/// Dimension of the global two-photon space.
pub const GLOBAL_DIM: usize = 16;

/// Tolerance for exact algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for Hermiticity, positivity and imaginary residues.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A state vector. Not necessarily normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amps: Vec<Complex64>,
}

impl Ket {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidArgument(
                "ket must have at least one amplitude".into(),
            ));
        }
        Ok(Ket { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Ket::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩` in a space of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Ket { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < ALGEBRA_TOL
    }

    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numerical(
                "cannot normalize a zero or non-finite ket".into(),
            ));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Ket {
        Ket {
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Ket) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// The projector `|self⟩⟨self|`.
    pub fn projector(&self) -> Operator {
        let d = self.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.amps[i] * self.amps[j].conj());
            }
        }
        Operator { dim: d, entries }
    }
}

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Operator { dim, entries })
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Operator::new(
            dim,
            entries.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = ONE;
        }
        Operator { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut op = Operator::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.entries[i * diag.len() + i] = d;
        }
        op
    }

    pub fn pauli_x() -> Self {
        Operator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn pauli_y() -> Self {
        Operator::new(
            2,
            vec![
                ZERO,
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                ZERO,
            ],
        )
        .expect("2x2")
    }

    pub fn pauli_z() -> Self {
        Operator::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn dagger(&self) -> Operator {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.get(j, i).conj());
            }
        }
        Operator { dim: d, entries }
    }

    pub fn scale(&self, c: Complex64) -> Operator {
        Operator {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &Operator) -> Result<Operator> {
        check_dim(self.dim, rhs.dim)?;
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * rhs.entries[k * d + j];
                }
            }
        }
        Ok(Operator { dim: d, entries })
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Deviation from Hermiticity, `max |A − A†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Deviation from unitarity, `max |U†U − I|`.
    pub fn unitary_defect(&self) -> f64 {
        let prod = self.dagger().matmul(self).expect("same dimension");
        prod.max_abs_diff(&Operator::identity(self.dim))
            .expect("same dimension")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    /// `U · self · U†`
    pub fn conjugate_by(&self, u: &Operator) -> Result<Operator> {
        u.matmul(self)?.matmul(&u.dagger())
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let c = self.get(i, j);
                write!(f, "{:>8.4}{:+.4}i ", c.re, c.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Add for &Operator {
    type Output = Operator;

    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;

    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "operator dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs).expect("operator dimension mismatch")
    }
}

/// A mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: Operator,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: Operator) -> Result<Self> {
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > ALGEBRA_TOL || tr.im.abs() > ALGEBRA_TOL {
            return Err(Error::Numerical(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -HERMITIAN_TOL {
            return Err(Error::Numerical(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn from_pure(ket: &Ket) -> Result<Self> {
        if !ket.is_normalized() {
            return Err(Error::InvalidArgument(format!(
                "ket is not normalized (norm² = {})",
                ket.norm_sqr()
            )));
        }
        Ok(DensityMatrix {
            matrix: ket.projector(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: Operator::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Operator {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).expect("square").trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// `U ρ U†`
    pub fn evolve(&self, u: &Operator) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            matrix: self.matrix.conjugate_by(u)?,
        })
    }
}

/// Either kind of state accepted by [`expectation`].
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a> {
    Pure(&'a Ket),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a Ket> for StateRef<'a> {
    fn from(k: &'a Ket) -> Self {
        StateRef::Pure(k)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        StateRef::Mixed(r)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut entries = vec![ZERO; d * d];
    for i in 0..da {
        for j in 0..da {
            let aij = a.entries[i * da + j];
            for k in 0..db {
                for l in 0..db {
                    entries[(i * db + k) * d + j * db + l] = aij * b.entries[k * db + l];
                }
            }
        }
    }
    Operator { dim: d, entries }
}

/// Kronecker product of kets, `amps[i·db + j] = a[i]·b[j]`.
pub fn kron_ket(a: &Ket, b: &Ket) -> Ket {
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    Ket { amps }
}

/// Places a single-qubit operator at `slot` of the four-qubit space, with
/// identities elsewhere. Slot 0 is the most significant qubit.
pub fn embed(op: &Operator, slot: usize) -> Result<Operator> {
    if op.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: op.dim,
        });
    }
    if slot >= NUM_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qubit slot {slot} out of range 0..{NUM_QUBITS}"
        )));
    }
    let id = Operator::identity(2);
    let mut out = Operator::identity(1);
    for q in 0..NUM_QUBITS {
        out = kron(&out, if q == slot { op } else { &id });
    }
    Ok(out)
}

/// Tensor product of one single-qubit operator per slot.
pub fn tensor_all(ops: &[Operator]) -> Operator {
    ops.iter()
        .fold(Operator::identity(1), |acc, op| kron(&acc, op))
}

/// Matrix-vector product. The result is not renormalized.
pub fn apply(op: &Operator, state: &Ket) -> Result<Ket> {
    check_dim(op.dim, state.dim())?;
    let d = op.dim;
    let amps = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| op.entries[i * d + j] * state.amps[j])
                .sum::<Complex64>()
        })
        .collect();
    Ok(Ket { amps })
}

/// `⟨ψ|obs|ψ⟩` or `Tr(ρ·obs)` for a Hermitian observable.
///
/// The imaginary part is checked against [`HERMITIAN_TOL`] and dropped.
pub fn expectation<'a>(obs: &Operator, state: impl Into<StateRef<'a>>) -> Result<f64> {
    let defect = obs.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let value = match state.into() {
        StateRef::Pure(ket) => {
            check_dim(obs.dim, ket.dim())?;
            if !ket.is_normalized() {
                return Err(Error::InvalidArgument(format!(
                    "ket is not normalized (norm² = {})",
                    ket.norm_sqr()
                )));
            }
            ket.inner(&apply(obs, ket)?)?
        }
        StateRef::Mixed(rho) => {
            check_dim(obs.dim, rho.dim())?;
            let d = obs.dim;
            let mut acc = ZERO;
            for i in 0..d {
                for k in 0..d {
                    acc += rho.matrix.entries[i * d + k] * obs.entries[k * d + i];
                }
            }
            acc
        }
    };
    if value.im.abs() >= HERMITIAN_TOL {
        return Err(Error::Numerical(format!(
            "expectation has imaginary residue {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The `n×n` complex matrix is embedded as the `2n×2n` real symmetric matrix
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is that of the original with every
/// eigenvalue doubled, and diagonalized with cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(op: &Operator) -> Vec<f64> {
    let n = op.dim;
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = op.entries[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..64 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * m + j] * a[i * m + j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    // Each eigenvalue appears twice; keep one of each pair.
    eig.into_iter().step_by(2).collect()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = Operator::identity(2);
        assert_eq!(kron(&i2, &i2), Operator::identity(4));
        let zz = kron(&Operator::pauli_z(), &Operator::pauli_z());
        let expected = Operator::diagonal(&[ONE, -ONE, -ONE, ONE]);
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_xx_is_antidiagonal() {
        let xx = kron(&Operator::pauli_x(), &Operator::pauli_x());
        for i in 0..4 {
            for j in 0..4 {
                let want = if i + j == 3 { ONE } else { ZERO };
                assert_eq!(xx.get(i, j), want);
            }
        }
    }

    #[test]
    fn kron_ket_basis() {
        let k0 = Ket::basis(2, 0).unwrap();
        let k1 = Ket::basis(2, 1).unwrap();
        assert_eq!(kron_ket(&k0, &k0), Ket::basis(4, 0).unwrap());
        assert_eq!(kron_ket(&k0, &k1), Ket::basis(4, 1).unwrap());
    }

    #[test]
    fn embed_cases() {
        assert_eq!(
            embed(&Operator::identity(2), 2).unwrap(),
            Operator::identity(16)
        );
        let z0 = embed(&Operator::pauli_z(), 0).unwrap();
        for i in 0..16 {
            let want = if i >= 8 { -1.0 } else { 1.0 };
            assert_eq!(z0.get(i, i), c(want, 0.0));
        }
        assert_eq!(embed(&Operator::pauli_x(), 2).unwrap().trace(), ZERO);
        assert!(embed(&Operator::pauli_x(), 4).is_err());
        assert!(embed(&Operator::identity(4), 0).is_err());
    }

    #[test]
    fn expectation_basics() {
        let k0 = Ket::basis(2, 0).unwrap();
        assert!((expectation(&Operator::pauli_z(), &k0).unwrap() - 1.0).abs() < ALGEBRA_TOL);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Ket::from_real(&[0.0, s, -s, 0.0]).unwrap();
        let zz = kron(&Operator::pauli_z(), &Operator::pauli_z());
        assert!((expectation(&zz, &singlet).unwrap() + 1.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let op = Operator::new(2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        let k0 = Ket::basis(2, 0).unwrap();
        assert!(matches!(expectation(&op, &k0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn expectation_rejects_dim_mismatch() {
        let k0 = Ket::basis(4, 0).unwrap();
        assert!(matches!(
            expectation(&Operator::pauli_z(), &k0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_cases() {
        let psi = Ket::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert_eq!(apply(&Operator::identity(2), &psi).unwrap(), psi);
        let k1 = Ket::basis(2, 1).unwrap();
        assert_eq!(apply(&Operator::pauli_z(), &k1).unwrap(), k1.scale(-ONE));
        assert!(apply(&Operator::identity(4), &k1).is_err());
    }

    #[test]
    fn maximally_mixed_identity_expectation() {
        let rho = DensityMatrix::maximally_mixed(16);
        let v = expectation(&Operator::identity(16), &rho).unwrap();
        assert!((v - 1.0).abs() < ALGEBRA_TOL);
        assert!((rho.purity() - 1.0 / 16.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn density_matrix_validation() {
        let bad_trace = Operator::identity(2);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = Operator::diagonal(&[c(1.5, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn jacobi_eigenvalues_of_pauli_sums() {
        let h = &Operator::pauli_x() + &Operator::pauli_y();
        let eig = hermitian_eigenvalues(&h);
        let r = 2f64.sqrt();
        assert!((eig[0] + r).abs() < 1e-12 && (eig[1] - r).abs() < 1e-12);
    }

    fn arb_op(dim: usize) -> impl Strategy<Value = Operator> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), dim * dim).prop_map(move |v| {
            Operator::new(dim, v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
        })
    }

    /// Dyadic entries, so products are exact and association order cannot
    /// change the rounding.
    fn arb_dyadic_op(dim: usize) -> impl Strategy<Value = Operator> {
        prop::collection::vec((-8i32..8, -8i32..8), dim * dim).prop_map(move |v| {
            Operator::new(
                dim,
                v.into_iter()
                    .map(|(r, i)| c(f64::from(r) / 4.0, f64::from(i) / 4.0))
                    .collect(),
            )
            .unwrap()
        })
    }

    fn arb_unitary() -> impl Strategy<Value = Operator> {
        // Products of rotations generated by Paulis are unitary.
        (0.0f64..6.3, 0.0f64..6.3, 0.0f64..6.3).prop_map(|(a, b, g)| {
            let rot = |p: Operator, t: f64| {
                &Operator::identity(2).scale_real((t / 2.0).cos())
                    - &p.scale(c(0.0, (t / 2.0).sin()))
            };
            let u = &(&rot(Operator::pauli_z(), a) * &rot(Operator::pauli_y(), b))
                * &rot(Operator::pauli_z(), g);
            tensor_all(&[u.clone(), u.dagger(), u, Operator::pauli_x()])
        })
    }

    proptest! {
        #[test]
        fn kron_is_associative(a in arb_dyadic_op(2), b in arb_dyadic_op(2), cc in arb_dyadic_op(2)) {
            let left = kron(&kron(&a, &b), &cc);
            let right = kron(&a, &kron(&b, &cc));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn unitary_apply_preserves_norm(
            u in arb_unitary(),
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        ) {
            let psi = Ket::new(amps.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap();
            prop_assume!(psi.norm() > 1e-3);
            let psi = psi.normalized().unwrap();
            prop_assert!(u.is_unitary(ALGEBRA_TOL));
            let out = apply(&u, &psi).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < ALGEBRA_TOL);
        }

        #[test]
        fn hermitian_expectation_is_real(
            a in arb_op(4),
            amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let h = &a + &a.dagger();
            let psi = Ket::new(amps.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap();
            prop_assume!(psi.norm() > 1e-3);
            let psi = psi.normalized().unwrap();
            prop_assert!(expectation(&h, &psi).is_ok());
        }
    }
}
