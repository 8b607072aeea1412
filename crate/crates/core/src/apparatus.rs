//! Optical elements of the analyzers and the delay-scan resonance.
//!
//! Outcome labels are fixed project-wide: +1 for `H`, `D`, `a₁`/`b₁` and `d`,
//! −1 for `V`, `D̄`, `a₂`/`b₂` and `d̄`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply, kron, Ket, Operator};
use crate::states::HyperState;

/// Speed of light in µm/fs.
const C_UM_PER_FS: f64 = 0.299_792_458;

/// Coherence time set by the 6 nm interference filters, in femtoseconds.
pub const COHERENCE_TIME_FS: f64 = 150.0;

/// Coherence length `c·τ_coh` in µm (about 45 µm).
pub fn default_coherence_length_um() -> f64 {
    C_UM_PER_FS * COHERENCE_TIME_FS
}

/// Fast-axis angle of a half-wave plate, measured from `H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveplateSetting {
    pub angle: f64,
}

/// Jones matrix `[[cos2ξ, sin2ξ], [sin2ξ, −cos2ξ]]`.
pub fn hwp_operator(w: WaveplateSetting) -> Operator {
    let (s, c) = (2.0 * w.angle).sin_cos();
    Operator::from_real(2, &[c, s, s, -c]).expect("2x2")
}

/// Symmetric beam splitter acting on a photon's two momentum modes:
/// `|a₁⟩ → |d⟩ = (|a₁⟩ + |a₂⟩)/√2`, `|a₂⟩ → |d̄⟩ = (|a₁⟩ − |a₂⟩)/√2`.
pub fn bs_operator() -> Operator {
    let s = FRAC_1_SQRT_2;
    Operator::from_real(2, &[s, s, s, -s]).expect("2x2")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiBasis {
    /// `H−V`
    Hv,
    /// `D−D̄`
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KBasis {
    /// The spatial modes themselves (`a₁/a₂`, `b₁/b₂`).
    Modes,
    /// `d−d̄`, after the beam splitter.
    Superposed,
}

/// Analyzer bases for both degrees of freedom of one photon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisChoice {
    pub pi: PiBasis,
    pub k: KBasis,
}

impl BasisChoice {
    pub fn new(pi: PiBasis, k: KBasis) -> Self {
        BasisChoice { pi, k }
    }
}

/// Rank-1 projectors `[Π₊, Π₋]` for each qubit of a photon.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisProjectors {
    pub pi: [Operator; 2],
    pub k: [Operator; 2],
}

fn eigenbasis_kets(diagonal: bool) -> [Ket; 2] {
    if diagonal {
        let s = FRAC_1_SQRT_2;
        [
            Ket::from_real(&[s, s]).expect("2"),
            Ket::from_real(&[s, -s]).expect("2"),
        ]
    } else {
        [Ket::basis(2, 0).expect("2"), Ket::basis(2, 1).expect("2")]
    }
}

pub fn basis_projectors(b: BasisChoice) -> BasisProjectors {
    let pi = eigenbasis_kets(b.pi == PiBasis::Diagonal).map(|k| k.projector());
    let k = match b.k {
        KBasis::Modes => eigenbasis_kets(false).map(|k| k.projector()),
        // Image of the mode projectors under the beam splitter.
        KBasis::Superposed => {
            let bs = bs_operator();
            eigenbasis_kets(false).map(|m| apply(&bs, &m).expect("2").projector())
        }
    };
    BasisProjectors { pi, k }
}

/// Analyzer waveplate that rotates the chosen polarization basis onto `H−V`
/// in front of the polarizing beam splitter.
pub fn analyzer_waveplate(basis: PiBasis) -> WaveplateSetting {
    match basis {
        PiBasis::Hv => WaveplateSetting { angle: 0.0 },
        PiBasis::Diagonal => WaveplateSetting { angle: FRAC_PI_8 },
    }
}

/// Sign of the two-photon resonance for a state's momentum pair: the
/// coincidence probability in `(d, d)` after both beam splitters, relative to
/// the distinguishable-photon value 1/4. Gives +1 for `ψ⁺` and −1 for `ψ⁻`.
pub fn resonance_symmetry(state: &HyperState) -> f64 {
    let bs2 = kron(&bs_operator(), &bs_operator());
    let out = apply(&bs2, state.momentum_pair()).expect("4-dimensional");
    (4.0 * out.amplitudes()[0].norm_sqr() - 1.0).clamp(-1.0, 1.0)
}

/// Parameters of a path-delay scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DelayScanConfig {
    pub dx_values: Vec<f64>,
    pub visibility: f64,
    pub coherence_length_um: f64,
    pub baseline_rate: f64,
}

impl Default for DelayScanConfig {
    fn default() -> Self {
        DelayScanConfig {
            dx_values: (-150..=150).map(f64::from).collect(),
            visibility: 0.90,
            coherence_length_um: default_coherence_length_um(),
            baseline_rate: 1000.0,
        }
    }
}

impl DelayScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.coherence_length_um > 0.0 && self.coherence_length_um.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coherence length must be positive, got {}",
                self.coherence_length_um
            )));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidArgument(format!(
                "visibility {} is outside [0, 1]",
                self.visibility
            )));
        }
        if !(self.baseline_rate >= 0.0 && self.baseline_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "baseline rate must be non-negative, got {}",
                self.baseline_rate
            )));
        }
        if self.dx_values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("delay values must be finite".into()));
        }
        Ok(())
    }
}

/// `rate(Δx) = baseline · [1 + symmetry · V · exp(−(Δx/ℓ)²)]`
pub fn coincidence_curve(symmetry: f64, cfg: &DelayScanConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    if !(-1.0..=1.0).contains(&symmetry) {
        return Err(Error::InvalidArgument(format!(
            "symmetry {symmetry} is outside [−1, 1]"
        )));
    }
    Ok(cfg
        .dx_values
        .iter()
        .map(|&dx| {
            let env = (-(dx / cfg.coherence_length_um).powi(2)).exp();
            (
                dx,
                cfg.baseline_rate * (1.0 + symmetry * cfg.visibility * env),
            )
        })
        .collect())
}

/// Least-squares fit of `b + c·exp(−(x/ℓ)²)` for a fixed width; returns
/// `(b, c, residual)`.
fn fit_fixed_width(curve: &[(f64, f64)], width: f64) -> (f64, f64, f64) {
    let n = curve.len() as f64;
    let (mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in curve {
        let g = (-(x / width).powi(2)).exp();
        sg += g;
        sgg += g * g;
        sy += y;
        sgy += g * y;
    }
    let det = n * sgg - sg * sg;
    let (b, c) = if det.abs() < 1e-300 {
        (sy / n, 0.0)
    } else {
        ((sgg * sy - sg * sgy) / det, (n * sgy - sg * sy) / det)
    };
    let res = curve
        .iter()
        .map(|&(x, y)| {
            let r = y - b - c * (-(x / width).powi(2)).exp();
            r * r
        })
        .sum();
    (b, c, res)
}

/// Recovers the resonance visibility from a delay scan by fitting the
/// Gaussian envelope and comparing its amplitude to the far-delay baseline.
pub fn extract_visibility(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 3 {
        return Err(Error::UndefinedVisibility(format!(
            "need at least 3 points, got {}",
            curve.len()
        )));
    }
    if curve.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::UndefinedVisibility(
            "curve has non-finite points".into(),
        ));
    }
    let span = curve.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let mut xs: Vec<f64> = curve.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let spacing = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if xs.len() < 3 || span == 0.0 {
        return Err(Error::UndefinedVisibility(
            "curve does not span a range of delays".into(),
        ));
    }
    let max_rate = curve.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min_rate = curve.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if max_rate + min_rate <= 0.0 {
        return Err(Error::UndefinedVisibility("curve has no counts".into()));
    }
    if max_rate == min_rate {
        return Ok(0.0);
    }

    // Coarse log-spaced scan of the width, then golden-section refinement.
    let lo = (spacing / 4.0).ln();
    let hi = (4.0 * span).ln();
    let steps = 400;
    let at = |i: usize| lo + (hi - lo) * i as f64 / steps as f64;
    let best = (0..=steps)
        .min_by(|&i, &j| {
            let ri = fit_fixed_width(curve, at(i).exp()).2;
            let rj = fit_fixed_width(curve, at(j).exp()).2;
            ri.total_cmp(&rj)
        })
        .expect("non-empty");
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(steps)));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let f = |t: f64| fit_fixed_width(curve, t.exp()).2;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let (baseline, amplitude, _) = fit_fixed_width(curve, (0.5 * (a + b)).exp());
    if baseline <= 0.0 {
        return Err(Error::UndefinedVisibility(format!(
            "fitted baseline {baseline} is not positive"
        )));
    }
    Ok(amplitude.abs() / baseline)
}

/// Writes `dx_um,rate_hz` rows with a header.
pub fn write_curve_csv<W: Write>(mut w: W, curve: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "dx_um,rate_hz")?;
    for (dx, rate) in curve {
        writeln!(w, "{dx},{rate}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ALGEBRA_TOL, ONE};
    use crate::states::hyper_state;
    use crate::states::PiFlavor;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn hwp_special_angles() {
        let z = hwp_operator(WaveplateSetting { angle: 0.0 });
        assert!(z.approx_eq(&Operator::pauli_z(), ALGEBRA_TOL));
        let x = hwp_operator(WaveplateSetting { angle: FRAC_PI_4 });
        assert!(x.approx_eq(&Operator::pauli_x(), ALGEBRA_TOL));
        let h = hwp_operator(WaveplateSetting { angle: FRAC_PI_8 });
        let s = FRAC_1_SQRT_2;
        assert!(h.approx_eq(
            &Operator::from_real(2, &[s, s, s, -s]).unwrap(),
            ALGEBRA_TOL
        ));
    }

    #[test]
    fn hwp_swaps_h_and_v_at_45_degrees() {
        let x = hwp_operator(WaveplateSetting { angle: FRAC_PI_4 });
        let out = apply(&x, &Ket::basis(2, 0).unwrap()).unwrap();
        assert!(out.distance(&Ket::basis(2, 1).unwrap()).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn beam_splitter_maps_modes_to_d_basis() {
        let bs = bs_operator();
        let s = FRAC_1_SQRT_2;
        let d = apply(&bs, &Ket::basis(2, 0).unwrap()).unwrap();
        let dbar = apply(&bs, &Ket::basis(2, 1).unwrap()).unwrap();
        assert!(d.distance(&Ket::from_real(&[s, s]).unwrap()).unwrap() < ALGEBRA_TOL);
        assert!(dbar.distance(&Ket::from_real(&[s, -s]).unwrap()).unwrap() < ALGEBRA_TOL);
        assert!((&bs * &bs).approx_eq(&Operator::identity(2), ALGEBRA_TOL));
    }

    #[test]
    fn elements_are_unitary_and_hermitian() {
        for angle in [0.0, 0.3, FRAC_PI_8, FRAC_PI_4, 1.7, -2.2] {
            let h = hwp_operator(WaveplateSetting { angle });
            assert!(h.is_unitary(ALGEBRA_TOL) && h.is_hermitian(ALGEBRA_TOL));
        }
        let bs = bs_operator();
        assert!(bs.is_unitary(ALGEBRA_TOL) && bs.is_hermitian(ALGEBRA_TOL));
    }

    #[test]
    fn projectors_resolve_identity() {
        for pi in [PiBasis::Hv, PiBasis::Diagonal] {
            for k in [KBasis::Modes, KBasis::Superposed] {
                let p = basis_projectors(BasisChoice::new(pi, k));
                let id = Operator::identity(2);
                assert!((&p.pi[0] + &p.pi[1]).approx_eq(&id, ALGEBRA_TOL));
                assert!((&p.k[0] + &p.k[1]).approx_eq(&id, ALGEBRA_TOL));
            }
        }
        let hv = basis_projectors(BasisChoice::new(PiBasis::Hv, KBasis::Modes));
        assert_eq!(hv.pi[0], Operator::diagonal(&[ONE, crate::linalg::ZERO]));
        let dd = basis_projectors(BasisChoice::new(PiBasis::Diagonal, KBasis::Superposed));
        let half = Operator::from_real(2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(dd.pi[0].approx_eq(&half, ALGEBRA_TOL));
        assert!(dd.k[0].approx_eq(&half, ALGEBRA_TOL));
    }

    #[test]
    fn analyzer_waveplate_maps_d_to_h() {
        let w = hwp_operator(analyzer_waveplate(PiBasis::Diagonal));
        let s = FRAC_1_SQRT_2;
        let out = apply(&w, &Ket::from_real(&[s, s]).unwrap()).unwrap();
        assert!(out.distance(&Ket::basis(2, 0).unwrap()).unwrap() < ALGEBRA_TOL);
    }

    #[test]
    fn curve_values() {
        let cfg = DelayScanConfig {
            dx_values: vec![0.0, 1e4],
            ..Default::default()
        };
        let peak = coincidence_curve(1.0, &cfg).unwrap();
        assert!((peak[0].1 - 1.90 * cfg.baseline_rate).abs() < 1e-9);
        assert!((peak[1].1 - cfg.baseline_rate).abs() < 1e-9);
        let dip = coincidence_curve(-1.0, &cfg).unwrap();
        assert!((dip[0].1 - 0.10 * cfg.baseline_rate).abs() < 1e-9);
    }

    #[test]
    fn coherence_length_is_about_45_um() {
        assert!((default_coherence_length_um() - 45.0).abs() < 0.1);
    }

    #[test]
    fn curve_is_even_and_monotone() {
        let cfg = DelayScanConfig {
            dx_values: (-200..=200).map(f64::from).collect(),
            ..Default::default()
        };
        for sym in [1.0, -1.0] {
            let c = coincidence_curve(sym, &cfg).unwrap();
            let n = c.len();
            for i in 0..n {
                assert!((c[i].1 - c[n - 1 - i].1).abs() < 1e-9);
            }
            let right = &c[n / 2..];
            for w in right.windows(2) {
                if sym > 0.0 {
                    assert!(w[1].1 <= w[0].1);
                } else {
                    assert!(w[1].1 >= w[0].1);
                }
            }
        }
    }

    #[test]
    fn visibility_round_trip() {
        for v in [0.0, 0.25, 0.9, 1.0] {
            for sym in [1.0, -1.0] {
                let cfg = DelayScanConfig {
                    visibility: v,
                    ..Default::default()
                };
                let c = coincidence_curve(sym, &cfg).unwrap();
                let got = extract_visibility(&c).unwrap();
                assert!((got - v).abs() < 1e-6, "v={v} sym={sym} got={got}");
            }
        }
    }

    #[test]
    fn visibility_round_trip_without_center_sample() {
        let cfg = DelayScanConfig {
            dx_values: (0..60).map(|i| -147.5 + 5.0 * f64::from(i)).collect(),
            coherence_length_um: 37.0,
            ..Default::default()
        };
        let got = extract_visibility(&coincidence_curve(-1.0, &cfg).unwrap()).unwrap();
        assert!((got - 0.9).abs() < 1e-6, "{got}");
    }

    #[test]
    fn undefined_visibility_cases() {
        assert!(matches!(
            extract_visibility(&[(0.0, 1.0), (1.0, 1.0)]),
            Err(Error::UndefinedVisibility(_))
        ));
        let zero: Vec<(f64, f64)> = (0..10).map(|i| (f64::from(i), 0.0)).collect();
        assert!(matches!(
            extract_visibility(&zero),
            Err(Error::UndefinedVisibility(_))
        ));
        let same_x = vec![(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)];
        assert!(extract_visibility(&same_x).is_err());
    }

    #[test]
    fn invalid_scan_config() {
        let cfg = DelayScanConfig {
            coherence_length_um: 0.0,
            ..Default::default()
        };
        assert!(coincidence_curve(1.0, &cfg).is_err());
        let cfg = DelayScanConfig {
            visibility: 1.2,
            ..Default::default()
        };
        assert!(coincidence_curve(1.0, &cfg).is_err());
    }

    #[test]
    fn symmetry_from_state() {
        let plus = hyper_state(PiFlavor::Psi, 0.0, 0.0);
        let minus = hyper_state(PiFlavor::Psi, 0.0, PI);
        assert!((resonance_symmetry(&plus) - 1.0).abs() < ALGEBRA_TOL);
        assert!((resonance_symmetry(&minus) + 1.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &[(0.0, 1.5)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "dx_um,rate_hz\n0,1.5\n");
    }
}
