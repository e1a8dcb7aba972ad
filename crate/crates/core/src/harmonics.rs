//! Hyperspherical harmonics on the planar three-body hypersphere, the
//! permutation/reflection operators acting on them, and enumeration of the
//! labels that survive symmetrization.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::HyperPoint;
use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Quantum numbers (λ, ω, M) of a single harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicLabel {
    pub lambda: i32,
    pub omega: i32,
    pub m: i32,
}

impl HarmonicLabel {
    pub fn new(lambda: i32, omega: i32, m: i32) -> Result<Self> {
        let h = Self { lambda, omega, m };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { lambda, omega, m } = *self;
        if lambda < 0 || omega.abs() > lambda || m.abs() > lambda {
            return Err(Error::domain(format!(
                "label ({lambda},{omega},{m}) violates |omega|,|M| <= lambda"
            )));
        }
        if (lambda - omega).rem_euclid(2) != 0 || (lambda - m).rem_euclid(2) != 0 {
            return Err(Error::domain(format!(
                "label ({lambda},{omega},{m}) mixes even and odd values"
            )));
        }
        Ok(())
    }

    /// λ(λ+2), the eigenvalue of Λ².
    pub fn casimir(&self) -> f64 {
        (self.lambda * (self.lambda + 2)) as f64
    }
}

impl fmt::Display for HarmonicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.lambda, self.omega, self.m)
    }
}

/// Permutation class of the three particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    #[serde(rename = "BBB")]
    Bbb,
    #[serde(rename = "FFF")]
    Fff,
    #[serde(rename = "BBX")]
    Bbx,
    #[serde(rename = "FFX")]
    Ffx,
    #[serde(rename = "distinguishable")]
    Distinguishable,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 5] = [
        SymmetryClass::Bbb,
        SymmetryClass::Fff,
        SymmetryClass::Bbx,
        SymmetryClass::Ffx,
        SymmetryClass::Distinguishable,
    ];

    /// 0 for bosons, 1 for fermions, `None` without identical particles.
    pub fn statistics(self) -> Option<u8> {
        match self {
            SymmetryClass::Bbb | SymmetryClass::Bbx => Some(0),
            SymmetryClass::Fff | SymmetryClass::Ffx => Some(1),
            SymmetryClass::Distinguishable => None,
        }
    }

    pub fn identical_count(self) -> usize {
        match self {
            SymmetryClass::Bbb | SymmetryClass::Fff => 3,
            SymmetryClass::Bbx | SymmetryClass::Ffx => 2,
            SymmetryClass::Distinguishable => 0,
        }
    }

    /// Upper end of the irreducible φ interval.
    pub fn phi_max(self) -> f64 {
        match self.identical_count() {
            3 => PI / 3.0,
            2 => PI,
            _ => TWO_PI,
        }
    }

    /// Group elements and weights of the (un-normalized) symmetrizer.
    pub fn symmetrizer(self) -> Vec<(Option<SymmetryOp>, f64)> {
        use SymmetryOp::*;
        let sign = if self.statistics() == Some(1) { -1.0 } else { 1.0 };
        match self {
            SymmetryClass::Bbb | SymmetryClass::Fff => vec![
                (None, 1.0),
                (Some(P12), sign),
                (Some(P23), sign),
                (Some(P31), sign),
                (Some(P12P23), 1.0),
                (Some(P12P31), 1.0),
            ],
            SymmetryClass::Bbx | SymmetryClass::Ffx => vec![(None, 1.0), (Some(P31), sign)],
            SymmetryClass::Distinguishable => vec![(None, 1.0)],
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SymmetryClass::Bbb => "BBB",
            SymmetryClass::Fff => "FFF",
            SymmetryClass::Bbx => "BBX",
            SymmetryClass::Ffx => "FFX",
            SymmetryClass::Distinguishable => "distinguishable",
        };
        f.write_str(s)
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BBB" => Ok(SymmetryClass::Bbb),
            "FFF" => Ok(SymmetryClass::Fff),
            "BBX" => Ok(SymmetryClass::Bbx),
            "FFX" => Ok(SymmetryClass::Ffx),
            "DISTINGUISHABLE" | "XYZ" | "NONE" => Ok(SymmetryClass::Distinguishable),
            _ => Err(Error::Symmetry(format!("unknown symmetry class '{s}'"))),
        }
    }
}

/// Parity, pair permutations, cyclic permutations and the two reflections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryOp {
    Parity,
    P12,
    P23,
    P31,
    P12P23,
    P12P31,
    Rx,
    Ry,
}

impl SymmetryOp {
    pub const ALL: [SymmetryOp; 8] = [
        SymmetryOp::Parity,
        SymmetryOp::P12,
        SymmetryOp::P23,
        SymmetryOp::P31,
        SymmetryOp::P12P23,
        SymmetryOp::P12P31,
        SymmetryOp::Rx,
        SymmetryOp::Ry,
    ];

    /// Image of a point; R is unchanged and the result is reduced into the
    /// standard ranges.
    pub fn map(self, p: &HyperPoint) -> HyperPoint {
        let (t, f, g) = (p.theta, p.phi, p.gamma);
        let (t2, f2, g2) = match self {
            SymmetryOp::Parity => (t, f, g + PI),
            SymmetryOp::P12 => {
                if f <= 4.0 * PI / 3.0 {
                    (PI - t, 4.0 * PI / 3.0 - f, PI + g)
                } else {
                    (PI - t, 10.0 * PI / 3.0 - f, g)
                }
            }
            SymmetryOp::P23 => {
                if f <= 2.0 * PI / 3.0 {
                    (PI - t, 2.0 * PI / 3.0 - f, g)
                } else {
                    (PI - t, 8.0 * PI / 3.0 - f, PI + g)
                }
            }
            SymmetryOp::P31 => (PI - t, TWO_PI - f, g),
            SymmetryOp::P12P23 => {
                if f <= 4.0 * PI / 3.0 {
                    (t, f + 2.0 * PI / 3.0, g + PI)
                } else {
                    (t, f - 4.0 * PI / 3.0, g)
                }
            }
            SymmetryOp::P12P31 => {
                if f <= 2.0 * PI / 3.0 {
                    (t, f + 4.0 * PI / 3.0, g)
                } else {
                    (t, f - 2.0 * PI / 3.0, g + PI)
                }
            }
            SymmetryOp::Rx => (PI - t, f, TWO_PI - g),
            SymmetryOp::Ry => (PI - t, f, PI - g),
        };
        HyperPoint::wrapped(p.r, t2, f2, g2)
    }

    /// Phase and image label: (op Y_h)(p) = phase · Y_out(p).
    pub fn act(self, h: HarmonicLabel) -> (Complex64, HarmonicLabel) {
        apply_symmetry(self, h)
    }
}

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Phase and label produced by a symmetry operator acting on a harmonic.
pub fn apply_symmetry(op: SymmetryOp, h: HarmonicLabel) -> (Complex64, HarmonicLabel) {
    let HarmonicLabel { lambda, omega, m } = h;
    let w = omega as f64;
    let flip = HarmonicLabel {
        lambda,
        omega: -omega,
        m,
    };
    match op {
        SymmetryOp::Parity => (Complex64::new(sign(m), 0.0), h),
        SymmetryOp::P12 => (sign((3 * m + lambda) / 2) * cis(w * 2.0 * PI / 3.0), flip),
        SymmetryOp::P23 => (sign((m + lambda) / 2) * cis(w * PI / 3.0), flip),
        SymmetryOp::P31 => (Complex64::new(sign((3 * m + lambda) / 2), 0.0), flip),
        SymmetryOp::P12P23 => (sign(m) * cis(w * PI / 3.0), h),
        SymmetryOp::P12P31 => (cis(w * 2.0 * PI / 3.0), h),
        SymmetryOp::Rx => (
            Complex64::new(sign((lambda + omega) / 2 + m), 0.0),
            HarmonicLabel { lambda, omega, m: -m },
        ),
        SymmetryOp::Ry => (
            Complex64::new(sign((lambda + omega) / 2), 0.0),
            HarmonicLabel { lambda, omega, m: -m },
        ),
    }
}

fn ln_factorial(n: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 400];
        for k in 1..t.len() {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Wigner small-d function d^{l}_{m,m'}(θ) with doubled arguments
/// `two_l = 2l`, `two_m = 2m`, `two_mp = 2m'`.
pub fn wigner_d(two_l: i32, two_m: i32, two_mp: i32, theta: f64) -> Result<f64> {
    if two_l < 0 || two_m.abs() > two_l || two_mp.abs() > two_l {
        return Err(Error::domain(format!(
            "wigner_d arguments ({two_l},{two_m},{two_mp}) out of range"
        )));
    }
    if (two_l - two_m).rem_euclid(2) != 0 || (two_l - two_mp).rem_euclid(2) != 0 {
        return Err(Error::domain(format!(
            "wigner_d arguments ({two_l},{two_m},{two_mp}) have mismatched parity"
        )));
    }
    if two_l > 390 {
        return Err(Error::domain("wigner_d: two_l too large"));
    }
    Ok(wigner_d_unchecked(two_l, two_m, two_mp, theta))
}

pub(crate) fn wigner_d_unchecked(two_l: i32, two_mp: i32, two_m: i32, theta: f64) -> f64 {
    // The series below is written for d_{m',m}; callers pass (m, m') so that
    // d_{m,m'}(π−θ) = (−1)^{l+m'} d_{−m,m'}(θ).
    let jpm = (two_l + two_m) / 2;
    let jmm = (two_l - two_m) / 2;
    let jpmp = (two_l + two_mp) / 2;
    let jmmp = (two_l - two_mp) / 2;
    let m_minus_mp = (two_m - two_mp) / 2;
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let pref = 0.5 * (ln_factorial(jpm) + ln_factorial(jmm) + ln_factorial(jpmp) + ln_factorial(jmmp));
    let k_min = 0.max(-m_minus_mp);
    let k_max = jpmp.min(jmm);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = ln_factorial(jpmp - k) + ln_factorial(k) + ln_factorial(m_minus_mp + k) + ln_factorial(jmm - k);
        let pc = two_l - 2 * k - m_minus_mp;
        let ps = m_minus_mp + 2 * k;
        sum += sign(m_minus_mp + k) * (pref - den).exp() * c.powi(pc) * s.powi(ps);
    }
    sum
}

/// Value of the harmonic Y^λ_{ωM} at a point.
pub fn harmonic_value(h: HarmonicLabel, p: &HyperPoint) -> Result<Complex64> {
    h.validate()?;
    Ok(harmonic_value_unchecked(h, p.theta, p.phi, p.gamma))
}

pub(crate) fn harmonic_value_unchecked(h: HarmonicLabel, theta: f64, phi: f64, gamma: f64) -> Complex64 {
    let norm = ((h.lambda as f64 + 1.0) / 4.0).sqrt() / PI;
    let d = wigner_d_unchecked(h.lambda, h.omega, h.m, theta);
    // Integer powers of unit phasors keep the phase error independent of
    // the size of ωφ/2 + Mγ.
    norm * d * cis(0.5 * phi).powi(h.omega) * cis(gamma).powi(h.m)
}

/// |Y(op·p) − phase·Y'(p)| for the operator's predicted action.
pub fn verify_operator_pointwise(op: SymmetryOp, h: HarmonicLabel, p: &HyperPoint) -> Result<f64> {
    h.validate()?;
    p.validate()?;
    let image = op.map(p);
    let lhs = harmonic_value_unchecked(h, image.theta, image.phi, image.gamma);
    let (phase, out) = apply_symmetry(op, h);
    let rhs = phase * harmonic_value_unchecked(out, p.theta, p.phi, p.gamma);
    Ok((lhs - rhs).norm())
}

/// A symmetrized, normalized combination of harmonics sharing λ and M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizedHarmonic {
    pub class: SymmetryClass,
    pub base: HarmonicLabel,
    pub terms: Vec<(HarmonicLabel, Complex64)>,
}

impl SymmetrizedHarmonic {
    pub fn value(&self, p: &HyperPoint) -> Complex64 {
        self.terms
            .iter()
            .map(|(h, c)| c * harmonic_value_unchecked(*h, p.theta, p.phi, p.gamma))
            .sum()
    }
}

const NULL_TOLERANCE: f64 = 1e-10;

fn symmetrize_raw(class: SymmetryClass, h: HarmonicLabel) -> Vec<(HarmonicLabel, Complex64)> {
    let mut acc: BTreeMap<HarmonicLabel, Complex64> = BTreeMap::new();
    for (op, w) in class.symmetrizer() {
        let (phase, out) = match op {
            None => (Complex64::new(1.0, 0.0), h),
            Some(op) => apply_symmetry(op, h),
        };
        *acc.entry(out).or_insert(Complex64::new(0.0, 0.0)) += w * phase;
    }
    acc.into_iter().filter(|(_, c)| c.norm() > NULL_TOLERANCE).collect()
}

/// Applies the class symmetrizer to a harmonic and normalizes the result.
///
/// Distinct labels are orthonormal, so the norm is the Euclidean norm of the
/// coefficient vector.
pub fn symmetrized_harmonic(class: SymmetryClass, h: HarmonicLabel) -> Result<SymmetrizedHarmonic> {
    h.validate()?;
    let mut terms = symmetrize_raw(class, h);
    if terms.is_empty() {
        return Err(Error::Symmetry(format!(
            "label {h} vanishes under the {class} symmetrizer"
        )));
    }
    let norm = terms.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
    for (_, c) in terms.iter_mut() {
        *c /= norm;
    }
    Ok(SymmetrizedHarmonic { class, base: h, terms })
}

/// Allowed (λ, sorted |ω| list) for a class and M, up to `lambda_max`.
pub fn enumerate_allowed(class: SymmetryClass, m: i32, lambda_max: i32) -> Vec<(i32, Vec<i32>)> {
    let mut out = Vec::new();
    let mut lambda = m.abs();
    while lambda <= lambda_max {
        let mut omegas: Vec<i32> = Vec::new();
        let mut omega = -lambda;
        while omega <= lambda {
            let h = HarmonicLabel { lambda, omega, m };
            if !symmetrize_raw(class, h).is_empty() && !omegas.contains(&omega.abs()) {
                omegas.push(omega.abs());
            }
            omega += 2;
        }
        omegas.sort_unstable();
        if !omegas.is_empty() {
            out.push((lambda, omegas));
        }
        lambda += 2;
    }
    out
}

/// Reflection index of a free state: which of the two real sectors a given
/// (λ, ω) contributes to when M = 0. For M ≠ 0 both sectors receive a copy.
pub fn reflection_index(lambda: i32, omega: i32) -> u8 {
    ((lambda + omega) / 2).rem_euclid(2) as u8
}

/// Non-interacting spectrum of one (class, |M|, r) sector: (λ, multiplicity)
/// for λ ≤ `lambda_max`, multiplicity > 0 only.
pub fn free_spectrum(class: SymmetryClass, m: i32, r: u8, lambda_max: i32) -> Vec<(i32, usize)> {
    let m = m.abs();
    enumerate_allowed(class, m, lambda_max)
        .into_iter()
        .filter_map(|(lambda, omegas)| {
            let mut count = 0;
            for w in omegas {
                // Without identical particles ±ω are independent states.
                let copies = if class == SymmetryClass::Distinguishable && w != 0 {
                    2
                } else {
                    1
                };
                if m != 0 || reflection_index(lambda, w) == r {
                    count += copies;
                }
            }
            (count > 0).then_some((lambda, count))
        })
        .collect()
}

/// Lowest λ in a sector.
pub fn lambda_min(class: SymmetryClass, m: i32, r: u8) -> Option<i32> {
    free_spectrum(class, m, r, m.abs() + 40).first().map(|(l, _)| *l)
}
