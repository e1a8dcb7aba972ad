//! Reference data shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use hyper2d::harmonics::{enumerate_allowed, harmonic_value, HarmonicLabel, SymmetryClass};
use hyper2d::HyperPoint;
use num_complex::Complex64;

/// One row of the reference threshold-law summary table.
pub struct TableRow {
    pub class: SymmetryClass,
    pub m: i32,
    pub r: u8,
    /// (|m2b|, |m_AD|, reference K_AD exponent, dominant)
    pub atom_diatom: &'static [(i32, i32, i32, bool)],
    pub lambda_min: i32,
    pub k3: i32,
    pub d3: i32,
    pub k3_underlined: bool,
}

const fn row(
    class: SymmetryClass,
    m: i32,
    r: u8,
    atom_diatom: &'static [(i32, i32, i32, bool)],
    lambda_min: i32,
    k3: i32,
    d3: i32,
    k3_underlined: bool,
) -> TableRow {
    TableRow {
        class,
        m,
        r,
        atom_diatom,
        lambda_min,
        k3,
        d3,
        k3_underlined,
    }
}

use SymmetryClass::{Bbb, Bbx, Fff, Ffx};

pub const THRESHOLD_TABLE: [TableRow; 16] = [
    row(Bbb, 0, 0, &[(0, 0, 0, true), (2, 2, 4, false)], 0, 0, 2, true),
    row(Bbb, 0, 1, &[(2, 2, 4, false), (4, 4, 8, false)], 8, 16, 18, false),
    row(Bbb, 1, 0, &[(0, 1, 2, false), (2, 1, 2, false)], 3, 6, 8, false),
    row(Bbb, 2, 0, &[(0, 2, 4, false), (2, 0, 0, true)], 2, 4, 6, false),
    row(
        Bbx,
        0,
        0,
        &[(0, 0, 0, true), (1, 1, 2, false), (2, 2, 4, false)],
        0,
        0,
        2,
        true,
    ),
    row(
        Bbx,
        0,
        1,
        &[(1, 1, 2, false), (2, 2, 4, false), (3, 3, 8, false)],
        4,
        8,
        10,
        false,
    ),
    row(
        Bbx,
        1,
        0,
        &[(0, 1, 2, false), (1, 0, 0, true), (2, 1, 2, false)],
        1,
        2,
        4,
        false,
    ),
    row(
        Bbx,
        2,
        0,
        &[(0, 2, 4, false), (1, 1, 2, false), (2, 0, 0, true)],
        2,
        4,
        6,
        false,
    ),
    row(Fff, 0, 0, &[(1, 1, 2, false), (3, 3, 6, false)], 6, 12, 14, false),
    row(Fff, 0, 1, &[(1, 1, 2, false), (3, 3, 6, false)], 2, 4, 6, true),
    row(Fff, 1, 0, &[(1, 0, 0, true), (3, 2, 4, false)], 3, 6, 8, false),
    row(Fff, 2, 0, &[(1, 1, 2, false), (3, 1, 2, false)], 4, 8, 10, false),
    row(
        Ffx,
        0,
        0,
        &[(0, 0, 0, true), (1, 1, 2, false), (2, 2, 4, false)],
        2,
        4,
        6,
        false,
    ),
    row(
        Ffx,
        0,
        1,
        &[(1, 1, 2, false), (2, 2, 4, false), (3, 3, 8, false)],
        2,
        4,
        6,
        false,
    ),
    row(
        Ffx,
        1,
        0,
        &[(0, 1, 2, false), (1, 0, 0, true), (2, 1, 2, false)],
        1,
        2,
        4,
        true,
    ),
    row(
        Ffx,
        2,
        0,
        &[(0, 2, 4, false), (1, 1, 2, false), (2, 0, 0, true)],
        2,
        4,
        6,
        false,
    ),
];

/// Reference K_AD cells whose exponent disagrees with the |m_AD| listed in
/// the same cell (exponent 8 next to |m_AD| = 3): (class, M, r, entry).
pub const INCONSISTENT_CELLS: [(SymmetryClass, i32, u8, usize); 2] = [(Bbx, 0, 1, 2), (Ffx, 0, 1, 2)];

/// Two-body levels at D = −30, pair reduced mass 1/2, from the Numerov oracle
/// in tests/twobody.rs: (m2b, v, energy).
pub const TWO_BODY_LEVELS: [(i32, usize, f64); 7] = [
    (0, 0, -20.329638580135),
    (0, 1, -6.317658543725),
    (0, 2, -0.284524111345),
    (1, 0, -12.025204050464),
    (1, 1, -2.080512422640),
    (2, 0, -5.223591240322),
    (3, 0, -0.247185960672),
];

/// Compares one computed row against the reference table. Returns a list of
/// mismatches (empty on success).
pub fn compare_row(expected: &TableRow, got: &hyper2d::threshold::ThresholdReport) -> Vec<String> {
    let mut out = Vec::new();
    let tag = format!("{} M={} r={}", expected.class, expected.m, expected.r);
    if got.atom_diatom.len() != expected.atom_diatom.len() {
        out.push(format!(
            "{tag}: {} atom-diatom entries, expected {}",
            got.atom_diatom.len(),
            expected.atom_diatom.len()
        ));
        return out;
    }
    for (i, (e, g)) in expected.atom_diatom.iter().zip(&got.atom_diatom).enumerate() {
        let inconsistent = INCONSISTENT_CELLS
            .iter()
            .any(|&(c, m, r, k)| c == expected.class && m == expected.m && r == expected.r && k == i);
        let exp_exponent = if inconsistent { 2 * e.1 } else { e.2 };
        if (g.m2b, g.m_ad, g.exponent, g.dominant) != (e.0, e.1, exp_exponent, e.3) {
            out.push(format!("{tag} entry {i}: got {g:?}, expected {e:?}"));
        }
    }
    if (got.lambda_min, got.k3_exponent, got.d3_exponent) != (expected.lambda_min, expected.k3, expected.d3) {
        out.push(format!(
            "{tag}: λ_min/K3/D3 = {}/{}/{}, expected {}/{}/{}",
            got.lambda_min, got.k3_exponent, got.d3_exponent, expected.lambda_min, expected.k3, expected.d3
        ));
    }
    if got.k3_dominant != expected.k3_underlined || got.d3_dominant != expected.k3_underlined {
        out.push(format!(
            "{tag}: dominant flag {} expected {}",
            got.k3_dominant, expected.k3_underlined
        ));
    }
    out
}

pub type Column = &'static [(i32, &'static [i32])];

/// Reference tables of allowed (λ, |ω|), M = 0..3, four rows each.
pub const TABLES: [(SymmetryClass, [Column; 4]); 4] = [
    (
        SymmetryClass::Bbb,
        [
            &[(0, &[0]), (4, &[0]), (6, &[6]), (8, &[0, 6])],
            &[(3, &[3]), (5, &[3]), (7, &[3]), (9, &[3, 9])],
            &[(2, &[0]), (6, &[0, 6]), (8, &[6]), (10, &[0, 6])],
            &[(3, &[3]), (5, &[3]), (7, &[3]), (9, &[3, 9])],
        ],
    ),
    (
        SymmetryClass::Fff,
        [
            &[(2, &[0]), (6, &[0, 6]), (8, &[6]), (10, &[0, 6])],
            &[(3, &[3]), (5, &[3]), (7, &[3]), (9, &[3, 9])],
            &[(4, &[0]), (6, &[6]), (8, &[0, 6]), (10, &[6])],
            &[(3, &[3]), (5, &[3]), (7, &[3]), (9, &[3, 9])],
        ],
    ),
    (
        SymmetryClass::Bbx,
        [
            &[(0, &[0]), (2, &[2]), (4, &[0, 2, 4]), (6, &[2, 4, 6])],
            &[(1, &[1]), (3, &[1, 3]), (5, &[1, 3, 5]), (7, &[1, 3, 5, 7])],
            &[(2, &[0, 2]), (4, &[2, 4]), (6, &[0, 2, 4, 6]), (8, &[2, 4, 6, 8])],
            &[(3, &[1, 3]), (5, &[1, 3, 5]), (7, &[1, 3, 5, 7]), (9, &[1, 3, 5, 7, 9])],
        ],
    ),
    (
        SymmetryClass::Ffx,
        [
            &[(2, &[0, 2]), (4, &[2, 4]), (6, &[0, 2, 4, 6]), (8, &[2, 4, 6, 8])],
            &[(1, &[1]), (3, &[1, 3]), (5, &[1, 3, 5]), (7, &[1, 3, 5, 7])],
            &[(2, &[2]), (4, &[0, 2, 4]), (6, &[2, 4, 6]), (8, &[0, 2, 4, 6, 8])],
            &[(3, &[1, 3]), (5, &[1, 3, 5]), (7, &[1, 3, 5, 7]), (9, &[1, 3, 5, 7, 9])],
        ],
    ),
];

// 8th-order central stencils.
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const H: f64 = 1e-3;

fn d1(f: impl Fn(f64) -> Complex64, x: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (k, c) in D1.iter().enumerate() {
        let j = (k + 1) as f64;
        s += c * (f(x + j * H) - f(x - j * H));
    }
    s / H
}

fn d2(f: impl Fn(f64) -> Complex64, x: f64) -> Complex64 {
    let mut s = D2[0] * f(x);
    for (k, c) in D2.iter().enumerate().skip(1) {
        let j = k as f64;
        s += c * (f(x + j * H) + f(x - j * H));
    }
    s / (H * H)
}

pub fn lambda_squared(h: HarmonicLabel, t: f64, f: f64, g: f64) -> Complex64 {
    let y = |t: f64, f: f64, g: f64| harmonic_value(h, &HyperPoint::wrapped(1.0, t, f, g)).unwrap();
    let (s, c) = t.sin_cos();
    let ytt = d2(|x| y(x, f, g), t);
    let yt = d1(|x| y(x, f, g), t);
    let yff = d2(|x| y(t, x, g), f);
    let ygg = d2(|x| y(t, f, x), g);
    let ygf = d1(|x| d1(|z| y(t, z, x), f), g);
    -4.0 * (ytt + c / s * yt + yff / (s * s)) - (ygg - 4.0 * c * ygf) / (s * s)
}

/// Largest |Λ²Y − λ(λ+2)Y| over every allowed label with λ ≤ `lambda_max`
/// (all classes, both signs of ω) on a fixed grid with |sin θ| ≥ 0.05.
/// Returns the number of labels checked and the residual.
pub fn fd_eigen_residual(lambda_max: i32) -> (usize, f64) {
    // Midpoint grid, θ_i = π(i + 1/2)/12.
    let thetas: Vec<f64> = (0..12).map(|i| PI * (i as f64 + 0.5) / 12.0).collect();
    let phis = [0.3, 2.0, 5.1, 9.0];
    let gammas = [0.5, 2.7];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for class in SymmetryClass::ALL {
        for m in -lambda_max..=lambda_max {
            for (lambda, omegas) in enumerate_allowed(class, m, lambda_max) {
                for w in omegas {
                    for omega in [w, -w] {
                        let h = HarmonicLabel::new(lambda, omega, m).unwrap();
                        count += 1;
                        let ev = (lambda * (lambda + 2)) as f64;
                        for &t in &thetas {
                            if t.sin().abs() < 0.05 {
                                continue;
                            }
                            for &f in &phis {
                                for &g in &gammas {
                                    let y = harmonic_value(h, &HyperPoint::wrapped(1.0, t, f, g)).unwrap();
                                    worst = worst.max((lambda_squared(h, t, f, g) - ev * y).norm());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (count, worst)
}
