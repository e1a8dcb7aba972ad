//! Planar two-body bound states of the pair potential v(r) = D sech²(r/r0).
//!
//! The radial equation for χ(r), with Ψ = χ(r) e^{i m φ}, is written in
//! x = ln(r/r0):
//!
//! ```text
//! −χ_xx + m² χ + 2μ r² v(r) χ = 2μ E r² χ,   r = r0 eˣ
//! ```
//!
//! which is discretised with second-order central differences on a uniform
//! x grid (dense near the origin in r), reduced to a symmetric tridiagonal
//! problem and solved by Sturm bisection. Three grid spacings are combined
//! by Richardson extrapolation.

use serde::{Deserialize, Serialize};

use crate::harmonics::SymmetryClass;
use crate::linalg::{sturm_count, tridiagonal_eigenvalue, tridiagonal_eigenvector};
use crate::{Error, Result};

/// v(r) = depth · sech²(r / range).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPotential {
    pub depth: f64,
    pub range: f64,
}

impl PairPotential {
    pub fn new(depth: f64, range: f64) -> Result<Self> {
        if !(range > 0.0) || !depth.is_finite() {
            return Err(Error::domain(format!("invalid pair potential D={depth}, r0={range}")));
        }
        Ok(Self { depth, range })
    }

    pub fn value(&self, r: f64) -> f64 {
        pair_potential_value(self, r)
    }
}

pub fn pair_potential_value(pp: &PairPotential, r: f64) -> f64 {
    let x = r / pp.range;
    if x > 350.0 {
        return 0.0;
    }
    let c = x.cosh();
    pp.depth / (c * c)
}

/// One bound level E_{v, m2b}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub v: usize,
    pub m2b: i32,
    pub energy: f64,
}

/// Radial grid used by [`bound_states_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    /// Coarsest spacing in ln r; two halvings are added for extrapolation.
    pub h: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            r_min: 1e-6,
            r_max: 30.0,
            h: 4e-3,
        }
    }
}

struct Discretisation {
    d: Vec<f64>,
    e: Vec<f64>,
    /// Diagonal of the metric B (for mapping eigenvectors back).
    b: Vec<f64>,
}

fn discretise(pp: &PairPotential, m2b: i32, mu2: f64, grid: &RadialGrid, h: f64) -> Discretisation {
    let x0 = (grid.r_min / pp.range).ln();
    let x1 = (grid.r_max / pp.range).ln();
    let n_int = ((x1 - x0) / h).round() as usize;
    let h = (x1 - x0) / n_int as f64;
    let m2 = (m2b * m2b) as f64;
    let neumann = m2b == 0;
    // Unknowns: i = 0..n_int-1 on x0 + i h (node 0 present only for Neumann).
    let first = if neumann { 0 } else { 1 };
    let n = n_int - first;
    let inv_h2 = 1.0 / (h * h);
    let mut a_diag = vec![0.0; n];
    let mut a_off = vec![0.0; n.saturating_sub(1)];
    let mut b = vec![0.0; n];
    for k in 0..n {
        let i = k + first;
        let x = x0 + i as f64 * h;
        let r2 = (2.0 * x).exp() * pp.range * pp.range;
        let r = r2.sqrt();
        // Half cell at a Neumann end keeps the matrix symmetric.
        let weight = if neumann && i == 0 { 0.5 } else { 1.0 };
        a_diag[k] = weight * (2.0 * inv_h2 + m2 + 2.0 * mu2 * r2 * pair_potential_value(pp, r));
        b[k] = weight * 2.0 * mu2 * r2;
        if k + 1 < n {
            a_off[k] = -inv_h2;
        }
    }
    let d: Vec<f64> = a_diag.iter().zip(&b).map(|(a, bb)| a / bb).collect();
    let e: Vec<f64> = (0..a_off.len()).map(|k| a_off[k] / (b[k] * b[k + 1]).sqrt()).collect();
    Discretisation { d, e, b }
}

fn energies_at(pp: &PairPotential, m2b: i32, mu2: f64, grid: &RadialGrid, h: f64) -> Vec<f64> {
    let disc = discretise(pp, m2b, mu2, grid, h);
    let count = sturm_count(&disc.d, &disc.e, 0.0);
    (0..count)
        .map(|k| tridiagonal_eigenvalue(&disc.d, &disc.e, k))
        .collect()
}

/// All bound levels of a pair with reduced mass `pair_reduced_mass`.
pub fn bound_states(pp: &PairPotential, m2b: i32, pair_reduced_mass: f64) -> Result<Vec<BoundState>> {
    bound_states_with(pp, m2b, pair_reduced_mass, &RadialGrid::default())
}

pub fn bound_states_with(
    pp: &PairPotential,
    m2b: i32,
    pair_reduced_mass: f64,
    grid: &RadialGrid,
) -> Result<Vec<BoundState>> {
    if !(pair_reduced_mass > 0.0) {
        return Err(Error::domain("pair reduced mass must be positive"));
    }
    if pp.depth >= 0.0 {
        return Ok(Vec::new());
    }
    let e1 = energies_at(pp, m2b, pair_reduced_mass, grid, grid.h);
    let e2 = energies_at(pp, m2b, pair_reduced_mass, grid, grid.h / 2.0);
    let e4 = energies_at(pp, m2b, pair_reduced_mass, grid, grid.h / 4.0);
    // A level at the edge of binding may appear only on finer grids; such a
    // level is reported from the finest grid alone if it stays bound.
    let mut out = Vec::with_capacity(e4.len());
    for v in 0..e4.len() {
        let energy = if v < e1.len() && v < e2.len() {
            let r1 = (4.0 * e2[v] - e1[v]) / 3.0;
            let r2 = (4.0 * e4[v] - e2[v]) / 3.0;
            (16.0 * r2 - r1) / 15.0
        } else {
            e4[v]
        };
        if energy < 0.0 {
            out.push(BoundState { v, m2b, energy });
        }
    }
    Ok(out)
}

/// Reduced radial function √r χ on the finest grid for level `v`, as (r, u).
pub fn radial_function(pp: &PairPotential, m2b: i32, pair_reduced_mass: f64, v: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = RadialGrid::default();
    let h = grid.h / 4.0;
    let disc = discretise(pp, m2b, pair_reduced_mass, &grid, h);
    let count = sturm_count(&disc.d, &disc.e, 0.0);
    if v >= count {
        return Err(Error::domain(format!("no bound level v={v} for m2b={m2b}")));
    }
    let lam = tridiagonal_eigenvalue(&disc.d, &disc.e, v);
    let y = tridiagonal_eigenvector(&disc.d, &disc.e, lam);
    let x0 = (grid.r_min / pp.range).ln();
    let x1 = (grid.r_max / pp.range).ln();
    let n_int = ((x1 - x0) / h).round() as usize;
    let hh = (x1 - x0) / n_int as f64;
    let first = if m2b == 0 { 0 } else { 1 };
    let mut r = Vec::with_capacity(y.len());
    let mut u = Vec::with_capacity(y.len());
    for (k, yk) in y.iter().enumerate() {
        let rr = pp.range * (x0 + (k + first) as f64 * hh).exp();
        let chi = yk / disc.b[k].sqrt();
        r.push(rr);
        u.push(rr.sqrt() * chi);
    }
    // Fix the overall sign: positive near the origin.
    if let Some(first_big) = u.iter().find(|x| x.abs() > 1e-8) {
        if *first_big < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok((r, u))
}

/// Number of sign changes of a sampled function, ignoring negligible values.
pub fn count_nodes(u: &[f64]) -> usize {
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &x in u {
        if x.abs() < 1e-6 * scale {
            continue;
        }
        if last != 0.0 && x.signum() != f64::signum(last) {
            nodes += 1;
        }
        last = x;
    }
    nodes
}

/// Which pair a diatom is made of, relative to the identical particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiatomPair {
    /// Two identical particles (BB or FF).
    Identical,
    /// An identical particle with the third one (BX or FX), or any pair of
    /// distinguishable particles.
    Mixed,
}

/// Whether a diatom with angular momentum `m2b` is permitted by exchange
/// symmetry of its constituents.
pub fn allowed_m2b(class: SymmetryClass, pair: DiatomPair, m2b: i32) -> bool {
    let even = m2b.rem_euclid(2) == 0;
    match (class, pair) {
        (SymmetryClass::Bbb, _) | (SymmetryClass::Bbx, DiatomPair::Identical) => even,
        (SymmetryClass::Fff, _) | (SymmetryClass::Ffx, DiatomPair::Identical) => !even,
        _ => true,
    }
}

/// Pair types that exist in a class.
pub fn diatom_pairs(class: SymmetryClass) -> &'static [DiatomPair] {
    match class {
        SymmetryClass::Bbb | SymmetryClass::Fff => &[DiatomPair::Identical],
        SymmetryClass::Bbx | SymmetryClass::Ffx => &[DiatomPair::Identical, DiatomPair::Mixed],
        SymmetryClass::Distinguishable => &[DiatomPair::Mixed],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        let pp = PairPotential::new(-30.0, 1.0).unwrap();
        assert_eq!(pp.value(0.0), -30.0);
        assert!(pp.value(1e3).abs() < 1e-300);
        let s = 1.0 / 1f64.cosh();
        assert!((pp.value(1.0) + 30.0 * s * s).abs() < 1e-13);
        assert!((pp.value(1.0) + 12.59924).abs() < 1e-4);
    }

    #[test]
    fn no_binding_without_attraction() {
        let pp = PairPotential::new(0.0, 1.0).unwrap();
        for m in 0..4 {
            assert!(bound_states(&pp, m, 0.5).unwrap().is_empty());
        }
    }

    #[test]
    fn parity_rules() {
        assert!(!allowed_m2b(SymmetryClass::Bbb, DiatomPair::Identical, 1));
        assert!(allowed_m2b(SymmetryClass::Fff, DiatomPair::Identical, 1));
        assert!(allowed_m2b(SymmetryClass::Ffx, DiatomPair::Mixed, 0));
        assert!(!allowed_m2b(SymmetryClass::Ffx, DiatomPair::Identical, 0));
    }
}
