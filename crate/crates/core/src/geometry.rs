//! Mass-scaled Jacobi vectors and the planar democratic hyperspherical
//! coordinates (R, θ, φ, γ).
//!
//! Two distance conventions coexist and both are exposed:
//!
//! * [`interparticle_distances`] uses the closed form
//!   `r_ij = 2^{-1/2} d_ij R [1 + sinθ cos(φ + φ_ij)]^{1/2}` with the
//!   mass-dependent angles stored in [`MassGeometry`] (`φ23 = 0`). The
//!   hyperangular solver builds its pair potential from this form.
//! * [`hyper_to_lab`] / [`lab_to_hyper`] invert the Jacobi construction
//!   directly. For equal masses the distances obtained that way are the
//!   closed-form ones under the cyclic relabelling 1→2→3→1.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// Inversion treats the hyperangular poles θ = 0, π as exact below this |sin θ|.
pub const POLE_TOLERANCE: f64 = 1e-13;

/// Particle masses and every mass constant derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassGeometry {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// Three-body reduced mass, μ² = m1 m2 m3 / (m1 + m2 + m3).
    pub mu: f64,
    pub d12: f64,
    pub d23: f64,
    pub d31: f64,
    pub phi12: f64,
    pub phi23: f64,
    pub phi31: f64,
}

/// Identifies one of the three particle pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    P12,
    P23,
    P31,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::P12, Pair::P23, Pair::P31];
}

impl MassGeometry {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        for (name, m) in [("m1", m1), ("m2", m2), ("m3", m3)] {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::domain(format!("mass {name} must be positive, got {m}")));
            }
        }
        let total = m1 + m2 + m3;
        let mu = (m1 * m2 * m3 / total).sqrt();
        let d = |mi: f64, mj: f64, mk: f64| (mk * (mi + mj) / (total * mu)).sqrt();
        Ok(Self {
            m1,
            m2,
            m3,
            mu,
            d12: d(m1, m2, m3),
            d23: d(m2, m3, m1),
            d31: d(m3, m1, m2),
            phi12: 2.0 * (m3 / mu).atan(),
            phi23: 0.0,
            phi31: -2.0 * (m2 / mu).atan(),
        })
    }

    /// Three particles of unit mass.
    pub fn equal() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("unit masses are valid")
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2 + self.m3
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.m1, self.m2, self.m3]
    }

    pub fn scaling(&self, pair: Pair) -> f64 {
        match pair {
            Pair::P12 => self.d12,
            Pair::P23 => self.d23,
            Pair::P31 => self.d31,
        }
    }

    pub fn angle(&self, pair: Pair) -> f64 {
        match pair {
            Pair::P12 => self.phi12,
            Pair::P23 => self.phi23,
            Pair::P31 => self.phi31,
        }
    }

    /// Two-body reduced mass of `pair`.
    pub fn pair_reduced_mass(&self, pair: Pair) -> f64 {
        let (a, b) = match pair {
            Pair::P12 => (self.m1, self.m2),
            Pair::P23 => (self.m2, self.m3),
            Pair::P31 => (self.m3, self.m1),
        };
        a * b / (a + b)
    }

    /// Value of φ at which `pair` coalesces on the θ = π/2 line, in [0, 2π).
    pub fn coalescence_angle(&self, pair: Pair) -> f64 {
        (PI - self.angle(pair)).rem_euclid(TWO_PI)
    }
}

/// A point in hyperspherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl HyperPoint {
    pub fn new(r: f64, theta: f64, phi: f64, gamma: f64) -> Result<Self> {
        let p = Self { r, theta, phi, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Builds a point, reducing φ into [0, 4π) and γ into [0, 2π).
    pub fn wrapped(r: f64, theta: f64, phi: f64, gamma: f64) -> Self {
        Self {
            r,
            theta,
            phi: phi.rem_euclid(FOUR_PI),
            gamma: gamma.rem_euclid(TWO_PI),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0) {
            return Err(Error::domain(format!("hyperradius must be >= 0, got {}", self.r)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::domain(format!("theta {} outside [0, pi]", self.theta)));
        }
        if !(0.0..FOUR_PI).contains(&self.phi) {
            return Err(Error::domain(format!("phi {} outside [0, 4pi)", self.phi)));
        }
        if !(0.0..TWO_PI).contains(&self.gamma) {
            return Err(Error::domain(format!("gamma {} outside [0, 2pi)", self.gamma)));
        }
        Ok(())
    }
}

/// Mass-scaled Jacobi vectors (ρ1, ρ2) in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiPair {
    pub rho1: [f64; 2],
    pub rho2: [f64; 2],
}

impl JacobiPair {
    pub fn hyperradius(&self) -> f64 {
        (norm2(self.rho1) + norm2(self.rho2)).sqrt()
    }

    fn rotated(&self, gamma: f64) -> Self {
        let (s, c) = gamma.sin_cos();
        let rot = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
        Self {
            rho1: rot(self.rho1),
            rho2: rot(self.rho2),
        }
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Pair distances (r12, r23, r31) from the closed hyperangular form.
pub fn interparticle_distances(p: &HyperPoint, g: &MassGeometry) -> [f64; 3] {
    let st = p.theta.sin();
    let r = |pair: Pair| {
        let bracket = (1.0 + st * (p.phi + g.angle(pair)).cos()).max(0.0);
        std::f64::consts::FRAC_1_SQRT_2 * g.scaling(pair) * p.r * bracket.sqrt()
    };
    [r(Pair::P12), r(Pair::P23), r(Pair::P31)]
}

/// Distances (r12, r23, r31) between three lab-frame positions.
pub fn lab_distances(positions: &[[f64; 2]; 3]) -> [f64; 3] {
    [
        dist(positions[0], positions[1]),
        dist(positions[1], positions[2]),
        dist(positions[2], positions[0]),
    ]
}

/// Lab-frame mass-scaled Jacobi vectors of three particles.
pub fn lab_jacobi(positions: &[[f64; 2]; 3], g: &MassGeometry) -> JacobiPair {
    let [r1, r2, r3] = *positions;
    let m12 = g.m1 + g.m2;
    let cm12 = [(g.m1 * r1[0] + g.m2 * r2[0]) / m12, (g.m1 * r1[1] + g.m2 * r2[1]) / m12];
    JacobiPair {
        rho1: [(r2[0] - r1[0]) / g.d12, (r2[1] - r1[1]) / g.d12],
        rho2: [g.d12 * (r3[0] - cm12[0]), g.d12 * (r3[1] - cm12[1])],
    }
}

/// Body-frame Jacobi vectors at hyperangles (θ, φ) and hyperradius R.
pub fn body_jacobi(p: &HyperPoint) -> JacobiPair {
    let tp = p.theta / 2.0 - FRAC_PI_4;
    let fp = p.phi / 2.0 + PI / 6.0;
    let (st, ct) = tp.sin_cos();
    let (sf, cf) = fp.sin_cos();
    JacobiPair {
        rho1: [p.r * ct * sf, p.r * st * cf],
        rho2: [p.r * ct * cf, -p.r * st * sf],
    }
}

/// Lab-frame Jacobi vectors: the body-frame pair rotated by γ.
pub fn hyper_to_jacobi(p: &HyperPoint) -> JacobiPair {
    body_jacobi(p).rotated(p.gamma)
}

/// Particle positions with the centre of mass at the origin.
pub fn hyper_to_lab(p: &HyperPoint, g: &MassGeometry) -> [[f64; 2]; 3] {
    let jac = hyper_to_jacobi(p);
    let m12 = g.m1 + g.m2;
    let total = g.total_mass();
    let r21 = [g.d12 * jac.rho1[0], g.d12 * jac.rho1[1]];
    let r3c = [jac.rho2[0] / g.d12, jac.rho2[1] / g.d12];
    // Positions relative to the 12 centre of mass, then shifted to the total one.
    let r1 = [-g.m2 / m12 * r21[0], -g.m2 / m12 * r21[1]];
    let r2 = [g.m1 / m12 * r21[0], g.m1 / m12 * r21[1]];
    let shift = [g.m3 * r3c[0] / total, g.m3 * r3c[1] / total];
    [
        [r1[0] - shift[0], r1[1] - shift[1]],
        [r2[0] - shift[0], r2[1] - shift[1]],
        [r3c[0] - shift[0], r3c[1] - shift[1]],
    ]
}

/// Inverts the Jacobi construction. The two-fold (φ, γ) ↔ (φ + 2π, γ + π)
/// ambiguity is resolved by returning γ ∈ [0, π).
pub fn lab_to_hyper(positions: &[[f64; 2]; 3], g: &MassGeometry) -> Result<HyperPoint> {
    let jac = lab_jacobi(positions, g);
    let r = jac.hyperradius();
    let scale = positions
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if r <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) || r == 0.0 {
        return Err(Error::Degenerate("all particles coincide (R = 0)".into()));
    }
    // Columns (ρ2, ρ1) as in the body-frame transformation.
    let (p, q) = (jac.rho2[0], jac.rho1[0]);
    let (rr, t) = (jac.rho2[1], jac.rho1[1]);
    // L = Rot(γ) diag(a, b) Rot(ψ) with ψ = -φ'.
    let e = 0.5 * (p + t);
    let h = 0.5 * (rr - q);
    let f = 0.5 * (p - t);
    let gg = 0.5 * (q + rr);
    let qsum = e.hypot(h);
    let qdiff = f.hypot(gg);
    let a = qsum + qdiff;
    let b = qsum - qdiff;
    let theta_p = b.atan2(a);
    let theta = (2.0 * theta_p + PI / 2.0).clamp(0.0, PI);

    let pole = theta.sin().abs() < POLE_TOLERANCE;
    let sum_angle = if qsum > POLE_TOLERANCE * r { h.atan2(e) } else { 0.0 };
    let diff_angle = if qdiff > POLE_TOLERANCE * r { gg.atan2(f) } else { 0.0 };
    let (mut gamma, mut psi) = if pole && qsum <= POLE_TOLERANCE * r {
        // θ = 0: only γ - ψ is defined.
        (diff_angle, 0.0)
    } else if pole {
        // θ = π: only γ + ψ is defined.
        (sum_angle, 0.0)
    } else {
        (0.5 * (sum_angle + diff_angle), 0.5 * (sum_angle - diff_angle))
    };
    gamma = gamma.rem_euclid(TWO_PI);
    if gamma >= PI {
        gamma -= PI;
        psi += PI;
    }
    let phi_p = -psi;
    let phi = (2.0 * (phi_p - PI / 6.0)).rem_euclid(FOUR_PI);
    let phi = if phi >= FOUR_PI { 0.0 } else { phi };
    let gamma = if gamma >= PI { 0.0 } else { gamma };
    Ok(HyperPoint { r, theta, phi, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn equal_mass_constants() {
        let g = MassGeometry::equal();
        assert!((g.mu - 1.0 / 3f64.sqrt()).abs() < TOL);
        assert_eq!(g.phi23, 0.0);
        assert!((g.d12 * g.d12 - 2.0 / 3f64.sqrt()).abs() < TOL);
        assert!((g.phi12 - 2.0 * PI / 3.0).abs() < TOL);
        assert!((g.phi31 + 2.0 * PI / 3.0).abs() < TOL);
        for pair in Pair::ALL {
            assert!((g.mu * g.scaling(pair).powi(2) - 2.0 / 3.0).abs() < TOL);
        }
    }

    #[test]
    fn unequal_mass_constants() {
        let g = MassGeometry::new(1.0, 1.0, 2.0).unwrap();
        assert!((g.mu - 0.5f64.sqrt()).abs() < TOL);
        let total = 4.0;
        assert!((g.mu * g.d12 * g.d12 - 2.0 * 2.0 / total).abs() < TOL);
        assert!((g.mu * g.d23 * g.d23 - 1.0 * 3.0 / total).abs() < TOL);
        assert!((g.mu * g.d31 * g.d31 - 1.0 * 3.0 / total).abs() < TOL);
    }

    #[test]
    fn non_positive_mass_rejected() {
        assert!(matches!(MassGeometry::new(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(MassGeometry::new(1.0, -2.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn distances_special_points() {
        let g = MassGeometry::equal();
        let p = HyperPoint::new(1.3, 0.0, 2.1, 0.4).unwrap();
        let [a, b, c] = interparticle_distances(&p, &g);
        assert!((a - b).abs() < TOL && (b - c).abs() < TOL);

        let p = HyperPoint::new(1.0, PI / 2.0, PI, 0.0).unwrap();
        assert!(interparticle_distances(&p, &g)[1].abs() < 1e-7);

        let p1 = HyperPoint::new(1.0, 0.7, 1.9, 0.2).unwrap();
        let p2 = HyperPoint { r: 2.0, ..p1 };
        let d1 = interparticle_distances(&p1, &g);
        let d2 = interparticle_distances(&p2, &g);
        for k in 0..3 {
            assert!((d2[k] - 2.0 * d1[k]).abs() < TOL);
        }
    }

    #[test]
    fn coalescence_lines() {
        for g in [MassGeometry::equal(), MassGeometry::new(1.0, 3.0, 7.0).unwrap()] {
            for (k, pair) in Pair::ALL.iter().enumerate() {
                let p = HyperPoint::new(2.0, PI / 2.0, g.coalescence_angle(*pair), 0.0).unwrap();
                assert!(interparticle_distances(&p, &g)[k] < 1e-7);
            }
        }
    }

    #[test]
    fn equilateral_is_theta_zero() {
        let g = MassGeometry::equal();
        let s = 3f64.sqrt();
        let pos = [[0.0, 0.0], [1.0, 0.0], [0.5, s / 2.0]];
        let p = lab_to_hyper(&pos, &g).unwrap();
        assert!(p.theta.abs() < 1e-7, "theta = {}", p.theta);
    }

    #[test]
    fn collinear_is_theta_half_pi() {
        // Independent check: a moment of inertia about a body axis vanishes.
        let g = MassGeometry::new(1.0, 2.0, 3.0).unwrap();
        let pos = [[-1.0, -0.5], [0.4, 0.2], [2.0, 1.0]];
        let jac = lab_jacobi(&pos, &g);
        let cross = jac.rho1[0] * jac.rho2[1] - jac.rho1[1] * jac.rho2[0];
        assert!(cross.abs() < 1e-14);
        let p = lab_to_hyper(&pos, &g).unwrap();
        assert!((p.theta - PI / 2.0).abs() < 1e-12);
        let ixx = p.r.powi(2) * (p.theta / 2.0 - FRAC_PI_4).sin().powi(2);
        assert!(ixx < 1e-20);
    }

    #[test]
    fn coincident_particles_rejected() {
        let g = MassGeometry::equal();
        let pos = [[1.0, 2.0]; 3];
        assert!(matches!(lab_to_hyper(&pos, &g), Err(Error::Degenerate(_))));
    }

    #[test]
    fn lab_distances_are_relabelled_closed_form() {
        // Equal masses: lab pair (31, 12, 23) sits where the closed form puts (23, 31, 12).
        let g = MassGeometry::equal();
        let p = HyperPoint::new(1.7, 1.1, 2.6, 0.9).unwrap();
        let lab = lab_distances(&hyper_to_lab(&p, &g));
        let closed = interparticle_distances(&p, &g);
        assert!((lab[2] - closed[1]).abs() < TOL);
        assert!((lab[0] - closed[2]).abs() < TOL);
        assert!((lab[1] - closed[0]).abs() < TOL);
    }

    fn arb_positions() -> impl Strategy<Value = [[f64; 2]; 3]> {
        prop::array::uniform3(prop::array::uniform2(-5.0f64..5.0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_preserves_distances(
            pos in arb_positions(),
            m in prop::array::uniform3(0.1f64..10.0),
        ) {
            let g = MassGeometry::new(m[0], m[1], m[2]).unwrap();
            prop_assume!(lab_distances(&pos).iter().cloned().fold(0.0, f64::max) > 1e-3);
            let p = lab_to_hyper(&pos, &g).unwrap();
            prop_assert!(p.validate().is_ok());
            prop_assert!(p.gamma < PI);
            let jac = lab_jacobi(&pos, &g);
            prop_assert!((p.r.powi(2) - norm2(jac.rho1) - norm2(jac.rho2)).abs() < 1e-12 * p.r.powi(2));
            let back = lab_distances(&hyper_to_lab(&p, &g));
            let orig = lab_distances(&pos);
            for k in 0..3 {
                prop_assert!((back[k] - orig[k]).abs() <= 1e-12 * orig.iter().cloned().fold(0.0, f64::max).max(1.0),
                    "pair {}: {} vs {}", k, back[k], orig[k]);
            }
        }
    }
}
