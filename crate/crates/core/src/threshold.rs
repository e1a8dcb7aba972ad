//! Threshold-law exponents from symmetry data and a WKB tunnelling
//! validator for 1/R² tails.

use serde::{Deserialize, Serialize};

use crate::adiabatic::SymmetrySpec;
use crate::harmonics::{lambda_min, SymmetryClass};
use crate::quadrature::GaussLegendre;
use crate::twobody::{allowed_m2b, diatom_pairs, BoundState};
use crate::{Error, Result};

/// Diatom angular momenta |m2b| available as initial atom-diatom states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiatomSpectrum {
    /// Ascending, permitted by exchange symmetry of at least one pair type.
    pub m2b: Vec<i32>,
    /// Least-bound level, if known.
    pub least_bound: Option<BoundState>,
}

impl DiatomSpectrum {
    /// All permitted |m2b| ≤ `max_m2b`, without reference to binding.
    pub fn symbolic(class: SymmetryClass, max_m2b: i32) -> Self {
        let m2b = (0..=max_m2b)
            .filter(|&m| diatom_pairs(class).iter().any(|&p| allowed_m2b(class, p, m)))
            .collect();
        Self { m2b, least_bound: None }
    }

    /// Levels actually bound (already filtered by exchange symmetry).
    pub fn from_bound_states(states: &[BoundState]) -> Self {
        let mut m2b: Vec<i32> = states.iter().map(|s| s.m2b.abs()).collect();
        m2b.sort_unstable();
        m2b.dedup();
        let least_bound = states.iter().copied().max_by(|a, b| a.energy.total_cmp(&b.energy));
        Self { m2b, least_bound }
    }
}

/// One atom-diatom entry of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomDiatomLaw {
    pub m2b: i32,
    /// Smallest |m_AD| = ||M| − |m2b||.
    pub m_ad: i32,
    /// K_AD ∝ k_AD^exponent.
    pub exponent: i32,
    /// Constant rate as k_AD → 0.
    pub dominant: bool,
}

/// Threshold laws of one symmetry sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub class: SymmetryClass,
    pub m: i32,
    pub r: u8,
    pub atom_diatom: Vec<AtomDiatomLaw>,
    pub lambda_min: i32,
    /// K3 ∝ k^k3_exponent.
    pub k3_exponent: i32,
    /// D3 ∝ k^d3_exponent.
    pub d3_exponent: i32,
    /// Set by [`mark_dominant`] when this sector has the smallest λ_min.
    pub k3_dominant: bool,
    pub d3_dominant: bool,
    pub warnings: Vec<String>,
}

/// Threshold laws for a sector given the available diatoms.
pub fn threshold_report(spec: &SymmetrySpec, spectrum: &DiatomSpectrum) -> Result<ThresholdReport> {
    let lambda = lambda_min(spec.class, spec.m, spec.r)
        .ok_or_else(|| Error::Symmetry(format!("no allowed harmonic for {}", spec.label())))?;
    let m = spec.m.abs();
    let atom_diatom = spectrum
        .m2b
        .iter()
        // An m2b = 0 diatom with m_AD = M = 0 is reflection symmetric.
        .filter(|&&m2b| !(m == 0 && m2b == 0 && spec.r == 1))
        .map(|&m2b| {
            let m_ad = (m - m2b.abs()).abs();
            AtomDiatomLaw {
                m2b: m2b.abs(),
                m_ad,
                exponent: 2 * m_ad,
                dominant: m_ad == 0,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    if let Some(b) = spectrum.least_bound {
        if b.m2b == 0 && b.energy.abs() < 1e-3 {
            warnings.push(format!(
                "least-bound diatom has m2b = 0 and |E| = {:.3e}; logarithmic terms may alter these laws",
                b.energy.abs()
            ));
        }
    }
    Ok(ThresholdReport {
        class: spec.class,
        m,
        r: spec.r,
        atom_diatom,
        lambda_min: lambda,
        k3_exponent: 2 * lambda,
        d3_exponent: 2 * lambda + 2,
        k3_dominant: false,
        d3_dominant: false,
        warnings,
    })
}

/// Flags the sectors with the smallest λ_min.
pub fn mark_dominant(reports: &mut [ThresholdReport]) {
    if let Some(best) = reports.iter().map(|r| r.lambda_min).min() {
        for r in reports.iter_mut() {
            r.k3_dominant = r.lambda_min == best;
            r.d3_dominant = r.lambda_min == best;
        }
    }
}

/// Dominant partial waves per observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantWaves {
    /// (|M|, |m2b|) pairs with a constant K_AD.
    pub k_ad: Vec<(i32, i32)>,
    /// (|M|, r) sectors with the smallest K3 exponent.
    pub k3: Vec<(i32, u8)>,
    /// (|M|, r) sectors with the smallest D3 exponent.
    pub d3: Vec<(i32, u8)>,
}

pub fn dominant_partial_wave(reports: &[ThresholdReport]) -> DominantWaves {
    let k_ad = reports
        .iter()
        .flat_map(|r| r.atom_diatom.iter().filter(|a| a.dominant).map(move |a| (r.m, a.m2b)))
        .collect();
    let best = reports.iter().map(|r| r.lambda_min).min();
    let k3: Vec<(i32, u8)> = reports
        .iter()
        .filter(|r| Some(r.lambda_min) == best)
        .map(|r| (r.m, r.r))
        .collect();
    DominantWaves {
        k_ad,
        d3: k3.clone(),
        k3,
    }
}

/// Rows of the summary table for `class`: 0⁺_s, 0⁺_a, then |M| = 1..=m_max
/// (the two reflection sectors coincide for |M| ≥ 1). Each row lists the
/// lowest permitted |m2b|: two with three identical particles, three with two.
pub fn threshold_table(class: SymmetryClass, m_max: i32) -> Result<Vec<ThresholdReport>> {
    let entries = match class.identical_count() {
        3 => 2,
        2 => 3,
        _ => {
            return Err(Error::domain(
                "threshold table needs identical particles; use threshold_report with an explicit M",
            ))
        }
    };
    let spectrum = DiatomSpectrum::symbolic(class, 2 * m_max + 8);
    let mut rows = Vec::new();
    for m in 0..=m_max {
        for r in 0..=1u8 {
            if m > 0 && r == 1 {
                continue;
            }
            let spec = SymmetrySpec::new(class, m, r)?;
            let mut rep = threshold_report(&spec, &spectrum)?;
            rep.atom_diatom.truncate(entries);
            rows.push(rep);
        }
    }
    mark_dominant(&mut rows);
    Ok(rows)
}

/// Letter for |m2b| in the 3D notation (s, p, d, f, g, ...).
pub fn m2b_letter(m2b: i32) -> char {
    const L: &[u8] = b"spdfghiklmnoqrtuv";
    L.get(m2b.unsigned_abs() as usize).map_or('?', |&c| c as char)
}

/// Outcome of [`wkb_probability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WkbEstimate {
    pub energy: f64,
    pub k: f64,
    pub l_eff: f64,
    /// Twice the action integral; the probability is exp(−exponent).
    pub exponent: f64,
    pub probability: f64,
    /// 2ℓ_eff + 1, the power of k r0 expected at threshold.
    pub scaling_power: f64,
    /// r_c ≤ r0: no tunnelling region.
    pub above_barrier: bool,
}

fn check_tail(c2: f64, mu: f64, energy: f64, r0: f64) -> Result<()> {
    if !(energy > 0.0) || !(mu > 0.0) || !(r0 > 0.0) {
        return Err(Error::domain("WKB estimate needs E > 0, μ > 0 and r0 > 0"));
    }
    if c2 + 0.25 < 0.0 {
        return Err(Error::domain(format!("tail coefficient {c2} is below −1/4")));
    }
    Ok(())
}

/// Closed form of ∫_{r0}^{r_c} √(a²/R² − k²) dR with a = ℓ_eff + 1/2.
pub fn wkb_action_exact(c2: f64, mu: f64, energy: f64, r0: f64) -> Result<f64> {
    check_tail(c2, mu, energy, r0)?;
    let a = (c2 + 0.25).sqrt();
    let k = (2.0 * mu * energy).sqrt();
    if a <= k * r0 {
        return Ok(0.0);
    }
    let s0 = (a * a - k * k * r0 * r0).sqrt();
    Ok(a * ((a + s0) / (k * r0)).ln() - s0)
}

/// Tunnelling probability through W = c2/(2μR²) plus the Langer term, from
/// r0 to the turning point, by quadrature.
pub fn wkb_probability(c2: f64, mu: f64, energy: f64, r0: f64) -> Result<WkbEstimate> {
    check_tail(c2, mu, energy, r0)?;
    let a = (c2 + 0.25).sqrt();
    let k = (2.0 * mu * energy).sqrt();
    let l_eff = a - 0.5;
    let rc = a / k;
    let mut est = WkbEstimate {
        energy,
        k,
        l_eff,
        exponent: 0.0,
        probability: 1.0,
        scaling_power: 2.0 * l_eff + 1.0,
        above_barrier: rc <= r0,
    };
    if est.above_barrier {
        return Ok(est);
    }
    // With kR = a sin t the integrand a cos²t / sin t is smooth except for
    // the 1/t growth near small t0, handled by geometric panels.
    let t0 = (k * r0 / a).asin();
    let t1 = std::f64::consts::FRAC_PI_2;
    let gl = GaussLegendre::new(20);
    let f = |t: f64| a * t.cos().powi(2) / t.sin();
    let mut action = 0.0;
    let mut lo = t0;
    while lo < t1 {
        let hi = (2.0 * lo).min(t1);
        action += gl.integrate(lo, hi, f);
        lo = hi;
    }
    est.exponent = 2.0 * action;
    est.probability = (-est.exponent).exp();
    Ok(est)
}

/// Local power of the WKB probability in k over [k_lo, k_hi], from the two
/// end points.
pub fn wkb_scaling_power(c2: f64, mu: f64, k_lo: f64, k_hi: f64, r0: f64) -> Result<f64> {
    let e = |k: f64| k * k / (2.0 * mu);
    let p_lo = wkb_probability(c2, mu, e(k_lo), r0)?;
    let p_hi = wkb_probability(c2, mu, e(k_hi), r0)?;
    Ok((p_hi.exponent - p_lo.exponent) / (k_lo / k_hi).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_matches_closed_form() {
        for c2 in [-0.25, 0.75, 3.75, 8.75] {
            for k in [1e-3, 0.05, 0.5] {
                let mu = 1.0 / 3f64.sqrt();
                let e = k * k / (2.0 * mu);
                let w = wkb_probability(c2, mu, e, 1.0).unwrap();
                let x = wkb_action_exact(c2, mu, e, 1.0).unwrap();
                assert!((w.exponent - 2.0 * x).abs() < 1e-8 * (1.0 + x), "c2={c2} k={k}");
            }
        }
    }

    #[test]
    fn above_barrier_flag() {
        let w = wkb_probability(0.75, 0.5, 10.0, 1.0).unwrap();
        assert!(w.above_barrier);
        assert_eq!(w.probability, 1.0);
    }

    #[test]
    fn letters() {
        assert_eq!(m2b_letter(0), 's');
        assert_eq!(m2b_letter(4), 'g');
    }
}
