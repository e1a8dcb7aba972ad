mod common;

use common::{compare_row, INCONSISTENT_CELLS, THRESHOLD_TABLE};
use hyper2d::adiabatic::SymmetrySpec;
use hyper2d::harmonics::SymmetryClass;
use hyper2d::threshold::*;
use hyper2d::BoundState;

fn table_for(class: SymmetryClass) -> Vec<ThresholdReport> {
    threshold_table(class, 2).unwrap()
}

#[test]
fn summary_table_reproduced() {
    let mut mismatches = Vec::new();
    for class in [
        SymmetryClass::Bbb,
        SymmetryClass::Bbx,
        SymmetryClass::Fff,
        SymmetryClass::Ffx,
    ] {
        let rows = table_for(class);
        let expected: Vec<_> = THRESHOLD_TABLE.iter().filter(|r| r.class == class).collect();
        assert_eq!(rows.len(), expected.len());
        for (e, g) in expected.iter().zip(&rows) {
            assert_eq!((g.m, g.r), (e.m, e.r));
            mismatches.extend(compare_row(e, g));
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}

#[test]
fn inconsistent_reference_cells_are_self_contradictory() {
    for (class, m, r, k) in INCONSISTENT_CELLS {
        let row = THRESHOLD_TABLE
            .iter()
            .find(|x| x.class == class && x.m == m && x.r == r)
            .unwrap();
        let (_, m_ad, listed, _) = row.atom_diatom[k];
        assert_ne!(listed, 2 * m_ad);
    }
}

#[test]
fn exponent_relations() {
    for class in [
        SymmetryClass::Bbb,
        SymmetryClass::Bbx,
        SymmetryClass::Fff,
        SymmetryClass::Ffx,
    ] {
        for rep in threshold_table(class, 4).unwrap() {
            assert_eq!(rep.d3_exponent - rep.k3_exponent, 2);
            assert_eq!(rep.k3_exponent, 2 * rep.lambda_min);
            for a in &rep.atom_diatom {
                assert_eq!(a.m_ad, (rep.m - a.m2b).abs());
                assert_eq!(a.exponent, 2 * a.m_ad);
            }
        }
    }
}

#[test]
fn dominant_partial_waves() {
    let bbb = dominant_partial_wave(&table_for(SymmetryClass::Bbb));
    assert_eq!(bbb.k3, vec![(0, 0)]);
    let ffx = dominant_partial_wave(&table_for(SymmetryClass::Ffx));
    assert_eq!(ffx.k3, vec![(1, 0)]);
    let fff = dominant_partial_wave(&table_for(SymmetryClass::Fff));
    assert_eq!(fff.k3, vec![(0, 1)]);
    for class in [
        SymmetryClass::Bbb,
        SymmetryClass::Bbx,
        SymmetryClass::Fff,
        SymmetryClass::Ffx,
    ] {
        let d = dominant_partial_wave(&threshold_table(class, 4).unwrap());
        assert!(!d.k_ad.is_empty());
        assert!(d.k_ad.iter().all(|(m, m2b)| m == m2b));
    }
}

#[test]
fn table_needs_identical_particles() {
    assert!(threshold_table(SymmetryClass::Distinguishable, 2).is_err());
    let spec = SymmetrySpec::new(SymmetryClass::Distinguishable, 1, 0).unwrap();
    let rep = threshold_report(&spec, &DiatomSpectrum::symbolic(SymmetryClass::Distinguishable, 3)).unwrap();
    assert_eq!(rep.lambda_min, 1);
}

#[test]
fn resonance_warning() {
    let spec = SymmetrySpec::new(SymmetryClass::Bbb, 0, 0).unwrap();
    let weak = [BoundState {
        v: 0,
        m2b: 0,
        energy: -5e-4,
    }];
    let rep = threshold_report(&spec, &DiatomSpectrum::from_bound_states(&weak)).unwrap();
    assert_eq!(rep.warnings.len(), 1);
    let deep = [BoundState {
        v: 0,
        m2b: 0,
        energy: -1.0,
    }];
    let rep = threshold_report(&spec, &DiatomSpectrum::from_bound_states(&deep)).unwrap();
    assert!(rep.warnings.is_empty());
}

fn decade_power(l_eff: f64) -> f64 {
    let c2 = (l_eff + 0.5).powi(2) - 0.25;
    wkb_scaling_power(c2, 1.0 / 3f64.sqrt(), 1e-3, 1e-2, 1.0).unwrap()
}

#[test]
fn wkb_scaling_over_a_decade() {
    for l in [0.5, 1.5] {
        let p = decade_power(l);
        assert!((p - (2.0 * l + 1.0)).abs() < 0.05 * (2.0 * l + 1.0), "ℓ={l}: {p}");
    }
    // ℓ_eff = −1/2: probability independent of k.
    let mu = 1.0 / 3f64.sqrt();
    let p1 = wkb_probability(-0.25, mu, 1e-6 / (2.0 * mu), 1.0).unwrap().probability;
    let p2 = wkb_probability(-0.25, mu, 1e-4 / (2.0 * mu), 1.0).unwrap().probability;
    assert!((p1 / p2 - 1.0).abs() < 0.05);
}

#[test]
fn wkb_halving_ratio() {
    // λ = 0 continuum tail: ℓ_eff = 1/2, halving k divides the probability by 4.
    let mu = 1.0 / 3f64.sqrt();
    let k: f64 = 1e-3;
    let p = |k: f64| wkb_probability(0.75, mu, k * k / (2.0 * mu), 1.0).unwrap().probability;
    let ratio = p(k) / p(k / 2.0);
    assert!((ratio - 4.0).abs() < 0.05 * 4.0, "{ratio}");
}

#[test]
fn atom_diatom_tail_consistency() {
    // Feeding the atom-diatom tail (m_AD² − 1/4) reproduces 2|m_AD| = 2ℓ_eff + 1.
    for m_ad in 0..4 {
        let c2 = (m_ad * m_ad) as f64 - 0.25;
        let mu = 1.0 / 3f64.sqrt();
        let w = wkb_probability(c2, mu, 1e-4, 1.0).unwrap();
        assert!((w.scaling_power - 2.0 * m_ad as f64).abs() < 1e-12);
    }
}
