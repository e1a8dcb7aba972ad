use std::sync::Arc;

use hyper2d::adiabatic::{build_basis, build_basis_with, solve_channels, BasisConfig, SymmetrySpec};
use hyper2d::harmonics::{free_spectrum, SymmetryClass};
use hyper2d::{MassGeometry, PairPotential};

fn expected_free(class: SymmetryClass, m: i32, r: u8, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for (l, mult) in free_spectrum(class, m, r, m + 40) {
        for _ in 0..mult {
            out.push((l * (l + 2)) as f64 + 0.75);
        }
    }
    out.truncate(n);
    out
}

#[test]
fn free_spectrum_all_classes() {
    let free = PairPotential::new(0.0, 1.0).unwrap();
    let g = MassGeometry::equal();
    for class in SymmetryClass::ALL {
        for m in 0..=2 {
            for r in 0..=1u8 {
                let spec = SymmetrySpec::new(class, m, r).unwrap();
                let basis = Arc::new(build_basis(spec, 26, 26, 6).unwrap());
                let want = expected_free(class, m, r, 5);
                let sol = solve_channels(&spec, &basis, 1.0, &g, &free, want.len()).unwrap();
                for (got, w) in sol.reduced.iter().zip(&want) {
                    assert!(
                        (got - w).abs() < 1e-6 * w.max(1.0),
                        "{class} {}: got {:?} want {:?}",
                        spec.label(),
                        sol.reduced,
                        want
                    );
                }
            }
        }
    }
}

#[test]
#[ignore]
fn timing_default_basis() {
    let pp = PairPotential::new(-30.0, 1.0).unwrap();
    let g = MassGeometry::equal();
    for (class, m) in [(SymmetryClass::Bbb, 0), (SymmetryClass::Distinguishable, 1)] {
        let spec = SymmetrySpec::new(class, m, 0).unwrap();
        let t = std::time::Instant::now();
        let basis = Arc::new(build_basis_with(spec, &BasisConfig::default(), &g).unwrap());
        eprintln!(
            "{class} dim {} bw {} build {:?}",
            basis.dim(),
            basis.bandwidth(),
            t.elapsed()
        );
        for r in [1.0, 5.0, 20.0] {
            let t = std::time::Instant::now();
            let sol = solve_channels(&spec, &basis, r, &g, &pp, 8).unwrap();
            eprintln!(
                "R={r} {:?} it {} res {:e} U {:?}",
                t.elapsed(),
                sol.iterations,
                sol.residual,
                sol.values
            );
        }
    }
}

fn deep() -> PairPotential {
    PairPotential::new(-30.0, 1.0).unwrap()
}

#[test]
fn kinetic_form_symmetric_and_overlap_definite() {
    let g = MassGeometry::equal();
    for class in SymmetryClass::ALL {
        for m in 0..=3 {
            for r in 0..=1u8 {
                let spec = SymmetrySpec::new(class, m, r).unwrap();
                let b = build_basis(spec, 14, 14, 5).unwrap();
                assert!(
                    b.kinetic_asymmetry() < 1e-13,
                    "{class} {}: {:e}",
                    spec.label(),
                    b.kinetic_asymmetry()
                );
                let f = b.overlap().ldlt().unwrap();
                assert_eq!(f.negative_pivots(), 0);
                assert!(f.min_pivot() > 0.0);
                let _ = &g;
            }
        }
    }
}

#[test]
fn reflection_sectors_degenerate_for_nonzero_m() {
    let g = MassGeometry::equal();
    for m in 1..=2 {
        let s0 = SymmetrySpec::new(SymmetryClass::Bbb, m, 0).unwrap();
        let s1 = SymmetrySpec::new(SymmetryClass::Bbb, m, 1).unwrap();
        let b0 = Arc::new(build_basis(s0, 24, 24, 6).unwrap());
        let b1 = Arc::new(build_basis(s1, 24, 24, 6).unwrap());
        assert_eq!(b0.dim(), b1.dim());
        for r in [1.0, 4.0] {
            let u0 = solve_channels(&s0, &b0, r, &g, &deep(), 6).unwrap().values;
            let u1 = solve_channels(&s1, &b1, r, &g, &deep(), 6).unwrap().values;
            for (a, b) in u0.iter().zip(&u1) {
                assert!(
                    (a - b).abs() <= 1e-8 * a.abs().max(1.0),
                    "M={m} R={r}: {u0:?} vs {u1:?}"
                );
            }
        }
    }
}

#[test]
fn zero_m_has_no_sine_component() {
    let g = MassGeometry::equal();
    let spec = SymmetrySpec::new(SymmetryClass::Bbb, 0, 0).unwrap();
    let b = Arc::new(build_basis(spec, 16, 16, 5).unwrap());
    assert!(!b.has_sine_component());
    let sol = solve_channels(&spec, &b, 2.0, &g, &deep(), 3).unwrap();
    for v in &sol.vectors {
        for (t, p) in [(0.3, 0.2), (1.2, 0.9), (0.0, 0.5)] {
            let e = b.evaluate(v, t, p);
            assert_eq!(e[0], 0.0);
            assert_eq!(e[4], 0.0);
        }
    }
}

#[test]
fn channel_functions_obey_edge_conditions() {
    use hyper2d::adiabatic::EdgeCondition;
    let g = MassGeometry::equal();
    for class in SymmetryClass::ALL {
        for m in 0..=3 {
            for r in 0..=1u8 {
                let spec = SymmetrySpec::new(class, m, r).unwrap();
                let b = Arc::new(build_basis(spec, 14, 14, 5).unwrap());
                let sol = solve_channels(&spec, &b, 2.0, &g, &deep(), 3).unwrap();
                let tags = b.tags;
                for v in &sol.vectors {
                    let scale = (0..20)
                        .flat_map(|i| (0..20).map(move |j| (i, j)))
                        .map(|(i, j)| {
                            let e = b.evaluate(v, 1.5 * i as f64 / 19.0, b.phi_max * j as f64 / 19.0);
                            e[0].abs().max(e[1].abs())
                        })
                        .fold(0.0, f64::max);
                    let tol = 1e-10 * scale.max(1.0);
                    for k in 0..=40 {
                        let x = k as f64 / 40.0;
                        // θ = π/2 edge: derivative index 2/3.
                        let e = b.evaluate(v, std::f64::consts::FRAC_PI_2, x * b.phi_max);
                        for c in 0..2 {
                            let got = match tags.theta_half[c] {
                                EdgeCondition::Value => e[c],
                                EdgeCondition::Derivative => e[2 + c],
                                EdgeCondition::Periodic(_) => unreachable!(),
                            };
                            assert!(got.abs() < tol, "{class} {} θ-edge comp {c}: {got:e}", spec.label());
                        }
                        let theta = x * std::f64::consts::FRAC_PI_2;
                        let lo = b.evaluate(v, theta, 0.0);
                        let hi = b.evaluate(v, theta, b.phi_max);
                        for c in 0..2 {
                            match (tags.phi_zero[c], tags.phi_max[c]) {
                                (EdgeCondition::Periodic(sign), _) => {
                                    assert!((hi[c] - sign * lo[c]).abs() < tol);
                                    assert!((hi[4 + c] - sign * lo[4 + c]).abs() < tol * 10.0);
                                }
                                (a, z) => {
                                    for (cond, e) in [(a, lo), (z, hi)] {
                                        let got = if cond == EdgeCondition::Value { e[c] } else { e[4 + c] };
                                        assert!(got.abs() < tol, "{class} {} φ-edge comp {c}: {got:e}", spec.label());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn nested_refinement_never_raises_levels() {
    let g = MassGeometry::equal();
    let spec = SymmetrySpec::new(SymmetryClass::Bbb, 0, 0).unwrap();
    // Doubling the span count nests the breakpoints, so the spaces are nested.
    let coarse = Arc::new(build_basis(spec, 15, 15, 6).unwrap());
    let fine = Arc::new(build_basis(spec, 25, 25, 6).unwrap());
    for r in [1.0, 3.0, 6.0] {
        let uc = solve_channels(&spec, &coarse, r, &g, &deep(), 5).unwrap().values;
        let uf = solve_channels(&spec, &fine, r, &g, &deep(), 5).unwrap().values;
        for (c, f) in uc.iter().zip(&uf) {
            assert!(*f <= c + 1e-10 * c.abs().max(1.0), "R={r}: coarse {uc:?} fine {uf:?}");
        }
    }
}
