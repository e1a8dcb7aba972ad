mod common;

use std::f64::consts::PI;

use common::{fd_eigen_residual, TABLES};
use hyper2d::harmonics::*;
use hyper2d::quadrature::GaussLegendre;
use hyper2d::HyperPoint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn reference_tables_reproduced() {
    for (class, columns) in TABLES {
        for (m, col) in columns.iter().enumerate() {
            let got = enumerate_allowed(class, m as i32, 10);
            let want: Vec<(i32, Vec<i32>)> = col.iter().map(|(l, w)| (*l, w.to_vec())).collect();
            assert_eq!(&got[..want.len()], &want[..], "{class} M={m}");
        }
    }
}

#[test]
fn negative_m_mirrors_positive() {
    for class in SymmetryClass::ALL {
        for m in 1..=3 {
            assert_eq!(enumerate_allowed(class, m, 10), enumerate_allowed(class, -m, 10));
        }
    }
}

fn labels(lambda_max: i32) -> impl Iterator<Item = HarmonicLabel> {
    (0..=lambda_max).flat_map(move |l| {
        (-l..=l)
            .step_by(2)
            .flat_map(move |w| (-l..=l).step_by(2).map(move |m| HarmonicLabel::new(l, w, m).unwrap()))
    })
}

fn random_point(rng: &mut ChaCha8Rng) -> HyperPoint {
    HyperPoint::wrapped(
        1.0,
        rng.random_range(0.0..PI),
        rng.random_range(0.0..4.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    )
}

#[test]
fn operator_phases_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let all: Vec<HarmonicLabel> = labels(12).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let h = all[rng.random_range(0..all.len())];
        let p = random_point(&mut rng);
        for op in SymmetryOp::ALL {
            worst = worst.max(verify_operator_pointwise(op, h, &p).unwrap());
        }
    }
    assert!(worst < 1e-12, "{worst:e}");
}

fn compose(a: SymmetryOp, b: SymmetryOp, h: HarmonicLabel) -> (Complex64, HarmonicLabel) {
    // (a b) Y = a (b Y)
    let (pb, hb) = apply_symmetry(b, h);
    let (pa, ha) = apply_symmetry(a, hb);
    (pa * pb, ha)
}

#[test]
fn products_of_exchanges_are_consistent() {
    // Operators act on functions by pullback, so P12 P23 as a product of
    // function operators applies the point maps in the opposite order.
    let p = HyperPoint::wrapped(1.0, 0.7, 2.9, 1.3);
    let q = SymmetryOp::P23.map(&SymmetryOp::P12.map(&p));
    let direct = SymmetryOp::P12P23.map(&p);
    let same = |a: &HyperPoint, b: &HyperPoint| {
        (a.theta - b.theta).abs() + (a.phi - b.phi).abs() + (a.gamma - b.gamma).abs() < 1e-12
    };
    let order_ab = same(&q, &direct);
    for h in labels(12) {
        let (ph, hh) = apply_symmetry(SymmetryOp::P12P23, h);
        let (pc, hc) = if order_ab {
            compose(SymmetryOp::P12, SymmetryOp::P23, h)
        } else {
            compose(SymmetryOp::P23, SymmetryOp::P12, h)
        };
        assert_eq!(hh, hc, "{h}");
        assert!((ph - pc).norm() < 1e-12, "{h}");
        let (ph, hh) = apply_symmetry(SymmetryOp::P12P31, h);
        let (pc, hc) = if order_ab {
            compose(SymmetryOp::P12, SymmetryOp::P31, h)
        } else {
            compose(SymmetryOp::P31, SymmetryOp::P12, h)
        };
        assert_eq!(hh, hc, "{h}");
        assert!((ph - pc).norm() < 1e-12, "{h}");
    }
}

#[test]
fn finite_difference_eigenvalue() {
    let (count, worst) = fd_eigen_residual(10);
    assert!(count > 100);
    assert!(worst < 1e-6, "max residual {worst:e}");
}

#[test]
fn symmetrized_states_are_orthonormal() {
    let class = SymmetryClass::Bbb;
    let mut states = Vec::new();
    'outer: for lambda in 0..=20 {
        for m in -lambda..=lambda {
            for (l, omegas) in enumerate_allowed(class, m, lambda) {
                if l != lambda {
                    continue;
                }
                for w in omegas {
                    states.push(symmetrized_harmonic(class, HarmonicLabel::new(l, w, m).unwrap()).unwrap());
                    if states.len() == 20 {
                        break 'outer;
                    }
                }
            }
        }
    }
    assert_eq!(states.len(), 20);
    let gl = GaussLegendre::new(48);
    let (nf, ng) = (96, 48);
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); 20]; 20];
    for (t, wt) in gl.on(0.0, PI) {
        for i in 0..nf {
            let f = 4.0 * PI * i as f64 / nf as f64;
            for j in 0..ng {
                let g = 2.0 * PI * j as f64 / ng as f64;
                let p = HyperPoint::wrapped(1.0, t, f, g);
                let vals: Vec<Complex64> = states.iter().map(|s| s.value(&p)).collect();
                let w = wt * t.sin() / 4.0 * (4.0 * PI / nf as f64) * (2.0 * PI / ng as f64);
                for a in 0..20 {
                    for b in 0..20 {
                        gram[a][b] += w * vals[a].conj() * vals[b];
                    }
                }
            }
        }
    }
    for a in 0..20 {
        for b in 0..20 {
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((gram[a][b] - want).norm() < 1e-8, "({a},{b}) = {}", gram[a][b]);
        }
    }
}

#[test]
fn symmetrized_states_have_parity_and_exchange_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for class in [
        SymmetryClass::Bbb,
        SymmetryClass::Fff,
        SymmetryClass::Bbx,
        SymmetryClass::Ffx,
    ] {
        for m in 0..=3 {
            for (lambda, omegas) in enumerate_allowed(class, m, 9) {
                for w in omegas {
                    let s = symmetrized_harmonic(class, HarmonicLabel::new(lambda, w, m).unwrap()).unwrap();
                    let parity = if m % 2 == 0 { 1.0 } else { -1.0 };
                    for _ in 0..5 {
                        let p = random_point(&mut rng);
                        let v = s.value(&p);
                        assert!((s.value(&SymmetryOp::Parity.map(&p)) - parity * v).norm() < 1e-12);
                        for (op, weight) in class.symmetrizer().into_iter().skip(1) {
                            let op = op.unwrap();
                            let sign = if weight < 0.0 { -1.0 } else { 1.0 };
                            assert!((s.value(&op.map(&p)) - sign * v).norm() < 1e-11, "{class} {op:?}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn forbidden_label_is_rejected() {
    // ω = 0 with (3M + λ)/2 even vanishes for fermions.
    let h = HarmonicLabel::new(0, 0, 0).unwrap();
    assert!(symmetrized_harmonic(SymmetryClass::Fff, h).is_err());
    assert!(symmetrized_harmonic(SymmetryClass::Bbb, h).is_ok());
}
