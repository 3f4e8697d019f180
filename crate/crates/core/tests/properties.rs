//! Property tests for the structural invariants of the lattice, the
//! calculus, and the Moebius utilities, over randomly drawn acute
//! geometries.

use dcl_core::calculus::LatticeField;
use dcl_core::harness::fit_order;
use dcl_core::lattice::{edge_faces, Dir, Face, LatticeParams, VertexId};
use dcl_core::mobius::Mobius;
use dcl_core::schwarzian::cross_ratio;
use dcl_core::solver::triangle_angles;
use dcl_core::Complex;
use proptest::prelude::*;

fn acute() -> impl Strategy<Value = (f64, f64)> {
    (0.6f64..1.5, 0.6f64..1.5).prop_filter("third angle acute", |(a, b)| {
        let g = std::f64::consts::PI - a - b;
        g > 0.1 && g < 1.5
    })
}

fn point() -> impl Strategy<Value = Complex> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(x, y)| Complex::new(x, y))
}

proptest! {
    #[test]
    fn lattice_closure((a, b) in acute(), eps in 0.05f64..0.5) {
        let p = LatticeParams::new(a, b, eps).unwrap();
        for k in Dir::ALL {
            let step = |j: Dir| p.length(j) * p.omega(j);
            let closure = step(k) - step(k.cycle(1)) + step(k.cycle(2));
            prop_assert!(closure.norm() < 1e-14);
            // opposite directions cancel
            prop_assert!((p.step(k) + p.step(k.cycle(3))).norm() < 1e-14);
        }
    }

    #[test]
    fn lattice_cross_ratio_products((a, b) in acute()) {
        let p = LatticeParams::new(a, b, 0.2).unwrap();
        let mut all = Complex::new(1.0, 0.0);
        for k in Dir::ALL {
            let q = p.q(k);
            let lm = p.length(k.cycle(-1));
            let lp = p.length(k.cycle(1));
            prop_assert!((q.norm() - lm * lm / (lp * lp)).abs() < 1e-13);
            let triple = q * p.q(k.cycle(1)) * p.q(k.cycle(2));
            prop_assert!((triple - Complex::new(1.0, 0.0)).norm() < 1e-13);
            all *= q;
        }
        prop_assert!((all - Complex::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn raw_lattice_cross_ratio_is_q((a, b) in acute(), n in -4i64..4, m in -4i64..4) {
        let p = LatticeParams::new(a, b, 0.3).unwrap();
        let v = VertexId::new(n, m);
        for k in Dir::ALL {
            let q = cross_ratio(
                p.position(v),
                p.position(v.neighbor(k.cycle(-1))),
                p.position(v.neighbor(k)),
                p.position(v.neighbor(k.cycle(1))),
            ).unwrap();
            prop_assert!((q - p.q(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_squares_is_constant((a, b) in acute(), eps in 0.05f64..0.5,
                                        n in -3i64..3, m in -3i64..3) {
        let p = LatticeParams::new(a, b, eps).unwrap();
        let boxed: Vec<VertexId> = (-4..=4)
            .flat_map(|i| (-4..=4).map(move |j| VertexId::new(i, j)))
            .collect();
        let x2 = LatticeField::from_fn(&p, boxed.iter().copied(),
            |v| Complex::new(p.position(v).re.powi(2), 0.0));
        let y2 = LatticeField::from_fn(&p, boxed.iter().copied(),
            |v| Complex::new(p.position(v).im.powi(2), 0.0));
        let v = VertexId::new(n, m);
        prop_assert!((x2.laplacian().get(v).unwrap() - p.c_abg).norm() < 1e-10);
        prop_assert!((y2.laplacian().get(v).unwrap() - p.c_abg).norm() < 1e-10);
    }

    #[test]
    fn flower_combinatorics(n in -10i64..10, m in -10i64..10) {
        let v = VertexId::new(n, m);
        for f in Face::flower(v) {
            prop_assert!(f.vertices().contains(&v));
        }
        for k in Dir::ALL {
            let (ccw, cw) = edge_faces(v, k);
            for f in [ccw, cw] {
                prop_assert!(f.vertices().contains(&v));
                prop_assert!(f.vertices().contains(&v.neighbor(k)));
            }
            prop_assert_ne!(ccw, cw);
        }
    }

    #[test]
    fn triangle_angles_sum_to_pi(a in 0.5f64..2.0, b in 0.5f64..2.0, c in 0.5f64..2.0) {
        prop_assume!(a + b > c && b + c > a && c + a > b);
        // margin away from degeneracy keeps the half-angle formula stable
        prop_assume!((a + b - c).min(b + c - a).min(c + a - b) > 1e-3);
        let (ta, tb, tc) = triangle_angles(a, b, c).unwrap();
        prop_assert!((ta + tb + tc - std::f64::consts::PI).abs() < 1e-12);
        prop_assert!(ta > 0.0 && tb > 0.0 && tc > 0.0);
    }

    #[test]
    fn cross_ratio_moebius_invariant(zs in prop::array::uniform4(point()),
                                     ms in prop::array::uniform4(point())) {
        let [a, b, c, d] = zs;
        let m = Mobius::new(ms[0], ms[1], ms[2], ms[3]);
        prop_assume!(m.det().norm() > 0.1);
        prop_assume!(cross_ratio(a, b, c, d).is_ok());
        let img: Result<Vec<Complex>, _> = [a, b, c, d].iter().map(|z| m.apply(*z)).collect();
        prop_assume!(img.is_ok());
        let img = img.unwrap();
        // stay away from near-coincident images where the ratio is ill-conditioned
        prop_assume!(img.iter().enumerate().all(|(i, x)| {
            img.iter().skip(i + 1).all(|y| (x - y).norm() > 1e-3)
        }));
        let q0 = cross_ratio(a, b, c, d).unwrap();
        let q1 = cross_ratio(img[0], img[1], img[2], img[3]).unwrap();
        prop_assert!((q0 - q1).norm() < 1e-6 * (1.0 + q0.norm()));
    }

    #[test]
    fn moebius_inverse_round_trip(ms in prop::array::uniform4(point()), z in point()) {
        let m = Mobius::new(ms[0], ms[1], ms[2], ms[3]);
        prop_assume!(m.det().norm() > 0.1);
        let fwd = m.apply(z);
        prop_assume!(fwd.is_ok());
        let fwd = fwd.unwrap();
        prop_assume!(fwd.norm() < 1e3);
        let back = m.inverse().apply(fwd).unwrap();
        prop_assert!((back - z).norm() < 1e-7 * (1.0 + z.norm()));
    }

    #[test]
    fn fit_order_recovers_power_law(pow in 0.5f64..3.0, scale in 0.1f64..10.0) {
        let eps = [0.2, 0.1, 0.05, 0.025];
        let err: Vec<f64> = eps.iter().map(|&e: &f64| scale * e.powf(pow)).collect();
        let slope = fit_order(&eps, &err).unwrap();
        prop_assert!((slope - pow).abs() < 1e-9);
    }
}
