//! Möbius transformations and the contact transformations of a discrete
//! conformal map, together with their transition relations.

use crate::lattice::{Dir, VertexId};
use crate::solver::DiscreteMap;
use crate::{Complex, Error, Result};

/// Möbius transformation `z -> (az + b)/(cz + d)` as a 2x2 complex matrix,
/// considered projectively (up to a common nonzero scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: Complex::new(1.0, 0.0),
        b: Complex::new(0.0, 0.0),
        c: Complex::new(0.0, 0.0),
        d: Complex::new(1.0, 0.0),
    };

    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Mobius {
        Mobius { a, b, c, d }
    }

    /// Translation `z -> z + t`.
    pub fn translation(t: Complex) -> Mobius {
        Mobius::new(
            Complex::new(1.0, 0.0),
            t,
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        )
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    /// Applies the transformation; `PoleHit` at `cz + d = 0`.
    pub fn apply(&self, z: Complex) -> Result<Complex> {
        let den = self.c * z + self.d;
        let num = self.a * z + self.b;
        if den.norm() <= 1e-300 * num.norm().max(1.0) {
            return Err(Error::PoleHit(z));
        }
        Ok(num / den)
    }

    /// Matrix product; `apply(compose(M1, M2), z) = apply(M1, apply(M2, z))`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        Mobius::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    /// Projective inverse (no determinant normalization).
    pub fn inverse(&self) -> Mobius {
        Mobius::new(self.d, -self.b, -self.c, self.a)
    }

    /// The Möbius transformation sending `z1, z2, z3` to `w1, w2, w3`.
    pub fn from_three_points(
        z1: Complex,
        z2: Complex,
        z3: Complex,
        w1: Complex,
        w2: Complex,
        w3: Complex,
    ) -> Result<Mobius> {
        let distinct =
            |a: Complex, b: Complex, c: Complex| a != b && b != c && a != c;
        if !distinct(z1, z2, z3) || !distinct(w1, w2, w3) {
            return Err(Error::CoincidentPoints);
        }
        // A maps z1, z2, z3 to 0, 1, inf; result is B^{-1} A.
        let to_standard = |p1: Complex, p2: Complex, p3: Complex| {
            Mobius::new(p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1))
        };
        let a = to_standard(z1, z2, z3);
        let b = to_standard(w1, w2, w3);
        Ok(b.inverse().compose(&a))
    }

    /// Canonical projective representative: the largest-modulus entry is
    /// scaled to 1 (real and positive).
    pub fn normalize(&self) -> Mobius {
        let entries = [self.a, self.b, self.c, self.d];
        let pivot = entries
            .iter()
            .copied()
            .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
            .unwrap();
        Mobius::new(
            self.a / pivot,
            self.b / pivot,
            self.c / pivot,
            self.d / pivot,
        )
    }

    /// Max entry deviation of the canonical representatives.
    pub fn projective_distance(&self, other: &Mobius) -> f64 {
        let s = self.normalize();
        let o = other.normalize();
        [(s.a - o.a), (s.b - o.b), (s.c - o.c), (s.d - o.d)]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Contact transformation `Z_k(v)`: the Möbius map sending the reference
/// triangle `0, eps L_k w_k, eps L_{k+1} w_{k+1}` to the image triangle
/// `f(v), f(tau_k v), f(tau_{k+1} v)`.
pub fn contact_transform(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<Mobius> {
    let sub = map.subcomplex();
    let p = sub.params();
    let (ccw, _) = crate::lattice::edge_faces(v, k);
    if !sub.contains_face(&ccw) {
        return Err(Error::MissingFace(v));
    }
    Mobius::from_three_points(
        Complex::new(0.0, 0.0),
        p.step(k),
        p.step(k.cycle(1)),
        map.value(v)?,
        map.value(v.neighbor(k))?,
        map.value(v.neighbor(k.cycle(1)))?,
    )
}

/// Transition translation `R_k = ((1, eps L_k w_k), (0, 1))`.
pub fn transition_r(params: &crate::lattice::LatticeParams, k: Dir) -> Mobius {
    Mobius::translation(params.step(k))
}

/// Transition matrix `M_k = ((1 + eps^2 s, 0), (eps s / (L_k w_k), 1))`.
pub fn transition_m(params: &crate::lattice::LatticeParams, s: Complex, k: Dir) -> Mobius {
    let eps = params.epsilon;
    Mobius::new(
        Complex::new(1.0, 0.0) + s * eps * eps,
        Complex::new(0.0, 0.0),
        s * eps / (params.length(k) * params.omega(k)),
        Complex::new(1.0, 0.0),
    )
}

/// Projective residuals of the three contact-transformation relations at
/// `(v, k)`.
#[derive(Debug, Clone, Copy)]
pub struct ContactResiduals {
    /// `Z_{k+2}(tau_k v)` vs `Z_k(v) R_k`.
    pub rel_neighbor: f64,
    /// `Z_{k-1}(v)` vs `Z_k(v) M_k(s_k(v))`.
    pub rel_edge: f64,
    /// `Z_k(tau_k v)` vs `Z_k(v) R_k (tau_k M_{k+2}) (tau_k M_{k+1})`.
    pub rel_tau: f64,
}

impl ContactResiduals {
    pub fn max(&self) -> f64 {
        self.rel_neighbor.max(self.rel_edge).max(self.rel_tau)
    }
}

/// Checks all three transition relations at `(v, k)`. The contact
/// transformations on both sides are built independently from three-point
/// interpolation, so the relations are genuine cross-checks.
pub fn verify_contact_relations(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<ContactResiduals> {
    let params = map.subcomplex().params().clone();
    let s = |v: VertexId, k: Dir| crate::schwarzian::edge_schwarzian(map, v, k);

    let zk_v = contact_transform(map, v, k)?;

    let lhs1 = contact_transform(map, v.neighbor(k), k.cycle(2))?;
    let rhs1 = zk_v.compose(&transition_r(&params, k));
    let rel_neighbor = lhs1.projective_distance(&rhs1);

    let lhs2 = contact_transform(map, v, k.cycle(-1))?;
    let rhs2 = zk_v.compose(&transition_m(&params, s(v, k)?, k));
    let rel_edge = lhs2.projective_distance(&rhs2);

    let lhs3 = contact_transform(map, v.neighbor(k), k)?;
    let w = v.neighbor(k);
    let rhs3 = zk_v
        .compose(&transition_r(&params, k))
        .compose(&transition_m(&params, s(w, k.cycle(2))?, k.cycle(2)))
        .compose(&transition_m(&params, s(w, k.cycle(1))?, k.cycle(1)));
    let rel_tau = lhs3.projective_distance(&rhs3);

    Ok(ContactResiduals {
        rel_neighbor,
        rel_edge,
        rel_tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn apply_basic() {
        let id = Mobius::IDENTITY;
        assert_eq!(id.apply(c(2.0, -3.0)).unwrap(), c(2.0, -3.0));
        let m = Mobius::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(m.apply(c(2.0, 0.0)).unwrap(), c(3.0, 0.0));
        let inv = Mobius::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(inv.apply(c(0.0, 0.0)), Err(Error::PoleHit(_))));
    }

    #[test]
    fn composition_law() {
        let m1 = Mobius::new(c(1.0, 2.0), c(0.5, 0.0), c(0.0, 0.3), c(1.0, -1.0));
        let m2 = Mobius::new(c(2.0, 0.0), c(-1.0, 1.0), c(0.1, 0.0), c(0.0, 1.0));
        for i in 0..20 {
            let z = c(0.3 * i as f64 - 2.0, 0.17 * i as f64 - 1.0);
            let lhs = m1.compose(&m2).apply(z).unwrap();
            let rhs = m1.apply(m2.apply(z).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
        assert!(m1.compose(&Mobius::IDENTITY).projective_distance(&m1) < 1e-15);
        assert!(
            m1.compose(&m1.inverse())
                .projective_distance(&Mobius::IDENTITY)
                < 1e-14
        );
    }

    #[test]
    fn three_points() {
        let m = Mobius::from_three_points(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
        )
        .unwrap();
        assert!(m.projective_distance(&Mobius::IDENTITY) < 1e-13);

        let t = Mobius::from_three_points(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(1.0, 1.0),
        )
        .unwrap();
        // translation z + 1, checked on a fourth point
        assert!((t.apply(c(5.0, 5.0)).unwrap() - c(6.0, 5.0)).norm() < 1e-12);

        assert!(matches!(
            Mobius::from_three_points(
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(2.0, 0.0)
            ),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn three_points_preserves_cross_ratio() {
        let cr = |a: Complex, b: Complex, c_: Complex, d: Complex| {
            (a - b) * (c_ - d) / ((b - c_) * (d - a))
        };
        let (z1, z2, z3, z4) = (c(0.0, 0.0), c(1.0, 0.2), c(-0.3, 1.0), c(2.0, -1.0));
        let (w1, w2, w3) = (c(3.0, 1.0), c(0.0, -2.0), c(1.0, 1.0));
        let m = Mobius::from_three_points(z1, z2, z3, w1, w2, w3).unwrap();
        let w4 = m.apply(z4).unwrap();
        let lhs = cr(z1, z2, z3, z4);
        let rhs = cr(w1, w2, w3, w4);
        assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn normalize_scale_invariant() {
        let m = Mobius::new(c(1.0, 2.0), c(0.5, 0.0), c(0.0, 0.3), c(1.0, -1.0));
        for lambda in [c(2.0, 0.0), c(0.0, -3.0), c(1e-3, 1e-2)] {
            let scaled = Mobius::new(m.a * lambda, m.b * lambda, m.c * lambda, m.d * lambda);
            assert!(scaled.projective_distance(&m) < 1e-13);
        }
        let n = m.normalize();
        assert!(n.normalize().projective_distance(&n) < 1e-15);
    }

    #[test]
    fn transition_matrices() {
        let p = crate::lattice::LatticeParams::new(1.0, 1.1, 0.2).unwrap();
        let m0 = transition_m(&p, c(0.0, 0.0), Dir(2));
        assert!(m0.projective_distance(&Mobius::IDENTITY) < 1e-15);
        let r = transition_r(&p, Dir(3));
        assert!((r.apply(c(0.0, 0.0)).unwrap() - p.step(Dir(3))).norm() < 1e-15);
        let s = c(0.3, -0.4);
        let m = transition_m(&p, s, Dir(1));
        let expect = Complex::new(1.0, 0.0) + s * p.epsilon * p.epsilon;
        assert!((m.det() - expect).norm() < 1e-15);
    }
}
