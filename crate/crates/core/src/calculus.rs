//! Discrete directional derivatives, the cot-Laplacian and the regularity
//! bound for functions on lattice vertex sets.

use std::collections::BTreeMap;

use crate::lattice::{Dir, LatticeParams, VertexId};
use crate::{Complex, Error, Result};

/// A complex-valued function on a finite set of lattice vertices. Real
/// fields embed with zero imaginary part. The domain is the key set.
#[derive(Debug, Clone)]
pub struct LatticeField {
    params: LatticeParams,
    values: BTreeMap<VertexId, Complex>,
}

impl LatticeField {
    pub fn new(params: LatticeParams, values: BTreeMap<VertexId, Complex>) -> LatticeField {
        LatticeField { params, values }
    }

    /// Samples `f` at every vertex of `domain`.
    pub fn from_fn(
        params: &LatticeParams,
        domain: impl IntoIterator<Item = VertexId>,
        mut f: impl FnMut(VertexId) -> Complex,
    ) -> LatticeField {
        let values = domain.into_iter().map(|v| (v, f(v))).collect();
        LatticeField::new(params.clone(), values)
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn domain(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.values.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.values.contains_key(&v)
    }

    pub fn get(&self, v: VertexId) -> Result<Complex> {
        self.values.get(&v).copied().ok_or(Error::MissingValue(v))
    }

    /// Max-norm over the domain; 0 on an empty domain.
    pub fn norm_inf(&self) -> f64 {
        self.values.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// The translated field `(tau_k eta)(v) = eta(tau_k v)`, on the shrunken
    /// domain of vertices whose `k`-neighbor lies in the domain.
    pub fn shift(&self, k: Dir) -> LatticeField {
        let values = self
            .values
            .keys()
            .filter_map(|v| self.values.get(&v.neighbor(k)).map(|z| (*v, *z)))
            .collect();
        LatticeField::new(self.params.clone(), values)
    }

    /// The discrete directional derivative
    /// `(eta(tau_k v) - eta(v)) / (eps L_k)`.
    pub fn directional_derivative(&self, k: Dir) -> LatticeField {
        let h = self.params.epsilon * self.params.length(k);
        let values = self
            .values
            .iter()
            .filter_map(|(v, z)| {
                self.values
                    .get(&v.neighbor(k))
                    .map(|w| (*v, (w - z) / h))
            })
            .collect();
        LatticeField::new(self.params.clone(), values)
    }

    /// The discrete cot-Laplacian
    /// `eps^{-2} sum_k cot(theta_k) (eta(tau_k v) - eta(v))` with
    /// `theta_k` the lattice angle opposite to edges in direction `k`;
    /// defined on interior vertices of the domain.
    pub fn laplacian(&self) -> LatticeField {
        let e2 = self.params.epsilon * self.params.epsilon;
        let weights: [f64; 6] = {
            let mut w = [0.0; 6];
            for k in Dir::ALL {
                w[k.idx()] = 1.0 / self.params.opposite_angle(k).tan();
            }
            w
        };
        let mut values = BTreeMap::new();
        'outer: for (v, z) in &self.values {
            let mut acc = Complex::new(0.0, 0.0);
            for k in Dir::ALL {
                match self.values.get(&v.neighbor(k)) {
                    Some(w) => acc += weights[k.idx()] * (w - z),
                    None => continue 'outer,
                }
            }
            values.insert(*v, acc / e2);
        }
        LatticeField::new(self.params.clone(), values)
    }

    /// Euclidean distance from `v0` to the nearest lattice vertex outside
    /// the domain.
    pub fn distance_to_complement(&self, v0: VertexId) -> f64 {
        // The nearest complement vertex is within the domain's lattice
        // bounding box inflated by one ring.
        let (mut n_lo, mut n_hi, mut m_lo, mut m_hi) = (v0.n, v0.n, v0.m, v0.m);
        for v in self.values.keys() {
            n_lo = n_lo.min(v.n);
            n_hi = n_hi.max(v.n);
            m_lo = m_lo.min(v.m);
            m_hi = m_hi.max(v.m);
        }
        let p0 = self.params.position(v0);
        let mut best = f64::INFINITY;
        for n in (n_lo - 1)..=(n_hi + 1) {
            for m in (m_lo - 1)..=(m_hi + 1) {
                let v = VertexId::new(n, m);
                if !self.values.contains_key(&v) {
                    best = best.min((self.params.position(v) - p0).norm());
                }
            }
        }
        best
    }
}

/// Both sides of the regularity inequality at one vertex and direction.
#[derive(Debug, Clone, Copy)]
pub struct RegularityReport {
    /// `delta |d_k eta(v0)|` for k = 1..6.
    pub lhs: [f64; 6],
    /// `7 ||eta||_W + delta^2 / C_abg ||Lap eta||_{W^(1)}`.
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates the discrete regularity inequality
/// `delta |d_k eta(v0)| <= 7 ||eta||_W + delta^2/C ||Lap eta||_{W^(1)}`
/// at an interior vertex `v0` for all six directions.
pub fn regularity_check(field: &LatticeField, v0: VertexId, delta: f64) -> Result<RegularityReport> {
    let distance = field.distance_to_complement(v0);
    if delta > distance {
        return Err(Error::DeltaTooLarge { delta, distance });
    }
    let mut lhs = [0.0; 6];
    for k in Dir::ALL {
        let d = field.directional_derivative(k);
        lhs[k.idx()] = delta * d.get(v0)?.norm();
    }
    let c = field.params().c_abg;
    let rhs = 7.0 * field.norm_inf() + delta * delta / c * field.laplacian().norm_inf();
    let holds = lhs.iter().all(|l| *l <= rhs + 1e-14);
    Ok(RegularityReport { lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Disc, Subcomplex};

    fn params(eps: f64) -> LatticeParams {
        LatticeParams::new(1.0, 1.2, eps).unwrap()
    }

    fn box_domain(r: i64) -> Vec<VertexId> {
        let mut v = Vec::new();
        for n in -r..=r {
            for m in -r..=r {
                v.push(VertexId::new(n, m));
            }
        }
        v
    }

    #[test]
    fn shift_and_inverse() {
        let p = params(0.5);
        let f = LatticeField::from_fn(&p, box_domain(4), |v| p.position(v) * p.position(v));
        let g = f.shift(Dir(1)).shift(Dir(4));
        for v in g.domain() {
            assert!((g.get(v).unwrap() - f.get(v).unwrap()).norm() < 1e-15);
        }
        // shift of x by k=1 adds eps L_1
        let x = LatticeField::from_fn(&p, box_domain(4), |v| {
            Complex::new(p.position(v).re, 0.0)
        });
        let xs = x.shift(Dir(1));
        for v in xs.domain() {
            let expect = x.get(v).unwrap() + p.epsilon * p.length(Dir(1));
            assert!((xs.get(v).unwrap() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_linear_and_square() {
        let p = params(0.25);
        let x = LatticeField::from_fn(&p, box_domain(5), |v| {
            Complex::new(p.position(v).re, 0.0)
        });
        let dx = x.directional_derivative(Dir(1));
        for v in dx.domain() {
            assert!((dx.get(v).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-13);
        }
        let c = LatticeField::from_fn(&p, box_domain(5), |_| Complex::new(3.5, -1.0));
        assert!(c.directional_derivative(Dir(2)).norm_inf() < 1e-15);
        // d_1 x^2 = 2 x0 + eps L_1
        let x2 = LatticeField::from_fn(&p, box_domain(5), |v| {
            let t = p.position(v).re;
            Complex::new(t * t, 0.0)
        });
        let dx2 = x2.directional_derivative(Dir(1));
        for v in dx2.domain() {
            let x0 = p.position(v).re;
            let expect = 2.0 * x0 + p.epsilon * p.length(Dir(1));
            assert!((dx2.get(v).unwrap().re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_constant_on_squares() {
        // Lap x^2 = Lap y^2 = C_abg pins the weight convention.
        for (a, b) in [(1.0, 1.2), (0.7, 1.3), (1.4, 0.9), (1.0471975512, 1.0471975512)] {
            let p = LatticeParams::new(a, b, 0.3).unwrap();
            let x2 = LatticeField::from_fn(&p, box_domain(3), |v| {
                let t = p.position(v).re;
                Complex::new(t * t, 0.0)
            });
            let y2 = LatticeField::from_fn(&p, box_domain(3), |v| {
                let t = p.position(v).im;
                Complex::new(t * t, 0.0)
            });
            for f in [x2.laplacian(), y2.laplacian()] {
                assert!(!f.is_empty());
                for v in f.domain() {
                    assert!(
                        (f.get(v).unwrap().re - p.c_abg).abs() < 1e-11,
                        "angles ({a}, {b})"
                    );
                }
            }
        }
        // |z|^2 gives 2 C_abg
        let p = params(0.3);
        let z2 = LatticeField::from_fn(&p, box_domain(3), |v| {
            Complex::new(p.position(v).norm_sqr(), 0.0)
        });
        let lap = z2.laplacian();
        for v in lap.domain() {
            assert!((lap.get(v).unwrap().re - 2.0 * p.c_abg).abs() < 1e-11);
        }
    }

    #[test]
    fn laplacian_kills_linear() {
        let p = params(0.5);
        let f = LatticeField::from_fn(&p, box_domain(4), |v| {
            p.position(v) * Complex::new(0.3, 1.7) + Complex::new(2.0, -1.0)
        });
        assert!(f.laplacian().norm_inf() < 1e-12);
    }

    #[test]
    fn product_rule() {
        let p = params(0.4);
        let f1 = LatticeField::from_fn(&p, box_domain(4), |v| {
            let z = p.position(v);
            z * z + Complex::new(0.5, 0.2)
        });
        let f2 = LatticeField::from_fn(&p, box_domain(4), |v| {
            let z = p.position(v);
            Complex::new(z.re.sin(), z.im.cos())
        });
        let prod = LatticeField::from_fn(&p, box_domain(4), |v| {
            f1.get(v).unwrap() * f2.get(v).unwrap()
        });
        for k in Dir::ALL {
            let lhs = prod.directional_derivative(k);
            let d1 = f1.directional_derivative(k);
            let d2 = f2.directional_derivative(k);
            let t1 = f1.shift(k);
            for v in lhs.domain() {
                let rhs = d1.get(v).unwrap() * f2.get(v).unwrap()
                    + t1.get(v).unwrap() * d2.get(v).unwrap();
                assert!((lhs.get(v).unwrap() - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn operators_commute() {
        let p = params(0.4);
        let f = LatticeField::from_fn(&p, box_domain(5), |v| {
            let z = p.position(v);
            (z * Complex::new(0.0, 1.0)).exp()
        });
        let (j, k) = (Dir(2), Dir(6));
        let a = f.directional_derivative(j).directional_derivative(k);
        let b = f.directional_derivative(k).directional_derivative(j);
        for v in a.domain() {
            if b.contains(v) {
                assert!((a.get(v).unwrap() - b.get(v).unwrap()).norm() < 1e-12);
            }
        }
        let c = f.laplacian().directional_derivative(j);
        let d = f.directional_derivative(j).laplacian();
        for v in c.domain() {
            if d.contains(v) {
                assert!((c.get(v).unwrap() - d.get(v).unwrap()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn regularity_zero_and_linear() {
        let p = LatticeParams::new(
            std::f64::consts::FRAC_PI_3,
            std::f64::consts::FRAC_PI_3,
            0.1,
        )
        .unwrap();
        let sub = Subcomplex::carve(
            &p,
            &Disc {
                center: Complex::new(0.0, 0.0),
                radius: 0.8,
            },
        )
        .unwrap();
        let zero = LatticeField::from_fn(&p, sub.vertices().iter().copied(), |_| {
            Complex::new(0.0, 0.0)
        });
        let r = regularity_check(&zero, VertexId::ORIGIN, 0.3).unwrap();
        assert!(r.holds && r.rhs.abs() < 1e-15);

        // eta = x has d eta bounded by 1, huge slack
        let x = LatticeField::from_fn(&p, sub.vertices().iter().copied(), |v| {
            Complex::new(p.position(v).re, 0.0)
        });
        let r = regularity_check(&x, VertexId::ORIGIN, 0.5).unwrap();
        assert!(r.holds);
        assert!(r.rhs - r.lhs.iter().cloned().fold(0.0, f64::max) >= 6.0 * x.norm_inf());

        // delta beyond the domain is rejected
        assert!(matches!(
            regularity_check(&x, VertexId::ORIGIN, 10.0),
            Err(Error::DeltaTooLarge { .. })
        ));
    }
}
