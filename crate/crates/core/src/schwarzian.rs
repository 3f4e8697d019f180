//! Discrete Schwarzians of a discrete conformal map: edge cross-ratios,
//! flower closing identities, the polynomial combinations of the six
//! Schwarzians around a vertex, and the closed-form expression for the
//! lattice Laplacian of each Schwarzian component.

use std::collections::BTreeMap;

use crate::calculus::LatticeField;
use crate::lattice::{Dir, LatticeParams, VertexId};
use crate::solver::DiscreteMap;
use crate::{Complex, Error, Result};

const ONE: Complex = Complex::new(1.0, 0.0);

/// Cross-ratio `(a-b)(c-d) / ((b-c)(d-a))`.
pub fn cross_ratio(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Complex> {
    let num = (a - b) * (c - d);
    let den = (b - c) * (d - a);
    if den.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(num / den)
}

/// Edge cross-ratio `q_k(v)`: the cross-ratio of the image points of the two
/// faces adjacent to the edge `[v, tau_k v]`, in the order
/// `f(v), f(tau_{k-1} v), f(tau_k v), f(tau_{k+1} v)`.
pub fn edge_q(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<Complex> {
    let sub = map.subcomplex();
    if !sub.is_interior_edge(v, k) {
        return Err(Error::BoundaryEdge(v, v.neighbor(k)));
    }
    cross_ratio(
        map.value(v)?,
        map.value(v.neighbor(k.cycle(-1)))?,
        map.value(v.neighbor(k))?,
        map.value(v.neighbor(k.cycle(1)))?,
    )
}

/// Discrete Schwarzian `s_k(v) = eps^{-2} (q_k(v)/Q_k - 1)`.
pub fn edge_schwarzian(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<Complex> {
    let p = map.subcomplex().params();
    let q = edge_q(map, v, k)?;
    let eps = p.epsilon;
    Ok((q / p.q(k) - ONE) / (eps * eps))
}

/// The six Schwarzians `s_1(v), ..., s_6(v)` at an interior vertex.
pub fn vertex_schwarzians(map: &DiscreteMap, v: VertexId) -> Result<[Complex; 6]> {
    let mut s = [Complex::new(0.0, 0.0); 6];
    for k in Dir::ALL {
        s[k.idx()] = edge_schwarzian(map, v, k)?;
    }
    Ok(s)
}

/// All discrete Schwarzians of a map: one complex field per direction,
/// defined on the vertices whose edge in that direction is interior.
#[derive(Debug, Clone)]
pub struct SchwarzianField {
    params: LatticeParams,
    comps: [BTreeMap<VertexId, Complex>; 6],
}

impl SchwarzianField {
    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    pub fn get(&self, v: VertexId, k: Dir) -> Result<Complex> {
        self.comps[k.idx()]
            .get(&v)
            .copied()
            .ok_or(Error::MissingValue(v))
    }

    /// Component `s_k` as a complex lattice field.
    pub fn component(&self, k: Dir) -> LatticeField {
        LatticeField::new(self.params.clone(), self.comps[k.idx()].clone())
    }

    /// Largest modulus over all components and vertices.
    pub fn norm_inf(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.values())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Computes every defined Schwarzian of the map.
pub fn schwarzian_field(map: &DiscreteMap) -> Result<SchwarzianField> {
    let sub = map.subcomplex();
    let mut comps: [BTreeMap<VertexId, Complex>; 6] = Default::default();
    for v in sub.vertices() {
        for k in Dir::ALL {
            if sub.is_interior_edge(*v, k) {
                comps[k.idx()].insert(*v, edge_schwarzian(map, *v, k)?);
            }
        }
    }
    Ok(SchwarzianField {
        params: sub.params().clone(),
        comps,
    })
}

/// Residuals of the three closing identities of the edge cross-ratios of a
/// flower.
#[derive(Debug, Clone, Copy)]
pub struct FlowerResiduals {
    /// `|q_1 ... q_6 - 1|`.
    pub product: f64,
    /// Alternating partial-product sums, one per starting direction. These
    /// hold for any immersed flower.
    pub alternating: [f64; 6],
    /// Modulus-weighted conjugate sums, one per starting direction. These
    /// hold only for flowers of a discrete conformal map, where
    /// `|q_k| = |Q_k|`.
    pub weighted: [f64; 6],
}

impl FlowerResiduals {
    pub fn max(&self) -> f64 {
        let alt = self.alternating.iter().copied().fold(0.0, f64::max);
        let wgt = self.weighted.iter().copied().fold(0.0, f64::max);
        self.product.max(alt).max(wgt)
    }
}

/// Closing-identity residuals from explicit image points: the center value
/// and the six ring values `f(tau_1 v), ..., f(tau_6 v)` counterclockwise.
pub fn flower_residuals_from_points(
    params: &LatticeParams,
    center: Complex,
    ring: [Complex; 6],
) -> Result<FlowerResiduals> {
    let mut q = [Complex::new(0.0, 0.0); 6];
    for k in 0..6 {
        q[k] = cross_ratio(center, ring[(k + 5) % 6], ring[k], ring[(k + 1) % 6])?;
    }

    let product = (q.iter().product::<Complex>() - ONE).norm();

    let mut alternating = [0.0; 6];
    let mut weighted = [0.0; 6];
    for k in 0..6 {
        // 1 - q_k + q_k q_{k+1} - ... - q_k ... q_{k+4}
        let mut acc = ONE;
        let mut sum = ONE;
        let mut sign = -1.0;
        for j in 0..5 {
            acc *= q[(k + j) % 6];
            sum += sign * acc;
            sign = -sign;
        }
        alternating[k] = sum.norm();

        // same with reversed direction and |Q| weights
        let qk = params.q(Dir::new(k as u8 + 1));
        let qkm = params.q(Dir::new(k as u8 + 1).cycle(-1));
        let w = [
            1.0 / qk.norm_sqr(),
            1.0 / (qk.norm_sqr() * qkm.norm_sqr()),
            1.0,
            1.0 / qk.norm_sqr(),
            1.0 / (qk.norm_sqr() * qkm.norm_sqr()),
        ];
        let mut acc = ONE;
        let mut sum = ONE;
        let mut sign = -1.0;
        for j in 0..5 {
            acc *= q[(k + 6 - j) % 6];
            sum += sign * w[j] * acc;
            sign = -sign;
        }
        weighted[k] = sum.norm();
    }

    Ok(FlowerResiduals {
        product,
        alternating,
        weighted,
    })
}

/// Closing-identity residuals of the image flower of an interior vertex.
pub fn flower_identity_residuals(map: &DiscreteMap, v: VertexId) -> Result<FlowerResiduals> {
    let sub = map.subcomplex();
    if !sub.is_interior(v) {
        return Err(Error::BoundaryEdge(v, v));
    }
    let center = map.value(v)?;
    let mut ring = [Complex::new(0.0, 0.0); 6];
    for k in Dir::ALL {
        ring[k.idx()] = map.value(v.neighbor(k))?;
    }
    flower_residuals_from_points(sub.params(), center, ring)
}

/// Elementary symmetric polynomial `e_j` of the given values.
fn esym(vals: &[Complex], j: usize) -> Complex {
    let mut e = vec![Complex::new(0.0, 0.0); j + 1];
    e[0] = ONE;
    for &x in vals {
        for i in (1..=j.min(e.len() - 1)).rev() {
            let prev = e[i - 1];
            e[i] += prev * x;
        }
    }
    e[j]
}

/// Values `s_k, s_{k+1}, ..., s_{k+len-1}` (indices mod 6).
fn window_fwd(s: &[Complex; 6], k: Dir, len: usize) -> Vec<Complex> {
    (0..len).map(|j| s[(k.idx() + j) % 6]).collect()
}

/// Values `s_k, s_{k-1}, ..., s_{k-len+1}` (indices mod 6).
fn window_bwd(s: &[Complex; 6], k: Dir, len: usize) -> Vec<Complex> {
    (0..len).map(|j| s[(k.idx() + 6 - j) % 6]).collect()
}

/// Quadratic-and-higher part of the product identity: the six Schwarzians
/// around a vertex satisfy `sum_k s_k = eps^2 phi(s)`.
pub fn phi(params: &LatticeParams, s: &[Complex; 6]) -> Complex {
    let e2 = params.epsilon * params.epsilon;
    let mut acc = Complex::new(0.0, 0.0);
    let mut weight = Complex::new(-1.0, 0.0);
    for j in 2..=6 {
        acc += weight * esym(s, j);
        weight *= e2;
    }
    acc
}

/// Quadratic-and-higher part of the forward alternating identity for
/// starting direction `k`.
pub fn psi(params: &LatticeParams, s: &[Complex; 6], k: Dir) -> Complex {
    let e2 = params.epsilon * params.epsilon;
    let qk = params.q(k);
    let qk1 = params.q(k.cycle(1));
    let a = window_fwd(s, k, 3);
    let b = window_fwd(s, k, 4);
    let c = window_fwd(s, k, 5);
    let order = |j: usize| -> Complex {
        esym(&a, j) - qk * esym(&b, j) + qk * qk1 * esym(&c, j)
    };
    // exact remainder of the forward closing identity under
    // q_k = Q_k (1 + eps^2 s_k), rederived by symbolic expansion
    let mut acc = -order(2) + qk * qk1 * s[k.idx()] * s[k.cycle(1).idx()];
    let mut weight = -e2;
    for j in 3..=5 {
        acc += weight * order(j);
        weight *= e2;
    }
    acc
}

/// Quadratic-and-higher part of the backward weighted identity for starting
/// direction `k`.
pub fn theta(params: &LatticeParams, s: &[Complex; 6], k: Dir) -> Complex {
    let e2 = params.epsilon * params.epsilon;
    let qk = params.q(k).conj();
    let qkm = params.q(k.cycle(-1)).conj();
    let a = window_bwd(s, k, 3);
    let b = window_bwd(s, k, 4);
    let c = window_bwd(s, k, 5);
    let order = |j: usize| -> Complex {
        esym(&a, j) - esym(&b, j) / qk + esym(&c, j) / (qk * qkm)
    };
    let mut acc = -order(2) + s[k.idx()] * s[k.cycle(-1).idx()] / (qk * qkm);
    let mut weight = -e2;
    for j in 3..=5 {
        acc += weight * order(j);
        weight *= e2;
    }
    acc
}

/// Residuals of the three polynomial identities satisfied by the six
/// Schwarzians around a vertex of a discrete conformal map.
#[derive(Debug, Clone, Copy)]
pub struct PolynomialResiduals {
    /// `|sum_k s_k - eps^2 phi|`.
    pub sum_res: f64,
    /// Forward window combination minus `eps^2 psi_k`, per direction.
    pub psi_res: [f64; 6],
    /// Backward window combination minus `eps^2 theta_k`, per direction.
    pub theta_res: [f64; 6],
}

impl PolynomialResiduals {
    pub fn max(&self) -> f64 {
        let p = self.psi_res.iter().copied().fold(0.0, f64::max);
        let t = self.theta_res.iter().copied().fold(0.0, f64::max);
        self.sum_res.max(p).max(t)
    }
}

/// Evaluates all polynomial identity residuals for the Schwarzians `s` at
/// one vertex.
pub fn polynomial_identity_residuals(
    params: &LatticeParams,
    s: &[Complex; 6],
) -> PolynomialResiduals {
    let e2 = params.epsilon * params.epsilon;
    let sum: Complex = s.iter().sum();
    let sum_res = (sum - phi(params, s) * e2).norm();

    let mut psi_res = [0.0; 6];
    let mut theta_res = [0.0; 6];
    for k in Dir::ALL {
        let qk = params.q(k);
        let qk1 = params.q(k.cycle(1));
        let fwd = |j: usize| s[k.cycle(j as i32).idx()];
        let lhs = fwd(0) + fwd(1) + fwd(2) - qk * (fwd(1) + fwd(2) + fwd(3))
            + qk * qk1 * (fwd(2) + fwd(3) + fwd(4));
        psi_res[k.idx()] = (lhs - psi(params, s, k) * e2).norm();

        let qkc = qk.conj();
        let qkmc = params.q(k.cycle(-1)).conj();
        let bwd = |j: i32| s[k.cycle(-j).idx()];
        let lhs = bwd(0) + bwd(1) + bwd(2) - (bwd(1) + bwd(2) + bwd(3)) / qkc
            + (bwd(2) + bwd(3) + bwd(4)) / (qkc * qkmc);
        theta_res[k.idx()] = (lhs - theta(params, s, k) * e2).norm();
    }
    PolynomialResiduals {
        sum_res,
        psi_res,
        theta_res,
    }
}

/// Residual of the closed-form Laplacian identity: the cot-weight lattice
/// Laplacian of `s_k` at `v` minus its polynomial expression in the
/// Schwarzians at `v` and three of its neighbors. Requires all involved
/// edges to be interior (`v` twice interior suffices).
pub fn laplacian_identity_residual(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<f64> {
    let (lhs, rhs) = laplacian_identity_sides(map, v, k)?;
    Ok((lhs - rhs).norm())
}

/// Both sides of the Laplacian identity: the lattice Laplacian of `s_k` and
/// its polynomial expression.
pub fn laplacian_identity_sides(map: &DiscreteMap, v: VertexId, k: Dir) -> Result<(Complex, Complex)> {
    let p = map.subcomplex().params().clone();
    let eps2 = p.epsilon * p.epsilon;

    // left side: lattice Laplacian of the field s_k
    let center = edge_schwarzian(map, v, k)?;
    let mut lhs = Complex::new(0.0, 0.0);
    for j in Dir::ALL {
        let w = 1.0 / p.opposite_angle(j).tan();
        lhs += w * (edge_schwarzian(map, v.neighbor(j), k)? - center);
    }
    lhs /= eps2;

    // right side: combination of the vertex polynomials at v and the
    // neighbors in directions k-1, k, k+1
    let s0 = vertex_schwarzians(map, v)?;
    let sm = vertex_schwarzians(map, v.neighbor(k.cycle(-1)))?;
    let sp = vertex_schwarzians(map, v.neighbor(k.cycle(1)))?;
    let st = vertex_schwarzians(map, v.neighbor(k))?;

    let qk = p.q(k);
    let qk1 = p.q(k.cycle(1));
    let lk = p.length(k);
    let lkp = p.length(k.cycle(1));
    let lkm = p.length(k.cycle(-1));
    let k3 = k.cycle(3);
    let i4 = Complex::new(0.0, 4.0);
    let pref = qk.norm() / (i4 * lk * lk * qk);

    let bracket = qk1.conj() * (psi(&p, &sm, k) + psi(&p, &sp, k3))
        + qk * qk1 * (theta(&p, &sm, k3) + theta(&p, &sp, k))
        + (ONE / qk.conj() - ONE) * (psi(&p, &st, k) + psi(&p, &s0, k3))
        + (ONE - qk) * (theta(&p, &st, k3) + theta(&p, &s0, k))
        + qk1.conj() * (qk - ONE) * (phi(&p, &st) + phi(&p, &s0));
    let outer = (lk * lk) / (lkp * lkp * lkm * lkm);
    let rhs = pref * bracket - outer / i4 * (phi(&p, &sm) + phi(&p, &sp));

    Ok((lhs, rhs))
}
