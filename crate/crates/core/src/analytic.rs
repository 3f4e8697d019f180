//! Catalog of smooth conformal test functions with closed-form derivatives
//! and Schwarzians, predicted limits of the discrete Schwarzians, and the
//! infinitesimal cross-ratio expansion.

use crate::lattice::{Dir, LatticeParams};
use crate::mobius::Mobius;
use crate::{Complex, Error, Result};

/// A holomorphic reference function with nonvanishing derivative on its
/// validity domain, with closed-form Schwarzian derivative.
#[derive(Debug, Clone)]
pub enum AnalyticFunction {
    Identity,
    /// `a z + b`.
    Affine { a: Complex, b: Complex },
    /// `(a z + b) / (c z + d)`.
    Moebius(Mobius),
    /// `z + lambda z^2`, valid on `|z| < 1/(2 |lambda|)`.
    Quadratic { lambda: Complex },
    /// `e^z`.
    Exp,
    /// `z + lambda z^3`, valid where `1 + 3 lambda z^2 != 0`.
    Cubic { lambda: Complex },
    /// Polynomial `c_0 + c_1 z + ... + c_n z^n`, degree at most 6, valid
    /// away from the zeros of its derivative.
    Poly { coeffs: Vec<Complex> },
}

fn horner(coeffs: &[Complex], z: Complex) -> Complex {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn poly_derivative(coeffs: &[Complex]) -> Vec<Complex> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

/// Roots of a complex polynomial via Durand-Kerner; used for the validity
/// predicate of `Poly`.
fn poly_roots(coeffs: &[Complex]) -> Vec<Complex> {
    let mut c: Vec<Complex> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() < 1e-300 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let monic: Vec<Complex> = c.iter().map(|x| x / lead).collect();
    // standard Durand-Kerner start: powers of 0.4 + 0.9i
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex> = Vec::with_capacity(n);
    let mut acc = Complex::new(1.0, 0.0);
    for _ in 0..n {
        acc *= seed;
        roots.push(acc);
    }
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let num = horner(&monic, roots[i]);
            let mut den = Complex::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    den *= roots[i] - roots[j];
                }
            }
            if den.norm() < 1e-300 {
                continue;
            }
            let step = num / den;
            max_step = max_step.max(step.norm());
            roots[i] -= step;
        }
        if max_step < 1e-14 {
            break;
        }
    }
    roots
}

impl AnalyticFunction {
    /// Looks up a catalog entry by name with a flat float parameter list;
    /// complex parameters are consecutive `(re, im)` pairs.
    pub fn from_name(name: &str, params: &[f64]) -> Result<AnalyticFunction> {
        let pair = |i: usize| Complex::new(params[2 * i], params[2 * i + 1]);
        let need = |n: usize| -> Result<()> {
            if params.len() != n {
                Err(Error::InvalidConfig(format!(
                    "function '{name}' expects {n} parameters, got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "identity" => {
                need(0)?;
                Ok(AnalyticFunction::Identity)
            }
            "affine" => {
                need(4)?;
                Ok(AnalyticFunction::Affine {
                    a: pair(0),
                    b: pair(1),
                })
            }
            "moebius" => {
                need(8)?;
                Ok(AnalyticFunction::Moebius(Mobius::new(
                    pair(0),
                    pair(1),
                    pair(2),
                    pair(3),
                )))
            }
            "quadratic" => {
                need(2)?;
                Ok(AnalyticFunction::Quadratic { lambda: pair(0) })
            }
            "exp" => {
                need(0)?;
                Ok(AnalyticFunction::Exp)
            }
            "cubic" => {
                need(2)?;
                Ok(AnalyticFunction::Cubic { lambda: pair(0) })
            }
            "poly" => {
                if params.len() % 2 != 0 || params.len() / 2 > 7 || params.len() < 4 {
                    return Err(Error::InvalidConfig(
                        "poly expects 2..=7 complex coefficients as (re, im) pairs".into(),
                    ));
                }
                let coeffs = (0..params.len() / 2).map(pair).collect();
                Ok(AnalyticFunction::Poly { coeffs })
            }
            _ => Err(Error::InvalidConfig(format!("unknown function '{name}'"))),
        }
    }

    /// True where the function is holomorphic with nonvanishing derivative.
    pub fn is_valid(&self, z: Complex) -> bool {
        match self {
            AnalyticFunction::Identity | AnalyticFunction::Exp => true,
            AnalyticFunction::Affine { a, .. } => a.norm() > 0.0,
            AnalyticFunction::Moebius(m) => {
                (m.c * z + m.d).norm() > 1e-12 && m.det().norm() > 1e-12
            }
            AnalyticFunction::Quadratic { lambda } => {
                lambda.norm() == 0.0 || z.norm() < 0.5 / lambda.norm()
            }
            AnalyticFunction::Cubic { lambda } => {
                (Complex::new(1.0, 0.0) + 3.0 * lambda * z * z).norm() > 1e-9
            }
            AnalyticFunction::Poly { coeffs } => {
                let deriv = poly_derivative(coeffs);
                poly_roots(&deriv).iter().all(|r| (z - r).norm() > 1e-6)
            }
        }
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        if !self.is_valid(z) {
            return Err(Error::OutsideDomain(z));
        }
        Ok(match self {
            AnalyticFunction::Identity => z,
            AnalyticFunction::Affine { a, b } => a * z + b,
            AnalyticFunction::Moebius(m) => m.apply(z)?,
            AnalyticFunction::Quadratic { lambda } => z + lambda * z * z,
            AnalyticFunction::Exp => z.exp(),
            AnalyticFunction::Cubic { lambda } => z + lambda * z * z * z,
            AnalyticFunction::Poly { coeffs } => horner(coeffs, z),
        })
    }

    pub fn derivative(&self, z: Complex) -> Result<Complex> {
        if !self.is_valid(z) {
            return Err(Error::OutsideDomain(z));
        }
        Ok(match self {
            AnalyticFunction::Identity => Complex::new(1.0, 0.0),
            AnalyticFunction::Affine { a, .. } => *a,
            AnalyticFunction::Moebius(m) => {
                let den = m.c * z + m.d;
                m.det() / (den * den)
            }
            AnalyticFunction::Quadratic { lambda } => Complex::new(1.0, 0.0) + 2.0 * lambda * z,
            AnalyticFunction::Exp => z.exp(),
            AnalyticFunction::Cubic { lambda } => Complex::new(1.0, 0.0) + 3.0 * lambda * z * z,
            AnalyticFunction::Poly { coeffs } => horner(&poly_derivative(coeffs), z),
        })
    }

    /// Closed-form Schwarzian derivative `f'''/f' - 3/2 (f''/f')^2`.
    pub fn schwarzian(&self, z: Complex) -> Result<Complex> {
        if !self.is_valid(z) {
            return Err(Error::OutsideDomain(z));
        }
        let zero = Complex::new(0.0, 0.0);
        Ok(match self {
            AnalyticFunction::Identity
            | AnalyticFunction::Affine { .. }
            | AnalyticFunction::Moebius(_) => zero,
            AnalyticFunction::Exp => Complex::new(-0.5, 0.0),
            AnalyticFunction::Quadratic { lambda } => {
                let fp = Complex::new(1.0, 0.0) + 2.0 * lambda * z;
                -6.0 * lambda * lambda / (fp * fp)
            }
            AnalyticFunction::Cubic { lambda } => {
                let fp = Complex::new(1.0, 0.0) + 3.0 * lambda * z * z;
                6.0 * lambda / fp - 54.0 * lambda * lambda * z * z / (fp * fp)
            }
            AnalyticFunction::Poly { coeffs } => {
                let d1 = poly_derivative(coeffs);
                let d2 = poly_derivative(&d1);
                let d3 = poly_derivative(&d2);
                let fp = horner(&d1, z);
                let fpp = horner(&d2, z);
                let fppp = horner(&d3, z);
                fppp / fp - 1.5 * (fpp / fp) * (fpp / fp)
            }
        })
    }
}

/// The predicted limits of the three discrete Schwarzians at `z`:
/// `S_1 = -i L_1/2 Re(w_2 w_3 S[f])`, `S_2 = i L_2/2 Re(w_1 w_3 S[f])`,
/// `S_3 = -i L_3/2 Re(w_1 w_2 S[f])`. Each is purely imaginary and they sum
/// to zero.
pub fn predicted_s(
    f: &AnalyticFunction,
    params: &LatticeParams,
    z: Complex,
) -> Result<[Complex; 3]> {
    let s = f.schwarzian(z)?;
    let w = |k: u8| params.omega(Dir::new(k));
    let l = |k: u8| params.length(Dir::new(k));
    // purely imaginary; the -1/2 makes the inversion below exact
    let i = Complex::new(0.0, 1.0);
    Ok([
        -0.5 * i * l(1) * (w(2) * w(3) * s).re,
        0.5 * i * l(2) * (w(1) * w(3) * s).re,
        -0.5 * i * l(3) * (w(1) * w(2) * s).re,
    ])
}

/// Recovers the smooth Schwarzian from the three limits:
/// `S[f] = 2((L2 w2 + L3 w3) S1 + (L1 w1 - L3 w3) S2 - (L1 w1 + L2 w2) S3)
///         / (3 L1 L2 L3 w1 w2 w3)`.
pub fn schwarzian_from_s(
    params: &LatticeParams,
    s1: Complex,
    s2: Complex,
    s3: Complex,
) -> Result<Complex> {
    let sum = s1 + s2 + s3;
    if sum.norm() > 1e-10 {
        return Err(Error::InconsistentS(sum));
    }
    let w = |k: u8| params.omega(Dir::new(k));
    let l = |k: u8| params.length(Dir::new(k));
    let num = (l(2) * w(2) + l(3) * w(3)) * s1 + (l(1) * w(1) - l(3) * w(3)) * s2
        - (l(1) * w(1) + l(2) * w(2)) * s3;
    Ok(2.0 * num / (3.0 * l(1) * l(2) * l(3) * w(1) * w(2) * w(3)))
}

/// The scaled cross-ratio deviation
/// `eps^{-2} (cr(f(a), f(a + eps(b-a)), f(a + eps(c-a)), f(a + eps(d-a)))
///   / cr(a,b,c,d) - 1)`,
/// which tends to `(a-c)(b-d) S[f](a) / 6` as `eps -> 0`.
pub fn cross_ratio_deformation(
    f: &AnalyticFunction,
    a: Complex,
    b: Complex,
    c: Complex,
    d: Complex,
    eps: f64,
) -> Result<Complex> {
    let pts = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if pts[i] == pts[j] {
                return Err(Error::CoincidentPoints);
            }
        }
    }
    let cr = |a: Complex, b: Complex, c: Complex, d: Complex| {
        (a - b) * (c - d) / ((b - c) * (d - a))
    };
    let fa = f.eval(a)?;
    let fb = f.eval(a + eps * (b - a))?;
    let fc = f.eval(a + eps * (c - a))?;
    let fd = f.eval(a + eps * (d - a))?;
    Ok((cr(fa, fb, fc, fd) / cr(a, b, c, d) - 1.0) / (eps * eps))
}
