//! Exact complex linear algebra on single Fourier modes.
//!
//! Every operator here acts on the coefficient of one wave vector `k`:
//! the curl of a tensor potential, the incompatibility (`curl (curl B)^T`)
//! of a symmetric potential, the divergence of a stress coefficient, and the
//! fourth-order (Riemann-type) constructions that produce divergence-free
//! stress from a tensor with left and right minor skew symmetry.
//!
//! # Skew-basis convention
//!
//! A fourth-order tensor `X_ijkl` that is skew in `(i,j)` and in `(k,l)` is
//! stored as a 3x3 matrix `M` over axial indices,
//!
//! ```text
//! X_ijkl = sum_pq eps_ijp * M_pq * eps_klq
//! ```
//!
//! with `eps` the permutation symbol, so axial index 0 pairs with `(1,2)`,
//! 1 with `(2,0)` and 2 with `(0,1)` (zero-based). The inverse is
//! `M_pq = 1/4 sum eps_ijp X_ijkl eps_klq`. Major symmetry of `X`
//! (`X_ijkl = X_klij`) is exactly symmetry of `M`.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative Frobenius tolerance used for symmetry preconditions.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Angular wave vector (units of inverse length).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WaveVector {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl WaveVector {
    pub const ZERO: WaveVector = WaveVector {
        k1: 0.0,
        k2: 0.0,
        k3: 0.0,
    };

    pub fn new(k1: f64, k2: f64, k3: f64) -> Self {
        WaveVector { k1, k2, k3 }
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0 && self.k3 == 0.0
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.k1 * self.k1 + self.k2 * self.k2 + self.k3 * self.k3
    }

    /// `i k` as a complex vector.
    pub fn times_i(&self) -> ComplexVector3 {
        ComplexVector3([I * self.k1, I * self.k2, I * self.k3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexVector3(pub [C64; 3]);

impl ComplexVector3 {
    pub fn zero() -> Self {
        ComplexVector3([ZERO; 3])
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        ComplexVector3([v[0].into(), v[1].into(), v[2].into()])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bilinear cross product (no conjugation).
    pub fn cross(&self, other: &ComplexVector3) -> ComplexVector3 {
        let a = &self.0;
        let b = &other.0;
        ComplexVector3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }
}

/// 3x3 complex matrix; the coefficient of a second-order tensor field at
/// one wave vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexMatrix3(pub [[C64; 3]; 3]);

impl ComplexMatrix3 {
    pub fn zero() -> Self {
        ComplexMatrix3([[ZERO; 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(a: &[[f64; 3]; 3]) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a[i][j].into();
            }
        }
        m
    }

    pub fn real(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.0[i][j].re;
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i].conj();
            }
        }
        t
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul_vec(&self, v: &ComplexVector3) -> ComplexVector3 {
        let mut out = [ZERO; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.0[i][j] * v.0[j]).sum();
        }
        ComplexVector3(out)
    }

    /// `||M - M^T||_F / ||M||_F` (zero for the zero matrix).
    pub fn asymmetry(&self) -> f64 {
        let norm = self.frobenius();
        if norm == 0.0 {
            return 0.0;
        }
        (*self - self.transpose()).frobenius() / norm
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol
    }
}

impl Add for ComplexMatrix3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl Sub for ComplexMatrix3 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Neg for ComplexMatrix3 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for ComplexMatrix3 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

/// Fourth-order tensor with left and right minor skew symmetry, in the
/// axial-index representation documented at module level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SkewBasisMatrix(pub ComplexMatrix3);

/// Full 3x3x3x3 complex array, indexed `[i][j][k][l]`.
pub type FourthOrder = [[[[C64; 3]; 3]; 3]; 3];

/// Permutation symbol on zero-based indices.
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl SkewBasisMatrix {
    pub fn is_riemann(&self, rel_tol: f64) -> bool {
        self.0.is_symmetric(rel_tol)
    }

    /// Expands to the full fourth-order array.
    pub fn to_fourth_order(&self) -> FourthOrder {
        let mut x = [[[[ZERO; 3]; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut acc = ZERO;
                        for p in 0..3 {
                            let e1 = levi_civita(i, j, p);
                            if e1 == 0.0 {
                                continue;
                            }
                            for q in 0..3 {
                                let e2 = levi_civita(k, l, q);
                                if e2 != 0.0 {
                                    acc += self.0 .0[p][q] * (e1 * e2);
                                }
                            }
                        }
                        x[i][j][k][l] = acc;
                    }
                }
            }
        }
        x
    }

    /// Projects a fourth-order array onto the skew basis (exact for arrays
    /// that already carry both minor skew symmetries).
    pub fn from_fourth_order(x: &FourthOrder) -> Self {
        let mut m = ComplexMatrix3::zero();
        for p in 0..3 {
            for q in 0..3 {
                let mut acc = ZERO;
                for i in 0..3 {
                    for j in 0..3 {
                        let e1 = levi_civita(i, j, p);
                        if e1 == 0.0 {
                            continue;
                        }
                        for k in 0..3 {
                            for l in 0..3 {
                                let e2 = levi_civita(k, l, q);
                                if e2 != 0.0 {
                                    acc += x[i][j][k][l] * (e1 * e2);
                                }
                            }
                        }
                    }
                }
                m.0[p][q] = acc * 0.25;
            }
        }
        SkewBasisMatrix(m)
    }
}

/// `axt(i k)`, the matrix of `b -> i k x b`.
pub fn axial_tensor(k: WaveVector) -> ComplexMatrix3 {
    let WaveVector { k1, k2, k3 } = k;
    let m = [[0.0, -k3, k2], [k3, 0.0, -k1], [-k2, k1, 0.0]];
    ComplexMatrix3::from_real(&m).scale(I)
}

/// Stress coefficient of `P = curl A`: `A` itself on the zero mode, otherwise
/// `A (axt i k)^T`; row `i` of the result is `i k x a_i`.
pub fn curl_coefficient(a_hat: &ComplexMatrix3, k: WaveVector) -> ComplexMatrix3 {
    if k.is_zero() {
        return *a_hat;
    }
    *a_hat * axial_tensor(k).transpose()
}

/// Stress coefficient of `T = inc B = curl (curl B)^T` for symmetric `B`.
pub fn inc_coefficient(b_hat: &ComplexMatrix3, k: WaveVector) -> Result<ComplexMatrix3> {
    let asym = b_hat.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Precondition(format!(
            "inc potential must be symmetric (relative asymmetry {asym:e})"
        )));
    }
    if k.is_zero() {
        return Ok(*b_hat);
    }
    let axt = axial_tensor(k);
    Ok(axt * *b_hat * axt.transpose())
}

/// Divergence coefficient `P (i k)`. Undefined on the zero mode.
pub fn div_coefficient(p_hat: &ComplexMatrix3, k: WaveVector) -> Result<ComplexVector3> {
    if k.is_zero() {
        return Err(Error::ZeroMode);
    }
    Ok(div_coefficient_unchecked(p_hat, k))
}

#[inline]
pub(crate) fn div_coefficient_unchecked(p_hat: &ComplexMatrix3, k: WaveVector) -> ComplexVector3 {
    p_hat.mul_vec(&k.times_i())
}

/// Symmetric stress `a . T b = (a (x) ik) . K [b (x) ik]` from a Riemann
/// tensor `K` (symmetric in the skew basis). Reduces to
/// `axt(ik) M axt(ik)^T`.
pub fn riemann_stress_coefficient(
    k_hat: &SkewBasisMatrix,
    k: WaveVector,
) -> Result<ComplexMatrix3> {
    let asym = k_hat.0.asymmetry();
    if asym > SYMMETRY_TOL {
        return Err(Error::Precondition(format!(
            "Riemann tensor must have major symmetry (relative asymmetry {asym:e})"
        )));
    }
    let axt = axial_tensor(k);
    Ok(axt * k_hat.0 * axt.transpose())
}

/// General (non-symmetric) stress `a . P b = (a (x) ik) . S^T [b (x) ik]`
/// from a fourth-order tensor with both minor skew symmetries. Reduces to
/// `axt(ik) M^T axt(ik)^T`.
pub fn nonsym_stress_coefficient(s_hat: &SkewBasisMatrix, k: WaveVector) -> ComplexMatrix3 {
    let axt = axial_tensor(k);
    axt * s_hat.0.transpose() * axt.transpose()
}
