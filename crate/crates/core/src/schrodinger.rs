//! The Heisenberg group law, the Schrödinger representations `π_λ`, and the
//! special Hermite functions `Φ_{αβ}^λ`.
//!
//! Convention: `π_λ(z,t)φ(ξ) = e^{iλt} e^{iλ(x·ξ + x·y/2)} φ(ξ + y)` for
//! `z = x + iy`. Matrices are indexed by a [`TruncationScheme`]; entry
//! `(β, α)` is `⟨π_λ(z)Φ_α^λ, Φ_β^λ⟩`.
//!
//! In one dimension `π_1(z)` is the displacement operator `exp(ζa† − ζ̄a)`
//! with `ζ = iz/√2`, so its matrix coefficients have the closed form
//! `⟨m|D(ζ)|n⟩ = √(n!/m!) ζ^{m−n} L_n^{(m−n)}(|ζ|²) e^{−|ζ|²/2}` for `m ≥ n`
//! (and the mirrored expression with `−ζ̄` for `m < n`). General `λ` reduces
//! to this by `π_λ(x + iy) ≅ π_1(√|λ|(sgn(λ)x + iy))` in the dilated basis.
//! The closed form is the production path; [`pi_matrix_quadrature`] is the
//! direct quadrature route kept as an oracle on `|z| ≤ 2`.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::foundations::{MultiIndex, TruncationScheme};
use crate::hermite::{scaled_basis_values, HermiteBasis};
use crate::scalar::{cis, creal, hs_norm, op_norm, singular_values, CMatrix, Real, C};

/// A point `(z, t)` of `H^n = C^n × R`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<T> {
    pub z: Vec<C<T>>,
    pub t: T,
}

impl<T: Real> GroupElement<T> {
    pub fn new(z: Vec<C<T>>, t: T) -> Self {
        Self { z, t }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![creal(T::zero()); n],
            t: T::zero(),
        }
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// `(z, t)^{-1} = (−z, −t)`.
    pub fn inverse(&self) -> Self {
        Self {
            z: self.z.iter().map(|&c| -c).collect(),
            t: -self.t,
        }
    }
}

/// `Im(z · w̄) = Σ_j Im(z_j conj(w_j))`.
pub fn im_dot<T: Real>(z: &[C<T>], w: &[C<T>]) -> T {
    z.iter()
        .zip(w)
        .fold(T::zero(), |acc, (a, b)| acc + (a * b.conj()).im)
}

/// `(z,t)(w,s) = (z + w, t + s + ½ Im(z·w̄))`.
pub fn group_mul<T: Real>(a: &GroupElement<T>, b: &GroupElement<T>) -> Result<GroupElement<T>> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(GroupElement {
        z: a.z.iter().zip(&b.z).map(|(x, y)| x + y).collect(),
        t: a.t + b.t + im_dot(&a.z, &b.z) / T::lit(2.0),
    })
}

/// Function on `R^n`.
pub type SpaceFn<T> = Arc<dyn Fn(&[T]) -> C<T> + Send + Sync>;

/// `π_λ(g)φ` as a new function on `R^n`.
pub fn pi_action<T: Real>(lambda: T, g: &GroupElement<T>, phi: SpaceFn<T>) -> Result<SpaceFn<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let g = g.clone();
    Ok(Arc::new(move |xi: &[T]| {
        let mut shifted = Vec::with_capacity(xi.len());
        let mut phase = lambda * g.t;
        for (j, &xj) in xi.iter().enumerate() {
            let (x, y) = (g.z[j].re, g.z[j].im);
            phase += lambda * (x * xj + x * y / T::lit(2.0));
            shifted.push(xj + y);
        }
        cis(phase) * phi(&shifted)
    }))
}

/// A truncated operator on `span{Φ_α^λ}`; rows and columns in scheme order.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real>(CMatrix<T>);

impl<T: Real> OperatorMatrix<T> {
    pub fn new(m: CMatrix<T>) -> Self {
        Self(m)
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::from_element(d, d, creal(T::zero())))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C<T> {
        self.0[(row, col)]
    }

    pub fn op_norm(&self) -> T {
        op_norm(&self.0)
    }

    pub fn hs_norm(&self) -> T {
        hs_norm(&self.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self(self.0.map(|v| v * c))
    }

    pub fn hs_distance(&self, other: &Self) -> T {
        hs_norm(&(&self.0 - &other.0))
    }

    /// Leading `k × k` block (the first `k` scheme positions).
    pub fn leading_block(&self, k: usize) -> Self {
        Self(self.0.view((0, 0), (k, k)).into_owned())
    }

    /// Number of singular values above `tol`.
    pub fn rank(&self, tol: T) -> usize {
        singular_values(&self.0).into_iter().filter(|&s| s > tol).count()
    }
}

impl<T: Real> Mul for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn mul(self, rhs: Self) -> OperatorMatrix<T> {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

impl<T: Real> Add for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn add(self, rhs: Self) -> OperatorMatrix<T> {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl<T: Real> Sub for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;
    fn sub(self, rhs: Self) -> OperatorMatrix<T> {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

/// `ζ` for one coordinate: `π_λ` on that axis acts as `D(ζ)` in the dilated basis.
fn displacement_parameter<T: Real>(lambda: T, z: C<T>) -> C<T> {
    let s = lambda.abs().sqrt();
    let x = if lambda < T::zero() { -z.re } else { z.re };
    let zp = C::new(s * x, s * z.im);
    // ζ = i z' / √2
    C::new(-zp.im, zp.re) / T::lit(2.0).sqrt()
}

/// `⟨row|D(ζ)|col⟩` in the Hermite basis.
fn displacement_entry<T: Real>(zeta: C<T>, row: usize, col: usize) -> C<T> {
    let r = zeta.norm_sqr();
    let (lo, k, base) = if row >= col {
        (col, row - col, zeta)
    } else {
        (row, col - row, -zeta.conj())
    };
    let kf = T::from_count(k);
    // L_lo^{(k)}(r)
    let mut l_prev = T::one();
    let mut l_cur = T::one() + kf - r;
    let lag = if lo == 0 {
        l_prev
    } else {
        for j in 1..lo {
            let jf = T::from_count(j);
            let next = ((T::lit(2.0) * jf + T::one() + kf - r) * l_cur - (jf + kf) * l_prev)
                / (jf + T::one());
            l_prev = l_cur;
            l_cur = next;
        }
        l_cur
    };
    // √(lo! / (lo + k)!)
    let mut ratio = T::one();
    for i in lo + 1..=lo + k {
        ratio /= T::from_count(i).sqrt();
    }
    let mut pow = creal(T::one());
    for _ in 0..k {
        pow *= base;
    }
    pow * (ratio * lag * (-r / T::lit(2.0)).exp())
}

/// All one-dimensional coefficients `⟨m|D(ζ)|n⟩`, `m, n ≤ nmax`.
fn displacement_matrix<T: Real>(zeta: C<T>, nmax: usize) -> CMatrix<T> {
    DMatrix::from_fn(nmax + 1, nmax + 1, |m, n| displacement_entry(zeta, m, n))
}

/// Truncated matrix of `π_λ(z, 0)` with entry `(β, α) = ⟨π_λ(z)Φ_α^λ, Φ_β^λ⟩`.
pub fn pi_matrix<T: Real>(lambda: T, z: &[C<T>], scheme: &TruncationScheme) -> Result<OperatorMatrix<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    if z.len() != scheme.n() {
        return Err(Error::DimensionMismatch {
            expected: scheme.n(),
            got: z.len(),
        });
    }
    let axes: Vec<CMatrix<T>> = z
        .iter()
        .map(|&zj| axis_matrix(lambda, zj, scheme.max_degree()))
        .collect();
    let refs: Vec<&CMatrix<T>> = axes.iter().collect();
    Ok(OperatorMatrix(assemble_tensor(&refs, scheme)))
}

/// One-axis factor of `π_λ`: `⟨m|π_λ(z_j)|k⟩` for `m, k ≤ nmax`.
pub(crate) fn axis_matrix<T: Real>(lambda: T, zj: C<T>, nmax: usize) -> CMatrix<T> {
    displacement_matrix(displacement_parameter(lambda, zj), nmax)
}

/// Scheme-indexed tensor product of one-axis factors.
pub(crate) fn assemble_tensor<T: Real>(axes: &[&CMatrix<T>], scheme: &TruncationScheme) -> CMatrix<T> {
    let d = scheme.dim();
    if axes.len() == 1 {
        return axes[0].clone();
    }
    let idx = scheme.indices();
    DMatrix::from_fn(d, d, |b, a| {
        idx[b]
            .entries()
            .iter()
            .zip(idx[a].entries())
            .zip(axes)
            .fold(creal(T::one()), |acc, ((&bj, &aj), m)| acc * m[(bj, aj)])
    })
}

/// Same matrix as [`pi_matrix`] by direct Gauss–Hermite quadrature in `ξ`,
/// evaluating `Φ_α^λ(ξ + y)` at the unshifted nodes of `basis`.
///
/// Accurate for `|z| ≲ 2`; the integrand's shift and oscillation outrun the
/// fixed rule further out.
pub fn pi_matrix_quadrature<T: Real>(z: &[C<T>], basis: &HermiteBasis<T>) -> Result<OperatorMatrix<T>> {
    let n = basis.n();
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    let lambda = basis.lambda();
    let d = basis.dim();
    let cache = basis.cached_values();
    let mut out = DMatrix::from_element(d, d, creal(T::zero()));
    let mut shifted = vec![T::zero(); n];
    for (k, (xi, w)) in basis.quadrature().iter().enumerate() {
        let mut phase = T::zero();
        for j in 0..n {
            let (x, y) = (z[j].re, z[j].im);
            phase += lambda * (x * xi[j] + x * y / T::lit(2.0));
            shifted[j] = xi[j] + y;
        }
        let factor = cis(phase) * w;
        let moved = scaled_basis_values(basis.scheme(), lambda, &shifted);
        for a in 0..d {
            let fa = factor * moved[a];
            for b in 0..d {
                out[(b, a)] += fa * cache[(b, k)];
            }
        }
    }
    Ok(OperatorMatrix(out))
}

/// `(2π)^{−n/2} |λ|^{n/2}`, the normalization making `{Φ_{αβ}^λ}` orthonormal in `L²(C^n)`.
pub fn special_hermite_normalization<T: Real>(n: usize, lambda: T) -> T {
    (lambda.abs() / T::two_pi()).sqrt().powi(n as i32)
}

/// `Φ_{αβ}^λ(z) = (2π)^{−n/2}|λ|^{n/2} ⟨π_λ(z)Φ_α^λ, Φ_β^λ⟩`.
pub fn special_hermite<T: Real>(lambda: T, alpha: &MultiIndex, beta: &MultiIndex, z: &[C<T>]) -> Result<C<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    if alpha.len() != z.len() || beta.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: alpha.len().max(beta.len()),
        });
    }
    let coeff = alpha
        .entries()
        .iter()
        .zip(beta.entries())
        .zip(z)
        .fold(creal(T::one()), |acc, ((&a, &b), &zj)| {
            acc * displacement_entry(displacement_parameter(lambda, zj), b, a)
        });
    Ok(coeff * special_hermite_normalization(z.len(), lambda))
}
