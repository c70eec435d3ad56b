//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{FloatConst, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32`, `f64`).
///
/// Transcendental functions come from [`RealField`]; constants from
/// [`FloatConst`]. Conversions from literals go through [`Real::lit`].
pub trait Real: RealField + FloatConst + ToPrimitive + Copy + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into the scalar type.
    fn lit(x: f64) -> Self;

    /// Converts a count or index into the scalar type.
    fn from_count(k: usize) -> Self {
        Self::lit(k as f64)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {
    fn lit(x: f64) -> Self {
        x
    }
}

/// Complex scalar over `T`.
pub type C<T> = Complex<T>;

/// Dense complex matrix over `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub(crate) fn creal<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `e^{iθ}`.
pub(crate) fn cis<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub(crate) fn is_finite_c<T: Real>(v: C<T>) -> bool {
    let (re, im) = (v.re.as_f64(), v.im.as_f64());
    re.is_finite() && im.is_finite()
}

/// Hilbert–Schmidt (Frobenius) norm of a complex matrix.
pub fn hs_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, v| acc + v.norm_sqr())
        .sqrt()
}

/// Singular values in decreasing order, as square roots of the eigenvalues
/// of the smaller Gram matrix `M^†M` or `MM^†`.
///
/// nalgebra's complex SVD occasionally returns a wrong factorization (about
/// one input in 250 at these sizes); the Hermitian eigensolver does not.
/// Values below `√ε·σ_max` are only resolved to that level.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    if m.is_empty() {
        return Vec::new();
    }
    let gram = if m.nrows() >= m.ncols() { m.adjoint() * m } else { m * m.adjoint() };
    let mut sv: Vec<T> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&e| if e > T::zero() { e.sqrt() } else { T::zero() })
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Largest singular value.
pub fn op_norm<T: Real>(m: &CMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}
