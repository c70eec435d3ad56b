//! `λ`-twisted convolution on `C^n`, twisted translations, and special
//! Hermite expansions.
//!
//! Coefficient convention: `A ↔ f = Σ_{α,β} A_{αβ} conj(Φ_{αβ}^λ)`, with
//! `A` indexed by scheme positions (row `α`, column `β`).
//!
//! Product rule: `conj Φ_{αβ} ∗_λ conj Φ_{μν} = c δ_{αν} conj Φ_{μβ}` with
//! `c = (2π)^{n/2}|λ|^{−n/2}` for the orthonormal family. Hence if
//! `f ↔ A` and `g ↔ B` then `f ∗_λ g ↔ c·(B·A)`; the order swap follows from
//! `(B A)_{μβ} = Σ_ν B_{μν} A_{νβ}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foundations::TruncationScheme;
use crate::grid::{non_finite, PhaseSpaceGrid};
use crate::scalar::{cis, creal, CMatrix, Real, C};
use crate::schrodinger::{im_dot, pi_matrix, special_hermite, special_hermite_normalization};

/// Function on `C^n`.
pub type PointFn<T> = Arc<dyn Fn(&[C<T>]) -> C<T> + Send + Sync>;

/// `c = (2π)^{n/2}|λ|^{−n/2}`: the product-rule constant, also the scale of
/// `W_λ(conj Φ_{μν}^λ)` on `Φ_μ^λ`.
pub fn product_constant<T: Real>(n: usize, lambda: T) -> T {
    T::one() / special_hermite_normalization(n, lambda)
}

/// A function on `C^n` in special-Hermite coefficient form.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients<T: Real> {
    scheme: TruncationScheme,
    lambda: T,
    matrix: CMatrix<T>,
}

impl<T: Real> Coefficients<T> {
    pub fn new(scheme: TruncationScheme, lambda: T, matrix: CMatrix<T>) -> Result<Self> {
        if lambda == T::zero() {
            return Err(Error::ZeroLambda);
        }
        let d = scheme.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { scheme, lambda, matrix })
    }

    pub fn zeros(scheme: TruncationScheme, lambda: T) -> Result<Self> {
        let d = scheme.dim();
        Self::new(scheme, lambda, DMatrix::from_element(d, d, creal(T::zero())))
    }

    /// The elementary matrix `E_{αβ}` (a single `conj Φ_{αβ}^λ`).
    pub fn unit(scheme: TruncationScheme, lambda: T, alpha: usize, beta: usize) -> Result<Self> {
        let mut c = Self::zeros(scheme, lambda)?;
        c.matrix[(alpha, beta)] = creal(T::one());
        Ok(c)
    }

    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.scheme.n()
    }

    /// `Σ A_{αβ} conj(Φ_{αβ}^λ(z))`.
    pub fn eval(&self, z: &[C<T>]) -> Result<C<T>> {
        // conj Φ_{αβ}(z) = κ conj(π(z)[β, α])
        let m = pi_matrix(self.lambda, z, &self.scheme)?;
        let kappa = special_hermite_normalization(self.n(), self.lambda);
        let d = self.scheme.dim();
        let mut acc = creal(T::zero());
        for a in 0..d {
            for b in 0..d {
                acc += self.matrix[(a, b)] * m.entry(b, a).conj();
            }
        }
        Ok(acc * kappa)
    }

    /// The reconstruction as a closure. Points of the wrong dimension evaluate to NaN.
    pub fn to_closure(&self) -> PointFn<T> {
        let me = self.clone();
        Arc::new(move |z: &[C<T>]| me.eval(z).unwrap_or_else(|_| creal(T::lit(f64::NAN))))
    }

    /// The involution `f*(z) = conj f(−z)` in coefficient form: `A ↦ A^†`.
    pub fn involution(&self) -> Self {
        Self {
            scheme: self.scheme.clone(),
            lambda: self.lambda,
            matrix: self.matrix.adjoint(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.scheme != other.scheme || self.lambda != other.lambda {
            return Err(Error::SchemeMismatch(format!(
                "N={} lambda={} vs N={} lambda={}",
                self.scheme.max_degree(),
                self.lambda.as_f64(),
                other.scheme.max_degree(),
                other.lambda.as_f64()
            )));
        }
        Ok(())
    }
}

/// A function on `C^n`, either evaluable anywhere or in coefficient form.
#[derive(Clone)]
pub enum PhaseSpaceFunction<T: Real> {
    Closure { n: usize, f: PointFn<T> },
    Coefficients(Coefficients<T>),
}

impl<T: Real> PhaseSpaceFunction<T> {
    pub fn closure<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[C<T>]) -> C<T> + Send + Sync + 'static,
    {
        Self::Closure { n, f: Arc::new(f) }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Closure { n, .. } => *n,
            Self::Coefficients(c) => c.n(),
        }
    }

    pub fn eval(&self, z: &[C<T>]) -> C<T> {
        match self {
            Self::Closure { f, .. } => f(z),
            Self::Coefficients(c) => c.eval(z).unwrap_or_else(|_| creal(T::lit(f64::NAN))),
        }
    }

    pub fn to_closure(&self) -> PointFn<T> {
        match self {
            Self::Closure { f, .. } => f.clone(),
            Self::Coefficients(c) => c.to_closure(),
        }
    }
}

impl<T: Real> std::fmt::Debug for PhaseSpaceFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Closure { n, .. } => write!(f, "PhaseSpaceFunction::Closure(n={n})"),
            Self::Coefficients(c) => write!(f, "PhaseSpaceFunction::Coefficients({c:?})"),
        }
    }
}

/// `conj(Φ_{αβ}^λ)` as a closure, indices given by scheme position.
pub fn conj_special_hermite<T: Real>(scheme: &TruncationScheme, lambda: T, alpha: usize, beta: usize) -> PointFn<T> {
    let a = scheme.multi_index(alpha).clone();
    let b = scheme.multi_index(beta).clone();
    Arc::new(move |z: &[C<T>]| {
        special_hermite(lambda, &a, &b, z)
            .map(|v| v.conj())
            .unwrap_or_else(|_| creal(T::lit(f64::NAN)))
    })
}

/// `(f ∗_λ g)(z) = ∫ f(z − w) g(w) e^{i(λ/2) Im(z·w̄)} dw` by the box rule in `w`.
///
/// The inputs must decay inside the box; that is the caller's responsibility.
pub fn twist_convolve_grid<T, F, G>(f: F, g: G, lambda: T, z: &[C<T>], grid: &PhaseSpaceGrid<T>) -> Result<C<T>>
where
    T: Real,
    F: Fn(&[C<T>]) -> C<T> + Sync,
    G: Fn(&[C<T>]) -> C<T> + Sync,
{
    if z.len() != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: z.len(),
        });
    }
    let half = lambda / T::lit(2.0);
    let terms: Vec<C<T>> = grid
        .points()
        .par_iter()
        .zip(grid.weights().par_iter())
        .map(|(w, &wt)| {
            let diff: Vec<C<T>> = z.iter().zip(w).map(|(a, b)| a - b).collect();
            let gv = g(w);
            let v = if gv.re == T::zero() && gv.im == T::zero() {
                gv
            } else {
                f(&diff) * gv * cis(half * im_dot(z, w))
            };
            if crate::scalar::is_finite_c(v) {
                Ok(v * wt)
            } else {
                Err(non_finite(w))
            }
        })
        .collect::<Result<_>>()?;
    Ok(terms.into_iter().fold(creal(T::zero()), |acc, v| acc + v))
}

/// `f ∗_λ g` in coefficient form: `c·(B·A)` with `c = (2π)^{n/2}|λ|^{−n/2}`.
pub fn twist_convolve_spectral<T: Real>(a: &Coefficients<T>, b: &Coefficients<T>) -> Result<Coefficients<T>> {
    a.check_compatible(b)?;
    let c = product_constant(a.n(), a.lambda);
    Ok(Coefficients {
        scheme: a.scheme.clone(),
        lambda: a.lambda,
        matrix: (&b.matrix * &a.matrix).map(|v| v * c),
    })
}

/// `τ_{z0}^λ f(w) = f(w − z0) e^{−i(λ/2) Im(w·z̄0)}`.
///
/// Under the Weyl transform `W_λ(τ_{z0}^λ f) = π_λ(z0) W_λ(f)` and
/// `W_λ(τ_{z0}^{−λ} f) = W_λ(f) π_λ(z0)`.
pub fn twisted_translate<T: Real>(lambda: T, z0: &[C<T>], f: PointFn<T>) -> PointFn<T> {
    let z0 = z0.to_vec();
    Arc::new(move |w: &[C<T>]| {
        let shifted: Vec<C<T>> = w.iter().zip(&z0).map(|(a, b)| a - b).collect();
        f(&shifted) * cis(-lambda / T::lit(2.0) * im_dot(w, &z0))
    })
}

/// `A_{αβ} = ⟨f, conj Φ_{αβ}^λ⟩_{L²(C^n)}` by the box rule.
pub fn special_hermite_expand<T, F>(f: F, scheme: &TruncationScheme, lambda: T, grid: &PhaseSpaceGrid<T>) -> Result<Coefficients<T>>
where
    T: Real,
    F: Fn(&[C<T>]) -> C<T> + Sync,
{
    let w = crate::weyl::weyl_quadrature(f, lambda, scheme, grid)?;
    crate::weyl::coefficients_from_weyl(&w, scheme, lambda)
}
