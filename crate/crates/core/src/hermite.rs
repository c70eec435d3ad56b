//! Normalized Hermite functions on `R^n` and their `λ`-dilations.
//!
//! `h_k(x) = (2^k k! √π)^{-1/2} H_k(x) e^{-x²/2}` is evaluated with the
//! normalized three-term recurrence
//! `h_{k+1} = x √(2/(k+1)) h_k − √(k/(k+1)) h_{k−1}`, which never forms the
//! factorials of the Rodrigues formula.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::foundations::{gauss_hermite_rule, tensor_rule, MultiIndex, QuadratureRule, TruncationScheme};
use crate::scalar::{creal, Real, C};

/// `[h_0(x), …, h_kmax(x)]`.
pub fn hermite_values<T: Real>(kmax: usize, x: T) -> Vec<T> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(T::one() / T::pi().sqrt().sqrt() * (-x * x / T::lit(2.0)).exp());
    if kmax >= 1 {
        out.push(T::lit(2.0).sqrt() * x * out[0]);
    }
    for k in 1..kmax {
        let kf = T::from_count(k);
        let next = x * (T::lit(2.0) / (kf + T::one())).sqrt() * out[k]
            - (kf / (kf + T::one())).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// The normalized Hermite function `h_k(x)`.
pub fn hermite_1d<T: Real>(k: usize, x: T) -> T {
    hermite_values(k, x)[k]
}

/// `Φ_α(x) = Π_j h_{α_j}(x_j)`.
pub fn phi_alpha<T: Real>(alpha: &MultiIndex, x: &[T]) -> Result<T> {
    if alpha.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: x.len(),
        });
    }
    Ok(alpha
        .entries()
        .iter()
        .zip(x)
        .fold(T::one(), |acc, (&k, &xj)| acc * hermite_1d(k, xj)))
}

/// `Φ_α^λ(x) = |λ|^{n/4} Φ_α(|λ|^{1/2} x)`, the L²-normalized dilation.
pub fn phi_alpha_scaled<T: Real>(alpha: &MultiIndex, lambda: T, x: &[T]) -> Result<T> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let s = lambda.abs().sqrt();
    let scaled: Vec<T> = x.iter().map(|&xj| xj * s).collect();
    let amp = s.sqrt().powi(x.len() as i32);
    Ok(amp * phi_alpha(alpha, &scaled)?)
}

/// All `Φ_α^λ(x)` for `α` in `scheme`, in scheme order.
pub fn scaled_basis_values<T: Real>(scheme: &TruncationScheme, lambda: T, x: &[T]) -> Vec<T> {
    let s = lambda.abs().sqrt();
    let amp = s.sqrt();
    let per_axis: Vec<Vec<T>> = x
        .iter()
        .map(|&xj| hermite_values(scheme.max_degree(), xj * s))
        .collect();
    scheme
        .indices()
        .iter()
        .map(|a| {
            a.entries()
                .iter()
                .zip(&per_axis)
                .fold(T::one(), |acc, (&k, vals)| acc * amp * vals[k])
        })
        .collect()
}

/// The truncated basis `{Φ_α^λ : |α| ≤ N}` together with a Gauss–Hermite rule
/// dilated to its width and the basis values at the rule's nodes.
#[derive(Debug, Clone)]
pub struct HermiteBasis<T> {
    n: usize,
    lambda: T,
    scheme: TruncationScheme,
    quad: QuadratureRule<T>,
    // D × node-count
    cache: DMatrix<T>,
}

impl<T: Real> HermiteBasis<T> {
    /// Builds the basis with `points` Gauss–Hermite nodes per axis.
    pub fn new(n: usize, lambda: T, max_degree: usize, points: usize) -> Result<Self> {
        if lambda == T::zero() {
            return Err(Error::ZeroLambda);
        }
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let scheme = TruncationScheme::new(n, max_degree);
        let quad = tensor_rule(&gauss_hermite_rule(points)?, n)?.dilate(T::one() / lambda.abs().sqrt());
        let nodes = quad.len();
        let mut cache = DMatrix::zeros(scheme.dim(), nodes);
        for (k, x) in quad.nodes().enumerate() {
            for (i, v) in scaled_basis_values(&scheme, lambda, x).into_iter().enumerate() {
                cache[(i, k)] = v;
            }
        }
        Ok(Self {
            n,
            lambda,
            scheme,
            quad,
            cache,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }

    pub fn dim(&self) -> usize {
        self.scheme.dim()
    }

    pub fn quadrature(&self) -> &QuadratureRule<T> {
        &self.quad
    }

    /// Basis values at the quadrature nodes (`D × node-count`).
    pub fn cached_values(&self) -> &DMatrix<T> {
        &self.cache
    }

    /// Gram matrix `∫ Φ_α^λ Φ_β^λ` under the cached rule.
    pub fn gram(&self) -> DMatrix<T> {
        let w = DVector::from_column_slice(self.quad.plain_weights());
        let weighted = DMatrix::from_fn(self.cache.nrows(), self.cache.ncols(), |i, k| {
            self.cache[(i, k)] * w[k]
        });
        weighted * self.cache.transpose()
    }

    /// Coefficients `c_α = ⟨f, Φ_α^λ⟩` by quadrature.
    pub fn expand<F>(&self, f: F) -> Result<DVector<C<T>>>
    where
        F: Fn(&[T]) -> C<T>,
    {
        let mut out = DVector::from_element(self.dim(), creal(T::zero()));
        for (k, (x, w)) in self.quad.iter().enumerate() {
            let v = f(x);
            if !crate::scalar::is_finite_c(v) {
                return Err(Error::NonFinite {
                    node: x.iter().map(|c| c.as_f64()).collect(),
                });
            }
            let vw = v * w;
            for i in 0..self.dim() {
                out[i] += vw * self.cache[(i, k)];
            }
        }
        Ok(out)
    }

    /// `Σ_α c_α Φ_α^λ(x)`.
    pub fn reconstruct(&self, coeffs: &DVector<C<T>>, x: &[T]) -> C<T> {
        scaled_basis_values(&self.scheme, self.lambda, x)
            .into_iter()
            .zip(coeffs.iter())
            .fold(creal(T::zero()), |acc, (b, &c)| acc + c * b)
    }
}

/// Coefficients of `f` in `basis`; the reconstruction is the orthogonal
/// projection of `f` onto the truncated span.
pub fn expand_in_hermite<T, F>(f: F, basis: &HermiteBasis<T>) -> Result<DVector<C<T>>>
where
    T: Real,
    F: Fn(&[T]) -> C<T>,
{
    basis.expand(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundations::integrate;

    const PI_M14: f64 = 0.751_125_544_464_942_5;

    #[test]
    fn closed_form_values() {
        assert!((hermite_1d(0, 0.0f64) - PI_M14).abs() < 1e-15);
        let want = 2f64.sqrt() * PI_M14 * (-0.5f64).exp();
        assert!((hermite_1d(1, 1.0f64) - want).abs() < 1e-15);
        assert!((want - 0.6442).abs() < 1e-4);
    }

    #[test]
    fn orthonormal_through_degree_eight() {
        let r = gauss_hermite_rule::<f64>(60).unwrap();
        for j in 0..=8 {
            for k in 0..=8 {
                let v = integrate(|x: &[f64]| creal(hermite_1d(j, x[0]) * hermite_1d(k, x[0])), &r)
                    .unwrap()
                    .re;
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12, "{j},{k}: {v}");
            }
        }
        let h0sq = integrate(|x: &[f64]| creal(hermite_1d(0, x[0]).powi(2)), &r).unwrap();
        assert!((h0sq.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn parity() {
        for k in 0..=12 {
            for i in 0..41 {
                let x = -5.0 + 0.25 * i as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((hermite_1d(k, -x) - sign * hermite_1d(k, x)).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn multi_dimensional_values() {
        let a = MultiIndex::new(vec![0, 0]);
        let v = phi_alpha(&a, &[0.0f64, 0.0]).unwrap();
        assert!((v - std::f64::consts::PI.powf(-0.5)).abs() < 1e-15);
        let b = MultiIndex::new(vec![1, 0]);
        assert_eq!(phi_alpha(&b, &[0.0f64, 3.7]).unwrap(), 0.0);
        assert!(phi_alpha(&b, &[0.0f64]).is_err());
    }

    #[test]
    fn scaled_values() {
        let a = MultiIndex::new(vec![0]);
        let v = phi_alpha_scaled(&a, 4.0f64, &[0.0]).unwrap();
        assert!((v - 4f64.powf(0.25) * PI_M14).abs() < 1e-15);
        assert!((v - 1.0622).abs() < 1e-4);
        let b = MultiIndex::new(vec![3]);
        for x in [-1.3f64, 0.2, 2.0] {
            assert_eq!(
                phi_alpha_scaled(&b, 1.0, &[x]).unwrap(),
                phi_alpha(&b, &[x]).unwrap()
            );
        }
        assert!(matches!(phi_alpha_scaled(&a, 0.0f64, &[0.0]), Err(Error::ZeroLambda)));
    }

    #[test]
    fn gram_identity_two_dimensions() {
        let basis = HermiteBasis::<f64>::new(2, 1.0, 3, 8).unwrap();
        let g = basis.gram();
        let d = g - DMatrix::identity(basis.dim(), basis.dim());
        assert!(d.amax() < 1e-11, "{}", d.amax());
    }

    #[test]
    fn gram_identity_scaled() {
        for lambda in [1.0f64, -1.0, 2.0, -2.0, 0.5] {
            let basis = HermiteBasis::<f64>::new(1, lambda, 6, 7).unwrap();
            let d = basis.gram() - DMatrix::identity(7, 7);
            assert!(d.amax() < 1e-10, "lambda {lambda}: {}", d.amax());
        }
    }

    #[test]
    fn independent_box_rule_confirms_scaled_orthonormality() {
        let box_rule = crate::foundations::uniform_rule::<f64>(1, 801, 12.0).unwrap();
        let scheme = TruncationScheme::new(1, 5);
        for lambda in [1.0f64, -1.0, 2.0, -2.0] {
            for (i, a) in scheme.indices().iter().enumerate() {
                for (j, b) in scheme.indices().iter().enumerate() {
                    let v = integrate(
                        |x: &[f64]| {
                            creal(
                                phi_alpha_scaled(a, lambda, x).unwrap()
                                    * phi_alpha_scaled(b, lambda, x).unwrap(),
                            )
                        },
                        &box_rule,
                    )
                    .unwrap()
                    .re;
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let basis = HermiteBasis::<f64>::new(1, 1.0, 6, 60).unwrap();
        let c = basis.expand(|_x: &[f64]| creal(0.0)).unwrap();
        assert!(c.iter().all(|v| v.norm() == 0.0));

        let beta = MultiIndex::new(vec![4]);
        let c = basis
            .expand(|x: &[f64]| creal(phi_alpha_scaled(&beta, 1.0, x).unwrap()))
            .unwrap();
        for (i, v) in c.iter().enumerate() {
            let want = if i == 4 { 1.0 } else { 0.0 };
            assert!((v - creal(want)).norm() < 1e-11);
        }

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = basis
            .expand(|x: &[f64]| creal((hermite_1d(0, x[0]) + hermite_1d(2, x[0])) * s))
            .unwrap();
        let mut want = DVector::from_element(7, creal(0.0));
        want[0] = creal(s);
        want[2] = creal(s);
        assert!((c - want).norm() < 1e-11);
    }

    #[test]
    fn projection_is_idempotent() {
        let basis = HermiteBasis::<f64>::new(1, 2.0, 6, 60).unwrap();
        let f = |x: &[f64]| C::new((-(x[0] - 0.3).powi(2)).exp(), x[0] * (-x[0] * x[0]).exp());
        let c1 = basis.expand(f).unwrap();
        let c2 = basis.expand(|x: &[f64]| basis.reconstruct(&c1, x)).unwrap();
        assert!((c1 - c2).norm() < 1e-11);
    }

    #[test]
    fn f32_recurrence_matches_f64() {
        for k in 0..8 {
            for x in [-2.0f64, -0.5, 0.0, 1.25, 3.0] {
                let a = hermite_1d(k, x as f32) as f64;
                let b = hermite_1d(k, x);
                assert!((a - b).abs() < 1e-6);
            }
        }
    }
}
