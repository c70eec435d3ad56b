//! Weyl transform `W_λ(f) = ∫_{C^n} f(z) π_λ(z) dz` on the truncated basis.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foundations::TruncationScheme;
use crate::grid::PhaseSpaceGrid;
use crate::scalar::{creal, CMatrix, Real, C};
use crate::schrodinger::{assemble_tensor, axis_matrix, special_hermite_normalization, OperatorMatrix};
use crate::twisted::{product_constant, Coefficients};

/// Nodes per parallel work unit; fixed so sums are reproducible bit for bit.
const CHUNK: usize = 256;

/// Box-rule Weyl transform with the one-axis factors of `π_λ` tabulated once.
///
/// Every grid node shares its per-axis coordinates with many others, so
/// `π_λ(z)` is assembled from `per_axis²` cached one-axis matrices.
#[derive(Debug, Clone)]
pub struct WeylQuadrature<T: Real> {
    scheme: TruncationScheme,
    lambda: T,
    grid: PhaseSpaceGrid<T>,
    axes: Vec<CMatrix<T>>,
}

impl<T: Real> WeylQuadrature<T> {
    pub fn new(scheme: &TruncationScheme, lambda: T, grid: &PhaseSpaceGrid<T>) -> Result<Self> {
        if lambda == T::zero() {
            return Err(Error::ZeroLambda);
        }
        if scheme.n() != grid.n() {
            return Err(Error::DimensionMismatch {
                expected: scheme.n(),
                got: grid.n(),
            });
        }
        let m = grid.per_axis();
        let axes = (0..m * m)
            .into_par_iter()
            .map(|k| {
                let z = C::new(grid.coordinate(k / m), grid.coordinate(k % m));
                axis_matrix(lambda, z, scheme.max_degree())
            })
            .collect();
        Ok(Self {
            scheme: scheme.clone(),
            lambda,
            grid: grid.clone(),
            axes,
        })
    }

    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn grid(&self) -> &PhaseSpaceGrid<T> {
        &self.grid
    }

    /// `π_λ(z_k)` at grid node `k`.
    pub fn pi_at(&self, k: usize) -> CMatrix<T> {
        let n = self.grid.n();
        let m = self.grid.per_axis();
        let dg = self.grid.digits(k);
        let refs: Vec<&CMatrix<T>> = (0..n).map(|r| &self.axes[dg[r] * m + dg[n + r]]).collect();
        assemble_tensor(&refs, &self.scheme)
    }

    /// `W_λ(f)` from samples of `f` at the grid nodes, in node order.
    pub fn apply_samples(&self, values: &[C<T>]) -> Result<OperatorMatrix<T>> {
        if values.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                got: values.len(),
            });
        }
        let d = self.scheme.dim();
        let weights = self.grid.weights();
        let partial: Vec<CMatrix<T>> = (0..values.len().div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = DMatrix::from_element(d, d, creal(T::zero()));
                for k in c * CHUNK..((c + 1) * CHUNK).min(values.len()) {
                    let v = values[k] * weights[k];
                    if v.re == T::zero() && v.im == T::zero() {
                        continue;
                    }
                    acc += self.pi_at(k) * v;
                }
                acc
            })
            .collect();
        let total = partial
            .into_iter()
            .fold(DMatrix::from_element(d, d, creal(T::zero())), |a, b| a + b);
        Ok(OperatorMatrix::new(total))
    }

    /// `W_λ(f)`; fails on the first non-finite sample.
    pub fn apply<F>(&self, f: F) -> Result<OperatorMatrix<T>>
    where
        F: Fn(&[C<T>]) -> C<T> + Sync,
    {
        let values = self.grid.sample(f)?;
        self.apply_samples(&values)
    }
}

/// `W_λ(f)` by the box rule on `grid`, entry `(β, α) = ⟨W_λ(f)Φ_α^λ, Φ_β^λ⟩`.
pub fn weyl_quadrature<T, F>(f: F, lambda: T, scheme: &TruncationScheme, grid: &PhaseSpaceGrid<T>) -> Result<OperatorMatrix<T>>
where
    T: Real,
    F: Fn(&[C<T>]) -> C<T> + Sync,
{
    WeylQuadrature::new(scheme, lambda, grid)?.apply(f)
}

/// `W_λ(f)` for `f` in coefficient form: `c·Aᵀ`, `c = (2π)^{n/2}|λ|^{−n/2}`.
pub fn weyl_spectral<T: Real>(coeffs: &Coefficients<T>) -> OperatorMatrix<T> {
    let c = product_constant(coeffs.n(), coeffs.lambda());
    OperatorMatrix::new(coeffs.matrix().transpose().map(|v| v * c))
}

/// Inverse of [`weyl_spectral`]: `A = κ·W_λ(f)ᵀ`, `κ = (2π)^{−n/2}|λ|^{n/2}`.
pub fn coefficients_from_weyl<T: Real>(w: &OperatorMatrix<T>, scheme: &TruncationScheme, lambda: T) -> Result<Coefficients<T>> {
    let kappa = special_hermite_normalization(scheme.n(), lambda);
    Coefficients::new(scheme.clone(), lambda, w.matrix().transpose().map(|v| v * kappa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schrodinger::pi_matrix;
    use crate::twisted::{conj_special_hermite, twist_convolve_spectral};

    fn grid1() -> PhaseSpaceGrid<f64> {
        PhaseSpaceGrid::new(1, 60, 10.0).unwrap()
    }

    #[test]
    fn cached_pi_matches_closed_form() {
        let scheme = TruncationScheme::new(2, 2);
        let grid = PhaseSpaceGrid::new(2, 5, 2.0).unwrap();
        let engine = WeylQuadrature::new(&scheme, -1.5, &grid).unwrap();
        for k in [0, 17, 311, grid.len() - 1] {
            let direct = pi_matrix(-1.5, &grid.points()[k], &scheme).unwrap();
            assert!((engine.pi_at(k) - direct.matrix()).norm() < 1e-14);
        }
    }

    #[test]
    fn rank_one_ground_state() {
        let scheme = TruncationScheme::new(1, 4);
        let f = conj_special_hermite(&scheme, 1.0, 0, 0);
        let w = weyl_quadrature(&*f, 1.0, &scheme, &grid1()).unwrap();
        let mut want = DMatrix::from_element(5, 5, creal(0.0));
        want[(0, 0)] = creal((2.0 * std::f64::consts::PI).sqrt());
        assert!((w.matrix() - want).norm() < 1e-8);
        assert_eq!(w.rank(1e-6), 1);
    }

    #[test]
    fn quadrature_agrees_with_spectral() {
        let scheme = TruncationScheme::new(1, 3);
        let m = DMatrix::from_fn(4, 4, |i, j| C::new(0.2 * i as f64 - 0.1, 0.3 * j as f64));
        for lambda in [1.0, -0.7, 2.0] {
            let a = Coefficients::new(scheme.clone(), lambda, m.clone()).unwrap();
            let wq = weyl_quadrature(&*a.to_closure(), lambda, &scheme, &grid1()).unwrap();
            let ws = weyl_spectral(&a);
            assert!(wq.hs_distance(&ws) < 1e-7 * ws.hs_norm(), "lambda {lambda}");
            let back = coefficients_from_weyl(&ws, &scheme, lambda).unwrap();
            assert!((back.matrix() - a.matrix()).camax() < 1e-13);
        }
    }

    #[test]
    fn homomorphism_and_adjoint_spectral() {
        let scheme = TruncationScheme::new(1, 3);
        let fa = DMatrix::from_fn(4, 4, |i, j| C::new((i + 2 * j) as f64 * 0.1, -0.05 * i as f64));
        let fb = DMatrix::from_fn(4, 4, |i, j| C::new(0.3 - 0.1 * j as f64, 0.07 * (i * j) as f64));
        let a = Coefficients::new(scheme.clone(), 1.3, fa).unwrap();
        let b = Coefficients::new(scheme.clone(), 1.3, fb).unwrap();
        let lhs = weyl_spectral(&twist_convolve_spectral(&a, &b).unwrap());
        let rhs = &weyl_spectral(&a) * &weyl_spectral(&b);
        assert!(lhs.hs_distance(&rhs) < 1e-12 * rhs.hs_norm());
        assert!(weyl_spectral(&a.involution()).hs_distance(&weyl_spectral(&a).adjoint()) < 1e-13);
    }

    #[test]
    fn l1_bound() {
        let scheme = TruncationScheme::new(1, 6);
        let grid = grid1();
        let f = |z: &[C<f64>]| C::new((-(z[0] - C::new(0.5, 0.0)).norm_sqr()).exp(), 0.0) * C::new(0.0, z[0].re).exp();
        let w = weyl_quadrature(f, 1.0, &scheme, &grid).unwrap();
        let l1 = grid.integrate(|z: &[C<f64>]| creal(f(z).norm())).unwrap().re;
        assert!(w.op_norm() <= l1 * (1.0 + 1e-9));
    }

    #[test]
    fn zero_function() {
        let scheme = TruncationScheme::new(1, 2);
        let w = weyl_quadrature(|_z: &[C<f64>]| creal(0.0), 1.0, &scheme, &grid1()).unwrap();
        assert_eq!(w.hs_norm(), 0.0);
        assert!(matches!(
            weyl_quadrature(|_z: &[C<f64>]| creal(0.0), 0.0, &scheme, &grid1()),
            Err(Error::ZeroLambda)
        ));
    }
}
