//! Group Fourier transform on the Heisenberg group `H^n = C^n × R`.
//!
//! `f^λ(z) = ∫ f(z, t) e^{iλt} dt` and `f̂(λ) = W_λ(f^λ)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foundations::{QuadratureRule, TruncationScheme};
use crate::grid::{non_finite, PhaseSpaceGrid};
use crate::scalar::{cis, creal, is_finite_c, Real, C};
use crate::schrodinger::{group_mul, pi_matrix, GroupElement, OperatorMatrix};
use crate::twisted::PointFn;
use crate::weyl::WeylQuadrature;

/// Function on `R`.
pub type LineFn<T> = Arc<dyn Fn(T) -> C<T> + Send + Sync>;

/// Function on `C^n × R`.
pub type GroupFn<T> = Arc<dyn Fn(&[C<T>], T) -> C<T> + Send + Sync>;

#[derive(Clone)]
pub enum Form<T: Real> {
    /// `f(z, t) = g(z) h(t)`.
    Separable { g: PointFn<T>, h: LineFn<T> },
    General(GroupFn<T>),
}

/// An integrable function on `H^n` together with the box it decays in.
#[derive(Clone)]
pub struct HeisenbergFunction<T: Real> {
    n: usize,
    form: Form<T>,
    z_half_width: T,
    t_half_width: T,
}

impl<T: Real> std::fmt::Debug for HeisenbergFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.form {
            Form::Separable { .. } => "Separable",
            Form::General(_) => "General",
        };
        write!(
            f,
            "HeisenbergFunction::{kind}(n={}, box={}, t={})",
            self.n,
            self.z_half_width.as_f64(),
            self.t_half_width.as_f64()
        )
    }
}

impl<T: Real> HeisenbergFunction<T> {
    pub fn separable<G, H>(n: usize, g: G, h: H) -> Self
    where
        G: Fn(&[C<T>]) -> C<T> + Send + Sync + 'static,
        H: Fn(T) -> C<T> + Send + Sync + 'static,
    {
        Self::from_form(n, Form::Separable { g: Arc::new(g), h: Arc::new(h) })
    }

    pub fn general<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[C<T>], T) -> C<T> + Send + Sync + 'static,
    {
        Self::from_form(n, Form::General(Arc::new(f)))
    }

    pub fn from_form(n: usize, form: Form<T>) -> Self {
        Self {
            n,
            form,
            z_half_width: T::lit(10.0),
            t_half_width: T::lit(8.0),
        }
    }

    /// Declares the region outside which `f` is negligible.
    pub fn with_decay(mut self, z_half_width: T, t_half_width: T) -> Self {
        self.z_half_width = z_half_width;
        self.t_half_width = t_half_width;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> &Form<T> {
        &self.form
    }

    pub fn decay_box(&self) -> (T, T) {
        (self.z_half_width, self.t_half_width)
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.form, Form::Separable { .. })
    }

    pub fn eval(&self, z: &[C<T>], t: T) -> C<T> {
        match &self.form {
            Form::Separable { g, h } => g(z) * h(t),
            Form::General(f) => f(z, t),
        }
    }

    /// The same function through the general path, for cross-checks.
    pub fn to_general(&self) -> Self {
        let me = self.clone();
        Self {
            form: Form::General(Arc::new(move |z: &[C<T>], t: T| me.eval(z, t))),
            ..self.clone()
        }
    }

    /// `f*(z, t) = conj f(−z, −t)`.
    pub fn involution(&self) -> Self {
        let form = match &self.form {
            Form::Separable { g, h } => {
                let (g, h) = (g.clone(), h.clone());
                Form::Separable {
                    g: Arc::new(move |z: &[C<T>]| {
                        let m: Vec<C<T>> = z.iter().map(|v| -v).collect();
                        g(&m).conj()
                    }),
                    h: Arc::new(move |t: T| h(-t).conj()),
                }
            }
            Form::General(f) => {
                let f = f.clone();
                Form::General(Arc::new(move |z: &[C<T>], t: T| {
                    let m: Vec<C<T>> = z.iter().map(|v| -v).collect();
                    f(&m, -t).conj()
                }))
            }
        };
        Self { form, ..self.clone() }
    }
}

/// `π_λ(z, t) = e^{iλt} π_λ(z, 0)` on the truncated basis.
pub fn group_pi_matrix<T: Real>(lambda: T, g: &GroupElement<T>, scheme: &TruncationScheme) -> Result<OperatorMatrix<T>> {
    Ok(pi_matrix(lambda, &g.z, scheme)?.scale(cis(lambda * g.t)))
}

/// `∫ h(t) e^{iλt} dt` on `rule`.
pub fn line_transform<T: Real>(h: &(dyn Fn(T) -> C<T> + Send + Sync), lambda: T, rule: &QuadratureRule<T>) -> Result<C<T>> {
    let mut acc = creal(T::zero());
    for (t, w) in rule.iter() {
        let v = h(t[0]);
        if !is_finite_c(v) {
            return Err(Error::NonFinite { node: vec![t[0].as_f64()] });
        }
        acc += v * cis(lambda * t[0]) * w;
    }
    Ok(acc)
}

/// The λ-slice `f^λ` as a closure; the `t` integral uses `rule`.
///
/// Non-finite values of `f` surface as NaN in the closure's output.
pub fn lambda_slice<T: Real>(f: &HeisenbergFunction<T>, lambda: T, rule: &QuadratureRule<T>) -> Result<PointFn<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    match &f.form {
        Form::Separable { g, h } => {
            let hat = line_transform(&**h, lambda, rule)?;
            let g = g.clone();
            Ok(Arc::new(move |z: &[C<T>]| g(z) * hat))
        }
        Form::General(func) => {
            let func = func.clone();
            let rule = rule.clone();
            Ok(Arc::new(move |z: &[C<T>]| {
                rule.iter()
                    .fold(creal(T::zero()), |acc, (t, w)| acc + func(z, t[0]) * cis(lambda * t[0]) * w)
            }))
        }
    }
}

/// `f̂(λ) = W_λ(f^λ)` with a prepared Weyl engine.
pub fn fourier_hat_with<T: Real>(engine: &WeylQuadrature<T>, f: &HeisenbergFunction<T>, rule: &QuadratureRule<T>) -> Result<OperatorMatrix<T>> {
    let slice = lambda_slice(f, engine.lambda(), rule)?;
    engine.apply(&*slice)
}

/// `f̂(λ)` truncated to `scheme`, `z`-integral on `grid`, `t`-integral on `rule`.
pub fn fourier_hat<T: Real>(
    f: &HeisenbergFunction<T>,
    lambda: T,
    scheme: &TruncationScheme,
    grid: &PhaseSpaceGrid<T>,
    rule: &QuadratureRule<T>,
) -> Result<OperatorMatrix<T>> {
    fourier_hat_with(&WeylQuadrature::new(scheme, lambda, grid)?, f, rule)
}

/// `(f ∗ g)(z, t) = ∫ f((z, t)(−w, −s)) g(w, s) dw ds` by the box rule in `w`
/// and `rule` in `s`.
pub fn convolve_group<T: Real>(
    f: &HeisenbergFunction<T>,
    g: &HeisenbergFunction<T>,
    at: &GroupElement<T>,
    grid: &PhaseSpaceGrid<T>,
    rule: &QuadratureRule<T>,
) -> Result<C<T>> {
    if at.n() != grid.n() || f.n != grid.n() || g.n != grid.n() {
        return Err(Error::DimensionMismatch {
            expected: grid.n(),
            got: at.n(),
        });
    }
    let parts: Vec<C<T>> = grid
        .points()
        .par_iter()
        .zip(grid.weights().par_iter())
        .map(|(w, &ww)| {
            let minus_w: Vec<C<T>> = w.iter().map(|v| -v).collect();
            // (z, t)(−w, 0); the −s shift is added to the centre below.
            let base = group_mul(at, &GroupElement::new(minus_w, T::zero()))?;
            let mut acc = creal(T::zero());
            for (s, ws) in rule.iter() {
                let gv = g.eval(w, s[0]);
                if gv.re == T::zero() && gv.im == T::zero() {
                    continue;
                }
                let v = f.eval(&base.z, base.t - s[0]) * gv;
                if !is_finite_c(v) {
                    return Err(non_finite(w));
                }
                acc += v * ws;
            }
            Ok(acc * ww)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(creal(T::zero()), |a, b| a + b))
}

/// `(f ∗ g)^λ` at every node of `grid`, from the group convolution tabulated
/// on `grid × rule`. Quadratic in the grid size; meant for coarse grids.
pub fn group_convolution_slice<T: Real>(
    f: &HeisenbergFunction<T>,
    g: &HeisenbergFunction<T>,
    lambda: T,
    grid: &PhaseSpaceGrid<T>,
    rule: &QuadratureRule<T>,
) -> Result<Vec<C<T>>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let ts: Vec<(T, T)> = rule.iter().map(|(t, w)| (t[0], w)).collect();
    grid.points()
        .par_iter()
        .map(|z| {
            let mut acc = creal(T::zero());
            for (w, &ww) in grid.points().iter().zip(grid.weights()) {
                let minus_w: Vec<C<T>> = w.iter().map(|v| -v).collect();
                let base = group_mul(&GroupElement::new(z.clone(), T::zero()), &GroupElement::new(minus_w, T::zero()))?;
                let gs: Vec<C<T>> = ts.iter().map(|&(s, ws)| g.eval(w, s) * ws).collect();
                // f(z − w, ·) along t; the z-factor of a separable f is evaluated once.
                let (scale, along): (C<T>, &dyn Fn(T) -> C<T>) = match &f.form {
                    Form::Separable { g: fz, h } => (fz(&base.z), &**h),
                    Form::General(func) => (creal(T::one()), &|t| func(&base.z, t)),
                };
                if scale.re == T::zero() && scale.im == T::zero() {
                    continue;
                }
                for &(t, wt) in &ts {
                    let mut inner = creal(T::zero());
                    for (&(s, _), &gv) in ts.iter().zip(&gs) {
                        inner += along(base.t + t - s) * gv;
                    }
                    let inner = inner * scale;
                    acc += inner * cis(lambda * t) * wt * ww;
                }
            }
            if is_finite_c(acc) {
                Ok(acc)
            } else {
                Err(non_finite(z))
            }
        })
        .collect()
}

/// `(R_{g0} f)(w, s) = f((w, s) g0)`.
pub fn right_translate<T: Real>(g0: &GroupElement<T>, f: &HeisenbergFunction<T>) -> HeisenbergFunction<T> {
    let g0 = g0.clone();
    let inner = f.clone();
    let n = f.n;
    let func = move |w: &[C<T>], s: T| match group_mul(&GroupElement::new(w.to_vec(), s), &g0) {
        Ok(p) => inner.eval(&p.z, p.t),
        Err(_) => creal(T::lit(f64::NAN)),
    };
    HeisenbergFunction {
        n,
        form: Form::General(Arc::new(func)),
        z_half_width: f.z_half_width,
        t_half_width: f.t_half_width,
    }
}

/// Discretized `dμ(λ) = (2π)^{−n−1}|λ|^n dλ` on a finite set of nonzero `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure<T> {
    n: usize,
    lambdas: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> SpectralMeasure<T> {
    /// Density of `dμ` at `λ`.
    pub fn density(n: usize, lambda: T) -> T {
        lambda.abs().powi(n as i32) / T::two_pi().powi(n as i32 + 1)
    }

    /// Trapezoid weights on an increasing grid of nonzero points.
    pub fn trapezoid(n: usize, lambdas: Vec<T>) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::InvalidArgument("spectral grid needs at least 2 points".into()));
        }
        if lambdas.iter().any(|&l| l == T::zero()) {
            return Err(Error::ZeroLambda);
        }
        if lambdas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidArgument("spectral grid must be strictly increasing".into()));
        }
        let k = lambdas.len();
        let weights = (0..k)
            .map(|i| {
                let left = if i > 0 { lambdas[i] - lambdas[i - 1] } else { T::zero() };
                let right = if i + 1 < k { lambdas[i + 1] - lambdas[i] } else { T::zero() };
                (left + right) / T::lit(2.0) * Self::density(n, lambdas[i])
            })
            .collect();
        Ok(Self { n, lambdas, weights })
    }

    /// `points` equally spaced nodes on `[−L, L]`; a node at `λ = 0` is
    /// dropped and the trapezoid bridges the gap it leaves.
    pub fn symmetric(n: usize, half_width: T, points: usize) -> Result<Self> {
        if points < 3 || half_width <= T::zero() {
            return Err(Error::InvalidArgument("spectral grid needs at least 3 points and half-width > 0".into()));
        }
        let h = T::lit(2.0) * half_width / T::from_count(points - 1);
        let lambdas = (0..points)
            .filter(|&i| 2 * i + 1 != points)
            .map(|i| -half_width + h * T::from_count(i))
            .collect();
        Self::trapezoid(n, lambdas)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// `|∫ ‖f̂(λ)‖²_HS dμ(λ) − ‖f‖²| / ‖f‖²` for separable `f`.
pub fn plancherel_defect<T: Real>(
    f: &HeisenbergFunction<T>,
    measure: &SpectralMeasure<T>,
    scheme: &TruncationScheme,
    grid: &PhaseSpaceGrid<T>,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let Form::Separable { g, h } = &f.form else {
        return Err(Error::InvalidArgument("plancherel_defect needs a separable function".into()));
    };
    if measure.n != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            got: measure.n,
        });
    }
    let gz = grid.integrate(|z: &[C<T>]| creal(g(z).norm_sqr()))?.re;
    let mut ht = T::zero();
    for (t, w) in rule.iter() {
        ht += h(t[0]).norm_sqr() * w;
    }
    let norm2 = gz * ht;
    if norm2 == T::zero() {
        return Ok(T::zero());
    }
    let mut spectral = T::zero();
    for (&lambda, &w) in measure.lambdas.iter().zip(&measure.weights) {
        let hat = fourier_hat(f, lambda, scheme, grid, rule)?;
        spectral += hat.hs_norm().powi(2) * w;
    }
    Ok((spectral - norm2).abs() / norm2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundations::uniform_rule;
    use crate::twisted::{conj_special_hermite, twist_convolve_grid};

    fn trule() -> QuadratureRule<f64> {
        uniform_rule(1, 161, 8.0).unwrap()
    }

    fn gauss(a: f64, centre: C<f64>, b: f64, t0: f64) -> HeisenbergFunction<f64> {
        HeisenbergFunction::separable(
            1,
            move |z: &[C<f64>]| creal((-a * (z[0] - centre).norm_sqr()).exp()),
            move |t: f64| creal((-b * (t - t0).powi(2)).exp()),
        )
    }

    #[test]
    fn slice_of_gaussian() {
        let f = gauss(0.5, C::new(0.0, 0.0), 1.0, 0.0);
        for lambda in [1.0f64, -2.5, 4.0] {
            let s = lambda_slice(&f, lambda, &trule()).unwrap();
            let general = lambda_slice(&f.to_general(), lambda, &trule()).unwrap();
            for z in [C::<f64>::new(0.1, 0.2), C::new(-1.0, 0.5)] {
                let want = (-0.5 * z.norm_sqr()).exp() * std::f64::consts::PI.sqrt() * (-lambda * lambda / 4.0).exp();
                assert!((s(&[z]) - creal(want)).norm() < 1e-8);
                assert!((general(&[z]) - s(&[z])).norm() < 1e-12);
            }
        }
        assert!(matches!(lambda_slice(&f, 0.0, &trule()), Err(Error::ZeroLambda)));
    }

    #[test]
    fn vanishing_slice_gives_zero_hat() {
        // ∫ e^{−t²}(1 − c t²) e^{iλt} dt = √π e^{−λ²/4}(1 − c(1/2 − λ²/4))
        let lambda0: f64 = 1.0;
        let m2 = 0.5 - lambda0 * lambda0 / 4.0;
        let c = 1.0 / m2;
        let f = HeisenbergFunction::separable(
            1,
            |z: &[C<f64>]| creal((-z[0].norm_sqr() / 4.0).exp()),
            move |t: f64| creal((-t * t).exp() * (1.0 - c * t * t)),
        );
        let scheme = TruncationScheme::new(1, 4);
        let grid = PhaseSpaceGrid::new(1, 40, 9.0).unwrap();
        let hat = fourier_hat(&f, lambda0, &scheme, &grid, &trule()).unwrap();
        assert!(hat.hs_norm() < 1e-10, "{}", hat.hs_norm());
    }

    #[test]
    fn central_translation_is_a_phase() {
        let f = gauss(0.25, C::new(0.2, -0.1), 1.0, 0.3);
        let scheme = TruncationScheme::new(1, 4);
        let grid = PhaseSpaceGrid::new(1, 40, 9.0).unwrap();
        let s = 0.7;
        let rf = right_translate(&GroupElement::new(vec![C::new(0.0, 0.0)], s), &f);
        let a = fourier_hat(&rf, 1.5, &scheme, &grid, &trule()).unwrap();
        let b = fourier_hat(&f, 1.5, &scheme, &grid, &trule()).unwrap().scale(cis(-1.5 * s));
        assert!(a.hs_distance(&b) < 1e-8 * b.hs_norm().max(1.0));
    }

    #[test]
    fn identity_translation() {
        let f = gauss(0.3, C::new(0.1, 0.0), 1.0, 0.0);
        let rf = right_translate(&GroupElement::identity(1), &f);
        for (z, t) in [(C::new(0.3, 0.4), 0.2), (C::new(-1.0, 0.0), -0.5)] {
            assert_eq!(rf.eval(&[z], t), f.eval(&[z], t));
        }
    }

    #[test]
    fn group_convolution_matches_twisted_slices() {
        let f = gauss(0.5, C::new(0.2, 0.0), 1.0, 0.1);
        let g = gauss(0.4, C::new(0.0, -0.3), 0.8, -0.2);
        let grid = PhaseSpaceGrid::new(1, 36, 7.0).unwrap();
        let rule = uniform_rule(1, 61, 6.0).unwrap();
        let lambda = 1.0;
        let fs = lambda_slice(&f, lambda, &rule).unwrap();
        let gs = lambda_slice(&g, lambda, &rule).unwrap();
        for z in [C::new(0.0, 0.0), C::new(0.5, -0.4)] {
            let direct: C<f64> = rule
                .iter()
                .map(|(t, w)| {
                    convolve_group(&f, &g, &GroupElement::new(vec![z], t[0]), &grid, &rule).unwrap() * cis(lambda * t[0]) * w
                })
                .sum();
            let twisted = twist_convolve_grid(&*fs, &*gs, lambda, &[z], &grid).unwrap();
            assert!((direct - twisted).norm() < 1e-6 * twisted.norm(), "{direct} {twisted}");
        }
    }

    #[test]
    fn plancherel_zero_and_measure_shape() {
        let m = SpectralMeasure::<f64>::symmetric(1, 8.0, 41).unwrap();
        assert_eq!(m.lambdas().len(), 40);
        assert!(m.lambdas().iter().all(|&l| l != 0.0));
        assert!(m.weights().iter().all(|&w| w > 0.0));
        assert!(SpectralMeasure::trapezoid(1, vec![-1.0, 0.0, 1.0]).is_err());
        let zero = HeisenbergFunction::separable(1, |_z: &[C<f64>]| creal(0.0), |_t: f64| creal(0.0));
        let scheme = TruncationScheme::new(1, 2);
        let grid = PhaseSpaceGrid::new(1, 20, 8.0).unwrap();
        assert_eq!(plancherel_defect(&zero, &m, &scheme, &grid, &trule()).unwrap(), 0.0);
    }

    #[test]
    fn hat_of_matched_gaussian_is_rank_one() {
        let scheme = TruncationScheme::new(1, 4);
        let g = conj_special_hermite(&scheme, 1.0, 0, 0);
        let f = HeisenbergFunction::separable(1, move |z: &[C<f64>]| g(z), |t: f64| creal((-t * t).exp()));
        let grid = PhaseSpaceGrid::new(1, 60, 10.0).unwrap();
        let hat = fourier_hat(&f, 1.0, &scheme, &grid, &trule()).unwrap();
        assert_eq!(hat.rank(1e-8), 1);
    }
}
