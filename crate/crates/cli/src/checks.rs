//! Numerical measurements behind every verification record. Each function
//! returns the measured residual; tolerances live with the callers.

use std::sync::Arc;

use heisenberg::factorizer::{
    check_relations, factorize, factorize_with, finiteness_check, perturb, random_unitary, reduce_group_to_twisted,
    rigidity_check, synthesize, synthesize_homomorphism, Decomposition, FactorizeOptions, HomomorphismSpec,
};
use heisenberg::foundations::{uniform_rule, QuadratureRule};
use heisenberg::fourier::{
    convolve_group, fourier_hat, fourier_hat_with, group_convolution_slice, group_pi_matrix, lambda_slice,
    plancherel_defect, right_translate, HeisenbergFunction, LineFn, SpectralMeasure,
};
use heisenberg::grid::PhaseSpaceGrid;
use heisenberg::hermite::HermiteBasis;
use heisenberg::scalar::hs_norm;
use heisenberg::schrodinger::{
    im_dot, pi_matrix, pi_matrix_quadrature, special_hermite_normalization, GroupElement, OperatorMatrix,
};
use heisenberg::twisted::{
    conj_special_hermite, product_constant, special_hermite_expand, twist_convolve_grid, twisted_translate,
    twist_convolve_spectral, Coefficients, PointFn,
};
use heisenberg::weyl::{weyl_spectral, WeylQuadrature};
use heisenberg::{CMatrix64, Complex64, Error, Result, TruncationScheme};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::RunConfig;

type C = Complex64;

/// Numerical parameters shared by the checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub degree: usize,
    pub quad_points: usize,
    pub box_half_width: f64,
    pub seed: u64,
}

impl From<&RunConfig> for Setup {
    fn from(c: &RunConfig) -> Self {
        Self {
            n: c.n,
            lambdas: c.lambdas.clone(),
            degree: c.degree(),
            quad_points: c.quad_points,
            box_half_width: c.box_half_width,
            seed: c.seed,
        }
    }
}

impl Default for Setup {
    fn default() -> Self {
        Self::from(&RunConfig::default())
    }
}

impl Setup {
    pub fn scheme(&self) -> TruncationScheme {
        TruncationScheme::new(self.n, self.degree)
    }

    pub fn grid(&self) -> Result<PhaseSpaceGrid<f64>> {
        PhaseSpaceGrid::new(self.n, self.quad_points, self.box_half_width)
    }

    /// A seeded generator private to one check.
    pub fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }
}

/// The trapezoid on `[−8, 8]` with 161 nodes used for the central variable.
pub fn central_rule() -> QuadratureRule<f64> {
    uniform_rule(1, 161, 8.0).expect("valid rule")
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C::new(re, im)
}

/// Points with `|z| ≤ radius`.
pub fn sample_points(n: usize, count: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<C>> {
    (0..count)
        .map(|_| {
            let z: Vec<C> = (0..n).map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let norm = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let r = radius * rng.random_range(0.0..1.0f64).sqrt();
            z.into_iter().map(|v| v * (r / norm.max(1e-300))).collect()
        })
        .collect()
}

/// The 3 × 3 lattice of sample points in the first coordinate.
pub fn lattice_points(n: usize) -> Vec<Vec<C>> {
    (0..9)
        .map(|i| {
            let mut z = vec![C::new(0.0, 0.0); n];
            z[0] = C::new(-0.8 + 0.8 * (i % 3) as f64, -0.6 + 0.6 * (i / 3) as f64);
            z
        })
        .collect()
}

fn random_coefficients(scheme: &TruncationScheme, lambda: f64, rng: &mut ChaCha8Rng) -> Result<Coefficients<f64>> {
    let d = scheme.dim();
    let scale = 1.0 / d as f64;
    let m = DMatrix::from_fn(d, d, |_, _| complex_normal(rng) * scale);
    Coefficients::new(scheme.clone(), lambda, m)
}

fn gaussian(a: f64, centre: Vec<C>) -> impl Fn(&[C]) -> C + Send + Sync + Clone + 'static {
    move |z: &[C]| {
        let r2: f64 = z.iter().zip(&centre).map(|(x, c)| (x - c).norm_sqr()).sum();
        C::new((-a * r2).exp(), 0.0)
    }
}

/// `e^{−a|z−c|²} · e^{−b(t−t0)²} e^{iωt}`.
pub fn separable_gaussian(n: usize, a: f64, centre: Vec<C>, b: f64, t0: f64, omega: f64) -> HeisenbergFunction<f64> {
    HeisenbergFunction::separable(n, gaussian(a, centre), move |t: f64| {
        C::from_polar((-b * (t - t0).powi(2)).exp(), omega * t)
    })
}

/// A Gaussian near the width matched to `λ`, with a small random centre.
pub fn random_near_matched(n: usize, lambda: f64, rng: &mut ChaCha8Rng) -> HeisenbergFunction<f64> {
    let a = lambda.abs() / 4.0 * rng.random_range(0.8..1.2);
    let centre = (0..n)
        .map(|_| C::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)))
        .collect();
    separable_gaussian(n, a, centre, rng.random_range(0.8..1.2), rng.random_range(-0.3..0.3), rng.random_range(-0.5..0.5))
}

fn max_abs_identity_defect(g: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}

// ---------------------------------------------------------------- basis

/// `max |⟨h_j, h_k⟩ − δ_{jk}|` for `k ≤ kmax` under the plain Gauss–Hermite rule.
pub fn hermite_gram_defect(kmax: usize, points: usize) -> Result<f64> {
    let basis = HermiteBasis::new(1, 1.0, kmax, points)?;
    Ok(max_abs_identity_defect(&basis.gram()))
}

/// Same for the dilated basis `Φ_α^λ` on `R^n`.
pub fn scaled_gram_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let basis = HermiteBasis::new(s.n, lambda, s.degree, s.quad_points)?;
    Ok(max_abs_identity_defect(&basis.gram()))
}

/// Expanding a random finite combination of `Φ_α^λ` returns its coefficients.
pub fn expansion_round_trip(s: &Setup, lambda: f64) -> Result<f64> {
    let basis = Arc::new(HermiteBasis::new(s.n, lambda, s.degree, s.quad_points)?);
    let mut rng = s.rng(1);
    let coeffs = DVector::from_fn(basis.dim(), |_, _| complex_normal(&mut rng));
    let b = basis.clone();
    let c = coeffs.clone();
    let back = basis.expand(move |x: &[f64]| b.reconstruct(&c, x))?;
    Ok((back - coeffs).amax_by_norm())
}

trait AmaxByNorm {
    fn amax_by_norm(&self) -> f64;
}

impl AmaxByNorm for DVector<C> {
    fn amax_by_norm(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

impl AmaxByNorm for CMatrix64 {
    fn amax_by_norm(&self) -> f64 {
        self.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

// ------------------------------------------------------- representation

/// `max_z ‖π closed form − π by Gauss–Hermite in ξ‖_HS`, `|z| ≤ 1`.
pub fn pi_closed_form_vs_quadrature(s: &Setup, lambda: f64) -> Result<f64> {
    let basis = HermiteBasis::new(s.n, lambda, s.degree, s.quad_points)?;
    let mut worst = 0.0f64;
    for z in sample_points(s.n, 5, 1.0, &mut s.rng(2)) {
        let a = pi_matrix(lambda, &z, basis.scheme())?;
        let b = pi_matrix_quadrature(&z, &basis)?;
        worst = worst.max(a.hs_distance(&b));
    }
    Ok(worst)
}

/// Truncated `π_λ(z)` depends on `z` only through `√|λ| z`, so leakage checks
/// sample that rescaled variable in the unit ball.
fn leakage_radius(lambda: f64) -> f64 {
    1.0f64.min(lambda.abs().powf(-0.5))
}

fn probe_block(scheme: &TruncationScheme) -> std::ops::Range<usize> {
    scheme.positions_up_to(2.min(scheme.max_degree()))
}

/// `max_z ‖(π^†π − I)‖_HS` on the probe block `|α|, |β| ≤ 2`, `√|λ||z| ≤ 1`.
pub fn unitarity_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let block = probe_block(&scheme);
    let mut worst = 0.0f64;
    for z in sample_points(s.n, 5, leakage_radius(lambda), &mut s.rng(3)) {
        let p = pi_matrix(lambda, &z, &scheme)?.into_matrix();
        let cols = p.columns(block.start, block.len());
        let k = block.len();
        worst = worst.max(hs_norm(&(cols.adjoint() * cols - DMatrix::identity(k, k))));
    }
    Ok(worst)
}

/// `max ‖π(z)π(w) − e^{i(λ/2)Im(z·w̄)}π(z + w)‖_HS` on the probe block, `√|λ||z|, √|λ||w| ≤ 1`.
pub fn representation_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let block = probe_block(&scheme);
    let pts = sample_points(s.n, 6, leakage_radius(lambda), &mut s.rng(4));
    let mut worst = 0.0f64;
    for pair in pts.chunks(2) {
        let (z, w) = (&pair[0], &pair[1]);
        let sum: Vec<C> = z.iter().zip(w).map(|(a, b)| a + b).collect();
        let lhs = &pi_matrix(lambda, z, &scheme)? * &pi_matrix(lambda, w, &scheme)?;
        let rhs = pi_matrix(lambda, &sum, &scheme)?.scale(C::from_polar(1.0, lambda / 2.0 * im_dot(z, w)));
        let diff = lhs.matrix() - rhs.matrix();
        let sub = diff.view((block.start, block.start), (block.len(), block.len()));
        worst = worst.max(sub.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(worst)
}

/// `max |⟨Φ_{αβ}^λ, Φ_{μν}^λ⟩ − δ|` over `|α|, |β| ≤ min(N, 4)` on the oracle box.
pub fn special_hermite_gram_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = TruncationScheme::new(s.n, s.degree.min(4));
    let grid = s.grid()?;
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let d = scheme.dim();
    let kappa = special_hermite_normalization(s.n, lambda);
    // Row k of `values`: Φ_{αβ}(z_k) = κ π(z_k)[β, α] for every (α, β).
    let mut gram = DMatrix::from_element(d * d, d * d, C::new(0.0, 0.0));
    for (k, &w) in grid.weights().iter().enumerate() {
        let p = engine.pi_at(k);
        let v = DVector::from_fn(d * d, |i, _| p[(i % d, i / d)] * kappa);
        gram += &v * v.adjoint() * C::new(w, 0.0);
    }
    let mut worst = 0.0f64;
    for i in 0..d * d {
        for j in 0..d * d {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - C::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}

// -------------------------------------------------------------- twisted

/// Grid twisted convolution of `conj Φ` pairs against the product rule at
/// the 3 × 3 sample lattice, all indices of degree ≤ 1.
///
/// Returns `(relative error over nonzero cases, zero-case magnitude / c·κ)`.
pub fn product_rule_defects(s: &Setup, lambda: f64) -> Result<(f64, f64)> {
    let scheme = TruncationScheme::new(s.n, 1);
    let grid = s.grid()?;
    let d = scheme.dim();
    let c = product_constant(s.n, lambda);
    let scale = c * special_hermite_normalization(s.n, lambda);
    let pts = lattice_points(s.n);
    let funcs: Vec<PointFn<f64>> = (0..d * d).map(|k| conj_special_hermite(&scheme, lambda, k / d, k % d)).collect();
    let (mut rel, mut zero) = (0.0f64, 0.0f64);
    for (i, f) in funcs.iter().enumerate() {
        let (alpha, beta) = (i / d, i % d);
        for (j, g) in funcs.iter().enumerate() {
            let (mu, nu) = (j / d, j % d);
            let mut err = 0.0f64;
            let mut size = 0.0f64;
            for z in &pts {
                let v = twist_convolve_grid(&**f, &**g, lambda, z, &grid)?;
                let want = if alpha == nu {
                    funcs[mu * d + beta](z) * c
                } else {
                    C::new(0.0, 0.0)
                };
                err = err.max((v - want).norm());
                size = size.max(want.norm());
            }
            if alpha == nu {
                rel = rel.max(err / size);
            } else {
                zero = zero.max(err / scale);
            }
        }
    }
    Ok((rel, zero))
}

/// `‖f ∗_λ g − g ∗_λ f‖ / ‖f ∗_λ g‖` at one point, for `conj Φ_{01}`, `conj Φ_{10}`.
pub fn noncommutativity(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = TruncationScheme::new(s.n, 1);
    let grid = s.grid()?;
    let f = conj_special_hermite(&scheme, lambda, 0, 1);
    let g = conj_special_hermite(&scheme, lambda, 1, 0);
    let mut z = vec![C::new(0.0, 0.0); s.n];
    z[0] = C::new(0.4, -0.3);
    let fg = twist_convolve_grid(&*f, &*g, lambda, &z, &grid)?;
    let gf = twist_convolve_grid(&*g, &*f, lambda, &z, &grid)?;
    Ok((fg - gf).norm() / fg.norm())
}

/// `max(‖W(τ^λ_{z0} f) − π(z0)W(f)‖, ‖W(τ^{−λ}_{z0} f) − W(f)π(z0)‖) / ‖W(f)‖`
/// for the matched Gaussian, `|z0| ≤ 1`.
pub fn twisted_translation_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let f: PointFn<f64> = Arc::new(gaussian(lambda.abs() / 4.0, vec![C::new(0.0, 0.0); s.n]));
    let wf = engine.apply(&*f)?;
    let mut worst = 0.0f64;
    for z0 in sample_points(s.n, 3, 1.0, &mut s.rng(5)) {
        let p = pi_matrix(lambda, &z0, &scheme)?;
        let left = engine.apply(&*twisted_translate(lambda, &z0, f.clone()))?;
        let right = engine.apply(&*twisted_translate(-lambda, &z0, f.clone()))?;
        worst = worst.max(left.hs_distance(&(&p * &wf)));
        worst = worst.max(right.hs_distance(&(&wf * &p)));
    }
    Ok(worst / wf.hs_norm())
}

/// `max |expand(reconstruct(A)) − A|` for a random coefficient matrix.
pub fn coefficient_round_trip(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let a = random_coefficients(&scheme, lambda, &mut s.rng(6))?;
    let back = special_hermite_expand(&*a.to_closure(), &scheme, lambda, &grid)?;
    Ok((back.matrix() - a.matrix()).amax_by_norm())
}

// ----------------------------------------------------------------- weyl

/// Residuals of `W(f ∗_λ g) = W(f)W(g)` and `W(f*) = W(f)^†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarHomomorphism {
    pub product_quadrature: f64,
    pub adjoint_quadrature: f64,
    pub product_spectral: f64,
    pub adjoint_spectral: f64,
}

/// Both identities for random coefficient functions, relative to the
/// natural scale (`‖W(f)‖‖W(g)‖`, `‖W(f)‖`).
pub fn star_homomorphism(s: &Setup, lambda: f64) -> Result<StarHomomorphism> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let mut rng = s.rng(7);
    let a = random_coefficients(&scheme, lambda, &mut rng)?;
    let b = random_coefficients(&scheme, lambda, &mut rng)?;
    let (fa, fb) = (a.to_closure(), b.to_closure());

    let wa = engine.apply(&*fa)?;
    let wb = engine.apply(&*fb)?;
    let conv = grid.twisted_convolution_values(&*fa, &*fb, lambda)?;
    let wab = engine.apply_samples(&conv)?;
    let product_quadrature = wab.hs_distance(&(&wa * &wb)) / (wa.hs_norm() * wb.hs_norm());
    let fa2 = fa.clone();
    let star = move |z: &[C]| {
        let m: Vec<C> = z.iter().map(|v| -v).collect();
        fa2(&m).conj()
    };
    let adjoint_quadrature = engine.apply(star)?.hs_distance(&wa.adjoint()) / wa.hs_norm();

    let sa = weyl_spectral(&a);
    let sb = weyl_spectral(&b);
    let product_spectral =
        weyl_spectral(&twist_convolve_spectral(&a, &b)?).hs_distance(&(&sa * &sb)) / (sa.hs_norm() * sb.hs_norm());
    let adjoint_spectral = weyl_spectral(&a.involution()).hs_distance(&sa.adjoint()) / sa.hs_norm();
    Ok(StarHomomorphism {
        product_quadrature,
        adjoint_quadrature,
        product_spectral,
        adjoint_spectral,
    })
}

/// `‖W(conj Φ_{00}) − (2π)^{n/2}|λ|^{−n/2} e_0 e_0^†‖_HS` by quadrature.
pub fn rank_one_defect(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let f = conj_special_hermite(&scheme, lambda, 0, 0);
    let w = WeylQuadrature::new(&scheme, lambda, &grid)?.apply(&*f)?;
    let d = scheme.dim();
    let mut want = DMatrix::from_element(d, d, C::new(0.0, 0.0));
    want[(0, 0)] = C::new(product_constant(s.n, lambda), 0.0);
    Ok(w.hs_distance(&OperatorMatrix::new(want)))
}

/// `‖W(f)‖_op − ‖f‖_1` for a random coefficient function.
pub fn weyl_norm_excess(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let a = random_coefficients(&scheme, lambda, &mut s.rng(8))?;
    let f = a.to_closure();
    let w = WeylQuadrature::new(&scheme, lambda, &grid)?.apply(&*f)?;
    let l1 = grid.integrate(|z: &[C]| C::new(f(z).norm(), 0.0))?.re;
    Ok(w.op_norm() - l1)
}

// -------------------------------------------------------------- fourier

/// `max |f^λ(z) − g(z)√π e^{−λ²/4}|` for `h(t) = e^{−t²}`.
pub fn slice_closed_form(s: &Setup, lambda: f64) -> Result<f64> {
    let g = gaussian(0.5, vec![C::new(0.0, 0.0); s.n]);
    let f = HeisenbergFunction::separable(s.n, g.clone(), |t: f64| C::new((-t * t).exp(), 0.0));
    let rule = central_rule();
    let fast = lambda_slice(&f, lambda, &rule)?;
    let slow = lambda_slice(&f.to_general(), lambda, &rule)?;
    let factor = std::f64::consts::PI.sqrt() * (-lambda * lambda / 4.0).exp();
    let mut worst = 0.0f64;
    for z in lattice_points(s.n) {
        let want = g(&z) * factor;
        worst = worst.max((fast(&z) - want).norm()).max((slow(&z) - want).norm());
    }
    Ok(worst)
}

/// Coarser rules for the quadratically expensive group-convolution checks.
fn convolution_rules(n: usize) -> Result<(PhaseSpaceGrid<f64>, QuadratureRule<f64>)> {
    Ok((PhaseSpaceGrid::new(n, 36, 7.0)?, uniform_rule(1, 61, 6.0)?))
}

/// `max_z |(f ∗ g)^λ(z) − (f^λ ∗_λ g^λ)(z)| / max_z |f^λ ∗_λ g^λ|` on the 3 × 3 lattice.
pub fn slice_exchange(s: &Setup, lambda: f64) -> Result<f64> {
    let (grid, rule) = convolution_rules(s.n)?;
    let mut rng = s.rng(9);
    let f = random_near_matched(s.n, 2.0, &mut rng);
    let g = random_near_matched(s.n, 1.6, &mut rng);
    let fs = lambda_slice(&f, lambda, &rule)?;
    let gs = lambda_slice(&g, lambda, &rule)?;
    let (mut err, mut size) = (0.0f64, 0.0f64);
    for z in lattice_points(s.n) {
        let mut direct = C::new(0.0, 0.0);
        for (t, w) in rule.iter() {
            let v = convolve_group(&f, &g, &GroupElement::new(z.clone(), t[0]), &grid, &rule)?;
            direct += v * C::from_polar(w, lambda * t[0]);
        }
        let twisted = twist_convolve_grid(&*fs, &*gs, lambda, &z, &grid)?;
        err = err.max((direct - twisted).norm());
        size = size.max(twisted.norm());
    }
    Ok(err / size)
}

/// `‖(f*)^(λ) − f̂(λ)^†‖_HS / ‖f̂(λ)‖_HS`.
pub fn fourier_involution(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let rule = central_rule();
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let f = random_near_matched(s.n, lambda, &mut s.rng(10));
    let hat = fourier_hat_with(&engine, &f, &rule)?;
    let star = fourier_hat_with(&engine, &f.involution(), &rule)?;
    Ok(star.hs_distance(&hat.adjoint()) / hat.hs_norm())
}

/// `‖(f ∗ g)^(λ) − f̂(λ)ĝ(λ)‖_HS / (‖f̂‖_HS ‖ĝ‖_HS)`, with `f ∗ g` tabulated
/// by direct group convolution.
pub fn fourier_product(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = PhaseSpaceGrid::new(s.n, 24, 6.0)?;
    let rule = uniform_rule(1, 41, 8.0)?;
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let mut rng = s.rng(11);
    let f = random_near_matched(s.n, lambda, &mut rng);
    let g = random_near_matched(s.n, lambda, &mut rng);
    let fh = fourier_hat_with(&engine, &f, &rule)?;
    let gh = fourier_hat_with(&engine, &g, &rule)?;
    let conv = group_convolution_slice(&f, &g, lambda, &grid, &rule)?;
    let lhs = engine.apply_samples(&conv)?;
    Ok(lhs.hs_distance(&(&fh * &gh)) / (fh.hs_norm() * gh.hs_norm()))
}

/// `max_{g0} ‖(R_{g0} f)^(λ) − f̂(λ)π_λ(g0)^†‖_HS / ‖f̂(λ)‖_HS`, `|z0| ≤ 1`.
pub fn fourier_right_translation(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let rule = central_rule();
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let mut rng = s.rng(12);
    let f = random_near_matched(s.n, lambda, &mut rng);
    let hat = fourier_hat_with(&engine, &f, &rule)?;
    let mut worst = 0.0f64;
    for z0 in sample_points(s.n, 3, 1.0, &mut rng) {
        let g0 = GroupElement::new(z0, rng.random_range(-0.5..0.5));
        let moved = fourier_hat_with(&engine, &right_translate(&g0, &f), &rule)?;
        let want = &hat * &group_pi_matrix(lambda, &g0, &scheme)?.adjoint();
        worst = worst.max(moved.hs_distance(&want));
    }
    Ok(worst / hat.hs_norm())
}

/// `‖(R_{(0,s)} f)^(λ) − e^{−iλs} f̂(λ)‖_HS / ‖f̂(λ)‖_HS`.
pub fn fourier_central_translation(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let rule = central_rule();
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let f = random_near_matched(s.n, lambda, &mut s.rng(13));
    let shift = 0.7;
    let g0 = GroupElement::new(vec![C::new(0.0, 0.0); s.n], shift);
    let hat = fourier_hat_with(&engine, &f, &rule)?;
    let moved = fourier_hat_with(&engine, &right_translate(&g0, &f), &rule)?;
    Ok(moved.hs_distance(&hat.scale(C::from_polar(1.0, -lambda * shift))) / hat.hs_norm())
}

/// `max (‖f̂(λ)‖_op − ‖f‖_1)` over five random separable Gaussians.
pub fn fourier_norm_excess(s: &Setup, lambda: f64) -> Result<f64> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let rule = central_rule();
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let mut rng = s.rng(14);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let a = rng.random_range(0.1..1.0);
        let centre = (0..s.n)
            .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let f = separable_gaussian(s.n, a, centre, rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0), 0.0);
        let heisenberg::fourier::Form::Separable { g, h } = f.form() else {
            unreachable!("constructed separable")
        };
        let gl1 = grid.integrate(|z: &[C]| C::new(g(z).norm(), 0.0))?.re;
        let hl1: f64 = rule.iter().map(|(t, w)| h(t[0]).norm() * w).sum();
        let hat = fourier_hat_with(&engine, &f, &rule)?;
        worst = worst.max(hat.op_norm() - gl1 * hl1);
    }
    Ok(worst)
}

/// `‖f̂(λ0)‖_HS` for `h(t) = e^{−t²}(1 − c t²)` with the `c` that makes `ĥ(λ0) = 0`.
pub fn fourier_vanishing_slice(s: &Setup, lambda: f64) -> Result<f64> {
    let m2 = 0.5 - lambda * lambda / 4.0;
    if m2 == 0.0 {
        return Err(Error::InvalidArgument("no such c at |lambda| = sqrt 2".into()));
    }
    let c = 1.0 / m2;
    let f = HeisenbergFunction::separable(s.n, gaussian(lambda.abs() / 4.0, vec![C::new(0.0, 0.0); s.n]), move |t: f64| {
        C::new((-t * t).exp() * (1.0 - c * t * t), 0.0)
    });
    Ok(fourier_hat(&f, lambda, &s.scheme(), &s.grid()?, &central_rule())?.hs_norm())
}

/// The Plancherel defect for `e^{−|z|²/4}e^{−t²}` at `n = 1`.
pub fn plancherel(degree: usize, lambda_points: usize, box_points: usize, box_half_width: f64) -> Result<f64> {
    let f = separable_gaussian(1, 0.25, vec![C::new(0.0, 0.0)], 1.0, 0.0, 0.0);
    let measure = SpectralMeasure::symmetric(1, 8.0, lambda_points)?;
    let grid = PhaseSpaceGrid::new(1, box_points, box_half_width)?;
    plancherel_defect(&f, &measure, &TruncationScheme::new(1, degree), &grid, &central_rule())
}

// ----------------------------------------------------------- factorizer

fn unitaries(count: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<CMatrix64> {
    (0..count).map(|_| random_unitary(d, rng)).collect()
}

/// Worst-case outcome of synthesize → factorize over a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RoundTrip {
    pub cases: usize,
    pub count_mismatches: usize,
    pub orthonormality: f64,
    pub intertwining: f64,
    pub annihilation: f64,
}

/// Every `(m, r) ∈ {1,2,3} × {0,1,5}`, `seeds` seeds each, at each degree in `degrees`.
pub fn factorizer_round_trip(s: &Setup, degrees: &[usize], seeds: u64) -> Result<RoundTrip> {
    let mut out = RoundTrip::default();
    let lambda = s.lambdas[0];
    for &degree in degrees {
        let scheme = TruncationScheme::new(s.n, degree);
        for m in 1..=3 {
            for r in [0, 1, 5] {
                for k in 0..seeds {
                    let mut rng = s.rng(1000 + 100 * degree as u64 + 10 * m as u64 + r as u64 + 7919 * k);
                    let us = unitaries(m, scheme.dim(), &mut rng);
                    let spec = synthesize_homomorphism(lambda, &scheme, &us, r, rng.random())?;
                    let dec = factorize(&spec, 1e-8)?;
                    out.cases += 1;
                    if dec.block_count() != m || dec.residual_dim() != r {
                        out.count_mismatches += 1;
                    }
                    let dg = &dec.diagnostics;
                    out.orthonormality = out.orthonormality.max(dg.orthonormality_defect).max(dg.raw_orthonormality_defect);
                    out.intertwining = out.intertwining.max(dg.intertwining_residual);
                    out.annihilation = out.annihilation.max(dg.annihilation_residual);
                }
            }
        }
    }
    Ok(out)
}

fn hidden_spec(s: &Setup, m: usize, r: usize, salt: u64) -> Result<HomomorphismSpec<f64>> {
    let scheme = s.scheme();
    let mut rng = s.rng(salt);
    let us = unitaries(m, scheme.dim(), &mut rng);
    synthesize_homomorphism(s.lambdas[0], &scheme, &us, r, rng.random())
}

/// `max(‖P_blocks − P'_blocks‖_HS, ‖P_res − P'_res‖_HS)` for two rotated bases of `R(Q_00)`.
pub fn basis_choice_independence(s: &Setup) -> Result<f64> {
    let spec = hidden_spec(s, 2, 3, 20)?;
    let run = |seed| {
        factorize_with(
            &spec,
            &FactorizeOptions {
                rotation_seed: Some(seed),
                ..Default::default()
            },
        )
    };
    let a = run(1)?;
    let b = run(2)?;
    Ok(hs_norm(&(a.block_projector() - b.block_projector())).max(hs_norm(&(a.residual_projector() - b.residual_projector()))))
}

/// Max relation residual of an exact synthesized spec.
pub fn exact_relation_residual(s: &Setup) -> Result<f64> {
    Ok(check_relations(&hidden_spec(s, 2, 3, 21)?, 1e-12).max_residual())
}

/// `(max residual, flagged)` for a small spec with `ε = 1e-3` entrywise noise.
pub fn perturbed_relations(s: &Setup) -> Result<(f64, bool)> {
    let scheme = TruncationScheme::new(s.n, 2);
    let d = scheme.dim();
    let spec = synthesize_homomorphism(s.lambdas[0], &scheme, &[DMatrix::identity(d, d)], 0, s.seed)?;
    let noisy = perturb(&spec, 1e-3, s.seed ^ 0xABCD);
    let report = check_relations(&noisy, 1e-12);
    Ok((report.max_residual(), !report.passes()))
}

/// Number of degenerate `Q_{αα}` flagged after zeroing `Q_{11}`.
pub fn degenerate_flags(s: &Setup) -> Result<usize> {
    let mut spec = hidden_spec(s, 1, 0, 22)?;
    let d = spec.source_dim();
    let t = spec.target_dim();
    spec.generators_mut()[d + 1] = DMatrix::from_element(t, t, C::new(0.0, 0.0));
    Ok(check_relations(&spec, 1e-12).degenerate.len())
}

/// Intertwining residual after `ε = 1e-6` noise, factorized with relaxed tolerances.
pub fn perturbed_recovery(s: &Setup) -> Result<f64> {
    let spec = perturb(&hidden_spec(s, 2, 3, 23)?, 1e-6, s.seed ^ 0x1234);
    let dec = factorize_with(
        &spec,
        &FactorizeOptions {
            rank_tol: 1e-4,
            relation_tol: 1e-4,
            rotation_seed: None,
        },
    )?;
    if dec.block_count() != 2 || dec.residual_dim() != 3 {
        return Ok(f64::INFINITY);
    }
    Ok(dec.diagnostics.intertwining_residual)
}

/// `(relative finiteness error, |per-block value − (2π)^n|λ|^{−n}|)` for
/// `m = 3` and `f = conj Φ_{00}`, plus the worst relative error on random probes.
pub fn finiteness(s: &Setup, lambda: f64) -> Result<(f64, f64, f64)> {
    let scheme = s.scheme();
    let mut rng = s.rng(24);
    let us = unitaries(3, scheme.dim(), &mut rng);
    let spec = synthesize_homomorphism(lambda, &scheme, &us, 2, rng.random())?;
    let dec = factorize(&spec, 1e-8)?;
    let f = Coefficients::unit(scheme.clone(), lambda, 0, 0)?;
    let rep = finiteness_check(&spec, &dec, &f)?;
    let expected = (2.0 * std::f64::consts::PI / lambda.abs()).powi(s.n as i32);
    let mut random_worst = 0.0f64;
    for _ in 0..3 {
        let g = random_coefficients(&scheme, lambda, &mut rng)?;
        random_worst = random_worst.max(finiteness_check(&spec, &dec, &g)?.relative_error);
    }
    Ok((rep.relative_error, (rep.per_block_hs_squared - expected).abs(), random_worst))
}

/// Outcome of reducing the truncated group Fourier transform to generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduction {
    pub relation_residual: f64,
    pub block_count: usize,
    /// `min_φ ‖V_1 − φ I‖_HS`.
    pub identity_defect: f64,
    pub rigidity: f64,
    /// Rigidity deviation after conjugating by a random unitary `U`.
    pub conjugated_rigidity: f64,
    /// `min_φ ‖V_1 − φ U‖_HS`.
    pub conjugated_recovery: f64,
    /// `ψ` scaled by 2 was refused.
    pub scaled_psi_rejected: bool,
}

/// `ψ(t) = e^{−t²} e^{λ²/4} / √π`, so `∫ ψ(t) e^{iλt} dt = 1`.
pub fn normalized_psi(lambda: f64) -> LineFn<f64> {
    let k = (lambda * lambda / 4.0).exp() / std::f64::consts::PI.sqrt();
    Arc::new(move |t: f64| C::new(k * (-t * t).exp(), 0.0))
}

fn phase_distance(v: &CMatrix64, target: &CMatrix64) -> f64 {
    // optimal φ = tr(target^† v) / |tr(target^† v)|
    let tr = (target.adjoint() * v).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C::new(1.0, 0.0) };
    hs_norm(&(v - target * phase))
}

pub fn reduction(s: &Setup, lambda: f64) -> Result<Reduction> {
    let scheme = s.scheme();
    let grid = s.grid()?;
    let rule = central_rule();
    let engine = WeylQuadrature::new(&scheme, lambda, &grid)?;
    let tgroup = |f: &HeisenbergFunction<f64>| Ok(fourier_hat_with(&engine, f, &rule)?.into_matrix());
    let spec = reduce_group_to_twisted(tgroup, lambda, &scheme, normalized_psi(lambda), &rule)?;
    let relation_residual = check_relations(&spec, 1e-3).max_residual();
    let dec = factorize_with(
        &spec,
        &FactorizeOptions {
            rank_tol: 1e-6,
            relation_tol: 1e-3,
            rotation_seed: None,
        },
    )?;
    let d = scheme.dim();
    let zs = sample_points(s.n, 5, 1.0, &mut s.rng(25));
    let identity_defect = phase_distance(&dec.blocks[0], &DMatrix::identity(d, d));
    let rigidity = rigidity_check(&dec, &zs)?;

    let u = random_unitary::<f64>(d, &mut s.rng(26));
    let conj = |f: &HeisenbergFunction<f64>| Ok(&u * fourier_hat_with(&engine, f, &rule)?.into_matrix() * u.adjoint());
    let cspec = reduce_group_to_twisted(conj, lambda, &scheme, normalized_psi(lambda), &rule)?;
    let cdec: Decomposition<f64> = factorize_with(
        &cspec,
        &FactorizeOptions {
            rank_tol: 1e-6,
            relation_tol: 1e-3,
            rotation_seed: None,
        },
    )?;
    let conjugated_rigidity = rigidity_check(&cdec, &zs)?;
    let conjugated_recovery = phase_distance(&cdec.blocks[0], &u);

    let psi = normalized_psi(lambda);
    let doubled: LineFn<f64> = Arc::new(move |t| psi(t) * 2.0);
    let scaled_psi_rejected = matches!(
        reduce_group_to_twisted(tgroup, lambda, &scheme, doubled, &rule),
        Err(Error::PsiNormalization { .. })
    );
    Ok(Reduction {
        relation_residual,
        block_count: dec.block_count(),
        identity_defect,
        rigidity,
        conjugated_rigidity,
        conjugated_recovery,
        scaled_psi_rejected,
    })
}

/// Synthesizes a hidden spec and factorizes it (the `demo factorize` workload).
pub fn demo_factorize(
    s: &Setup,
    blocks: usize,
    residual_dim: usize,
) -> Result<(HomomorphismSpec<f64>, Decomposition<f64>)> {
    let scheme = s.scheme();
    let mut rng = s.rng(30);
    let us = unitaries(blocks, scheme.dim(), &mut rng);
    let synth = synthesize(s.lambdas[0], &scheme, &us, residual_dim, rng.random())?;
    let dec = factorize(&synth.spec, 1e-8)?;
    Ok((synth.spec, dec))
}
