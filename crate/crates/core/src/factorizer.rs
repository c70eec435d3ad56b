//! Constructive decomposition of a finite `*`-homomorphism `T` of the
//! twisted-convolution algebra, driven by its generators
//! `Q_{αβ} = κ·T(conj Φ_{αβ}^λ)`, `κ = (2π)^{−n/2}|λ|^{n/2}`.
//!
//! A conforming family satisfies `Q_{αβ}Q_{μν} = δ_{αν}Q_{μβ}` and
//! `Q_{αβ}^† = Q_{βα}`. The range of `Q_{00}` has an orthonormal basis
//! `{u_j}`; the vectors `v_β^j = Q_{0β}u_j` are orthonormal across all
//! `(j, β)`, each family `V_j = [v_β^j]_β` intertwines `T` with `W_λ`, and `T`
//! vanishes on their orthocomplement.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundations::{QuadratureRule, TruncationScheme};
use crate::fourier::{line_transform, HeisenbergFunction, LineFn};
use crate::scalar::{creal, hs_norm, CMatrix, Real, C};
use crate::schrodinger::{pi_matrix, special_hermite_normalization};
use crate::twisted::{conj_special_hermite, product_constant, Coefficients};
use crate::weyl::weyl_spectral;

/// Seed of the fixed random probes used in the intertwining diagnostics.
const PROBE_SEED: u64 = 0x005E_ED0F_F00D;

/// Generators `Q_{αβ}` of a homomorphism into `d × d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct HomomorphismSpec<T: Real> {
    lambda: T,
    scheme: TruncationScheme,
    target_dim: usize,
    /// `Q_{αβ}` at `α·D + β`.
    q: Vec<CMatrix<T>>,
}

impl<T: Real> HomomorphismSpec<T> {
    /// `q` lists `Q_{αβ}` with `α` major, both in scheme order.
    pub fn new(lambda: T, scheme: TruncationScheme, target_dim: usize, q: Vec<CMatrix<T>>) -> Result<Self> {
        if lambda == T::zero() {
            return Err(Error::ZeroLambda);
        }
        let big_d = scheme.dim();
        if q.len() != big_d * big_d {
            return Err(Error::DimensionMismatch {
                expected: big_d * big_d,
                got: q.len(),
            });
        }
        if let Some(bad) = q.iter().find(|m| m.nrows() != target_dim || m.ncols() != target_dim) {
            return Err(Error::DimensionMismatch {
                expected: target_dim,
                got: bad.nrows().max(bad.ncols()),
            });
        }
        Ok(Self {
            lambda,
            scheme,
            target_dim,
            q,
        })
    }

    /// Generators of an evaluator `T` acting on coefficient-form inputs.
    pub fn from_evaluator<F>(lambda: T, scheme: TruncationScheme, target_dim: usize, t: F) -> Result<Self>
    where
        F: Fn(&Coefficients<T>) -> Result<CMatrix<T>> + Sync,
    {
        let big_d = scheme.dim();
        let kappa = special_hermite_normalization(scheme.n(), lambda);
        let q = (0..big_d * big_d)
            .into_par_iter()
            .map(|k| {
                let e = Coefficients::unit(scheme.clone(), lambda, k / big_d, k % big_d)?;
                Ok(t(&e)?.map(|v| v * kappa))
            })
            .collect::<Result<_>>()?;
        Self::new(lambda, scheme, target_dim, q)
    }

    pub fn n(&self) -> usize {
        self.scheme.n()
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn scheme(&self) -> &TruncationScheme {
        &self.scheme
    }

    /// Number of basis functions `D` on the Weyl side.
    pub fn source_dim(&self) -> usize {
        self.scheme.dim()
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn q(&self, alpha: usize, beta: usize) -> &CMatrix<T> {
        &self.q[alpha * self.source_dim() + beta]
    }

    pub fn generators(&self) -> &[CMatrix<T>] {
        &self.q
    }

    pub fn generators_mut(&mut self) -> &mut [CMatrix<T>] {
        &mut self.q
    }

    /// `T(f) = (2π)^{n/2}|λ|^{−n/2} Σ A_{αβ} Q_{αβ}`.
    pub fn evaluate(&self, f: &Coefficients<T>) -> Result<CMatrix<T>> {
        if f.scheme() != &self.scheme || f.lambda() != self.lambda {
            return Err(Error::SchemeMismatch("coefficients do not match the generators".into()));
        }
        let big_d = self.source_dim();
        let c = product_constant(self.n(), self.lambda);
        let mut out = DMatrix::from_element(self.target_dim, self.target_dim, creal(T::zero()));
        for a in 0..big_d {
            for b in 0..big_d {
                let coeff = f.matrix()[(a, b)];
                if coeff.re != T::zero() || coeff.im != T::zero() {
                    out += self.q(a, b) * (coeff * c);
                }
            }
        }
        Ok(out)
    }
}

/// A synthesized spec together with the conjugation that hides its blocks.
#[derive(Debug, Clone)]
pub struct Synthesis<T: Real> {
    pub spec: HomomorphismSpec<T>,
    /// `H` in `Q_{αβ} = H (⊕_j U_j E_{βα} U_j^† ⊕ 0) H^†`.
    pub hidden: CMatrix<T>,
}

/// Haar-distributed `d × d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<T: Real>(d: usize, rng: &mut ChaCha8Rng) -> CMatrix<T> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C::new(T::lit(re), T::lit(im))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let norm = rjj.norm_sqr().sqrt();
        if norm > T::zero() {
            let phase = rjj / norm;
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `‖U^†U − I‖_HS`.
pub fn unitarity_defect<T: Real>(u: &CMatrix<T>) -> T {
    let d = u.nrows();
    hs_norm(&(u.adjoint() * u - DMatrix::identity(d, d)))
}

fn unitary_tolerance<T: Real>() -> T {
    let eps = T::default_epsilon() * T::lit(1e3);
    if eps > T::lit(1e-12) {
        eps
    } else {
        T::lit(1e-12)
    }
}

/// Ground truth `T(f) = H(⊕_j U_j W_λ(f) U_j^† ⊕ 0)H^†` with a seeded random
/// unitary `H` hiding the block structure.
pub fn synthesize<T: Real>(
    lambda: T,
    scheme: &TruncationScheme,
    block_unitaries: &[CMatrix<T>],
    residual_dim: usize,
    seed: u64,
) -> Result<Synthesis<T>> {
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    if block_unitaries.is_empty() {
        return Err(Error::ZeroHomomorphism);
    }
    let big_d = scheme.dim();
    for u in block_unitaries {
        if u.nrows() != big_d || u.ncols() != big_d {
            return Err(Error::DimensionMismatch {
                expected: big_d,
                got: u.nrows().max(u.ncols()),
            });
        }
        let defect = unitarity_defect(u);
        if defect.as_f64().is_nan() || defect > unitary_tolerance() {
            return Err(Error::NotUnitary { defect: defect.as_f64() });
        }
    }
    let m = block_unitaries.len();
    let d = m * big_d + residual_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = random_unitary::<T>(d, &mut rng);
    // Column β of H·(U_j ⊕ …) restricted to block j.
    let embedded: Vec<CMatrix<T>> = block_unitaries
        .iter()
        .enumerate()
        .map(|(j, u)| hidden.columns(j * big_d, big_d) * u)
        .collect();
    let q = (0..big_d * big_d)
        .map(|k| {
            let (alpha, beta) = (k / big_d, k % big_d);
            let mut acc = DMatrix::from_element(d, d, creal(T::zero()));
            for w in &embedded {
                acc += w.column(beta) * w.column(alpha).adjoint();
            }
            acc
        })
        .collect();
    Ok(Synthesis {
        spec: HomomorphismSpec::new(lambda, scheme.clone(), d, q)?,
        hidden,
    })
}

/// [`synthesize`] without the ground truth.
pub fn synthesize_homomorphism<T: Real>(
    lambda: T,
    scheme: &TruncationScheme,
    block_unitaries: &[CMatrix<T>],
    residual_dim: usize,
    seed: u64,
) -> Result<HomomorphismSpec<T>> {
    synthesize(lambda, scheme, block_unitaries, residual_dim, seed).map(|s| s.spec)
}

/// Adds independent uniform noise in `[−ε, ε]` to the real and imaginary part
/// of every generator entry.
pub fn perturb<T: Real>(spec: &HomomorphismSpec<T>, eps: f64, seed: u64) -> HomomorphismSpec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-eps, eps).expect("finite noise bound");
    let mut out = spec.clone();
    for q in out.generators_mut() {
        for v in q.iter_mut() {
            *v += C::new(T::lit(dist.sample(&mut rng)), T::lit(dist.sample(&mut rng)));
        }
    }
    out
}

/// Residuals of the matrix-unit relations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    /// `max ‖Q_{αβ}Q_{μν} − δ_{αν}Q_{μβ}‖_HS`.
    pub max_product_residual: f64,
    /// `max ‖Q_{αβ}^† − Q_{βα}‖_HS`.
    pub max_adjoint_residual: f64,
    /// Scheme positions `α` with `‖Q_{αα}‖_HS < tol`.
    pub degenerate: Vec<usize>,
    pub tolerance: f64,
    pub max_degree: usize,
}

impl RelationReport {
    pub fn passes(&self) -> bool {
        self.max_product_residual <= self.tolerance
            && self.max_adjoint_residual <= self.tolerance
            && self.degenerate.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.max_product_residual.max(self.max_adjoint_residual)
    }
}

/// Checks both relation families over every index 4-tuple of the scheme.
pub fn check_relations<T: Real>(spec: &HomomorphismSpec<T>, tol: f64) -> RelationReport {
    let big_d = spec.source_dim();
    let max = |a: f64, b: f64| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) };
    let product = (0..big_d * big_d)
        .into_par_iter()
        .map(|k| {
            let (alpha, beta) = (k / big_d, k % big_d);
            let qab = spec.q(alpha, beta);
            let mut worst = 0.0f64;
            for mu in 0..big_d {
                for nu in 0..big_d {
                    let prod = qab * spec.q(mu, nu);
                    let r = if alpha == nu {
                        hs_norm(&(prod - spec.q(mu, beta)))
                    } else {
                        hs_norm(&prod)
                    };
                    worst = max(worst, r.as_f64());
                }
            }
            worst
        })
        .reduce(|| 0.0, max);
    let adjoint = (0..big_d * big_d)
        .into_par_iter()
        .map(|k| {
            let (alpha, beta) = (k / big_d, k % big_d);
            hs_norm(&(spec.q(alpha, beta).adjoint() - spec.q(beta, alpha))).as_f64()
        })
        .reduce(|| 0.0, max);
    let degenerate = (0..big_d)
        // A NaN norm counts as degenerate.
        .filter(|&a| hs_norm(spec.q(a, a)).as_f64().partial_cmp(&tol).is_none_or(|o| o.is_lt()))
        .collect();
    RelationReport {
        max_product_residual: product,
        max_adjoint_residual: adjoint,
        degenerate,
        tolerance: tol,
        max_degree: spec.scheme.max_degree(),
    }
}

/// Knobs for [`factorize_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizeOptions {
    /// Singular values of `Q_{00}` above `rank_tol·σ_max` count toward the rank.
    pub rank_tol: f64,
    /// Absolute tolerance for the relation check, scaled by `max(1, σ_max)`.
    pub relation_tol: f64,
    /// Rotates the basis of `R(Q_{00})` by a seeded random unitary.
    pub rotation_seed: Option<u64>,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        Self {
            rank_tol: 1e-8,
            relation_tol: 1e-8,
            rotation_seed: None,
        }
    }
}

/// Quality measures of a decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub relations: RelationReport,
    /// `‖G − I‖_HS` for the Gram matrix of the raw `v_β^j`, before re-orthonormalization.
    pub raw_orthonormality_defect: f64,
    /// Same for all final block and residual columns.
    pub orthonormality_defect: f64,
    /// `max_{f, j} ‖T(f)V_j − V_j W_λ(f)‖_HS` over the probe set.
    pub intertwining_residual: f64,
    /// `max_f ‖T(f)·R‖_HS`, `R` the residual basis.
    pub annihilation_residual: f64,
    pub probe_count: usize,
}

/// Blocks `V_j` (`d × D`, column `β` is `v_β^j`) and the residual space.
#[derive(Debug, Clone)]
pub struct Decomposition<T: Real> {
    pub lambda: T,
    pub scheme: TruncationScheme,
    pub blocks: Vec<CMatrix<T>>,
    pub residual_basis: CMatrix<T>,
    /// Singular values of `Q_{00}`, decreasing.
    pub singular_values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl<T: Real> Decomposition<T> {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn residual_dim(&self) -> usize {
        self.residual_basis.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.residual_basis.nrows()
    }

    /// Orthogonal projector onto the sum of the block ranges.
    pub fn block_projector(&self) -> CMatrix<T> {
        let d = self.target_dim();
        self.blocks
            .iter()
            .fold(DMatrix::from_element(d, d, creal(T::zero())), |acc, v| acc + v * v.adjoint())
    }

    /// Orthogonal projector onto the residual space.
    pub fn residual_projector(&self) -> CMatrix<T> {
        &self.residual_basis * self.residual_basis.adjoint()
    }
}

/// [`factorize_with`] at the given relative rank tolerance.
pub fn factorize<T: Real>(spec: &HomomorphismSpec<T>, rank_tol: f64) -> Result<Decomposition<T>> {
    factorize_with(
        spec,
        &FactorizeOptions {
            rank_tol,
            relation_tol: rank_tol,
            rotation_seed: None,
        },
    )
}

/// Eigenvectors of the Hermitian part of `m`, ordered by decreasing
/// `|eigenvalue|`. For the Hermitian `Q_{00}` these are its left singular
/// vectors and singular values.
fn sorted_hermitian_eigen<T: Real>(m: &CMatrix<T>) -> (CMatrix<T>, Vec<T>) {
    let half = creal(T::lit(0.5));
    let h = (m + m.adjoint()) * half;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .abs()
            .partial_cmp(&eig.eigenvalues[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<_> = order.iter().map(|&k| eig.eigenvectors.column(k)).collect();
    let sigma = order.iter().map(|&k| eig.eigenvalues[k].abs()).collect();
    (DMatrix::from_columns(&cols), sigma)
}

/// Modified Gram–Schmidt, applied twice for stability.
fn orthonormalize<T: Real>(m: &mut CMatrix<T>) {
    for j in 0..m.ncols() {
        for _ in 0..2 {
            for k in 0..j {
                let proj = m.column(k).dotc(&m.column(j));
                let ck = m.column(k).clone_owned();
                let mut cj = m.column_mut(j);
                cj -= ck * proj;
            }
        }
        let norm = m.column(j).norm();
        if norm > T::zero() {
            let mut cj = m.column_mut(j);
            cj /= creal(norm);
        }
    }
}

/// Orthonormal basis of the complement of the range of `q` (orthonormal
/// columns), by pivoted Gram–Schmidt over the standard basis.
///
/// The complement has dimension `rows − cols` exactly, so no rank decision
/// is needed; each step takes the unit vector with the largest remainder.
fn complete_basis<T: Real>(q: &CMatrix<T>) -> CMatrix<T> {
    let d = q.nrows();
    let want = d.saturating_sub(q.ncols());
    let mut basis = q.clone();
    let mut out = DMatrix::from_element(d, want, creal(T::zero()));
    for k in 0..want {
        let mut best: Option<(T, DVector<C<T>>)> = None;
        for i in 0..d {
            let mut v = DVector::from_element(d, creal(T::zero()));
            v[i] = creal(T::one());
            for _ in 0..2 {
                let coeffs = basis.adjoint() * &v;
                v -= &basis * coeffs;
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("d > 0");
        let v = v / creal(norm);
        out.set_column(k, &v);
        let last = basis.ncols();
        basis = basis.resize_horizontally(last + 1, creal(T::zero()));
        basis.set_column(last, &v);
    }
    out
}

fn gram_defect<T: Real>(m: &CMatrix<T>) -> f64 {
    let k = m.ncols();
    hs_norm(&(m.adjoint() * m - DMatrix::identity(k, k))).as_f64()
}

/// Decomposes `T` following the constructive proof, with `α = 0`.
pub fn factorize_with<T: Real>(spec: &HomomorphismSpec<T>, opts: &FactorizeOptions) -> Result<Decomposition<T>> {
    let d = spec.target_dim();
    let big_d = spec.source_dim();
    let (u, sigma) = sorted_hermitian_eigen(spec.q(0, 0));
    let smax = sigma.first().copied().unwrap_or_else(T::zero);
    let scale = if smax.as_f64() > 1.0 { smax.as_f64() } else { 1.0 };
    let relations = check_relations(spec, opts.relation_tol * scale);
    if !relations.passes() {
        if smax == T::zero() {
            return Err(Error::ZeroHomomorphism);
        }
        return Err(Error::RelationsFailed(Box::new(relations)));
    }
    let threshold = T::lit(opts.rank_tol) * smax;
    let m = sigma.iter().filter(|&&s| s > threshold && s > T::zero()).count();
    if m == 0 {
        return Err(Error::ZeroHomomorphism);
    }
    let mut range = u.columns(0, m).clone_owned();
    if let Some(seed) = opts.rotation_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        range *= random_unitary::<T>(m, &mut rng);
    }

    // All v_β^j side by side, block j in columns j·D..(j+1)·D.
    let mut all = DMatrix::from_element(d, m * big_d, creal(T::zero()));
    for j in 0..m {
        let uj = range.column(j);
        for beta in 0..big_d {
            all.set_column(j * big_d + beta, &(spec.q(0, beta) * uj));
        }
    }
    let raw_defect = gram_defect(&all);
    orthonormalize(&mut all);
    let blocks: Vec<CMatrix<T>> = (0..m).map(|j| all.columns(j * big_d, big_d).clone_owned()).collect();

    let residual_basis = complete_basis(&all);
    let residual_dim = residual_basis.ncols();

    let mut everything = all.clone();
    everything = everything.resize_horizontally(m * big_d + residual_dim, creal(T::zero()));
    for k in 0..residual_dim {
        everything.set_column(m * big_d + k, &residual_basis.column(k));
    }
    let orth_defect = gram_defect(&everything);

    let probes = probe_set(spec)?;
    let (inter, annihil) = probes
        .par_iter()
        .map(|f| {
            let t = spec.evaluate(f)?;
            let w = weyl_spectral(f).into_matrix();
            let inter = blocks
                .iter()
                .map(|v| hs_norm(&(&t * v - v * &w)).as_f64())
                .fold(0.0, f64::max);
            let ann = if residual_dim == 0 {
                0.0
            } else {
                hs_norm(&(&t * &residual_basis)).as_f64()
            };
            Ok((inter, ann))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, 0.0f64), |(a, b), (x, y)| (a.max(x), b.max(y)));

    Ok(Decomposition {
        lambda: spec.lambda(),
        scheme: spec.scheme().clone(),
        blocks,
        residual_basis,
        singular_values: sigma.iter().map(|s| s.as_f64()).collect(),
        diagnostics: Diagnostics {
            relations,
            raw_orthonormality_defect: raw_defect,
            orthonormality_defect: orth_defect,
            intertwining_residual: inter,
            annihilation_residual: annihil,
            probe_count: probes.len(),
        },
    })
}

/// `conj Φ_{αβ}` for `|α|, |β| ≤ 2` plus three seeded random coefficient
/// functions, all with unit coefficient norm `‖A‖_HS = 1`.
pub fn probe_set<T: Real>(spec: &HomomorphismSpec<T>) -> Result<Vec<Coefficients<T>>> {
    let scheme = spec.scheme();
    let low = scheme.positions_up_to(2.min(scheme.max_degree()));
    let mut probes = Vec::new();
    for a in low.clone() {
        for b in low.clone() {
            probes.push(Coefficients::unit(scheme.clone(), spec.lambda(), a, b)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let big_d = scheme.dim();
    for _ in 0..3 {
        let m = DMatrix::from_fn(big_d, big_d, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C::new(T::lit(re), T::lit(im))
        });
        let norm = creal(hs_norm(&m));
        probes.push(Coefficients::new(scheme.clone(), spec.lambda(), m / norm)?);
    }
    Ok(probes)
}

/// `‖T(f)‖²_HS` against `m·‖W_λ(f)‖²_HS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    pub block_count: usize,
    pub t_hs_squared: f64,
    pub per_block_hs_squared: f64,
    pub relative_error: f64,
}

/// Checks that `T` is `m` copies of `W_λ` in Hilbert–Schmidt norm on `probe`.
pub fn finiteness_check<T: Real>(spec: &HomomorphismSpec<T>, dec: &Decomposition<T>, probe: &Coefficients<T>) -> Result<FinitenessReport> {
    let t = hs_norm(&spec.evaluate(probe)?).as_f64().powi(2);
    let w = weyl_spectral(probe).hs_norm().as_f64().powi(2);
    let m = dec.block_count();
    let expected = m as f64 * w;
    let relative_error = if expected == 0.0 {
        t
    } else {
        (t - expected).abs() / expected
    };
    Ok(FinitenessReport {
        block_count: m,
        t_hs_squared: t,
        per_block_hs_squared: w,
        relative_error,
    })
}

/// `S_λ(g) = T(g ⊗ ψ)`, returned through its generators
/// `Q_{αβ} = κ·T(conj Φ_{αβ}^λ ⊗ ψ)`.
///
/// `ψ` must satisfy `∫ ψ(t) e^{iλt} dt = 1` to `1e-10` on `rule`.
pub fn reduce_group_to_twisted<T, F>(
    tgroup: F,
    lambda: T,
    scheme: &TruncationScheme,
    psi: LineFn<T>,
    rule: &QuadratureRule<T>,
) -> Result<HomomorphismSpec<T>>
where
    T: Real,
    F: Fn(&HeisenbergFunction<T>) -> Result<CMatrix<T>> + Sync,
{
    if lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let hat = line_transform(&*psi, lambda, rule)?;
    if (hat - creal(T::one())).norm_sqr().sqrt().as_f64() > 1e-10 {
        return Err(Error::PsiNormalization {
            re: hat.re.as_f64(),
            im: hat.im.as_f64(),
        });
    }
    let big_d = scheme.dim();
    let kappa = special_hermite_normalization(scheme.n(), lambda);
    let q: Vec<CMatrix<T>> = (0..big_d * big_d)
        .map(|k| {
            let g = conj_special_hermite(scheme, lambda, k / big_d, k % big_d);
            let p = psi.clone();
            let f = HeisenbergFunction::from_form(scheme.n(), crate::fourier::Form::Separable { g, h: p });
            Ok(tgroup(&f)?.map(|v| v * kappa))
        })
        .collect::<Result<_>>()?;
    let d = q[0].nrows();
    HomomorphismSpec::new(lambda, scheme.clone(), d, q)
}

/// `max_{j, z} ‖V_j^† π_λ(z) V_j − π_λ(z)‖_HS`, reading the target as the
/// truncated `L²(R^n)` itself.
///
/// Zero exactly when every block intertwines `π_λ(z)` with itself, which
/// irreducibility forces to be a scalar phase. Requires `d = D`.
pub fn rigidity_check<T: Real>(dec: &Decomposition<T>, z_samples: &[Vec<C<T>>]) -> Result<f64> {
    let big_d = dec.scheme.dim();
    if dec.target_dim() != big_d {
        return Err(Error::DimensionMismatch {
            expected: big_d,
            got: dec.target_dim(),
        });
    }
    let mut worst = 0.0f64;
    for z in z_samples {
        let p = pi_matrix(dec.lambda, z, &dec.scheme)?.into_matrix();
        for v in &dec.blocks {
            let r = hs_norm(&(v.adjoint() * &p * v - &p)).as_f64();
            worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(d: usize) -> CMatrix<f64> {
        DMatrix::identity(d, d)
    }

    #[test]
    fn identity_spec_is_matrix_units() {
        let scheme = TruncationScheme::new(1, 3);
        let spec = synthesize_homomorphism(1.0, &scheme, &[identity(4)], 0, 1).unwrap();
        let r = check_relations(&spec, 1e-12);
        assert!(r.passes(), "{r:?}");
        assert!(r.max_residual() <= 1e-14);
    }

    /// An input on which a plain complex SVD of `Q_00` returns a wrong
    /// factorization (a singular value of 1.066 for an exact projector).
    #[test]
    fn recovers_blocks_where_complex_svd_breaks() {
        use rand::Rng;
        let scheme = TruncationScheme::new(1, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(42u64.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (1630 + 7919 * 2));
        let us: Vec<CMatrix<f64>> = (0..3).map(|_| random_unitary(7, &mut rng)).collect();
        let spec = synthesize_homomorphism(1.0, &scheme, &us, 0, rng.random()).unwrap();
        let dec = factorize(&spec, 1e-8).unwrap();
        assert_eq!((dec.block_count(), dec.residual_dim()), (3, 0));
        for s in &dec.singular_values[..3] {
            assert!((s - 1.0).abs() < 1e-12, "{:?}", dec.singular_values);
        }
        let dg = &dec.diagnostics;
        assert!(dg.raw_orthonormality_defect < 1e-12, "{dg:?}");
        assert!(dg.intertwining_residual < 1e-12, "{dg:?}");
    }

    #[test]
    fn residual_basis_completes_the_blocks() {
        let scheme = TruncationScheme::new(1, 2);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let us = vec![random_unitary(3, &mut rng)];
            let spec = synthesize_homomorphism(-1.0f64, &scheme, &us, 1 + seed as usize % 5, seed).unwrap();
            let dec = factorize(&spec, 1e-8).unwrap();
            let total = dec.block_projector() + dec.residual_projector();
            let d = spec.target_dim();
            assert!(hs_norm(&(total - DMatrix::identity(d, d))) < 1e-12);
            assert!(dec.diagnostics.annihilation_residual < 1e-12);
        }
    }

    #[test]
    fn rank_of_q00_is_block_count() {
        let scheme = TruncationScheme::new(1, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let us = vec![random_unitary(7, &mut rng), random_unitary(7, &mut rng)];
        let spec = synthesize_homomorphism(1.0, &scheme, &us, 3, 11).unwrap();
        assert_eq!(spec.target_dim(), 17);
        // Q_00 is an orthogonal projector, so its rank is its trace.
        let q = spec.q(0, 0);
        assert!(hs_norm(&(q * q - q)) < 1e-13);
        assert!((q.trace() - C::new(2.0, 0.0)).norm() < 1e-13);
        let sv = crate::scalar::singular_values(q);
        assert_eq!(sv.iter().filter(|&&s| s > 1e-6).count(), 2);
    }

    #[test]
    fn rejects_bad_inputs() {
        let scheme = TruncationScheme::new(1, 2);
        assert!(matches!(
            synthesize_homomorphism::<f64>(1.0, &scheme, &[], 2, 0),
            Err(Error::ZeroHomomorphism)
        ));
        let mut bad = identity(3);
        bad[(0, 0)] = C::new(2.0, 0.0);
        assert!(matches!(
            synthesize_homomorphism(1.0, &scheme, &[bad], 0, 0),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn known_decomposition_recovered() {
        let scheme = TruncationScheme::new(1, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let us = vec![random_unitary(7, &mut rng), random_unitary(7, &mut rng)];
        let spec = synthesize_homomorphism(1.0, &scheme, &us, 3, 99).unwrap();
        let dec = factorize(&spec, 1e-8).unwrap();
        assert_eq!(dec.block_count(), 2);
        assert_eq!(dec.residual_dim(), 3);
        assert!(dec.diagnostics.orthonormality_defect <= 1e-10);
        assert!(dec.diagnostics.raw_orthonormality_defect <= 1e-10);
        assert!(dec.diagnostics.intertwining_residual <= 1e-9);
        assert!(dec.diagnostics.annihilation_residual <= 1e-9);
        assert_eq!(dec.diagnostics.probe_count, 9 + 3);
    }

    #[test]
    fn identity_spec_gives_phase_identity() {
        let scheme = TruncationScheme::new(1, 4);
        let spec = synthesize(1.0, &scheme, &[identity(5)], 0, 0).unwrap();
        // undo the hiding conjugation
        let h = &spec.hidden;
        let q: Vec<_> = spec.spec.generators().iter().map(|m| h.adjoint() * m * h).collect();
        let plain = HomomorphismSpec::new(1.0, scheme, 5, q).unwrap();
        let dec = factorize(&plain, 1e-8).unwrap();
        let v = &dec.blocks[0];
        let phase = v[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((v - identity(5) * phase).norm() < 1e-12);
        assert!(dec.diagnostics.intertwining_residual <= 1e-12);
        assert!(rigidity_check(&dec, &[vec![C::new(0.5, -0.3)]]).unwrap() <= 1e-9);
    }

    #[test]
    fn perturbation_flagged() {
        let scheme = TruncationScheme::new(1, 2);
        let spec = synthesize_homomorphism(1.0, &scheme, &[identity(3)], 0, 4).unwrap();
        let noisy = perturb(&spec, 1e-3, 8);
        let r = check_relations(&noisy, 1e-12);
        assert!(!r.passes());
        assert!((1e-4..=1e-2).contains(&r.max_residual()), "{}", r.max_residual());
        assert!(matches!(factorize(&noisy, 1e-8), Err(Error::RelationsFailed(_))));
    }

    #[test]
    fn degenerate_generator_flagged() {
        let scheme = TruncationScheme::new(1, 2);
        let mut spec = synthesize_homomorphism(1.0, &scheme, &[identity(3)], 0, 4).unwrap();
        spec.generators_mut()[4] = DMatrix::from_element(3, 3, creal(0.0));
        let r = check_relations(&spec, 1e-12);
        assert_eq!(r.degenerate, vec![1]);
        assert!(!r.passes());
    }

    #[test]
    fn zero_spec_reports_zero_homomorphism() {
        let scheme = TruncationScheme::new(1, 1);
        let q = vec![DMatrix::from_element(2, 2, creal(0.0)); 4];
        let spec = HomomorphismSpec::new(1.0, scheme, 2, q).unwrap();
        assert!(matches!(factorize(&spec, 1e-8), Err(Error::ZeroHomomorphism)));
    }

    #[test]
    fn finiteness_three_blocks() {
        let scheme = TruncationScheme::new(1, 3);
        let us = vec![identity(4); 3];
        let spec = synthesize_homomorphism(1.0, &scheme, &us, 2, 21).unwrap();
        let dec = factorize(&spec, 1e-8).unwrap();
        let f = Coefficients::unit(scheme, 1.0, 0, 0).unwrap();
        let rep = finiteness_check(&spec, &dec, &f).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((rep.per_block_hs_squared - two_pi).abs() < 1e-12);
        assert!((rep.t_hs_squared - 3.0 * two_pi).abs() < 1e-8 * 3.0 * two_pi);
        assert!(rep.relative_error < 1e-8);
    }

    #[test]
    fn evaluator_round_trip() {
        let scheme = TruncationScheme::new(1, 2);
        let spec = HomomorphismSpec::from_evaluator(2.0, scheme.clone(), 3, |f| Ok(weyl_spectral(f).into_matrix())).unwrap();
        assert!(check_relations(&spec, 1e-12).passes());
        let f = Coefficients::new(scheme, 2.0, DMatrix::from_fn(3, 3, |i, j| C::new(i as f64, j as f64))).unwrap();
        assert!((spec.evaluate(&f).unwrap() - weyl_spectral(&f).into_matrix()).norm() < 1e-12);
    }
}
