use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::hermite_values;
use crate::scalar::{is_finite_c, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    /// Tensor product of Gauss–Hermite rules for the weight `exp(-|x|²/s²)`.
    GaussHermiteTensor,
    /// Trapezoidal rule on a box `[-L, L]^dim`.
    UniformTruncated,
}

/// Nodes and weights on `R^dim`.
///
/// `weights` are the rule's native weights (for Gauss–Hermite these carry the
/// Gaussian). `plain_weights` integrate plain integrands: for Gauss–Hermite
/// they equal `weights · exp(|x|²/s²)`, computed without forming the
/// exponential, and for the uniform rule they equal `weights`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    dim: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
    plain_weights: Vec<T>,
    kind: RuleKind,
    scale: T,
}

impl<T: Real> QuadratureRule<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// Width `s` of the Gaussian weight `exp(-|x|²/s²)` (1 unless dilated).
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn node(&self, i: usize) -> &[T] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.nodes.chunks(self.dim)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn plain_weights(&self) -> &[T] {
        &self.plain_weights
    }

    /// Iterates `(node, plain weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[T], T)> + '_ {
        self.nodes().zip(self.plain_weights.iter().copied())
    }

    /// Substitutes `x = s·u`: the rule integrates against `exp(-|x|²/s²)`.
    pub fn dilate(&self, s: T) -> Self {
        let jac = (0..self.dim).fold(T::one(), |acc, _| acc * s);
        Self {
            dim: self.dim,
            nodes: self.nodes.iter().map(|&x| x * s).collect(),
            weights: self.weights.iter().map(|&w| w * jac).collect(),
            plain_weights: self.plain_weights.iter().map(|&w| w * jac).collect(),
            kind: self.kind,
            scale: self.scale * s,
        }
    }
}

/// The `m`-point Gauss–Hermite rule for the weight `exp(-x²)` on `R`.
///
/// Nodes are eigenvalues of the symmetric Jacobi matrix (off-diagonal
/// `sqrt(k/2)`), polished by two Newton steps on `h_m`. Weights come from
/// the Christoffel function, `exp(x²)·w = 1 / Σ_{k<m} h_k(x)²`, which keeps
/// the tiny outer weights at full relative accuracy.
pub fn gauss_hermite_rule<T: Real>(m: usize) -> Result<QuadratureRule<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "Gauss-Hermite rule needs at least one point".into(),
        ));
    }
    let jacobi = DMatrix::<T>::from_fn(m, m, |i, j| {
        if i + 1 == j || j + 1 == i {
            (T::from_count(i.max(j)) / T::lit(2.0)).sqrt()
        } else {
            T::zero()
        }
    });
    let mut nodes: Vec<T> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let scale_m = (T::lit(2.0) * T::from_count(m)).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let h = hermite_values(m, *x);
            let denom = scale_m * h[m - 1];
            if denom != T::zero() {
                *x -= h[m] / denom;
            }
        }
    }
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let a = (nodes[j] - nodes[i]) / T::lit(2.0);
        nodes[i] = -a;
        nodes[j] = a;
    }
    if m % 2 == 1 {
        nodes[m / 2] = T::zero();
    }

    let plain_weights: Vec<T> = nodes
        .iter()
        .map(|&x| {
            let h = hermite_values(m - 1, x);
            T::one() / h.iter().fold(T::zero(), |acc, &v| acc + v * v)
        })
        .collect();
    let weights = nodes
        .iter()
        .zip(&plain_weights)
        .map(|(&x, &w)| w * (-x * x).exp())
        .collect();
    Ok(QuadratureRule {
        dim: 1,
        nodes,
        weights,
        plain_weights,
        kind: RuleKind::GaussHermiteTensor,
        scale: T::one(),
    })
}

/// Tensor-product rule on `R^dim` with `m^dim` nodes; the last axis varies fastest.
pub fn tensor_rule<T: Real>(rule1d: &QuadratureRule<T>, dim: usize) -> Result<QuadratureRule<T>> {
    if rule1d.dim != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: rule1d.dim,
        });
    }
    let m = rule1d.len();
    let total = m.pow(dim as u32);
    let mut nodes = Vec::with_capacity(total * dim);
    let mut weights = Vec::with_capacity(total);
    let mut plain_weights = Vec::with_capacity(total);
    let mut digits = vec![0usize; dim];
    for _ in 0..total {
        let mut w = T::one();
        let mut pw = T::one();
        for &d in &digits {
            nodes.push(rule1d.nodes[d]);
            w *= rule1d.weights[d];
            pw *= rule1d.plain_weights[d];
        }
        weights.push(w);
        plain_weights.push(pw);
        for axis in (0..dim).rev() {
            digits[axis] += 1;
            if digits[axis] < m {
                break;
            }
            digits[axis] = 0;
        }
    }
    Ok(QuadratureRule {
        dim,
        nodes,
        weights,
        plain_weights,
        kind: rule1d.kind,
        scale: rule1d.scale,
    })
}

/// Trapezoidal rule on `[-half_width, half_width]^dim` with `points` nodes per axis.
pub fn uniform_rule<T: Real>(dim: usize, points: usize, half_width: T) -> Result<QuadratureRule<T>> {
    if points < 2 {
        return Err(Error::InvalidArgument(
            "uniform rule needs at least two points per axis".into(),
        ));
    }
    if half_width <= T::zero() {
        return Err(Error::InvalidArgument("box half-width must be positive".into()));
    }
    let h = T::lit(2.0) * half_width / T::from_count(points - 1);
    let nodes: Vec<T> = (0..points)
        .map(|i| -half_width + h * T::from_count(i))
        .collect();
    let weights: Vec<T> = (0..points)
        .map(|i| if i == 0 || i == points - 1 { h / T::lit(2.0) } else { h })
        .collect();
    let line = QuadratureRule {
        dim: 1,
        nodes,
        plain_weights: weights.clone(),
        weights,
        kind: RuleKind::UniformTruncated,
        scale: T::one(),
    };
    tensor_rule(&line, dim)
}

/// Approximates `∫ f` for a plain integrand `f` (no weight factored out).
pub fn integrate<T, F>(f: F, rule: &QuadratureRule<T>) -> Result<C<T>>
where
    T: Real,
    F: Fn(&[T]) -> C<T>,
{
    let mut acc = C::new(T::zero(), T::zero());
    for (x, w) in rule.iter() {
        let v = f(x);
        if !is_finite_c(v) {
            return Err(Error::NonFinite {
                node: x.iter().map(|c| c.as_f64()).collect(),
            });
        }
        acc += v * w;
    }
    Ok(acc)
}

/// Node counts and extents used by the quadrature-backed routines.
///
/// Defaults: 60 Gauss–Hermite points per axis, a 60-point trapezoid box on
/// `[-10, 10]` per real axis of `C^n`, and a 161-point trapezoid on `[-8, 8]`
/// for the central variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub hermite_points: usize,
    pub box_points: usize,
    pub box_half_width: f64,
    pub central_points: usize,
    pub central_half_width: f64,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            hermite_points: 60,
            box_points: 60,
            box_half_width: 10.0,
            central_points: 161,
            central_half_width: 8.0,
        }
    }
}

impl Discretization {
    /// Box rule on `C^n ≅ R^{2n}`. Node coordinates are
    /// `(x_1, …, x_n, y_1, …, y_n)` with `z_j = x_j + i y_j`.
    pub fn phase_space_rule<T: Real>(&self, n: usize) -> Result<QuadratureRule<T>> {
        uniform_rule(2 * n, self.box_points, T::lit(self.box_half_width))
    }

    pub fn central_rule<T: Real>(&self) -> Result<QuadratureRule<T>> {
        uniform_rule(1, self.central_points, T::lit(self.central_half_width))
    }

    pub fn hermite_rule<T: Real>(&self) -> Result<QuadratureRule<T>> {
        gauss_hermite_rule(self.hermite_points)
    }
}
