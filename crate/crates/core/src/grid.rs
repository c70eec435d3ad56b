//! Uniform trapezoidal grids on `C^n`, the oracle rule for phase-space integrals.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::foundations::Discretization;
use crate::scalar::{creal, is_finite_c, Real, C};

/// Trapezoidal rule on `[-L, L]^{2n} ≅` a box in `C^n`.
///
/// Node `k` has per-axis digits `(i_1..i_n, j_1..j_n)` (last varying fastest)
/// and coordinates `z_r = (−L + i_r h) + i(−L + j_r h)`.
#[derive(Debug, Clone)]
pub struct PhaseSpaceGrid<T> {
    n: usize,
    per_axis: usize,
    half_width: T,
    step: T,
    points: Vec<Vec<C<T>>>,
    weights: Vec<T>,
}

impl<T: Real> PhaseSpaceGrid<T> {
    pub fn new(n: usize, per_axis: usize, half_width: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let rule = crate::foundations::uniform_rule(2 * n, per_axis, half_width)?;
        let points = rule
            .nodes()
            .map(|x| (0..n).map(|r| C::new(x[r], x[n + r])).collect())
            .collect();
        Ok(Self {
            n,
            per_axis,
            half_width,
            step: T::lit(2.0) * half_width / T::from_count(per_axis - 1),
            points,
            weights: rule.plain_weights().to_vec(),
        })
    }

    pub fn from_discretization(n: usize, disc: &Discretization) -> Result<Self> {
        Self::new(n, disc.box_points, T::lit(disc.box_half_width))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn points(&self) -> &[Vec<C<T>>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    /// Coordinate of digit `i` along any axis.
    pub fn coordinate(&self, i: usize) -> T {
        -self.half_width + self.step * T::from_count(i)
    }

    /// `∫ f` over the box.
    pub fn integrate<F>(&self, f: F) -> Result<C<T>>
    where
        F: Fn(&[C<T>]) -> C<T> + Sync,
    {
        let vals = self.sample(f)?;
        Ok(vals
            .iter()
            .zip(&self.weights)
            .fold(creal(T::zero()), |acc, (&v, &w)| acc + v * w))
    }

    /// `f` at every node, failing on the first non-finite value.
    pub fn sample<F>(&self, f: F) -> Result<Vec<C<T>>>
    where
        F: Fn(&[C<T>]) -> C<T> + Sync,
    {
        self.points
            .par_iter()
            .map(|z| {
                let v = f(z);
                if is_finite_c(v) {
                    Ok(v)
                } else {
                    Err(non_finite(z))
                }
            })
            .collect()
    }

    pub(crate) fn digits(&self, mut k: usize) -> Vec<usize> {
        let dims = 2 * self.n;
        let mut d = vec![0; dims];
        for axis in (0..dims).rev() {
            d[axis] = k % self.per_axis;
            k /= self.per_axis;
        }
        d
    }

    /// `(f ∗_λ g)(z_k)` at every node `z_k`, integrating over the same grid.
    ///
    /// Differences of nodes lie on the doubled lattice `{(i − j)h}`, so `f` is
    /// tabulated there once instead of at every `(z_k, w_l)` pair.
    pub fn twisted_convolution_values<F, G>(&self, f: F, g: G, lambda: T) -> Result<Vec<C<T>>>
    where
        F: Fn(&[C<T>]) -> C<T> + Sync,
        G: Fn(&[C<T>]) -> C<T> + Sync,
    {
        let dims = 2 * self.n;
        let side = 2 * self.per_axis - 1;
        let lattice = side.pow(dims as u32);
        let f_table: Vec<C<T>> = (0..lattice)
            .into_par_iter()
            .map(|mut k| {
                let mut coords = vec![T::zero(); dims];
                for axis in (0..dims).rev() {
                    let off = (k % side) as isize - (self.per_axis as isize - 1);
                    coords[axis] = self.step * T::lit(off as f64);
                    k /= side;
                }
                let z: Vec<C<T>> = (0..self.n).map(|r| C::new(coords[r], coords[self.n + r])).collect();
                let v = f(&z);
                if is_finite_c(v) {
                    Ok(v)
                } else {
                    Err(non_finite(&z))
                }
            })
            .collect::<Result<_>>()?;
        let g_vals: Vec<C<T>> = self
            .sample(&g)?
            .into_iter()
            .zip(&self.weights)
            .map(|(v, &w)| v * w)
            .collect();
        let digits: Vec<Vec<usize>> = (0..self.len()).map(|k| self.digits(k)).collect();
        let half = lambda / T::lit(2.0);
        Ok((0..self.len())
            .into_par_iter()
            .map(|k| {
                let z = &self.points[k];
                let dz = &digits[k];
                let mut acc = creal(T::zero());
                for (l, w) in self.points.iter().enumerate() {
                    let gv = g_vals[l];
                    if gv.re == T::zero() && gv.im == T::zero() {
                        continue;
                    }
                    let dw = &digits[l];
                    let mut idx = 0usize;
                    for axis in 0..dims {
                        idx = idx * side + (dz[axis] + self.per_axis - 1 - dw[axis]);
                    }
                    let phase = half * crate::schrodinger::im_dot(z, w);
                    acc += f_table[idx] * gv * crate::scalar::cis(phase);
                }
                acc
            })
            .collect())
    }
}

pub(crate) fn non_finite<T: Real>(z: &[C<T>]) -> Error {
    Error::NonFinite {
        node: z
            .iter()
            .flat_map(|c| [c.re.as_f64(), c.im.as_f64()])
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mass() {
        let g = PhaseSpaceGrid::<f64>::new(1, 60, 10.0).unwrap();
        assert_eq!(g.len(), 3600);
        let v = g.integrate(|z| creal((-z[0].norm_sqr() / 2.0).exp())).unwrap();
        assert!((v.re - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn lattice_convolution_matches_direct_sum() {
        let grid = PhaseSpaceGrid::<f64>::new(1, 21, 6.0).unwrap();
        let f = |z: &[C<f64>]| C::new((-z[0].norm_sqr() / 2.0).exp(), 0.3 * z[0].re);
        let g = |z: &[C<f64>]| (-(z[0] - C::new(0.5, 0.0)).norm_sqr()).exp() * C::new(1.0, z[0].im);
        let fast = grid.twisted_convolution_values(f, g, 1.3).unwrap();
        for k in [0, 17, 220, 440] {
            let z = &grid.points()[k];
            let direct: C<f64> = grid
                .points()
                .iter()
                .zip(grid.weights())
                .map(|(w, &wt)| {
                    f(&[z[0] - w[0]]) * g(w) * crate::scalar::cis(0.65 * crate::schrodinger::im_dot(z, w)) * wt
                })
                .sum();
            assert!((fast[k] - direct).norm() < 1e-12);
        }
    }
}
