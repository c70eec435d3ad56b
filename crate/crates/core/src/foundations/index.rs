use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A multi-index `α ∈ N^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = α_1 + … + α_n`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// The ordered index set `{α ∈ N^n : |α| ≤ N}`.
///
/// Ordering is graded lexicographic: by degree first, then lexicographically
/// on the entries. Every matrix in the crate uses this order for its rows and
/// columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationScheme {
    n: usize,
    max_degree: usize,
    indices: Vec<MultiIndex>,
    positions: HashMap<MultiIndex, usize>,
}

impl TruncationScheme {
    /// Enumerates all multi-indices of length `n` with degree at most `max_degree`.
    ///
    /// # Panics
    /// If `n == 0`.
    pub fn new(n: usize, max_degree: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        let mut indices = Vec::new();
        let mut current = vec![0usize; n];
        collect(&mut current, 0, max_degree, &mut indices);
        indices.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        let positions = indices
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        Self {
            n,
            max_degree,
            indices,
            positions,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of indices `D = binomial(N + n, n)`.
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn multi_index(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.positions.get(alpha).copied()
    }

    /// Positions of all indices with degree at most `degree`; a prefix of the
    /// index list because the order is graded.
    pub fn positions_up_to(&self, degree: usize) -> std::ops::Range<usize> {
        0..self.indices.iter().take_while(|a| a.degree() <= degree).count()
    }
}

fn collect(current: &mut Vec<usize>, axis: usize, budget: usize, out: &mut Vec<MultiIndex>) {
    if axis == current.len() {
        out.push(MultiIndex(current.clone()));
        return;
    }
    for k in 0..=budget {
        current[axis] = k;
        collect(current, axis + 1, budget - k, out);
    }
    current[axis] = 0;
}

#[cfg(test)]
/// `binomial(a, b)` in exact integer arithmetic.
pub(crate) fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn one_dimensional_scheme_is_degree_list() {
        let s = TruncationScheme::new(1, 2);
        assert_eq!(s.indices(), &[mi(&[0]), mi(&[1]), mi(&[2])]);
        assert_eq!(s.dim(), 3);
    }

    #[test]
    fn two_dimensional_graded_lex_order() {
        let s = TruncationScheme::new(2, 1);
        assert_eq!(s.indices(), &[mi(&[0, 0]), mi(&[0, 1]), mi(&[1, 0])]);
        let s = TruncationScheme::new(2, 2);
        assert_eq!(s.dim(), 6);
        assert_eq!(
            &s.indices()[3..],
            &[mi(&[0, 2]), mi(&[1, 1]), mi(&[2, 0])]
        );
    }

    #[test]
    fn dimension_is_binomial_and_lookup_inverts() {
        for n in 1..=4 {
            for big_n in 0..=6 {
                let s = TruncationScheme::new(n, big_n);
                assert_eq!(s.dim(), binomial(big_n + n, n));
                for (i, a) in s.indices().iter().enumerate() {
                    assert_eq!(s.position(a), Some(i));
                    assert_eq!(a.len(), n);
                }
                for w in s.indices().windows(2) {
                    let key = |a: &MultiIndex| (a.degree(), a.clone());
                    assert!(key(&w[0]) < key(&w[1]));
                }
            }
        }
    }

    #[test]
    fn prefix_by_degree() {
        let s = TruncationScheme::new(2, 4);
        assert_eq!(s.positions_up_to(2), 0..6);
        assert_eq!(s.positions_up_to(9), 0..s.dim());
        assert_eq!(s.position(&mi(&[5, 0])), None);
    }

    #[test]
    fn display() {
        assert_eq!(mi(&[3]).to_string(), "3");
        assert_eq!(mi(&[1, 2]).to_string(), "(1,2)");
    }
}
