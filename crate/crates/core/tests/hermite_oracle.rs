//! Hermite functions against exact Rodrigues polynomials.
//!
//! `d^k/dx^k e^{−x²} = P_k(x) e^{−x²}` with `P_{k+1} = P_k' − 2x P_k`, so
//! `H_k = (−1)^k P_k` has exact integer coefficients. Nodes `x = j/4` make
//! `4^k H_k(x)` an integer as well.

use heisenberg::hermite::hermite_1d;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

fn rodrigues(kmax: usize) -> Vec<Vec<BigInt>> {
    let mut polys = vec![vec![BigInt::one()]];
    for k in 0..kmax {
        let p = &polys[k];
        let mut next = vec![BigInt::zero(); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            if i > 0 {
                next[i - 1] += c * BigInt::from(i);
            }
            next[i + 1] -= c * BigInt::from(2);
        }
        polys.push(next);
    }
    polys
        .into_iter()
        .enumerate()
        .map(|(k, p)| if k % 2 == 1 { p.into_iter().map(|c| -c).collect() } else { p })
        .collect()
}

/// `H_k(j/4)` exactly, returned as `f64`.
fn exact_hermite(coeffs: &[BigInt], j: i64) -> f64 {
    let k = coeffs.len() - 1;
    let mut acc = BigInt::zero();
    for (i, c) in coeffs.iter().enumerate() {
        acc += c * BigInt::from(j).pow(i as u32) * BigInt::from(4).pow((k - i) as u32);
    }
    acc.to_f64().unwrap() / 4f64.powi(k as i32)
}

#[test]
fn rodrigues_matches_recurrence() {
    let polys = rodrigues(10);
    assert_eq!(polys[2], vec![BigInt::from(-2), BigInt::zero(), BigInt::from(4)]);
    let mut factorial = BigInt::one();
    for (k, p) in polys.iter().enumerate() {
        if k > 0 {
            factorial *= BigInt::from(k);
        }
        let norm = (BigInt::from(2).pow(k as u32) * &factorial).to_f64().unwrap().sqrt() * std::f64::consts::PI.sqrt().sqrt();
        for j in -20..=20i64 {
            let x = j as f64 / 4.0;
            let want = exact_hermite(p, j) * (-x * x / 2.0).exp() / norm;
            let got = hermite_1d::<f64>(k, x);
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "k={k} x={x}: {got} vs {want}");
        }
    }
}
