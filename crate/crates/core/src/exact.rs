//! Exact dense linear algebra over ℚ.
//!
//! Both routines clear denominators row by row and then run the
//! fraction-free Bareiss/Montante elimination on integers, so every
//! intermediate division is exact and no pivot tolerance is involved.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scales each row to integers. Returns the integer rows and the product of
/// the scale factors (so `det(A) = det(int_rows) / factor`).
fn clear_denominators(rows: &[Vec<BigRational>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut factor = BigInt::one();
    let out = rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            factor *= &l;
            row.iter().map(|v| (v * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    (out, factor)
}

/// Runs fraction-free Gauss–Jordan (Montante) on `a` (n rows, m ≥ n columns).
/// On success every diagonal entry of the left block equals `d`, and the
/// returned tuple is `(d, swap_parity)`.
fn montante(a: &mut [Vec<BigInt>]) -> Option<(BigInt, bool)> {
    let n = a.len();
    let mut prev = BigInt::one();
    let mut odd = false;
    for k in 0..n {
        let pivot = (k..n).find(|&r| !a[r][k].is_zero())?;
        if pivot != k {
            a.swap(pivot, k);
            odd = !odd;
        }
        let (head, rest) = a.split_at_mut(k);
        let (row_k, tail) = rest.split_first_mut().expect("row k exists");
        let akk = row_k[k].clone();
        for row in head.iter_mut().chain(tail.iter_mut()) {
            let aik = std::mem::take(&mut row[k]);
            for (j, v) in row.iter_mut().enumerate() {
                if j == k {
                    continue;
                }
                let t = &akk * &*v - &aik * &row_k[j];
                *v = if prev.is_one() { t } else { t / &prev };
            }
        }
        prev = akk;
    }
    Some((prev, odd))
}

/// Exact determinant.
pub fn determinant(rows: &[Vec<BigRational>]) -> BigRational {
    let n = rows.len();
    if n == 0 {
        return BigRational::one();
    }
    let (mut a, factor) = clear_denominators(rows);
    match montante(&mut a) {
        None => BigRational::zero(),
        Some((d, odd)) => {
            let d = if odd { -d } else { d };
            BigRational::new(d, factor)
        }
    }
}

/// Exact inverse, or `None` if the matrix is singular.
pub fn inverse(rows: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = rows.len();
    let (int_rows, _) = clear_denominators(rows);
    // Row scaling: A = S⁻¹ B with S = diag(l_i), so A⁻¹ = B⁻¹ S.
    let scales: Vec<BigInt> = rows
        .iter()
        .map(|row| row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom())))
        .collect();
    let mut aug: Vec<Vec<BigInt>> = int_rows
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let (d, _) = montante(&mut aug)?;
    if d.is_zero() {
        return None;
    }
    Some(
        aug.iter()
            .map(|row| {
                (0..n)
                    .map(|j| BigRational::new(row[n + j].clone() * &scales[j], d.clone()))
                    .collect()
            })
            .collect(),
    )
}

/// `true` iff the exact determinant is nonzero.
pub fn is_nonsingular(rows: &[Vec<BigRational>]) -> bool {
    !determinant(rows).is_zero()
}

pub fn abs_log10(v: &BigRational) -> f64 {
    let bits = |x: &BigInt| x.abs().bits() as f64 * std::f64::consts::LOG10_2;
    bits(v.numer()) - bits(v.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::{int, rational};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn small_determinants() {
        assert_eq!(determinant(&mat(&[&[2]])), int(2));
        assert_eq!(determinant(&mat(&[&[1, 2], &[3, 4]])), int(-2));
        assert_eq!(determinant(&mat(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(determinant(&mat(&[&[1, 2], &[2, 4]])), int(0));
        assert_eq!(determinant(&mat(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]])), int(6));
        let half = vec![vec![rational(1, 2), int(0)], vec![int(0), rational(2, 3)]];
        assert_eq!(determinant(&half), rational(1, 3));
    }

    #[test]
    fn inverse_round_trip() {
        let a = vec![
            vec![int(0), int(2), rational(1, 3)],
            vec![int(1), int(-1), int(4)],
            vec![rational(5, 2), int(0), int(1)],
        ];
        let inv = inverse(&a).expect("nonsingular");
        for i in 0..3 {
            for j in 0..3 {
                let s: BigRational = (0..3).map(|k| &a[i][k] * &inv[k][j]).sum();
                assert_eq!(s, if i == j { int(1) } else { int(0) });
            }
        }
        assert!(inverse(&mat(&[&[1, 2], &[2, 4]])).is_none());
    }
}
