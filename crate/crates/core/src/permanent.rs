//! Matrix permanents.
//!
//! Small matrices use the direct permutation sum; larger ones use Ryser's
//! inclusion-exclusion formula with subsets visited in Gray-code order so
//! that each step updates the row sums in O(n).

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest order evaluated by the direct permutation sum.
pub const NAIVE_MAX_ORDER: usize = 6;

/// Permanent of a square complex matrix.
///
/// # Panics
///
/// Panics if `m` is not square or has more than 63 rows.
pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "permanent of a non-square matrix");
    if m.nrows() <= NAIVE_MAX_ORDER {
        permanent_naive(m)
    } else {
        permanent_ryser(m)
    }
}

/// Sum over all permutations, generated with Heap's algorithm.
pub fn permanent_naive(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "permanent of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut counters = vec![0usize; n];
    let term = |sigma: &[usize]| -> Complex64 {
        sigma.iter().enumerate().map(|(i, &j)| m[(i, j)]).product()
    };
    let mut total = term(&sigma);
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(counters[i], i);
            }
            total += term(&sigma);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    total
}

/// Ryser's formula, `perm(A) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} a_ij`.
pub fn permanent_ryser(m: &DMatrix<Complex64>) -> Complex64 {
    assert!(m.is_square(), "permanent of a non-square matrix");
    let n = m.nrows();
    assert!(n < 64, "Ryser permanent limited to n < 64");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut row_sums = vec![zero; n];
    let mut total = zero;
    let mut prev_gray = 0u64;
    for k in 1u64..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let flipped = gray ^ prev_gray;
        let col = flipped.trailing_zeros() as usize;
        if gray & flipped != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
        }
        prev_gray = gray;
        let prod: Complex64 = row_sums.iter().product();
        if (n as u32 - gray.count_ones()).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}
