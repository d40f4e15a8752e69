//! Gaussian elimination over a [`LocalRing`] with minimal-valuation pivots.

use crate::error::{Error, Result};
use crate::padic::{El, LocalRing};

pub type Matrix = Vec<Vec<El>>;

fn pivot_row(ring: &LocalRing, m: &Matrix, col: usize, from: usize) -> Option<usize> {
    (from..m.len())
        .filter(|&r| !ring.is_zero(&m[r][col]))
        .min_by_key(|&r| ring.valuation(&m[r][col]))
}

/// Determinant by fraction-free-in-valuation elimination: pivots are chosen
/// of minimal valuation, so every multiplier is integral.
pub fn determinant(ring: &LocalRing, m: &Matrix) -> Result<El> {
    let n = m.len();
    let mut a = m.clone();
    let mut det = ring.one();
    for col in 0..n {
        let Some(pr) = pivot_row(ring, &a, col, col) else {
            let prec = a[col..].iter().map(|r| r[col].prec()).min().unwrap_or(0);
            let known = ring.mul(&det, &ring.with_prec(&ring.zero(), prec));
            return Ok(known);
        };
        if pr != col {
            a.swap(pr, col);
            det = ring.neg(&det);
        }
        let piv = a[col][col].clone();
        det = ring.mul(&det, &piv);
        for r in col + 1..n {
            if ring.is_zero(&a[r][col]) {
                continue;
            }
            let f = ring.div(&a[r][col], &piv)?;
            for c in col..n {
                let t = ring.mul(&f, &a[col][c]);
                a[r][c] = ring.sub(&a[r][c], &t);
            }
        }
    }
    Ok(det)
}

/// Inverse of a matrix whose determinant is a unit.
pub fn inverse(ring: &LocalRing, m: &Matrix) -> Result<Matrix> {
    let n = m.len();
    let mut a: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { ring.one() } else { ring.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pr = pivot_row(ring, &a, col, col)
            .filter(|&r| ring.is_unit(&a[r][col]))
            .ok_or(Error::PivotNotUnit { degree: n })?;
        a.swap(pr, col);
        let inv = ring.inverse(&a[col][col])?;
        for c in 0..2 * n {
            a[col][c] = ring.mul(&a[col][c], &inv);
        }
        for r in 0..n {
            if r == col || ring.is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let t = ring.mul(&f, &a[col][c]);
                a[r][c] = ring.sub(&a[r][c], &t);
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec(ring: &LocalRing, m: &Matrix, v: &[El]) -> Vec<El> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(ring.zero(), |acc, (a, b)| ring.add(&acc, &ring.mul(a, b)))
        })
        .collect()
}

pub fn mat_mul(ring: &LocalRing, a: &Matrix, b: &Matrix) -> Matrix {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(ring.zero(), |acc, (x, brow)| ring.add(&acc, &ring.mul(x, &brow[j])))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PrecisionContext;

    #[test]
    fn determinant_of_small_integer_matrix() {
        let r = LocalRing::unramified(&PrecisionContext::with_guard(3, 1, 6, 8, 8).unwrap());
        let m: Matrix = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
            .iter()
            .map(|row| row.iter().map(|&v| r.from_int(v)).collect())
            .collect();
        // 2(12-1) - 1(4-0) = 18
        assert!(r.equal(&determinant(&r, &m).unwrap(), &r.from_int(18)));
        let inv = inverse(&r, &[[r.from_int(2), r.from_int(1)], [r.from_int(1), r.from_int(1)]]
            .iter()
            .map(|x| x.to_vec())
            .collect::<Matrix>())
        .unwrap();
        assert!(r.equal(&inv[0][1], &r.from_int(-1)));
        assert!(r.equal(&inv[1][1], &r.from_int(2)));
        assert!(inverse(&r, &m).is_err());
    }
}
