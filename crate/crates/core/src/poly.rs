//! Dense polynomials over a [`LocalRing`], coefficients listed from degree 0.

use crate::error::{Error, Result};
use crate::padic::{El, LocalRing};

pub type Poly = Vec<El>;

/// Drops leading coefficients that are zero to precision.
pub fn trim(ring: &LocalRing, mut f: Poly) -> Poly {
    while f.len() > 1 && ring.is_zero(f.last().unwrap()) {
        f.pop();
    }
    f
}

pub fn from_ints(ring: &LocalRing, coeffs: &[i64]) -> Poly {
    coeffs.iter().map(|&c| ring.from_int(c)).collect()
}

pub fn add(ring: &LocalRing, f: &[El], g: &[El]) -> Poly {
    let n = f.len().max(g.len());
    (0..n)
        .map(|i| match (f.get(i), g.get(i)) {
            (Some(a), Some(b)) => ring.add(a, b),
            (Some(a), None) => a.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => unreachable!(),
        })
        .collect()
}

pub fn sub(ring: &LocalRing, f: &[El], g: &[El]) -> Poly {
    let ng: Poly = g.iter().map(|b| ring.neg(b)).collect();
    add(ring, f, &ng)
}

pub fn scale(ring: &LocalRing, f: &[El], c: &El) -> Poly {
    f.iter().map(|a| ring.mul(a, c)).collect()
}

pub fn mul(ring: &LocalRing, f: &[El], g: &[El]) -> Poly {
    if f.is_empty() || g.is_empty() {
        return vec![];
    }
    let mut out = vec![ring.zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if ring.is_zero(a) && a.prec() == ring.max_prec() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] = ring.add(&out[i + j], &ring.mul(a, b));
        }
    }
    out
}

pub fn pow(ring: &LocalRing, f: &[El], n: u32) -> Poly {
    let mut acc = vec![ring.one()];
    for _ in 0..n {
        acc = mul(ring, &acc, f);
    }
    acc
}

pub fn eval(ring: &LocalRing, f: &[El], x: &El) -> El {
    f.iter()
        .rev()
        .fold(ring.zero(), |acc, c| ring.add(&ring.mul(&acc, x), c))
}

pub fn derivative(ring: &LocalRing, f: &[El]) -> Poly {
    if f.len() <= 1 {
        return vec![ring.zero()];
    }
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| ring.mul_int(a, i as i64))
        .collect()
}

/// f(g(X)).
pub fn compose(ring: &LocalRing, f: &[El], g: &[El]) -> Poly {
    let mut acc: Poly = vec![ring.zero()];
    for c in f.iter().rev() {
        acc = mul(ring, &acc, g);
        acc = add(ring, &acc, std::slice::from_ref(c));
    }
    trim(ring, acc)
}

/// Quotient and remainder by a monic divisor.
pub fn divrem_monic(ring: &LocalRing, f: &[El], g: &[El]) -> Result<(Poly, Poly)> {
    let dg = g.len() - 1;
    if !ring.equal(&g[dg], &ring.one()) {
        return Err(Error::Config("divisor must be monic".into()));
    }
    if f.len() <= dg {
        return Ok((vec![ring.zero()], f.to_vec()));
    }
    let mut r = f.to_vec();
    let mut q = vec![ring.zero(); f.len() - dg];
    for k in (0..q.len()).rev() {
        let c = r[k + dg].clone();
        for (i, gi) in g.iter().enumerate() {
            r[k + i] = ring.sub(&r[k + i], &ring.mul(&c, gi));
        }
        q[k] = c;
    }
    r.truncate(dg.max(1));
    Ok((q, r))
}

/// Exact quotient by a monic divisor, failing on a nonzero remainder.
pub fn div_exact(ring: &LocalRing, f: &[El], g: &[El]) -> Result<Poly> {
    let (q, r) = divrem_monic(ring, f, g)?;
    if let Some(bad) = r.iter().find(|c| !ring.is_zero(c)) {
        return Err(Error::CheckFailed(format!(
            "nonzero remainder of valuation {}",
            ring.valuation(bad)
        )));
    }
    Ok(q)
}

/// Whether a monic polynomial is Eisenstein: all lower coefficients in (π)
/// and the constant term of valuation exactly one.
pub fn is_eisenstein(ring: &LocalRing, f: &[El]) -> bool {
    let n = f.len() - 1;
    ring.equal(&f[n], &ring.one())
        && f[..n].iter().all(|a| ring.valuation(a) >= 1)
        && ring.valuation(&f[0]) == 1
}

/// Embeds a polynomial over the unramified base into `ring`.
pub fn from_base(ring: &LocalRing, f: &[El]) -> Poly {
    f.iter().map(|a| ring.from_base(a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PrecisionContext;

    fn zp() -> LocalRing {
        LocalRing::unramified(&PrecisionContext::with_guard(5, 1, 6, 8, 8).unwrap())
    }

    #[test]
    fn division_recovers_factor() {
        let r = zp();
        let f = from_ints(&r, &[2, 3, 1]);
        let g = from_ints(&r, &[-1, 1]);
        let h = mul(&r, &f, &g);
        let q = div_exact(&r, &h, &g).unwrap();
        assert_eq!(q.len(), 3);
        for (a, b) in q.iter().zip(&f) {
            assert!(r.equal(a, b));
        }
        assert!(div_exact(&r, &f, &g).is_err());
    }

    #[test]
    fn composition_and_evaluation_commute() {
        let r = zp();
        let f = from_ints(&r, &[1, 0, 2, 1]);
        let g = from_ints(&r, &[0, 3, 1]);
        let x = r.from_int(7);
        let lhs = eval(&r, &compose(&r, &f, &g), &x);
        let rhs = eval(&r, &f, &eval(&r, &g, &x));
        assert!(r.equal(&lhs, &rhs));
    }

    #[test]
    fn eisenstein_detection() {
        let r = zp();
        assert!(is_eisenstein(&r, &from_ints(&r, &[5, 0, 1])));
        assert!(!is_eisenstein(&r, &from_ints(&r, &[25, 0, 1])));
        assert!(!is_eisenstein(&r, &from_ints(&r, &[5, 1, 1])));
    }
}
