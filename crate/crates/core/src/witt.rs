//! Finite-length Witt vectors over a p-adic ring, handled through ghost
//! coordinates ⟨λ^{(0)}, λ^{(1)}, …⟩ with λ^{(n)} = Σ_{i≤n} p^i λ_i^{p^{n−i}}.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extensions::f_u;
use crate::padic::{El, LocalRing};
use crate::poly::{self, Poly};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone)]
pub struct WittVector {
    ring: LocalRing,
    comps: Vec<El>,
}

impl WittVector {
    pub fn new(ring: &LocalRing, comps: Vec<El>) -> Self {
        Self {
            ring: ring.clone(),
            comps,
        }
    }

    pub fn zero(ring: &LocalRing, len: usize) -> Self {
        Self::new(ring, vec![ring.zero(); len])
    }

    /// (a, 0, 0, …).
    pub fn teichmuller(ring: &LocalRing, a: &El, len: usize) -> Self {
        let mut w = Self::zero(ring, len);
        w.comps[0] = a.clone();
        w
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> &[El] {
        &self.comps
    }

    /// Zero-extends (or truncates) the component list.
    pub fn resized(&self, len: usize) -> Self {
        let mut comps = self.comps.clone();
        comps.resize(len, self.ring.zero());
        Self::new(&self.ring, comps)
    }

    pub fn ghost(&self) -> Vec<El> {
        let r = &self.ring;
        let p = r.p();
        (0..self.len())
            .map(|n| {
                let mut acc = r.zero();
                let mut pi = r.one();
                for i in 0..=n {
                    let e = p.pow((n - i) as u32);
                    acc = r.add(&acc, &r.mul(&pi, &r.pow(&self.comps[i], e)));
                    pi = r.mul_int(&pi, p as i64);
                }
                acc
            })
            .collect()
    }

    /// The Witt vector with the given ghost components, if the successive
    /// divisions by p^n are exact.
    pub fn unghost(ring: &LocalRing, ghost: &[El]) -> Result<Self> {
        let r = ring;
        let p = r.p();
        let mut comps: Vec<El> = Vec::with_capacity(ghost.len());
        for (n, g) in ghost.iter().enumerate() {
            let mut acc = g.clone();
            let mut pi = r.one();
            for (i, lam) in comps.iter().enumerate() {
                let e = p.pow((n - i) as u32);
                acc = r.sub(&acc, &r.mul(&pi, &r.pow(lam, e)));
                pi = r.mul_int(&pi, p as i64);
            }
            let lam = r.div_by_p_pow(&acc, n as u32).map_err(|err| match err {
                Error::NotDivisible(_) => Error::NotInGhostImage { index: n },
                other => other,
            })?;
            comps.push(lam);
        }
        Ok(Self::new(r, comps))
    }

    fn ghostwise(&self, other: &Self, f: impl Fn(&El, &El) -> El) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::Config("Witt vectors of different lengths".into()));
        }
        let g: Vec<El> = self
            .ghost()
            .iter()
            .zip(other.ghost())
            .map(|(a, b)| f(a, &b))
            .collect();
        Self::unghost(&self.ring, &g)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| self.ring.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| self.ring.sub(a, b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ghostwise(other, |a, b| self.ring.mul(a, b))
    }

    pub fn equal(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .comps
                .iter()
                .zip(&other.comps)
                .all(|(a, b)| self.ring.equal(a, b))
    }
}

/// [h(x)]: the Witt vector with ghost vector ⟨h(x), h(f_u(x)), h(f_u²(x)), …⟩,
/// where f_u(X) = X^p + upX and h has coefficients in Z_p.
pub fn bracket_map(h: &[El], x: &El, u: &El, ring: &LocalRing, len: usize) -> Result<WittVector> {
    if ring.valuation(x) < 1 {
        return Err(Error::ConvergenceDomain("bracket map needs v(x) ≥ 1"));
    }
    let f = f_u(ring, u);
    let mut y = x.clone();
    let mut ghost = Vec::with_capacity(len);
    for _ in 0..len {
        ghost.push(poly::eval(ring, h, &y));
        y = poly::eval(ring, &f, &y);
    }
    WittVector::unghost(ring, &ghost)
}

/// E(λ, X) = exp(Σ λ^{(i)} X^{p^i}/p^i) through its logarithmic derivative
/// Σ λ^{(i)} X^{p^i}. The vector is zero-extended so that every ghost
/// component with p^i ≤ cap contributes.
pub fn artin_hasse_relative(lambda: &WittVector, cap: usize) -> Result<TruncatedSeries> {
    let r = lambda.ring();
    let p = r.p() as usize;
    let mut levels = 0;
    while p.pow(levels as u32) <= cap {
        levels += 1;
    }
    let ghost = lambda.resized(levels.max(lambda.len())).ghost();
    let terms: Vec<(El, usize)> = ghost
        .into_iter()
        .take(levels)
        .enumerate()
        .map(|(i, g)| (g, p.pow(i as u32)))
        .collect();
    let h = TruncatedSeries::from_terms(r, cap, &terms);
    TruncatedSeries::exp_from_log_derivative(&h)
}

/// The classical Artin–Hasse exponential E(X) over the given ring.
pub fn artin_hasse(ring: &LocalRing, cap: usize) -> Result<TruncatedSeries> {
    artin_hasse_relative(&WittVector::teichmuller(ring, &ring.one(), 1), cap)
}

/// E(λ, X) as the product Π_i E(λ_i X^{p^i}).
pub fn artin_hasse_product(lambda: &WittVector, cap: usize) -> Result<TruncatedSeries> {
    let r = lambda.ring();
    let p = r.p() as usize;
    let e = artin_hasse(r, cap)?;
    let mut acc = TruncatedSeries::one(r, cap);
    for (i, lam) in lambda.comps().iter().enumerate() {
        let m = p.pow(i as u32);
        if m > cap {
            break;
        }
        acc = acc.mul(&e.substitute_monomial(lam, m));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma22Report {
    /// v_p(h(0)), `None` when h(0) = 0.
    pub a0_valuation: Option<u32>,
    /// First index r with λ_r a unit.
    pub first_unit: Option<usize>,
    /// v_π of each component (capped at precision).
    pub component_valuations: Vec<u32>,
    pub holds: bool,
}

/// Checks that the first unit component of [h(x)] sits at index v_p(h(0)),
/// and that no component is a unit when h(0) = 0.
pub fn lemma22_check(h: &Poly, x: &El, u: &El, ring: &LocalRing, len: usize) -> Result<Lemma22Report> {
    let lam = bracket_map(h, x, u, ring, len)?;
    let vals: Vec<u32> = lam.comps().iter().map(|c| ring.valuation(c)).collect();
    let first_unit = vals.iter().position(|&v| v == 0);
    let a0 = &h[0];
    let a0_valuation = (!ring.is_zero(a0)).then(|| ring.valuation(a0) / ring.e() as u32);
    let holds = match a0_valuation {
        None => first_unit.is_none(),
        Some(r) if (r as usize) < len => first_unit == Some(r as usize),
        Some(_) => first_unit.is_none(),
    };
    Ok(Lemma22Report {
        a0_valuation,
        first_unit,
        component_valuations: vals,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PrecisionContext;

    fn zp() -> LocalRing {
        LocalRing::unramified(&PrecisionContext::with_guard(3, 1, 10, 64, 40).unwrap())
    }

    #[test]
    fn ghost_small_cases() {
        let r = zp();
        let a = r.from_int(5);
        let g = WittVector::new(&r, vec![a.clone(), r.zero()]).ghost();
        assert!(r.equal(&g[1], &r.pow(&a, 3)));
        let g = WittVector::new(&r, vec![r.zero(), r.one()]).ghost();
        assert!(r.equal(&g[1], &r.from_int(3)));
        let w = WittVector::unghost(&r, &[r.one(), r.from_int(4)]).unwrap();
        assert!(r.equal(&w.comps()[1], &r.one()));
        assert!(matches!(
            WittVector::unghost(&r, &[r.one(), r.from_int(2)]),
            Err(Error::NotInGhostImage { index: 1 })
        ));
    }

    #[test]
    fn teichmuller_vectors_multiply() {
        let r = zp();
        let a = WittVector::teichmuller(&r, &r.from_int(2), 3);
        let b = WittVector::teichmuller(&r, &r.from_int(7), 3);
        let c = a.mul(&b).unwrap();
        assert!(c.equal(&WittVector::teichmuller(&r, &r.from_int(14), 3)));
        let s = a.add(&WittVector::teichmuller(&r, &r.from_int(-2), 3)).unwrap();
        assert!(s.equal(&WittVector::zero(&r, 3)));
    }

    #[test]
    fn classical_artin_hasse_is_integral() {
        let r = zp();
        let e = artin_hasse(&r, 40).unwrap();
        let half = r.div_int(&r.one(), 2).unwrap();
        assert!(r.equal(e.coeff(2), &half));
        assert_eq!(r.valuation(e.coeff(2)), 0);
        let lam = WittVector::new(&r, vec![r.from_int(3), r.from_int(2), r.from_int(1)]);
        let a = artin_hasse_relative(&lam, 40).unwrap();
        let b = artin_hasse_product(&lam, 40).unwrap();
        assert!(a.equal(&b));
    }
}
