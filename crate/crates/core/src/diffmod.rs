//! Rank-one differential modules ∂_X − g over truncated series, with
//! ∂_X = X·d/dX, gauge changes, and the Frobenius pullback X ↦ X^p.

use serde::Serialize;

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::exponentials::{coherent_polynomial, e_un_series};
use crate::extensions::CoherentRoots;
use crate::padic::{El, LocalRing};
use crate::series::TruncatedSeries;

/// g + ∂f/f.
pub fn gauge_transform(g: &TruncatedSeries, f: &TruncatedSeries) -> Result<TruncatedSeries> {
    Ok(g.add(&f.log_derivative()?))
}

/// The module defined by ∂_X − g.
#[derive(Debug, Clone)]
pub struct RankOneConnection {
    pub g: TruncatedSeries,
}

impl RankOneConnection {
    pub fn new(g: TruncatedSeries) -> Self {
        Self { g }
    }

    pub fn ring(&self) -> &LocalRing {
        self.g.ring()
    }

    /// The same module in the basis f·e.
    pub fn gauge(&self, f: &TruncatedSeries) -> Result<Self> {
        Ok(Self::new(gauge_transform(&self.g, f)?))
    }

    /// Whether f witnesses an isomorphism self ≅ other. A negative answer
    /// says nothing about other gauge factors.
    pub fn isomorphic_via(&self, other: &Self, f: &TruncatedSeries) -> Result<bool> {
        Ok(self.gauge(f)?.g.equal(&other.g))
    }

    pub fn pullback(&self, phi: &FrobeniusDescriptor) -> Result<Self> {
        frobenius_pullback(self, phi)
    }
}

/// φ on K(ω_{u,n}): σ on K-coefficients, ω_{u,n} ↦ u·ω_{u,n}, X ↦ X^p and
/// derivative factor p.
#[derive(Debug, Clone)]
pub struct FrobeniusDescriptor {
    ring: LocalRing,
    u: El,
}

impl FrobeniusDescriptor {
    /// Needs u ∈ μ_{p−1} ⊂ Z_p so that the uniformizer's minimal polynomial
    /// is carried to itself.
    pub fn new(ring: &LocalRing, u: &El) -> Result<Self> {
        let k = ring.base();
        if !k.is_teichmuller_unit(u) || !k.equal(&k.pow(u, k.p()), u) {
            return Err(Error::NotAUnit("u ∈ μ_{p−1}"));
        }
        Ok(Self {
            ring: ring.clone(),
            u: u.clone(),
        })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    /// φ_coeff(Σ a_j π^j) = Σ σ(a_j) u^j π^j.
    pub fn apply(&self, x: &El) -> Result<El> {
        let r = &self.ring;
        let k = r.base();
        let mut uj = k.one();
        let mut out = Vec::with_capacity(r.e());
        for a in r.coeffs(x) {
            out.push(k.mul(&k.frobenius(&a)?, &uj));
            uj = k.mul(&uj, &self.u);
        }
        Ok(r.with_prec(&r.from_coeffs(&out), x.prec()))
    }
}

fn degree(g: &TruncatedSeries) -> Option<usize> {
    let r = g.ring();
    (0..=g.cap()).rev().find(|&n| !r.is_zero(g.coeff(n)))
}

/// ∂_X − g ↦ ∂_X − p·φ(g)(X^p).
pub fn frobenius_pullback(m: &RankOneConnection, phi: &FrobeniusDescriptor) -> Result<RankOneConnection> {
    let r = m.ring();
    if !r.same_ring(phi.ring()) {
        return Err(Error::Config("Frobenius descriptor is for another ring".into()));
    }
    let p = r.p() as usize;
    let cap = m.g.cap();
    if let Some(deg) = degree(&m.g) {
        if p * deg > cap {
            return Err(Error::DegreeOverflow(format!(
                "p·deg g = {} exceeds the truncation degree {cap}",
                p * deg
            )));
        }
    }
    let mut coeffs = Vec::with_capacity(cap + 1);
    for a in m.g.coeffs() {
        coeffs.push(r.mul_int(&phi.apply(a)?, p as i64));
    }
    let twisted = TruncatedSeries::new(r, coeffs, cap);
    Ok(RankOneConnection::new(twisted.substitute_monomial(&r.one(), p)))
}

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusStructureReport {
    pub p: u64,
    pub depth: usize,
    pub cap: usize,
    pub ramification: usize,
    /// Uniformizer digits to which gauge(g, E_{u,n}(−X)) and φ*(g) agree.
    pub residual_valuation: u32,
    /// Required agreement: N·e.
    pub target: u32,
    pub first_failure: Option<usize>,
    /// ∂_X − g ≅ φ*(∂_X − g) via E_{u,n}(−X).
    pub holds: bool,
}

/// Builds g = Σ_{i<n} ω_{u,n−i} X^{p^i} and tests
/// X·f′/f + g − up·g(X^p) ≡ 0 mod (X^{cap+1}, p^N) for f = E_{u,n}(−X).
pub fn frobenius_structure_report(
    ctx: &PrecisionContext,
    u: &El,
    n: usize,
    cap: usize,
) -> Result<FrobeniusStructureReport> {
    let k = LocalRing::unramified(ctx);
    let roots = CoherentRoots::build(&k, u, n)?;
    let r = roots.ring();
    let phi = FrobeniusDescriptor::new(r, u)?;
    let m = RankOneConnection::new(coherent_polynomial(&roots, cap));
    let e = e_un_series(&roots, cap)?;
    let f = e.substitute_monomial(&r.from_int(-1), 1);
    let lhs = m.gauge(&f)?;
    let rhs = m.pullback(&phi)?;
    let target = ctx.n * r.e() as u32;
    let first_failure = (0..=cap).find(|&i| r.agreement(lhs.g.coeff(i), rhs.g.coeff(i)) < target);
    let residual_valuation = lhs.g.agreement(&rhs.g);
    Ok(FrobeniusStructureReport {
        p: ctx.p,
        depth: n,
        cap,
        ramification: r.e(),
        residual_valuation,
        target,
        first_failure,
        holds: first_failure.is_none(),
    })
}

/// As [`frobenius_structure_report`], failing with the first bad coefficient.
pub fn verify_frobenius_structure(
    ctx: &PrecisionContext,
    u: &El,
    n: usize,
    cap: usize,
) -> Result<FrobeniusStructureReport> {
    let rep = frobenius_structure_report(ctx, u, n, cap)?;
    match rep.first_failure {
        Some(index) => Err(Error::IdentityResidualNonzero {
            index,
            valuation: rep.residual_valuation,
        }),
        None => Ok(rep),
    }
}
