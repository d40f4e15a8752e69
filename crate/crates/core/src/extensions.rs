//! Totally ramified towers over K: K′ = K(γ), L_u = K′(ω_u), M_u = K(ω_u^{p−1}),
//! and the iterated coherent-root fields K(ω_{u,n}).
//!
//! Every field is stored flat over K with its own Eisenstein generator, and
//! inclusions between fields are explicit [`Embedding`]s. Relative traces
//! and subfield membership go through a [`SubfieldView`].

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::padic::{El, LocalRing};
use crate::poly::{self, Poly};
use crate::residue::Fq;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionLabel {
    Kprime,
    Lu,
    Mu,
    Coherent(usize),
    Custom(String),
}

impl ExtensionLabel {
    fn name(&self) -> String {
        match self {
            ExtensionLabel::Kprime => "K'".into(),
            ExtensionLabel::Lu => "L_u".into(),
            ExtensionLabel::Mu => "M_u".into(),
            ExtensionLabel::Coherent(n) => format!("K(w_{n})"),
            ExtensionLabel::Custom(s) => s.clone(),
        }
    }
}

/// A totally ramified extension of K given by an Eisenstein polynomial.
#[derive(Debug, Clone)]
pub struct ExtensionDescriptor {
    pub label: ExtensionLabel,
    pub ring: LocalRing,
    /// Monic minimal polynomial of the generator over K.
    pub min_poly: Poly,
}

impl ExtensionDescriptor {
    pub fn new(k: &LocalRing, label: ExtensionLabel, min_poly: Poly) -> Result<Self> {
        let min_poly = poly::trim(k, min_poly);
        if !poly::is_eisenstein(k, &min_poly) {
            return Err(Error::Config(format!(
                "{}: defining polynomial is not Eisenstein",
                label.name()
            )));
        }
        let e = min_poly.len() - 1;
        let ring = k.eisenstein(&min_poly[..e], &label.name())?;
        Ok(Self {
            label,
            ring,
            min_poly,
        })
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    /// The generator, which is also the uniformizer.
    pub fn generator(&self) -> El {
        self.ring.uniformizer()
    }
}

/// A K-algebra map between Eisenstein extensions (or from K itself),
/// determined by the image of the source generator.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub src: LocalRing,
    pub dst: LocalRing,
    pub image: El,
}

impl Embedding {
    /// Checks that `image` is a root of the source defining polynomial.
    pub fn new(src: &LocalRing, dst: &LocalRing, image: El) -> Result<Self> {
        if !src.same_base(dst) {
            return Err(Error::Config("embedding between different bases".into()));
        }
        let emb = Self {
            src: src.clone(),
            dst: dst.clone(),
            image,
        };
        if src.e() > 1 {
            let mut val = dst.pow(&emb.image, src.e() as u64);
            let mut power = dst.one();
            for a in src.eisenstein_coeffs() {
                val = dst.add(&val, &dst.mul(&dst.from_base(a), &power));
                power = dst.mul(&power, &emb.image);
            }
            if !dst.is_zero(&val) {
                return Err(Error::CheckFailed(format!(
                    "image is not a root of the {} polynomial (residual valuation {})",
                    src.label(),
                    dst.valuation(&val)
                )));
            }
        }
        Ok(emb)
    }

    pub fn apply(&self, x: &El) -> El {
        self.apply_with(x, |c| c.clone())
    }

    /// Applies the map after acting on K-coefficients by `coeff_map`; with a
    /// Frobenius lift this gives a semilinear map.
    pub fn apply_with(&self, x: &El, coeff_map: impl Fn(&El) -> El) -> El {
        let src = &self.src;
        let dst = &self.dst;
        if src.e() == 1 {
            return dst.from_base(&coeff_map(x));
        }
        let coeffs = src.coeffs(x);
        let mut acc = dst.zero();
        for c in coeffs.iter().rev() {
            acc = dst.add(&dst.mul(&acc, &self.image), &dst.from_base(&coeff_map(c)));
        }
        // K-coefficients carry digit precision; the element's own precision
        // bounds the result through the image valuation.
        let v_img = dst.valuation(&self.image) as u64;
        let cap = (x.prec() as u64 * v_img.max(1)).min(dst.max_prec() as u64) as u32;
        dst.with_prec(&acc, cap)
    }

    /// self ∘ first.
    pub fn after(&self, first: &Embedding) -> Result<Embedding> {
        Embedding::new(&first.src, &self.dst, self.apply(&first.image))
    }
}

/// Multiplication-by-x matrix over K in the basis 1, π, …, π^{e−1}.
pub fn multiplication_matrix(ring: &LocalRing, x: &El) -> Matrix {
    let e = ring.e();
    let mut cols = Vec::with_capacity(e);
    let mut y = x.clone();
    for _ in 0..e {
        cols.push(ring.coeffs(&y));
        y = ring.mul_pi(&y);
    }
    (0..e).map(|i| (0..e).map(|j| cols[j][i].clone()).collect()).collect()
}

/// (Tr, N) down to K: trace and determinant of the multiplication matrix.
pub fn trace_and_norm(ring: &LocalRing, x: &El) -> Result<(El, El)> {
    let k = ring.base();
    let m = multiplication_matrix(ring, x);
    let tr = (0..m.len()).fold(k.zero(), |acc, i| k.add(&acc, &m[i][i]));
    let n = linalg::determinant(&k, &m)?;
    Ok((tr, n))
}

pub fn trace(ring: &LocalRing, x: &El) -> El {
    let k = ring.base();
    let mut y = x.clone();
    let mut tr = k.zero();
    for j in 0..ring.e() {
        tr = k.add(&tr, &ring.coeff(&y, j));
        y = ring.mul_pi(&y);
    }
    tr
}

/// An intermediate field F ⊂ L given by an embedding, with the change of
/// basis from {θ^a π^b} (θ the image of F's generator) to the power basis
/// of L. The change of basis is unimodular because the valuations a·r + b
/// run through 0..e_L exactly once.
#[derive(Debug, Clone)]
pub struct SubfieldView {
    pub emb: Embedding,
    /// Relative degree [L : F].
    pub r: usize,
    inv: Matrix,
}

impl SubfieldView {
    pub fn new(emb: Embedding) -> Result<Self> {
        let (f, l) = (&emb.src, &emb.dst);
        let (ef, el) = (f.e(), l.e());
        if el % ef != 0 {
            return Err(Error::Config("subfield degree does not divide".into()));
        }
        let r = el / ef;
        let k = l.base();
        let mut cols: Vec<Vec<El>> = Vec::with_capacity(el);
        let mut theta_a = l.one();
        let mut rows_by_a = Vec::with_capacity(ef);
        for _ in 0..ef {
            rows_by_a.push(theta_a.clone());
            theta_a = l.mul(&theta_a, &emb.image);
        }
        let mut pi_b = l.one();
        for _ in 0..r {
            for ta in &rows_by_a {
                cols.push(l.coeffs(&l.mul(ta, &pi_b)));
            }
            pi_b = l.mul_pi(&pi_b);
        }
        let basis: Matrix = (0..el)
            .map(|i| (0..el).map(|j| cols[j][i].clone()).collect())
            .collect();
        let inv = linalg::inverse(&k, &basis)?;
        Ok(Self { emb, r, inv })
    }

    pub fn sub(&self) -> &LocalRing {
        &self.emb.src
    }

    pub fn big(&self) -> &LocalRing {
        &self.emb.dst
    }

    /// F-coefficients (c_0, …, c_{r−1}) with x = Σ c_b π_L^b.
    pub fn decompose(&self, x: &El) -> Vec<El> {
        let (f, l) = (self.sub(), self.big());
        let k = l.base();
        let ef = f.e();
        let coords = linalg::mat_vec(&k, &self.inv, &l.coeffs(x));
        (0..self.r)
            .map(|b| {
                if ef == 1 {
                    coords[b].clone()
                } else {
                    f.from_coeffs(&coords[b * ef..(b + 1) * ef])
                }
            })
            .collect()
    }

    /// Tr_{L/F}(x): trace of multiplication by x on the F-basis {π_L^b}.
    pub fn relative_trace(&self, x: &El) -> El {
        let f = self.sub();
        let l = self.big();
        let mut y = x.clone();
        let mut acc = f.zero();
        for b in 0..self.r {
            acc = f.add(&acc, &self.decompose(&y)[b]);
            y = l.mul_pi(&y);
        }
        acc
    }

    /// Writes x as an element of F, failing if the components along π_L^b
    /// for b ≥ 1 are not zero to precision.
    pub fn express(&self, x: &El) -> Result<El> {
        let comps = self.decompose(x);
        let l = self.big();
        let back = self.emb.apply(&comps[0]);
        let residual = l.sub(x, &back);
        if !l.is_zero(&residual) {
            return Err(Error::NotInSubfield {
                residual: l.valuation(&residual),
            });
        }
        Ok(comps[0].clone())
    }
}

/// K′ = K[γ]/(γ^{p−1} + p).
pub fn build_kprime(k: &LocalRing) -> Result<ExtensionDescriptor> {
    let p = k.p() as usize;
    let mut f = vec![k.zero(); p];
    f[0] = k.from_int(p as i64);
    f[p - 1] = k.one();
    ExtensionDescriptor::new(k, ExtensionLabel::Kprime, f)
}

/// f_u(X) = X^p + upX over the given ring.
pub fn f_u(ring: &LocalRing, u: &El) -> Poly {
    let p = ring.p() as usize;
    let mut f = vec![ring.zero(); p + 1];
    f[1] = ring.mul_int(u, p as i64);
    f[p] = ring.one();
    f
}

/// ψ_u(X) = X(X + up)^{p−1} + p over K.
pub fn psi_u(k: &LocalRing, u: &El) -> Poly {
    let p = k.p();
    let lin = vec![k.mul_int(u, p as i64), k.one()];
    let mut f = poly::mul(k, &[k.zero(), k.one()], &poly::pow(k, &lin, p as u32 - 1));
    f[0] = k.add(&f[0], &k.from_int(p as i64));
    f
}

/// The tower K ⊂ K′ ⊂ L_u ⊃ M_u for one Teichmüller unit u.
#[derive(Debug, Clone)]
pub struct Tower {
    pub ctx: PrecisionContext,
    pub k: LocalRing,
    pub u: El,
    pub k_prime: ExtensionDescriptor,
    pub l_u: ExtensionDescriptor,
    pub m_u: ExtensionDescriptor,
    /// γ ↦ ω^p + upω.
    pub kprime_in_l: Embedding,
    /// t ↦ ω^{p−1}.
    pub m_in_l: Embedding,
}

pub fn build_tower(ctx: &PrecisionContext, u: &El) -> Result<Tower> {
    let k = LocalRing::unramified(ctx);
    let k_prime = build_kprime(&k)?;
    build_tower_over(&k, &k_prime, u)
}

/// Tower construction reusing an existing K and K′.
pub fn build_tower_over(k: &LocalRing, k_prime: &ExtensionDescriptor, u: &El) -> Result<Tower> {
    if !k.is_teichmuller_unit(u) {
        return Err(Error::NotAUnit("u must be a Teichmüller lift of a nonzero residue"));
    }
    let p = k.p();
    // (X^p + upX)^{p−1} + p
    let fu = f_u(k, u);
    let mut lpoly = poly::pow(k, &fu, p as u32 - 1);
    lpoly[0] = k.add(&lpoly[0], &k.from_int(p as i64));
    let l_u = ExtensionDescriptor::new(k, ExtensionLabel::Lu, lpoly)?;
    let m_u = ExtensionDescriptor::new(k, ExtensionLabel::Mu, psi_u(k, u))?;
    let l = &l_u.ring;
    let omega = l.uniformizer();
    let gamma_img = poly::eval(l, &poly::from_base(l, &fu), &omega);
    let kprime_in_l = Embedding::new(&k_prime.ring, l, gamma_img)?;
    let m_in_l = Embedding::new(&m_u.ring, l, l.pow(&omega, p - 1))?;
    Ok(Tower {
        ctx: *k.ctx(),
        k: k.clone(),
        u: u.clone(),
        k_prime: k_prime.clone(),
        l_u,
        m_u,
        kprime_in_l,
        m_in_l,
    })
}

impl Tower {
    pub fn l(&self) -> &LocalRing {
        &self.l_u.ring
    }

    pub fn m(&self) -> &LocalRing {
        &self.m_u.ring
    }

    pub fn kp(&self) -> &LocalRing {
        &self.k_prime.ring
    }

    pub fn omega(&self) -> El {
        self.l().uniformizer()
    }

    pub fn gamma_in_l(&self) -> El {
        self.kprime_in_l.image.clone()
    }

    pub fn psi(&self) -> Poly {
        psi_u(&self.k, &self.u)
    }

    /// X^p + upX − γ over K′, the relative polynomial of ω_u.
    pub fn relative_poly(&self) -> Poly {
        let kp = self.kp();
        let mut f = poly::from_base(kp, &f_u(&self.k, &self.u));
        f[0] = kp.neg(&kp.uniformizer());
        f
    }

    /// v_{M_u}(ψ_u′(t)), the different exponent of M_u/K.
    pub fn different_exponent(&self) -> u32 {
        let m = self.m();
        let dpsi = poly::from_base(m, &poly::derivative(&self.k, &self.psi()));
        m.valuation(&poly::eval(m, &dpsi, &m.uniformizer()))
    }

    pub fn m_view(&self) -> Result<SubfieldView> {
        SubfieldView::new(self.m_in_l.clone())
    }

    pub fn kprime_view(&self) -> Result<SubfieldView> {
        SubfieldView::new(self.kprime_in_l.clone())
    }
}

/// All p roots of ψ_u in M_u, the tautological root t first.
///
/// Roots differ from t at valuation exactly 2, so writing a root as t + t²y
/// turns ψ_u(t + t²Y)/t^{2p} into a polynomial whose reduction is separable;
/// its residue roots are lifted by Newton iteration.
pub fn hensel_conjugates(tower: &Tower) -> Result<Vec<El>> {
    let m = tower.m();
    let p = m.p() as usize;
    let t = m.uniformizer();
    let psi = poly::from_base(m, &tower.psi());
    let shift = vec![t.clone(), m.square(&t)];
    let g_raw = poly::compose(m, &psi, &shift);
    let g: Poly = g_raw
        .iter()
        .map(|c| m.div_by_pi_pow(c, 2 * p as u32))
        .collect::<Result<_>>()?;
    let dg = poly::derivative(m, &g);
    let kf = m.residue_field();
    let gbar: Vec<Fq> = g.iter().map(|c| m.residue(c)).collect();
    let eval_bar = |y: Fq| {
        gbar.iter()
            .rev()
            .fold(0, |acc, &c| kf.add(kf.mul(acc, y), c))
    };
    let residue_roots: Vec<Fq> = kf.elements().filter(|&y| eval_bar(y) == 0).collect();
    if residue_roots.len() != p {
        return Err(Error::RootCountMismatch {
            expected: p,
            found: residue_roots.len(),
        });
    }
    let mut roots = Vec::with_capacity(p);
    for r in residue_roots {
        let mut y = m.teichmuller(r);
        for _ in 0..64 {
            let gy = poly::eval(m, &g, &y);
            if m.is_zero(&gy) {
                break;
            }
            let step = m.div(&gy, &poly::eval(m, &dg, &y))?;
            y = m.sub(&y, &step);
        }
        let root = m.add(&t, &m.mul(&m.square(&t), &y));
        if !m.is_zero(&poly::eval(m, &psi, &root)) {
            return Err(Error::RootCountMismatch {
                expected: p,
                found: roots.len(),
            });
        }
        roots.push(root);
    }
    Ok(roots)
}

/// The automorphism of M_u sending t to the given conjugate.
pub fn conjugation(tower: &Tower, root: &El) -> Result<Embedding> {
    Embedding::new(tower.m(), tower.m(), root.clone())
}

/// A coherent set of roots ω_{u,1}, …, ω_{u,n} for f_u, realized in
/// K(ω_{u,n}) with ω_{u,n} as uniformizer and ω_{u,i−1} = f_u(ω_{u,i}).
#[derive(Debug, Clone)]
pub struct CoherentRoots {
    pub u: El,
    pub depth: usize,
    pub field: ExtensionDescriptor,
    /// ω_{u,0} = 0, ω_{u,1}, …, ω_{u,n}.
    pub roots: Vec<El>,
}

impl CoherentRoots {
    /// Adjoins ω_{u,n} through the Eisenstein polynomial f_u^{∘n}/f_u^{∘(n−1)}.
    pub fn build(k: &LocalRing, u: &El, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("coherent roots need depth ≥ 1".into()));
        }
        if !k.is_unit(u) {
            return Err(Error::NotAUnit("u must be a unit"));
        }
        let f = f_u(k, u);
        let mut prev = vec![k.zero(), k.one()];
        let mut cur = f.clone();
        for _ in 1..n {
            prev = cur.clone();
            cur = poly::compose(k, &f, &cur);
        }
        let min_poly = poly::div_exact(k, &cur, &prev)?;
        let field = ExtensionDescriptor::new(k, ExtensionLabel::Coherent(n), min_poly)?;
        let ring = &field.ring;
        let fl = poly::from_base(ring, &f);
        let mut roots = vec![ring.uniformizer()];
        for _ in 0..n {
            let next = poly::eval(ring, &fl, roots.last().unwrap());
            roots.push(next);
        }
        roots.reverse();
        if !ring.is_zero(&roots[0]) || ring.is_zero(&roots[1]) {
            return Err(Error::CheckFailed("coherent root chain is degenerate".into()));
        }
        Ok(Self {
            u: u.clone(),
            depth: n,
            field,
            roots,
        })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.field.ring
    }

    /// ω_{u,i} for 0 ≤ i ≤ depth.
    pub fn omega(&self, i: usize) -> &El {
        &self.roots[i]
    }

    /// Embedding of K(ω_{u,n}) into a deeper level K(ω_{u,m}), m ≥ n.
    pub fn embed_into(&self, deeper: &CoherentRoots) -> Result<Embedding> {
        Embedding::new(
            self.ring(),
            deeper.ring(),
            deeper.omega(self.depth).clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, d: usize) -> PrecisionContext {
        PrecisionContext::with_guard(p, d, 8, 16, 10).unwrap()
    }

    #[test]
    fn psi_for_p3_u1() {
        let k = LocalRing::unramified(&ctx(3, 1));
        let psi = psi_u(&k, &k.one());
        let expect = [3, 9, 6, 1];
        for (c, e) in psi.iter().zip(expect) {
            assert!(k.equal(c, &k.from_int(e)));
        }
    }

    #[test]
    fn tower_identities() {
        for (p, d) in [(3, 1), (3, 2), (5, 1)] {
            let c = ctx(p, d);
            let k = LocalRing::unramified(&c);
            let u = k.teichmuller(k.residue_field().order() - 1);
            let tw = build_tower(&c, &u).unwrap();
            let l = tw.l();
            let w = tw.omega();
            let g = tw.gamma_in_l();
            // ω^p = γ − upω
            let rhs = l.sub(&g, &l.mul(&l.from_base(&l.base().mul_int(&u, p as i64)), &w));
            assert!(l.equal(&l.pow(&w, p), &rhs));
            // γ^{p−1} = −p
            assert!(l.equal(&l.pow(&g, p - 1), &l.from_int(-(p as i64))));
            assert_eq!(l.valuation(&l.from_int(p as i64)), (p * (p - 1)) as u32);
            assert_eq!(tw.different_exponent(), 2 * (p as u32 - 1));
            assert!(poly::is_eisenstein(tw.kp(), &tw.relative_poly()));
        }
    }

    #[test]
    fn trace_norm_on_mu() {
        let c = ctx(3, 2);
        let k = LocalRing::unramified(&c);
        let tw = build_tower(&c, &k.one()).unwrap();
        let m = tw.m();
        let (tr, _) = trace_and_norm(m, &m.one()).unwrap();
        assert!(k.equal(&tr, &k.from_int(3)));
        let (_, n) = trace_and_norm(m, &m.uniformizer()).unwrap();
        assert!(k.equal(&n, &k.from_int(-3)));
    }

    #[test]
    fn conjugates_are_distinct_roots() {
        for (p, d) in [(3, 1), (3, 2), (5, 1)] {
            let c = ctx(p, d);
            let k = LocalRing::unramified(&c);
            let tw = build_tower(&c, &k.one()).unwrap();
            let m = tw.m();
            let roots = hensel_conjugates(&tw).unwrap();
            assert_eq!(roots.len(), p as usize);
            assert!(m.equal(&roots[0], &m.uniformizer()));
            for i in 0..roots.len() {
                for j in 0..i {
                    assert_eq!(m.agreement(&roots[i], &roots[j]), 2);
                }
            }
        }
    }

    #[test]
    fn subfield_expression() {
        let c = ctx(3, 1);
        let k = LocalRing::unramified(&c);
        let tw = build_tower(&c, &k.one()).unwrap();
        let view = tw.m_view().unwrap();
        let l = tw.l();
        let m = tw.m();
        let w = tw.omega();
        let t = view.express(&l.pow(&w, 2)).unwrap();
        assert!(m.equal(&t, &m.uniformizer()));
        assert!(m.equal(&view.express(&l.one()).unwrap(), &m.one()));
        assert!(matches!(view.express(&w), Err(Error::NotInSubfield { .. })));
        // Tr_{L/K} = Tr_{M/K} ∘ Tr_{L/M}
        let x = l.add(&l.pow(&w, 3), &l.from_int(2));
        let lhs = trace(l, &x);
        let rhs = trace(m, &view.relative_trace(&x));
        assert!(k.equal(&lhs, &rhs));
    }

    #[test]
    fn coherent_roots_chain() {
        let c = ctx(3, 1);
        let k = LocalRing::unramified(&c);
        let cr = CoherentRoots::build(&k, &k.one(), 2).unwrap();
        let r = cr.ring();
        assert_eq!(r.e(), 6);
        let w1 = cr.omega(1);
        // ω_1^{p−1} = −up
        assert!(r.equal(&r.square(w1), &r.from_int(-3)));
        assert_eq!(r.valuation(w1), 3);
    }
}
