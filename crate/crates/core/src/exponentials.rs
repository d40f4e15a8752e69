//! Dwork's series E_γ, the series ℰ_{u,2} over L_u, the generalized E_{u,n},
//! Kummer generators and the self-dual normal basis generator α_u of M_u/K.

use serde::Serialize;

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::extensions::{
    build_kprime, build_tower_over, conjugation, f_u, hensel_conjugates, trace, CoherentRoots,
    ExtensionDescriptor, Tower,
};
use crate::padic::{El, LocalRing};
use crate::residue::{smallest_primitive_root, Fq};
use crate::series::{Evaluation, Rigor, TruncatedSeries};
use crate::witt::{artin_hasse_relative, bracket_map};
use crate::wide::Wide;

/// E_γ(X) = exp(γX − γX^p) over K′, from ∂ log E_γ = γX − pγX^p.
pub fn dwork_series(kp: &LocalRing, cap: usize) -> Result<TruncatedSeries> {
    let p = kp.p() as usize;
    let g = kp.uniformizer();
    let h = TruncatedSeries::from_terms(kp, cap, &[(g.clone(), 1), (kp.mul_int(&g, -(p as i64)), p)]);
    TruncatedSeries::exp_from_log_derivative(&h)
}

/// ℰ_{u,2}(X) over L_u, from ∂ log ℰ = ωX − puωX^p + γX^p − pγX^{p²}.
pub fn e_u2_series(tower: &Tower, cap: usize) -> Result<TruncatedSeries> {
    let l = tower.l();
    let p = l.p() as i64;
    let w = tower.omega();
    let g = tower.gamma_in_l();
    let uw = l.mul(&l.from_base(&tower.u), &w);
    let h = TruncatedSeries::from_terms(
        l,
        cap,
        &[
            (w, 1),
            (l.mul_int(&uw, -p), p as usize),
            (g.clone(), p as usize),
            (l.mul_int(&g, -p), (p * p) as usize),
        ],
    );
    TruncatedSeries::exp_from_log_derivative(&h)
}

/// g(X) = Σ_{i<n} ω_{u,n−i} X^{p^i}, the connection coefficient attached to
/// a coherent root system of depth n.
pub fn coherent_polynomial(roots: &CoherentRoots, cap: usize) -> TruncatedSeries {
    let r = roots.ring();
    let p = r.p() as usize;
    let n = roots.depth;
    let terms: Vec<(El, usize)> = (0..n)
        .map(|i| (roots.omega(n - i).clone(), p.pow(i as u32)))
        .collect();
    TruncatedSeries::from_terms(r, cap, &terms)
}

/// E_{u,n}(X) = exp(Σ_{i<n} ω_{u,n−i}(X^{p^i} − uX^{p^{i+1}})/p^i), whose
/// logarithmic derivative is g(X) − up·g(X^p).
pub fn e_un_series(roots: &CoherentRoots, cap: usize) -> Result<TruncatedSeries> {
    let r = roots.ring();
    let p = r.p() as i64;
    let g = coherent_polynomial(roots, cap);
    let up = r.from_base(&r.base().mul_int(&roots.u, p));
    let h = g.sub(&g.substitute_monomial(&r.one(), p as usize).scale(&up));
    TruncatedSeries::exp_from_log_derivative(&h)
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizationReport {
    pub depth: usize,
    pub cap: usize,
    /// Agreement of E_{u,n} with exp(upω_{n+1}X)·E([ω_{n+1}][h(ω_{n+1})], X),
    /// in p-digits.
    pub residual_digits: f64,
    /// Agreement of the Witt-vector ghosts with ω_{n−i} − upω_{n+1−i}.
    pub ghost_residual_digits: f64,
    /// v_π of λ_0, …: all positive per the key lemma.
    pub lambda_valuations: Vec<u32>,
    pub holds: bool,
}

/// Checks the factorization of E_{u,n} through a relative Artin–Hasse
/// exponential, with h(X) = f_u(X)/X − up, inside K(ω_{u,n+1}).
pub fn e_un_factorization(
    roots: &CoherentRoots,
    deeper: &CoherentRoots,
    cap: usize,
) -> Result<FactorizationReport> {
    if deeper.depth != roots.depth + 1 {
        return Err(Error::Config("factorization needs depth n and n+1 roots".into()));
    }
    let n = roots.depth;
    let big = deeper.ring();
    let k = big.base();
    let p = big.p();
    let emb = roots.embed_into(deeper)?;
    let lhs = e_un_series(roots, cap)?.map_ring(&emb);

    let mut levels = 0;
    while (p as usize).pow(levels as u32) <= cap {
        levels += 1;
    }
    let len = levels.max(n + 1);
    let u_big = big.from_base(&roots.u);
    let x = deeper.omega(n + 1).clone();
    let id: Vec<El> = vec![big.zero(), big.one()];
    let fu = f_u(&k, &roots.u);
    let h: Vec<El> = {
        // f_u(X)/X − up
        let mut h: Vec<El> = fu[1..].iter().map(|c| big.from_base(c)).collect();
        h[0] = big.zero();
        h
    };
    let w = bracket_map(&id, &x, &u_big, big, len)?;
    let hv = bracket_map(&h, &x, &u_big, big, len)?;
    let lambda = w.mul(&hv)?;
    let ghosts = lambda.ghost();
    let up = big.mul_int(&u_big, p as i64);
    let mut ghost_agree = big.max_prec();
    for (i, gi) in ghosts.iter().enumerate() {
        let expect = if i <= n {
            big.sub(deeper.omega(n - i), &big.mul(&up, deeper.omega(n + 1 - i)))
        } else {
            big.zero()
        };
        ghost_agree = ghost_agree.min(big.agreement(gi, &expect));
    }
    let ah = artin_hasse_relative(&lambda, cap)?;
    let lin = TruncatedSeries::monomial(big, cap, big.mul(&up, &x), 1);
    let rhs = TruncatedSeries::exp_from_log_derivative(&lin)?.mul(&ah);
    let agree = lhs.agreement(&rhs);
    let e = big.e() as f64;
    let lambda_valuations: Vec<u32> = lambda.comps().iter().map(|c| big.valuation(c)).collect();
    let holds = lhs.equal(&rhs) && lambda_valuations.iter().all(|&v| v > 0);
    Ok(FactorizationReport {
        depth: n,
        cap,
        residual_digits: agree as f64 / e,
        ghost_residual_digits: ghost_agree as f64 / e,
        lambda_valuations,
        holds,
    })
}

/// The Teichmüller lift z ∈ μ_{p−1} ⊂ Z_p of the smallest primitive root
/// mod p, as an integer modulo p^w.
pub fn twist_exponent(ring: &LocalRing) -> Wide {
    let zp = LocalRing::zp(ring.ctx()).expect("valid context");
    let g = smallest_primitive_root(ring.p());
    zp.canonical(&zp.teichmuller(g))[0]
}

/// x^z for a p-adic integer exponent given modulo p^w; valid for x ∈ 1 + P
/// where x^{p^w} is 1 far beyond working precision.
pub fn pow_padic(ring: &LocalRing, x: &El, z: &Wide) -> El {
    ring.pow_wide(x, z)
}

/// Digits to which the Kummer identity must hold on the partial sums.
pub const KUMMER_RESIDUAL_FLOOR: f64 = 10.0;

/// Shared state for computations at fixed (p, d, N, D).
#[derive(Debug, Clone)]
pub struct Exponentials {
    pub ctx: PrecisionContext,
    pub k: LocalRing,
    pub k_prime: ExtensionDescriptor,
    pub dwork: TruncatedSeries,
}

#[derive(Debug, Clone, Serialize)]
pub struct KummerReport {
    pub v: Fq,
    /// Agreement of ℰ_{u,2}(v)^p with E_γ(v^p), in p-digits.
    pub residual_digits: f64,
    /// Tail bounds (p-digits) for ℰ_{u,2} past the degree cap.
    pub tail_certified: f64,
    pub tail_heuristic: f64,
    /// v_{K′}(E_γ(v^p) − 1).
    pub kprime_valuation: u32,
    /// E_γ(v^p) ≡ 1 + v^p γ mod γ².
    pub linear_term_ok: bool,
    pub rigor: Rigor,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct SelfDualGenerator {
    pub v: Fq,
    pub tower: Tower,
    /// ℰ_{u,2}(v) in L_u.
    pub kummer: El,
    /// β = pα_u as an element of M_u.
    pub beta: El,
    /// β^{(i)}, images of β under t ↦ t_i.
    pub conjugates: Vec<El>,
    /// Tr_{M_u/K}(α^{(i)}α^{(j)}).
    pub gram: Vec<Vec<El>>,
    pub rigor: Rigor,
}

impl SelfDualGenerator {
    /// v_{M_u}(α_u).
    pub fn alpha_valuation(&self) -> i64 {
        let m = self.tower.m();
        m.valuation(&self.beta) as i64 - m.e() as i64
    }

    /// Digits to which the Gram matrix agrees with the identity.
    pub fn gram_identity_digits(&self) -> u32 {
        let k = &self.tower.k;
        let mut best = u32::MAX;
        for (i, row) in self.gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let target = if i == j { k.one() } else { k.zero() };
                best = best.min(k.agreement(g, &target));
            }
        }
        best
    }

    /// Symmetric and circulant in the cyclic order of the conjugates.
    pub fn gram_is_symmetric(&self) -> bool {
        let k = &self.tower.k;
        let n = self.gram.len();
        (0..n).all(|i| (0..n).all(|j| k.equal(&self.gram[i][j], &self.gram[j][i])))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub v: Fq,
    /// Every twisted sum matched one Hensel conjugate, bijectively.
    pub sets_match: bool,
    /// Index of the conjugate matched by j = 0 (should be the identity).
    pub j0_matches_alpha: bool,
    /// Tr_{M/K}(α), expected 1.
    pub trace_is_one: bool,
    /// ℰ·ℰ^{z^{(p−1)/2}} = 1.
    pub involution_ok: bool,
    /// α via 1 + Tr_{L/M}(ℰ) equals α via the S-sum.
    pub trace_presentation_ok: bool,
    pub holds: bool,
}

impl Exponentials {
    pub fn new(ctx: &PrecisionContext) -> Result<Self> {
        ctx.validate()?;
        let k = LocalRing::unramified(ctx);
        let k_prime = build_kprime(&k)?;
        let dwork = dwork_series(&k_prime.ring, ctx.degree_cap)?;
        Ok(Self {
            ctx: *ctx,
            k,
            k_prime,
            dwork,
        })
    }

    pub fn kp(&self) -> &LocalRing {
        &self.k_prime.ring
    }

    /// v ∈ μ_{q−1} (Teichmüller lift of the residue) and u = v^{1−p} = v^{q−p}.
    pub fn unit_pair(&self, v: Fq) -> Result<(El, El)> {
        if v == 0 || v >= self.k.residue_field().order() {
            return Err(Error::NotAUnit("v must be a nonzero residue"));
        }
        let vt = self.k.teichmuller(v);
        let q = self.k.residue_field().order();
        let u = self.k.pow(&vt, q - self.k.p());
        Ok((vt, u))
    }

    pub fn tower(&self, u: &El) -> Result<Tower> {
        build_tower_over(&self.k, &self.k_prime, u)
    }

    /// ζ_p = E_γ(1) with its certification.
    pub fn zeta(&self) -> Result<Evaluation> {
        self.dwork.evaluate_at_unit(&self.kp().one(), self.ctx.n)
    }

    /// E_γ evaluated at a unit of K.
    pub fn dwork_at(&self, x: &El) -> Result<Evaluation> {
        self.dwork
            .evaluate_at_unit(&self.kp().from_base(x), self.ctx.n)
    }

    /// ℰ_{u,2}(v) in L_u for u = v^{1−p}.
    ///
    /// The partial sum converges slowly, so it is only used to pick the right
    /// root of Y^p = E_γ(v^p): distinct roots differ by ζ_p-multiples, at
    /// distance 1/(p−1). Newton iteration then lifts that root to the
    /// precision of E_γ(v^p). Certified when the certified tail bound exceeds
    /// 1/(p−1) and E_γ(v^p) is certified.
    pub fn kummer_element(&self, tower: &Tower, v: &El) -> Result<Evaluation> {
        let l = tower.l();
        let p = l.p();
        let e = l.e() as u32;
        let series = e_u2_series(tower, self.ctx.degree_cap)?;
        let tail = series.tail_estimate();
        let sep = 1.0 / (p - 1) as f64;
        if !(tail.heuristic > sep) {
            return Err(Error::TailNotBounded {
                target: 1,
                bound: tail.heuristic,
            });
        }
        let vp = self.k.pow(v, p);
        let dw = self.dwork_at(&vp)?;
        let c = tower.kprime_in_l.apply(&dw.value);
        let mut y = series.eval(&l.from_base(v));
        // Hensel needs v_p(y^p − c) > 2 v_p(p y^{p−1}) = 2
        if l.agreement(&l.pow(&y, p), &c) <= 2 * e {
            return Err(Error::CheckFailed(
                "partial sum too far from a root of Y^p = E_γ(v^p)".into(),
            ));
        }
        for _ in 0..64 {
            let f = l.sub(&l.pow(&y, p), &c);
            if l.is_zero(&f) {
                break;
            }
            let df = l.mul_int(&l.pow(&y, p - 1), p as i64);
            let next = l.sub(&y, &l.div(&f, &df)?);
            if l.agreement(&next, &y) >= next.prec().min(y.prec()) {
                y = next;
                break;
            }
            y = next;
        }
        let certified = tail.certified > sep && dw.rigor == Rigor::Certified;
        Ok(Evaluation {
            value: y,
            rigor: if certified { Rigor::Certified } else { Rigor::Heuristic },
            tail_bound: tail.certified,
            slope: tail.slope,
        })
    }

    /// Compares the truncated sums ℰ_{u,2}(v)^p and E_γ(v^p) for u = v^{1−p}.
    /// The residual is measured on the degree-D partial sums; the tail
    /// estimates say how far the infinite series are known to agree.
    pub fn kummer_generator_check(&self, v: Fq) -> Result<KummerReport> {
        let (vt, u) = self.unit_pair(v)?;
        let tower = self.tower(&u)?;
        let l = tower.l();
        let kp = self.kp();
        let series = e_u2_series(&tower, self.ctx.degree_cap)?;
        let value = series.eval(&l.from_base(&vt));
        let tail = series.tail_estimate();
        let vp = self.k.pow(&vt, self.k.p());
        let dw = self.dwork_at(&vp)?;
        let lhs = l.pow(&value, l.p());
        let rhs = tower.kprime_in_l.apply(&dw.value);
        let agree = l.agreement(&lhs, &rhs);
        let dm1 = kp.sub(&dw.value, &kp.one());
        let kprime_valuation = kp.valuation(&dm1);
        let lin = kp.add(&kp.one(), &kp.mul(&kp.from_base(&vp), &kp.uniformizer()));
        let linear_term_ok = kp.agreement(&dw.value, &lin) >= 2;
        let rigor = if tail.certified >= KUMMER_RESIDUAL_FLOOR && dw.rigor == Rigor::Certified {
            Rigor::Certified
        } else {
            Rigor::Heuristic
        };
        let residual_digits = agree as f64 / l.e() as f64;
        Ok(KummerReport {
            v,
            residual_digits,
            tail_certified: tail.certified,
            tail_heuristic: tail.heuristic,
            kprime_valuation,
            linear_term_ok,
            rigor,
            holds: residual_digits >= KUMMER_RESIDUAL_FLOOR
                && kprime_valuation == 1
                && linear_term_ok,
        })
    }

    /// The orbit ℰ^{z^k}, k = 0..p−2, under the twist E ↦ E^z.
    fn twist_orbit(&self, l: &LocalRing, e: &El) -> Vec<El> {
        let z = twist_exponent(l);
        let mut out = vec![e.clone()];
        for _ in 1..(l.p() - 1) {
            let last = out.last().unwrap();
            out.push(pow_padic(l, last, &z));
        }
        out
    }

    pub fn self_dual_generator(&self, v: Fq) -> Result<SelfDualGenerator> {
        let (vt, u) = self.unit_pair(v)?;
        let tower = self.tower(&u)?;
        let l = tower.l();
        let m = tower.m();
        let k = &self.k;
        let ev = self.kummer_element(&tower, &vt)?;
        let orbit = self.twist_orbit(l, &ev.value);
        let s = orbit.iter().fold(l.one(), |acc, x| l.add(&acc, x));
        let view = tower.m_view()?;
        let beta = view.express(&s)?;
        let roots = hensel_conjugates(&tower)?;
        let conjugates: Vec<El> = roots
            .iter()
            .map(|r| Ok(conjugation(&tower, r)?.apply(&beta)))
            .collect::<Result<_>>()?;
        let n = conjugates.len();
        let mut gram = vec![vec![k.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let tr = trace(m, &m.mul(&conjugates[i], &conjugates[j]));
                let g = k.div_by_p_pow(&tr, 2)?;
                gram[i][j] = g.clone();
                gram[j][i] = g;
            }
        }
        Ok(SelfDualGenerator {
            v,
            tower,
            kummer: ev.value,
            beta,
            conjugates,
            gram,
            rigor: ev.rigor,
        })
    }

    /// Compares the Hensel conjugates of α_u with the twisted sums
    /// (1 + Σ_k ζ^{j·(z^k mod p)} ℰ^{z^k})/p, j = 0..p−1.
    pub fn conjugate_crosscheck(&self, gen: &SelfDualGenerator) -> Result<CrosscheckReport> {
        let tower = &gen.tower;
        let l = tower.l();
        let m = tower.m();
        let k = &self.k;
        let p = l.p();
        let zeta = tower.kprime_in_l.apply(&self.zeta()?.value);
        let orbit = self.twist_orbit(l, &gen.kummer);
        let z = twist_exponent(l);
        let view = tower.m_view()?;
        let mut residues_mod_p = Vec::new();
        let mut zk = 1u64;
        for _ in 0..orbit.len() {
            residues_mod_p.push(zk % p);
            zk = (zk as u128 * z.rem_u64(p) as u128 % p as u128) as u64;
        }
        let mut twisted = Vec::new();
        for j in 0..p {
            let mut s = l.one();
            for (ek, &rk) in orbit.iter().zip(&residues_mod_p) {
                let c = l.pow(&zeta, (j * rk) % p);
                s = l.add(&s, &l.mul(&c, ek));
            }
            twisted.push(view.express(&s)?);
        }
        let mut used = vec![false; gen.conjugates.len()];
        let mut sets_match = twisted.len() == gen.conjugates.len();
        for t in &twisted {
            match (0..gen.conjugates.len()).find(|&i| !used[i] && m.equal(t, &gen.conjugates[i])) {
                Some(i) => used[i] = true,
                None => sets_match = false,
            }
        }
        let j0_matches_alpha = m.equal(&twisted[0], &gen.beta);
        let tr = k.div_by_p(&trace(m, &gen.beta))?;
        let trace_is_one = k.equal(&tr, &k.one());
        let half = orbit[(p as usize - 1) / 2].clone();
        let involution_ok = l.equal(&l.mul(&gen.kummer, &half), &l.one());
        let rel = view.relative_trace(&gen.kummer);
        let alt = m.add(&m.one(), &rel);
        let trace_presentation_ok = m.equal(&alt, &gen.beta);
        Ok(CrosscheckReport {
            v: gen.v,
            sets_match,
            j0_matches_alpha,
            trace_is_one,
            involution_ok,
            trace_presentation_ok,
            holds: sets_match
                && j0_matches_alpha
                && trace_is_one
                && involution_ok
                && trace_presentation_ok,
        })
    }
}
