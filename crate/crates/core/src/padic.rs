//! Exact-modulus arithmetic in Z_p, in the unramified extension K = Z_p[x]/(Φ)
//! and in totally ramified Eisenstein extensions of K.
//!
//! All three are instances of [`LocalRing`]: an element is a vector of
//! residues modulo p^w indexed by `j * d + i`, the coefficient of π^j x^i,
//! where π is the Eisenstein generator (π = p when e = 1) and x the generator
//! of K over Z_p. Every element carries its absolute precision in units of
//! v_π, so an element with precision P is known modulo π^P.
//!
//! Residues are stored in Montgomery form and are not reduced below the
//! working modulus: digits past the known precision are arbitrary, and every
//! query (valuation, equality, export) looks only at the known digits.

use std::fmt;
use std::sync::Arc;

use crate::context::PrecisionContext;
use crate::error::{Error, Result};
use crate::residue::{pow_mod, FiniteField, Fq};
use crate::wide::{mac, Acc, Montgomery, Wide};

#[derive(Clone, Debug)]
pub struct El {
    c: Vec<Wide>,
    prec: u32,
}

impl El {
    /// Absolute precision in units of the ring's uniformizer valuation.
    pub fn prec(&self) -> u32 {
        self.prec
    }
}

#[derive(Clone)]
pub struct LocalRing(Arc<Inner>);

struct Inner {
    ctx: PrecisionContext,
    p: u64,
    d: usize,
    e: usize,
    w: u32,
    mg: Montgomery,
    /// p^k for k ≤ w, as plain integers.
    pow_p: Vec<Wide>,
    /// Largest power of p below 2^63, and its exponent.
    chunk: u64,
    chunk_k: u32,
    /// 2^{64i} mod p and R^{-1} mod p, for cheap residues.
    limb_mod_p: [u64; 4],
    rinv_mod_p: u64,
    /// x^d = Σ x_red[i] x^i.
    x_red: Vec<Wide>,
    /// π^e = Σ pi_red[k] π^k, each a K-residue vector of length d.
    pi_red: Vec<Vec<Wide>>,
    /// Low coefficients a_0..a_{e-1} of the Eisenstein polynomial.
    eis_low: Vec<El>,
    /// p / π, used for division by the uniformizer.
    p_over_pi: Option<El>,
    residue: FiniteField,
    label: String,
    base: Option<LocalRing>,
}

impl fmt::Debug for LocalRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LocalRing({}, p={}, d={}, e={}, w={})",
            self.0.label, self.0.p, self.0.d, self.0.e, self.0.w
        )
    }
}

impl LocalRing {
    /// The unramified extension K of degree `ctx.d`, defined by the smallest
    /// monic polynomial irreducible mod p, lifted with the same coefficients.
    pub fn unramified(ctx: &PrecisionContext) -> Self {
        let p = ctx.p;
        let residue = FiniteField::new(p, ctx.d);
        let w = ctx.working_digits();
        let mut pow_p = vec![Wide::ONE];
        for _ in 0..w {
            let next = pow_p.last().unwrap().checked_mul_u64(p).expect("modulus fits");
            pow_p.push(next);
        }
        let mg = Montgomery::new(pow_p[w as usize]);
        let (mut chunk, mut chunk_k) = (p, 1);
        while chunk <= (1u64 << 63) / p {
            chunk *= p;
            chunk_k += 1;
        }
        let limb_mod_p = [
            1 % p,
            pow_mod(2, 64, p),
            pow_mod(2, 128, p),
            pow_mod(2, 192, p),
        ];
        let rinv_mod_p = pow_mod(pow_mod(2, 256, p), p - 2, p);
        let x_red = residue
            .modulus_coeffs()
            .iter()
            .map(|&c| mg.neg(&mg.from_u64(c)))
            .collect();
        let label = if ctx.d == 1 {
            "Qp".to_string()
        } else {
            format!("K(d={})", ctx.d)
        };
        LocalRing(Arc::new(Inner {
            ctx: *ctx,
            p,
            d: ctx.d,
            e: 1,
            w,
            mg,
            pow_p,
            chunk,
            chunk_k,
            limb_mod_p,
            rinv_mod_p,
            x_red,
            pi_red: Vec::new(),
            eis_low: Vec::new(),
            p_over_pi: None,
            residue,
            label,
            base: None,
        }))
    }

    /// Z_p itself (the d = 1 case).
    pub fn zp(ctx: &PrecisionContext) -> Result<Self> {
        Ok(Self::unramified(&ctx.with_d(1)?))
    }

    /// Totally ramified extension K[π]/(π^e + a_{e-1}π^{e-1} + … + a_0) of this
    /// unramified ring. `low` holds a_0..a_{e-1}; the polynomial must be
    /// Eisenstein.
    pub fn eisenstein(&self, low: &[El], label: &str) -> Result<Self> {
        if self.e() != 1 {
            return Err(Error::Config(
                "Eisenstein extensions are built over the unramified base".into(),
            ));
        }
        let e = low.len();
        if e == 0 {
            return Err(Error::Config("empty Eisenstein polynomial".into()));
        }
        if self.valuation(&low[0]) != 1 {
            return Err(Error::Config(format!(
                "{label}: constant term must have valuation 1"
            )));
        }
        if low.iter().any(|a| self.valuation(a) < 1) {
            return Err(Error::Config(format!(
                "{label}: non-leading coefficients must lie in pO_K"
            )));
        }
        let inner = &self.0;
        let mg = &inner.mg;
        let pi_red = low
            .iter()
            .map(|a| a.c.iter().map(|v| mg.neg(v)).collect())
            .collect();
        let mut ring = Inner {
            ctx: inner.ctx,
            p: inner.p,
            d: inner.d,
            e,
            w: inner.w,
            mg: inner.mg.clone(),
            pow_p: inner.pow_p.clone(),
            chunk: inner.chunk,
            chunk_k: inner.chunk_k,
            limb_mod_p: inner.limb_mod_p,
            rinv_mod_p: inner.rinv_mod_p,
            x_red: inner.x_red.clone(),
            pi_red,
            eis_low: low.to_vec(),
            p_over_pi: None,
            residue: inner.residue.clone(),
            label: label.to_string(),
            base: Some(self.clone()),
        };
        if e > 1 {
            // π (π^{e-1} + a_{e-1} π^{e-2} + … + a_1) = -a_0 = -p ε
            let eps = self.div_by_p(&low[0])?;
            let eps_inv = self.inverse(&eps)?;
            let mut c = vec![Wide::ZERO; e * inner.d];
            c[(e - 1) * inner.d] = mg.one();
            for k in 1..e {
                for i in 0..inner.d {
                    let idx = (k - 1) * inner.d + i;
                    c[idx] = mg.add(&c[idx], &low[k].c[i]);
                }
            }
            let tmp = LocalRing(Arc::new(ring));
            let s = El {
                c,
                prec: tmp.max_prec(),
            };
            let s = tmp.neg(&tmp.mul(&s, &tmp.from_base(&eps_inv)));
            ring = Arc::try_unwrap(tmp.0).unwrap_or_else(|_| unreachable!());
            ring.p_over_pi = Some(s);
        }
        Ok(LocalRing(Arc::new(ring)))
    }

    pub fn ctx(&self) -> &PrecisionContext {
        &self.0.ctx
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn d(&self) -> usize {
        self.0.d
    }

    /// Ramification index over K, equal to v_π(p).
    pub fn e(&self) -> usize {
        self.0.e
    }

    /// Digits of the working modulus.
    pub fn w(&self) -> u32 {
        self.0.w
    }

    /// The working modulus p^w.
    pub fn modulus(&self) -> Wide {
        *self.0.mg.modulus()
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn residue_field(&self) -> &FiniteField {
        &self.0.residue
    }

    /// Largest precision an element can carry, in v_π units.
    pub fn max_prec(&self) -> u32 {
        self.0.e as u32 * self.0.w
    }

    /// Low coefficients of the Eisenstein polynomial (empty when e = 1).
    pub fn eisenstein_coeffs(&self) -> &[El] {
        &self.0.eis_low
    }

    /// The unramified ring K underneath (itself when e = 1).
    pub fn base(&self) -> LocalRing {
        self.0.base.clone().unwrap_or_else(|| self.clone())
    }

    pub fn same_ring(&self, other: &LocalRing) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Same unramified base: equal p, d and working modulus.
    pub fn same_base(&self, other: &LocalRing) -> bool {
        self.0.p == other.0.p && self.0.d == other.0.d && self.0.w == other.0.w
    }

    fn len(&self) -> usize {
        self.0.e * self.0.d
    }

    /// Known p-digits of the coefficient of π^j at precision `prec`.
    fn digits_at(&self, prec: u32, j: usize) -> u32 {
        prec.saturating_sub(j as u32)
            .div_ceil(self.0.e as u32)
            .min(self.0.w)
    }

    // ---------------------------------------------------------------- elements

    pub fn zero(&self) -> El {
        El {
            c: vec![Wide::ZERO; self.len()],
            prec: self.max_prec(),
        }
    }

    pub fn one(&self) -> El {
        self.from_int(1)
    }

    fn int_residue(&self, n: i64) -> Wide {
        let mg = &self.0.mg;
        let v = mg.from_u64(n.unsigned_abs());
        if n < 0 {
            mg.neg(&v)
        } else {
            v
        }
    }

    pub fn from_int(&self, n: i64) -> El {
        let mut x = self.zero();
        x.c[0] = self.int_residue(n);
        x
    }

    /// An element from plain residues (index j·d + i) and a precision.
    pub fn from_residues(&self, residues: &[u64], prec: u32) -> El {
        assert_eq!(residues.len(), self.len(), "residue vector length");
        self.from_wide_residues(&residues.iter().map(|&v| Wide::from_u64(v)).collect::<Vec<_>>(), prec)
    }

    pub fn from_wide_residues(&self, residues: &[Wide], prec: u32) -> El {
        assert_eq!(residues.len(), self.len(), "residue vector length");
        let c = residues.iter().map(|v| self.0.mg.to_mont(v)).collect();
        self.normalize(El { c, prec })
    }

    /// Canonical residues: the coefficient of π^j x^i reduced modulo
    /// p^{known digits}, at index j·d + i.
    pub fn canonical(&self, x: &El) -> Vec<Wide> {
        let d = self.0.d;
        x.c.iter()
            .enumerate()
            .map(|(idx, v)| {
                let k = self.digits_at(x.prec, idx / d);
                let plain = self.0.mg.from_mont(v);
                if k >= self.0.w {
                    plain
                } else {
                    plain.rem(&self.0.pow_p[k as usize])
                }
            })
            .collect()
    }

    /// The uniformizer π (p itself when e = 1).
    pub fn uniformizer(&self) -> El {
        if self.0.e == 1 {
            return self.from_int(self.0.p as i64);
        }
        let mut x = self.zero();
        x.c[self.0.d] = self.0.mg.one();
        x
    }

    /// The generator x of K over Z_p (zero when d = 1 and Φ = X).
    pub fn unramified_generator(&self) -> El {
        let mut x = self.zero();
        if self.0.d > 1 {
            x.c[1] = self.0.mg.one();
        } else {
            x.c[0] = self.0.x_red[0];
        }
        x
    }

    /// Embeds an element of the unramified base K.
    pub fn from_base(&self, k: &El) -> El {
        let d = self.0.d;
        assert_eq!(k.c.len(), d, "expected an element of the unramified base");
        let mut x = self.zero();
        x.c[..d].copy_from_slice(&k.c);
        x.prec = k.prec.saturating_mul(self.0.e as u32);
        self.normalize(x)
    }

    /// The K-coefficient of π^j.
    pub fn coeff(&self, x: &El, j: usize) -> El {
        let d = self.0.d;
        El {
            c: x.c[j * d..(j + 1) * d].to_vec(),
            prec: self.digits_at(x.prec, j),
        }
    }

    /// The Z_p-coordinate of x^i in an unramified element, as a constant.
    pub fn x_coordinate(&self, x: &El, i: usize) -> El {
        assert_eq!(self.0.e, 1, "x-coordinates need e = 1");
        let mut c = self.zero();
        c.c[0] = x.c[i];
        c.prec = x.prec;
        c
    }

    /// All K-coefficients in the power basis of π.
    pub fn coeffs(&self, x: &El) -> Vec<El> {
        (0..self.0.e).map(|j| self.coeff(x, j)).collect()
    }

    /// Assembles an element from K-coefficients of 1, π, …, π^{e-1}.
    pub fn from_coeffs(&self, coeffs: &[El]) -> El {
        assert_eq!(coeffs.len(), self.0.e);
        let d = self.0.d;
        let e = self.0.e as u32;
        let mut x = self.zero();
        let mut prec = self.max_prec();
        for (j, k) in coeffs.iter().enumerate() {
            x.c[j * d..(j + 1) * d].copy_from_slice(&k.c);
            prec = prec.min(k.prec.saturating_mul(e).saturating_add(j as u32));
        }
        x.prec = prec;
        self.normalize(x)
    }

    pub fn with_prec(&self, x: &El, prec: u32) -> El {
        El {
            c: x.c.clone(),
            prec: prec.min(x.prec),
        }
    }

    fn normalize(&self, mut x: El) -> El {
        x.prec = x.prec.min(self.max_prec());
        x
    }

    // ---------------------------------------------------------------- valuation

    fn vp_u64(&self, mut v: u64) -> u32 {
        let p = self.0.p;
        let mut k = 0;
        while v.is_multiple_of(p) {
            v /= p;
            k += 1;
        }
        k
    }

    fn rem_p(&self, v: &Wide) -> u64 {
        let p = self.0.p;
        v.0.iter()
            .zip(&self.0.limb_mod_p)
            .fold(0u64, |acc, (&l, &t)| (acc + (l % p) * t) % p)
    }

    /// v_p of a residue, capped at `cap` digits.
    fn vp_wide(&self, v: &Wide, cap: u32) -> u32 {
        if cap == 0 || self.rem_p(v) != 0 {
            return 0;
        }
        let mut x = *v;
        let mut k = 0;
        while k < cap {
            if x.is_zero() {
                return cap;
            }
            let (q, r) = x.divrem_u64(self.0.chunk);
            if r != 0 {
                return (k + self.vp_u64(r)).min(cap);
            }
            k += self.0.chunk_k;
            x = q;
        }
        cap
    }

    /// v_π(x), reported as the precision when x is zero to known precision.
    pub fn valuation(&self, x: &El) -> u32 {
        let inner = &self.0;
        let e = inner.e as u32;
        let mut best = x.prec;
        for j in 0..inner.e {
            if j as u32 >= best {
                break;
            }
            for v in &x.c[j * inner.d..(j + 1) * inner.d] {
                let cap = (best - j as u32).div_ceil(e);
                let cand = e * self.vp_wide(v, cap) + j as u32;
                best = best.min(cand);
            }
        }
        best
    }

    /// Valuation normalized so that v(p) = 1.
    pub fn valuation_p(&self, x: &El) -> f64 {
        self.valuation(x) as f64 / self.0.e as f64
    }

    /// Zero to the known precision.
    pub fn is_zero(&self, x: &El) -> bool {
        self.valuation(x) >= x.prec
    }

    /// Exactly zero at full working precision.
    pub fn is_exact_zero(&self, x: &El) -> bool {
        x.prec >= self.max_prec() && x.c.iter().all(Wide::is_zero)
    }

    pub fn is_unit(&self, x: &El) -> bool {
        x.prec > 0 && self.valuation(x) == 0
    }

    /// Equality to the smaller of the two precisions.
    pub fn equal(&self, a: &El, b: &El) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    /// v_π(a − b): how far two elements agree.
    pub fn agreement(&self, a: &El, b: &El) -> u32 {
        self.valuation(&self.sub(a, b))
    }

    /// Fails unless x is known to at least `needed` (v_π units).
    pub fn require_prec(&self, x: &El, needed: u32, context: &'static str) -> Result<()> {
        if x.prec < needed {
            return Err(Error::PrecisionExhausted {
                needed,
                available: x.prec,
                context,
            });
        }
        Ok(())
    }

    // ---------------------------------------------------------------- arithmetic

    pub fn add(&self, a: &El, b: &El) -> El {
        let mg = &self.0.mg;
        let c = a.c.iter().zip(&b.c).map(|(x, y)| mg.add(x, y)).collect();
        El {
            c,
            prec: a.prec.min(b.prec),
        }
    }

    pub fn neg(&self, a: &El) -> El {
        let mg = &self.0.mg;
        El {
            c: a.c.iter().map(|x| mg.neg(x)).collect(),
            prec: a.prec,
        }
    }

    pub fn sub(&self, a: &El, b: &El) -> El {
        let mg = &self.0.mg;
        let c = a.c.iter().zip(&b.c).map(|(x, y)| mg.sub(x, y)).collect();
        El {
            c,
            prec: a.prec.min(b.prec),
        }
    }

    pub fn mul_int(&self, a: &El, n: i64) -> El {
        let mg = &self.0.mg;
        let r = self.int_residue(n);
        let c = a.c.iter().map(|x| mg.mul(x, &r)).collect();
        let gain = if n == 0 {
            self.max_prec()
        } else {
            self.0.e as u32 * self.vp_u64(n.unsigned_abs())
        };
        self.normalize(El {
            c,
            prec: a.prec.saturating_add(gain),
        })
    }

    /// K-product of two residue vectors of length d.
    fn kmul_into(&self, a: &[Wide], b: &[Wide], out: &mut [Wide]) {
        let d = self.0.d;
        let mut acc: Vec<Acc> = vec![[0; 8]; 2 * d - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in b.iter().enumerate() {
                mac(&mut acc[i + k], x, y);
            }
        }
        let mut r: Vec<Wide> = acc.iter().map(|t| self.0.mg.redc(t)).collect();
        self.reduce_x(&mut r);
        out.copy_from_slice(&r[..d]);
    }

    fn reduce_x(&self, r: &mut [Wide]) {
        let d = self.0.d;
        let mg = &self.0.mg;
        for k in (d..r.len()).rev() {
            let top = r[k];
            if top.is_zero() {
                continue;
            }
            r[k] = Wide::ZERO;
            for i in 0..d {
                let t = mg.mul(&top, &self.0.x_red[i]);
                r[k - d + i] = mg.add(&r[k - d + i], &t);
            }
        }
    }

    pub fn mul(&self, a: &El, b: &El) -> El {
        let inner = &self.0;
        let mg = &inner.mg;
        let (e, d) = (inner.e, inner.d);
        let cols = 2 * d - 1;
        let rows = 2 * e - 1;
        let mut acc: Vec<Acc> = vec![[0; 8]; rows * cols];
        for ja in 0..e {
            for ia in 0..d {
                let x = &a.c[ja * d + ia];
                if x.is_zero() {
                    continue;
                }
                for jb in 0..e {
                    let base = (ja + jb) * cols + ia;
                    for ib in 0..d {
                        let y = &b.c[jb * d + ib];
                        if !y.is_zero() {
                            mac(&mut acc[base + ib], x, y);
                        }
                    }
                }
            }
        }
        let mut rowsv: Vec<Vec<Wide>> = (0..rows)
            .map(|r| {
                let mut v: Vec<Wide> = acc[r * cols..(r + 1) * cols]
                    .iter()
                    .map(|t| mg.redc(t))
                    .collect();
                self.reduce_x(&mut v);
                v.truncate(d);
                v
            })
            .collect();
        let mut tmp = vec![Wide::ZERO; d];
        for j in (e..rows).rev() {
            if rowsv[j].iter().all(Wide::is_zero) {
                continue;
            }
            let top = std::mem::replace(&mut rowsv[j], vec![Wide::ZERO; d]);
            for (k, red) in inner.pi_red.iter().enumerate() {
                if red.iter().all(Wide::is_zero) {
                    continue;
                }
                self.kmul_into(&top, red, &mut tmp);
                let row = &mut rowsv[j - e + k];
                for i in 0..d {
                    row[i] = mg.add(&row[i], &tmp[i]);
                }
            }
        }
        let c: Vec<Wide> = rowsv.into_iter().take(e).flatten().collect();
        let (va, vb) = (self.valuation(a), self.valuation(b));
        let prec = (a.prec.saturating_add(vb)).min(b.prec.saturating_add(va));
        self.normalize(El { c, prec })
    }

    pub fn square(&self, a: &El) -> El {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &El, mut n: u64) -> El {
        let mut acc = self.one();
        let mut base = a.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    /// a^n for a wide exponent.
    pub fn pow_wide(&self, a: &El, n: &Wide) -> El {
        let mut acc = self.one();
        for i in (0..n.bits()).rev() {
            acc = self.square(&acc);
            if n.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// Multiplication by π: shift the π-degree and fold π^e.
    pub fn mul_pi(&self, a: &El) -> El {
        if self.0.e == 1 {
            return self.mul_int(a, self.0.p as i64);
        }
        let inner = &self.0;
        let mg = &inner.mg;
        let (e, d) = (inner.e, inner.d);
        let mut c = vec![Wide::ZERO; e * d];
        c[d..].copy_from_slice(&a.c[..(e - 1) * d]);
        let top = &a.c[(e - 1) * d..];
        if top.iter().any(|v| !v.is_zero()) {
            let mut tmp = vec![Wide::ZERO; d];
            for (k, red) in inner.pi_red.iter().enumerate() {
                self.kmul_into(top, red, &mut tmp);
                for i in 0..d {
                    c[k * d + i] = mg.add(&c[k * d + i], &tmp[i]);
                }
            }
        }
        self.normalize(El {
            c,
            prec: a.prec + 1,
        })
    }

    // ---------------------------------------------------------------- division

    /// Exact division by p.
    pub fn div_by_p(&self, a: &El) -> Result<El> {
        let e = self.0.e as u32;
        self.require_prec(a, e, "division by p")?;
        let d = self.0.d;
        let p = self.0.p;
        let mut c = Vec::with_capacity(a.c.len());
        for (idx, v) in a.c.iter().enumerate() {
            if self.digits_at(a.prec, idx / d) == 0 {
                c.push(Wide::ZERO);
                continue;
            }
            let (q, r) = v.divrem_u64(p);
            if r != 0 {
                return Err(Error::NotDivisible("element is not divisible by p"));
            }
            c.push(q);
        }
        // the top digit of each quotient is unknown
        Ok(El {
            c,
            prec: (a.prec - e).min(self.max_prec() - e),
        })
    }

    pub fn div_by_p_pow(&self, a: &El, k: u32) -> Result<El> {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.div_by_p(&x)?;
        }
        Ok(x)
    }

    /// Exact division by the uniformizer π.
    pub fn div_by_pi(&self, a: &El) -> Result<El> {
        match &self.0.p_over_pi {
            None => self.div_by_p(a),
            Some(s) => {
                self.require_prec(a, 1, "division by the uniformizer")?;
                if self.valuation(a) < 1 {
                    return Err(Error::NotDivisible("element is a unit"));
                }
                self.div_by_p(&self.mul(a, s))
            }
        }
    }

    pub fn div_by_pi_pow(&self, a: &El, k: u32) -> Result<El> {
        let mut x = a.clone();
        for _ in 0..k {
            x = self.div_by_pi(&x)?;
        }
        Ok(x)
    }

    /// Residue class of x modulo π, as an element of k.
    pub fn residue(&self, x: &El) -> Fq {
        let d = self.0.d;
        let p = self.0.p;
        let low: Vec<u64> = x.c[..d]
            .iter()
            .map(|v| self.rem_p(v) * self.0.rinv_mod_p % p)
            .collect();
        self.0.residue.encode(&low)
    }

    /// Naive lift of a residue (digits in [0, p)).
    pub fn lift_residue(&self, a: Fq) -> El {
        let mut x = self.zero();
        for (slot, digit) in x.c.iter_mut().zip(self.0.residue.decode(a)) {
            *slot = self.0.mg.from_u64(digit);
        }
        x
    }

    /// Inverse of a unit by Newton iteration from the residue inverse.
    pub fn inverse(&self, a: &El) -> Result<El> {
        if !self.is_unit(a) {
            return Err(Error::InverseOfNonUnit {
                valuation: self.valuation(a),
            });
        }
        let r = self.residue(a);
        let rinv = self
            .0
            .residue
            .inv(r)
            .expect("unit has nonzero residue");
        let two = self.from_int(2);
        let mut y = self.lift_residue(rinv);
        let target = a.prec;
        for _ in 0..64 {
            let err = self.sub(&self.mul(a, &y), &self.one());
            if self.valuation(&err) >= target {
                break;
            }
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
        }
        let err = self.sub(&self.mul(a, &y), &self.one());
        let achieved = self.valuation(&err).min(target);
        Ok(self.with_prec(&y, achieved))
    }

    /// a / b, failing unless the quotient is integral.
    pub fn div(&self, a: &El, b: &El) -> Result<El> {
        let k = self.valuation(b);
        if k >= b.prec {
            return Err(Error::PrecisionExhausted {
                needed: k + 1,
                available: b.prec,
                context: "division by an element that is zero to precision",
            });
        }
        let unit = self.div_by_pi_pow(b, k)?;
        if self.valuation(a) < k {
            return Err(Error::NotDivisible("quotient is not integral"));
        }
        let num = self.div_by_pi_pow(a, k)?;
        Ok(self.mul(&num, &self.inverse(&unit)?))
    }

    // ---------------------------------------------------------------- structure

    /// Teichmüller lift of a residue: the unique (q−1)-th root of unity (or 0)
    /// congruent to it, found by iterating x ↦ x^q to stabilization.
    pub fn teichmuller(&self, a: Fq) -> El {
        if self.0.e > 1 {
            return self.from_base(&self.base().teichmuller(a));
        }
        let q = self.0.residue.order();
        let mut t = self.lift_residue(a);
        for _ in 0..=self.0.w + 1 {
            let next = self.pow(&t, q);
            if self.equal(&next, &t) {
                return t;
            }
            t = next;
        }
        panic!("Teichmüller iteration failed to stabilize");
    }

    /// Whether u is a Teichmüller lift of a nonzero residue (u^{q−1} = 1).
    pub fn is_teichmuller_unit(&self, u: &El) -> bool {
        let q = self.0.residue.order();
        self.is_unit(u) && self.equal(&self.pow(u, q - 1), &self.one())
    }

    /// Tr_{K/Q_p} of an unramified element, returned as an element of Z_p ⊂ K.
    pub fn unramified_trace(&self, x: &El) -> El {
        assert_eq!(self.0.e, 1, "unramified trace needs e = 1");
        let d = self.0.d;
        let gen = self.unramified_generator();
        let mut basis = self.one();
        let mut acc = Wide::ZERO;
        for i in 0..d {
            let prod = self.mul(x, &basis);
            acc = self.0.mg.add(&acc, &prod.c[i]);
            basis = self.mul(&basis, &gen);
        }
        let mut t = self.zero();
        t.c[0] = acc;
        t.prec = x.prec;
        t
    }

    /// The arithmetic Frobenius σ on K: fixes Z_p, sends x to the root of Φ
    /// congruent to x^p.
    pub fn frobenius(&self, x: &El) -> Result<El> {
        assert_eq!(self.0.e, 1, "Frobenius acts on the unramified base");
        let img = self.frobenius_generator()?;
        let d = self.0.d;
        let mut acc = self.zero();
        for i in (0..d).rev() {
            let mut c = self.zero();
            c.c[0] = x.c[i];
            acc = self.add(&self.mul(&acc, &img), &c);
        }
        Ok(self.with_prec(&acc, x.prec))
    }

    /// σ(x): Newton lift of x^p to a root of Φ.
    pub fn frobenius_generator(&self) -> Result<El> {
        let d = self.0.d;
        let gen = self.unramified_generator();
        if d == 1 {
            return Ok(gen);
        }
        let phi_eval = |r: &El| -> (El, El) {
            // Φ(r) and Φ'(r) with Φ = x^d - Σ x_red[i] x^i
            let mut val = self.one();
            let mut der = self.from_int(d as i64);
            for i in (0..d).rev() {
                let mut c = self.zero();
                c.c[0] = self.0.x_red[i];
                let c = self.neg(&c);
                if i > 0 {
                    der = self.add(&self.mul(&der, r), &self.mul_int(&c, i as i64));
                }
                val = self.add(&self.mul(&val, r), &c);
            }
            (val, der)
        };
        let mut r = self.pow(&gen, self.0.p);
        for _ in 0..64 {
            let (v, dv) = phi_eval(&r);
            if self.valuation(&v) >= self.max_prec() {
                break;
            }
            r = self.sub(&r, &self.div(&v, &dv)?);
        }
        Ok(r)
    }

    // ---------------------------------------------------------------- exp / log

    /// Montgomery form of n^{-1} mod p^w for n prime to p.
    fn unit_inverse(&self, n: u64) -> Wide {
        let mg = &self.0.mg;
        let p = self.0.p;
        let nn = mg.from_u64(n);
        let two = mg.from_u64(2);
        let mut y = mg.from_u64(pow_mod(n % p, p - 2, p));
        for _ in 0..16 {
            let ny = mg.mul(&nn, &y);
            if ny == mg.one() {
                break;
            }
            y = mg.mul(&y, &mg.sub(&two, &ny));
        }
        y
    }

    /// Multiplies by 1/n, dividing out the p-part exactly.
    pub fn div_int(&self, a: &El, n: u64) -> Result<El> {
        let k = self.vp_u64(n);
        let unit = n / self.0.p.pow(k);
        let x = self.div_by_p_pow(a, k)?;
        if unit == 1 {
            return Ok(x);
        }
        let inv = self.unit_inverse(unit);
        let mg = &self.0.mg;
        let c = x.c.iter().map(|v| mg.mul(v, &inv)).collect();
        Ok(El { c, prec: x.prec })
    }

    /// exp(x) = Σ x^n/n!, convergent when v_p(x) > 1/(p−1).
    pub fn exp(&self, x: &El) -> Result<El> {
        let e = self.0.e as u32;
        let p = self.0.p as u32;
        let vx = self.valuation(x);
        if self.is_zero(x) {
            return Ok(self.with_prec(&self.one(), x.prec));
        }
        if vx * (p - 1) <= e {
            return Err(Error::ConvergenceDomain("exp needs v_p(x) > 1/(p-1)"));
        }
        let target = x.prec;
        let mut sum = self.one();
        let mut term = self.one();
        let mut n = 1u64;
        loop {
            term = self.div_int(&self.mul(&term, x), n)?;
            sum = self.add(&sum, &term);
            // v_π(x^n/n!) ≥ n·(v_π(x) − e/(p−1))
            let lower = n as f64 * (vx as f64 - e as f64 / (p - 1) as f64);
            if lower >= target as f64 || n > 64 * self.max_prec() as u64 {
                break;
            }
            n += 1;
        }
        Ok(self.with_prec(&sum, target))
    }

    /// log(y) = Σ (−1)^{n+1} (y−1)^n/n for y ∈ 1 + π^k with v_p(y−1) > 1/(p−1).
    pub fn log(&self, y: &El) -> Result<El> {
        let e = self.0.e as u32;
        let p = self.0.p as u32;
        let z = self.sub(y, &self.one());
        if self.is_zero(&z) {
            return Ok(self.with_prec(&self.zero(), y.prec));
        }
        let vz = self.valuation(&z);
        if vz * (p - 1) <= e {
            return Err(Error::ConvergenceDomain("log needs v_p(y - 1) > 1/(p-1)"));
        }
        let target = y.prec;
        let mut sum = self.zero();
        let mut power = self.one();
        let mut n = 1u64;
        loop {
            power = self.mul(&power, &z);
            let term = self.div_int(&power, n)?;
            sum = if n % 2 == 1 {
                self.add(&sum, &term)
            } else {
                self.sub(&sum, &term)
            };
            let lower = n as f64 * vz as f64 - e as f64 * ((n as f64).ln() / (p as f64).ln());
            if (lower >= target as f64 && n > 1) || n > 64 * self.max_prec() as u64 {
                break;
            }
            n += 1;
        }
        Ok(self.with_prec(&sum, target))
    }

    /// Human-readable coefficient dump for reports.
    pub fn format(&self, x: &El) -> String {
        let parts: Vec<String> = self.canonical(x).iter().map(|v| v.to_string()).collect();
        format!("[{}]@{}", parts.join(", "), x.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, d: usize, n: u32) -> PrecisionContext {
        PrecisionContext::with_guard(p, d, n, 8, 8).unwrap()
    }

    #[test]
    fn identity_and_small_sums() {
        let k = LocalRing::unramified(&ctx(3, 1, 4));
        let x = k.from_int(17);
        assert!(k.equal(&k.mul(&k.one(), &x), &x));
        let s = k.add(&k.from_int(5), &k.from_int(4));
        assert_eq!(k.valuation(&s), 2);
    }

    #[test]
    fn inverse_of_one_plus_p() {
        let k = LocalRing::unramified(&ctx(3, 2, 6));
        let x = k.from_int(4);
        let y = k.inverse(&x).unwrap();
        assert!(k.equal(&k.mul(&x, &y), &k.one()));
        assert_eq!(k.mul(&x, &y).prec(), k.max_prec());
        assert!(matches!(
            k.inverse(&k.from_int(3)),
            Err(Error::InverseOfNonUnit { valuation: 1 })
        ));
    }

    #[test]
    fn teichmuller_lifts() {
        let z3 = LocalRing::unramified(&ctx(3, 1, 6));
        assert!(z3.equal(&z3.teichmuller(1), &z3.one()));
        assert!(z3.equal(&z3.teichmuller(2), &z3.from_int(-1)));
        let z5 = LocalRing::unramified(&ctx(5, 1, 6));
        let t = z5.teichmuller(2);
        assert!(z5.equal(&z5.pow(&t, 4), &z5.one()));
        assert_eq!(z5.residue(&t), 2);
        let k = LocalRing::unramified(&ctx(3, 2, 6));
        for a in 1..9 {
            let t = k.teichmuller(a);
            assert!(k.is_teichmuller_unit(&t));
            assert_eq!(k.residue(&t), a);
        }
    }

    #[test]
    fn exp_of_three_matches_partial_sum() {
        // Σ 3^n/n! mod 3^4, summed with exact rationals
        let z = LocalRing::unramified(&ctx(3, 1, 4));
        let x = z.exp(&z.from_int(3)).unwrap();
        let m: i128 = 81;
        let mut acc: i128 = 0;
        let (mut num, mut den): (i128, i128) = (1, 1);
        for n in 0..20i128 {
            if n > 0 {
                num *= 3;
                den *= n;
            }
            let g = gcd(num, den);
            let (a, b) = (num / g, den / g);
            let inv = (1..m).find(|&t| (b % m) * t % m == 1).unwrap();
            acc = (acc + a % m * inv) % m;
        }
        assert_eq!(z.canonical(&x)[0].rem_u64(81) as i128, acc);
        let y = z.log(&x).unwrap();
        assert!(z.equal(&y, &z.from_int(3)));
        assert!(z.equal(&z.exp(&z.zero()).unwrap(), &z.one()));
        assert!(z.is_zero(&z.log(&z.one()).unwrap()));
        assert!(z.exp(&z.one()).is_err());
    }

    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn division_by_uniformizer() {
        let k = LocalRing::unramified(&ctx(3, 1, 6));
        let low = vec![k.from_int(3), k.zero()];
        let kp = k.eisenstein(&low, "K'").unwrap();
        let g = kp.uniformizer();
        // γ² = −3
        assert!(kp.equal(&kp.square(&g), &kp.from_int(-3)));
        let q = kp.div_by_pi(&kp.from_int(3)).unwrap();
        assert!(kp.equal(&kp.mul(&q, &g), &kp.from_int(3)));
        assert_eq!(kp.valuation(&q), 1);
        assert_eq!(kp.valuation(&kp.from_int(9)), 4);
    }

    #[test]
    fn frobenius_generator_is_a_root() {
        let k = LocalRing::unramified(&ctx(3, 2, 8));
        let s = k.frobenius_generator().unwrap();
        let t = k.teichmuller(4);
        let st = k.frobenius(&t).unwrap();
        assert!(k.equal(&st, &k.pow(&t, 3)));
        assert_eq!(k.residue(&s), k.residue_field().frobenius(3));
    }
}
