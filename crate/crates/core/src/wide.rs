//! 256-bit unsigned integers and Montgomery arithmetic modulo an odd
//! modulus below 2^240.
//!
//! The 16-bit headroom lets up to 2^16 double-width products be summed
//! before a single Montgomery reduction.

use std::cmp::Ordering;
use std::fmt;

pub const LIMBS: usize = 4;
/// Largest admissible modulus bit length.
pub const MODULUS_BITS: u32 = 240;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Wide(pub [u64; LIMBS]);

/// Double-width accumulator for lazy reduction.
pub type Acc = [u64; 2 * LIMBS];

impl Wide {
    pub const ZERO: Wide = Wide([0; LIMBS]);
    pub const ONE: Wide = Wide([1, 0, 0, 0]);

    pub fn from_u64(v: u64) -> Self {
        Wide([v, 0, 0, 0])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0[1..].iter().all(|&l| l == 0).then_some(self.0[0])
    }

    pub fn bits(&self) -> u32 {
        for i in (0..LIMBS).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + 64 - self.0[i].leading_zeros();
            }
        }
        0
    }

    pub fn bit(&self, i: u32) -> bool {
        (self.0[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }

    /// Sum and carry-out.
    pub fn overflowing_add(&self, other: &Wide) -> (Wide, bool) {
        let mut out = [0u64; LIMBS];
        let mut carry = false;
        for i in 0..LIMBS {
            let (s1, c1) = self.0[i].overflowing_add(other.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 || c2;
        }
        (Wide(out), carry)
    }

    /// Difference and borrow-out.
    pub fn overflowing_sub(&self, other: &Wide) -> (Wide, bool) {
        let mut out = [0u64; LIMBS];
        let mut borrow = false;
        for i in 0..LIMBS {
            let (s1, b1) = self.0[i].overflowing_sub(other.0[i]);
            let (s2, b2) = s1.overflowing_sub(borrow as u64);
            out[i] = s2;
            borrow = b1 || b2;
        }
        (Wide(out), borrow)
    }

    /// Product by a small factor; `None` on overflow.
    pub fn checked_mul_u64(&self, k: u64) -> Option<Wide> {
        let mut out = [0u64; LIMBS];
        let mut carry = 0u128;
        for i in 0..LIMBS {
            let t = self.0[i] as u128 * k as u128 + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        (carry == 0).then_some(Wide(out))
    }

    /// Quotient and remainder by a nonzero u64.
    pub fn divrem_u64(&self, d: u64) -> (Wide, u64) {
        let mut out = [0u64; LIMBS];
        let mut rem = 0u128;
        for i in (0..LIMBS).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            out[i] = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        (Wide(out), rem as u64)
    }

    pub fn rem_u64(&self, d: u64) -> u64 {
        let mut rem = 0u128;
        for i in (0..LIMBS).rev() {
            rem = ((rem << 64) | self.0[i] as u128) % d as u128;
        }
        rem as u64
    }

    fn shl1(&self) -> (Wide, bool) {
        let mut out = [0u64; LIMBS];
        let mut carry = 0;
        for i in 0..LIMBS {
            out[i] = (self.0[i] << 1) | carry;
            carry = self.0[i] >> 63;
        }
        (Wide(out), carry == 1)
    }

    /// self mod m by binary long division; used off the hot path only.
    pub fn rem(&self, m: &Wide) -> Wide {
        let mut r = Wide::ZERO;
        for i in (0..self.bits()).rev() {
            let (mut s, over) = r.shl1();
            if self.bit(i) {
                s.0[0] |= 1;
            }
            r = if over || s >= *m { s.overflowing_sub(m).0 } else { s };
        }
        r
    }

    /// Full 512-bit product.
    pub fn mul_wide(&self, other: &Wide) -> Acc {
        let mut out = [0u64; 2 * LIMBS];
        for i in 0..LIMBS {
            let a = self.0[i];
            if a == 0 {
                continue;
            }
            let mut carry = 0u128;
            for j in 0..LIMBS {
                let t = a as u128 * other.0[j] as u128 + out[i + j] as u128 + carry;
                out[i + j] = t as u64;
                carry = t >> 64;
            }
            out[i + LIMBS] = carry as u64;
        }
        out
    }
}

/// acc += a·b.
#[inline]
pub fn mac(acc: &mut Acc, a: &Wide, b: &Wide) {
    let prod = a.mul_wide(b);
    let mut carry = false;
    for i in 0..2 * LIMBS {
        let (s1, c1) = acc[i].overflowing_add(prod[i]);
        let (s2, c2) = s1.overflowing_add(carry as u64);
        acc[i] = s2;
        carry = c1 || c2;
    }
}

impl Ord for Wide {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..LIMBS).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Wide {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        const CHUNK: u64 = 10_000_000_000_000_000_000;
        let mut parts = Vec::new();
        let mut x = *self;
        while !x.is_zero() {
            let (q, r) = x.divrem_u64(CHUNK);
            parts.push(r);
            x = q;
        }
        write!(f, "{}", parts.pop().unwrap())?;
        for part in parts.iter().rev() {
            write!(f, "{part:019}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Montgomery context for an odd modulus m < 2^240, with R = 2^256.
#[derive(Clone, Debug)]
pub struct Montgomery {
    m: Wide,
    /// −m^{−1} mod 2^64.
    m_neg_inv: u64,
    /// R mod m, the Montgomery form of 1.
    one: Wide,
    /// R² mod m.
    r2: Wide,
}

impl Montgomery {
    pub fn new(m: Wide) -> Self {
        assert!(m.0[0] & 1 == 1, "Montgomery modulus must be odd");
        assert!(m.bits() <= MODULUS_BITS, "modulus too large");
        let m0 = m.0[0];
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m0.wrapping_mul(inv)));
        }
        let mut ctx = Montgomery {
            m,
            m_neg_inv: inv.wrapping_neg(),
            one: Wide::ZERO,
            r2: Wide::ZERO,
        };
        let mut x = Wide::ONE;
        for _ in 0..256 {
            x = ctx.add(&x, &x);
        }
        ctx.one = x;
        for _ in 0..256 {
            x = ctx.add(&x, &x);
        }
        ctx.r2 = x;
        ctx
    }

    pub fn modulus(&self) -> &Wide {
        &self.m
    }

    pub fn one(&self) -> Wide {
        self.one
    }

    #[inline]
    pub fn add(&self, a: &Wide, b: &Wide) -> Wide {
        let (s, _) = a.overflowing_add(b);
        if s >= self.m {
            s.overflowing_sub(&self.m).0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: &Wide, b: &Wide) -> Wide {
        let (d, borrow) = a.overflowing_sub(b);
        if borrow {
            d.overflowing_add(&self.m).0
        } else {
            d
        }
    }

    #[inline]
    pub fn neg(&self, a: &Wide) -> Wide {
        if a.is_zero() {
            *a
        } else {
            self.m.overflowing_sub(a).0
        }
    }

    /// T·R^{−1} mod m for T < m·R.
    pub fn redc(&self, t: &Acc) -> Wide {
        let mut t = *t;
        let mut top = 0u64;
        for i in 0..LIMBS {
            let u = t[i].wrapping_mul(self.m_neg_inv);
            let mut carry = 0u128;
            for j in 0..LIMBS {
                let s = t[i + j] as u128 + u as u128 * self.m.0[j] as u128 + carry;
                t[i + j] = s as u64;
                carry = s >> 64;
            }
            let mut k = i + LIMBS;
            while carry != 0 {
                if k == 2 * LIMBS {
                    top += carry as u64;
                    break;
                }
                let s = t[k] as u128 + carry;
                t[k] = s as u64;
                carry = s >> 64;
                k += 1;
            }
        }
        debug_assert_eq!(top, 0);
        let r = Wide([t[4], t[5], t[6], t[7]]);
        if r >= self.m {
            r.overflowing_sub(&self.m).0
        } else {
            r
        }
    }

    #[inline]
    pub fn mul(&self, a: &Wide, b: &Wide) -> Wide {
        self.redc(&a.mul_wide(b))
    }

    pub fn to_mont(&self, x: &Wide) -> Wide {
        let x = if *x >= self.m { x.rem(&self.m) } else { *x };
        self.mul(&x, &self.r2)
    }

    pub fn from_mont(&self, x: &Wide) -> Wide {
        let mut t = [0u64; 2 * LIMBS];
        t[..LIMBS].copy_from_slice(&x.0);
        self.redc(&t)
    }

    pub fn from_u64(&self, v: u64) -> Wide {
        self.to_mont(&Wide::from_u64(v))
    }

    /// a^e for an exponent given as a plain integer.
    pub fn pow(&self, a: &Wide, e: &Wide) -> Wide {
        let mut acc = self.one;
        for i in (0..e.bits()).rev() {
            acc = self.mul(&acc, &acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow_u64(p: u64, w: u32) -> Wide {
        let mut x = Wide::ONE;
        for _ in 0..w {
            x = x.checked_mul_u64(p).unwrap();
        }
        x
    }

    #[test]
    fn montgomery_roundtrip_and_products() {
        let m = pow_u64(3, 150);
        let mg = Montgomery::new(m);
        let a = Wide::from_u64(123_456_789);
        let b = Wide::from_u64(987_654_321);
        let am = mg.to_mont(&a);
        let bm = mg.to_mont(&b);
        assert_eq!(mg.from_mont(&am), a);
        let prod = mg.from_mont(&mg.mul(&am, &bm));
        assert_eq!(prod.to_u64(), Some(123_456_789u64 * 987_654_321));
        // (m − 1)² ≡ 1
        let minus_one = mg.neg(&mg.one());
        assert_eq!(mg.mul(&minus_one, &minus_one), mg.one());
    }

    #[test]
    fn lazy_accumulation_matches_stepwise() {
        let m = pow_u64(5, 100);
        let mg = Montgomery::new(m);
        let xs: Vec<Wide> = (1..200u64).map(|i| mg.from_u64(i * 7919 + 3)).collect();
        let mut acc = [0u64; 8];
        let mut step = Wide::ZERO;
        for w in xs.windows(2) {
            mac(&mut acc, &w[0], &w[1]);
            step = mg.add(&step, &mg.mul(&w[0], &w[1]));
        }
        assert_eq!(mg.redc(&acc), step);
    }

    #[test]
    fn decimal_display_and_small_division() {
        let x = pow_u64(10, 40);
        assert_eq!(x.to_string(), format!("1{}", "0".repeat(40)));
        let (q, r) = x.divrem_u64(7);
        assert_eq!(r, x.rem_u64(7));
        assert_eq!(q.checked_mul_u64(7).unwrap().overflowing_add(&Wide::from_u64(r)).0, x);
        assert_eq!(x.rem(&pow_u64(10, 20)), Wide::ZERO);
    }
}
