//! The residue field k = F_q, with elements encoded as integers Σ c_i p^i in
//! the power basis of the reduction of the defining polynomial.

/// Encoded element of F_q.
pub type Fq = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    d: usize,
    q: u64,
    /// Low coefficients of the monic defining polynomial.
    phi: Vec<u64>,
}

impl FiniteField {
    pub fn new(p: u64, d: usize) -> Self {
        let phi = smallest_irreducible(p, d);
        Self {
            p,
            d,
            q: p.pow(d as u32),
            phi,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// Low coefficients c_0..c_{d-1} of the monic defining polynomial.
    pub fn modulus_coeffs(&self) -> &[u64] {
        &self.phi
    }

    pub fn decode(&self, x: Fq) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.d);
        let mut x = x;
        for _ in 0..self.d {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    pub fn encode(&self, coeffs: &[u64]) -> Fq {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.p + c % self.p)
    }

    pub fn from_prime_field(&self, a: u64) -> Fq {
        a % self.p
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    pub fn neg(&self, a: Fq) -> Fq {
        let s: Vec<u64> = self
            .decode(a)
            .iter()
            .map(|u| (self.p - u) % self.p)
            .collect();
        self.encode(&s)
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    /// Multiplication by a prime-field scalar.
    pub fn scale(&self, c: u64, a: Fq) -> Fq {
        let s: Vec<u64> = self
            .decode(a)
            .iter()
            .map(|u| u * (c % self.p) % self.p)
            .collect();
        self.encode(&s)
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        let (x, y) = (self.decode(a), self.decode(b));
        let mut prod = vec![0u64; 2 * self.d];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        for k in (self.d..2 * self.d).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, c) in self.phi.iter().enumerate() {
                let idx = k - self.d + i;
                prod[idx] = (prod[idx] + self.p - top * c % self.p) % self.p;
            }
        }
        self.encode(&prod[..self.d])
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        (a != 0).then(|| self.pow(a, self.q - 2))
    }

    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.p)
    }

    /// Tr_{k/F_p}(a) = Σ_{i<d} a^{p^i}, returned as an element of F_p.
    pub fn trace(&self, a: Fq) -> u64 {
        let mut acc = 0;
        let mut x = a;
        for _ in 0..self.d {
            acc = self.add(acc, x);
            x = self.frobenius(x);
        }
        debug_assert!(acc < self.p);
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.q
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fq> {
        1..self.q
    }

    pub fn is_primitive(&self, a: Fq) -> bool {
        if a == 0 {
            return false;
        }
        let n = self.q - 1;
        prime_factors(n).into_iter().all(|r| self.pow(a, n / r) != 1)
    }

    /// Rank over F_p of a family of elements.
    pub fn rank(&self, family: &[Fq]) -> usize {
        let rows: Vec<Vec<u64>> = family.iter().map(|&x| self.decode(x)).collect();
        rank_mod_p(rows, self.p)
    }
}

/// Rank of a matrix over F_p by row reduction.
pub fn rank_mod_p(mut rows: Vec<Vec<u64>>, p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = pow_mod(rows[rank][col], p - 2, p);
        for c in 0..cols {
            rows[rank][c] = rows[rank][c] * inv % p;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_multiple_of(p) {
                let f = rows[r][col];
                for c in 0..cols {
                    rows[r][c] = (rows[r][c] + p * p - f * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * a as u128 % m as u128) as u64;
        }
        a = (a as u128 * a as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo an odd prime.
pub fn smallest_primitive_root(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1))
        .unwrap_or(1)
}

/// Low coefficients (c_0..c_{d-1}) of the smallest monic degree-d polynomial
/// irreducible over F_p, ordered by the integer Σ c_i p^i.
pub fn smallest_irreducible(p: u64, d: usize) -> Vec<u64> {
    let count = p.pow(d as u32);
    for code in 0..count {
        let mut low = Vec::with_capacity(d);
        let mut x = code;
        for _ in 0..d {
            low.push(x % p);
            x /= p;
        }
        let mut poly = low.clone();
        poly.push(1);
        if is_irreducible(&poly, p) {
            return low;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Trial division by all monic polynomials of degree ≤ deg/2.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    for fdeg in 1..=deg / 2 {
        for code in 0..p.pow(fdeg as u32) {
            let mut f = Vec::with_capacity(fdeg + 1);
            let mut x = code;
            for _ in 0..fdeg {
                f.push(x % p);
                x /= p;
            }
            f.push(1);
            if poly_rem_is_zero(poly, &f, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(num: &[u64], den: &[u64], p: u64) -> bool {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    for k in (dd..r.len()).rev() {
        let c = r[k] % p;
        if c == 0 {
            continue;
        }
        for (i, &b) in den.iter().enumerate() {
            let idx = k - dd + i;
            r[idx] = (r[idx] + p * p - c * b % p) % p;
        }
    }
    r[..dd].iter().all(|&c| c % p == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_irreducibles() {
        // x^2 + 1 over F_3, x^2 + 2 over F_5, x^3 + 2x + 1 over F_3
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0]);
        assert_eq!(smallest_irreducible(5, 2), vec![2, 0]);
        assert_eq!(smallest_irreducible(3, 3), vec![1, 2, 0]);
        assert_eq!(smallest_irreducible(7, 1), vec![0]);
    }

    #[test]
    fn field_axioms_f9() {
        let k = FiniteField::new(3, 2);
        for a in k.nonzero() {
            assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
            assert_eq!(k.pow(a, 8), 1);
            assert!(k.trace(a) < 3);
        }
        assert_eq!(k.elements().filter(|&a| k.is_primitive(a)).count(), 4);
    }

    #[test]
    fn frobenius_has_order_d() {
        let k = FiniteField::new(3, 3);
        for a in k.elements() {
            let f3 = k.frobenius(k.frobenius(k.frobenius(a)));
            assert_eq!(f3, a);
        }
        assert!(k.elements().any(|a| k.frobenius(a) != a));
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(smallest_primitive_root(3), 2);
        assert_eq!(smallest_primitive_root(5), 2);
        assert_eq!(smallest_primitive_root(7), 3);
    }
}
