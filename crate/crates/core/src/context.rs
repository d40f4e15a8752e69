//! Global precision parameters shared by every computation in a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::wide::MODULUS_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    /// Odd prime.
    pub p: u64,
    /// Degree of the unramified extension K/Q_p.
    pub d: usize,
    /// Target precision in p-adic digits.
    pub n: u32,
    /// Series degree cap.
    pub degree_cap: usize,
    /// Extra working digits on top of `n`.
    pub guard: u32,
}

impl PrecisionContext {
    /// Builds a context with the default guard: every digit the working
    /// modulus can hold beyond `n`.
    pub fn new(p: u64, d: usize, n: u32, degree_cap: usize) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        let guard = max_digits(p).saturating_sub(n);
        Self::with_guard(p, d, n, degree_cap, guard)
    }

    pub fn with_guard(p: u64, d: usize, n: u32, degree_cap: usize, guard: u32) -> Result<Self> {
        let ctx = Self {
            p,
            d,
            n,
            degree_cap,
            guard,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 3 || !is_prime(self.p) {
            return Err(Error::Config(format!("p = {} must be an odd prime", self.p)));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        let w = self.working_digits();
        if w > max_digits(self.p) {
            return Err(Error::Config(format!(
                "N + guard = {w} exceeds the {} digits a {MODULUS_BITS}-bit modulus holds for p = {}",
                max_digits(self.p),
                self.p
            )));
        }
        let need = min_guard(self.p, self.degree_cap);
        if self.guard < need {
            return Err(Error::Config(format!(
                "guard = {} is below the {need} digits needed for series of degree {}",
                self.guard, self.degree_cap
            )));
        }
        Ok(())
    }

    /// Digits of the working modulus p^w.
    pub fn working_digits(&self) -> u32 {
        self.n + self.guard
    }

    /// Cardinality of the residue field.
    pub fn q(&self) -> u64 {
        self.p.pow(self.d as u32)
    }

    pub fn with_degree_cap(&self, degree_cap: usize) -> Result<Self> {
        Self::with_guard(self.p, self.d, self.n, degree_cap, self.guard)
    }

    pub fn with_d(&self, d: usize) -> Result<Self> {
        Self::with_guard(self.p, d, self.n, self.degree_cap, self.guard)
    }
}

/// Largest w with p^w < 2^MODULUS_BITS.
pub fn max_digits(p: u64) -> u32 {
    (MODULUS_BITS as f64 / (p as f64).log2() - 1e-9).floor() as u32
}

/// Guard digits for series exponentials of degree up to `degree_cap`: the
/// divisions by n in n·e_n = Σ h_k e_{n−k} lose at most v_p(n!) ≤ (n−1)/(p−1)
/// digits.
pub fn min_guard(p: u64, degree_cap: usize) -> u32 {
    (degree_cap as u64).div_ceil(p - 1) as u32 + 2
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= n {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}
