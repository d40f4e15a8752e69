//! Truncated power series a_0 + a_1X + … + a_DX^D over a [`LocalRing`].
//!
//! Exponentials are computed from their logarithmic derivative: if
//! ∂ = X·d/dX and ∂E = h·E, then n·e_n = Σ_{k=1}^{n} h_k e_{n−k}. All the
//! exponentials here have integral h even when the exponent itself has
//! denominators, and a coefficient that fails to be divisible by n is a
//! genuine integrality failure.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extensions::Embedding;
use crate::padic::{El, LocalRing};

#[derive(Debug, Clone)]
pub struct TruncatedSeries {
    ring: LocalRing,
    coeffs: Vec<El>,
}

impl TruncatedSeries {
    /// Builds a series with the given leading coefficients, zero-padded or
    /// truncated to degree `cap`.
    pub fn new(ring: &LocalRing, mut coeffs: Vec<El>, cap: usize) -> Self {
        coeffs.resize(cap + 1, ring.zero());
        Self {
            ring: ring.clone(),
            coeffs,
        }
    }

    pub fn zero(ring: &LocalRing, cap: usize) -> Self {
        Self::new(ring, vec![], cap)
    }

    pub fn one(ring: &LocalRing, cap: usize) -> Self {
        Self::new(ring, vec![ring.one()], cap)
    }

    /// c·X^k.
    pub fn monomial(ring: &LocalRing, cap: usize, c: El, k: usize) -> Self {
        let mut s = Self::zero(ring, cap);
        if k <= cap {
            s.coeffs[k] = c;
        }
        s
    }

    /// Σ c_i X^{k_i}, ignoring exponents beyond the cap.
    pub fn from_terms(ring: &LocalRing, cap: usize, terms: &[(El, usize)]) -> Self {
        let mut s = Self::zero(ring, cap);
        for (c, k) in terms {
            if *k <= cap {
                s.coeffs[*k] = ring.add(&s.coeffs[*k], c);
            }
        }
        s
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &El {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[El] {
        &self.coeffs
    }

    pub fn truncate(&self, cap: usize) -> Self {
        Self::new(&self.ring, self.coeffs[..=cap.min(self.cap())].to_vec(), cap)
    }

    fn zip(&self, other: &Self, f: impl Fn(&El, &El) -> El) -> Self {
        let cap = self.cap().min(other.cap());
        let coeffs = (0..=cap).map(|n| f(&self.coeffs[n], &other.coeffs[n])).collect();
        Self {
            ring: self.ring.clone(),
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| self.ring.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| self.ring.sub(a, b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| self.ring.neg(a))
    }

    pub fn scale(&self, c: &El) -> Self {
        self.map(|a| self.ring.mul(a, c))
    }

    fn map(&self, f: impl Fn(&El) -> El) -> Self {
        Self {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Indices of coefficients that are not exact structural zeros.
    fn support(&self) -> Vec<usize> {
        let full = self.ring.max_prec();
        (0..self.coeffs.len())
            .filter(|&n| !(self.ring.is_zero(&self.coeffs[n]) && self.coeffs[n].prec() == full))
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let r = &self.ring;
        let cap = self.cap().min(other.cap());
        let mut out = vec![r.zero(); cap + 1];
        let sa = self.support();
        let sb = other.support();
        for &i in sa.iter().take_while(|&&i| i <= cap) {
            for &j in sb.iter().take_while(|&&j| i + j <= cap) {
                let t = r.mul(&self.coeffs[i], &other.coeffs[j]);
                out[i + j] = r.add(&out[i + j], &t);
            }
        }
        Self::new(r, out, cap)
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = Self::one(&self.ring, self.cap());
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// ∂(Σ a_nX^n) = Σ n·a_nX^n.
    pub fn derivation(&self) -> Self {
        let r = &self.ring;
        Self {
            ring: r.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, a)| r.mul_int(a, n as i64))
                .collect(),
        }
    }

    /// Multiplicative inverse; requires a unit constant term.
    pub fn inverse(&self) -> Result<Self> {
        let r = &self.ring;
        if !r.is_unit(&self.coeffs[0]) {
            return Err(Error::NonUnitLeadingTerm);
        }
        let b0 = r.inverse(&self.coeffs[0])?;
        let cap = self.cap();
        let supp: Vec<usize> = self.support().into_iter().filter(|&k| k > 0).collect();
        let mut b = vec![b0.clone()];
        for n in 1..=cap {
            let mut acc = r.zero();
            for &k in supp.iter().take_while(|&&k| k <= n) {
                acc = r.add(&acc, &r.mul(&self.coeffs[k], &b[n - k]));
            }
            b.push(r.neg(&r.mul(&acc, &b0)));
        }
        Ok(Self::new(r, b, cap))
    }

    /// The series E with E(0) = 1 and ∂E = h·E.
    pub fn exp_from_log_derivative(h: &Self) -> Result<Self> {
        let r = &h.ring;
        if !r.is_zero(&h.coeffs[0]) {
            return Err(Error::NonzeroConstantTerm);
        }
        let cap = h.cap();
        let supp: Vec<usize> = h.support().into_iter().filter(|&k| k > 0).collect();
        let mut e = vec![r.one()];
        for n in 1..=cap {
            let mut acc = r.zero();
            for &k in supp.iter().take_while(|&&k| k <= n) {
                acc = r.add(&acc, &r.mul(&h.coeffs[k], &e[n - k]));
            }
            let en = r.div_int(&acc, n as u64).map_err(|err| match err {
                Error::NotDivisible(_) => Error::IntegralityViolation {
                    index: n,
                    valuation: integrality_deficit(r, &acc, n as u64),
                },
                other => other,
            })?;
            e.push(en);
        }
        Ok(Self::new(r, e, cap))
    }

    /// exp(f) for f(0) = 0 with integral coefficients.
    pub fn exp(&self) -> Result<Self> {
        if !self.ring.is_zero(&self.coeffs[0]) {
            return Err(Error::NonzeroConstantTerm);
        }
        Self::exp_from_log_derivative(&self.derivation())
    }

    /// ∂s/s; requires a unit constant term.
    pub fn log_derivative(&self) -> Result<Self> {
        Ok(self.derivation().mul(&self.inverse()?))
    }

    /// log(s) for s(0) = 1, failing if a coefficient is not integral.
    pub fn log(&self) -> Result<Self> {
        let r = &self.ring;
        if !r.equal(&self.coeffs[0], &r.one()) {
            return Err(Error::NonUnitLeadingTerm);
        }
        let h = self.log_derivative()?;
        let mut out = vec![r.zero()];
        for n in 1..=self.cap() {
            let a = r.div_int(&h.coeffs[n], n as u64).map_err(|err| match err {
                Error::NotDivisible(_) => Error::IntegralityViolation {
                    index: n,
                    valuation: integrality_deficit(r, &h.coeffs[n], n as u64),
                },
                other => other,
            })?;
            out.push(a);
        }
        Ok(Self::new(r, out, self.cap()))
    }

    /// s(c·X^m).
    pub fn substitute_monomial(&self, c: &El, m: usize) -> Self {
        let r = &self.ring;
        let cap = self.cap();
        let mut out = Self::zero(r, cap);
        let mut cpow = r.one();
        for n in 0..=cap / m.max(1) {
            out.coeffs[n * m] = r.mul(&self.coeffs[n], &cpow);
            cpow = r.mul(&cpow, c);
        }
        out
    }

    /// s(t(X)) for t(0) = 0, by Horner's rule.
    pub fn compose(&self, t: &Self) -> Result<Self> {
        let r = &self.ring;
        if !r.is_zero(&t.coeffs[0]) {
            return Err(Error::NonzeroConstantTerm);
        }
        let cap = self.cap().min(t.cap());
        let mut acc = Self::zero(r, cap);
        for a in self.coeffs[..=cap].iter().rev() {
            acc = acc.mul(t);
            acc.coeffs[0] = r.add(&acc.coeffs[0], a);
        }
        Ok(acc)
    }

    /// Coefficients pushed through an embedding of coefficient rings.
    pub fn map_ring(&self, emb: &Embedding) -> Self {
        Self {
            ring: emb.dst.clone(),
            coeffs: self.coeffs.iter().map(|a| emb.apply(a)).collect(),
        }
    }

    /// Coefficients transformed by an arbitrary map within the same ring.
    pub fn map_coeffs(&self, f: impl Fn(&El) -> El) -> Self {
        self.map(f)
    }

    /// The partial sum Σ_{n≤D} a_n x^n.
    pub fn eval(&self, x: &El) -> El {
        let r = &self.ring;
        self.coeffs
            .iter()
            .rev()
            .fold(r.zero(), |acc, a| r.add(&r.mul(&acc, x), a))
    }

    /// Evaluation at a unit with a certified or heuristic tail bound; see
    /// [`TailPolicy`].
    pub fn evaluate_at_unit(&self, x: &El, target_digits: u32) -> Result<Evaluation> {
        let r = &self.ring;
        if !r.is_unit(x) {
            return Err(Error::NotAUnit("series evaluation point must be a unit"));
        }
        let tail = self.tail_estimate();
        let (rigor, bound) = match tail.slope {
            None => (Rigor::Certified, f64::INFINITY),
            Some(s) if s > 0.0 => {
                if tail.certified >= target_digits as f64 {
                    (Rigor::Certified, tail.certified)
                } else if tail.heuristic >= target_digits as f64 {
                    (Rigor::Heuristic, tail.heuristic)
                } else {
                    return Err(Error::TailNotBounded {
                        target: target_digits,
                        bound: tail.certified,
                    });
                }
            }
            Some(s) => {
                return Err(Error::TailNotBounded {
                    target: target_digits,
                    bound: s,
                })
            }
        };
        let report = tail;
        let e = r.e() as f64;
        let tail_prec = if bound.is_finite() {
            (bound * e).floor().max(0.0) as u32
        } else {
            r.max_prec()
        };
        let value = r.with_prec(&self.eval(x), tail_prec);
        if value.prec() < target_digits * r.e() as u32 {
            return Err(Error::PrecisionExhausted {
                needed: target_digits * r.e() as u32,
                available: value.prec(),
                context: "series evaluation",
            });
        }
        Ok(Evaluation {
            value,
            rigor,
            tail_bound: bound,
            slope: report.slope,
        })
    }

    /// Lower bounds for min_{n>D} v_p(a_n) from the trailing half-window
    /// fit: the certified one floors the intercept and halves the slope.
    pub fn tail_estimate(&self) -> TailEstimate {
        let report = self.overconvergence_report(self.cap() / 2, self.cap());
        let next = (self.cap() + 1) as f64;
        match (report.slope, report.intercept) {
            (Some(s), Some(c)) => TailEstimate {
                slope: Some(s),
                certified: c.floor() + TailPolicy::HAIRCUT * s * next,
                heuristic: c + s * next,
            },
            (slope, _) => TailEstimate {
                slope,
                certified: f64::INFINITY,
                heuristic: f64::INFINITY,
            },
        }
    }

    /// Normalized valuation v_p(a_n) (v_p(p) = 1); for a coefficient that is
    /// zero to precision this is its known precision.
    pub fn valuation_p(&self, n: usize) -> f64 {
        self.ring.valuation_p(&self.coeffs[n])
    }

    pub fn valuation_profile(&self) -> Vec<ProfilePoint> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, a)| ProfilePoint {
                n,
                valuation: self.ring.valuation_p(a),
                censored: self.ring.is_zero(a),
            })
            .collect()
    }

    /// Least-squares fit of v_p(a_n) against n over [n0, n1], skipping
    /// coefficients that are zero to precision. Slope `None` means no
    /// coefficient in the window has a finite valuation.
    pub fn overconvergence_report(&self, n0: usize, n1: usize) -> OverconvergenceReport {
        let n1 = n1.min(self.cap());
        let n0 = n0.min(n1);
        let profile = self.valuation_profile();
        let integral_up_to = self.cap();
        let pts: Vec<(f64, f64)> = profile[n0..=n1]
            .iter()
            .filter(|pt| !pt.censored)
            .map(|pt| (pt.n as f64, pt.valuation))
            .collect();
        let censored = (n1 - n0 + 1) - pts.len();
        let (slope, intercept) = if pts.len() >= 2 {
            let k = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let s = sxy / sxx;
            // shift the line down until it lies below every fitted point
            let c = pts
                .iter()
                .map(|p| p.1 - s * p.0)
                .fold(f64::INFINITY, f64::min);
            (Some(s), Some(c))
        } else if pts.len() == 1 {
            (Some(0.0), Some(pts[0].1))
        } else {
            (None, None)
        };
        OverconvergenceReport {
            integral_up_to,
            window: (n0, n1),
            slope,
            intercept,
            fitted_points: pts.len(),
            censored_points: censored,
        }
    }

    /// CSV with header `n,valuation`, one row per coefficient.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,valuation")?;
        for pt in self.valuation_profile() {
            writeln!(out, "{},{:.6}", pt.n, pt.valuation)?;
        }
        Ok(())
    }

    /// The first index where two series differ, with v_π of the difference.
    pub fn first_difference(&self, other: &Self) -> Option<(usize, u32)> {
        let r = &self.ring;
        let cap = self.cap().min(other.cap());
        (0..=cap).find_map(|n| {
            let d = r.sub(&self.coeffs[n], &other.coeffs[n]);
            (!r.is_zero(&d)).then(|| (n, r.valuation(&d)))
        })
    }

    /// Smallest v_π over coefficients of the difference (precision-capped),
    /// i.e. how many uniformizer digits the two series agree to.
    pub fn agreement(&self, other: &Self) -> u32 {
        let r = &self.ring;
        let cap = self.cap().min(other.cap());
        (0..=cap)
            .map(|n| r.agreement(&self.coeffs[n], &other.coeffs[n]))
            .min()
            .unwrap_or(r.max_prec())
    }

    pub fn equal(&self, other: &Self) -> bool {
        self.first_difference(other).is_none()
    }
}

/// v_π(x) − e·v_p(n): negative when x/n is not integral.
fn integrality_deficit(r: &LocalRing, x: &El, n: u64) -> i64 {
    let mut k = 0;
    let mut m = n;
    while m.is_multiple_of(r.p()) {
        m /= r.p();
        k += 1;
    }
    r.valuation(x) as i64 - (r.e() as i64) * k
}

/// Tail policy for evaluation at units: fit the trailing half-window, move
/// the intercept down to a floored lower envelope, and halve the slope.
pub struct TailPolicy;

impl TailPolicy {
    pub const HAIRCUT: f64 = 0.5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rigor {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: El,
    pub rigor: Rigor,
    /// Lower bound (p-digits) on v(a_n) for n beyond the cap.
    pub tail_bound: f64,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailEstimate {
    pub slope: Option<f64>,
    pub certified: f64,
    pub heuristic: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub valuation: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverconvergenceReport {
    pub integral_up_to: usize,
    pub window: (usize, usize),
    /// `None` stands for an infinite slope (no finite valuation in window).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fitted_points: usize,
    pub censored_points: usize,
}
