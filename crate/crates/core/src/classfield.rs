//! Residue-field and norm-group computations: the trace lattice Z, kernels of
//! v ↦ Tr(v^p ·), the projective correspondence, the normal basis η, the
//! structure of (1+P)/(1+P²), the norm congruence in M_u, and Lubin–Tate
//! endomorphisms of h(X) = X^q + pX.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponentials::Exponentials;
use crate::extensions::trace_and_norm;
use crate::linalg;
use crate::padic::{El, LocalRing};
use crate::residue::{FiniteField, Fq};
use crate::series::TruncatedSeries;
use crate::wide::Wide;

/// x ∈ Z ⇔ Tr_{K/Q_p}(x) ∈ pZ_p.
pub fn z_membership(k: &LocalRing, x: &El) -> bool {
    k.valuation(&k.unramified_trace(x)) >= 1
}

/// A point of P(k) = k^×/F_p^×, stored by its minimal-encoding representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProjectivePoint(Fq);

impl ProjectivePoint {
    pub fn new(field: &FiniteField, v: Fq) -> Result<Self> {
        if v == 0 || v >= field.order() {
            return Err(Error::NotAUnit("projective points need v ∈ k^×"));
        }
        let rep = (1..field.p()).map(|a| field.scale(a, v)).min().unwrap();
        Ok(Self(rep))
    }

    pub fn rep(&self) -> Fq {
        self.0
    }

    /// All (q−1)/(p−1) points, sorted by representative.
    pub fn all(field: &FiniteField) -> Vec<Self> {
        let set: BTreeSet<Self> = field
            .nonzero()
            .map(|v| Self::new(field, v).expect("nonzero"))
            .collect();
        set.into_iter().collect()
    }

    /// The residue of u = v^{1−p} = v^{q−p}.
    pub fn u(&self, field: &FiniteField) -> Fq {
        field.pow(self.0, field.order() - field.p())
    }
}

/// {y ∈ k : Tr_{k/F_p}(v^p y) = 0}, sorted.
pub fn trace_kernel(field: &FiniteField, v: Fq) -> Vec<Fq> {
    let vp = field.pow(v, field.p());
    field
        .elements()
        .filter(|&y| field.trace(field.mul(vp, y)) == 0)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceEntry {
    pub point: ProjectivePoint,
    /// Residue of u = v^{1−p}.
    pub u: Fq,
    pub kernel: Vec<Fq>,
}

/// Assigns every point of P(k) its trace kernel; kernels must be distinct.
pub fn subextension_correspondence(field: &FiniteField) -> Result<Vec<CorrespondenceEntry>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for point in ProjectivePoint::all(field) {
        let kernel = trace_kernel(field, point.rep());
        if !seen.insert(kernel.clone()) {
            return Err(Error::DuplicateFingerprint(format!("{kernel:?}")));
        }
        out.push(CorrespondenceEntry {
            point,
            u: point.u(field),
            kernel,
        });
    }
    Ok(out)
}

/// The two characterizations of "v lies on the line through v1 and v2".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LineTest {
    /// v^p ∈ span_{F_p}(v1^p, v2^p).
    pub by_span: bool,
    /// ker(v) ⊇ ker(v1) ∩ ker(v2).
    pub by_kernel: bool,
}

pub fn line_characterizations(field: &FiniteField, v: Fq, v1: Fq, v2: Fq) -> Result<LineTest> {
    let (a, b, c) = (
        ProjectivePoint::new(field, v)?,
        ProjectivePoint::new(field, v1)?,
        ProjectivePoint::new(field, v2)?,
    );
    if b == c {
        return Err(Error::Config("a line needs two distinct points".into()));
    }
    let p = field.p();
    let (vp, w1, w2) = (
        field.pow(a.rep(), p),
        field.pow(b.rep(), p),
        field.pow(c.rep(), p),
    );
    let by_span = (0..p).any(|s| {
        (0..p).any(|t| field.add(field.scale(s, w1), field.scale(t, w2)) == vp)
    });
    let kv: BTreeSet<Fq> = trace_kernel(field, a.rep()).into_iter().collect();
    let k1: BTreeSet<Fq> = trace_kernel(field, b.rep()).into_iter().collect();
    let k2: BTreeSet<Fq> = trace_kernel(field, c.rep()).into_iter().collect();
    let by_kernel = k1.intersection(&k2).all(|y| kv.contains(y));
    Ok(LineTest { by_span, by_kernel })
}

/// Whether v lies on the line through v1 ≠ v2, after checking that both
/// characterizations agree.
pub fn line_containment(field: &FiniteField, v: Fq, v1: Fq, v2: Fq) -> Result<bool> {
    let t = line_characterizations(field, v, v1, v2)?;
    if t.by_span != t.by_kernel {
        return Err(Error::CheckFailed(format!(
            "line characterizations disagree for ({v}, {v1}, {v2})"
        )));
    }
    Ok(t.by_span)
}

/// The points of P(k) on the line through v1 and v2.
pub fn line_points(field: &FiniteField, v1: Fq, v2: Fq) -> Result<Vec<ProjectivePoint>> {
    let mut out = Vec::new();
    for pt in ProjectivePoint::all(field) {
        if line_containment(field, pt.rep(), v1, v2)? {
            out.push(pt);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub points: usize,
    /// ker(σv) = σ(ker v) for every point.
    pub equivariant: bool,
    /// Points with σ(v) ∈ F_p^× v.
    pub fixed_points: Vec<ProjectivePoint>,
    /// u = v^{1−p} over the fixed points.
    pub fixed_u: Vec<Fq>,
    /// {u ∈ (k^×)^{p−1} : u^p = u}, enumerated directly.
    pub expected_u: Vec<Fq>,
    pub holds: bool,
}

pub fn frobenius_equivariance(field: &FiniteField) -> FrobeniusReport {
    let points = ProjectivePoint::all(field);
    let mut equivariant = true;
    let mut fixed_points = Vec::new();
    let mut fixed_u = BTreeSet::new();
    for pt in &points {
        let v = pt.rep();
        let sv = field.frobenius(v);
        let lhs = trace_kernel(field, sv);
        let mut rhs: Vec<Fq> = trace_kernel(field, v)
            .into_iter()
            .map(|y| field.frobenius(y))
            .collect();
        rhs.sort_unstable();
        equivariant &= lhs == rhs;
        if ProjectivePoint::new(field, sv).expect("nonzero") == *pt {
            fixed_points.push(*pt);
        }
        let u = pt.u(field);
        if field.frobenius(u) == u {
            fixed_u.insert(u);
        }
    }
    let p = field.p();
    let expected: BTreeSet<Fq> = field
        .nonzero()
        .map(|y| field.pow(y, p - 1))
        .filter(|&u| field.frobenius(u) == u)
        .collect();
    let fixed_from_points: BTreeSet<Fq> = fixed_points.iter().map(|pt| pt.u(field)).collect();
    let holds = equivariant && fixed_u == expected && fixed_from_points == expected;
    FrobeniusReport {
        points: points.len(),
        equivariant,
        fixed_points,
        fixed_u: fixed_u.into_iter().collect(),
        expected_u: expected.into_iter().collect(),
        holds,
    }
}

#[derive(Debug, Clone)]
pub struct NormalBasis {
    pub residue: Fq,
    /// Teichmüller lift of `residue`.
    pub eta: El,
    /// Tr_{k/F_p}(η̄).
    pub trace_residue: u64,
    /// v_p of det(η, η^p − η^{p²}, …) in the power basis; 0 for a Z_p-basis.
    pub decomposition_det_valuation: u32,
    /// Same with pη in place of η: the index [O_K : Z] = p gives 1.
    pub z_det_valuation: u32,
}

/// The smallest-encoding η ∈ μ_{q−1} with η̄ generating a normal basis.
pub fn normal_basis_eta(k: &LocalRing) -> Result<NormalBasis> {
    let field = k.residue_field();
    let d = field.degree();
    let p = field.p();
    let residue = field
        .nonzero()
        .find(|&a| {
            let orbit: Vec<Fq> = (0..d)
                .scan(a, |x, _| {
                    let cur = *x;
                    *x = field.frobenius(cur);
                    Some(cur)
                })
                .collect();
            field.rank(&orbit) == d
        })
        .expect("normal bases exist");
    let eta = k.teichmuller(residue);
    let mut powers = vec![eta.clone()];
    for _ in 0..d {
        powers.push(k.pow(powers.last().unwrap(), p));
    }
    let det_valuation = |first: El| -> Result<u32> {
        let mut basis = vec![first];
        for i in 1..d {
            basis.push(k.sub(&powers[i], &powers[i + 1]));
        }
        let m: linalg::Matrix = basis
            .iter()
            .map(|b| (0..d).map(|c| k.x_coordinate(b, c)).collect())
            .collect();
        Ok(k.valuation(&linalg::determinant(k, &m)?))
    };
    Ok(NormalBasis {
        residue,
        eta: eta.clone(),
        trace_residue: field.trace(residue),
        decomposition_det_valuation: det_valuation(eta.clone())?,
        z_det_valuation: det_valuation(k.mul_int(&eta, p as i64))?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitGroupReport {
    /// Classes of (1+P)/(1+P²) reached from the generators 1 + η^{p^i}p.
    pub classes_generated: usize,
    /// |(1+P)/(1+P²)| = p^d.
    pub expected_classes: u64,
    pub all_principal: bool,
    /// Order of the permutation model of C_p ≀ C_d.
    pub wreath_order: usize,
    pub wreath_expected: u64,
    pub wreath_relations_ok: bool,
    pub holds: bool,
}

/// Brute-force closure in (O_K/p²)^× of the generators 1 + η^{p^i}p, plus
/// the wreath-product model ⟨σ, g_i⟩ of order p^d·d.
pub fn unit_group_decomposition(k: &LocalRing) -> Result<UnitGroupReport> {
    if k.e() != 1 {
        return Err(Error::Config("unit group decomposition works over K".into()));
    }
    let nb = normal_basis_eta(k)?;
    let p = k.p();
    let d = k.d();
    let two = 2;
    let mut gens = Vec::new();
    let mut eta_pow = nb.eta.clone();
    for _ in 0..d {
        gens.push(k.with_prec(&k.add(&k.one(), &k.mul_int(&eta_pow, p as i64)), two));
        eta_pow = k.pow(&eta_pow, p);
    }
    let key = |x: &El| -> Vec<Wide> { k.canonical(x) };
    let start = k.with_prec(&k.one(), two);
    let mut seen: HashSet<Vec<Wide>> = HashSet::from([key(&start)]);
    let mut queue = VecDeque::from([start]);
    let mut all_principal = true;
    while let Some(x) = queue.pop_front() {
        all_principal &= k.valuation(&k.sub(&x, &k.one())) >= 1;
        for g in &gens {
            let y = k.mul(&x, g);
            if seen.insert(key(&y)) {
                queue.push_back(y);
            }
        }
    }
    let expected_classes = p.pow(d as u32);
    let (wreath_order, wreath_relations_ok) = wreath_model(p as usize, d);
    let wreath_expected = expected_classes * d as u64;
    Ok(UnitGroupReport {
        classes_generated: seen.len(),
        expected_classes,
        all_principal,
        wreath_order,
        wreath_expected,
        wreath_relations_ok,
        holds: seen.len() as u64 == expected_classes
            && all_principal
            && wreath_order as u64 == wreath_expected
            && wreath_relations_ok,
    })
}

type Perm = Vec<usize>;

fn compose(a: &Perm, b: &Perm) -> Perm {
    // apply b, then a
    b.iter().map(|&i| a[i]).collect()
}

fn invert(a: &Perm) -> Perm {
    let mut inv = vec![0; a.len()];
    for (i, &j) in a.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

fn perm_pow(a: &Perm, n: usize) -> Perm {
    (0..n).fold((0..a.len()).collect(), |acc, _| compose(a, &acc))
}

/// C_p ≀ C_d acting on d blocks of p points: g_0 cycles block 0, σ rotates
/// the blocks. Returns the order of ⟨σ, g_0⟩ and whether the defining
/// relations hold for g_i = σ^i g_0 σ^{−i}.
pub fn wreath_model(p: usize, d: usize) -> (usize, bool) {
    let n = p * d;
    let id: Perm = (0..n).collect();
    let g0: Perm = (0..n)
        .map(|i| if i < p { (i + 1) % p } else { i })
        .collect();
    let sigma: Perm = (0..n).map(|i| ((i / p + 1) % d) * p + i % p).collect();
    let sigma_inv = invert(&sigma);
    let g: Vec<Perm> = (0..d)
        .map(|i| compose(&perm_pow(&sigma, i), &compose(&g0, &perm_pow(&sigma_inv, i))))
        .collect();
    let mut ok = perm_pow(&sigma, d) == id;
    for i in 0..d {
        ok &= perm_pow(&g[i], p) == id;
        ok &= compose(&sigma, &compose(&g[i], &sigma_inv)) == g[(i + 1) % d];
        for j in 0..d {
            ok &= compose(&g[i], &g[j]) == compose(&g[j], &g[i]);
        }
    }
    let mut seen: HashSet<Perm> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in [&sigma, &g0] {
            let y = compose(s, &x);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    (seen.len(), ok)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormIdentityReport {
    pub v: Fq,
    pub w: Fq,
    /// v_p(N(−(w/v)(1 + t·w/v)) − (1 + pv^{−p}(w − w^p))), capped.
    pub literal_digits: u32,
    /// v_p(N(1 + t·w/v) − (1 + pv^{−p}(w − w^p))), capped.
    pub corrected_digits: u32,
    pub literal_holds: bool,
    pub corrected_holds: bool,
}

/// Norms from M_u (u = v^{1−p}, t = ω_u^{p−1}) against 1 + pv^{−p}(w − w^p)
/// modulo p², for every w ∈ k^×.
pub fn norm_identity_check(ex: &Exponentials, v: Fq) -> Result<Vec<NormIdentityReport>> {
    let k = &ex.k;
    let field = k.residue_field();
    let p = k.p();
    let (vt, u) = ex.unit_pair(v)?;
    let tower = ex.tower(&u)?;
    let m = tower.m();
    let t = m.uniformizer();
    let vinv = k.inverse(&vt)?;
    let vmp = k.pow(&vinv, p);
    let mut out = Vec::new();
    for w in field.nonzero() {
        let wt = k.teichmuller(w);
        let c = k.mul(&wt, &vinv);
        let x = m.add(&m.one(), &m.mul(&t, &m.from_base(&c)));
        let (_, n_corr) = trace_and_norm(m, &x)?;
        let lit = m.mul(&m.from_base(&k.neg(&c)), &x);
        let (_, n_lit) = trace_and_norm(m, &lit)?;
        let diff = k.sub(&wt, &k.pow(&wt, p));
        let rhs = k.add(&k.one(), &k.mul_int(&k.mul(&vmp, &diff), p as i64));
        let literal_digits = k.agreement(&n_lit, &rhs).min(k.max_prec());
        let corrected_digits = k.agreement(&n_corr, &rhs).min(k.max_prec());
        out.push(NormIdentityReport {
            v,
            w,
            literal_digits,
            corrected_digits,
            literal_holds: literal_digits >= 2,
            corrected_holds: corrected_digits >= 2,
        });
    }
    Ok(out)
}

/// h(X) = X^q + pX, the Lubin–Tate polynomial for the uniformizer p of K.
pub fn lubin_tate_poly(k: &LocalRing, cap: usize) -> TruncatedSeries {
    let q = k.residue_field().order() as usize;
    TruncatedSeries::from_terms(
        k,
        cap,
        &[(k.from_int(k.p() as i64), 1), (k.one(), q)],
    )
}

#[derive(Debug, Clone)]
pub struct LubinTateEndo {
    pub a: El,
    /// [a](X) through degree cap.
    pub series: TruncatedSeries,
    /// v_p(p − p^m), m = 2..=cap.
    pub pivot_valuations: Vec<u32>,
}

/// [a](X) ≡ aX mod X² with h([a](X)) = [a](h(X)), solved degree by degree:
/// the coefficient c_m enters with factor p − p^m.
pub fn lubin_tate_endo(k: &LocalRing, a: &El, cap: usize) -> Result<LubinTateEndo> {
    if k.e() != 1 {
        return Err(Error::Config("Lubin–Tate endomorphisms are built over K".into()));
    }
    let p = k.p();
    let q = k.residue_field().order();
    let h = lubin_tate_poly(k, cap);
    let mut hpow = vec![TruncatedSeries::one(k, cap), h.clone()];
    for j in 2..cap {
        hpow.push(hpow[j - 1].mul(&h));
    }
    let mut c = vec![k.zero(); cap + 1];
    if cap >= 1 {
        c[1] = a.clone();
    }
    let mut pivots = Vec::new();
    for m in 2..=cap {
        let partial = TruncatedSeries::new(k, c.clone(), cap);
        let lhs = partial.pow(q);
        let mut b = k.zero();
        for j in 1..m {
            b = k.add(&b, &k.mul(&c[j], hpow[j].coeff(m)));
        }
        let rhs = k.sub(&b, lhs.coeff(m));
        // p − p^m = p·(1 − p^{m−1})
        let unit = k.sub(&k.one(), &k.pow(&k.from_int(p as i64), m as u64 - 1));
        let pivot = k.mul_int(&unit, p as i64);
        pivots.push(k.valuation(&pivot));
        let reduced = k
            .div_by_p(&rhs)
            .map_err(|_| Error::PivotNotUnit { degree: m })?;
        c[m] = k.mul(&reduced, &k.inverse(&unit)?);
    }
    Ok(LubinTateEndo {
        a: a.clone(),
        series: TruncatedSeries::new(k, c, cap),
        pivot_valuations: pivots,
    })
}

impl LubinTateEndo {
    /// v_p of h([a]) − [a](h) over all degrees ≤ cap (capped at precision).
    pub fn functional_residual(&self) -> Result<u32> {
        let s = &self.series;
        let k = s.ring();
        let q = k.residue_field().order();
        let h = lubin_tate_poly(k, s.cap());
        let lhs = s.pow(q).add(&s.scale(&k.from_int(k.p() as i64)));
        let rhs = s.compose(&h)?;
        Ok(lhs.agreement(&rhs))
    }

    /// Smallest coefficient precision, in digits.
    pub fn min_precision(&self) -> u32 {
        self.series.coeffs().iter().map(El::prec).min().unwrap_or(0)
    }

    /// [a]∘[b].
    pub fn compose(&self, other: &LubinTateEndo) -> Result<TruncatedSeries> {
        self.series.compose(&other.series)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::PrecisionContext;

    fn k(p: u64, d: usize) -> LocalRing {
        LocalRing::unramified(&PrecisionContext::with_guard(p, d, 10, 16, 20).unwrap())
    }

    #[test]
    fn z_lattice_examples() {
        let k = k(3, 2);
        assert!(z_membership(&k, &k.from_int(3)));
        assert!(!z_membership(&k, &k.one()));
        let nb = normal_basis_eta(&k).unwrap();
        let e3 = k.pow(&nb.eta, 3);
        let x = k.sub(&e3, &k.pow(&e3, 3));
        assert!(z_membership(&k, &x));
    }

    #[test]
    fn kernels_have_size_q_over_p() {
        let f = FiniteField::new(3, 2);
        for pt in ProjectivePoint::all(&f) {
            assert_eq!(trace_kernel(&f, pt.rep()).len(), 3);
        }
        let f1 = FiniteField::new(5, 1);
        assert_eq!(trace_kernel(&f1, 2), vec![0]);
        assert_eq!(ProjectivePoint::all(&f1).len(), 1);
    }

    #[test]
    fn projective_points_are_canonical() {
        let f = FiniteField::new(3, 2);
        let pts = ProjectivePoint::all(&f);
        assert_eq!(pts.len(), 4);
        for v in f.nonzero() {
            let a = ProjectivePoint::new(&f, v).unwrap();
            let b = ProjectivePoint::new(&f, f.scale(2, v)).unwrap();
            assert_eq!(a, b);
        }
        assert!(ProjectivePoint::new(&f, 0).is_err());
    }

    #[test]
    fn lines_through_two_points() {
        let f = FiniteField::new(3, 3);
        let pts = ProjectivePoint::all(&f);
        let line = line_points(&f, pts[0].rep(), pts[1].rep()).unwrap();
        assert_eq!(line.len(), 4);
        assert!(line_containment(&f, pts[0].rep(), pts[0].rep(), pts[1].rep()).unwrap());
        assert!(line_containment(&f, 1, 1, 1).is_err());
    }

    #[test]
    fn wreath_orders() {
        assert_eq!(wreath_model(3, 2), (18, true));
        assert_eq!(wreath_model(5, 1), (5, true));
        assert_eq!(wreath_model(3, 3).0, 81);
    }

    #[test]
    fn lubin_tate_identity_and_zero() {
        let k = k(3, 2);
        let one = lubin_tate_endo(&k, &k.one(), 12).unwrap();
        let x = TruncatedSeries::monomial(&k, 12, k.one(), 1);
        assert!(one.series.equal(&x));
        let zero = lubin_tate_endo(&k, &k.zero(), 12).unwrap();
        assert!(zero.series.equal(&TruncatedSeries::zero(&k, 12)));
    }
}
