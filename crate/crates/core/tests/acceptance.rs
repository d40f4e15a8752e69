//! Acceptance criteria, one line per criterion. Criteria listed in
//! `UNATTAINABLE` are still evaluated and reported as FAIL with the measured
//! numbers; only an unexpected failure makes the run exit nonzero.

use std::collections::BTreeSet;
use std::time::Instant;

use padic_expo::classfield::{self, ProjectivePoint};
use padic_expo::diffmod::verify_frobenius_structure;
use padic_expo::exponentials::{e_u2_series, e_un_factorization, e_un_series, Exponentials};
use padic_expo::extensions::CoherentRoots;
use padic_expo::series::TruncatedSeries;
use padic_expo::witt::{bracket_map, lemma22_check, WittVector};
use padic_expo::{El, FiniteField, LocalRing, PrecisionContext, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose statement the computation contradicts; see the printed note.
const UNATTAINABLE: [u32; 2] = [2, 5];

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        pass,
        summary: summary.into(),
    })
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Result<Verdict>)> = vec![
        (1, "Dwork root of unity", c1),
        (2, "E_{u,2} over-convergence witness", c2),
        (3, "Kummer identity", c3),
        (4, "self-dual Gram matrix", c4),
        (5, "norm congruence", c5),
        (6, "correspondence and lines", c6),
        (7, "Frobenius equivariance", c7),
        (8, "Witt suite", c8),
        (9, "E_{u,n} generalization", c9),
        (10, "Frobenius structure identity", c10),
        (11, "decomposition lemmas", c11),
        (12, "Lubin-Tate endomorphism", c12),
    ];
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let v = f().unwrap_or_else(|e| Verdict {
            pass: false,
            summary: format!("error: {e}"),
        });
        let secs = start.elapsed().as_secs_f64();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag}  {name}: {} [{secs:.2} s]", v.summary);
        if !v.pass && !UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn ctx(p: u64, d: usize, n: u32, cap: usize) -> PrecisionContext {
    PrecisionContext::new(p, d, n, cap).expect("valid context")
}

fn c1() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [3u64, 5] {
        let start = Instant::now();
        let ex = Exponentials::new(&ctx(p, 1, 12, 256))?;
        let kp = ex.kp();
        let z = ex.zeta()?;
        let e = kp.e() as u32;
        let zp = kp.pow(&z.value, p);
        let order_p = kp.equal(&zp, &kp.one()) && kp.agreement(&zp, &kp.one()) >= 12 * e;
        let nontrivial = kp.valuation(&kp.sub(&z.value, &kp.one())) < z.value.prec();
        // 1 + ζ + … + ζ^{p−1} = 0
        let mut acc = kp.zero();
        let mut pw = kp.one();
        for _ in 0..p {
            acc = kp.add(&acc, &pw);
            pw = kp.mul(&pw, &z.value);
        }
        let cyclotomic = kp.agreement(&acc, &kp.zero()) >= 12 * e;
        let fast = start.elapsed().as_secs_f64() < 10.0;
        pass &= order_p && nontrivial && cyclotomic && fast;
        parts.push(format!(
            "p={p} ζ^p=1:{order_p} ζ≠1:{nontrivial} Φ_p(ζ)=0:{cyclotomic} ({:?}, {:.2} s)",
            z.rigor,
            start.elapsed().as_secs_f64()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c2() -> Result<Verdict> {
    let start = Instant::now();
    let ex = Exponentials::new(&ctx(3, 2, 12, 256))?;
    let mut slopes = Vec::new();
    let mut us = BTreeSet::new();
    for pt in ProjectivePoint::all(ex.k.residue_field()) {
        let (_, u) = ex.unit_pair(pt.rep())?;
        us.insert(ex.k.residue(&u));
        let tower = ex.tower(&u)?;
        let s = e_u2_series(&tower, 256)?;
        slopes.push(s.overconvergence_report(64, 256).slope.unwrap_or(f64::INFINITY));
    }
    let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    // the slope is governed by inf_i v_p(λ_i)/p^i for the Witt vector λ of
    // the factorization exp(upωX)·E(λ, X)
    let k = &ex.k;
    let roots = CoherentRoots::build(k, &k.one(), 2)?;
    let deeper = CoherentRoots::build(k, &k.one(), 3)?;
    let fact = e_un_factorization(&roots, &deeper, 256)?;
    let e = deeper.ring().e() as f64;
    let bound = fact
        .lambda_valuations
        .iter()
        .enumerate()
        .filter(|(i, _)| 3usize.pow(*i as u32) <= 256)
        .map(|(i, &v)| v as f64 / e / 3f64.powi(i as i32))
        .fold(f64::INFINITY, f64::min);
    let fast = start.elapsed().as_secs_f64() < 120.0;
    let pass = slopes.iter().all(|&s| s >= 0.05) && fast;
    verdict(
        pass,
        format!(
            "{} values of u, all integral through 256; fitted slopes over [64,256] min {min:.4} \
             (required ≥ 0.05); v_π(λ_i) = {:?} with e = {e} give inf_i v_p(λ_i)/p^i = {bound:.4}, \
             so the asymptotic slope in v_p units is near 0.04 and the 0.05 threshold cannot hold",
            us.len(),
            fact.lambda_valuations
        ),
    )
}

fn c3() -> Result<Verdict> {
    let ex = Exponentials::new(&ctx(3, 2, 12, 256))?;
    let mut pass = true;
    let mut min = f64::INFINITY;
    let mut rigor = Vec::new();
    for pt in ProjectivePoint::all(ex.k.residue_field()) {
        let r = ex.kummer_generator_check(pt.rep())?;
        pass &= r.holds && r.residual_digits >= 10.0;
        min = min.min(r.residual_digits);
        rigor.push(format!("{:?}", r.rigor));
    }
    verdict(
        pass,
        format!("min residual {min:.1} digits over P(k) (floor 10), rigor {rigor:?}"),
    )
}

fn c4() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (p, d) in [(3u64, 1usize), (3, 2), (5, 1), (5, 2)] {
        let ex = Exponentials::new(&ctx(p, d, 12, 256))?;
        let mut digits = u32::MAX;
        let mut ok = true;
        for pt in ProjectivePoint::all(ex.k.residue_field()) {
            let g = ex.self_dual_generator(pt.rep())?;
            let cross = ex.conjugate_crosscheck(&g)?;
            digits = digits.min(g.gram_identity_digits());
            ok &= g.gram_identity_digits() >= 8
                && g.gram_is_symmetric()
                && g.alpha_valuation() == -(p as i64 - 1)
                && g.tower.different_exponent() == 2 * (p as u32 - 1)
                && cross.holds;
        }
        pass &= ok;
        parts.push(format!("p={p} d={d}: {ok} (Gram digits ≥ {digits})"));
    }
    verdict(pass, parts.join("; "))
}

fn c5() -> Result<Verdict> {
    let ex = Exponentials::new(&ctx(3, 2, 12, 256))?;
    let mut total = 0;
    let mut literal = 0;
    let mut corrected = 0;
    for pt in ProjectivePoint::all(ex.k.residue_field()) {
        for r in classfield::norm_identity_check(&ex, pt.rep())? {
            total += 1;
            literal += usize::from(r.literal_holds);
            corrected += usize::from(r.corrected_holds);
        }
    }
    verdict(
        literal == 32 && total == 32,
        format!(
            "N(−(w/v)(1+tw/v)) ≡ 1+pv^{{−p}}(w−w^p) holds for {literal}/{total}; \
             without the factor −w/v, N(1+tw/v) satisfies it for {corrected}/{total}. \
             The extra factor contributes (−w/v)^p, so the literal form fails in general"
        ),
    )
}

/// Number of lines of PG(d−1, p).
fn line_count(p: u64, d: u32) -> u64 {
    if d < 2 {
        return 0;
    }
    let gauss = |n: u32| -> u64 {
        // [n choose 2]_p
        let num = (p.pow(n) - 1) * (p.pow(n - 1) - 1);
        num / ((p * p - 1) * (p - 1))
    };
    gauss(d)
}

fn c6() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [2usize, 3] {
        let f = FiniteField::new(3, d);
        let q = f.order();
        let corr = classfield::subextension_correspondence(&f)?;
        let distinct = corr.len() as u64 == (q - 1) / 2;
        let pts = ProjectivePoint::all(&f);
        let mut lines = BTreeSet::new();
        let mut sizes_ok = true;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let line = classfield::line_points(&f, pts[a].rep(), pts[b].rep())?;
                sizes_ok &= line.len() == 4;
                lines.insert(line);
            }
        }
        let count_ok = lines.len() as u64 == line_count(3, d as u32);
        let n = pts.len();
        let mut triples = Vec::new();
        if q == 9 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if b != c {
                            triples.push((a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(27);
            while triples.len() < 500 {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if b != c {
                    triples.push((a, b, c));
                }
            }
        }
        let mut agree = true;
        for &(a, b, c) in &triples {
            let t = classfield::line_characterizations(&f, pts[a].rep(), pts[b].rep(), pts[c].rep())?;
            agree &= t.by_span == t.by_kernel;
        }
        let checked = triples.len();
        let ok = distinct && sizes_ok && count_ok && agree;
        pass &= ok;
        parts.push(format!(
            "q={q}: {} kernels, {} lines of 4 points, {checked} triples agree:{agree}",
            corr.len(),
            lines.len()
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c7() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    for d in [2usize, 3] {
        let f = FiniteField::new(3, d);
        let r = classfield::frobenius_equivariance(&f);
        // oracle: u^p = u with u a (p−1)-th power means u ∈ F_p^× ∩ (k^×)^{p−1}
        let oracle: Vec<u64> = (1..3u64)
            .map(|a| f.from_prime_field(a))
            .filter(|&a| f.nonzero().any(|y| f.pow(y, 2) == a))
            .collect();
        let ok = r.holds && r.expected_u == oracle;
        pass &= ok;
        parts.push(format!(
            "q={}: equivariant:{} fixed u {:?}",
            f.order(),
            r.equivariant,
            r.fixed_u
        ));
    }
    verdict(pass, parts.join("; "))
}

fn ghost_oracle(r: &LocalRing, x: &[El]) -> Vec<El> {
    let p = r.p();
    (0..x.len())
        .map(|n| {
            (0..=n).fold(r.zero(), |acc, i| {
                let term = r.pow(&x[i], p.pow((n - i) as u32));
                let scaled = r.mul(&r.pow(&r.from_int(p as i64), i as u64), &term);
                r.add(&acc, &scaled)
            })
        })
        .collect()
}

fn c8() -> Result<Verdict> {
    let c = ctx(3, 1, 12, 32);
    let k = LocalRing::unramified(&c);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut exact = 0;
    for _ in 0..200 {
        let xs: Vec<El> = (0..4)
            .map(|_| k.from_int(rng.gen_range(-1_000_000_000i64..1_000_000_000)))
            .collect();
        let w = WittVector::new(&k, xs.clone());
        let g = w.ghost();
        let oracle = ghost_oracle(&k, &xs);
        let same = g.iter().zip(&oracle).all(|(a, b)| k.equal(a, b));
        if same && WittVector::unghost(&k, &g)?.equal(&w) {
            exact += 1;
        }
    }
    let roots = CoherentRoots::build(&k, &k.one(), 3)?;
    let r = roots.ring();
    let id = vec![r.zero(), r.one()];
    let bracket = bracket_map(&id, roots.omega(3), &r.one(), r, 4)?;
    let bracket_ok = bracket
        .ghost()
        .iter()
        .enumerate()
        .all(|(i, g)| r.equal(g, roots.omega(3 - i)));
    let roots2 = CoherentRoots::build(&k, &k.one(), 2)?;
    let r2 = roots2.ring();
    let mut lemma = Vec::new();
    for (a0, expect) in [(2i64, Some(0usize)), (6, Some(1)), (18, Some(2)), (0, None)] {
        let h = vec![r2.from_int(a0), r2.one()];
        let rep = lemma22_check(&h, roots2.omega(2), &r2.one(), r2, 4)?;
        lemma.push(rep.holds && rep.first_unit == expect);
    }
    let lemma_ok = lemma.iter().all(|&b| b);
    verdict(
        exact == 200 && bracket_ok && lemma_ok,
        format!("round trips {exact}/200, [X] ghosts ⟨ω_3, ω_2, ω_1, 0⟩:{bracket_ok}, key lemma {lemma:?}"),
    )
}

fn c9() -> Result<Verdict> {
    let c = ctx(5, 1, 12, 256);
    let k = LocalRing::unramified(&c);
    let mut parts = Vec::new();
    let mut pass = true;
    for a in 1..5u64 {
        let u = k.teichmuller(k.residue_field().from_prime_field(a));
        let roots = CoherentRoots::build(&k, &u, 2)?;
        let deeper = CoherentRoots::build(&k, &u, 3)?;
        let s = e_un_series(&roots, 256)?;
        let slope = s.overconvergence_report(64, 256).slope.unwrap_or(f64::INFINITY);
        let fact = e_un_factorization(&roots, &deeper, 256)?;
        let ok = slope > 0.0 && fact.holds;
        pass &= ok;
        parts.push(format!(
            "u=[{a}]: slope {slope:.4}, factorization residual {:.1} digits",
            fact.residual_digits
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c10() -> Result<Verdict> {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut cases: Vec<(u64, u64, usize)> = vec![(3, 1, 1), (3, 1, 2)];
    cases.extend((1..5).map(|a| (5, a, 2)));
    for (p, a, n) in cases {
        let start = Instant::now();
        let c = ctx(p, 1, 8, 128);
        let k = LocalRing::unramified(&c);
        let u = k.teichmuller(k.residue_field().from_prime_field(a));
        let ok = match verify_frobenius_structure(&c, &u, n, 128) {
            Ok(r) => r.holds,
            Err(_) => false,
        };
        let secs = start.elapsed().as_secs_f64();
        pass &= ok && secs < 60.0;
        parts.push(format!("p={p} u=[{a}] n={n}: {ok} ({secs:.2} s)"));
    }
    verdict(pass, parts.join("; "))
}

fn c11() -> Result<Verdict> {
    let c = ctx(3, 2, 12, 32);
    let k = LocalRing::unramified(&c);
    let nb = classfield::normal_basis_eta(&k)?;
    let unit = nb.decomposition_det_valuation == 0;
    let groups = classfield::unit_group_decomposition(&k)?;
    let mut wreath = Vec::new();
    for (p, d) in [(3usize, 2usize), (3, 3), (5, 2)] {
        let (order, rel) = classfield::wreath_model(p, d);
        wreath.push(order == p.pow(d as u32) * d && rel);
    }
    let wreath_ok = wreath.iter().all(|&b| b);
    verdict(
        unit && nb.z_det_valuation == 1 && groups.holds && wreath_ok,
        format!(
            "η-basis det valuation {}, Z index valuation {}, {} of {} classes of (1+P)/(1+P²), wreath orders {:?}",
            nb.decomposition_det_valuation,
            nb.z_det_valuation,
            groups.classes_generated,
            groups.expected_classes,
            wreath
        ),
    )
}

fn c12() -> Result<Verdict> {
    let c = ctx(3, 2, 12, 32);
    let k = LocalRing::unramified(&c);
    let one = classfield::lubin_tate_endo(&k, &k.one(), 32)?;
    let identity = one.series.equal(&TruncatedSeries::monomial(&k, 32, k.one(), 1));
    let eta = classfield::normal_basis_eta(&k)?.eta;
    let a = k.sub(&k.one(), &k.mul_int(&eta, 3));
    let la = classfield::lubin_tate_endo(&k, &a, 32)?;
    let residual = la.functional_residual()?;
    let functional = residual >= la.min_precision().min(c.n);
    let b = k.add(&k.one(), &k.mul_int(&eta, 9));
    let la16 = classfield::lubin_tate_endo(&k, &a, 16)?;
    let lb16 = classfield::lubin_tate_endo(&k, &b, 16)?;
    let lab = classfield::lubin_tate_endo(&k, &k.mul(&a, &b), 16)?;
    let comp = la16.compose(&lb16)?;
    let composes = comp.equal(&lab.series);
    verdict(
        identity && functional && composes,
        format!(
            "[1](X)=X:{identity}, h([a])−[a](h) vanishes to {residual} digits \
             (coefficient precision {}), [a]∘[b]=[ab]:{composes} ({} digits)",
            la.min_precision(),
            comp.agreement(&lab.series)
        ),
    )
}
