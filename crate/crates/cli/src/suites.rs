use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use padic_expo::classfield::{self, ProjectivePoint};
use padic_expo::diffmod::frobenius_structure_report;
use padic_expo::exponentials::{e_u2_series, e_un_factorization, e_un_series, Exponentials};
use padic_expo::extensions::{hensel_conjugates, CoherentRoots};
use padic_expo::series::TruncatedSeries;
use padic_expo::witt::{artin_hasse_product, artin_hasse_relative, bracket_map, lemma22_check, WittVector};
use padic_expo::{El, Error, LocalRing, PrecisionContext, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, Suite};
use crate::report::{Case, Outcome};

/// State shared by the cases of one run.
pub struct Env {
    pub cfg: RunConfig,
    pub ctx: PrecisionContext,
    ex: OnceLock<Result<Exponentials>>,
}

impl Env {
    pub fn new(cfg: RunConfig, ctx: PrecisionContext) -> Arc<Self> {
        Arc::new(Self {
            cfg,
            ctx,
            ex: OnceLock::new(),
        })
    }

    pub fn ex(&self) -> Result<&Exponentials> {
        self.ex
            .get_or_init(|| Exponentials::new(&self.ctx))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn k(&self) -> LocalRing {
        LocalRing::unramified(&self.ctx)
    }

    fn points(&self) -> Vec<ProjectivePoint> {
        ProjectivePoint::all(self.k().residue_field())
    }

    /// Teichmüller lifts [a] ∈ μ_{p−1}, a = 1..p−1.
    fn units(&self) -> Vec<(u64, El)> {
        let k = self.k();
        let f = k.residue_field();
        (1..self.ctx.p)
            .map(|a| (a, k.teichmuller(f.from_prime_field(a))))
            .collect()
    }

    fn write_profile(&self, name: &str, s: &TruncatedSeries) -> Result<()> {
        if let Some(dir) = &self.cfg.csv {
            write_csv(&dir.join(format!("{name}.csv")), s)?;
        }
        Ok(())
    }
}

pub fn write_csv(path: &Path, s: &TruncatedSeries) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    s.write_csv(BufWriter::new(File::create(path).map_err(io)?))
        .map_err(io)
}

/// The over-convergence witness: integrality is enforced on construction,
/// so the check is a strictly positive fitted slope.
fn series_outcome(s: &TruncatedSeries) -> Outcome {
    let cap = s.cap();
    let rep = s.overconvergence_report(cap / 4, cap);
    let holds = rep.slope.is_none_or(|m| m > 0.0);
    Outcome::new(holds, None, rep)
}

pub fn cases(env: &Arc<Env>, suite: Suite) -> Vec<Case> {
    match suite {
        Suite::Dwork => dwork(env),
        Suite::EU2 => e_u2(env),
        Suite::EUn => e_un(env),
        Suite::Witt => witt(env),
        Suite::SelfDual => self_dual(env),
        Suite::NormGroup => norm_group(env),
        Suite::Classfield => classfield(env),
        Suite::Frobenius => frobenius(env),
        Suite::All => Suite::EACH.iter().flat_map(|&s| cases(env, s)).collect(),
    }
}

fn dwork(env: &Arc<Env>) -> Vec<Case> {
    let s = "dwork";
    let e1 = env.clone();
    let e2 = env.clone();
    let e3 = env.clone();
    vec![
        Case::new(s, "series", move || {
            let ex = e1.ex()?;
            e1.write_profile("dwork", &ex.dwork)?;
            Ok(series_outcome(&ex.dwork))
        }),
        Case::new(s, "zeta-order-p", move || {
            let ex = e2.ex()?;
            let kp = ex.kp();
            let z = ex.zeta()?;
            let zp = kp.pow(&z.value, kp.p());
            let agree = kp.agreement(&zp, &kp.one());
            let e = kp.e() as u32;
            Ok(Outcome::new(
                kp.equal(&zp, &kp.one()) && agree >= e2.ctx.n * e,
                Some(agree as f64 / e as f64),
                json!({"rigor": z.rigor, "tail_bound": z.tail_bound, "slope": z.slope}),
            ))
        }),
        Case::new(s, "zeta-nontrivial", move || {
            let ex = e3.ex()?;
            let kp = ex.kp();
            let z = ex.zeta()?;
            let v = kp.valuation(&kp.sub(&z.value, &kp.one()));
            Ok(Outcome::new(
                v == 1,
                Some(v as f64 / kp.e() as f64),
                json!({"v_pi": v}),
            ))
        }),
    ]
}

fn e_u2(env: &Arc<Env>) -> Vec<Case> {
    let s = "e-u2";
    let mut out = Vec::new();
    for pt in env.points() {
        let v = pt.rep();
        let e = env.clone();
        out.push(Case::new(s, format!("v={v}/series"), move || {
            let ex = e.ex()?;
            let (_, u) = ex.unit_pair(v)?;
            let tower = ex.tower(&u)?;
            let series = e_u2_series(&tower, e.ctx.degree_cap)?;
            e.write_profile(&format!("e-u2-v{v}"), &series)?;
            Ok(series_outcome(&series))
        }));
        let e = env.clone();
        out.push(Case::new(s, format!("v={v}/kummer"), move || {
            let r = e.ex()?.kummer_generator_check(v)?;
            Ok(Outcome::new(r.holds, Some(r.residual_digits), &r))
        }));
    }
    out
}

fn e_un(env: &Arc<Env>) -> Vec<Case> {
    let s = "e-un";
    let mut out = Vec::new();
    for (a, u) in env.units() {
        for n in [1, 2] {
            let e = env.clone();
            let u = u.clone();
            out.push(Case::new(s, format!("u={a}/n={n}/series"), move || {
                let roots = CoherentRoots::build(&e.k(), &u, n)?;
                let series = e_un_series(&roots, e.ctx.degree_cap)?;
                e.write_profile(&format!("e-un-u{a}-n{n}"), &series)?;
                Ok(series_outcome(&series))
            }));
        }
        let e = env.clone();
        out.push(Case::new(s, format!("u={a}/n=2/factorization"), move || {
            let k = e.k();
            let roots = CoherentRoots::build(&k, &u, 2)?;
            let deeper = CoherentRoots::build(&k, &u, 3)?;
            let r = e_un_factorization(&roots, &deeper, e.ctx.degree_cap)?;
            Ok(Outcome::new(r.holds, Some(r.residual_digits), &r))
        }));
    }
    out
}

#[derive(Serialize)]
struct RoundTrip {
    trials: usize,
    failures: usize,
}

fn witt(env: &Arc<Env>) -> Vec<Case> {
    let s = "witt";
    let mut out = Vec::new();
    let e = env.clone();
    out.push(Case::new(s, "ghost-roundtrip", move || {
        let k = e.k();
        let mut rng = ChaCha8Rng::seed_from_u64(e.cfg.seed);
        let trials = 200;
        let mut failures = 0;
        for _ in 0..trials {
            let comps = (0..4)
                .map(|_| k.from_int(rng.gen_range(-1_000_000_000i64..1_000_000_000)))
                .collect();
            let w = WittVector::new(&k, comps);
            let back = WittVector::unghost(&k, &w.ghost())?;
            failures += usize::from(!back.equal(&w));
        }
        Ok(Outcome::new(failures == 0, None, RoundTrip { trials, failures }))
    }));
    let e = env.clone();
    out.push(Case::new(s, "bracket-identity", move || {
        let k = e.k();
        let depth = 3;
        let roots = CoherentRoots::build(&k, &k.one(), depth)?;
        let r = roots.ring();
        let id = vec![r.zero(), r.one()];
        let w = bracket_map(&id, roots.omega(depth), &r.one(), r, depth + 1)?;
        let agree = w
            .ghost()
            .iter()
            .enumerate()
            .map(|(i, g)| r.agreement(g, roots.omega(depth - i)))
            .min()
            .unwrap_or(0);
        let e_r = r.e() as f64;
        Ok(Outcome::new(
            agree >= r.max_prec().min(e.ctx.n * r.e() as u32),
            Some(agree as f64 / e_r),
            json!({"depth": depth}),
        ))
    }));
    for (label, a0_power) in [("unit", Some(0u32)), ("p-unit", Some(1)), ("p2-unit", Some(2)), ("zero", None)] {
        let e = env.clone();
        out.push(Case::new(s, format!("key-lemma/a0={label}"), move || {
            let k = e.k();
            let roots = CoherentRoots::build(&k, &k.one(), 2)?;
            let r = roots.ring();
            let a0 = match a0_power {
                Some(j) => r.pow(&r.from_int(e.ctx.p as i64), j as u64),
                None => r.zero(),
            };
            let a0 = r.mul_int(&a0, 2);
            let h = vec![a0, r.one()];
            let rep = lemma22_check(&h, roots.omega(2), &r.one(), r, 4)?;
            Ok(Outcome::new(rep.holds, None, &rep))
        }));
    }
    let e = env.clone();
    out.push(Case::new(s, "artin-hasse-product", move || {
        let k = e.k();
        let mut rng = ChaCha8Rng::seed_from_u64(e.cfg.seed.wrapping_add(1));
        let lam = WittVector::new(
            &k,
            (0..3).map(|_| k.from_int(rng.gen_range(-1000i64..1000))).collect(),
        );
        let cap = e.ctx.degree_cap.min(64);
        let a = artin_hasse_relative(&lam, cap)?;
        let b = artin_hasse_product(&lam, cap)?;
        Ok(Outcome::new(a.equal(&b), Some(a.agreement(&b) as f64), ()))
    }));
    out
}

fn self_dual(env: &Arc<Env>) -> Vec<Case> {
    let s = "self-dual";
    env.points()
        .into_iter()
        .map(|pt| {
            let v = pt.rep();
            let e = env.clone();
            Case::new(s, format!("v={v}"), move || {
                let ex = e.ex()?;
                let gen = ex.self_dual_generator(v)?;
                let cross = ex.conjugate_crosscheck(&gen)?;
                let p = e.ctx.p;
                let digits = gen.gram_identity_digits();
                let alpha_v = gen.alpha_valuation();
                let different = gen.tower.different_exponent();
                let holds = digits >= 8.min(e.ctx.n)
                    && gen.gram_is_symmetric()
                    && alpha_v == -(p as i64 - 1)
                    && different == 2 * (p as u32 - 1)
                    && cross.holds;
                Ok(Outcome::new(
                    holds,
                    Some(digits as f64),
                    json!({
                        "alpha_valuation": alpha_v,
                        "different_exponent": different,
                        "rigor": gen.rigor,
                        "crosscheck": cross,
                    }),
                ))
            })
        })
        .collect()
}

fn norm_group(env: &Arc<Env>) -> Vec<Case> {
    let s = "norm-group";
    let mut out = Vec::new();
    let e = env.clone();
    out.push(Case::new(s, "eta-basis", move || {
        let nb = classfield::normal_basis_eta(&e.k())?;
        Ok(Outcome::new(
            nb.decomposition_det_valuation == 0 && nb.z_det_valuation == 1,
            Some(nb.decomposition_det_valuation as f64),
            json!({"residue": nb.residue, "z_det_valuation": nb.z_det_valuation}),
        ))
    }));
    let e = env.clone();
    out.push(Case::new(s, "unit-group", move || {
        let r = classfield::unit_group_decomposition(&e.k())?;
        Ok(Outcome::new(r.holds, None, &r))
    }));
    for pt in env.points() {
        let v = pt.rep();
        let e = env.clone();
        out.push(Case::new(s, format!("v={v}/norm"), move || {
            let rows = classfield::norm_identity_check(e.ex()?, v)?;
            let min = rows.iter().map(|r| r.corrected_digits).min().unwrap_or(0);
            let ok = rows.iter().filter(|r| r.corrected_holds).count();
            Ok(Outcome::new(
                ok == rows.len(),
                Some(min as f64),
                json!({"cases": rows.len(), "holding": ok}),
            ))
        }));
        let e = env.clone();
        out.push(
            Case::new(s, format!("v={v}/norm-literal"), move || {
                let rows = classfield::norm_identity_check(e.ex()?, v)?;
                let min = rows.iter().map(|r| r.literal_digits).min().unwrap_or(0);
                let ok = rows.iter().filter(|r| r.literal_holds).count();
                Ok(Outcome::new(
                    ok == rows.len(),
                    Some(min as f64),
                    json!({"cases": rows.len(), "holding": ok}),
                ))
            })
            .informational(),
        );
    }
    out
}

fn classfield(env: &Arc<Env>) -> Vec<Case> {
    let s = "classfield";
    let mut out = Vec::new();
    let k = env.k();
    let field = k.residue_field().clone();
    match classfield::subextension_correspondence(&field) {
        Ok(entries) => {
            let expect = (field.order() / field.p()) as usize;
            for entry in entries {
                out.push(Case::new(s, format!("point={}", entry.point.rep()), move || {
                    Ok(Outcome::new(
                        entry.kernel.len() == expect,
                        None,
                        json!({"u": entry.u, "kernel_size": entry.kernel.len()}),
                    ))
                }));
            }
        }
        Err(err) => out.push(Case::new(s, "correspondence", move || Err(err.clone()))),
    }
    let e = env.clone();
    let f = field.clone();
    out.push(Case::new(s, "lines", move || {
        let pts = ProjectivePoint::all(&f);
        let n = pts.len();
        let mut triples = Vec::new();
        if n * n * n <= 1000 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        triples.push((a, b, c));
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(e.cfg.seed);
            while triples.len() < 500 {
                triples.push((rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)));
            }
        }
        let mut checked = 0;
        let mut agree = true;
        for &(a, b, c) in &triples {
            if b == c {
                continue;
            }
            let t = classfield::line_characterizations(&f, pts[a].rep(), pts[b].rep(), pts[c].rep())?;
            agree &= t.by_span == t.by_kernel;
            checked += 1;
        }
        let mut sizes_ok = true;
        if n >= 2 {
            for b in 1..n.min(6) {
                let line = classfield::line_points(&f, pts[0].rep(), pts[b].rep())?;
                sizes_ok &= line.len() as u64 == f.p() + 1;
            }
        }
        Ok(Outcome::new(
            agree && sizes_ok,
            None,
            json!({"triples": checked, "characterizations_agree": agree, "line_sizes_ok": sizes_ok}),
        ))
    }));
    let f = field.clone();
    out.push(Case::new(s, "frobenius-equivariance", move || {
        let r = classfield::frobenius_equivariance(&f);
        Ok(Outcome::new(r.holds, None, &r))
    }));
    let e = env.clone();
    out.push(Case::new(s, "lubin-tate", move || {
        let ctx = e.cfg.context_with_cap(32).map_err(|c| Error::Config(c.0))?;
        let k = LocalRing::unramified(&ctx);
        let p = k.p() as i64;
        let one = classfield::lubin_tate_endo(&k, &k.one(), 16)?;
        let x = TruncatedSeries::monomial(&k, 16, k.one(), 1);
        let identity = one.series.equal(&x);
        let eta = classfield::normal_basis_eta(&k)?.eta;
        let a = k.sub(&k.one(), &k.mul_int(&eta, p));
        let la = classfield::lubin_tate_endo(&k, &a, 32)?;
        let residual = la.functional_residual()?;
        let functional = residual >= ctx.n;
        let b = k.add(&k.one(), &k.from_int(p));
        let la16 = classfield::lubin_tate_endo(&k, &a, 16)?;
        let lb = classfield::lubin_tate_endo(&k, &b, 16)?;
        let lab = classfield::lubin_tate_endo(&k, &k.mul(&a, &b), 16)?;
        let comp = la16.compose(&lb)?.agreement(&lab.series);
        Ok(Outcome::new(
            identity && functional && comp >= ctx.n,
            Some(residual as f64),
            json!({"identity": identity, "composition_agreement": comp}),
        ))
    }));
    out
}

fn frobenius(env: &Arc<Env>) -> Vec<Case> {
    let s = "frobenius";
    let mut out = Vec::new();
    for (a, u) in env.units() {
        for n in [1, 2] {
            let e = env.clone();
            let u = u.clone();
            out.push(Case::new(s, format!("u={a}/n={n}"), move || {
                let r = frobenius_structure_report(&e.ctx, &u, n, e.ctx.degree_cap)?;
                let e_r = r.ramification as f64;
                Ok(Outcome::new(r.holds, Some(r.residual_valuation as f64 / e_r), &r))
            }));
        }
    }
    out
}

/// σ̃(α_u) against α_{σ(u)} under each of the p alignments of the roots.
pub fn explore_sigma_alpha(env: &Arc<Env>) -> Vec<Case> {
    let s = "explore-sigma-alpha";
    let field = env.k().residue_field().clone();
    let mut out = Vec::new();
    for pt in env.points() {
        let v = pt.rep();
        let sv = field.frobenius(v);
        for i in 0..env.ctx.p as usize {
            let e = env.clone();
            out.push(
                Case::new(s, format!("v={v}/alignment={i}"), move || {
                    let ex = e.ex()?;
                    let k = &ex.k;
                    let gen = ex.self_dual_generator(v)?;
                    let img_gen = ex.self_dual_generator(sv)?;
                    let m = gen.tower.m();
                    let m2 = img_gen.tower.m();
                    let roots = hensel_conjugates(&img_gen.tower)?;
                    let root = &roots[i];
                    let mut acc = m2.zero();
                    for a in m.coeffs(&gen.beta).iter().rev() {
                        acc = m2.add(&m2.mul(&acc, root), &m2.from_base(&k.frobenius(a)?));
                    }
                    let agree = m2.agreement(&acc, &img_gen.beta);
                    Ok(Outcome::new(
                        m2.equal(&acc, &img_gen.beta),
                        Some(agree as f64 / m2.e() as f64),
                        json!({"sigma_v": sv}),
                    ))
                })
                .informational(),
            );
        }
    }
    out
}
