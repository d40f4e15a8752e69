use padic_expo::extensions::{conjugation, hensel_conjugates, trace, Tower};
use padic_expo::exponentials::Exponentials;
use padic_expo::classfield::ProjectivePoint;
use padic_expo::poly;
use padic_expo::PrecisionContext;

fn towers(p: u64, d: usize) -> Vec<Tower> {
    let ex = Exponentials::new(&PrecisionContext::new(p, d, 10, 32).unwrap()).unwrap();
    ProjectivePoint::all(ex.k.residue_field())
        .into_iter()
        .map(|pt| {
            let (_, u) = ex.unit_pair(pt.rep()).unwrap();
            ex.tower(&u).unwrap()
        })
        .collect()
}

#[test]
fn tower_polynomials_are_eisenstein_and_valuations_match() {
    for (p, d) in [(3, 1), (3, 2), (5, 1), (5, 2)] {
        for tw in towers(p, d) {
            assert!(poly::is_eisenstein(&tw.k, &tw.k_prime.min_poly));
            assert!(poly::is_eisenstein(tw.kp(), &tw.relative_poly()));
            assert!(poly::is_eisenstein(&tw.k, &tw.psi()));
            let l = tw.l();
            let w = tw.omega();
            assert_eq!(l.valuation(&w), 1);
            assert_eq!(l.valuation(&l.from_int(p as i64)) as u64, p * (p - 1));
            assert_eq!(l.valuation(&l.pow(&w, p - 1)) as u64, p - 1);
            assert_eq!(tw.m().valuation(&tw.m().uniformizer()), 1);
            assert_eq!(tw.different_exponent() as u64, 2 * (p - 1));
        }
    }
}

#[test]
fn traces_compose_through_the_tower() {
    for tw in towers(3, 2) {
        let l = tw.l();
        let view = tw.kprime_view().unwrap();
        let w = tw.omega();
        let x = l.add(&l.mul(&w, &l.pow(&w, 4)), &l.from_int(7));
        let direct = trace(l, &x);
        let stepwise = trace(tw.kp(), &view.relative_trace(&x));
        assert!(tw.k.equal(&direct, &stepwise));
    }
}

#[test]
fn conjugates_form_a_full_orbit() {
    for (p, d) in [(3, 2), (5, 1)] {
        for tw in towers(p, d) {
            let m = tw.m();
            let roots = hensel_conjugates(&tw).unwrap();
            for r in &roots {
                let sigma = conjugation(&tw, r).unwrap();
                let mut image: Vec<usize> = roots
                    .iter()
                    .map(|s| {
                        let t = sigma.apply(s);
                        roots.iter().position(|x| m.equal(x, &t)).expect("root image is a root")
                    })
                    .collect();
                image.sort_unstable();
                assert_eq!(image, (0..roots.len()).collect::<Vec<_>>());
            }
        }
    }
}
