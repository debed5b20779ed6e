use num_complex::Complex;
use num_rational::Rational64;
use proptest::prelude::*;
use resdiv::extension::{almost_holo_finite, SmoothGerm};
use resdiv::extrapolate::extrapolate;
use resdiv::forms::{nabla_field, Form, Term};
use resdiv::hefer::hefer_decompose;
use resdiv::membership::{
    bs_certificate, bs_condition, bs_condition_with_exponent, in_newton_polyhedron, Germ, GermTerm, MonomialIdeal,
};
use resdiv::poly::{Monomial, Poly};
use resdiv::symbolic::{partial, simplify, Atom, Expr, Point, Var, C64};

fn c64() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn point(n: usize, r: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b)), n)
}

/// Coefficient expressions in two variables, smooth on the sampled region.
fn atom_expr() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::coord(0)),
        Just(Expr::coord_bar(1)),
        Just(Expr::coord(1).abs2()),
        Just(Expr::apply(Atom::cutoff(0.1, 2.0), Expr::coord(0).abs2())),
        Just((Expr::coord(0) - Expr::param(0)).abs2().add(&Expr::real(1.0)).recip()),
    ]
}

fn form2() -> impl Strategy<Value = Form> {
    prop::collection::vec((atom_expr(), atom_expr(), c64(), 0..4u64, 0..4u64), 1..4).prop_map(|ts| {
        Form::from_terms(
            2,
            ts.into_iter().map(|(a, b, k, holo, anti)| Term { coeff: a.mul(&b).scale(k), holo, anti }).collect(),
        )
    })
}

fn holo_poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((c64(), prop::collection::vec(0..4u32, n)), 1..5).prop_map(move |ts| {
        let mut p = Poly::zero(n);
        for (k, e) in ts {
            p.add_term(k, Monomial::holomorphic(e));
        }
        p
    })
}

fn mixed_poly(n: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((c64(), prop::collection::vec(0..3u32, n), prop::collection::vec(0..4u32, n)), 1..4)
        .prop_map(move |ts| {
            let mut p = Poly::zero(n);
            for (k, a, b) in ts {
                p.add_term(k, Monomial { zeta: a, zeta_bar: b, z: vec![0; n] });
            }
            p
        })
}

fn exponent(n: usize, max: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max, n).prop_filter("non-constant", |e| e.iter().any(|&x| x > 0))
}

/// `(n, ideal, r, phi)` with `phi` biased towards members.
fn bs_instance() -> impl Strategy<Value = (MonomialIdeal, u32, Germ)> {
    (1..=3usize, 1..=3usize, 1..=3u32).prop_flat_map(|(n, m, r)| {
        (
            prop::collection::vec(exponent(n, 2), m),
            Just(r),
            prop::collection::vec(
                (0..m, prop::collection::vec(0..=2u32, n), prop::collection::vec(0..=1u32, n), -4..=4i64, any::<bool>()),
                1..4,
            ),
        )
            .prop_map(move |(gens, r, terms)| {
                let ideal = MonomialIdeal::minimal(n, gens).unwrap();
                let k = ideal.mu() + r - 1;
                let mut phi = Germ::zero(n);
                for (j, extra, b, num, member) in terms {
                    let g = &ideal.generators()[j % ideal.generators().len()];
                    let a: Vec<u32> =
                        if member { g.iter().zip(&extra).map(|(x, e)| k * x + e).collect() } else { extra };
                    let coeff = Complex::new(Rational64::new(num, 2), Rational64::from_integer(1));
                    phi.add_term(GermTerm::new(coeff, &a, &b)).unwrap();
                }
                (ideal, r, phi)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_is_graded_commutative_and_nabla_is_a_derivation(a in form2(), b in form2(), cs in point(2, 0.9), ps in point(2, 0.3)) {
        let base = [Expr::param(0), Expr::param(1)];
        let pt = Point::new(&cs, &ps);
        for d in 0..=4u32 {
            let ha = a.degree_part(d);
            for e in 0..=4u32 {
                let hb = b.degree_part(e);
                let ba = hb.wedge(&ha).unwrap();
                let signed = if d * e % 2 == 1 { ba.neg() } else { ba };
                prop_assert!(ha.wedge(&hb).unwrap().sub(&signed).unwrap().max_abs(&pt).unwrap() < 1e-12);
            }
            let lhs = ha.wedge(&b).unwrap().nabla(&base).unwrap();
            let t1 = ha.nabla(&base).unwrap().wedge(&b).unwrap();
            let t2 = ha.wedge(&b.nabla(&base).unwrap()).unwrap();
            let rhs = if d % 2 == 1 { t1.sub(&t2) } else { t1.add(&t2) }.unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs(&pt).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn dbar_and_interior_square_to_zero(a in form2(), cs in point(2, 0.9), ps in point(2, 0.3)) {
        let pt = Point::new(&cs, &ps);
        let w = nabla_field(2, &[Expr::param(0), Expr::param(1)]).unwrap();
        prop_assert!(a.dbar().unwrap().dbar().unwrap().max_abs(&pt).unwrap() < 1e-10);
        prop_assert!(a.interior(&w).unwrap().interior(&w).unwrap().max_abs(&pt).unwrap() < 1e-10);
    }

    #[test]
    fn simplification_preserves_values(a in atom_expr(), b in atom_expr(), k in c64(), cs in point(2, 0.9), ps in point(2, 0.3)) {
        let e = a.mul(&b).scale(k).add(&a.sub(&a)).mul(&Expr::one());
        let pt = Point::new(&cs, &ps);
        let (x, y) = (e.eval(&pt).unwrap(), simplify(&e).eval(&pt).unwrap());
        prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
    }

    #[test]
    fn wirtinger_derivatives_match_central_differences(a in atom_expr(), b in atom_expr(), cs in point(2, 0.8), ps in point(2, 0.3)) {
        let e = a.mul(&b);
        let h = 1e-5;
        let at = |d: C64| {
            let moved = [cs[0] + d, cs[1]];
            e.eval(&Point::new(&moved, &ps)).unwrap()
        };
        let dx = (at(C64::new(h, 0.0)) - at(C64::new(-h, 0.0))) / (2.0 * h);
        let dy = (at(C64::new(0.0, h)) - at(C64::new(0.0, -h))) / (2.0 * h);
        let i = C64::new(0.0, 1.0);
        let pt = Point::new(&cs, &ps);
        let dz = partial(&e, Var::coord(0)).unwrap().eval(&pt).unwrap();
        let dzbar = partial(&e, Var::coord_bar(0)).unwrap().eval(&pt).unwrap();
        prop_assert!((dz - 0.5 * (dx - i * dy)).norm() <= 1e-6);
        prop_assert!((dzbar - 0.5 * (dx + i * dy)).norm() <= 1e-6);
    }

    #[test]
    fn hefer_decomposition_telescopes(p in holo_poly(3), zeta in point(3, 1.0), z in point(3, 1.0)) {
        let h = hefer_decompose(&p).unwrap();
        let lhs = p.eval(&zeta, &[]).unwrap() - p.eval(&z, &[]).unwrap();
        let rhs: C64 = h.iter().enumerate().map(|(i, hi)| hi.eval(&zeta, &z).unwrap() * (zeta[i] - z[i])).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        for hi in &h {
            prop_assert!(hi.is_holomorphic());
        }
    }

    #[test]
    fn finite_extension_restricts_to_the_data(p in mixed_poly(2), order in 0..4u32, z in point(2, 0.8)) {
        let e = almost_holo_finite(&SmoothGerm::Poly(p.clone()), order).unwrap();
        let zbar: Vec<C64> = z.iter().map(|x| x.conj()).collect();
        let got = e.eval(&z, &zbar).unwrap();
        let expect = p.eval(&z, &[]).unwrap();
        prop_assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0));
    }

    #[test]
    fn extrapolation_recovers_power_laws(l in c64(), k in c64(), rate in 0.5..2.0f64) {
        let eps: Vec<f64> = (0..5).map(|j| 1e-2 * 0.25f64.powi(j)).collect();
        let vals: Vec<C64> = eps.iter().map(|e| l + k * e.powf(rate)).collect();
        let fit = extrapolate(&eps, &vals).unwrap();
        prop_assert!((fit.limit - l).norm() <= 1e-8);
    }

    #[test]
    fn newton_polyhedron_is_an_upward_closed_cone(gens in prop::collection::vec(exponent(2, 3), 1..4), k in 1..4u32, extra in prop::collection::vec(0..3u32, 2), j in 0..3usize) {
        let g = &gens[j % gens.len()];
        let c: Vec<u32> = g.iter().zip(&extra).map(|(x, e)| k * x + e).collect();
        prop_assert!(in_newton_polyhedron(&c, &gens, k));
        prop_assert!(k == 1 || in_newton_polyhedron(&c, &gens, k - 1));
        // scaling both sides keeps membership
        let c2: Vec<u32> = c.iter().map(|x| 2 * x).collect();
        prop_assert!(in_newton_polyhedron(&c2, &gens, 2 * k));
    }

    #[test]
    fn derivative_bound_yields_exact_certificates((ideal, r, phi) in bs_instance()) {
        let verdict = bs_condition(&phi, &ideal, r);
        prop_assert!(verdict.sample_violation.is_none());
        if verdict.passes {
            let cert = bs_certificate(&phi, &ideal, r);
            prop_assert!(cert.is_ok(), "{:?}", cert);
            let cert = cert.unwrap();
            prop_assert_eq!(cert.expand(&ideal), phi.clone());
            prop_assert!(bs_condition_with_exponent(&phi, &ideal, r).passes);
        }
    }
}
