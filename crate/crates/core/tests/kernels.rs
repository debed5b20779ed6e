use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resdiv::forms::{sphere_flux_density, Form};
use resdiv::kernels::{ball_weight, bm_full, holomorphic_base};
use resdiv::quadrature::{integrate, Domain, Rule, TapeIntegrand};
use resdiv::symbolic::{Expr, Point, C64};

fn rand_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect()
}

#[test]
fn bochner_martinelli_flux_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in 1..=3 {
        let base = holomorphic_base(n);
        let v = bm_full(&base).unwrap();
        let density = sphere_flux_density(&v, &base).unwrap();
        let z = rand_point(&mut rng, n, 0.5);
        let f = TapeIntegrand::new(&[density], z.clone());
        let sphere = Domain::Sphere { center: z, radius: 0.3 };
        let got = integrate(&f, &sphere, &Rule::tensor(8, 8, 8)).unwrap().value();
        assert!((got - 1.0).norm() <= 1e-6, "n = {n}: {got}");
    }
}

fn reproduction_integrand(n: usize, polys: &[Expr], z: &[C64]) -> TapeIntegrand {
    let base = holomorphic_base(n);
    let g = ball_weight(1.0, 0.7, 0.95, &base).unwrap();
    let top = g.form.component(n as u32, n as u32);
    let densities: Vec<Expr> = polys
        .iter()
        .map(|p| top.wedge(&Form::scalar(n, p.clone())).unwrap().top_density().unwrap())
        .collect();
    TapeIntegrand::new(&densities, z.to_vec())
}

fn shell(n: usize) -> Domain {
    Domain::Shell { center: vec![C64::new(0.0, 0.0); n], inner: 0.7, outer: 0.95 }
}

#[test]
fn disc_weight_reproduces_monomials() {
    let polys: Vec<Expr> = (0..=5).map(|k| Expr::coord(0).pow(k)).collect();
    let rule = Rule { radial_panels: 8, ..Rule::tensor(16, 1, 64) };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let z = rand_point(&mut rng, 1, 0.2);
        let got = integrate(&reproduction_integrand(1, &polys, &z), &shell(1), &rule).unwrap();
        for (k, v) in got.values.iter().enumerate() {
            let expect = z[0].powu(k as u32);
            assert!((v - expect).norm() <= 1e-8 * expect.norm().max(1e-3), "k = {k}: {v} vs {expect}");
        }
    }
}

#[test]
fn reproduction_is_holomorphic_in_z() {
    // finite-difference d/dzbar of z -> int g ∧ p at a fixed point
    let polys = [Expr::coord(0).pow(2).add(&Expr::coord(0))];
    let rule = Rule { radial_panels: 8, ..Rule::tensor(16, 1, 64) };
    let z0 = C64::new(0.1, -0.05);
    let h = 1e-4;
    let val = |z: C64| integrate(&reproduction_integrand(1, &polys, &[z]), &shell(1), &rule).unwrap().value();
    let dx = (val(z0 + h) - val(z0 - h)) / (2.0 * h);
    let dy = (val(z0 + C64::new(0.0, h)) - val(z0 - C64::new(0.0, h))) / (2.0 * h);
    let dzbar = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
    assert!(dzbar.norm() <= 1e-6, "{dzbar}");
}

#[test]
fn weight_vanishes_outside_support() {
    let n = 2;
    let base = holomorphic_base(n);
    let g = ball_weight(1.0, 0.7, 0.95, &base).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let z = [C64::new(0.1, 0.1), C64::new(-0.2, 0.0)];
    let mut seen = 0;
    while seen < 100 {
        let p = rand_point(&mut rng, n, 1.0);
        if p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt() <= 0.95 {
            continue;
        }
        seen += 1;
        assert_eq!(g.form.max_abs(&Point::new(&p, &z)).unwrap(), 0.0);
    }
}
