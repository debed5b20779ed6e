use resdiv::division::{pointwise_solution, solve, DivisionProblem};
use resdiv::extension::SmoothGerm;
use resdiv::poly::{Monomial, Poly};
use resdiv::quadrature::{Domain, Rule};
use resdiv::symbolic::C64;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn points() -> Vec<Vec<C64>> {
    vec![
        vec![C64::new(0.15, -0.05), C64::new(-0.1, 0.12)],
        vec![C64::new(0.0, 0.2), C64::new(0.1, 0.0)],
        vec![C64::new(-0.2, 0.1), C64::new(0.05, -0.15)],
    ]
}

/// `f_1 = (zeta_1, zeta_2)`, `phi = (-zeta_2, zeta_1) zeta_1`, unique quotient `z_1`.
fn linear_quotient(points: Vec<Vec<C64>>) -> DivisionProblem {
    let z1 = Poly::var(2, 0);
    let z2 = Poly::var(2, 1);
    let data = vec![SmoothGerm::Poly(z2.mul(&z1).scale(c(-1.0))), SmoothGerm::Poly(z1.pow(2))];
    DivisionProblem::koszul(vec![z1, z2], data, 1, points).unwrap()
}

#[test]
fn holomorphic_quotient_is_exact_within_its_error_bound() {
    let p = linear_quotient(points());
    let sol = solve(&p).unwrap();
    let f2 = &p.complex.maps[1];
    let residuals = sol.decomposition_residuals(f2).unwrap();
    let bounds = sol.error_bounds(f2).unwrap();
    for ((pt, r), b) in sol.points.iter().zip(&residuals).zip(&bounds) {
        assert!(*r <= 3.0 * b, "residual {r} against bound {b}");
        let direct = pointwise_solution(f2, &p.data, &pt.z).unwrap();
        assert!((pt.psi[0].value() - direct[0]).norm() <= pt.psi[0].error());
        assert!((pt.psi[0].value() - pt.z[0]).norm() <= 1e-3);
        for s in &pt.residue {
            assert!(s.value().norm() <= 1e-6);
        }
    }
}

#[test]
fn holomorphic_quotient_depends_holomorphically_on_z() {
    let z0 = [C64::new(0.1, 0.05), C64::new(-0.05, 0.1)];
    let h = 1e-3;
    let shifted: Vec<Vec<C64>> = [c(h), c(-h), C64::new(0.0, h), C64::new(0.0, -h)]
        .iter()
        .map(|d| vec![z0[0] + d, z0[1]])
        .collect();
    let sol = solve(&linear_quotient(shifted)).unwrap();
    let v: Vec<C64> = sol.points.iter().map(|p| p.psi[0].value()).collect();
    let dx = (v[0] - v[1]) / (2.0 * h);
    let dy = (v[2] - v[3]) / (2.0 * h);
    let dzbar = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
    assert!(dzbar.norm() <= 1e-4, "{dzbar}");
}

#[test]
fn smooth_data_through_the_doubled_space() {
    // phi = zeta conj(zeta) divided by f_1 = zeta: T_0 phi = conj(z), residue term -> 0
    let phi = Poly::zero(1).with_term(c(1.0), Monomial { zeta: vec![1], zeta_bar: vec![1], z: vec![0] });
    let pts = vec![vec![C64::new(0.1, 0.05)], vec![C64::new(-0.2, 0.15)]];
    let mut p = DivisionProblem::koszul(vec![Poly::var(1, 0)], vec![SmoothGerm::Poly(phi)], 0, pts).unwrap();
    p.domain = Domain::Polydisc { center: vec![c(0.0); 2], radii: vec![0.95, 0.95] };
    p.rule = Rule {
        radial_grading: Some((0.5, 12)),
        radial_panels: 2,
        radial_breaks: vec![0.7, 0.95],
        ..Rule::tensor(6, 1, 8)
    };
    let sol = solve(&p).unwrap();
    assert!(sol.doubled);
    for (pt, r) in sol.points.iter().zip(sol.decomposition_residuals(&p.complex.maps[0]).unwrap()) {
        assert!(r <= 5e-3, "{r}");
        assert!((pt.psi[0].value() - pt.z[0].conj()).norm() <= 1e-3);
        assert!(pt.residue[0].value().norm() <= 1e-4);
    }
}
