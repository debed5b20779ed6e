//! One runner per task; each returns checks plus task-specific results.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resdiv::division::{probe_ray, solve, DivisionProblem};
use resdiv::extension::{almost_holo_finite, phi_field_unchecked, vanishing_order, SmoothGerm};
use resdiv::forms::Form;
use resdiv::hefer::{koszul_hefer, sample_points, verify_hefer};
use resdiv::kernels::{bm_full, doubled_base, holomorphic_base};
use resdiv::koszul::{koszul_complex, power_residue_shape, residue_pairing};
use resdiv::membership::{annihilation_rule, bs_certificate, bs_condition, divisible_by_power, residue_membership};
use resdiv::poly::Poly;
use resdiv::quadrature::{dump_nodes, format_nodes, integrate, Domain, Rule, TapeIntegrand};
use resdiv::symbolic::{Atom, Expr, Point, C64};
use serde_json::{json, Value};

use crate::problem::{from_germ, to_germ, to_poly, ComplexFile, ProblemFile, Task};
use crate::{Check, RunError};

pub struct Outcome {
    pub checks: Vec<Check>,
    pub results: Value,
}

fn numeric(context: &str) -> impl Fn(&dyn std::fmt::Display) -> RunError + '_ {
    move |e| RunError::Numeric { context: context.to_string(), message: e.to_string() }
}

macro_rules! num {
    ($ctx:expr, $e:expr) => {
        $e.map_err(|e| numeric($ctx)(&e))
    };
}

fn cjson(c: C64) -> Value {
    json!(ComplexFile::from_c64(c))
}

pub fn run(p: &ProblemFile, debug_nodes: Option<&Path>) -> Result<Outcome, RunError> {
    match p.task {
        Task::VerifyIdentities => verify_identities(p),
        Task::Reproduce => reproduce(p, debug_nodes),
        Task::Divide => divide(p),
        Task::ResiduePairing => pairing(p),
        Task::Membership => membership(p),
        Task::CounterexampleDemo => counterexample(p),
    }
}

fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn verify_identities(p: &ProblemFile) -> Result<Outcome, RunError> {
    let n = p.n;
    let tol = p.tolerances.abs;
    let samples = p.tolerances.samples;
    let base = holomorphic_base(n);
    let spec = p.weight_spec();
    let g = num!("weight", spec.build(&base))?.form;
    let v = num!("kernel", bm_full(&base))?;
    let ng = num!("weight", g.nabla(&base))?;
    let nv = num!("kernel", v.nabla(&base))?;
    let leibniz = {
        let lhs = num!("Leibniz", g.wedge(&v).and_then(|gv| gv.nabla(&base)))?;
        let rhs = num!("Leibniz", ng.wedge(&v).and_then(|a| g.wedge(&nv).and_then(|b| a.add(&b))))?;
        num!("Leibniz", lhs.sub(&rhs))?
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x1DE7);
    let reach = spec.support_radius();
    let (mut weight_res, mut bm_res, mut leibniz_res) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..samples {
        let cs: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, reach)).collect();
        let ps: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 0.5 * spec.inner_radius())).collect();
        let pt = Point::new(&cs, &ps);
        weight_res = weight_res.max(num!("weight", ng.max_abs(&pt))?);
        let scalar = num!("kernel", nv.coeff(0, 0).eval(&pt))?;
        bm_res = bm_res.max((scalar - 1.0).norm()).max(num!("kernel", nv.max_abs_positive_degree(&pt))?);
        leibniz_res = leibniz_res.max(num!("Leibniz", leibniz.max_abs(&pt))?);
    }
    let mut checks = vec![
        Check::at_most("nabla of the weight", weight_res, tol),
        Check::at_most("nabla of the Bochner-Martinelli form minus 1", bm_res, tol),
        Check::at_most("Leibniz rule for weight and kernel", leibniz_res, tol),
    ];
    let mut results = json!({ "samples": samples });
    if p.complex.is_some() {
        let gens = p.generators()?;
        let h = num!("Hefer forms", koszul_hefer(&gens))?;
        let complex = num!("Koszul complex", koszul_complex(&gens))?;
        let report = num!("Hefer identity", verify_hefer(&h, &complex, &sample_points(n, samples, 0x4EFE)))?;
        checks.push(Check::at_most("Hefer identity", report.max_residual, tol));
        results["hefer"] = json!(report.to_string());
    }
    if !p.data.is_empty() {
        let order = p.extension_order.unwrap_or(2);
        let mut restriction = 0.0f64;
        let mut closed = 0.0f64;
        let mut fits = Vec::new();
        for (i, poly) in p.data_polys()?.into_iter().enumerate() {
            let e = num!("extension", almost_holo_finite(&SmoothGerm::Poly(poly.clone()), order))?;
            for _ in 0..samples {
                let z: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 0.8)).collect();
                let zbar: Vec<C64> = z.iter().map(|x| x.conj()).collect();
                let got = num!("extension", e.eval(&z, &zbar))?;
                let expect = num!("extension", poly.eval(&z, &[]))?;
                restriction = restriction.max((got - expect).norm());
            }
            let fit = num!("vanishing order", vanishing_order(&num!("extension", e.dbar())?, n, &[], 8, 7))?;
            if fit.order.is_finite() {
                checks.push(Check::at_most(&format!("vanishing order of dbar extension {i} minus {order}"), (fit.order - order as f64).abs(), 0.1));
            }
            fits.push(json!({ "component": i, "order": if fit.order.is_finite() { json!(fit.order) } else { json!("infinite") } }));
            let phi = num!("extension", phi_field_unchecked(&[e]))?;
            let db = doubled_base(n);
            let residual = num!("extension", phi[0].nabla(&db))?;
            for _ in 0..samples {
                let cs: Vec<C64> = (0..2 * n).map(|_| rand_c(&mut rng, 0.5)).collect();
                let z: Vec<C64> = (0..n).map(|_| rand_c(&mut rng, 0.3)).collect();
                closed = closed.max(num!("extension", residual.max_abs(&Point::new(&cs, &z)))?);
            }
        }
        checks.push(Check::at_most("restriction of the extension to the diagonal", restriction, 1e-12));
        checks.push(Check::at_most("nabla of the extended data field", closed, tol));
        results["vanishing_orders"] = json!(fits);
    }
    Ok(Outcome { checks, results })
}

fn default_reproduction_rule(n: usize) -> Rule {
    if n == 1 {
        Rule { radial_panels: 8, ..Rule::tensor(16, 1, 64) }
    } else {
        Rule { radial_panels: 2, ..Rule::tensor(8, 4, 16) }
    }
}

fn reproduce(p: &ProblemFile, debug_nodes: Option<&Path>) -> Result<Outcome, RunError> {
    let n = p.n;
    let polys = p.data_polys()?;
    if let Some(i) = polys.iter().position(|q| !q.is_holomorphic()) {
        return Err(crate::InputError { pointer: format!("/data/{i}"), message: "reproduction needs holomorphic data".into() }.into());
    }
    let spec = p.weight_spec();
    let base = holomorphic_base(n);
    let g = num!("weight", spec.build(&base))?.form;
    let top = g.component(n as u32, n as u32);
    let densities: Vec<Expr> = polys
        .iter()
        .map(|q| top.wedge(&Form::scalar(n, q.to_expr())).and_then(|f| f.top_density()))
        .collect::<Result<_, _>>()
        .map_err(|e| numeric("densities")(&e))?;
    let origin = vec![C64::new(0.0, 0.0); n];
    let (inner, outer) = (spec.inner_radius(), spec.support_radius());
    let domain = p.domain(Domain::Shell { center: origin, inner, outer })?;
    let rule = p.rule(default_reproduction_rule(n))?;
    let mut worst = 0.0f64;
    let mut evaluations = 0;
    let mut rows = Vec::new();
    for (k, z) in p.points_c64().into_iter().enumerate() {
        let f = TapeIntegrand::new(&densities, z.clone());
        if k == 0 {
            if let Some(path) = debug_nodes {
                let nodes = num!("node dump", dump_nodes(&f, &domain, &rule))?;
                std::fs::write(path, format_nodes(&nodes)).map_err(|e| numeric("node dump")(&e))?;
            }
        }
        let got = num!("reproduction integral", integrate(&f, &domain, &rule))?;
        evaluations += got.evaluations;
        for (q, (v, e)) in polys.iter().zip(got.values.iter().zip(&got.errors)) {
            let expect = num!("reference value", q.eval(&z, &[]))?;
            let rel = (v - expect).norm() / expect.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            rows.push(json!({ "point": k, "value": cjson(*v), "expected": cjson(expect), "rel_err": rel, "quad_err": e }));
        }
    }
    Ok(Outcome {
        checks: vec![Check::at_most("relative reproduction error", worst, p.tolerances.rel)],
        results: json!({ "evaluations": evaluations, "values": rows }),
    })
}

fn divide(p: &ProblemFile) -> Result<Outcome, RunError> {
    let gens = p.generators()?;
    let level = p.level.unwrap_or(1);
    let mut prob = DivisionProblem::koszul(gens, p.data_germs()?, level, p.points_c64())
        .map_err(|e| crate::InputError { pointer: "/complex".into(), message: e.to_string() })?;
    if p.weight.is_some() {
        prob.weight = p.weight_spec();
    }
    prob.domain = p.domain(prob.domain.clone())?;
    prob.rule = p.rule(prob.rule.clone())?;
    if !p.ladder.is_empty() {
        prob.ladder = p.ladder.clone();
    }
    if let Some(k) = p.extension_order {
        prob.extension_order = k;
    }
    let sol = num!("division", solve(&prob))?;
    let f_next = &prob.complex.maps[level];
    let residuals = num!("division", sol.decomposition_residuals(f_next))?;
    let bounds = num!("division", sol.error_bounds(f_next))?;
    let expected = p.expected_polys()?;
    let mut deviation = 0.0f64;
    let mut rows = Vec::new();
    for ((pt, r), b) in sol.points.iter().zip(&residuals).zip(&bounds) {
        let psi = pt.psi_values();
        for (e, v) in expected.iter().zip(&psi) {
            let target = num!("expected quotient", e.eval(&pt.z, &[]))?;
            deviation = deviation.max((v - target).norm());
        }
        rows.push(json!({
            "z": pt.z.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "psi": psi.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "psi_err": pt.psi.iter().map(|l| l.error()).collect::<Vec<_>>(),
            "residue": pt.residue_values().iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "residual": r,
            "error_bound": b,
            "evaluations": pt.evaluations,
        }));
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let mut checks = vec![Check::at_most("decomposition residual", worst, p.tolerances.abs)];
    if !expected.is_empty() {
        checks.push(Check::at_most("deviation from the expected quotient", deviation, p.tolerances.abs));
    }
    Ok(Outcome { checks, results: json!({ "doubled": sol.doubled, "ladder": sol.ladder, "points": rows }) })
}

fn pairing(p: &ProblemFile) -> Result<Outcome, RunError> {
    let res = p.residue.as_ref().expect("validated");
    if res.a0.len() != 1 || res.a0[0] == 0 || res.s == 0 {
        return Err(crate::InputError { pointer: "/residue/a0".into(), message: "need a non-constant monomial in one variable".into() }.into());
    }
    let xi = to_poly(&res.test, 1, "/residue/test")?;
    let a0 = Poly::monomial(1, C64::new(1.0, 0.0), &res.a0);
    let current = num!("current", power_residue_shape(&a0, res.s))?;
    let bump = Expr::apply(Atom::cutoff(0.25, 0.81), Expr::coord(0).abs2());
    let test = Form::dzeta(1, 0).scale(&xi.to_expr().mul(&bump).mul(&Expr::inv_two_pi_i()));
    let ladder = if p.ladder.is_empty() { current.ladder(0.5) } else { p.ladder.clone() };
    let rule = p.rule(annihilation_rule())?;
    let domain = p.domain(Domain::ball(1, 1.0))?;
    let report = num!("pairing", residue_pairing(&current, &test, &domain, &rule, &ladder))?;
    let value = num!("extrapolation", report.limit())?;
    // Cauchy: the coefficient of zeta^(s t - 1) in the holomorphic part of xi
    let pole = res.a0[0] * res.s;
    let expected: C64 = xi
        .terms()
        .filter(|(m, _)| m.zeta[0] + 1 == pole && m.zeta_bar[0] == 0)
        .map(|(_, c)| *c)
        .sum();
    let err = (value - expected).norm();
    Ok(Outcome {
        checks: vec![Check::at_most("pairing minus the Cauchy coefficient", err, p.tolerances.abs)],
        results: json!({
            "value": cjson(value),
            "expected": cjson(expected),
            "ladder": report.ladder,
            "values": report.values.iter().map(|c| cjson(*c)).collect::<Vec<_>>(),
            "evaluations": report.evaluations,
        }),
    })
}

fn membership(p: &ProblemFile) -> Result<Outcome, RunError> {
    let poly = p.data.first().ok_or_else(|| crate::InputError { pointer: "/data".into(), message: "membership needs one germ".into() })?;
    let germ = to_germ(poly, p.n, "/data/0")?;
    let mut checks = Vec::new();
    let mut results = json!({});
    let mut verdict = None;
    if let Some((ideal, r)) = p.monomial_ideal()? {
        let bs = bs_condition(&germ, &ideal, r);
        checks.push(Check::holds("spot check agrees with the monomial bound", bs.sample_violation.is_none()));
        results["exponent"] = json!(bs.exponent);
        results["bound_holds"] = json!(bs.passes);
        if let Some(w) = &bs.witness {
            results["witness"] = json!({ "alpha": w.alpha, "term": w.term.to_string(), "curve": w.curve });
        }
        if bs.passes {
            match bs_certificate(&germ, &ideal, r) {
                Ok(cert) => {
                    let xi: Vec<Value> = cert
                        .xi
                        .iter()
                        .map(|(counts, x)| json!({ "generator_powers": counts, "xi": from_germ(x) }))
                        .collect();
                    results["certificate"] = json!(xi);
                    checks.push(Check::holds("certificate re-expands exactly", cert.expand(&ideal) == germ));
                }
                Err(e) => {
                    results["certificate_error"] = json!(e.to_string());
                    checks.push(Check::holds("certificate exists when the bound holds", false));
                }
            }
        }
        verdict = Some(bs.passes);
    }
    if let Some(res) = &p.residue {
        if res.a0.len() != p.n {
            return Err(crate::InputError { pointer: "/residue/a0".into(), message: format!("expected {} exponents", p.n) }.into());
        }
        let rm = residue_membership(&germ, &res.a0, res.s)
            .map_err(|e| crate::InputError { pointer: "/residue".into(), message: e.to_string() })?;
        let direct = divisible_by_power(&germ, &res.a0, res.s);
        checks.push(Check::holds("residue test agrees with divisibility", rm.member == direct));
        results["residue_member"] = json!(rm.member);
        if let Some((alpha, term)) = &rm.obstruction {
            results["obstruction"] = json!({ "alpha": alpha, "term": term.to_string() });
        }
        if let Some(q) = &rm.quotient {
            results["quotient"] = json!(from_germ(q));
        }
        verdict = Some(rm.member);
    }
    if let (Some(expect), Some(got)) = (p.expect_member, verdict) {
        checks.push(Check::holds("verdict matches the expected membership", expect == got));
    }
    Ok(Outcome { checks, results })
}

fn counterexample(p: &ProblemFile) -> Result<Outcome, RunError> {
    let probe = p.probe.as_ref().expect("validated");
    let gens = p.generators()?;
    let complex = num!("Koszul complex", koszul_complex(&gens))?;
    let level = p.level.unwrap_or(1);
    let f_next = complex.maps.get(level).ok_or_else(|| crate::InputError { pointer: "/level".into(), message: "level beyond the complex".into() })?;
    let data = match probe.radial_power {
        Some(power) => {
            if p.n != 2 {
                return Err(crate::InputError { pointer: "/n".into(), message: "radial data are defined for n = 2".into() }.into());
            }
            let radius = Expr::apply(
                Atom::Power { coeff: 1.0, exponent: power / 2.0 },
                Expr::coord(0).abs2().add(&Expr::coord(1).abs2()),
            );
            vec![
                SmoothGerm::Expr { nvars: 2, expr: Expr::coord(1).neg().mul(&radius), max_order: 0 },
                SmoothGerm::Expr { nvars: 2, expr: Expr::coord(0).mul(&radius), max_order: 0 },
            ]
        }
        None => p.data_germs()?,
    };
    let dir: Vec<C64> = probe.direction.iter().map(|c| c.to_c64()).collect();
    if dir.len() != p.n {
        return Err(crate::InputError { pointer: "/probe/direction".into(), message: format!("expected {} coordinates", p.n) }.into());
    }
    let fit = num!("regularity probe", probe_ray(f_next, &data, &dir, &probe.radii))?;
    let tol = p.tolerances.abs;
    let check = if probe.lower_bound {
        Check::at_least("growth exponent", fit.exponent, probe.expected_exponent - tol)
    } else {
        Check::at_most("growth exponent minus expected", (fit.exponent - probe.expected_exponent).abs(), tol)
    };
    Ok(Outcome {
        checks: vec![check],
        results: json!({ "exponent": fit.exponent, "band": fit.band, "fit_residual": fit.residual }),
    })
}
