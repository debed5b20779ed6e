//! Bundled problem files, one or more per acceptance check.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Builtin {
    pub name: &'static str,
    /// What the instance exercises.
    pub tag: &'static str,
    #[serde(skip)]
    pub text: &'static str,
}

macro_rules! builtin {
    ($name:literal, $tag:literal) => {
        Builtin { name: $name, tag: $tag, text: include_str!(concat!("../builtins/", $name, ".json")) }
    };
}

pub fn catalog() -> Vec<Builtin> {
    vec![
        builtin!("reproduce-disc", "reproducing formula, ball weight on the unit disc"),
        builtin!("reproduce-ball-2d", "reproducing formula, ball weight on the unit ball in C^2"),
        builtin!("identities-koszul", "weight, Bochner-Martinelli, Leibniz and Hefer identities"),
        builtin!("residue-cauchy-powers", "residue pairing of dbar(1/zeta^3) against the Cauchy formula"),
        builtin!("annihilation-conjugate-factor", "a conjugate factor annihilates the residue current"),
        builtin!("koszul-two-generators-holomorphic", "division by (zeta_1, zeta_2) with holomorphic data, quotient 1"),
        builtin!("koszul-two-generators-linear-quotient", "division by (zeta_1, zeta_2) with holomorphic data, quotient z_1"),
        builtin!("doubled-smooth-division", "division of smooth data through the doubled space"),
        builtin!("counterexample-one-third", "continuous data with the unbounded quotient 1/|x|^(1/3)"),
        builtin!("counterexample-c1-bounded", "C^1 data with a bounded quotient"),
        builtin!("membership-monomial", "derivative bound and exact certificate for a monomial ideal"),
        builtin!("membership-principal-residue", "membership in a principal monomial ideal via residue annihilation"),
        builtin!("extension-identities", "almost holomorphic extension: restriction, vanishing order, closedness"),
    ]
}

pub fn find(name: &str) -> Option<Builtin> {
    catalog().into_iter().find(|b| b.name == name)
}
