use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use sft_core::sft_algebras::{poisson_bracket, weyl_commutator, weyl_mul, Pairing};
use sft_core::{int, SuperElement, VarKind, VariableSpec, VariableTable};

use crate::commands::Outcome;

fn table() -> sft_core::Result<Arc<VariableTable>> {
    VariableTable::build(vec![
        VariableSpec::even("p1", VarKind::P, int(-4)).conjugate("q1"),
        VariableSpec::even("q1", VarKind::Q, int(2)).conjugate("p1"),
        VariableSpec::even("p2", VarKind::P, int(-6)).kappa(2).conjugate("q2"),
        VariableSpec::even("q2", VarKind::Q, int(4)).kappa(2).conjugate("p2"),
        VariableSpec::odd("pa", VarKind::P, int(-3)).conjugate("qa"),
        VariableSpec::odd("qa", VarKind::Q, int(1)).conjugate("pa"),
        VariableSpec::even("x", VarKind::T, int(0)),
        VariableSpec::odd("a", VarKind::T, int(1)),
        VariableSpec::even("hbar", VarKind::Hbar, int(-4)),
    ])
}

fn random_element(rng: &mut ChaCha8Rng, t: &Arc<VariableTable>) -> SuperElement {
    let vars: Vec<_> = (0..t.len()).filter(|&v| t.kind(v) != VarKind::Hbar).collect();
    let mut out = SuperElement::zero(t);
    for _ in 0..rng.gen_range(0..4) {
        let factors: Vec<_> = (0..rng.gen_range(0..4)).map(|_| (vars[rng.gen_range(0..vars.len())], rng.gen_range(1..=2))).collect();
        out += &SuperElement::from_factors(t, int(rng.gen_range(-3..=3)), &factors).expect("no negative powers");
    }
    out
}

fn sign(f: &SuperElement, g: &SuperElement) -> i64 {
    let odd = |x: &SuperElement| x.parity().is_some_and(|p| p.is_odd());
    if odd(f) && odd(g) {
        -1
    } else {
        1
    }
}

/// Randomized checks of the algebra laws on homogeneous elements; deterministic in `seed`.
pub fn run(seed: u64, cases: u32) -> anyhow::Result<Outcome> {
    let t = table()?;
    let pr = Pairing::from_conjugates(&t);
    let hbar = t.var("hbar");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = ["supercommutativity", "associativity", "weyl_associativity", "jacobi", "hbar_leading_bracket"];
    let mut failures = [0u32; 5];
    for _ in 0..cases {
        let pick = |rng: &mut ChaCha8Rng| {
            let (e, o) = random_element(rng, &t).split_parity();
            if rng.gen_bool(0.5) {
                e
            } else {
                o
            }
        };
        let (f, g, h) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        if &f * &g != (&g * &f).scale(&int(sign(&f, &g))) {
            failures[0] += 1;
        }
        if &(&f * &g) * &h != &f * &(&g * &h) {
            failures[1] += 1;
        }
        if weyl_mul(&weyl_mul(&f, &g, &pr)?, &h, &pr)? != weyl_mul(&f, &weyl_mul(&g, &h, &pr)?, &pr)? {
            failures[2] += 1;
        }
        let br = |x: &SuperElement, y: &SuperElement| poisson_bracket(x, y, &pr);
        if br(&f, &br(&g, &h)?)? != br(&br(&f, &g)?, &h)? + br(&g, &br(&f, &h)?)?.scale(&int(sign(&f, &g))) {
            failures[3] += 1;
        }
        if weyl_commutator(&f, &g, &pr)?.coefficient_of(hbar, 1) != br(&f, &g)? {
            failures[4] += 1;
        }
    }
    let passed = failures.iter().all(|&x| x == 0);
    let laws: serde_json::Map<String, serde_json::Value> = names.iter().zip(failures).map(|(n, f)| (n.to_string(), json!(f))).collect();
    let text = names.iter().zip(failures).map(|(n, f)| format!("  {n}: {f} failures in {cases}\n")).collect();
    Ok(Outcome { report: json!({"seed": seed, "cases": cases, "failures": laws, "passed": passed}), text, passed, csv: None })
}
