use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use sft_core::sft_algebras::{apply_derivation, classical_differential, d_h, poisson_bracket, weyl_commutator, weyl_mul, Hamiltonian, Level, Pairing};
use sft_core::{int, Parity, SuperElement, VarKind, VariableSpec, VariableTable};

fn table() -> Arc<VariableTable> {
    VariableTable::build(vec![
        VariableSpec::even("p1", VarKind::P, int(-4)).conjugate("q1"),
        VariableSpec::even("p2", VarKind::P, int(-6)).kappa(2).conjugate("q2"),
        VariableSpec::odd("pa", VarKind::P, int(-3)).conjugate("qa"),
        VariableSpec::even("q1", VarKind::Q, int(2)).conjugate("p1"),
        VariableSpec::even("q2", VarKind::Q, int(4)).kappa(2).conjugate("p2"),
        VariableSpec::odd("qa", VarKind::Q, int(1)).conjugate("pa"),
        VariableSpec::even("x", VarKind::T, int(0)),
        VariableSpec::odd("a", VarKind::T, int(1)),
        VariableSpec::odd("b", VarKind::T, int(-1)),
        VariableSpec::odd("tau", VarKind::Tau, int(-1)),
        VariableSpec::even("hbar", VarKind::Hbar, int(-4)),
    ])
    .unwrap()
}

thread_local! {
    static TABLE: Arc<VariableTable> = table();
}

fn tbl() -> Arc<VariableTable> {
    TABLE.with(Arc::clone)
}

const ALL: &[&str] = &["p1", "p2", "pa", "q1", "q2", "qa", "x", "a", "b", "tau"];
const NO_P: &[&str] = &["q1", "q2", "qa", "x", "a", "b"];

type Raw = Vec<(i64, Vec<(usize, i32)>)>;

fn raw() -> impl Strategy<Value = Raw> {
    prop::collection::vec((-3i64..=3, prop::collection::vec((0usize..16, 1i32..=2), 0..4)), 0..4)
}

fn build(r: &Raw, pool: &[&str]) -> SuperElement {
    let t = tbl();
    let mut out = SuperElement::zero(&t);
    for (c, fs) in r {
        let factors: Vec<_> = fs.iter().map(|&(i, e)| (t.var(pool[i % pool.len()]), e)).collect();
        out += &SuperElement::from_factors(&t, int(*c), &factors).unwrap();
    }
    out
}

fn pairing() -> Pairing {
    Pairing::from_conjugates(&tbl())
}

fn sign(a: Parity, b: Parity) -> i64 {
    if a.is_odd() && b.is_odd() {
        -1
    } else {
        1
    }
}

fn parity_pieces(f: &SuperElement) -> [(SuperElement, Parity); 2] {
    let (e, o) = f.split_parity();
    [(e, Parity::Even), (o, Parity::Odd)]
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 500, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn supercommutative(f in raw(), g in raw()) {
        let (f, g) = (build(&f, ALL), build(&g, ALL));
        for (fp, a) in parity_pieces(&f) {
            for (gp, b) in parity_pieces(&g) {
                prop_assert_eq!(&fp * &gp, (&gp * &fp).scale(&int(sign(a, b))));
            }
        }
    }

    #[test]
    fn commutative_associative(f in raw(), g in raw(), h in raw()) {
        let (f, g, h) = (build(&f, ALL), build(&g, ALL), build(&h, ALL));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
    }

    #[test]
    fn weyl_associative(f in raw(), g in raw(), h in raw()) {
        let pr = pairing();
        let (f, g, h) = (build(&f, ALL), build(&g, ALL), build(&h, ALL));
        let left = weyl_mul(&weyl_mul(&f, &g, &pr).unwrap(), &h, &pr).unwrap();
        let right = weyl_mul(&f, &weyl_mul(&g, &h, &pr).unwrap(), &pr).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn super_jacobi(f in raw(), g in raw(), h in raw()) {
        let pr = pairing();
        let br = |x: &SuperElement, y: &SuperElement| poisson_bracket(x, y, &pr).unwrap();
        for (fp, a) in parity_pieces(&build(&f, ALL)) {
            for (gp, b) in parity_pieces(&build(&g, ALL)) {
                for (hp, c) in parity_pieces(&build(&h, ALL)) {
                    // {f,{g,h}} = {{f,g},h} + (-1)^{|f||g|} {g,{f,h}}
                    let lhs = br(&fp, &br(&gp, &hp));
                    let rhs = br(&br(&fp, &gp), &hp) + br(&gp, &br(&fp, &hp)).scale(&int(sign(a, b)));
                    prop_assert_eq!(lhs, rhs, "parities {:?} {:?} {:?}", a, b, c);
                }
            }
        }
    }

    #[test]
    fn leibniz_classical_differential(hr in raw(), f in raw(), g in raw()) {
        let t = tbl();
        let h = Hamiltonian {
            body: &SuperElement::named(&t, "tau") * &build(&hr, ALL).split_parity().0,
            dimension_n: 3,
            pairing: pairing(),
            level: Level::Rational,
        };
        let d = classical_differential(&h);
        for (fp, a) in parity_pieces(&build(&f, NO_P)) {
            let g = build(&g, NO_P);
            let lhs = apply_derivation(&d, &(&fp * &g));
            let rhs = &apply_derivation(&d, &fp) * &g + (&fp * &apply_derivation(&d, &g)).scale(&int(sign(a, Parity::Odd)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn leibniz_d_h(hr in raw(), f in raw(), g in raw()) {
        let t = tbl();
        let h = Hamiltonian {
            body: &SuperElement::named(&t, "tau") * &build(&hr, ALL).split_parity().0,
            dimension_n: 3,
            pairing: pairing(),
            level: Level::Rational,
        };
        for (fp, a) in parity_pieces(&build(&f, ALL)) {
            let g = build(&g, ALL);
            let lhs = d_h(&h, &(&fp * &g)).unwrap();
            let rhs = &d_h(&h, &fp).unwrap() * &g + (&fp * &d_h(&h, &g).unwrap()).scale(&int(sign(a, Parity::Odd)));
            prop_assert_eq!(lhs, rhs);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn commutator_leading_term_is_bracket(f in raw(), g in raw()) {
        let t = tbl();
        let pr = pairing();
        let (f, g) = (build(&f, ALL), build(&g, ALL));
        let c = weyl_commutator(&f, &g, &pr).unwrap();
        let hb = t.var("hbar");
        prop_assert!(c.coefficient_of(hb, 0).is_zero());
        prop_assert_eq!(c.coefficient_of(hb, 1), poisson_bracket(&f, &g, &pr).unwrap());
    }
}

#[test]
fn generator_covers_every_variable() {
    let t = tbl();
    let mut seen = BTreeMap::new();
    for (i, name) in ALL.iter().enumerate() {
        let e = build(&vec![(1, vec![(i, 1)])], ALL);
        seen.insert(*name, e.terms().keys().next().map(|m| m.contains(t.var(name))));
    }
    assert!(seen.values().all(|v| *v == Some(true)));
}
