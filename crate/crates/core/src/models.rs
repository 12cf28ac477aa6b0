//! Model Hamiltonians: the circle, prequantization spaces over projective spaces,
//! their differential algebras and satellites, and linear Floer complexes.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SftError};
use crate::homology::DGASpec;
use crate::sft_algebras::{apply_derivation, classical_differential, poisson_bracket, weyl_commutator, Hamiltonian, Level, Pairing, Potential};
use crate::superpoly::{factorial, int, Monomial, Scalar, SuperElement, TruncationPolicy, VarId, VarKind, VariableSpec, VariableTable};

pub use crate::grading::{brieskorn_ck, yau_generators};

fn circle_specs(k_max: u32) -> Vec<VariableSpec> {
    let mut specs = vec![VariableSpec::even("t0", VarKind::T, int(-2)), VariableSpec::odd("t1", VarKind::T, int(-1))];
    for k in 1..=k_max {
        specs.push(VariableSpec::even(format!("p{k}"), VarKind::P, int(-2)).kappa(k).winding(k as i64).conjugate(format!("q{k}")));
        specs.push(VariableSpec::even(format!("q{k}"), VarKind::Q, int(-2)).kappa(k).winding(-(k as i64)).conjugate(format!("p{k}")));
    }
    specs.push(VariableSpec::even("hbar", VarKind::Hbar, int(-4)));
    specs
}

/// `hbar^{-1} (t1 t0^2/2 + t1 sum_{k<=K} p_k q_k - t1 hbar/24)` on the circle.
pub fn circle_hamiltonian(k_max: u32) -> Result<Hamiltonian> {
    let t = VariableTable::build(circle_specs(k_max))?;
    let v = |n: &str| SuperElement::named(&t, n);
    let mut inner = (&v("t0") * &v("t0")).scale(&Scalar::new(1.into(), 2.into()));
    for k in 1..=k_max {
        inner += &(&v(&format!("p{k}")) * &v(&format!("q{k}")));
    }
    let hinv = SuperElement::from_monomial(&t, Monomial::power(t.var("hbar"), -1), Scalar::one());
    let body = &hinv * &(&v("t1") * &inner) - v("t1").scale(&Scalar::new(1.into(), 24.into()));
    Ok(Hamiltonian { body, dimension_n: 1, pairing: Pairing::from_conjugates(&t), level: Level::Quantum })
}

/// Variables of a prequantization space over `CP^{n-1}` with fiber order `l`:
/// `t_0, ..., t_{2n}`, `tau`, the fiber marker `zeta`, the class `z`, and `p_{k,2i}`, `q_{k,2i}` for `k <= k_max`.
#[derive(Clone, Debug)]
pub struct BottLayout {
    pub n: i32,
    pub l: i64,
    pub k_max: u32,
    pub table: Arc<VariableTable>,
}

impl BottLayout {
    pub fn new(n: i32, l: i64, k_max: u32) -> Result<Self> {
        if n < 1 || l < 1 {
            return Err(SftError::Range(format!("invalid prequantization data n = {n}, l = {l}")));
        }
        let c = Scalar::new((n as i64).into(), l.into());
        let mut specs = Vec::new();
        for i in 0..=n {
            specs.push(VariableSpec::even(format!("t{}", 2 * i), VarKind::T, int(2 * i as i64 - 2)));
        }
        specs.push(VariableSpec::odd("tau", VarKind::Tau, int(2 * n as i64 - 3)));
        specs.push(VariableSpec::even("zeta", VarKind::Z, int(-2 * n as i64)).winding(-l));
        specs.push(VariableSpec::even("z", VarKind::Z, int(-2 * (n as i64 + 1))));
        for k in 1..=k_max {
            for i in 0..n {
                let base = int(2 * i as i64 - 2);
                let shift = int(2 * k as i64) * &c;
                specs.push(
                    VariableSpec::even(Self::p_name(k, i), VarKind::P, &base - &shift)
                        .kappa(k)
                        .winding(k as i64)
                        .base(i),
                );
                specs.push(
                    VariableSpec::even(Self::q_name(k, i), VarKind::Q, &base + &shift)
                        .kappa(k)
                        .winding(-(k as i64))
                        .base(i),
                );
            }
        }
        Ok(BottLayout { n, l, k_max, table: VariableTable::build(specs)? })
    }

    pub fn p_name(k: u32, i: i32) -> String {
        format!("p{k}_{}", 2 * i)
    }

    pub fn q_name(k: u32, i: i32) -> String {
        format!("q{k}_{}", 2 * i)
    }

    pub fn p(&self, k: u32, i: i32) -> VarId {
        self.table.var(&Self::p_name(k, i))
    }

    pub fn q(&self, k: u32, i: i32) -> VarId {
        self.table.var(&Self::q_name(k, i))
    }

    pub fn t(&self, i: i32) -> VarId {
        self.table.var(&format!("t{}", 2 * i))
    }

    pub fn var(&self, name: &str) -> SuperElement {
        SuperElement::named(&self.table, name)
    }

    /// Poincaré pairing of `CP^{n-1}` on the classes `Delta_{2i}`.
    pub fn eta(&self) -> Vec<Vec<Scalar>> {
        let n = self.n as usize;
        (0..n).map(|i| (0..n).map(|j| if i + j + 1 == n { Scalar::one() } else { Scalar::zero() }).collect()).collect()
    }

    pub fn pairing(&self) -> Pairing {
        Pairing::with_eta(&self.table, &self.eta())
    }

    /// `u_{2i} = sum_k p_{k,2i} + q_{k,2i}`.
    pub fn u(&self, i: i32) -> SuperElement {
        let mut out = SuperElement::zero(&self.table);
        for k in 1..=self.k_max {
            out += &(&SuperElement::var(&self.table, self.p(k, i)) + &SuperElement::var(&self.table, self.q(k, i)));
        }
        out
    }

    pub fn p_vars(&self) -> Vec<VarId> {
        self.table.ids_of_kind(VarKind::P)
    }

    pub fn q_vars(&self) -> Vec<VarId> {
        self.table.ids_of_kind(VarKind::Q)
    }

    /// Total multiplicity of the `p` factors of a monomial.
    pub fn p_weight(&self, m: &Monomial) -> i64 {
        m.factors()
            .iter()
            .filter(|f| self.table.kind(f.0) == VarKind::P)
            .map(|&(v, e)| self.table.spec(v).kappa as i64 * e as i64)
            .sum()
    }
}

/// Rational Gromov-Witten potential of `CP^{n-1}` in the variables `t_0, ..., t_{2n-2}, z`.
#[derive(Clone, Debug)]
pub struct BaseGWPotential {
    pub n: i32,
    pub body: SuperElement,
}

impl BaseGWPotential {
    /// A point: `t0^3 / 6`.
    pub fn point() -> Result<Self> {
        let t = VariableTable::build(vec![VariableSpec::even("t0", VarKind::T, int(-2)), VariableSpec::even("z", VarKind::Z, int(-2))])?;
        let t0 = SuperElement::named(&t, "t0");
        Ok(BaseGWPotential { n: 1, body: (&t0 * &t0 * &t0).scale(&Scalar::new(1.into(), 6.into())) })
    }

    /// The projective line: `t0^2 t2 / 2 + e^{t2} z`, with `t2` kept up to power `t2_cap`.
    /// Prequantization at weight `W` needs `t2_cap > W`.
    pub fn projective_line(t2_cap: u32) -> Result<Self> {
        let layout = BottLayout::new(1, 1, 0)?;
        let pol = TruncationPolicy::none().with_power("t2", t2_cap);
        let (t0, t2, z) = (layout.var("t0"), layout.var("t2"), layout.var("z"));
        let body = (&t0 * &t0 * &t2).scale(&Scalar::new(1.into(), 2.into())) + &t2.exp_truncated(&pol)? * &z;
        Ok(BaseGWPotential { n: 2, body })
    }

    fn top_class(&self) -> Result<VarId> {
        self.body.table().lookup(&format!("t{}", 2 * self.n - 2))
    }
}

/// The winding-zero part of `f^(t_0 + u_0, u_2, ..., u_{2n-2}, zeta)` with `zeta = 1` afterwards,
/// where `f^` is the derivative of the base potential along its top class.
pub fn bott_h1(base: &BaseGWPotential, layout: &BottLayout, policy: &TruncationPolicy) -> Result<SuperElement> {
    if base.n != layout.n {
        return Err(SftError::Structural(format!("base of dimension {} used with layout {}", base.n, layout.n)));
    }
    let fhat = base.body.left_partial(base.top_class()?);
    let fhat = fhat.reembed_with(&layout.table, |name| if name == "z" { "zeta".to_string() } else { name.to_string() })?;
    let mut assign = BTreeMap::new();
    assign.insert(layout.t(0), &layout.var("t0") + &layout.u(0));
    for i in 1..layout.n {
        assign.insert(layout.t(i), layout.u(i));
    }
    let shifted = fhat.substitute(&assign, policy)?.winding_project(0);
    let mut marker = BTreeMap::new();
    marker.insert(layout.table.var("zeta"), SuperElement::one(&layout.table));
    shifted.substitute(&marker, policy)
}

/// Rational Hamiltonian `tau * h1` of the prequantization space over the base potential.
pub fn prequantization_h1(base: &BaseGWPotential, layout: &BottLayout, weight: u32) -> Result<Hamiltonian> {
    let h1 = bott_h1(base, layout, &TruncationPolicy::weight(weight))?;
    Ok(Hamiltonian { body: &layout.var("tau") * &h1, dimension_n: layout.n, pairing: layout.pairing(), level: Level::Rational })
}

/// Monomials in the given variables of total multiplicity at most `cap`, each with `1 / prod(exp!)`.
fn divided_monomials(table: &Arc<VariableTable>, vars: &[VarId], cap: i64, keep: &dyn Fn(&Monomial) -> bool) -> SuperElement {
    fn rec(
        table: &Arc<VariableTable>,
        vars: &[VarId],
        left: i64,
        cur: &mut Vec<(VarId, i32)>,
        coef: Scalar,
        keep: &dyn Fn(&Monomial) -> bool,
        out: &mut SuperElement,
    ) {
        let Some((&v, rest)) = vars.split_first() else {
            let e = SuperElement::from_factors(table, coef, cur).expect("even variables");
            if let Some((m, _)) = e.iter().next() {
                if keep(m) {
                    *out += &e;
                }
            }
            return;
        };
        let w = table.spec(v).kappa as i64;
        let mut e = 0;
        while e * w <= left {
            if e > 0 {
                cur.push((v, e as i32));
            }
            rec(table, rest, left - e * w, cur, &coef / factorial(e as u32), keep, out);
            if e > 0 {
                cur.pop();
            }
            e += 1;
        }
    }
    let mut out = SuperElement::zero(table);
    rec(table, vars, cap, &mut Vec::new(), Scalar::one(), keep, &mut out);
    out
}

/// Closed form of the lens-space Hamiltonian `tau (t0^2/2 + sum q_{k,0} p_{k,0} + sum_{winding l} q^I p^J / I! J!)`,
/// truncated at total multiplicity `weight`; `l = 1` is the standard 3-sphere.
pub fn lens_hamiltonian(l: i64, weight: u32) -> Result<(BottLayout, Hamiltonian)> {
    let layout = BottLayout::new(2, l, weight)?;
    let t = layout.table.clone();
    let mut inner = (&layout.var("t0") * &layout.var("t0")).scale(&Scalar::new(1.into(), 2.into()));
    for k in 1..=weight {
        if 2 * k <= weight {
            inner += &(&SuperElement::var(&t, layout.q(k, 0)) * &SuperElement::var(&t, layout.p(k, 0)));
        }
    }
    let vars: Vec<VarId> = (1..=weight).flat_map(|k| [layout.q(k, 1), layout.p(k, 1)]).collect();
    let tt = t.clone();
    inner += &divided_monomials(&t, &vars, weight as i64, &|m| m.winding(&tt) == l);
    let h = Hamiltonian { body: &layout.var("tau") * &inner, dimension_n: 2, pairing: layout.pairing(), level: Level::Rational };
    Ok((layout, h))
}

pub fn sphere3_hamiltonian(weight: u32) -> Result<(BottLayout, Hamiltonian)> {
    lens_hamiltonian(1, weight)
}

/// `h_1, ..., h_K`: the coefficients of `p_{k,2}` in the winding-zero part of `exp(u_2) * zeta`.
pub fn hk_polynomials(k_max: u32) -> Result<(BottLayout, Vec<SuperElement>)> {
    let layout = BottLayout::new(2, 1, k_max)?;
    let pol = TruncationPolicy::weight(2 * k_max - 1);
    let e = layout.u(1).exp_truncated(&pol)?;
    let zeta = layout.table.var("zeta");
    let projected = (&e * &SuperElement::var(&layout.table, zeta)).winding_project(0).coefficient_of(zeta, 1);
    let ps = layout.p_vars();
    let hs = (1..=k_max).map(|k| projected.coefficient_of(layout.p(k, 1), 1).kill(&ps)).collect();
    Ok((layout, hs))
}

/// The contact-homology algebra of the standard 3-sphere on generators `q_{k,0}, q_{k,2}`, `k <= W`,
/// with `∂q_{k,2} = k tau q_{k,0}` and `∂q_{k,0} = k tau h_k`.
pub fn sphere3_dga(weight: u32) -> Result<(BottLayout, DGASpec)> {
    let (layout, hs) = hk_polynomials(weight)?;
    let tau = layout.var("tau");
    let mut boundary = BTreeMap::new();
    let mut gens = Vec::new();
    for k in 1..=weight {
        let kk = int(k as i64);
        let (q0, q2) = (layout.q(k, 0), layout.q(k, 1));
        boundary.insert(q2, (&tau * &SuperElement::var(&layout.table, q0)).scale(&kk));
        boundary.insert(q0, (&tau * &hs[k as usize - 1]).scale(&kk));
        gens.push(q0);
        gens.push(q2);
    }
    let tau_id = layout.table.var("tau");
    let dga = DGASpec::new(&layout.table, gens, boundary, vec![tau_id]);
    Ok((layout, dga))
}

/// Outcome of the structural checks on a Hamiltonian.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// `[H, H]` or `{h, h}` after truncation.
    pub hh_residual: SuperElement,
    pub degree_violations: Vec<Monomial>,
    /// A generator `q` with `∂²q != 0`, and its value.
    pub d_squared_witness: Option<(VarId, SuperElement)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.hh_residual.is_zero() && self.degree_violations.is_empty() && self.d_squared_witness.is_none()
    }
}

pub fn verify_hamiltonian(h: &Hamiltonian, policy: &TruncationPolicy) -> Result<VerifyReport> {
    let hh = match h.level {
        Level::Quantum => weyl_commutator(&h.body, &h.body, &h.pairing)?,
        _ => poisson_bracket(&h.body, &h.body, &h.pairing)?,
    }
    .truncate(policy);
    let rational = h.rational_part()?;
    let d = classical_differential(&rational);
    let mut witness = None;
    for q in h.pairing.q_vars() {
        let dq = d.get(&q).cloned().unwrap_or_else(|| SuperElement::zero(h.body.table()));
        let ddq = apply_derivation(&d, &dq).truncate(policy);
        if !ddq.is_zero() {
            witness = Some((q, ddq));
            break;
        }
    }
    Ok(VerifyReport { hh_residual: hh, degree_violations: h.degree_violations(), d_squared_witness: witness })
}

/// The identity cobordism over the circle model with both ends and its potentials.
#[derive(Clone, Debug)]
pub struct Concordance {
    pub table: Arc<VariableTable>,
    pub h_minus: Hamiltonian,
    pub h_plus: Hamiltonian,
    /// `hbar^{-1} sum_k k^{-1} q-_k p+_k`.
    pub quantum: Potential,
    /// `sum_k k^{-1} q-_k p+_k`.
    pub rational: Potential,
}

pub fn circle_concordance(k_max: u32) -> Result<Concordance> {
    let mut specs = vec![VariableSpec::even("t0", VarKind::T, int(-2)), VariableSpec::odd("t1", VarKind::T, int(-1))];
    for (tag, _) in [("m", ()), ("p", ())] {
        for k in 1..=k_max {
            specs.push(VariableSpec::even(format!("p{tag}{k}"), VarKind::P, int(-2)).kappa(k).winding(k as i64));
            specs.push(VariableSpec::even(format!("q{tag}{k}"), VarKind::Q, int(-2)).kappa(k).winding(-(k as i64)));
        }
    }
    specs.push(VariableSpec::even("hbar", VarKind::Hbar, int(-4)));
    let t = VariableTable::build(specs)?;
    let v = |n: String| SuperElement::named(&t, &n);
    let pairing = |tag: &str| {
        Pairing::new((1..=k_max).map(|k| (t.var(&format!("p{tag}{k}")), t.var(&format!("q{tag}{k}")), int(k as i64))).collect())
    };
    let hinv = SuperElement::from_monomial(&t, Monomial::power(t.var("hbar"), -1), Scalar::one());
    let end = |tag: &str| {
        let mut inner = (&v("t0".into()) * &v("t0".into())).scale(&Scalar::new(1.into(), 2.into()));
        for k in 1..=k_max {
            inner += &(&v(format!("p{tag}{k}")) * &v(format!("q{tag}{k}")));
        }
        let body = &hinv * &(&v("t1".into()) * &inner) - v("t1".into()).scale(&Scalar::new(1.into(), 24.into()));
        Hamiltonian { body, dimension_n: 1, pairing: pairing(tag), level: Level::Quantum }
    };
    let mut f = SuperElement::zero(&t);
    for k in 1..=k_max {
        f += &(&v(format!("qm{k}")) * &v(format!("pp{k}"))).scale(&Scalar::new(1.into(), (k as i64).into()));
    }
    let pot = |body: SuperElement| Potential { body, minus: pairing("m"), plus: pairing("p"), dimension_n: 1 };
    Ok(Concordance {
        h_minus: end("m"),
        h_plus: end("p"),
        quantum: pot(&hinv * &f),
        rational: pot(f),
        table: t,
    })
}

/// Circle variables together with their variations `d*` and an even bookkeeping parameter `s`.
pub fn satellite_table(k_max: u32) -> Result<Arc<VariableTable>> {
    let mut specs = Vec::new();
    for d in ["", "d"] {
        specs.push(VariableSpec::even(format!("{d}t0"), VarKind::T, int(-2)));
        specs.push(VariableSpec::odd(format!("{d}t1"), VarKind::T, int(-1)));
        for k in 1..=k_max {
            specs.push(VariableSpec::even(format!("{d}p{k}"), VarKind::P, int(-2)).kappa(k).winding(k as i64));
            specs.push(VariableSpec::even(format!("{d}q{k}"), VarKind::Q, int(-2)).kappa(k).winding(-(k as i64)));
        }
    }
    specs.push(VariableSpec::even("s", VarKind::T, int(0)));
    VariableTable::build(specs)
}

fn satellite_k_max(table: &VariableTable) -> u32 {
    (1..).take_while(|k| table.id(&format!("p{k}")).is_some()).count() as u32
}

/// `t1 (t0^2/2 + sum p_k q_k)`, the genus-zero circle Hamiltonian, over a satellite table.
pub fn circle_rational_in(table: &Arc<VariableTable>) -> SuperElement {
    let v = |n: String| SuperElement::named(table, &n);
    let mut inner = (&v("t0".into()) * &v("t0".into())).scale(&Scalar::new(1.into(), 2.into()));
    for k in 1..=satellite_k_max(table) {
        inner += &(&v(format!("p{k}")) * &v(format!("q{k}")));
    }
    &v("t1".into()) * &inner
}

/// `δ^m f / m!`: the `s^m` coefficient of `f(x + s δx)`.
pub fn divided_differential(f: &SuperElement, m: u32) -> Result<SuperElement> {
    let t = f.table();
    let s = SuperElement::named(t, "s");
    let mut assign = BTreeMap::new();
    for spec in t.specs() {
        if let Some(dv) = t.id(&format!("d{}", spec.name)) {
            let v = t.var(&spec.name);
            assign.insert(v, &SuperElement::var(t, v) + &(&s * &SuperElement::var(t, dv)));
        }
    }
    Ok(f.substitute(&assign, &TruncationPolicy::none())?.coefficient_of(t.var("s"), m as i32))
}

/// Satellite `h^{g, n+1} = δt1 / n! * W0[(u_xx)^g (δu)^n]` of the circle, with the genus-zero
/// unstable range `n <= 1` given by `δ^{n+1} h / (n+1)!`.
pub fn circle_satellite_in(table: &Arc<VariableTable>, g: u32, n: u32) -> Result<SuperElement> {
    let k_max = satellite_k_max(table);
    if 2 * g as i64 - 2 + n as i64 >= 0 {
        let v = |name: String| SuperElement::named(table, &name);
        let mut uxx = SuperElement::zero(table);
        let mut du = v("dt0".into());
        for k in 1..=k_max {
            let k2 = int(-(k as i64) * (k as i64));
            uxx += &(&v(format!("p{k}")) + &v(format!("q{k}"))).scale(&k2);
            du += &(&v(format!("dp{k}")) + &v(format!("dq{k}")));
        }
        let integrand = (&uxx.pow(g) * &du.pow(n)).winding_project(0);
        Ok((&v("dt1".into()) * &integrand).scale(&(Scalar::one() / factorial(n))))
    } else if g == 0 {
        divided_differential(&circle_rational_in(table), n + 1)
    } else {
        Err(SftError::Range(format!("no satellite h^({g},{}) of the circle", n + 1)))
    }
}

pub fn circle_satellite(g: u32, n: u32, k_max: u32) -> Result<SuperElement> {
    circle_satellite_in(&satellite_table(k_max)?, g, n)
}

/// Component `T_{abc} = ∂_a ∂_b ∂_c T` of a cubic form (the `c` derivative is taken first).
pub fn cubic_component(form: &SuperElement, a: VarId, b: VarId, c: VarId) -> Scalar {
    form.left_partial(c).left_partial(b).left_partial(a).constant_term()
}

/// The variation pairs of a satellite table with their Poisson coefficients.
pub fn variation_pairing(table: &VariableTable) -> Vec<(VarId, VarId, Scalar)> {
    (1..=satellite_k_max(table))
        .map(|k| (table.var(&format!("dp{k}")), table.var(&format!("dq{k}")), int(k as i64)))
        .collect()
}

fn coupling(form: &SuperElement, pi: &[(VarId, VarId, Scalar)], a: VarId, b: VarId, c: VarId, d: VarId) -> Scalar {
    let t = form.table();
    let mut s = Scalar::zero();
    for (p, q, k) in pi {
        s += cubic_component(form, a, b, *p) * k * cubic_component(form, *q, c, d);
        let sign = if t.is_odd(*p) && t.is_odd(*q) { int(1) } else { int(-1) };
        s += cubic_component(form, a, b, *q) * k * sign * cubic_component(form, *p, c, d);
    }
    s
}

/// The cyclic three-term coupling of a cubic form through the Poisson tensor.
pub fn cyclic_coupling(form: &SuperElement, pi: &[(VarId, VarId, Scalar)], a: VarId, b: VarId, c: VarId, d: VarId) -> Scalar {
    let t = form.table();
    let odd = |v: VarId| t.is_odd(v) as u32;
    let sgn = |e: u32| if e % 2 == 0 { int(1) } else { int(-1) };
    coupling(form, pi, a, b, c, d)
        + sgn((odd(a) + odd(b)) * odd(c)) * coupling(form, pi, c, a, b, d)
        + sgn(odd(a) * (odd(b) + odd(c))) * coupling(form, pi, b, c, a, d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloerOrbit {
    pub label: String,
    pub kappa: u32,
    pub cz: i64,
}

/// `count` cylinders from `from` to `to` in the class `d` times the generator of `H_2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloerCount {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub d: i32,
    pub count: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloerComplexSpec {
    pub n: i64,
    /// First Chern number of the generator of `H_2`.
    #[serde(default)]
    pub c1: i64,
    pub orbits: Vec<FloerOrbit>,
    #[serde(default)]
    pub counts: Vec<FloerCount>,
}

impl FloerComplexSpec {
    fn orbit(&self, label: &str) -> Result<&FloerOrbit> {
        self.orbits.iter().find(|o| o.label == label).ok_or_else(|| SftError::Validation(format!("unknown orbit {label}")))
    }

    fn specs(&self, prefix: &str) -> Vec<VariableSpec> {
        self.orbits
            .iter()
            .map(|o| {
                let deg = o.cz + self.n - 3;
                let spec = if deg.rem_euclid(2) == 1 { VariableSpec::odd } else { VariableSpec::even };
                spec(format!("{prefix}{}", o.label), VarKind::Q, int(deg)).kappa(o.kappa)
            })
            .collect()
    }
}

/// Ellipsoid reference data: one orbit with `CZ = n + 2i - 1` for `i = 1..=count`, no cylinders.
pub fn ellipsoid(n: i64, count: i64) -> FloerComplexSpec {
    FloerComplexSpec {
        n,
        c1: 0,
        orbits: (1..=count).map(|i| FloerOrbit { label: format!("e{i}"), kappa: 1, cz: n + 2 * i - 1 }).collect(),
        counts: vec![],
    }
}

fn z_spec(c1: i64) -> VariableSpec {
    VariableSpec::even("z", VarKind::Z, int(-2 * c1))
}

/// Linear complex `∂q_γ = sum (n / κ_γ') z^d q_γ'`.
pub fn floer_complex(spec: &FloerComplexSpec) -> Result<DGASpec> {
    let mut specs = spec.specs("q_");
    specs.push(z_spec(spec.c1));
    let t = VariableTable::build(specs)?;
    let mut boundary: BTreeMap<VarId, SuperElement> = BTreeMap::new();
    for c in &spec.counts {
        let (a, b) = (spec.orbit(&c.from)?, spec.orbit(&c.to)?);
        if b.cz != a.cz + 2 * spec.c1 * c.d as i64 - 1 {
            return Err(SftError::Validation(format!(
                "cylinder {} -> {} in class {} violates the index constraint",
                c.from, c.to, c.d
            )));
        }
        let img = SuperElement::from_factors(
            &t,
            Scalar::new(c.count.into(), (b.kappa as i64).into()),
            &[(t.var("z"), c.d), (t.var(&format!("q_{}", b.label)), 1)],
        )?;
        let e = boundary.entry(t.var(&format!("q_{}", a.label))).or_insert_with(|| SuperElement::zero(&t));
        *e += &img;
    }
    boundary.retain(|_, v| !v.is_zero());
    let gens = spec.orbits.iter().map(|o| t.var(&format!("q_{}", o.label))).collect();
    Ok(DGASpec::new(&t, gens, boundary, vec![]))
}

#[derive(Clone, Debug)]
pub struct ChainMapReport {
    pub table: Arc<VariableTable>,
    /// `Φ(q+_γ)` in the generators `q-_γ'`.
    pub map: BTreeMap<VarId, SuperElement>,
    /// `Φ ∂+ - ∂- Φ` on each generator.
    pub residual: BTreeMap<VarId, SuperElement>,
}

impl ChainMapReport {
    pub fn is_chain_map(&self) -> bool {
        self.residual.values().all(SuperElement::is_zero)
    }
}

/// `Φ(q+_γ) = sum (n / κ_γ') z^d q-_γ'` together with its failure to commute with the differentials.
pub fn floer_chain_map(plus: &FloerComplexSpec, minus: &FloerComplexSpec, counts: &[FloerCount]) -> Result<ChainMapReport> {
    if plus.n != minus.n || plus.c1 != minus.c1 {
        return Err(SftError::Validation("the two ends have different dimension or Chern data".into()));
    }
    let mut specs = plus.specs("qp_");
    specs.extend(minus.specs("qm_"));
    specs.push(z_spec(plus.c1));
    let t = VariableTable::build(specs)?;
    let linear = |spec: &FloerComplexSpec, counts: &[FloerCount], shift: i64, from: &str, to: &str, target: &FloerComplexSpec| {
        let mut out: BTreeMap<VarId, SuperElement> = BTreeMap::new();
        for c in counts {
            let a = spec.orbit(&c.from)?;
            let b = target.orbit(&c.to)?;
            if b.cz != a.cz + 2 * spec.c1 * c.d as i64 + shift {
                return Err(SftError::Validation(format!("count {} -> {} violates the index constraint", c.from, c.to)));
            }
            let img = SuperElement::from_factors(
                &t,
                Scalar::new(c.count.into(), (b.kappa as i64).into()),
                &[(t.var("z"), c.d), (t.var(&format!("{to}{}", b.label)), 1)],
            )?;
            let e = out.entry(t.var(&format!("{from}{}", a.label))).or_insert_with(|| SuperElement::zero(&t));
            *e += &img;
        }
        Ok::<_, SftError>(out)
    };
    let d_plus = linear(plus, &plus.counts, -1, "qp_", "qp_", plus)?;
    let d_minus = linear(minus, &minus.counts, -1, "qm_", "qm_", minus)?;
    let map = linear(plus, counts, 0, "qp_", "qm_", minus)?;
    let mut residual = BTreeMap::new();
    for o in &plus.orbits {
        let g = t.var(&format!("qp_{}", o.label));
        let dg = d_plus.get(&g).cloned().unwrap_or_else(|| SuperElement::zero(&t));
        let phi_d = dg.substitute(&map_with_zero(&t, plus, &map), &TruncationPolicy::none())?;
        let phi_g = map.get(&g).cloned().unwrap_or_else(|| SuperElement::zero(&t));
        residual.insert(g, &phi_d - &apply_derivation(&d_minus, &phi_g));
    }
    Ok(ChainMapReport { table: t, map, residual })
}

fn map_with_zero(t: &Arc<VariableTable>, plus: &FloerComplexSpec, map: &BTreeMap<VarId, SuperElement>) -> BTreeMap<VarId, SuperElement> {
    plus.orbits
        .iter()
        .map(|o| {
            let g = t.var(&format!("qp_{}", o.label));
            (g, map.get(&g).cloned().unwrap_or_else(|| SuperElement::zero(t)))
        })
        .collect()
}
