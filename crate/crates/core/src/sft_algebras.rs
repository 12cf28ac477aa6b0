//! Poisson, Weyl and classical differential structures, and the cobordism calculus
//! (gluing operations, Lagrangian restriction, the cobordism residual).

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Result, SftError};
use crate::superpoly::{factorial, int, Monomial, Parity, Scalar, SuperElement, TruncationPolicy, VarId, VarKind, VariableTable};

/// Canonically paired `(p, q)` variables with `[p, q] = c * hbar` and `{p, q} = c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pairing {
    pairs: Vec<(VarId, VarId, Scalar)>,
}

impl Pairing {
    pub fn new(pairs: Vec<(VarId, VarId, Scalar)>) -> Self {
        Pairing { pairs }
    }

    /// Pairs every `p` with its declared conjugate, weighted by the orbit multiplicity.
    pub fn from_conjugates(table: &VariableTable) -> Self {
        let pairs = table
            .ids_of_kind(VarKind::P)
            .into_iter()
            .filter_map(|p| table.conjugate(p).map(|q| (p, q, int(table.spec(p).kappa as i64))))
            .collect();
        Pairing { pairs }
    }

    /// Pairs `p_{k,i}` with `q_{k,j}` through `kappa * eta[i][j]`, matching multiplicities.
    pub fn with_eta(table: &VariableTable, eta: &[Vec<Scalar>]) -> Self {
        let mut pairs = Vec::new();
        for p in table.ids_of_kind(VarKind::P) {
            let sp = table.spec(p);
            let Some(i) = sp.base_index else { continue };
            for q in table.ids_of_kind(VarKind::Q) {
                let sq = table.spec(q);
                let Some(j) = sq.base_index else { continue };
                if sq.kappa != sp.kappa {
                    continue;
                }
                let e = eta.get(i as usize).and_then(|row| row.get(j as usize)).cloned().unwrap_or_else(Scalar::zero);
                if !e.is_zero() {
                    pairs.push((p, q, e * int(sp.kappa as i64)));
                }
            }
        }
        Pairing { pairs }
    }

    pub fn pairs(&self) -> &[(VarId, VarId, Scalar)] {
        &self.pairs
    }

    pub fn restrict(&self, keep: impl Fn(VarId, VarId) -> bool) -> Self {
        Pairing { pairs: self.pairs.iter().filter(|(p, q, _)| keep(*p, *q)).cloned().collect() }
    }

    pub fn p_vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.pairs.iter().map(|x| x.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn q_vars(&self) -> Vec<VarId> {
        let mut v: Vec<VarId> = self.pairs.iter().map(|x| x.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Element of `hbar^{-1}` times the Weyl algebra.
    Quantum,
    /// Genus-zero part, an element of the Poisson algebra.
    Rational,
    /// Only the part linear in `p` matters.
    Classical,
}

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub body: SuperElement,
    /// The contact manifold has dimension `2n - 1`.
    pub dimension_n: i32,
    pub pairing: Pairing,
    pub level: Level,
}

impl Hamiltonian {
    /// Degree every monomial must have: `-1` for the full Hamiltonian, `-1 + 2(n-3)` for its
    /// genus-zero part.
    pub fn expected_degree(&self) -> Scalar {
        match self.level {
            Level::Quantum => int(-1),
            Level::Rational | Level::Classical => int(-1 + 2 * (self.dimension_n as i64 - 3)),
        }
    }

    pub fn degree_violations(&self) -> Vec<Monomial> {
        let t = self.body.table();
        let want = self.expected_degree();
        self.body.terms().keys().filter(|m| m.degree(t) != want).cloned().collect()
    }

    /// The genus-zero part: the hbar^0 coefficient of `hbar * H`.
    pub fn rational_part(&self) -> Result<Hamiltonian> {
        let t = self.body.table();
        let body = match (self.level, t.hbar()) {
            (Level::Quantum, Some(h)) => (&SuperElement::var(t, h) * &self.body).coefficient_of(h, 0),
            (Level::Quantum, None) => return Err(SftError::Level("quantum Hamiltonian without hbar".into())),
            _ => self.body.clone(),
        };
        Ok(Hamiltonian { body, dimension_n: self.dimension_n, pairing: self.pairing.clone(), level: Level::Rational })
    }

    /// Lowest power of hbar present; `None` for an element without hbar.
    pub fn min_hbar_power(&self) -> Option<i32> {
        let h = self.body.table().hbar()?;
        self.body.terms().keys().map(|m| m.exponent(h)).min()
    }
}

/// A potential of a cobordism with its negative and positive ends.
#[derive(Clone, Debug)]
pub struct Potential {
    pub body: SuperElement,
    /// Pairs `(p-, q-)` of the negative end; the body depends on `q-`.
    pub minus: Pairing,
    /// Pairs `(p+, q+)` of the positive end; the body depends on `p+`.
    pub plus: Pairing,
    pub dimension_n: i32,
}

impl Potential {
    pub fn degree_violations(&self) -> Vec<Monomial> {
        let t = self.body.table();
        let want = int(2 * (self.dimension_n as i64 - 3));
        self.body.terms().keys().filter(|m| m.degree(t) != want).cloned().collect()
    }
}

fn reject_hbar(f: &SuperElement) -> Result<()> {
    if let Some(h) = f.table().hbar() {
        if f.terms().keys().any(|m| m.contains(h)) {
            return Err(SftError::Level("hbar present in a Poisson-algebra operand".into()));
        }
    }
    Ok(())
}

fn parity_sign(a: Parity, b: Parity) -> Scalar {
    if a.koszul(b) {
        -Scalar::one()
    } else {
        Scalar::one()
    }
}

/// `sum_pairs c * (f d<-/dp)(d->/dq g)`, the contraction that both the bracket and
/// the hbar-linear part of the Weyl product are built from.
fn contract(f: &SuperElement, g: &SuperElement, pairing: &Pairing) -> SuperElement {
    let mut out = SuperElement::zero(f.table());
    for (p, q, c) in &pairing.pairs {
        let fp = f.right_partial(*p);
        if fp.is_zero() {
            continue;
        }
        let gq = g.left_partial(*q);
        if gq.is_zero() {
            continue;
        }
        out += &(&fp * &gq).scale(c);
    }
    out
}

/// Poisson bracket on homogeneous pieces, extended bilinearly.
pub fn poisson_bracket(f: &SuperElement, g: &SuperElement, pairing: &Pairing) -> Result<SuperElement> {
    reject_hbar(f)?;
    reject_hbar(g)?;
    let mut out = SuperElement::zero(f.table());
    let (f0, f1) = f.split_parity();
    let (g0, g1) = g.split_parity();
    for (fp, fpar) in [(&f0, Parity::Even), (&f1, Parity::Odd)] {
        for (gp, gpar) in [(&g0, Parity::Even), (&g1, Parity::Odd)] {
            if fp.is_zero() || gp.is_zero() {
                continue;
            }
            out += &contract(fp, gp, pairing);
            out -= &contract(gp, fp, pairing).scale(&parity_sign(fpar, gpar));
        }
    }
    Ok(out)
}

/// Normal-ordered product in the Weyl algebra with `[p, q] = c * hbar`.
pub fn weyl_mul(f: &SuperElement, g: &SuperElement, pairing: &Pairing) -> Result<SuperElement> {
    let t = f.table().clone();
    let hbar = t.hbar().ok_or_else(|| SftError::Structural("the Weyl product needs an hbar variable".into()))?;
    let mut by_p: HashMap<VarId, Vec<(VarId, &Scalar)>> = HashMap::new();
    for (p, q, c) in &pairing.pairs {
        by_p.entry(*p).or_default().push((*q, c));
    }
    let mut out = SuperElement::zero(&t);
    for (ma, ca) in f.terms() {
        let active: Vec<(VarId, VarId, &Scalar)> = ma
            .factors()
            .iter()
            .filter_map(|&(v, _)| by_p.get(&v).map(|qs| (v, qs)))
            .flat_map(|(p, qs)| qs.iter().map(move |&(q, c)| (p, q, c)))
            .collect();
        for (mb, cb) in g.terms() {
            let mut states = vec![(ca * cb, ma.clone(), mb.clone(), 0i32)];
            for &(p, q, c) in &active {
                if !mb.contains(q) {
                    continue;
                }
                let mut next = Vec::new();
                for (coef, a, b, h) in states {
                    let cap = a.exponent(p).min(b.exponent(q)).max(0) as u32;
                    for n in 0..=cap {
                        let Some((da, a2)) = a.derive(p, n, false, &t) else { break };
                        let Some((db, b2)) = b.derive(q, n, true, &t) else { break };
                        let scale = c.pow(n as i32) / factorial(n);
                        next.push((&coef * da * db * scale, a2, b2, h + n as i32));
                    }
                }
                states = next;
            }
            for (coef, a, b, h) in states {
                if let Some((neg, m)) = a.mul(&b, &t) {
                    let m = if h == 0 { m } else { m.mul(&Monomial::power(hbar, h), &t).expect("hbar is even").1 };
                    out.add_term(m, if neg { -coef } else { coef });
                }
            }
        }
    }
    Ok(out)
}

/// `[F, G] = F∘G - (-1)^{|F||G|} G∘F` on homogeneous pieces.
pub fn weyl_commutator(f: &SuperElement, g: &SuperElement, pairing: &Pairing) -> Result<SuperElement> {
    let mut out = SuperElement::zero(f.table());
    let (f0, f1) = f.split_parity();
    let (g0, g1) = g.split_parity();
    for (fp, fpar) in [(&f0, Parity::Even), (&f1, Parity::Odd)] {
        for (gp, gpar) in [(&g0, Parity::Even), (&g1, Parity::Odd)] {
            if fp.is_zero() || gp.is_zero() {
                continue;
            }
            out += &weyl_mul(fp, gp, pairing)?;
            out -= &weyl_mul(gp, fp, pairing)?.scale(&parity_sign(fpar, gpar));
        }
    }
    Ok(out)
}

/// Images of the `q` generators under the classical differential `f -> {h, f}|_{p=0}`.
pub fn classical_differential(h: &Hamiltonian) -> BTreeMap<VarId, SuperElement> {
    let t = h.body.table();
    let ps = h.pairing.p_vars();
    let mut out: BTreeMap<VarId, SuperElement> = BTreeMap::new();
    for (p, q, c) in h.pairing.pairs() {
        let img = h.body.right_partial(*p).kill(&ps).scale(c);
        let entry = out.entry(*q).or_insert_with(|| SuperElement::zero(t));
        *entry += &img;
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Extends generator images to the derivation `f -> sum_q X_q * d->f/dq`.
pub fn apply_derivation(images: &BTreeMap<VarId, SuperElement>, f: &SuperElement) -> SuperElement {
    let mut out = SuperElement::zero(f.table());
    for (q, x) in images {
        let d = f.left_partial(*q);
        if !d.is_zero() {
            out += &(x * &d);
        }
    }
    out
}

/// `d_h(g) = {h, g}`.
pub fn d_h(h: &Hamiltonian, g: &SuperElement) -> Result<SuperElement> {
    poisson_bracket(&h.body, g, &h.pairing)
}

/// `D_H(f) = [H, f]`.
pub fn big_d_h(h: &Hamiltonian, f: &SuperElement) -> Result<SuperElement> {
    if h.level != Level::Quantum {
        return Err(SftError::Level("D_H needs a quantum Hamiltonian".into()));
    }
    weyl_commutator(&h.body, f, &h.pairing)
}

/// One interface orbit joining two cobordisms: `p` belongs to the lower piece, `q` to the upper.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub p: VarId,
    pub q: VarId,
    pub kappa: Scalar,
    /// Power of the interface `z` variable attached to the orbit.
    pub d: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interface {
    pub links: Vec<Link>,
    pub z: Option<VarId>,
}

impl Interface {
    pub fn new(links: Vec<Link>) -> Self {
        Interface { links, z: None }
    }

    fn p_vars(&self) -> Vec<VarId> {
        self.links.iter().map(|l| l.p).collect()
    }

    fn q_vars(&self) -> Vec<VarId> {
        self.links.iter().map(|l| l.q).collect()
    }

    fn z_power(&self, table: &std::sync::Arc<VariableTable>, d: i32) -> Result<SuperElement> {
        if d == 0 {
            return Ok(SuperElement::one(table));
        }
        let z = self.z.ok_or_else(|| SftError::Structural("interface degree shift without a z variable".into()))?;
        Ok(SuperElement::from_monomial(table, Monomial::power(z, d), Scalar::one()))
    }

    fn check(&self, lower: &SuperElement, upper: &SuperElement) -> Result<()> {
        let (ps, qs) = (self.p_vars(), self.q_vars());
        if lower.terms().keys().any(|m| qs.iter().any(|&q| m.contains(q))) {
            return Err(SftError::Structural("lower operand contains interface q variables".into()));
        }
        if upper.terms().keys().any(|m| ps.iter().any(|&p| m.contains(p))) {
            return Err(SftError::Structural("upper operand contains interface p variables".into()));
        }
        if lower.table() != upper.table() {
            return Err(SftError::Structural("operands belong to different variable tables".into()));
        }
        Ok(())
    }
}

/// `F ⋆ G`: interface `p` of `F` act as `kappa * hbar * z^d * d/dq` on `G`, then `q = 0`.
pub fn star(f: &SuperElement, g: &SuperElement, iface: &Interface) -> Result<SuperElement> {
    iface.check(f, g)?;
    let t = f.table().clone();
    let hbar = SuperElement::var(&t, t.hbar().ok_or_else(|| SftError::Structural("star needs hbar".into()))?);
    let ps = iface.p_vars();
    let qs = iface.q_vars();
    let mut cache: HashMap<Monomial, SuperElement> = HashMap::new();
    let mut out = SuperElement::zero(&t);
    for (m, c) in f.terms() {
        let (neg, rest, ops) = m.split(&t, |v| ps.contains(&v));
        if !cache.contains_key(&ops) {
            let mut acc = g.clone();
            for &(p, e) in ops.factors().iter().rev() {
                let link = iface.links.iter().find(|l| l.p == p).expect("p is an interface variable");
                let factor = (&hbar * &iface.z_power(&t, link.d)?).scale(&link.kappa);
                for _ in 0..e {
                    acc = &factor * &acc.left_partial(link.q);
                }
            }
            cache.insert(ops.clone(), acc.kill(&qs));
        }
        let rest = SuperElement::from_monomial(&t, rest, if neg { -c.clone() } else { c.clone() });
        out += &(&rest * &cache[&ops]);
    }
    Ok(out)
}

/// `F ◊ G`, defined by `exp(F ◊ G) = exp(F) ⋆ exp(G)`.
pub fn diamond(f: &SuperElement, g: &SuperElement, iface: &Interface, policy: &TruncationPolicy) -> Result<SuperElement> {
    let t = f.table().clone();
    let ef = f.exp_truncated(&without_hbar_window(policy))?;
    let eg = g.exp_truncated(&without_hbar_window(policy))?;
    let s = star(&ef, &eg, iface)?.truncate(&without_hbar_window(policy));
    let c0 = s.constant_term();
    if c0 != Scalar::one() {
        return Err(SftError::Divergence(format!("glued exponential has constant term {c0}, logarithm is not rational")));
    }
    let x = &s - &SuperElement::one(&t);
    let inner = without_hbar_window(policy);
    let mut log = SuperElement::zero(&t);
    let mut power = SuperElement::one(&t);
    let mut k = 0i64;
    loop {
        k += 1;
        power = power.mul_truncated(&x, &inner);
        if power.is_zero() {
            break;
        }
        if k > 4096 {
            return Err(SftError::Divergence("logarithm series does not terminate under the policy".into()));
        }
        let sign = if k % 2 == 1 { int(1) } else { int(-1) };
        log += &power.scale(&(sign / int(k)));
    }
    Ok(log.truncate(policy))
}

fn without_hbar_window(policy: &TruncationPolicy) -> TruncationPolicy {
    TruncationPolicy { hbar_window: None, ..policy.clone() }
}

const SHARP_ROUNDS: usize = 512;

/// Rational gluing `f- ♯ f+`, solving the interface constraints by fixed-point iteration.
pub fn sharp(f_minus: &SuperElement, f_plus: &SuperElement, iface: &Interface, policy: &TruncationPolicy) -> Result<SuperElement> {
    iface.check(f_minus, f_plus)?;
    let t = f_minus.table().clone();
    let mut dminus = Vec::new();
    let mut dplus = Vec::new();
    for l in &iface.links {
        let zd = iface.z_power(&t, l.d)?.scale(&l.kappa);
        dminus.push(&zd * &f_minus.left_partial(l.p));
        dplus.push(&zd * &f_plus.left_partial(l.q));
    }
    let mut qv: Vec<SuperElement> = vec![SuperElement::zero(&t); iface.links.len()];
    let mut pv: Vec<SuperElement> = vec![SuperElement::zero(&t); iface.links.len()];
    let mut converged = false;
    for _ in 0..SHARP_ROUNDS {
        let mut pmap = BTreeMap::new();
        let mut qmap = BTreeMap::new();
        for (i, l) in iface.links.iter().enumerate() {
            pmap.insert(l.p, pv[i].clone());
            qmap.insert(l.q, qv[i].clone());
        }
        let mut nq = Vec::with_capacity(qv.len());
        let mut np = Vec::with_capacity(pv.len());
        for i in 0..iface.links.len() {
            nq.push(dminus[i].substitute(&pmap, policy)?);
            np.push(dplus[i].substitute(&qmap, policy)?);
        }
        if nq == qv && np == pv {
            converged = true;
            break;
        }
        qv = nq;
        pv = np;
    }
    if !converged {
        return Err(SftError::Divergence("interface constraints did not reach a fixed point".into()));
    }
    let mut total = f_minus + f_plus;
    let mut assign = BTreeMap::new();
    for (i, l) in iface.links.iter().enumerate() {
        let corr = &iface.z_power(&t, -l.d)? * &(&SuperElement::var(&t, l.q) * &SuperElement::var(&t, l.p));
        total -= &corr.scale(&(Scalar::one() / &l.kappa));
        assign.insert(l.p, pv[i].clone());
        assign.insert(l.q, qv[i].clone());
    }
    total.substitute(&assign, policy)
}

/// Restriction to `L_f`: `p- = c * df/dq-`, `q+ = c * df/dp+`.
pub fn lagrangian_restrict(g: &SuperElement, f: &Potential, policy: &TruncationPolicy) -> Result<SuperElement> {
    let t = g.table();
    let mut assign: BTreeMap<VarId, SuperElement> = BTreeMap::new();
    for (p, q, c) in f.minus.pairs() {
        let img = f.body.left_partial(*q).scale(c);
        let e = assign.entry(*p).or_insert_with(|| SuperElement::zero(t));
        *e += &img;
    }
    for (p, q, c) in f.plus.pairs() {
        let img = f.body.left_partial(*p).scale(c);
        let e = assign.entry(*q).or_insert_with(|| SuperElement::zero(t));
        *e += &img;
    }
    g.substitute(&assign, policy)
}

/// Residual of the cobordism equation `H-> e^F - e^F <-H+` at the given truncation.
pub fn dw_check(h_minus: &Hamiltonian, h_plus: &Hamiltonian, f: &Potential, policy: &TruncationPolicy) -> Result<SuperElement> {
    let inner = without_hbar_window(policy);
    let ef = f.body.exp_truncated(&inner)?;
    let left = weyl_mul(&h_minus.body, &ef, &h_minus.pairing)?.kill(&h_minus.pairing.p_vars());
    let right = weyl_mul(&ef, &h_plus.body, &h_plus.pairing)?.kill(&h_plus.pairing.q_vars());
    Ok((&left - &right).truncate(&inner))
}

/// `Psi(q+) = c * (df/dp+)|_{p+ = 0}`, the part of the potential linear in `p+`.
pub fn psi_from_potential(f: &Potential) -> BTreeMap<VarId, SuperElement> {
    let t = f.body.table();
    let plus_p = f.plus.p_vars();
    let mut out: BTreeMap<VarId, SuperElement> = BTreeMap::new();
    for (p, q, c) in f.plus.pairs() {
        let img = f.body.left_partial(*p).kill(&plus_p).scale(c);
        let e = out.entry(*q).or_insert_with(|| SuperElement::zero(t));
        *e += &img;
    }
    out
}

/// Extends [`psi_from_potential`] multiplicatively.
pub fn apply_psi(psi: &BTreeMap<VarId, SuperElement>, g: &SuperElement) -> Result<SuperElement> {
    g.substitute(psi, &TruncationPolicy::none())
}

/// Novikov condition: every monomial `z^d p^Gamma` has `omega(d) > -action(Gamma)`.
pub fn novikov_check(f: &SuperElement, action: &BTreeMap<VarId, Scalar>, omega: &BTreeMap<VarId, Scalar>) -> Result<bool> {
    let t = f.table();
    for m in f.terms().keys() {
        let mut lhs = Scalar::zero();
        let mut rhs = Scalar::zero();
        for &(v, e) in m.factors() {
            match t.kind(v) {
                VarKind::Z => {
                    let w = omega
                        .get(&v)
                        .ok_or_else(|| SftError::Configuration(format!("no symplectic area for {}", t.name(v))))?;
                    lhs += w * int(e as i64);
                }
                VarKind::P => {
                    let a = action
                        .get(&v)
                        .ok_or_else(|| SftError::Configuration(format!("no action for {}", t.name(v))))?;
                    rhs -= a * int(e as i64);
                }
                _ => {}
            }
        }
        if lhs <= rhs {
            return Ok(false);
        }
    }
    Ok(true)
}
