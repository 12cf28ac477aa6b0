//! Hamilton-Jacobi recursion for the rational potentials of `C^n`, closing up to `CP^n`,
//! and the plane-curve counts read off from the result.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, SftError};
use crate::models::{bott_h1, BaseGWPotential, BottLayout};
use crate::superpoly::{factorial, int, Monomial, Scalar, SuperElement, TruncationPolicy, VarId, VarKind};

/// `∂f/∂t_{2n} = h1 |_{L_f}` with `L_f: q_{k,2j} = k ∂f/∂p_{k,2n-2j-2}`, solved order by order in `t_{2n}`.
#[derive(Clone, Debug)]
pub struct HJProblem {
    pub layout: BottLayout,
    pub h1: SuperElement,
    /// Potential at `t_{2n} = 0`.
    pub initial: SuperElement,
    /// Highest power of `t_{2n}` computed.
    pub order: u32,
    /// Cap on the total multiplicity of `p` factors.
    pub weight: u32,
}

/// Multiplicity reachable at `t_{2n}`-order `order` by degree counting.
pub fn auto_weight(n: i32, order: u32) -> u32 {
    let w = (order as i64 * (n as i64 - 1) - n as i64 + 3).div_euclid(2);
    w.max(1) as u32
}

impl HJProblem {
    /// Builds `h1` from the base potential of `CP^{n-1}` with caps derived from `order`.
    pub fn from_base(base: &BaseGWPotential, order: u32) -> Result<Self> {
        let n = base.n;
        let weight = auto_weight(n, order);
        let layout = BottLayout::new(n, 1, weight)?;
        let raw = bott_h1(base, &layout, &TruncationPolicy::weight(2 * weight))?;
        let h1 = raw.filter(|m, _| layout.p_weight(m) <= weight as i64);
        let initial = if n == 1 { SuperElement::var(&layout.table, layout.p(1, 0)) } else { SuperElement::zero(&layout.table) };
        Ok(HJProblem { layout, h1, initial, order, weight })
    }

    fn evolution(&self) -> VarId {
        self.layout.t(self.layout.n)
    }

    fn policy(&self, t_power: u32) -> TruncationPolicy {
        TruncationPolicy::weight(self.weight).with_power(self.layout.table.name(self.evolution()), t_power)
    }

    /// `h1` restricted to `L_f`, up to `t_{2n}`-power `t_power`.
    pub fn restricted(&self, f: &SuperElement, t_power: u32) -> Result<SuperElement> {
        let l = &self.layout;
        let pol = self.policy(t_power);
        let mut assign = BTreeMap::new();
        for k in 1..=l.k_max {
            for i in 0..l.n {
                let partner = l.p(k, l.n - 1 - i);
                assign.insert(l.q(k, i), f.left_partial(partner).scale(&int(k as i64)).truncate(&pol));
            }
        }
        let r = self.h1.substitute(&assign, &pol)?;
        if let Some(m) = r.terms().keys().find(|m| m.factors().iter().any(|f| l.table.kind(f.0) == VarKind::Q)) {
            return Err(SftError::Divergence(format!("{} survives the restriction", m.display(&l.table))));
        }
        Ok(r)
    }

    /// `∂f/∂t_{2n} - h1|_{L_f}` below the computed order.
    pub fn residual(&self, f: &SuperElement) -> Result<SuperElement> {
        let top = self.order.saturating_sub(1);
        let lhs = f.left_partial(self.evolution()).truncate(&self.policy(top));
        Ok(&lhs - &self.restricted(f, top)?)
    }
}

pub fn hj_solve(problem: &HJProblem) -> Result<SuperElement> {
    let t = &problem.layout.table;
    let tv = problem.evolution();
    let mut f = problem.initial.clone();
    for j in 0..problem.order {
        let r = problem.restricted(&f, j)?;
        let c = r.coefficient_of(tv, j as i32);
        let step = &c * &SuperElement::from_monomial(t, Monomial::power(tv, j as i32 + 1), Scalar::new(1.into(), (j as i64 + 1).into()));
        f += &step;
    }
    Ok(f)
}

/// `p_{1,2i} = z sum_{sum s_j (j-1) = i} prod t_{2j}^{s_j} / s_j!`, all other `p = 0`,
/// keeping `t_2, ..., t_{2n-2}` up to power `t_cap`.
pub fn close_up(f: &SuperElement, layout: &BottLayout, t_cap: u32) -> Result<SuperElement> {
    let t = &layout.table;
    let n = layout.n;
    let mut pol = TruncationPolicy::none();
    for j in 1..n {
        pol = pol.with_power(t.name(layout.t(j)), t_cap);
    }
    let e_t2 = if n >= 2 { layout.var("t2").exp_truncated(&pol)? } else { SuperElement::one(t) };
    let z = layout.var("z");
    let mut assign: BTreeMap<VarId, SuperElement> = layout.p_vars().into_iter().map(|p| (p, SuperElement::zero(t))).collect();
    for i in 0..n {
        // partitions of i into parts j - 1 >= 1, j = 2..n-1
        let mut sum = SuperElement::zero(t);
        let mut stack: Vec<(i32, i32, SuperElement)> = vec![(2, i, SuperElement::one(t))];
        while let Some((j, left, acc)) = stack.pop() {
            if left == 0 {
                sum += &acc;
                continue;
            }
            if j > n - 1 {
                continue;
            }
            let tj = SuperElement::var(t, layout.t(j));
            let mut s = 0;
            let mut term = acc.clone();
            while s * (j - 1) <= left {
                stack.push((j + 1, left - s * (j - 1), term.clone()));
                s += 1;
                term = (&term * &tj).scale(&Scalar::new(1.into(), (s as i64).into()));
            }
        }
        if layout.k_max >= 1 {
            assign.insert(layout.p(1, i), &z * &(&e_t2 * &sum).truncate(&pol));
        }
    }
    f.substitute(&assign, &pol)
}

/// `N_d = (3d-1)! [z^d t4^{3d-1}] f`, checking that every `t2` power follows `e^{d t2}`.
pub fn extract_nd(f_cp2: &SuperElement, layout: &BottLayout, d_max: u32, t2_cap: u32) -> Result<BTreeMap<u32, BigInt>> {
    let t = &layout.table;
    let (t2, t4, z) = (layout.t(1), layout.t(2), t.var("z"));
    let mut out = BTreeMap::new();
    for d in 1..=d_max {
        let pts = 3 * d as i32 - 1;
        let coeff = |m: i32| {
            let mono = Monomial::power(z, d as i32);
            let factors: Vec<(VarId, i32)> = mono.factors().iter().copied().chain([(t2, m), (t4, pts)]).filter(|f| f.1 != 0).collect();
            let (_, mono) = crate::superpoly::normalize(t, &factors).expect("even variables");
            f_cp2.coeff(&mono)
        };
        let base = coeff(0);
        for m in 1..=t2_cap as i32 {
            let want = &base * int(d as i64).pow(m) / factorial(m as u32);
            if coeff(m) != want {
                return Err(SftError::Soundness(format!("degree {d} coefficient of t2^{m} breaks the e^(d t2) pattern")));
            }
        }
        let nd = base * factorial(pts as u32);
        if !nd.is_integer() {
            return Err(SftError::Soundness(format!("N_{d} = {nd} is not an integer")));
        }
        out.insert(d, nd.to_integer());
    }
    if let Some(n1) = out.get(&1) {
        if !n1.is_one() {
            return Err(SftError::Soundness(format!("N_1 = {n1}, expected one line through two points")));
        }
    }
    Ok(out)
}

/// Plane-curve counts from the WDVV recursion.
pub fn kontsevich_oracle(d_max: u32) -> BTreeMap<u32, BigInt> {
    let mut n: BTreeMap<u32, BigInt> = BTreeMap::new();
    if d_max >= 1 {
        n.insert(1, BigInt::one());
    }
    for d in 2..=d_max {
        let mut s = BigInt::zero();
        for d1 in 1..d {
            let d2 = d - d1;
            let (a, b) = (BigInt::from(d1), BigInt::from(d2));
            let top = BigInt::from(3 * d - 4);
            let c1 = binomial(top.clone(), BigInt::from(3 * d1 - 2));
            let c2 = binomial(top, BigInt::from(3 * d1 - 1));
            let w = &a * &a * &b * &b * c1 - &a * &a * &a * &b * c2;
            s += &n[&d1] * &n[&d2] * w;
        }
        n.insert(d, s);
    }
    n
}

/// One step of the bootstrap: the potentials of `C^n` and `CP^n` and the `h1` used.
#[derive(Clone, Debug)]
pub struct Stage {
    pub n: i32,
    pub problem: HJProblem,
    pub f_cn: SuperElement,
    pub f_cpn: SuperElement,
}

impl Stage {
    pub fn layout(&self) -> &BottLayout {
        &self.problem.layout
    }

    /// Monomials of the two potentials whose degree differs from `2(n-3)`.
    pub fn degree_violations(&self) -> Vec<Monomial> {
        let t = &self.problem.layout.table;
        let want = int(2 * (self.n as i64 - 3));
        self.f_cn.terms().keys().chain(self.f_cpn.terms().keys()).filter(|m| m.degree(t) != want).cloned().collect()
    }
}

/// Runs stages `1..=orders.len()`; stage `n` integrates to `t_{2n}`-order `orders[n-1]`.
pub fn bootstrap(orders: &[u32]) -> Result<Vec<Stage>> {
    if orders.is_empty() || orders.len() > 3 {
        return Err(SftError::Range(format!("bootstrap supports 1 to 3 stages, got {}", orders.len())));
    }
    let mut base = BaseGWPotential::point()?;
    let mut stages = Vec::new();
    for (idx, &order) in orders.iter().enumerate() {
        let n = idx as i32 + 1;
        let problem = HJProblem::from_base(&base, order)?;
        let f_cn = hj_solve(&problem)?;
        let next_weight = orders.get(idx + 1).map_or(0, |&o| auto_weight(n + 1, o));
        let t_cap = (2 * next_weight).max(order).max(3);
        let f_cpn = close_up(&f_cn, &problem.layout, t_cap)?;
        base = BaseGWPotential { n: n + 1, body: f_cpn.clone() };
        stages.push(Stage { n, problem, f_cn, f_cpn });
    }
    Ok(stages)
}

/// Stage orders ending in `(n, order)`: each earlier stage is carried far enough
/// to supply the base potential of the next one.
pub fn orders_for(n: u32, order: u32) -> Result<Vec<u32>> {
    if !(1..=3).contains(&n) {
        return Err(SftError::Range(format!("bootstrap supports n = 1, 2, 3, got {n}")));
    }
    if order == 0 {
        return Err(SftError::Range("order must be positive".into()));
    }
    let mut orders = vec![order];
    for k in (2..=n).rev() {
        let w = auto_weight(k as i32, orders[0]);
        orders.insert(0, (2 * w + 1).max(3));
    }
    Ok(orders)
}

/// Highest `d` whose count fits in a bootstrap run of `t4`-order `order`.
pub fn max_degree_for_order(order: u32) -> u32 {
    (order + 1) / 3
}

/// `N_d` as machine integers when they fit.
pub fn nd_as_i64(table: &BTreeMap<u32, BigInt>) -> BTreeMap<u32, i64> {
    table.iter().filter_map(|(d, v)| v.to_i64().map(|x| (*d, x))).collect()
}
