//! Graded super-commutative polynomials and truncated power series over exact rationals.
//!
//! Variables live in a [`VariableTable`]; their ids are assigned in canonical order, so a
//! monomial stored with increasing ids is already in canonical form. Koszul signs are
//! produced whenever odd factors are permuted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SftError};

pub type Scalar = BigRational;
pub type VarId = usize;

/// `n/d` as an exact scalar.
pub fn rat(n: i64, d: i64) -> Scalar {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Renders a scalar as `num/den`, or just `num` for integers.
pub fn fmt_scalar(s: &Scalar) -> String {
    if s.is_integer() {
        s.numer().to_string()
    } else {
        format!("{}/{}", s.numer(), s.denom())
    }
}

/// Always `num/den`, the serialization format of every report.
pub fn scalar_string(s: &Scalar) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let bad = || SftError::Validation(format!("not a rational number: {text:?}"));
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(text.parse().map_err(|_| bad())?)),
    }
}

pub(crate) fn factorial(n: u32) -> Scalar {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    BigRational::from_integer(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    P,
    Q,
    T,
    Tau,
    Z,
    Hbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn plus(self, other: Parity) -> Parity {
        Parity::from_odd(self.is_odd() ^ other.is_odd())
    }

    /// `(-1)^{|a||b|}` as a boolean "negate" flag.
    pub fn koszul(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

/// Declaration of a single graded formal variable.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VarKind,
    pub parity: Parity,
    pub degree: Scalar,
    /// Orbit multiplicity; 1 for variables not attached to an orbit.
    pub kappa: u32,
    /// Fourier weight used by [`SuperElement::winding_project`].
    pub winding: i64,
    pub base_index: Option<i32>,
    /// Name of the Poisson partner, if any.
    pub conjugate: Option<String>,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, kind: VarKind, parity: Parity, degree: Scalar) -> Self {
        VariableSpec {
            name: name.into(),
            kind,
            parity,
            degree,
            kappa: 1,
            winding: 0,
            base_index: None,
            conjugate: None,
        }
    }

    pub fn even(name: impl Into<String>, kind: VarKind, degree: Scalar) -> Self {
        Self::new(name, kind, Parity::Even, degree)
    }

    pub fn odd(name: impl Into<String>, kind: VarKind, degree: Scalar) -> Self {
        Self::new(name, kind, Parity::Odd, degree)
    }

    pub fn kappa(mut self, kappa: u32) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn winding(mut self, winding: i64) -> Self {
        self.winding = winding;
        self
    }

    pub fn base(mut self, index: i32) -> Self {
        self.base_index = Some(index);
        self
    }

    pub fn conjugate(mut self, name: impl Into<String>) -> Self {
        self.conjugate = Some(name.into());
        self
    }
}

/// Registry of variables. Ids follow the canonical order
/// `(kind, base_index, multiplicity, declaration order)`.
#[derive(Debug, PartialEq)]
pub struct VariableTable {
    specs: Vec<VariableSpec>,
    index: HashMap<String, VarId>,
    conj: Vec<Option<VarId>>,
    hbar: Option<VarId>,
}

impl VariableTable {
    pub fn build(specs: Vec<VariableSpec>) -> Result<Arc<VariableTable>> {
        let mut order: Vec<usize> = (0..specs.len()).collect();
        order.sort_by_key(|&i| {
            let s = &specs[i];
            (s.kind, s.base_index.unwrap_or(i32::MIN), s.kappa, i)
        });
        let specs: Vec<VariableSpec> = order.into_iter().map(|i| specs[i].clone()).collect();
        let mut index = HashMap::new();
        let mut hbar = None;
        for (id, s) in specs.iter().enumerate() {
            if s.kappa == 0 {
                return Err(SftError::Structural(format!("variable {} has zero multiplicity", s.name)));
            }
            if index.insert(s.name.clone(), id).is_some() {
                return Err(SftError::Structural(format!("duplicate variable {}", s.name)));
            }
            if s.kind == VarKind::Hbar {
                if hbar.is_some() {
                    return Err(SftError::Structural("more than one hbar variable".into()));
                }
                if s.parity.is_odd() {
                    return Err(SftError::Grading("hbar must be even".into()));
                }
                hbar = Some(id);
            }
        }
        let mut conj = vec![None; specs.len()];
        for (id, s) in specs.iter().enumerate() {
            if let Some(c) = &s.conjugate {
                let cid = *index
                    .get(c)
                    .ok_or_else(|| SftError::Structural(format!("unknown conjugate {c} of {}", s.name)))?;
                if specs[cid].conjugate.as_deref() != Some(s.name.as_str()) {
                    return Err(SftError::Structural(format!("conjugate pairing {} / {c} is not symmetric", s.name)));
                }
                conj[id] = Some(cid);
            }
        }
        Ok(Arc::new(VariableTable { specs, index, conj, hbar }))
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn spec(&self, id: VarId) -> &VariableSpec {
        &self.specs[id]
    }

    pub fn specs(&self) -> &[VariableSpec] {
        &self.specs
    }

    pub fn id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.id(name).ok_or_else(|| SftError::Structural(format!("unknown variable {name}")))
    }

    /// Like [`lookup`](Self::lookup) but panics; for names known to exist.
    pub fn var(&self, name: &str) -> VarId {
        self.id(name).unwrap_or_else(|| panic!("unknown variable {name}"))
    }

    pub fn name(&self, id: VarId) -> &str {
        &self.specs[id].name
    }

    pub fn parity(&self, id: VarId) -> Parity {
        self.specs[id].parity
    }

    pub fn is_odd(&self, id: VarId) -> bool {
        self.specs[id].parity.is_odd()
    }

    pub fn kind(&self, id: VarId) -> VarKind {
        self.specs[id].kind
    }

    pub fn conjugate(&self, id: VarId) -> Option<VarId> {
        self.conj[id]
    }

    pub fn hbar(&self) -> Option<VarId> {
        self.hbar
    }

    pub fn ids_of_kind(&self, kind: VarKind) -> Vec<VarId> {
        (0..self.specs.len()).filter(|&i| self.specs[i].kind == kind).collect()
    }
}

/// A product of variables with nonzero exponents, stored in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    factors: Vec<(VarId, i32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: Vec::new() }
    }

    pub fn var(id: VarId) -> Self {
        Monomial { factors: vec![(id, 1)] }
    }

    pub fn power(id: VarId, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial { factors: vec![(id, exp)] }
        }
    }

    pub fn factors(&self) -> &[(VarId, i32)] {
        &self.factors
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent(&self, id: VarId) -> i32 {
        match self.factors.binary_search_by_key(&id, |f| f.0) {
            Ok(i) => self.factors[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, id: VarId) -> bool {
        self.exponent(id) != 0
    }

    pub fn degree(&self, table: &VariableTable) -> Scalar {
        let mut d = Scalar::zero();
        for &(v, e) in &self.factors {
            d += &table.spec(v).degree * int(e as i64);
        }
        d
    }

    pub fn parity(&self, table: &VariableTable) -> Parity {
        let odd = self.factors.iter().filter(|&&(v, e)| table.is_odd(v) && e % 2 != 0).count();
        Parity::from_odd(odd % 2 == 1)
    }

    pub fn winding(&self, table: &VariableTable) -> i64 {
        self.factors.iter().map(|&(v, e)| table.spec(v).winding * e as i64).sum()
    }

    /// Sum of orbit multiplicities over all `p` and `q` factors.
    pub fn weight(&self, table: &VariableTable) -> i64 {
        self.factors
            .iter()
            .filter(|&&(v, _)| matches!(table.kind(v), VarKind::P | VarKind::Q))
            .map(|&(v, e)| table.spec(v).kappa as i64 * e as i64)
            .sum()
    }

    /// Product in the super-commutative algebra: `None` when an odd square appears,
    /// otherwise `(negate, product)`.
    pub fn mul(&self, other: &Monomial, table: &VariableTable) -> Option<(bool, Monomial)> {
        let a = &self.factors;
        let b = &other.factors;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut negate = false;
        let odd_a_total = a.iter().filter(|f| table.is_odd(f.0)).count();
        let mut odd_a_seen = 0usize;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                if table.is_odd(a[i].0) {
                    odd_a_seen += 1;
                }
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if table.is_odd(b[j].0) && (odd_a_total - odd_a_seen) % 2 == 1 {
                    negate = !negate;
                }
                out.push(b[j]);
                j += 1;
            } else {
                let v = a[i].0;
                if table.is_odd(v) {
                    return None;
                }
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((v, e));
                }
                i += 1;
                j += 1;
            }
        }
        Some((negate, Monomial { factors: out }))
    }

    /// `n`-fold left (or right) derivative in `v`: `None` when it vanishes, otherwise
    /// `(coefficient, monomial)`.
    pub fn derive(&self, v: VarId, n: u32, left: bool, table: &VariableTable) -> Option<(Scalar, Monomial)> {
        if n == 0 {
            return Some((Scalar::one(), self.clone()));
        }
        let pos = self.factors.binary_search_by_key(&v, |f| f.0).ok()?;
        let e = self.factors[pos].1;
        let mut coef = Scalar::one();
        if table.is_odd(v) {
            if n > 1 {
                return None;
            }
            let range = if left { 0..pos } else { pos + 1..self.factors.len() };
            if self.factors[range].iter().filter(|f| table.is_odd(f.0)).count() % 2 == 1 {
                coef = -coef;
            }
        } else {
            if e >= 0 && (n as i32) > e {
                return None;
            }
            for k in 0..n as i32 {
                coef *= int((e - k) as i64);
            }
        }
        let mut factors = self.factors.clone();
        let rest = e - n as i32;
        if rest == 0 {
            factors.remove(pos);
        } else {
            factors[pos].1 = rest;
        }
        Some((coef, Monomial { factors }))
    }

    /// Removes every factor for which `pred` holds, returning `(negate, kept, removed)`
    /// with `self = ± kept * removed`.
    pub fn split(&self, table: &VariableTable, pred: impl Fn(VarId) -> bool) -> (bool, Monomial, Monomial) {
        let mut kept = Vec::new();
        let mut removed = Vec::new();
        let mut negate = false;
        let mut odd_removed_so_far = 0usize;
        for &(v, e) in &self.factors {
            if pred(v) {
                if table.is_odd(v) {
                    odd_removed_so_far += 1;
                }
                removed.push((v, e));
            } else {
                if table.is_odd(v) && odd_removed_so_far % 2 == 1 {
                    negate = !negate;
                }
                kept.push((v, e));
            }
        }
        (negate, Monomial { factors: kept }, Monomial { factors: removed })
    }

    pub fn display(&self, table: &VariableTable) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|&(v, e)| if e == 1 { table.name(v).to_string() } else { format!("{}^{}", table.name(v), e) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Brings an unordered factor list to canonical form.
///
/// Returns the Koszul sign (`0` when an odd variable would be squared) and the monomial.
pub fn normalize(table: &VariableTable, factors: &[(VarId, i32)]) -> Result<(i8, Monomial)> {
    let mut items: Vec<(VarId, i32)> = Vec::with_capacity(factors.len());
    for &(v, e) in factors {
        if v >= table.len() {
            return Err(SftError::Structural(format!("unknown variable id {v}")));
        }
        if table.is_odd(v) {
            if e < 0 {
                return Err(SftError::Structural(format!("negative power of odd variable {}", table.name(v))));
            }
            if e >= 2 {
                return Ok((0, Monomial::one()));
            }
        }
        if e != 0 {
            items.push((v, e));
        }
    }
    let mut negate = false;
    for i in 0..items.len() {
        for j in (i + 1)..items.len() {
            let (a, b) = (items[i].0, items[j].0);
            if table.is_odd(a) && table.is_odd(b) {
                if a == b {
                    return Ok((0, Monomial::one()));
                }
                if a > b {
                    negate = !negate;
                }
            }
        }
    }
    items.sort_by_key(|f| f.0);
    let mut merged: Vec<(VarId, i32)> = Vec::with_capacity(items.len());
    for (v, e) in items {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += e,
            _ => merged.push((v, e)),
        }
    }
    merged.retain(|f| f.1 != 0);
    Ok((if negate { -1 } else { 1 }, Monomial { factors: merged }))
}

/// Caps defining a finite working slice of a formal algebra.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Cap on the total orbit multiplicity of `p`/`q` factors.
    pub max_weight: Option<u32>,
    /// Cap on the power of individual variables, by name.
    pub max_t_power: BTreeMap<String, u32>,
    /// Cap on the total exponent of `z` variables.
    pub max_z_degree: Option<i32>,
    /// Inclusive window for the exponent of hbar.
    pub hbar_window: Option<(i32, i32)>,
    /// Variables not counted by `max_weight`.
    #[serde(default)]
    pub weight_exempt: BTreeSet<String>,
}

impl TruncationPolicy {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn weight(w: u32) -> Self {
        TruncationPolicy { max_weight: Some(w), ..Self::default() }
    }

    pub fn with_weight(mut self, w: u32) -> Self {
        self.max_weight = Some(w);
        self
    }

    pub fn with_power(mut self, name: &str, cap: u32) -> Self {
        self.max_t_power.insert(name.to_string(), cap);
        self
    }

    pub fn with_z_degree(mut self, d: i32) -> Self {
        self.max_z_degree = Some(d);
        self
    }

    pub fn with_hbar(mut self, lo: i32, hi: i32) -> Self {
        self.hbar_window = Some((lo, hi));
        self
    }

    pub fn exempt<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.weight_exempt.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn is_unbounded(&self) -> bool {
        self.max_weight.is_none() && self.max_t_power.is_empty() && self.max_z_degree.is_none() && self.hbar_window.is_none()
    }

    fn compile(&self, table: &VariableTable) -> CompiledPolicy {
        let weights = table
            .specs()
            .iter()
            .map(|s| {
                if matches!(s.kind, VarKind::P | VarKind::Q) && !self.weight_exempt.contains(&s.name) {
                    s.kappa as i64
                } else {
                    0
                }
            })
            .collect();
        let mut caps = vec![None; table.len()];
        for (name, &cap) in &self.max_t_power {
            if let Some(id) = table.id(name) {
                caps[id] = Some(cap as i32);
            }
        }
        let z = table.specs().iter().map(|s| s.kind == VarKind::Z).collect();
        CompiledPolicy {
            max_weight: self.max_weight.map(|w| w as i64),
            weights,
            caps,
            z,
            max_z: self.max_z_degree,
            hbar: table.hbar(),
            window: self.hbar_window,
        }
    }
}

struct CompiledPolicy {
    max_weight: Option<i64>,
    weights: Vec<i64>,
    caps: Vec<Option<i32>>,
    z: Vec<bool>,
    max_z: Option<i32>,
    hbar: Option<VarId>,
    window: Option<(i32, i32)>,
}

impl CompiledPolicy {
    /// The caps that can only be exceeded further by multiplying with more factors.
    fn keep_monotone(&self, m: &Monomial) -> bool {
        if let Some(w) = self.max_weight {
            let total: i64 = m.factors.iter().map(|&(v, e)| self.weights[v] * e as i64).sum();
            if total > w {
                return false;
            }
        }
        m.factors.iter().all(|&(v, e)| self.caps[v].map_or(true, |c| e <= c))
    }

    fn keep(&self, m: &Monomial) -> bool {
        if !self.keep_monotone(m) {
            return false;
        }
        if let Some(zmax) = self.max_z {
            let zdeg: i32 = m.factors.iter().filter(|f| self.z[f.0]).map(|f| f.1).sum();
            if zdeg > zmax {
                return false;
            }
        }
        if let (Some(h), Some((lo, hi))) = (self.hbar, self.window) {
            let e = m.exponent(h);
            if e < lo || e > hi {
                return false;
            }
        }
        true
    }

    /// Whether repeated products of `m` with itself eventually leave the slice.
    fn bounds_powers(&self, m: &Monomial, table: &VariableTable) -> bool {
        if m.factors.iter().any(|&(v, _)| table.is_odd(v)) {
            return true;
        }
        if self.max_weight.is_some() && m.factors.iter().any(|&(v, e)| self.weights[v] * e as i64 > 0) {
            return true;
        }
        m.factors.iter().any(|&(v, e)| e > 0 && self.caps[v].is_some())
    }
}

/// Sparse sum of canonical monomials with rational coefficients.
#[derive(Clone)]
pub struct SuperElement {
    table: Arc<VariableTable>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for SuperElement {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.table, &other.table) || self.table == other.table) && self.terms == other.terms
    }
}

impl fmt::Debug for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if m.is_one() {
                write!(f, "{}", fmt_scalar(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", m.display(&self.table))?;
            } else {
                write!(f, "{}*{}", fmt_scalar(&mag), m.display(&self.table))?;
            }
        }
        Ok(())
    }
}

impl SuperElement {
    pub fn zero(table: &Arc<VariableTable>) -> Self {
        SuperElement { table: table.clone(), terms: BTreeMap::new() }
    }

    pub fn one(table: &Arc<VariableTable>) -> Self {
        Self::constant(table, Scalar::one())
    }

    pub fn constant(table: &Arc<VariableTable>, c: Scalar) -> Self {
        Self::from_monomial(table, Monomial::one(), c)
    }

    pub fn var(table: &Arc<VariableTable>, id: VarId) -> Self {
        Self::from_monomial(table, Monomial::var(id), Scalar::one())
    }

    /// The variable with the given name; panics if it is not declared.
    pub fn named(table: &Arc<VariableTable>, name: &str) -> Self {
        Self::var(table, table.var(name))
    }

    pub fn from_monomial(table: &Arc<VariableTable>, m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        SuperElement { table: table.clone(), terms }
    }

    /// Builds `c * v1^e1 * v2^e2 * ...` with the factors taken in the given order.
    pub fn from_factors(table: &Arc<VariableTable>, c: Scalar, factors: &[(VarId, i32)]) -> Result<Self> {
        let (sign, m) = normalize(table, factors)?;
        let c = match sign {
            0 => Scalar::zero(),
            -1 => -c,
            _ => c,
        };
        Ok(Self::from_monomial(table, m, c))
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn same_table(&self, other: &SuperElement) -> bool {
        Arc::ptr_eq(&self.table, &other.table) || self.table == other.table
    }

    fn check_table(&self, other: &SuperElement) -> Result<()> {
        if self.same_table(other) {
            Ok(())
        } else {
            Err(SftError::Structural("operands belong to different variable tables".into()))
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.table);
        }
        SuperElement {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn try_add(&self, other: &SuperElement) -> Result<Self> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &SuperElement) -> Result<Self> {
        self.check_table(other)?;
        Ok(self.mul_filtered(other, |_| true))
    }

    fn mul_filtered(&self, other: &SuperElement, keep: impl Fn(&Monomial) -> bool) -> Self {
        let mut out = Self::zero(&self.table);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some((neg, m)) = ma.mul(mb, &self.table) {
                    if !keep(&m) {
                        continue;
                    }
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// Product followed by truncation, discarding out-of-slice terms early.
    pub fn mul_truncated(&self, other: &SuperElement, policy: &TruncationPolicy) -> Self {
        assert!(self.same_table(other), "operands belong to different variable tables");
        let cp = policy.compile(&self.table);
        self.mul_filtered(other, |m| cp.keep_monotone(m)).truncate(policy)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.table);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn truncate(&self, policy: &TruncationPolicy) -> Self {
        if policy.is_unbounded() {
            return self.clone();
        }
        let cp = policy.compile(&self.table);
        self.filter(|m, _| cp.keep(m))
    }

    pub fn filter(&self, keep: impl Fn(&Monomial, &Scalar) -> bool) -> Self {
        SuperElement {
            table: self.table.clone(),
            terms: self.terms.iter().filter(|(m, c)| keep(m, c)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Parity of every term, or `None` for a mixed element. Zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut found: Option<Parity> = None;
        for m in self.terms.keys() {
            let p = m.parity(&self.table);
            match found {
                None => found = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(found.unwrap_or(Parity::Even))
    }

    /// `(even part, odd part)`.
    pub fn split_parity(&self) -> (Self, Self) {
        let t = &self.table;
        (self.filter(|m, _| !m.parity(t).is_odd()), self.filter(|m, _| m.parity(t).is_odd()))
    }

    pub fn degrees(&self) -> BTreeSet<Scalar> {
        self.terms.keys().map(|m| m.degree(&self.table)).collect()
    }

    /// Left derivative: the variable is moved to the front before being removed.
    pub fn left_partial(&self, v: VarId) -> Self {
        self.partial(v, true)
    }

    /// Right derivative: the variable is moved to the back before being removed.
    pub fn right_partial(&self, v: VarId) -> Self {
        self.partial(v, false)
    }

    fn partial(&self, v: VarId, left: bool) -> Self {
        let t = &self.table;
        let v_odd = t.is_odd(v);
        let mut out = Self::zero(t);
        for (m, c) in &self.terms {
            let Ok(pos) = m.factors.binary_search_by_key(&v, |f| f.0) else { continue };
            let e = m.factors[pos].1;
            let mut negate = false;
            if v_odd {
                let range = if left { 0..pos } else { pos + 1..m.factors.len() };
                let passed = m.factors[range].iter().filter(|f| t.is_odd(f.0)).count();
                negate = passed % 2 == 1;
            }
            let mut factors = m.factors.clone();
            if e == 1 {
                factors.remove(pos);
            } else {
                factors[pos].1 = e - 1;
            }
            let coef = c * int(e as i64);
            out.add_term(Monomial { factors }, if negate { -coef } else { coef });
        }
        out
    }

    /// Writes `self = sum_k v^k * c_k` and returns `c_k` (the factor `v^k` is moved to the front).
    pub fn coefficient_of(&self, v: VarId, k: i32) -> Self {
        let t = &self.table;
        let mut out = Self::zero(t);
        for (m, c) in &self.terms {
            if m.exponent(v) != k {
                continue;
            }
            let (neg, kept, _) = m.split(t, |x| x == v);
            // split leaves v at the back; moving it to the front costs a Koszul sign
            let neg = neg ^ (t.is_odd(v) && k % 2 == 1 && kept.parity(t).is_odd());
            out.add_term(kept, if neg { -c.clone() } else { c.clone() });
        }
        out
    }

    /// Sets the given variables to zero.
    pub fn kill(&self, vars: &[VarId]) -> Self {
        self.filter(|m, _| !vars.iter().any(|&v| m.contains(v)))
    }

    /// Sets every variable of the given kind to zero.
    pub fn kill_kind(&self, kind: VarKind) -> Self {
        let t = self.table.clone();
        self.filter(|m, _| !m.factors.iter().any(|f| t.kind(f.0) == kind))
    }

    /// Keeps exactly the monomials of total winding `w`.
    pub fn winding_project(&self, w: i64) -> Self {
        let t = self.table.clone();
        self.filter(|m, _| m.winding(&t) == w)
    }

    /// Simultaneous substitution followed by truncation; unlisted variables are fixed.
    pub fn substitute(&self, assignment: &BTreeMap<VarId, SuperElement>, policy: &TruncationPolicy) -> Result<Self> {
        let t = &self.table;
        for (&v, img) in assignment {
            self.check_table(img)?;
            if v >= t.len() {
                return Err(SftError::Structural(format!("unknown variable id {v}")));
            }
            match img.parity() {
                Some(p) if p == t.parity(v) || img.is_zero() => {}
                _ => {
                    return Err(SftError::Grading(format!(
                        "substitution for {} has the wrong parity: {}",
                        t.name(v),
                        img
                    )))
                }
            }
        }
        let cp = policy.compile(t);
        let mut powers: HashMap<(VarId, i32), SuperElement> = HashMap::new();
        let mut out = Self::zero(t);
        for (m, c) in &self.terms {
            let mut acc = Self::constant(t, c.clone());
            for &(v, e) in &m.factors {
                let factor = match assignment.get(&v) {
                    None => Self::from_monomial(t, Monomial::power(v, e), Scalar::one()),
                    Some(img) => {
                        if e < 0 {
                            return Err(SftError::Structural(format!(
                                "cannot substitute into a negative power of {}",
                                t.name(v)
                            )));
                        }
                        if !powers.contains_key(&(v, e)) {
                            let mut p = Self::one(t);
                            for _ in 0..e {
                                p = p.mul_filtered(img, |x| cp.keep_monotone(x));
                            }
                            powers.insert((v, e), p);
                        }
                        powers[&(v, e)].clone()
                    }
                };
                acc = acc.mul_filtered(&factor, |x| cp.keep_monotone(x));
                if acc.is_zero() {
                    break;
                }
            }
            for (mm, cc) in acc.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out.truncate(policy))
    }

    /// Truncated exponential `sum f^k / k!`.
    pub fn exp_truncated(&self, policy: &TruncationPolicy) -> Result<Self> {
        let t = &self.table;
        if !self.constant_term().is_zero() {
            return Err(SftError::Divergence("exponential of an element with a constant term".into()));
        }
        let cp = policy.compile(t);
        if let Some(m) = self.terms.keys().find(|m| !cp.bounds_powers(m, t)) {
            return Err(SftError::Divergence(format!(
                "powers of {} are not bounded by the truncation policy",
                m.display(t)
            )));
        }
        let mut sum = Self::one(t);
        let mut term = Self::one(t);
        let mut k = 0i64;
        loop {
            k += 1;
            term = term.mul_filtered(self, |m| cp.keep_monotone(m)).scale(&rat(1, k));
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum.truncate(policy))
    }

    /// The same element written over another table with matching variable names.
    pub fn reembed(&self, target: &Arc<VariableTable>) -> Result<Self> {
        self.reembed_with(target, |n| n.to_string())
    }

    /// Like [`SuperElement::reembed`], renaming each variable on the way.
    pub fn reembed_with(&self, target: &Arc<VariableTable>, rename: impl Fn(&str) -> String) -> Result<Self> {
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut factors = Vec::with_capacity(m.factors.len());
            for &(v, e) in &m.factors {
                let name = rename(self.table.name(v));
                let id = target.lookup(&name)?;
                if target.is_odd(id) != self.table.is_odd(v) {
                    return Err(SftError::Grading(format!("variable {name} changes parity between tables")));
                }
                factors.push((id, e));
            }
            let (sign, mm) = normalize(target, &factors)?;
            match sign {
                0 => {}
                -1 => out.add_term(mm, -c.clone()),
                _ => out.add_term(mm, c.clone()),
            }
        }
        Ok(out)
    }

    /// Exact rational value of a coefficient as an integer, if it is one.
    pub fn integer_coeff(&self, m: &Monomial) -> Option<i64> {
        let c = self.coeff(m);
        if c.is_integer() {
            c.to_integer().to_i64()
        } else {
            None
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&SuperElement> for &SuperElement {
            type Output = SuperElement;
            fn $method(self, rhs: &SuperElement) -> SuperElement {
                let f: fn(&SuperElement, &SuperElement) -> SuperElement = $body;
                f(self, rhs)
            }
        }
        impl $tr<SuperElement> for SuperElement {
            type Output = SuperElement;
            fn $method(self, rhs: SuperElement) -> SuperElement {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&SuperElement> for SuperElement {
            type Output = SuperElement;
            fn $method(self, rhs: &SuperElement) -> SuperElement {
                (&self).$method(rhs)
            }
        }
        impl $tr<SuperElement> for &SuperElement {
            type Output = SuperElement;
            fn $method(self, rhs: SuperElement) -> SuperElement {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.try_add(b).expect("operands belong to different variable tables"));
binop!(Sub, sub, |a, b| a.try_add(&-b).expect("operands belong to different variable tables"));
binop!(Mul, mul, |a, b| a.try_mul(b).expect("operands belong to different variable tables"));

impl Neg for &SuperElement {
    type Output = SuperElement;
    fn neg(self) -> SuperElement {
        self.scale(&-Scalar::one())
    }
}

impl Neg for SuperElement {
    type Output = SuperElement;
    fn neg(self) -> SuperElement {
        -&self
    }
}

impl AddAssign<&SuperElement> for SuperElement {
    fn add_assign(&mut self, rhs: &SuperElement) {
        assert!(self.same_table(rhs), "operands belong to different variable tables");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&SuperElement> for SuperElement {
    fn sub_assign(&mut self, rhs: &SuperElement) {
        assert!(self.same_table(rhs), "operands belong to different variable tables");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}
