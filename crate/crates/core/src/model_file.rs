//! JSON description of a custom model: orbits, extra parameters, truncation and term lists.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SftError};
use crate::grading::degrees_pq;
use crate::homology::DGASpec;
use crate::models::{BaseGWPotential, FloerComplexSpec, FloerCount};
use crate::sft_algebras::{Hamiltonian, Level, Pairing};
use crate::superpoly::{int, parse_scalar, scalar_string, Parity, Scalar, SuperElement, TruncationPolicy, VarKind, VariableSpec, VariableTable};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(default)]
    pub weight: Option<u32>,
    #[serde(default)]
    pub t_powers: BTreeMap<String, u32>,
    #[serde(default)]
    pub z_degree: Option<i32>,
}

impl Truncation {
    pub fn policy(&self) -> TruncationPolicy {
        let mut p = TruncationPolicy::none();
        if let Some(w) = self.weight {
            p = p.with_weight(w);
        }
        for (name, cap) in &self.t_powers {
            p = p.with_power(name, *cap);
        }
        if let Some(d) = self.z_degree {
            p = p.with_z_degree(d);
        }
        p
    }
}

/// A Reeb orbit contributing the pair `p_<label>`, `q_<label>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitEntry {
    pub label: String,
    #[serde(default = "one_u32")]
    pub kappa: u32,
    pub cz: i64,
    #[serde(default)]
    pub winding: Option<i64>,
    #[serde(default)]
    pub base_index: Option<i32>,
}

fn one_u32() -> u32 {
    1
}

/// A non-orbit variable such as `t0`, `tau`, `z` or `hbar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterEntry {
    pub name: String,
    pub kind: VarKind,
    /// Integer or `num/den`.
    pub degree: String,
    #[serde(default)]
    pub odd: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub var: String,
    pub exp: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff_num: i64,
    #[serde(default = "one_i64")]
    pub coeff_den: i64,
    #[serde(default)]
    pub factors: Vec<Factor>,
}

fn one_i64() -> i64 {
    1
}

/// A named element whose cycle and boundary status should be reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCycle {
    pub name: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub model: String,
    pub dimension_n: i64,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub orbits: Vec<OrbitEntry>,
    #[serde(default)]
    pub parameters: Vec<ParameterEntry>,
    /// `pairing[i][j]` is `{p_i, q_j}`; absent means `kappa` on the diagonal.
    #[serde(default)]
    pub pairing: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub level: Option<Level>,
    #[serde(default)]
    pub hamiltonian: Option<Vec<Term>>,
    #[serde(default)]
    pub differential: Option<BTreeMap<String, Vec<Term>>>,
    #[serde(default)]
    pub base_potential: Option<Vec<Term>>,
    #[serde(default)]
    pub floer_counts: Option<Vec<FloerCount>>,
    #[serde(default)]
    pub cycles: Vec<NamedCycle>,
}

/// Everything a model file can describe, resolved against one variable table.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub table: Arc<VariableTable>,
    pub policy: TruncationPolicy,
    pub hamiltonian: Option<Hamiltonian>,
    pub dga: Option<DGASpec>,
    pub base: Option<BaseGWPotential>,
    pub floer: Option<FloerComplexSpec>,
    pub cycles: Vec<(String, SuperElement)>,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SftError::Validation(format!("model file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files serialize")
    }

    fn specs(&self) -> Result<Vec<VariableSpec>> {
        let mut specs = Vec::new();
        for o in &self.orbits {
            if o.kappa == 0 {
                return Err(SftError::Validation(format!("orbit {} has multiplicity 0", o.label)));
            }
            let (dp, dq) = degrees_pq(o.cz, self.dimension_n);
            let parity = Parity::from_odd(dq.rem_euclid(2) == 1);
            let mut p = VariableSpec::new(format!("p_{}", o.label), VarKind::P, parity, int(dp)).kappa(o.kappa);
            let mut q = VariableSpec::new(format!("q_{}", o.label), VarKind::Q, parity, int(dq)).kappa(o.kappa);
            if let Some(w) = o.winding {
                p = p.winding(w);
                q = q.winding(-w);
            }
            if let Some(b) = o.base_index {
                p = p.base(b);
                q = q.base(b);
            }
            specs.push(p.conjugate(format!("q_{}", o.label)));
            specs.push(q.conjugate(format!("p_{}", o.label)));
        }
        for prm in &self.parameters {
            if matches!(prm.kind, VarKind::P | VarKind::Q) {
                return Err(SftError::Validation(format!("parameter {} must not be of orbit kind", prm.name)));
            }
            let deg = parse_scalar(&prm.degree)?;
            if deg.is_integer() && (deg.to_integer() % 2 != num_bigint::BigInt::zero()) != prm.odd {
                return Err(SftError::Validation(format!("parameter {} has degree {} but parity odd = {}", prm.name, prm.degree, prm.odd)));
            }
            specs.push(VariableSpec::new(prm.name.clone(), prm.kind, Parity::from_odd(prm.odd), deg));
        }
        Ok(specs)
    }

    fn pairing(&self, table: &VariableTable) -> Result<Pairing> {
        let Some(rows) = &self.pairing else { return Ok(Pairing::from_conjugates(table)) };
        let n = self.orbits.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(SftError::Validation(format!("pairing must be a {n} x {n} matrix")));
        }
        let mut pairs = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let c = parse_scalar(entry)?;
                if c.is_zero() {
                    continue;
                }
                let p = table.var(&format!("p_{}", self.orbits[i].label));
                let q = table.var(&format!("q_{}", self.orbits[j].label));
                if table.parity(p) != table.parity(q) {
                    return Err(SftError::Validation(format!("pairing couples {} and {} of different parity", table.name(p), table.name(q))));
                }
                pairs.push((p, q, c));
            }
        }
        Ok(Pairing::new(pairs))
    }

    pub fn load(&self) -> Result<LoadedModel> {
        if self.model != "custom" {
            return Err(SftError::Validation(format!("model {:?} is a builtin name; load it through the builtin registry", self.model)));
        }
        let table = VariableTable::build(self.specs()?).map_err(|e| SftError::Validation(e.to_string()))?;
        let pairing = self.pairing(&table)?;
        let hamiltonian = match &self.hamiltonian {
            Some(terms) => {
                let body = element(&table, terms)?;
                let level = self.level.unwrap_or(if table.hbar().is_some() { Level::Quantum } else { Level::Rational });
                if let Some(par) = body.parity().filter(|p| !p.is_odd()) {
                    return Err(SftError::Validation(format!("hamiltonian must be odd, found {par:?}")));
                }
                if body.parity().is_none() && !body.is_zero() {
                    return Err(SftError::Validation("hamiltonian mixes parities".into()));
                }
                Some(Hamiltonian { body, dimension_n: self.dimension_n as i32, pairing, level })
            }
            None => None,
        };
        let dga = match &self.differential {
            Some(map) => {
                let mut boundary = BTreeMap::new();
                for (name, terms) in map {
                    let g = table.lookup(name).map_err(|e| SftError::Validation(e.to_string()))?;
                    boundary.insert(g, element(&table, terms)?);
                }
                let generators = table.ids_of_kind(VarKind::Q);
                let odd_params = (0..table.len()).filter(|&v| table.is_odd(v) && matches!(table.kind(v), VarKind::T | VarKind::Tau)).collect();
                Some(DGASpec::new(&table, generators, boundary, odd_params))
            }
            None => None,
        };
        let base = match &self.base_potential {
            Some(terms) => Some(BaseGWPotential { n: self.dimension_n as i32, body: element(&table, terms)? }),
            None => None,
        };
        let floer = self.floer_counts.as_ref().map(|counts| FloerComplexSpec {
            n: self.dimension_n,
            c1: 0,
            orbits: self
                .orbits
                .iter()
                .map(|o| crate::models::FloerOrbit { label: o.label.clone(), kappa: o.kappa, cz: o.cz })
                .collect(),
            counts: counts.clone(),
        });
        let mut cycles = Vec::new();
        for c in &self.cycles {
            cycles.push((c.name.clone(), element(&table, &c.terms)?));
        }
        Ok(LoadedModel { table, policy: self.truncation.policy(), hamiltonian, dga, base, floer, cycles })
    }
}

/// Builds an element from a term list, rejecting unknown variables and zero denominators.
pub fn element(table: &Arc<VariableTable>, terms: &[Term]) -> Result<SuperElement> {
    let mut out = SuperElement::zero(table);
    for t in terms {
        if t.coeff_den == 0 {
            return Err(SftError::Validation("term with zero denominator".into()));
        }
        let mut factors = Vec::with_capacity(t.factors.len());
        for f in &t.factors {
            let v = table.id(&f.var).ok_or_else(|| SftError::Validation(format!("unknown variable {}", f.var)))?;
            factors.push((v, f.exp));
        }
        let c = Scalar::new(t.coeff_num.into(), t.coeff_den.into());
        out += &SuperElement::from_factors(table, c, &factors).map_err(|e| SftError::Validation(e.to_string()))?;
    }
    Ok(out)
}

/// `(monomial, "num/den")` pairs in canonical order.
pub fn term_rows(f: &SuperElement) -> Vec<(String, String)> {
    let t = f.table();
    f.terms().iter().map(|(m, c)| (if m.is_one() { "1".to_string() } else { m.display(t) }, scalar_string(c))).collect()
}

/// Inverse of [`element`] for elements with machine-sized coefficients.
pub fn to_terms(f: &SuperElement) -> Option<Vec<Term>> {
    use num_traits::ToPrimitive;
    let t = f.table();
    f.terms()
        .iter()
        .map(|(m, c)| {
            Some(Term {
                coeff_num: c.numer().to_i64()?,
                coeff_den: c.denom().to_i64()?,
                factors: m.factors().iter().map(|&(v, e)| Factor { var: t.name(v).to_string(), exp: e }).collect(),
            })
        })
        .collect()
}
