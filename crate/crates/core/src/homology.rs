//! Homology of differential graded algebras on weight-truncated slices.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Result, SftError};
use crate::linalg::Matrix;
use crate::sft_algebras::apply_derivation;
use crate::superpoly::{normalize, Monomial, Scalar, SuperElement, VarId, VarKind, VariableTable};

/// Free graded-commutative algebra on `generators` with an odd derivation given on generators.
#[derive(Clone, Debug)]
pub struct DGASpec {
    pub table: Arc<VariableTable>,
    pub generators: Vec<VarId>,
    pub boundary: BTreeMap<VarId, SuperElement>,
    /// Odd coefficient parameters, adjoined as generators.
    pub odd_params: Vec<VarId>,
}

impl DGASpec {
    pub fn new(table: &Arc<VariableTable>, generators: Vec<VarId>, boundary: BTreeMap<VarId, SuperElement>, odd_params: Vec<VarId>) -> Self {
        DGASpec { table: table.clone(), generators, boundary, odd_params }
    }

    fn all_generators(&self) -> Vec<VarId> {
        let mut g: Vec<VarId> = self.generators.iter().chain(self.odd_params.iter()).copied().collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub fn differential(&self, f: &SuperElement) -> SuperElement {
        apply_derivation(&self.boundary, f)
    }

    /// The quotient by the given odd parameters.
    pub fn quotient(&self, params: &[VarId]) -> DGASpec {
        let boundary = self
            .boundary
            .iter()
            .filter(|(v, _)| !params.contains(v))
            .map(|(v, img)| (*v, img.kill(params)))
            .filter(|(_, img)| !img.is_zero())
            .collect();
        DGASpec {
            table: self.table.clone(),
            generators: self.generators.iter().copied().filter(|v| !params.contains(v)).collect(),
            boundary,
            odd_params: self.odd_params.iter().copied().filter(|v| !params.contains(v)).collect(),
        }
    }

    /// Generators whose boundary is not homogeneous of one degree lower.
    pub fn degree_violations(&self) -> Vec<VarId> {
        let t = &self.table;
        self.boundary
            .iter()
            .filter(|(v, img)| {
                let want = t.spec(**v).degree.clone() - Scalar::one();
                img.terms().keys().any(|m| m.degree(t) != want)
            })
            .map(|(v, _)| *v)
            .collect()
    }
}

/// Monomial basis grouped by degree, with the boundary matrices between consecutive degrees.
#[derive(Clone, Debug)]
pub struct ChainComplexSlice {
    pub table: Arc<VariableTable>,
    pub basis: BTreeMap<Scalar, Vec<Monomial>>,
    /// `matrices[d]` maps degree `d` to degree `d - 1`.
    pub matrices: BTreeMap<Scalar, Matrix>,
    pub weight_cap: Option<u32>,
    pub degree_window: Option<(Scalar, Scalar)>,
    index: HashMap<Monomial, (Scalar, usize)>,
    images: BTreeMap<VarId, SuperElement>,
    linear: bool,
}

fn enumerate(table: &VariableTable, gens: &[VarId], cap: i64) -> Result<Vec<Monomial>> {
    fn rec(table: &VariableTable, gens: &[VarId], left: i64, cur: &mut Vec<(VarId, i32)>, out: &mut Vec<Monomial>) -> Result<()> {
        let Some((&g, rest)) = gens.split_first() else {
            let (sign, m) = normalize(table, cur)?;
            if sign != 0 {
                out.push(m);
            }
            return Ok(());
        };
        let s = table.spec(g);
        let w = if matches!(s.kind, VarKind::P | VarKind::Q) { s.kappa as i64 } else { 0 };
        let max = if table.is_odd(g) {
            1
        } else if w == 0 {
            return Err(SftError::Range(format!("even generator {} has no weight, the slice would be infinite", s.name)));
        } else {
            left / w
        };
        for e in 0..=max {
            if e * w > left {
                break;
            }
            if e > 0 {
                cur.push((g, e as i32));
            }
            rec(table, rest, left - e * w, cur, out)?;
            if e > 0 {
                cur.pop();
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    rec(table, gens, cap, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn assemble(
    table: &Arc<VariableTable>,
    monomials: Vec<Monomial>,
    image: impl Fn(&Monomial) -> Result<SuperElement>,
) -> Result<(BTreeMap<Scalar, Vec<Monomial>>, HashMap<Monomial, (Scalar, usize)>, BTreeMap<Scalar, Matrix>)> {
    let mut basis: BTreeMap<Scalar, Vec<Monomial>> = BTreeMap::new();
    for m in monomials {
        basis.entry(m.degree(table)).or_default().push(m);
    }
    let mut index = HashMap::new();
    for (d, ms) in &basis {
        for (i, m) in ms.iter().enumerate() {
            index.insert(m.clone(), (d.clone(), i));
        }
    }
    let mut matrices = BTreeMap::new();
    for (d, ms) in &basis {
        let below = d - Scalar::one();
        let rows = basis.get(&below).map_or(0, Vec::len);
        let mut mat = Matrix::zeros(rows, ms.len());
        for (j, m) in ms.iter().enumerate() {
            for (tm, c) in image(m)?.terms() {
                match index.get(tm) {
                    Some((dd, i)) if *dd == below => mat.set(*i, j, c.clone()),
                    _ => {
                        return Err(SftError::Grading(format!(
                            "boundary of {} leaves the slice or the degree: {}",
                            m.display(table),
                            tm.display(table)
                        )))
                    }
                }
            }
        }
        matrices.insert(d.clone(), mat);
    }
    Ok((basis, index, matrices))
}

/// All monomials of weight at most `weight_cap` with their boundary matrices; `∂² = 0` is enforced.
pub fn build_slice(dga: &DGASpec, weight_cap: u32, degrees: Option<(Scalar, Scalar)>) -> Result<ChainComplexSlice> {
    let t = &dga.table;
    for (&g, img) in &dga.boundary {
        let w = Monomial::var(g).weight(t);
        if let Some(m) = img.terms().keys().find(|m| m.weight(t) > w) {
            return Err(SftError::Filtration(format!("boundary of {} raises weight: {}", t.name(g), m.display(t))));
        }
    }
    let gens = dga.all_generators();
    let monomials = enumerate(t, &gens, weight_cap as i64)?;
    for m in &monomials {
        let e = SuperElement::from_monomial(t, m.clone(), Scalar::one());
        let dd = dga.differential(&dga.differential(&e));
        if !dd.is_zero() {
            return Err(SftError::Soundness(format!("∂² does not vanish on {}: {}", m.display(t), dd)));
        }
    }
    let (basis, index, matrices) =
        assemble(t, monomials, |m| Ok(dga.differential(&SuperElement::from_monomial(t, m.clone(), Scalar::one()))))?;
    Ok(ChainComplexSlice {
        table: t.clone(),
        basis,
        matrices,
        weight_cap: Some(weight_cap),
        degree_window: degrees,
        index,
        images: dga.boundary.clone(),
        linear: false,
    })
}

/// Linear complex spanned by the generators alone, with every `z` set to 1.
pub fn build_linear_slice(dga: &DGASpec) -> Result<ChainComplexSlice> {
    let t = &dga.table;
    let mut images = BTreeMap::new();
    for (&g, img) in &dga.boundary {
        let mut lin = SuperElement::zero(t);
        for (m, c) in img.terms() {
            let (_, kept, _) = m.split(t, |v| t.kind(v) == VarKind::Z);
            if kept.factors().len() != 1 || kept.factors()[0].1 != 1 || !dga.generators.contains(&kept.factors()[0].0) {
                return Err(SftError::Structural(format!("boundary of {} is not linear in the generators", t.name(g))));
            }
            lin.add_term(kept, c.clone());
        }
        images.insert(g, lin);
    }
    let monomials: Vec<Monomial> = dga.generators.iter().map(|&g| Monomial::var(g)).collect();
    let (basis, index, matrices) = assemble(t, monomials, |m| {
        Ok(images.get(&m.factors()[0].0).cloned().unwrap_or_else(|| SuperElement::zero(t)))
    })?;
    let slice = ChainComplexSlice {
        table: t.clone(),
        basis,
        matrices,
        weight_cap: None,
        degree_window: None,
        index,
        images,
        linear: true,
    };
    for (d, m) in &slice.matrices {
        if let Some(below) = slice.matrices.get(&(d - Scalar::one())) {
            if !below.mul(m).is_zero() {
                return Err(SftError::Soundness(format!("∂² does not vanish in degree {d}")));
            }
        }
    }
    Ok(slice)
}

impl ChainComplexSlice {
    fn in_window(&self, d: &Scalar) -> bool {
        self.degree_window.as_ref().map_or(true, |(lo, hi)| lo <= d && d <= hi)
    }

    fn rank_out(&self, d: &Scalar) -> usize {
        self.matrices.get(d).map_or(0, Matrix::rank)
    }

    /// `dim ker ∂_d - rank ∂_{d+1}` for every degree of the window.
    pub fn betti(&self) -> BTreeMap<Scalar, usize> {
        self.basis
            .iter()
            .filter(|(d, _)| self.in_window(d))
            .map(|(d, ms)| (d.clone(), ms.len() - self.rank_out(d) - self.rank_out(&(d + Scalar::one()))))
            .collect()
    }

    pub fn dimensions(&self) -> BTreeMap<Scalar, usize> {
        self.basis.iter().filter(|(d, _)| self.in_window(d)).map(|(d, ms)| (d.clone(), ms.len())).collect()
    }

    fn check_support(&self, c: &SuperElement) -> Result<()> {
        if let Some(m) = c.terms().keys().find(|m| !self.index.contains_key(*m)) {
            return Err(SftError::Range(format!("{} is outside the slice", m.display(&self.table))));
        }
        Ok(())
    }

    fn boundary(&self, c: &SuperElement) -> SuperElement {
        if self.linear {
            let mut out = SuperElement::zero(&self.table);
            for (m, k) in c.terms() {
                if let Some(img) = self.images.get(&m.factors()[0].0) {
                    out += &img.scale(k);
                }
            }
            out
        } else {
            apply_derivation(&self.images, c)
        }
    }

    pub fn is_cycle(&self, c: &SuperElement) -> Result<bool> {
        self.check_support(c)?;
        Ok(self.boundary(c).is_zero())
    }

    /// Some `b` in the slice with `∂b = c`, if there is one.
    pub fn find_boundary_witness(&self, c: &SuperElement) -> Result<Option<SuperElement>> {
        self.check_support(c)?;
        let mut by_degree: BTreeMap<Scalar, Vec<Scalar>> = BTreeMap::new();
        for (m, k) in c.terms() {
            let (d, i) = &self.index[m];
            let len = self.basis[d].len();
            by_degree.entry(d.clone()).or_insert_with(|| vec![Scalar::zero(); len])[*i] = k.clone();
        }
        let mut witness = SuperElement::zero(&self.table);
        for (d, rhs) in by_degree {
            let up = &d + Scalar::one();
            let Some(mat) = self.matrices.get(&up) else { return Ok(None) };
            let Some(x) = mat.solve(&rhs) else { return Ok(None) };
            for (j, v) in x.into_iter().enumerate() {
                if !v.is_zero() {
                    witness.add_term(self.basis[&up][j].clone(), v);
                }
            }
        }
        Ok(Some(witness))
    }
}
