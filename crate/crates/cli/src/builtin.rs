use std::path::Path;

use anyhow::{bail, Context};
use sft_core::gw_recursion::{bootstrap, orders_for};
use sft_core::homology::DGASpec;
use sft_core::model_file::{LoadedModel, ModelFile};
use sft_core::models::{
    circle_hamiltonian, ellipsoid, floer_complex, lens_hamiltonian, prequantization_h1, sphere3_dga, sphere3_hamiltonian,
    BottLayout, FloerComplexSpec,
};
use sft_core::sft_algebras::Hamiltonian;
use sft_core::{rat, SftError, SuperElement, TruncationPolicy};

/// A model resolved from a builtin name or a model file.
pub enum Model {
    Hamiltonian { name: String, h: Hamiltonian, policy: TruncationPolicy },
    Sphere3 { layout: BottLayout, dga: DGASpec },
    Floer { name: String, spec: FloerComplexSpec },
    File { name: String, model: LoadedModel },
}

fn parse_suffix(name: &str, prefix: &str) -> anyhow::Result<Option<i64>> {
    match name.strip_prefix(prefix) {
        None => Ok(None),
        Some(rest) => Ok(Some(rest.parse().map_err(|_| SftError::Validation(format!("bad model name {name:?}")))?)),
    }
}

/// `circle`, `sphere3`, `lens:<l>`, `ellipsoid:<n>`, `stage:<n>`, or a path to a model file.
pub fn resolve(name: &str, weight: u32, for_homology: bool) -> anyhow::Result<Model> {
    let policy = TruncationPolicy::weight(weight);
    if name == "circle" {
        return Ok(Model::Hamiltonian { name: name.into(), h: circle_hamiltonian(weight.max(1))?, policy });
    }
    if name == "sphere3" {
        if for_homology {
            let (layout, dga) = sphere3_dga(weight.max(1))?;
            return Ok(Model::Sphere3 { layout, dga });
        }
        return Ok(Model::Hamiltonian { name: name.into(), h: sphere3_hamiltonian(weight)?.1, policy });
    }
    if let Some(l) = parse_suffix(name, "lens:")? {
        return Ok(Model::Hamiltonian { name: name.into(), h: lens_hamiltonian(l, weight)?.1, policy });
    }
    if let Some(n) = parse_suffix(name, "ellipsoid:")? {
        if n < 1 {
            bail!(SftError::Validation(format!("ellipsoid dimension must be positive, got {n}")));
        }
        return Ok(Model::Floer { name: name.into(), spec: ellipsoid(n, weight.max(1) as i64) });
    }
    if let Some(n) = parse_suffix(name, "stage:")? {
        // prequantization Hamiltonian over the bootstrapped CP^{n-1}
        if !(2..=3).contains(&n) {
            bail!(SftError::Validation(format!("stage:{n} is not available, use 2 or 3")));
        }
        let orders = orders_for(n as u32, weight.max(1))?;
        let stages = bootstrap(&orders[..orders.len() - 1])?;
        let base = sft_core::models::BaseGWPotential { n: n as i32, body: stages.last().expect("one stage").f_cpn.clone() };
        let layout = BottLayout::new(n as i32, 1, weight)?;
        let h = prequantization_h1(&base, &layout, weight)?;
        return Ok(Model::Hamiltonian { name: name.into(), h, policy });
    }
    let path = Path::new(name);
    if !path.exists() {
        bail!(SftError::Validation(format!("unknown model {name:?}: not a builtin name or an existing file")));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    let file = ModelFile::from_json(&text)?;
    if file.model != "custom" {
        let w = file.truncation.weight.unwrap_or(weight);
        return resolve(&file.model, w, for_homology);
    }
    Ok(Model::File { name: name.into(), model: file.load()? })
}

/// `q_{1,2} - q_{1,0}^2 / 2` and its two summands, the cycle checks of the 3-sphere.
pub fn sphere3_cycles(layout: &BottLayout) -> Vec<(String, SuperElement)> {
    let t = &layout.table;
    let q0 = SuperElement::var(t, layout.q(1, 0));
    let q2 = SuperElement::var(t, layout.q(1, 1));
    vec![("g1".into(), &q2 - &(&q0 * &q0).scale(&rat(1, 2))), ("q1_0".into(), q0), ("q1_2".into(), q2)]
}

pub fn floer_dga(spec: &FloerComplexSpec) -> anyhow::Result<DGASpec> {
    Ok(floer_complex(spec)?)
}
