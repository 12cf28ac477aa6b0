use std::collections::BTreeMap;

use anyhow::bail;
use serde_json::{json, Value};
use sft_core::grading::{
    bott_degrees, brieskorn_ck, degrees_pq, ellipsoid_degrees, fractional_degree, is_bad_even_multiple, moduli_dim,
    parity_from_return_map, yau_generators, OrbitGradingData,
};
use sft_core::gw_recursion::{bootstrap, extract_nd, kontsevich_oracle, max_degree_for_order, orders_for};
use sft_core::homology::{build_linear_slice, build_slice, ChainComplexSlice, DGASpec};
use sft_core::model_file::term_rows;
use sft_core::models::{circle_rational_in, circle_satellite_in, divided_differential, satellite_table, verify_hamiltonian};
use sft_core::superpoly::{fmt_scalar, scalar_string};
use sft_core::{Scalar, SftError, SuperElement, TruncationPolicy, VarKind};

use crate::builtin::{floer_dga, resolve, sphere3_cycles, Model};

/// What a command produced: a JSON report, its plain-text rendering, and whether every check held.
pub struct Outcome {
    pub report: Value,
    pub text: String,
    pub passed: bool,
    pub csv: Option<String>,
}

impl Outcome {
    fn ok(report: Value, text: String) -> Self {
        Outcome { report, text, passed: true, csv: None }
    }
}

fn series(f: &SuperElement) -> Value {
    Value::Array(term_rows(f).into_iter().map(|(m, c)| json!({"monomial": m, "coeff": c})).collect())
}

fn series_text(f: &SuperElement) -> String {
    if f.is_zero() {
        return "  0\n".into();
    }
    f.terms().iter().map(|(m, c)| format!("  {:>12}  {}\n", fmt_scalar(c), m.display(f.table()))).collect()
}

fn witness(f: &SuperElement) -> Value {
    match f.terms().iter().next() {
        None => json!("zero"),
        Some((m, c)) => json!({"monomial": m.display(f.table()), "coeff": scalar_string(c), "terms": f.len()}),
    }
}

fn dga_checks(dga: &DGASpec, policy: &TruncationPolicy) -> (Value, Value) {
    let t = &dga.table;
    let degree = match dga.degree_violations().first() {
        None => json!("pass"),
        Some(&g) => json!({"generator": t.name(g)}),
    };
    let mut dd = json!("pass");
    for &g in &dga.generators {
        let img = dga.differential(&dga.differential(&SuperElement::var(t, g))).truncate(policy);
        if !img.is_zero() {
            dd = json!({"generator": t.name(g), "value": img.to_string()});
            break;
        }
    }
    (degree, dd)
}

pub fn verify(model: &str, weight: u32) -> anyhow::Result<Outcome> {
    let (name, used, hh, degree, dd) = match resolve(model, weight, false)? {
        Model::Hamiltonian { name, h, policy } => {
            let r = verify_hamiltonian(&h, &policy)?;
            let degree = match r.degree_violations.first() {
                None => json!("pass"),
                Some(m) => json!({"monomial": m.display(h.body.table())}),
            };
            let dd = match &r.d_squared_witness {
                None => json!("pass"),
                Some((q, v)) => json!({"generator": h.body.table().name(*q), "value": v.to_string()}),
            };
            (name, policy.max_weight, witness(&r.hh_residual), degree, dd)
        }
        Model::Sphere3 { .. } => unreachable!("resolved for homology only"),
        Model::Floer { name, spec } => {
            let (degree, dd) = dga_checks(&floer_dga(&spec)?, &TruncationPolicy::none());
            (name, None, json!("not applicable"), degree, dd)
        }
        Model::File { name, model } => {
            if let Some(h) = &model.hamiltonian {
                let r = verify_hamiltonian(h, &model.policy)?;
                let degree = match r.degree_violations.first() {
                    None => json!("pass"),
                    Some(m) => json!({"monomial": m.display(&model.table)}),
                };
                let dd = match &r.d_squared_witness {
                    None => json!("pass"),
                    Some((q, v)) => json!({"generator": model.table.name(*q), "value": v.to_string()}),
                };
                (name, model.policy.max_weight, witness(&r.hh_residual), degree, dd)
            } else if let Some(dga) = &model.dga {
                let (degree, dd) = dga_checks(dga, &model.policy);
                (name, model.policy.max_weight, json!("not applicable"), degree, dd)
            } else if let Some(spec) = &model.floer {
                let (degree, dd) = dga_checks(&floer_dga(spec)?, &TruncationPolicy::none());
                (name, None, json!("not applicable"), degree, dd)
            } else {
                bail!(SftError::Validation("model file has nothing to verify".into()));
            }
        }
    };
    let good = |v: &Value| v == "zero" || v == "pass" || v == "not applicable";
    let passed = good(&hh) && good(&degree) && good(&dd);
    let text = format!("model {name}\n  hh_residual: {hh}\n  degree_check: {degree}\n  d_squared: {dd}\n  {}\n", if passed { "PASS" } else { "FAIL" });
    let report = json!({"model": name, "weight": used, "hh_residual": hh, "degree_check": degree, "d_squared": dd, "passed": passed});
    Ok(Outcome { report, text, passed, csv: None })
}

fn parse_degrees(s: &str) -> anyhow::Result<(Scalar, Scalar)> {
    let (a, b) = s.split_once("..").ok_or_else(|| SftError::Validation(format!("degree range {s:?} must look like a..b")))?;
    Ok((sft_core::superpoly::parse_scalar(a)?, sft_core::superpoly::parse_scalar(b)?))
}

fn table_rows(slice: &ChainComplexSlice, window: Option<&(Scalar, Scalar)>) -> Vec<(Scalar, usize, usize)> {
    let dims = slice.dimensions();
    slice
        .betti()
        .into_iter()
        .filter(|(d, _)| window.map_or(true, |(lo, hi)| lo <= d && d <= hi))
        .map(|(d, b)| {
            let n = dims[&d];
            (d, n, b)
        })
        .collect()
}

pub fn homology(model: &str, weight: u32, degrees: Option<&str>, tau_zero: bool) -> anyhow::Result<Outcome> {
    let window = degrees.map(parse_degrees).transpose()?;
    let (name, slice, cycles) = match resolve(model, weight, true)? {
        Model::Sphere3 { layout, dga } => {
            let dga = if tau_zero { dga.quotient(&[layout.table.var("tau")]) } else { dga };
            let cycles = if tau_zero { vec![] } else { sphere3_cycles(&layout) };
            (model.to_string(), build_slice(&dga, weight, window.clone())?, cycles)
        }
        Model::Floer { name, spec } => (name, build_linear_slice(&floer_dga(&spec)?)?, vec![]),
        Model::Hamiltonian { name, .. } => {
            bail!(SftError::Validation(format!("{name} has no differential algebra; use sphere3, ellipsoid:<n> or a model file")))
        }
        Model::File { name, model: m } => {
            let slice = if let Some(dga) = &m.dga {
                let dga = if tau_zero {
                    let taus: Vec<_> = dga.odd_params.iter().copied().filter(|&v| m.table.kind(v) == VarKind::Tau).collect();
                    dga.quotient(&taus)
                } else {
                    dga.clone()
                };
                build_slice(&dga, m.policy.max_weight.unwrap_or(weight), window.clone())?
            } else if let Some(spec) = &m.floer {
                build_linear_slice(&floer_dga(spec)?)?
            } else {
                bail!(SftError::Validation("model file has neither a differential nor floer counts".into()));
            };
            (name, slice, m.cycles.clone())
        }
    };
    let rows = table_rows(&slice, window.as_ref());
    let mut cycle_rows = Vec::new();
    let mut text = format!("model {name}\n  degree  dim  betti\n");
    for (d, n, b) in &rows {
        text.push_str(&format!("  {:>6}  {:>3}  {:>5}\n", fmt_scalar(d), n, b));
    }
    for (cname, c) in &cycles {
        let is_cycle = slice.is_cycle(c)?;
        let boundary = if is_cycle { slice.find_boundary_witness(c)?.is_some() } else { false };
        text.push_str(&format!("  {cname}: cycle={is_cycle} boundary={boundary}\n"));
        cycle_rows.push(json!({"name": cname, "is_cycle": is_cycle, "is_boundary": boundary}));
    }
    let table: Vec<Value> =
        rows.iter().map(|(d, n, b)| json!({"degree": scalar_string(d), "dimension": n, "betti": b})).collect();
    let report = json!({"model": name, "weight": slice.weight_cap, "tau_zero": tau_zero, "table": table, "cycles": cycle_rows});
    Ok(Outcome::ok(report, text))
}

pub fn gw(n: u32, order: u32, oracle: bool) -> anyhow::Result<Outcome> {
    if oracle && n != 2 {
        bail!(SftError::Validation("plane-curve counts come from the n = 2 stage".into()));
    }
    let orders = orders_for(n, order)?;
    let stages = bootstrap(&orders)?;
    let s = stages.last().expect("at least one stage");
    let mut text = format!("f_C{n} (t{}-order {order}):\n{}", 2 * n, series_text(&s.f_cn));
    text.push_str(&format!("f_CP{n}:\n{}", series_text(&s.f_cpn)));
    let mut report = json!({
        "n": n,
        "order": order,
        "stage_orders": orders,
        "weight": s.problem.weight,
        "f_cn": series(&s.f_cn),
        "f_cpn": series(&s.f_cpn),
        "degree_violations": s.degree_violations().len(),
    });
    let mut passed = s.degree_violations().is_empty();
    let mut csv = None;
    if n == 2 {
        let d_max = max_degree_for_order(order);
        let nd = extract_nd(&s.f_cpn, s.layout(), d_max, 3.min(order))?;
        let reference = kontsevich_oracle(d_max);
        let mut rows = Vec::new();
        let mut w = csv::Writer::from_writer(Vec::new());
        if oracle {
            w.write_record(["d", "n_d", "oracle", "agree"])?;
        } else {
            w.write_record(["d", "n_d"])?;
        }
        text.push_str("  d  N_d\n");
        for (d, v) in &nd {
            let mut row = json!({"d": d, "n_d": v.to_string()});
            if oracle {
                let agree = reference.get(d) == Some(v);
                passed &= agree;
                row["oracle"] = json!(reference[d].to_string());
                row["agree"] = json!(agree);
                w.write_record([d.to_string(), v.to_string(), reference[d].to_string(), agree.to_string()])?;
                text.push_str(&format!("  {d}  {v}  oracle {}  {}\n", reference[d], if agree { "agree" } else { "DISAGREE" }));
            } else {
                w.write_record([d.to_string(), v.to_string()])?;
                text.push_str(&format!("  {d}  {v}\n"));
            }
            rows.push(row);
        }
        report["nd_table"] = Value::Array(rows);
        csv = Some(String::from_utf8(w.into_inner()?)?);
    }
    report["passed"] = json!(passed);
    Ok(Outcome { report, text, passed, csv })
}

pub fn satellite(g: u32, n: u32, k_max: u32) -> anyhow::Result<Outcome> {
    if k_max == 0 {
        bail!(SftError::Validation("multiplicity cap must be positive".into()));
    }
    let t = satellite_table(k_max)?;
    let form = circle_satellite_in(&t, g, n)?;
    let mut report = json!({"g": g, "n": n, "k_max": k_max, "points": n + 1, "terms": series(&form)});
    let mut text = format!("h^({g},{}) of the circle, K = {k_max}\n{}", n + 1, series_text(&form));
    if g == 0 {
        let reference = divided_differential(&circle_rational_in(&t), n + 1)?;
        let agree = reference == form;
        report["matches_divided_differential"] = json!(agree);
        text.push_str(&format!("  matches δ^{}h/{}!: {agree}\n", n + 1, n + 1));
    }
    Ok(Outcome::ok(report, text))
}

pub enum GradingQuery {
    Dim { cz_plus: Vec<i64>, cz_minus: Vec<i64>, genus: i64, r: i64, c1: i64, n: i64 },
    Pq { cz: i64, n: i64 },
    Bott { k: i64, l: i64, c1: i64, delta_deg: i64 },
    Fractional { cz: i64, two_m: i64, l: i64 },
    Parity { n: i64, det_sign: i8, neg_eigen_mult: Option<u32>, multiple: Option<u32> },
    Brieskorn { p: i64, n: i64, k_max: i64 },
    Yau { n: i64, classes: Vec<(String, i64)>, i_max: i64 },
}

fn parse_class(s: &str) -> anyhow::Result<(String, i64)> {
    let (name, d) = s.split_once(':').ok_or_else(|| SftError::Validation(format!("class {s:?} must look like name:dim")))?;
    Ok((name.to_string(), d.parse().map_err(|_| SftError::Validation(format!("bad dimension in {s:?}")))?))
}

pub fn parse_classes(items: &[String]) -> anyhow::Result<Vec<(String, i64)>> {
    items.iter().map(|s| parse_class(s)).collect()
}

pub fn grading(q: GradingQuery) -> anyhow::Result<Outcome> {
    let (report, text) = match q {
        GradingQuery::Dim { cz_plus, cz_minus, genus, r, c1, n } => {
            let d = moduli_dim(&cz_plus, &cz_minus, genus, r, c1, n);
            (json!({"dimension": d}), format!("dim = {d}\n"))
        }
        GradingQuery::Pq { cz, n } => {
            let (p, q) = degrees_pq(cz, n);
            (json!({"deg_p": p, "deg_q": q}), format!("deg p = {p}, deg q = {q}\n"))
        }
        GradingQuery::Bott { k, l, c1, delta_deg } => {
            let b = bott_degrees(k, delta_deg, c1, l)?;
            let s = |x: &Scalar| scalar_string(x);
            (
                json!({"deg_p": s(&b.p), "deg_q": s(&b.q), "deg_t": s(&b.t), "deg_tau": s(&b.tau)}),
                format!("deg p = {}, deg q = {}, deg t = {}, deg tau = {}\n", fmt_scalar(&b.p), fmt_scalar(&b.q), fmt_scalar(&b.t), fmt_scalar(&b.tau)),
            )
        }
        GradingQuery::Fractional { cz, two_m, l } => {
            let d = fractional_degree(cz, two_m, l)?;
            (json!({"degree": scalar_string(&d)}), format!("degree = {}\n", fmt_scalar(&d)))
        }
        GradingQuery::Parity { n, det_sign, neg_eigen_mult, multiple } => {
            let p = parity_from_return_map(n, det_sign)?;
            let mut report = json!({"parity": if p.is_odd() { "odd" } else { "even" }});
            let mut text = format!("CZ parity: {}\n", if p.is_odd() { "odd" } else { "even" });
            if let (Some(m), Some(k)) = (neg_eigen_mult, multiple) {
                let data = OrbitGradingData { cz: 0, multiplicity: 1, return_map_neg_eigen_mult: m, n };
                let bad = is_bad_even_multiple(&data, k);
                report["bad"] = json!(bad);
                text.push_str(&format!("{k}-fold cover bad: {bad}\n"));
            }
            (report, text)
        }
        GradingQuery::Brieskorn { p, n, k_max } => {
            let mut rows = Vec::new();
            let mut text = String::from("  k  c_k  witnesses\n");
            for k in 0..=k_max {
                let v = brieskorn_ck(p, n, k)?;
                text.push_str(&format!("  {k}  {}  {:?}{}\n", v.c_k, v.witnesses, if v.collision { "  collision" } else { "" }));
                rows.push(serde_json::to_value(&v)?);
            }
            (json!({"p": p, "n": n, "table": rows}), text)
        }
        GradingQuery::Yau { n, classes, i_max } => {
            let gens = yau_generators(n, &classes, i_max)?;
            let mut text = String::new();
            let rows: Vec<Value> = gens
                .iter()
                .map(|(name, d)| {
                    text.push_str(&format!("  {name}  {d}\n"));
                    json!({"generator": name, "degree": d})
                })
                .collect();
            let mut report = json!({"n": n, "generators": rows});
            if classes.len() == 1 && classes[0].1 == 0 {
                let ball = ellipsoid_degrees(n, i_max);
                let agree = gens.iter().map(|g| g.1).collect::<Vec<_>>() == ball;
                report["ellipsoid_agrees"] = json!(agree);
                text.push_str(&format!("  ellipsoid cross-check: {agree}\n"));
            }
            (report, text)
        }
    };
    Ok(Outcome::ok(report, text))
}

/// Exit code for an error: 3 for mathematical failures, 2 for everything else.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<SftError>() {
        Some(SftError::Soundness(_) | SftError::Divergence(_) | SftError::Filtration(_)) => 3,
        _ => 2,
    }
}

/// Rebuilds every object with keys inserted in sorted order.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, canonical(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}
