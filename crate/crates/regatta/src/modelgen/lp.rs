//! LP-format text export and a matching parser.
//!
//! The exported text is deterministic: the same model always yields the
//! same bytes. Model metadata needed to reconstruct the instance (name,
//! formulation, parameters) rides along in `\`-comment headers, which the
//! parser requires.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{
    Constraint, Formulation, LinTerm, ModelSpec, QuadTerm, Relation, VarKind, Variable,
};
use crate::core::{CoreError, LeagueParams};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("constraint {0} is quadratic; pick the plain lp format")]
    QuadraticNotSupported(String),
    #[error("missing header comment: \\ {0} = ...")]
    MissingHeader(&'static str),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unknown formulation {0:?}")]
    UnknownFormulation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// Full LP text; quadratic terms go into `[ ... ]` brackets.
    Lp,
    /// LP text that refuses quadratic models instead of emitting brackets.
    LpLinear,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<ExportFormat> {
        match s {
            "lp" => Some(ExportFormat::Lp),
            "lp-linear" | "lp_linear" => Some(ExportFormat::LpLinear),
            _ => None,
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn push_lin_term(out: &mut String, t: &LinTerm) {
    let mag = t.coeff.abs();
    out.push_str(if t.coeff < 0.0 { " - " } else { " + " });
    if (mag - 1.0).abs() > f64::EPSILON {
        out.push_str(&fmt_num(mag));
        out.push(' ');
    }
    out.push_str(&t.var);
}

fn push_quad_term(out: &mut String, t: &QuadTerm) {
    let mag = t.coeff.abs();
    out.push_str(if t.coeff < 0.0 { " - " } else { " + " });
    if (mag - 1.0).abs() > f64::EPSILON {
        out.push_str(&fmt_num(mag));
        out.push(' ');
    }
    out.push_str(&t.left);
    out.push_str(" * ");
    out.push_str(&t.right);
}

fn push_constraint(out: &mut String, c: &Constraint) {
    out.push(' ');
    out.push_str(&c.name);
    out.push(':');
    if !c.quad.is_empty() {
        out.push_str(" [");
        for t in &c.quad {
            push_quad_term(out, t);
        }
        out.push_str(" ]");
    }
    for t in &c.lin {
        push_lin_term(out, t);
    }
    out.push(' ');
    out.push_str(c.relation.symbol());
    out.push(' ');
    out.push_str(&fmt_num(c.rhs));
    out.push('\n');
}

/// Serializes a model to LP text. Byte-identical across calls.
pub fn export_model(model: &ModelSpec, format: ExportFormat) -> Result<String, LpError> {
    if format == ExportFormat::LpLinear {
        if let Some(c) = model.constraints.iter().find(|c| !c.quad.is_empty()) {
            return Err(LpError::QuadraticNotSupported(c.name.clone()));
        }
    }
    let mut out = String::new();
    out.push_str(&format!("\\ model = {}\n", model.name));
    out.push_str(&format!("\\ formulation = {}\n", model.formulation));
    out.push_str(&format!("\\ teams = {}\n", model.params.n_teams()));
    out.push_str(&format!("\\ flights = {}\n", model.params.n_flights()));
    out.push_str(&format!("\\ inrace = {}\n", model.params.n_inrace()));
    out.push_str("Minimize\n obj:");
    for t in &model.objective {
        push_lin_term(&mut out, t);
    }
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        push_constraint(&mut out, c);
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        match v.kind {
            VarKind::Binary => {
                // Binaries default to [0, 1]; only fixings need a line.
                if v.lower == v.upper {
                    out.push_str(&format!(" {} = {}\n", v.name, fmt_num(v.lower)));
                }
            }
            _ => {
                if v.lower == v.upper {
                    out.push_str(&format!(" {} = {}\n", v.name, fmt_num(v.lower)));
                } else {
                    out.push_str(&format!(
                        " {} <= {} <= {}\n",
                        fmt_num(v.lower),
                        v.name,
                        fmt_num(v.upper)
                    ));
                }
            }
        }
    }
    let names = |kind: VarKind| -> Vec<&str> {
        model
            .variables
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect()
    };
    let binaries = names(VarKind::Binary);
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(10) {
            out.push(' ');
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    let generals = names(VarKind::Integer);
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for chunk in generals.chunks(10) {
            out.push(' ');
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
    Done,
}

/// Parses LP text produced by [`export_model`] (plus minor whitespace
/// variations) back into a model.
pub fn parse_model(text: &str) -> Result<ModelSpec, LpError> {
    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    let mut section = Section::Preamble;
    let mut objective: Vec<LinTerm> = Vec::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut pending: Option<(String, Vec<String>)> = None;
    let mut binaries: Vec<String> = Vec::new();
    let mut generals: Vec<String> = Vec::new();
    let mut bounds: Vec<(usize, String)> = Vec::new();
    let mut obj_tokens: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            if let Some((k, v)) = rest.split_once('=') {
                headers.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let lower = line.to_ascii_lowercase();
        let new_section = match lower.as_str() {
            "minimize" | "min" => Some(Section::Objective),
            "subject to" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "binaries" | "binary" => Some(Section::Binaries),
            "generals" | "general" => Some(Section::Generals),
            "end" => Some(Section::Done),
            "maximize" | "max" => {
                return Err(LpError::Malformed {
                    line: line_no,
                    msg: "only minimization models are supported".into(),
                })
            }
            _ => None,
        };
        if let Some(s) = new_section {
            flush_pending(&mut pending, &mut constraints, line_no)?;
            section = s;
            continue;
        }
        match section {
            Section::Preamble | Section::Done => {
                return Err(LpError::Malformed {
                    line: line_no,
                    msg: format!("unexpected content {line:?}"),
                })
            }
            Section::Objective => {
                let body = match line.split_once(':') {
                    Some((_, rest)) => rest,
                    None => line,
                };
                obj_tokens.extend(tokenize(body));
            }
            Section::Constraints => {
                if let Some((name, rest)) = line.split_once(':') {
                    flush_pending(&mut pending, &mut constraints, line_no)?;
                    pending = Some((name.trim().to_string(), tokenize(rest)));
                } else if let Some((_, toks)) = pending.as_mut() {
                    toks.extend(tokenize(line));
                } else {
                    return Err(LpError::Malformed {
                        line: line_no,
                        msg: "constraint body before any constraint name".into(),
                    });
                }
            }
            Section::Bounds => bounds.push((line_no, line.to_string())),
            Section::Binaries => binaries.extend(line.split_whitespace().map(String::from)),
            Section::Generals => generals.extend(line.split_whitespace().map(String::from)),
        }
    }
    flush_pending(&mut pending, &mut constraints, text.lines().count())?;

    let (lin, quad, relation, rhs) = parse_body(&obj_tokens, 0)?;
    if relation.is_some() || rhs.is_some() || !quad.is_empty() {
        return Err(LpError::Malformed { line: 0, msg: "malformed objective".into() });
    }
    objective.extend(lin);

    let name = headers.get("model").cloned().ok_or(LpError::MissingHeader("model"))?;
    let formulation_s =
        headers.get("formulation").ok_or(LpError::MissingHeader("formulation"))?;
    let formulation = Formulation::parse(formulation_s)
        .ok_or_else(|| LpError::UnknownFormulation(formulation_s.clone()))?;
    let teams = header_num(&headers, "teams")?;
    let flights = header_num(&headers, "flights")?;
    let inrace = header_num(&headers, "inrace")?;
    let params = LeagueParams::new(teams, flights, inrace)?;

    // Variables: binaries first, then generals, then any continuous names
    // left over from bounds or constraint bodies.
    let mut variables: Vec<Variable> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let add = |variables: &mut Vec<Variable>,
                   index: &mut BTreeMap<String, usize>,
                   name: &str,
                   kind: VarKind| {
        if !index.contains_key(name) {
            index.insert(name.to_string(), variables.len());
            let upper = match kind {
                VarKind::Binary | VarKind::Continuous => 1.0,
                VarKind::Integer => f64::INFINITY,
            };
            variables.push(Variable { name: name.to_string(), kind, lower: 0.0, upper });
        }
    };
    for n in &binaries {
        add(&mut variables, &mut index, n, VarKind::Binary);
    }
    for n in &generals {
        add(&mut variables, &mut index, n, VarKind::Integer);
    }
    for (_, line) in &bounds {
        for tok in tokenize(line) {
            if is_name(&tok) {
                add(&mut variables, &mut index, &tok, VarKind::Continuous);
            }
        }
    }
    let mentioned: Vec<String> = constraints
        .iter()
        .flat_map(|c| {
            c.lin
                .iter()
                .map(|t| t.var.clone())
                .chain(c.quad.iter().flat_map(|q| [q.left.clone(), q.right.clone()]))
        })
        .chain(objective.iter().map(|t| t.var.clone()))
        .collect();
    for n in &mentioned {
        add(&mut variables, &mut index, n, VarKind::Continuous);
    }
    for (line_no, line) in &bounds {
        apply_bound(&mut variables, &index, line, *line_no)?;
    }

    Ok(ModelSpec { name, formulation, params, variables, constraints, objective })
}

fn header_num(headers: &BTreeMap<String, String>, key: &'static str) -> Result<u32, LpError> {
    headers
        .get(key)
        .ok_or(LpError::MissingHeader(key))?
        .parse()
        .map_err(|_| LpError::Malformed { line: 0, msg: format!("header {key} is not a number") })
}

fn flush_pending(
    pending: &mut Option<(String, Vec<String>)>,
    constraints: &mut Vec<Constraint>,
    line_no: usize,
) -> Result<(), LpError> {
    if let Some((name, tokens)) = pending.take() {
        let (lin, quad, relation, rhs) = parse_body(&tokens, line_no)?;
        let relation = relation.ok_or_else(|| LpError::Malformed {
            line: line_no,
            msg: format!("constraint {name} has no relation"),
        })?;
        let rhs = rhs.ok_or_else(|| LpError::Malformed {
            line: line_no,
            msg: format!("constraint {name} has no right-hand side"),
        })?;
        constraints.push(Constraint { name, lin, quad, relation, rhs });
    }
    Ok(())
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '+' | '-' | '[' | ']' | '*' | '<' | '>' | '=' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                // Merge <= and >= into single tokens.
                if ch == '=' {
                    match out.last().map(String::as_str) {
                        Some("<") | Some(">") => {
                            let prev = out.pop().unwrap();
                            out.push(format!("{prev}="));
                            continue;
                        }
                        _ => {}
                    }
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn is_name(tok: &str) -> bool {
    tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

type Body = (Vec<LinTerm>, Vec<QuadTerm>, Option<Relation>, Option<f64>);

fn parse_body(tokens: &[String], line_no: usize) -> Result<Body, LpError> {
    let err = |msg: String| LpError::Malformed { line: line_no, msg };
    let mut lin = Vec::new();
    let mut quad = Vec::new();
    let mut relation = None;
    let mut rhs = None;
    let mut sign = 1.0;
    let mut coeff: Option<f64> = None;
    let mut in_bracket = false;
    let mut left: Option<String> = None;
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i].as_str();
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "[" => in_bracket = true,
            "]" => {
                if left.is_some() {
                    return Err(err("dangling product inside brackets".into()));
                }
                in_bracket = false;
            }
            "*" => {
                // Handled when the right factor arrives.
            }
            "<=" | ">=" | "=" | "<" | ">" => {
                relation = Some(match tok {
                    "<=" | "<" => Relation::Le,
                    ">=" | ">" => Relation::Ge,
                    _ => Relation::Eq,
                });
                sign = 1.0;
                coeff = None;
            }
            t => {
                if let Ok(num) = t.parse::<f64>() {
                    if relation.is_some() {
                        rhs = Some(sign * num);
                    } else {
                        coeff = Some(num);
                    }
                } else if !is_name(t) {
                    return Err(err(format!("unexpected token {t:?}")));
                } else if relation.is_some() {
                    return Err(err("variable on the right-hand side".into()));
                } else if in_bracket {
                    match left.take() {
                        None => {
                            // First factor; `* name` must follow.
                            if tokens.get(i + 1).map(String::as_str) != Some("*") {
                                return Err(err(format!("expected product after {t:?}")));
                            }
                            left = Some(t.to_string());
                            coeff = Some(sign * coeff.take().unwrap_or(1.0));
                        }
                        Some(l) => {
                            quad.push(QuadTerm {
                                coeff: coeff.take().unwrap_or(1.0),
                                left: l,
                                right: t.to_string(),
                            });
                            sign = 1.0;
                        }
                    }
                } else {
                    lin.push(LinTerm { coeff: sign * coeff.take().unwrap_or(1.0), var: t.to_string() });
                    sign = 1.0;
                }
            }
        }
        i += 1;
    }
    if rhs.is_none() && relation.is_some() {
        return Err(err("relation without right-hand side".into()));
    }
    Ok((lin, quad, relation, rhs))
}

fn apply_bound(
    variables: &mut [Variable],
    index: &BTreeMap<String, usize>,
    line: &str,
    line_no: usize,
) -> Result<(), LpError> {
    let err = |msg: String| LpError::Malformed { line: line_no, msg };
    let tokens = tokenize(line);
    // Forms: `lo <= name <= hi` | `name <= hi` | `name >= lo` | `name = v`.
    let find = |name: &str| -> Result<usize, LpError> {
        index.get(name).copied().ok_or_else(|| {
            LpError::Malformed { line: line_no, msg: format!("bound names unknown variable {name:?}") }
        })
    };
    let num = |tok: &str| -> Result<f64, LpError> {
        tok.parse().map_err(|_| LpError::Malformed {
            line: line_no,
            msg: format!("expected a number, got {tok:?}"),
        })
    };
    let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
    match toks.as_slice() {
        [lo, "<=", name, "<=", hi] => {
            let i = find(name)?;
            variables[i].lower = num(lo)?;
            variables[i].upper = num(hi)?;
        }
        [name, "<=", hi] => {
            let i = find(name)?;
            variables[i].upper = num(hi)?;
        }
        [name, ">=", lo] => {
            let i = find(name)?;
            variables[i].lower = num(lo)?;
        }
        [name, "=", v] => {
            let i = find(name)?;
            let v = num(v)?;
            variables[i].lower = v;
            variables[i].upper = v;
        }
        _ => return Err(err(format!("unrecognized bound line {line:?}"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelgen::{gen_bqp, gen_ilp_flight, gen_ilp_race, GenOptions};

    fn params(t: u32, f: u32, r: u32) -> LeagueParams {
        LeagueParams::new(t, f, r).unwrap()
    }

    fn semantic(model: &ModelSpec) -> (
        BTreeMap<String, (VarKind, String, String)>,
        Vec<(String, Vec<(String, String)>, Vec<(String, String, String)>, Relation, String)>,
        Vec<(String, String)>,
    ) {
        let vars = model
            .variables
            .iter()
            .map(|v| {
                (v.name.clone(), (v.kind, format!("{}", v.lower), format!("{}", v.upper)))
            })
            .collect();
        let cons = model
            .constraints
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    c.lin.iter().map(|t| (format!("{}", t.coeff), t.var.clone())).collect(),
                    c.quad
                        .iter()
                        .map(|q| (format!("{}", q.coeff), q.left.clone(), q.right.clone()))
                        .collect(),
                    c.relation,
                    format!("{}", c.rhs),
                )
            })
            .collect();
        let obj = model
            .objective
            .iter()
            .map(|t| (format!("{}", t.coeff), t.var.clone()))
            .collect();
        (vars, cons, obj)
    }

    #[test]
    fn export_is_deterministic() {
        let m = gen_ilp_race(&params(6, 3, 3), &GenOptions::default()).unwrap();
        let a = export_model(&m, ExportFormat::Lp).unwrap();
        let b = export_model(&m, ExportFormat::Lp).unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with("End\n"));
    }

    #[test]
    fn lp_linear_refuses_quadratic() {
        let m = gen_bqp(&params(4, 2, 2), &GenOptions::default()).unwrap();
        assert!(matches!(
            export_model(&m, ExportFormat::LpLinear),
            Err(LpError::QuadraticNotSupported(_))
        ));
        let m = gen_ilp_race(&params(4, 2, 2), &GenOptions::default()).unwrap();
        assert!(export_model(&m, ExportFormat::LpLinear).is_ok());
    }

    #[test]
    fn round_trip_smallest_bqp() {
        let m = gen_bqp(&params(2, 1, 2), &GenOptions::default()).unwrap();
        let text = export_model(&m, ExportFormat::Lp).unwrap();
        let parsed = parse_model(&text).unwrap();
        assert_eq!(parsed.name, m.name);
        assert_eq!(parsed.formulation, m.formulation);
        assert_eq!(parsed.params, m.params);
        assert_eq!(semantic(&parsed), semantic(&m));
    }

    #[test]
    fn round_trip_all_formulations() {
        let p = params(6, 3, 3);
        for m in [
            gen_bqp(&p, &GenOptions::default()).unwrap(),
            gen_ilp_race(&p, &GenOptions::default()).unwrap(),
            gen_ilp_flight(&p, &GenOptions::default()).unwrap(),
        ] {
            let text = export_model(&m, ExportFormat::Lp).unwrap();
            let parsed = parse_model(&text).unwrap();
            assert_eq!(semantic(&parsed), semantic(&m), "round trip for {}", m.name);
            // Parse of a re-export is stable.
            let text2 = export_model(&parsed, ExportFormat::Lp).unwrap();
            assert_eq!(semantic(&parse_model(&text2).unwrap()), semantic(&m));
        }
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(parse_model("").is_err());
        assert!(matches!(
            parse_model("\\ model = m\nMinimize\n obj: b\nEnd\n"),
            Err(LpError::MissingHeader("formulation"))
        ));
        let bad = "\\ model = m\n\\ formulation = bqp\n\\ teams = 4\n\\ flights = 2\n\\ inrace = 2\nMaximize\n obj: b\nEnd\n";
        assert!(matches!(parse_model(bad), Err(LpError::Malformed { .. })));
    }

    #[test]
    fn header_metadata_present() {
        let m = gen_ilp_flight(&params(4, 1, 2), &GenOptions::default()).unwrap();
        let text = export_model(&m, ExportFormat::Lp).unwrap();
        assert!(text.contains("\\ formulation = ilp_flight\n"));
        assert!(text.contains("\\ teams = 4\n"));
    }
}
