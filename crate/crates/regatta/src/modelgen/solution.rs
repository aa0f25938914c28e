//! Solution files: encoding plans as variable assignments, checking
//! assignments against a model, and reconstructing plans from solver
//! output.
//!
//! The text format is one `name value` pair per line; `#` and `\` start
//! comment lines. Values within `TOLERANCE` of an integer count as that
//! integer.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{x_name, y_name, z_name, Formulation, ModelSpec, VarKind};
use crate::core::{LeagueParams, TournamentPlan};

pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("line {line}: expected 'name value'")]
    BadLine { line: usize },
    #[error("variable {0} is missing from the solution")]
    MissingVariable(String),
    #[error("binary variable {name} has fractional value {value}")]
    FractionalBinary { name: String, value: f64 },
    #[error("race {race} has {found} teams, expected {expected}")]
    RaceSize { race: u32, found: usize, expected: u32 },
    #[error("team {team} is assigned to {count} races in flight {flight}, expected 1")]
    TeamAssignment { team: u32, flight: u32, count: usize },
    #[error("flight {flight}: meeting indicators do not split the teams into races of {expected}")]
    InconsistentClique { flight: u32, expected: u32 },
    #[error(
        "reported bounds a={a}, b={b} conflict with the plan's counts \
         (lambda_min={lambda_min}, lambda_max={lambda_max})"
    )]
    BoundsMismatch { a: i64, b: i64, lambda_min: u32, lambda_max: u32 },
}

/// What a solution file yields: a full plan when the structural variables
/// are integral, otherwise just the relaxation's objective bounds.
#[derive(Debug, Clone)]
pub enum ImportOutcome {
    Plan(TournamentPlan),
    BoundsOnly { a: f64, b: f64 },
}

/// Parses `name value` lines.
pub fn parse_solution_text(text: &str) -> Result<BTreeMap<String, f64>, SolutionError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (name, value) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(v), None) => (n, v),
            _ => return Err(SolutionError::BadLine { line: idx + 1 }),
        };
        let value: f64 =
            value.parse().map_err(|_| SolutionError::BadLine { line: idx + 1 })?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

/// Serializes an assignment in the same `name value` format.
pub fn format_solution(values: &BTreeMap<String, f64>) -> String {
    let mut out = String::new();
    for (name, value) in values {
        if value.fract() == 0.0 && value.abs() < 1e15 {
            out.push_str(&format!("{name} {}\n", *value as i64));
        } else {
            out.push_str(&format!("{name} {value}\n"));
        }
    }
    out
}

/// The full variable assignment a plan induces in the given formulation,
/// including the tight sandwich bounds `a` and `b`.
pub fn encode_plan(plan: &TournamentPlan, formulation: Formulation) -> BTreeMap<String, f64> {
    let params = plan.params();
    let t = params.n_teams();
    let inflight = params.race_slots();
    let mut values = BTreeMap::new();
    match formulation {
        Formulation::Bqp | Formulation::IlpRace => {
            for (row_idx, row) in plan.grid().iter().enumerate() {
                let i = row_idx as u32 + 1;
                for m in 1..=inflight {
                    let j = (i - 1) * inflight + m;
                    for k in 1..=t {
                        let on = row[(k - 1) as usize] == m;
                        values.insert(x_name(j, k), f64::from(u8::from(on)));
                    }
                }
            }
            if formulation == Formulation::IlpRace {
                for (row_idx, row) in plan.grid().iter().enumerate() {
                    let i = row_idx as u32 + 1;
                    for m in 1..=inflight {
                        let j = (i - 1) * inflight + m;
                        for k in 2..=t {
                            for l in 1..k {
                                let on = row[(k - 1) as usize] == m && row[(l - 1) as usize] == m;
                                values.insert(y_name(j, k, l), f64::from(u8::from(on)));
                            }
                        }
                    }
                }
            }
        }
        Formulation::IlpFlight => {
            for (row_idx, row) in plan.grid().iter().enumerate() {
                let i = row_idx as u32 + 1;
                for k in 2..=t {
                    for l in 1..k {
                        let rk = row[(k - 1) as usize];
                        let on = rk != 0 && rk == row[(l - 1) as usize];
                        values.insert(z_name(i, k, l), f64::from(u8::from(on)));
                    }
                }
            }
        }
    }
    let u = plan.utility();
    values.insert("a".to_string(), f64::from(u.lambda_min));
    values.insert("b".to_string(), f64::from(u.lambda_max));
    values
}

/// Evaluates every constraint and variable bound of `model` under `values`
/// and returns a description of each violation. An empty result means the
/// assignment is feasible within [`TOLERANCE`].
pub fn check_assignment(
    model: &ModelSpec,
    values: &BTreeMap<String, f64>,
) -> Result<Vec<String>, SolutionError> {
    let get = |name: &str| -> Result<f64, SolutionError> {
        values
            .get(name)
            .copied()
            .ok_or_else(|| SolutionError::MissingVariable(name.to_string()))
    };
    let mut violations = Vec::new();
    for v in &model.variables {
        let val = get(&v.name)?;
        if val < v.lower - TOLERANCE || val > v.upper + TOLERANCE {
            violations.push(format!(
                "{} = {} outside bounds [{}, {}]",
                v.name, val, v.lower, v.upper
            ));
        }
        if matches!(v.kind, VarKind::Binary | VarKind::Integer)
            && (val - val.round()).abs() > TOLERANCE
        {
            violations.push(format!("{} = {} is not integral", v.name, val));
        }
    }
    for c in &model.constraints {
        let mut lhs = 0.0;
        for t in &c.lin {
            lhs += t.coeff * get(&t.var)?;
        }
        for q in &c.quad {
            lhs += q.coeff * get(&q.left)? * get(&q.right)?;
        }
        let ok = match c.relation {
            super::Relation::Le => lhs <= c.rhs + TOLERANCE,
            super::Relation::Ge => lhs >= c.rhs - TOLERANCE,
            super::Relation::Eq => (lhs - c.rhs).abs() <= TOLERANCE,
        };
        if !ok {
            violations.push(format!(
                "{}: lhs {} violates {} {}",
                c.name,
                lhs,
                c.relation.symbol(),
                c.rhs
            ));
        }
    }
    Ok(violations)
}

/// Reconstructs a plan (or relaxation bounds) from solver output.
///
/// Structural variables that are fractional are an error when the model
/// declares them binary; when they are relaxed to continuous the result
/// degrades to the objective bounds. Reported `a`/`b` values must not
/// contradict the reconstructed plan's pairing counts.
pub fn import_solution(
    model: &ModelSpec,
    values: &BTreeMap<String, f64>,
) -> Result<ImportOutcome, SolutionError> {
    let get = |name: String| -> Result<(f64, VarKind), SolutionError> {
        let kind = model.variable(&name).map(|v| v.kind).unwrap_or(VarKind::Binary);
        let v = values
            .get(&name)
            .copied()
            .ok_or(SolutionError::MissingVariable(name))?;
        Ok((v, kind))
    };
    // Gather structural values; a fractional relaxed variable downgrades
    // the import to bounds only.
    let mut fractional_relaxed = false;
    let mut structural: BTreeMap<String, bool> = BTreeMap::new();
    let mut read = |name: String| -> Result<(), SolutionError> {
        let (v, kind) = get(name.clone())?;
        if (v - v.round()).abs() > TOLERANCE {
            if kind == VarKind::Binary {
                return Err(SolutionError::FractionalBinary { name, value: v });
            }
            fractional_relaxed = true;
        } else {
            structural.insert(name, v.round() == 1.0);
        }
        Ok(())
    };

    let params = model.params;
    let t = params.n_teams();
    let f = params.n_flights();
    let inflight = params.race_slots();
    match model.formulation {
        Formulation::Bqp | Formulation::IlpRace => {
            for j in 1..=f * inflight {
                for k in 1..=t {
                    read(x_name(j, k))?;
                }
            }
        }
        Formulation::IlpFlight => {
            for i in 1..=f {
                for k in 2..=t {
                    for l in 1..k {
                        read(z_name(i, k, l))?;
                    }
                }
            }
        }
    }
    if fractional_relaxed {
        let a = values.get("a").copied().ok_or(SolutionError::MissingVariable("a".into()))?;
        let b = values.get("b").copied().ok_or(SolutionError::MissingVariable("b".into()))?;
        return Ok(ImportOutcome::BoundsOnly { a, b });
    }

    let plan = match model.formulation {
        Formulation::Bqp | Formulation::IlpRace => {
            reconstruct_from_races(&params, &structural)?
        }
        Formulation::IlpFlight => reconstruct_from_meetings(&params, &structural)?,
    };

    // Reported sandwich bounds must hold for the reconstructed counts.
    let u = plan.utility();
    let a = values.get("a").map(|v| v.round() as i64);
    let b = values.get("b").map(|v| v.round() as i64);
    if let (Some(a), Some(b)) = (a, b) {
        if a > i64::from(u.lambda_min) || b < i64::from(u.lambda_max) {
            return Err(SolutionError::BoundsMismatch {
                a,
                b,
                lambda_min: u.lambda_min,
                lambda_max: u.lambda_max,
            });
        }
    }
    Ok(ImportOutcome::Plan(plan))
}

fn reconstruct_from_races(
    params: &LeagueParams,
    on: &BTreeMap<String, bool>,
) -> Result<TournamentPlan, SolutionError> {
    let t = params.n_teams();
    let f = params.n_flights();
    let inflight = params.race_slots();
    let mut grid = Vec::new();
    for i in 1..=f {
        let mut row = vec![0u32; t as usize];
        let mut counts = vec![0usize; t as usize];
        for m in 1..=inflight {
            let j = (i - 1) * inflight + m;
            let mut size = 0usize;
            for k in 1..=t {
                if on[&x_name(j, k)] {
                    row[(k - 1) as usize] = m;
                    counts[(k - 1) as usize] += 1;
                    size += 1;
                }
            }
            if size != params.n_inrace() as usize {
                return Err(SolutionError::RaceSize {
                    race: j,
                    found: size,
                    expected: params.n_inrace(),
                });
            }
        }
        for k in 1..=t {
            let c = counts[(k - 1) as usize];
            if c != 1 {
                return Err(SolutionError::TeamAssignment { team: k, flight: i, count: c });
            }
        }
        grid.push(row);
    }
    TournamentPlan::new(*params, grid)
        .map_err(|_| SolutionError::InconsistentClique { flight: 0, expected: params.n_inrace() })
}

/// Races are the connected components of the meeting graph; each must be a
/// complete clique of the race size. Races are numbered by their smallest
/// member.
fn reconstruct_from_meetings(
    params: &LeagueParams,
    on: &BTreeMap<String, bool>,
) -> Result<TournamentPlan, SolutionError> {
    let t = params.n_teams() as usize;
    let r = params.n_inrace() as usize;
    let mut grid = Vec::new();
    for i in 1..=params.n_flights() {
        let meets = |k: usize, l: usize| -> bool {
            let (hi, lo) = (k.max(l), k.min(l));
            on[&z_name(i, hi as u32 + 1, lo as u32 + 1)]
        };
        let mut row = vec![0u32; t];
        let mut race = 0u32;
        for k in 0..t {
            if row[k] != 0 {
                continue;
            }
            race += 1;
            let members: Vec<usize> =
                std::iter::once(k).chain((k + 1..t).filter(|&l| meets(k, l))).collect();
            if members.len() != r {
                return Err(SolutionError::InconsistentClique {
                    flight: i,
                    expected: params.n_inrace(),
                });
            }
            for (ai, &a) in members.iter().enumerate() {
                for &b in &members[ai + 1..] {
                    if !meets(a, b) {
                        return Err(SolutionError::InconsistentClique {
                            flight: i,
                            expected: params.n_inrace(),
                        });
                    }
                }
                if row[a] != 0 {
                    return Err(SolutionError::InconsistentClique {
                        flight: i,
                        expected: params.n_inrace(),
                    });
                }
                row[a] = race;
            }
        }
        grid.push(row);
    }
    TournamentPlan::new(*params, grid)
        .map_err(|_| SolutionError::InconsistentClique { flight: 0, expected: params.n_inrace() })
}
