//! Integer-programming formulations of the pairing-list problem.
//!
//! Three interchangeable models over the same parameters, all minimizing
//! `b - a` where the integer variables `a` and `b` sandwich every pairing
//! count:
//!
//! * `bqp` — binary assignment variables `x_j_k` (team `k` sails race `j`)
//!   with quadratic sandwich constraints on `x_j_k * x_j_l`.
//! * `ilp_race` — the same assignment variables with the products replaced
//!   by linearization variables `y_j_k_l` and the standard three
//!   inequalities per product.
//! * `ilp_flight` — one meeting indicator `z_i_k_l` per flight and team
//!   pair, with degree equalities and transitivity (triangle) cuts instead
//!   of explicit races.
//!
//! Race indices run over all flights: race `j` belongs to flight
//! `(j - 1) / n_inflight + 1`. All indices in variable names are 1-based.

pub mod lp;
pub mod solution;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::core::{CoreError, LeagueParams};

#[derive(Debug, Error)]
pub enum ModelGenError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("option {option} does not apply to the {formulation} formulation")]
    OptionMismatch { option: &'static str, formulation: Formulation },
    #[error("fixed bounds must satisfy 0 <= a <= b <= {flights}, got a={a}, b={b}")]
    BadFixedBounds { a: u32, b: u32, flights: u32 },
    #[error("relaxed team {team} out of range 1..={teams}")]
    BadRelaxTeam { team: u32, teams: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Bqp,
    IlpRace,
    IlpFlight,
}

impl Formulation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formulation::Bqp => "bqp",
            Formulation::IlpRace => "ilp_race",
            Formulation::IlpFlight => "ilp_flight",
        }
    }

    pub fn parse(s: &str) -> Option<Formulation> {
        match s {
            "bqp" => Some(Formulation::Bqp),
            "ilp_race" | "ilp-race" => Some(Formulation::IlpRace),
            "ilp_flight" | "ilp-flight" => Some(Formulation::IlpFlight),
            _ => None,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinTerm {
    pub coeff: f64,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadTerm {
    pub coeff: f64,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// One constraint row; `quad` is empty except in the `bqp` sandwich rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub lin: Vec<LinTerm>,
    pub quad: Vec<QuadTerm>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub formulation: Formulation,
    pub params: LeagueParams,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    /// Linear objective, minimized.
    pub objective: Vec<LinTerm>,
}

impl ModelSpec {
    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn has_quadratic(&self) -> bool {
        self.constraints.iter().any(|c| !c.quad.is_empty())
    }
}

#[derive(Debug, Clone, Default)]
pub struct GenOptions {
    /// Pin flight 1 to the consecutive-blocks partition and team 1 to the
    /// first race of every flight (z model: pin flight 1 only).
    pub symmetry_breaking: bool,
    /// `ilp_race` only: make the linearization variables continuous.
    pub relax_linearization: bool,
    /// `ilp_flight` only: meeting indicators touching these teams (1-based)
    /// become continuous.
    pub relax_teams: BTreeSet<u32>,
    /// `bqp` / `ilp_race` only: in every race and flight equality one
    /// assignment variable is made continuous; its integrality is implied
    /// by the equality over the remaining binaries.
    pub relax_one_per_equality: bool,
    /// Fix the lower sandwich bound to this value.
    pub fixed_a: Option<u32>,
    /// Fix the upper sandwich bound to this value.
    pub fixed_b: Option<u32>,
}

pub fn x_name(j: u32, k: u32) -> String {
    format!("x_{j}_{k}")
}

pub fn y_name(j: u32, k: u32, l: u32) -> String {
    debug_assert!(l < k);
    format!("y_{j}_{k}_{l}")
}

pub fn z_name(i: u32, k: u32, l: u32) -> String {
    debug_assert!(l < k);
    format!("z_{i}_{k}_{l}")
}

/// The block that team `k` (1-based) occupies in the consecutive-blocks
/// partition, 1-based.
fn block_of(k: u32, inrace: u32) -> u32 {
    (k - 1) / inrace + 1
}

fn validate_opts(
    params: &LeagueParams,
    formulation: Formulation,
    opts: &GenOptions,
) -> Result<(), ModelGenError> {
    if opts.relax_linearization && formulation != Formulation::IlpRace {
        return Err(ModelGenError::OptionMismatch { option: "relax_linearization", formulation });
    }
    if !opts.relax_teams.is_empty() && formulation != Formulation::IlpFlight {
        return Err(ModelGenError::OptionMismatch { option: "relax_teams", formulation });
    }
    if opts.relax_one_per_equality && formulation == Formulation::IlpFlight {
        return Err(ModelGenError::OptionMismatch { option: "relax_one_per_equality", formulation });
    }
    for &t in &opts.relax_teams {
        if t == 0 || t > params.n_teams() {
            return Err(ModelGenError::BadRelaxTeam { team: t, teams: params.n_teams() });
        }
    }
    let a = opts.fixed_a.unwrap_or(0);
    let b = opts.fixed_b.unwrap_or(params.n_flights());
    if a > b || b > params.n_flights() {
        return Err(ModelGenError::BadFixedBounds { a, b, flights: params.n_flights() });
    }
    Ok(())
}

pub fn generate(
    params: &LeagueParams,
    formulation: Formulation,
    opts: &GenOptions,
) -> Result<ModelSpec, ModelGenError> {
    match formulation {
        Formulation::Bqp => gen_bqp(params, opts),
        Formulation::IlpRace => gen_ilp_race(params, opts),
        Formulation::IlpFlight => gen_ilp_flight(params, opts),
    }
}

/// Shared scaffolding of the two race-assignment models: the `x` variables
/// with race-size and flight-partition equalities, plus the bound variables
/// `a` and `b` and the objective.
struct XModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    n_races: u32,
}

fn build_x_model(params: &LeagueParams, opts: &GenOptions) -> Result<XModel, ModelGenError> {
    let derived = params.derive()?;
    let t = params.n_teams();
    let f = params.n_flights();
    let r = params.n_inrace();
    let n_inflight = derived.n_inflight;
    let n_races = derived.n_races;

    let mut variables = Vec::new();
    for j in 1..=n_races {
        let flight = (j - 1) / n_inflight + 1;
        let race_in_flight = (j - 1) % n_inflight + 1;
        for k in 1..=t {
            let mut kind = VarKind::Binary;
            if opts.relax_one_per_equality && (k == t || race_in_flight == n_inflight) {
                kind = VarKind::Continuous;
            }
            let fixed = if opts.symmetry_breaking {
                if flight == 1 {
                    Some(block_of(k, r) == race_in_flight)
                } else if k == 1 {
                    Some(race_in_flight == 1)
                } else {
                    None
                }
            } else {
                None
            };
            let (lower, upper) = match fixed {
                Some(true) => (1.0, 1.0),
                Some(false) => (0.0, 0.0),
                None => (0.0, 1.0),
            };
            variables.push(Variable { name: x_name(j, k), kind, lower, upper });
        }
    }
    push_bound_vars(&mut variables, f, opts);

    let mut constraints = Vec::new();
    for j in 1..=n_races {
        constraints.push(Constraint {
            name: format!("race_{j}"),
            lin: (1..=t).map(|k| LinTerm { coeff: 1.0, var: x_name(j, k) }).collect(),
            quad: Vec::new(),
            relation: Relation::Eq,
            rhs: f64::from(r),
        });
    }
    for i in 1..=f {
        for k in 1..=t {
            let lin = (1..=n_inflight)
                .map(|m| LinTerm { coeff: 1.0, var: x_name((i - 1) * n_inflight + m, k) })
                .collect();
            constraints.push(Constraint {
                name: format!("flight_{i}_{k}"),
                lin,
                quad: Vec::new(),
                relation: Relation::Eq,
                rhs: 1.0,
            });
        }
    }
    Ok(XModel { variables, constraints, n_races })
}

fn push_bound_vars(variables: &mut Vec<Variable>, n_flights: u32, opts: &GenOptions) {
    for (name, fixed) in [("a", opts.fixed_a), ("b", opts.fixed_b)] {
        let (lower, upper) = match fixed {
            Some(v) => (f64::from(v), f64::from(v)),
            None => (0.0, f64::from(n_flights)),
        };
        variables.push(Variable { name: name.to_string(), kind: VarKind::Integer, lower, upper });
    }
}

fn objective() -> Vec<LinTerm> {
    vec![
        LinTerm { coeff: -1.0, var: "a".to_string() },
        LinTerm { coeff: 1.0, var: "b".to_string() },
    ]
}

pub fn gen_bqp(params: &LeagueParams, opts: &GenOptions) -> Result<ModelSpec, ModelGenError> {
    validate_opts(params, Formulation::Bqp, opts)?;
    let mut x = build_x_model(params, opts)?;
    let t = params.n_teams();
    for k in 2..=t {
        for l in 1..k {
            let quad: Vec<QuadTerm> = (1..=x.n_races)
                .map(|j| QuadTerm { coeff: 1.0, left: x_name(j, k), right: x_name(j, l) })
                .collect();
            x.constraints.push(Constraint {
                name: format!("pair_lo_{k}_{l}"),
                lin: vec![LinTerm { coeff: -1.0, var: "a".to_string() }],
                quad: quad.clone(),
                relation: Relation::Ge,
                rhs: 0.0,
            });
            x.constraints.push(Constraint {
                name: format!("pair_hi_{k}_{l}"),
                lin: vec![LinTerm { coeff: -1.0, var: "b".to_string() }],
                quad,
                relation: Relation::Le,
                rhs: 0.0,
            });
        }
    }
    Ok(ModelSpec {
        name: model_name(params, Formulation::Bqp),
        formulation: Formulation::Bqp,
        params: *params,
        variables: x.variables,
        constraints: x.constraints,
        objective: objective(),
    })
}

pub fn gen_ilp_race(params: &LeagueParams, opts: &GenOptions) -> Result<ModelSpec, ModelGenError> {
    validate_opts(params, Formulation::IlpRace, opts)?;
    let mut x = build_x_model(params, opts)?;
    let t = params.n_teams();
    let y_kind = if opts.relax_linearization { VarKind::Continuous } else { VarKind::Binary };
    for j in 1..=x.n_races {
        for k in 2..=t {
            for l in 1..k {
                x.variables.push(Variable {
                    name: y_name(j, k, l),
                    kind: y_kind,
                    lower: 0.0,
                    upper: 1.0,
                });
            }
        }
    }
    // Standard product linearization: y <= x_k, y <= x_l, y >= x_k + x_l - 1.
    for j in 1..=x.n_races {
        for k in 2..=t {
            for l in 1..k {
                let y = y_name(j, k, l);
                x.constraints.push(Constraint {
                    name: format!("lin1_{j}_{k}_{l}"),
                    lin: vec![
                        LinTerm { coeff: 1.0, var: y.clone() },
                        LinTerm { coeff: -1.0, var: x_name(j, k) },
                    ],
                    quad: Vec::new(),
                    relation: Relation::Le,
                    rhs: 0.0,
                });
                x.constraints.push(Constraint {
                    name: format!("lin2_{j}_{k}_{l}"),
                    lin: vec![
                        LinTerm { coeff: 1.0, var: y.clone() },
                        LinTerm { coeff: -1.0, var: x_name(j, l) },
                    ],
                    quad: Vec::new(),
                    relation: Relation::Le,
                    rhs: 0.0,
                });
                x.constraints.push(Constraint {
                    name: format!("lin3_{j}_{k}_{l}"),
                    lin: vec![
                        LinTerm { coeff: 1.0, var: x_name(j, k) },
                        LinTerm { coeff: 1.0, var: x_name(j, l) },
                        LinTerm { coeff: -1.0, var: y },
                    ],
                    quad: Vec::new(),
                    relation: Relation::Le,
                    rhs: 1.0,
                });
            }
        }
    }
    for k in 2..=t {
        for l in 1..k {
            let sum: Vec<LinTerm> = (1..=x.n_races)
                .map(|j| LinTerm { coeff: 1.0, var: y_name(j, k, l) })
                .collect();
            let mut lo = sum.clone();
            lo.push(LinTerm { coeff: -1.0, var: "a".to_string() });
            x.constraints.push(Constraint {
                name: format!("pair_lo_{k}_{l}"),
                lin: lo,
                quad: Vec::new(),
                relation: Relation::Ge,
                rhs: 0.0,
            });
            let mut hi = sum;
            hi.push(LinTerm { coeff: -1.0, var: "b".to_string() });
            x.constraints.push(Constraint {
                name: format!("pair_hi_{k}_{l}"),
                lin: hi,
                quad: Vec::new(),
                relation: Relation::Le,
                rhs: 0.0,
            });
        }
    }
    Ok(ModelSpec {
        name: model_name(params, Formulation::IlpRace),
        formulation: Formulation::IlpRace,
        params: *params,
        variables: x.variables,
        constraints: x.constraints,
        objective: objective(),
    })
}

pub fn gen_ilp_flight(
    params: &LeagueParams,
    opts: &GenOptions,
) -> Result<ModelSpec, ModelGenError> {
    validate_opts(params, Formulation::IlpFlight, opts)?;
    params.derive()?;
    let t = params.n_teams();
    let f = params.n_flights();
    let r = params.n_inrace();

    let mut variables = Vec::new();
    for i in 1..=f {
        for k in 2..=t {
            for l in 1..k {
                let kind = if opts.relax_teams.contains(&k) || opts.relax_teams.contains(&l) {
                    VarKind::Continuous
                } else {
                    VarKind::Binary
                };
                let fixed = (opts.symmetry_breaking && i == 1)
                    .then(|| block_of(k, r) == block_of(l, r));
                let (lower, upper) = match fixed {
                    Some(true) => (1.0, 1.0),
                    Some(false) => (0.0, 0.0),
                    None => (0.0, 1.0),
                };
                variables.push(Variable { name: z_name(i, k, l), kind, lower, upper });
            }
        }
    }
    push_bound_vars(&mut variables, f, opts);

    let mut constraints = Vec::new();
    // Every team meets exactly n_inrace - 1 others per flight.
    for i in 1..=f {
        for k in 1..=t {
            let lin = (1..=t)
                .filter(|&l| l != k)
                .map(|l| LinTerm { coeff: 1.0, var: z_name(i, k.max(l), k.min(l)) })
                .collect();
            constraints.push(Constraint {
                name: format!("deg_{i}_{k}"),
                lin,
                quad: Vec::new(),
                relation: Relation::Eq,
                rhs: f64::from(r - 1),
            });
        }
    }
    // Transitivity: if k meets m and l meets m, then k meets l.
    for i in 1..=f {
        for k in 2..=t {
            for l in 1..k {
                for m in 1..=t {
                    if m == k || m == l {
                        continue;
                    }
                    constraints.push(Constraint {
                        name: format!("tri_{i}_{k}_{l}_{m}"),
                        lin: vec![
                            LinTerm { coeff: 1.0, var: z_name(i, k.max(m), k.min(m)) },
                            LinTerm { coeff: 1.0, var: z_name(i, l.max(m), l.min(m)) },
                            LinTerm { coeff: -1.0, var: z_name(i, k, l) },
                        ],
                        quad: Vec::new(),
                        relation: Relation::Le,
                        rhs: 1.0,
                    });
                }
            }
        }
    }
    for k in 2..=t {
        for l in 1..k {
            let sum: Vec<LinTerm> =
                (1..=f).map(|i| LinTerm { coeff: 1.0, var: z_name(i, k, l) }).collect();
            let mut lo = sum.clone();
            lo.push(LinTerm { coeff: -1.0, var: "a".to_string() });
            constraints.push(Constraint {
                name: format!("pair_lo_{k}_{l}"),
                lin: lo,
                quad: Vec::new(),
                relation: Relation::Ge,
                rhs: 0.0,
            });
            let mut hi = sum;
            hi.push(LinTerm { coeff: -1.0, var: "b".to_string() });
            constraints.push(Constraint {
                name: format!("pair_hi_{k}_{l}"),
                lin: hi,
                quad: Vec::new(),
                relation: Relation::Le,
                rhs: 0.0,
            });
        }
    }
    Ok(ModelSpec {
        name: model_name(params, Formulation::IlpFlight),
        formulation: Formulation::IlpFlight,
        params: *params,
        variables,
        constraints,
        objective: objective(),
    })
}

fn model_name(params: &LeagueParams, formulation: Formulation) -> String {
    format!(
        "pairing-{}-{}-{}-{}",
        params.n_teams(),
        params.n_flights(),
        params.n_inrace(),
        formulation
    )
}
