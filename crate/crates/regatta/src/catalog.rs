//! Plain-text plan format and the bundled plan library.
//!
//! The file format is UTF-8 with LF line endings: optional `#`-prefixed
//! header lines of the form `# key = value`, followed by one grid row per
//! flight as space-separated integers. Race indices are 1-based; 0 marks a
//! skipped flight. Bundled plans live as data files so they can be diffed
//! against their printed sources.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::core::{CoreError, LeagueParams, TournamentPlan};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("document contains no grid rows")]
    Empty,
    #[error("line {line}: malformed header, expected '# key = value'")]
    BadHeader { line: usize },
    #[error("line {line}: token {token:?} is not a nonnegative integer")]
    BadToken { line: usize, token: String },
    #[error("line {line}: row has {found} entries, expected {expected}")]
    RaggedRow { line: usize, found: usize, expected: usize },
    #[error("header declares {key} = {header} but the grid implies {body}")]
    HeaderMismatch { key: &'static str, header: u32, body: u32 },
    #[error("cannot infer teams-per-race: first row has race sizes {sizes:?}")]
    InferFailed { sizes: Vec<u32> },
    #[error("header key {key} is not an integer: {value:?}")]
    BadHeaderValue { key: &'static str, value: String },
    #[error("unknown builtin plan {0:?}")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// A parsed plan file: header metadata plus the plan itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanDocument {
    pub header: BTreeMap<String, String>,
    pub plan: TournamentPlan,
}

/// Parses a plan document. Parameters are taken from the header when
/// declared (`teams`, `flights`, `inrace`) and cross-checked against the
/// grid; otherwise the team and flight counts come from the grid shape and
/// the race size is inferred from the race sizes of the first row.
pub fn parse_document(text: &str) -> Result<PlanDocument, CatalogError> {
    let mut header = BTreeMap::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut expected_cols = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let (key, value) = rest
                .split_once('=')
                .ok_or(CatalogError::BadHeader { line })?;
            header.insert(key.trim().to_string(), value.trim().to_string());
            continue;
        }
        let mut row = Vec::new();
        for token in trimmed.split_whitespace() {
            let v: u32 = token
                .parse()
                .map_err(|_| CatalogError::BadToken { line, token: token.to_string() })?;
            row.push(v);
        }
        if let Some(expected) = expected_cols {
            if row.len() != expected {
                return Err(CatalogError::RaggedRow { line, found: row.len(), expected });
            }
        } else {
            expected_cols = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CatalogError::Empty);
    }
    let body_teams = rows[0].len() as u32;
    let body_flights = rows.len() as u32;
    let teams = match header_u32(&header, "teams")? {
        Some(t) if t != body_teams => {
            return Err(CatalogError::HeaderMismatch { key: "teams", header: t, body: body_teams })
        }
        _ => body_teams,
    };
    let flights = match header_u32(&header, "flights")? {
        Some(f) if f != body_flights => {
            return Err(CatalogError::HeaderMismatch {
                key: "flights",
                header: f,
                body: body_flights,
            })
        }
        _ => body_flights,
    };
    let inrace = match header_u32(&header, "inrace")? {
        Some(r) => r,
        None => infer_inrace(&rows[0])?,
    };
    let params = LeagueParams::new(teams, flights, inrace)?;
    let plan = TournamentPlan::new(params, rows)?;
    Ok(PlanDocument { header, plan })
}

/// Parses a plan, dropping header metadata.
pub fn parse_plan(text: &str) -> Result<TournamentPlan, CatalogError> {
    parse_document(text).map(|doc| doc.plan)
}

fn header_u32(
    header: &BTreeMap<String, String>,
    key: &'static str,
) -> Result<Option<u32>, CatalogError> {
    match header.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CatalogError::BadHeaderValue { key, value: v.clone() }),
    }
}

/// Every used race index in the first row must occur equally often; that
/// count is the race size.
fn infer_inrace(row: &[u32]) -> Result<u32, CatalogError> {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    for &v in row {
        if v != 0 {
            *counts.entry(v).or_insert(0) += 1;
        }
    }
    let sizes: Vec<u32> = counts.values().copied().collect();
    match sizes.first() {
        Some(&first) if sizes.iter().all(|&s| s == first) => Ok(first),
        _ => Err(CatalogError::InferFailed { sizes }),
    }
}

/// Canonical serialization: parameter header, right-aligned grid columns,
/// trailing newline. Byte-identical across calls.
pub fn serialize_plan(plan: &TournamentPlan) -> String {
    let mut doc = String::new();
    let p = plan.params();
    doc.push_str(&format!("# teams = {}\n", p.n_teams()));
    doc.push_str(&format!("# flights = {}\n", p.n_flights()));
    doc.push_str(&format!("# inrace = {}\n", p.n_inrace()));
    let width = plan
        .grid()
        .iter()
        .flatten()
        .map(|v| v.to_string().len())
        .max()
        .unwrap_or(1);
    for row in plan.grid() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
        doc.push_str(&cells.join(" "));
        doc.push('\n');
    }
    doc
}

macro_rules! builtins {
    ($($name:literal),+ $(,)?) => {
        /// Names of all bundled plans.
        pub const BUILTIN_NAMES: &[&str] = &[$($name),+];

        fn builtin_text(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../data/", $name, ".plan"))),)+
                _ => None,
            }
        }
    };
}

builtins![
    "apcl-2021",
    "ppl-8-7-4",
    "ppl-9-8-3",
    "ppl-12-11-3",
    "ppl-12-11-4",
    "ppl-12-11-6",
    "ppl-16-5-4",
    "ppl-16-15-8",
    "ppl-18-17-6",
    "ppl-20-19-4",
    "ppl-20-19-5",
    "nr-13-13-3",
    "nr-16-16-3",
    "best-32-18-8",
    "best-10-16-5",
];

/// Raw file contents of a bundled plan.
pub fn builtin_source(name: &str) -> Result<&'static str, CatalogError> {
    builtin_text(name).ok_or_else(|| CatalogError::UnknownBuiltin(name.to_string()))
}

/// Loads a bundled plan by name, cell-for-cell as printed in its source.
pub fn load_builtin(name: &str) -> Result<TournamentPlan, CatalogError> {
    parse_plan(builtin_source(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PlanMode;

    #[test]
    fn parse_minimal_grid_infers_params() {
        let plan = parse_plan("1 1 2 2\n1 2 1 2\n").unwrap();
        let p = plan.params();
        assert_eq!((p.n_teams(), p.n_flights(), p.n_inrace()), (4, 2, 2));
        assert_eq!(plan.mode(), PlanMode::Strict);
    }

    #[test]
    fn parse_error_cases() {
        assert!(matches!(parse_plan(""), Err(CatalogError::Empty)));
        assert!(matches!(
            parse_plan("1 2 x 2\n"),
            Err(CatalogError::BadToken { line: 1, .. })
        ));
        assert!(matches!(
            parse_plan("1 1 2 2\n1 2 1\n"),
            Err(CatalogError::RaggedRow { line: 2, found: 3, expected: 4 })
        ));
        assert!(matches!(
            parse_plan("# teams = 5\n1 1 2 2\n"),
            Err(CatalogError::HeaderMismatch { key: "teams", header: 5, body: 4 })
        ));
        // Entry larger than the number of races in a flight.
        assert!(matches!(
            parse_plan("# inrace = 2\n1 3 1 3\n"),
            Err(CatalogError::Core(CoreError::RaceIndexOutOfRange { .. }))
        ));
    }

    #[test]
    fn builtin_table_shapes() {
        let plan = load_builtin("apcl-2021").unwrap();
        assert_eq!(plan.params().n_flights(), 8);
        assert_eq!(plan.params().n_teams(), 10);
        assert_eq!(plan.row(0), &[1, 1, 1, 1, 1, 2, 2, 2, 2, 2]);

        let plan = load_builtin("ppl-8-7-4").unwrap();
        assert_eq!((plan.params().n_flights(), plan.params().n_teams()), (7, 8));
        assert_eq!(plan.mode(), PlanMode::Strict);

        let plan = load_builtin("nr-13-13-3").unwrap();
        assert_eq!((plan.params().n_flights(), plan.params().n_teams()), (13, 13));
        assert_eq!(plan.mode(), PlanMode::Relaxed);
        assert!(plan.validate(PlanMode::Relaxed).is_valid());
        assert!(!plan.validate(PlanMode::Strict).is_valid());
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(
            load_builtin("no-such-plan"),
            Err(CatalogError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn round_trip_is_identity() {
        for name in BUILTIN_NAMES {
            let plan = load_builtin(name).unwrap();
            let text = serialize_plan(&plan);
            let reparsed = parse_plan(&text).unwrap();
            assert_eq!(plan, reparsed, "round trip failed for {name}");
            // Serialization is deterministic.
            assert_eq!(text, serialize_plan(&reparsed));
        }
    }

    #[test]
    fn serialize_declares_params() {
        let plan = parse_plan("1 1\n").unwrap();
        let text = serialize_plan(&plan);
        assert!(text.contains("# teams = 2"));
        assert!(text.ends_with('\n'));
    }
}
