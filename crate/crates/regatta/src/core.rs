//! Domain types for sailing-league pairing lists: parameters, tournament
//! plans, pairing matrices and the utility function.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{inrace} teams per race does not divide {teams} teams")]
    NonDivisible { teams: u32, inrace: u32 },
    #[error("grid has {rows} rows and {cols} columns, expected {expected_rows}x{expected_cols}")]
    DimensionMismatch { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("race index {value} at flight {flight}, team {team} exceeds the {max} races of a flight")]
    RaceIndexOutOfRange { flight: usize, team: usize, value: u32, max: u32 },
}

/// The three defining parameters of a sailing league: number of teams, number
/// of flights (rounds), and number of teams per race.
///
/// Divisibility of the team count by the race size is required for strict
/// plans but is deliberately not enforced here, so that relaxed plans with
/// skipped teams (e.g. 13 teams in races of 3) remain representable. It is
/// checked by [`LeagueParams::derive`] and by strict validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LeagueParams {
    n_teams: u32,
    n_flights: u32,
    n_inrace: u32,
}

impl LeagueParams {
    pub fn new(n_teams: u32, n_flights: u32, n_inrace: u32) -> Result<Self, CoreError> {
        if n_teams < 2 {
            return Err(CoreError::InvalidParams(format!("need at least 2 teams, got {n_teams}")));
        }
        if n_flights < 1 {
            return Err(CoreError::InvalidParams("need at least 1 flight".into()));
        }
        if n_inrace < 2 {
            return Err(CoreError::InvalidParams(format!(
                "need at least 2 teams per race, got {n_inrace}"
            )));
        }
        if n_inrace > n_teams {
            return Err(CoreError::InvalidParams(format!(
                "race size {n_inrace} exceeds team count {n_teams}"
            )));
        }
        Ok(LeagueParams { n_teams, n_flights, n_inrace })
    }

    pub fn n_teams(&self) -> u32 {
        self.n_teams
    }

    pub fn n_flights(&self) -> u32 {
        self.n_flights
    }

    pub fn n_inrace(&self) -> u32 {
        self.n_inrace
    }

    /// Number of race slots per flight, `floor(n_teams / n_inrace)`. Equal to
    /// the races-per-flight count whenever the parameters divide evenly.
    pub fn race_slots(&self) -> u32 {
        self.n_teams / self.n_inrace
    }

    /// Computes the dependent quantities. Fails when the race size does not
    /// divide the team count.
    pub fn derive(&self) -> Result<DerivedParams, CoreError> {
        if self.n_teams % self.n_inrace != 0 {
            return Err(CoreError::NonDivisible { teams: self.n_teams, inrace: self.n_inrace });
        }
        let n_inflight = self.n_teams / self.n_inrace;
        let n_races = n_inflight * self.n_flights;
        let lambda_avg = Ratio::new(
            u64::from(self.n_flights) * u64::from(self.n_inrace - 1),
            u64::from(self.n_teams - 1),
        );
        Ok(DerivedParams { n_inflight, n_races, lambda_avg })
    }

    /// Same parameters with a different flight count.
    pub fn with_flights(&self, n_flights: u32) -> Result<Self, CoreError> {
        LeagueParams::new(self.n_teams, n_flights, self.n_inrace)
    }
}

/// Quantities derived from [`LeagueParams`]: races per flight, total races
/// and the average pairing count.
///
/// The average is kept as an exact fraction; the perfect-pairing-list
/// feasibility logic hinges on its integrality, which floating point cannot
/// decide reliably.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivedParams {
    pub n_inflight: u32,
    pub n_races: u32,
    pub lambda_avg: Ratio<u64>,
}

/// Validation mode for a tournament plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanMode {
    /// Every row must partition all teams into races of the required size.
    Strict,
    /// Rows may leave teams out (entry 0); every used race must still have
    /// exactly the required size.
    Relaxed,
}

/// A constraint violation found by plan validation. Flights and teams are
/// 0-based here; the text format is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A race index occurs the wrong number of times in a row.
    RaceSize { flight: usize, race: u32, count: u32, expected: u32 },
    /// A race index in `1..=race_slots` is absent from a row (strict mode).
    MissingRace { flight: usize, race: u32 },
    /// A skip marker appears in a strict plan.
    SkipInStrict { flight: usize, team: usize },
    /// The race size does not divide the team count (strict mode).
    NonDividingRaceSize { teams: u32, inrace: u32 },
}

/// The full list of violations of a plan; empty means valid. Violations are
/// enumerated exhaustively rather than failing fast so that plan authors see
/// every problem at once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A tournament plan: one row per flight, one column per team, each cell the
/// race index (1-based) the team sails in that flight, or 0 when the team
/// skips the flight (relaxed plans only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TournamentPlan {
    params: LeagueParams,
    grid: Vec<Vec<u32>>,
}

impl TournamentPlan {
    /// Builds a plan, checking structure only (dimensions and cell range).
    /// Constraint checking is done by [`TournamentPlan::validate`].
    pub fn new(params: LeagueParams, grid: Vec<Vec<u32>>) -> Result<Self, CoreError> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if rows != params.n_flights as usize || grid.iter().any(|r| r.len() != cols) || cols != params.n_teams as usize {
            let bad = grid.iter().map(|r| r.len()).find(|&l| l != params.n_teams as usize);
            return Err(CoreError::DimensionMismatch {
                rows,
                cols: bad.unwrap_or(cols),
                expected_rows: params.n_flights as usize,
                expected_cols: params.n_teams as usize,
            });
        }
        let max = params.race_slots();
        for (f, row) in grid.iter().enumerate() {
            for (t, &v) in row.iter().enumerate() {
                if v > max {
                    return Err(CoreError::RaceIndexOutOfRange { flight: f, team: t, value: v, max });
                }
            }
        }
        Ok(TournamentPlan { params, grid })
    }

    pub fn params(&self) -> &LeagueParams {
        &self.params
    }

    pub fn grid(&self) -> &[Vec<u32>] {
        &self.grid
    }

    pub fn row(&self, flight: usize) -> &[u32] {
        &self.grid[flight]
    }

    /// Relaxed iff any cell carries the skip marker 0.
    pub fn mode(&self) -> PlanMode {
        if self.grid.iter().any(|row| row.contains(&0)) {
            PlanMode::Relaxed
        } else {
            PlanMode::Strict
        }
    }

    pub fn validate(&self, mode: PlanMode) -> ValidationReport {
        let mut violations = Vec::new();
        let inrace = self.params.n_inrace;
        let slots = self.params.race_slots();
        if mode == PlanMode::Strict && self.params.n_teams % inrace != 0 {
            violations.push(Violation::NonDividingRaceSize {
                teams: self.params.n_teams,
                inrace,
            });
        }
        for (f, row) in self.grid.iter().enumerate() {
            let mut counts = vec![0u32; slots as usize + 1];
            for (t, &v) in row.iter().enumerate() {
                if v == 0 {
                    if mode == PlanMode::Strict {
                        violations.push(Violation::SkipInStrict { flight: f, team: t });
                    }
                } else {
                    counts[v as usize] += 1;
                }
            }
            for race in 1..=slots {
                let c = counts[race as usize];
                match mode {
                    PlanMode::Strict => {
                        if c == 0 {
                            violations.push(Violation::MissingRace { flight: f, race });
                        } else if c != inrace {
                            violations.push(Violation::RaceSize { flight: f, race, count: c, expected: inrace });
                        }
                    }
                    PlanMode::Relaxed => {
                        if c != 0 && c != inrace {
                            violations.push(Violation::RaceSize { flight: f, race, count: c, expected: inrace });
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// Counts, for every pair of teams, the flights in which both carry the
    /// same nonzero race index.
    pub fn pairing_matrix(&self) -> PairingMatrix {
        let n = self.params.n_teams as usize;
        let mut counts = vec![0u32; n * n];
        for row in &self.grid {
            for k in 0..n {
                if row[k] == 0 {
                    continue;
                }
                for l in 0..k {
                    if row[l] == row[k] {
                        counts[k * n + l] += 1;
                        counts[l * n + k] += 1;
                    }
                }
            }
        }
        PairingMatrix { n, counts }
    }

    /// Summarizes the pairing matrix into the plan's utility report.
    pub fn utility(&self) -> UtilityReport {
        self.pairing_matrix().utility()
    }
}

/// Symmetric matrix of pairing counts `lambda(t, t')` with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingMatrix {
    n: usize,
    counts: Vec<u32>,
}

impl PairingMatrix {
    pub fn n_teams(&self) -> usize {
        self.n
    }

    /// Pairing count of two distinct teams, 0-based indices.
    pub fn count(&self, t1: usize, t2: usize) -> u32 {
        self.counts[t1 * self.n + t2]
    }

    /// All off-diagonal entries (each unordered pair once).
    pub fn off_diagonal(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).flat_map(move |k| (0..k).map(move |l| self.count(k, l)))
    }

    /// Sum over ordered pairs.
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn utility(&self) -> UtilityReport {
        let mut min = u32::MAX;
        let mut max = 0u32;
        let mut distinct = std::collections::BTreeSet::new();
        for c in self.off_diagonal() {
            min = min.min(c);
            max = max.max(c);
            distinct.insert(c);
        }
        let n = self.n as u64;
        let lambda_avg = Ratio::new(self.total(), n * (n - 1));
        UtilityReport {
            lambda_min: min,
            lambda_max: max,
            lambda_avg,
            utility: max - min,
            is_perfect: max == min,
            associate_classes: distinct.len() as u32,
        }
    }
}

/// Pairing statistics of a plan. `lambda_avg` is the exact average over all
/// ordered team pairs, which for strict plans equals
/// `n_flights * (n_inrace - 1) / (n_teams - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityReport {
    pub lambda_min: u32,
    pub lambda_max: u32,
    pub lambda_avg: Ratio<u64>,
    pub utility: u32,
    pub is_perfect: bool,
    pub associate_classes: u32,
}

impl Serialize for UtilityReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("UtilityReport", 7)?;
        s.serialize_field("lambda_min", &self.lambda_min)?;
        s.serialize_field("lambda_max", &self.lambda_max)?;
        s.serialize_field("lambda_avg_num", self.lambda_avg.numer())?;
        s.serialize_field("lambda_avg_den", self.lambda_avg.denom())?;
        s.serialize_field("utility", &self.utility)?;
        s.serialize_field("is_perfect", &self.is_perfect)?;
        s.serialize_field("associate_classes", &self.associate_classes)?;
        s.end()
    }
}

/// Number of distinct flights (partitions of the teams into races of the
/// given size): `n_teams! / (n_inrace!^n_inflight * n_inflight!)`.
///
/// Grows combinatorially, hence the arbitrary-precision result. The flight
/// count of `params` plays no role here.
pub fn all_flights_count(params: &LeagueParams) -> Result<BigUint, CoreError> {
    let derived = params.derive()?;
    let fact = |n: u32| -> BigUint {
        (1..=u64::from(n)).map(BigUint::from).fold(BigUint::one(), |a, b| a * b)
    };
    let numer = fact(params.n_teams());
    let denom = fact(params.n_inrace()).pow(derived.n_inflight) * fact(derived.n_inflight);
    Ok(numer / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: u32, f: u32, r: u32) -> LeagueParams {
        LeagueParams::new(t, f, r).unwrap()
    }

    #[test]
    fn derive_case_studies() {
        let d = params(18, 16, 6).derive().unwrap();
        assert_eq!((d.n_inflight, d.n_races), (3, 48));
        assert_eq!(d.lambda_avg, Ratio::new(80, 17));

        let d = params(32, 18, 8).derive().unwrap();
        assert_eq!((d.n_inflight, d.n_races), (4, 72));
        assert_eq!(d.lambda_avg, Ratio::new(126, 31));

        let d = params(10, 8, 5).derive().unwrap();
        assert_eq!((d.n_inflight, d.n_races), (2, 16));
        assert_eq!(d.lambda_avg, Ratio::new(32, 9));
    }

    #[test]
    fn derive_rejects_non_divisor() {
        assert_eq!(
            params(13, 13, 3).derive(),
            Err(CoreError::NonDivisible { teams: 13, inrace: 3 })
        );
    }

    #[test]
    fn params_rejects_degenerate() {
        assert!(LeagueParams::new(1, 1, 2).is_err());
        assert!(LeagueParams::new(4, 0, 2).is_err());
        assert!(LeagueParams::new(4, 1, 1).is_err());
        assert!(LeagueParams::new(4, 1, 8).is_err());
    }

    #[test]
    fn plan_dimension_mismatch_is_structural() {
        let p = params(4, 2, 2);
        let err = TournamentPlan::new(p, vec![vec![1, 1, 2, 2]]).unwrap_err();
        assert!(matches!(err, CoreError::DimensionMismatch { .. }));
        let err = TournamentPlan::new(p, vec![vec![1, 1, 2], vec![1, 2, 1, 2]]).unwrap_err();
        assert!(matches!(err, CoreError::DimensionMismatch { .. }));
    }

    #[test]
    fn plan_entry_out_of_range_is_structural() {
        let p = params(4, 1, 2);
        let err = TournamentPlan::new(p, vec![vec![1, 3, 1, 2]]).unwrap_err();
        assert!(matches!(err, CoreError::RaceIndexOutOfRange { value: 3, max: 2, .. }));
    }

    #[test]
    fn validate_minimal_grids() {
        let p = params(4, 2, 2);
        let plan = TournamentPlan::new(p, vec![vec![1, 1, 2, 2], vec![1, 2, 1, 2]]).unwrap();
        assert!(plan.validate(PlanMode::Strict).is_valid());
        assert_eq!(plan.mode(), PlanMode::Strict);

        let bad = TournamentPlan::new(p, vec![vec![1, 1, 1, 2], vec![1, 2, 1, 2]]).unwrap();
        let report = bad.validate(PlanMode::Strict);
        assert_eq!(
            report.violations,
            vec![
                Violation::RaceSize { flight: 0, race: 1, count: 3, expected: 2 },
                Violation::RaceSize { flight: 0, race: 2, count: 1, expected: 2 },
            ]
        );
    }

    #[test]
    fn relaxed_allows_skips_strict_does_not() {
        let p = params(5, 1, 2);
        let plan = TournamentPlan::new(p, vec![vec![1, 1, 2, 2, 0]]).unwrap();
        assert_eq!(plan.mode(), PlanMode::Relaxed);
        assert!(plan.validate(PlanMode::Relaxed).is_valid());
        let report = plan.validate(PlanMode::Strict);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SkipInStrict { flight: 0, team: 4 })));
    }

    #[test]
    fn one_flight_pairing_matrix() {
        let p = params(4, 1, 2);
        let plan = TournamentPlan::new(p, vec![vec![1, 2, 1, 2]]).unwrap();
        let m = plan.pairing_matrix();
        assert_eq!(m.count(0, 2), 1);
        assert_eq!(m.count(1, 3), 1);
        assert_eq!(m.count(0, 1), 0);
        assert_eq!(m.count(0, 0), 0);
    }

    #[test]
    fn utility_report_consistency() {
        let p = params(4, 3, 2);
        // A 1-factorization of K4: every pair meets exactly once.
        let plan = TournamentPlan::new(
            p,
            vec![vec![1, 1, 2, 2], vec![1, 2, 1, 2], vec![1, 2, 2, 1]],
        )
        .unwrap();
        let u = plan.utility();
        assert_eq!((u.lambda_min, u.lambda_max, u.utility), (1, 1, 0));
        assert!(u.is_perfect);
        assert_eq!(u.associate_classes, 1);
        assert_eq!(u.lambda_avg, Ratio::new(1, 1));
    }

    #[test]
    fn utility_json_field_names() {
        let p = params(4, 1, 2);
        let plan = TournamentPlan::new(p, vec![vec![1, 2, 1, 2]]).unwrap();
        let json = serde_json::to_value(plan.utility()).unwrap();
        assert_eq!(json["lambda_avg_num"], 1);
        assert_eq!(json["lambda_avg_den"], 3);
        assert_eq!(json["utility"], 1);
        assert_eq!(json["is_perfect"], false);
    }

    #[test]
    fn all_flights_count_values() {
        // 18 teams in races of 6: the combinatorial-explosion headline number.
        let p = params(18, 1, 6);
        assert_eq!(all_flights_count(&p).unwrap(), BigUint::from(2_858_856u64));
        // 4 teams in pairs: {12|34}, {13|24}, {14|23}.
        let p = params(4, 1, 2);
        assert_eq!(all_flights_count(&p).unwrap(), BigUint::from(3u32));
        // All teams in a single race.
        let p = params(6, 1, 6);
        assert_eq!(all_flights_count(&p).unwrap(), BigUint::one());
    }
}
