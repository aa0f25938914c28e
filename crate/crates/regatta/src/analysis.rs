//! Necessary conditions for the existence of perfect pairing lists, and a
//! scan over nearby parameter triples.
//!
//! All conditions here are necessary only. A passing verdict never asserts
//! that a perfect pairing list exists; (10, 9, 5) passes every check below
//! yet no such design exists.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::core::LeagueParams;

/// Outcome of the necessary-condition checks for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeasibilityVerdict {
    /// The average pairing count is an integer.
    pub integrality_ok: bool,
    /// `(n_inrace - 1) | lambda * (n_teams - 1)`.
    pub divisibility1_ok: bool,
    /// `n_inrace * (n_inrace - 1) | lambda * n_teams * (n_teams - 1)`.
    pub divisibility2_ok: bool,
    /// `n_races >= n_teams + n_flights - 1`.
    pub bose_ok: bool,
    pub perfect_possible: PerfectPossible,
}

/// Tri-state by construction: the checks can rule a triple out but can never
/// certify existence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerfectPossible {
    Impossible,
    PassesNecessaryConditions,
}

/// True iff the average pairing count is an integer, i.e. `(n_teams - 1)`
/// divides `n_flights * (n_inrace - 1)`.
pub fn check_integrality(params: &LeagueParams) -> bool {
    let num = u64::from(params.n_flights()) * u64::from(params.n_inrace() - 1);
    num % u64::from(params.n_teams() - 1) == 0
}

/// The two block-design divisibility conditions, evaluated at the integer
/// average pairing count. Returns `(false, false)` when the average is not
/// an integer in the first place.
///
/// When the race size divides the team count the second condition follows
/// from the first, so the two components always agree in that case.
pub fn check_divisibility(params: &LeagueParams) -> (bool, bool) {
    let lambda = match integral_lambda(params) {
        Some(l) => l,
        None => return (false, false),
    };
    let t = u64::from(params.n_teams());
    let r = u64::from(params.n_inrace());
    let first = (lambda * (t - 1)) % (r - 1) == 0;
    let second = (lambda * t * (t - 1)) % (r * (r - 1)) == 0;
    (first, second)
}

/// The resolvable-design counting bound: `n_races >= n_teams + n_flights - 1`.
pub fn check_bose(params: &LeagueParams) -> bool {
    let t = u64::from(params.n_teams());
    let f = u64::from(params.n_flights());
    let n_races = t * f / u64::from(params.n_inrace());
    n_races >= t + f - 1
}

/// Runs all checks and combines them into a verdict.
pub fn check_params(params: &LeagueParams) -> FeasibilityVerdict {
    let integrality_ok = check_integrality(params);
    let (divisibility1_ok, divisibility2_ok) = check_divisibility(params);
    let bose_ok = check_bose(params);
    let all = integrality_ok && divisibility1_ok && divisibility2_ok && bose_ok;
    FeasibilityVerdict {
        integrality_ok,
        divisibility1_ok,
        divisibility2_ok,
        bose_ok,
        perfect_possible: if all {
            PerfectPossible::PassesNecessaryConditions
        } else {
            PerfectPossible::Impossible
        },
    }
}

fn integral_lambda(params: &LeagueParams) -> Option<u64> {
    let num = u64::from(params.n_flights()) * u64::from(params.n_inrace() - 1);
    let den = u64::from(params.n_teams() - 1);
    (num % den == 0).then(|| num / den)
}

/// Scans the box `n_teams +- dt`, `n_flights +- df`, `n_inrace +- dr` around
/// `base` and keeps the triples that could still admit a perfect pairing
/// list: race size divides the team count, at least two races per flight,
/// and all necessary conditions pass.
///
/// Results are sorted lexicographically and deduplicated; each entry carries
/// the integer average pairing count.
pub fn scan_nearby(
    base: &LeagueParams,
    dt: u32,
    df: u32,
    dr: u32,
) -> Vec<(LeagueParams, u64)> {
    let mut out = Vec::new();
    let t_lo = base.n_teams().saturating_sub(dt).max(2);
    let f_lo = base.n_flights().saturating_sub(df).max(1);
    let r_lo = base.n_inrace().saturating_sub(dr).max(2);
    for t in t_lo..=base.n_teams() + dt {
        for f in f_lo..=base.n_flights() + df {
            for r in r_lo..=base.n_inrace() + dr {
                if t % r != 0 || t / r < 2 {
                    continue;
                }
                let params = match LeagueParams::new(t, f, r) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let verdict = check_params(&params);
                if verdict.perfect_possible == PerfectPossible::PassesNecessaryConditions {
                    let lambda = integral_lambda(&params).expect("integrality just checked");
                    out.push((params, lambda));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Scan results as a tab-separated table: teams, flights, inrace, lambda.
pub fn scan_table(rows: &[(LeagueParams, u64)]) -> String {
    let mut s = String::new();
    for (p, lambda) in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            p.n_teams(),
            p.n_flights(),
            p.n_inrace(),
            lambda
        ));
    }
    s
}

/// Exact average pairing count as a fraction, without requiring divisibility
/// of the team count. Convenience for reporting.
pub fn lambda_avg(params: &LeagueParams) -> Ratio<u64> {
    Ratio::new(
        u64::from(params.n_flights()) * u64::from(params.n_inrace() - 1),
        u64::from(params.n_teams() - 1),
    )
}

/// Float view of [`lambda_avg`], for display only.
pub fn lambda_avg_f64(params: &LeagueParams) -> f64 {
    lambda_avg(params).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: u32, f: u32, r: u32) -> LeagueParams {
        LeagueParams::new(t, f, r).unwrap()
    }

    #[test]
    fn integrality_examples() {
        assert!(!check_integrality(&params(18, 16, 6)));
        assert!(check_integrality(&params(18, 17, 6)));
        // All teams in one race, one flight fewer than teams: lambda = n - 1.
        assert!(check_integrality(&params(6, 5, 6)));
    }

    #[test]
    fn divisibility_examples() {
        assert_eq!(check_divisibility(&params(16, 15, 8)), (true, true));
        // Passes the arithmetic although no such design exists.
        assert_eq!(check_divisibility(&params(10, 9, 5)), (true, true));
        assert_eq!(check_divisibility(&params(9, 8, 3)), (true, true));
        // Non-integral lambda short-circuits to (false, false).
        assert_eq!(check_divisibility(&params(18, 16, 6)), (false, false));
    }

    #[test]
    fn bose_examples() {
        assert!(check_bose(&params(8, 7, 4))); // 14 >= 14
        assert!(!check_bose(&params(10, 8, 5))); // 16 < 17
        assert!(check_bose(&params(16, 5, 4))); // 20 >= 20
    }

    #[test]
    fn verdict_never_asserts_existence() {
        let v = check_params(&params(10, 9, 5));
        assert_eq!(v.perfect_possible, PerfectPossible::PassesNecessaryConditions);
        let v = check_params(&params(10, 8, 5));
        assert_eq!(v.perfect_possible, PerfectPossible::Impossible);
    }

    #[test]
    fn singleton_scan() {
        let rows = scan_nearby(&params(18, 17, 6), 0, 0, 0);
        assert_eq!(rows, vec![(params(18, 17, 6), 5)]);
    }

    #[test]
    fn scan_around_smallest_case_study() {
        let rows = scan_nearby(&params(10, 8, 5), 3, 3, 2);
        let triples: Vec<(u32, u32, u32)> = rows
            .iter()
            .map(|(p, _)| (p.n_teams(), p.n_flights(), p.n_inrace()))
            .collect();
        assert_eq!(
            triples,
            vec![
                (8, 7, 4),
                (9, 8, 3),
                (10, 9, 5),
                (12, 11, 3),
                (12, 11, 4),
                (12, 11, 6),
            ]
        );
    }

    #[test]
    fn scan_output_recheck_closed() {
        for (p, _) in scan_nearby(&params(32, 18, 8), 3, 3, 2) {
            let v = check_params(&p);
            assert!(v.integrality_ok && v.divisibility1_ok && v.divisibility2_ok && v.bose_ok);
        }
    }
}
