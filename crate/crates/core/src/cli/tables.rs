//! Update-scaler and entropy tables, computed from library calls.

use crate::error::Result;
use crate::simplex::{entropy_report, ProbDist};
use crate::update::score_vector;

use super::output::fmt12;

pub const CHOSEN_PROBS: [f64; 3] = [0.1, 0.5, 0.9];
pub const OTHER_PROBS: [f64; 3] = [0.1, 0.5, 0.8];
pub const UNIFORM_SIZES: [usize; 3] = [2, 4, 10];
pub const TWO_POINT_PROBS: [f64; 2] = [0.9, 0.7];
pub const NEAR_DETERMINISTIC_MASS: f64 = 1.0 - 1e-6;

/// A CSV table: file stem, header, rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn direction(delta: f64) -> &'static str {
    if delta > 0.0 {
        "increase"
    } else if delta < 0.0 {
        "decrease"
    } else {
        "none"
    }
}

fn magnitude_label(scaler: f64) -> &'static str {
    match scaler.abs() {
        s if s < 1.0 / 3.0 => "small",
        s if s < 2.0 / 3.0 => "moderate",
        _ => "large",
    }
}

const SIGNS: [(&str, f64); 2] = [("positive", 1.0), ("negative", -1.0)];

/// Score of the chosen action's own logit, `1 - P_c`, for `A = +1` and `A = -1`.
pub fn chosen_action_table() -> Result<Table> {
    let mut rows = Vec::new();
    for (sign_name, sign) in SIGNS {
        for p in CHOSEN_PROBS {
            let dist = ProbDist::two_point(p)?;
            let scaler = score_vector(&dist, 0)?[0];
            rows.push(vec![
                sign_name.to_string(),
                fmt12(p),
                fmt12(scaler),
                direction(sign * scaler).to_string(),
                magnitude_label(scaler).to_string(),
            ]);
        }
    }
    Ok(Table {
        name: "chosen_action",
        header: header(&[
            "advantage_sign",
            "p_chosen",
            "update_scaler",
            "direction",
            "magnitude",
        ]),
        rows,
    })
}

/// Score of a non-chosen logit, `-P_o`, for `A = +1` and `A = -1`.
pub fn other_action_table() -> Result<Table> {
    let mut rows = Vec::new();
    for (sign_name, sign) in SIGNS {
        for p in OTHER_PROBS {
            let dist = ProbDist::new(vec![1.0 - p, p])?;
            let scaler = score_vector(&dist, 0)?[1];
            rows.push(vec![
                sign_name.to_string(),
                fmt12(p),
                fmt12(scaler),
                direction(sign * scaler).to_string(),
                magnitude_label(scaler).to_string(),
            ]);
        }
    }
    Ok(Table {
        name: "other_actions",
        header: header(&[
            "advantage_sign",
            "p_other",
            "update_scaler",
            "direction",
            "magnitude",
        ]),
        rows,
    })
}

/// `C(P)`, `H_2(P)` and `H(P)` for uniform, two-point and near-deterministic policies.
pub fn entropy_table() -> Result<Table> {
    let mut cases: Vec<(&str, String, String, ProbDist)> = Vec::new();
    for n in UNIFORM_SIZES {
        cases.push((
            "uniform",
            n.to_string(),
            String::new(),
            ProbDist::uniform(n)?,
        ));
    }
    for p in TWO_POINT_PROBS {
        cases.push(("two_point", "2".into(), fmt12(p), ProbDist::two_point(p)?));
    }
    let n = 4;
    let rest = (1.0 - NEAR_DETERMINISTIC_MASS) / (n - 1) as f64;
    let mut probs = vec![rest; n];
    probs[0] = NEAR_DETERMINISTIC_MASS;
    cases.push((
        "near_deterministic",
        n.to_string(),
        fmt12(NEAR_DETERMINISTIC_MASS),
        ProbDist::new(probs)?,
    ));

    let rows = cases
        .into_iter()
        .map(|(kind, n, p, dist)| {
            let r = entropy_report(&dist);
            vec![
                kind.to_string(),
                n,
                p,
                fmt12(r.collision),
                fmt12(r.renyi2),
                fmt12(r.shannon),
            ]
        })
        .collect();
    Ok(Table {
        name: "entropy_measures",
        header: header(&["distribution", "n", "p", "collision", "renyi2", "shannon"]),
        rows,
    })
}

pub fn all_tables() -> Result<Vec<Table>> {
    Ok(vec![
        chosen_action_table()?,
        other_action_table()?,
        entropy_table()?,
    ])
}
