//! Plot-ready convergence series.

use std::fmt::Write as _;

use heisenberg::Result;
use serde::Serialize;

use crate::checks::{self, Setup};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    #[serde(rename = "N")]
    pub degree: usize,
    pub unitarity_defect: f64,
    pub representation_defect: f64,
    pub plancherel_defect: f64,
}

/// Defects at each truncation degree, for the first configured `λ`.
/// The Plancherel column uses the 41-point grid on `[−8, 8]` throughout.
pub fn convergence(setup: &Setup, sweep: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let lambda = setup.lambdas[0];
    sweep
        .iter()
        .map(|&degree| {
            let s = Setup { degree, ..setup.clone() };
            Ok(ConvergenceRow {
                degree,
                unitarity_defect: checks::unitarity_defect(&s, lambda)?,
                representation_defect: checks::representation_defect(&s, lambda)?,
                plancherel_defect: checks::plancherel(degree, 41, s.quad_points, s.box_half_width)?,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("N,unitarity_defect,representation_defect,plancherel_defect\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e}",
            r.degree, r.unitarity_defect, r.representation_defect, r.plancherel_defect
        );
    }
    out
}

pub fn to_json(rows: &[ConvergenceRow]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize") + "\n"
}
