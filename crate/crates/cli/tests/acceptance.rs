//! Acceptance criteria at their pinned tolerances, one line per criterion.
//!
//! Criterion 12 is slow and runs only with `--slow` or `HEISENBERG_SLOW=1`.

use std::process::ExitCode;
use std::time::Instant;

use heisenberg::Result;
use heisenberg_cli::checks::{self, Setup};

const LAMBDAS: [f64; 3] = [1.0, -1.0, 2.0];

/// Worst measured-over-tolerance ratio decides; each part must hold.
struct Part {
    label: String,
    measured: f64,
    tolerance: f64,
    lower: bool,
}

impl Part {
    fn upper(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance,
            lower: false,
        }
    }

    fn lower(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            measured,
            tolerance,
            lower: true,
        }
    }

    fn pass(&self) -> bool {
        if self.lower {
            self.measured >= self.tolerance
        } else {
            self.measured <= self.tolerance
        }
    }
}

type Criterion = (&'static str, fn() -> Result<Vec<Part>>);

fn setup(degree: usize) -> Setup {
    Setup {
        degree,
        ..Setup::default()
    }
}

fn c1() -> Result<Vec<Part>> {
    Ok(vec![Part::upper("gram k<=8", checks::hermite_gram_defect(8, 60)?, 1e-12)])
}

fn c2() -> Result<Vec<Part>> {
    let s = setup(4);
    LAMBDAS
        .iter()
        .map(|&l| Ok(Part::upper(format!("gram lambda={l}"), checks::special_hermite_gram_defect(&s, l)?, 1e-6)))
        .collect()
}

fn c3() -> Result<Vec<Part>> {
    let s = setup(6);
    let mut parts = Vec::new();
    for l in LAMBDAS {
        let (rel, zero) = checks::product_rule_defects(&s, l)?;
        parts.push(Part::upper(format!("relative lambda={l}"), rel, 1e-3));
        parts.push(Part::upper(format!("zero cases lambda={l}"), zero, 1e-5));
    }
    Ok(parts)
}

fn c4() -> Result<Vec<Part>> {
    let s = setup(4);
    let mut parts = Vec::new();
    for l in LAMBDAS {
        let r = checks::star_homomorphism(&s, l)?;
        parts.push(Part::upper(format!("product quadrature lambda={l}"), r.product_quadrature, 1e-3));
        parts.push(Part::upper(format!("adjoint quadrature lambda={l}"), r.adjoint_quadrature, 1e-3));
        parts.push(Part::upper(format!("product spectral lambda={l}"), r.product_spectral, 1e-12));
        parts.push(Part::upper(format!("adjoint spectral lambda={l}"), r.adjoint_spectral, 1e-12));
    }
    Ok(parts)
}

fn c5() -> Result<Vec<Part>> {
    let s = setup(6);
    LAMBDAS
        .iter()
        .map(|&l| Ok(Part::upper(format!("exchange lambda={l}"), checks::slice_exchange(&s, l)?, 1e-3)))
        .collect()
}

fn c6() -> Result<Vec<Part>> {
    let s = setup(6);
    let mut parts = Vec::new();
    for l in LAMBDAS {
        parts.push(Part::upper(format!("property 1 lambda={l}"), checks::fourier_involution(&s, l)?, 1e-3));
        parts.push(Part::upper(format!("property 2 lambda={l}"), checks::fourier_product(&s, l)?, 1e-2));
        parts.push(Part::upper(format!("property 3 lambda={l}"), checks::fourier_right_translation(&s, l)?, 5e-3));
        parts.push(Part::upper(format!("central lambda={l}"), checks::fourier_central_translation(&s, l)?, 1e-8));
    }
    Ok(parts)
}

fn c7() -> Result<Vec<Part>> {
    let s = setup(6);
    [1.0, 2.0]
        .iter()
        .map(|&l| Ok(Part::upper(format!("op - l1 lambda={l}"), checks::fourier_norm_excess(&s, l)?, 1e-3)))
        .collect()
}

fn c8() -> Result<Vec<Part>> {
    let r = checks::factorizer_round_trip(&setup(6), &[2, 4, 6], 10)?;
    Ok(vec![
        Part::upper(format!("count mismatches of {}", r.cases), r.count_mismatches as f64, 0.0),
        Part::upper("orthonormality", r.orthonormality, 1e-10),
        Part::upper("intertwining", r.intertwining, 1e-9),
        Part::upper("annihilation", r.annihilation, 1e-9),
    ])
}

fn c9() -> Result<Vec<Part>> {
    let s = setup(6);
    let (perturbed, flagged) = checks::perturbed_relations(&s)?;
    Ok(vec![
        Part::upper("exact", checks::exact_relation_residual(&s)?, 1e-12),
        Part::lower("perturbed residual", perturbed, 1e-4),
        Part::lower("perturbed flagged", f64::from(u8::from(flagged)), 1.0),
    ])
}

fn c10() -> Result<Vec<Part>> {
    let mut parts = Vec::new();
    for l in LAMBDAS {
        let (rel, per_block, random) = checks::finiteness(&setup(6), l)?;
        parts.push(Part::upper(format!("relative lambda={l}"), rel.max(random), 1e-8));
        parts.push(Part::upper(format!("per-block lambda={l}"), per_block, 1e-6));
    }
    Ok(parts)
}

fn c11() -> Result<Vec<Part>> {
    let r = checks::reduction(&setup(6), 1.0)?;
    Ok(vec![
        Part::upper("rigidity", r.rigidity, 5e-3),
        Part::lower("conjugated rigidity", r.conjugated_rigidity, 0.1),
    ])
}

fn c12() -> Result<Vec<Part>> {
    let coarse = checks::plancherel(10, 41, 60, 10.0)?;
    let fine = checks::plancherel(14, 81, 60, 10.0)?;
    Ok(vec![
        Part::upper("N=10 grid 41", coarse, 1e-2),
        Part::upper("N=14 grid 81 vs N=10", fine, coarse),
    ])
}

fn main() -> ExitCode {
    let slow = std::env::args().any(|a| a == "--slow")
        || std::env::var("HEISENBERG_SLOW").is_ok_and(|v| !v.is_empty() && v != "0");
    let criteria: [Criterion; 12] = [
        ("Hermite orthonormality", c1),
        ("special Hermite orthonormality", c2),
        ("twisted product rule", c3),
        ("Weyl *-homomorphism", c4),
        ("slice-convolution exchange", c5),
        ("group Fourier properties", c6),
        ("operator-norm bound", c7),
        ("factorizer round trip", c8),
        ("relation checking", c9),
        ("finiteness", c10),
        ("rigidity", c11),
        ("Plancherel", c12),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let k = k + 1;
        if k == 12 && !slow {
            println!("criterion {k:>2}: SKIP  {title} (slow; pass --slow or set HEISENBERG_SLOW=1)");
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(parts) => {
                let pass = parts.iter().all(Part::pass);
                // Report the part closest to (or furthest past) its tolerance.
                let worst = parts
                    .iter()
                    .max_by(|a, b| {
                        let score = |p: &Part| match (p.pass(), p.lower) {
                            (false, _) => f64::INFINITY,
                            (true, false) => p.measured / p.tolerance.max(f64::MIN_POSITIVE),
                            (true, true) => p.tolerance / p.measured,
                        };
                        score(a).total_cmp(&score(b))
                    })
                    .expect("at least one part");
                let cmp = if worst.lower { ">=" } else { "<=" };
                println!(
                    "criterion {k:>2}: {}  {title}: {} measured {:.3e} {cmp} tol {:.3e} ({secs:.1}s)",
                    if pass { "PASS" } else { "FAIL" },
                    worst.label,
                    worst.measured,
                    worst.tolerance
                );
                for p in parts.iter().filter(|p| !p.pass()) {
                    println!("               failing part: {} measured {:.3e} tol {:.3e}", p.label, p.measured, p.tolerance);
                }
                if !pass {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("criterion {k:>2}: FAIL  {title}: error {e} ({secs:.1}s)");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
