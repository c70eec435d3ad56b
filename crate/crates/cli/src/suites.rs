//! The verification suites: named records with tolerances around [`crate::checks`].

use std::time::Instant;

use heisenberg::Result;

use crate::checks::{self, Setup};
use crate::config::{RunConfig, Suite};
use crate::report::{timed, Bound, CheckRecord};

/// Context shared by the checks of one suite run.
struct Ctx<'a> {
    setup: &'a Setup,
    /// Replaces every upper-bound tolerance of the suite when set.
    override_tol: Option<f64>,
    records: Vec<CheckRecord>,
}

struct Spec {
    name: String,
    anchor: &'static str,
    tol: f64,
    bound: Bound,
}

fn upper(name: impl Into<String>, anchor: &'static str, tol: f64) -> Spec {
    Spec {
        name: name.into(),
        anchor,
        tol,
        bound: Bound::Upper,
    }
}

fn lower(name: impl Into<String>, anchor: &'static str, tol: f64) -> Spec {
    Spec {
        name: name.into(),
        anchor,
        tol,
        bound: Bound::Lower,
    }
}

impl Ctx<'_> {
    fn tol(&self, spec: &Spec) -> f64 {
        match (spec.bound, self.override_tol) {
            (Bound::Upper, Some(t)) => t,
            _ => spec.tol,
        }
    }

    fn one(&mut self, spec: Spec, f: impl FnOnce() -> Result<f64>) {
        let tol = self.tol(&spec);
        self.records.push(timed(&spec.name, spec.anchor, tol, spec.bound, f));
    }

    /// Several records from one computation; the wall time is split evenly.
    fn many<const K: usize>(&mut self, specs: [Spec; K], f: impl FnOnce() -> Result<[f64; K]>) {
        let start = Instant::now();
        let out = f();
        let share = start.elapsed() / K as u32;
        for (i, spec) in specs.into_iter().enumerate() {
            let tol = self.tol(&spec);
            let mut rec = match &out {
                Ok(v) => CheckRecord::new(spec.name, spec.anchor, v[i], tol, spec.bound),
                Err(e) => CheckRecord::failed(spec.name, spec.anchor, tol, spec.bound, e.to_string()),
            };
            rec.wall_time = share;
            self.records.push(rec);
        }
    }
}

fn tag(name: &str, lambda: f64) -> String {
    format!("{name}[lambda={lambda}]")
}

/// Runs one suite.
pub fn run(suite: Suite, setup: &Setup, override_tol: Option<f64>, slow: bool) -> Vec<CheckRecord> {
    let mut ctx = Ctx {
        setup,
        override_tol,
        records: Vec::new(),
    };
    match suite {
        Suite::Basis => basis(&mut ctx),
        Suite::Representation => representation(&mut ctx),
        Suite::Twisted => twisted(&mut ctx),
        Suite::Weyl => weyl(&mut ctx),
        Suite::Fourier => fourier(&mut ctx, slow),
        Suite::Factorizer => factorizer(&mut ctx),
    }
    ctx.records
}

/// Runs the given suites in order with the configured tolerances.
pub fn run_all(suites: &[Suite], config: &RunConfig) -> Vec<CheckRecord> {
    let setup = Setup::from(config);
    suites
        .iter()
        .flat_map(|&s| run(s, &setup, config.tolerances.get(s), config.slow))
        .collect()
}

fn basis(ctx: &mut Ctx) {
    let s = ctx.setup.clone();
    let kmax = s.degree.max(8);
    ctx.one(
        upper(format!("basis.hermite_gram[k<={kmax}]"), "the normalised Hermite functions h_k are orthonormal in L2(R)", 1e-12),
        || checks::hermite_gram_defect(kmax, s.quad_points.max(kmax + 1)),
    );
    for &l in &s.lambdas {
        ctx.one(
            upper(tag("basis.scaled_gram", l), "Phi_alpha^lambda(x) = |lambda|^(n/4) Phi_alpha(sqrt|lambda| x) is orthonormal", 1e-12),
            || checks::scaled_gram_defect(&s, l),
        );
        ctx.one(
            upper(tag("basis.expansion_round_trip", l), "expanding a finite combination of Phi_alpha^lambda recovers its coefficients", 1e-10),
            || checks::expansion_round_trip(&s, l),
        );
    }
}

fn representation(ctx: &mut Ctx) {
    let s = ctx.setup.clone();
    for &l in &s.lambdas {
        ctx.one(
            upper(tag("representation.closed_form_vs_quadrature", l), "(pi_lambda(z) Phi_alpha, Phi_beta) computed two ways agree for |z| <= 1", 1e-10),
            || checks::pi_closed_form_vs_quadrature(&s, l),
        );
        ctx.one(
            upper(tag("representation.unitarity", l), "pi_lambda(z) is unitary on L2(R^n)", 5e-3),
            || checks::unitarity_defect(&s, l),
        );
        ctx.one(
            upper(tag("representation.homomorphism", l), "pi_lambda(z) pi_lambda(w) = e^(i lambda/2 Im(z.conj w)) pi_lambda(z + w)", 5e-3),
            || checks::representation_defect(&s, l),
        );
        ctx.one(
            upper(tag("representation.special_hermite_gram", l), "the special Hermite functions Phi_ab^lambda are orthonormal in L2(C^n)", 1e-6),
            || checks::special_hermite_gram_defect(&s, l),
        );
    }
}

fn twisted(ctx: &mut Ctx) {
    let s = ctx.setup.clone();
    for &l in &s.lambdas {
        ctx.many(
            [
                upper(tag("twisted.product_rule", l), "conj Phi_ab *_lambda conj Phi_mn = (2 pi)^(n/2) |lambda|^(-n/2) delta_an conj Phi_mb", 1e-3),
                upper(tag("twisted.product_rule_zero", l), "conj Phi_ab *_lambda conj Phi_mn = 0 when a != n", 1e-5),
            ],
            || checks::product_rule_defects(&s, l).map(|(a, b)| [a, b]),
        );
        ctx.one(
            lower(tag("twisted.noncommutative", l), "lambda-twisted convolution is not commutative", 0.1),
            || checks::noncommutativity(&s, l),
        );
        ctx.one(
            upper(tag("twisted.translation", l), "W(tau_z^lambda f) = pi(z) W(f) and W(tau_z^-lambda f) = W(f) pi(z)", 1e-6),
            || checks::twisted_translation_defect(&s, l),
        );
        ctx.one(
            upper(tag("twisted.coefficient_round_trip", l), "f = sum A_ab conj Phi_ab^lambda is recovered by expansion", 1e-8),
            || checks::coefficient_round_trip(&s, l),
        );
    }
}

fn weyl(ctx: &mut Ctx) {
    let s = ctx.setup.clone();
    let s4 = Setup { degree: 4, ..s.clone() };
    for &l in &s.lambdas {
        let product = "W(f *_lambda g) = W(f) W(g)";
        let adjoint = "W(f*) = W(f)^dagger";
        ctx.many(
            [
                upper(tag("weyl.product.quadrature", l), product, 1e-3),
                upper(tag("weyl.adjoint.quadrature", l), adjoint, 1e-3),
                upper(tag("weyl.product.spectral", l), product, 1e-12),
                upper(tag("weyl.adjoint.spectral", l), adjoint, 1e-12),
            ],
            || {
                checks::star_homomorphism(&s4, l).map(|r| {
                    [r.product_quadrature, r.adjoint_quadrature, r.product_spectral, r.adjoint_spectral]
                })
            },
        );
        ctx.one(
            upper(tag("weyl.rank_one", l), "W(conj Phi_00^lambda) = (2 pi)^(n/2) |lambda|^(-n/2) e_0 e_0^dagger", 1e-6),
            || checks::rank_one_defect(&s, l),
        );
        ctx.one(
            upper(tag("weyl.norm_bound", l), "||W(f)||_op <= ||f||_1", 1e-3),
            || checks::weyl_norm_excess(&s, l),
        );
    }
}

fn fourier(ctx: &mut Ctx, slow: bool) {
    let s = ctx.setup.clone();
    for &l in &s.lambdas {
        ctx.one(
            upper(tag("fourier.slice_closed_form", l), "f^lambda(z) = g(z) integral h(t) e^(i lambda t) dt for separable f", 1e-8),
            || checks::slice_closed_form(&s, l),
        );
        ctx.one(
            upper(tag("fourier.slice_exchange", l), "(f * g)^lambda = f^lambda *_lambda g^lambda", 1e-3),
            || checks::slice_exchange(&s, l),
        );
        ctx.one(
            upper(tag("fourier.involution", l), "(f*)^(lambda) = f^(lambda)^dagger", 1e-3),
            || checks::fourier_involution(&s, l),
        );
        ctx.one(
            upper(tag("fourier.convolution", l), "(f * g)^(lambda) = f^(lambda) g^(lambda)", 1e-2),
            || checks::fourier_product(&s, l),
        );
        ctx.one(
            upper(tag("fourier.right_translation", l), "(R_g f)^(lambda) = f^(lambda) pi_lambda(g)^dagger", 5e-3),
            || checks::fourier_right_translation(&s, l),
        );
        ctx.one(
            upper(tag("fourier.central_translation", l), "(R_(0,s) f)^(lambda) = e^(-i lambda s) f^(lambda)", 1e-8),
            || checks::fourier_central_translation(&s, l),
        );
        ctx.one(
            upper(tag("fourier.vanishing_slice", l), "f^(lambda0) = 0 when the central transform of f vanishes at lambda0", 1e-10),
            || checks::fourier_vanishing_slice(&s, l),
        );
    }
    for l in [1.0, 2.0] {
        ctx.one(
            upper(tag("fourier.norm_bound", l), "||f^(lambda)||_op <= ||f||_1", 1e-3),
            || checks::fourier_norm_excess(&s, l),
        );
    }
    if slow {
        let anchor = "||f||_2^2 = integral ||f^(lambda)||_HS^2 dmu(lambda), dmu = (2 pi)^(-n-1) |lambda|^n dlambda";
        ctx.one(upper("fourier.plancherel[N=10,grid=41]", anchor, 1e-2), || {
            checks::plancherel(10, 41, s.quad_points, s.box_half_width)
        });
        ctx.one(upper("fourier.plancherel[N=14,grid=81]", anchor, 1e-2), || {
            checks::plancherel(14, 81, s.quad_points, s.box_half_width)
        });
    }
}

fn factorizer(ctx: &mut Ctx) {
    let s = ctx.setup.clone();
    let mut degrees = vec![2, 4, s.degree];
    degrees.sort_unstable();
    degrees.dedup();
    let decomposition = "T = sum_j V_j W_lambda V_j^dagger on a subspace, zero on its complement";
    ctx.many(
        [
            upper("factorizer.round_trip.count_mismatches", "the number of blocks and the residual dimension are recovered", 0.0),
            upper("factorizer.round_trip.orthonormality", "the v_beta^j and the residual basis are orthonormal", 1e-10),
            upper("factorizer.round_trip.intertwining", "T(f) V_j = V_j W_lambda(f)", 1e-9),
            upper("factorizer.round_trip.annihilation", decomposition, 1e-9),
        ],
        || {
            checks::factorizer_round_trip(&s, &degrees, 10)
                .map(|r| [r.count_mismatches as f64, r.orthonormality, r.intertwining, r.annihilation])
        },
    );
    ctx.one(
        upper("factorizer.basis_independence", "the decomposition does not depend on the basis chosen for R(Q_00)", 1e-9),
        || checks::basis_choice_independence(&s),
    );
    let relations = "Q_ab Q_mn = delta_an Q_mb and Q_ab^dagger = Q_ba";
    ctx.one(upper("factorizer.relations.exact", relations, 1e-12), || checks::exact_relation_residual(&s));
    ctx.many(
        [
            lower("factorizer.relations.perturbed_residual", relations, 1e-4),
            upper("factorizer.relations.perturbed_residual_scale", relations, 1e-2),
            lower("factorizer.relations.perturbed_flagged", relations, 1.0),
        ],
        || checks::perturbed_relations(&s).map(|(r, flagged)| [r, r, f64::from(u8::from(flagged))]),
    );
    ctx.one(
        lower("factorizer.relations.degenerate_flagged", "Q_aa = 0 marks a degenerate index", 1.0),
        || checks::degenerate_flags(&s).map(|k| k as f64),
    );
    ctx.one(
        upper("factorizer.perturbed_recovery", "T(f) V_j = V_j W_lambda(f) survives noise below the tolerances", 1e-4),
        || checks::perturbed_recovery(&s),
    );
    for &l in &s.lambdas {
        ctx.many(
            [
                upper(tag("factorizer.finiteness", l), "||T(f)||_HS^2 = m ||W_lambda(f)||_HS^2", 1e-8),
                upper(tag("factorizer.finiteness_per_block", l), "||W_lambda(conj Phi_00)||_HS^2 = (2 pi)^n |lambda|^(-n) is independent of j", 1e-6),
                upper(tag("factorizer.finiteness_random", l), "||T(f)||_HS^2 = m ||W_lambda(f)||_HS^2", 1e-8),
            ],
            || checks::finiteness(&s, l).map(|(a, b, c)| [a, b, c]),
        );
    }
    let l = s.lambdas[0];
    let rigidity = "(Tf)(lambda) = f^(lambda) up to a unitary phase";
    ctx.many(
        [
            upper(tag("factorizer.reduction.relations", l), relations, 1e-3),
            upper(tag("factorizer.reduction.block_count_defect", l), rigidity, 0.0),
            upper(tag("factorizer.reduction.identity", l), rigidity, 1e-6),
            upper(tag("factorizer.reduction.rigidity", l), rigidity, 5e-3),
            lower(tag("factorizer.reduction.conjugated_rigidity", l), rigidity, 0.1),
            upper(tag("factorizer.reduction.conjugated_recovery", l), rigidity, 1e-6),
            lower(tag("factorizer.reduction.psi_rejected", l), "integral psi(t) e^(i lambda t) dt = 1 is required", 1.0),
        ],
        || {
            checks::reduction(&s, l).map(|r| {
                [
                    r.relation_residual,
                    (r.block_count as f64 - 1.0).abs(),
                    r.identity_defect,
                    r.rigidity,
                    r.conjugated_rigidity,
                    r.conjugated_recovery,
                    f64::from(u8::from(r.scaled_psi_rejected)),
                ]
            })
        },
    );
}
