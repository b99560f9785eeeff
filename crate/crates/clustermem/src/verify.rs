//! The `verify` suite: every structural and numerical invariant of the
//! simulator, each reported with its residual and tolerance.

use std::fmt::Write;

use clustermem_core::channel::{c3_grid_maximum, c3_maximum, composition_identity_check};
use clustermem_core::cluster::{edge_gate, NetworkTable, LINEAR4_TABLE};
use clustermem_core::protocol::{
    channel_permutation, input_variance_closed_form, nullifier_prefactor, protocol_ordering,
    retrieval_transform, run_protocol, sign_flip_check, storage_transform, store_and_retrieve,
    ProtocolConfig, Stage,
};
use clustermem_core::witness::{entanglement_report, Bipartition};
use clustermem_core::{
    build_graph_cluster, build_linear4_cluster, check_symplectic, coefficients,
    commutator_coefficient, nullifiers, squeezer_bank, transfer_beam_splitter, CouplingStrength,
    GaussianState, GraphSpec, ModeKind, ModeLabel, Quadrature, QuadratureCombination,
    QuadratureOrdering, SqueezingProfile, SymplecticTransform,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::plot::{self, Panel};
use crate::sweep::{coefficient_sweep, variance_sweep, SweepSpec, COEFFICIENT_SERIES};
use crate::table;

pub const RANDOM_CASES: usize = 100;
const KAPPA_GRID: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.5, 5.0];
const R_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 3.0];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Replaces every check's tolerance when set.
    pub tolerance_override: Option<f64>,
    /// Network table checked for symplecticity; swap in a corrupted one to test the harness.
    pub network_table: NetworkTable,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tolerance_override: None,
            network_table: LINEAR4_TABLE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<44} residual {:.3e}  tol {:.1e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

/// Evaluates a block whose `?` errors become an infinite residual.
macro_rules! attempt {
    ($body:block) => {
        (|| -> Result<f64, CliError> { $body })()
    };
}

struct Suite<'a> {
    opts: &'a VerifyOptions,
    report: VerifyReport,
}

impl Suite<'_> {
    fn record(&mut self, name: &'static str, tolerance: f64, residual: Result<f64, CliError>) {
        let tolerance = self.opts.tolerance_override.unwrap_or(tolerance);
        // an evaluation error counts as an infinite residual
        let residual = residual.unwrap_or(f64::INFINITY);
        self.report.checks.push(Check {
            name,
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    }
}

fn k(v: f64) -> CouplingStrength {
    CouplingStrength::new(v).expect("grid values are valid couplings")
}

fn rotation(theta: f64) -> SymplecticTransform {
    let (s, c) = theta.sin_cos();
    SymplecticTransform::new(DMatrix::from_row_slice(2, 2, &[c, s, -s, c])).expect("rotation")
}

fn random_symplectic(rng: &mut ChaCha8Rng, ordering: &QuadratureOrdering, depth: usize) -> SymplecticTransform {
    let modes = ordering.modes().to_vec();
    let n = modes.len();
    let mut total = SymplecticTransform::identity(n);
    for _ in 0..depth {
        let a = modes[rng.gen_range(0..n)];
        let local = match rng.gen_range(0..3) {
            0 => SymplecticTransform::squeezer(rng.gen_range(-1.0..1.0))
                .and_then(|s| s.embed(&[a], ordering)),
            1 => rotation(rng.gen_range(0.0..std::f64::consts::TAU)).embed(&[a], ordering),
            _ if n > 1 => {
                let b = modes[(modes.iter().position(|m| *m == a).unwrap() + rng.gen_range(1..n)) % n];
                transfer_beam_splitter(k(rng.gen_range(0.0..3.0))).embed(&[a, b], ordering)
            }
            _ => Ok(SymplecticTransform::identity(n)),
        }
        .expect("modes come from the ordering");
        total = total.then(&local).expect("same dimension");
    }
    total
}

fn random_combination(rng: &mut ChaCha8Rng, dim: usize) -> QuadratureCombination {
    let mut c = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    c[0] += 2.0;
    QuadratureCombination::new(c, "random").expect("nonzero")
}

fn random_graph(rng: &mut ChaCha8Rng) -> GraphSpec {
    let n = rng.gen_range(1..8);
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.gen_bool(0.4) {
                edges.push((a, b));
            }
        }
    }
    GraphSpec::new(n, edges).expect("generated graph is simple")
}

fn light(n: usize) -> QuadratureOrdering {
    QuadratureOrdering::channels(ModeKind::Light, n).expect("n >= 1")
}

fn count(violations: impl Iterator<Item = bool>) -> f64 {
    violations.filter(|v| *v).count() as f64
}

#[allow(clippy::redundant_closure_call)]
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut s = Suite {
        opts,
        report: VerifyReport::default(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    // --- symplectic structure ---
    s.record(
        "network.symplectic",
        1e-12,
        check_symplectic(&opts.network_table.matrix(), 1e-12).map(|c| c.residual).map_err(Into::into),
    );
    s.record(
        "squeezer_bank.symplectic",
        1e-10,
        [-2.0, 0.0, 0.5, 1.0, 3.0, 8.0]
            .into_iter()
            .map(|r| Ok(squeezer_bank(&SqueezingProfile::uniform(r, 4)?).residual()))
            .try_fold(0.0f64, |m, r: Result<f64, CliError>| Ok(m.max(r?))),
    );
    s.record(
        "transfer_map.symplectic",
        1e-12,
        Ok((0..=24).map(|i| transfer_beam_splitter(k(0.25 * i as f64)).residual()).fold(0.0, f64::max)),
    );
    s.record("edge_gates.symplectic", 1e-10, attempt!({
        let mut worst: f64 = 0.0;
        let mut r = Ok(());
        for _ in 0..20 {
            let g = random_graph(&mut rng);
            for &(a, b) in g.edges() {
                match edge_gate(a, b, g.n_vertices()) {
                    Ok(t) => worst = worst.max(t.residual()),
                    Err(e) => r = Err(e),
                }
            }
        }
        r.map(|_| worst).map_err(Into::into)
    }));
    s.record("protocol_maps.symplectic", 1e-10, attempt!({
        let o = protocol_ordering();
        KAPPA_GRID.into_iter().try_fold(0.0f64, |m, kappa| {
            let st = storage_transform(k(kappa), &o)?;
            let rt = retrieval_transform(k(kappa), &o)?;
            Ok(m.max(st.residual()).max(rt.residual()))
        })
    }));

    // --- Gaussian states ---
    s.record(
        "vacuum.uncertainty_saturated",
        1e-9,
        Ok((1..=6).map(|n| GaussianState::vacuum(light(n)).uncertainty_margin().abs()).fold(0.0, f64::max)),
    );
    s.record("uncertainty.preserved", 1e-9, attempt!({
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_CASES {
            let o = light(rng.gen_range(1..5));
            let prep = random_symplectic(&mut rng, &o, 8);
            let next = random_symplectic(&mut rng, &o, 8);
            let out = GaussianState::vacuum(o).apply(&prep).and_then(|st| st.apply(&next));
            worst = worst.max(out.map(|st| (-st.uncertainty_margin()).max(0.0)).unwrap_or(f64::INFINITY));
        }
        Ok(worst)
    }));
    s.record("commutator.invariant", 1e-10, attempt!({
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_CASES {
            let n = rng.gen_range(1..6);
            let t = random_symplectic(&mut rng, &light(n), 12);
            let u = random_combination(&mut rng, 2 * n);
            let v = random_combination(&mut rng, 2 * n);
            let tu = QuadratureCombination::new(t.transpose_apply(u.coefficients())?, "Tu")?;
            let tv = QuadratureCombination::new(t.transpose_apply(v.coefficients())?, "Tv")?;
            worst = worst.max((commutator_coefficient(&u, &v)? - commutator_coefficient(&tu, &tv)?).abs());
        }
        Ok(worst)
    }));
    s.record("variance.translation_invariant", 0.0, attempt!({
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_CASES {
            let o = light(rng.gen_range(1..5));
            let st = GaussianState::vacuum(o.clone()).apply(&random_symplectic(&mut rng, &o, 8))?;
            let d = DVector::from_fn(o.dim(), |_, _| rng.gen_range(-50.0..50.0));
            let u = random_combination(&mut rng, o.dim());
            worst = worst.max((st.variance(&u)? - st.displaced(&d)?.variance(&u)?).abs());
        }
        Ok(worst)
    }));

    // --- cluster construction ---
    let chain = GraphSpec::linear(4).expect("path graph");
    let chain_nullifiers = nullifiers(&chain).expect("valid graph");
    s.record("cluster.input_closed_form", 1e-12, attempt!({
        R_GRID.into_iter().try_fold(0.0f64, |m, r| {
            let st = build_linear4_cluster(&SqueezingProfile::uniform(r, 4)?)?;
            let v = chain_nullifiers.variances(&st)?;
            let mut worst = m;
            for (i, vi) in v.iter().enumerate() {
                worst = worst.max((vi - input_variance_closed_form(r, i + 1)?).abs());
            }
            Ok(worst)
        })
    }));
    s.record("cluster.large_squeezing_limit", 1e-8, attempt!({
        build_linear4_cluster(&SqueezingProfile::uniform(10.0, 4).expect("finite"))
            .and_then(|st| chain_nullifiers.variances(&st))
            .map(|v| v.into_iter().fold(0.0, f64::max))
            .map_err(Into::into)
    }));
    s.record("cluster.monotone_in_r", 0.0, attempt!({
        let mut prev = vec![f64::INFINITY; 4];
        let mut bad = 0.0;
        for i in 0..=30 {
            let st = build_linear4_cluster(&SqueezingProfile::uniform(0.1 * i as f64, 4)?)?;
            let v = chain_nullifiers.variances(&st)?;
            bad += count(v.iter().zip(&prev).map(|(a, b)| a >= b));
            prev = v;
        }
        Ok(bad)
    }));
    s.record("graph_cluster.nullifier_variance", 1e-12, attempt!({
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let g = random_graph(&mut rng);
            let r: Vec<f64> = (0..g.n_vertices()).map(|_| rng.gen_range(0.0..2.5)).collect();
            let st = build_graph_cluster(&g, &SqueezingProfile::new(r.clone())?)?;
            for (v, ri) in nullifiers(&g)?.variances(&st)?.iter().zip(&r) {
                worst = worst.max((v - 0.25 * (-2.0 * ri).exp()).abs());
            }
        }
        Ok(worst)
    }));
    s.record("nullifiers.commute", 1e-12, attempt!({
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_CASES {
            let set = nullifiers(&random_graph(&mut rng))?;
            for u in set.combinations() {
                for v in set.combinations() {
                    worst = worst.max(commutator_coefficient(u, v)?.abs());
                }
            }
        }
        Ok(worst)
    }));

    // --- memory channel ---
    let kappa_curve: Vec<_> = (0..=300).map(|i| coefficients(k(0.01 * i as f64))).collect();
    s.record(
        "coefficients.unit_norm",
        1e-12,
        Ok(kappa_curve.iter().map(|c| (c.norm_sqr() - 1.0).abs()).fold(0.0, f64::max)),
    );
    s.record(
        "coefficients.c1_increasing",
        0.0,
        Ok(count(kappa_curve.windows(2).map(|w| w[1].c1 <= w[0].c1))),
    );
    s.record(
        "coefficients.c2_decreasing",
        0.0,
        Ok(count(kappa_curve.windows(2).map(|w| w[1].c2 >= w[0].c2))),
    );
    let far = coefficients(k(6.0));
    s.record("coefficients.c1_limit", 1e-15, Ok((far.c1 - 1.0).abs()));
    s.record("coefficients.c2_c3_limit", 2e-8, Ok(far.c2.max(far.c3)));
    s.record("transfer_map.xp_symmetry", 0.0, attempt!({
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let m = transfer_beam_splitter(k(0.3 * i as f64)).into_matrix();
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst
                        .max((m[(2 * a, 2 * b)] - m[(2 * a + 1, 2 * b + 1)]).abs())
                        .max(m[(2 * a, 2 * b + 1)].abs())
                        .max(m[(2 * a + 1, 2 * b)].abs());
                }
            }
        }
        Ok(worst)
    }));
    s.record(
        "composition_identity",
        1e-12,
        Ok((0..RANDOM_CASES)
            .map(|_| composition_identity_check(k(rng.gen_range(0.0..5.0))))
            .fold(0.0, f64::max)),
    );
    let (ka, ca) = c3_maximum();
    let grid_peak = c3_grid_maximum(0.0, 3.0, 1e-4);
    s.record(
        "c3_maximum.location",
        1e-4,
        grid_peak.clone().map(|(kg, _)| (kg - ka).abs()).map_err(Into::into),
    );
    s.record(
        "c3_maximum.value",
        1e-8,
        grid_peak.map(|(_, cg)| (cg - ca).abs()).map_err(Into::into),
    );

    // --- protocol ---
    let mut runs = Vec::new();
    for kappa in KAPPA_GRID {
        for r in R_GRID {
            runs.push(((kappa, r), run_protocol(&ProtocolConfig::uniform(kappa, r).expect("grid config"))));
        }
    }
    s.record(
        "protocol.closed_forms_grid",
        1e-12,
        runs.iter().try_fold(0.0f64, |m, (_, run)| {
            let run = run.as_ref().map_err(|e| CliError::Model(e.clone()))?;
            Ok(run.reports.iter().map(|r| r.max_deviation).fold(m, f64::max))
        }),
    );
    s.record(
        "protocol.oracle_agreement",
        1e-12,
        runs.iter().try_fold(0.0f64, |m, (_, run)| {
            let run = run.as_ref().map_err(|e| CliError::Model(e.clone()))?;
            Ok(run.reports.iter().map(|r| r.oracle_deviation()).fold(m, f64::max))
        }),
    );
    s.record("protocol.stage_ordering", 0.0, attempt!({
        let mut bad = 0.0;
        for i in 1..=30 {
            let run = run_protocol(&ProtocolConfig::uniform(1.5, 0.1 * i as f64)?)?;
            let [a, b, c] = [Stage::Input, Stage::Stored, Stage::Retrieved].map(|st| run.report(st).nullifier_variances);
            bad += count((0..4).map(|j| !(a[j] < b[j] && b[j] < c[j])));
        }
        Ok(bad)
    }));
    let u25 = (-6.25f64).exp();
    s.record("protocol.strong_coupling_coincidence", 0.75 * (2.0 - u25) * u25, attempt!({
        let mut gap: f64 = 0.0;
        for i in 0..=60 {
            let run = run_protocol(&ProtocolConfig::uniform(2.5, 0.05 * i as f64)?)?;
            let inp = run.report(Stage::Input).nullifier_variances;
            for st in [Stage::Stored, Stage::Retrieved] {
                for (a, b) in inp.iter().zip(run.report(st).nullifier_variances) {
                    gap = gap.max((a - b).abs());
                }
            }
        }
        Ok(gap)
    }));
    s.record("protocol.channel_permutation", 1e-12, attempt!({
        let o = protocol_ordering();
        let lights = light(4);
        let mut worst: f64 = 0.0;
        for _ in 0..RANDOM_CASES {
            let mut perm: Vec<usize> = (0..4).collect();
            for i in (1..4).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let prep = random_symplectic(&mut rng, &lights, 12).embed(lights.modes(), &o)?;
            let input = GaussianState::vacuum(o.clone()).apply(&prep)?;
            let p = channel_permutation(&perm, &o)?;
            let kappa = k(rng.gen_range(0.0..4.0));
            let (_, direct) = store_and_retrieve(&input, kappa)?;
            let (_, relabelled) = store_and_retrieve(&input.apply(&p)?, kappa)?;
            worst = worst.max((relabelled.cov() - direct.apply(&p)?.cov()).amax());
        }
        Ok(worst)
    }));
    s.record("protocol.retrieved_covariance_bound", 0.0, attempt!({
        let lights: Vec<ModeLabel> = (1..=4).map(ModeLabel::light).collect();
        let readouts: Vec<ModeLabel> = (1..=4).map(ModeLabel::readout).collect();
        let mut excess: f64 = 0.0;
        for ((kappa, r), _) in &runs {
            let mut cfg = ProtocolConfig::uniform(*kappa, *r)?;
            cfg.track_stage_snapshots = true;
            let run = run_protocol(&cfg)?;
            let input = run.snapshots[0].1.reduced(&lights)?;
            let output = run.final_state.reduced(&readouts)?;
            let c1 = coefficients(k(*kappa)).c1;
            let bound = (1.0 - c1 * c1) * ((2.0 * r).exp() / 4.0).max(1.0);
            excess = excess.max((output.cov() - input.cov()).amax() - bound);
        }
        Ok(excess.max(0.0))
    }));
    s.record("protocol.stored_correlation_residual", 1e-12, attempt!({
        let mut worst: f64 = 0.0;
        for ((kappa, r), run) in &runs {
            let run = run.as_ref().map_err(|e| CliError::Model(e.clone()))?;
            let stored = run.report(Stage::Stored).nullifier_variances;
            let u = (-kappa * kappa).exp();
            for (i, v) in stored.iter().enumerate() {
                let residual = v - input_variance_closed_form(*r, i + 1)?;
                let expected = nullifier_prefactor(i + 1)? * u * (1.0 - (-2.0 * r).exp());
                worst = worst.max((residual - expected).abs());
            }
        }
        Ok(worst)
    }));
    s.record("protocol.sign_flip", 1e-12, attempt!({
        let mut worst: f64 = 0.0;
        for kappa in KAPPA_GRID.into_iter().chain([6.0]) {
            let d: Vec<f64> = (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect();
            worst = worst.max(sign_flip_check(k(kappa), &d)?);
        }
        Ok(worst)
    }));
    s.record("protocol.sign_flip_exact_negation", 1e-10, attempt!({
        let o = protocol_ordering();
        let mut d = DVector::zeros(o.dim());
        d[o.index(ModeLabel::light(1), Quadrature::X)?] = 1.0;
        let (_, out) = store_and_retrieve(&GaussianState::vacuum(o.clone()).displaced(&d)?, k(6.0))?;
        Ok((out.mean()[o.index(ModeLabel::readout(1), Quadrature::X)?] + 1.0).abs())
    }));
    let asymptote = run_protocol(&ProtocolConfig::uniform(1.5, 15.0).expect("valid"));
    s.record(
        "protocol.stored_asymptote",
        1e-6,
        asymptote
            .as_ref()
            .map(|run| (run.report(Stage::Stored).nullifier_variances[0] - 0.052_700).abs())
            .map_err(|e| CliError::Model(e.clone())),
    );
    s.record(
        "protocol.retrieved_asymptote",
        1e-6,
        asymptote
            .as_ref()
            .map(|run| (run.report(Stage::Retrieved).nullifier_variances[0] - 0.099_845).abs())
            .map_err(|e| CliError::Model(e.clone())),
    );

    // --- entanglement witness ---
    let cuts = Bipartition::chain_cuts(4);
    s.record("witness.unsqueezed_not_witnessed", 0.0, attempt!({
        let st = build_linear4_cluster(&SqueezingProfile::uniform(0.0, 4)?)?;
        Ok(count(entanglement_report(&st, &chain_nullifiers, &cuts)?.entries.iter().map(|e| e.witnessed)))
    }));
    s.record("witness.retrieved_state_witnessed", 0.0, attempt!({
        let run = run_protocol(&ProtocolConfig::uniform(2.5, 2.0)?)?;
        let set = clustermem_core::protocol::linear4_nullifiers(&protocol_ordering(), ModeKind::Readout)?;
        let rep = entanglement_report(&run.final_state, &set, &cuts)?;
        let informative = rep.informative().count();
        Ok(count(rep.informative().map(|e| !e.witnessed)) + if informative == 0 { 1.0 } else { 0.0 })
    }));

    // --- output formats ---
    s.record("csv.round_trip", 0.0, attempt!({
        let c = coefficient_sweep(&SweepSpec::kappa(0.0, 3.0, 0.01))?;
        let v = variance_sweep(&SweepSpec::r(0.0, 3.0, 0.05, 1.5))?;
        let (mut bc, mut bv) = (Vec::new(), Vec::new());
        table::write_coefficients(&c, &mut bc)?;
        table::write_variances(&v, &mut bv)?;
        let back_c = table::read_coefficients(bc.as_slice())?;
        let back_v = table::read_variances(bv.as_slice())?;
        Ok(count(back_c.iter().zip(&c).map(|(a, b)| a != b)) + count(back_v.iter().zip(&v).map(|(a, b)| a != b))
            + (back_c.len() as f64 - c.len() as f64).abs())
    }));
    s.record("svg.well_formed", 0.0, attempt!({
        let recs = coefficient_sweep(&SweepSpec::kappa(0.0, 3.0, 0.05))?;
        let panels: Vec<Panel> = (0..2)
            .map(|i| Panel {
                title: format!("panel <{i}> & co"),
                x_label: "kappa".into(),
                y_label: "value".into(),
                series: crate::series_of(&recs, &COEFFICIENT_SERIES, None),
            })
            .collect();
        let svg = plot::render(&panels);
        let Ok(doc) = roxmltree::Document::parse(&svg) else {
            return Ok(1.0);
        };
        let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        Ok((lines as f64 - 6.0).abs())
    }));
    s.record("csv.deterministic", 0.0, attempt!({
        let render = || -> Result<Vec<u8>, CliError> {
            let mut buf = Vec::new();
            table::write_variances(&variance_sweep(&SweepSpec::r(0.0, 3.0, 0.05, 2.5))?, &mut buf)?;
            Ok(buf)
        };
        Ok(if render()? == render()? { 0.0 } else { 1.0 })
    }));

    s.report
}

/// Names of all checks, in report order.
pub fn check_names() -> Vec<&'static str> {
    run_verify(&VerifyOptions::default()).checks.iter().map(|c| c.name).collect()
}
