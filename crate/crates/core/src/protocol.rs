//! Store-and-retrieve of the four-mode linear cluster across four independent
//! light–atom channels, with the closed-form nullifier variances it must reproduce.
//!
//! The 12-mode register is ordered `L1..L4, A1..A4, L'1..L'4`. Storage applies
//! the transfer map to every `(A_i, L_i)`; retrieval applies the same map to
//! every `(A_i, L'_i)`.

use alloc::vec::Vec;

use nalgebra::DVector;

use crate::channel::{coefficients, transfer_beam_splitter, CouplingStrength};
use crate::cluster::{
    build_linear4_cluster_with, linear4_network, nullifiers_on, squeezer_bank, GraphSpec,
    NullifierSet, SqueezingProfile,
};
use crate::error::{Error, Result};
use crate::expansion::ModeExpansion;
use crate::mode::{ModeKind, ModeLabel, Quadrature, QuadratureOrdering};
use crate::state::{GaussianState, QuadratureCombination, VACUUM_VARIANCE};
use crate::symplectic::SymplecticTransform;

pub const CHANNELS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub kappa: CouplingStrength,
    pub profile: SqueezingProfile,
    pub track_stage_snapshots: bool,
}

impl ProtocolConfig {
    pub fn new(kappa: CouplingStrength, profile: SqueezingProfile, track_stage_snapshots: bool) -> Result<Self> {
        if profile.len() != CHANNELS {
            return Err(Error::Validation(alloc::format!(
                "protocol needs {CHANNELS} squeezing parameters, got {}",
                profile.len()
            )));
        }
        Ok(Self {
            kappa,
            profile,
            track_stage_snapshots,
        })
    }

    pub fn uniform(kappa: f64, r: f64) -> Result<Self> {
        Self::new(
            CouplingStrength::new(kappa)?,
            SqueezingProfile::uniform(r, CHANNELS)?,
            false,
        )
    }

    /// `Some(r)` when every mode carries the same squeezing.
    pub fn uniform_r(&self) -> Option<f64> {
        let v = self.profile.values();
        v.iter().all(|&r| r == v[0]).then_some(v[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Input,
    Stored,
    Retrieved,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Input, Stage::Stored, Stage::Retrieved];

    /// Which modes carry the cluster at this stage.
    pub fn carrier(self) -> ModeKind {
        match self {
            Stage::Input => ModeKind::Light,
            Stage::Stored => ModeKind::Atom,
            Stage::Retrieved => ModeKind::Readout,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Stored => "stored",
            Stage::Retrieved => "retrieved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    /// From covariance propagation.
    pub nullifier_variances: [f64; 4],
    pub closed_form_variances: [f64; 4],
    /// From the Heisenberg-picture expansion.
    pub oracle_variances: [f64; 4],
    /// `max |simulated - closed form|`
    pub max_deviation: f64,
}

impl StageReport {
    pub fn oracle_deviation(&self) -> f64 {
        max_abs_diff(&self.nullifier_variances, &self.oracle_variances)
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub reports: [StageReport; 3],
    pub final_state: GaussianState,
    /// Full 12-mode states after preparation, storage and retrieval, when requested.
    pub snapshots: Vec<(Stage, GaussianState)>,
}

impl ProtocolRun {
    pub fn report(&self, stage: Stage) -> &StageReport {
        &self.reports[stage as usize]
    }
}

pub fn protocol_ordering() -> QuadratureOrdering {
    let modes = [ModeKind::Light, ModeKind::Atom, ModeKind::Readout]
        .into_iter()
        .flat_map(|k| (1..=CHANNELS).map(move |c| ModeLabel::new(k, c)))
        .collect();
    QuadratureOrdering::new(modes).expect("distinct labels")
}

fn channel_maps(kappa: CouplingStrength, ordering: &QuadratureOrdering, partner: ModeKind) -> Result<SymplecticTransform> {
    let bs = transfer_beam_splitter(kappa);
    let mut total = SymplecticTransform::identity(ordering.n_modes());
    for c in 1..=CHANNELS {
        let local = bs.embed(&[ModeLabel::atom(c), ModeLabel::new(partner, c)], ordering)?;
        total = total.then(&local)?;
    }
    Ok(total)
}

/// Write-in: every `(A_i, L_i)` pair passes through the transfer map.
pub fn storage_transform(kappa: CouplingStrength, ordering: &QuadratureOrdering) -> Result<SymplecticTransform> {
    channel_maps(kappa, ordering, ModeKind::Light)
}

/// Read-out: every `(A_i, L'_i)` pair passes through the transfer map.
pub fn retrieval_transform(kappa: CouplingStrength, ordering: &QuadratureOrdering) -> Result<SymplecticTransform> {
    channel_maps(kappa, ordering, ModeKind::Readout)
}

/// Returns the states after storage and after retrieval.
pub fn store_and_retrieve(state: &GaussianState, kappa: CouplingStrength) -> Result<(GaussianState, GaussianState)> {
    let stored = state.apply(&storage_transform(kappa, state.ordering())?)?;
    let retrieved = stored.apply(&retrieval_transform(kappa, state.ordering())?)?;
    Ok((stored, retrieved))
}

/// Nullifiers of the linear chain `1-2-3-4` carried by `kind` modes of `ordering`.
pub fn linear4_nullifiers(ordering: &QuadratureOrdering, kind: ModeKind) -> Result<NullifierSet> {
    nullifiers_on(&GraphSpec::linear(CHANNELS)?, ordering, kind)
}

fn to_array(v: Vec<f64>) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run_protocol(config: &ProtocolConfig) -> Result<ProtocolRun> {
    run_protocol_with_network(config, &linear4_network())
}

pub(crate) fn run_protocol_with_network(
    config: &ProtocolConfig,
    network: &SymplecticTransform,
) -> Result<ProtocolRun> {
    if config.profile.len() != CHANNELS {
        return Err(Error::Validation("protocol profile must have 4 entries".into()));
    }
    let ordering = protocol_ordering();
    let extra: Vec<ModeLabel> = ordering.modes()[CHANNELS..].to_vec();
    let prepared = build_linear4_cluster_with(&config.profile, network)?.with_vacuum_modes(&extra)?;
    let storage = storage_transform(config.kappa, &ordering)?;
    let retrieval = retrieval_transform(config.kappa, &ordering)?;
    let stored = prepared.apply(&storage)?;
    let retrieved = stored.apply(&retrieval)?;

    // oracle chain starts from the 12-mode vacuum
    let lights: Vec<ModeLabel> = ordering.modes()[..CHANNELS].to_vec();
    let squeeze = squeezer_bank(&config.profile).embed(&lights, &ordering)?;
    let net = network.embed(&lights, &ordering)?;
    let chain = [squeeze, net, storage, retrieval];
    let vac = alloc::vec![VACUUM_VARIANCE; ordering.dim()];

    let mut reports = Vec::with_capacity(3);
    for (stage, state, chain_len) in [
        (Stage::Input, &prepared, 2),
        (Stage::Stored, &stored, 3),
        (Stage::Retrieved, &retrieved, 4),
    ] {
        let set = linear4_nullifiers(&ordering, stage.carrier())?;
        let simulated = to_array(set.variances(state)?);
        let oracle = ModeExpansion::new(&chain[..chain_len], vac.clone())?;
        let oracle_variances = to_array(
            set.combinations()
                .iter()
                .map(|u| oracle.variance(u))
                .collect::<Result<Vec<_>>>()?,
        );
        let closed = stage_closed_forms(&config.profile, config.kappa, stage)?;
        reports.push(StageReport {
            stage,
            nullifier_variances: simulated,
            closed_form_variances: closed,
            oracle_variances,
            max_deviation: max_abs_diff(&simulated, &closed),
        });
    }
    let snapshots = if config.track_stage_snapshots {
        alloc::vec![
            (Stage::Input, prepared),
            (Stage::Stored, stored),
            (Stage::Retrieved, retrieved.clone()),
        ]
    } else {
        Vec::new()
    };
    let mut it = reports.into_iter();
    Ok(ProtocolRun {
        reports: [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
        final_state: retrieved,
        snapshots,
    })
}

/// `1/2` for the end nullifiers (1, 4), `3/4` for the middle ones (2, 3).
pub fn nullifier_prefactor(which: usize) -> Result<f64> {
    match which {
        1 | 4 => Ok(0.5),
        2 | 3 => Ok(0.75),
        _ => Err(Error::Validation(alloc::format!("nullifier index {which} not in 1..=4"))),
    }
}

pub fn input_variance_closed_form(r: f64, which: usize) -> Result<f64> {
    Ok(nullifier_prefactor(which)? * libm::exp(-2.0 * r))
}

pub fn stored_variance_closed_form(r: f64, kappa: CouplingStrength, which: usize) -> Result<f64> {
    let pre = nullifier_prefactor(which)?;
    let u = libm::exp(-kappa.value() * kappa.value());
    Ok(pre * (1.0 - u) * libm::exp(-2.0 * r) + pre * u)
}

pub fn retrieved_variance_closed_form(r: f64, kappa: CouplingStrength, which: usize) -> Result<f64> {
    let pre = nullifier_prefactor(which)?;
    let u = libm::exp(-kappa.value() * kappa.value());
    Ok(pre * (1.0 - u) * (1.0 - u) * libm::exp(-2.0 * r) + pre * (2.0 - u) * u)
}

/// Input nullifier variances for per-mode squeezing `r_1..r_4`.
pub fn input_variances_per_mode(profile: &SqueezingProfile) -> Result<[f64; 4]> {
    if profile.len() != CHANNELS {
        return Err(Error::Validation("profile must have 4 entries".into()));
    }
    let e: Vec<f64> = profile.values().iter().map(|r| libm::exp(-2.0 * r)).collect();
    Ok([
        0.5 * e[0],
        0.625 * e[2] + 0.125 * e[3],
        0.125 * e[0] + 0.625 * e[1],
        0.5 * e[3],
    ])
}

/// Closed-form nullifier variances at `stage`. Uniform profiles use the
/// scalar-`r` expressions directly; otherwise the per-mode generalization.
pub fn stage_closed_forms(profile: &SqueezingProfile, kappa: CouplingStrength, stage: Stage) -> Result<[f64; 4]> {
    let v = profile.values();
    if v.len() == CHANNELS && v.iter().all(|&r| r == v[0]) {
        let r = v[0];
        let f = match stage {
            Stage::Input => |r, _k, w| input_variance_closed_form(r, w),
            Stage::Stored => stored_variance_closed_form,
            Stage::Retrieved => retrieved_variance_closed_form,
        };
        return Ok([f(r, kappa, 1)?, f(r, kappa, 2)?, f(r, kappa, 3)?, f(r, kappa, 4)?]);
    }
    let input = input_variances_per_mode(profile)?;
    let u = libm::exp(-kappa.value() * kappa.value());
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let pre = nullifier_prefactor(i + 1)?;
        *o = match stage {
            Stage::Input => input[i],
            Stage::Stored => (1.0 - u) * input[i] + u * pre,
            Stage::Retrieved => (1.0 - u) * (1.0 - u) * input[i] + (2.0 - u) * u * pre,
        };
    }
    Ok(out)
}

/// Simulated stored variances minus the ideal (perfect-transfer) input values.
pub fn stored_correlation_residual(config: &ProtocolConfig) -> Result<[f64; 4]> {
    let run = run_protocol(config)?;
    let ideal = input_variances_per_mode(&config.profile)?;
    let stored = run.report(Stage::Stored).nullifier_variances;
    Ok([
        stored[0] - ideal[0],
        stored[1] - ideal[1],
        stored[2] - ideal[2],
        stored[3] - ideal[3],
    ])
}

/// Displaces the write-light quadratures by `displacement` (`x1, p1, ..., x4, p4`),
/// runs storage and retrieval on a uniform `r = 1` cluster and returns
/// `max |⟨L'_i⟩ + C1 ⟨L_i⟩|` over all read-out quadratures.
pub fn sign_flip_check(kappa: CouplingStrength, displacement: &[f64]) -> Result<f64> {
    if displacement.len() != 2 * CHANNELS {
        return Err(Error::shape("sign-flip displacement", 2 * CHANNELS, displacement.len()));
    }
    let ordering = protocol_ordering();
    let prepared = build_linear4_cluster_with(&SqueezingProfile::uniform(1.0, CHANNELS)?, &linear4_network())?
        .with_vacuum_modes(&ordering.modes()[CHANNELS..])?;
    let mut delta = DVector::zeros(ordering.dim());
    delta.rows_mut(0, 2 * CHANNELS).copy_from_slice(displacement);
    let prepared = prepared.displaced(&delta)?;
    let (_, retrieved) = store_and_retrieve(&prepared, kappa)?;
    let c1 = coefficients(kappa).c1;
    let mut residual: f64 = 0.0;
    for c in 1..=CHANNELS {
        for q in [Quadrature::X, Quadrature::P] {
            let out = retrieved.mean()[ordering.index(ModeLabel::readout(c), q)?];
            let input = prepared.mean()[ordering.index(ModeLabel::light(c), q)?];
            residual = residual.max((out + c1 * input).abs());
        }
    }
    Ok(residual)
}

/// Mode permutation relabelling channel `c` as `perm[c - 1] + 1` in every
/// mode family of `ordering`.
pub fn channel_permutation(perm: &[usize], ordering: &QuadratureOrdering) -> Result<SymplecticTransform> {
    if perm.len() != CHANNELS {
        return Err(Error::shape("channel permutation", CHANNELS, perm.len()));
    }
    let mut inverse = [usize::MAX; CHANNELS];
    for (c, &p) in perm.iter().enumerate() {
        if p >= CHANNELS || inverse[p] != usize::MAX {
            return Err(Error::Validation(alloc::format!("{perm:?} is not a permutation")));
        }
        inverse[p] = c;
    }
    // output slot for (kind, c') reads input (kind, inverse[c'] + 1)
    let source = ordering
        .modes()
        .iter()
        .map(|m| ordering.position(ModeLabel::new(m.kind, inverse[m.channel - 1] + 1)))
        .collect::<Result<Vec<_>>>()?;
    SymplecticTransform::mode_permutation(&source)
}

/// Convenience for building single-quadrature combinations on the protocol register.
pub fn quadrature(mode: ModeLabel, q: Quadrature) -> Result<QuadratureCombination> {
    QuadratureCombination::from_terms(&protocol_ordering(), alloc::format!("{mode}.{q:?}"), &[(mode, q, 1.0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> CouplingStrength {
        CouplingStrength::new(v).unwrap()
    }

    #[test]
    fn vacuum_input_is_preserved_at_every_stage() {
        let run = run_protocol(&ProtocolConfig::uniform(1.5, 0.0).unwrap()).unwrap();
        for r in &run.reports {
            for (v, e) in r.nullifier_variances.iter().zip([0.5, 0.75, 0.75, 0.5]) {
                assert!((v - e).abs() < 1e-12, "{:?}", r);
            }
        }
    }

    #[test]
    fn retrieved_value_at_strong_coupling() {
        let run = run_protocol(&ProtocolConfig::uniform(2.5, 1.0).unwrap()).unwrap();
        let v = run.report(Stage::Retrieved).nullifier_variances[0];
        assert!((v - 0.069_335).abs() < 1e-6, "{v}");
        assert!(run.report(Stage::Retrieved).max_deviation <= 1e-12);
    }

    #[test]
    fn asymptotes_at_large_squeezing() {
        let run = run_protocol(&ProtocolConfig::uniform(1.5, 15.0).unwrap()).unwrap();
        assert!((run.report(Stage::Stored).nullifier_variances[0] - 0.052_700).abs() < 1e-6);
        assert!((run.report(Stage::Retrieved).nullifier_variances[0] - 0.099_845).abs() < 1e-6);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(input_variance_closed_form(0.0, 1).unwrap(), 0.5);
        assert!((input_variance_closed_form(1.0, 2).unwrap() - 0.101_501).abs() < 1e-6);
        assert!((input_variance_closed_form(2.0, 4).unwrap() - 0.009_158).abs() < 1e-6);
        assert_eq!(stored_variance_closed_form(1.0, k(0.0), 2).unwrap(), 0.75);
        // ½((1-u)e⁻² + u), u = e^{-2.25}
        assert!((stored_variance_closed_form(1.0, k(1.5), 1).unwrap() - 0.113_235_136_944_738_88).abs() < 1e-15);
        let big = stored_variance_closed_form(0.7, k(6.0), 3).unwrap();
        assert!((big - input_variance_closed_form(0.7, 3).unwrap()).abs() <= 2e-16 + 0.5 * libm::exp(-36.0));
        for kappa in [0.0, 0.4, 1.5, 2.5, 7.0] {
            assert!((retrieved_variance_closed_form(0.0, k(kappa), 1).unwrap() - 0.5).abs() < 1e-15);
            assert!((retrieved_variance_closed_form(0.0, k(kappa), 3).unwrap() - 0.75).abs() < 1e-15);
        }
        assert!((retrieved_variance_closed_form(1.0, k(2.5), 1).unwrap() - 0.069_335).abs() < 1e-6);
        assert!((retrieved_variance_closed_form(15.0, k(1.5), 2).unwrap() - 0.149_767).abs() < 1e-6);
        assert!(nullifier_prefactor(0).is_err());
        assert!(nullifier_prefactor(5).is_err());
    }

    #[test]
    fn per_mode_closed_forms_reduce_to_uniform() {
        let uniform = SqueezingProfile::uniform(0.9, 4).unwrap();
        let per_mode = input_variances_per_mode(&uniform).unwrap();
        for (i, v) in per_mode.iter().enumerate() {
            assert!((v - input_variance_closed_form(0.9, i + 1).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn non_uniform_profile_matches_generalized_forms() {
        let cfg = ProtocolConfig::new(
            k(1.2),
            SqueezingProfile::new(alloc::vec![0.2, 1.0, 0.6, 1.7]).unwrap(),
            true,
        )
        .unwrap();
        let run = run_protocol(&cfg).unwrap();
        for r in &run.reports {
            assert!(r.max_deviation <= 1e-12, "{r:?}");
            assert!(r.oracle_deviation() <= 1e-12);
        }
        assert_eq!(run.snapshots.len(), 3);
    }

    #[test]
    fn correlation_residuals() {
        let res = stored_correlation_residual(&ProtocolConfig::uniform(0.0, 1.0).unwrap()).unwrap();
        assert!((res[0] - 0.5 * (1.0 - libm::exp(-2.0))).abs() < 1e-12);
        assert!((res[0] - 0.432_332).abs() < 1e-6);
        let res = stored_correlation_residual(&ProtocolConfig::uniform(5.0, 2.0).unwrap()).unwrap();
        assert!(res.iter().all(|r| r.abs() <= 0.75 * libm::exp(-25.0) + 1e-15));
        let res = stored_correlation_residual(&ProtocolConfig::uniform(1.5, 0.0).unwrap()).unwrap();
        assert!(res.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn sign_flip() {
        let mut d = [0.0; 8];
        d[0] = 1.0;
        assert!(sign_flip_check(k(6.0), &d).unwrap() <= 1e-12);
        let d = [0.3, -1.2, 0.5, 2.0, -0.7, 0.1, 1.1, -0.4];
        for kappa in [0.0, 1.5, 2.5] {
            assert!(sign_flip_check(k(kappa), &d).unwrap() <= 1e-12);
        }
        assert!(matches!(sign_flip_check(k(1.0), &[1.0; 3]), Err(Error::Shape { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::new(k(1.0), SqueezingProfile::uniform(1.0, 3).unwrap(), false).is_err());
        assert!(ProtocolConfig::uniform(-1.0, 1.0).is_err());
        assert_eq!(ProtocolConfig::uniform(1.0, 0.5).unwrap().uniform_r(), Some(0.5));
    }

    #[test]
    fn channel_permutation_relabels() {
        let o = protocol_ordering();
        let p = channel_permutation(&[1, 2, 3, 0], &o).unwrap();
        let mut v = DVector::zeros(24);
        v[o.index(ModeLabel::atom(1), Quadrature::P).unwrap()] = 1.0;
        let w = p.matrix() * v;
        assert_eq!(w[o.index(ModeLabel::atom(2), Quadrature::P).unwrap()], 1.0);
        assert!(channel_permutation(&[0, 0, 1, 2], &o).is_err());
    }
}
