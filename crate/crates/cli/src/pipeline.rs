use serde::Serialize;
use thiserror::Error;
use toral_rigidity::cocycle::{bunching_check, fixed_point_trivial_check, ph_probe, ph_robustness, FixedPointReport, PhProbe, RobustnessOptions};
use toral_rigidity::extension::{cone_contraction_verify, cone_params, invariant_distribution};
use toral_rigidity::holonomy::{
    cover_lattice, periodic_obstruction, reduce_to_constant, transfer_map, coboundary_verify, CoboundaryReport, HolonomyFrame,
    HolonomyOptions,
};
use toral_rigidity::lattice_action::validate_action;
use toral_rigidity::weyl::{chambers, Chamber, Predicates};
use toral_rigidity::{
    ActionError, BunchingCertificate, CircleCocycle, CocycleError, CoverLattice, ExtensionError, HolonomyError, LyapunovSpectrum,
    PHRobustnessCertificate, WeylChamberDecomposition, WeylError,
};

use crate::config::RunConfig;
use crate::svg::chamber_svg;

pub const ANALYZE_SCHEMA: &str = "toral-rigidity/analyze/1";
pub const CERTIFY_SCHEMA: &str = "toral-rigidity/certify/1";
pub const RIGIDITY_SCHEMA: &str = "toral-rigidity/rigidity/1";

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage} stage failed: {source}")]
    Stage { stage: &'static str, source: StageError },
    #[error("rigidity stage refused: action is not TNS and full ({predicates:?})")]
    Refused { predicates: Predicates },
    #[error("certify stage failed: chambers {failed:?} have no bunching certificate (use --force to continue)")]
    NotCertified { failed: Vec<usize> },
}

fn stage<E: Into<StageError>>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage { stage, source: e.into() }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub schema: &'static str,
    pub seed: u64,
    pub dim: usize,
    pub rank: usize,
    pub generators: Vec<Vec<Vec<i64>>>,
    pub anosov_witnesses: usize,
    pub functionals: Vec<Vec<f64>>,
    pub dims: Vec<usize>,
    pub weighted_sum: Vec<f64>,
    pub growth_constant: f64,
    pub coarse_classes: Vec<Vec<usize>>,
    pub hyperplanes: Vec<Vec<f64>>,
    pub chambers: Vec<Chamber>,
    pub predicates: Predicates,
}

pub struct Analysis {
    pub report: AnalyzeReport,
    pub spectrum: LyapunovSpectrum,
    pub decomposition: WeylChamberDecomposition,
    /// k = 2 only.
    pub diagram: Option<String>,
}

pub fn cmd_analyze(cfg: &RunConfig, seed: u64) -> Result<Analysis, PipelineError> {
    let gens = cfg.generator_set().map_err(stage("analyze"))?;
    let action = validate_action::<f64>(&gens, cfg.tolerances.witness_bound).map_err(stage("analyze"))?;
    let spectrum = action.spectrum;
    let decomposition = chambers(&spectrum, cfg.tolerances.search_bound).map_err(stage("analyze"))?;
    let diagram = (spectrum.rank == 2).then(|| chamber_svg(&decomposition));
    let report = AnalyzeReport {
        schema: ANALYZE_SCHEMA,
        seed,
        dim: spectrum.dim,
        rank: spectrum.rank,
        generators: cfg.action.generators.clone(),
        anosov_witnesses: action.anosov_witnesses.len(),
        functionals: spectrum.functionals(),
        dims: spectrum.dims(),
        weighted_sum: spectrum.weighted_sum(),
        growth_constant: spectrum.growth_constant,
        coarse_classes: decomposition.coarse_classes.iter().map(|c| c.members.clone()).collect(),
        hyperplanes: decomposition.hyperplanes.clone(),
        chambers: decomposition.chambers.clone(),
        predicates: decomposition.predicates,
    };
    Ok(Analysis { report, spectrum, decomposition, diagram })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifyReport {
    pub schema: &'static str,
    pub seed: u64,
    pub element: Vec<i64>,
    /// `null` stands for r = ∞.
    pub r: Option<f64>,
    pub bunching: Option<BunchingCertificate>,
    pub bunching_failure: Option<String>,
    pub ph: PhProbe<f64>,
    pub robustness: Option<PHRobustnessCertificate>,
    pub robustness_failure: Option<String>,
    pub fixed_point: FixedPointReport,
    pub passed: bool,
}

fn certify_with(cfg: &RunConfig, seed: u64, analysis: &Analysis, beta: &CircleCocycle) -> Result<CertifyReport, PipelineError> {
    let grid = cfg.grid();
    let t = &cfg.tolerances;
    let d = &analysis.decomposition;
    let element = match &cfg.certify.element {
        Some(a) => a.clone(),
        None => d.chambers[0].representative.clone().unwrap_or_default(),
    };
    let r = cfg.certify.r.is_finite().then_some(cfg.certify.r);
    let (bunching, bunching_failure) = match bunching_check(beta, &analysis.spectrum, &element, r, t.k_max, &grid) {
        Ok(c) => (Some(c), None),
        Err(e @ (CocycleError::NotBunchedWithin(_) | CocycleError::NotRegular(_))) => (None, Some(e.to_string())),
        Err(e) => return Err(stage("certify")(e)),
    };
    let ph = ph_probe(beta, &analysis.spectrum, d, &grid, t.k_max).map_err(stage("certify"))?;
    let opts = RobustnessOptions {
        sample_count: t.robustness_samples,
        norm_cap: t.norm_cap,
        safety: t.safety,
        k_max: t.k_max,
        grid,
        seed,
    };
    // robustness is argued from the 0-bunching certificate of the chamber
    // containing the element, or the first certified chamber
    let base = ph
        .chambers
        .iter()
        .find(|c| c.representative == element && c.certificate.is_some())
        .or_else(|| ph.chambers.iter().find(|c| c.certificate.is_some()))
        .and_then(|c| c.certificate.clone());
    let (robustness, robustness_failure) = match base {
        Some(cert) => match ph_robustness(beta, &analysis.spectrum, &cert, &opts) {
            Ok(c) => (Some(c), None),
            Err(e @ CocycleError::SampleFailed(_)) => (None, Some(e.to_string())),
            Err(e) => return Err(stage("certify")(e)),
        },
        None => (None, Some("no certified chamber".into())),
    };
    let fixed_point = fixed_point_trivial_check(beta).map_err(stage("certify"))?;
    let passed = ph.all_certified && robustness.is_some();
    Ok(CertifyReport {
        schema: CERTIFY_SCHEMA,
        seed,
        element,
        r,
        bunching,
        bunching_failure,
        ph,
        robustness,
        robustness_failure,
        fixed_point,
        passed,
    })
}

pub fn cmd_certify(cfg: &RunConfig, seed: u64) -> Result<CertifyReport, PipelineError> {
    let analysis = cmd_analyze(cfg, seed)?;
    let beta = cfg.build_cocycle(cfg.generator_set().map_err(stage("certify"))?).map_err(stage("certify"))?;
    certify_with(cfg, seed, &analysis, &beta)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeSummary {
    pub space: usize,
    pub element: Vec<i64>,
    pub l: Option<u32>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub contraction: Option<f64>,
    pub worst_ratio: Option<f64>,
    pub section_iterations: Option<usize>,
    pub section_residual: Option<f64>,
    pub growth_constant: Option<f64>,
    pub transversality: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferSummary {
    pub base: usize,
    pub fiber: usize,
    pub nodes: usize,
    pub max_steps: u32,
    pub max_last_delta: f64,
    pub path_defect: f64,
    pub path_samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstancySummary {
    pub rotation_numbers: Vec<f64>,
    pub defect: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionSummary {
    pub period: u32,
    pub points: usize,
    pub max_rotation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residuals {
    pub threshold: f64,
    pub section: f64,
    pub holonomy: f64,
    pub path: f64,
    pub constancy: f64,
    pub coboundary: Option<f64>,
    pub periodicity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReport {
    pub schema: &'static str,
    pub seed: u64,
    pub predicates: Predicates,
    pub certified: bool,
    pub forced: bool,
    pub cones: Vec<ConeSummary>,
    pub cover: CoverLattice,
    pub holonomy_elements: Vec<Vec<i64>>,
    pub transfer: TransferSummary,
    pub constant_reduction: ConstancySummary,
    pub fixed_point_trivial: bool,
    pub coboundary: Option<CoboundaryReport<f64>>,
    pub coboundary_failure: Option<String>,
    pub obstruction_element: Vec<i64>,
    pub obstruction: Vec<ObstructionSummary>,
    pub residuals: Residuals,
    pub within_tolerance: bool,
}

fn cone_summary(cfg: &RunConfig, seed: u64, beta: &CircleCocycle, spectrum: &LyapunovSpectrum, i: usize, a: &[i64]) -> ConeSummary {
    let t = &cfg.tolerances;
    let grid = cfg.grid();
    let mut s = ConeSummary {
        space: i,
        element: a.to_vec(),
        l: None,
        gamma: None,
        epsilon: None,
        contraction: None,
        worst_ratio: None,
        section_iterations: None,
        section_residual: None,
        growth_constant: None,
        transversality: None,
        failure: None,
    };
    let run = |s: &mut ConeSummary| -> Result<(), ExtensionError> {
        let p = cone_params(beta, spectrum, i, a, &grid, t.l_max)?;
        s.l = Some(p.l);
        s.gamma = Some(p.gamma);
        s.epsilon = Some(p.epsilon);
        s.contraction = Some(p.contraction());
        let check = cone_contraction_verify(&p, beta, spectrum, t.cone_samples, seed)?;
        s.worst_ratio = Some(check.worst_ratio);
        let sec = invariant_distribution(beta, spectrum, &p, &grid, t.tol, t.max_iter)?;
        s.section_iterations = Some(sec.iterations);
        s.section_residual = Some(sec.residual);
        s.growth_constant = Some(sec.growth_constant);
        s.transversality = Some(sec.transversality);
        Ok(())
    };
    if let Err(e) = run(&mut s) {
        s.failure = Some(e.to_string());
    }
    s
}

pub fn cmd_rigidity(cfg: &RunConfig, seed: u64, force: bool) -> Result<RigidityReport, PipelineError> {
    let analysis = cmd_analyze(cfg, seed)?;
    let predicates = analysis.decomposition.predicates;
    if !(predicates.tns && predicates.full) {
        return Err(PipelineError::Refused { predicates });
    }
    let gens = cfg.generator_set().map_err(stage("certify"))?;
    let beta = cfg.build_cocycle(gens.clone()).map_err(stage("certify"))?;
    let cert = certify_with(cfg, seed, &analysis, &beta)?;
    if !cert.passed && !force {
        let failed = cert.ph.chambers.iter().filter(|c| c.certificate.is_none()).map(|c| c.chamber).collect();
        return Err(PipelineError::NotCertified { failed });
    }
    let t = &cfg.tolerances;
    let spectrum = &analysis.spectrum;
    let d = &analysis.decomposition;

    let mut cones = Vec::new();
    for ch in &d.chambers {
        let a = ch.representative.clone().unwrap_or_default();
        for i in spectrum.unstable(&a) {
            if spectrum.spaces[i].dim == 1 {
                cones.push(cone_summary(cfg, seed ^ (cones.len() as u64 + 1), &beta, spectrum, i, &a));
            }
        }
    }

    let cover = cover_lattice(&gens).map_err(stage("construct"))?;
    let options = HolonomyOptions { tol: t.tol, ..HolonomyOptions::default() };
    let frame = HolonomyFrame::new(spectrum, d, options).map_err(stage("construct"))?;
    let grid = cfg.grid();
    let h = transfer_map(&beta, &frame, &cover, &grid, t.path_samples, seed).map_err(stage("construct"))?;
    let transfer = TransferSummary {
        base: grid.base,
        fiber: grid.fiber,
        nodes: h.steps.len(),
        max_steps: h.steps.iter().copied().max().unwrap_or(0),
        max_last_delta: h.last_delta.iter().fold(0.0f64, |m, &v| m.max(v)),
        path_defect: h.path_defect,
        path_samples: h.path_samples,
    };

    let reduction = reduce_to_constant(&beta, &frame, &cover, t.samples, seed.wrapping_add(1)).map_err(stage("verify"))?;
    let constant_reduction =
        ConstancySummary { rotation_numbers: reduction.rotation_numbers.clone(), defect: reduction.defect, samples: reduction.samples };

    let (coboundary, coboundary_failure) = match coboundary_verify(&beta, &frame, &cover, t.samples, seed.wrapping_add(2)) {
        Ok(r) => (Some(r), None),
        Err(e @ HolonomyError::NotFixedPointTrivial { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(stage("verify")(e)),
    };

    let obstruction_element = d.chambers[0].representative.clone().unwrap_or_default();
    let obstruction = periodic_obstruction(&beta, &obstruction_element, t.max_period)
        .map_err(stage("verify"))?
        .into_iter()
        .map(|r| ObstructionSummary { period: r.period, points: r.points, max_rotation: r.max_rotation })
        .collect();

    let section = cones.iter().filter_map(|c| c.section_residual).fold(0.0f64, f64::max);
    let residuals = Residuals {
        threshold: t.residual,
        section,
        holonomy: transfer.max_last_delta,
        path: transfer.path_defect,
        constancy: reduction.defect,
        coboundary: coboundary.as_ref().map(|c| c.identity_residual),
        periodicity: coboundary.as_ref().map(|c| c.periodicity_defect),
    };
    let within_tolerance = cones.iter().all(|c| c.failure.is_none())
        && [residuals.section, residuals.holonomy, residuals.path, residuals.constancy]
            .into_iter()
            .chain(residuals.coboundary)
            .chain(residuals.periodicity)
            .all(|v| v <= t.residual);

    Ok(RigidityReport {
        schema: RIGIDITY_SCHEMA,
        seed,
        predicates,
        certified: cert.passed,
        forced: force && !cert.passed,
        cones,
        cover,
        holonomy_elements: frame.elements(),
        transfer,
        constant_reduction,
        fixed_point_trivial: cert.fixed_point.trivial,
        coboundary,
        coboundary_failure,
        obstruction_element,
        obstruction,
        residuals,
        within_tolerance,
    })
}
