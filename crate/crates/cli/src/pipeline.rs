//! Pipeline orchestration: simulate → tomograph → report, with all
//! artifacts written to an output directory.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use ghzsim_core::metrics::{
    fidelity, mermin_expectation, purity_and_entropies, tripartite_negativity,
    witness_expectation, MetricReport,
};
use ghzsim_core::photonic::{
    build_initial_state, estimate_threefold_rate, fit_mu_wcp, noisy_ghz_model,
    simulate_higher_order_fidelity, tdbs_postselect, ExperimentConfig, HigherOrderFidelity,
};
use ghzsim_core::quantum::{DensityMatrix, StateVector};
use ghzsim_core::tomography::{
    bootstrap_reconstructions, linear_inversion, mle_reconstruct, read_counts_csv, settings_64,
    simulate_counts, write_counts_csv, CountRecord, DetectorEfficiencies, MeasurementSetting,
    MleOutcome, ReconstructionOptions,
};
use ghzsim_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::files::{emit_density_figure_data, emit_fringe_data, DensityMatrixFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ideal,
    NoisyModel,
    MonteCarlo,
    AnalyzeCounts,
}

/// Everything one pipeline invocation needs.
#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub mode: Mode,
    pub config: ExperimentConfig,
    /// Counts CSV to ingest; required by [`Mode::AnalyzeCounts`].
    pub counts_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub pulses_per_setting: u64,
    pub bootstrap_resamples: usize,
    /// Mixing weight of the white-noise model in [`Mode::NoisyModel`].
    pub p_white: f64,
    /// Divide frequencies by per-detector efficiencies before inversion.
    pub efficiency_correction: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub higher_order: HigherOrderFidelity,
    pub threefold_rate_per_minute: f64,
    /// WCP mean photon number that reproduces 0.8 counts/min; reported, not
    /// asserted, since the real value is unpublished.
    pub fitted_mu_wcp_for_0p8_per_min: f64,
}

#[derive(Debug)]
pub enum PipelineOutput {
    Metrics(Box<MetricReport>),
    MonteCarlo(MonteCarloReport),
}

/// Reconstruction plus fully evaluated metrics (with bootstrap sigmas when
/// requested).
pub struct AnalysisResult {
    pub mle: MleOutcome,
    pub report: MetricReport,
    pub inversion_min_eigenvalue: f64,
    pub inversion_residual: f64,
}

fn reconstruction_options(spec_correction: Option<DetectorEfficiencies>) -> ReconstructionOptions {
    ReconstructionOptions {
        efficiency_correction: spec_correction,
        ..Default::default()
    }
}

/// Evaluates every metric of one state.
fn metric_values(rho: &DensityMatrix) -> Result<Vec<(&'static str, f64)>> {
    let ghz = StateVector::ghz_minus();
    let (purity, linear, von_neumann) = purity_and_entropies(rho);
    Ok(vec![
        ("fidelity", fidelity(rho, &ghz)?),
        ("purity", purity),
        ("linear_entropy", linear),
        ("von_neumann_entropy", von_neumann),
        ("tripartite_negativity", tripartite_negativity(rho)?),
        ("witness_expectation", witness_expectation(rho)?),
        ("mermin_value", mermin_expectation(rho)?.value),
    ])
}

/// Shared analysis path: MLE reconstruction, metric evaluation, parametric
/// bootstrap sigmas. Bit-reproducible for a fixed master seed.
pub fn analyze_records(
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    correction: Option<DetectorEfficiencies>,
    bootstrap_resamples: usize,
    master_seed: u64,
) -> Result<AnalysisResult> {
    let options = reconstruction_options(correction);
    let inversion = linear_inversion(records, settings, options.efficiency_correction.as_ref())?;
    let mle = mle_reconstruct(records, settings, &options)?;
    let mut report = MetricReport::evaluate(&mle.rho)?;

    if bootstrap_resamples >= 2 {
        let seed = derive_seed(master_seed, "bootstrap");
        let resamples =
            bootstrap_reconstructions(records, settings, bootstrap_resamples, seed, &options)?;
        let mut sums: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for rho in &resamples {
            for (name, value) in metric_values(rho)? {
                sums.entry(name).or_default().push(value);
            }
        }
        let mut sigma = BTreeMap::new();
        for (name, values) in sums {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
                / (values.len() - 1) as f64;
            sigma.insert(name.to_string(), var.sqrt());
        }
        report.bootstrap_sigma = Some(sigma);
    }

    Ok(AnalysisResult {
        mle,
        report,
        inversion_min_eigenvalue: inversion.min_eigenvalue,
        inversion_residual: inversion.residual,
    })
}

fn ensure_output_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_metrics(report: &MetricReport, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(report)?)?;
    Ok(())
}

fn write_common_artifacts(
    spec: &PipelineSpec,
    records: &[CountRecord],
    settings: &[MeasurementSetting],
    rho: &DensityMatrix,
    report: &MetricReport,
) -> Result<()> {
    let dir = &spec.output_dir;
    write_counts_csv(File::create(dir.join("counts.csv"))?, records, settings)?;
    DensityMatrixFile::from_density(rho).write(&dir.join("density_matrix.json"))?;
    write_metrics(report, &dir.join("metrics.json"))?;
    emit_density_figure_data(rho, File::create(dir.join("density_figure.csv"))?)?;
    emit_fringe_data(&spec.config, 64, File::create(dir.join("fringe.csv"))?)?;
    Ok(())
}

/// Runs one pipeline invocation end to end, returning the in-memory report
/// and leaving all artifacts in `output_dir`.
pub fn run_pipeline(spec: &PipelineSpec) -> Result<PipelineOutput> {
    spec.config.validate()?;
    ensure_output_dir(&spec.output_dir)?;
    let settings = settings_64();

    match spec.mode {
        Mode::Ideal => {
            // Exact model state; metrics come from the state itself, the
            // counts file is a simulated campaign for downstream analysis.
            let state = tdbs_postselect(&build_initial_state(0.0))?;
            let rho = state.to_density();
            let report = MetricReport::evaluate(&rho)?;
            let records = simulate_counts(
                &rho,
                &settings,
                spec.pulses_per_setting,
                &spec.config,
                derive_seed(spec.seed, "counts"),
            )?;
            write_common_artifacts(spec, &records, &settings, &rho, &report)?;
            Ok(PipelineOutput::Metrics(Box::new(report)))
        }
        Mode::NoisyModel => {
            let truth = noisy_ghz_model(spec.p_white)?;
            let records = simulate_counts(
                &truth,
                &settings,
                spec.pulses_per_setting,
                &spec.config,
                derive_seed(spec.seed, "counts"),
            )?;
            let correction = spec
                .efficiency_correction
                .then(|| DetectorEfficiencies::from_config(&spec.config));
            let analysis = analyze_records(
                &records,
                &settings,
                correction,
                spec.bootstrap_resamples,
                spec.seed,
            )?;
            write_common_artifacts(spec, &records, &settings, &analysis.mle.rho, &analysis.report)?;
            Ok(PipelineOutput::Metrics(Box::new(analysis.report)))
        }
        Mode::MonteCarlo => {
            let higher_order = simulate_higher_order_fidelity(
                &spec.config,
                spec.pulses_per_setting,
                derive_seed(spec.seed, "monte-carlo"),
            )?;
            let report = MonteCarloReport {
                higher_order,
                threefold_rate_per_minute: estimate_threefold_rate(&spec.config)?,
                fitted_mu_wcp_for_0p8_per_min: fit_mu_wcp(&spec.config, 0.8)?,
            };
            std::fs::write(
                spec.output_dir.join("monte_carlo.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            Ok(PipelineOutput::MonteCarlo(report))
        }
        Mode::AnalyzeCounts => {
            let counts_path = spec.counts_path.as_ref().ok_or_else(|| {
                Error::InvalidConfig("analyze-counts mode needs a counts file".into())
            })?;
            let (records, file_settings) = read_counts_csv(File::open(counts_path)?)?;
            let correction = spec
                .efficiency_correction
                .then(|| DetectorEfficiencies::from_config(&spec.config));
            let analysis = analyze_records(
                &records,
                &file_settings,
                correction,
                spec.bootstrap_resamples,
                spec.seed,
            )?;
            write_common_artifacts(
                spec,
                &records,
                &file_settings,
                &analysis.mle.rho,
                &analysis.report,
            )?;
            Ok(PipelineOutput::Metrics(Box::new(analysis.report)))
        }
    }
}

/// Reconstruction-only statistics for the `tomograph` verb.
#[derive(Debug, Serialize)]
pub struct ReconstructionStats {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub linear_inversion_min_eigenvalue: f64,
    pub linear_inversion_residual: f64,
}

/// Reconstructs a density matrix from a counts CSV, writing the matrix and
/// fit statistics but no metrics.
pub fn run_tomograph(
    counts_path: &Path,
    config: &ExperimentConfig,
    efficiency_correction: bool,
    output_dir: &Path,
) -> Result<ReconstructionStats> {
    ensure_output_dir(output_dir)?;
    let (records, settings) = read_counts_csv(File::open(counts_path)?)?;
    let correction = efficiency_correction.then(|| DetectorEfficiencies::from_config(config));
    let options = reconstruction_options(correction);
    let inversion = linear_inversion(&records, &settings, options.efficiency_correction.as_ref())?;
    let mle = mle_reconstruct(&records, &settings, &options)?;
    DensityMatrixFile::from_density(&mle.rho).write(&output_dir.join("density_matrix.json"))?;
    let stats = ReconstructionStats {
        log_likelihood: mle.log_likelihood,
        iterations: mle.iterations,
        linear_inversion_min_eigenvalue: inversion.min_eigenvalue,
        linear_inversion_residual: inversion.residual,
    };
    std::fs::write(
        output_dir.join("reconstruction.json"),
        serde_json::to_string_pretty(&stats)?,
    )?;
    Ok(stats)
}

/// Emits figure data (density-matrix CSV, fringe CSV, metrics JSON) for an
/// existing density-matrix file.
pub fn run_report(
    density_path: &Path,
    config: &ExperimentConfig,
    output_dir: &Path,
) -> Result<MetricReport> {
    ensure_output_dir(output_dir)?;
    let rho = DensityMatrixFile::read(density_path)?.to_density()?;
    let report = MetricReport::evaluate(&rho)?;
    emit_density_figure_data(&rho, File::create(output_dir.join("density_figure.csv"))?)?;
    emit_fringe_data(config, 64, File::create(output_dir.join("fringe.csv"))?)?;
    write_metrics(&report, &output_dir.join("metrics.json"))?;
    Ok(report)
}
