//! The four toolkit commands and manifest replay.
//!
//! Every command writes its outputs into one directory together with a
//! [`RunManifest`] whose `command` field holds the fully resolved arguments;
//! [`replay`] re-executes such a manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, AnalysisOptions, AnalysisResult, BandwidthFit, InputDigest};
use crate::config::SimConfigFile;
use crate::error::{Error, Result};
use crate::histogram::{Histogram, TimeWindow};
use crate::io;
use crate::manifest::RunManifest;
use crate::simulate::{self, replica_seed, SimConfig};
use crate::theory::{
    self, AtomParams, CurveKind, PhotonParams, TheoryCurve, NATURAL_LINEWIDTH_MHZ,
    REFERENCE_OVERLAP,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ATOMSCATTER_OUT";

/// Bandwidths (in units of Γ0) of the canned figure data set.
pub const FIGURE_BANDWIDTHS: [f64; 5] = [6.09, 4.5, 3.5, 2.6, 1.96];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    Theory(TheoryArgs),
    Simulate(SimulateArgs),
    Analyze(AnalyzeArgs),
    ReproduceFigures(FiguresArgs),
}

impl Command {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Theory(_) => None,
            Command::Simulate(a) => Some(a.config.seed),
            Command::Analyze(a) => Some(a.seed),
            Command::ReproduceFigures(a) => Some(a.seed),
        }
    }
}

fn flag_error(flag: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        pointer: flag.to_string(),
        reason: reason.into(),
    }
}

fn check_linewidth(mhz: f64) -> Result<()> {
    if mhz > 0.0 && mhz.is_finite() {
        Ok(())
    } else {
        Err(flag_error(
            "--linewidth-mhz",
            format!("must be > 0, got {mhz}"),
        ))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(flag_error(
            "--lambda",
            format!("must lie in [0, 1], got {lambda}"),
        ))
    }
}

fn check_window(flag: &str, w: &TimeWindow) -> Result<()> {
    TimeWindow::new(w.t_min, w.t_max)
        .map(|_| ())
        .map_err(|e| flag_error(flag, e.to_string()))
}

struct Writer<'a> {
    out_dir: &'a Path,
    manifest: RunManifest,
}

impl<'a> Writer<'a> {
    fn new(out_dir: &'a Path, command: Command) -> Self {
        Writer {
            out_dir,
            manifest: RunManifest::new(command),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let hash = io::write_atomic(&self.out_dir.join(name), contents.as_bytes())?;
        self.manifest.record_output(name, hash);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(self) -> Result<RunManifest> {
        self.manifest.write(self.out_dir)?;
        Ok(self.manifest)
    }
}

/// Execute `command`, writing outputs and `manifest.json` into `out_dir`.
pub fn run(command: &Command, out_dir: &Path) -> Result<RunManifest> {
    match command {
        Command::Theory(args) => cmd_theory(args, out_dir),
        Command::Simulate(args) => cmd_simulate(args, out_dir),
        Command::Analyze(args) => cmd_analyze(args, out_dir),
        Command::ReproduceFigures(args) => cmd_reproduce_figures(args, out_dir),
    }
}

/// Re-run the command recorded in a manifest into `out_dir`.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::read(manifest_path)?;
    run(&manifest.command, out_dir)
}

fn fmt_ratio(r: f64) -> String {
    format!("{r}")
}

// ---------------------------------------------------------------------------
// theory

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryArgs {
    pub lambda: f64,
    pub linewidth_mhz: f64,
    /// Bandwidths Γp/Γ0 at which point values and time curves are written.
    pub gammap_over_gamma0: Vec<f64>,
    /// Time grid for the curves (s).
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    /// Log-spaced Γp/Γ0 sweep for the ε and P_e,max tables.
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
}

impl Default for TheoryArgs {
    fn default() -> Self {
        TheoryArgs {
            lambda: REFERENCE_OVERLAP,
            linewidth_mhz: NATURAL_LINEWIDTH_MHZ,
            gammap_over_gamma0: vec![1.96, 6.09],
            t_min: -10e-9,
            t_max: 100e-9,
            points: 1101,
            sweep_min: 0.1,
            sweep_max: 10.0,
            sweep_points: 200,
        }
    }
}

impl TheoryArgs {
    fn validate(&self) -> Result<AtomParams> {
        check_lambda(self.lambda)?;
        check_linewidth(self.linewidth_mhz)?;
        if self.gammap_over_gamma0.is_empty() {
            return Err(flag_error(
                "--gammap-over-gamma0",
                "need at least one value",
            ));
        }
        if let Some(bad) = self
            .gammap_over_gamma0
            .iter()
            .find(|r| !(**r > 0.0 && r.is_finite()))
        {
            return Err(flag_error(
                "--gammap-over-gamma0",
                format!("must be > 0, got {bad}"),
            ));
        }
        if !(self.t_max > self.t_min) {
            return Err(flag_error("--t-range", "t_max must exceed t_min"));
        }
        if self.points < 2 {
            return Err(flag_error("--points", "need at least 2"));
        }
        if !(self.sweep_min > 0.0 && self.sweep_max > self.sweep_min) {
            return Err(flag_error("--sweep", "need 0 < min < max"));
        }
        if self.sweep_points < 2 {
            return Err(flag_error("--sweep-points", "need at least 2"));
        }
        AtomParams::from_linewidth_mhz(self.linewidth_mhz, self.lambda)
    }
}

fn theory_table(atom: &AtomParams, ratios: impl Iterator<Item = f64>) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# lambda={}", atom.overlap);
    let _ = writeln!(out, "# gamma0_rad_s={}", atom.gamma0);
    out.push_str("# gammap_over_gamma0,gammap_rad_s,epsilon,p_e_max,peak_time_ns\n");
    for r in ratios {
        let photon = PhotonParams::relative_to(atom, r, 0.0)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r,
            photon.gammap,
            theory::scattering_probability(atom, &photon),
            theory::peak_excitation(atom, &photon),
            theory::peak_time(atom, &photon) * 1e9
        );
    }
    Ok(out)
}

/// Evaluate ε, P_e,max and time curves.
///
/// Writes `theory_points.csv` (the requested bandwidths), `theory_sweep.csv`
/// (log-spaced sweep) and `envelope_<r>.csv`, `excitation_<r>.csv`,
/// `scattered_rate_<r>.csv` for every requested bandwidth `r`.
pub fn cmd_theory(args: &TheoryArgs, out_dir: &Path) -> Result<RunManifest> {
    let atom = args.validate()?;
    let mut w = Writer::new(out_dir, Command::Theory(args.clone()));
    w.write(
        "theory_points.csv",
        &theory_table(&atom, args.gammap_over_gamma0.iter().copied())?,
    )?;
    let log_min = args.sweep_min.ln();
    let step = (args.sweep_max.ln() - log_min) / (args.sweep_points - 1) as f64;
    w.write(
        "theory_sweep.csv",
        &theory_table(
            &atom,
            (0..args.sweep_points).map(|i| (log_min + step * i as f64).exp()),
        )?,
    )?;
    for &r in &args.gammap_over_gamma0 {
        let photon = PhotonParams::relative_to(&atom, r, 0.0)?;
        for kind in [
            CurveKind::Envelope,
            CurveKind::Excitation,
            CurveKind::ScatteredRate,
        ] {
            let curve =
                TheoryCurve::sample(kind, &atom, &photon, args.t_min, args.t_max, args.points)?;
            w.write(
                &format!("{}_{}.csv", kind.as_str(), fmt_ratio(r)),
                &curve.to_csv(),
            )?;
        }
    }
    w.finish()
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Fully resolved configuration (defaults materialized, seed override applied).
    pub config: SimConfigFile,
}

impl SimulateArgs {
    /// Load a config file, apply an optional seed override.
    pub fn from_file(path: &Path, seed: Option<u64>) -> Result<Self> {
        let mut config = SimConfigFile::read(path)?;
        if let Some(seed) = seed {
            config.seed = seed;
        }
        Ok(SimulateArgs { config })
    }
}

pub const REFERENCE_FILE: &str = "reference.csv";
pub const WITH_ATOM_FILE: &str = "with_atom.csv";

/// Simulate one experiment; writes `reference.csv` and `with_atom.csv`.
pub fn cmd_simulate(args: &SimulateArgs, out_dir: &Path) -> Result<RunManifest> {
    let config = args.config.to_sim_config()?;
    let (reference, with_atom) = simulate::simulate_pair(&config)?;
    let mut w = Writer::new(out_dir, Command::Simulate(args.clone()));
    w.write(REFERENCE_FILE, &reference.histogram.to_csv())?;
    w.write(WITH_ATOM_FILE, &with_atom.histogram.to_csv())?;
    w.manifest.diagnostics = serde_json::to_value(&with_atom.diagnostics)?;
    w.finish()
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    pub reference: PathBuf,
    pub with_atom: PathBuf,
    pub lambda: f64,
    pub linewidth_mhz: f64,
    pub sum_window: TimeWindow,
    pub fit_window: TimeWindow,
    pub bootstrap: Option<usize>,
    pub seed: u64,
}

impl AnalyzeArgs {
    pub fn new(reference: impl Into<PathBuf>, with_atom: impl Into<PathBuf>) -> Self {
        AnalyzeArgs {
            reference: reference.into(),
            with_atom: with_atom.into(),
            lambda: REFERENCE_OVERLAP,
            linewidth_mhz: NATURAL_LINEWIDTH_MHZ,
            sum_window: TimeWindow::SUMMATION,
            fit_window: TimeWindow::FIT,
            bootstrap: None,
            seed: 0,
        }
    }

    fn options(&self) -> Result<AnalysisOptions> {
        check_lambda(self.lambda)?;
        check_linewidth(self.linewidth_mhz)?;
        check_window("--window", &self.sum_window)?;
        check_window("--fit-window", &self.fit_window)?;
        if let Some(n) = self.bootstrap {
            if n < analysis::MIN_RESAMPLES {
                return Err(flag_error(
                    "--bootstrap",
                    format!(
                        "need at least {} resamples, got {n}",
                        analysis::MIN_RESAMPLES
                    ),
                ));
            }
        }
        Ok(AnalysisOptions {
            atom: AtomParams::from_linewidth_mhz(self.linewidth_mhz, self.lambda)?,
            sum_window: self.sum_window,
            fit_window: self.fit_window,
            bootstrap: self.bootstrap,
            seed: self.seed,
        })
    }
}

fn fig3_csv(atom: &AtomParams, rows: &[(&BandwidthFit, f64, f64)]) -> String {
    let mut out = String::from(
        "# gammap_over_gamma0,gammap_sigma_over_gamma0,epsilon,sigma,epsilon_theory\n",
    );
    for (fit, eps, sigma) in rows {
        let photon = PhotonParams {
            gammap: fit.gammap_hat,
            t0: 0.0,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fit.gammap_hat / atom.gamma0,
            fit.std_errors.gammap / atom.gamma0,
            eps,
            sigma,
            theory::scattering_probability(atom, &photon)
        );
    }
    out
}

fn fig4_csv(atom: &AtomParams, result: &AnalysisResult) -> String {
    let photon = PhotonParams {
        gammap: result.bandwidth.gammap_hat,
        t0: result.bandwidth.t0_hat,
    };
    let mut out = format!(
        "# gammap_over_gamma0={}\n# t_ns,p_e,sigma,p_e_theory\n",
        result.bandwidth.gammap_hat / atom.gamma0
    );
    let tr = &result.excitation;
    for i in 0..tr.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            tr.times[i] * 1e9,
            tr.p_e[i],
            tr.sigma[i],
            theory::excited_population(atom, &photon, tr.times[i])
        );
    }
    out
}

fn fig5_csv(atom: &AtomParams, rows: &[&AnalysisResult]) -> String {
    let mut out = String::from("# gammap_over_gamma0,p_e_max,sigma,peak_time_ns,p_e_max_theory\n");
    for r in rows {
        let photon = PhotonParams {
            gammap: r.bandwidth.gammap_hat,
            t0: 0.0,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.bandwidth.gammap_hat / atom.gamma0,
            r.peak.value,
            r.peak.sigma,
            r.peak.time * 1e9,
            theory::peak_excitation(atom, &photon)
        );
    }
    out
}

/// Analyze a histogram pair; writes `analysis.json` and the per-figure CSVs
/// `fig3_extinction.csv`, `fig4_excitation.csv`, `fig5_peak.csv`.
pub fn cmd_analyze(args: &AnalyzeArgs, out_dir: &Path) -> Result<RunManifest> {
    let options = args.options()?;
    let reference = Histogram::read_csv(&args.reference)?;
    let with_atom = Histogram::read_csv(&args.with_atom)?;
    let mut result = analysis::analyze(&reference, &with_atom, &options)?;

    let mut w = Writer::new(out_dir, Command::Analyze(args.clone()));
    for path in [&args.reference, &args.with_atom] {
        let rec = w.manifest.record_input(path)?;
        result.provenance.inputs.push(InputDigest {
            path: rec.path,
            sha256: rec.sha256,
        });
    }
    let atom = options.atom;
    w.write_json("analysis.json", &result)?;
    w.write(
        "fig3_extinction.csv",
        &fig3_csv(
            &atom,
            &[(
                &result.bandwidth,
                result.extinction.epsilon_hat,
                result.extinction.sigma,
            )],
        ),
    )?;
    w.write("fig4_excitation.csv", &fig4_csv(&atom, &result))?;
    w.write("fig5_peak.csv", &fig5_csv(&atom, &[&result]))?;
    w.finish()
}

// ---------------------------------------------------------------------------
// reproduce-figures

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresArgs {
    pub bandwidths: Vec<f64>,
    pub n_heralds: u64,
    pub heralding_efficiency: f64,
    pub lambda: f64,
    pub linewidth_mhz: f64,
    pub edge_smearing: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for FiguresArgs {
    fn default() -> Self {
        FiguresArgs {
            bandwidths: FIGURE_BANDWIDTHS.to_vec(),
            n_heralds: 10_000_000,
            heralding_efficiency: 0.5,
            lambda: REFERENCE_OVERLAP,
            linewidth_mhz: NATURAL_LINEWIDTH_MHZ,
            edge_smearing: 0.0,
            bootstrap: 400,
            seed: 2017,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandwidthSummary {
    pub nominal_over_gamma0: f64,
    pub fitted_over_gamma0: f64,
    pub fitted_sigma_over_gamma0: f64,
    pub epsilon: f64,
    pub epsilon_sigma: f64,
    pub epsilon_theory: f64,
    pub peak: f64,
    pub peak_sigma: f64,
    pub peak_theory: f64,
    pub peak_time_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    /// Narrow over broad bandwidth.
    pub value: f64,
    pub sigma: f64,
    /// Model value at the nominal simulated bandwidths.
    pub theory_nominal: f64,
    /// Model value at the fitted bandwidths.
    pub theory_fitted: f64,
    pub measured_reference: f64,
    pub measured_reference_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiguresSummary {
    pub narrow_over_gamma0: f64,
    pub broad_over_gamma0: f64,
    pub peak_ratio: RatioSummary,
    pub extinction_ratio: RatioSummary,
    pub bandwidths: Vec<BandwidthSummary>,
}

fn ratio_sigma(num: &[f64], den: &[f64]) -> f64 {
    let ratios: Vec<f64> = num.iter().zip(den).map(|(a, b)| a / b).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    (ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// One simulated-and-analyzed bandwidth of the figure bundle.
pub struct FigureRun {
    pub nominal: f64,
    pub reference: Histogram,
    pub with_atom: Histogram,
    pub result: AnalysisResult,
    pub bootstrap: analysis::BootstrapResult,
}

/// Simulate and analyze every bandwidth of `args` (parallel over bandwidths).
pub fn figure_runs(args: &FiguresArgs) -> Result<Vec<FigureRun>> {
    check_lambda(args.lambda)?;
    check_linewidth(args.linewidth_mhz)?;
    if args.bandwidths.len() < 2 {
        return Err(flag_error("--bandwidths", "need at least two bandwidths"));
    }
    if args.bootstrap < analysis::MIN_RESAMPLES {
        return Err(flag_error(
            "--bootstrap",
            format!("need at least {}", analysis::MIN_RESAMPLES),
        ));
    }
    let atom = AtomParams::from_linewidth_mhz(args.linewidth_mhz, args.lambda)?;
    args.bandwidths
        .par_iter()
        .enumerate()
        .map(|(idx, &nominal)| {
            let photon = PhotonParams::relative_to(&atom, nominal, 0.0)
                .map_err(|e| flag_error("--bandwidths", e.to_string()))?;
            let seed = replica_seed(args.seed, idx as u64);
            let mut config = SimConfig::new(atom, photon, args.n_heralds).with_seed(seed);
            config.heralding_efficiency = args.heralding_efficiency;
            config.edge_smearing = args.edge_smearing;
            config
                .validate()
                .map_err(|e| flag_error("--n-heralds", e.to_string()))?;
            let (reference, with_atom) = simulate::simulate_pair(&config)?;
            let (reference, with_atom) = (reference.histogram, with_atom.histogram);
            let options = AnalysisOptions {
                bootstrap: None,
                seed,
                ..AnalysisOptions::new(atom)
            };
            let mut result = analysis::analyze(&reference, &with_atom, &options)?;
            let bootstrap = analysis::bootstrap_uncertainty(
                &reference,
                &with_atom,
                &atom,
                &options.sum_window,
                args.bootstrap,
                seed,
            )?;
            result.extinction.sigma = bootstrap.epsilon_sigma;
            result.excitation.sigma = bootstrap.p_e_sigma.clone();
            result.peak.sigma = bootstrap.peak_sigma;
            result.provenance.bootstrap_resamples = Some(args.bootstrap);
            Ok(FigureRun {
                nominal,
                reference,
                with_atom,
                result,
                bootstrap,
            })
        })
        .collect()
}

/// Build the summary from finished runs; the ratios compare the narrowest
/// and broadest bandwidths.
pub fn summarize(atom: &AtomParams, runs: &[FigureRun]) -> FiguresSummary {
    let narrow = runs
        .iter()
        .min_by(|a, b| a.nominal.total_cmp(&b.nominal))
        .expect("at least two runs");
    let broad = runs
        .iter()
        .max_by(|a, b| a.nominal.total_cmp(&b.nominal))
        .expect("at least two runs");
    let photon = |r: f64| PhotonParams {
        gammap: r * atom.gamma0,
        t0: 0.0,
    };
    let fitted = |run: &FigureRun| PhotonParams {
        gammap: run.result.bandwidth.gammap_hat,
        t0: 0.0,
    };
    let eps = |p: &PhotonParams| theory::scattering_probability(atom, p);
    let peak = |p: &PhotonParams| theory::peak_excitation(atom, p);

    let peak_ratio = RatioSummary {
        value: narrow.result.peak.value / broad.result.peak.value,
        sigma: ratio_sigma(
            &narrow.bootstrap.peak_value_samples,
            &broad.bootstrap.peak_value_samples,
        ),
        theory_nominal: peak(&photon(narrow.nominal)) / peak(&photon(broad.nominal)),
        theory_fitted: peak(&fitted(narrow)) / peak(&fitted(broad)),
        measured_reference: 1.5,
        measured_reference_sigma: 0.2,
    };
    let extinction_ratio = RatioSummary {
        value: narrow.result.extinction.epsilon_hat / broad.result.extinction.epsilon_hat,
        sigma: ratio_sigma(
            &narrow.bootstrap.epsilon_samples,
            &broad.bootstrap.epsilon_samples,
        ),
        theory_nominal: eps(&photon(narrow.nominal)) / eps(&photon(broad.nominal)),
        theory_fitted: eps(&fitted(narrow)) / eps(&fitted(broad)),
        measured_reference: 2.6,
        measured_reference_sigma: 0.4,
    };
    let bandwidths = runs
        .iter()
        .map(|run| {
            let r = &run.result;
            let nominal = photon(run.nominal);
            BandwidthSummary {
                nominal_over_gamma0: run.nominal,
                fitted_over_gamma0: r.bandwidth.gammap_hat / atom.gamma0,
                fitted_sigma_over_gamma0: r.bandwidth.std_errors.gammap / atom.gamma0,
                epsilon: r.extinction.epsilon_hat,
                epsilon_sigma: r.extinction.sigma,
                epsilon_theory: eps(&nominal),
                peak: r.peak.value,
                peak_sigma: r.peak.sigma,
                peak_theory: peak(&nominal),
                peak_time_ns: r.peak.time * 1e9,
            }
        })
        .collect();
    FiguresSummary {
        narrow_over_gamma0: narrow.nominal,
        broad_over_gamma0: broad.nominal,
        peak_ratio,
        extinction_ratio,
        bandwidths,
    }
}

fn fig2_csv(run: &FigureRun) -> Result<String> {
    let trace = analysis::normalize(&run.reference, &run.result.provenance.sum_window)?;
    let fit = &run.result.bandwidth;
    let scale = trace.n_heralds as f64 * trace.eta_f;
    let mut out = format!(
        "# gammap_fit_rad_s={}\n# t0_s={}\n# eta_f={}\n# t_ns,rate,sigma,fit\n",
        fit.gammap_hat, fit.t0_hat, trace.eta_f
    );
    for (i, &rate) in trace.rates.iter().enumerate() {
        let a = trace.t_start + i as f64 * trace.bin_width - fit.t0_hat;
        let model = if a < 0.0 {
            0.0
        } else {
            fit.amplitude_hat
                * ((-fit.gammap_hat * a).exp() - (-fit.gammap_hat * (a + trace.bin_width)).exp())
        };
        let sigma = (rate * scale).round().max(1.0).sqrt() / scale;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            trace.bin_center(i) * 1e9,
            rate,
            sigma,
            model
        );
    }
    Ok(out)
}

/// Canned high-statistics simulations at the figure bandwidths, analyzed and
/// written as plot-ready data plus `summary.json`.
pub fn cmd_reproduce_figures(args: &FiguresArgs, out_dir: &Path) -> Result<RunManifest> {
    let runs = figure_runs(args)?;
    let atom = AtomParams::from_linewidth_mhz(args.linewidth_mhz, args.lambda)?;
    let summary = summarize(&atom, &runs);
    let mut w = Writer::new(out_dir, Command::ReproduceFigures(args.clone()));

    for run in &runs {
        let tag = fmt_ratio(run.nominal);
        w.write(
            &format!("histograms/g{tag}_reference.csv"),
            &run.reference.to_csv(),
        )?;
        w.write(
            &format!("histograms/g{tag}_with_atom.csv"),
            &run.with_atom.to_csv(),
        )?;
        w.write(&format!("fig2_g{tag}.csv"), &fig2_csv(run)?)?;
        w.write(&format!("fig4_g{tag}.csv"), &fig4_csv(&atom, &run.result))?;
    }
    let rows: Vec<_> = runs
        .iter()
        .map(|r| {
            (
                &r.result.bandwidth,
                r.result.extinction.epsilon_hat,
                r.result.extinction.sigma,
            )
        })
        .collect();
    w.write("fig3_extinction.csv", &fig3_csv(&atom, &rows))?;
    let results: Vec<_> = runs.iter().map(|r| &r.result).collect();
    w.write("fig5_peak.csv", &fig5_csv(&atom, &results))?;
    let lo = args
        .bandwidths
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        * 0.5;
    let hi = args.bandwidths.iter().copied().fold(0.0, f64::max) * 1.5;
    w.write(
        "theory_overlay.csv",
        &theory_table(&atom, (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0))?,
    )?;
    w.write_json("summary.json", &summary)?;
    w.manifest.diagnostics = serde_json::to_value(&summary)?;
    w.finish()
}

/// Default output directory: `$ATOMSCATTER_OUT`, else `./out`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Convenience used by examples: simulate, write the histograms and read them
/// back through the CSV layer.
pub fn simulate_to_dir(config: &SimConfig, out_dir: &Path) -> Result<(Histogram, Histogram)> {
    let (r, a) = simulate::simulate_pair(config)?;
    r.histogram.write_csv(&out_dir.join(REFERENCE_FILE))?;
    a.histogram.write_csv(&out_dir.join(WITH_ATOM_FILE))?;
    Ok((
        Histogram::read_csv(&out_dir.join(REFERENCE_FILE))?,
        Histogram::read_csv(&out_dir.join(WITH_ATOM_FILE))?,
    ))
}
