use std::path::PathBuf;
use std::process::ExitCode;

use atomscatter::commands::{
    self, AnalyzeArgs, Command, FiguresArgs, SimulateArgs, TheoryArgs, OUT_DIR_ENV,
};
use atomscatter::TimeWindow;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "atomscatter",
    version,
    about = "Single-photon scattering off a two-level atom"
)]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Evaluate scattering probability, peak excitation and time curves
    Theory {
        #[arg(long, default_value_t = 0.033)]
        lambda: f64,
        /// Atomic linewidth Γ0/2π in MHz
        #[arg(long, default_value_t = 6.07)]
        linewidth_mhz: f64,
        /// Photon bandwidths in units of Γ0
        #[arg(long, num_args = 1.., default_values_t = [1.96, 6.09])]
        gammap_over_gamma0: Vec<f64>,
        /// Time range of the curves in seconds
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"], allow_hyphen_values = true)]
        t_range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1101)]
        points: usize,
        /// Γp/Γ0 range of the log-spaced sweep
        #[arg(long, num_args = 2, value_names = ["MIN", "MAX"])]
        sweep: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200)]
        sweep_points: usize,
    },
    /// Simulate reference and with-atom histograms from a JSON config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Analyze a reference/with-atom histogram pair
    Analyze {
        reference: PathBuf,
        with_atom: PathBuf,
        #[arg(long, default_value_t = 0.033)]
        lambda: f64,
        #[arg(long, default_value_t = 6.07)]
        linewidth_mhz: f64,
        /// Summation window in seconds
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"], allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        /// Bandwidth fit window in seconds
        #[arg(long, num_args = 2, value_names = ["T_MIN", "T_MAX"], allow_hyphen_values = true)]
        fit_window: Option<Vec<f64>>,
        /// Number of Poissonian bootstrap replicas
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate, analyze and write the figure data bundle
    ReproduceFigures {
        #[arg(long, num_args = 1..)]
        bandwidths: Option<Vec<f64>>,
        #[arg(long)]
        n_heralds: Option<u64>,
        #[arg(long)]
        heralding_efficiency: Option<f64>,
        #[arg(long)]
        edge_smearing: Option<f64>,
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Re-run the command recorded in a manifest
    Replay { manifest: PathBuf },
}

fn window(v: Option<Vec<f64>>, default: TimeWindow) -> TimeWindow {
    match v.as_deref() {
        Some([t_min, t_max]) => TimeWindow {
            t_min: *t_min,
            t_max: *t_max,
        },
        _ => default,
    }
}

fn build(sub: Sub) -> atomscatter::Result<Command> {
    Ok(match sub {
        Sub::Theory {
            lambda,
            linewidth_mhz,
            gammap_over_gamma0,
            t_range,
            points,
            sweep,
            sweep_points,
        } => {
            let d = TheoryArgs::default();
            let t = window(
                t_range,
                TimeWindow {
                    t_min: d.t_min,
                    t_max: d.t_max,
                },
            );
            let s = window(
                sweep,
                TimeWindow {
                    t_min: d.sweep_min,
                    t_max: d.sweep_max,
                },
            );
            Command::Theory(TheoryArgs {
                lambda,
                linewidth_mhz,
                gammap_over_gamma0,
                t_min: t.t_min,
                t_max: t.t_max,
                points,
                sweep_min: s.t_min,
                sweep_max: s.t_max,
                sweep_points,
            })
        }
        Sub::Simulate { config, seed } => {
            Command::Simulate(SimulateArgs::from_file(&config, seed)?)
        }
        Sub::Analyze {
            reference,
            with_atom,
            lambda,
            linewidth_mhz,
            window: w,
            fit_window,
            bootstrap,
            seed,
        } => Command::Analyze(AnalyzeArgs {
            lambda,
            linewidth_mhz,
            sum_window: window(w, TimeWindow::SUMMATION),
            fit_window: window(fit_window, TimeWindow::FIT),
            bootstrap,
            seed,
            ..AnalyzeArgs::new(reference, with_atom)
        }),
        Sub::ReproduceFigures {
            bandwidths,
            n_heralds,
            heralding_efficiency,
            edge_smearing,
            bootstrap,
            seed,
        } => {
            let d = FiguresArgs::default();
            Command::ReproduceFigures(FiguresArgs {
                bandwidths: bandwidths.unwrap_or(d.bandwidths),
                n_heralds: n_heralds.unwrap_or(d.n_heralds),
                heralding_efficiency: heralding_efficiency.unwrap_or(d.heralding_efficiency),
                edge_smearing: edge_smearing.unwrap_or(d.edge_smearing),
                bootstrap: bootstrap.unwrap_or(d.bootstrap),
                seed: seed.unwrap_or(d.seed),
                ..d
            })
        }
        Sub::Replay { .. } => unreachable!("replay is dispatched in main"),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Sub::Replay { manifest } => commands::replay(&manifest, &cli.out),
        sub => build(sub).and_then(|cmd| commands::run(&cmd, &cli.out)),
    };
    match result {
        Ok(manifest) => {
            for rec in &manifest.outputs {
                println!("{}  {}", rec.sha256, cli.out.join(&rec.path).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
