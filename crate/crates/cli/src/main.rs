use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fractance::freqresp::bode_sweep;
use fractance::mlf::{mlf_eval, MlParams};
use fractance::mlfit::{fit_ml, FitOptions, InitialGuess};
use fractance::network::{make_alternating_ladder, make_enhanced_ladder, make_nested_ladder};
use fractance::timesim::{simulate_discharge, simulate_step};
use fractance::varorder::{default_window_schedule, estimate_variable_order, VarOrderOptions};
use fractance::LadderSpec64;
use fractance_cli::io::{self as cio, fmt_num};
use fractance_cli::pipeline::{run_pipeline, write_outputs, Mode, PipelineConfig, SpecSource};
use fractance_cli::presets::Preset;
use fractance_cli::{CliError, Result};
use num_complex::Complex;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

/// Fractional-order RC ladders: design, frequency response, simulation and
/// Mittag-Leffler order identification.
#[derive(Parser)]
#[command(name = "fractance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a ladder circuit as JSON.
    Design(DesignArgs),
    /// Bode data of a ladder as CSV `omega,mag_db,phase_deg`.
    Bode(BodeArgs),
    /// Time response of a ladder as CSV `t,u`.
    Simulate(SimulateArgs),
    /// Fit y0·E_α(a·t^α) to measured data on [0, window end].
    Fit(FitArgs),
    /// Apparent order over growing windows as CSV `t,alpha,a,y0,converged`.
    Varorder(VarorderArgs),
    /// Evaluate the Mittag-Leffler function E_{α,β}(z).
    Mlf(MlfArgs),
    /// Simulate, estimate the order profile and write discharge.csv,
    /// varorder.csv and summary.json.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// R1/R2 alternating resistors, one capacitor value.
    Alternating,
    /// Alternating resistors and alternating capacitors C/C2.
    Enhanced,
    /// Alternating ladder whose shunts are alternating sub-ladders.
    Nested,
}

#[derive(Args)]
struct DesignArgs {
    /// One of the measured circuits: dl060, dl130, nl14x14.
    #[arg(long, conflicts_with_all = ["kind", "r1", "r2", "c", "c2", "n", "sub_n"])]
    preset: Option<Preset>,
    #[arg(long, value_enum, default_value = "alternating")]
    kind: Kind,
    /// Odd-step resistance [Ω].
    #[arg(long, default_value_t = 2000.0)]
    r1: f64,
    /// Even-step resistance [Ω].
    #[arg(long, default_value_t = 8200.0)]
    r2: f64,
    /// Capacitance [F].
    #[arg(long, default_value_t = 470e-9)]
    c: f64,
    /// Even-step capacitance of the enhanced ladder [F].
    #[arg(long)]
    c2: Option<f64>,
    /// Number of steps.
    #[arg(long, default_value_t = 130)]
    n: usize,
    /// Steps of each sub-ladder of a nested ladder.
    #[arg(long, default_value_t = 14)]
    sub_n: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    /// Circuit JSON, inline or as a file path.
    #[arg(long, required_unless_present = "preset")]
    spec: Option<String>,
    /// One of the measured circuits: dl060, dl130, nl14x14.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<Preset>,
}

impl SpecArgs {
    fn load(&self) -> Result<LadderSpec64> {
        match (&self.preset, &self.spec) {
            (Some(p), _) => Ok(p.spec()),
            (None, Some(s)) => cio::load_spec(s),
            (None, None) => Err(CliError::Config("either --spec or --preset is required".into())),
        }
    }
}

#[derive(Args)]
struct BodeArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Lowest angular frequency [rad/s].
    #[arg(long)]
    wmin: f64,
    /// Highest angular frequency [rad/s].
    #[arg(long)]
    wmax: f64,
    /// Points per decade (at least 4).
    #[arg(long, default_value_t = 50)]
    ppd: usize,
    /// Scale factor on the impedance, e.g. 1/R_in of an integrator.
    #[arg(long, default_value_t = 1.0)]
    gain: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value = "discharge")]
    mode: Mode,
    /// Charge level (discharge) or step amplitude (step) [V].
    #[arg(long, default_value_t = 1.0)]
    u0: f64,
    /// Source resistor in the discharge path [Ω]; 0 clamps the terminal.
    #[arg(long, default_value_t = 1e6)]
    rsource: f64,
    /// Integrator gain in step mode.
    #[arg(long, default_value_t = 1.0)]
    gain: f64,
    /// End time [s].
    #[arg(long, default_value_t = 100.0)]
    tend: f64,
    /// Sampling period [s].
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Standard deviation of additive Gaussian noise [V].
    #[arg(long, requires = "seed")]
    noise: Option<f64>,
    /// Seed of the noise generator.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    /// Two-column CSV `t,u`; header optional, comma or semicolon delimited.
    #[arg(long)]
    data: PathBuf,
    /// Subtract the last sample before fitting.
    #[arg(long)]
    subtract_final_value: bool,
}

impl DataArgs {
    fn load(&self) -> Result<fractance::TimeSeries64> {
        let mut ts = cio::read_series(&self.data)?;
        if self.subtract_final_value {
            cio::subtract_final_value(&mut ts);
        }
        Ok(ts)
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// End of the fit window [s].
    #[arg(long)]
    window_end: f64,
    /// Initial order.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Initial rate coefficient (negative).
    #[arg(long, allow_negative_numbers = true)]
    a0: Option<f64>,
    /// Initial amplitude.
    #[arg(long, allow_negative_numbers = true)]
    y00: Option<f64>,
}

#[derive(Args)]
struct VarorderArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated window ends [s]; 1..5 by 1 then 10..100 by 5 when absent.
    #[arg(long)]
    schedule: Option<String>,
    /// Fit every window from the default start, in parallel.
    #[arg(long)]
    cold_start: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MlfArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Real part of the argument.
    #[arg(long, allow_negative_numbers = true)]
    z: f64,
    /// Imaginary part of the argument.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    zi: f64,
    /// Accuracy in [1e-15, 1e-6].
    #[arg(long, default_value_t = 1e-14)]
    tol: f64,
}

#[derive(Args)]
struct PipelineArgs {
    /// JSON pipeline configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Circuit JSON, inline or as a file path.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<String>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    u0: Option<f64>,
    #[arg(long)]
    rsource: Option<f64>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tend: Option<f64>,
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    cold_start: bool,
    #[arg(long)]
    subtract_final_value: bool,
    /// Directory for the output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                Some(PipelineConfig::from_json(&text)?)
            }
            None => None,
        };
        let source = match (&self.preset, &self.spec) {
            (Some(p), _) => Some(SpecSource::Preset { preset: *p }),
            (None, Some(s)) => Some(SpecSource::Inline(cio::load_spec(s)?)),
            (None, None) => None,
        };
        let mut c = match (base, source) {
            (Some(mut c), s) => {
                if let Some(s) = s {
                    c.spec = s;
                }
                c
            }
            (None, Some(s)) => PipelineConfig {
                spec: s,
                ..PipelineConfig::preset(Preset::Dl130)
            },
            (None, None) => return Err(CliError::Config("one of --config, --spec or --preset is required".into())),
        };
        c.mode = self.mode.unwrap_or(c.mode);
        c.u0 = self.u0.unwrap_or(c.u0);
        c.r_source = self.rsource.unwrap_or(c.r_source);
        c.gain = self.gain.unwrap_or(c.gain);
        c.dt = self.dt.unwrap_or(c.dt);
        c.t_end = self.tend.unwrap_or(c.t_end);
        if let Some(s) = &self.schedule {
            c.schedule = Some(cio::parse_schedule(s)?);
        }
        c.warm_start &= !self.cold_start;
        c.subtract_final_value |= self.subtract_final_value;
        Ok(c)
    }
}

/// One line to stdout; a closed pipe is not an error.
fn say(line: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{line}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(CliError::output),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(CliError::output)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn design(args: &DesignArgs) -> Result<()> {
    let spec = match args.preset {
        Some(p) => p.spec(),
        None => match args.kind {
            Kind::Alternating => make_alternating_ladder(args.r1, args.r2, args.c, args.n),
            Kind::Enhanced => {
                let c2 = args.c2.ok_or_else(|| CliError::Config("--c2 is required for an enhanced ladder".into()))?;
                make_enhanced_ladder(args.r1, args.r2, args.c, c2, args.n)
            }
            Kind::Nested => make_alternating_ladder(args.r1, args.r2, args.c, args.sub_n)
                .and_then(|sub| make_nested_ladder(args.r1, args.r2, &sub, args.n)),
        }
        .map_err(CliError::config)?,
    };
    let mut out = output(&args.out)?;
    writeln!(out, "{}", cio::spec_json(&spec)).map_err(CliError::output)?;
    out.flush().map_err(CliError::output)
}

fn bode(args: &BodeArgs) -> Result<()> {
    let spec = args.spec.load()?;
    let resp = bode_sweep(&spec, args.wmin, args.wmax, args.ppd, args.gain).map_err(CliError::config)?;
    cio::write_bode(output(&args.out)?, &resp)
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let spec = args.spec.load()?;
    let mut ts = match args.mode {
        Mode::Discharge => simulate_discharge(&spec, args.rsource, args.u0, args.tend, args.dt),
        Mode::Step => simulate_step(&spec, args.gain, args.u0, args.tend, args.dt),
    }
    .map_err(|e| match e {
        fractance::timesim::SimError::Argument { .. } => CliError::config(e),
        e => CliError::simulation(e),
    })?;
    if let (Some(sigma), Some(seed)) = (args.noise, args.seed) {
        let noise = Normal::new(0.0, sigma).map_err(|e| CliError::Config(format!("--noise: {e}")))?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ts.samples.iter_mut().for_each(|u| *u += noise.sample(&mut rng));
    }
    cio::write_series(output(&args.out)?, &ts)
}

fn fit(args: &FitArgs) -> Result<()> {
    let ts = args.data.load()?;
    let init = match (args.alpha0, args.a0, args.y00) {
        (None, None, None) => None,
        (alpha, a, y0) => {
            let t: Vec<f64> = ts.times();
            let d = fractance::mlfit::default_guess(&t, &ts.samples);
            Some(InitialGuess {
                alpha: alpha.unwrap_or(d.alpha),
                a: a.unwrap_or(d.a),
                y0: y0.unwrap_or(d.y0),
            })
        }
    };
    if let Some(g) = init {
        if !(g.alpha > 0.0 && g.alpha < 2.0 && g.a < 0.0) {
            return Err(CliError::Config("initial guess needs 0 < alpha0 < 2 and a0 < 0".into()));
        }
    }
    let r = fit_ml(&ts, args.window_end, init, &FitOptions::default()).map_err(CliError::fit)?;
    #[derive(serde::Serialize)]
    struct FitReport {
        alpha: f64,
        a: f64,
        y0: f64,
        sse: f64,
        converged: bool,
        iterations: usize,
    }
    let out = FitReport {
        alpha: r.alpha,
        a: r.a,
        y0: r.y0,
        sse: r.sse,
        converged: r.converged,
        iterations: r.iterations,
    };
    say(&serde_json::to_string_pretty(&out).map_err(CliError::output)?)?;
    Ok(())
}

fn varorder(args: &VarorderArgs) -> Result<()> {
    let ts = args.data.load()?;
    let schedule = match &args.schedule {
        Some(s) => cio::parse_schedule(s)?,
        None => default_window_schedule(),
    };
    let opts = VarOrderOptions {
        warm_start: !args.cold_start,
        ..Default::default()
    };
    let profile = estimate_variable_order(&ts, &schedule, &opts).map_err(|e| match e {
        fractance::varorder::VarOrderError::Fit(e) => CliError::fit(e),
        e => CliError::config(e),
    })?;
    cio::write_profile(output(&args.out)?, &profile)
}

fn mlf(args: &MlfArgs) -> Result<()> {
    let params = MlParams::new(args.alpha, args.beta).map_err(CliError::config)?;
    let v = mlf_eval(&params, Complex::new(args.z, args.zi), args.tol).map_err(CliError::config)?;
    if !v.certified {
        log::warn!("tolerance {} not certified ({:?} regime)", args.tol, v.regime);
    }
    if args.zi == 0.0 {
        say(&fmt_num(v.value.re))?;
    } else {
        say(&format!("{} {}", fmt_num(v.value.re), fmt_num(v.value.im)))?;
    }
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let config = args.config()?;
    let out = run_pipeline(&config)?;
    write_outputs(&args.out_dir, &out)?;
    say(&serde_json::to_string_pretty(&out.summary).map_err(CliError::output)?)?;
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Design(a) => design(a),
        Command::Bode(a) => bode(a),
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Varorder(a) => varorder(a),
        Command::Mlf(a) => mlf(a),
        Command::Pipeline(a) => pipeline(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
