use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::RunConfig;
use crate::error::{Error, Result};
use crate::fourier::sf2;
use crate::mikado::{lp_scaling_check, MikadoFamily};
use crate::nash::probes::{decay_probe_hhl, decay_probe_hl, probe_amplitude, probe_oscillation, BetaWeight};
use crate::nash::{verify_state, Frac, IterationState};
use crate::norms::{besov_norm, lp_norm_labeled, sobolev_norm_labeled, NormTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nsforge", version, about = "Nash iteration for stationary 2D Navier-Stokes on the torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full iteration: base step, then qmax steps with checks and diagnostics.
    Run(RunArgs),
    /// Build a Mikado family and check its properties.
    Mikado(MikadoArgs),
    /// ||a(.) V(lambda .)||_{H^-2} along a sweep.
    ProbeHl(ProbeArgs),
    /// ||alpha beta_lambda V(lambda^beta .)||_{H^-2} with Mikado weights.
    ProbeHhl(ProbeHhlArgs),
    /// Re-verify a dumped state.
    Check(CheckArgs),
    /// Norm table of a dumped field.
    Norms(NormsArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<u32>,
    #[arg(long)]
    pub lambda0: Option<u64>,
    #[arg(long)]
    pub eps_gamma: Option<Frac>,
    #[arg(long)]
    pub amp: Option<Frac>,
    #[arg(long)]
    pub qmax: Option<u32>,
    #[arg(long)]
    pub lambda_cap: Option<u64>,
    #[arg(long)]
    pub gap: Option<u64>,
    #[arg(long)]
    pub grid_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_fields: bool,
    #[arg(long)]
    pub emit_images: bool,
    /// Frequencies of the R-norm trend, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct MikadoArgs {
    #[arg(long, default_value_t = 16)]
    pub lambda: u64,
    #[arg(long, default_value = "1/2")]
    pub eps_gamma: Frac,
    /// Frequencies for the L^p scaling table (defaults to `--lambda` and 4x it).
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<u64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub sweep: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeHhlArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
    pub sweep: Vec<u64>,
    #[arg(long, default_value = "1/2")]
    pub eps_gamma: Frac,
    #[arg(long, default_value_t = 3)]
    pub beta: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Directory written by `run --dump-fields` (`state_<q>`).
    pub state: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    /// A `.sf2` field.
    pub field: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::Io(_) | Error::Integrity(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_CHECK,
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>, name: &str) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), &text)?;
    }
    println!("{}", String::from_utf8_lossy(&text).trim_end());
    Ok(())
}

fn run_config(a: RunArgs) -> Result<RunConfig> {
    let mut c = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let it = &mut c.iteration;
    if let Some(v) = a.beta {
        it.beta = v;
    }
    if let Some(v) = a.lambda0 {
        it.lambda0 = v;
    }
    if let Some(v) = a.eps_gamma {
        it.eps_gamma = v;
    }
    if let Some(v) = a.amp {
        it.amp = v;
    }
    if let Some(v) = a.qmax {
        it.qmax = v;
    }
    if let Some(v) = a.lambda_cap {
        it.lambda_cap = v;
    }
    if let Some(v) = a.gap {
        it.gap = v;
    }
    if let Some(v) = a.grid_max {
        it.grid_max = v;
    }
    if let Some(v) = a.sweep {
        it.trend_sweep = v;
    }
    if let Some(v) = a.out {
        c.output.dir = v;
    }
    c.output.dump_fields |= a.dump_fields;
    c.output.emit_images |= a.emit_images;
    c.validate()?;
    Ok(c)
}

fn cmd_run(a: RunArgs) -> Result<i32> {
    let cfg = run_config(a)?;
    let (_, report) = super::execute_run(&cfg)?;
    for s in &report.steps {
        println!(
            "q = {}: lambda = {}, eps = {}, shell {}, ||R||_H^-2 = {:.6e} (bound {:.6e}{}), step {}",
            s.q,
            s.lambda,
            s.eps,
            s.shell,
            s.item3.measured,
            s.item3.bound,
            if s.item3.pass { "" } else { ", trend reported" },
            if s.pass { "passes" } else { "FAILS" }
        );
    }
    if let Some(why) = &report.stopped {
        println!("stopped: {why}");
    }
    println!("report: {}", cfg.output.dir.join("report.json").display());
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK })
}

#[derive(Serialize)]
struct MikadoOutput {
    check: crate::mikado::MikadoCheck,
    pass: bool,
    scaling: Vec<crate::mikado::LpScalingRow>,
}

fn cmd_mikado(a: MikadoArgs) -> Result<i32> {
    let eps = a.eps_gamma.0;
    let fam = MikadoFamily::build(a.lambda, eps)?;
    let check = fam.verify();
    let pass = check.pass(1e-8);
    let sweep = a.sweep.unwrap_or_else(|| vec![a.lambda, 4 * a.lambda]);
    let mut scaling = Vec::new();
    for l in sweep {
        scaling.extend(lp_scaling_check(&MikadoFamily::build(l, eps)?, &[1.0, 2.0, f64::INFINITY]));
    }
    emit(&MikadoOutput { check, pass, scaling }, a.out.as_deref(), "mikado.json")?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK })
}

fn cmd_probe_hl(a: ProbeArgs) -> Result<i32> {
    let t = decay_probe_hl(&probe_amplitude(), &probe_oscillation(), &a.sweep)?;
    emit(&t, a.out.as_deref(), "probe_hl.json")?;
    Ok(EXIT_OK)
}

fn cmd_probe_hhl(a: ProbeHhlArgs) -> Result<i32> {
    let t = decay_probe_hhl(&probe_amplitude(), BetaWeight::Mikado { eps: a.eps_gamma.0 }, &probe_oscillation(), &a.sweep, a.beta)?;
    emit(&t, a.out.as_deref(), "probe_hhl.json")?;
    Ok(EXIT_OK)
}

fn cmd_check(a: CheckArgs) -> Result<i32> {
    let state = IterationState::load(&a.state)?;
    let rep = verify_state(&state)?;
    emit(&rep, a.out.as_deref(), "check.json")?;
    Ok(if rep.pass { EXIT_OK } else { EXIT_CHECK })
}

fn cmd_norms(a: NormsArgs) -> Result<i32> {
    let f = sf2::load(&a.field)?;
    let mut t = NormTable::new();
    for p in [1.0, 2.0, f64::INFINITY] {
        t.push(lp_norm_labeled(&f, p, "field")?);
    }
    for s in [-1.0, -2.0] {
        t.push(sobolev_norm_labeled(&f, s, "field"));
    }
    let mut b = besov_norm(&f, -0.625)?;
    b.label = "field".into();
    t.push(b);
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        t.write(&dir.join("norms.csv"))?;
    }
    emit(&t, None, "")?;
    Ok(EXIT_OK)
}

fn configure_threads() -> std::result::Result<(), String> {
    if let Ok(v) = std::env::var("NSFORGE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("NSFORGE_THREADS: '{v}' is not a count"))?;
        if n == 0 {
            return Err("NSFORGE_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Mikado(a) => cmd_mikado(a),
        Command::ProbeHl(a) => cmd_probe_hl(a),
        Command::ProbeHhl(a) => cmd_probe_hhl(a),
        Command::Check(a) => cmd_check(a),
        Command::Norms(a) => cmd_norms(a),
    }
}

/// Parse `argv`, run the subcommand and return the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
