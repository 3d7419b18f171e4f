//! `gsf`: classify generalized numbers, run the singular scenarios, drive
//! the property suites, and export kernel/trajectory data.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 input error, 3 runtime
//! evaluation error.

mod expr_parse;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gsf_core::ring::{classify, Ctx, EpsGrid, Gauge, RingParams};
use gsf_core::scenarios::{
    run_pendulum, run_snell, run_step_potential, run_stress_strain, run_two_media, PendulumCfg,
    ScenarioConfig, SnellCfg, StepPotentialCfg, StressStrainCfg, TwoMediaCfg,
};

#[derive(Parser)]
#[command(name = "gsf", version, about = "eps-wise calculus on the gauge ring: classification, singular scenarios, verification")]
struct Cli {
    /// Gauge of the evaluation context.
    #[arg(long, global = true, value_enum, default_value_t = GaugeArg::Identity)]
    gauge: GaugeArg,
    /// Number of grid samples.
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Coarsest grid sample.
    #[arg(long, global = true)]
    grid_eps0: Option<f64>,
    /// Geometric grid ratio.
    #[arg(long, global = true)]
    grid_ratio: Option<f64>,
    /// Embedding exponent a in b = drho^-a.
    #[arg(long, global = true)]
    b_exponent: Option<f64>,
    /// Seed for the randomized property suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    Identity,
    #[value(name = "exp_inv", alias = "exp-inv")]
    ExpInv,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an expression over `drho` and `eps` against the gauge.
    Classify {
        /// Expression, e.g. "drho^2 + drho", "1/drho", "exp(1/eps)".
        expression: String,
        /// Moderateness cap.
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Run a singular scenario and emit CSVs plus an invariant report.
    Simulate {
        /// One of: pendulum, two_media, stress_strain, snell, step_potential.
        scenario: String,
        /// Plain-text config with [scenario.<name>] and [grid] sections.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run a module property suite with the manifest seed.
    Verify {
        /// One of: ring, mollifier, calculus, nilpotent, ode, heat, wave, hft.
        suite: String,
    },
    /// Export mollifier or embedded-kernel samples as CSV.
    EmbedExport {
        /// One of: mollifier, delta, heaviside, delta_compose_delta.
        what: String,
        /// Sample count per eps (or in x for the mollifier).
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        /// Half-width of the x window for embedded kernels.
        #[arg(long, default_value_t = 1.0)]
        x_max: f64,
    },
}

fn build_ctx(cli: &Cli, from_config: Option<&ScenarioConfig>) -> Result<Ctx, String> {
    if let Some(cfg) = from_config {
        if cli.grid_n.is_none()
            && cli.grid_eps0.is_none()
            && cli.grid_ratio.is_none()
            && matches!(cli.gauge, GaugeArg::Identity)
        {
            return cfg.build_ctx().map_err(|e| e.to_string());
        }
    }
    let gauge = match cli.gauge {
        GaugeArg::Identity => Gauge::identity(),
        GaugeArg::ExpInv => Gauge::exp_inv(),
    };
    let defaults = match cli.gauge {
        GaugeArg::Identity => (0.5, 0.5, 24),
        GaugeArg::ExpInv => (0.5, 0.82, 24),
    };
    let grid = EpsGrid::geometric(
        cli.grid_eps0.unwrap_or(defaults.0),
        cli.grid_ratio.unwrap_or(defaults.1),
        cli.grid_n.unwrap_or(defaults.2),
    )
    .map_err(|e| e.to_string())?;
    Ctx::new(gauge, grid, RingParams::default()).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Classify { expression, n_max } => {
            let ast = match expr_parse::parse(expression) {
                Ok(a) => a,
                Err(e) => {
                    eprintln!("parse error at position {}: {}", e.pos, e.message);
                    return Ok(ExitCode::from(2));
                }
            };
            let ctx = build_ctx(cli, None)?;
            let x = expr_parse::to_gennum(&ast, &ctx);
            let vals = x.values();
            if vals.iter().any(|v| v.is_nan()) {
                let i = vals.iter().position(|v| v.is_nan()).unwrap();
                eprintln!(
                    "evaluation error: NaN at eps = {} (grid index {})",
                    ctx.eps(i),
                    i
                );
                return Ok(ExitCode::from(3));
            }
            let cl = classify(&x, *n_max);
            println!("expression : {expression}");
            println!("gauge      : {:?}", ctx.gauge().kind());
            println!(
                "grid       : n = {}, eps in [{:.3e}, {:.3e}]",
                ctx.len(),
                ctx.eps(ctx.len() - 1),
                ctx.eps(0)
            );
            println!("label      : {:?}", cl.label);
            println!("order      : {:.6}", cl.order);
            println!("residual   : {:.3e}", cl.fit_residual);
            println!("non_moderate_suspected : {}", cl.non_moderate_suspected);
            println!("far_from_zero          : {}", cl.far_from_zero);
            if let Some(d) = &cl.diagnostic {
                println!("diagnostic : {d}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { scenario, config } => {
            let file_cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    match ScenarioConfig::parse(&text) {
                        Ok(c) => c,
                        Err(e) => {
                            eprintln!("config error: {e}");
                            return Ok(ExitCode::from(2));
                        }
                    }
                }
                None => ScenarioConfig::default(),
            };
            let ctx = build_ctx(cli, Some(&file_cfg))?;
            let apply_b = |b: &mut f64| {
                if let Some(a) = cli.b_exponent {
                    *b = a;
                }
            };
            let result = match scenario.as_str() {
                "pendulum" => {
                    let mut c = match PendulumCfg::from_config(&file_cfg) {
                        Ok(c) => c,
                        Err(e) => {
                            eprintln!("config error: {e}");
                            return Ok(ExitCode::from(2));
                        }
                    };
                    apply_b(&mut c.b_exponent);
                    run_pendulum(&ctx, &c)
                }
                "two_media" => {
                    let mut c = TwoMediaCfg::from_config(&file_cfg).map_err(|e| e.to_string())?;
                    apply_b(&mut c.b_exponent);
                    run_two_media(&ctx, &c)
                }
                "stress_strain" => {
                    let mut c =
                        StressStrainCfg::from_config(&file_cfg).map_err(|e| e.to_string())?;
                    apply_b(&mut c.b_exponent);
                    run_stress_strain(&ctx, &c)
                }
                "snell" => {
                    let mut c = SnellCfg::from_config(&file_cfg).map_err(|e| e.to_string())?;
                    apply_b(&mut c.b_exponent);
                    run_snell(&ctx, &c)
                }
                "step_potential" => {
                    let mut c =
                        StepPotentialCfg::from_config(&file_cfg).map_err(|e| e.to_string())?;
                    apply_b(&mut c.b_exponent);
                    run_step_potential(&ctx, &c)
                }
                other => {
                    eprintln!("unknown scenario `{other}`");
                    return Ok(ExitCode::from(2));
                }
            };
            let out = match result {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("runtime error: {e}");
                    return Ok(ExitCode::from(3));
                }
            };
            output::write_scenario(&cli.out, scenario, &out).map_err(|e| e.to_string())?;
            println!(
                "{}",
                output::render_report(scenario, &out.checks, cli.seed)
            );
            if out.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { suite } => {
            let ctx = build_ctx(cli, None)?;
            let Some(rep) = gsf_core::verify::run_suite(suite, &ctx, cli.seed) else {
                eprintln!(
                    "unknown suite `{suite}`; available: {}",
                    gsf_core::verify::SUITES.join(", ")
                );
                return Ok(ExitCode::from(2));
            };
            for c in &rep.checks {
                println!(
                    "check={} status={} value={:.6e} tol={:.1e} note={}",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.value,
                    c.tol,
                    c.note
                );
            }
            if rep.all_pass() {
                println!("suite={suite} status=pass seed={}", cli.seed);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("suite={suite} status=FAIL seed={}", cli.seed);
                Ok(ExitCode::from(1))
            }
        }
        Command::EmbedExport {
            what,
            samples,
            x_max,
        } => {
            let ctx = build_ctx(cli, None)?;
            let a = cli.b_exponent.unwrap_or(1.0);
            match output::write_embed_export(&cli.out, &ctx, what, *samples, *x_max, a) {
                Ok(path) => {
                    println!("wrote {}", path.display());
                    Ok(ExitCode::SUCCESS)
                }
                Err(output::ExportError::Unknown) => {
                    eprintln!(
                        "unknown export `{what}`; available: mollifier, delta, heaviside, delta_compose_delta"
                    );
                    Ok(ExitCode::from(2))
                }
                Err(output::ExportError::Io(e)) => Err(e.to_string()),
                Err(output::ExportError::Build(e)) => {
                    eprintln!("runtime error: {e}");
                    Ok(ExitCode::from(3))
                }
            }
        }
    }
}
