use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dslab_cli::config::{parse_grid, parse_projection, parse_variant, Overrides, ScenarioConfig};
use dslab_cli::{evolve, export, surface, verify, CliError};

/// Surfaces in R^4 from Dirac spinors and their hierarchy deformations.
#[derive(Parser)]
#[command(name = "dslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario file (sectioned TOML); defaults apply without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; the DSLAB_OUT environment variable wins over this.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid size as NX,NY.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Hierarchy level of the flow.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=3))]
    level: Option<u8>,
    /// printed or v1.
    #[arg(long = "a3-variant", global = true, value_parser = parse_variant)]
    a3_variant: Option<dslab_core::hierarchy::A3Variant>,
    /// 1-based coordinates of the OBJ projection, as i,j,k.
    #[arg(long, global = true, value_parser = parse_projection)]
    projection: Option<[usize; 3]>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and write verify.json.
    Verify,
    /// Build the surface and write CSV, OBJ and geometry.json.
    Surface,
    /// Evolve the initial data and write diagnostics, drift CSV and plots.
    Evolve,
    /// Re-render plots and meshes of an existing run directory.
    Export,
}

fn load(common: &Common) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    let env_out = std::env::var_os("DSLAB_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    cfg.apply(&Overrides {
        seed: common.seed,
        grid: common.grid,
        level: common.level,
        a3_variant: common.a3_variant,
        projection: common.projection,
        out: env_out.or_else(|| common.out.clone()),
    });
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(&cli.common)?;
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::Verify => {
            let m = verify::cmd_verify(&cfg, &out)?;
            for c in &m.checks {
                println!(
                    "{} {:<40} {:>12.3e} (tol {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            println!(
                "{} passed, {} failed; report {}",
                m.passed,
                m.failed,
                out.join(verify::MANIFEST).display()
            );
            Ok(m.all_passed())
        }
        Command::Surface => {
            let r = surface::cmd_surface(&cfg, &out)?;
            println!(
                "surface {}x{} written to {}; path independence {:.3e}, curvature residual {:.3e}",
                r.nx,
                r.ny,
                out.display(),
                r.path_independence,
                r.curvature_residual
            );
            Ok(true)
        }
        Command::Evolve => {
            let m = evolve::cmd_evolve(&cfg, &out)?;
            println!(
                "{} records written to {}; W drift {:.3e}, max J drift {:.3e}",
                m.records,
                out.display(),
                m.drift.w_drift,
                m.drift.j_drift.iter().copied().fold(0.0, f64::max)
            );
            Ok(true)
        }
        Command::Export => {
            let files = export::cmd_export(&out, cfg.output.projection)?;
            println!("re-rendered {} in {}", files.join(", "), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dslab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
