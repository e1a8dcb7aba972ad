use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyper2d::harmonics::SymmetryClass;
use hyper2d::run::{self, RunConfig, SurfaceOutput};
use hyper2d::{Error, PairPotential, Result};

#[derive(Parser)]
#[command(
    name = "hyper2d",
    version,
    about = "Adiabatic hyperspherical three-body calculations in two dimensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetry-allowed (λ, |ω|) labels as CSV.
    Enumerate {
        #[arg(long)]
        class: SymmetryClass,
        #[arg(long = "M", default_value_t = 0)]
        m: i32,
        #[arg(long = "lambda-max")]
        lambda_max: i32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound states of the pair potential as CSV.
    Twobody {
        #[arg(long, allow_negative_numbers = true, default_value_t = -30.0)]
        depth: f64,
        #[arg(long, default_value_t = 1.0)]
        range: f64,
        /// Single value or inclusive range such as 0..3.
        #[arg(long, default_value = "0..3")]
        m2b: String,
        #[arg(long, default_value_t = 0.5)]
        reduced_mass: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adiabatic and effective potentials with tail classification.
    Surfaces(SurfaceArgs),
    /// Surfaces plus the full P and Q coupling matrices.
    Couplings(SurfaceArgs),
    /// Threshold-law exponents in summary-table layout; needs --class.
    Threshold {
        #[arg(long = "M-max", default_value_t = 2)]
        m_max: i32,
        /// Also check the WKB scaling on computed surface tails.
        #[arg(long)]
        validate_wkb: bool,
        #[command(flatten)]
        surface: SurfaceArgs,
    },
    /// Fast internal consistency checks.
    Validate,
}

#[derive(Args, Clone)]
struct SurfaceArgs {
    /// JSON run configuration; command-line values override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "class", id = "surface_class")]
    class: Option<SymmetryClass>,
    /// Comma-separated |M| values.
    #[arg(long = "M", id = "surface_m", value_delimiter = ',')]
    m: Vec<i32>,
    /// Comma-separated reflection labels (s, a).
    #[arg(long = "r", value_delimiter = ',')]
    r: Vec<String>,
    /// Comma-separated masses m1,m2,m3.
    #[arg(long, value_delimiter = ',')]
    masses: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    depth: Option<f64>,
    #[arg(long)]
    range: Option<f64>,
    /// start:stop:count[:geom]
    #[arg(long = "R-grid")]
    r_grid: Option<String>,
    #[arg(long)]
    channels: Option<usize>,
    /// n_theta,n_phi,order
    #[arg(long, value_delimiter = ',')]
    basis: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl SurfaceArgs {
    fn into_config(self, base: RunConfig) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json(&fs::read_to_string(p)?)?,
            None => base,
        };
        if let Some(x) = self.class {
            c.class = x;
        }
        if !self.m.is_empty() {
            c.m = self.m;
        }
        if !self.r.is_empty() {
            c.r = self.r.iter().map(|s| run::parse_reflection(s)).collect::<Result<_>>()?;
        }
        if !self.masses.is_empty() {
            c.masses = self.masses.try_into().map_err(|_| Error::Config {
                field: "masses".into(),
                message: "expected three values".into(),
            })?;
        }
        if let Some(x) = self.depth {
            c.depth = x;
        }
        if let Some(x) = self.range {
            c.range = x;
        }
        if let Some(g) = self.r_grid {
            c.grid = g.parse()?;
        }
        if let Some(x) = self.channels {
            c.channels = x;
        }
        if !self.basis.is_empty() {
            let [n_theta, n_phi, order]: [usize; 3] = self.basis.try_into().map_err(|_| Error::Config {
                field: "basis".into(),
                message: "expected n_theta,n_phi,order".into(),
            })?;
            c.basis = run::BasisSize { n_theta, n_phi, order };
        }
        if let Some(x) = self.out {
            c.output_dir = x;
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        c.validate()?;
        Ok(c)
    }
}

fn parse_m2b(s: &str) -> Result<Vec<i32>> {
    let bad = || Error::Config {
        field: "m2b".into(),
        message: format!("expected N or A..B, got '{s}'"),
    };
    if let Some((a, b)) = s.split_once("..") {
        let a: i32 = a.trim().parse().map_err(|_| bad())?;
        let b: i32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        Ok((a..=b).collect())
    } else {
        Ok(vec![s.trim().parse().map_err(|_| bad())?])
    }
}

fn emit(body: &str, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Enumerate {
            class,
            m,
            lambda_max,
            out,
        } => emit(&run::enumerate_csv(class, m, lambda_max)?, out)?,
        Command::Twobody {
            depth,
            range,
            m2b,
            reduced_mass,
            out,
        } => {
            let pp = PairPotential::new(depth, range)?;
            emit(&run::twobody_csv(&pp, &parse_m2b(&m2b)?, reduced_mass)?, out)?;
        }
        Command::Surfaces(args) => {
            let config = args.into_config(RunConfig::default())?;
            run::run_surfaces(&config, SurfaceOutput::Surfaces)?;
            eprintln!("wrote {}", config.output_dir.display());
        }
        Command::Couplings(args) => {
            let config = args.into_config(RunConfig::default())?;
            run::run_surfaces(&config, SurfaceOutput::SurfacesAndCouplings)?;
            eprintln!("wrote {}", config.output_dir.display());
        }
        Command::Threshold {
            m_max,
            validate_wkb,
            surface,
        } => {
            let class = surface.class.ok_or_else(|| Error::Config {
                field: "class".into(),
                message: "--class is required".into(),
            })?;
            emit(&run::threshold_csv(&run::threshold_rows(class, m_max)?)?, None)?;
            if validate_wkb {
                let mut base = RunConfig {
                    class,
                    m: (0..=m_max).collect(),
                    ..RunConfig::default()
                };
                base.grid = "16:30:8".parse()?;
                base.channels = 6;
                let config = surface.into_config(base)?;
                let results = run::run_surfaces(&config, SurfaceOutput::Surfaces)?;
                let checks = run::validate_wkb(&results)?;
                let body = run::wkb_csv(&checks)?;
                fs::write(config.output_dir.join("wkb_validation.csv"), &body)?;
                eprint!("{body}");
                return Ok(checks.iter().all(|c| c.passed));
            }
        }
        Command::Validate => {
            let checks = run::validate_all();
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config { .. }) => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
