use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lobsys::commands::{self, Command, Family};
use lobsys::config::Config;

#[derive(Parser)]
#[command(name = "lobsys", version, about = "Local orthonormal systems on binary filtrations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a filtration (from a file or a generator) and its manifest.
    Build,
    /// Evaluate w1, w2, w2* (and the Haar criterion for constants).
    CheckConditions,
    /// Estimate Bernstein-inequality constants.
    EstimateBi,
    /// Greedy and dictionary n-term approximation curves.
    Greedy,
    /// Reproduce a construction: lemma3.15, thm4.2, ex5.5, ex5.8, hermite, haar.
    Reproduce { family: String },
}

#[derive(Args)]
struct Flags {
    /// Configuration document (JSON); flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// constant | tensor:r1,..,rd | total:r | span:m1;m2;...
    #[arg(long, global = true)]
    space: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    gamma: Option<f64>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    plot: bool,
    /// Filtration file to load.
    #[arg(long, global = true)]
    filtration: Option<String>,
    /// empty | dyadic | regular | random | thm4.2 | ex5.5 | ex5.8
    #[arg(long, global = true)]
    generator: Option<String>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    splits: Option<usize>,
    #[arg(long, global = true)]
    c3: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<usize>,
    #[arg(long, global = true)]
    axis: Option<usize>,
    #[arg(long, global = true)]
    i_max: Option<usize>,
    #[arg(long, global = true)]
    tau0: Option<f64>,
    /// x | power:a | step:c | kink:c
    #[arg(long, global = true)]
    target: Option<String>,
    #[arg(long, global = true)]
    samples: Option<usize>,
}

impl Flags {
    fn to_config(&self) -> Config {
        Config {
            seed: self.seed,
            p: self.p,
            tau: self.tau,
            rho: self.rho,
            space: self.space.clone(),
            depth: self.depth,
            budget: self.budget,
            restarts: self.restarts,
            workers: self.workers,
            n: self.n,
            gamma: self.gamma,
            plot: self.plot.then_some(true),
            filtration: self.filtration.clone(),
            generator: self.generator.clone(),
            dim: self.dim,
            splits: self.splits,
            c3: self.c3,
            kappa: self.kappa,
            axis: self.axis,
            i_max: self.i_max,
            tau0: self.tau0,
            target: self.target.clone(),
            samples: self.samples,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> anyhow::Result<()> {
        let mut cfg = match &cli.flags.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        cfg.overlay(&cli.flags.to_config());
        let cmd = match &cli.cmd {
            Cmd::Build => Command::Build,
            Cmd::CheckConditions => Command::CheckConditions,
            Cmd::EstimateBi => Command::EstimateBi,
            Cmd::Greedy => Command::Greedy,
            Cmd::Reproduce { family } => Command::Reproduce(Family::parse(family)?),
        };
        commands::run(cmd, &cfg, &cli.flags.out)
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
