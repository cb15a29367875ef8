use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multifreq::forward::{
    disk_oracle, optical_theorem_defect, solve_scattering, uniform_directions, FarFieldPattern,
    IncidentWave,
};
use multifreq::harness::{
    self, execute, load_run, parse_grid, parse_levels, parse_shape, simulate, write_report,
    Dataset, RunConfig, RunMode, RunStatus, SimulationSetup,
};
use multifreq::multilevel::DEFAULT_EPSILON;
use multifreq::{Error, Result};

#[derive(Parser)]
#[command(
    name = "multifreq",
    version,
    about = "Multifrequency inverse obstacle scattering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate noisy far-field data on a frequency grid.
    Simulate {
        /// `flower:c1,c2,petals`, `circle:R[,cx,cy]` or a shape JSON file.
        #[arg(long)]
        shape: String,
        /// `kl,kh,N`
        #[arg(long, default_value = "0.5,8,11")]
        grid: String,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 16)]
        obs_dirs: usize,
        /// Incident direction `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<String>,
        #[arg(long, default_value_t = multifreq::forward::DEFAULT_N_QUAD)]
        n_quad: usize,
    },
    /// Recursive Newton reconstruction.
    Reconstruct {
        #[command(flatten)]
        common: RunArgs,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long)]
        newton_iters: Option<usize>,
    },
    /// Multi-level Newton reconstruction.
    Multilevel {
        #[command(flatten)]
        common: RunArgs,
        /// `first-step`, `midpoint`, `single`, `END:ALPHA:J,...` or a JSON file.
        #[arg(long)]
        levels: Option<String>,
        /// Base alpha used by the named partitions.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Compare the Nystrom solver with the disk series solution.
    Oracle {
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 128)]
        n_quad: usize,
        #[arg(long, default_value_t = 16)]
        obs_dirs: usize,
    },
    /// Write and print the convergence tables of a run.
    Report {
        #[arg(long)]
        run: PathBuf,
    },
    /// Overlay true, initial and reconstructed boundaries as SVG.
    Plot {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON run configuration; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    subspace_cap: Option<usize>,
    #[arg(long)]
    n_quad: Option<usize>,
    /// Refinement steps of the initial guess.
    #[arg(long)]
    init_iters: Option<usize>,
}

impl RunArgs {
    fn config(&self, mode: RunMode) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::read(p)?,
            None => RunConfig::default(),
        };
        cfg.mode = mode;
        if let Some(d) = &self.data {
            cfg.dataset = Some(d.clone());
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        if let Some(c) = self.subspace_cap {
            cfg.subspace_cap = c;
        }
        if let Some(n) = self.n_quad {
            cfg.n_quad = Some(n);
        }
        if let Some(i) = self.init_iters {
            cfg.init.refine_iters = i;
        }
        Ok(cfg)
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("expected x,y, got {s:?}")))?;
    match v.as_slice() {
        [x, y] => Ok([*x, *y]),
        _ => Err(Error::Config(format!("expected x,y, got {s:?}"))),
    }
}

fn finish_run(cfg: &RunConfig) -> Result<i32> {
    let record = execute(cfg)?;
    let out = cfg
        .output
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default();
    match record.status {
        RunStatus::Completed => {
            print!("completed; results in {out}");
            if let Some(e) = record.relative_error {
                print!("; relative error {e:.4e}");
            }
            println!();
        }
        RunStatus::Aborted => {
            eprintln!(
                "error: {}; partial results in {out}",
                record.error.as_deref().unwrap_or("aborted")
            );
        }
    }
    Ok(record.exit_code)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate {
            shape,
            grid,
            noise,
            seed,
            out,
            obs_dirs,
            theta,
            n_quad,
        } => {
            let truth = parse_shape(&shape)?;
            let grid = parse_grid(&grid)?;
            let setup = SimulationSetup {
                theta: match theta {
                    Some(t) => parse_pair(&t)?,
                    None => harness::default_theta(),
                },
                obs_count: obs_dirs,
                n_quad,
            };
            let ds = simulate(&truth, &grid, &setup, noise, seed)?;
            ds.write(&out)?;
            println!("wrote {} patterns to {}", ds.patterns.len(), out.display());
            Ok(0)
        }
        Command::Reconstruct {
            common,
            alpha,
            newton_iters,
        } => {
            let mut cfg = common.config(RunMode::Reconstruct)?;
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(j) = newton_iters {
                cfg.iterations = j;
            }
            finish_run(&cfg)
        }
        Command::Multilevel {
            common,
            levels,
            alpha,
            epsilon,
        } => {
            let mut cfg = common.config(RunMode::Multilevel)?;
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(spec) = levels {
                let path = cfg
                    .dataset
                    .clone()
                    .ok_or_else(|| Error::Config("--data is required".into()))?;
                let grid = Dataset::read(&path)?.grid();
                cfg.partition = Some(parse_levels(&spec, &grid, cfg.alpha, epsilon)?);
            }
            finish_run(&cfg)
        }
        Command::Oracle {
            radius,
            k,
            check,
            n_quad,
            obs_dirs,
        } => {
            let wave = IncidentWave::new(k, harness::default_theta())?;
            let dirs = uniform_directions(obs_dirs);
            let exact = disk_oracle(radius, [0.0, 0.0], &wave, &dirs)?;
            let shape = multifreq::geometry::TrigShape::circle([0.0, 0.0], radius)?;
            let numeric = solve_scattering(&shape, &wave, &dirs, n_quad)?;
            let rel = numeric.relative_distance(&exact);
            let fine = uniform_directions(256);
            let relative_defect = |p: &FarFieldPattern| {
                optical_theorem_defect(p, &wave)
                    / multifreq::forward::l2_norm_sphere(&p.values).powi(2)
            };
            let exact_fine = disk_oracle(radius, [0.0, 0.0], &wave, &fine)?;
            let numeric_fine = solve_scattering(&shape, &wave, &fine, n_quad)?;
            let (d_exact, d_numeric) =
                (relative_defect(&exact_fine), relative_defect(&numeric_fine));
            println!("radius\t{radius}\nk\t{k}\nn_quad\t{n_quad}\nobs_dirs\t{obs_dirs}");
            println!("relative_far_field_error\t{rel:.3e}");
            println!("optical_defect_series\t{d_exact:.3e}");
            println!("optical_defect_nystrom\t{d_numeric:.3e}");
            if check && !(rel <= 1e-8 && d_exact <= 1e-6 && d_numeric <= 1e-6) {
                eprintln!("error: oracle check failed");
                return Ok(3);
            }
            Ok(0)
        }
        Command::Report { run } => {
            let (record, trace) = load_run(&run)?;
            let dataset = match &record.dataset {
                Some(p) => Some(Dataset::read(p)?),
                None => None,
            };
            let tables = harness::report(&trace, dataset.as_ref());
            write_report(&run, &tables)?;
            let mut stdout = std::io::stdout().lock();
            let text = [
                tables.errors.as_deref(),
                Some(&tables.iterations),
                Some(&tables.sigma),
            ];
            for t in text.into_iter().flatten() {
                // a closed pipe (e.g. `| head`) is not an error here
                if writeln!(stdout, "{t}").is_err() {
                    break;
                }
            }
            Ok(0)
        }
        Command::Plot { run, truth, out } => {
            let (record, _) = load_run(&run)?;
            let dataset = Dataset::read(&truth)?;
            let truth = dataset
                .truth()
                .cloned()
                .ok_or_else(|| Error::Config(format!("{} has no true shape", truth.display())))?;
            let shapes = vec![
                (truth, "true boundary".to_string()),
                (record.initial.shape.clone(), "initial guess".to_string()),
                (record.final_shape.clone(), "reconstruction".to_string()),
            ];
            harness::plot(&shapes, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
