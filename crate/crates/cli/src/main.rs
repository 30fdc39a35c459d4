use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use giant_sse::noise::{vacuum_statistics, NoiseSampler};
use giant_sse::Atom;
use giant_sse_cli::config::ExperimentConfig;
use giant_sse_cli::{output, run, scenario, sweep, validate};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "giant-sse", version, about = "Giant-atom waveguide simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML experiment file.
    #[arg(conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `giant-sse scenarios`).
    #[arg(long)]
    scenario: Option<String>,
    /// Output root; the GIANT_SSE_OUTPUT_DIR environment variable takes precedence.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let cfg = match (&self.config, &self.scenario) {
            (Some(p), None) => ExperimentConfig::load(p)?,
            (None, Some(name)) => scenario::builtin(name)?,
            _ => bail!("give a config file or --scenario"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        output::output_root(self.out.as_deref()).join(&cfg.name)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the correlation kernels α_{μν}(τ) (one table per sweep cell).
    Correlate(Source),
    /// Run a single configuration (sweep axes are ignored).
    Simulate(Source),
    /// Run every cell of the sweep and aggregate metrics.
    Sweep(Source),
    /// Check empirical noise moments against the kernels.
    NoiseTest {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        probes: usize,
        /// Tolerance in standard errors.
        #[arg(long, default_value_t = 4.0)]
        sigmas: f64,
    },
    /// Cross-check the solvers against each other.
    Validate,
    /// List built-in scenarios, or print one as TOML.
    Scenarios { name: Option<String> },
}

fn correlate(src: &Source) -> Result<()> {
    let cfg = src.load()?;
    let dir = src.dir(&cfg);
    for (i, ax) in cfg.cells().into_iter().enumerate() {
        let r = cfg.resolve(ax)?;
        let k = run::kernel(&r)?;
        let path = dir.join(format!("kernel_{i:04}.csv"));
        output::write_atomic(&path, &output::kernel_csv(&k)?)?;
        let peaks = |mu, nu| -> Vec<String> {
            k.peak_indices(mu, nu, 0.1).iter().map(|&j| format!("{:.3}", j as f64 * k.dt())).collect()
        };
        println!(
            "cell {i}: |α_aa| peaks at τ = [{}], |α_ab| peaks at τ = [{}] -> {}",
            peaks(Atom::A, Atom::A).join(", "),
            peaks(Atom::A, Atom::B).join(", "),
            path.display()
        );
    }
    Ok(())
}

fn simulate(src: &Source) -> Result<()> {
    let cfg = src.load()?;
    let dir = src.dir(&cfg);
    let r = cfg.resolve(Default::default())?;
    let out = run::run(&r)?;
    output::write_run(&dir, &cfg, &r, &out)?;
    let c = out.concurrence()?;
    println!(
        "{}: {} steps of ωΔt = {} on {} modes in {:.2?}; max C = {:.4}; excluded {}/{}; -> {}",
        cfg.name,
        (cfg.time.t_max / r.dt).round(),
        r.dt,
        r.modes,
        out.elapsed,
        c.iter().cloned().fold(0.0, f64::max),
        out.excluded,
        out.trajectories,
        dir.display()
    );
    Ok(())
}

fn run_sweep(src: &Source) -> Result<()> {
    let cfg = src.load()?;
    let dir = src.dir(&cfg);
    let start = Instant::now();
    let res = sweep::sweep(&cfg, Some(&dir))?;
    println!("{}: {} cells in {:.2?} -> {}", cfg.name, res.cells.len(), start.elapsed(), dir.display());
    for g in &res.groups {
        let key = match (g.count, g.width) {
            (Some(m), _) => format!("m = {m}"),
            (_, Some(s)) => format!("s = {s}"),
            _ => "all".into(),
        };
        let probe = match (g.probe_time, g.contrast, g.variance) {
            (Some(t), Some(c), Some(v)) => format!(", at ωt = {t}: contrast {c:.3}, variance {v:.3e}"),
            _ => String::new(),
        };
        println!("  {key}: peak C {:.4}, mean C {:.4}{probe}", g.peak, g.mean);
    }
    Ok(())
}

fn noise_test(src: &Source, samples: usize, probes: usize, sigmas: f64) -> Result<()> {
    let cfg = src.load()?;
    let r = cfg.resolve(Default::default())?;
    let mc = run::couplings(&r)?;
    let t = cfg.time.t_max;
    let sampler = NoiseSampler::vacuum(&mc, r.dt, t)?;
    let k = run::kernel(&r)?;
    let steps = sampler.steps();
    let pairs = [(Atom::A, Atom::A), (Atom::A, Atom::B), (Atom::B, Atom::A), (Atom::B, Atom::B)];
    let probe_list: Vec<_> = (0..probes)
        .map(|i| {
            let t_step = (i * 7919 + 13) % (steps + 1);
            let s_step = t_step - (i * 104_729) % (t_step + 1);
            let (mu, nu) = pairs[i % 4];
            (t_step, s_step, mu, nu)
        })
        .collect();
    let start = Instant::now();
    let stats = vacuum_statistics(&sampler, cfg.ensemble.as_ref().map_or(42, |e| e.seed), samples, &probe_list, |p| {
        k.at(p.2, p.3, p.0 - p.1)
    });
    let mut rows = Vec::new();
    let mut failed = 0;
    for s in &stats {
        let pass = s.passes(sigmas);
        failed += usize::from(!pass);
        let cov = s.covariance.mean();
        rows.push(vec![
            (s.t_step as f64 * r.dt).to_string(),
            (s.s_step as f64 * r.dt).to_string(),
            format!("{:?}", s.mu).to_lowercase(),
            format!("{:?}", s.nu).to_lowercase(),
            s.mean.mean().norm().to_string(),
            s.pair.mean().norm().to_string(),
            cov.re.to_string(),
            cov.im.to_string(),
            s.expected.re.to_string(),
            s.expected.im.to_string(),
            pass.to_string(),
        ]);
    }
    let path = src.dir(&cfg).join("noise_test.csv");
    output::write_atomic(
        &path,
        &output::table_csv(
            &["t", "s", "mu", "nu", "abs_mean", "abs_pair", "re_cov", "im_cov", "re_alpha", "im_alpha", "pass"],
            &rows,
        )?,
    )?;
    println!("{} of {} probes within {sigmas}σ ({samples} samples, {:.2?}) -> {}", probes - failed, probes, start.elapsed(), path.display());
    if failed > 0 {
        bail!("{failed} probes outside tolerance");
    }
    Ok(())
}

fn run_validate() -> Result<()> {
    let mut failed = 0;
    for c in validate::all() {
        let c = c.context("check could not run")?;
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        bail!("{failed} checks failed");
    }
    Ok(())
}

fn scenarios(name: Option<&str>) -> Result<()> {
    match name {
        Some(n) => print!("{}", scenario::source(n)?),
        None => {
            for n in scenario::names() {
                let cfg = scenario::builtin(n)?;
                let method = format!("{:?}", cfg.method).to_lowercase();
                let initial = format!("{:?}", cfg.initial).to_lowercase();
                println!("{n:20} {method:9} from {initial}");
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Correlate(s) => correlate(s),
        Command::Simulate(s) => simulate(s),
        Command::Sweep(s) => run_sweep(s),
        Command::NoiseTest { source, samples, probes, sigmas } => noise_test(source, *samples, *probes, *sigmas),
        Command::Validate => run_validate(),
        Command::Scenarios { name } => scenarios(name.as_deref()),
    }
}
