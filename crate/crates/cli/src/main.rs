use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use abstract_tube::identity::{fuzz_identity, SamplerConfig};
use abstract_tube::lexlp::{feasible, Backend, LpOptions};
use abstract_tube::mvn::{mc_oracle, tail_prob_estimate, QuadratureConfig, TailProblem};
use abstract_tube::srange::{
    calibrate_c, census_under_orders, studentized_polyhedron, sweep_grid, table1_census,
    tukey_kramer_sweep, StudentizedRangeSpec,
};
use abstract_tube::{
    build_tube, build_unperturbed_complex, prob, prob_mc_oracle, AbstractTube, IndexSet,
    Polyhedron, ProbConfig, TubeOptions,
};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

#[derive(Parser)]
#[command(
    name = "tube",
    version,
    about = "Abstract tubes and Gaussian polyhedron probabilities"
)]
struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the abstract tube of a polyhedron.
    Build {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Perturbation exponents, one per constraint, e.g. 2,3,1.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        no_prune: bool,
        /// Decide feasibility in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Fuzz the indicator identity at random rational points.
    CheckIdentity {
        #[arg(long)]
        poly: PathBuf,
        /// Tube to check; the unperturbed face complex when omitted.
        #[arg(long)]
        tube: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Probability of the polyhedron under the standard normal distribution.
    Prob {
        #[arg(long)]
        poly: PathBuf,
        /// Precomputed tube; built on the fly when omitted.
        #[arg(long)]
        tube: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Per-term CSV report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also print a Monte Carlo estimate with this many samples.
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Write the studentized-range polyhedron.
    Srange {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        c: f64,
        /// Variances σ_i², all one when omitted.
        #[arg(long, value_delimiter = ',')]
        sigmas: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tube sizes of the equal-variance studentized range for k = 2..kmax.
    Table1 {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
        /// Also report sizes under this many random constraint orders.
        #[arg(long, default_value_t = 0)]
        orders: usize,
    },
    /// Distribution function along σ_i² = (10^s)^{(i-1)/(k-1)}, s ∈ [-5, 5].
    TukeyKramer {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        /// Threshold; calibrated to F = 0.95 at equal variances when omitted.
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether a subset belongs to the tube.
    Feasible {
        #[arg(long)]
        polyhedron: PathBuf,
        /// 1-based indices, e.g. 1,3.
        #[arg(long)]
        subset: String,
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        exact: bool,
    },
    /// Pr(y > lower) for y ~ N(0, sigma).
    Tailprob {
        /// Rows separated by ';', entries by ',', e.g. "1,0.5;0.5,1".
        #[arg(long)]
        sigma: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lower: Vec<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        mc: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn lp_options(order: Option<Vec<usize>>, exact: bool) -> LpOptions {
    LpOptions {
        order,
        backend: if exact {
            Backend::Exact
        } else {
            Backend::Float
        },
        ..Default::default()
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Build {
            input,
            out,
            order,
            no_prune,
            exact,
        } => {
            let p: Polyhedron = read_json(&input)?;
            let opts = TubeOptions {
                lp: lp_options(order, exact),
                prune: !no_prune,
            };
            let started = Instant::now();
            let t = build_tube(&p, &opts)?;
            write_json(&out, &t)?;
            let stats = t.stats();
            println!(
                "{} members (by cardinality {:?}), r = {}, {:.2?}",
                stats.total,
                stats.by_cardinality,
                t.r,
                started.elapsed()
            );
        }
        Command::CheckIdentity {
            poly,
            tube,
            samples,
        } => {
            let p: Polyhedron = read_json(&poly)?;
            let complex = match tube {
                Some(path) => {
                    let t: AbstractTube = read_json(&path)?;
                    t.check_matches(&p)?;
                    t.members
                }
                None => build_unperturbed_complex(&p, abstract_tube::tube::UNPERTURBED_MAX_M)?,
            };
            let cfg = SamplerConfig {
                samples,
                seed: cli.seed,
                ..Default::default()
            };
            let stats = fuzz_identity(&p, &complex, &cfg);
            println!("{}", serde_json::to_string_pretty(&stats)?);
            if stats.violations > 0 {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Prob {
            poly,
            tube,
            tol,
            report,
            mc,
        } => {
            let p: Polyhedron = read_json(&poly)?;
            let t = match tube {
                Some(path) => read_json(&path)?,
                None => build_tube(&p, &TubeOptions::pruned())?,
            };
            let r = prob(&p, &t, &ProbConfig::with_tolerance(tol))?;
            println!("P(K) = {:.12}", r.p_k);
            println!(
                "raw = {:.12}, terms = {}, error estimate = {:.3e} (budget {:.3e})",
                r.raw,
                r.terms.len(),
                r.error_estimate,
                r.error_budget
            );
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = report {
                let mut w = csv::Writer::from_path(&path)
                    .with_context(|| format!("writing {}", path.display()))?;
                w.write_record(["member", "sign", "term_probability"])?;
                for term in &r.terms {
                    w.write_record([
                        term.subset.to_string(),
                        term.sign.to_string(),
                        format!("{:.17e}", term.probability),
                    ])?;
                }
                w.flush()?;
            }
            if let Some(samples) = mc {
                let (est, se) = prob_mc_oracle(&p, samples, cli.seed);
                println!("Monte Carlo = {est:.6} ± {se:.2e} ({samples} samples)");
            }
        }
        Command::Srange { k, c, sigmas, out } => {
            let variances = sigmas.unwrap_or_else(|| vec![1.0; k]);
            if variances.len() != k {
                bail!("--sigmas has {} entries, expected {k}", variances.len());
            }
            let spec = StudentizedRangeSpec::new(variances, c)?;
            write_json(&out, &studentized_polyhedron(&spec))?;
            println!("k = {k}, m = {}", spec.m());
        }
        Command::Table1 { kmax, orders } => {
            if kmax < 2 {
                bail!("--kmax must be at least 2");
            }
            println!("k\tm\t|F(0+)|\tseconds");
            for k in 2..=kmax {
                let started = Instant::now();
                let row = &table1_census([k])?[0];
                println!(
                    "{}\t{}\t{}\t{:.2}",
                    row.k,
                    row.m,
                    row.terms,
                    started.elapsed().as_secs_f64()
                );
                if orders > 0 {
                    let sizes = census_under_orders(k, orders, cli.seed)?;
                    println!("  under {orders} random orders: {sizes:?}");
                }
            }
        }
        Command::TukeyKramer {
            k,
            grid,
            c,
            tol,
            out,
        } => {
            let cfg = ProbConfig::with_tolerance(tol);
            let c = match c {
                Some(c) => c,
                None => {
                    let cal = calibrate_c(&vec![1.0; k], 0.95, 1e-4, (0.1, 10.0), &cfg)?;
                    println!(
                        "calibrated c = {:.6} (F = {:.6}, {} bisections)",
                        cal.c, cal.f, cal.iterations
                    );
                    cal.c
                }
            };
            let curve = tukey_kramer_sweep(k, &sweep_grid(grid), c, &cfg)?;
            let mut w = csv::Writer::from_path(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            w.write_record(["s", "F"])?;
            for pt in &curve {
                w.write_record([pt.s.to_string(), format!("{:.10}", pt.f)])?;
            }
            w.flush()?;
            if let Some(min) = curve.iter().min_by(|a, b| a.f.total_cmp(&b.f)) {
                println!("minimum F = {:.8} at s = {}", min.f, min.s);
            }
        }
        Command::Feasible {
            polyhedron,
            subset,
            order,
            exact,
        } => {
            let p: Polyhedron = read_json(&polyhedron)?;
            let j = IndexSet::parse(&subset)?;
            let member = feasible(&p, &j, &lp_options(order, exact))?;
            println!("{j}: {}", if member { "member" } else { "not a member" });
        }
        Command::Tailprob {
            sigma,
            lower,
            tol,
            mc,
        } => {
            let rows: Vec<Vec<f64>> = sigma
                .split(';')
                .map(|r| r.split(',').map(|x| x.trim().parse::<f64>()).collect())
                .collect::<std::result::Result<_, _>>()
                .context("parsing --sigma")?;
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                bail!("--sigma must be square");
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let tp = TailProblem::new(DMatrix::from_row_slice(d, d, &flat), lower)?;
            let cfg = tol.map_or_else(
                || QuadratureConfig::for_dimension(d),
                QuadratureConfig::with_tolerance,
            );
            let est = tail_prob_estimate(&tp, &cfg)?;
            println!("{:.12} (error estimate {:.2e})", est.value, est.error);
            if est.error > cfg.abs_tol {
                eprintln!(
                    "warning: error estimate exceeds tolerance {:.2e}",
                    cfg.abs_tol
                );
            }
            if let Some(samples) = mc {
                let (m, se) = mc_oracle(&tp, samples, cli.seed);
                println!("Monte Carlo = {m:.6} ± {se:.2e} ({samples} samples)");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
