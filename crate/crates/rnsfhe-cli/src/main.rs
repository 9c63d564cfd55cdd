use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use chipsim::analytic::Technique;
use chipsim::report::write_timeline;
use chipsim::sweep::{bootstrap_levels, sweep_chiplets};
use chipsim::ChipletConfig;
use clap::{Parser, Subcommand, ValueEnum};
use rnsfhe::verify::{self, Fault, Scope, Size};
use rnsfhe_cli::analyze::{self, Formula, Inputs};
use rnsfhe_cli::experiment::{cross_check, resolve_chiplet, Experiment};
use rnsfhe_cli::summary_table;

#[derive(Parser)]
#[command(name = "rnsfhe", version, about = "CKKS kernels, chiplet simulation and closed-form models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Kernels,
    Ckks,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SizeArg {
    Toy,
    Small,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mutation {
    None,
    /// Shift every shuffle write address by one.
    ShuffleOffByOne,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the oracle-differential suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        scope: ScopeArg,
        #[arg(long, value_enum, default_value = "toy")]
        size: SizeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Inject a fault to check that the suites catch it.
        #[arg(long, value_enum, default_value = "none")]
        mutate: Mutation,
    },
    /// Simulate an experiment file and write its report.
    Simulate {
        spec: PathBuf,
        /// Report path; overrides the spec's output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-op CSV timeline path; overrides the spec's output.
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Compare against closed forms and the functional census; fail on divergence.
        #[arg(long)]
        cross_check: bool,
        /// Print the functional and simulated operation counts.
        #[arg(long)]
        dump_census: bool,
        /// Accepted for uniformity; simulation is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a closed-form model.
    Analyze {
        /// throughput, improvement, comm, comm-early, census, bound, storage, twiddle
        formula: String,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long = "L")]
        l_max: Option<usize>,
        #[arg(long)]
        dnum: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        n1: Option<usize>,
        #[arg(long)]
        n2: Option<usize>,
        /// Clock in GHz.
        #[arg(long)]
        f: Option<f64>,
        /// HBM bandwidth in GB/s.
        #[arg(long)]
        hbm: Option<f64>,
        /// Link bandwidth in GB/s.
        #[arg(long)]
        c2c: Option<f64>,
        #[arg(long)]
        u: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        w: Option<u32>,
        #[arg(long)]
        tech: Option<String>,
        #[arg(long)]
        unshadowed: bool,
        /// Twiddles stored instead of generated.
        #[arg(long)]
        no_tfg: bool,
        /// Iterate one integer input, e.g. `l=0..30`.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        csv: bool,
    },
    /// Mean KeySwitch time across chiplet counts.
    Sweep {
        #[arg(long, default_value = "1024x64")]
        preset: String,
        /// JSON chiplet configuration; replaces the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12")]
        r: Vec<usize>,
        #[arg(long = "L", default_value_t = 30)]
        l_max: usize,
        /// Levels consumed by bootstrapping; the sweep covers the top `l_boot` levels.
        #[arg(long, default_value_t = 15)]
        l_boot: usize,
        /// Sweep every level `0..=L` instead.
        #[arg(long)]
        all_levels: bool,
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify { scope, size, seed, mutate } => {
            let scope = match scope {
                ScopeArg::Kernels => Scope::Kernels,
                ScopeArg::Ckks => Scope::Ckks,
                ScopeArg::All => Scope::All,
            };
            let size = match size {
                SizeArg::Toy => Size::Toy,
                SizeArg::Small => Size::Small,
            };
            let fault = match mutate {
                Mutation::None => Fault::None,
                Mutation::ShuffleOffByOne => Fault::ShuffleOffByOne,
            };
            let summary = verify::run(scope, size, seed, fault);
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(s) = summary.suites.iter().find(|s| !s.passed) {
                eprintln!("FAILED {}: {}", s.name, s.first_failure.as_deref().unwrap_or("?"));
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Simulate { spec, out, timeline, cross_check: xc, dump_census, seed: _ } => {
            let exp = Experiment::load(&spec)?;
            let sim = exp.run()?;
            print!("{}", summary_table(&sim.report));
            let out = out.or_else(|| exp.spec.outputs.report.as_ref().map(|p| exp.base.join(p)));
            if let Some(path) = out {
                let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                serde_json::to_writer_pretty(f, &sim.report)?;
                println!("report: {}", path.display());
            }
            let timeline = timeline.or_else(|| exp.spec.outputs.timeline.as_ref().map(|p| exp.base.join(p)));
            if let Some(path) = timeline {
                let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                write_timeline(&sim.dag, &sim.trace, f)?;
                println!("timeline: {}", path.display());
            }
            if dump_census {
                let v = serde_json::json!({ "functional": exp.functional_census(), "simulated": sim.report.census });
                println!("{}", serde_json::to_string_pretty(&v)?);
            }
            if xc {
                let checks = cross_check(&exp, &sim);
                for c in &checks {
                    println!("{} {:<30} simulated {:>10} expected {:>10}", if c.agree { "ok  " } else { "DIFF" }, c.quantity, c.simulated, c.expected);
                }
                if checks.iter().any(|c| !c.agree) {
                    return Ok(ExitCode::FAILURE);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Analyze {
            formula, l, l_max, dnum, k, r, n1, n2, f, hbm, c2c, u, n, w, tech, unshadowed, no_tfg, sweep, csv,
        } => {
            let formula: Formula = formula.parse()?;
            let d = Inputs::default();
            let x = Inputs {
                l: l.or(l_max).unwrap_or(d.l),
                l_max: l_max.or(l).unwrap_or(d.l_max),
                dnum,
                k,
                r: r.unwrap_or(d.r),
                n1: n1.unwrap_or(d.n1),
                n2: n2.unwrap_or(d.n2),
                f_ghz: f.unwrap_or(d.f_ghz),
                hbm_gbps: hbm.unwrap_or(d.hbm_gbps),
                c2c_gbps: c2c.unwrap_or(d.c2c_gbps),
                u: u.unwrap_or(d.u),
                n: n.unwrap_or(d.n),
                w: w.unwrap_or(d.w),
                tech: tech.as_deref().map(str::parse::<Technique>).transpose()?.unwrap_or(d.tech),
                unshadowed,
                tfg: !no_tfg,
            };
            let rows = match sweep {
                Some(s) => {
                    let (name, values) = analyze::parse_sweep(&s)?;
                    analyze::evaluate_sweep(formula, &x, &name, &values)?
                }
                None => analyze::evaluate(formula, &x, "")?,
            };
            if csv {
                analyze::write_csv(&rows, io::stdout().lock())?;
            } else {
                for row in &rows {
                    let at = if row.point.is_empty() { String::new() } else { format!("[{}] ", row.point) };
                    println!("{at}{} = {}", row.quantity, row.value);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep { preset, config, r, l_max, l_boot, all_levels, csv, out } => {
            let cfg = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    resolve_chiplet(&serde_json::from_str(&text)?)?
                }
                None => ChipletConfig::preset(&preset).with_context(|| format!("unknown preset {preset:?}"))?,
            };
            if r.is_empty() || r.contains(&0) {
                bail!("--r needs positive chiplet counts");
            }
            let levels = if all_levels { 0..=l_max } else { bootstrap_levels(l_max, l_boot) };
            let sweep = sweep_chiplets(&cfg, &r, levels)?;
            let mut stdout = io::stdout().lock();
            if csv {
                let mut w = csv_writer(&mut stdout);
                for p in &sweep.points {
                    w.serialize(p)?;
                }
                w.flush()?;
            } else {
                writeln!(stdout, "{:>4} {:>14} {:>14} {:>8}", "r", "mean cycles", "mean ms", "ratio")?;
                for s in &sweep.summary {
                    writeln!(stdout, "{:>4} {:>14.1} {:>14.5} {:>8.4}", s.r, s.mean_cycles, s.mean_time_ms, s.ratio)?;
                }
            }
            if let Some(path) = out {
                let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                serde_json::to_writer_pretty(f, &sweep)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}
