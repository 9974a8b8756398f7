//! Command-line front end for the `specgraph` library.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a verification failed,
//! 3 the horizon or search budget ran out before a decision.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use specgraph::category::{amalgamate, fraisse_check, fraisse_prefix, lax_fraisse_check, CategoryError, CategoryName, CategorySpec};
use specgraph::dot::write_dot_dir;
use specgraph::generators::{generate, GeneratorName};
use specgraph::io::{morphism_from_json, sequence_from_json, sequence_to_json, square_to_json, to_json};
use specgraph::poset::spectrum_report;
use specgraph::{Morphism, Property, Sequence, Verdict, Witness};

#[derive(Parser)]
#[command(name = "specgraph", version, about = "Graph sequences, amalgams and their spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List generators and categories.
    List,
    /// Write a generated prefix G_0, ..., G_N as JSON.
    Generate {
        name: String,
        /// Index of the last level.
        #[arg(long)]
        levels: usize,
        /// Generator parameter as key=value; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide a property up to a horizon and print the verdict as JSON.
    ///
    /// Ideal properties are checked for a subsequence; others step by step.
    Check {
        sequence: PathBuf,
        #[arg(long)]
        property: String,
        #[arg(long)]
        horizon: usize,
        /// Require every step to satisfy the property, even for ideals.
        #[arg(long)]
        every_step: bool,
    },
    /// Certify the prefix as (lax-)Fraïssé for a category.
    Classify {
        sequence: PathBuf,
        #[arg(long)]
        category: String,
        #[arg(long)]
        horizon: usize,
        /// Check the strict conditions too.
        #[arg(long)]
        strict: bool,
    },
    /// Complete a cospan f, g to a commuting square.
    Amalgamate {
        #[arg(long)]
        category: String,
        f: PathBuf,
        g: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build a Fraïssé prefix by absorbing sampled requests.
    Fraisse {
        #[arg(long)]
        category: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest request domain relative to the current level.
        #[arg(long, default_value_t = 2)]
        size_bound: usize,
        #[command(flatten)]
        out: OutArg,
        /// Absorption log; defaults to `<out>.log.json` next to the output.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Topological report on the spectrum of a prefix.
    Spectrum {
        sequence: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Write DOT files and optionally re-export the JSON.
    Export {
        sequence: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also draw the induced poset.
        #[arg(long)]
        poset: bool,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OutArg {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A check the library ran and lost; exit code 2. Any other error is
/// invalid input and exits 1.
#[derive(Debug)]
struct Failed(String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

enum Outcome {
    Done,
    Verdict(Verdict),
}

fn exit_for(v: &Verdict) -> u8 {
    match v {
        Verdict::Holds { .. } => 0,
        Verdict::FailsOnPrefix { .. } => 2,
        Verdict::Unknown { .. } => 3,
    }
}

fn emit(out: &OutArg, text: &str) -> Result<()> {
    match &out.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn load_sequence(p: &Path) -> Result<Sequence> {
    sequence_from_json(&read(p)?).with_context(|| format!("loading {}", p.display()))
}

fn load_morphism(p: &Path) -> Result<Morphism> {
    morphism_from_json(&read(p)?).with_context(|| format!("loading {}", p.display()))
}

fn category(name: &str) -> Result<CategorySpec> {
    Ok(CategorySpec::parse(name)?)
}

fn category_error(e: CategoryError) -> anyhow::Error {
    match e {
        CategoryError::Verification(_) => anyhow::Error::new(Failed(e.to_string())),
        e => e.into(),
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("parameter {kv:?} is not key=value"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn step_by_step(s: &Sequence, p: Property, horizon: usize) -> Verdict {
    let h = horizon.min(s.last());
    for n in 0..h {
        if let Some(why) = p.violation(s.step(n)) {
            return Verdict::FailsOnPrefix {
                witness: Witness::Level {
                    level: n + 1,
                    detail: format!("step onto level {n}: {why}"),
                },
            };
        }
    }
    if h == 0 {
        return Verdict::Unknown {
            horizon: h,
            note: "no steps inside the horizon".into(),
        };
    }
    Verdict::Holds {
        witness: Witness::Subsequence {
            pairs: (0..h).map(|n| (n, n + 1)).collect(),
        },
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::List => {
            println!("generators:");
            for g in GeneratorName::ALL {
                let params: Vec<String> = g.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("  {:<22} {}", g.name(), g.describe());
                if !params.is_empty() {
                    println!("  {:<22} params: {}", "", params.join(" "));
                }
            }
            println!("categories:");
            for c in CategoryName::ALL {
                println!("  {c}  {}", c.describe());
            }
            Ok(Outcome::Done)
        }
        Command::Generate { name, levels, params, out } => {
            let g: GeneratorName = name.parse()?;
            let s = generate(g, levels, &parse_params(&params)?)?;
            emit(&out, &sequence_to_json(&s))?;
            Ok(Outcome::Done)
        }
        Command::Check {
            sequence,
            property,
            horizon,
            every_step,
        } => {
            let s = load_sequence(&sequence)?;
            let p = Property::from_name(&property).ok_or_else(|| anyhow!("unknown property {property:?}"))?;
            let v = if p.is_ideal() && !every_step {
                s.has_subsequence_in(p, horizon)?
            } else {
                step_by_step(&s, p, horizon)
            };
            print!("{}", to_json(&v));
            Ok(Outcome::Verdict(v))
        }
        Command::Classify {
            sequence,
            category: cat,
            horizon,
            strict,
        } => {
            let s = load_sequence(&sequence)?;
            let cat = category(&cat)?;
            let h = horizon.min(s.last());
            let v = if strict {
                fraisse_check(&cat, &s, h)
            } else {
                lax_fraisse_check(&cat, &s, h)
            }
            .map_err(category_error)?;
            let kind = if strict { "Fraïssé" } else { "lax-Fraïssé" };
            println!("{kind} at horizon {h}: {}", v.label());
            print!("{}", to_json(&v));
            Ok(Outcome::Verdict(v))
        }
        Command::Amalgamate { category: cat, f, g, out } => {
            let cat = category(&cat)?;
            let f = load_morphism(&f)?;
            let g = load_morphism(&g)?;
            // Put both legs on one codomain so the square shares it.
            let g = if specgraph::relation::same_graph(f.cod(), g.cod()) {
                Morphism::new(g.dom().clone(), f.cod().clone(), g.pairs())?
            } else {
                bail!(CategoryError::NotACospan);
            };
            let a = amalgamate(&cat, &f, &g).map_err(category_error)?;
            emit(&out, &square_to_json(&f, &g, &a))?;
            eprintln!("apex: {} vertices, {} edges", a.apex.len(), a.apex.edge_count());
            Ok(Outcome::Done)
        }
        Command::Fraisse {
            category: cat,
            steps,
            seed,
            size_bound,
            out,
            log,
        } => {
            let cat = category(&cat)?;
            let built = fraisse_prefix(&cat, steps, seed, size_bound).map_err(category_error)?;
            emit(&out, &sequence_to_json(&built.sequence))?;
            let log_path = log.or_else(|| out.out.as_ref().map(|p| p.with_extension("log.json")));
            let log_json = serde_json::json!({
                "category": cat.name,
                "steps": steps,
                "seed": seed,
                "size_bound": size_bound,
                "absorbed": built.log,
            });
            match log_path {
                Some(p) => fs::write(&p, to_json(&log_json)).with_context(|| format!("writing {}", p.display()))?,
                None => eprint!("{}", to_json(&log_json)),
            }
            let sizes: Vec<String> = built.sequence.graphs().iter().map(|g| g.len().to_string()).collect();
            eprintln!("level sizes: {}", sizes.join(" "));
            Ok(Outcome::Done)
        }
        Command::Spectrum {
            sequence,
            horizon,
            report,
        } => {
            let s = load_sequence(&sequence)?;
            let r = spectrum_report(&s, horizon);
            let text = to_json(&r);
            match report {
                Some(p) => fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            for (name, v) in [("connected", &r.connected), ("hausdorff", &r.hausdorff), ("perfect", &r.perfect)] {
                eprintln!("{name}: {}", v.label());
            }
            Ok(Outcome::Done)
        }
        Command::Export {
            sequence,
            dot,
            poset,
            json,
        } => {
            if dot.is_none() && json.is_none() {
                bail!("nothing to export: pass --dot and/or --json");
            }
            let s = load_sequence(&sequence)?;
            if let Some(dir) = dot {
                let files = write_dot_dir(&s, &dir, poset).with_context(|| format!("writing into {}", dir.display()))?;
                eprintln!("wrote {} DOT files to {}", files.len(), dir.display());
            }
            if let Some(p) = json {
                fs::write(&p, sequence_to_json(&s)).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(Outcome::Done)
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SPECGRAPH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("SPECGRAPH_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| anyhow!(e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let outcome = init_threads().and_then(|()| run(cli));
    match outcome {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Verdict(v)) => ExitCode::from(exit_for(&v)),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Failed>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
