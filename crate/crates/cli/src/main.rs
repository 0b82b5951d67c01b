use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use meshpat::algebra::{self, PatternExpansion};
use meshpat::mahonian::{self, MultiPoly};
use meshpat::search::{self, MahonianSearch};
use meshpat::stats::Statistic;
use meshpat::{Error, MeshPattern, Permutation};

#[derive(Parser)]
#[command(name = "meshpat", version, about = "Mesh patterns on permutations")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Count occurrences of a mesh pattern in a permutation.
    Count { pattern: String, perm: String },

    /// Count (or list) the permutations of length n avoiding all patterns.
    Avoiders {
        patterns: Vec<String>,
        #[arg(long)]
        n: usize,
        /// Print the avoiders instead of their number.
        #[arg(long)]
        list: bool,
    },

    /// Expand a statistic or mesh pattern in classical patterns.
    Expand {
        /// A statistic name or a mesh pattern.
        target: String,
        /// Largest pattern length kept.
        #[arg(long = "N", short = 'N')]
        bound: usize,
    },

    /// Evaluate an expansion dump (file or `-` for stdin) on permutations.
    EvalExpansion {
        file: String,
        perms: Vec<String>,
    },

    /// Distribution polynomial of a statistic over S_n.
    Dist {
        #[arg(long)]
        stat: String,
        #[arg(long)]
        n: usize,
    },

    /// Check whether a statistic is equidistributed with inv up to nmax.
    MahonianCheck {
        #[arg(long)]
        stat: String,
        #[arg(long)]
        nmax: usize,
    },

    /// The joint distribution F_n of (S1, S2, T1, T2).
    Fn {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = FnMethod::Recursive)]
        method: FnMethod,
    },

    /// Apply the involution psi.
    Psi {
        perm: String,
        /// Also print the intermediate words.
        #[arg(long)]
        steps: bool,
    },

    /// Search the shadings of 321 counted by the Euler numbers E_{n+1}.
    SearchEuler {
        #[arg(long, default_value_t = 7)]
        nmax: usize,
        /// Write the simsun/andre constants file to this path.
        #[arg(long)]
        emit_constants: Option<PathBuf>,
    },

    /// Search Mahonian statistics (12, R) + (base, S).
    SearchMahonian {
        /// Base permutation of length 3; all six when omitted.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        /// Comma-separated filter sizes (default 3..=nmax).
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        /// Name the known family each survivor belongs to.
        #[arg(long)]
        classify: bool,
    },

    /// Euler numbers E_0 ..= E_N.
    Euler {
        #[arg(long = "N", short = 'N')]
        max: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FnMethod {
    Direct,
    Recursive,
}

/// Largest Mahonian search size accepted.
const MAHONIAN_NMAX: usize = 7;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let mut out = io::stdout().lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Truncation { .. } | Error::PatternTooLong { .. } | Error::OutOfRange { .. }) => 2,
        _ => 1,
    }
}

fn perm(s: &str) -> anyhow::Result<Permutation> {
    Ok(s.parse::<Permutation>()?)
}

fn pattern(s: &str) -> anyhow::Result<MeshPattern> {
    Ok(s.parse::<MeshPattern>()?)
}

/// A statistic name, or failing that a single mesh pattern.
enum StatArg {
    Named(Statistic),
    Pattern(MeshPattern),
}

impl StatArg {
    fn parse(s: &str) -> anyhow::Result<Self> {
        match Statistic::from_name(s) {
            Ok(stat) => Ok(StatArg::Named(stat)),
            Err(unknown) => match s.parse::<MeshPattern>() {
                Ok(p) => Ok(StatArg::Pattern(p)),
                Err(_) => Err(unknown.into()),
            },
        }
    }

    fn eval(&self, t: &Permutation) -> i64 {
        match self {
            StatArg::Named(s) => s.eval(t),
            StatArg::Pattern(p) => p.count(t) as i64,
        }
    }
}

fn emit(out: &mut impl Write, format: Format, text: &str, tsv: &str, value: Value) -> anyhow::Result<()> {
    match format {
        Format::Text => writeln!(out, "{text}")?,
        Format::Tsv => writeln!(out, "{tsv}")?,
        Format::Json => writeln!(out, "{value}")?,
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut impl Write) -> anyhow::Result<()> {
    let format = cli.format;
    match &cli.command {
        Command::Count { pattern: p, perm: t } => {
            let (p, t) = (pattern(p)?, perm(t)?);
            let c = p.count(&t);
            emit(
                out,
                format,
                &c.to_string(),
                &format!("{p}\t{t}\t{c}"),
                json!({"pattern": p.to_string(), "perm": t.to_string(), "count": c}),
            )
        }
        Command::Avoiders { patterns, n, list } => {
            let pats = patterns.iter().map(|s| pattern(s)).collect::<anyhow::Result<Vec<_>>>()?;
            if *list {
                let mut found = search::enumerate_avoiders(&pats, *n);
                found.sort();
                let words: Vec<String> = found.iter().map(ToString::to_string).collect();
                match format {
                    Format::Json => writeln!(out, "{}", json!({"n": n, "avoiders": words}))?,
                    _ => {
                        for w in words {
                            writeln!(out, "{w}")?;
                        }
                    }
                }
                Ok(())
            } else {
                let c = search::count_avoiders(&pats, *n);
                emit(out, format, &c.to_string(), &format!("{n}\t{c}"), json!({"n": n, "count": c}))
            }
        }
        Command::Expand { target, bound } => {
            let e = match StatArg::parse(target)? {
                StatArg::Named(stat) => algebra::expand_statistic(&stat, *bound),
                StatArg::Pattern(p) => algebra::reciprocity_expansion(&p, *bound),
            };
            print_expansion(out, format, &e)
        }
        Command::EvalExpansion { file, perms } => {
            let text = if file == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                s
            } else {
                fs::read_to_string(file).with_context(|| format!("reading {file}"))?
            };
            let e: PatternExpansion = text.parse()?;
            let mut rows = Vec::new();
            for t in perms {
                let t = perm(t)?;
                let v = e.evaluate(&t)?;
                rows.push((t, v));
            }
            match format {
                Format::Json => {
                    let values: Vec<Value> = rows
                        .iter()
                        .map(|(t, v)| json!({"perm": t.to_string(), "value": v}))
                        .collect();
                    writeln!(out, "{}", Value::Array(values))?;
                }
                Format::Tsv => {
                    for (t, v) in rows {
                        writeln!(out, "{t}\t{v}")?;
                    }
                }
                Format::Text => {
                    for (_, v) in rows {
                        writeln!(out, "{v}")?;
                    }
                }
            }
            Ok(())
        }
        Command::Dist { stat, n } => {
            let s = StatArg::parse(stat)?;
            let d = mahonian::distribution(|t| s.eval(t), *n)?;
            print_poly(out, format, &d, json!({"stat": stat, "n": n}))
        }
        Command::MahonianCheck { stat, nmax } => {
            let s = StatArg::parse(stat)?;
            let ok = mahonian::is_mahonian(|t| s.eval(t), *nmax)?;
            emit(
                out,
                format,
                &ok.to_string(),
                &format!("{stat}\t{nmax}\t{ok}"),
                json!({"stat": stat, "nmax": nmax, "mahonian": ok}),
            )
        }
        Command::Fn { n, method } => {
            let f = match method {
                FnMethod::Direct => mahonian::f_direct(*n),
                FnMethod::Recursive => mahonian::f_recursive(*n),
            };
            print_poly(out, format, &f, json!({"n": n}))
        }
        Command::Psi { perm: t, steps } => {
            let t = perm(t)?;
            let trace = mahonian::psi_steps(&t);
            let image = trace.last().cloned().unwrap_or_else(|| t.clone());
            let words: Vec<String> = trace.iter().map(ToString::to_string).collect();
            match format {
                Format::Json => writeln!(
                    out,
                    "{}",
                    json!({"perm": t.to_string(), "image": image.to_string(), "steps": words})
                )?,
                Format::Tsv => writeln!(out, "{t}\t{image}")?,
                Format::Text if *steps => {
                    for w in words {
                        writeln!(out, "{w}")?;
                    }
                }
                Format::Text => writeln!(out, "{image}")?,
            }
            Ok(())
        }
        Command::SearchEuler { nmax, emit_constants } => search_euler(out, format, *nmax, emit_constants.as_ref()),
        Command::SearchMahonian {
            base,
            nmax,
            schedule,
            classify,
        } => search_mahonian(out, format, base.as_deref(), *nmax, schedule.clone(), *classify),
        Command::Euler { max } => {
            let e = search::euler_numbers(*max);
            let words: Vec<String> = e.iter().map(ToString::to_string).collect();
            emit(
                out,
                format,
                &words.join(" "),
                &words.join("\t"),
                json!({"N": max, "euler": words}),
            )
        }
    }
}

fn print_expansion(out: &mut impl Write, format: Format, e: &PatternExpansion) -> anyhow::Result<()> {
    match format {
        Format::Text => write!(out, "{e}")?,
        Format::Tsv => {
            for (sigma, c) in e.iter() {
                writeln!(out, "{sigma}\t{c}")?;
            }
        }
        Format::Json => {
            let coeffs: Vec<Value> = e
                .iter()
                .map(|(sigma, c)| json!({"perm": sigma.to_string(), "coefficient": c}))
                .collect();
            writeln!(out, "{}", json!({"bound": e.bound(), "coefficients": coeffs}))?;
        }
    }
    Ok(())
}

fn print_poly(out: &mut impl Write, format: Format, f: &MultiPoly, mut meta: Value) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            meta["polynomial"] = json!(f.to_string());
            writeln!(out, "{meta}")?;
        }
        _ => writeln!(out, "{f}")?,
    }
    Ok(())
}

fn search_euler(out: &mut impl Write, format: Format, nmax: usize, constants: Option<&PathBuf>) -> anyhow::Result<()> {
    let classes = search::search_321_regions(nmax);
    let next = search::search_321_regions(nmax + 1);
    let stable = next.len() == classes.len()
        && next.iter().zip(&classes).all(|(a, b)| a.members == b.members);
    let lines: Vec<String> = classes.iter().map(|c| c.representative.to_string()).collect();
    let hash = search::content_hash(&lines);
    match format {
        Format::Json => {
            let items: Vec<Value> = classes
                .iter()
                .map(|c| {
                    json!({
                        "representative": c.representative.to_string(),
                        "members": c.members.iter().map(|r| MeshPattern::new(c.representative.pattern().clone(), *r).expect("k = 3").to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            writeln!(out, "{}", json!({"nmax": nmax, "classes": items, "stable_at_nmax_plus_one": stable, "sha256": hash}))?;
        }
        _ => {
            writeln!(out, "# params: search=321-euler nmax={nmax} classes={}", classes.len())?;
            writeln!(out, "# stable at nmax+1: {stable}")?;
            writeln!(out, "# sha256: {hash}")?;
            for (line, c) in lines.iter().zip(&classes) {
                match format {
                    Format::Tsv => writeln!(out, "{line}\t{}", c.members.len())?,
                    _ => writeln!(out, "{line}")?,
                }
            }
        }
    }
    if let Some(path) = constants {
        let derived = search::derive_shadings(nmax);
        fs::write(path, derived.constants_file()?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn search_mahonian(
    out: &mut impl Write,
    format: Format,
    base: Option<&str>,
    nmax: usize,
    schedule: Option<Vec<usize>>,
    classify: bool,
) -> anyhow::Result<()> {
    if nmax > MAHONIAN_NMAX {
        return Err(Error::OutOfRange {
            index: nmax as i64,
            lo: 0,
            hi: MAHONIAN_NMAX as i64,
        }
        .into());
    }
    let bases: Vec<Permutation> = match base {
        Some(b) => vec![perm(b)?],
        None => Permutation::all(3).collect(),
    };
    let schedule = schedule.unwrap_or_else(|| (3..=nmax).collect());
    if schedule.iter().any(|&n| n > nmax) {
        bail!("schedule entries must not exceed --nmax {nmax}");
    }
    let classifier = classify.then(|| search::FamilyClassifier::new(nmax.min(6)));
    let mut rows: Vec<(String, String, Option<String>)> = Vec::new();
    for b in &bases {
        let survivors = MahonianSearch::with_schedule(b.clone(), schedule.clone())?.run();
        for c in survivors {
            let (twelve, other) = c.patterns(b);
            let family = classifier.as_ref().map(|k| {
                k.classify(&c.descriptor(b))
                    .map_or_else(|| "unknown".to_string(), ToString::to_string)
            });
            rows.push((twelve.to_string(), other.to_string(), family));
        }
    }
    let lines: Vec<String> = rows.iter().map(|(a, b, _)| format!("{a}\t{b}")).collect();
    let hash = search::content_hash(&lines);
    let base_names: Vec<String> = bases.iter().map(ToString::to_string).collect();
    let sched: Vec<String> = schedule.iter().map(ToString::to_string).collect();
    match format {
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(a, b, f)| json!({"twelve": a, "base": b, "family": f}))
                .collect();
            writeln!(
                out,
                "{}",
                json!({"bases": base_names, "schedule": schedule, "survivors": items, "sha256": hash})
            )?;
        }
        _ => {
            writeln!(
                out,
                "# params: search=mahonian bases={} schedule={} survivors={}",
                base_names.join(","),
                sched.join(","),
                rows.len()
            )?;
            writeln!(out, "# sha256: {hash}")?;
            for (line, (_, _, f)) in lines.iter().zip(&rows) {
                match f {
                    Some(f) => writeln!(out, "{line}\t{f}")?,
                    None => writeln!(out, "{line}")?,
                }
            }
        }
    }
    Ok(())
}
