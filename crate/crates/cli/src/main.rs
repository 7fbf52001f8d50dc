//! `mapprox` command line. JSON on stdout, exact rationals as `"p/q"` strings.
//! Exit codes: 0 success, 1 domain error or failed check, 2 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mapprox::compress::standard_r_approximation;
use mapprox::equivalence::{ef_equivalent, fo_dist, ldist};
use mapprox::fmtp::{check_fmtp, restricted_fmtp_certificate, Certification};
use mapprox::format::{read_map, write_map_string, MeasureFile};
use mapprox::rational::{self, to_f64, to_text};
use mapprox::realize::{pipeline, realize, rewire, PipelineReport, Schedule};
use mapprox::sample::{cycle_statistics, random_mapping};
use mapprox::structure::cycle_cut_product;
use mapprox::{FiniteMapping, Rational, TypeSession};

#[derive(Parser)]
#[command(name = "mapprox", version, about = "Local types and finite approximation of unary-function structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Local,
    Fo,
}

#[derive(Subcommand)]
enum Command {
    /// Rank-r type distribution as a measure file (witness balls included).
    Types {
        file: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Print a table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Distance between two mappings over p-tuples at rank r.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_enum, default_value_t = DistKind::Local)]
        kind: DistKind,
    },
    /// Rank-r elementary equivalence via the EF game.
    Ef {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Checks the mass transport identity on random subset pairs.
    Fmtp {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Companion certificate for the rank-R type distribution.
    Certificate {
        file: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        r: usize,
    },
    /// Cycle-cut product with cut length m.
    Cut {
        file: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        type_rank: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closes the short cycles of a cut product.
    Rewire {
        file: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        clean: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds a mapping from a measure file.
    Realize {
        measure: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        multiplier: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Standard r-approximation.
    Compress {
        file: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full approximation pipeline; prints the report, writes the output map to --out.
    Pipeline {
        file: PathBuf,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_parser = parse_rational)]
        eps: Rational,
        /// Use the full-size rank schedule (cut = clean!).
        #[arg(long = "paper-schedule")]
        faithful: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded uniform random mapping.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Predicate density as NAME=p/q; repeatable.
        #[arg(long = "mark", value_parser = parse_density)]
        marks: Vec<(String, Rational)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean number of cycles of each length over random mappings.
    Cycles {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        rmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        table: bool,
    },
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    rational::parse(s).map_err(|e| e.to_string())
}

fn parse_density(s: &str) -> std::result::Result<(String, Rational), String> {
    let (name, q) = s.split_once('=').ok_or("expected NAME=p/q")?;
    Ok((name.to_string(), parse_rational(q)?))
}

fn load(path: &Path) -> Result<FiniteMapping> {
    read_map(path).with_context(|| format!("reading {}", path.display()))
}

fn emit_map(f: &FiniteMapping, out: Option<&Path>) -> Result<()> {
    let text = write_map_string(f);
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn q(x: &Rational) -> Value {
    Value::String(to_text(x))
}

fn report_json(report: &PipelineReport) -> Value {
    let c = &report.config;
    let stages: Vec<Value> = report
        .stages
        .iter()
        .map(|s| {
            json!({
                "name": s.name,
                "size": s.size,
                "millis": s.millis as u64,
                "histogram": s.histogram.iter().map(|(id, m)| json!({"type": id, "mass": q(m)})).collect::<Vec<_>>(),
                "ldist": s.ldist.as_ref().map(q),
                "note": s.note,
            })
        })
        .collect();
    json!({
        "format": "mapprox-pipeline-report",
        "version": 1,
        "p": report.p,
        "config": {
            "r": c.r, "rr": c.rr, "clean": c.clean, "cut": c.cut, "type_rank": c.type_rank,
            "elementary_rank": c.elementary_rank, "eps": q(&c.eps), "eps_res": q(&c.eps_res),
            "eps_f1": q(&c.eps_f1), "eps_mu": q(&c.eps_mu), "multiplier": c.multiplier,
            "n_away": c.n_away, "max_elements": c.max_elements,
        },
        "cuts": report.cuts,
        "certificate": report.certificate,
        "n_close": report.n_close,
        "stages": stages,
        "final_ldist": q(&report.final_ldist),
        "within_epsilon": report.within_epsilon,
    })
}

/// Returns whether the command's check passed.
fn run(cmd: Command) -> Result<bool> {
    let session = TypeSession::new();
    match cmd {
        Command::Types { file, rank, table } => {
            let f = load(&file)?;
            let mu = session.type_distribution(&f, rank)?;
            if table {
                println!("type\tmass\tmass (approx)\tball size");
                for (k, (t, m)) in mu.entries().iter().enumerate() {
                    println!("{k}\t{}\t{:.6}\t{}", to_text(m), to_f64(m), t.witness_ball().0.len());
                }
            } else {
                println!("{}", MeasureFile::from_measure(&mu).to_json());
            }
        }
        Command::Dist { a, b, p, r, kind } => {
            let (fa, fb) = (load(&a)?, load(&b)?);
            let d = match kind {
                DistKind::Local => ldist(&fa, &fb, p, r)?,
                DistKind::Fo => fo_dist(&fa, &fb, p, r)?,
            };
            let kind = match kind {
                DistKind::Local => "local",
                DistKind::Fo => "fo",
            };
            print_json(&json!({"kind": kind, "p": p, "r": r, "distance": q(&d)}));
        }
        Command::Ef { a, b, r } => {
            let eq = ef_equivalent(&load(&a)?, &load(&b)?, r)?;
            print_json(&json!({"r": r, "equivalent": eq}));
        }
        Command::Fmtp { file, trials, seed } => {
            let f = load(&file)?;
            let n = f.len();
            let mut failures = Vec::new();
            for t in 0..trials as u64 {
                // Two marks per trial, densities 1/2; the subsets are read off them.
                let names = [("A".to_string(), rational::ratio(1, 2)), ("B".to_string(), rational::ratio(1, 2))];
                let sets = random_mapping(n, seed.wrapping_add(t), &names)?;
                let (a, b) = (sets.marked(0), sets.marked(1));
                let sides = check_fmtp(&f, &a, &b)?;
                if !sides.holds() {
                    failures.push(json!({"trial": t, "left": q(&sides.left), "right": q(&sides.right)}));
                }
            }
            let ok = failures.is_empty();
            print_json(&json!({"trials": trials, "seed": seed, "failures": failures}));
            return Ok(ok);
        }
        Command::Certificate { file, rank, r } => {
            let mu = session.type_distribution(&load(&file)?, rank)?;
            match restricted_fmtp_certificate(&mu, r, &session)? {
                Certification::Certified(c) => {
                    let entries: Vec<Value> =
                        c.entries.iter().map(|e| json!({"tau": e.tau, "t": e.t, "value": q(&e.value)})).collect();
                    print_json(&json!({
                        "certified": true,
                        "rank": rank,
                        "r": r,
                        "support": mu.len(),
                        "types": c.types.len(),
                        "entries": entries,
                        "fingerprint": c.fingerprint(),
                    }));
                }
                Certification::Violated(v) => {
                    print_json(&json!({
                        "certified": false,
                        "rank": rank,
                        "r": r,
                        "violation": {"lhs": q(&v.lhs), "rhs": q(&v.rhs), "reason": v.reason, "text": v.to_string()},
                    }));
                    return Ok(false);
                }
            }
        }
        Command::Cut { file, m, type_rank, out } => {
            emit_map(&cycle_cut_product(&load(&file)?, m, type_rank, &session)?, out.as_deref())?;
        }
        Command::Rewire { file, m, clean, out } => {
            emit_map(&rewire(&load(&file)?, m, clean)?, out.as_deref())?;
        }
        Command::Realize { measure, r, multiplier, out } => {
            let text = std::fs::read_to_string(&measure).with_context(|| format!("reading {}", measure.display()))?;
            let mu = MeasureFile::from_json(&text)?.to_measure(&session)?;
            emit_map(&realize(&mu, r, multiplier, &session)?.mapping, out.as_deref())?;
        }
        Command::Compress { file, r, out } => {
            emit_map(&standard_r_approximation(&load(&file)?, r)?, out.as_deref())?;
        }
        Command::Pipeline { file, p, r, eps, faithful, out } => {
            let f = load(&file)?;
            let schedule = if faithful { Schedule::Faithful } else { Schedule::Desk };
            let (g, report) = pipeline(&f, p, r, &eps, &schedule, &session)?;
            if let Some(path) = out {
                emit_map(&g, Some(&path))?;
            }
            print_json(&report_json(&report));
            return Ok(report.within_epsilon);
        }
        Command::Random { n, seed, marks, out } => {
            emit_map(&random_mapping(n, seed, &marks)?, out.as_deref())?;
        }
        Command::Cycles { n, samples, rmax, seed, table } => {
            let rows = cycle_statistics(n, samples, rmax, seed)?;
            if table {
                println!("r\tempirical (approx)\texact (approx)\texact");
                for row in &rows {
                    println!("{}\t{:.6}\t{:.6}\t{}", row.r, to_f64(&row.empirical), to_f64(&row.exact), to_text(&row.exact));
                }
            } else {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|row| json!({"r": row.r, "empirical": q(&row.empirical), "exact": q(&row.exact)}))
                    .collect();
                print_json(&json!({"n": n, "samples": samples, "seed": seed, "rows": rows}));
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
