use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use il_decide::corpus::{self, CorpusConfig};
use il_decide::semantics::MAX_ORACLE_WORLDS;
use il_decide::{
    build_from_sat_trace, certify, decide_sat, oracle_sat, parse, ClosureSets, DecideError,
    DecideOptions, Formula, SatRun, VeltmanModel,
};

/// Unparseable formula or model, bad arguments, unreadable files.
const EXIT_INPUT: u8 = 1;
const EXIT_INTERNAL: u8 = 2;
const EXIT_CERT: u8 = 3;

#[derive(Parser)]
#[command(name = "il", version, about = "Decide formulas of the interpretability logic IL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability in some rooted Veltman model
    Sat(DecideArgs),
    /// Decide validity (unsatisfiability of the negation)
    Valid(DecideArgs),
    /// Dump the closure sets and the recursion depth budget
    Closure(InputArgs),
    /// Search all rooted models up to a size bound
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=MAX_ORACLE_WORLDS as u64))]
        max_worlds: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check that a JSON model is a Veltman model whose root forces a formula
    Certify {
        /// Model in JSON form
        model: PathBuf,
        formula: String,
    },
    /// Cross-check the decider on the built-in and random corpora
    Corpus {
        #[arg(long, default_value_t = 500)]
        random: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=MAX_ORACLE_WORLDS as u64))]
        max_worlds: u64,
        /// Skip the axiom, non-theorem and GL suites
        #[arg(long)]
        no_builtin: bool,
        /// Extra formulas, one per line
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        memoize: bool,
        #[arg(long)]
        json: bool,
    },
    /// Time the decider on random formulas of growing size
    Bench {
        #[arg(long, default_value_t = 16)]
        max_size: usize,
        #[arg(long, default_value_t = 50)]
        per_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        memoize: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Formula to decide
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    formula: Option<String>,
    /// Read formulas from a file, one per line, `#` starts a comment
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct DecideArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the certified model as JSON (countermodel for `valid`)
    #[arg(long)]
    witness: Option<PathBuf>,
    #[arg(long)]
    memoize: bool,
    #[arg(long)]
    json: bool,
}

/// A failure that ends the run with a specific exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Failure {
        Failure::new(EXIT_INTERNAL, format!("internal error: {e}"))
    }
}

fn read_file(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_formulas(input: &InputArgs) -> Result<Vec<Formula>, Failure> {
    if let Some(path) = &input.file {
        let text = read_file(path)?;
        return corpus::parse_formula_file(&text).map_err(|(line, e)| {
            Failure::new(EXIT_INPUT, format!("{}:{line}: {e}", path.display()))
        });
    }
    let text = input.formula.as_deref().unwrap_or_default();
    parse(text)
        .map(|f| vec![f])
        .map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))
}

fn witness_model(run: &SatRun, target: &Formula) -> Result<Option<VeltmanModel>, Failure> {
    let Some(trace) = &run.trace else {
        return Ok(None);
    };
    let build = build_from_sat_trace(trace, &run.closure)
        .map_err(|e| Failure::new(EXIT_CERT, format!("witness construction failed: {e}")))?;
    certify(&build.model, target)
        .map_err(|e| Failure::new(EXIT_CERT, format!("witness failed certification: {e}")))?;
    Ok(Some(build.model))
}

fn decide(args: &DecideArgs, validity: bool) -> Result<(), Failure> {
    let formulas = load_formulas(&args.input)?;
    if args.witness.is_some() && formulas.len() != 1 {
        return Err(Failure::new(EXIT_INPUT, "--witness needs exactly one formula"));
    }
    let options = DecideOptions {
        memoize: args.memoize,
    };
    let mut results = Vec::new();
    for f in &formulas {
        let target = if validity { Formula::not(f.clone()) } else { f.clone() };
        let run = decide_sat(&target, options)?;
        // every positive answer is backed by a certified model
        let model = witness_model(&run, &target)?;
        let answer = match (validity, model.is_some()) {
            (false, true) => "SAT",
            (false, false) => "UNSAT",
            (true, true) => "INVALID",
            (true, false) => "VALID",
        };
        if let (Some(path), Some(m)) = (&args.witness, &model) {
            fs::write(path, m.to_json_pretty() + "\n")
                .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
        }
        results.push((f, answer, run, model));
    }
    if args.json {
        let out: Vec<_> = results
            .iter()
            .map(|(f, answer, run, model)| {
                serde_json::json!({
                    "formula": f.to_string(),
                    "answer": answer,
                    "max_depth": run.stats.max_sat_depth,
                    "depth_budget": run.closure.depth_budget(),
                    "model": model.as_ref().map(|m| m.to_json_value()),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    } else if results.len() == 1 {
        println!("{}", results[0].1);
    } else {
        for (f, answer, _, _) in &results {
            println!("{answer}\t{f}");
        }
    }
    Ok(())
}

fn closure(input: &InputArgs) -> Result<(), Failure> {
    let out: Vec<_> = load_formulas(input)?
        .iter()
        .map(|f| {
            let c = ClosureSets::new(f);
            let mut v = serde_json::to_value(c.dump()).expect("json");
            v["depth_budget"] = c.depth_budget().into();
            v
        })
        .collect();
    let out = if out.len() == 1 {
        out.into_iter().next().unwrap()
    } else {
        serde_json::Value::Array(out)
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn oracle(input: &InputArgs, max_worlds: usize, json: bool) -> Result<(), Failure> {
    for f in load_formulas(input)? {
        let found = oracle_sat(&f, max_worlds)
            .map_err(|e| Failure::new(EXIT_INPUT, format!("oracle: {e}")))?;
        match found {
            Some(m) if json => println!("{}", m.to_json_pretty()),
            Some(m) => println!("{}", m.to_json()),
            None => println!("NOT_FOUND({max_worlds})"),
        }
    }
    Ok(())
}

fn certify_cmd(path: &PathBuf, formula: &str) -> Result<(), Failure> {
    let f = parse(formula).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let model = VeltmanModel::from_json(&read_file(path)?)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    match certify(&model, &f) {
        Ok(()) => {
            println!("OK");
            Ok(())
        }
        Err(report) => Err(Failure::new(EXIT_CERT, format!("FAIL: {report}"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sat(args) => decide(&args, false),
        Command::Valid(args) => decide(&args, true),
        Command::Closure(input) => closure(&input),
        Command::Oracle {
            input,
            max_worlds,
            json,
        } => oracle(&input, max_worlds as usize, json),
        Command::Certify { model, formula } => certify_cmd(&model, &formula),
        Command::Corpus {
            random,
            seed,
            max_worlds,
            no_builtin,
            file,
            memoize,
            json,
        } => {
            let extra = match &file {
                Some(path) => corpus::parse_formula_file(&read_file(path)?).map_err(|(line, e)| {
                    Failure::new(EXIT_INPUT, format!("{}:{line}: {e}", path.display()))
                })?,
                None => Vec::new(),
            };
            let config = CorpusConfig {
                builtin: !no_builtin,
                random,
                seed,
                max_worlds: max_worlds as usize,
                options: DecideOptions { memoize },
                extra,
                ..CorpusConfig::default()
            };
            let report = corpus::run_corpus(&config);
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render());
            }
            match report.exit_code() {
                0 => Ok(()),
                code => Err(Failure::new(code as u8, "corpus check failed")),
            }
        }
        Command::Bench {
            max_size,
            per_size,
            seed,
            memoize,
            json,
        } => {
            let rows = corpus::bench((2..=max_size).step_by(2), per_size, seed, DecideOptions { memoize })?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("json"));
            } else {
                println!("size  n    sat  mean_us    max_us     depth/budget");
                for r in rows {
                    println!(
                        "{:<5} {:<4} {:<4} {:<10.1} {:<10.1} {}/{} (max ratio {:.2})",
                        r.node_budget,
                        r.formulas,
                        r.sat,
                        r.mean_micros,
                        r.max_micros,
                        r.max_depth,
                        r.max_budget,
                        r.max_depth_ratio
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("il: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
