//! `relfree`: command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use relfree::acceptance;
use relfree::free_zero::{tables, verify_tables, VerifyConfig};
use relfree::model::{find_model, random_model, validate_model, EnumConfig, ModelError, ModelFile};
use relfree::normal_form::{check_partition, FormError, DEFAULT_FORM_BUDGET};
use relfree::witness::{certify, to_dot, witness_nonatomicity, Certificate, GraphBudget, WitnessError, WitnessOptions};
use relfree::{dnf, eval, HSet, Model, PointedModel, Signature, Term};

#[derive(Parser, Debug)]
#[command(name = "relfree", version, about = "Free relativized relation algebras: terms, models, normal forms and witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(clap::Args, Debug, Clone)]
struct SigArgs {
    /// Number of generators.
    #[arg(long, default_value_t = 0)]
    m: usize,
    /// Unit properties: "", R, S or RS.
    #[arg(long = "H", default_value = "RS")]
    h: String,
}

impl SigArgs {
    fn signature(&self) -> Result<Signature, Failure> {
        let h: HSet = self.h.parse().map_err(|e| Failure::input(format!("{e}")))?;
        Ok(Signature::new(self.m, h))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a term on a model file and list the edges of its value.
    Eval {
        #[arg(long)]
        term: String,
        #[arg(long = "seed-model", alias = "model")]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Disjunctive normal form of a term.
    Dnf {
        #[arg(long)]
        term: String,
        #[command(flatten)]
        sig: SigArgs,
        /// Largest form universe that may be listed.
        #[arg(long, default_value_t = DEFAULT_FORM_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The tables of the 0-generated free algebra, optionally checked on models.
    Free0 {
        #[arg(long)]
        verify: bool,
        #[arg(long = "max-base", default_value_t = 4)]
        max_base: usize,
        #[arg(long = "random-units", default_value_t = 1000)]
        random_units: usize,
        #[arg(long = "rng-seed", default_value_t = 0x5eed)]
        rng_seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a non-atomicity certificate.
    Witness {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Truncation round; defaults to q + 3.
        #[arg(long)]
        rounds: Option<usize>,
        /// Pointed seed model; defaults to the full 3-point model at (0,1).
        #[arg(long = "seed-model")]
        seed_model: Option<PathBuf>,
        /// Node budget for the labeled graph.
        #[arg(long, default_value_t = GraphBudget::default().max_nodes)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Where to write the certificate (or DOT graph).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate file.
    Verify {
        certificate: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Find the first pointed model satisfying a term.
    Search {
        #[arg(long)]
        term: String,
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long = "max-base", default_value_t = 3)]
        max_base: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check that normal forms partition the unit on random models.
    Partition {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long = "max-base", default_value_t = 5)]
        max_base: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 50)]
        models: usize,
        /// Also render the whole universe as terms (needs it within budget).
        #[arg(long)]
        extensional: bool,
        #[arg(long, default_value_t = DEFAULT_FORM_BUDGET)]
        budget: u64,
        #[arg(long = "rng-seed", default_value_t = 0x5eed)]
        rng_seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// A failed command together with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const INPUT: u8 = 1;
    const BUDGET: u8 = 2;
    const PROPERTY: u8 = 3;

    fn input(message: impl Into<String>) -> Failure {
        Failure { code: Self::INPUT, message: message.into() }
    }

    fn property(message: impl Into<String>) -> Failure {
        Failure { code: Self::PROPERTY, message: message.into() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = if matches!(e, ModelError::BudgetExceeded { .. }) { Failure::BUDGET } else { Failure::INPUT };
        Failure { code, message: e.to_string() }
    }
}

impl From<FormError> for Failure {
    fn from(e: FormError) -> Self {
        let code = if matches!(e, FormError::BudgetExceeded { .. }) { Failure::BUDGET } else { Failure::INPUT };
        Failure { code, message: e.to_string() }
    }
}

impl From<WitnessError> for Failure {
    fn from(e: WitnessError) -> Self {
        let code = match e.root() {
            WitnessError::GraphBudget { .. } => Failure::BUDGET,
            WitnessError::NoDescent { .. }
            | WitnessError::Unstable { .. }
            | WitnessError::Inconsistent(_)
            | WitnessError::Property(_)
            | WitnessError::Internal(_) => Failure::PROPERTY,
            _ => Failure::INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn parse_term(text: &str) -> Result<Term, Failure> {
    Term::parse(text).map_err(|e| Failure::input(format!("cannot parse term: {e}")))
}

fn emit(format: Format, value: &Value, text: impl FnOnce() -> String, out: Option<&Path>) -> Outcome {
    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(value).expect("json values serialize") + "\n",
        Format::Text | Format::Dot => text(),
    };
    match out {
        Some(path) => {
            write(path, &rendered)?;
            println!("{}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn pairs_text(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(r, s)| format!("({r},{s})\n")).collect()
}

fn cmd_eval(term: &str, model: &Path, format: Format) -> Outcome {
    let t = parse_term(term)?;
    let model = Model::from_json_str(&read(model)?)?;
    let value = eval(&t, &model)?;
    let pairs = value.pairs();
    let report = json!({ "config": { "term": t.render(), "base": model.base() }, "edges": pairs });
    emit(format, &report, || pairs_text(&pairs), None)
}

fn cmd_dnf(term: &str, sig: &SigArgs, budget: u64, format: Format, out: Option<&Path>) -> Outcome {
    let signature = sig.signature()?;
    let t = parse_term(term)?;
    let d = dnf(&t, &signature)?;
    let mut body = d.to_json(budget)?;
    body["config"] = json!({ "term": t.render(), "signature": signature, "budget": budget });
    let text = || {
        let forms = body["forms"].as_array().map(Vec::len).unwrap_or(0);
        format!("degree {}\ncount {forms}\n", d.degree)
    };
    emit(format, &body, text, out)
}

fn cmd_free0(verify: bool, cfg: VerifyConfig, format: Format, out: Option<&Path>) -> Outcome {
    let fz = tables();
    if !verify {
        let value = json!({ "tables": fz });
        return emit(format, &value, || fz.render_text(), out);
    }
    let report = verify_tables(&fz, &cfg)?;
    let value = json!({ "config": cfg, "tables": fz, "report": report });
    emit(format, &value, || fz.render_text() + "\n" + &report.render_text(), out)?;
    if report.all_ok() {
        Ok(())
    } else {
        Err(Failure::property(format!("{} of {} table equations refuted", report.entries.len() - report.ok_count(), report.entries.len())))
    }
}

fn default_certificate_path(sig: &Signature, q: usize, format: Format) -> PathBuf {
    let ext = if format == Format::Dot { "dot" } else { "json" };
    PathBuf::from(format!("witness-m{}-H{}-q{q}.{ext}", sig.m, if sig.h == HSet::EMPTY { "0".to_string() } else { sig.h.to_string() }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_witness(
    sig: &SigArgs,
    q: usize,
    rounds: Option<usize>,
    seed_model: Option<&Path>,
    budget: usize,
    format: Format,
    out: Option<&Path>,
) -> Outcome {
    let signature = sig.signature()?;
    let pm = match seed_model {
        Some(path) => PointedModel::from_json_str(&read(path)?)?,
        None => acceptance::witness_seed(signature.m),
    };
    let opts = WitnessOptions { rounds, budget: GraphBudget { max_nodes: budget, ..GraphBudget::default() } };
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| default_certificate_path(&signature, q, format));
    match format {
        Format::Dot => {
            let w = witness_nonatomicity(&pm, q, &signature, &opts)?;
            let g = w.graph.truncate(w.rounds);
            write(&path, &to_dot(&g, Some(&w.zigzag), Some(&w.extension)))?;
        }
        Format::Json | Format::Text => {
            let cert = certify(&pm, q, &signature, &opts)?;
            write(&path, &cert.to_canonical_json())?;
            if format == Format::Text {
                println!(
                    "{signature} q={q}: {} nodes, {} edges, extension {:?}, stable from round {} of {}",
                    cert.stats.nodes, cert.stats.edges, cert.extension.kind, cert.stability_round, cert.rounds
                );
            }
        }
    }
    println!("{}", path.display());
    Ok(())
}

fn cmd_verify(path: &Path, format: Format) -> Outcome {
    let cert = Certificate::from_json_str(&read(path)?).map_err(|e| Failure::input(format!("malformed certificate: {e}")))?;
    let check = cert.verify();
    emit(format, &json!(check), || check.render_text(), None)?;
    if check.ok() {
        Ok(())
    } else {
        Err(Failure::property(format!("{} checks failed", check.failures().len())))
    }
}

fn cmd_search(term: &str, sig: &SigArgs, max_base: usize, out: Option<&Path>, format: Format) -> Outcome {
    let signature = sig.signature()?;
    let t = parse_term(term)?;
    let cfg = EnumConfig { base_cap: EnumConfig::default().base_cap.max(max_base), ..EnumConfig::default() };
    let found = find_model(&t, &signature, max_base, &cfg)?;
    let config = json!({ "term": t.render(), "signature": signature, "max_base": max_base });
    let Some(pm) = found else {
        let value = json!({ "config": config, "found": false });
        return emit(format, &value, || format!("no model up to base {max_base}\n"), None);
    };
    if let Some(path) = out {
        write(path, &(serde_json::to_string_pretty(&ModelFile::from_model(&pm.model, Some(pm.edge))).expect("model serializes") + "\n"))?;
    }
    let value = json!({ "config": config, "found": true, "model": pm.to_json() });
    let text = || match out {
        Some(path) => format!("base {} edge {:?}\n{}\n", pm.model.base(), pm.edge, path.display()),
        None => format!("base {} edge {:?}\n{}\n", pm.model.base(), pm.edge, pm.to_json()),
    };
    emit(format, &value, text, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_partition(
    sig: &SigArgs,
    max_base: usize,
    degree: usize,
    models: usize,
    extensional: bool,
    budget: u64,
    rng_seed: u64,
    format: Format,
) -> Outcome {
    let signature = sig.signature()?;
    if max_base == 0 {
        return Err(Failure::input("--max-base must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..models {
        let base = rng.gen_range(1..=max_base);
        let model = random_model(&mut rng, base, &signature);
        debug_assert!(validate_model(&model, &signature).is_empty());
        for n in 0..=degree {
            let report = check_partition(&model, n, extensional.then_some(budget))?;
            checked += 1;
            if !report.ok() {
                failures.push(json!({ "model": i, "degree": n, "violations": report.violations }));
            }
        }
    }
    let config = json!({
        "signature": signature, "max_base": max_base, "degree": degree, "models": models,
        "extensional": extensional, "budget": budget, "rng_seed": rng_seed,
    });
    let value = json!({ "config": config, "checks": checked, "failures": failures });
    emit(format, &value, || format!("{checked} checks on {models} models, {} failures\n", failures.len()), None)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::property(format!("{} partition checks failed", failures.len())))
    }
}

fn cmd_selftest(format: Format) -> Outcome {
    let results = acceptance::run_all();
    let failed = results.iter().filter(|r| !r.passed).count();
    let text = || results.iter().map(|r| r.line() + "\n").collect::<String>();
    emit(format, &json!(results), text, None)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::property(format!("{failed} of {} criteria failed", results.len())))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Eval { term, model, format } => cmd_eval(&term, &model, format),
        Command::Dnf { term, sig, budget, format, out } => cmd_dnf(&term, &sig, budget, format, out.as_deref()),
        Command::Free0 { verify, max_base, random_units, rng_seed, format, out } => {
            let cfg = VerifyConfig { max_base, random_units, rng_seed, ..VerifyConfig::default() };
            cmd_free0(verify, cfg, format, out.as_deref())
        }
        Command::Witness { sig, q, rounds, seed_model, budget, format, out } => {
            cmd_witness(&sig, q, rounds, seed_model.as_deref(), budget, format, out.as_deref())
        }
        Command::Verify { certificate, format } => cmd_verify(&certificate, format),
        Command::Search { term, sig, max_base, out, format } => cmd_search(&term, &sig, max_base, out.as_deref(), format),
        Command::Partition { sig, max_base, degree, models, extensional, budget, rng_seed, format } => {
            cmd_partition(&sig, max_base, degree, models, extensional, budget, rng_seed, format)
        }
        Command::Selftest { format } => cmd_selftest(format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(Failure::INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
