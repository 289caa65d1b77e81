use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use unialg::baker::{baker_instance, Signature};
use unialg::lattice::named_generators;
use unialg::relation::{check_inclusion, eval_expr, parse_expr, Env};
use unialg::replicate::{self, Params, RunOptions, ScenarioReport, Status};
use unialg::variety::{find_term, spectrum, variety_congruence_check, variety_relation_check, TermSearchKind};
use unialg::{Algebra, BinRel, Error, IdentityStatement, Role};

/// Writes a line to standard output, ignoring a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "unialg", version, about = "Relation identities, free algebras and term searches over finite algebras")]
struct Cli {
    /// Print machine-readable JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Baker instance as an algebra file plus companion and relation files.
    MakeBaker {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_sig)]
        sig: Signature,
        /// Build the reduced instance without the two lower corners.
        #[arg(long)]
        minus: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a relation expression.
    Eval {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        rels: PathBuf,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an inclusion or equality on concrete relations.
    Check {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        rels: PathBuf,
        #[arg(long)]
        stmt: String,
        #[arg(long)]
        roles: String,
        /// Also report the sizes of both sides.
        #[arg(long)]
        witness: bool,
    },
    /// Decide an inclusion for every algebra in the generated variety.
    VarietyCheck {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        stmt: String,
        #[arg(long)]
        roles: String,
        /// Length of the main chain on the left side.
        #[arg(long)]
        n: usize,
    },
    /// Least k with alpha(beta o_n gamma) within alpha-beta o_k alpha-gamma.
    Spectrum {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        max_k: usize,
    },
    /// Search the clone for a term of the given kind.
    FindTerm {
        #[arg(long)]
        algebra: String,
        /// majority, maltsev, baker, nu, edge or absorption.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        arity: Option<usize>,
    },
    /// Run reproduction scenarios.
    Replicate {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_sig)]
        sig: Option<Signature>,
        /// Largest n when no --n is given.
        #[arg(long, default_value_t = replicate::DEFAULT_MAX_N)]
        max_n: usize,
        /// Largest n for identity checks on free algebras.
        #[arg(long, default_value_t = replicate::DEFAULT_VARIETY_MAX_N)]
        variety_max_n: usize,
        /// Seed for sampled scenarios.
        #[arg(long, default_value_t = replicate::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = replicate::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// List the registered scenarios.
    ListScenarios,
}

fn parse_sig(s: &str) -> Result<Signature, String> {
    match s {
        "b" => Ok(Signature::B),
        "u" => Ok(Signature::U),
        _ => Err(format!("expected `b` or `u`, got `{s}`")),
    }
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

type Outcome = Result<bool, Failure>;

fn load_algebra(spec: &str) -> Result<Algebra, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        return Algebra::from_json(&text).map_err(|e| Failure::Usage(format!("{spec}: {e}")));
    }
    named_generators()
        .into_iter()
        .find(|(name, _)| *name == spec)
        .map(|(_, a)| a)
        .ok_or_else(|| Failure::Usage(format!("{spec}: no such file or built-in algebra")))
}

/// Reads `{"name": relation, ..}` where each relation is either a relation
/// file object or a bare list of pairs.
fn load_rels(path: &Path, size: usize) -> Result<Env, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let bad = |msg: String| Failure::Usage(format!("{}: {msg}", path.display()));
    let map: BTreeMap<String, Value> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let mut env = Env::new();
    for (name, v) in map {
        let rel = if v.is_array() {
            let pairs: Vec<[usize; 2]> = serde_json::from_value(v).map_err(|e| bad(format!("`{name}`: {e}")))?;
            BinRel::from_pairs(size, pairs.into_iter().map(|[a, b]| (a, b)))
        } else {
            BinRel::from_json(&v.to_string())
        }
        .map_err(|e| bad(format!("`{name}`: {e}")))?;
        if rel.size() != size {
            return Err(bad(format!("`{name}` has size {}, the algebra has {size}", rel.size())));
        }
        env.insert(name, rel);
    }
    Ok(env)
}

fn emit(json_mode: bool, value: Value, text: impl FnOnce() -> String) {
    if json_mode {
        out!("{value}");
    } else {
        out!("{}", text());
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.json"))
}

fn make_baker(json_mode: bool, n: usize, sig: Signature, minus: bool, out: &Path) -> Outcome {
    let inst = baker_instance(n, sig, minus)?;
    let companion = sibling(out, "companion");
    let rels = sibling(out, "rels");
    write_file(out, &inst.algebra.to_json())?;
    let comp = serde_json::to_string(&inst.companion()).map_err(|e| Failure::Usage(e.to_string()))?;
    write_file(&companion, &comp)?;
    let mut named = BTreeMap::new();
    named.insert("al", inst.alpha.pair_list());
    named.insert("be", inst.beta.pair_list());
    named.insert("ga", inst.gamma.pair_list());
    named.insert("ps", inst.psi_tolerance().pair_list());
    if sig == Signature::B {
        if let Ok(lambda) = inst.lambda_tolerance() {
            named.insert("la", lambda.pair_list());
        }
    }
    write_file(&rels, &serde_json::to_string(&named).expect("pairs serialize"))?;
    let v = json!({
        "algebra": out, "companion": companion, "rels": rels,
        "size": inst.size(), "c": inst.c,
    });
    emit(json_mode, v, || {
        format!(
            "{} elements\n{}\n{}\n{}",
            inst.size(),
            out.display(),
            companion.display(),
            rels.display()
        )
    });
    Ok(true)
}

fn eval(json_mode: bool, algebra: &str, rels: &Path, expr: &str, out: Option<&Path>) -> Outcome {
    let a = load_algebra(algebra)?;
    let env = load_rels(rels, a.size)?;
    let rel = eval_expr(&a, &env, &parse_expr(expr)?)?;
    if let Some(path) = out {
        write_file(path, &rel.to_json())?;
    }
    emit(json_mode, json!({ "size": rel.size(), "pairs": rel.pair_list() }), || {
        let pairs: Vec<String> = rel.pairs().map(|(x, y)| format!("({x}, {y})")).collect();
        format!("{} pairs\n{}", rel.len(), pairs.join(" "))
    });
    Ok(true)
}

/// Element labels from a companion file next to the algebra file, if any.
fn companion_labels(algebra: &str) -> Option<Vec<[u32; 3]>> {
    let text = std::fs::read_to_string(sibling(Path::new(algebra), "companion")).ok()?;
    let v: Value = serde_json::from_str(&text).ok()?;
    serde_json::from_value(v.get("index_map")?.clone()).ok()
}

fn check(json_mode: bool, algebra: &str, rels: &Path, stmt: &str, roles: &str, sizes: bool) -> Outcome {
    let a = load_algebra(algebra)?;
    let labels = companion_labels(algebra);
    let env = load_rels(rels, a.size)?;
    let stmt = IdentityStatement::parse(stmt, roles)?;
    let v = check_inclusion(&a, &env, &stmt)?;
    let value = json!({
        "holds": v.holds,
        "witness": v.witness.map(|(x, y)| [x, y]),
        "reversed": v.reversed,
        "lhs_size": v.lhs_size,
        "rhs_size": v.rhs_size,
    });
    emit(json_mode, value, || {
        let mut s = if v.holds { "holds".to_string() } else { "fails".to_string() };
        if let Some((x, y)) = v.witness {
            let side = if v.reversed { "right side but not the left" } else { "left side but not the right" };
            s.push_str(&format!("\nwitness ({x}, {y}) is in the {side}"));
            if let Some(l) = labels.as_ref().filter(|l| l.len() == a.size) {
                s.push_str(&format!("\nas triples: ({:?}, {:?})", l[x], l[y]));
            }
        }
        if sizes {
            s.push_str(&format!("\nleft side {} pairs, right side {} pairs", v.lhs_size, v.rhs_size));
        }
        s
    });
    Ok(v.holds)
}

fn variety_check(json_mode: bool, algebra: &str, stmt: &str, roles: &str, n: usize) -> Outcome {
    let a = load_algebra(algebra)?;
    let stmt = IdentityStatement::parse(stmt, roles)?;
    let v = if stmt.roles.values().all(|&r| r == Role::Congruence) {
        variety_congruence_check(&a, &stmt, n)?
    } else {
        variety_relation_check(&a, &stmt, n)?
    };
    emit(json_mode, serde_json::to_value(&v).expect("verdict serializes"), || {
        let mut s = format!(
            "{}\nfree algebra on {} generators has {} elements",
            if v.holds { "holds" } else { "fails" },
            v.generators,
            v.free_size
        );
        if let Some((x, y)) = &v.witness {
            s.push_str(&format!("\nwitness ({x}, {y})"));
        }
        s
    });
    Ok(v.holds)
}

fn spectrum_cmd(json_mode: bool, algebra: &str, n: usize, max_k: usize) -> Outcome {
    let a = load_algebra(algebra)?;
    let r = spectrum(&a, n, max_k)?;
    emit(json_mode, serde_json::to_value(&r).expect("report serializes"), || match r.level {
        Some(k) => k.to_string(),
        None => format!("none up to {max_k}"),
    });
    Ok(r.level.is_some())
}

fn find_term_cmd(json_mode: bool, algebra: &str, kind: &str, arity: Option<usize>) -> Outcome {
    let a = load_algebra(algebra)?;
    let kind = TermSearchKind::parse(kind, arity)?;
    let found = find_term(&a, kind)?;
    let value = json!({
        "found": found.is_some(),
        "term": found.as_ref().map(|t| t.term.to_string()),
        "arity": found.as_ref().map(|t| t.arity),
        "values": found.as_ref().map(|t| &t.values),
    });
    emit(json_mode, value, || match &found {
        Some(t) => t.term.to_string(),
        None => "none".to_string(),
    });
    Ok(found.is_some())
}

fn list_scenarios(json_mode: bool) -> Outcome {
    let all = replicate::scenarios();
    if json_mode {
        out!("{}", serde_json::to_string(all).expect("registry serializes"));
    } else {
        for s in all {
            let shape = serde_json::to_value(s.shape).expect("shape serializes");
            out!("{:<18} {:<12} {}", s.id, shape.as_str().unwrap_or(""), s.description);
        }
    }
    Ok(true)
}

fn print_table(reports: &[ScenarioReport]) {
    for r in reports {
        let params = serde_json::to_string(&r.params).expect("params serialize");
        out!("{:<18} {:<26} {:<8} {:>8} ms", r.id, params, r.status.to_string(), r.elapsed_ms);
        for row in &r.details.table {
            if row.status != Status::Pass {
                out!("    [{}] {}: expected {}, computed {}", row.status, row.name, row.expected, row.computed);
            }
        }
    }
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    out!(
        "{} pass, {} fail, {} skipped",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Skipped)
    );
}

#[allow(clippy::too_many_arguments)]
fn replicate_cmd(
    json_mode: bool,
    id: Option<&str>,
    n: Option<usize>,
    sig: Option<Signature>,
    max_n: usize,
    variety_max_n: usize,
    seed: u64,
    samples: usize,
) -> Outcome {
    if !(2..=replicate::MAX_SCENARIO_N).contains(&max_n) {
        return Err(Failure::Usage(format!("--max-n must be between 2 and {}", replicate::MAX_SCENARIO_N)));
    }
    let opts = RunOptions { seed, samples, variety_max_n, mutation: None };
    let ns = match n {
        Some(n) => n..=n,
        None => 2..=max_n,
    };
    let chosen: Vec<&replicate::Scenario> = match id {
        Some(id) => vec![replicate::scenario(id)?],
        None => replicate::scenarios().iter().collect(),
    };
    let mut jobs: Vec<(&'static str, Params)> = Vec::new();
    for s in chosen {
        for p in replicate::expand(s, ns.clone()) {
            if sig.is_some() && p.signature.is_some() && p.signature != sig {
                continue;
            }
            jobs.push((s.id, p));
        }
    }
    if jobs.is_empty() {
        return Err(Failure::Usage("no scenario matches the given parameters".into()));
    }
    let reports = replicate::run_jobs(&jobs, &opts)?;
    if json_mode {
        out!("{}", serde_json::to_string(&reports).expect("reports serialize"));
    } else {
        print_table(&reports);
    }
    let skipped = reports.iter().filter(|r| r.status == Status::Skipped).count();
    if skipped > 0 {
        eprintln!("{skipped} report(s) contain skipped rows");
    }
    Ok(reports.iter().all(|r| r.status != Status::Fail))
}

fn run(cli: Cli) -> Outcome {
    let j = cli.json;
    match cli.command {
        Command::MakeBaker { n, sig, minus, out } => make_baker(j, n, sig, minus, &out),
        Command::Eval { algebra, rels, expr, out } => eval(j, &algebra, &rels, &expr, out.as_deref()),
        Command::Check { algebra, rels, stmt, roles, witness } => check(j, &algebra, &rels, &stmt, &roles, witness),
        Command::VarietyCheck { algebra, stmt, roles, n } => variety_check(j, &algebra, &stmt, &roles, n),
        Command::Spectrum { algebra, n, max_k } => spectrum_cmd(j, &algebra, n, max_k),
        Command::FindTerm { algebra, kind, arity } => find_term_cmd(j, &algebra, &kind, arity),
        Command::Replicate { scenario, n, sig, max_n, variety_max_n, seed, samples } => {
            replicate_cmd(j, scenario.as_deref(), n, sig, max_n, variety_max_n, seed, samples)
        }
        Command::ListScenarios => list_scenarios(j),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
