//! Command-line front end for the modelglass workbench.
//!
//! Exit codes: 0 on success, 1 on domain errors (bad model data, caps,
//! unstable inputs), 2 on usage errors (bad flags, malformed formulas or
//! signatures). JSON output is versioned and byte-identical for identical
//! arguments, input files, and seed.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::{json, Value};

use modelglass::filters::{
    enumerate_ultrafilters, generated_filter, is_filter, is_ultrafilter, limit_points,
    parse_family, Filter, Ultrafilter,
};
use modelglass::graphs::{
    edge_density, find_half_graph, max_homogeneous_with, regular_pair_exact,
    regular_pair_sampled, stable_ramsey_report, stable_regularity, Density, ExactVerdict, Graph,
    HomogeneousConfig, PairVerdict, RamseyFamily, RegularityConfig, SampledVerdict,
};
use modelglass::logic::{
    build_ax_sentence, parse_formula_verbose, parse_signature, print_formula, Formula, Signature,
};
use modelglass::model::{
    definable_algebra_with, is_boolean_algebra, load_model, solution_set, AlgebraConfig, Model,
};
use modelglass::types::{check_partial_type, complete_types, count_dlo_types};
use modelglass::ultraproduct::{iso_check, los_check, ultraproduct, IndexedFamily, IsoConfig, IsoResult};

#[derive(Parser)]
#[command(
    name = "modelglass",
    version,
    about = "Finite-model-theory workbench: first-order evaluation over finite structures, \
             filters and ultraproducts, stable-graph combinatorics"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    format: String,

    /// Seed for all randomized behavior.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SigArgs {
    /// Path to a signature file (`rel NAME /ARITY [infix]; fun ...; const ...`).
    #[arg(long)]
    sig: Option<PathBuf>,

    /// Inline signature text, same grammar as the file.
    #[arg(long, conflicts_with = "sig")]
    sig_text: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form (terms, formulas, and
    /// sentences of first-order logic).
    Parse {
        #[command(flatten)]
        sig: SigArgs,
        /// Formula text.
        #[arg(long)]
        formula: String,
    },
    /// Evaluate a sentence in a finite model (Tarskian satisfaction).
    Eval {
        #[command(flatten)]
        sig: SigArgs,
        /// Model file.
        #[arg(long)]
        model: PathBuf,
        /// Sentence text.
        #[arg(long)]
        sentence: String,
    },
    /// Materialize the solution set of a formula: the definable set it cuts
    /// out of the model.
    Solutions {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
        /// Comma-separated free-variable order, e.g. `x,y`.
        #[arg(long)]
        vars: String,
    },
    /// Enumerate the boolean algebra of definable sets with parameters,
    /// deduplicated by extension.
    Definable {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        model: PathBuf,
        /// Parameters (elements), comma-separated.
        #[arg(long, default_value = "")]
        params: String,
        /// Quantifier rank bound.
        #[arg(long, default_value_t = 0)]
        rank: usize,
        /// Number of free variables of the definable sets.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Cap on formulas considered.
        #[arg(long, default_value_t = 100_000)]
        max_formulas: usize,
    },
    /// Complete rank-bounded types over a parameter set (the finite rendering
    /// of the Stone space), or the symbolic type space of a dense linear
    /// order with `--dlo`.
    Types {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long, required_unless_present = "dlo")]
        model: Option<PathBuf>,
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long, default_value_t = 0)]
        rank: usize,
        /// Count the 2n+1 types of a dense linear order over n parameters.
        #[arg(long, conflicts_with_all = ["model", "params", "rank"])]
        dlo: Option<usize>,
    },
    /// Check a partial type: formulas in one free variable whose solution
    /// sets must have the finite intersection property.
    TypeCheck {
        #[command(flatten)]
        sig: SigArgs,
        #[arg(long)]
        model: PathBuf,
        /// Parameters (elements), comma-separated.
        #[arg(long, default_value = "")]
        params: String,
        /// Formulas, each with the same single free variable.
        #[arg(long, num_args = 1..)]
        formulas: Vec<String>,
    },
    /// Filters and ultrafilters on finite base sets.
    Filter {
        #[command(subcommand)]
        command: FilterCommand,
    },
    /// Build the ultraproduct of a family of models by a principal
    /// ultrafilter, verify the collapse onto the chosen factor, and
    /// optionally check Łoś transfer for a sentence.
    Ultraproduct {
        #[command(flatten)]
        sig: SigArgs,
        /// Model files, one per index.
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        /// Index the principal ultrafilter concentrates on.
        #[arg(long)]
        principal_at: usize,
        /// Sentence for the transfer check.
        #[arg(long)]
        sentence: Option<String>,
    },
    /// Build the injective-implies-surjective polynomial-map sentence for
    /// (n, k) and evaluate it in the prime field F_p.
    AxCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
    },
    /// Stability combinatorics on graphs.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
}

#[derive(Subcommand)]
enum FilterCommand {
    /// Check the filter conditions on a family given in brace notation,
    /// e.g. `{{2,3},{3,4}} over 5`.
    Check { family: String },
    /// Close a generating family into the smallest filter containing it.
    Generate { family: String },
    /// Enumerate all ultrafilters on a base (the principal ones).
    Ultrafilters {
        #[arg(long)]
        base: usize,
    },
    /// Limit points of a filter: the intersection of its members.
    LimitPoints { family: String },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Search for a half-graph of the given height: vertices a1..ak, b1..bk
    /// with an edge a_i b_j exactly when i < j.
    HalfGraph {
        #[arg(long)]
        k: usize,
        /// Edge-list file (one `u v` per line) or a model file over `rel E /2`.
        file: PathBuf,
    },
    /// Partition a half-graph-free graph and certify epsilon-regularity of
    /// every pair of pieces.
    Regularity {
        #[arg(long)]
        eps: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 12)]
        exact_cap: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long)]
        max_pieces: Option<usize>,
        file: PathBuf,
    },
    /// Exact epsilon-regularity check of one pair of vertex sets.
    RegularPair {
        #[arg(long)]
        eps: String,
        /// Comma-separated vertex sets.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 12)]
        exact_cap: usize,
        /// Use seeded sampling with this many trials instead of the
        /// exhaustive check.
        #[arg(long)]
        sample: Option<usize>,
        file: PathBuf,
    },
    /// Edge density between two vertex sets, as an exact rational.
    Density {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        file: PathBuf,
    },
    /// Maximum clique, maximum independent set, and hom(G).
    Hom {
        #[arg(long, default_value_t = 64)]
        exact_cap: usize,
        file: PathBuf,
    },
    /// Homogeneous-set growth across a family, with per-instance stability
    /// certification (the stable Ramsey phenomenon).
    Ramsey {
        #[arg(long)]
        family: String,
        /// Comma-separated instance sizes.
        #[arg(long)]
        sizes: String,
        #[arg(long)]
        k: usize,
    },
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn usage(e: impl Display) -> CliError {
        CliError::Usage(e.to_string())
    }
    fn domain(e: impl Display) -> CliError {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(String, Value), CliError>;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MODELGLASS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let json = cli.format == "json";
    let seed = cli.seed;
    let command_name = command_name(&cli.command);
    match run(cli) {
        Ok((text, value)) => {
            if json {
                let envelope = json!({
                    "schema_version": 1,
                    "tool": { "name": "modelglass", "version": env!("CARGO_PKG_VERSION") },
                    "command": command_name,
                    "seed": seed,
                    "result": value,
                });
                println!("{}", serde_json::to_string_pretty(&envelope).unwrap());
            } else {
                println!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Parse { .. } => "parse",
        Command::Eval { .. } => "eval",
        Command::Solutions { .. } => "solutions",
        Command::Definable { .. } => "definable",
        Command::Types { .. } => "types",
        Command::TypeCheck { .. } => "type-check",
        Command::Filter { .. } => "filter",
        Command::Ultraproduct { .. } => "ultraproduct",
        Command::AxCheck { .. } => "ax-check",
        Command::Graph { .. } => "graph",
    }
}

fn run(cli: Cli) -> CliResult {
    let seed = cli.seed;
    match cli.command {
        Command::Parse { sig, formula } => cmd_parse(&sig, &formula),
        Command::Eval {
            sig,
            model,
            sentence,
        } => cmd_eval(&sig, &model, &sentence),
        Command::Solutions {
            sig,
            model,
            formula,
            vars,
        } => cmd_solutions(&sig, &model, &formula, &vars),
        Command::Definable {
            sig,
            model,
            params,
            rank,
            k,
            max_formulas,
        } => cmd_definable(&sig, &model, &params, rank, k, max_formulas),
        Command::Types {
            sig,
            model,
            params,
            rank,
            dlo,
        } => cmd_types(&sig, model.as_deref(), &params, rank, dlo),
        Command::TypeCheck {
            sig,
            model,
            params,
            formulas,
        } => cmd_type_check(&sig, &model, &params, &formulas),
        Command::Filter { command } => cmd_filter(command),
        Command::Ultraproduct {
            sig,
            models,
            principal_at,
            sentence,
        } => cmd_ultraproduct(&sig, &models, principal_at, sentence.as_deref()),
        Command::AxCheck { n, k, p } => cmd_ax_check(n, k, p),
        Command::Graph { command } => cmd_graph(command, seed),
    }
}

// ---------------------------------------------------------------------------
// Input helpers.

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::domain(format!("cannot read {}: {e}", path.display())))
}

fn load_sig(args: &SigArgs) -> Result<Signature, CliError> {
    let text = match (&args.sig, &args.sig_text) {
        (Some(path), None) => read_file(path)?,
        (None, Some(text)) => text.clone(),
        (None, None) => String::new(),
        _ => unreachable!("clap conflicts_with"),
    };
    parse_signature(&text).map_err(CliError::usage)
}

fn load_model_file(path: &std::path::Path, sig: &Signature) -> Result<Model, CliError> {
    load_model(&read_file(path)?, sig).map_err(CliError::domain)
}

fn parse_formula_arg(text: &str, sig: &Signature) -> Result<(Formula, Vec<String>), CliError> {
    let (f, warnings) = parse_formula_verbose(text, sig).map_err(CliError::usage)?;
    Ok((f, warnings.iter().map(|w| w.to_string()).collect()))
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Usage(format!("`{s}` is not a number")))
        })
        .collect()
}

fn parse_eps(text: &str) -> Result<Density, CliError> {
    let bad = || CliError::Usage(format!("`{text}` is not a rational like 1/4"));
    let eps = if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        Ratio::new(p, q)
    } else {
        Ratio::from_integer(text.trim().parse().map_err(|_| bad())?)
    };
    Ok(eps)
}

/// Edge-list files load directly; files starting with the `model` keyword
/// load through the model format with the graph signature.
fn load_graph(path: &std::path::Path) -> Result<Graph, CliError> {
    let text = read_file(path)?;
    let first_word = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| l.split_whitespace().next())
        .unwrap_or("");
    if first_word == "model" {
        let m = load_model(&text, &Signature::graph()).map_err(CliError::domain)?;
        Graph::from_model(&m).map_err(CliError::domain)
    } else {
        Graph::from_edge_list(&text).map_err(CliError::domain)
    }
}

fn ratio_value(r: Density) -> Value {
    json!({ "num": *r.numer(), "den": *r.denom() })
}

fn ratio_text(r: Density) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

// ---------------------------------------------------------------------------
// Commands.

fn cmd_parse(sig_args: &SigArgs, formula: &str) -> CliResult {
    let sig = load_sig(sig_args)?;
    let (f, warnings) = parse_formula_arg(formula, &sig)?;
    let canonical = print_formula(&f, &sig);
    let reparsed = modelglass::logic::parse_formula(&canonical, &sig).map_err(CliError::usage)?;
    let roundtrip_ok = reparsed == f;
    let free: Vec<String> = f.free_variables().into_iter().collect();
    let mut text = format!("canonical: {canonical}\n");
    text += &format!("free variables: {{{}}}\n", free.join(", "));
    text += &format!("quantifier rank: {}\n", f.quantifier_rank());
    for w in &warnings {
        text += &format!("warning: {w}\n");
    }
    text += &format!("round-trip: {}", if roundtrip_ok { "ok" } else { "FAILED" });
    let value = json!({
        "canonical": canonical,
        "free_variables": free,
        "quantifier_rank": f.quantifier_rank(),
        "warnings": warnings,
        "roundtrip_ok": roundtrip_ok,
    });
    Ok((text, value))
}

fn cmd_eval(sig_args: &SigArgs, model: &std::path::Path, sentence: &str) -> CliResult {
    let sig = load_sig(sig_args)?;
    let m = load_model_file(model, &sig)?;
    let (f, warnings) = parse_formula_arg(sentence, &sig)?;
    let holds = m.sat(&f).map_err(CliError::domain)?;
    let mut text = String::new();
    for w in &warnings {
        text += &format!("warning: {w}\n");
    }
    text += if holds { "true" } else { "false" };
    Ok((
        text,
        json!({ "sentence": print_formula(&f, &sig), "holds": holds, "warnings": warnings }),
    ))
}

fn cmd_solutions(
    sig_args: &SigArgs,
    model: &std::path::Path,
    formula: &str,
    vars: &str,
) -> CliResult {
    let sig = load_sig(sig_args)?;
    let m = load_model_file(model, &sig)?;
    let (f, _) = parse_formula_arg(formula, &sig)?;
    let var_names: Vec<String> = vars
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if var_names.is_empty() {
        return Err(CliError::Usage("--vars needs at least one variable".into()));
    }
    let refs: Vec<&str> = var_names.iter().map(String::as_str).collect();
    let set = solution_set(&m, &f, &refs).map_err(CliError::domain)?;
    let tuples: Vec<Vec<usize>> = set.tuples.iter().cloned().collect();
    let mut text = format!(
        "{} tuple(s) over ({})\n",
        tuples.len(),
        set.vars.join(", ")
    );
    for t in &tuples {
        let row: Vec<String> = t.iter().map(usize::to_string).collect();
        text += &format!("({})\n", row.join(", "));
    }
    let value = json!({
        "formula": print_formula(&f, &sig),
        "vars": set.vars,
        "parameters": set.parameters,
        "count": tuples.len(),
        "tuples": tuples,
    });
    Ok((text.trim_end().to_string(), value))
}

fn cmd_definable(
    sig_args: &SigArgs,
    model: &std::path::Path,
    params: &str,
    rank: usize,
    k: usize,
    max_formulas: usize,
) -> CliResult {
    let sig = load_sig(sig_args)?;
    let m = load_model_file(model, &sig)?;
    let params = parse_usize_list(params)?;
    let cfg = AlgebraConfig {
        max_formulas,
        ..AlgebraConfig::default()
    };
    let alg = definable_algebra_with(&m, &params, rank, k, &cfg).map_err(CliError::domain)?;
    let base: BTreeSet<Vec<usize>> = cartesian_tuples(m.size(), k);
    let family: Vec<BTreeSet<Vec<usize>>> =
        alg.members.iter().map(|mm| mm.tuples.clone()).collect();
    let closed = is_boolean_algebra(&base, &family);
    let mut text = format!(
        "{} distinct definable set(s); complete: {}; boolean algebra: {}\n",
        alg.members.len(),
        alg.complete,
        closed
    );
    for member in &alg.members {
        let tuples: Vec<String> = member
            .tuples
            .iter()
            .map(|t| {
                if t.len() == 1 {
                    t[0].to_string()
                } else {
                    format!(
                        "({})",
                        t.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                    )
                }
            })
            .collect();
        text += &format!(
            "{{{}}}  by  {}\n",
            tuples.join(", "),
            print_formula(&member.witness, &sig)
        );
    }
    let value = json!({
        "params": alg.params,
        "rank_bound": alg.rank_bound,
        "var_count": alg.var_count,
        "complete": alg.complete,
        "closure_complete": alg.closure_complete,
        "atoms_exhaustive": alg.atoms_exhaustive,
        "formulas_considered": alg.formulas_considered,
        "is_boolean_algebra": closed,
        "members": alg.members.iter().map(|mm| json!({
            "tuples": mm.tuples.iter().cloned().collect::<Vec<_>>(),
            "witness": print_formula(&mm.witness, &sig),
            "rank": mm.rank,
        })).collect::<Vec<_>>(),
    });
    Ok((text.trim_end().to_string(), value))
}

fn cartesian_tuples(n: usize, k: usize) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    let mut tuple = vec![0usize; k];
    loop {
        out.insert(tuple.clone());
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

fn cmd_types(
    sig_args: &SigArgs,
    model: Option<&std::path::Path>,
    params: &str,
    rank: usize,
    dlo: Option<usize>,
) -> CliResult {
    if let Some(n) = dlo {
        let space = count_dlo_types(n);
        let mut text = format!(
            "{} complete 1-type(s) over {} parameter(s) in a dense linear order\n",
            space.count, space.param_count
        );
        for (shape, desc) in space.shapes.iter().zip(&space.descriptions) {
            text += &format!(
                "{desc}  [{}]\n",
                if shape.realized() { "realized" } else { "omitted" }
            );
        }
        let value = json!({
            "param_count": space.param_count,
            "count": space.count,
            "types": space.shapes.iter().zip(&space.descriptions).map(|(s, d)| json!({
                "description": d,
                "realized": s.realized(),
            })).collect::<Vec<_>>(),
        });
        return Ok((text.trim_end().to_string(), value));
    }
    let sig = load_sig(sig_args)?;
    let m = load_model_file(model.expect("clap requires model without --dlo"), &sig)?;
    let params = parse_usize_list(params)?;
    let partition = complete_types(&m, &params, rank).map_err(CliError::domain)?;
    let mut text = format!(
        "{} complete type(s) at rank {} over parameters {:?}\n",
        partition.blocks.len(),
        partition.rank,
        partition.params
    );
    for (block, witness) in partition.blocks.iter().zip(&partition.witnesses) {
        text += &format!("block {:?} (witness {})\n", block, witness);
    }
    if !partition.atoms_exhaustive {
        text += "note: atomic diagram truncated at the term-depth cap\n";
    }
    let value = json!({
        "params": partition.params,
        "rank": partition.rank,
        "blocks": partition.blocks,
        "witnesses": partition.witnesses,
        "atoms_exhaustive": partition.atoms_exhaustive,
    });
    Ok((text.trim_end().to_string(), value))
}

fn cmd_type_check(
    sig_args: &SigArgs,
    model: &std::path::Path,
    params: &str,
    formulas: &[String],
) -> CliResult {
    let sig = load_sig(sig_args)?;
    let m = load_model_file(model, &sig)?;
    let params = parse_usize_list(params)?;
    let fs: Vec<Formula> = formulas
        .iter()
        .map(|t| parse_formula_arg(t, &sig).map(|(f, _)| f))
        .collect::<Result<_, _>>()?;
    let check = check_partial_type(&m, &params, &fs).map_err(CliError::domain)?;
    let text = if check.is_partial_type {
        format!(
            "partial type; realized by {:?}",
            check.realizations
        )
    } else {
        format!(
            "not a partial type; empty intersection from formulas {:?}",
            check.empty_core.clone().unwrap_or_default()
        )
    };
    let value = json!({
        "is_partial_type": check.is_partial_type,
        "realizations": check.realizations,
        "empty_core": check.empty_core,
    });
    Ok((text, value))
}

fn cmd_filter(command: FilterCommand) -> CliResult {
    match command {
        FilterCommand::Check { family } => {
            let fam = parse_family(&family).map_err(CliError::usage)?;
            let verdict = is_filter(&fam);
            let (text, value) = match &verdict {
                Ok(()) => ("filter: yes".to_string(), json!({ "is_filter": true })),
                Err(v) => (
                    format!("filter: no ({v:?})"),
                    json!({ "is_filter": false, "violation": format!("{v:?}") }),
                ),
            };
            Ok((text, value))
        }
        FilterCommand::Generate { family } => {
            let fam = parse_family(&family).map_err(CliError::usage)?;
            let filter = generated_filter(&fam).map_err(CliError::domain)?;
            let members: Vec<Vec<usize>> = filter.family().members().collect();
            let limits = limit_points(&filter);
            let ultra = is_ultrafilter(&filter);
            let mut text = format!(
                "generated filter with {} member(s); limit points {:?}; ultrafilter: {}\n",
                members.len(),
                limits,
                ultra
            );
            for m in &members {
                text += &format!("{m:?}\n");
            }
            let value = json!({
                "members": members,
                "limit_points": limits,
                "is_ultrafilter": ultra,
            });
            Ok((text.trim_end().to_string(), value))
        }
        FilterCommand::Ultrafilters { base } => {
            let us = enumerate_ultrafilters(base).map_err(CliError::domain)?;
            let points: Vec<usize> = us.iter().map(Ultrafilter::principal_point).collect();
            let text = format!(
                "{} ultrafilter(s) on a base of size {base}, principal at {:?}",
                us.len(),
                points
            );
            let value = json!({
                "base": base,
                "count": us.len(),
                "principal_points": points,
            });
            Ok((text, value))
        }
        FilterCommand::LimitPoints { family } => {
            let fam = parse_family(&family).map_err(CliError::usage)?;
            is_filter(&fam).map_err(|v| CliError::Domain(format!("not a filter: {v:?}")))?;
            let filter = Filter::new(fam).map_err(CliError::domain)?;
            let limits = limit_points(&filter);
            Ok((
                format!("limit points: {limits:?}"),
                json!({ "limit_points": limits }),
            ))
        }
    }
}

fn cmd_ultraproduct(
    sig_args: &SigArgs,
    models: &[PathBuf],
    principal_at: usize,
    sentence: Option<&str>,
) -> CliResult {
    let sig = load_sig(sig_args)?;
    let loaded: Vec<Model> = models
        .iter()
        .map(|p| load_model_file(p, &sig))
        .collect::<Result<_, _>>()?;
    let family = IndexedFamily::new(loaded).map_err(CliError::domain)?;
    if principal_at >= family.len() {
        return Err(CliError::Usage(format!(
            "--principal-at {principal_at} out of range for {} models",
            family.len()
        )));
    }
    let d = Ultrafilter::principal(family.len(), principal_at).map_err(CliError::domain)?;
    let up = ultraproduct(&family, &d).map_err(CliError::domain)?;
    let iso = iso_check(&up.model, &family.models()[principal_at], &IsoConfig::default())
        .map_err(CliError::domain)?;
    let iso_desc = match &iso {
        IsoResult::Isomorphic { map } => json!({ "isomorphic": true, "map": map }),
        IsoResult::NotIsomorphic { witness } => json!({
            "isomorphic": false,
            "witness": witness.as_ref().map(|w| print_formula(w, &sig)),
        }),
        IsoResult::Inconclusive { nodes_explored } => {
            json!({ "isomorphic": Value::Null, "nodes_explored": nodes_explored })
        }
    };
    let mut text = format!(
        "ultraproduct of {} model(s) by the principal ultrafilter at {}: {} element(s)\n",
        family.len(),
        principal_at,
        up.model.size()
    );
    text += &format!(
        "collapse onto factor {principal_at}: {}\n",
        match &iso {
            IsoResult::Isomorphic { .. } => "isomorphic".to_string(),
            IsoResult::NotIsomorphic { .. } => "NOT isomorphic (construction bug)".to_string(),
            IsoResult::Inconclusive { .. } => "inconclusive".to_string(),
        }
    );
    let mut los_value = Value::Null;
    if let Some(s) = sentence {
        let (f, _) = parse_formula_arg(s, &sig)?;
        let report = los_check(&family, &d, &f).map_err(CliError::domain)?;
        text += &format!(
            "sentence: {}\nholds in ultraproduct: {}\nfactors where true: {:?} (in ultrafilter: {})\ntransfer: {}",
            print_formula(&f, &sig),
            report.holds_in_product,
            report.factors_where_true,
            report.factor_set_in_ultrafilter,
            if report.transfer_holds { "ok" } else { "VIOLATION" }
        );
        los_value = json!({
            "sentence": print_formula(&f, &sig),
            "holds_in_product": report.holds_in_product,
            "factors_where_true": report.factors_where_true,
            "factor_set_in_ultrafilter": report.factor_set_in_ultrafilter,
            "transfer_holds": report.transfer_holds,
        });
    }
    let value = json!({
        "factors": family.len(),
        "principal_at": principal_at,
        "product_size": up.model.size(),
        "representatives": up.representatives,
        "collapse": iso_desc,
        "los": los_value,
    });
    Ok((text.trim_end().to_string(), value))
}

fn cmd_ax_check(n: usize, k: usize, p: usize) -> CliResult {
    if !is_prime(p) {
        return Err(CliError::Usage(format!(
            "p must be prime to give a field, got {p}"
        )));
    }
    let phi = build_ax_sentence(n, k).map_err(CliError::domain)?;
    let field = Model::modular_ring(p);
    let holds = field.sat(&phi).map_err(CliError::domain)?;
    let sig = Signature::ring();
    let text = format!(
        "injective polynomial self-maps of degree <= {k} in {n} variable(s) are surjective in F_{p}: {holds}"
    );
    let value = json!({
        "n": n,
        "k": k,
        "p": p,
        "holds": holds,
        "quantifier_rank": phi.quantifier_rank(),
        "sentence": print_formula(&phi, &sig),
    });
    Ok((text, value))
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..=p / 2).all(|d| p % d != 0)
}

fn cmd_graph(command: GraphCommand, seed: u64) -> CliResult {
    match command {
        GraphCommand::HalfGraph { k, file } => {
            let g = load_graph(&file)?;
            match find_half_graph(&g, k) {
                Some(w) => {
                    let text = format!("half-graph of height {k}: a = {:?}, b = {:?}", w.a, w.b);
                    Ok((
                        text,
                        json!({ "found": true, "height": k, "a": w.a, "b": w.b }),
                    ))
                }
                None => Ok(("none".to_string(), json!({ "found": false, "height": k }))),
            }
        }
        GraphCommand::Regularity {
            eps,
            k,
            exact_cap,
            trials,
            max_pieces,
            file,
        } => {
            let g = load_graph(&file)?;
            let eps = parse_eps(&eps)?;
            let cfg = RegularityConfig {
                exact_cap,
                sample_trials: trials,
                seed,
                max_pieces,
                budget_base: 2,
            };
            let cert = stable_regularity(&g, eps, k, &cfg).map_err(CliError::domain)?;
            let mut text = format!(
                "partition into {} piece(s) at eps = {}: {}\n",
                cert.blocks.len(),
                ratio_text(cert.eps),
                if cert.passed { "PASS" } else { "FAIL" }
            );
            text += &format!(
                "balance: sizes {}..{} (equitable: {}); budget {} piece(s); {} refinement round(s)\n",
                cert.balance.min_size,
                cert.balance.max_size,
                cert.balance.equitable,
                cert.piece_budget,
                cert.refinement_rounds
            );
            for report in &cert.pair_reports {
                text += &format!(
                    "pair ({}, {}): {}\n",
                    report.left,
                    report.right,
                    pair_verdict_text(&report.verdict)
                );
            }
            let value = json!({
                "eps": ratio_value(cert.eps),
                "half_graph_bound": cert.half_graph_bound,
                "passed": cert.passed,
                "blocks": cert.blocks,
                "balance": {
                    "min_size": cert.balance.min_size,
                    "max_size": cert.balance.max_size,
                    "equitable": cert.balance.equitable,
                },
                "refinement_rounds": cert.refinement_rounds,
                "piece_budget": cert.piece_budget,
                "budget_base": cert.budget_base,
                "exact_cap": cert.exact_cap,
                "sample_trials": cert.sample_trials,
                "irregular_pairs": cert.irregular_pairs(),
                "pairs": cert.pair_reports.iter().map(pair_verdict_value).collect::<Vec<_>>(),
            });
            Ok((text.trim_end().to_string(), value))
        }
        GraphCommand::RegularPair {
            eps,
            x,
            y,
            exact_cap,
            sample,
            file,
        } => {
            let g = load_graph(&file)?;
            let eps = parse_eps(&eps)?;
            let xs = parse_usize_list(&x)?;
            let ys = parse_usize_list(&y)?;
            match sample {
                None => {
                    let verdict =
                        regular_pair_exact(&g, &xs, &ys, eps, exact_cap).map_err(CliError::domain)?;
                    let (text, value) = match verdict {
                        ExactVerdict::Regular => (
                            "regular (exhaustive)".to_string(),
                            json!({ "regular": true, "method": "exact" }),
                        ),
                        ExactVerdict::Irregular {
                            xs_sub,
                            ys_sub,
                            sub_density,
                            pair_density,
                        } => (
                            format!(
                                "irregular: X' = {:?}, Y' = {:?}, d(X',Y') = {}, d(X,Y) = {}",
                                xs_sub,
                                ys_sub,
                                ratio_text(sub_density),
                                ratio_text(pair_density)
                            ),
                            json!({
                                "regular": false,
                                "method": "exact",
                                "xs_sub": xs_sub,
                                "ys_sub": ys_sub,
                                "sub_density": ratio_value(sub_density),
                                "pair_density": ratio_value(pair_density),
                            }),
                        ),
                    };
                    Ok((text, value))
                }
                Some(trials) => {
                    let verdict = regular_pair_sampled(&g, &xs, &ys, eps, trials, seed)
                        .map_err(CliError::domain)?;
                    let (text, value) = match verdict {
                        SampledVerdict::NoViolationFound { trials } => (
                            format!("no violation found in {trials} trial(s)"),
                            json!({ "regular": Value::Null, "method": "sampled", "trials": trials }),
                        ),
                        SampledVerdict::Irregular {
                            trial,
                            xs_sub,
                            ys_sub,
                            sub_density,
                            pair_density,
                        } => (
                            format!(
                                "irregular at trial {trial}: X' = {:?}, Y' = {:?}, d(X',Y') = {}, d(X,Y) = {}",
                                xs_sub,
                                ys_sub,
                                ratio_text(sub_density),
                                ratio_text(pair_density)
                            ),
                            json!({
                                "regular": false,
                                "method": "sampled",
                                "trial": trial,
                                "xs_sub": xs_sub,
                                "ys_sub": ys_sub,
                                "sub_density": ratio_value(sub_density),
                                "pair_density": ratio_value(pair_density),
                            }),
                        ),
                    };
                    Ok((text, value))
                }
            }
        }
        GraphCommand::Density { x, y, file } => {
            let g = load_graph(&file)?;
            let xs = parse_usize_list(&x)?;
            let ys = parse_usize_list(&y)?;
            let d = edge_density(&g, &xs, &ys).map_err(CliError::domain)?;
            Ok((
                format!("density: {}", ratio_text(d)),
                json!({ "density": ratio_value(d) }),
            ))
        }
        GraphCommand::Hom { exact_cap, file } => {
            let g = load_graph(&file)?;
            let report = max_homogeneous_with(&g, &HomogeneousConfig { exact_cap });
            let text = format!(
                "clique {:?} (size {}), independent set {:?} (size {}), hom = {}{}",
                report.clique,
                report.clique.len(),
                report.independent,
                report.independent.len(),
                report.hom,
                if report.exact { "" } else { " (heuristic)" }
            );
            let value = json!({
                "clique": report.clique,
                "independent": report.independent,
                "hom": report.hom,
                "exact": report.exact,
            });
            Ok((text, value))
        }
        GraphCommand::Ramsey { family, sizes, k } => {
            let family: RamseyFamily = family.parse().map_err(CliError::Usage)?;
            let sizes = parse_usize_list(&sizes)?;
            let report = stable_ramsey_report(family, &sizes, k, seed);
            let mut text = format!(
                "family {} at half-graph bound {}: {} instance(s), {} skipped as unstable\n",
                report.family, report.half_graph_bound, report.rows.len(), report.skipped
            );
            text += "n\thom\tlog_n hom\tstable\n";
            for row in &report.rows {
                text += &format!(
                    "{}\t{}\t{}\t{}\n",
                    row.n,
                    row.hom.map(|h| h.to_string()).unwrap_or_else(|| "-".into()),
                    row.exponent
                        .map(|e| format!("{e:.4}"))
                        .unwrap_or_else(|| "-".into()),
                    row.stable
                );
            }
            let value = json!({
                "family": report.family.to_string(),
                "half_graph_bound": report.half_graph_bound,
                "seed": report.seed,
                "skipped": report.skipped,
                "rows": report.rows.iter().map(|r| json!({
                    "n": r.n,
                    "stable": r.stable,
                    "hom": r.hom,
                    "clique_size": r.clique_size,
                    "independent_size": r.independent_size,
                    "exponent": r.exponent,
                    "exact": r.exact,
                })).collect::<Vec<_>>(),
            });
            Ok((text.trim_end().to_string(), value))
        }
    }
}

fn pair_verdict_text(v: &PairVerdict) -> String {
    match v {
        PairVerdict::RegularExact => "regular (exhaustive)".to_string(),
        PairVerdict::IrregularExact {
            xs_sub,
            ys_sub,
            sub_density,
            pair_density,
        } => format!(
            "IRREGULAR: X' = {:?}, Y' = {:?}, d(X',Y') = {}, d(X,Y) = {}",
            xs_sub,
            ys_sub,
            ratio_text(*sub_density),
            ratio_text(*pair_density)
        ),
        PairVerdict::SampledNoViolation { trials, seed } => {
            format!("no violation in {trials} trial(s) (seed {seed})")
        }
        PairVerdict::SampledViolation {
            trial,
            seed,
            sub_density,
            pair_density,
            ..
        } => format!(
            "IRREGULAR (sampled, trial {trial}, seed {seed}): d(X',Y') = {}, d(X,Y) = {}",
            ratio_text(*sub_density),
            ratio_text(*pair_density)
        ),
    }
}

fn pair_verdict_value(report: &modelglass::graphs::PairReport) -> Value {
    let base = match &report.verdict {
        PairVerdict::RegularExact => json!({ "method": "exact", "regular": true }),
        PairVerdict::IrregularExact {
            xs_sub,
            ys_sub,
            sub_density,
            pair_density,
        } => json!({
            "method": "exact",
            "regular": false,
            "xs_sub": xs_sub,
            "ys_sub": ys_sub,
            "sub_density": ratio_value(*sub_density),
            "pair_density": ratio_value(*pair_density),
        }),
        PairVerdict::SampledNoViolation { trials, seed } => json!({
            "method": "sampled",
            "regular": Value::Null,
            "trials": trials,
            "seed": seed,
        }),
        PairVerdict::SampledViolation {
            trial,
            seed,
            xs_sub,
            ys_sub,
            sub_density,
            pair_density,
        } => json!({
            "method": "sampled",
            "regular": false,
            "trial": trial,
            "seed": seed,
            "xs_sub": xs_sub,
            "ys_sub": ys_sub,
            "sub_density": ratio_value(*sub_density),
            "pair_density": ratio_value(*pair_density),
        }),
    };
    let mut obj = base.as_object().unwrap().clone();
    obj.insert("left".to_string(), json!(report.left));
    obj.insert("right".to_string(), json!(report.right));
    Value::Object(obj)
}
