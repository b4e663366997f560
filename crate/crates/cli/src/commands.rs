use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use graybox_core::chordal::{exact_treewidth, triangulate, ChordalCompletion, Heuristic};
use graybox_core::fda::{run_fda, FdaConfig, FdaResult, Selection};
use graybox_core::generate::{generate, CodomainSource, GeneratorKind, GeneratorSpec};
use graybox_core::graph::{build_factor_graph, build_vig};
use graybox_core::junction::{factorization_from_jt, junction_tree, Factorization, JunctionTree};
use graybox_core::local_search::{hill_climb, ClimbOutcome, ClimbPolicy, Pivot};
use graybox_core::marginal::{
    config_string, deception_report, enumerate_marginals, exhaustive_optimum, scope_label, tables_to_tsv,
    StatisticKind, DEFAULT_ENUMERATION_LIMIT,
};
use graybox_core::replicate::{replicate, GoldenTables};
use graybox_core::{dot, format, worked_example, AdfInstance, Error, Solution};

use crate::{
    AnalyzeArgs, Cli, ClimbArgs, Codomain, Command, DeceptionArgs, FdaArgs, Format, GenArgs, HeuristicArg, Kind,
    MarginalArgs, PivotArg, ReplicateArgs, ScopeArgs, SelectionArg, Statistic, StructureArgs, ENUM_LIMIT_VAR,
};

/// Invalid flag combination or value detected after argument parsing.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(message: impl Into<String>) -> Result<T> {
    Err(Usage(message.into()).into())
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_)) => 2,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let output = match &cli.command {
        Command::Gen(args) => cmd_gen(cli, args)?,
        Command::Analyze(args) => cmd_analyze(cli, args)?,
        Command::Marginals(args) => cmd_marginals(cli, args)?,
        Command::Deception(args) => cmd_deception(cli, args)?,
        Command::Fda(args) => cmd_fda(cli, args)?,
        Command::Climb(args) => cmd_climb(cli, args)?,
        Command::ReplicatePaper(args) => return cmd_replicate(cli, args),
    };
    emit(cli.out.as_deref(), &output)?;
    Ok(ExitCode::SUCCESS)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn enumeration_limit() -> Result<usize> {
    match std::env::var(ENUM_LIMIT_VAR) {
        Ok(raw) => match raw.trim().parse() {
            Ok(limit) => Ok(limit),
            Err(_) => usage(format!("{ENUM_LIMIT_VAR} must be a non-negative integer, got {raw:?}")),
        },
        Err(_) => Ok(DEFAULT_ENUMERATION_LIMIT),
    }
}

fn load_instance(path: &Path) -> Result<AdfInstance> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .context("reading instance from stdin")?;
        buf
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    format::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn reject_format(cli: &Cli, allowed: &[Format], command: &str) -> Result<()> {
    match cli.format {
        Some(f) if !allowed.contains(&f) => usage(format!("--format {f:?} is not supported by {command}")),
        _ => Ok(()),
    }
}

fn parse_list(raw: &str, what: &str) -> Result<Vec<usize>> {
    raw.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .or_else(|_| usage(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn json_line(out: &mut String, value: Value) {
    out.push_str(&value.to_string());
    out.push('\n');
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<String> {
    reject_format(cli, &[Format::Json], "gen")?;
    let spec = if args.paper_example {
        GeneratorSpec::paper_example()
    } else {
        let kind = match args.kind.expect("clap requires --kind") {
            Kind::AdjacentCyclic => GeneratorKind::AdjacentCyclic,
            Kind::AdjacentAcyclic => GeneratorKind::AdjacentAcyclic,
            Kind::RandomScopes => GeneratorKind::RandomScopes,
            Kind::Separable => GeneratorKind::Separable,
        };
        let codomain = match args.codomain.unwrap_or(Codomain::Uniform) {
            Codomain::Uniform => CodomainSource::RandomUniform(cli.seed),
            Codomain::FourOptima => CodomainSource::FourLocalOptima(cli.seed),
        };
        let mut spec = GeneratorSpec::new(
            kind,
            args.n.expect("clap requires --n"),
            args.k.expect("clap requires --k"),
            codomain,
            cli.seed,
        );
        if let Some(m) = args.m {
            spec.m = m;
        }
        spec
    };
    let instance = generate(&spec)?;
    Ok(match cli.format {
        Some(Format::Json) => {
            let mut s = format::serialize_json(&instance);
            s.push('\n');
            s
        }
        _ => format::serialize(&instance),
    })
}

fn heuristic(args: &StructureArgs) -> Result<Heuristic> {
    if let Some(raw) = &args.elim_order {
        return Ok(Heuristic::GivenOrder(parse_list(raw, "elimination order")?));
    }
    Ok(match args.heuristic {
        HeuristicArg::MinFill => Heuristic::MinFill,
        HeuristicArg::MinDegree => Heuristic::MinDegree,
    })
}

fn completion(instance: &AdfInstance, args: &StructureArgs) -> Result<ChordalCompletion> {
    let vig = build_vig(instance)?;
    let h = heuristic(args)?;
    triangulate(&vig, &h).map_err(|e| match (&h, e) {
        (Heuristic::GivenOrder(_), Error::Structural(msg)) => Usage(format!("--elim-order: {msg}")).into(),
        (_, e) => e.into(),
    })
}

fn derived_factorization(instance: &AdfInstance, args: &StructureArgs) -> Result<(JunctionTree, Factorization)> {
    let jt = junction_tree(&completion(instance, args)?)?;
    let root = match &args.root {
        None => 0,
        Some(raw) => {
            let mut clique = parse_list(raw, "root clique")?;
            clique.sort_unstable();
            match jt.clique_index(&clique) {
                Some(i) => i,
                None => return usage(format!("--root {{{raw}}} is not a clique of the junction tree")),
            }
        }
    };
    let fz = factorization_from_jt(&jt, root)?;
    Ok((jt, fz))
}

fn edges_json(edges: &[(usize, usize)]) -> Value {
    Value::Array(edges.iter().map(|&(u, v)| json!([u, v])).collect())
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<String> {
    let instance = load_instance(&args.instance)?;
    let format = cli.format;
    if args.treewidth {
        reject_format(cli, &[Format::Tsv, Format::Json], "analyze --treewidth")?;
        let c = completion(&instance, &args.structure)?;
        let exact = if args.exact {
            Some(exact_treewidth(c.base())?)
        } else {
            None
        };
        return Ok(match format {
            Some(Format::Json) => json_text(&json!({
                "treewidth": c.width(),
                "elimination_order": c.elimination_order(),
                "exact": exact,
            })),
            _ => match exact {
                Some(e) => format!("{}\nexact\t{e}\n", c.width()),
                None => format!("{}\n", c.width()),
            },
        });
    }
    if args.factorization {
        reject_format(cli, &[Format::Json], "analyze --factorization")?;
        let (_, fz) = derived_factorization(&instance, &args.structure)?;
        let mut s = fz.to_json();
        s.push('\n');
        return Ok(s);
    }
    reject_format(cli, &[Format::Dot, Format::Json], "analyze")?;
    let as_json = format == Some(Format::Json);
    if args.vig {
        let g = build_vig(&instance)?;
        return Ok(if as_json {
            json_text(&json!({ "n": g.n(), "edges": edges_json(&g.edges()) }))
        } else {
            dot::interaction_graph(&g)
        });
    }
    if args.factor_graph {
        let fg = build_factor_graph(&instance)?;
        return Ok(if as_json {
            json_text(&serde_json::to_value(&fg)?)
        } else {
            dot::factor_graph(&fg)
        });
    }
    if args.triangulate {
        let c = completion(&instance, &args.structure)?;
        return Ok(if as_json {
            json_text(&json!({
                "n": c.base().n(),
                "edges": edges_json(&c.base().edges()),
                "fill_edges": edges_json(c.fill_edges()),
                "elimination_order": c.elimination_order(),
                "width": c.width(),
            }))
        } else {
            dot::chordal_completion(&c)
        });
    }
    let jt = junction_tree(&completion(&instance, &args.structure)?)?;
    Ok(if as_json {
        json_text(&serde_json::to_value(&jt)?)
    } else {
        dot::junction_tree(&jt)
    })
}

fn statistic(args: &ScopeArgs) -> Result<StatisticKind> {
    Ok(match args.statistic {
        Statistic::Sum => StatisticKind::FitnessSum,
        Statistic::Mean => StatisticKind::FitnessMean,
        Statistic::Boltzmann => {
            if !(args.beta >= 0.0 && args.beta.is_finite()) {
                return usage(format!("--beta must be finite and >= 0, got {}", args.beta));
            }
            StatisticKind::BoltzmannMarginal { beta: args.beta }
        }
    })
}

/// Requested scopes with their column labels.
fn scopes(instance: &AdfInstance, args: &ScopeArgs) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    let n = instance.n();
    if let Some(order) = args.order {
        if order == 0 || order > n {
            return usage(format!("--order must be in 1..={n}, got {order}"));
        }
        let windows = worked_example::hyperplane_windows(n, order);
        return Ok((windows, (1..=n).map(|i| i.to_string()).collect()));
    }
    let list: Vec<Vec<usize>> = if let Some(raw) = &args.scopes {
        let parsed = raw
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_list(s, "scope"))
            .collect::<Result<Vec<_>>>()?;
        if parsed.is_empty() {
            return usage("--scopes lists no scope");
        }
        parsed
    } else {
        let (_, fz) = derived_factorization(instance, &args.structure)?;
        fz.factors()
            .iter()
            .map(|f| {
                let mut s = f.scope();
                s.sort_unstable();
                s
            })
            .collect()
    };
    let labels = list.iter().map(|s| scope_label(s)).collect();
    Ok((list, labels))
}

fn cmd_marginals(cli: &Cli, args: &MarginalArgs) -> Result<String> {
    reject_format(cli, &[Format::Tsv, Format::Json], "marginals")?;
    let args = &args.scopes;
    let instance = load_instance(&args.instance)?;
    let kind = statistic(args)?;
    let (scopes, labels) = scopes(&instance, args)?;
    let tables = enumerate_marginals(&instance, &scopes, kind, enumeration_limit()?)?;
    Ok(match cli.format {
        Some(Format::Json) => {
            let items = tables
                .iter()
                .zip(&labels)
                .map(|(t, label)| {
                    json!({
                        "label": label,
                        "scope": t.scope,
                        "statistic": t.kind,
                        "values": t.values,
                    })
                })
                .collect();
            json_text(&Value::Array(items))
        }
        _ => tables_to_tsv(&tables, &labels),
    })
}

fn cmd_deception(cli: &Cli, args: &DeceptionArgs) -> Result<String> {
    reject_format(cli, &[Format::Tsv, Format::Json], "deception")?;
    let instance = load_instance(&args.scopes.instance)?;
    let kind = statistic(&args.scopes)?;
    let (scopes, labels) = scopes(&instance, &args.scopes)?;
    let limit = enumeration_limit()?;
    let reference = match &args.optimum {
        Some(raw) => {
            let s: Solution = raw.parse().or_else(|e| usage(format!("--optimum: {e}")))?;
            if s.len() != instance.n() {
                return usage(format!("--optimum has {} bits but n = {}", s.len(), instance.n()));
            }
            s
        }
        None => exhaustive_optimum(&instance, limit)?.0.swap_remove(0),
    };
    let report = deception_report(&instance, &scopes, &reference, kind, limit)?;
    let deceptive: Vec<&String> = report
        .factors
        .iter()
        .zip(&labels)
        .filter(|(f, _)| f.deceptive)
        .map(|(_, l)| l)
        .collect();
    Ok(match cli.format {
        Some(Format::Tsv) => {
            let mut out = String::from("label\tscope\targmax\treference\tdeceptive\n");
            for (f, label) in report.factors.iter().zip(&labels) {
                let order = f.scope.len();
                let argmax: Vec<String> = f.argmax.iter().map(|&c| config_string(c, order)).collect();
                out.push_str(&format!(
                    "{label}\t{}\t{}\t{}\t{}\n",
                    scope_label(&f.scope),
                    argmax.join(","),
                    config_string(f.reference_config, order),
                    f.deceptive
                ));
            }
            out
        }
        _ => {
            let factors: Vec<Value> = report
                .factors
                .iter()
                .zip(&labels)
                .map(|(f, label)| {
                    let order = f.scope.len();
                    json!({
                        "label": label,
                        "scope": f.scope,
                        "argmax": f.argmax.iter().map(|&c| config_string(c, order)).collect::<Vec<_>>(),
                        "reference": config_string(f.reference_config, order),
                        "deceptive": f.deceptive,
                    })
                })
                .collect();
            json_text(&json!({
                "reference": report.reference,
                "statistic": report.kind,
                "deceptive": deceptive,
                "factors": factors,
            }))
        }
    })
}

fn fda_config(args: &FdaArgs, seed: u64) -> Result<FdaConfig> {
    let selection = match args.selection {
        SelectionArg::Truncation => Selection::Truncation { ratio: args.tau },
        SelectionArg::Boltzmann => Selection::Boltzmann {
            beta: args.beta,
            size: args
                .selected
                .unwrap_or_else(|| (args.tau * args.population as f64).ceil() as usize),
        },
    };
    let config = FdaConfig {
        population_size: args.population,
        selection,
        smoothing: args.smoothing,
        max_generations: args.max_gens,
        seed,
        elitism: args.elitism,
        target: args.target,
    };
    config.validate()?;
    Ok(config)
}

/// Runs `f` over `items` on all available cores, keeping input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn cmd_fda(cli: &Cli, args: &FdaArgs) -> Result<String> {
    reject_format(cli, &[Format::Tsv, Format::Json], "fda")?;
    if args.runs == 0 {
        return usage("--runs must be at least 1");
    }
    let config = fda_config(args, cli.seed)?;
    let instance = load_instance(&args.instance)?;
    let factorization = if args.univariate {
        Factorization::univariate(instance.n())
    } else if let Some(path) = &args.factor_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Factorization::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        derived_factorization(&instance, &args.structure)?.1
    };
    let seeds: Vec<u64> = (0..args.runs).map(|i| cli.seed.wrapping_add(i)).collect();
    let results = parallel_map(&seeds, |&seed| {
        let config = FdaConfig { seed, ..config.clone() };
        run_fda(&instance, &factorization, &config)
    })
    .into_iter()
    .collect::<graybox_core::Result<Vec<FdaResult>>>()?;

    let successes = results.iter().filter(|r| r.success == Some(true)).count();
    let mut out = String::new();
    if cli.format == Some(Format::Tsv) {
        out.push_str("seed\tbest_fitness\tgenerations\tevaluations\tsuccess\tbest\n");
        for r in &results {
            let success = r.success.map_or("-".to_owned(), |s| s.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{success}\t{}\n",
                r.config.seed, r.best_fitness, r.generations, r.evaluations, r.best
            ));
        }
        return Ok(out);
    }
    for r in &results {
        for g in &r.history {
            json_line(
                &mut out,
                json!({
                    "record": "generation",
                    "seed": r.config.seed,
                    "generation": g.generation,
                    "best": g.best,
                    "mean": g.mean,
                    "entropy": g.entropy,
                }),
            );
        }
        json_line(
            &mut out,
            json!({
                "record": "result",
                "seed": r.config.seed,
                "best": r.best,
                "best_fitness": r.best_fitness,
                "generations": r.generations,
                "evaluations": r.evaluations,
                "success": r.success,
            }),
        );
    }
    json_line(
        &mut out,
        json!({
            "record": "summary",
            "factorization": factorization.to_string(),
            "runs": results.len(),
            "seeds": seeds,
            "target": config.target,
            "successes": config.target.map(|_| successes),
            "success_rate": config.target.map(|_| successes as f64 / results.len() as f64),
            "config": config,
        }),
    );
    Ok(out)
}

fn cmd_climb(cli: &Cli, args: &ClimbArgs) -> Result<String> {
    reject_format(cli, &[Format::Tsv, Format::Json], "climb")?;
    let instance = load_instance(&args.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let starts: Vec<Solution> = (0..args.starts)
        .map(|_| Solution::random(instance.n(), &mut rng))
        .collect();
    let mut out = String::new();
    let tsv = cli.format == Some(Format::Tsv);
    if tsv {
        out.push_str("index\tstart\tsolution\tfitness\tmoves\toutcome\n");
    }
    let mut best: Option<(Solution, f64)> = None;
    let mut local_optima = 0;
    for (i, start) in starts.into_iter().enumerate() {
        let policy = ClimbPolicy {
            pivot: match args.pivot {
                PivotArg::Best => Pivot::BestImprovement,
                PivotArg::First => Pivot::FirstImprovement,
            },
            pair_moves: args.pairs,
            max_moves: args.max_moves.unwrap_or(usize::MAX),
            seed: cli.seed.wrapping_add(i as u64),
            trace: args.trace,
        };
        let start_text = start.to_string();
        let r = hill_climb(&instance, start, &policy)?;
        if r.outcome == ClimbOutcome::LocalOptimum {
            local_optima += 1;
        }
        if best.as_ref().is_none_or(|(_, f)| r.fitness > *f) {
            best = Some((r.solution.clone(), r.fitness));
        }
        let outcome = serde_json::to_value(r.outcome)?;
        if tsv {
            out.push_str(&format!(
                "{i}\t{start_text}\t{}\t{}\t{}\t{}\n",
                r.solution,
                r.fitness,
                r.moves,
                outcome.as_str().unwrap_or_default()
            ));
        } else {
            let mut record = json!({
                "record": "climb",
                "index": i,
                "start": start_text,
                "solution": r.solution,
                "fitness": r.fitness,
                "moves": r.moves,
                "outcome": outcome,
            });
            if args.trace {
                record["trace"] = serde_json::to_value(&r.trace)?;
            }
            json_line(&mut out, record);
        }
    }
    if !tsv {
        json_line(
            &mut out,
            json!({
                "record": "summary",
                "starts": args.starts,
                "local_optima": local_optima,
                "best": best.as_ref().map(|(s, _)| s.to_string()),
                "best_fitness": best.map(|(_, f)| f),
            }),
        );
    }
    Ok(out)
}

fn load_golden(dir: &Path) -> Result<GoldenTables> {
    let mut golden = GoldenTables::embedded();
    for (name, doc) in &mut golden.tables {
        let path = dir.join(format!("{name}.tsv"));
        *doc = fs::read_to_string(&path).with_context(|| format!("reading golden table {}", path.display()))?;
    }
    Ok(golden)
}

fn cmd_replicate(cli: &Cli, args: &ReplicateArgs) -> Result<ExitCode> {
    reject_format(cli, &[Format::Tsv], "replicate-paper")?;
    let golden = match &args.golden_dir {
        Some(dir) => load_golden(dir)?,
        None => GoldenTables::embedded(),
    };
    let replication = replicate(&golden, enumeration_limit()?)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("replication"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    for (name, tsv) in &replication.tables {
        write(&format!("{name}.tsv"), tsv)?;
    }
    write("factorization.json", &(replication.factorization.to_json() + "\n"))?;
    write(
        "deception.json",
        &json_text(&serde_json::to_value(&replication.deception)?),
    )?;
    let report = replication.report();
    write("report.txt", &report)?;
    print!("{report}");
    if replication.passed() {
        println!("replication matches the golden tables; artifacts in {}", dir.display());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("replication mismatch; see the diff above");
        Ok(ExitCode::from(1))
    }
}
