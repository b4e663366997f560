//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use graybox_core::chordal::{exact_treewidth, treewidth_estimate, triangulate, Heuristic};
use graybox_core::fda::{estimate, model_probability, Population};
use graybox_core::generate::{generate, CodomainSource, GeneratorKind, GeneratorSpec};
use graybox_core::graph::build_vig;
use graybox_core::junction::{factorization_from_jt, junction_tree, Factorization};
use graybox_core::local_search::{hill_climb, ClimbPolicy, DeltaState};
use graybox_core::marginal::{boltzmann, DEFAULT_ENUMERATION_LIMIT};
use graybox_core::{worked_example, AdfInstance, Solution};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn graybox(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_graybox"))
        .args(args)
        .output()
        .expect("graybox binary runs")
}

fn below(limit: usize, x: u64) -> usize {
    (x % limit as u64) as usize
}

fn table_replication(dir: &Path) -> Outcome {
    let start = Instant::now();
    let out = graybox(&["replicate-paper", "--out", dir.to_str().unwrap()]);
    let elapsed = start.elapsed();
    let report = String::from_utf8_lossy(&out.stdout);
    if !out.status.success() {
        return Err(format!("exit {:?}\n{report}", out.status.code()));
    }
    let expected = [("table4", 80), ("table5", 160), ("table6", 320), ("table7", 192)];
    for (name, count) in expected {
        let line = format!("PASS {name}: {count} values compared, 0 mismatches");
        if !report.contains(&line) {
            return Err(format!("missing `{line}` in\n{report}"));
        }
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("752/752 values equal, {elapsed:.2?}"))
}

fn deception_findings(instance: &Path) -> Outcome {
    let cases: [(&str, &[&str], Vec<&str>); 4] = [
        ("order 3", &["--order", "3"], vec!["3", "8", "9"]),
        ("order 4", &["--order", "4"], vec!["10"]),
        ("order 5", &["--order", "5"], vec!["9"]),
        ("cliques", &["--jt-factors"], vec![]),
    ];
    let mut found = Vec::new();
    for (name, flags, expected) in cases {
        let mut args = vec![
            "deception",
            instance.to_str().unwrap(),
            "--optimum",
            "1111111111",
            "--format",
            "json",
        ];
        args.extend_from_slice(flags);
        let out = graybox(&args);
        if !out.status.success() {
            return Err(format!("{name}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let doc: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let got: Vec<&str> = doc["deceptive"]
            .as_array()
            .ok_or("no deceptive list")?
            .iter()
            .filter_map(Value::as_str)
            .collect();
        if got != expected {
            return Err(format!("{name}: {got:?}, expected {expected:?}"));
        }
        found.push(format!("{name} {{{}}}", got.join(",")));
    }
    Ok(found.join(", "))
}

fn factorization_derivation() -> Outcome {
    let inst = worked_example::instance();
    let vig = build_vig(&inst).map_err(|e| e.to_string())?;
    let c =
        triangulate(&vig, &Heuristic::GivenOrder(worked_example::elimination_order())).map_err(|e| e.to_string())?;
    let mut fill = worked_example::FILL_EDGES.to_vec();
    fill.sort_unstable();
    if c.fill_edges() != fill.as_slice() {
        return Err(format!("fill edges {:?}", c.fill_edges()));
    }
    let jt = junction_tree(&c).map_err(|e| e.to_string())?;
    let root = jt.clique_index(&[0, 1, 2, 8, 9]).ok_or("root clique missing")?;
    let fz = factorization_from_jt(&jt, root).map_err(|e| e.to_string())?;
    let expected = [
        (vec![0, 1, 2, 8, 9], vec![]),
        (vec![3], vec![1, 2, 8, 9]),
        (vec![4], vec![2, 3, 8, 9]),
        (vec![5], vec![3, 4, 8, 9]),
        (vec![6], vec![4, 5, 8, 9]),
        (vec![7], vec![5, 6, 8, 9]),
    ];
    let got: Vec<(Vec<usize>, Vec<usize>)> = fz
        .factors()
        .iter()
        .map(|f| (f.new.clone(), f.conditioning.clone()))
        .collect();
    if got != expected {
        return Err(format!("got {fz}"));
    }
    Ok(fz.to_string())
}

fn treewidth_properties() -> Outcome {
    let mut checked = 0;
    for k in 2..=4 {
        for n in (k..=24).step_by(k) {
            let inst = generate(&GeneratorSpec::new(
                GeneratorKind::Separable,
                n,
                k,
                CodomainSource::RandomUniform(0),
                0,
            ))
            .map_err(|e| e.to_string())?;
            let vig = build_vig(&inst).map_err(|e| e.to_string())?;
            for h in [Heuristic::MinFill, Heuristic::MinDegree] {
                let w = treewidth_estimate(&vig, &h).map_err(|e| e.to_string())?;
                if w != k - 1 {
                    return Err(format!("separable n = {n}, k = {k}, {h:?}: width {w}"));
                }
            }
            checked += 1;
        }
    }
    let vig = build_vig(&worked_example::instance()).map_err(|e| e.to_string())?;
    let exact = exact_treewidth(&vig).map_err(|e| e.to_string())?;
    let heuristic = treewidth_estimate(&vig, &Heuristic::MinFill).map_err(|e| e.to_string())?;
    if exact != 4 || heuristic != 4 {
        return Err(format!("worked example: exact {exact}, min-fill {heuristic}"));
    }
    Ok(format!(
        "{checked} separable instances at k-1, worked example exact = min-fill = 4"
    ))
}

fn success_count(instance: &Path, model: &str) -> Result<u64, String> {
    let out = graybox(&[
        "fda",
        instance.to_str().unwrap(),
        model,
        "--seed",
        "1",
        "--runs",
        "50",
        "--target",
        "10",
    ]);
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let summary: Value = serde_json::from_str(text.lines().last().ok_or("no output")?).map_err(|e| e.to_string())?;
    summary["successes"]
        .as_u64()
        .ok_or_else(|| "summary has no success count".into())
}

fn fda_success(instance: &Path) -> Outcome {
    let start = Instant::now();
    let jt = success_count(instance, "--jt")?;
    let univariate = success_count(instance, "--univariate")?;
    let elapsed = start.elapsed();
    let summary = format!("jt {jt}/50, univariate {univariate}/50, {elapsed:.2?}");
    if jt * 100 < 95 * 50 || univariate >= jt || elapsed >= Duration::from_secs(60) {
        return Err(summary);
    }
    Ok(summary)
}

fn delta_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let kinds = [
        GeneratorKind::AdjacentCyclic,
        GeneratorKind::RandomScopes,
        GeneratorKind::Separable,
    ];
    let mut worst_real: f64 = 0.0;
    for t in 0..1000u64 {
        let kind = kinds[(t % 3) as usize];
        let integer = t % 2 == 0;
        let k = 2 + below(3, rng.next_u64());
        let n = match kind {
            GeneratorKind::Separable => k * (1 + below(8, rng.next_u64())),
            _ => k + below(25, rng.next_u64()),
        };
        let codomain = if integer {
            CodomainSource::FourLocalOptima(t)
        } else {
            CodomainSource::RandomUniform(t)
        };
        let inst = generate(&GeneratorSpec::new(kind, n, k, codomain, t)).map_err(|e| e.to_string())?;
        let x = Solution::random(n, &mut rng);
        let i = below(n, rng.next_u64());
        let state = DeltaState::new(&inst, x.clone()).map_err(|e| e.to_string())?;
        let delta = state.delta_flip(i).map_err(|e| e.to_string())?;
        let c_i = inst.subfunctions().iter().filter(|s| s.scope().contains(&i)).count() as u64;
        if state.evaluation_count() != c_i {
            return Err(format!(
                "triple {t}: {} evaluations, c_i = {c_i}",
                state.evaluation_count()
            ));
        }
        let mut y = x.clone();
        y.flip(i);
        let full = inst.evaluate_bits(y.bits()) - inst.evaluate_bits(x.bits());
        let err = (delta - full).abs();
        if integer && err != 0.0 {
            return Err(format!("triple {t}: {delta} vs {full} on an integer codomain"));
        }
        if !integer {
            if err > 1e-9 {
                return Err(format!("triple {t}: error {err}"));
            }
            worst_real = worst_real.max(err);
        }
    }
    Ok(format!(
        "1000 triples, integer exact, worst real error {worst_real:.1e}"
    ))
}

fn pair_restriction() -> Outcome {
    let mut pairs_checked = 0usize;
    for s in 0..20u64 {
        let n = 8 + (s as usize % 7);
        let inst = generate(&GeneratorSpec::new(
            GeneratorKind::RandomScopes,
            n,
            3,
            if s % 2 == 0 {
                CodomainSource::FourLocalOptima(s)
            } else {
                CodomainSource::RandomUniform(s)
            },
            s,
        ))
        .map_err(|e| e.to_string())?;
        let vig = build_vig(&inst).map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
        for start in 0..20u64 {
            let policy = ClimbPolicy {
                seed: start,
                ..ClimbPolicy::default()
            };
            let r = hill_climb(&inst, Solution::random(n, &mut rng), &policy).map_err(|e| e.to_string())?;
            let x = r.solution;
            let f = inst.evaluate_bits(x.bits());
            let mut y = x.clone();
            for u in 0..n {
                y.flip(u);
                if inst.evaluate_bits(y.bits()) > f + 1e-9 {
                    return Err(format!("instance {s}, start {start}: not a 1-bit optimum"));
                }
                for v in u + 1..n {
                    y.flip(v);
                    if inst.evaluate_bits(y.bits()) > f + 1e-9 && !vig.has_edge(u, v) {
                        return Err(format!(
                            "instance {s}, start {start}: improving pair ({u}, {v}) off the VIG"
                        ));
                    }
                    y.flip(v);
                    pairs_checked += 1;
                }
                y.flip(u);
            }
        }
    }
    Ok(format!("400 local optima, {pairs_checked} pairs scanned"))
}

fn fixtures() -> Vec<AdfInstance> {
    let mut out = vec![worked_example::instance()];
    for n in 1..=12 {
        for (i, kind) in [GeneratorKind::AdjacentCyclic, GeneratorKind::RandomScopes]
            .into_iter()
            .enumerate()
        {
            let k = n.min(3);
            let codomain = if k >= 2 && i == 0 {
                CodomainSource::FourLocalOptima(n as u64)
            } else {
                CodomainSource::RandomUniform(n as u64)
            };
            out.push(generate(&GeneratorSpec::new(kind, n, k, codomain, n as u64)).unwrap());
        }
    }
    out
}

fn probability_invariants() -> Outcome {
    let mut worst_boltzmann: f64 = 0.0;
    let mut worst_model: f64 = 0.0;
    let fixtures = fixtures();
    for (idx, inst) in fixtures.iter().enumerate() {
        let n = inst.n();
        for beta in [0.0, 0.5, 1.0, 4.0, 20.0] {
            let d = boltzmann(inst, beta, DEFAULT_ENUMERATION_LIMIT).map_err(|e| e.to_string())?;
            let err = (d.probabilities.iter().sum::<f64>() - 1.0).abs();
            if err > 1e-12 {
                return Err(format!("fixture {idx}, beta {beta}: Boltzmann mass off by {err:e}"));
            }
            worst_boltzmann = worst_boltzmann.max(err);
            if beta == 0.0 {
                let p = 1.0 / (1u64 << n) as f64;
                if d.probabilities.iter().any(|&q| q != p) {
                    return Err(format!("fixture {idx}: beta = 0 is not exactly uniform"));
                }
            }
        }
        let vig = build_vig(inst).map_err(|e| e.to_string())?;
        let c = triangulate(&vig, &Heuristic::MinFill).map_err(|e| e.to_string())?;
        let jt = junction_tree(&c).map_err(|e| e.to_string())?;
        let models = [
            factorization_from_jt(&jt, 0).map_err(|e| e.to_string())?,
            Factorization::univariate(n),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(idx as u64);
        let sols: Vec<Solution> = (0..37).map(|_| Solution::random(n, &mut rng)).collect();
        let pop = Population::new(sols, vec![0.0; 37], 0).map_err(|e| e.to_string())?;
        for fz in &models {
            for smoothing in [0.0, 1.0] {
                let params = estimate(fz, &pop, smoothing).map_err(|e| e.to_string())?;
                let total: f64 = (0..1u64 << n)
                    .map(|i| model_probability(fz, &params, &Solution::from_index(i, n)).unwrap())
                    .sum();
                let err = (total - 1.0).abs();
                if err > 1e-9 {
                    return Err(format!("fixture {idx}: model mass off by {err:e}"));
                }
                worst_model = worst_model.max(err);
            }
        }
    }
    Ok(format!(
        "{} fixtures, worst Boltzmann {worst_boltzmann:.1e}, worst model {worst_model:.1e}, beta = 0 uniform",
        fixtures.len()
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let instance = dir.path().join("example.adf");
    let gen = graybox(&["gen", "--paper-example", "--out", instance.to_str().unwrap()]);
    assert!(gen.status.success(), "gen --paper-example failed");
    let replication = dir.path().join("replication");

    let criteria: Vec<(&str, Check)> = vec![
        ("1 table replication", Box::new(|| table_replication(&replication))),
        ("2 deception findings", Box::new(|| deception_findings(&instance))),
        ("3 factorization derivation", Box::new(factorization_derivation)),
        ("4 tree-width properties", Box::new(treewidth_properties)),
        ("5 FDA success", Box::new(|| fda_success(&instance))),
        ("6 delta-evaluation oracle", Box::new(delta_oracle)),
        ("7 pair restriction", Box::new(pair_restriction)),
        ("8 probability invariants", Box::new(probability_invariants)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
