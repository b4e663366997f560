//! End-to-end replication of the ten-variable landscape analysis: marginal
//! frequency tables for contiguous windows of order 3, 4 and 5 and for the
//! junction-tree cliques, the factorization read off the chordal completion,
//! and the deceptive-window summary. Computed tables are compared value by
//! value against golden copies shipped in `fixtures/`.

use serde::Serialize;

use crate::adf::{AdfInstance, Solution};
use crate::chordal::{triangulate, Heuristic};
use crate::error::{Error, Result};
use crate::graph::build_vig;
use crate::junction::{factorization_from_jt, junction_tree, Factorization};
use crate::marginal::{deception_report, enumerate_marginals, tables_to_tsv, StatisticKind};
use crate::worked_example;

/// Golden table documents keyed by table name.
#[derive(Clone, Debug)]
pub struct GoldenTables {
    pub tables: Vec<(String, String)>,
}

impl GoldenTables {
    pub fn embedded() -> Self {
        GoldenTables {
            tables: vec![
                ("table4".into(), include_str!("../fixtures/table4.tsv").into()),
                ("table5".into(), include_str!("../fixtures/table5.tsv").into()),
                ("table6".into(), include_str!("../fixtures/table6.tsv").into()),
                ("table7".into(), include_str!("../fixtures/table7.tsv").into()),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, d)| d.as_str())
    }
}

/// Factorization derived from the reference chordal completion.
pub const EXPECTED_FACTORIZATION: &str =
    "p(x0x1x2x8x9)·p(x3|x1x2x8x9)·p(x4|x2x3x8x9)·p(x5|x3x4x8x9)·p(x6|x4x5x8x9)·p(x7|x5x6x8x9)";

/// Deceptive window labels for orders 3, 4, 5 and for the clique scopes.
pub const EXPECTED_DECEPTIVE: [(&str, &[usize]); 4] = [
    ("order-3", &[3, 8, 9]),
    ("order-4", &[10]),
    ("order-5", &[9]),
    ("cliques", &[]),
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub config: String,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableComparison {
    pub name: String,
    pub values_compared: usize,
    pub mismatches: Vec<Mismatch>,
    /// Layout problems (missing rows or columns, bad header).
    pub layout_errors: Vec<String>,
}

impl TableComparison {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.layout_errors.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeceptionSummary {
    pub name: String,
    pub scopes: Vec<Vec<usize>>,
    pub deceptive: Vec<usize>,
    pub expected: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Replication {
    /// `(name, TSV document)` for tables 4 to 7.
    pub tables: Vec<(String, String)>,
    pub factorization: Factorization,
    pub factorization_text: String,
    pub deception: Vec<DeceptionSummary>,
    pub comparisons: Vec<TableComparison>,
}

impl Replication {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(TableComparison::passed)
            && self.factorization_text == EXPECTED_FACTORIZATION
            && self.deception.iter().all(|d| d.deceptive == d.expected)
    }

    /// Human-readable pass/fail report with a diff of every mismatch.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for c in &self.comparisons {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {}: {} values compared, {} mismatches\n",
                c.name,
                c.values_compared,
                c.mismatches.len()
            ));
            for e in &c.layout_errors {
                out.push_str(&format!("  layout: {e}\n"));
            }
            for m in &c.mismatches {
                out.push_str(&format!(
                    "  {} column {}: expected {} got {}\n",
                    m.config, m.column, m.expected, m.actual
                ));
            }
        }
        let fz_status = if self.factorization_text == EXPECTED_FACTORIZATION {
            "PASS"
        } else {
            "FAIL"
        };
        out.push_str(&format!("{fz_status} factorization: {}\n", self.factorization_text));
        for d in &self.deception {
            let status = if d.deceptive == d.expected { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} deceptive {}: {:?} (expected {:?})\n",
                d.name, d.deceptive, d.expected
            ));
        }
        out
    }
}

/// Scopes of the replicated tables: windows of order 3, 4, 5 and the cliques.
pub fn table_scopes() -> Vec<(String, Vec<Vec<usize>>, Vec<String>)> {
    let window_labels: Vec<String> = (1..=10).map(|i| i.to_string()).collect();
    let mut out: Vec<(String, Vec<Vec<usize>>, Vec<String>)> = (3..=5)
        .map(|order| {
            (
                format!("table{}", order + 1),
                worked_example::hyperplane_windows(worked_example::N, order),
                window_labels.clone(),
            )
        })
        .collect();
    let cliques: Vec<Vec<usize>> = worked_example::CLIQUES.iter().map(|c| c.to_vec()).collect();
    let labels = cliques.iter().map(|c| crate::marginal::scope_label(c)).collect();
    out.push(("table7".into(), cliques, labels));
    out
}

/// Derives the factorization from the interaction graph and the elimination
/// order that produces the reference fill edges.
pub fn derive_factorization(instance: &AdfInstance) -> Result<Factorization> {
    let vig = build_vig(instance)?;
    let completion = triangulate(&vig, &Heuristic::GivenOrder(worked_example::elimination_order()))?;
    let jt = junction_tree(&completion)?;
    let root = jt
        .clique_index(&worked_example::CLIQUES[0])
        .ok_or_else(|| Error::Structural("root clique {0,1,2,8,9} missing from the junction tree".into()))?;
    factorization_from_jt(&jt, root)
}

pub fn replicate(golden: &GoldenTables, limit: usize) -> Result<Replication> {
    let instance = worked_example::instance();
    let mut tables = Vec::new();
    let mut comparisons = Vec::new();
    let mut deception = Vec::new();
    let optimum = Solution::ones(worked_example::N);

    for ((name, scopes, labels), (dname, expected)) in table_scopes().into_iter().zip(EXPECTED_DECEPTIVE) {
        let computed = enumerate_marginals(&instance, &scopes, StatisticKind::FitnessSum, limit)?;
        let tsv = tables_to_tsv(&computed, &labels);
        let comparison = match golden.get(&name) {
            Some(doc) => compare_tsv(&name, doc, &tsv),
            None => TableComparison {
                name: name.clone(),
                values_compared: 0,
                mismatches: vec![],
                layout_errors: vec!["golden table missing".into()],
            },
        };
        comparisons.push(comparison);
        tables.push((name, tsv));
        let report = deception_report(&instance, &scopes, &optimum, StatisticKind::FitnessSum, limit)?;
        deception.push(DeceptionSummary {
            name: dname.into(),
            scopes,
            deceptive: report.deceptive_labels(),
            expected: expected.to_vec(),
        });
    }

    let factorization = derive_factorization(&instance)?;
    Ok(Replication {
        tables,
        factorization_text: factorization.to_string(),
        factorization,
        deception,
        comparisons,
    })
}

fn parse_grid(doc: &str) -> (Vec<String>, Vec<(String, Vec<String>)>) {
    let mut lines = doc.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .map(|h| h.split('\t').map(|s| s.trim().to_owned()).collect())
        .unwrap_or_default();
    let rows = lines
        .map(|l| {
            let mut cells = l.split('\t').map(|s| s.trim().to_owned());
            let key = cells.next().unwrap_or_default();
            (key, cells.collect())
        })
        .collect();
    (header, rows)
}

/// Cell-by-cell numeric comparison of two TSV tables with the same layout.
pub fn compare_tsv(name: &str, expected: &str, actual: &str) -> TableComparison {
    let (eh, erows) = parse_grid(expected);
    let (ah, arows) = parse_grid(actual);
    let mut layout_errors = Vec::new();
    let mut mismatches = Vec::new();
    let mut values_compared = 0;
    if eh != ah {
        layout_errors.push(format!("header differs: expected {eh:?}, got {ah:?}"));
    }
    if erows.len() != arows.len() {
        layout_errors.push(format!("expected {} rows, got {}", erows.len(), arows.len()));
    }
    for ((ekey, evals), (akey, avals)) in erows.iter().zip(&arows) {
        if ekey != akey {
            layout_errors.push(format!("row key differs: expected {ekey}, got {akey}"));
            continue;
        }
        if evals.len() != avals.len() {
            layout_errors.push(format!(
                "row {ekey}: expected {} values, got {}",
                evals.len(),
                avals.len()
            ));
        }
        for (col, (e, a)) in evals.iter().zip(avals).enumerate() {
            values_compared += 1;
            let same = match (e.parse::<f64>(), a.parse::<f64>()) {
                (Ok(x), Ok(y)) => x == y,
                _ => false,
            };
            if !same {
                mismatches.push(Mismatch {
                    config: ekey.clone(),
                    column: eh.get(col + 1).cloned().unwrap_or_else(|| (col + 1).to_string()),
                    expected: e.clone(),
                    actual: a.clone(),
                });
            }
        }
    }
    TableComparison {
        name: name.into(),
        values_compared,
        mismatches,
        layout_errors,
    }
}
