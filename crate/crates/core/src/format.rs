//! Instance documents.
//!
//! Text form, one directive per line:
//!
//! ```text
//! adf <n> <M>
//! wgb <structure> <subfunctions>      (optional; white | gray | black)
//! name <free text>                    (optional)
//! sub <k> <idx_1 .. idx_k> <v_0 .. v_{2^k - 1}>   (M times)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. The JSON mirror has
//! the fields `n`, `subfunctions` (`scope`, `codomain`), `wgb` and `name`;
//! [`parse`] accepts either form.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::adf::{AdfInstance, Subfunction, Visibility, Wgb};
use crate::error::{Error, Result};

pub fn serialize(instance: &AdfInstance) -> String {
    let mut out = String::new();
    writeln!(out, "adf {} {}", instance.n(), instance.num_subfunctions()).unwrap();
    let wgb = instance.wgb();
    writeln!(out, "wgb {} {}", wgb.structure, wgb.subfunctions).unwrap();
    if !instance.name().is_empty() {
        writeln!(out, "name {}", instance.name()).unwrap();
    }
    for sub in instance.subfunctions() {
        write!(out, "sub {}", sub.order()).unwrap();
        for v in sub.scope() {
            write!(out, " {v}").unwrap();
        }
        for v in sub.codomain() {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn serialize_json(instance: &AdfInstance) -> String {
    serde_json::to_string_pretty(instance).expect("instance is always serializable")
}

/// Parses either the text or the JSON form.
pub fn parse(document: &str) -> Result<AdfInstance> {
    if document.trim_start().starts_with('{') {
        parse_json(document)
    } else {
        parse_text(document)
    }
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, token: Option<&str>) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, format!("missing field {field}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {field} {token:?}")))
}

pub fn parse_text(document: &str) -> Result<AdfInstance> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut wgb = Wgb::default();
    let mut name = String::new();
    let mut subfunctions = Vec::new();

    for (idx, raw) in document.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let directive = tokens.next().unwrap_or_default();
        match directive {
            "adf" => {
                if header.is_some() {
                    return Err(Error::parse(line_no, "duplicate adf header"));
                }
                let n: usize = parse_field(line_no, "n", tokens.next())?;
                let m: usize = parse_field(line_no, "M", tokens.next())?;
                if n == 0 {
                    return Err(Error::parse(line_no, "n must be positive"));
                }
                header = Some((n, m, line_no));
            }
            "wgb" => {
                let s: Visibility = parse_field(line_no, "structure visibility", tokens.next())?;
                let f: Visibility = parse_field(line_no, "subfunction visibility", tokens.next())?;
                wgb = Wgb {
                    structure: s,
                    subfunctions: f,
                };
            }
            "name" => {
                name = line["name".len()..].trim().to_owned();
                continue;
            }
            "sub" => {
                let (n, _, _) = header.ok_or_else(|| Error::parse(line_no, "sub before adf header"))?;
                let k: usize = parse_field(line_no, "k", tokens.next())?;
                if k == 0 || k > 30 {
                    return Err(Error::parse(line_no, format!("scope size {k} out of range")));
                }
                let scope = (0..k)
                    .map(|i| {
                        let v: usize = parse_field(line_no, &format!("scope index {}", i + 1), tokens.next())?;
                        if v >= n {
                            return Err(Error::parse(
                                line_no,
                                format!("scope index {v} out of range for n = {n}"),
                            ));
                        }
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let codomain = tokens
                    .by_ref()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| Error::parse(line_no, format!("invalid codomain value {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                if codomain.len() != 1 << k {
                    return Err(Error::parse(
                        line_no,
                        format!(
                            "expected {} codomain values for k = {k}, found {}",
                            1usize << k,
                            codomain.len()
                        ),
                    ));
                }
                let sub = Subfunction::new(scope, codomain).map_err(|e| Error::parse(line_no, e.to_string()))?;
                subfunctions.push(sub);
                continue;
            }
            other => return Err(Error::parse(line_no, format!("unknown directive {other:?}"))),
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::parse(line_no, format!("unexpected trailing field {extra:?}")));
        }
    }

    let (n, m, header_line) = header.ok_or_else(|| Error::parse(1, "missing adf header"))?;
    if subfunctions.len() != m {
        return Err(Error::parse(
            header_line,
            format!("header declares {m} subfunctions, found {}", subfunctions.len()),
        ));
    }
    AdfInstance::with_metadata(n, subfunctions, wgb, name).map_err(|e| Error::parse(header_line, e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSub {
    scope: Vec<usize>,
    codomain: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    subfunctions: Vec<RawSub>,
    #[serde(default)]
    k_max: Option<usize>,
    #[serde(default)]
    wgb: Option<Wgb>,
    #[serde(default)]
    name: String,
}

pub fn parse_json(document: &str) -> Result<AdfInstance> {
    let raw: RawInstance = serde_json::from_str(document).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let subfunctions = raw
        .subfunctions
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            if let Some(&bad) = s.scope.iter().find(|&&v| v >= raw.n) {
                return Err(Error::parse(
                    0,
                    format!("subfunctions[{i}]: scope index {bad} out of range"),
                ));
            }
            Subfunction::new(s.scope, s.codomain).map_err(|e| Error::parse(0, format!("subfunctions[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = AdfInstance::with_metadata(raw.n, subfunctions, raw.wgb.unwrap_or_default(), raw.name)
        .map_err(|e| Error::parse(0, e.to_string()))?;
    if let Some(k) = raw.k_max {
        if k != inst.k_max() {
            return Err(Error::parse(
                0,
                format!("k_max = {k} but largest scope has size {}", inst.k_max()),
            ));
        }
    }
    Ok(inst)
}
