//! The INI-like problem file format.
//!
//! ```text
//! [problem]
//! n = 2, name = "example"
//! [objective]
//! lower = "x1^2 + (x1*x2 - 1)^2"
//! upper = "2*x1^2 + (x1*x2 - 1)^2"
//! [constraints]
//! g1 = "1 - x1"
//! [epsilon]
//! lo = 0.1, hi = 0.1
//! [samples]
//! grid(-3..3, 60)
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use super::{Epsilon, Problem, SampleSet, SampleSpec};
use crate::error::{Error, Result};
use crate::expr::Expr;

/// A loaded problem plus the optional tolerance and sample set it declares.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: Problem,
    pub epsilon: Option<Epsilon>,
    pub samples: Option<SampleSet>,
    pub warnings: Vec<String>,
}

/// A value with the file position of its first character.
#[derive(Debug, Clone)]
struct Value {
    text: String,
    line: usize,
    col: usize,
}

#[derive(Debug, Default)]
struct Sections {
    entries: BTreeMap<String, BTreeMap<String, Value>>,
    samples: Option<Value>,
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<ProblemFile> {
        let text = std::fs::read_to_string(path)?;
        ProblemFile::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses file contents; relative sample paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<ProblemFile> {
        let sections = split_sections(text)?;
        let get = |sec: &str, key: &str| sections.entries.get(sec).and_then(|m| m.get(key));
        let need = |sec: &str, key: &str| {
            get(sec, key).ok_or_else(|| Error::Format { line: 0, msg: format!("missing `{key}` in [{sec}]") })
        };

        let n_val = need("problem", "n")?;
        let n: usize = n_val
            .text
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Format { line: n_val.line, msg: format!("n must be a positive integer, got `{}`", n_val.text) })?;
        let name = get("problem", "name").map(|v| v.text.clone()).unwrap_or_else(|| "unnamed".into());

        let lower = parse_expr(need("objective", "lower")?, n)?;
        let upper = parse_expr(need("objective", "upper")?, n)?;

        let mut indexed = Vec::new();
        if let Some(cons) = sections.entries.get("constraints") {
            for (key, v) in cons {
                let idx: usize = key
                    .strip_prefix('g')
                    .and_then(|s| s.parse().ok())
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| Error::Format { line: v.line, msg: format!("constraint keys must be g1, g2, ...; got `{key}`") })?;
                indexed.push((idx, parse_expr(v, n)?));
            }
        }
        indexed.sort_by_key(|(k, _)| *k);
        for (pos, (k, _)) in indexed.iter().enumerate() {
            if *k != pos + 1 {
                return Err(Error::Format { line: 0, msg: format!("constraints must be numbered g1..g{} without gaps", indexed.len()) });
            }
        }
        let constraints = indexed.into_iter().map(|(_, e)| e).collect();
        let problem = Problem::new(name, n, lower, upper, constraints)?;

        let epsilon = match (get("epsilon", "lo"), get("epsilon", "hi")) {
            (None, None) => None,
            (Some(lo), Some(hi)) => {
                let num = |v: &Value| {
                    v.text.parse::<f64>().map_err(|_| Error::Format { line: v.line, msg: format!("cannot read number `{}`", v.text) })
                };
                Some(Epsilon::new(num(lo)?, num(hi)?)?)
            }
            (Some(v), None) | (None, Some(v)) => {
                return Err(Error::Format { line: v.line, msg: "[epsilon] needs both lo and hi".into() })
            }
        };

        let samples = match &sections.samples {
            None => None,
            Some(v) => {
                let spec = SampleSpec::parse(&v.text)
                    .map_err(|e| Error::Format { line: v.line, msg: e.to_string() })?
                    .rebase(base);
                Some(SampleSet::generate(spec, n)?)
            }
        };

        let mut warnings = Vec::new();
        match &samples {
            Some(s) => problem.validate_order(s)?,
            None => warnings.push("no sample set declared: fL <= fU is assumed, not validated".into()),
        }
        Ok(ProblemFile { problem, epsilon, samples, warnings })
    }
}

fn parse_expr(v: &Value, n: usize) -> Result<Expr> {
    Expr::parse(&v.text, n).map_err(|e| match e {
        Error::Parse { line, col, msg } => {
            let col = if line == 1 { v.col + col - 1 } else { col };
            Error::Parse { line: v.line + line - 1, col, msg }
        }
        other => other,
    })
}

fn split_sections(text: &str) -> Result<Sections> {
    let mut out = Sections::default();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| Error::Format { line: line_no, msg: "unterminated section header".into() })?
                .trim()
                .to_string();
            if !matches!(name.as_str(), "problem" | "objective" | "constraints" | "epsilon" | "samples") {
                return Err(Error::Format { line: line_no, msg: format!("unknown section [{name}]") });
            }
            current = Some(name);
            continue;
        }
        let section = current
            .clone()
            .ok_or_else(|| Error::Format { line: line_no, msg: "content before the first section header".into() })?;
        if section == "samples" {
            if out.samples.is_some() {
                return Err(Error::Format { line: line_no, msg: "only one sample descriptor allowed".into() });
            }
            let text = match trimmed.split_once('=') {
                Some((k, v)) if k.trim() == "spec" => unquote(v.trim()).to_string(),
                _ => trimmed.to_string(),
            };
            out.samples = Some(Value { text, line: line_no, col: 1 });
            continue;
        }
        let map = out.entries.entry(section).or_default();
        for (start, field) in split_fields(line) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Format { line: line_no, msg: format!("expected key = value, got `{}`", field.trim()) })?;
            let key = key.trim().to_string();
            let lead = value.len() - value.trim_start().len();
            let v = value.trim();
            let (text, offset) = if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
                (v[1..v.len() - 1].to_string(), 1)
            } else if v.starts_with('"') {
                return Err(Error::Format { line: line_no, msg: format!("unterminated string for `{key}`") });
            } else {
                (v.to_string(), 0)
            };
            let byte_pos = start + key_len(field) + lead + offset;
            let col = line[..byte_pos].chars().count() + 1;
            if map.insert(key.clone(), Value { text, line: line_no, col }).is_some() {
                return Err(Error::Format { line: line_no, msg: format!("duplicate key `{key}`") });
            }
        }
    }
    Ok(out)
}

/// Byte length of `key =` including the equals sign.
fn key_len(field: &str) -> usize {
    field.find('=').map_or(0, |i| i + 1)
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"').and_then(|t| t.strip_suffix('"')).unwrap_or(s)
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '#' | ';' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits `a = 1, b = "max(x1, x2)"` on commas outside quotes and parens,
/// returning each field with its byte offset in the line.
fn split_fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let (mut depth, mut in_str, mut start) = (0i32, false, 0);
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_str = !in_str,
            '(' if !in_str => depth += 1,
            ')' if !in_str => depth -= 1,
            ',' if !in_str && depth == 0 => {
                out.push((start, &line[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    if !line[start..].trim().is_empty() {
        out.push((start, &line[start..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = r#"
# interval objective with a product term
[problem]
n = 2, name = "ex"

[objective]
lower = "x1^2 + (x1*x2 - 1)^2"
upper = "2*x1^2 + (x1*x2 - 1)^2"

[epsilon]
lo = 0.1, hi = 0.1

[samples]
grid(-2..2, 4)
"#;

    #[test]
    fn parses_full_file() {
        let pf = ProblemFile::parse(EX, Path::new(".")).unwrap();
        assert_eq!(pf.problem.dim(), 2);
        assert_eq!(pf.problem.name, "ex");
        assert_eq!(pf.epsilon.unwrap(), Epsilon::new(0.1, 0.1).unwrap());
        assert_eq!(pf.samples.as_ref().unwrap().len(), 25);
        assert!(pf.warnings.is_empty());
        assert_eq!(pf.problem.interval_value(&[1.0, 1.0]).unwrap().hi(), 2.0);
    }

    #[test]
    fn constraints_sorted_and_quoted_commas() {
        let src = "[problem]\nn=1\n[objective]\nlower=\"x1^2\", upper=\"max(x1^2, 2*x1^2)\"\n[constraints]\ng2 = \"x1 - 3\"\ng1 = \"1 - x1\"\n";
        let pf = ProblemFile::parse(src, Path::new(".")).unwrap();
        assert_eq!(pf.problem.num_constraints(), 2);
        assert_eq!(pf.problem.constraints()[0].value(&[0.0]), 1.0);
        assert_eq!(pf.warnings.len(), 1);
    }

    #[test]
    fn expression_error_maps_to_file_position() {
        let src = "[problem]\nn=1\n[objective]\nlower = \"x1 + $\"\nupper = \"x1\"\n";
        match ProblemFile::parse(src, Path::new(".")) {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(col, 15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn format_errors() {
        let missing = "[problem]\nn=1\n[objective]\nlower=\"x1\"\n";
        assert!(matches!(ProblemFile::parse(missing, Path::new(".")), Err(Error::Format { .. })));
        let gap = "[problem]\nn=1\n[objective]\nlower=\"x1\"\nupper=\"x1\"\n[constraints]\ng2=\"x1\"\n";
        assert!(matches!(ProblemFile::parse(gap, Path::new(".")), Err(Error::Format { .. })));
        let unknown = "[problme]\n";
        assert!(matches!(ProblemFile::parse(unknown, Path::new(".")), Err(Error::Format { line: 1, .. })));
        let order = "[problem]\nn=1\n[objective]\nlower=\"x1\"\nupper=\"0\"\n[samples]\ngrid(-1..1, 2)\n";
        assert!(matches!(ProblemFile::parse(order, Path::new(".")), Err(Error::LowerExceedsUpper { .. })));
        let eps = "[problem]\nn=1\n[objective]\nlower=\"x1\"\nupper=\"x1\"\n[epsilon]\nlo=2, hi=1\n";
        assert!(matches!(ProblemFile::parse(eps, Path::new(".")), Err(Error::InvalidEpsilon { .. })));
    }
}
