//! Finite sample sets standing in for the feasible region.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::num;

/// Upper limit on generated points, to keep grid descriptors from exploding.
pub const MAX_POINTS: usize = 5_000_000;

/// How a sample set is generated. Regenerating from the same spec always
/// yields the same points in the same order.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpec {
    /// Tensor grid with `steps` intervals per axis (`steps + 1` points).
    /// A single bound pair is broadcast to every axis. Ordering is
    /// lexicographic with `x1` outermost.
    Grid { bounds: Vec<(f64, f64)>, steps: usize },
    /// `count` uniform points in the box, from a seeded ChaCha8 stream.
    Random { bounds: Vec<(f64, f64)>, count: usize, seed: u64 },
    /// Points read from a text file, one per line.
    File { path: PathBuf },
    /// Points given directly.
    Explicit { points: Vec<Vec<f64>> },
}

impl SampleSpec {
    /// Parses the descriptor syntax shared by problem files and the CLI:
    /// `grid(lo..hi, steps)`, `grid(lo..hi, lo..hi, steps)`,
    /// `random(lo..hi, count, seed)`, `file(path)`, or the short CLI forms
    /// `grid:lo,hi,steps`, `random:lo,hi,count,seed`, `file:path`.
    pub fn parse(src: &str) -> Result<SampleSpec> {
        let s = src.trim();
        let bad = |msg: &str| Error::InvalidArgument(format!("sample descriptor `{s}`: {msg}"));
        if let Some(rest) = s.strip_prefix("file:") {
            return Ok(SampleSpec::File { path: PathBuf::from(rest.trim()) });
        }
        if let Some(rest) = s.strip_prefix("grid:") {
            let v = parse_numbers(rest).ok_or_else(|| bad("expected lo,hi,steps"))?;
            if v.len() != 3 {
                return Err(bad("expected lo,hi,steps"));
            }
            return grid_spec(vec![(v[0], v[1])], v[2]).map_err(|m| bad(&m));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let v = parse_numbers(rest).ok_or_else(|| bad("expected lo,hi,count,seed"))?;
            if v.len() != 4 {
                return Err(bad("expected lo,hi,count,seed"));
            }
            return random_spec(vec![(v[0], v[1])], v[2], v[3]).map_err(|m| bad(&m));
        }
        let (head, body) = s.split_once('(').ok_or_else(|| bad("expected grid(...), random(...) or file(...)"))?;
        let body = body.trim_end().strip_suffix(')').ok_or_else(|| bad("missing closing parenthesis"))?;
        match head.trim() {
            "file" => Ok(SampleSpec::File { path: PathBuf::from(body.trim().trim_matches('"')) }),
            "grid" | "random" => {
                let parts: Vec<&str> = body.split(',').map(str::trim).collect();
                let mut bounds = Vec::new();
                let mut scalars = Vec::new();
                for part in parts {
                    if let Some(range) = parse_range(part) {
                        if !scalars.is_empty() {
                            return Err(bad("ranges must come before counts"));
                        }
                        bounds.push(range);
                    } else {
                        scalars.push(part.parse::<f64>().map_err(|_| bad(&format!("cannot read `{part}`")))?);
                    }
                }
                if bounds.is_empty() {
                    return Err(bad("expected at least one lo..hi range"));
                }
                if head.trim() == "grid" {
                    if scalars.len() != 1 {
                        return Err(bad("grid takes ranges followed by a step count"));
                    }
                    grid_spec(bounds, scalars[0]).map_err(|m| bad(&m))
                } else {
                    if scalars.len() != 2 {
                        return Err(bad("random takes ranges followed by count and seed"));
                    }
                    random_spec(bounds, scalars[0], scalars[1]).map_err(|m| bad(&m))
                }
            }
            other => Err(bad(&format!("unknown generator `{other}`"))),
        }
    }

    /// Resolves relative file paths against `base`.
    pub fn rebase(self, base: &Path) -> SampleSpec {
        match self {
            SampleSpec::File { path } if path.is_relative() => SampleSpec::File { path: base.join(path) },
            other => other,
        }
    }
}

fn parse_numbers(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().ok()).collect()
}

fn parse_range(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once("..").or_else(|| s.split_once('…'))?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn as_count(v: f64, what: &str) -> std::result::Result<usize, String> {
    if v >= 0.0 && v.fract() == 0.0 && v <= MAX_POINTS as f64 {
        Ok(v as usize)
    } else {
        Err(format!("{what} must be a nonnegative integer"))
    }
}

fn check_bounds(bounds: &[(f64, f64)]) -> std::result::Result<(), String> {
    for (lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("bad range {lo}..{hi}"));
        }
    }
    Ok(())
}

fn grid_spec(bounds: Vec<(f64, f64)>, steps: f64) -> std::result::Result<SampleSpec, String> {
    check_bounds(&bounds)?;
    let steps = as_count(steps, "steps")?;
    if steps == 0 {
        return Err("steps must be positive".into());
    }
    Ok(SampleSpec::Grid { bounds, steps })
}

fn random_spec(bounds: Vec<(f64, f64)>, count: f64, seed: f64) -> std::result::Result<SampleSpec, String> {
    check_bounds(&bounds)?;
    let count = as_count(count, "count")?;
    let seed = as_count(seed, "seed").map_err(|_| "seed must be a nonnegative integer".to_string())? as u64;
    Ok(SampleSpec::Random { bounds, count, seed })
}

fn fmt_bounds(bounds: &[(f64, f64)]) -> String {
    bounds.iter().map(|(a, b)| format!("{}..{}", num(*a), num(*b))).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for SampleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleSpec::Grid { bounds, steps } => write!(f, "grid({}, {steps})", fmt_bounds(bounds)),
            SampleSpec::Random { bounds, count, seed } => write!(f, "random({}, {count}, {seed})", fmt_bounds(bounds)),
            SampleSpec::File { path } => write!(f, "file({})", path.display()),
            SampleSpec::Explicit { points } => write!(f, "explicit({} points)", points.len()),
        }
    }
}

/// A materialized sample set and the descriptor it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    spec: SampleSpec,
    points: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn generate(spec: SampleSpec, n: usize) -> Result<SampleSet> {
        let axis_bounds = |bounds: &[(f64, f64)]| -> Result<Vec<(f64, f64)>> {
            match bounds.len() {
                1 => Ok(vec![bounds[0]; n]),
                k if k == n => Ok(bounds.to_vec()),
                k => Err(Error::DimensionMismatch { expected: n, got: k }),
            }
        };
        let points = match &spec {
            SampleSpec::Grid { bounds, steps } => {
                let b = axis_bounds(bounds)?;
                let per_axis = steps + 1;
                let total = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(per_axis)).filter(|t| *t <= MAX_POINTS);
                let total = total.ok_or_else(|| {
                    Error::InvalidArgument(format!("grid with {per_axis}^{n} points exceeds {MAX_POINTS}"))
                })?;
                let axes: Vec<Vec<f64>> = b
                    .iter()
                    .map(|(lo, hi)| {
                        (0..=*steps)
                            .map(|i| {
                                let t = i as f64 / *steps as f64;
                                if i == *steps {
                                    *hi
                                } else {
                                    lo * (1.0 - t) + hi * t
                                }
                            })
                            .collect()
                    })
                    .collect();
                let mut pts = Vec::with_capacity(total);
                for mut idx in 0..total {
                    let mut p = vec![0.0; n];
                    for d in (0..n).rev() {
                        p[d] = axes[d][idx % per_axis];
                        idx /= per_axis;
                    }
                    pts.push(p);
                }
                pts
            }
            SampleSpec::Random { bounds, count, seed } => {
                let b = axis_bounds(bounds)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| b.iter().map(|(lo, hi)| if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }).collect())
                    .collect()
            }
            SampleSpec::File { path } => read_points(&std::fs::read_to_string(path)?, n)?,
            SampleSpec::Explicit { points } => {
                for p in points {
                    if p.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
                    }
                }
                points.clone()
            }
        };
        Ok(SampleSet { spec, points })
    }

    pub fn explicit(points: Vec<Vec<f64>>, n: usize) -> Result<SampleSet> {
        SampleSet::generate(SampleSpec::Explicit { points }, n)
    }

    pub fn grid(lo: f64, hi: f64, steps: usize, n: usize) -> Result<SampleSet> {
        let spec = grid_spec(vec![(lo, hi)], steps as f64).map_err(Error::InvalidArgument)?;
        SampleSet::generate(spec, n)
    }

    pub fn spec(&self) -> &SampleSpec {
        &self.spec
    }

    pub fn descriptor(&self) -> String {
        self.spec.to_string()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Reads one point per line, comma- or whitespace-separated. Blank lines and
/// `#` comments are skipped; a non-numeric first line is taken as a header.
fn read_points(text: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let mut pts = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        let parsed: Option<Vec<f64>> = fields.iter().map(|t| t.parse().ok()).collect();
        match parsed {
            Some(p) => {
                if p.len() != n {
                    return Err(Error::Format { line: i + 1, msg: format!("expected {n} coordinates, found {}", p.len()) });
                }
                pts.push(p);
                seen_data = true;
            }
            None if !seen_data && pts.is_empty() => {}
            None => return Err(Error::Format { line: i + 1, msg: format!("cannot read point `{line}`") }),
        }
    }
    Ok(pts)
}
