//! The `ivopt` command line.
//!
//! Every command loads a problem file, runs one library operation and
//! returns a plain-text report together with an exit code:
//! 0 pass, 1 refuted or not certified, 2 input error, 3 internal
//! disagreement between two routes that must agree.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::certify::{
    certify_on_set_with_tol, certify_via_biobjective_with_tol, lemma_x_set_check, refute_search, Certificate,
    SolutionKind, XSetOutcome, TOL_VIOLATE,
};
use crate::error::{Error, Result};
use crate::existence::{descend_to_elu, ekeland_quasi, lu_bounded_below, DescentTrace};
use crate::kkt::{
    quasi_kkt_residual, quasi_sufficiency_check, search_elu_witness, search_weak_elu_witness, verify_elu_kkt,
    verify_weak_elu_kkt, KktReport,
};
use crate::problem::{Epsilon, Problem, ProblemFile, SampleSet, SampleSpec};
use crate::report::{num, point};
use crate::scalarize::{bridge_to_weak_elu, even_weights, frontier_csv, frontier_sweep, weighted_sum_solve};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;

/// Candidates above this count need an explicit `--point` for `oracle`.
const ORACLE_MAX_CANDIDATES: usize = 5000;

#[derive(Debug, Parser)]
#[command(name = "ivopt", version, about = "Approximate LU-solutions of interval-valued optimization problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a point against one solution concept on the sample set.
    Check(CheckArgs),
    /// Descend from a start point to an E-LU solution of the sample set.
    Descend(StartArgs),
    /// Build an E-quasi-LU solution with the Ekeland-type construction.
    Ekeland(StartArgs),
    /// Search and verify KKT witnesses at a point.
    Kkt(KktArgs),
    /// Solve one weighted-sum scalarization and bridge it to E.
    Scalarize(ScalarizeArgs),
    /// Sweep weighted sums and write `muL,x..,fL,fU,gap` CSV.
    Frontier(FrontierArgs),
    /// Exhaustive membership table for all six solution concepts.
    Oracle(OracleArgs),
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Problem file.
    #[arg(long, value_name = "FILE")]
    pub problem: PathBuf,
    /// Tolerance interval, overriding the file's [epsilon].
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    pub eps: Option<String>,
    /// Sample descriptor, overriding the file's [samples].
    #[arg(long, value_name = "DESC")]
    pub samples: Option<String>,
    /// Seed for every randomized search.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Strictness tolerance of the violation tests.
    #[arg(long, default_value_t = TOL_VIOLATE)]
    pub tol: f64,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Assert the closedness condition required by the E-LU KKT theorem.
    #[arg(long)]
    pub assume_cc: bool,
    /// Assert Slater's condition instead of searching for a witness.
    #[arg(long)]
    pub assume_slater: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Lu,
    Wlu,
    Elu,
    Welu,
    Eq,
    Weq,
}

impl From<KindArg> for SolutionKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lu => SolutionKind::LU,
            KindArg::Wlu => SolutionKind::WeakLU,
            KindArg::Elu => SolutionKind::ELU,
            KindArg::Welu => SolutionKind::WeakELU,
            KindArg::Eq => SolutionKind::EQuasiLU,
            KindArg::Weq => SolutionKind::WeakEQuasiLU,
        }
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Candidate point.
    #[arg(long, value_name = "V1,V2,..", allow_hyphen_values = true, required_unless_present = "batch")]
    pub point: Option<String>,
    /// Certify every row of a CSV written by `frontier`.
    #[arg(long, value_name = "CSV", conflicts_with = "point")]
    pub batch: Option<PathBuf>,
    /// Budget of a seeded off-sample refutation search after a pass.
    #[arg(long, default_value_t = 0)]
    pub search: usize,
}

#[derive(Debug, Args)]
pub struct StartArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    /// Start point.
    #[arg(long, value_name = "V1,V2,..", allow_hyphen_values = true)]
    pub point: String,
    /// Also write the trace as CSV.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    All,
    Welu,
    Elu,
    Quasi,
}

#[derive(Debug, Args)]
pub struct KktArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    #[arg(long, value_name = "V1,V2,..", allow_hyphen_values = true)]
    pub point: String,
    #[arg(long, value_enum, default_value_t = TheoremArg::All)]
    pub theorem: TheoremArg,
    /// Grid resolution of the muL search for the weak theorem.
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
}

#[derive(Debug, Args)]
pub struct ScalarizeArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    /// Weight on the lower objective.
    #[arg(long = "mu-l", value_name = "W")]
    pub mu_l: f64,
    #[arg(long, default_value_t = 20_000)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    /// Number of weight intervals; `K` gives `K + 1` evenly spaced weights.
    #[arg(long, default_value_t = 10)]
    pub weights: usize,
    #[arg(long, default_value_t = 20_000)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub cfg: RunConfig,
    /// Single candidate; by default every feasible sample point is tested.
    #[arg(long, value_name = "V1,V2,..", allow_hyphen_values = true)]
    pub point: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code and the report; nothing is printed.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            return (code, e.to_string());
        }
    };
    execute(&cli.command)
}

/// Runs a parsed command. Reports destined for `--out` are written there and
/// the returned text is then a one-line pointer to the file.
pub fn execute(cmd: &Command) -> (i32, String) {
    let (cfg, outcome) = match cmd {
        Command::Check(a) => (&a.cfg, cmd_check(a)),
        Command::Descend(a) => (&a.cfg, cmd_descend(a, false)),
        Command::Ekeland(a) => (&a.cfg, cmd_descend(a, true)),
        Command::Kkt(a) => (&a.cfg, cmd_kkt(a)),
        Command::Scalarize(a) => (&a.cfg, cmd_scalarize(a)),
        Command::Frontier(a) => (&a.cfg, cmd_frontier(a)),
        Command::Oracle(a) => (&a.cfg, cmd_oracle(a)),
    };
    let (code, text) = match outcome {
        Ok(r) => r,
        Err(e) => return (EXIT_INPUT, format!("error: {e}\n")),
    };
    match &cfg.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => (code, format!("report written to {}\n", path.display())),
            Err(e) => (EXIT_INPUT, format!("error: cannot write {}: {e}\n", path.display())),
        },
        None => (code, text),
    }
}

/// The loaded problem with command-line overrides applied.
struct Loaded {
    problem: Problem,
    eps: Option<Epsilon>,
    samples: Option<SampleSet>,
    warnings: Vec<String>,
}

fn load(cfg: &RunConfig) -> Result<Loaded> {
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", cfg.tol)));
    }
    let file = ProblemFile::load(&cfg.problem)?;
    let eps = match &cfg.eps {
        Some(s) => {
            let v = parse_vector(s, "--eps")?;
            if v.len() != 2 {
                return Err(Error::InvalidArgument("--eps takes LO,HI".into()));
            }
            Some(Epsilon::new(v[0], v[1])?)
        }
        None => file.epsilon,
    };
    let mut warnings = file.warnings;
    let samples = match &cfg.samples {
        Some(d) => {
            let spec = SampleSpec::parse(d)?;
            let set = SampleSet::generate(spec, file.problem.dim())?;
            file.problem.validate_order(&set)?;
            warnings.retain(|w| !w.starts_with("no sample set"));
            Some(set)
        }
        None => file.samples,
    };
    Ok(Loaded { problem: file.problem, eps, samples, warnings })
}

impl Loaded {
    fn need_samples(&self) -> Result<&SampleSet> {
        self.samples.as_ref().ok_or_else(|| {
            Error::InvalidArgument("a sample set is required: add [samples] to the file or pass --samples".into())
        })
    }

    fn need_eps(&self) -> Result<Epsilon> {
        self.eps.ok_or_else(|| Error::InvalidArgument("a tolerance interval is required: add [epsilon] or pass --eps".into()))
    }

    fn header(&self, out: &mut String, command: &str) {
        let _ = writeln!(out, "== ivopt {command} ==");
        let _ = writeln!(out, "problem: {} (n = {}, m = {})", self.problem.name, self.problem.dim(), self.problem.num_constraints());
        match &self.samples {
            Some(s) => {
                let _ = writeln!(out, "SAMPLED REGION: {} with {} points; verdicts are relative to this set", s.descriptor(), s.len());
            }
            None => {
                let _ = writeln!(out, "SAMPLED REGION: none");
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
    }
}

fn parse_vector(s: &str, flag: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("{flag}: cannot read number `{}`", t.trim()))))
        .collect()
}

fn parse_point(s: &str, n: usize) -> Result<Vec<f64>> {
    let v = parse_vector(s, "--point")?;
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    Ok(v)
}

fn verdict_word(c: &Certificate) -> &'static str {
    if c.passed() {
        "PASS"
    } else {
        "REFUTED"
    }
}

fn certify_both(kind: SolutionKind, p: &Problem, x: &[f64], eps: Epsilon, s: &SampleSet, tol: f64) -> Result<(Certificate, Certificate)> {
    Ok((certify_on_set_with_tol(kind, p, x, eps, s, tol)?, certify_via_biobjective_with_tol(kind, p, x, eps, s, tol)?))
}

fn routes_agree(a: &Certificate, b: &Certificate) -> bool {
    a.verdict == b.verdict && a.refuter_index() == b.refuter_index()
}

fn cmd_check(a: &CheckArgs) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let kind: SolutionKind = a.kind.into();
    let s = l.need_samples()?;
    let mut out = String::new();
    l.header(&mut out, "check");
    if let Some(batch) = &a.batch {
        return check_batch(&l, kind, s, batch, a.cfg.tol, out);
    }
    let x = parse_point(a.point.as_deref().unwrap_or_default(), l.problem.dim())?;
    let eps = if kind.uses_eps() { l.need_eps()? } else { Epsilon::zero() };
    let (ci, cb) = certify_both(kind, &l.problem, &x, eps, s, a.cfg.tol)?;
    let _ = writeln!(out, "-- interval route --\n{ci}");
    let _ = writeln!(out, "-- biobjective route --\n{cb}");
    if !routes_agree(&ci, &cb) {
        let _ = writeln!(out, "INTERNAL ERROR: the interval and biobjective routes disagree");
        return Ok((EXIT_DISAGREE, out));
    }
    if kind == SolutionKind::ELU {
        let _ = writeln!(out, "-- X(x*, E) characterization --");
        let _ = match lemma_x_set_check(&l.problem, &x, eps, s)? {
            XSetOutcome::EmptyIntersection => writeln!(out, "X(x*, E) has no sample member"),
            XSetOutcome::EqualityHolds { members } => {
                writeln!(out, "fL + fU is constant on all {members} sample members of X(x*, E)")
            }
            XSetOutcome::EqualityFails { index, point: pt, gap } => {
                writeln!(out, "member #{index} {} has fL + fU below the level by {}", point(&pt), num(gap))
            }
        };
    }
    let mut code = if ci.passed() { EXIT_PASS } else { EXIT_REFUTED };
    if ci.passed() && a.search > 0 {
        let _ = writeln!(out, "-- off-sample search (budget {}, seed {}) --", a.search, a.cfg.seed);
        match refute_search(kind, &l.problem, &x, eps, a.search, a.cfg.seed)? {
            Some(r) => {
                let _ = writeln!(out, "refuter found off the sample: {} with f = {}", point(&r), l.problem.interval_value(&r)?);
                code = EXIT_REFUTED;
            }
            None => {
                let _ = writeln!(out, "no refuter found");
            }
        }
    }
    let _ = writeln!(out, "result: {}", if code == EXIT_PASS { "PASS" } else { "REFUTED" });
    Ok((code, out))
}

fn check_batch(l: &Loaded, kind: SolutionKind, s: &SampleSet, path: &Path, tol: f64, mut out: String) -> Result<(i32, String)> {
    let rows = read_frontier(path, l.problem.dim())?;
    let _ = writeln!(out, "batch: {} ({} rows), kind {}", path.display(), rows.len(), kind);
    let mut code = EXIT_PASS;
    for (line, x, gap) in rows {
        let eps = match (l.eps, gap) {
            _ if !kind.uses_eps() => Epsilon::zero(),
            (Some(e), _) => e,
            (None, Some(g)) => Epsilon::new(g, g)?,
            (None, None) => l.need_eps()?,
        };
        let (ci, cb) = certify_both(kind, &l.problem, &x, eps, s, tol)?;
        let mut verdict = verdict_word(&ci).to_string();
        if let Some(r) = &ci.refuter {
            verdict.push_str(&format!(" by #{} {}", r.index, point(&r.point)));
        }
        if !routes_agree(&ci, &cb) {
            verdict.push_str(" ROUTES DISAGREE");
            code = EXIT_DISAGREE;
        } else if !ci.passed() && code == EXIT_PASS {
            code = EXIT_REFUTED;
        }
        let _ = writeln!(out, "line {line}: x = {} E = {} {verdict}", point(&x), eps);
    }
    let _ = writeln!(out, "result: {}", ["PASS", "REFUTED", "", "DISAGREEMENT"][code as usize]);
    Ok((code, out))
}

/// Rows of a frontier CSV: line number, point and the optional gap column.
fn read_frontier(path: &Path, n: usize) -> Result<Vec<(usize, Vec<f64>, Option<f64>)>> {
    let text = std::fs::read_to_string(path)?;
    let mut header: Option<(Vec<usize>, Option<usize>)> = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some((xs, gap)) = &header else {
            let find = |name: &str| cells.iter().position(|c| *c == name);
            let xs = (1..=n)
                .map(|k| find(&format!("x{k}")).ok_or_else(|| Error::Format { line: i + 1, msg: format!("header lacks column x{k}") }))
                .collect::<Result<Vec<_>>>()?;
            header = Some((xs, find("gap")));
            continue;
        };
        let cell = |j: usize| -> Result<f64> {
            cells
                .get(j)
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| Error::Format { line: i + 1, msg: format!("cannot read column {}", j + 1) })
        };
        let x = xs.iter().map(|&j| cell(j)).collect::<Result<Vec<_>>>()?;
        let g = gap.map(cell).transpose()?.filter(|g| g.is_finite());
        rows.push((i + 1, x, g));
    }
    if header.is_none() {
        return Err(Error::Format { line: 0, msg: "empty CSV".into() });
    }
    Ok(rows)
}

fn cmd_descend(a: &StartArgs, ekeland: bool) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let s = l.need_samples()?;
    let eps = l.need_eps()?;
    let x0 = parse_point(&a.point, l.problem.dim())?;
    let mut out = String::new();
    l.header(&mut out, if ekeland { "ekeland" } else { "descend" });
    let bound = lu_bounded_below(&l.problem, s)?;
    let _ = writeln!(out, "{bound}");
    let _ = writeln!(out, "start: {}", point(&x0));
    let (x, trace): (Vec<f64>, DescentTrace) =
        if ekeland { ekeland_quasi(&l.problem, s, eps, &x0)? } else { descend_to_elu(&l.problem, s, &x0, eps)? };
    let _ = writeln!(out, "{trace}");
    if !ekeland {
        if let Some(b) = bound.bound.and_then(|b| trace.iteration_bound(b.lo())) {
            let _ = writeln!(out, "move bound ceil((fL(x0) - inf fL) / epsU): {b}");
        }
    }
    let _ = writeln!(out, "result: {}", point(&x));
    let _ = writeln!(out, "{}", trace.full);
    if let Some(path) = &a.csv {
        std::fs::write(path, trace.to_csv())?;
        let _ = writeln!(out, "trace CSV: {}", path.display());
    }
    Ok((if trace.full.passed() { EXIT_PASS } else { EXIT_REFUTED }, out))
}

fn slater_line(l: &Loaded, cfg: &RunConfig) -> String {
    if l.problem.num_constraints() == 0 {
        return "Slater: no constraints".into();
    }
    if cfg.assume_slater {
        return "Slater: assumed (--assume-slater)".into();
    }
    let r = l.problem.check_slater(cfg.seed, 2000);
    match r.witness {
        Some(w) => format!("Slater: witness {} with max g = {}", point(&w), num(r.best_value)),
        None => format!("Slater: no strictly feasible point found (best max g = {}); reported only", num(r.best_value)),
    }
}

enum Section {
    Done(bool),
    Skipped,
}

fn cmd_kkt(a: &KktArgs) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let p = &l.problem;
    let x = parse_point(&a.point, p.dim())?;
    let eps = l.eps.unwrap_or_else(Epsilon::zero);
    let mut out = String::new();
    l.header(&mut out, "kkt");
    let _ = writeln!(out, "x* = {}", point(&x));
    let _ = writeln!(out, "E: {eps}");
    let _ = writeln!(out, "{}", slater_line(&l, &a.cfg));
    let _ = writeln!(out, "closedness condition: {}", if a.cfg.assume_cc { "asserted (--assume-cc)" } else { "not asserted" });
    let wants = |t: TheoremArg| a.theorem == TheoremArg::All || a.theorem == t;
    let mut sections = Vec::new();
    let mut disagree = false;

    let report = |out: &mut String, title: &str, r: Result<Option<KktReport>>| -> Section {
        let _ = writeln!(out, "-- {title} --");
        match r {
            Ok(Some(rep)) => {
                let _ = writeln!(out, "{rep}");
                Section::Done(rep.holds())
            }
            Ok(None) => {
                let _ = writeln!(out, "no witness found; verdict: FAILS");
                Section::Done(false)
            }
            Err(e) => {
                let _ = writeln!(out, "not applicable: {e}");
                Section::Skipped
            }
        }
    };

    if wants(TheoremArg::Welu) {
        let r = search_weak_elu_witness(p, &x, eps, a.resolution)
            .and_then(|w| w.map(|w| verify_weak_elu_kkt(p, &x, eps, &w)).transpose());
        sections.push(report(&mut out, "weakly E-LU", r));
    }
    if wants(TheoremArg::Elu) {
        let r = search_elu_witness(p, &x, eps, a.cfg.assume_cc)
            .and_then(|w| w.map(|w| verify_elu_kkt(p, &x, eps, &w, a.cfg.assume_cc)).transpose());
        let sec = report(&mut out, "E-LU", r);
        if matches!(sec, Section::Done(true)) {
            let _ = writeln!(out, "conditional on the asserted closedness condition");
        }
        if let (Section::Done(_), Some(s)) = (&sec, &l.samples) {
            let _ = match lemma_x_set_check(p, &x, eps, s)? {
                XSetOutcome::EmptyIntersection => {
                    writeln!(out, "X(x*, E): no sample member; the theorem's nonemptiness hypothesis is not witnessed")
                }
                XSetOutcome::EqualityHolds { members } => writeln!(out, "X(x*, E): {members} sample members"),
                XSetOutcome::EqualityFails { index, .. } => writeln!(out, "X(x*, E): member #{index} breaks the level equality"),
            };
        }
        sections.push(sec);
    }
    if wants(TheoremArg::Quasi) {
        let _ = writeln!(out, "-- E-quasi-LU --");
        match quasi_kkt_residual(p, &x, eps) {
            Ok(q) => {
                let _ = writeln!(out, "{q}");
                match quasi_sufficiency_check(p, &x, eps, &q, l.samples.as_ref()) {
                    Ok(suf) => {
                        let _ = writeln!(out, "sufficiency: {}", suf.tag);
                        if let Some(c) = &suf.cross_check {
                            let _ = writeln!(out, "sample oracle: {}", verdict_word(c));
                        }
                        if suf.disagrees() {
                            let _ = writeln!(out, "INTERNAL ERROR: sufficiency certified a point the sample oracle refutes");
                            disagree = true;
                        }
                    }
                    Err(e) => {
                        let _ = writeln!(out, "sufficiency: not applicable: {e}");
                    }
                }
                sections.push(Section::Done(q.holds));
            }
            Err(e) => {
                let _ = writeln!(out, "not applicable: {e}");
                sections.push(Section::Skipped);
            }
        }
    }
    let done: Vec<bool> = sections.iter().filter_map(|s| if let Section::Done(h) = s { Some(*h) } else { None }).collect();
    let code = if disagree {
        EXIT_DISAGREE
    } else if done.is_empty() {
        EXIT_INPUT
    } else if done.iter().all(|h| *h) {
        EXIT_PASS
    } else {
        EXIT_REFUTED
    };
    let _ = writeln!(out, "result: {}", ["HOLDS", "FAILS", "NOTHING APPLICABLE", "DISAGREEMENT"][code as usize]);
    Ok((code, out))
}

fn cmd_scalarize(a: &ScalarizeArgs) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let p = &l.problem;
    let mut out = String::new();
    l.header(&mut out, "scalarize");
    let sol = weighted_sum_solve(p, a.mu_l, a.budget)?;
    let _ = writeln!(out, "{sol}");
    if !sol.gap.is_finite() {
        let _ = writeln!(out, "no certified gap; the bridge to E is not available");
        let _ = writeln!(out, "result: NOT CERTIFIED");
        return Ok((EXIT_REFUTED, out));
    }
    let bridge = match bridge_to_weak_elu(p, &sol.x, a.mu_l, sol.gap) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(out, "bridge: {e}\nresult: NOT CERTIFIED");
            return Ok((EXIT_REFUTED, out));
        }
    };
    let mut code = EXIT_PASS;
    for e in bridge.options() {
        let _ = write!(out, "bridged E: {e}");
        if let Some(s) = &l.samples {
            let (ci, cb) = certify_both(SolutionKind::WeakELU, p, &sol.x, e, s, a.cfg.tol)?;
            let _ = write!(out, " weakly E-LU on sample: {}", verdict_word(&ci));
            if !routes_agree(&ci, &cb) {
                code = EXIT_DISAGREE;
            } else if !ci.passed() && code == EXIT_PASS {
                code = EXIT_REFUTED;
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "result: {}", ["PASS", "REFUTED", "", "DISAGREEMENT"][code as usize]);
    Ok((code, out))
}

fn cmd_frontier(a: &FrontierArgs) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let rows = frontier_sweep(&l.problem, &even_weights(a.weights), a.budget);
    let code = if rows.iter().all(|r| r.outcome.is_ok()) { EXIT_PASS } else { EXIT_REFUTED };
    Ok((code, frontier_csv(&rows, l.problem.dim())))
}

const ORACLE_KINDS: [SolutionKind; 6] = SolutionKind::ALL;

fn cmd_oracle(a: &OracleArgs) -> Result<(i32, String)> {
    let l = load(&a.cfg)?;
    let p = &l.problem;
    let s = l.need_samples()?;
    let eps = l.eps.unwrap_or_else(Epsilon::zero);
    let candidates: Vec<Vec<f64>> = match &a.point {
        Some(v) => vec![parse_point(v, p.dim())?],
        None => {
            let c: Vec<Vec<f64>> = s.points().iter().filter(|x| p.feasible(x, crate::problem::TOL_FEASIBLE)).cloned().collect();
            if c.len() > ORACLE_MAX_CANDIDATES {
                return Err(Error::InvalidArgument(format!(
                    "{} candidates exceed {ORACLE_MAX_CANDIDATES}; pass --point or a coarser --samples",
                    c.len()
                )));
            }
            c
        }
    };
    let tol = a.cfg.tol;
    let table: Vec<Result<Vec<(bool, bool)>>> = candidates
        .par_iter()
        .map(|x| {
            ORACLE_KINDS
                .iter()
                .map(|k| {
                    let (ci, cb) = certify_both(*k, p, x, eps, s, tol)?;
                    Ok((ci.passed(), routes_agree(&ci, &cb)))
                })
                .collect()
        })
        .collect();
    let mut out = String::new();
    l.header(&mut out, "oracle");
    let _ = writeln!(out, "E: {eps}");
    let names: Vec<&str> = ORACLE_KINDS.iter().map(|k| k.cli_name()).collect();
    let _ = writeln!(out, "point,{}", names.join(","));
    let mut code = EXIT_PASS;
    let mut counts = [0usize; 6];
    for (x, row) in candidates.iter().zip(table) {
        let row = row?;
        let cells: Vec<&str> = row.iter().map(|(pass, _)| if *pass { "1" } else { "0" }).collect();
        let _ = writeln!(out, "\"{}\",{}", point(x), cells.join(","));
        for (c, (pass, _)) in counts.iter_mut().zip(&row) {
            *c += usize::from(*pass);
        }
        let pass: Vec<bool> = row.iter().map(|r| r.0).collect();
        let nested = [(0, 1), (2, 3), (4, 5)].iter().all(|&(strong, weak)| !pass[strong] || pass[weak]);
        if !nested {
            let _ = writeln!(out, "INTERNAL ERROR: a solution concept is not contained in its weak version at {}", point(x));
            code = EXIT_DISAGREE;
        }
        if row.iter().any(|r| !r.1) {
            let _ = writeln!(out, "INTERNAL ERROR: routes disagree at {}", point(x));
            code = EXIT_DISAGREE;
        }
    }
    let summary: Vec<String> = names.iter().zip(counts).map(|(n, c)| format!("{n}={c}")).collect();
    let _ = writeln!(out, "members of {} candidates: {}", candidates.len(), summary.join(" "));
    let _ = writeln!(out, "result: {}", if code == EXIT_PASS { "CONSISTENT" } else { "DISAGREEMENT" });
    Ok((code, out))
}
