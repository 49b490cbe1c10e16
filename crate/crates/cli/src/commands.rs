use std::fmt::Write as _;
use std::path::Path;

use gramcone::instances::{make_with_policy, random_matrix, sweep_spec, InstanceKind, InstanceShape, InstanceSpec};
use gramcone::numlin::{pinv, DenseMatrix};
use gramcone::operator::{build_truncation, MatrixOperator, TruncationFamily, TruncationSpec};
use gramcone::theorem::{equivalence_report, GramAnalysis, ReportOptions, Verdict};
use gramcone::{Error, Instance, Matrix, Policy, Report};
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Dims, Format, RunConfig, SeedRange};
use crate::dto::{InstanceDoc, PerCondition, PolicyDoc, ReportDoc, SpecDoc, VerdictDoc};
use crate::{jsonfmt, CliError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREEMENT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub payload: String,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let policy = cfg.policy.to_policy().map_err(|e| CliError::Usage(e.to_string()))?;
    match &cfg.command {
        Command::Check { input, lemmas } => check(cfg, input, *lemmas),
        Command::Sweep { seeds, dims } => sweep(cfg, &policy, *seeds, *dims),
        Command::Examples { level } => examples(cfg, &policy, *level),
        Command::Identities { seeds, dims, level } => identities(cfg, &policy, *seeds, *dims, *level),
    }
}

fn options(cfg: &RunConfig, lemmas: bool) -> ReportOptions {
    ReportOptions {
        strict_cond5: cfg.strict_cond5,
        lemmas,
    }
}

/// Reads an instance or an instance spec; a top-level `"kind"` key marks a
/// spec.
pub fn load_instance(path: &Path, overrides: &PolicyDoc) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text, overrides).map_err(|e| match e {
        CliError::Parse { message, .. } => CliError::Parse {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn parse_instance(text: &str, overrides: &PolicyDoc) -> Result<Instance, CliError> {
    let parse_err = |e: serde_json::Error| CliError::Parse {
        path: "<input>".into(),
        message: e.to_string(),
    };
    let field_err = |e: crate::dto::DocError| CliError::Parse {
        path: "<input>".into(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    if value.get("kind").is_some() {
        let doc: SpecDoc = serde_json::from_str(text).map_err(parse_err)?;
        let spec = doc.to_spec().map_err(field_err)?;
        let policy = overrides.to_policy().map_err(field_err)?;
        Ok(make_with_policy(&spec, policy)?)
    } else {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(parse_err)?;
        doc.to_instance(overrides).map_err(field_err)
    }
}

fn report(inst: &Instance, opts: ReportOptions) -> Result<Report, CliError> {
    equivalence_report(inst, opts).map_err(|e| match e {
        Error::HypothesisFailed { .. } => CliError::Hypothesis(e.to_string()),
        other => CliError::Core(other),
    })
}

fn check(cfg: &RunConfig, input: &Path, lemmas: bool) -> Result<RunOutcome, CliError> {
    let inst = load_instance(input, &cfg.policy)?;
    let (m, n) = inst.operator.shape();
    info!("checking {} ({m}x{n}, {} cone)", input.display(), inst.cone.kind());
    let rep = report(&inst, options(cfg, lemmas))?;
    let doc = ReportDoc::from(&rep);
    let payload = match cfg.format {
        Format::Json => jsonfmt::to_string_pretty(&doc) + "\n",
        Format::Csv => {
            let rows: Vec<ConditionRow> = (0..6)
                .map(|i| ConditionRow {
                    condition: format!("c{}", i + 1),
                    verdict: rep.conditions[i].verdict.label(),
                    worst_slack: rep.conditions[i].worst_slack,
                })
                .collect();
            to_csv(&rows)?
        }
        Format::Pretty => pretty_report(&rep),
    };
    Ok(RunOutcome {
        exit_code: if rep.agree { EXIT_OK } else { EXIT_DISAGREEMENT },
        payload,
    })
}

#[derive(Serialize)]
struct ConditionRow {
    condition: String,
    verdict: &'static str,
    worst_slack: Option<f64>,
}

fn pretty_report(rep: &Report) -> String {
    let mut s = String::new();
    let h = &rep.hypothesis;
    let _ = writeln!(
        s,
        "hypothesis T†T K ⊆ K: {}{}",
        if h.holds { "holds" } else { "fails" },
        if h.one_to_one { " (T one-to-one)" } else { "" }
    );
    let _ = writeln!(s, "{:<10} {:<14} {:>14}", "condition", "verdict", "worst slack");
    for (i, c) in rep.conditions.iter().enumerate() {
        let slack = c.worst_slack.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let _ = writeln!(s, "c{:<9} {:<14} {:>14}", i + 1, c.verdict.label(), slack);
    }
    if let Some(c) = &rep.strict_cond5 {
        let _ = writeln!(s, "{:<10} {:<14}", "c5 strict", c.verdict.label());
    }
    let _ = writeln!(s, "agree: {}", if rep.agree { "yes" } else { "NO" });
    s
}

fn to_csv<R: Serialize>(rows: &[R]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writes UTF-8"))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedOutcome {
    AllTrue,
    AllFalse,
    Marginal,
    NotEvaluated,
    Disagreement,
    HypothesisFailure,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub kind: &'static str,
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub outcome: SeedOutcome,
    pub verdicts: Option<PerCondition<VerdictDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepCounts {
    pub total: u64,
    pub all_true: u64,
    pub all_false: u64,
    pub marginal: u64,
    pub not_evaluated: u64,
    pub disagreements: u64,
    pub hypothesis_failures: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepDoc {
    pub seeds: String,
    pub dims: String,
    pub policy: PolicyDoc,
    pub strict_cond5: bool,
    pub counts: SweepCounts,
    pub rows: Vec<SweepRow>,
}

fn classify(rep: &Report) -> SeedOutcome {
    if !rep.agree {
        SeedOutcome::Disagreement
    } else if rep.marginal {
        SeedOutcome::Marginal
    } else if rep.incomplete {
        SeedOutcome::NotEvaluated
    } else {
        match rep.unanimous() {
            Some(true) => SeedOutcome::AllTrue,
            Some(false) => SeedOutcome::AllFalse,
            None => SeedOutcome::NotEvaluated,
        }
    }
}

fn sweep_one(seed: u64, dims: Dims, policy: &Policy, opts: ReportOptions) -> SweepRow {
    let spec = match sweep_spec(seed, dims.m, dims.n) {
        Ok(s) => s,
        Err(e) => {
            return SweepRow {
                seed,
                kind: "",
                m: 0,
                n: 0,
                rank: 0,
                outcome: SeedOutcome::Error,
                verdicts: None,
                error: Some(e.to_string()),
            }
        }
    };
    let (m, n, rank) = match spec.shape {
        InstanceShape::Dims { m, n, rank } => (m, n, rank),
        InstanceShape::Level(l) => (l, l, l),
    };
    let mut row = SweepRow {
        seed,
        kind: spec.kind.name(),
        m,
        n,
        rank,
        outcome: SeedOutcome::Error,
        verdicts: None,
        error: None,
    };
    let result = make_with_policy(&spec, *policy).and_then(|inst| equivalence_report(&inst, opts));
    match result {
        Ok(rep) => {
            row.outcome = classify(&rep);
            row.verdicts = Some(PerCondition::from_verdicts(rep.verdicts()));
        }
        Err(e @ Error::HypothesisFailed { .. }) => {
            row.outcome = SeedOutcome::HypothesisFailure;
            row.error = Some(e.to_string());
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    debug!("seed {seed}: {:?}", row.outcome);
    row
}

/// Runs every seed and aggregates in seed order; the payload carries no
/// timing or host information.
pub fn sweep_doc(cfg: &RunConfig, policy: &Policy, seeds: SeedRange, dims: Dims) -> Result<SweepDoc, CliError> {
    let opts = options(cfg, false);
    let pool = pool(cfg.workers)?;
    info!(
        "sweep over {} seeds ({seeds}) at {dims} on {} workers",
        seeds.count(),
        pool.current_num_threads()
    );
    let seed_list: Vec<u64> = seeds.iter().collect();
    let mut rows: Vec<SweepRow> = pool.install(|| {
        seed_list
            .par_iter()
            .map(|&s| sweep_one(s, dims, policy, opts))
            .collect()
    });
    rows.sort_by_key(|r| r.seed);
    let mut counts = SweepCounts::default();
    for r in &rows {
        counts.total += 1;
        match r.outcome {
            SeedOutcome::AllTrue => counts.all_true += 1,
            SeedOutcome::AllFalse => counts.all_false += 1,
            SeedOutcome::Marginal => counts.marginal += 1,
            SeedOutcome::NotEvaluated => counts.not_evaluated += 1,
            SeedOutcome::Disagreement => counts.disagreements += 1,
            SeedOutcome::HypothesisFailure => counts.hypothesis_failures += 1,
            SeedOutcome::Error => counts.errors += 1,
        }
    }
    Ok(SweepDoc {
        seeds: seeds.to_string(),
        dims: dims.to_string(),
        policy: PolicyDoc::from_policy(policy),
        strict_cond5: cfg.strict_cond5,
        counts,
        rows,
    })
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    seed: u64,
    kind: &'a str,
    m: usize,
    n: usize,
    rank: usize,
    outcome: SeedOutcome,
    c1: &'a str,
    c2: &'a str,
    c3: &'a str,
    c4: &'a str,
    c5: &'a str,
    c6: &'a str,
}

fn sweep(cfg: &RunConfig, policy: &Policy, seeds: SeedRange, dims: Dims) -> Result<RunOutcome, CliError> {
    let doc = sweep_doc(cfg, policy, seeds, dims)?;
    let c = &doc.counts;
    let exit_code = if c.disagreements > 0 {
        EXIT_DISAGREEMENT
    } else if c.hypothesis_failures > 0 {
        EXIT_HYPOTHESIS
    } else if c.errors > 0 {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    };
    let payload = match cfg.format {
        Format::Json => jsonfmt::to_string_pretty(&doc) + "\n",
        Format::Csv => {
            let labels: Vec<[&str; 6]> = doc
                .rows
                .iter()
                .map(|r| match &r.verdicts {
                    Some(v) => v.labels(),
                    None => ["-"; 6],
                })
                .collect();
            let rows: Vec<SweepCsvRow> = doc
                .rows
                .iter()
                .zip(&labels)
                .map(|(r, l)| SweepCsvRow {
                    seed: r.seed,
                    kind: r.kind,
                    m: r.m,
                    n: r.n,
                    rank: r.rank,
                    outcome: r.outcome,
                    c1: l[0],
                    c2: l[1],
                    c3: l[2],
                    c4: l[3],
                    c5: l[4],
                    c6: l[5],
                })
                .collect();
            to_csv(&rows)?
        }
        Format::Pretty => {
            let mut s = String::new();
            let _ = writeln!(s, "seeds {}  dims {}", doc.seeds, doc.dims);
            let _ = writeln!(s, "total          {}", c.total);
            let _ = writeln!(s, "all true       {}", c.all_true);
            let _ = writeln!(s, "all false      {}", c.all_false);
            let _ = writeln!(s, "marginal       {}", c.marginal);
            let _ = writeln!(s, "not evaluated  {}", c.not_evaluated);
            let _ = writeln!(s, "disagreements  {}", c.disagreements);
            if c.hypothesis_failures + c.errors > 0 {
                let _ = writeln!(s, "hypothesis     {}", c.hypothesis_failures);
                let _ = writeln!(s, "errors         {}", c.errors);
            }
            for r in doc.rows.iter().filter(|r| r.outcome == SeedOutcome::Disagreement) {
                let _ = writeln!(
                    s,
                    "  disagreement at seed {} ({} {}x{} rank {})",
                    r.seed, r.kind, r.m, r.n, r.rank
                );
            }
            s
        }
    };
    Ok(RunOutcome { exit_code, payload })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleRow {
    pub example: &'static str,
    pub level: usize,
    pub verdicts: PerCondition<VerdictDoc>,
    pub agree: bool,
    pub expected: &'static str,
    pub matches_expected: bool,
    /// `max |(T*T)† − diag(1/n²)|` over the active indices.
    pub gram_pinv_residual: f64,
    /// `max |T† − expected closed form|`.
    pub pinv_residual: f64,
    pub report: ReportDoc,
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Closed forms of `T†` and `(T*T)†` for the diagonal examples.
fn closed_forms(kind: InstanceKind, n: usize) -> (Matrix, Matrix) {
    let inv = |k: usize| 1.0 / k as f64;
    match kind {
        InstanceKind::Paper41 => (
            DenseMatrix::from_diag(&(1..=n).map(inv).collect::<Vec<_>>()),
            DenseMatrix::from_diag(&(1..=n).map(|k| inv(k * k)).collect::<Vec<_>>()),
        ),
        InstanceKind::Paper42 => (
            DenseMatrix::from_diag(&(1..=n).map(|k| if k == 1 { 0.0 } else { inv(k) }).collect::<Vec<_>>()),
            DenseMatrix::from_diag(
                &(1..=n)
                    .map(|k| if k == 1 { 0.0 } else { inv(k * k) })
                    .collect::<Vec<_>>(),
            ),
        ),
        _ => {
            // Sine coefficient n is recovered from cosine coefficient n / n;
            // the constant cosine coordinate is dropped.
            let mut t_dag = DenseMatrix::zeros(n, n + 1);
            for k in 1..=n {
                t_dag[(k - 1, k)] = inv(k);
            }
            (
                t_dag,
                DenseMatrix::from_diag(&(1..=n).map(|k| inv(k * k)).collect::<Vec<_>>()),
            )
        }
    }
}

pub fn example_rows(cfg: &RunConfig, policy: &Policy, level: usize) -> Result<Vec<ExampleRow>, CliError> {
    let mut rows = Vec::new();
    for (kind, name) in [
        (InstanceKind::Paper41, "example41"),
        (InstanceKind::Paper42, "example42"),
        (InstanceKind::Paper43, "example43"),
    ] {
        let spec = InstanceSpec::level(kind, level)?;
        let inst: Instance = make_with_policy(&spec, *policy)?;
        let rep = report(&inst, options(cfg, true))?;
        let an = GramAnalysis::new(&inst)?;
        let (t_dag, gram_dag) = closed_forms(kind, level);
        let unanimous = rep.unanimous();
        info!("{name} at N={level}: {:?}", rep.verdicts());
        rows.push(ExampleRow {
            example: name,
            level,
            verdicts: PerCondition::from_verdicts(rep.verdicts()),
            agree: rep.agree,
            expected: "all true: (T*T)† is nonnegative with respect to K",
            matches_expected: unanimous == Some(true),
            gram_pinv_residual: max_abs_diff(&an.gram_dagger, &gram_dag),
            pinv_residual: max_abs_diff(&an.t_dagger, &t_dag),
            report: ReportDoc::from(&rep),
        });
    }
    Ok(rows)
}

fn examples(cfg: &RunConfig, policy: &Policy, level: usize) -> Result<RunOutcome, CliError> {
    let rows = example_rows(cfg, policy, level)?;
    let ok = rows.iter().all(|r| r.matches_expected);
    let payload = match cfg.format {
        Format::Json => jsonfmt::to_string_pretty(&rows) + "\n",
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                example: &'a str,
                level: usize,
                c1: &'a str,
                c2: &'a str,
                c3: &'a str,
                c4: &'a str,
                c5: &'a str,
                c6: &'a str,
                matches_expected: bool,
                gram_pinv_residual: f64,
                pinv_residual: f64,
            }
            let labels: Vec<[&str; 6]> = rows.iter().map(|r| r.verdicts.labels()).collect();
            let flat: Vec<Row> = rows
                .iter()
                .zip(&labels)
                .map(|(r, l)| Row {
                    example: r.example,
                    level: r.level,
                    c1: l[0],
                    c2: l[1],
                    c3: l[2],
                    c4: l[3],
                    c5: l[4],
                    c6: l[5],
                    matches_expected: r.matches_expected,
                    gram_pinv_residual: r.gram_pinv_residual,
                    pinv_residual: r.pinv_residual,
                })
                .collect();
            to_csv(&flat)?
        }
        Format::Pretty => {
            let mut s = String::new();
            for r in &rows {
                let l = r.verdicts.labels();
                let _ = writeln!(s, "{} N={}: {}", r.example, r.level, l.join(" "));
                let _ = writeln!(
                    s,
                    "  expected {}: {}",
                    r.expected,
                    if r.matches_expected { "ok" } else { "MISMATCH" }
                );
                let _ = writeln!(
                    s,
                    "  |(T*T)† - closed form| = {:.3e}, |T† - closed form| = {:.3e}",
                    r.gram_pinv_residual, r.pinv_residual
                );
            }
            s
        }
    };
    Ok(RunOutcome {
        exit_code: if ok { EXIT_OK } else { EXIT_DISAGREEMENT },
        payload,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySummary {
    pub name: &'static str,
    /// Largest `residual / max(1, ‖T‖_F)` over all cases.
    pub worst_relative: f64,
    pub failures: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityFailure {
    pub case: String,
    pub identity: &'static str,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitiesDoc {
    pub seeds: String,
    pub dims: String,
    pub level: usize,
    pub identity_tol: f64,
    pub cases: u64,
    pub identities: Vec<IdentitySummary>,
    pub failures: Vec<IdentityFailure>,
}

pub fn identities_doc(
    cfg: &RunConfig,
    policy: &Policy,
    seeds: SeedRange,
    dims: Dims,
    level: usize,
) -> Result<IdentitiesDoc, CliError> {
    let mut cases: Vec<(String, Matrix)> = Vec::new();
    for family in [
        TruncationFamily::Example41,
        TruncationFamily::Example42,
        TruncationFamily::Example43,
    ] {
        let (op, _) = build_truncation(TruncationSpec::new(family, level)?, *policy)?;
        cases.push((format!("{} N={level}", family.name()), op.matrix));
    }
    for seed in seeds.iter() {
        cases.push((format!("seed {seed}"), random_matrix(seed, dims.m, dims.n)?));
    }
    let pool = pool(cfg.workers)?;
    let reports = pool.install(|| {
        cases
            .par_iter()
            .map(|(_, m)| MatrixOperator::new(m.clone(), *policy).and_then(|op| op.verify_identities()))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut summary: Vec<IdentitySummary> = Vec::new();
    let mut failures = Vec::new();
    for ((case, _), rep) in cases.iter().zip(&reports) {
        for (k, e) in rep.entries.iter().enumerate() {
            if summary.len() <= k {
                summary.push(IdentitySummary {
                    name: e.name,
                    worst_relative: 0.0,
                    failures: 0,
                });
            }
            let s = &mut summary[k];
            s.worst_relative = s.worst_relative.max(e.residual / rep.scale);
            if !e.passed {
                s.failures += 1;
                failures.push(IdentityFailure {
                    case: case.clone(),
                    identity: e.name,
                    residual: e.residual,
                    bound: rep.bound,
                });
            }
        }
    }
    Ok(IdentitiesDoc {
        seeds: seeds.to_string(),
        dims: dims.to_string(),
        level,
        identity_tol: policy.identity_tol,
        cases: cases.len() as u64,
        identities: summary,
        failures,
    })
}

fn identities(
    cfg: &RunConfig,
    policy: &Policy,
    seeds: SeedRange,
    dims: Dims,
    level: usize,
) -> Result<RunOutcome, CliError> {
    let doc = identities_doc(cfg, policy, seeds, dims, level)?;
    let payload = match cfg.format {
        Format::Json => jsonfmt::to_string_pretty(&doc) + "\n",
        Format::Csv => to_csv(&doc.identities)?,
        Format::Pretty => {
            let mut s = String::new();
            let _ = writeln!(s, "{} cases, bound {:e} · max(1, ‖T‖_F)", doc.cases, doc.identity_tol);
            for i in &doc.identities {
                let _ = writeln!(
                    s,
                    "{:<20} worst {:.3e}  failures {}",
                    i.name, i.worst_relative, i.failures
                );
            }
            s
        }
    };
    Ok(RunOutcome {
        exit_code: if doc.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_DISAGREEMENT
        },
        payload,
    })
}

/// Singular system of the third example's truncation together with the
/// pseudoinverse of its assembled matrix.
pub fn example43_pinv(level: usize, policy: &Policy) -> Result<(gramcone::Spectral, Matrix), CliError> {
    let (op, sys) = build_truncation(TruncationSpec::new(TruncationFamily::Example43, level)?, *policy)?;
    Ok((sys, pinv(&op.matrix, policy)?))
}

impl PerCondition<VerdictDoc> {
    pub fn from_verdicts(v: [Verdict; 6]) -> Self {
        Self {
            c1: VerdictDoc(v[0]),
            c2: VerdictDoc(v[1]),
            c3: VerdictDoc(v[2]),
            c4: VerdictDoc(v[3]),
            c5: VerdictDoc(v[4]),
            c6: VerdictDoc(v[5]),
        }
    }

    pub fn labels(&self) -> [&'static str; 6] {
        [self.c1, self.c2, self.c3, self.c4, self.c5, self.c6].map(|v| v.0.label())
    }
}
