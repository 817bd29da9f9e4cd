//! Report-producing commands behind the `margext` binary.
//!
//! Each command returns a [`Report`] even on usage errors, so a JSON record
//! is always available. Exit status: 0 pass, 1 assertion failure, 2 usage
//! error, 3 borderline numerical verdict.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channels::KrausFamily;
use crate::error::{Error, Result};
use crate::extremality::{
    block_gram, block_vectors, bound_inequality_holds, is_extremal, is_extremal_with, parthasarathy_bound,
    ExtremalityCertificate,
};
use crate::families::{
    closed_form_choi_pt, closed_form_gram, closed_form_gram_expanded, d1_matrix, k23_to_23k,
    paper_family_marginals_exact, paper_family_unscaled, paper_normalization, paper_targets, rank8_66, rank8k_6k,
    NamedFamily,
};
use crate::linalg::{rank, Matrix, RankMode, Subsystem};
use crate::reductions::{adjoint_duality_check, diagonalize_marginals, restrict_to_support};
use crate::sampling::{random_family, seeded};
use crate::scalar::Scalar;
use crate::separability::{separability_verdict, verdict_from_choi, Conclusion, SeparabilityVerdict, PPT_TOL};

/// Desk-scale guardrails.
#[derive(Clone, Debug)]
pub struct Limits {
    pub max_d: usize,
    pub max_d2: usize,
    /// Largest block Gram side (`r²`) any command will build.
    pub max_gram_side: usize,
    /// Lift the `max_d` / `max_d2` table limits.
    pub override_limits: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_d: 6,
            max_d2: 12,
            max_gram_side: 1024,
            override_limits: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Options {
    /// `None` picks exact mode when the family has a rational form.
    pub mode: Option<RankMode>,
    pub tol: Option<f64>,
    pub seed: u64,
    pub limits: Limits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Usage,
    Borderline,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Usage => 2,
            Status::Borderline => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub d1: usize,
    pub d2: usize,
    pub marginal_name: String,
    pub constructed_rank: usize,
    pub bound: u64,
    pub attained: bool,
    pub extremal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub status: Status,
    pub error: Option<String>,
    pub certificates: Vec<ExtremalityCertificate>,
    pub verdicts: Vec<SeparabilityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_rows: Option<Vec<TableRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_deviations: Option<BTreeMap<String, f64>>,
    pub assertions: Vec<Assertion>,
    pub warnings: Vec<String>,
    /// Wall-clock milliseconds per step; the only nondeterministic field.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &str, inputs: Value) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            status: Status::Pass,
            error: None,
            certificates: Vec::new(),
            verdicts: Vec::new(),
            table_rows: None,
            oracle_deviations: None,
            assertions: Vec::new(),
            warnings: Vec::new(),
            timings: BTreeMap::new(),
        }
    }

    /// Report for a command that could not run.
    pub fn usage_error(command: &str, inputs: Value, err: impl ToString) -> Self {
        let mut r = Self::new(command, inputs);
        r.error = Some(err.to_string());
        r.status = Status::Usage;
        r
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    fn timed<R>(&mut self, step: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.timings.insert(step.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn is_borderline(&self) -> bool {
        self.certificates.iter().any(ExtremalityCertificate::borderline) || self.verdicts.iter().any(|v| v.borderline)
    }

    /// Check the type invariants of every certificate and verdict, then
    /// settle the status.
    fn finish(mut self) -> Self {
        if self.error.is_some() {
            self.status = Status::Usage;
            return self;
        }
        let consistent = self.certificates.iter().all(ExtremalityCertificate::is_consistent)
            && self.verdicts.iter().all(SeparabilityVerdict::is_consistent);
        self.check("record_invariants", consistent, "certificates and verdicts are self-consistent");
        self.status = if self.is_borderline() {
            Status::Borderline
        } else if self.all_passed() {
            Status::Pass
        } else {
            Status::Fail
        };
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// JSON without the timing map, for determinism comparisons.
    pub fn to_json_without_timings(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        v
    }
}

fn describe(r: &ExtremalityCertificate) -> String {
    let gap = r.gap().map_or(String::new(), |g| format!(", gap {g:.3e}"));
    format!("Gram rank {} of {} ({:?}{gap})", r.gram_rank.rank, r.gram_size, r.mode)
}

fn rational(n: usize, d: usize) -> BigRational {
    BigRational::from_ratio(n as i64, d as i64)
}

/// Exact verification of the `(d, d+m)` family on its unscaled rational form.
fn verify_dm_exact(report: &mut Report, d: usize, m: usize) -> Result<()> {
    let f = paper_family_unscaled::<BigRational>(d, m)?;
    let targets = paper_targets::<BigRational>(d, m)?;
    let marginals = report.timed("marginals", || paper_family_marginals_exact::<BigRational>(d, m))?;
    let residual = marginals.max_deviation(&targets);
    report.check("marginals_match_targets", marginals == targets, format!("exact comparison, residual {residual:e}"));
    let gram = report.timed("block_gram", || block_gram(&f));
    report.check(
        "gram_integer_valued",
        gram.entries().iter().all(BigRational::is_integer),
        "unscaled block Gram entries are integers",
    );
    let mut cert = report.timed("gram_rank", || is_extremal_with(&f, None, RankMode::Exact, None))?;
    cert.marginal_residual = Some(residual);
    let choi = f.choi().scale(&rational(1, paper_normalization(d, m)));
    let mixed = marginals.output_is_maximally_mixed(0.0);
    let verdict = report.timed("separability", || verdict_from_choi(&choi, d, d + m, RankMode::Exact, mixed))?;
    report.certificates.push(cert);
    report.verdicts.push(verdict);
    Ok(())
}

fn verify_numerical(report: &mut Report, family: NamedFamily, opts: &Options) -> Result<KrausFamily<Complex64>> {
    let f = report.timed("construct", || family.build::<Complex64>())?;
    let targets = family.targets::<Complex64>()?;
    let cert = report.timed("gram_rank", || is_extremal_with(&f, Some(&targets), RankMode::Numerical, opts.tol))?;
    let residual = cert.marginal_residual.unwrap_or(f64::INFINITY);
    report.check("marginals_match_targets", cert.marginals_valid(), format!("residual {residual:.3e}"));
    let verdict = report.timed("separability", || separability_verdict(&f))?;
    report.certificates.push(cert);
    report.verdicts.push(verdict);
    Ok(f)
}

/// Construct a named family and check marginals, extremality, Choi rank and
/// (where claimed) separability.
pub fn cmd_verify(family: NamedFamily, opts: &Options) -> Report {
    let inputs = json!({
        "family": family.to_string(),
        "mode": opts.mode,
        "tol": opts.tol,
    });
    match run_verify(family, opts, inputs.clone()) {
        Ok(r) => r.finish(),
        Err(e) => Report::usage_error("verify", inputs, e),
    }
}

fn run_verify(family: NamedFamily, opts: &Options, inputs: Value) -> Result<Report> {
    let side = family.gram_side();
    if side > opts.limits.max_gram_side {
        return Err(Error::InvalidParameter(format!(
            "block Gram side {side} exceeds --max-dim {}",
            opts.limits.max_gram_side
        )));
    }
    let exact_available = family.build_exact::<BigRational>().is_some();
    let mode = opts
        .mode
        .unwrap_or(if exact_available { RankMode::Exact } else { RankMode::Numerical });
    if mode == RankMode::Exact && !exact_available {
        return Err(Error::InvalidParameter(format!(
            "{family} has irrational entries; exact mode is unavailable, use --numerical"
        )));
    }
    let mut report = Report::new("verify", inputs);
    let mut numeric = None;
    match (family, mode) {
        (NamedFamily::Paper { d, m }, RankMode::Exact) => verify_dm_exact(&mut report, d, m)?,
        _ => numeric = Some(verify_numerical(&mut report, family, opts)?),
    }
    let (d1, d2) = family.dims();
    let cert = report.certificates[0].clone();
    let verdict = report.verdicts[0].clone();
    let expected = family.kraus_count();
    report.check("extremal", cert.extremal, describe(&cert));
    report.check(
        "choi_rank",
        verdict.choi_rank == expected,
        format!("Choi rank {} (expected {expected})", verdict.choi_rank),
    );
    let bound = parthasarathy_bound(d1 as u64, d2 as u64);
    report.check(
        "rank_within_bound",
        verdict.choi_rank as u64 <= bound,
        format!("Choi rank {} vs bound {bound}", verdict.choi_rank),
    );
    if family.claims_separable() {
        report.check(
            "separable",
            verdict.conclusion == Conclusion::Separable,
            format!("min PT eigenvalue {:.3e}", verdict.min_pt_eigenvalue),
        );
    }
    if let (NamedFamily::Rank8k { k }, Some(f)) = (family, numeric.as_ref()) {
        let m = f.marginals();
        let d1_target = d1_matrix::<Complex64>(k);
        let dev = k23_to_23k(&m.rho1, k)?
            .max_abs_diff(&d1_target)
            .max(k23_to_23k(&m.rho2, k)?.max_abs_diff(&d1_target));
        report.check(
            "marginals_match_reordered_d1",
            dev <= 1e-12,
            format!("factor order (k,2,3) -> (2,3,k), deviation {dev:.3e}"),
        );
    }
    Ok(report)
}

/// Verify a family read from JSON; no targets, no expected rank.
pub fn cmd_verify_family(f: &KrausFamily<Complex64>, opts: &Options) -> Report {
    let inputs = json!({ "family": "file", "d_in": f.d_in(), "d_out": f.d_out(), "r": f.len(), "tol": opts.tol });
    if f.len() * f.len() > opts.limits.max_gram_side {
        return Report::usage_error("verify", inputs, "block Gram side exceeds --max-dim");
    }
    if opts.mode == Some(RankMode::Exact) {
        return Report::usage_error("verify", inputs, "exact mode needs a rational family; file input is complex");
    }
    let mut report = Report::new("verify", inputs);
    let run = (|| -> Result<()> {
        let cert = report.timed("gram_rank", || is_extremal_with(f, None, RankMode::Numerical, opts.tol))?;
        let verdict = report.timed("separability", || separability_verdict(f))?;
        report.check("normalized", f.is_normalized(1e-9), format!("total weight {}", f.total_weight()));
        report.certificates.push(cert);
        report.verdicts.push(verdict);
        Ok(())
    })();
    match run {
        Ok(()) => report.finish(),
        Err(e) => Report::usage_error("verify", report.inputs, e),
    }
}

fn dm_row(d: usize, m: usize, mode: RankMode) -> Result<(TableRow, bool)> {
    let n = d + m;
    let (choi_rank, extremal) = match mode {
        RankMode::Exact => {
            let f = paper_family_unscaled::<BigRational>(d, m)?;
            (f.choi_rank().rank, is_extremal(&f, None).extremal)
        }
        RankMode::Numerical => {
            let f = crate::families::paper_family::<f64>(d, m)?;
            let cert = is_extremal(&f, None);
            (f.choi_rank().rank, cert.extremal && !cert.borderline())
        }
    };
    let bound = parthasarathy_bound(d as u64, n as u64);
    let p = rational(d + 1, n);
    let row = TableRow {
        d1: d,
        d2: n,
        marginal_name: format!("Z(p={p}), I/{n}"),
        constructed_rank: choi_rank,
        bound,
        attained: choi_rank as u64 == bound,
        extremal,
    };
    let ok = choi_rank == n && extremal && row.attained == bound_inequality_holds(d as u64, m as u64);
    Ok((row, ok))
}

fn fixed_row<F>(name: &str, build: F, expected: usize) -> (TableRow, bool)
where
    F: FnOnce() -> KrausFamily<f64>,
{
    let f = build();
    let cert = is_extremal(&f, None);
    let rank = f.choi_rank().rank;
    let bound = parthasarathy_bound(f.d_in() as u64, f.d_out() as u64);
    let row = TableRow {
        d1: f.d_in(),
        d2: f.d_out(),
        marginal_name: name.to_string(),
        constructed_rank: rank,
        bound,
        attained: rank as u64 == bound,
        extremal: cert.extremal && !cert.borderline(),
    };
    (row.clone(), rank == expected && row.extremal)
}

/// One row per `(d, m)` of the `(d, d+m)` construction, plus the fixed
/// `(6,6)` and `(18,18)` rows from the tensor constructions.
pub fn cmd_table(d_range: (usize, usize), m_range: (usize, usize), opts: &Options) -> Report {
    let inputs = json!({ "d": [d_range.0, d_range.1], "m": [m_range.0, m_range.1], "mode": opts.mode });
    let (lo_d, hi_d) = d_range;
    let (lo_m, hi_m) = m_range;
    if lo_d < 2 || lo_m < 1 || lo_d > hi_d || lo_m > hi_m {
        return Report::usage_error("table", inputs, "need 2 <= d_min <= d_max and 1 <= m_min <= m_max");
    }
    let l = &opts.limits;
    if !l.override_limits && (hi_d > l.max_d || hi_d + hi_m > l.max_d2) {
        return Report::usage_error(
            "table",
            inputs,
            format!("range exceeds d <= {}, d+m <= {}; pass --override-limits", l.max_d, l.max_d2),
        );
    }
    if (hi_d + hi_m).pow(2) > l.max_gram_side {
        return Report::usage_error("table", inputs, "block Gram side exceeds --max-dim");
    }
    let mode = opts.mode.unwrap_or(RankMode::Exact);
    let cells: Vec<(usize, usize)> = (lo_d..=hi_d).flat_map(|d| (lo_m..=hi_m).map(move |m| (d, m))).collect();
    let mut report = Report::new("table", inputs);
    let start = Instant::now();
    // par_iter().collect() keeps input order
    let rows: Result<Vec<(TableRow, bool)>> = cells.par_iter().map(|&(d, m)| dm_row(d, m, mode)).collect();
    report.timings.insert("dm_rows".into(), start.elapsed().as_secs_f64() * 1e3);
    let mut rows = match rows {
        Ok(r) => r,
        Err(e) => return Report::usage_error("table", report.inputs, e),
    };
    let fixed = report.timed("fixed_rows", || {
        rayon::join(
            || fixed_row("D, D", rank8_66::<f64>, 8),
            || fixed_row("D1, D1", || rank8k_6k::<f64>(3).expect("k = 3 is valid"), 24),
        )
    });
    rows.push(fixed.0);
    rows.push(fixed.1);
    for (row, ok) in &rows {
        report.check(
            &format!("row({},{})", row.d1, row.d2),
            *ok,
            format!(
                "rank {} bound {} attained {} extremal {}",
                row.constructed_rank, row.bound, row.attained, row.extremal
            ),
        );
    }
    report.table_rows = Some(rows.into_iter().map(|(r, _)| r).collect());
    report.finish()
}

fn max_dev<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    a.max_abs_diff(b)
}

/// Cross-check the direct block Gram and partial-transposed Choi matrix of
/// the `(d, d+m)` family against their closed forms.
pub fn cmd_oracle(d: usize, m: usize, opts: &Options) -> Report {
    let inputs = json!({ "d": d, "m": m, "mode": opts.mode });
    if let Err(e) = paper_targets::<BigRational>(d, m) {
        return Report::usage_error("oracle", inputs, e);
    }
    if (d + m).pow(2) > opts.limits.max_gram_side {
        return Report::usage_error("oracle", inputs, "block Gram side exceeds --max-dim");
    }
    match run_oracle(d, m, opts, inputs.clone()) {
        Ok(r) => r.finish(),
        Err(e) => Report::usage_error("oracle", inputs, e),
    }
}

fn run_oracle(d: usize, m: usize, opts: &Options, inputs: Value) -> Result<Report> {
    let mut report = Report::new("oracle", inputs);
    let n = d + m;
    let f = paper_family_unscaled::<BigRational>(d, m)?;
    // closed forms index blocks by the un-adjointed operators
    let gram = report.timed("block_gram", || block_gram(&f.adjoint()));
    let closed = report.timed("closed_form_gram", || closed_form_gram::<BigRational>(d, m))?;
    let expanded = report.timed("closed_form_gram_expanded", || closed_form_gram_expanded::<BigRational>(d, m))?;
    let choi = f.choi().scale(&rational(1, paper_normalization(d, m)));
    let pt = choi.partial_transpose(d, n, Subsystem::First)?;
    let pt_closed = report.timed("closed_form_choi_pt", || closed_form_choi_pt::<BigRational>(d, m))?;

    let mut devs = BTreeMap::new();
    let dev_m = max_dev(&gram, &closed);
    let dev_sum = max_dev(&gram, &expanded);
    let dev_pt = max_dev(&pt, &pt_closed);
    devs.insert("gram_vs_closed_form".to_string(), dev_m);
    devs.insert("gram_vs_expanded_sum".to_string(), dev_sum);
    devs.insert("choi_pt_vs_closed_form".to_string(), dev_pt);
    if dev_m > 0.0 {
        report.warn(format!("simplified closed-form Gram deviates from the direct Gram by {dev_m}"));
    }
    if dev_sum > 0.0 {
        report.warn(format!("expanded closed-form Gram deviates from the direct Gram by {dev_sum}"));
    }
    report.oracle_deviations = Some(devs);

    let mode = opts.mode.unwrap_or(RankMode::Exact);
    let cert = match mode {
        RankMode::Exact => report.timed("gram_rank", || is_extremal_with(&f, None, RankMode::Exact, None))?,
        RankMode::Numerical => {
            let fc = f.to_complex64();
            report.timed("gram_rank", || is_extremal_with(&fc, None, RankMode::Numerical, opts.tol))?
        }
    };
    report.check(
        "gram_integer_valued",
        gram.entries().iter().all(BigRational::is_integer),
        "unscaled block Gram entries are integers",
    );
    report.check("gram_full_rank", cert.extremal, describe(&cert));
    report.check("choi_pt_matches_closed_form", dev_pt <= 1e-12, format!("max deviation {dev_pt:e}"));
    let verdict = report.timed("separability", || verdict_from_choi(&choi, d, n, mode, true))?;
    report.check(
        "ppt",
        verdict.ppt,
        format!("min PT eigenvalue {:.3e} (tolerance {:e})", verdict.min_pt_eigenvalue, -PPT_TOL),
    );
    report.certificates.push(cert);
    report.verdicts.push(verdict);
    Ok(report)
}

/// Dimension of the span of the block operators, by rank of the matrix that
/// stacks them as columns (no Gram matrix involved).
pub fn span_dimension(f: &KrausFamily<Complex64>) -> usize {
    let vecs = block_vectors(f);
    let len = vecs.first().map_or(0, Vec::len);
    let m = Matrix::from_fn(len, vecs.len(), |i, j| vecs[j][i]);
    rank(&m, RankMode::Numerical, None).expect("finite entries").rank
}

/// Outcome counts of the randomized reduction checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PropertyTally {
    pub families: usize,
    pub extremal: usize,
    pub adjoint_invariant: usize,
    pub canonicalization_invariant: usize,
    pub canonical_diagonal: usize,
    pub restriction_idempotent: usize,
    pub span_checked: usize,
    pub span_matches: usize,
}

/// One seeded random family: dimensions up to 4, up to 5 operators; a quarter
/// of them get a repeated operator so both verdicts occur.
pub fn random_case(rng: &mut crate::sampling::SeededRng) -> KrausFamily<Complex64> {
    use rand::Rng;
    let d1 = rng.random_range(1..=4);
    let d2 = rng.random_range(1..=4);
    let r = rng.random_range(1..=5);
    let f = random_family(rng, d1, d2, r);
    if r >= 2 && rng.random_range(0..4) == 0 {
        let mut ops = f.ops().to_vec();
        ops[r - 1] = ops[0].scale(&Complex64::new(0.5, 0.0));
        KrausFamily::new(d1, d2, ops).expect("same shapes")
    } else {
        f
    }
}

pub fn run_property_checks(seed: u64, count: usize) -> Result<PropertyTally> {
    let mut rng = seeded(seed);
    let mut t = PropertyTally::default();
    for _ in 0..count {
        let f = random_case(&mut rng);
        t.families += 1;
        let before = is_extremal(&f, None).extremal;
        t.extremal += before as usize;
        t.adjoint_invariant += adjoint_duality_check(&f) as usize;
        let rec = diagonalize_marginals(&f)?;
        t.canonicalization_invariant += (is_extremal(&rec.family, None).extremal == before) as usize;
        t.canonical_diagonal += (rec.diagonal_defect() <= 1e-12 && rec.unitarity_defect() <= 1e-12) as usize;
        let once = restrict_to_support(&f)?;
        t.restriction_idempotent += (restrict_to_support(&once)? == once) as usize;
        if f.len() <= 3 && f.d_in() <= 3 && f.d_out() <= 3 {
            t.span_checked += 1;
            t.span_matches += (span_dimension(&f) == is_extremal(&f, None).gram_rank.rank) as usize;
        }
    }
    Ok(t)
}

/// Seeded randomized checks of the reductions and the Gram/span agreement.
pub fn cmd_proptest(count: usize, opts: &Options) -> Report {
    let inputs = json!({ "seed": opts.seed, "count": count });
    let mut report = Report::new("proptest", inputs);
    let tally = match report.timed("checks", || run_property_checks(opts.seed, count)) {
        Ok(t) => t,
        Err(e) => return Report::usage_error("proptest", report.inputs, e),
    };
    let n = tally.families;
    let ratio = |k: usize, of: usize| format!("{k}/{of}");
    report.check("adjoint_invariance", tally.adjoint_invariant == n, ratio(tally.adjoint_invariant, n));
    report.check(
        "canonicalization_invariance",
        tally.canonicalization_invariant == n,
        ratio(tally.canonicalization_invariant, n),
    );
    report.check("canonical_marginals_diagonal", tally.canonical_diagonal == n, ratio(tally.canonical_diagonal, n));
    report.check(
        "restriction_idempotent",
        tally.restriction_idempotent == n,
        ratio(tally.restriction_idempotent, n),
    );
    report.check(
        "span_dimension_equals_gram_rank",
        tally.span_matches == tally.span_checked,
        ratio(tally.span_matches, tally.span_checked),
    );
    report.inputs["extremal_families"] = json!(tally.extremal);
    report.finish()
}
