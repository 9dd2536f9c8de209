//! Seeded Monte Carlo sweeps over point families, power-law fits and the
//! deterministic-versus-random comparison.
//!
//! Every trial draws from its own ChaCha stream, selected from the master
//! seed by `(N, trial)`, and trial values are folded in trial order. Tables
//! are therefore identical for any thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{kernel_energy, kernel_energy_offdiag, riesz_energy, KernelSpec};
use crate::error::{domain, Error, Result};
use crate::geometry::{uniform_sphere, PointSet};
use crate::partition::{eq_partition, Partition};
use crate::pointsets::{fibonacci_sphere, load_points, riesz_minimize};
use crate::quality::{design_defect, wce, WceSpace, DEFAULT_CERTIFY_TOL};
use crate::sum::CompensatedSum;

/// Random stream for trial `trial` of the row with `n` points.
pub fn trial_rng(master_seed: u64, n: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((n as u64) << 32) | trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Jittered,
    UniformRandom,
    Fibonacci,
    /// One point file per `N`.
    FileSequence { manifest: BTreeMap<usize, PathBuf> },
    /// Riesz minimizer started from the Fibonacci lattice (uniform random
    /// points for `d > 2`).
    Minimizer { s: f64, steps: usize, step_size: f64 },
}

impl Family {
    pub fn is_random(&self) -> bool {
        matches!(self, Family::Jittered | Family::UniformRandom)
    }
}

/// Kernel given by data, so that plans stay serializable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelChoice {
    Coefficients { a: Vec<f64> },
    Riesz { s: f64 },
}

impl KernelChoice {
    pub fn spec(&self, d: usize) -> Result<KernelSpec> {
        match self {
            KernelChoice::Coefficients { a } => KernelSpec::coefficients(d, a.clone()),
            KernelChoice::Riesz { s } => KernelSpec::riesz(d, *s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Metric {
    /// `1/2 sum_{i != j} |x_i - x_j|^{-s}`
    Riesz { s: f64 },
    Kernel { kernel: KernelChoice },
    KernelOffdiag { kernel: KernelChoice },
    WceSobolev { s: f64 },
    WceLogspace { gamma: f64 },
    /// Total defect `sum_{l <= t} D_l`.
    Defect { t: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub d: usize,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub family: Family,
    pub metric: Metric,
    /// Tolerance of the worst-case error evaluation.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_CERTIFY_TOL
}

impl TrialPlan {
    pub fn new(d: usize, n_list: Vec<usize>, trials: usize, master_seed: u64, family: Family, metric: Metric) -> Self {
        Self {
            d,
            n_list,
            trials,
            master_seed,
            family,
            metric,
            tol: DEFAULT_CERTIFY_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::Invalid("empty N list".into()));
        }
        if self.n_list.contains(&0) {
            return Err(Error::Invalid("N must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials per N must be at least 1".into()));
        }
        if self.d < 2 {
            return domain(format!("sphere dimension must be at least 2, got {}", self.d));
        }
        match &self.family {
            Family::Fibonacci if self.d != 2 => {
                return Err(Error::Invalid("the Fibonacci family exists only for d = 2".into()))
            }
            Family::FileSequence { manifest } => {
                if let Some(n) = self.n_list.iter().find(|n| !manifest.contains_key(n)) {
                    return Err(Error::Invalid(format!("no point file for N = {n} in the manifest")));
                }
            }
            Family::Minimizer { s, .. } if !(*s > 0.0 && *s < self.d as f64) => {
                return domain(format!("minimizer exponent s = {s} outside (0, {})", self.d))
            }
            _ => {}
        }
        match &self.metric {
            Metric::Kernel {
                kernel: KernelChoice::Riesz { .. },
            } => Err(Error::Invalid(
                "the Riesz kernel is singular; use the kernel-offdiag metric".into(),
            )),
            Metric::Kernel { kernel } | Metric::KernelOffdiag { kernel } => kernel.spec(self.d).map(|_| ()),
            Metric::Riesz { s } => KernelSpec::riesz(self.d, *s).map(|_| ()),
            Metric::WceSobolev { s } => WceSpace::Sobolev { s: *s }.validate(self.d),
            Metric::WceLogspace { gamma } => WceSpace::Logspace { gamma: *gamma }.validate(self.d),
            Metric::Defect { t } if *t == 0 => domain("defect degree must be at least 1"),
            Metric::Defect { .. } => Ok(()),
        }
    }
}

/// Scalar value of `metric` on one point set.
pub fn evaluate_metric(points: &PointSet, metric: &Metric, tol: f64) -> Result<f64> {
    let d = points.dim();
    Ok(match metric {
        Metric::Riesz { s } => riesz_energy(points, *s)?.value,
        Metric::Kernel { kernel } => kernel_energy(points, &kernel.spec(d)?)?.value,
        Metric::KernelOffdiag { kernel } => kernel_energy_offdiag(points, &kernel.spec(d)?)?.value,
        Metric::WceSobolev { s } => wce(points, WceSpace::Sobolev { s: *s }, tol)?.wce_squared,
        Metric::WceLogspace { gamma } => wce(points, WceSpace::Logspace { gamma: *gamma }, tol)?.wce_squared,
        Metric::Defect { t } => design_defect(points, *t)?
            .defects
            .iter()
            .collect::<CompensatedSum>()
            .value(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// Sample mean and standard error of the mean, folded in input order.
pub fn estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    let mean = values.iter().collect::<CompensatedSum>().value() / n as f64;
    let stderr = if n > 1 {
        let ss = values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .collect::<CompensatedSum>()
            .value();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Estimate { mean, stderr, trials: n }
}

/// Monte Carlo estimate of the expected kernel energy of jittered samples
/// from `partition`: one uniform point per cell, `trials` independent draws.
pub fn jitter_expectation(
    kernel: &KernelSpec,
    partition: &Partition,
    trials: usize,
    master_seed: u64,
    offdiag: bool,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    if kernel.is_singular() && !offdiag {
        return Err(Error::Invalid(
            "kernel is singular at t = 1; the off-diagonal energy is required".into(),
        ));
    }
    let values = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(master_seed, partition.n, trial);
            let pts = partition.jittered(&mut rng);
            if offdiag {
                kernel_energy_offdiag(&pts, kernel).map(|r| r.value)
            } else {
                kernel_energy(&pts, kernel).map(|r| r.value)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(estimate(&values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl SweepRow {
    pub fn single_trial(&self) -> bool {
        self.trials == 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub plan: TrialPlan,
    pub rows: Vec<SweepRow>,
}

fn family_points(plan: &TrialPlan, n: usize, trial: usize, partition: Option<&Partition>) -> Result<PointSet> {
    let d = plan.d;
    match &plan.family {
        Family::Jittered => {
            let mut rng = trial_rng(plan.master_seed, n, trial);
            Ok(partition.expect("partition for jittered rows").jittered(&mut rng))
        }
        Family::UniformRandom => {
            let seed = trial_rng(plan.master_seed, n, trial).next_u64();
            uniform_sphere(d, n, seed)
        }
        Family::Fibonacci => fibonacci_sphere(n),
        Family::FileSequence { manifest } => {
            let path = &manifest[&n];
            let ps = load_points(path, d)?;
            if ps.len() != n {
                return Err(Error::Invalid(format!(
                    "{} holds {} points, expected {n}",
                    path.display(),
                    ps.len()
                )));
            }
            Ok(ps)
        }
        Family::Minimizer { s, steps, step_size } => {
            let start = if d == 2 {
                fibonacci_sphere(n)?
            } else {
                uniform_sphere(d, n, plan.master_seed)?
            };
            if n < 2 {
                return Ok(start);
            }
            riesz_minimize(&start, *s, *steps, *step_size)
        }
    }
}

fn run_row(plan: &TrialPlan, n: usize) -> Result<SweepRow> {
    let partition = match plan.family {
        Family::Jittered => Some(eq_partition(plan.d, n)?),
        _ => None,
    };
    let trials = if plan.family.is_random() { plan.trials } else { 1 };
    let values = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let pts = family_points(plan, n, trial, partition.as_ref())?;
            evaluate_metric(&pts, &plan.metric, plan.tol)
        })
        .collect::<Result<Vec<f64>>>()?;
    let e = estimate(&values);
    Ok(SweepRow {
        n,
        mean: e.mean,
        stderr: e.stderr,
        trials,
    })
}

/// One row per distinct `N`, sorted by `N`. Deterministic families are
/// evaluated once per row (`trials = 1`).
pub fn run_sweep(plan: &TrialPlan) -> Result<SweepTable> {
    plan.validate()?;
    let mut ns = plan.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let row = run_row(plan, n).map_err(|e| e.context(format!("row N = {n}")))?;
        rows.push(row);
    }
    Ok(SweepTable {
        plan: plan.clone(),
        rows,
    })
}

impl SweepTable {
    /// CSV with columns `N,mean,stderr,trials`, preceded by `#` comment
    /// lines carrying `extra_header` and the plan as JSON.
    pub fn write_csv<W: Write>(&self, mut out: W, extra_header: &[String]) -> Result<()> {
        for line in extra_header {
            writeln!(out, "# {line}")?;
        }
        let plan = serde_json::to_string(&self.plan).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(out, "# plan {plan}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "mean", "stderr", "trials"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                format!("{:e}", r.mean),
                format!("{:e}", r.stderr),
                r.trials.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, &[]).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Reads a table written by [`SweepTable::write_csv`]. Tables without a
    /// plan comment get `fallback_plan`.
    pub fn read_csv<R: Read>(mut input: R, fallback_plan: Option<TrialPlan>) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let plan = text
            .lines()
            .filter_map(|l| l.strip_prefix("# plan "))
            .next_back()
            .map(serde_json::from_str::<TrialPlan>)
            .transpose()
            .map_err(|e| Error::Invalid(format!("bad plan comment: {e}")))?
            .or(fallback_plan)
            .ok_or_else(|| Error::Invalid("table carries no plan".into()))?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = |i: usize| {
                rec.get(i).ok_or_else(|| Error::Parse {
                    line: k + 2,
                    msg: format!("missing column {i}"),
                })
            };
            let num = |i: usize| -> Result<f64> {
                field(i)?.parse().map_err(|_| Error::Parse {
                    line: k + 2,
                    msg: format!("bad number in column {i}"),
                })
            };
            rows.push(SweepRow {
                n: num(0)? as usize,
                mean: num(1)?,
                stderr: num(2)?,
                trials: num(3)? as usize,
            });
        }
        rows.sort_by_key(|r| r.n);
        Ok(Self { plan, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

/// Known leading behaviour subtracted before fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Leading {
    Constant { value: f64 },
    /// `coef * N^exponent`
    Power { coef: f64, exponent: f64 },
}

impl Leading {
    pub fn at(&self, n: f64) -> f64 {
        match *self {
            Leading::Constant { value } => value,
            Leading::Power { coef, exponent } => coef * n.powf(exponent),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    Raw,
    /// `|mean - leading(N)|`
    SubtractLeading { leading: Leading },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub transform: Transform,
    /// Values are multiplied by `N^scale_power` before fitting.
    pub scale_power: f64,
    /// Values are divided by `(ln N)^log_power` before fitting.
    pub log_power: f64,
    pub include_smallest: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            transform: Transform::Raw,
            scale_power: 0.0,
            log_power: 0.0,
            include_smallest: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope (0 with fewer than three points).
    pub slope_stderr: f64,
    /// `(N, ln y - fitted)` for every row used.
    pub residuals: Vec<(usize, f64)>,
    /// Rows left out: the smallest `N` unless included, and rows whose
    /// transformed value is not positive.
    pub excluded: Vec<usize>,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Invalid("need at least two points for a fit".into()));
    }
    let m = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("all N are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let se = if points.len() > 2 {
        (sse / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, r2, se))
}

/// Fits `ln y = slope ln N + intercept` to the transformed table values.
pub fn fit_exponent(table: &SweepTable, options: &FitOptions) -> Result<FitResult> {
    let mut excluded = Vec::new();
    let mut pts = Vec::new();
    let smallest = table.rows.iter().map(|r| r.n).min();
    for r in &table.rows {
        if !options.include_smallest && Some(r.n) == smallest {
            excluded.push(r.n);
            continue;
        }
        let nf = r.n as f64;
        let base = match &options.transform {
            Transform::Raw => r.mean,
            Transform::SubtractLeading { leading } => (r.mean - leading.at(nf)).abs(),
        };
        let mut y = base * nf.powf(options.scale_power);
        if options.log_power != 0.0 {
            y /= nf.ln().powf(options.log_power);
        }
        if y > 0.0 && y.is_finite() {
            pts.push((nf, y));
        } else {
            excluded.push(r.n);
        }
    }
    if pts.len() < 3 {
        return Err(Error::Invalid(format!(
            "only {} usable rows for a fit, need at least 3",
            pts.len()
        )));
    }
    let (slope, intercept, r_squared, slope_stderr) = fit_power_law(&pts)?;
    let residuals = pts
        .iter()
        .map(|&(n, y)| (n as usize, y.ln() - intercept - slope * n.ln()))
        .collect();
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        residuals,
        excluded,
    })
}

/// Two-sided normal quantile for the confidence bands of the comparison.
pub const BAND_Z: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "deterministic better")]
    DeterministicBetter,
    #[serde(rename = "comparable")]
    Comparable,
    #[serde(rename = "probabilistic better")]
    ProbabilisticBetter,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::DeterministicBetter => "deterministic better",
            Verdict::Comparable => "comparable",
            Verdict::ProbabilisticBetter => "probabilistic better",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub deterministic: f64,
    pub probabilistic: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: Metric,
    pub rows: Vec<ComparisonRow>,
    pub deterministic_fit: FitResult,
    pub probabilistic_fit: FitResult,
    pub verdict: Verdict,
}

pub fn compare_report(deterministic: &SweepTable, probabilistic: &SweepTable) -> Result<ComparisonReport> {
    compare_report_with(deterministic, probabilistic, &FitOptions::default())
}

/// Side-by-side comparison. The verdict favours the family whose fitted
/// exponent is smaller when the two `BAND_Z` confidence bands are
/// disjoint.
pub fn compare_report_with(
    deterministic: &SweepTable,
    probabilistic: &SweepTable,
    options: &FitOptions,
) -> Result<ComparisonReport> {
    if deterministic.plan.metric != probabilistic.plan.metric {
        return Err(Error::Invalid("tables were computed for different metrics".into()));
    }
    let ns = |t: &SweepTable| t.rows.iter().map(|r| r.n).collect::<Vec<_>>();
    if ns(deterministic) != ns(probabilistic) {
        return Err(Error::Invalid("tables have different N lists".into()));
    }
    let rows = deterministic
        .rows
        .iter()
        .zip(&probabilistic.rows)
        .map(|(a, b)| ComparisonRow {
            n: a.n,
            deterministic: a.mean,
            probabilistic: b.mean,
            ratio: a.mean / b.mean,
        })
        .collect();
    let df = fit_exponent(deterministic, options)?;
    let pf = fit_exponent(probabilistic, options)?;
    let band = |f: &FitResult| (f.slope - BAND_Z * f.slope_stderr, f.slope + BAND_Z * f.slope_stderr);
    let (dlo, dhi) = band(&df);
    let (plo, phi) = band(&pf);
    let verdict = if dhi < plo {
        Verdict::DeterministicBetter
    } else if phi < dlo {
        Verdict::ProbabilisticBetter
    } else {
        Verdict::Comparable
    };
    Ok(ComparisonReport {
        metric: deterministic.plan.metric.clone(),
        rows,
        deterministic_fit: df,
        probabilistic_fit: pf,
        verdict,
    })
}

impl ComparisonReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>8} {:>16} {:>16} {:>10}", "N", "deterministic", "probabilistic", "ratio");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>8} {:>16.8e} {:>16.8e} {:>10.4}",
                r.n, r.deterministic, r.probabilistic, r.ratio
            );
        }
        let f = |x: &FitResult| format!("{:.4} +- {:.4} (r^2 = {:.4})", x.slope, BAND_Z * x.slope_stderr, x.r_squared);
        let _ = writeln!(out, "deterministic exponent: {}", f(&self.deterministic_fit));
        let _ = writeln!(out, "probabilistic exponent: {}", f(&self.probabilistic_fit));
        let _ = writeln!(out, "verdict: {}", self.verdict);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(ns: &[usize], f: impl Fn(f64) -> f64) -> SweepTable {
        let plan = TrialPlan::new(2, ns.to_vec(), 1, 0, Family::Fibonacci, Metric::Riesz { s: 1.0 });
        SweepTable {
            plan,
            rows: ns
                .iter()
                .map(|&n| SweepRow {
                    n,
                    mean: f(n as f64),
                    stderr: 0.0,
                    trials: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn exact_power_law() {
        let t = synthetic(&[10, 20, 40, 80, 160], |n| 3.0 * n * n);
        let fit = fit_exponent(&t, &FitOptions::default()).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.excluded, vec![10]);
    }

    #[test]
    fn too_few_rows() {
        let t = synthetic(&[10, 20, 40], |n| n);
        assert!(fit_exponent(&t, &FitOptions::default()).is_err());
        let opts = FitOptions {
            include_smallest: true,
            ..Default::default()
        };
        assert!(fit_exponent(&t, &opts).is_ok());
    }

    #[test]
    fn nonpositive_rows_are_excluded() {
        let t = synthetic(&[10, 20, 40, 80, 160], |n| if n == 40.0 { 0.0 } else { n });
        let fit = fit_exponent(&t, &FitOptions::default()).unwrap();
        assert_eq!(fit.excluded, vec![10, 40]);
    }

    #[test]
    fn estimate_statistics() {
        let e = estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert_eq!(estimate(&[7.0]).stderr, 0.0);
    }

    #[test]
    fn plan_validation() {
        let mut p = TrialPlan::new(2, vec![], 1, 0, Family::UniformRandom, Metric::Riesz { s: 1.0 });
        assert!(run_sweep(&p).is_err());
        p.n_list = vec![10];
        p.metric = Metric::Kernel {
            kernel: KernelChoice::Riesz { s: 1.0 },
        };
        assert!(run_sweep(&p).is_err());
        p.metric = Metric::Riesz { s: 1.0 };
        p.family = Family::Fibonacci;
        p.d = 3;
        assert!(run_sweep(&p).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let t = synthetic(&[10, 20, 40], |n| n.sqrt());
        let back = SweepTable::read_csv(t.to_csv().as_bytes(), None).unwrap();
        assert_eq!(back, t);
    }
}
