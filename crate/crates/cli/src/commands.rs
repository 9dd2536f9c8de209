use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sphere_energy::energy::{
    kernel_energy, kernel_energy_offdiag, riesz_energy, v_d, KernelSpec, RieszExpansion,
};
use sphere_energy::experiments::{
    compare_report_with, fit_exponent, run_sweep, trial_rng, Family, FitOptions, KernelChoice,
    Leading, Metric, SweepTable, Transform, TrialPlan,
};
use sphere_energy::geometry::uniform_sphere;
use sphere_energy::partition::eq_partition;
use sphere_energy::pointsets::{
    fibonacci_sphere, fixture, load_points, points_to_text, riesz_minimize, separation, Fixture,
};
use sphere_energy::quality::{design_defect_tol, wce, WceSpace, DEFAULT_CERTIFY_TOL};
use sphere_energy::specfun::default_expansion_order;
use sphere_energy::PointSet;

use crate::config::{RunConfig, CONFIG_PREFIX};
use crate::{CliError, VERSION};

const DEFAULT_STEPS: usize = 200;
const DEFAULT_STEP_SIZE: f64 = 0.05;

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn text_header(cfg: &RunConfig) -> String {
    format!("# sphere-energy {VERSION}\n{CONFIG_PREFIX}{}\n", cfg.to_json())
}

fn json_artifact(cfg: &RunConfig, key: &str, value: impl Serialize) -> Result<String, CliError> {
    let doc = json!({
        "version": VERSION,
        "config": cfg,
        key: value,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numeric(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Dimension from the first data row of a point file.
fn infer_dim(path: &Path) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cols = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .map(|l| l.split_whitespace().count())
        .ok_or_else(|| CliError::Io(format!("{}: no points found", path.display())))?;
    if cols < 3 {
        return Err(CliError::Io(format!("{}: rows need at least 3 columns", path.display())));
    }
    Ok(cols - 1)
}

/// Loads the single input point file, recording the dimension in `cfg`.
fn input_points(cfg: &mut RunConfig) -> Result<PointSet, CliError> {
    let path = match cfg.inputs.as_slice() {
        [p] => p.clone(),
        [] => return Err(CliError::Usage("--in is required".into())),
        _ => return Err(CliError::Usage("expected exactly one --in file".into())),
    };
    let d = match cfg.d {
        Some(d) => d,
        None => infer_dim(&path)?,
    };
    cfg.d = Some(d);
    Ok(load_points(&path, d)?)
}

pub fn gen(mut cfg: RunConfig) -> Result<String, CliError> {
    let family = need(&cfg.family, "family")?;
    let points = if let Ok(f) = family.parse::<Fixture>() {
        if let Some(d) = cfg.d {
            if d != f.dim() {
                return Err(CliError::Usage(format!("{family} lives on S^{}, not S^{d}", f.dim())));
            }
        }
        cfg.d = Some(f.dim());
        fixture(&f)?
    } else {
        let d = *cfg.d.get_or_insert(2);
        let n = need(&cfg.n, "n")?;
        match family.as_str() {
            "fibonacci" => {
                if d != 2 {
                    return Err(CliError::Usage("the fibonacci family exists only for d = 2".into()));
                }
                fibonacci_sphere(n)?
            }
            "uniform" | "uniform-random" => uniform_sphere(d, n, *cfg.seed.get_or_insert(0))?,
            "jittered" => {
                let seed = *cfg.seed.get_or_insert(0);
                eq_partition(d, n)?.jittered(&mut trial_rng(seed, n, 0))
            }
            "minimizer" => {
                let s = *cfg.s.get_or_insert(1.0);
                let steps = *cfg.steps.get_or_insert(DEFAULT_STEPS);
                let step = *cfg.step_size.get_or_insert(DEFAULT_STEP_SIZE);
                let start = if d == 2 {
                    fibonacci_sphere(n)?
                } else {
                    uniform_sphere(d, n, *cfg.seed.get_or_insert(0))?
                };
                if n < 2 {
                    start
                } else {
                    riesz_minimize(&start, s, steps, step)?
                }
            }
            other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
        }
    };
    Ok(format!("{}{}", text_header(&cfg), points_to_text(&points)))
}

pub fn certify(mut cfg: RunConfig) -> Result<String, CliError> {
    let points = input_points(&mut cfg)?;
    let t = need(&cfg.t, "t")?;
    let tol = *cfg.tol.get_or_insert(DEFAULT_CERTIFY_TOL);
    let cert = design_defect_tol(&points, t, tol)?;
    let sep = if points.len() >= 2 { Some(separation(&points)?) } else { None };
    if sep.as_ref().is_some_and(|s| s.coincident) {
        eprintln!("warning: the point set contains coincident points");
    }
    let doc = json!({ "certificate": cert, "separation": sep, "n": points.len() });
    json_artifact(&cfg, "result", doc)
}

fn kernel_choice(cfg: &RunConfig) -> Result<KernelChoice, CliError> {
    match (&cfg.coeffs, cfg.s) {
        (Some(a), _) => Ok(KernelChoice::Coefficients { a: a.clone() }),
        (None, Some(s)) => Ok(KernelChoice::Riesz { s }),
        (None, None) => Err(CliError::Usage("kernel metrics need --coeffs or --s".into())),
    }
}

fn metric(cfg: &RunConfig) -> Result<Metric, CliError> {
    let name = need(&cfg.metric, "metric")?;
    Ok(match name.as_str() {
        "riesz" => Metric::Riesz { s: need(&cfg.s, "s")? },
        "kernel" => Metric::Kernel { kernel: kernel_choice(cfg)? },
        "kernel-offdiag" => Metric::KernelOffdiag { kernel: kernel_choice(cfg)? },
        "wce-sobolev" => Metric::WceSobolev { s: need(&cfg.s, "s")? },
        "wce-logspace" => Metric::WceLogspace { gamma: need(&cfg.gamma, "gamma")? },
        "defect" => Metric::Defect { t: need(&cfg.t, "t")? },
        other => return Err(CliError::Usage(format!("unknown metric {other:?}"))),
    })
}

fn expansion(mut cfg: RunConfig) -> Result<String, CliError> {
    let d = *cfg.d.get_or_insert(2);
    let s = need(&cfg.s, "s")?;
    let t = need(&cfg.t, "t")?;
    let k = *cfg.bigk.get_or_insert(default_expansion_order(d));
    let xs = cfg.x.get_or_insert_with(|| vec![0.0]).clone();
    let e = RieszExpansion::new(d, s, k)?;
    let mut rows = Vec::new();
    for x in xs {
        let h = e.h_t(t, x)?;
        let r = if x.abs() < 1.0 { Some(e.r_t(t, x)?) } else { None };
        rows.push(json!({ "x": x, "h_t": h, "r_t": r, "target": (x < 1.0).then(|| e.target(x)) }));
    }
    json_artifact(&cfg, "result", rows)
}

pub fn energy(mut cfg: RunConfig) -> Result<String, CliError> {
    if cfg.metric.as_deref() == Some("expansion") {
        return expansion(cfg);
    }
    let points = input_points(&mut cfg)?;
    let d = points.dim();
    let m = metric(&cfg)?;
    let tol = match m {
        Metric::WceSobolev { .. } | Metric::WceLogspace { .. } | Metric::Defect { .. } => {
            Some(*cfg.tol.get_or_insert(DEFAULT_CERTIFY_TOL))
        }
        _ => None,
    };
    let result = match &m {
        Metric::Riesz { s } => serde_json::to_value(riesz_energy(&points, *s)?),
        Metric::Kernel { kernel } => serde_json::to_value(kernel_energy(&points, &kernel.spec(d)?)?),
        Metric::KernelOffdiag { kernel } => {
            serde_json::to_value(kernel_energy_offdiag(&points, &kernel.spec(d)?)?)
        }
        Metric::WceSobolev { s } => serde_json::to_value(wce(&points, WceSpace::Sobolev { s: *s }, tol.unwrap())?),
        Metric::WceLogspace { gamma } => {
            serde_json::to_value(wce(&points, WceSpace::Logspace { gamma: *gamma }, tol.unwrap())?)
        }
        Metric::Defect { t } => serde_json::to_value(design_defect_tol(&points, *t, tol.unwrap())?),
    }
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    json_artifact(&cfg, "result", result)
}

fn family(cfg: &mut RunConfig) -> Result<Family, CliError> {
    let name = need(&cfg.family, "family")?;
    Ok(match name.as_str() {
        "jittered" => Family::Jittered,
        "uniform" | "uniform-random" => Family::UniformRandom,
        "fibonacci" => Family::Fibonacci,
        "minimizer" => Family::Minimizer {
            s: *cfg.s.get_or_insert(1.0),
            steps: *cfg.steps.get_or_insert(DEFAULT_STEPS),
            step_size: *cfg.step_size.get_or_insert(DEFAULT_STEP_SIZE),
        },
        "files" | "file-sequence" => {
            if cfg.inputs.is_empty() {
                return Err(CliError::Usage("the files family needs --in point files".into()));
            }
            let d = match cfg.d {
                Some(d) => d,
                None => infer_dim(&cfg.inputs[0])?,
            };
            cfg.d = Some(d);
            let mut manifest = BTreeMap::new();
            for p in &cfg.inputs {
                let n = load_points(p, d)?.len();
                if manifest.insert(n, p.clone()).is_some() {
                    return Err(CliError::Usage(format!("two input files hold {n} points")));
                }
            }
            cfg.n_list.get_or_insert_with(|| manifest.keys().copied().collect());
            Family::FileSequence { manifest }
        }
        other => return Err(CliError::Usage(format!("unknown family {other:?}"))),
    })
}

pub fn experiment(mut cfg: RunConfig) -> Result<String, CliError> {
    let fam = family(&mut cfg)?;
    let m = metric(&cfg)?;
    let d = *cfg.d.get_or_insert(2);
    let n_list = need(&cfg.n_list, "n-list")?;
    let trials = *cfg.trials.get_or_insert(1);
    let seed = *cfg.seed.get_or_insert(0);
    let mut plan = TrialPlan::new(d, n_list, trials, seed, fam, m);
    plan.tol = *cfg.tol.get_or_insert(DEFAULT_CERTIFY_TOL);
    let format = cfg.format.get_or_insert_with(|| "csv".into()).clone();
    if let Err(e) = plan.validate() {
        return Err(CliError::Usage(e.to_string()));
    }
    let table = run_sweep(&plan)?;
    match format.as_str() {
        "csv" => {
            let header = vec![format!("sphere-energy {VERSION}"), format!("config: {}", cfg.to_json())];
            let mut buf = Vec::new();
            table.write_csv(&mut buf, &header)?;
            Ok(String::from_utf8(buf).expect("csv is utf-8"))
        }
        "json" => json_artifact(&cfg, "table", &table),
        other => Err(CliError::Usage(format!("unknown format {other:?} (csv or json)"))),
    }
}

fn read_table(path: &Path) -> Result<SweepTable, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    SweepTable::read_csv(file, None).map_err(|e| match e {
        sphere_energy::Error::Io(_) => CliError::from(e),
        other => CliError::Io(format!("{}: {other}", path.display())),
    })
}

/// Leading term for `--leading auto`: the energy integral for Riesz
/// metrics and `a_0` for coefficient kernels.
fn auto_leading(metric: &Metric, d: usize) -> Result<Option<Leading>, CliError> {
    Ok(match metric {
        Metric::Riesz { s } => Some(Leading::Power { coef: 0.5 * v_d(*s, d)?, exponent: 2.0 }),
        Metric::Kernel { kernel } | Metric::KernelOffdiag { kernel } => {
            let spec: KernelSpec = kernel.spec(d)?;
            spec.mean()?.map(|value| Leading::Constant { value })
        }
        _ => None,
    })
}

fn fit_options(cfg: &mut RunConfig, table: &SweepTable) -> Result<FitOptions, CliError> {
    let leading = cfg.leading.get_or_insert_with(|| "none".into()).clone();
    let parts: Vec<&str> = leading.split(':').collect();
    let num = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad number {v:?} in --leading")))
    };
    let lead = match parts.as_slice() {
        ["none"] => None,
        ["auto"] => auto_leading(&table.plan.metric, table.plan.d)?,
        ["const", v] => Some(Leading::Constant { value: num(v)? }),
        ["power", c, e] => Some(Leading::Power { coef: num(c)?, exponent: num(e)? }),
        _ => return Err(CliError::Usage(format!("bad --leading {leading:?}"))),
    };
    Ok(FitOptions {
        transform: match lead {
            Some(leading) => Transform::SubtractLeading { leading },
            None => Transform::Raw,
        },
        scale_power: *cfg.scale_power.get_or_insert(0.0),
        log_power: *cfg.log_power.get_or_insert(0.0),
        include_smallest: *cfg.include_smallest.get_or_insert(false),
    })
}

pub fn fit(mut cfg: RunConfig) -> Result<String, CliError> {
    let path = match cfg.inputs.as_slice() {
        [p] => p.clone(),
        _ => return Err(CliError::Usage("fit needs exactly one --in table".into())),
    };
    let table = read_table(&path)?;
    let opts = fit_options(&mut cfg, &table)?;
    let result = fit_exponent(&table, &opts)?;
    json_artifact(&cfg, "fit", json!({ "options": opts, "result": result }))
}

pub fn compare(mut cfg: RunConfig) -> Result<String, CliError> {
    let (det, prob) = match cfg.inputs.as_slice() {
        [a, b] => (read_table(a)?, read_table(b)?),
        _ => {
            return Err(CliError::Usage(
                "compare needs two --in tables: deterministic, then probabilistic".into(),
            ))
        }
    };
    let opts = fit_options(&mut cfg, &det)?;
    let report = compare_report_with(&det, &prob, &opts)?;
    let format = cfg.format.get_or_insert_with(|| "text".into()).clone();
    match format.as_str() {
        "text" => Ok(format!("{}{}", text_header(&cfg), report.to_text())),
        "json" => json_artifact(&cfg, "report", &report),
        other => Err(CliError::Usage(format!("unknown format {other:?} (text or json)"))),
    }
}
