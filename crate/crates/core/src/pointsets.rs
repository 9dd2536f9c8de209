//! Point-set generators, text I/O, named fixtures, separation diagnostics and
//! a local Riesz energy minimizer.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{riesz_pair_sum, COINCIDENCE_TOL};
use crate::error::{domain, Error, Result};
use crate::geometry::{dist_sq, dot, norm, PointSet};

/// Rows whose norm differs from 1 by more than this are rejected on load.
pub const LOAD_NORM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fixture {
    Octahedron,
    Cube,
    Icosahedron,
    /// `2(d+1)` points `+-e_i` on S^d.
    CrossPolytope(usize),
    /// `d+2` vertices of the regular simplex inscribed in S^d.
    Simplex(usize),
}

impl Fixture {
    pub fn dim(&self) -> usize {
        match self {
            Fixture::Octahedron | Fixture::Cube | Fixture::Icosahedron => 2,
            Fixture::CrossPolytope(d) | Fixture::Simplex(d) => *d,
        }
    }
}

impl FromStr for Fixture {
    type Err = Error;

    /// Accepts `octahedron`, `cube`, `icosahedron`, `cross_polytope(3)`,
    /// `simplex(4)`; `-` and `_` are interchangeable and `name:d` also works.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        let (name, arg) = match s.find(['(', ':']) {
            Some(p) => {
                let arg = s[p + 1..].trim_end_matches(')');
                let d: usize = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad fixture dimension {arg:?}")))?;
                (&s[..p], Some(d))
            }
            None => (s.as_str(), None),
        };
        match (name, arg) {
            ("octahedron", None) => Ok(Fixture::Octahedron),
            ("cube", None) => Ok(Fixture::Cube),
            ("icosahedron", None) => Ok(Fixture::Icosahedron),
            ("cross_polytope", Some(d)) => Ok(Fixture::CrossPolytope(d)),
            ("simplex", Some(d)) => Ok(Fixture::Simplex(d)),
            ("cross_polytope" | "simplex", None) => {
                Err(Error::Invalid(format!("fixture {name} needs a dimension, e.g. {name}(3)")))
            }
            _ => Err(Error::Invalid(format!("unknown fixture {s:?}"))),
        }
    }
}

fn fixture_label(f: &Fixture) -> String {
    match f {
        Fixture::Octahedron => "octahedron".into(),
        Fixture::Cube => "cube".into(),
        Fixture::Icosahedron => "icosahedron".into(),
        Fixture::CrossPolytope(d) => format!("cross_polytope({d})"),
        Fixture::Simplex(d) => format!("simplex({d})"),
    }
}

pub fn fixture(f: &Fixture) -> Result<PointSet> {
    let d = f.dim();
    if d < 2 {
        return domain(format!("fixture dimension must be at least 2, got {d}"));
    }
    let rows: Vec<Vec<f64>> = match f {
        Fixture::Octahedron | Fixture::CrossPolytope(_) => (0..=d)
            .flat_map(|i| {
                [1.0, -1.0].into_iter().map(move |sign| {
                    let mut v = vec![0.0; d + 1];
                    v[i] = sign;
                    v
                })
            })
            .collect(),
        Fixture::Cube => (0..8)
            .map(|m| {
                (0..3)
                    .map(|b| if m >> b & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect(),
        Fixture::Icosahedron => {
            let phi = 0.5 * (1.0 + 5f64.sqrt());
            let mut rows = Vec::with_capacity(12);
            for a in [1.0, -1.0] {
                for b in [phi, -phi] {
                    rows.push(vec![0.0, a, b]);
                    rows.push(vec![a, b, 0.0]);
                    rows.push(vec![b, 0.0, a]);
                }
            }
            rows
        }
        Fixture::Simplex(_) => {
            // vertices e_i - centroid of R^{d+2}, in a Helmert basis of the
            // hyperplane orthogonal to (1, ..., 1)
            let m = d + 2;
            (0..m)
                .map(|i| {
                    (1..m)
                        .map(|k| {
                            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
                            if i < k {
                                scale
                            } else if i == k {
                                -(k as f64) * scale
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect()
        }
    };
    PointSet::normalized(d, rows, fixture_label(f))
}

/// Parses the text point format: `d + 1` whitespace-separated floats per
/// line, blank lines and `#` comments ignored.
pub fn parse_points(text: &str, d: usize, label: impl Into<String>) -> Result<PointSet> {
    let mut coords = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("non-numeric token {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != d + 1 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {} columns, found {}", d + 1, row.len()),
            });
        }
        let n = norm(&row);
        if !((n - 1.0).abs() <= LOAD_NORM_TOL) {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("row norm {n} is not within {LOAD_NORM_TOL} of 1"),
            });
        }
        // rows written by `points_to_text` are left untouched
        if (n - 1.0).abs() <= 1e-15 {
            coords.extend(row);
        } else {
            coords.extend(row.iter().map(|v| v / n));
        }
    }
    if coords.is_empty() {
        return Err(Error::Invalid("no points found".into()));
    }
    PointSet::from_flat(d, coords, label)
}

pub fn load_points(path: impl AsRef<Path>, d: usize) -> Result<PointSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let label = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_points(&text, d, label)
}

/// Shortest round-trip representation of every coordinate.
pub fn points_to_text(points: &PointSet) -> String {
    let mut out = String::new();
    if !points.label.is_empty() {
        let _ = writeln!(out, "# {}", points.label.replace('\n', " "));
    }
    let _ = writeln!(out, "# d={} n={}", points.dim(), points.len());
    for p in points.iter() {
        let row: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn save_points(points: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, points_to_text(points))?;
    Ok(())
}

/// Spherical Fibonacci lattice on S^2.
pub fn fibonacci_sphere(n: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Invalid("need at least one point".into()));
    }
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let nf = n as f64;
    let rows = (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / nf;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect();
    PointSet::normalized(2, rows, format!("fibonacci(n={n})"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub min_distance: f64,
    /// `min_distance * N^{1/d}`
    pub c1_hat: f64,
    pub argmin_pair: (usize, usize),
    /// Set when two points coincide (distance below the singularity guard).
    pub coincident: bool,
}

/// Exact minimum pairwise chordal distance.
pub fn separation(points: &PointSet) -> Result<SeparationReport> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Invalid("separation needs at least two points".into()));
    }
    let rows: Vec<(f64, usize)> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let xi = points.point(i);
            let mut best = (f64::INFINITY, i + 1);
            for j in i + 1..n {
                let r2 = dist_sq(xi, points.point(j));
                if r2 < best.0 {
                    best = (r2, j);
                }
            }
            best
        })
        .collect();
    let (i, &(r2, j)) = rows
        .iter()
        .enumerate()
        .fold(None::<(usize, &(f64, usize))>, |acc, cur| match acc {
            Some(a) if a.1 .0 <= cur.1 .0 => Some(a),
            _ => Some(cur),
        })
        .expect("at least one row");
    let min_distance = r2.sqrt();
    Ok(SeparationReport {
        min_distance,
        c1_hat: min_distance * (n as f64).powf(1.0 / points.dim() as f64),
        argmin_pair: (i, j),
        coincident: min_distance < COINCIDENCE_TOL,
    })
}

/// Progress record of [`riesz_minimize_traced`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeTrace {
    pub points: PointSet,
    /// Energy after each accepted step, starting with the initial energy.
    pub energies: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub final_step: f64,
    /// Largest tangential gradient norm at the returned configuration.
    pub gradient_norm: f64,
}

/// Tangential gradient of `sum_{i<j} |x_i - x_j|^{-s}` for every point.
fn riesz_gradient(points: &PointSet, s: f64) -> Vec<f64> {
    let n = points.len();
    let m = points.ambient_dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = points.point(i);
            let mut g = vec![0.0; m];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let xj = points.point(j);
                let r2 = dist_sq(xi, xj);
                let w = -s * r2.powf(-0.5 * s - 1.0);
                for k in 0..m {
                    g[k] += w * (xi[k] - xj[k]);
                }
            }
            let radial = dot(&g, xi);
            g.iter_mut().zip(xi).for_each(|(gk, xk)| *gk -= radial * xk);
            g
        })
        .collect();
    rows.into_iter().flatten().collect()
}

/// Projected gradient descent on the Riesz s-energy.
///
/// Each step moves every point against its tangential gradient by
/// `step * g_i / max_j |g_j|` (an angular displacement of at most `step`)
/// and renormalizes. A step that increases the energy is rejected and the
/// step halved; an accepted step grows it by 10%. Stops after `steps`
/// iterations, when the step underflows, or at a critical configuration.
pub fn riesz_minimize_traced(
    start: &PointSet,
    s: f64,
    steps: usize,
    step_size: f64,
) -> Result<MinimizeTrace> {
    let d = start.dim();
    if !(s > 0.0 && s < d as f64) {
        return domain(format!("Riesz exponent s = {s} outside (0, {d})"));
    }
    if !(step_size > 0.0) {
        return domain(format!("step size must be positive, got {step_size}"));
    }
    if start.len() >= 2 && separation(start)?.coincident {
        return Err(Error::Singular("start configuration has coincident points".into()));
    }
    let m = start.ambient_dim();
    let mut current = start.clone();
    let mut energy = riesz_pair_sum(&current, s);
    let mut energies = vec![energy];
    let (mut accepted, mut rejected) = (0, 0);
    let mut step = step_size;
    let mut grad = riesz_gradient(&current, s);
    let gnorm = |g: &[f64]| g.chunks_exact(m).map(norm).fold(0.0, f64::max);
    let mut gmax = gnorm(&grad);
    let scale = energy.abs().max(1.0);
    for _ in 0..steps {
        if gmax <= 1e-13 * scale || step < 1e-16 {
            break;
        }
        let mut coords = Vec::with_capacity(current.coords().len());
        for (x, g) in current.iter().zip(grad.chunks_exact(m)) {
            let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - step * b / gmax).collect();
            let ny = norm(&y);
            y.iter_mut().for_each(|v| *v /= ny);
            coords.extend(y);
        }
        let candidate = PointSet::from_flat(d, coords, current.label.clone())?;
        let e = riesz_pair_sum(&candidate, s);
        if e.is_finite() && e <= energy {
            current = candidate;
            energy = e;
            energies.push(e);
            accepted += 1;
            step *= 1.1;
            grad = riesz_gradient(&current, s);
            gmax = gnorm(&grad);
        } else {
            rejected += 1;
            step *= 0.5;
        }
    }
    current.label = format!("minimized(s={s}) from {}", start.label);
    Ok(MinimizeTrace {
        points: current,
        energies,
        accepted,
        rejected,
        final_step: step,
        gradient_norm: gmax,
    })
}

pub fn riesz_minimize(start: &PointSet, s: f64, steps: usize, step_size: f64) -> Result<PointSet> {
    riesz_minimize_traced(start, s, steps, step_size).map(|t| t.points)
}
