//! Recursive zonal equal-area partitions of S^d.
//!
//! The sphere is cut into two polar caps and a sequence of collars whose
//! areas are integer multiples of `1/N`; every collar is then split by
//! partitioning the equatorial sphere S^{d-1} recursively. The recursion ends
//! on the circle S^1, which is cut into equal arcs. Cells are products of a
//! polar interval and a base region, so their measures are exact and uniform
//! sampling inside a cell reduces to one-dimensional inverse-CDF draws.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{cap_area, cap_radius_for_area, norm, Cap, PointSet};
use crate::specfun::ln_gamma;

/// Base of a cell: the region of S^{k-1} swept along its polar interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CellBase {
    /// The whole equatorial sphere (polar caps and single-cell collars).
    Full,
    /// Longitude interval `[lo, hi]` of S^1.
    Arc { lo: f64, hi: f64 },
    /// A cell of the partition of S^{k-1}.
    Cell(Box<Cell>),
}

/// Product cell `{(sin t * y, cos t) : t in [lo, hi], y in base}` of S^k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub polar: (f64, f64),
    pub base: CellBase,
}

/// Largest cap around the cell's angular midpoint contained in the cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerCap {
    pub cap: Cap,
    /// Angular radius times `N^{1/d}`.
    pub scaled_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub d: usize,
    pub n: usize,
    pub cells: Vec<Cell>,
}

fn sphere_surface(k: usize) -> f64 {
    let a = 0.5 * (k as f64 + 1.0);
    2.0 * (a * PI.ln() - ln_gamma(a)).exp()
}

/// Rounds `ideal` to non-negative integers, carrying the remainder forward
/// so the total is preserved.
fn round_carrying(ideal: &[f64]) -> Vec<usize> {
    let mut carry = 0.0;
    ideal
        .iter()
        .map(|&v| {
            let r = (v + carry).round().max(0.0);
            carry += v - r;
            r as usize
        })
        .collect()
}

fn eq_bases(k: usize, n: usize) -> Vec<CellBase> {
    if n == 1 {
        return vec![CellBase::Full];
    }
    if k == 1 {
        let w = TAU / n as f64;
        return (0..n)
            .map(|j| CellBase::Arc {
                lo: w * j as f64,
                hi: if j + 1 == n { TAU } else { w * (j + 1) as f64 },
            })
            .collect();
    }
    eq_cells(k, n)
        .into_iter()
        .map(|c| CellBase::Cell(Box::new(c)))
        .collect()
}

fn eq_cells(k: usize, n: usize) -> Vec<Cell> {
    if n == 1 {
        return vec![Cell {
            index: 0,
            polar: (0.0, PI),
            base: CellBase::Full,
        }];
    }
    let inv = 1.0 / n as f64;
    let c_polar = cap_radius_for_area(k, inv);
    let mut cells = Vec::with_capacity(n);
    cells.push(Cell {
        index: 0,
        polar: (0.0, c_polar),
        base: CellBase::Full,
    });
    if n > 2 {
        let ideal_angle = (sphere_surface(k) * inv).powf(1.0 / k as f64);
        let n_collars = (((PI - 2.0 * c_polar) / ideal_angle).round() as usize).max(1);
        let fit = (PI - 2.0 * c_polar) / n_collars as f64;
        let ideal: Vec<f64> = (0..n_collars)
            .map(|j| {
                let a = cap_area(k, c_polar + fit * (j + 1) as f64)
                    - cap_area(k, c_polar + fit * j as f64);
                a * n as f64
            })
            .collect();
        let mut counts = round_carrying(&ideal);
        let total: usize = counts.iter().sum();
        // floating drift in the ideal sizes can leave the total off by one
        if total != n - 2 {
            let last = counts.len() - 1;
            counts[last] = (counts[last] + n - 2).saturating_sub(total);
        }
        let mut below = 1usize;
        let mut lo = c_polar;
        for &m in &counts {
            if m == 0 {
                continue;
            }
            below += m;
            let hi = if below == n - 1 {
                cap_radius_for_area(k, 1.0 - inv)
            } else {
                cap_radius_for_area(k, below as f64 * inv)
            };
            for base in eq_bases(k - 1, m) {
                cells.push(Cell {
                    index: cells.len(),
                    polar: (lo, hi),
                    base,
                });
            }
            lo = hi;
        }
    }
    let lo = cap_radius_for_area(k, 1.0 - inv);
    cells.push(Cell {
        index: cells.len(),
        polar: (lo, PI),
        base: CellBase::Full,
    });
    cells
}

/// Recursive zonal equal-area partition of S^d into `n` cells.
pub fn eq_partition(d: usize, n: usize) -> Result<Partition> {
    if d < 2 {
        return domain(format!("sphere dimension must be at least 2, got {d}"));
    }
    if n == 0 {
        return Err(Error::Invalid("partition needs at least one cell".into()));
    }
    Ok(Partition {
        d,
        n,
        cells: eq_cells(d, n),
    })
}

fn base_fraction(base: &CellBase, k: usize) -> f64 {
    match base {
        CellBase::Full => 1.0,
        CellBase::Arc { lo, hi } => (hi - lo) / TAU,
        CellBase::Cell(c) => cell_area(c, k - 1),
    }
}

/// Normalized measure of a cell of S^k from its product structure.
pub fn cell_area(cell: &Cell, k: usize) -> f64 {
    let (lo, hi) = cell.polar;
    (cap_area(k, hi) - cap_area(k, lo)) * base_fraction(&cell.base, k)
}

/// Colatitude with `cap_area(k, t) = target`, searched in `[lo, hi]`.
fn invert_cap_area(k: usize, target: f64, lo: f64, hi: f64) -> f64 {
    if k == 2 {
        // cap_area = sin^2(t / 2)
        let t = 2.0 * target.clamp(0.0, 1.0).sqrt().asin();
        return t.clamp(lo, hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        if cap_area(k, m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn sample_base<R: Rng + ?Sized>(base: &CellBase, k: usize, rng: &mut R) -> Vec<f64> {
    match base {
        CellBase::Full => {
            if k == 1 {
                let phi = rng.random::<f64>() * TAU;
                return vec![phi.cos(), phi.sin()];
            }
            loop {
                let v: Vec<f64> = (0..=k).map(|_| StandardNormal.sample(rng)).collect();
                let n = norm(&v);
                if n > 1e-8 {
                    return v.into_iter().map(|x| x / n).collect();
                }
            }
        }
        CellBase::Arc { lo, hi } => {
            let phi = lo + (hi - lo) * rng.random::<f64>();
            vec![phi.cos(), phi.sin()]
        }
        CellBase::Cell(c) => cell_sample(c, k, rng),
    }
}

/// Uniform random point in a cell of S^k.
pub fn cell_sample<R: Rng + ?Sized>(cell: &Cell, k: usize, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = cell.polar;
    let f_lo = cap_area(k, lo);
    let f_hi = cap_area(k, hi);
    let u = f_lo + (f_hi - f_lo) * rng.random::<f64>();
    let (sin_t, cos_t) = if k == 2 {
        // cos t = 1 - 2u, sin t = 2 sqrt(u (1 - u))
        let u = u.clamp(0.0, 1.0);
        (2.0 * (u * (1.0 - u)).sqrt(), 1.0 - 2.0 * u)
    } else {
        let t = invert_cap_area(k, u, lo, hi);
        (t.sin(), t.cos())
    };
    let y = sample_base(&cell.base, k - 1, rng);
    let mut x: Vec<f64> = y.into_iter().map(|v| v * sin_t).collect();
    x.push(cos_t);
    x
}

fn base_contains(base: &CellBase, k: usize, y: &[f64], tol: f64) -> bool {
    match base {
        CellBase::Full => true,
        CellBase::Arc { lo, hi } => {
            let mut phi = y[1].atan2(y[0]);
            if phi < 0.0 {
                phi += TAU;
            }
            (phi >= lo - tol && phi <= hi + tol) || (phi + TAU <= hi + tol) || (phi - TAU >= lo - tol)
        }
        CellBase::Cell(c) => cell_contains(c, k, y, tol),
    }
}

/// Membership test with angular tolerance `tol`.
pub fn cell_contains(cell: &Cell, k: usize, x: &[f64], tol: f64) -> bool {
    let t = x[k].clamp(-1.0, 1.0).acos();
    if t < cell.polar.0 - tol || t > cell.polar.1 + tol {
        return false;
    }
    let s = norm(&x[..k]);
    if s < 1e-14 {
        // at a pole: only cells touching it with a full base contain it
        return matches!(cell.base, CellBase::Full) || cell.polar.0 <= tol || cell.polar.1 >= PI - tol;
    }
    let y: Vec<f64> = x[..k].iter().map(|v| v / s).collect();
    // angular tolerance on the base shrinks with the distance to the axis
    base_contains(&cell.base, k - 1, &y, tol / s.max(1e-3))
}

fn base_diameter(base: &CellBase, k: usize) -> f64 {
    match base {
        CellBase::Full => 2.0,
        CellBase::Arc { lo, hi } => {
            let w = (hi - lo).min(PI);
            2.0 * (0.5 * w).sin()
        }
        CellBase::Cell(c) => cell_diameter(c, k - 1),
    }
}

/// Upper estimate of the chordal diameter of a cell of S^k.
///
/// For polar angles `t1, t2` and base points at inner product `c`, the
/// squared chord is `2 - 2 (cos t1 cos t2 + c sin t1 sin t2)`. With `c` at
/// its lower bound from the base diameter, the expression is minimized over
/// `[lo, hi]^2` exactly (edges and the interior critical point).
pub fn cell_diameter(cell: &Cell, k: usize) -> f64 {
    let (lo, hi) = cell.polar;
    let db = base_diameter(&cell.base, k).min(2.0);
    let c = 1.0 - 0.5 * db * db;
    let g = |a: f64, b: f64| a.cos() * b.cos() + c * a.sin() * b.sin();
    let mut best = f64::INFINITY;
    let mut consider = |a: f64, b: f64| {
        if (lo..=hi).contains(&a) && (lo..=hi).contains(&b) {
            best = best.min(g(a, b));
        }
    };
    for &a in &[lo, hi] {
        consider(a, lo);
        consider(a, hi);
        consider(lo, a);
        consider(hi, a);
        // along the edge t1 = a: g = R cos(t2 - psi), minimal at psi + pi
        let psi = (c * a.sin()).atan2(a.cos());
        for cand in [psi + PI, psi - PI, psi] {
            consider(a, cand);
            consider(cand, a);
        }
    }
    consider(0.5 * PI, 0.5 * PI);
    (2.0 - 2.0 * best).max(0.0).sqrt().min(2.0)
}

fn base_inner(base: &CellBase, k: usize) -> Option<(Vec<f64>, f64)> {
    match base {
        CellBase::Full => None,
        CellBase::Arc { lo, hi } => {
            let m = 0.5 * (lo + hi);
            Some((vec![m.cos(), m.sin()], 0.5 * (hi - lo)))
        }
        CellBase::Cell(c) => {
            let (center, r) = inner_cap_raw(c, k - 1);
            Some((center, r))
        }
    }
}

fn any_base_point(k: usize) -> Vec<f64> {
    let mut y = vec![0.0; k + 1];
    y[0] = 1.0;
    y
}

fn inner_cap_raw(cell: &Cell, k: usize) -> (Vec<f64>, f64) {
    let (lo, hi) = cell.polar;
    let full = matches!(cell.base, CellBase::Full);
    if full && lo <= 0.0 {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        return (c, hi.min(PI));
    }
    if full && hi >= PI {
        let mut c = vec![0.0; k + 1];
        c[k] = -1.0;
        return (c, PI - lo);
    }
    let t = 0.5 * (lo + hi);
    let mut r = 0.5 * (hi - lo);
    let y = match base_inner(&cell.base, k) {
        None => any_base_point(k - 1),
        Some((y, beta)) => {
            if beta < 0.5 * PI {
                // points of a cap of radius r around the centre deviate in
                // base direction by asin(sin r / sin t)
                r = r.min((t.sin() * beta.sin()).clamp(-1.0, 1.0).asin());
            }
            y
        }
    };
    let mut c: Vec<f64> = y.into_iter().map(|v| v * t.sin()).collect();
    c.push(t.cos());
    (c, r)
}

/// Largest cap centred at the cell's angular midpoint that fits inside it.
pub fn inner_cap(cell: &Cell, k: usize, n: usize) -> Result<InnerCap> {
    let (lo, hi) = cell.polar;
    if !(hi > lo) {
        return domain(format!("degenerate cell {} with polar interval [{lo}, {hi}]", cell.index));
    }
    if let CellBase::Arc { lo, hi } = cell.base {
        if !(hi > lo) {
            return domain(format!("degenerate arc [{lo}, {hi}]"));
        }
    }
    let (center, r) = inner_cap_raw(cell, k);
    if r <= 0.0 {
        return domain(format!("cell {} has no interior", cell.index));
    }
    let n_norm = norm(&center);
    let center = center.into_iter().map(|v| v / n_norm).collect();
    Ok(InnerCap {
        cap: Cap::new(center, r)?,
        scaled_radius: r * (n as f64).powf(1.0 / k as f64),
    })
}

fn write_base(out: &mut String, base: &CellBase) {
    match base {
        CellBase::Full => out.push_str(" full"),
        CellBase::Arc { lo, hi } => {
            let _ = write!(out, " arc {lo:e} {hi:e}");
        }
        CellBase::Cell(c) => {
            let _ = write!(out, " sub {} {:e} {:e}", c.index, c.polar.0, c.polar.1);
            write_base(out, &c.base);
        }
    }
}

fn parse_base<'a, I: Iterator<Item = &'a str>>(tokens: &mut I, line: usize) -> Result<CellBase> {
    let err = |msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let num = |t: Option<&str>| -> Result<f64> {
        t.ok_or_else(|| err("missing number"))?
            .parse::<f64>()
            .map_err(|e| err(&e.to_string()))
    };
    match tokens.next() {
        Some("full") => Ok(CellBase::Full),
        Some("arc") => Ok(CellBase::Arc {
            lo: num(tokens.next())?,
            hi: num(tokens.next())?,
        }),
        Some("sub") => {
            let index = tokens
                .next()
                .ok_or_else(|| err("missing index"))?
                .parse::<usize>()
                .map_err(|e| err(&e.to_string()))?;
            let lo = num(tokens.next())?;
            let hi = num(tokens.next())?;
            let base = parse_base(tokens, line)?;
            Ok(CellBase::Cell(Box::new(Cell {
                index,
                polar: (lo, hi),
                base,
            })))
        }
        other => Err(err(&format!("unexpected token {other:?}"))),
    }
}

impl Partition {
    pub fn cell_area(&self, i: usize) -> f64 {
        cell_area(&self.cells[i], self.d)
    }

    pub fn cell_diameter(&self, i: usize) -> f64 {
        cell_diameter(&self.cells[i], self.d)
    }

    pub fn inner_cap(&self, i: usize) -> Result<InnerCap> {
        inner_cap(&self.cells[i], self.d, self.n)
    }

    pub fn contains(&self, i: usize, x: &[f64]) -> bool {
        cell_contains(&self.cells[i], self.d, x, 1e-10)
    }

    /// One uniform point per cell, drawn in cell order from `rng`.
    pub fn jittered<R: Rng + ?Sized>(&self, rng: &mut R) -> PointSet {
        let coords: Vec<f64> = self
            .cells
            .iter()
            .flat_map(|c| cell_sample(c, self.d, rng))
            .collect();
        PointSet::from_flat(self.d, coords, format!("jittered(d={}, n={})", self.d, self.n))
            .expect("cell samples are unit vectors")
    }

    /// Text form: one line per cell, `index lo hi` followed by the nested
    /// base path (`full`, `arc lo hi`, or `sub index lo hi ...`).
    pub fn to_text(&self) -> String {
        let mut out = format!("# eq_partition d={} n={}\n", self.d, self.n);
        for c in &self.cells {
            let _ = write!(out, "{} {:e} {:e}", c.index, c.polar.0, c.polar.1);
            write_base(&mut out, &c.base);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty partition file".into(),
        })?;
        let mut d = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            if let Some(v) = tok.strip_prefix("d=") {
                d = v.parse::<usize>().ok();
            } else if let Some(v) = tok.strip_prefix("n=") {
                n = v.parse::<usize>().ok();
            }
        }
        let (d, n) = d.zip(n).ok_or(Error::Parse {
            line: 1,
            msg: "header must carry d= and n=".into(),
        })?;
        let mut cells = Vec::with_capacity(n);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let mut next_num = |what: &str| -> Result<f64> {
                tokens
                    .next()
                    .and_then(|t| t.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: i + 1,
                        msg: format!("bad {what}"),
                    })
            };
            let index = next_num("index")? as usize;
            let lo = next_num("lower colatitude")?;
            let hi = next_num("upper colatitude")?;
            let base = parse_base(&mut tokens, i + 1)?;
            cells.push(Cell {
                index,
                polar: (lo, hi),
                base,
            });
        }
        if cells.len() != n {
            return Err(Error::Invalid(format!("expected {n} cells, found {}", cells.len())));
        }
        Ok(Partition { d, n, cells })
    }
}
