//! Quadrature quality measures: per-degree design defects and worst-case
//! errors of equal-weight cubature in the Sobolev space `H^s(S^d)` and the
//! logarithmically weighted space `H^{(d/2, gamma)}(S^d)`.
//!
//! Both worst-case errors are kernel double sums
//! `wce^2 = N^{-2} sum_{i,j} K(<x_i, x_j>)` with
//! `K(t) = sum_{l >= 1} a_l P_l^{(d)}(t)`. Small problems sum the series
//! directly up to a degree whose tail `sum_{l > L} a_l` is below the
//! tolerance. When that degree is out of reach (slowly decaying weights or
//! large `N`), `K` is tabulated once per space: `K(1)` exactly (direct sum
//! plus an integral tail) and `K(t)` for `t < 1` from smoothly filtered
//! Legendre sums whose degree adapts to the angle.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::ZonalFunction;
use crate::error::{domain, Result};
use crate::geometry::{dist_sq, dot, PointSet};
use crate::quad::tanh_sinh;
use crate::specfun::{ln_gamma, ln_gamma_ratio, zdim_f64, LegendreSeq};
use crate::sum::{ordered_row_sum, ordered_row_sum_vec, CompensatedSum};

pub const DEFAULT_CERTIFY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub t_checked: usize,
    /// `defects[l - 1] = D_l` for `l = 1..=t_checked`.
    pub defects: Vec<f64>,
    pub certified_t: usize,
    pub tol: f64,
}

impl DesignCertificate {
    pub fn defect(&self, ell: usize) -> f64 {
        self.defects[ell - 1]
    }
}

/// Per-degree pair sums `sum_{i,j} P_l^{(d)}(<x_i, x_j>)` for `l = 1..=t`.
fn legendre_pair_sums(points: &PointSet, t: usize) -> Vec<f64> {
    let n = points.len();
    let d = points.dim();
    let upper = ordered_row_sum_vec(n, t, |i| {
        let xi = points.point(i);
        let mut row = vec![CompensatedSum::new(); t];
        for j in i + 1..n {
            let c = dot(xi, points.point(j)).clamp(-1.0, 1.0);
            for (acc, p) in row.iter_mut().zip(LegendreSeq::new(d, c).skip(1)) {
                acc.add(p);
            }
        }
        row.iter().map(CompensatedSum::value).collect()
    });
    upper.into_iter().map(|u| 2.0 * u + n as f64).collect()
}

pub fn design_defect(points: &PointSet, t: usize) -> Result<DesignCertificate> {
    design_defect_tol(points, t, DEFAULT_CERTIFY_TOL)
}

/// `D_l = Z(d, l) N^{-2} sum_{i,j} P_l^{(d)}(<x_i, x_j>)` for `l = 1..=t`.
/// The set is a `t`-design iff all of them vanish.
pub fn design_defect_tol(points: &PointSet, t: usize, tol: f64) -> Result<DesignCertificate> {
    if t == 0 {
        return domain("design degree must be at least 1");
    }
    let nf = points.len() as f64;
    let d = points.dim();
    let defects: Vec<f64> = legendre_pair_sums(points, t)
        .into_iter()
        .enumerate()
        .map(|(k, s)| zdim_f64(d, k as u64 + 1) * s / (nf * nf))
        .collect();
    let certified_t = defects.iter().take_while(|&&v| v <= tol).count();
    Ok(DesignCertificate {
        t_checked: t,
        defects,
        certified_t,
        tol,
    })
}

/// Function space of the worst-case error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WceSpace {
    /// Weights `(1 + lambda_l)^{-s}`, `s > d/2`.
    Sobolev { s: f64 },
    /// Weights `(1 + lambda_l)^{-d/2} (ln(2 + lambda_l))^{-2 gamma}`, `gamma > 1/2`.
    Logspace { gamma: f64 },
}

impl WceSpace {
    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            WceSpace::Sobolev { s } if !(s > 0.5 * d as f64) => {
                domain(format!("Sobolev smoothness s = {s} must exceed d/2 = {}", 0.5 * d as f64))
            }
            WceSpace::Logspace { gamma } if !(gamma > 0.5) => {
                domain(format!("log-space exponent gamma = {gamma} must exceed 1/2"))
            }
            _ => Ok(()),
        }
    }

    fn key(&self) -> (u8, u64) {
        match *self {
            WceSpace::Sobolev { s } => (0, s.to_bits()),
            WceSpace::Logspace { gamma } => (1, gamma.to_bits()),
        }
    }

    /// Natural log of the eigenvalue weight at `lambda` given `ln(1 + lambda)`
    /// and `ln(2 + lambda)`.
    fn ln_eigen_weight(&self, d: usize, ln1: f64, ln2: f64) -> f64 {
        match *self {
            WceSpace::Sobolev { s } => -s * ln1,
            WceSpace::Logspace { gamma } => -0.5 * d as f64 * ln1 - 2.0 * gamma * ln2.ln(),
        }
    }

    /// Kernel coefficient `a_l = weight(lambda_l) Z(d, l)` for integer `l`.
    pub fn coefficient(&self, d: usize, ell: u64) -> f64 {
        let l = ell as f64;
        let lambda = l * (l + d as f64 - 1.0);
        let w = self.ln_eigen_weight(d, lambda.ln_1p(), (2.0 + lambda).ln());
        w.exp() * zdim_f64(d, ell)
    }

    /// `ln(x a(x))` for the continuous extension of the coefficients in the
    /// degree, parametrized by `y = ln x` so that it stays finite for
    /// astronomically large `x`.
    fn ln_tail_density(&self, d: usize, y: f64) -> f64 {
        let df = d as f64;
        if y < 300.0 {
            let x = y.exp();
            let lambda = x * (x + df - 1.0);
            let ln_z = (2.0 * x + df - 1.0).ln() + ln_gamma_ratio(x, df - 1.0, 1.0) - ln_gamma(df);
            self.ln_eigen_weight(d, lambda.ln_1p(), (2.0 + lambda).ln()) + ln_z + y
        } else {
            // x a(x) ~ 2 x^d w(x^2) / Gamma(d); lower order terms are below e^{-300}
            let c = std::f64::consts::LN_2 - ln_gamma(df);
            match *self {
                WceSpace::Sobolev { s } => (df - 2.0 * s) * y + c,
                WceSpace::Logspace { gamma } => -2.0 * gamma * (2.0 * y).ln() + c,
            }
        }
    }

    /// `int_m^inf a(x) dx`; an upper bound for `sum_{l > m} a_l` since
    /// `a` is decreasing there.
    pub fn tail_integral(&self, d: usize, m: f64) -> Result<f64> {
        let ln_m = m.ln();
        // scaled by m a(m) so the tolerance is relative
        let ln_scale = self.ln_tail_density(d, ln_m);
        let f = |_u: f64, u: f64, w: f64| {
            // x = m e^tau, tau = u / (1 - u)
            let tau = u / w;
            let y = ln_m + tau;
            (self.ln_tail_density(d, y) - ln_scale - 2.0 * w.ln()).exp()
        };
        Ok(tanh_sinh(f, 0.0, 1.0, 1e-14)? * ln_scale.exp())
    }

    /// `sum_{l > m} a_l`, by the integral with Euler–Maclaurin corrections.
    pub fn tail_sum(&self, d: usize, m: u64) -> Result<f64> {
        let mf = m as f64;
        let a = |x: f64| (self.ln_tail_density(d, x.ln()) - x.ln()).exp();
        let deriv = 0.5 * (a(mf + 1.0) - a(mf - 1.0));
        Ok(self.tail_integral(d, mf)? - 0.5 * a(mf) - deriv / 12.0)
    }

    /// Coefficients `a_0..=a_L`; `a_0` is set to zero unless
    /// `with_constant`.
    pub fn coefficients(&self, d: usize, degree: usize, with_constant: bool) -> Vec<f64> {
        (0..=degree as u64)
            .map(|l| {
                if l == 0 && !with_constant {
                    0.0
                } else {
                    self.coefficient(d, l)
                }
            })
            .collect()
    }

    /// Smallest degree `L` with `int_L^inf a < tol`, if below `cap`.
    pub fn degree_for_tolerance(&self, d: usize, tol: f64, cap: u64) -> Result<Option<u64>> {
        let mut hi = 16u64;
        while self.tail_integral(d, hi as f64)? >= tol {
            if hi >= cap {
                return Ok(None);
            }
            hi = (hi * 2).min(cap);
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.tail_integral(d, mid as f64)? < tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }
}

/// `sum_{l >= 1} a_l`, the kernel at `t = 1`.
pub fn kernel_at_one(d: usize, space: WceSpace) -> Result<f64> {
    space.validate(d)?;
    const M: u64 = 200_000;
    let direct = (1..=M).map(|l| space.coefficient(d, l)).collect::<CompensatedSum>();
    Ok(direct.value() + space.tail_sum(d, M)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WceMethod {
    /// Series truncated at `truncation_degree`; `tail_bound` is the
    /// uniform bound on the omitted terms.
    Truncated,
    /// Tabulated kernel; `tail_bound` is the estimated kernel error.
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WceResult {
    pub wce_squared: f64,
    pub truncation_degree: u64,
    pub tail_bound: f64,
    pub space: WceSpace,
    pub method: WceMethod,
}

impl WceResult {
    pub fn wce(&self) -> f64 {
        self.wce_squared.max(0.0).sqrt()
    }
}

/// Largest `N^2 L` evaluated by direct summation before switching to the
/// tabulated kernel.
const DIRECT_BUDGET: f64 = 2e7;
const DIRECT_MAX_DEGREE: u64 = 1 << 22;

pub fn wce_sobolev(points: &PointSet, s: f64, tol: f64) -> Result<WceResult> {
    wce(points, WceSpace::Sobolev { s }, tol)
}

pub fn wce_logspace(points: &PointSet, gamma: f64, tol: f64) -> Result<WceResult> {
    wce(points, WceSpace::Logspace { gamma }, tol)
}

/// Worst-case error with the omitted part below `tol`: direct truncation
/// when affordable, otherwise the tabulated kernel.
pub fn wce(points: &PointSet, space: WceSpace, tol: f64) -> Result<WceResult> {
    let d = points.dim();
    space.validate(d)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let nf = points.len() as f64;
    if let Some(l) = space.degree_for_tolerance(d, tol, DIRECT_MAX_DEGREE)? {
        if nf * nf * l as f64 <= DIRECT_BUDGET {
            return wce_truncated(points, space, l as usize);
        }
    }
    let table = KernelTable::cached(d, space)?;
    Ok(table.wce(points))
}

/// Series truncated at degree `degree`, summed pair by pair.
pub fn wce_truncated(points: &PointSet, space: WceSpace, degree: usize) -> Result<WceResult> {
    let d = points.dim();
    space.validate(d)?;
    let a = space.coefficients(d, degree, false);
    let n = points.len();
    let nf = n as f64;
    let diag: f64 = a.iter().collect::<CompensatedSum>().value();
    let off = ordered_row_sum(n, |i| {
        let xi = points.point(i);
        let mut acc = CompensatedSum::new();
        for j in i + 1..n {
            let c = dot(xi, points.point(j)).clamp(-1.0, 1.0);
            let k: f64 = LegendreSeq::new(d, c).zip(&a).skip(1).map(|(p, w)| w * p).sum();
            acc.add(k);
        }
        acc.value()
    });
    Ok(WceResult {
        wce_squared: (nf * diag + 2.0 * off) / (nf * nf),
        truncation_degree: degree as u64,
        tail_bound: space.tail_integral(d, degree as f64)?,
        space,
        method: WceMethod::Truncated,
    })
}

pub fn wce_sobolev_truncated(points: &PointSet, s: f64, degree: usize) -> Result<WceResult> {
    wce_truncated(points, WceSpace::Sobolev { s }, degree)
}

/// Reassembles the truncated worst-case error from per-degree defects:
/// `sum_l (a_l / Z(d, l)) D_l`.
pub fn wce_from_defects(cert: &DesignCertificate, d: usize, space: WceSpace) -> f64 {
    cert.defects
        .iter()
        .enumerate()
        .map(|(k, dl)| {
            let ell = k as u64 + 1;
            space.coefficient(d, ell) / zdim_f64(d, ell) * dl
        })
        .collect::<CompensatedSum>()
        .value()
}

const TABLE_INTERVALS: usize = 4096;
const FILTER_SPAN: f64 = 600.0;
const FILTER_MIN_DEGREE: usize = 2000;
const FILTER_MAX_DEGREE: usize = 1_000_000;

/// C-infinity cutoff: 1 on `[0, 1/2]`, 0 on `[1, inf)`.
fn cutoff(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let y = 2.0 * x - 1.0;
        1.0 / (1.0 + (1.0 / (1.0 - y) - 1.0 / y).exp())
    }
}

/// Zonal kernel `K(t) = sum_{l >= 1} a_l P_l^{(d)}(t)` of a worst-case
/// error space, tabulated in `v = sqrt(|x - y| / 2)`.
///
/// In this variable the kernel is smooth up to `v = 0` for the usual
/// parameters, since its leading singular term is a power of `1 - t = 2 v^4`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub d: usize,
    pub space: WceSpace,
    /// `K(1)`
    pub diag: f64,
    nodes: Vec<f64>,
    /// Pairs with squared chord below this fall in the near range, where
    /// the filtered sums are capped at `max_degree`.
    pub near_chord_sq: f64,
    /// Estimated kernel error in the near range.
    pub error_near: f64,
    /// Estimated kernel error elsewhere: largest deviation of the
    /// interpolant from direct filtered sums at sampled interval midpoints,
    /// and of the filtered sums from ones with twice the degree.
    pub error_far: f64,
    pub max_degree: usize,
}

struct FilteredSeries {
    d: usize,
    a: Vec<f64>,
    // P_{l+1} = alpha_l t P_l - beta_l P_{l-1}
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl FilteredSeries {
    fn new(d: usize, space: WceSpace, max_degree: usize) -> Self {
        let dm1 = d as f64 - 1.0;
        let a = (0..=max_degree as u64)
            .into_par_iter()
            .map(|l| if l == 0 { 0.0 } else { space.coefficient(d, l) })
            .collect();
        let alpha = (0..=max_degree).map(|l| (2.0 * l as f64 + dm1) / (l as f64 + dm1)).collect();
        let beta = (0..=max_degree).map(|l| l as f64 / (l as f64 + dm1)).collect();
        Self { d, a, alpha, beta }
    }

    /// Degree `span * c / theta`, clamped; `span = 2` doubles every degree
    /// for the convergence check.
    fn degree_for_angle(theta: f64, span: usize) -> usize {
        let max = span * FILTER_MAX_DEGREE;
        let l = (span as f64 * FILTER_SPAN / theta).ceil();
        if l.is_finite() && l < max as f64 {
            (l as usize).max(FILTER_MIN_DEGREE)
        } else {
            max
        }
    }

    /// `sum_{l=1}^{L} a_l phi(l / L) P_l(t)`.
    fn eval(&self, t: f64, degree: usize) -> f64 {
        debug_assert!(self.d >= 2);
        let half = degree / 2;
        let inv = 1.0 / degree as f64;
        let (mut prev, mut cur) = (1.0, t);
        let mut acc = CompensatedSum::new();
        for l in 1..degree {
            let w = if l <= half { 1.0 } else { cutoff(l as f64 * inv) };
            acc.add(self.a[l] * w * cur);
            let next = self.alpha[l] * t * cur - self.beta[l] * prev;
            prev = cur;
            cur = next;
        }
        acc.value()
    }

    fn eval_at_v(&self, v: f64, span: usize) -> f64 {
        let r = 2.0 * v * v;
        let theta = 2.0 * (0.5 * r).min(1.0).asin();
        let t = 1.0 - 0.5 * r * r;
        let degree = FilteredSeries::degree_for_angle(theta, span);
        self.eval(t, degree.min(self.a.len() - 1))
    }
}

type TableCache = RwLock<HashMap<(usize, u8, u64), Arc<KernelTable>>>;

fn table_cache() -> &'static TableCache {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl KernelTable {
    pub fn build(d: usize, space: WceSpace) -> Result<Self> {
        space.validate(d)?;
        let diag = kernel_at_one(d, space)?;
        let series = FilteredSeries::new(d, space, 2 * FILTER_MAX_DEGREE);
        let g = TABLE_INTERVALS;
        let mut nodes: Vec<f64> = (0..=g)
            .into_par_iter()
            .map(|k| if k == 0 { 0.0 } else { series.eval_at_v(k as f64 / g as f64, 1) })
            .collect();
        nodes[0] = diag;
        // first node whose filtered sum is not capped
        let k_near = (1..=g)
            .find(|&k| {
                let v = k as f64 / g as f64;
                let theta = 2.0 * (v * v).min(1.0).asin();
                FilteredSeries::degree_for_angle(theta, 1) < FILTER_MAX_DEGREE
            })
            .unwrap_or(g);
        let v_near = k_near as f64 / g as f64;
        let mut table = Self {
            d,
            space,
            diag,
            nodes,
            near_chord_sq: 4.0 * v_near.powi(4),
            error_near: 0.0,
            error_far: 0.0,
            max_degree: FILTER_MAX_DEGREE,
        };
        let midpoint_err = |k: usize| {
            let v = (k as f64 + 0.5) / g as f64;
            (table.interpolate(v) - series.eval_at_v(v, 1)).abs()
        };
        let doubling_err = |k: usize| {
            let v = k as f64 / g as f64;
            (series.eval_at_v(v, 2) - series.eval_at_v(v, 1)).abs()
        };
        let max = |it: Vec<f64>| it.into_iter().fold(0.0, f64::max);
        let far: Vec<usize> = (k_near..g).filter(|&k| k < k_near + 64 || k % 61 == 0).collect();
        let far_checks: Vec<usize> = [1, 2, 4, 16, 64]
            .iter()
            .map(|m| (m * k_near).min(g))
            .chain([g / 2, g])
            .collect();
        let error_far = max(far.par_iter().map(|&k| midpoint_err(k)).collect())
            .max(max(far_checks.par_iter().map(|&k| doubling_err(k)).collect()));
        // below the cap the filtered sums lose at most the filtered-out mass
        let capped_mass = diag - series.eval(1.0, FILTER_MAX_DEGREE);
        let near: Vec<usize> = (0..k_near).step_by(8).collect();
        let error_near = max(near.par_iter().map(|&k| midpoint_err(k)).collect())
            .max(max(near.par_iter().skip(1).map(|&k| doubling_err(k)).collect()))
            .max(capped_mass.abs())
            .max(error_far);
        table.error_near = error_near;
        table.error_far = error_far;
        Ok(table)
    }

    /// Shared table for `(d, space)`, built on first use.
    pub fn cached(d: usize, space: WceSpace) -> Result<Arc<Self>> {
        let (tag, bits) = space.key();
        let key = (d, tag, bits);
        if let Some(t) = table_cache().read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::build(d, space)?);
        table_cache().write().unwrap().entry(key).or_insert(table.clone());
        Ok(table)
    }

    /// Four-point Lagrange interpolation on the uniform `v` grid.
    fn interpolate(&self, v: f64) -> f64 {
        let g = TABLE_INTERVALS;
        let x = v.clamp(0.0, 1.0) * g as f64;
        let k = (x.floor() as usize).min(g - 1);
        let start = k.saturating_sub(1).min(g - 3);
        let u = x - start as f64;
        let y = &self.nodes[start..start + 4];
        let (u0, u1, u2, u3) = (u, u - 1.0, u - 2.0, u - 3.0);
        -y[0] * u1 * u2 * u3 / 6.0 + y[1] * u0 * u2 * u3 / 2.0 - y[2] * u0 * u1 * u3 / 2.0
            + y[3] * u0 * u1 * u2 / 6.0
    }

    /// `K` at squared chordal distance `r2`.
    #[inline]
    pub fn at_chord_sq(&self, r2: f64) -> f64 {
        if r2 <= 0.0 {
            return self.diag;
        }
        self.interpolate((0.25 * r2).sqrt().sqrt())
    }

    pub fn at(&self, t: f64) -> f64 {
        self.at_chord_sq(2.0 - 2.0 * t.clamp(-1.0, 1.0))
    }

    /// Worst-case error; `tail_bound` weighs the near and far kernel error
    /// estimates by the number of pairs in each range.
    pub fn wce(&self, points: &PointSet) -> WceResult {
        let n = points.len();
        let nf = n as f64;
        let rows: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = points.point(i);
                let mut acc = CompensatedSum::new();
                let mut near = 0;
                for j in i + 1..n {
                    let r2 = dist_sq(xi, points.point(j));
                    near += usize::from(r2 < self.near_chord_sq);
                    acc.add(self.at_chord_sq(r2));
                }
                (acc.value(), near)
            })
            .collect();
        let off = rows.iter().map(|r| r.0).collect::<CompensatedSum>().value();
        let near = rows.iter().map(|r| r.1).sum::<usize>() as f64;
        let pairs = 0.5 * nf * (nf - 1.0);
        let bound = 2.0 * (near * self.error_near + (pairs - near) * self.error_far) / (nf * nf);
        WceResult {
            wce_squared: (nf * self.diag + 2.0 * off) / (nf * nf),
            truncation_degree: self.max_degree as u64,
            tail_bound: bound,
            space: self.space,
            method: WceMethod::Tabulated,
        }
    }
}

impl ZonalFunction for KernelTable {
    fn value(&self, _t: f64, chord_sq: f64) -> f64 {
        self.at_chord_sq(chord_sq)
    }
    fn mean(&self) -> Option<f64> {
        Some(0.0)
    }
    fn singular_at_one(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::uniform_sphere;
    use crate::pointsets::{fixture, Fixture};

    fn single() -> PointSet {
        PointSet::new(2, vec![vec![0.0, 0.0, 1.0]], "one").unwrap()
    }

    #[test]
    fn single_point_defects_are_dimensions() {
        let c = design_defect(&single(), 6).unwrap();
        for ell in 1..=6 {
            assert_eq!(c.defect(ell), zdim_f64(2, ell as u64));
        }
        assert_eq!(c.certified_t, 0);
    }

    #[test]
    fn platonic_designs() {
        let cases = [(Fixture::Octahedron, 3), (Fixture::Cube, 3), (Fixture::Icosahedron, 5)];
        for (f, t) in cases {
            let ps = fixture(&f).unwrap();
            let c = design_defect(&ps, t + 1).unwrap();
            assert_eq!(c.certified_t, t, "{f:?}");
            assert!(c.defect(t + 1) > 1e-3);
            assert!(c.defects.iter().all(|&v| v >= -1e-12));
        }
        let oct = fixture(&Fixture::Octahedron).unwrap();
        assert!(design_defect(&oct, 4).unwrap().defect(4) > 0.1);
    }

    #[test]
    fn tail_integral_matches_closed_form() {
        // d = 2, s = 2: a(x) = (2x + 1)/(1 + x + x^2)^2, antiderivative -1/(1 + x + x^2)
        let sp = WceSpace::Sobolev { s: 2.0 };
        for m in [10.0, 1000.0, 1e6] {
            let exact = 1.0 / (1.0 + m + m * m);
            let got = sp.tail_integral(2, m).unwrap();
            assert!((got / exact - 1.0).abs() < 1e-10, "{m}: {got} vs {exact}");
        }
        let direct: f64 = (1..=2_000_000u64).map(|l| sp.coefficient(2, l)).collect::<CompensatedSum>().value();
        let k1 = kernel_at_one(2, sp).unwrap();
        assert!((k1 - direct - sp.tail_integral(2, 2e6).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn validates_parameters() {
        let ps = single();
        assert!(wce_sobolev(&ps, 1.0, 1e-8).is_err());
        assert!(wce_logspace(&ps, 0.5, 1e-8).is_err());
        assert!(wce_sobolev(&ps, 2.0, 0.0).is_err());
        assert!(design_defect(&ps, 0).is_err());
    }

    #[test]
    fn single_point_wce_is_kernel_at_one() {
        let r = wce_sobolev(&single(), 2.0, 1e-10).unwrap();
        let k1 = kernel_at_one(2, WceSpace::Sobolev { s: 2.0 }).unwrap();
        assert!((r.wce_squared - k1).abs() < 1e-10);
        assert!(r.tail_bound <= 1e-10);
    }

    #[test]
    fn defect_route_agrees_with_kernel_route() {
        let ps = uniform_sphere(2, 30, 9).unwrap();
        let sp = WceSpace::Sobolev { s: 1.5 };
        let direct = wce_truncated(&ps, sp, 40).unwrap().wce_squared;
        let cert = design_defect(&ps, 40).unwrap();
        assert!((wce_from_defects(&cert, 2, sp) - direct).abs() < 1e-12);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.2), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
        let xs: Vec<f64> = (0..=100).map(|k| cutoff(0.5 + k as f64 / 200.0)).collect();
        assert!(xs.windows(2).all(|w| w[1] <= w[0]));
    }
}
