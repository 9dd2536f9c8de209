//! Riesz s-energy, zonal kernel energies, the energy integral `V_d(s)` and
//! the truncated Jacobi expansions `h_t` / `r_t` of the Riesz kernel.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{dist_sq, dot, PointSet};
use crate::quad::{gauss_kronrod, tanh_sinh};
use crate::specfun::{
    default_expansion_order, ln_gamma, riesz_expansion_cached, ExpansionCoefficients, JacobiSeq,
    LegendreSeq,
};
use crate::sum::ordered_row_sum;

/// Pairs closer than this are treated as coincident by the singular kernels.
pub const COINCIDENCE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `1/2 sum_{i != j} |x_i - x_j|^{-s}`
    PairwiseHalf,
    /// `N^{-2} sum_{i,j} K(<x_i, x_j>)`
    MeanSquared,
    /// `N^{-2} sum_{i != j} K(<x_i, x_j>)`
    OffdiagMean,
}

/// Value of an energy functional split into a leading term and remainder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub normalization: Normalization,
    pub leading_term: f64,
    pub remainder: f64,
    /// `remainder / N^{1 + s/d}` for Riesz energies.
    pub remainder_scaled: Option<f64>,
    pub n: usize,
}

impl EnergyReport {
    fn new(raw: f64, leading: f64, normalization: Normalization, n: usize) -> Self {
        let remainder = raw - leading;
        Self {
            // value is rebuilt from the parts so the split is exact
            value: leading + remainder,
            normalization,
            leading_term: leading,
            remainder,
            remainder_scaled: None,
            n,
        }
    }
}

/// A zonal function `t -> K(t)` on `[-1, 1]` that may also use the squared
/// chord `|x - y|^2 = 2 - 2t` (more accurate near `t = 1`).
pub trait ZonalFunction: Send + Sync {
    fn value(&self, t: f64, chord_sq: f64) -> f64;
    /// Constant Legendre coefficient `a_0` (the sphere average), if known.
    fn mean(&self) -> Option<f64>;
    fn singular_at_one(&self) -> bool;
}

struct RadialFn<F> {
    f: F,
    singular: bool,
    mean: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> ZonalFunction for RadialFn<F> {
    fn value(&self, t: f64, _chord_sq: f64) -> f64 {
        (self.f)(t)
    }
    fn mean(&self) -> Option<f64> {
        self.mean
    }
    fn singular_at_one(&self) -> bool {
        self.singular
    }
}

#[derive(Clone)]
pub enum KernelKind {
    /// `K(t) = sum_n a_n P_n^{(d)}(t)`, all `a_n >= 0`.
    Coefficients(Vec<f64>),
    /// `K(t) = |x - y|^{-s} = 2^{-s/2} (1 - t)^{-s/2}`.
    Riesz { s: f64 },
    /// Any other zonal function, e.g. a tabulated reproducing kernel.
    Zonal(Arc<dyn ZonalFunction>),
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Coefficients(a) => f.debug_tuple("Coefficients").field(a).finish(),
            KernelKind::Riesz { s } => f.debug_struct("Riesz").field("s", s).finish(),
            KernelKind::Zonal(z) => f
                .debug_struct("Zonal")
                .field("singular_at_one", &z.singular_at_one())
                .finish(),
        }
    }
}

/// Positive definite zonal kernel on S^d.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub d: usize,
}

impl KernelSpec {
    pub fn coefficients(d: usize, a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Invalid("empty coefficient sequence".into()));
        }
        if let Some(n) = a.iter().position(|&v| !(v >= 0.0)) {
            return domain(format!("coefficient a_{n} = {} is negative", a[n]));
        }
        Ok(Self {
            kind: KernelKind::Coefficients(a),
            d,
        })
    }

    pub fn riesz(d: usize, s: f64) -> Result<Self> {
        check_riesz_range(d, s)?;
        Ok(Self {
            kind: KernelKind::Riesz { s },
            d,
        })
    }

    pub fn radial<F>(d: usize, f: F, singular_at_one: bool, mean: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: KernelKind::Zonal(Arc::new(RadialFn {
                f,
                singular: singular_at_one,
                mean,
            })),
            d,
        }
    }

    pub fn zonal(d: usize, z: Arc<dyn ZonalFunction>) -> Self {
        Self {
            kind: KernelKind::Zonal(z),
            d,
        }
    }

    pub fn is_singular(&self) -> bool {
        match &self.kind {
            KernelKind::Coefficients(_) => false,
            KernelKind::Riesz { .. } => true,
            KernelKind::Zonal(z) => z.singular_at_one(),
        }
    }

    /// `a_0`: for the Riesz kernel this is `V_d(s)`.
    pub fn mean(&self) -> Result<Option<f64>> {
        Ok(match &self.kind {
            KernelKind::Coefficients(a) => Some(a[0]),
            KernelKind::Riesz { s } => Some(v_d(*s, self.d)?),
            KernelKind::Zonal(z) => z.mean(),
        })
    }

    /// Kernel value for a pair of unit vectors.
    #[inline]
    pub fn eval_pair(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.kind {
            KernelKind::Riesz { s } => riesz_term(dist_sq(x, y), *s),
            KernelKind::Coefficients(a) => {
                let t = dot(x, y).clamp(-1.0, 1.0);
                LegendreSeq::new(self.d, t).zip(a).map(|(p, c)| c * p).sum()
            }
            KernelKind::Zonal(z) => {
                let r2 = dist_sq(x, y);
                z.value((1.0 - 0.5 * r2).clamp(-1.0, 1.0), r2)
            }
        }
    }

    /// Kernel value at `t = 1` (diagonal terms).
    pub fn eval_diag(&self) -> f64 {
        match &self.kind {
            KernelKind::Riesz { .. } => f64::INFINITY,
            KernelKind::Coefficients(a) => a.iter().sum(),
            KernelKind::Zonal(z) => z.value(1.0, 0.0),
        }
    }
}

fn check_riesz_range(d: usize, s: f64) -> Result<()> {
    if !(s > 0.0 && s < d as f64) {
        return domain(format!("Riesz exponent s = {s} outside (0, {d})"));
    }
    Ok(())
}

#[inline]
fn riesz_term(r2: f64, s: f64) -> f64 {
    if s == 1.0 {
        1.0 / r2.sqrt()
    } else if s == 2.0 {
        1.0 / r2
    } else {
        r2.powf(-0.5 * s)
    }
}

/// Sum over unordered pairs `i < j` of `f(x_i, x_j)`, by rows in parallel
/// with an index-ordered compensated fold.
fn upper_pair_sum<F>(points: &PointSet, f: F) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync + Send,
{
    let n = points.len();
    ordered_row_sum(n, |i| {
        let xi = points.point(i);
        let mut acc = crate::sum::CompensatedSum::new();
        for j in i + 1..n {
            acc.add(f(xi, points.point(j)));
        }
        acc.value()
    })
}

fn check_separated(points: &PointSet) -> Result<()> {
    let n = points.len();
    let tol2 = COINCIDENCE_TOL * COINCIDENCE_TOL;
    let bad = (0..n).find_map(|i| {
        let xi = points.point(i);
        (i + 1..n)
            .find(|&j| dist_sq(xi, points.point(j)) < tol2)
            .map(|j| (i, j))
    });
    match bad {
        Some((i, j)) => Err(Error::Singular(format!(
            "points {i} and {j} coincide; the energy is infinite"
        ))),
        None => Ok(()),
    }
}

/// `sum_{i<j} |x_i - x_j|^{-s}` without range checks (callers validate).
pub(crate) fn riesz_pair_sum(points: &PointSet, s: f64) -> f64 {
    upper_pair_sum(points, |x, y| riesz_term(dist_sq(x, y), s))
}

/// Discrete Riesz s-energy `1/2 sum_{i != j} |x_i - x_j|^{-s}`.
///
/// For `0 < s < d` the leading term is `V_d(s) N^2 / 2`. For `s >= d` the
/// energy integral diverges; the pair sum is still returned, with a zero
/// leading term and no scaled remainder.
pub fn riesz_energy(points: &PointSet, s: f64) -> Result<EnergyReport> {
    let d = points.dim();
    if !(s > 0.0 && s.is_finite()) {
        return domain(format!("Riesz exponent must be positive, got {s}"));
    }
    check_separated(points)?;
    let n = points.len();
    let nf = n as f64;
    let raw = riesz_pair_sum(points, s);
    if s >= d as f64 {
        return Ok(EnergyReport::new(raw, 0.0, Normalization::PairwiseHalf, n));
    }
    let leading = 0.5 * v_d(s, d)? * nf * nf;
    let mut report = EnergyReport::new(raw, leading, Normalization::PairwiseHalf, n);
    report.remainder_scaled = Some(report.remainder / nf.powf(1.0 + s / d as f64));
    Ok(report)
}

/// Mean kernel energy `N^{-2} sum_{i,j} K(<x_i, x_j>)`, diagonal included.
pub fn kernel_energy(points: &PointSet, kernel: &KernelSpec) -> Result<EnergyReport> {
    if kernel.is_singular() {
        return Err(Error::Invalid(
            "kernel is singular at t = 1; use the off-diagonal energy".into(),
        ));
    }
    let n = points.len();
    let nf = n as f64;
    let off = upper_pair_sum(points, |x, y| kernel.eval_pair(x, y));
    let raw = (2.0 * off + nf * kernel.eval_diag()) / (nf * nf);
    let leading = kernel.mean()?.unwrap_or(0.0);
    Ok(EnergyReport::new(raw, leading, Normalization::MeanSquared, n))
}

/// `N^{-2} sum_{i != j} K(<x_i, x_j>)`.
pub fn kernel_energy_offdiag(points: &PointSet, kernel: &KernelSpec) -> Result<EnergyReport> {
    if let KernelKind::Riesz { s } = kernel.kind {
        check_riesz_range(points.dim(), s)?;
    }
    if kernel.is_singular() {
        check_separated(points)?;
    }
    let n = points.len();
    let nf = n as f64;
    let off = match kernel.kind {
        KernelKind::Riesz { s } => riesz_pair_sum(points, s),
        _ => upper_pair_sum(points, |x, y| kernel.eval_pair(x, y)),
    };
    let raw = 2.0 * off / (nf * nf);
    let leading = kernel.mean()?.unwrap_or(0.0);
    let mut report = EnergyReport::new(raw, leading, Normalization::OffdiagMean, n);
    if let KernelKind::Riesz { s } = kernel.kind {
        // remainder of the pair sum N^2 * value, scaled by N^{1 + s/d}
        report.remainder_scaled = Some(report.remainder * nf * nf / nf.powf(1.0 + s / points.dim() as f64));
    }
    Ok(report)
}

fn sphere_average_constant(d: usize) -> f64 {
    // Gamma((d+1)/2) / (sqrt(pi) Gamma(d/2))
    let df = d as f64;
    (ln_gamma(0.5 * (df + 1.0)) - 0.5 * std::f64::consts::PI.ln() - ln_gamma(0.5 * df)).exp()
}

/// Energy integral `V_d(s) = int int |x - y|^{-s}` over the normalized
/// sphere, by tanh-sinh quadrature of the one-dimensional reduction
/// `c_d int_{-1}^{1} (2 - 2t)^{-s/2} (1 - t^2)^{d/2 - 1} dt`.
///
/// On `[0, 1]` the substitution `u = (1 - t)^{(d - s)/2}` absorbs the
/// singular factor, so the rule stays accurate as `s` approaches `d`.
pub fn v_d(s: f64, d: usize) -> Result<f64> {
    check_riesz_range(d, s)?;
    let df = d as f64;
    let e = 0.5 * df - 1.0;
    let p = 0.5 * (df - s);
    // t in [-1, 0]; da = 1 + t
    let left = |t: f64, da: f64, _db: f64| {
        let one_minus_t = 1.0 - t;
        let w = if e == 0.0 { 1.0 } else { (da * one_minus_t).powf(e) };
        (2.0 * one_minus_t).powf(-0.5 * s) * w
    };
    // u in [0, 1], 1 - t = u^{1/p}
    let right = |u: f64, _ua: f64, _ub: f64| {
        if e == 0.0 {
            return 1.0;
        }
        let one_minus_t = u.powf(1.0 / p);
        (2.0 - one_minus_t).powf(e)
    };
    let l = tanh_sinh(left, -1.0, 0.0, 1e-15)?;
    let r = 2f64.powf(-0.5 * s) / p * tanh_sinh(right, 0.0, 1.0, 1e-15)?;
    Ok(sphere_average_constant(d) * (l + r))
}

/// `V_d(s)` by adaptive Gauss–Kronrod after the substitutions
/// `1 - t = w^8` on `[0, 1]` and `1 + t = w^8` on `[-1, 0]`, which turn the
/// endpoint singularities into bounded powers of `w`. Independent of
/// [`v_d`]'s quadrature.
pub fn v_d_gauss_kronrod(s: f64, d: usize) -> Result<f64> {
    check_riesz_range(d, s)?;
    const M: i32 = 8;
    let mf = M as f64;
    let df = d as f64;
    let e = 0.5 * df - 1.0;
    // [0, 1]: 1 - t = w^M, 1 + t = 2 - w^M
    let p_right = mf * (df - s) / 2.0 - 1.0;
    let right = |w: f64| {
        let wm = w.powi(M);
        mf * 2f64.powf(-0.5 * s) * w.powf(p_right) * (2.0 - wm).powf(e)
    };
    // [-1, 0]: 1 + t = w^M, 1 - t = 2 - w^M
    let p_left = mf * df / 2.0 - 1.0;
    let left = |w: f64| {
        let wm = w.powi(M);
        let one_minus_t = 2.0 - wm;
        mf * (2.0 * one_minus_t).powf(-0.5 * s) * one_minus_t.powf(e) * w.powf(p_left)
    };
    let r = gauss_kronrod(right, 0.0, 1.0, 1e-15)?;
    let l = gauss_kronrod(left, 0.0, 1.0, 1e-15)?;
    Ok(sphere_average_constant(d) * (l + r))
}

/// `V_d(s) = c_d 2^{d-1-s} B((d - s)/2, d/2)`: the beta-function evaluation
/// of the same integral.
pub fn v_d_closed_form(s: f64, d: usize) -> Result<f64> {
    check_riesz_range(d, s)?;
    let df = d as f64;
    let (a, b) = (0.5 * (df - s), 0.5 * df);
    let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    Ok(sphere_average_constant(d) * ((df - 1.0 - s) * std::f64::consts::LN_2 + ln_b).exp())
}

/// The gamma quotient `Gamma((d+1)/2) Gamma(d-s) / (Gamma(d-s+1) Gamma(d-s/2))`
/// often quoted as the energy integral. It coincides with `V_d(s)` only on
/// special parameter lines (e.g. `d = 2, s = 1`); kept for comparison.
pub fn v_d_gamma_quotient(s: f64, d: usize) -> Result<f64> {
    check_riesz_range(d, s)?;
    let df = d as f64;
    Ok((ln_gamma(0.5 * (df + 1.0)) + ln_gamma(df - s) - ln_gamma(df - s + 1.0) - ln_gamma(df - 0.5 * s)).exp())
}

/// Partial sum `h_t` and tail `r_t` of the Jacobi expansion of the Riesz
/// kernel `2^{-s/2} (1 - x)^{-s/2}` with `lambda = d/2 + K + 1/2`.
#[derive(Clone, Debug)]
pub struct RieszExpansion {
    pub d: usize,
    pub s: f64,
    pub k: u32,
    scale: f64,
}

/// Tail terms are summed until the estimated remainder falls below this.
pub const TAIL_TOL: f64 = 1e-10;
const TAIL_MAX_DEGREE: usize = 2_000_000;

impl RieszExpansion {
    pub fn new(d: usize, s: f64, k: u32) -> Result<Self> {
        check_riesz_range(d, s)?;
        if 2 * k as usize <= d {
            return domain(format!("expansion order K = {k} must exceed d/2"));
        }
        Ok(Self {
            d,
            s,
            k,
            scale: 2f64.powf(-0.5 * s),
        })
    }

    pub fn with_default_order(d: usize, s: f64) -> Result<Self> {
        Self::new(d, s, default_expansion_order(d))
    }

    fn coeffs(&self, n_max: usize) -> Result<Arc<ExpansionCoefficients>> {
        riesz_expansion_cached(self.d, self.s, self.k, n_max)
    }

    /// `h_t(x) = 2^{-s/2} sum_{n <= t} c_n P_n^{(lambda-1/2, lambda-1/2)}(x)`.
    pub fn h_t(&self, t: usize, x: f64) -> Result<f64> {
        let c = self.coeffs(t)?;
        Ok(self.scale * c.partial_sum(x, t))
    }

    /// Tail `r_t(x)` for `|x| < 1`, summed to a remainder estimate below
    /// [`TAIL_TOL`].
    ///
    /// The coefficients decay like `n^{s - lambda - 1/2}` and the
    /// polynomials oscillate with an envelope decaying like `n^{-1/2}`; the
    /// remainder after degree `n` is estimated from the largest `|P_m|` over
    /// the last oscillation period times `c_n n / (lambda - s)`.
    pub fn r_t(&self, t: usize, x: f64) -> Result<f64> {
        if !(x.abs() < 1.0) {
            return domain(format!("r_t is only defined for |x| < 1, got {x}"));
        }
        let theta = x.acos().min(std::f64::consts::PI - x.acos());
        let window = ((2.0 * std::f64::consts::PI / theta).ceil() as usize).max(4) + 1;
        let mut n_max = (t + 8 * window).max(256);
        loop {
            let c = self.coeffs(n_max)?;
            let lambda = c.lambda;
            let mut seq = JacobiSeq::new(c.jacobi_params(), x);
            let mut acc = crate::sum::CompensatedSum::new();
            let mut recent = std::collections::VecDeque::with_capacity(window);
            for (n, p) in (&mut seq).enumerate().take(n_max + 1) {
                if recent.len() == window {
                    recent.pop_front();
                }
                recent.push_back(p.abs());
                if n <= t {
                    continue;
                }
                acc.add(c.coeffs[n] * p);
                if n >= t + window {
                    let amp = recent.iter().cloned().fold(0.0, f64::max);
                    let est = c.coeffs[n] * amp * n as f64 / (lambda - self.s);
                    if self.scale * est < TAIL_TOL {
                        return Ok(self.scale * acc.value());
                    }
                }
            }
            if n_max >= TAIL_MAX_DEGREE {
                return Err(Error::NoConvergence(format!(
                    "r_t tail at x = {x} not below {TAIL_TOL} by degree {n_max}"
                )));
            }
            n_max = (n_max * 2).min(TAIL_MAX_DEGREE);
        }
    }

    /// The expanded function `2^{-s/2} (1 - x)^{-s/2}`.
    pub fn target(&self, x: f64) -> f64 {
        self.scale * (1.0 - x).powf(-0.5 * self.s)
    }
}

/// `h_t(x)` for the given parameters.
pub fn h_t_eval(d: usize, s: f64, k: u32, t: usize, x: f64) -> Result<f64> {
    RieszExpansion::new(d, s, k)?.h_t(t, x)
}

/// `r_t(x)` for the given parameters; `|x| < 1` required.
pub fn r_t_eval(d: usize, s: f64, k: u32, t: usize, x: f64) -> Result<f64> {
    RieszExpansion::new(d, s, k)?.r_t(t, x)
}
