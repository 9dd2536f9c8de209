//! Points on S^d, chordal distances and spherical caps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::ln_gamma;

/// Unit-norm tolerance enforced on every stored point.
pub const NORM_TOL: f64 = 1e-12;

/// `N >= 1` points on S^d stored row-major with stride `d + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    pub label: String,
}

impl PointSet {
    /// Builds a point set from rows that are already unit vectors.
    pub fn new(d: usize, rows: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        Self::from_flat(d, rows.into_iter().flatten().collect(), label)
    }

    pub fn from_flat(d: usize, coords: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if d < 2 {
            return domain(format!("sphere dimension must be at least 2, got {d}"));
        }
        let m = d + 1;
        if coords.is_empty() || coords.len() % m != 0 {
            return Err(Error::Invalid(format!(
                "expected a non-empty multiple of {m} coordinates, got {}",
                coords.len()
            )));
        }
        for (i, row) in coords.chunks_exact(m).enumerate() {
            let n = norm(row);
            if (n - 1.0).abs() > NORM_TOL {
                return Err(Error::Invalid(format!("point {i} has norm {n}")));
            }
        }
        Ok(Self {
            d,
            coords,
            label: label.into(),
        })
    }

    /// Normalizes every row; rows of zero length are rejected.
    pub fn normalized(d: usize, rows: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * (d + 1));
        for (i, mut r) in rows.into_iter().enumerate() {
            if r.len() != d + 1 {
                return Err(Error::Invalid(format!(
                    "point {i} has {} coordinates, expected {}",
                    r.len(),
                    d + 1
                )));
            }
            let n = norm(&r);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::Invalid(format!("point {i} cannot be normalized")));
            }
            r.iter_mut().for_each(|v| *v /= n);
            coords.extend(r);
        }
        Self::from_flat(d, coords, label)
    }

    /// Sphere dimension `d` (points live in R^{d+1}).
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ambient_dim(&self) -> usize {
        self.d + 1
    }

    pub fn len(&self) -> usize {
        self.coords.len() / (self.d + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let m = self.d + 1;
        &self.coords[i * m..(i + 1) * m]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d + 1)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Applies the linear map `m` (row-major, `(d+1) x (d+1)`) to every point.
    pub fn transformed(&self, m: &[f64]) -> Result<Self> {
        let k = self.d + 1;
        assert_eq!(m.len(), k * k);
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.iter() {
            for r in 0..k {
                coords.push((0..k).map(|c| m[r * k + c] * p[c]).sum());
            }
        }
        let mut out = Self::normalized_flat(self.d, coords)?;
        out.label = self.label.clone();
        Ok(out)
    }

    /// Reorders points by `perm` (`perm[i]` is the source index of row `i`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(self.coords.len());
        for &j in perm {
            coords.extend_from_slice(self.point(j));
        }
        Self {
            d: self.d,
            coords,
            label: self.label.clone(),
        }
    }

    fn normalized_flat(d: usize, mut coords: Vec<f64>) -> Result<Self> {
        for row in coords.chunks_exact_mut(d + 1) {
            let n = norm(row);
            row.iter_mut().for_each(|v| *v /= n);
        }
        Self::from_flat(d, coords, "")
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Squared Euclidean distance computed from the coordinate differences.
#[inline]
pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `|x - y| = sqrt(2 - 2 <x, y>)` for unit vectors, with the inner product
/// clamped to `[-1, 1]`.
pub fn chordal_distance(x: &[f64], y: &[f64]) -> f64 {
    let t = dot(x, y).clamp(-1.0, 1.0);
    (2.0 - 2.0 * t).sqrt()
}

/// Geodesic angle between unit vectors, `arccos <x, y>` with clamping.
pub fn angle(x: &[f64], y: &[f64]) -> f64 {
    dot(x, y).clamp(-1.0, 1.0).acos()
}

/// Spherical cap `{y : <center, y> >= cos(angular_radius)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: Vec<f64>,
    pub angular_radius: f64,
}

impl Cap {
    pub fn new(center: Vec<f64>, angular_radius: f64) -> Result<Self> {
        if (norm(&center) - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid("cap center must be a unit vector".into()));
        }
        if !(0.0..=std::f64::consts::PI).contains(&angular_radius) {
            return domain(format!("cap radius {angular_radius} outside [0, pi]"));
        }
        Ok(Self {
            center,
            angular_radius,
        })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        angle(&self.center, y) <= self.angular_radius
    }

    pub fn area(&self, d: usize) -> f64 {
        cap_area(d, self.angular_radius)
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `int_0^x u^{a-1} (1-u)^{a-1} du / B(a, a)` for `0 <= x <= 1/2`, by the
/// binomial series of `(1 - u)^{a-1}`.
fn symmetric_beta_reg_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut coef = 1.0; // (1 - a)_k / k!
    let mut xk = 1.0;
    let mut sum = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        let term = coef * xk / (a + kf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || coef == 0.0 {
            break;
        }
        coef *= (kf + 1.0 - a) / (kf + 1.0);
        xk *= x;
    }
    (a * x.ln() - ln_beta(a, a)).exp() * sum
}

/// Normalized surface area of a cap of angular radius `phi` on S^d.
///
/// Uses the regularized incomplete beta function `I_x(d/2, d/2)` with
/// `x = sin^2(phi / 2)`, evaluated by a series on the smaller half and by
/// symmetry on the larger one.
pub fn cap_area(d: usize, phi: f64) -> f64 {
    let phi = phi.clamp(0.0, std::f64::consts::PI);
    let a = 0.5 * d as f64;
    if phi <= std::f64::consts::FRAC_PI_2 {
        let x = (0.5 * phi).sin().powi(2);
        symmetric_beta_reg_lower(a, x)
    } else {
        let x = (0.5 * (std::f64::consts::PI - phi)).sin().powi(2);
        1.0 - symmetric_beta_reg_lower(a, x)
    }
}

/// Cap area by adaptive Simpson quadrature of `sin^{d-1}`; used as an
/// independent check on [`cap_area`].
pub fn cap_area_quadrature(d: usize, phi: f64) -> f64 {
    let p = (d - 1) as i32;
    let f = |t: f64| t.sin().powi(p);
    // int_0^pi sin^{d-1} = sqrt(pi) Gamma(d/2) / Gamma((d+1)/2)
    let total = (0.5 * std::f64::consts::PI.ln() + ln_gamma(0.5 * d as f64)
        - ln_gamma(0.5 * (d as f64 + 1.0)))
    .exp();
    crate::quad::adaptive_simpson(f, 0.0, phi, 1e-13) / total
}

/// Angular radius of the cap with normalized area `area` on S^d (bisection).
pub fn cap_radius_for_area(d: usize, area: f64) -> f64 {
    if area <= 0.0 {
        return 0.0;
    }
    if area >= 1.0 {
        return std::f64::consts::PI;
    }
    let (mut lo, mut hi) = (0.0f64, std::f64::consts::PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cap_area(d, mid) < area {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Radius `arccos(1 - c1^2 / (8 N^{2/d}))` of the caps that contain at most
/// one point of a well-separated set with constant `c1`.
pub fn alpha_n(c1: f64, n: usize, d: usize) -> Result<f64> {
    if c1 < 0.0 || n == 0 {
        return domain("alpha_n needs c1 >= 0 and N >= 1");
    }
    let arg = 1.0 - c1 * c1 / (8.0 * (n as f64).powf(2.0 / d as f64));
    if arg < -1.0 {
        return domain(format!("arccos argument {arg} below -1"));
    }
    Ok(arg.acos())
}

/// Lower and upper bounds on `alpha_n` obtained from
/// `sin t <= t <= (pi/2) sin t` on `[0, pi/2]`.
pub fn alpha_n_bracket(c1: f64, n: usize, d: usize) -> (f64, f64) {
    let nd = (n as f64).powf(1.0 / d as f64);
    let root = (1.0 - c1 * c1 / (16.0 * nd * nd)).max(0.0).sqrt();
    (
        root * c1 / (2.0 * nd),
        std::f64::consts::FRAC_PI_4 * root * c1 / nd,
    )
}

/// `N` independent uniform points on S^d (normalized Gaussian vectors).
pub fn uniform_sphere(d: usize, n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Invalid("need at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let v: Vec<f64> = (0..=d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if norm(&v) > 1e-8 {
            rows.push(v);
        }
    }
    PointSet::normalized(d, rows, format!("uniform(d={d}, n={n}, seed={seed})"))
}

/// Haar-random orthogonal matrix of size `k` (row-major), by Gram–Schmidt on
/// Gaussian columns.
pub fn random_orthogonal(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            v.iter_mut().for_each(|x| *x /= n);
            basis.push(v);
        }
    }
    basis.into_iter().flatten().collect()
}
