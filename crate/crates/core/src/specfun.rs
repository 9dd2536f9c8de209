//! Special functions: log-gamma, gamma ratios, Pochhammer symbols, Jacobi
//! polynomials, the normalized Legendre polynomials `P_n^{(d)}` of S^d, the
//! dimension `Z(d, l)` of the space of degree-l spherical harmonics, and the
//! Jacobi expansion of `(1 - x)^{-s/2}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{domain, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma expects a positive argument, got {x}");
    if x < 0.5 {
        // reflection keeps the Lanczos sum away from its poles
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + a.ln()
}

/// `(sign, ln |Gamma(x)|)` for any real `x` that is not a pole.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((1.0, ln_gamma(x)));
    }
    if x == x.floor() {
        return domain(format!("gamma pole at {x}"));
    }
    // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
    let s = (PI * x).sin();
    let sign = if s > 0.0 { 1.0 } else { -1.0 };
    Ok((sign, PI.ln() - s.abs().ln() - ln_gamma(1.0 - x)))
}

fn stirling_tail(x: f64) -> f64 {
    // sum_k B_{2k} / (2k (2k - 1) x^{2k-1}), k = 1..6
    const C: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
    ];
    let x2 = x * x;
    let mut p = 1.0 / x;
    let mut acc = 0.0;
    for c in C {
        acc += c * p;
        p /= x2;
    }
    acc
}

/// `ln Gamma(z + a) - ln Gamma(z + b)` for positive arguments.
///
/// For large `z` the difference is formed from the Stirling expansion
/// directly, which avoids cancelling two numbers of size `z ln z`.
pub fn ln_gamma_ratio(z: f64, a: f64, b: f64) -> f64 {
    let x1 = z + a;
    let x2 = z + b;
    if z >= 30.0 && x1 >= 20.0 && x2 >= 20.0 {
        (a - b) * z.ln() + (x1 - 0.5) * (a / z).ln_1p() - (x2 - 0.5) * (b / z).ln_1p() - (a - b)
            + stirling_tail(x1)
            - stirling_tail(x2)
    } else {
        ln_gamma(x1) - ln_gamma(x2)
    }
}

/// `Gamma(n + a) / Gamma(n + b)`.
pub fn gamma_ratio(n: f64, a: f64, b: f64) -> Result<f64> {
    let (x1, x2) = (n + a, n + b);
    for x in [x1, x2] {
        if x <= 0.0 && x == x.floor() {
            return domain(format!("gamma pole at {x}"));
        }
    }
    if x1 > 0.0 && x2 > 0.0 {
        return Ok(ln_gamma_ratio(n, a, b).exp());
    }
    let (s1, l1) = ln_gamma_signed(x1)?;
    let (s2, l2) = ln_gamma_signed(x2)?;
    Ok(s1 * s2 * (l1 - l2).exp())
}

/// Rising factorial `(a)_n = a (a + 1) ... (a + n - 1)`, `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    if n <= 64 || a <= 0.0 {
        let mut p = 1.0;
        for k in 0..n {
            p *= a + k as f64;
        }
        p
    } else {
        ln_gamma_ratio(a, n as f64, 0.0).exp()
    }
}

/// `ln (a)_n` for `a > 0`.
pub fn ln_pochhammer(a: f64, n: u32) -> f64 {
    debug_assert!(a > 0.0);
    if n == 0 {
        0.0
    } else {
        ln_gamma_ratio(a, n as f64, 0.0)
    }
}

/// Parameters of the Jacobi weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) {
            return domain(format!(
                "Jacobi parameters must exceed -1 (alpha = {alpha}, beta = {beta})"
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// Symmetric (Gegenbauer-type) parameters `alpha = beta`.
    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Iterator over `P_0^{(a,b)}(x), P_1^{(a,b)}(x), ...` by the three-term
/// recurrence in the degree.
#[derive(Clone, Debug)]
pub struct JacobiSeq {
    a: f64,
    b: f64,
    x: f64,
    n: u32,
    prev: f64,
    cur: f64,
}

impl JacobiSeq {
    pub fn new(params: JacobiParams, x: f64) -> Self {
        Self {
            a: params.alpha,
            b: params.beta,
            x,
            n: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for JacobiSeq {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let (a, b, x) = (self.a, self.b, self.x);
        let n = (self.n + 1) as f64;
        let next = if self.n == 0 {
            0.5 * ((a - b) + (a + b + 2.0) * x)
        } else {
            let ab = a + b;
            let c1 = 2.0 * n * (n + ab) * (2.0 * n + ab - 2.0);
            let c2 = (2.0 * n + ab - 1.0) * (a * a - b * b);
            let c3 = (2.0 * n + ab - 2.0) * (2.0 * n + ab - 1.0) * (2.0 * n + ab);
            let c4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * (2.0 * n + ab);
            ((c2 + c3 * x) * self.cur - c4 * self.prev) / c1
        };
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` normalized so that
/// `P_n(1) = binom(n + alpha, n)`.
pub fn jacobi_eval(params: JacobiParams, n: u32, x: f64) -> f64 {
    JacobiSeq::new(params, x).nth(n as usize).unwrap()
}

/// `d/dx P_n^{(a,b)}(x) = (a + b + n + 1) / 2 * P_{n-1}^{(a+1,b+1)}(x)`.
pub fn jacobi_derivative(params: JacobiParams, n: u32, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let shifted = JacobiParams {
        alpha: params.alpha + 1.0,
        beta: params.beta + 1.0,
    };
    0.5 * (params.alpha + params.beta + n as f64 + 1.0) * jacobi_eval(shifted, n - 1, x)
}

/// Normalized Legendre polynomial of S^d, `P_n^{(d)}(1) = 1`.
///
/// Equal to `n! / (d/2)_n * P_n^{(d/2-1, d/2-1)}(x)`; evaluated with the
/// recurrence `(n + d - 1) P_{n+1} = (2n + d - 1) x P_n - n P_{n-1}` which
/// carries the normalization and stays bounded by one on `[-1, 1]`.
pub fn legendre_pnd(d: usize, n: u32, x: f64) -> f64 {
    LegendreSeq::new(d, x).nth(n as usize).unwrap()
}

/// Iterator over `P_0^{(d)}(x), P_1^{(d)}(x), ...`.
#[derive(Clone, Debug)]
pub struct LegendreSeq {
    dm1: f64,
    x: f64,
    n: u32,
    prev: f64,
    cur: f64,
}

impl LegendreSeq {
    pub fn new(d: usize, x: f64) -> Self {
        Self {
            dm1: d as f64 - 1.0,
            x,
            n: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for LegendreSeq {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let n = self.n as f64;
        let next = ((2.0 * n + self.dm1) * self.x * self.cur - n * self.prev) / (n + self.dm1);
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Dimension of the space of spherical harmonics of degree `ell` on S^d.
///
/// Panics if the value does not fit in a `u64`; use [`zdim_f64`] for
/// large degrees.
pub fn zdim(d: usize, ell: u64) -> u64 {
    let d = d as u64;
    let hi = binomial_u128(ell + d, d).expect("Z(d, l) overflow");
    let lo = if ell >= 2 {
        binomial_u128(ell + d - 2, d).expect("Z(d, l) overflow")
    } else {
        0
    };
    u64::try_from(hi - lo).expect("Z(d, l) overflow")
}

/// `Z(d, l)` in floating point, valid for any degree.
pub fn zdim_f64(d: usize, ell: u64) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    if ell < 64 {
        return zdim(d, ell) as f64;
    }
    let (df, l) = (d as f64, ell as f64);
    (2.0 * l + df - 1.0) * (ln_gamma_ratio(l, df - 1.0, 1.0) - ln_gamma(df)).exp()
}

/// Smallest admissible expansion order used when none is given.
pub fn default_expansion_order(d: usize) -> u32 {
    (d as u32).div_ceil(2) + 2
}

/// Coefficients `c_n` of
/// `(1 - x)^{-s/2} = sum_n c_n P_n^{(lambda - 1/2, lambda - 1/2)}(x)`
/// with `lambda = d/2 + K + 1/2`.
#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    pub d: usize,
    pub s: f64,
    pub k: u32,
    pub lambda: f64,
    pub coeffs: Vec<f64>,
}

impl ExpansionCoefficients {
    pub fn jacobi_params(&self) -> JacobiParams {
        JacobiParams {
            alpha: self.lambda - 0.5,
            beta: self.lambda - 0.5,
        }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `sum_{n <= t} c_n P_n(x)`; `t` is clamped to the stored length.
    pub fn partial_sum(&self, x: f64, t: usize) -> f64 {
        let t = t.min(self.n_max());
        JacobiSeq::new(self.jacobi_params(), x)
            .zip(&self.coeffs[..=t])
            .map(|(p, c)| c * p)
            .sum()
    }
}

/// Log of the n-th coefficient, formed entirely from log-gamma terms.
fn ln_expansion_coeff(s: f64, lambda: f64, n: u32) -> f64 {
    let nf = n as f64;
    let half_s = 0.5 * s;
    let prefactor = (2.0 * lambda - half_s) * std::f64::consts::LN_2 - 0.5 * PI.ln()
        + ln_gamma(lambda)
        + ln_gamma(lambda - half_s + 0.5);
    prefactor + (nf + lambda).ln() + ln_pochhammer(half_s, n)
        - ln_gamma(nf + 2.0 * lambda - half_s + 1.0)
        + ln_pochhammer(2.0 * lambda, n)
        - ln_pochhammer(lambda + 0.5, n)
}

/// Jacobi expansion coefficients of `(1 - x)^{-s/2}` up to degree `n_max`.
pub fn riesz_expansion_coeffs(
    d: usize,
    s: f64,
    k: u32,
    n_max: usize,
) -> Result<ExpansionCoefficients> {
    if d < 2 {
        return domain(format!("sphere dimension must be at least 2, got {d}"));
    }
    if !(s > 0.0 && s < d as f64) {
        return domain(format!("s = {s} outside (0, {d})"));
    }
    if 2 * k as usize <= d {
        return domain(format!("expansion order K = {k} must exceed d/2 = {}", d as f64 / 2.0));
    }
    let lambda = d as f64 / 2.0 + k as f64 + 0.5;
    let half_s = 0.5 * s;
    // c_0 in log space, then log-ratios c_{n+1} / c_n
    let mut ln_c = ln_expansion_coeff(s, lambda, 0);
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(ln_c.exp());
    for n in 0..n_max {
        let nf = n as f64;
        ln_c += ((nf + 1.0 + lambda) / (nf + lambda)).ln() + (half_s + nf).ln()
            - (nf + 2.0 * lambda - half_s + 1.0).ln()
            + (2.0 * lambda + nf).ln()
            - (lambda + 0.5 + nf).ln();
        coeffs.push(ln_c.exp());
    }
    Ok(ExpansionCoefficients {
        d,
        s,
        k,
        lambda,
        coeffs,
    })
}

type CacheKey = (usize, u64, u32);

fn expansion_cache() -> &'static RwLock<HashMap<CacheKey, Arc<ExpansionCoefficients>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<ExpansionCoefficients>>>> =
        OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached variant of [`riesz_expansion_coeffs`]: returns a shared sequence
/// with at least `n_max + 1` coefficients for the given `(d, s, K)`.
pub fn riesz_expansion_cached(
    d: usize,
    s: f64,
    k: u32,
    n_max: usize,
) -> Result<Arc<ExpansionCoefficients>> {
    let key = (d, s.to_bits(), k);
    if let Some(c) = expansion_cache().read().unwrap().get(&key) {
        if c.n_max() >= n_max {
            return Ok(Arc::clone(c));
        }
    }
    let fresh = Arc::new(riesz_expansion_coeffs(d, s, k, n_max)?);
    let mut cache = expansion_cache().write().unwrap();
    let entry = cache.entry(key).or_insert_with(|| Arc::clone(&fresh));
    if entry.n_max() < n_max {
        *entry = Arc::clone(&fresh);
    }
    Ok(Arc::clone(entry))
}
