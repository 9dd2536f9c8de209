//! Compensated (Neumaier) summation and a deterministic blocked reduction.

use rayon::prelude::*;

/// Running Kahan–Babuška–Neumaier accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

impl<'a> std::iter::FromIterator<&'a f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = &'a f64>>(iter: I) -> Self {
        iter.into_iter().copied().collect()
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Evaluates `row(i)` for every `i < n` (in parallel) and folds the row
/// values in index order. The result does not depend on the number of
/// worker threads.
pub fn ordered_row_sum<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let rows: Vec<f64> = (0..n).into_par_iter().map(&row).collect();
    compensated_sum(rows)
}

/// Same as [`ordered_row_sum`] but for vector-valued rows (summed per
/// component).
pub fn ordered_row_sum_vec<F>(n: usize, width: usize, row: F) -> Vec<f64>
where
    F: Fn(usize) -> Vec<f64> + Sync + Send,
{
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(&row).collect();
    let mut acc = vec![CompensatedSum::new(); width];
    for r in &rows {
        for (a, v) in acc.iter_mut().zip(r) {
            a.add(*v);
        }
    }
    acc.iter().map(CompensatedSum::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
        let naive: f64 = v.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn ordered_sum_matches_serial() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let par = ordered_row_sum(10_000, f);
        let ser = compensated_sum((0..10_000).map(f));
        assert_eq!(par.to_bits(), ser.to_bits());
    }
}
