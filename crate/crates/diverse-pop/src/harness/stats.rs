//! Small statistical helpers for acceptance experiments and sweeps.

/// Two-sample Kolmogorov-Smirnov test.
///
/// Returns `(D, p)` with the asymptotic p-value (Numerical-Recipes style
/// effective sample size). Ties are fine; the asymptotic p is conservative
/// for heavily tied integer data.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] <= v {
            i += 1;
        }
        while j < m && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2)`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square homogeneity statistic for two samples of counts over
/// the same categories. Returns `(statistic, degrees_of_freedom)`; cells
/// empty in both samples are dropped.
pub fn chi_square_homogeneity(counts_a: &[u64], counts_b: &[u64]) -> (f64, usize) {
    assert_eq!(counts_a.len(), counts_b.len());
    let total_a: u64 = counts_a.iter().sum();
    let total_b: u64 = counts_b.iter().sum();
    let grand = (total_a + total_b) as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&oa, &ob) in counts_a.iter().zip(counts_b) {
        let col = (oa + ob) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * total_a as f64 / grand;
        let eb = col * total_b as f64 / grand;
        stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
    }
    (stat, cells.saturating_sub(1))
}

/// Linear-interpolated quantile of an unsorted sample, `q` in [0, 1].
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] * (1.0 - frac) + sorted[hi] * frac)
}

/// Least-squares slope of `y` against `x`.
pub fn regression_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::SimRng;

    #[test]
    fn ks_accepts_identical_distributions() {
        let mut rng = SimRng::from_seed(100);
        let xs: Vec<f64> = (0..500).map(|_| (rng.below(40)) as f64).collect();
        let ys: Vec<f64> = (0..500).map(|_| (rng.below(40)) as f64).collect();
        let (_, p) = ks_two_sample(&xs, &ys);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn ks_rejects_shifted_distributions() {
        let mut rng = SimRng::from_seed(101);
        let xs: Vec<f64> = (0..500).map(|_| (rng.below(40)) as f64).collect();
        let ys: Vec<f64> = (0..500).map(|_| (rng.below(40) + 8) as f64).collect();
        let (_, p) = ks_two_sample(&xs, &ys);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn kolmogorov_tails() {
        assert!((kolmogorov_q(0.0) - 1.0).abs() < 1e-12);
        assert!(kolmogorov_q(3.0) < 1e-6);
        // classical value Q(1.0) ~ 0.27
        assert!((kolmogorov_q(1.0) - 0.27).abs() < 0.01);
    }

    #[test]
    fn quantiles_interpolate() {
        let values = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&values, 0.0), Some(1.0));
        assert_eq!(quantile(&values, 1.0), Some(4.0));
        assert_eq!(quantile(&values, 0.5), Some(2.5));
    }

    #[test]
    fn slope_recovers_linear_law() {
        let x: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((regression_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
    }
}
