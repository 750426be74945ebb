//! Kolmogorov-Smirnov statistics used to check samplers.

/// Asymptotic 99% coefficient `sqrt(-ln(0.005)/2)`.
pub const KS_C99: f64 = 1.627_574_739_324_015_4;

/// `sup_x |F_n(x) - F(x)|` for a sample against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// 99% critical value of the one-sample statistic for sample size `n`.
pub fn ks_critical_one(n: usize) -> f64 {
    KS_C99 / (n as f64).sqrt()
}

/// 99% critical value of the two-sample statistic.
pub fn ks_critical_two(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_C99 * ((n + m) / (n * m)).sqrt()
}
