//! Small statistics helpers shared by tests, estimators and the acceptance suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
        };
        ChiSquareTest { statistic, dof, p_value }
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Goodness of fit of `observed` counts against probabilities `expected`
/// (same indexing). Bins with expected count below 5 are pooled, in order,
/// until every pooled bin reaches 5; a short tail is folded into the last bin.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), expected.len());
    let n: u64 = observed.iter().sum();
    let total_p: f64 = expected.iter().sum();
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &p) in observed.iter().zip(expected) {
        o += ob as f64;
        e += n as f64 * p / total_p;
        if e >= 5.0 {
            pooled.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => pooled.push((o, e)),
        }
    }
    let stat = pooled.iter().filter(|(_, e)| *e > 0.0).map(|(o, e)| (o - e).powi(2) / e).sum();
    ChiSquareTest::from_statistic(stat, pooled.len().saturating_sub(1))
}

/// Two-sample homogeneity test on aligned count vectors. Bins whose combined
/// count is below 10 are pooled.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let (mut x, mut y) = (0.0, 0.0);
    for (&u, &v) in a.iter().zip(b) {
        x += u as f64;
        y += v as f64;
        if x + y >= 10.0 {
            pooled.push((x, y));
            x = 0.0;
            y = 0.0;
        }
    }
    if x + y > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += x;
                last.1 += y;
            }
            None => pooled.push((x, y)),
        }
    }
    let na: f64 = pooled.iter().map(|p| p.0).sum();
    let nb: f64 = pooled.iter().map(|p| p.1).sum();
    let n = na + nb;
    let mut stat = 0.0;
    for &(x, y) in &pooled {
        let col = x + y;
        let ea = na * col / n;
        let eb = nb * col / n;
        if ea > 0.0 {
            stat += (x - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (y - eb).powi(2) / eb;
        }
    }
    ChiSquareTest::from_statistic(stat, pooled.len().saturating_sub(1))
}

/// Sample mean and unbiased standard deviation (`None` for fewer than 2 values).
pub fn mean_sd(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some(var.sqrt()))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Formats `x` with 9 significant digits, like C's `%.9g`.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // `{:.8e}` rounds first, so its exponent is the one %g would use
    let s = format!("{:.8e}", x);
    let (mant, e) = s.split_once('e').unwrap();
    let e: i32 = e.parse().unwrap();
    if !(-4..9).contains(&e) {
        let mant = trim_zeros(mant);
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (8 - e).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
