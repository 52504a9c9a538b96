//! Dense symmetric eigenvalues, spectral summaries and semicircle statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Absolute tolerance under which an eigenvalue counts as the trivial zero.
pub const ZERO_TOL: f64 = 1e-8;

/// QL sweeps allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Eigenvalues with `|lambda| < ZERO_TOL`.
    pub trivial_count: usize,
}

impl Spectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let trivial_count = values.iter().filter(|v| v.abs() < ZERO_TOL).count();
        Spectrum {
            values,
            trivial_count,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Second-smallest eigenvalue (first nontrivial one of a Laplacian).
    pub fn lambda1(&self) -> Option<f64> {
        self.values.get(1).copied()
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// `max(1 - lambda_1, lambda_max - 1)`.
    pub fn lambda_bar(&self) -> Option<f64> {
        Some((1.0 - self.lambda1()?).max(self.lambda_max()? - 1.0))
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Householder reduction of the lower triangle of `a` (row-major, `n x n`) to
/// tridiagonal form. Returns `(diagonal, off_diagonal)` with `off[0] = 0` and
/// `off[i]` coupling rows `i-1` and `i`.
fn householder_tridiagonal(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let at = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = a[at(i, l)];
                continue;
            }
            let mut h = 0.0;
            for k in 0..=l {
                a[at(i, k)] /= scale;
                h += a[at(i, k)] * a[at(i, k)];
            }
            let f = a[at(i, l)];
            let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            a[at(i, l)] = f - g;
            let mut f = 0.0;
            for j in 0..=l {
                let mut g = 0.0;
                for k in 0..=j {
                    g += a[at(j, k)] * a[at(i, k)];
                }
                for k in j + 1..=l {
                    g += a[at(k, j)] * a[at(i, k)];
                }
                e[j] = g / h;
                f += e[j] * a[at(i, j)];
            }
            let hh = f / (h + h);
            for j in 0..=l {
                let f = a[at(i, j)];
                let g = e[j] - hh * f;
                e[j] = g;
                for k in 0..=j {
                    a[at(j, k)] -= f * e[k] + g * a[at(i, k)];
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
    }
    e[0] = 0.0;
    for (i, di) in d.iter_mut().enumerate() {
        *di = a[at(i, i)];
    }
    (d, e)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
/// `e` uses the layout of [`householder_tridiagonal`]; `d` is overwritten with
/// the eigenvalues (unsorted).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenFail { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Spectrum> {
    let n = m.dim();
    if n == 0 {
        return Ok(Spectrum::from_values(Vec::new()));
    }
    let mut a = m.as_slice().to_vec();
    let (mut d, mut e) = householder_tridiagonal(&mut a, n);
    tridiagonal_ql(&mut d, &mut e)?;
    Ok(Spectrum::from_values(d))
}

/// Spectral norm `max |lambda|` of a symmetric matrix.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    let spec = eigenvalues_sym(m)?;
    Ok(spec.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// `lambda_bar` of a connected Laplacian spectrum: exactly one eigenvalue below `zero_tol`.
pub fn spectral_radius(spec: &Spectrum, zero_tol: f64) -> Result<f64> {
    let trivial = spec.values.iter().filter(|v| v.abs() < zero_tol).count();
    if trivial != 1 || spec.dim() < 2 {
        return Err(Error::Disconnected(format!(
            "{trivial} eigenvalues below {zero_tol:e} in a spectrum of dimension {}",
            spec.dim()
        )));
    }
    Ok(spec.lambda_bar().expect("dimension checked"))
}

/// `max_k |a_k - b_k|` over sorted spectra.
pub fn deviation(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// CDF of the semicircle law with density `(2/pi) sqrt(1 - x^2)` on `[-1, 1]`.
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
    }
}

pub fn semicircle_density(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        2.0 / std::f64::consts::PI * (1.0 - x * x).sqrt()
    }
}

/// Empirical distribution over sorted sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    points: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        Ecdf { points }
    }

    /// Pools several samples into one.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a Ecdf>) -> Self {
        Ecdf::new(
            parts
                .into_iter()
                .flat_map(|e| e.points.iter().copied())
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fraction of points strictly below `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.points.partition_point(|&p| p < x) as f64 / self.points.len() as f64
    }

    /// Counts per equal-width bin over `[lo, hi)` as `(left, right, count)`;
    /// points outside the range are dropped.
    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, u64)> {
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &p in &self.points {
            if p >= lo && p < hi {
                let b = (((p - lo) / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(b, c)| (lo + b as f64 * width, lo + (b + 1) as f64 * width, c))
            .collect()
    }
}

/// Points `(lambda_k - center) / radius`.
pub fn scaled_ecdf(spec: &Spectrum, center: f64, radius: f64) -> Result<Ecdf> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::BadRadius(radius));
    }
    Ok(Ecdf::new(
        spec.values.iter().map(|v| (v - center) / radius).collect(),
    ))
}

/// Two-sided Kolmogorov-Smirnov distance
/// `max_i max(i/m - F(x_i), F(x_i) - (i-1)/m)` against a continuous CDF.
pub fn ks_distance(sample: &Ecdf, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = sample.len() as f64;
    Ok(sample
        .points
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / m) - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max))
}
