//! Applications and diagnostics built on the loose Laplacian: random s-walks,
//! s-diameter, edge expansion, intersecting families, monotonicity in s and the
//! four-part perturbation split of `L_K - L_H`.

use std::collections::VecDeque;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::combin::{
    binom, binom_f64, colex_subsets, disjoint_sorted, kneser_multiplicity, sset_index, VertexSet,
};
use crate::error::{Error, Result};
use crate::hypergraph::{all_degrees, Hypergraph};
use crate::laplacian::{
    build_aux, check_complete_params, expected_weight, kneser_adjacency, normalized_laplacian,
    AuxGraph, Laplacian,
};
use crate::matrix::SymMatrix;
use crate::spectra::{
    deviation, eigenvalues_sym, spectral_norm, spectral_radius, Spectrum, ZERO_TOL,
};

/// Slack used when comparing quantities that agree in exact arithmetic.
pub const EXACT_SLACK: f64 = 1e-9;

/// `G^(s)`, its Laplacian and spectrum, with connectivity judged both ways.
#[derive(Debug, Clone)]
pub struct LevelSpectrum {
    pub aux: AuxGraph,
    pub laplacian: Laplacian,
    pub spectrum: Spectrum,
    pub connected_bfs: bool,
    pub connected_spectral: bool,
}

impl LevelSpectrum {
    pub fn lambda_bar(&self) -> Result<f64> {
        if !self.connected_bfs {
            return Err(Error::Disconnected(format!(
                "G^({}) has {} zero-degree s-sets and {} components",
                self.aux.s,
                self.aux.zero_degree_sets().len(),
                self.aux.components().len()
            )));
        }
        spectral_radius(&self.spectrum, ZERO_TOL)
    }
}

pub fn level_spectrum(h: &Hypergraph, s: usize) -> Result<LevelSpectrum> {
    let aux = build_aux(h, s)?;
    let laplacian = normalized_laplacian(&aux);
    let spectrum = eigenvalues_sym(&laplacian.matrix)?;
    let connected_bfs = aux.is_connected();
    let connected_spectral =
        laplacian.excluded.is_empty() && spectral_radius(&spectrum, ZERO_TOL).is_ok();
    Ok(LevelSpectrum {
        aux,
        laplacian,
        spectrum,
        connected_bfs,
        connected_spectral,
    })
}

/// `d = C(n-s, r-s) p`, the expected s-set degree in `H^r(n, p)`.
pub fn expected_degree(n: usize, r: usize, s: usize, p: f64) -> f64 {
    binom_f64(n - s, r - s) * p
}

/// `s/(n-s) + factor sqrt((1-p)/d)`: the spectral radius bound for `H^r(n,p)`
/// with the constant in front of the fluctuation term made explicit.
pub fn radius_rhs(n: usize, r: usize, s: usize, p: f64, factor: f64) -> f64 {
    s as f64 / (n - s) as f64 + factor * ((1.0 - p) / expected_degree(n, r, s, p)).sqrt()
}

/// `2 sqrt(C(r-s, s) C(n-s, r-s) p (1-p))`, the semicircle radius of `W - E(W)`.
pub fn semicircle_radius(n: usize, r: usize, s: usize, p: f64) -> f64 {
    2.0 * (binom_f64(r - s, s) * binom_f64(n - s, r - s) * p * (1.0 - p)).sqrt()
}

/// Half width `3 sqrt(d log N)` of the window every s-set degree should fall in.
pub fn degree_window(n: usize, r: usize, s: usize, p: f64) -> f64 {
    let d = expected_degree(n, r, s, p);
    3.0 * (d * binom_f64(n, s).ln()).sqrt()
}

/// `C(n, s) d (1-p)`, the expected size of `Σ (d_S - d)^2`.
pub fn sum_sq_reference(n: usize, r: usize, s: usize, p: f64) -> f64 {
    binom_f64(n, s) * expected_degree(n, r, s, p) * (1.0 - p)
}

/// Random s-walk kernel `P = D^{-1} W` on a connected `G^(s)`.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub dim: usize,
    /// Row-major `P`.
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
}

impl TransitionSystem {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.dim..(i + 1) * self.dim]
    }

    /// Row vector times `P`.
    pub fn step(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (yj, pij) in y.iter_mut().zip(self.row(i)) {
                *yj += xi * pij;
            }
        }
        y
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.dim)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |pi P - pi|`.
    pub fn stationarity_error(&self) -> f64 {
        self.step(&self.pi)
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn weighted_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.pi)
            .map(|(a, w)| a * a / w)
            .sum::<f64>()
            .sqrt()
    }
}

pub fn transition_system(g: &AuxGraph) -> Result<TransitionSystem> {
    if !g.is_connected() {
        return Err(Error::Disconnected(format!(
            "random s-walk needs a connected G^({}) with positive degrees",
            g.s
        )));
    }
    let dim = g.dim();
    let vol = g.vol as f64;
    let mut p = vec![0.0; dim * dim];
    for i in 0..dim {
        let deg = g.aux_degrees[i] as f64;
        for (j, &w) in g.weight_row(i).iter().enumerate() {
            p[i * dim + j] = w as f64 / deg;
        }
    }
    let pi = g.aux_degrees.iter().map(|&d| d as f64 / vol).collect();
    Ok(TransitionSystem { dim, p, pi })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub lambda_bar: f64,
    pub steps: usize,
    /// `factors[start][t]`: norm ratio of step `t + 1` over step `t`.
    pub factors: Vec<Vec<f64>>,
    pub max_factor: f64,
    /// Starting points whose deviation from `pi` vanished.
    pub skipped: usize,
    /// Worst total-variation distance to `pi` after each step.
    pub tv: Vec<f64>,
    pub within_bound: bool,
}

/// Contraction of `q - pi` in the norm `sqrt(Σ x_S^2 / pi_S)` for every point
/// mass `q`, over `steps` steps.
pub fn mixing_contraction(
    ts: &TransitionSystem,
    lambda_bar: f64,
    steps: usize,
) -> Result<MixingReport> {
    if steps == 0 {
        return Err(Error::BadParams("mixing needs at least one step".into()));
    }
    let mut factors = Vec::new();
    let mut skipped = 0;
    let mut tv = vec![0.0f64; steps];
    for start in 0..ts.dim {
        let mut x: Vec<f64> = ts.pi.iter().map(|p| -p).collect();
        x[start] += 1.0;
        let norm = ts.weighted_norm(&x);
        if norm < 1e-14 {
            skipped += 1;
            continue;
        }
        // x is kept at unit norm; scale carries the true size of q P^t - pi
        x.iter_mut().for_each(|v| *v /= norm);
        let mut scale = norm;
        let mut row = Vec::with_capacity(steps);
        for slot in tv.iter_mut() {
            let mut y = ts.step(&x);
            let drift: f64 = y.iter().sum();
            for (yi, pi) in y.iter_mut().zip(&ts.pi) {
                *yi -= drift * pi;
            }
            let factor = ts.weighted_norm(&y);
            *slot = slot.max(0.5 * scale * y.iter().map(|v| v.abs()).sum::<f64>());
            row.push(factor);
            if factor < 1e-300 {
                break;
            }
            scale *= factor;
            x = y.into_iter().map(|v| v / factor).collect();
        }
        factors.push(row);
    }
    let max_factor = factors.iter().flatten().copied().fold(0.0, f64::max);
    Ok(MixingReport {
        lambda_bar,
        steps,
        factors,
        max_factor,
        skipped,
        tv,
        within_bound: max_factor <= lambda_bar + EXACT_SLACK,
    })
}

/// Largest BFS distance between s-sets in `G^(s)`.
pub fn s_diameter(g: &AuxGraph) -> Result<usize> {
    if !g.is_connected() {
        return Err(Error::Disconnected(format!("G^({}) is disconnected", g.s)));
    }
    let dim = g.dim();
    let mut diameter = 0;
    let mut dist = vec![usize::MAX; dim];
    let mut queue = VecDeque::new();
    for src in 0..dim {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for (v, &w) in g.weight_row(u).iter().enumerate() {
                if w > 0 && dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    diameter = diameter.max(dist[v]);
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(diameter)
}

/// `ceil(log(|E| C(r,s) / delta) / log((lmax + l1) / (lmax - l1)))` with `delta`
/// the minimum s-set degree. A spectrum with `lmax = l1` (complete graph at
/// s = 1) gives 1.
pub fn diameter_bound(spec: &Spectrum, h: &Hypergraph, s: usize) -> Result<usize> {
    spectral_radius(spec, ZERO_TOL)?;
    let delta = all_degrees(h, s)?.into_iter().min().unwrap_or(0);
    if delta == 0 {
        return Err(Error::Disconnected("an s-set has degree zero".into()));
    }
    let l1 = spec.lambda1().expect("connected spectrum has dim >= 2");
    let lmax = spec.lambda_max().expect("connected spectrum has dim >= 2");
    if lmax - l1 <= EXACT_SLACK {
        return Ok(1);
    }
    let num = (h.edge_count() as f64 * binom_f64(h.r(), s) / delta as f64).ln();
    let den = ((lmax + l1) / (lmax - l1)).ln();
    Ok((num / den).ceil().max(1.0) as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub e_st: f64,
    pub e_s: f64,
    pub e_t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `Σ_{S ∈ famS, T ∈ famT} W(S,T) / Σ W`: the weighted count of family pairs.
    pub e_st_weighted: f64,
    pub lhs_weighted: f64,
    pub holds_weighted: bool,
}

/// Edge-expansion quantities for two families of s-sets. `E(S, T)` counts each
/// edge once if it contains some disjoint `S ∈ famS`, `T ∈ famT`. The weighted
/// variant sums `W(S, T)` over family pairs instead, which is the form covered
/// by the expander mixing lemma for `G^(s)`.
pub fn edge_expansion(
    h: &Hypergraph,
    s: usize,
    fam_s: &[VertexSet],
    fam_t: &[VertexSet],
    lambda_bar: f64,
) -> Result<ExpansionReport> {
    if fam_s.is_empty() || fam_t.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for set in fam_s.iter().chain(fam_t) {
        if set.len() != s {
            return Err(Error::BadSet(format!("{set} is not an {s}-set")));
        }
    }
    let rank = |f: &[VertexSet]| -> Result<Vec<usize>> {
        let mut v = f
            .iter()
            .map(|x| sset_index(x, h.n()))
            .collect::<Result<Vec<_>>>()?;
        v.sort_unstable();
        v.dedup();
        Ok(v)
    };
    let (rs, rt) = (rank(fam_s)?, rank(fam_t)?);
    let degrees = all_degrees(h, s)?;
    let total: u64 = degrees.iter().sum();
    let pair_edges = if 2 * s <= h.r() { h.edge_count() } else { 0 };
    if total == 0 || pair_edges == 0 {
        return Err(Error::BadParams(
            "edge expansion needs a nonempty hypergraph".into(),
        ));
    }

    let in_s: std::collections::BTreeSet<usize> = rs.iter().copied().collect();
    let in_t: std::collections::BTreeSet<usize> = rt.iter().copied().collect();
    let mut hits = 0usize;
    for edge in h.edges() {
        let v = edge.vertices();
        let subs: Vec<Vec<u32>> = colex_subsets(v.len(), s)
            .map(|pick| pick.iter().map(|&x| v[x as usize]).collect())
            .collect();
        let ranks: Vec<usize> = subs
            .iter()
            .map(|x| sset_index(&VertexSet::from_sorted_unchecked(x.clone()), h.n()))
            .collect::<Result<_>>()?;
        let found = (0..subs.len()).any(|a| {
            in_s.contains(&ranks[a])
                && (0..subs.len())
                    .any(|b| in_t.contains(&ranks[b]) && disjoint_sorted(&subs[a], &subs[b]))
        });
        if found {
            hits += 1;
        }
    }
    let share = |r: &[usize]| r.iter().map(|&i| degrees[i]).sum::<u64>() as f64 / total as f64;
    let (e_s, e_t) = (share(&rs), share(&rt));
    let e_st = hits as f64 / pair_edges as f64;
    let lhs = (e_st - e_s * e_t).abs();
    let rhs = lambda_bar * (e_s * e_t * (1.0 - e_s) * (1.0 - e_t)).sqrt();

    let g = build_aux(h, s)?;
    let pair_weight: u64 = rs
        .iter()
        .map(|&a| rt.iter().map(|&b| g.weight(a, b)).sum::<u64>())
        .sum();
    let e_st_weighted = pair_weight as f64 / g.vol as f64;
    let lhs_weighted = (e_st_weighted - e_s * e_t).abs();
    Ok(ExpansionReport {
        e_st,
        e_s,
        e_t,
        lhs,
        rhs,
        holds: lhs <= rhs + EXACT_SLACK,
        e_st_weighted,
        lhs_weighted,
        holds_weighted: lhs_weighted <= rhs + EXACT_SLACK,
    })
}

/// Random nonempty family: each s-set of `[0, n)` kept independently with probability 1/2.
pub fn random_family<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Vec<VertexSet> {
    loop {
        let fam: Vec<VertexSet> = colex_subsets(n, s)
            .filter(|_| rng.random_bool(0.5))
            .map(VertexSet::from_sorted_unchecked)
            .collect();
        if !fam.is_empty() {
            return fam;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkrReport {
    pub n: usize,
    pub s: usize,
    /// Multiplicity of eigenvalues above 1 in the complete-hypergraph spectrum.
    pub n_plus: u128,
    /// Multiplicity of eigenvalues below 1.
    pub n_minus: u128,
    pub min: u128,
    /// `C(n-1, s-1)`.
    pub star_size: u128,
}

/// Eigenvalue counts on either side of 1 for the s-th Laplacian of `K^r_n`.
/// The sign of `1 - lambda` for index `i` is `(-1)^i`, so odd indices lie above 1.
pub fn ekr_bound(n: usize, s: usize) -> Result<EkrReport> {
    if s == 0 || n < 2 * s {
        return Err(Error::BadParams(format!(
            "need 1 <= s and n >= 2s, got n={n} s={s}"
        )));
    }
    let (mut n_plus, mut n_minus) = (0u128, 0u128);
    for i in 0..=s {
        let m = kneser_multiplicity(n, i)?;
        if i % 2 == 1 {
            n_plus += m;
        } else {
            n_minus += m;
        }
    }
    Ok(EkrReport {
        n,
        s,
        n_plus,
        n_minus,
        min: n_plus.min(n_minus),
        star_size: binom(n - 1, s - 1)?,
    })
}

/// All s-sets containing vertex 0.
pub fn star_family(n: usize, s: usize) -> Vec<VertexSet> {
    colex_subsets(n, s)
        .filter(|v| v[0] == 0)
        .map(VertexSet::from_sorted_unchecked)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub s: usize,
    pub lambda1: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub rows: Vec<LevelRow>,
    pub lambda1_nonincreasing: bool,
    pub lambda_max_nondecreasing: bool,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.lambda1_nonincreasing && self.lambda_max_nondecreasing
    }
}

/// `lambda_1^(s)` and `lambda_max^(s)` for `s = 1..=r/2`.
pub fn monotonicity_check(h: &Hypergraph) -> Result<MonotonicityReport> {
    let mut rows = Vec::new();
    for s in 1..=h.r() / 2 {
        let level = level_spectrum(h, s)?;
        level.lambda_bar()?;
        rows.push(LevelRow {
            s,
            lambda1: level.spectrum.lambda1().expect("connected"),
            lambda_max: level.spectrum.lambda_max().expect("connected"),
        });
    }
    let pairs = || rows.windows(2);
    let lambda1_nonincreasing = pairs().all(|w| w[0].lambda1 + EXACT_SLACK >= w[1].lambda1);
    let lambda_max_nondecreasing =
        pairs().all(|w| w[0].lambda_max <= w[1].lambda_max + EXACT_SLACK);
    Ok(MonotonicityReport {
        rows,
        lambda1_nonincreasing,
        lambda_max_nondecreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub p: f64,
    pub d: f64,
    pub norm_m: f64,
    /// `||M_1||..||M_4||`.
    pub norms: [f64; 4],
    /// `max |M - (M_1 + M_2 + M_3 + M_4)|`.
    pub identity_error: f64,
    pub triangle_holds: bool,
    /// `max_k |lambda_k(L_H) - lambda_k(L_K)|`.
    pub spectral_deviation: f64,
    pub weyl_holds: bool,
    /// `sqrt((1-p)/d)`, the scale of `M_2` and `M_4`.
    pub ref_m2_m4: f64,
    /// `sqrt((1-p) log N) / d`, the scale of `M_1`.
    pub ref_m1: f64,
    /// `sqrt(log N) / (n sqrt(d))`, the scale of `M_3`.
    pub ref_m3: f64,
    /// `||M_i||` divided by its reference scale.
    pub ratios: [f64; 4],
}

/// Split `M = L_K - L_H` into the four parts
///
/// * `M_1 = (D^{-1/2} C D^{-1/2} - C/d) / c`
/// * `M_2 = C / (c d)`
/// * `M_3 = D^{-1/2} E(W) D^{-1/2} / c - (d/N) D^{-1/2} J D^{-1/2} - K / C(n-s, s) + J/N`
/// * `M_4 = (d D^{-1/2} J D^{-1/2} - J) / N`
///
/// where `c = C(r-s, s)`, `D` the s-set degrees, `C = W - E(W)` and `J` all ones.
pub fn perturbation_diagnostics(h: &Hypergraph, s: usize, p: f64) -> Result<PerturbationReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadParams(format!("p = {p} outside (0, 1)")));
    }
    let (n, r) = (h.n(), h.r());
    check_complete_params(n, r, s)?;
    let g = build_aux(h, s)?;
    if let Some(&zero) = g.zero_degree_sets().first() {
        return Err(Error::ZeroDegree(zero));
    }
    let dim = g.dim();
    let nf = dim as f64;
    let c = binom_f64(r - s, s);
    let d = expected_degree(n, r, s, p);
    let kn = binom_f64(n - s, s);
    let ew = expected_weight(n, r, s, p);
    let inv: Vec<f64> = g
        .hyper_degrees
        .iter()
        .map(|&x| 1.0 / (x as f64).sqrt())
        .collect();
    let kneser = kneser_adjacency(n, s)?;

    let centered = |i: usize, j: usize| g.weight(i, j) as f64 - ew * kneser.get(i, j);
    let m1 = SymMatrix::from_lower_fn(dim, |i, j| (inv[i] * inv[j] - 1.0 / d) * centered(i, j) / c);
    let m2 = SymMatrix::from_lower_fn(dim, |i, j| centered(i, j) / (c * d));
    let m3 = SymMatrix::from_lower_fn(dim, |i, j| {
        let k = kneser.get(i, j);
        inv[i] * inv[j] * ew * k / c - d / nf * inv[i] * inv[j] - k / kn + 1.0 / nf
    });
    let m4 = SymMatrix::from_lower_fn(dim, |i, j| (d * inv[i] * inv[j] - 1.0) / nf);

    let l_h = normalized_laplacian(&g).matrix;
    let l_k = SymMatrix::from_lower_fn(dim, |i, j| f64::from(i == j) - kneser.get(i, j) / kn);
    let m = &l_k - &l_h;
    let sum = &(&m1 + &m2) + &(&m3 + &m4);
    let identity_error = m.max_abs_diff(&sum)?;

    let norm_m = spectral_norm(&m)?;
    let norms = [
        spectral_norm(&m1)?,
        spectral_norm(&m2)?,
        spectral_norm(&m3)?,
        spectral_norm(&m4)?,
    ];
    let triangle_holds = norm_m <= norms.iter().sum::<f64>() + EXACT_SLACK;
    let spectral_deviation = deviation(&eigenvalues_sym(&l_h)?, &eigenvalues_sym(&l_k)?)?;

    let log_n = nf.ln();
    let ref_m2_m4 = ((1.0 - p) / d).sqrt();
    let ref_m1 = ((1.0 - p) * log_n).sqrt() / d;
    let ref_m3 = log_n.sqrt() / (n as f64 * d.sqrt());
    let ratios = [
        norms[0] / ref_m1,
        norms[1] / ref_m2_m4,
        norms[2] / ref_m3,
        norms[3] / ref_m2_m4,
    ];
    Ok(PerturbationReport {
        n,
        r,
        s,
        p,
        d,
        norm_m,
        norms,
        identity_error,
        triangle_holds,
        spectral_deviation,
        weyl_holds: spectral_deviation <= norm_m + EXACT_SLACK,
        ref_m2_m4,
        ref_m1,
        ref_m3,
        ratios,
    })
}
