//! The auxiliary weighted graph `G^(s)` of an r-uniform hypergraph and its
//! normalized Laplacian.
//!
//! `G^(s)` lives on the `C(n, s)` s-sets (indexed by colex rank). Two disjoint
//! s-sets `S`, `T` are joined with weight `d_{S ∪ T}`, the number of edges
//! containing both; intersecting pairs (and the diagonal) have weight 0. The
//! degree of `S` in `G^(s)` is `C(r-s, s) d_S`.

use crate::combin::{
    binom, binom_f64, binom_usize, colex_subsets, disjoint_sorted, sset_index, EigenPair, VertexSet,
};
use crate::error::{Error, Result};
use crate::hypergraph::{all_degrees, Hypergraph};
use crate::matrix::SymMatrix;

/// Default cap on the number of s-sets (matrix dimension) for dense assembly.
pub const DEFAULT_MATRIX_BUDGET: usize = 6000;

pub(crate) fn check_loose(r: usize, s: usize) -> Result<()> {
    if s == 0 || 2 * s > r {
        return Err(Error::NotLoose { s, r });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxGraph {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    dim: usize,
    weights: Vec<u64>,
    /// `d_S` in `H`, per s-set.
    pub hyper_degrees: Vec<u64>,
    /// `C(r-s, s) d_S`, the degree of each s-set in `G^(s)`.
    pub aux_degrees: Vec<u64>,
    pub vol: u64,
}

impl AuxGraph {
    /// Number of s-sets, `C(n, s)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        self.weights[i * self.dim + j]
    }

    pub fn weight_row(&self, i: usize) -> &[u64] {
        &self.weights[i * self.dim..(i + 1) * self.dim]
    }

    /// Ranks of s-sets with positive degree, ascending.
    pub fn positive_degree_sets(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| self.aux_degrees[i] > 0).collect()
    }

    pub fn zero_degree_sets(&self) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.aux_degrees[i] == 0)
            .collect()
    }

    /// Connected components of the positive-degree part (BFS); zero-degree
    /// s-sets are not counted as components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.dim];
        let mut comps = Vec::new();
        for start in self.positive_degree_sets() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for (v, &w) in self.weight_row(u).iter().enumerate() {
                    if w > 0 && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// `true` when every s-set has positive degree and `G^(s)` is connected.
    pub fn is_connected(&self) -> bool {
        self.aux_degrees.iter().all(|&d| d > 0) && self.components().len() == 1
    }
}

/// Builds `G^(s)` by visiting, for each edge, its ordered pairs of disjoint s-subsets.
pub fn build_aux(h: &Hypergraph, s: usize) -> Result<AuxGraph> {
    build_aux_with_budget(h, s, DEFAULT_MATRIX_BUDGET)
}

pub fn build_aux_with_budget(h: &Hypergraph, s: usize, budget: usize) -> Result<AuxGraph> {
    let (n, r) = (h.n(), h.r());
    check_loose(r, s)?;
    let dim = binom_usize(n, s)?;
    if dim > budget {
        return Err(Error::TooLarge {
            what: "auxiliary graph s-sets",
            size: dim as u128,
            budget: budget as u128,
        });
    }
    let mut weights = vec![0u64; dim * dim];
    // Local s-subsets of an edge, as positions into its vertex list.
    let local: Vec<Vec<u32>> = colex_subsets(r, s).collect();
    let local_masks: Vec<u64> = local
        .iter()
        .map(|p| p.iter().fold(0u64, |m, &k| m | 1 << k))
        .collect();
    let mut ranks = vec![0usize; local.len()];
    for e in h.edges() {
        let vs = e.vertices();
        for (slot, pick) in ranks.iter_mut().zip(&local) {
            let sub =
                VertexSet::from_sorted_unchecked(pick.iter().map(|&k| vs[k as usize]).collect());
            *slot = sset_index(&sub, n)?;
        }
        for a in 0..local.len() {
            for b in 0..local.len() {
                if local_masks[a] & local_masks[b] == 0 {
                    weights[ranks[a] * dim + ranks[b]] += 1;
                }
            }
        }
    }
    let hyper_degrees = all_degrees(h, s)?;
    let mult = binom(r - s, s)? as u64;
    let aux_degrees: Vec<u64> = hyper_degrees.iter().map(|d| d * mult).collect();
    let vol = aux_degrees.iter().sum();
    Ok(AuxGraph {
        n,
        r,
        s,
        dim,
        weights,
        hyper_degrees,
        aux_degrees,
        vol,
    })
}

/// Normalized Laplacian restricted to positive-degree s-sets.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    pub matrix: SymMatrix,
    /// Ranks of the s-sets behind each row, ascending.
    pub kept: Vec<usize>,
    /// Ranks of zero-degree s-sets, left out of the matrix.
    pub excluded: Vec<usize>,
}

/// `L = I - T^{-1/2} W T^{-1/2}` on the positive-degree s-sets, `T` the diagonal
/// of `G^(s)` degrees.
pub fn normalized_laplacian(g: &AuxGraph) -> Laplacian {
    let kept = g.positive_degree_sets();
    let excluded = g.zero_degree_sets();
    let inv_sqrt: Vec<f64> = kept
        .iter()
        .map(|&k| 1.0 / (g.aux_degrees[k] as f64).sqrt())
        .collect();
    let matrix = SymMatrix::from_lower_fn(kept.len(), |i, j| {
        let w = g.weight(kept[i], kept[j]) as f64 * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - w
        } else {
            -w
        }
    });
    Laplacian {
        matrix,
        kept,
        excluded,
    }
}

/// `phi_0 = D^{1/2} 1 / sqrt(vol)` on the kept s-sets: the unit null vector of `L`.
pub fn trivial_eigenvector(g: &AuxGraph, lap: &Laplacian) -> Vec<f64> {
    let vol = g.vol as f64;
    lap.kept
        .iter()
        .map(|&k| (g.aux_degrees[k] as f64 / vol).sqrt())
        .collect()
}

pub(crate) fn check_complete_params(n: usize, r: usize, s: usize) -> Result<()> {
    if r > n || s == 0 || 2 * s > r {
        return Err(Error::BadParams(format!(
            "need 1 <= s <= r/2 and r <= n, got n={n} r={r} s={s}"
        )));
    }
    Ok(())
}

/// Closed-form spectrum of the s-th Laplacian of `K^r_n`:
/// `1 - (-1)^i C(n-s-i, s-i) / C(n-s, s)` with multiplicity `C(n,i) - C(n,i-1)`, `i = 0..=s`.
pub fn complete_spectrum(n: usize, r: usize, s: usize) -> Result<Vec<EigenPair>> {
    check_complete_params(n, r, s)?;
    let denom = binom_f64(n - s, s);
    crate::combin::kneser_spectrum(n, s).map(|pairs| {
        pairs
            .into_iter()
            .map(|p| EigenPair {
                value: 1.0 - p.value / denom,
                multiplicity: p.multiplicity,
            })
            .collect()
    })
}

/// Smallest nontrivial eigenvalue of the s-th Laplacian of `K^r_n`:
/// `1 - s(s-1) / ((n-s)(n-s-1))` for `s >= 2`. At `s = 1` the only nontrivial
/// eigenvalue is `1 + 1/(n-1)`.
pub fn complete_lambda1(n: usize, s: usize) -> f64 {
    if s == 1 {
        return 1.0 + 1.0 / (n - 1) as f64;
    }
    1.0 - (s * (s - 1)) as f64 / ((n - s) * (n - s - 1)) as f64
}

/// `lambda_max(K^r_n) = 1 + s / (n-s)`.
pub fn complete_lambda_max(n: usize, s: usize) -> f64 {
    1.0 + s as f64 / (n - s) as f64
}

/// `lambda_bar(K^r_n) = s / (n-s)`.
pub fn complete_lambda_bar(n: usize, s: usize) -> f64 {
    s as f64 / (n - s) as f64
}

/// 0/1 adjacency matrix of the Kneser graph `K(n, s)` in colex order.
pub fn kneser_adjacency(n: usize, s: usize) -> Result<SymMatrix> {
    let dim = binom_usize(n, s)?;
    if dim > DEFAULT_MATRIX_BUDGET {
        return Err(Error::TooLarge {
            what: "Kneser adjacency",
            size: dim as u128,
            budget: DEFAULT_MATRIX_BUDGET as u128,
        });
    }
    let sets: Vec<Vec<u32>> = colex_subsets(n, s).collect();
    Ok(SymMatrix::from_lower_fn(dim, |i, j| {
        if disjoint_sorted(&sets[i], &sets[j]) {
            1.0
        } else {
            0.0
        }
    }))
}

/// `C = W - E(W)` with `E(W) = C(n-2s, r-2s) p K`; full dimension `C(n, s)`.
pub fn centered_weight(h: &Hypergraph, s: usize, p: f64) -> Result<SymMatrix> {
    let g = build_aux(h, s)?;
    centered_weight_from_aux(&g, p)
}

pub fn centered_weight_from_aux(g: &AuxGraph, p: f64) -> Result<SymMatrix> {
    let mean = expected_weight(g.n, g.r, g.s, p);
    let sets: Vec<Vec<u32>> = colex_subsets(g.n, g.s).collect();
    Ok(SymMatrix::from_lower_fn(g.dim, |i, j| {
        let w = g.weight(i, j) as f64;
        if disjoint_sorted(&sets[i], &sets[j]) {
            w - mean
        } else {
            w
        }
    }))
}

/// `E(W(S,T)) = C(n-2s, r-2s) p` for disjoint `S`, `T`.
pub fn expected_weight(n: usize, r: usize, s: usize, p: f64) -> f64 {
    binom_f64(n - 2 * s, r - 2 * s) * p
}
