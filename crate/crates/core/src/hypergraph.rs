//! r-uniform hypergraphs, the complete hypergraph, the random model `H^r(n,p)`
//! and s-set degree statistics.
//!
//! Random sampling walks the `C(n, r)` candidate r-sets in colex order and draws
//! one uniform deviate per candidate from a ChaCha8 stream (`rand_chacha`),
//! seeded with `seed_from_u64(seed)` and positioned on stream `stream`.

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::combin::{binom, binom_f64, binom_usize, colex_subsets, sset_index, VertexSet};
use crate::error::{Error, Result};

/// Default cap on the number of candidate r-sets enumerated when sampling.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    r: usize,
    edges: BTreeSet<VertexSet>,
}

impl Hypergraph {
    pub fn empty(n: usize, r: usize) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::BadRank {
                what: "edge size r",
                value: r as u128,
                limit: n as u128,
            });
        }
        Ok(Hypergraph {
            n,
            r,
            edges: BTreeSet::new(),
        })
    }

    /// Builds a hypergraph from edges given as vertex lists in any order.
    pub fn from_edges<I>(n: usize, r: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<u32>>,
    {
        let mut h = Self::empty(n, r)?;
        for e in edges {
            h.insert(VertexSet::from_unsorted(e, n)?)?;
        }
        Ok(h)
    }

    fn insert(&mut self, edge: VertexSet) -> Result<bool> {
        if edge.len() != self.r {
            return Err(Error::BadSet(format!(
                "edge {edge} has {} vertices, expected {}",
                edge.len(),
                self.r
            )));
        }
        Ok(self.edges.insert(edge))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in sorted (lexicographic) order.
    pub fn edges(&self) -> impl Iterator<Item = &VertexSet> {
        self.edges.iter()
    }

    pub fn contains_edge(&self, edge: &VertexSet) -> bool {
        self.edges.contains(edge)
    }

    /// Writes the fixture format: `n r m`, then one edge per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.r, self.edges.len());
        for e in &self.edges {
            let line: Vec<String> = e.vertices().iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let nums = parse_numbers(header, hline)?;
        let [n, r, m] = nums[..] else {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `n r m`".into(),
            });
        };
        let (n, r, m) = (n as usize, r as usize, m as usize);
        let mut h = Self::empty(n, r)?;
        let mut seen = 0;
        for (line, l) in lines {
            let vs = parse_numbers(l, line)?;
            let edge = VertexSet::from_unsorted(vs, n).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            if !h.insert(edge).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })? {
                return Err(Error::Parse {
                    line,
                    msg: "duplicate edge".into(),
                });
            }
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header announces {m} edges, found {seen}"),
            });
        }
        Ok(h)
    }
}

fn parse_numbers(l: &str, line: usize) -> Result<Vec<u32>> {
    l.split_whitespace()
        .map(|tok| {
            tok.parse::<u32>().map_err(|e| Error::Parse {
                line,
                msg: format!("`{tok}`: {e}"),
            })
        })
        .collect()
}

/// The complete r-uniform hypergraph `K^r_n`.
pub fn complete(n: usize, r: usize) -> Result<Hypergraph> {
    let mut h = Hypergraph::empty(n, r)?;
    for e in colex_subsets(n, r) {
        h.edges.insert(VertexSet::from_sorted_unchecked(e));
    }
    Ok(h)
}

/// Parameters of `H^r(n, p)` plus the generator position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomModel {
    pub n: usize,
    pub r: usize,
    pub p: f64,
    pub seed: u64,
    /// ChaCha stream selector; trial `k` of an experiment uses stream `k`.
    #[serde(default)]
    pub stream: u64,
}

impl RandomModel {
    pub fn new(n: usize, r: usize, p: f64, seed: u64) -> Result<Self> {
        let m = RandomModel {
            n,
            r,
            p,
            seed,
            stream: 0,
        };
        m.validate()?;
        Ok(m)
    }

    /// Same model on an independent stream, for trial `trial`.
    pub fn for_trial(self, trial: u64) -> Self {
        RandomModel {
            stream: trial,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::BadParams(format!(
                "p = {} must lie in (0,1)",
                self.p
            )));
        }
        if self.r == 0 || self.r > self.n {
            return Err(Error::BadRank {
                what: "edge size r",
                value: self.r as u128,
                limit: self.n as u128,
            });
        }
        Ok(())
    }

    /// Expected s-set degree `d = C(n-s, r-s) p`.
    pub fn expected_degree(&self, s: usize) -> f64 {
        binom_f64(self.n - s, self.r - s) * self.p
    }

    pub fn rng(&self) -> ChaCha8Rng {
        trial_rng(self.seed, self.stream)
    }
}

/// The generator for `(seed, trial)`: ChaCha8 keyed by `seed`, stream `trial`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Samples `H^r(n, p)` from the model's own generator.
pub fn sample(model: &RandomModel) -> Result<Hypergraph> {
    sample_with(model, &mut model.rng(), DEFAULT_ENUMERATION_BUDGET)
}

/// Samples `H^r(n, p)` drawing from `rng`: candidate r-sets in colex order, one
/// uniform `[0,1)` deviate each, accepted when the deviate is `< p`.
pub fn sample_with<R: Rng + ?Sized>(
    model: &RandomModel,
    rng: &mut R,
    budget: u128,
) -> Result<Hypergraph> {
    model.validate()?;
    let candidates = binom(model.n, model.r)?;
    if candidates > budget {
        return Err(Error::TooLarge {
            what: "random hypergraph candidates",
            size: candidates,
            budget,
        });
    }
    let mut h = Hypergraph::empty(model.n, model.r)?;
    for e in colex_subsets(model.n, model.r) {
        let u: f64 = rng.random();
        if u < model.p {
            h.edges.insert(VertexSet::from_sorted_unchecked(e));
        }
    }
    Ok(h)
}

/// Number of edges containing `set` (`d_S`).
pub fn degree(h: &Hypergraph, set: &VertexSet) -> Result<usize> {
    if set.len() >= h.r {
        return Err(Error::StopTooLarge {
            s: set.len(),
            r: h.r,
        });
    }
    if let Some(&v) = set.vertices().iter().find(|&&v| v as usize >= h.n) {
        return Err(Error::BadVertex { vertex: v, n: h.n });
    }
    Ok(h.edges.iter().filter(|e| set.is_subset_of(e)).count())
}

/// Degrees of all s-sets, indexed by colex rank; one pass over the edges.
pub fn all_degrees(h: &Hypergraph, s: usize) -> Result<Vec<u64>> {
    if s == 0 || s >= h.r {
        return Err(Error::StopTooLarge { s, r: h.r });
    }
    let dim = binom_usize(h.n, s)?;
    let mut deg = vec![0u64; dim];
    for e in &h.edges {
        let vs = e.vertices();
        for pick in colex_subsets(h.r, s) {
            let sub =
                VertexSet::from_sorted_unchecked(pick.iter().map(|&k| vs[k as usize]).collect());
            deg[sset_index(&sub, h.n)?] += 1;
        }
    }
    Ok(deg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub s: usize,
    pub degrees: Vec<u64>,
    pub min: u64,
    pub max: u64,
    pub mean: f64,
    /// Reference the squared deviations are taken around.
    pub center: f64,
    /// `sum_S (d_S - center)^2`.
    pub sum_sq_dev: f64,
}

impl DegreeStats {
    /// Number of s-sets whose degree falls outside the open window `(center - w, center + w)`.
    pub fn outside_window(&self, half_width: f64) -> usize {
        self.degrees
            .iter()
            .filter(|&&d| (d as f64 - self.center).abs() >= half_width)
            .count()
    }
}

/// Degree summary at level `s`; squared deviations are centered on `d_ref`
/// when given (typically the model value `C(n-s, r-s) p`), else on the mean.
pub fn degree_stats(h: &Hypergraph, s: usize, d_ref: Option<f64>) -> Result<DegreeStats> {
    let degrees = all_degrees(h, s)?;
    let min = degrees.iter().copied().min().unwrap_or(0);
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mean = degrees.iter().sum::<u64>() as f64 / degrees.len() as f64;
    let center = d_ref.unwrap_or(mean);
    let sum_sq_dev = degrees.iter().map(|&d| (d as f64 - center).powi(2)).sum();
    Ok(DegreeStats {
        s,
        degrees,
        min,
        max,
        mean,
        center,
        sum_sq_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::sset_unrank;
    use rand::TryRng;
    use std::convert::Infallible;

    /// Emits all-zero words, so every uniform deviate is 0.0.
    struct ZeroStream;

    impl TryRng for ZeroStream {
        type Error = Infallible;
        fn try_next_u32(&mut self) -> std::result::Result<u32, Infallible> {
            Ok(0)
        }
        fn try_next_u64(&mut self) -> std::result::Result<u64, Infallible> {
            Ok(0)
        }
        fn try_fill_bytes(&mut self, dst: &mut [u8]) -> std::result::Result<(), Infallible> {
            dst.fill(0);
            Ok(())
        }
    }

    #[test]
    fn complete_edge_counts() {
        assert_eq!(complete(4, 2).unwrap().edge_count(), 6);
        assert_eq!(complete(6, 3).unwrap().edge_count(), 20);
        assert!(matches!(complete(3, 4), Err(Error::BadRank { .. })));
    }

    #[test]
    fn complete_degrees_exhaustive() {
        for n in 2..=10 {
            for r in 2..=n.min(5) {
                let h = complete(n, r).unwrap();
                for s in 1..r {
                    let want = binom(n - s, r - s).unwrap() as u64;
                    let deg = all_degrees(&h, s).unwrap();
                    assert!(deg.iter().all(|&d| d == want), "n={n} r={r} s={s}");
                }
            }
        }
    }

    #[test]
    fn degree_examples() {
        let k = complete(10, 4).unwrap();
        let s = VertexSet::new(vec![3, 7], 10).unwrap();
        assert_eq!(degree(&k, &s).unwrap(), 28);

        let empty = Hypergraph::empty(6, 3).unwrap();
        assert_eq!(
            degree(&empty, &VertexSet::new(vec![1], 6).unwrap()).unwrap(),
            0
        );

        let single = Hypergraph::from_edges(6, 4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(
            degree(&single, &VertexSet::new(vec![0, 1], 6).unwrap()).unwrap(),
            1
        );
        assert_eq!(
            degree(&single, &VertexSet::new(vec![0, 4], 6).unwrap()).unwrap(),
            0
        );
        assert!(matches!(
            degree(&single, &VertexSet::new(vec![0, 1, 2, 3], 6).unwrap()),
            Err(Error::StopTooLarge { s: 4, r: 4 })
        ));
    }

    #[test]
    fn all_degrees_matches_pointwise_degree() {
        let h = sample(&RandomModel::new(9, 4, 0.4, 3).unwrap()).unwrap();
        for s in 1..4 {
            let deg = all_degrees(&h, s).unwrap();
            for (idx, &d) in deg.iter().enumerate() {
                let set = sset_unrank(idx as u128, 9, s).unwrap();
                assert_eq!(d as usize, degree(&h, &set).unwrap());
            }
            // double counting
            let total: u64 = deg.iter().sum();
            assert_eq!(total as u128, h.edge_count() as u128 * binom(4, s).unwrap());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = RandomModel::new(6, 3, 0.5, 42).unwrap();
        assert_eq!(sample(&m).unwrap(), sample(&m).unwrap());
        assert_ne!(sample(&m).unwrap(), sample(&m.for_trial(1)).unwrap());
    }

    #[test]
    fn all_accept_stream_gives_complete() {
        let m = RandomModel::new(7, 3, 1.0 - 1e-12, 0).unwrap();
        let h = sample_with(&m, &mut ZeroStream, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(h, complete(7, 3).unwrap());
    }

    #[test]
    fn sampling_budget_and_validation() {
        let m = RandomModel::new(30, 5, 0.5, 0).unwrap();
        assert!(matches!(
            sample_with(&m, &mut m.rng(), 1000),
            Err(Error::TooLarge { .. })
        ));
        assert!(RandomModel::new(5, 3, 1.0, 0).is_err());
        assert!(RandomModel::new(5, 3, 0.0, 0).is_err());
        assert!(RandomModel::new(3, 5, 0.5, 0).is_err());
    }

    #[test]
    fn mean_edge_count_binomial_law() {
        // |E| ~ Bin(120, 0.3): mean 36, variance 25.2. Mean of 1000 draws has sd 0.159.
        let base = RandomModel::new(10, 3, 0.3, 1234).unwrap();
        let trials = 1000;
        let total: usize = (0..trials)
            .map(|t| sample(&base.for_trial(t)).unwrap().edge_count())
            .sum();
        let mean = total as f64 / trials as f64;
        let se = (120.0 * 0.3 * 0.7 / trials as f64).sqrt();
        assert!((mean - 36.0).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn degree_stats_complete() {
        let st = degree_stats(&complete(8, 4).unwrap(), 2, Some(15.0)).unwrap();
        assert_eq!((st.min, st.max), (15, 15));
        assert_eq!(st.sum_sq_dev, 0.0);
        assert_eq!(st.degrees.len(), 28);
        assert_eq!(st.outside_window(0.5), 0);
    }

    #[test]
    fn text_format_round_trip() {
        let h = sample(&RandomModel::new(8, 3, 0.3, 9).unwrap()).unwrap();
        let text = h.to_text();
        assert!(text.starts_with(&format!("8 3 {}\n", h.edge_count())));
        assert_eq!(Hypergraph::from_text(&text).unwrap(), h);
    }

    #[test]
    fn text_format_errors() {
        assert!(matches!(
            Hypergraph::from_text(""),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Hypergraph::from_text("5 2 2\n0 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Hypergraph::from_text("5 2 2\n0 1\n1 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            Hypergraph::from_text("5 2 1\n0 7\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Hypergraph::from_text("5 3 1\n0 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
