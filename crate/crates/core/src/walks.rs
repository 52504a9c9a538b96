//! Closed s-walks: exhaustive enumeration, the good-walk census, exact trace
//! moments and the parentheses-code bijection.
//!
//! A closed s-walk of length t is `S_1 F_1 S_2 F_2 ... S_t F_t S_1` where the
//! `S_i` are s-sets, the `F_i` are r-sets, consecutive stops are disjoint and
//! `S_i ∪ S_{i+1} ⊆ F_i` (indices mod t). Walks live on the complete vertex set
//! `[0, n)`; no relabeling is applied.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combin::{binom, binom_f64, catalan, colex_subsets, factorial, VertexSet};
use crate::error::{Error, Result};
use crate::laplacian::check_loose;

/// Maximum number of partial walks visited before giving up.
pub const DEFAULT_WALK_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClosedWalk {
    /// `stops[i]` is `S_{i+1}`.
    pub stops: Vec<VertexSet>,
    /// `edges[i]` joins `stops[i]` and `stops[(i + 1) % t]`.
    pub edges: Vec<VertexSet>,
}

impl ClosedWalk {
    pub fn new(stops: Vec<VertexSet>, edges: Vec<VertexSet>) -> Result<Self> {
        let t = stops.len();
        if t == 0 || edges.len() != t {
            return Err(Error::BadParams(format!(
                "walk needs t >= 1 stops and as many edges, got {} and {}",
                t,
                edges.len()
            )));
        }
        let s = stops[0].len();
        let r = edges[0].len();
        for i in 0..t {
            let (a, b, f) = (&stops[i], &stops[(i + 1) % t], &edges[i]);
            if a.len() != s || f.len() != r {
                return Err(Error::BadParams(format!("step {i}: non-uniform set sizes")));
            }
            if !a.is_disjoint(b) || !a.is_subset_of(f) || !b.is_subset_of(f) {
                return Err(Error::BadParams(format!(
                    "step {i}: {a} {f} {b} is not a valid step"
                )));
            }
        }
        Ok(ClosedWalk { stops, edges })
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn s(&self) -> usize {
        self.stops[0].len()
    }

    pub fn r(&self) -> usize {
        self.edges[0].len()
    }

    /// Distinct edges with multiplicities, in order of first appearance.
    pub fn distinct_edges(&self) -> Vec<(VertexSet, usize)> {
        let mut out: Vec<(VertexSet, usize)> = Vec::new();
        for e in &self.edges {
            match out.iter_mut().find(|(f, _)| f == e) {
                Some((_, c)) => *c += 1,
                None => out.push((e.clone(), 1)),
            }
        }
        out
    }

    pub fn is_good(&self) -> bool {
        self.distinct_edges().iter().all(|(_, c)| *c >= 2)
    }

    /// Number of distinct vertices covered by the edges.
    pub fn vertex_count(&self) -> usize {
        let mut all: Vec<u32> = self
            .edges
            .iter()
            .flat_map(|e| e.vertices().iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

impl fmt::Display for ClosedWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, e) in self.stops.iter().zip(&self.edges) {
            write!(f, "{s} {e} ")?;
        }
        write!(f, "{}", self.stops[0])
    }
}

/// Borrowed view of a walk during enumeration, as vertex bitmasks.
#[derive(Debug, Clone, Copy)]
pub struct WalkRef<'a> {
    pub stops: &'a [u64],
    pub edges: &'a [u64],
}

impl WalkRef<'_> {
    pub fn to_walk(&self) -> ClosedWalk {
        ClosedWalk {
            stops: self
                .stops
                .iter()
                .map(|&m| VertexSet::from_mask(m))
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&m| VertexSet::from_mask(m))
                .collect(),
        }
    }

    /// Distinct edge masks with multiplicities, in order of first appearance.
    pub fn distinct_edges(&self) -> Vec<(u64, usize)> {
        let mut out: Vec<(u64, usize)> = Vec::with_capacity(self.edges.len());
        for &e in self.edges {
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some((_, c)) => *c += 1,
                None => out.push((e, 1)),
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.edges.iter().fold(0u64, |a, &e| a | e).count_ones() as usize
    }
}

fn check_walk_params(n: usize, r: usize, s: usize, t: usize) -> Result<()> {
    check_loose(r, s)?;
    if r > n {
        return Err(Error::BadParams(format!("r = {r} exceeds n = {n}")));
    }
    if n > 64 {
        return Err(Error::TooLarge {
            what: "walk enumeration vertex count",
            size: n as u128,
            budget: 64,
        });
    }
    if t == 0 {
        return Err(Error::BadParams("walk length t must be positive".into()));
    }
    Ok(())
}

fn sorted_set(mut v: Vec<u32>) -> VertexSet {
    v.sort_unstable();
    VertexSet::from_sorted_unchecked(v)
}

fn mask_of(v: &[u32]) -> u64 {
    v.iter().fold(0u64, |m, &x| m | (1u64 << x))
}

fn bits(mut m: u64) -> Vec<u32> {
    let mut out = Vec::with_capacity(m.count_ones() as usize);
    while m != 0 {
        out.push(m.trailing_zeros());
        m &= m - 1;
    }
    out
}

struct Enumerator<'f, F: FnMut(WalkRef<'_>)> {
    t: usize,
    good_only: bool,
    budget: u64,
    nodes: u64,
    /// `moves[a]` lists `(b, edge)` for every legal step out of s-set `a`.
    moves: Vec<Vec<(usize, u64)>>,
    stop_masks: Vec<u64>,
    stops: Vec<usize>,
    stop_bits: Vec<u64>,
    edges: Vec<u64>,
    counts: Vec<(u64, u32)>,
    singles: usize,
    visit: &'f mut F,
}

impl<F: FnMut(WalkRef<'_>)> Enumerator<'_, F> {
    fn push_edge(&mut self, e: u64) {
        match self.counts.iter_mut().find(|(f, _)| *f == e) {
            Some((_, c)) => {
                *c += 1;
                if *c == 2 {
                    self.singles -= 1;
                }
            }
            None => {
                self.counts.push((e, 1));
                self.singles += 1;
            }
        }
        self.edges.push(e);
    }

    fn pop_edge(&mut self) {
        let e = self.edges.pop().expect("edge stack underflow");
        let pos = self
            .counts
            .iter()
            .position(|(f, _)| *f == e)
            .expect("edge count missing");
        self.counts[pos].1 -= 1;
        match self.counts[pos].1 {
            0 => {
                self.counts.remove(pos);
                self.singles -= 1;
            }
            1 => self.singles += 1,
            _ => {}
        }
    }

    /// Places step `k` (edge `F_{k+1}`), the walk currently sitting at `stops[k]`.
    fn step(&mut self, k: usize) -> Result<()> {
        let here = self.stops[k];
        let last = k + 1 == self.t;
        for mi in 0..self.moves[here].len() {
            let (next, e) = self.moves[here][mi];
            if last && next != self.stops[0] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::TooLarge {
                    what: "partial walks",
                    size: self.nodes as u128,
                    budget: self.budget as u128,
                });
            }
            self.push_edge(e);
            let remaining = self.t - k - 1;
            if !self.good_only || self.singles <= remaining {
                if last {
                    (self.visit)(WalkRef {
                        stops: &self.stop_bits,
                        edges: &self.edges,
                    });
                } else {
                    self.stops.push(next);
                    self.stop_bits.push(self.stop_masks[next]);
                    self.step(k + 1)?;
                    self.stops.pop();
                    self.stop_bits.pop();
                }
            }
            self.pop_edge();
        }
        Ok(())
    }
}

/// Calls `visit` on every closed s-walk of length `t` over `[0, n)` (only the
/// good ones when `good_only`). Returns the number of walks visited.
pub fn visit_closed_walks(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    good_only: bool,
    budget: u64,
    mut visit: impl FnMut(WalkRef<'_>),
) -> Result<u64> {
    check_walk_params(n, r, s, t)?;
    let stop_masks: Vec<u64> = colex_subsets(n, s).map(|v| mask_of(&v)).collect();
    let index: HashMap<u64, usize> = stop_masks
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut moves = Vec::with_capacity(stop_masks.len());
    for &a in &stop_masks {
        let mut out = Vec::new();
        let rest = bits(full & !a);
        for b in colex_subsets(rest.len(), s) {
            let bm = b.iter().fold(0u64, |m, &x| m | (1u64 << rest[x as usize]));
            let outside = bits(full & !a & !bm);
            for extra in colex_subsets(outside.len(), r - 2 * s) {
                let em = extra
                    .iter()
                    .fold(0u64, |m, &x| m | (1u64 << outside[x as usize]));
                out.push((index[&bm], a | bm | em));
            }
        }
        moves.push(out);
    }

    let mut count = 0u64;
    let mut counted = |w: WalkRef<'_>| {
        count += 1;
        visit(w);
    };
    let mut en = Enumerator {
        t,
        good_only,
        budget,
        nodes: 0,
        moves,
        stop_masks: stop_masks.clone(),
        stops: Vec::with_capacity(t),
        stop_bits: Vec::with_capacity(t),
        edges: Vec::with_capacity(t),
        counts: Vec::with_capacity(t),
        singles: 0,
        visit: &mut counted,
    };
    for (start, &mask) in stop_masks.iter().enumerate() {
        en.stops.push(start);
        en.stop_bits.push(mask);
        en.step(0)?;
        en.stops.pop();
        en.stop_bits.pop();
    }
    Ok(count)
}

/// Collects all closed s-walks (or only good ones) into a vector.
pub fn enumerate_closed_walks(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    good_only: bool,
) -> Result<Vec<ClosedWalk>> {
    let mut out = Vec::new();
    visit_closed_walks(n, r, s, t, good_only, DEFAULT_WALK_BUDGET, |w| {
        out.push(w.to_walk())
    })?;
    Ok(out)
}

/// `m_i = s + i (r - s)`, the most vertices a good walk on `i` edges can cover.
pub fn max_vertices(r: usize, s: usize, i: usize) -> usize {
    s + i * (r - s)
}

/// Exact counts of good closed walks keyed by (distinct edges, distinct vertices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCensus {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub counts: BTreeMap<(usize, usize), u128>,
}

impl WalkCensus {
    pub fn m(&self, i: usize) -> usize {
        max_vertices(self.r, self.s, i)
    }

    pub fn get(&self, i: usize, j: usize) -> u128 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u128 {
        self.counts.values().sum()
    }

    /// Total over `G_i`, all vertex counts.
    pub fn class_total(&self, i: usize) -> u128 {
        self.counts.range((i, 0)..(i + 1, 0)).map(|(_, c)| c).sum()
    }

    /// Every admissible cell `(i, j)`, zero or not: `1 <= i <= t/2`, `r <= j <= min(m_i, n)`.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.t / 2 {
            for j in self.r..=self.m(i).min(self.n) {
                out.push((i, j));
            }
        }
        out
    }

    /// CSV rows `n,r,s,t,i,j,count,bound`, one per admissible cell.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            out.push_str("n,r,s,t,i,j,count,bound\n");
        }
        for (i, j) in self.cells() {
            let bound = gij_bound(self.n, self.r, self.s, self.t, i, j);
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:e}\n",
                self.n,
                self.r,
                self.s,
                self.t,
                i,
                j,
                self.get(i, j),
                bound
            ));
        }
        out
    }
}

pub fn census(n: usize, r: usize, s: usize, t: usize) -> Result<WalkCensus> {
    census_with_budget(n, r, s, t, DEFAULT_WALK_BUDGET)
}

pub fn census_with_budget(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    budget: u64,
) -> Result<WalkCensus> {
    let mut counts = BTreeMap::new();
    visit_closed_walks(n, r, s, t, true, budget, |w| {
        let i = w.distinct_edges().len();
        *counts.entry((i, w.vertex_count())).or_insert(0u128) += 1;
    })?;
    Ok(WalkCensus { n, r, s, t, counts })
}

/// Exact `|G_k^{m_k}| = C(n, m_k) · m_k! / ((s!)^{k+1} ((r-2s)!)^k) · Catalan(k)`;
/// zero when `m_k > n`.
pub fn gk_formula(n: usize, r: usize, s: usize, k: usize) -> Result<u128> {
    check_loose(r, s)?;
    let mk = max_vertices(r, s, k);
    if mk > n {
        return Ok(0);
    }
    let mut parts = vec![s; k + 1];
    parts.extend(std::iter::repeat_n(r - 2 * s, k));
    let ways = crate::combin::multinomial(&parts)?;
    binom(n, mk)?
        .checked_mul(ways)
        .and_then(|x| x.checked_mul(catalan(k).ok()?))
        .ok_or(Error::Overflow("gk_formula"))
}

/// The explicit upper bound on `|G_i^j|` with `C1 = 4(r-s)^3` and
/// `C2 = C(r,s) + 4 + (2/s) C(r,s-1)`.
pub fn gij_bound(n: usize, r: usize, s: usize, t: usize, i: usize, j: usize) -> f64 {
    if i == 0 || 2 * i > t {
        return 0.0;
    }
    let (nf, i_f) = (n as f64, i as f64);
    let mi = max_vertices(r, s, i) as f64;
    let c1 = 4.0 * ((r - s) as f64).powi(3);
    let c2 = binom_f64(r, s) + 4.0 + 2.0 / s as f64 * binom_f64(r, s - 1);
    let stars = t as i32 - 2 * i as i32;
    let codes = binom_f64(t - 2, stars as usize) * i_f.powi(stars) * catalan_f64(i);
    let stop_choices = binom_f64(r - s, s).powi((t - i) as i32);
    let labels = nf.powf(mi)
        / (factorial_f64(s).powi(i as i32 + 1) * factorial_f64(r - 2 * s).powi(i as i32));
    let slack = (c1 * i_f.powf(c2) / nf).powf(mi - j as f64);
    codes * stop_choices * labels * slack
}

fn catalan_f64(k: usize) -> f64 {
    binom_f64(2 * k, k) / (k as f64 + 1.0)
}

fn factorial_f64(k: usize) -> f64 {
    factorial(k)
        .map(|x| x as f64)
        .unwrap_or_else(|_| (1..=k).map(|x| x as f64).product())
}

/// Per-edge central moment `E (X - p)^q = (1-p)^q p + (-p)^q (1-p)` of a Bernoulli(p).
pub fn edge_moment(q: u32, p: &BigRational) -> BigRational {
    let one = BigRational::one();
    let a = num_traits::pow(&one - p, q as usize) * p;
    let b = num_traits::pow(-p.clone(), q as usize) * (&one - p);
    a + b
}

pub fn edge_moment_f64(q: u32, p: f64) -> f64 {
    (1.0 - p).powi(q as i32) * p + (-p).powi(q as i32) * (1.0 - p)
}

/// Good-walk counts grouped by the sorted multiset of edge multiplicities.
fn multiplicity_classes(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    budget: u64,
) -> Result<BTreeMap<Vec<u32>, u128>> {
    let mut classes: BTreeMap<Vec<u32>, u128> = BTreeMap::new();
    visit_closed_walks(n, r, s, t, true, budget, |w| {
        let mut sig: Vec<u32> = w.distinct_edges().iter().map(|(_, c)| *c as u32).collect();
        sig.sort_unstable();
        *classes.entry(sig).or_insert(0) += 1;
    })?;
    Ok(classes)
}

/// Exact `E tr(C^t)` for `C = W - E W` under the binomial model, split by the
/// number of distinct edges `i`. Non-good walks contribute zero.
pub fn expected_trace_by_class(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    p: &BigRational,
) -> Result<BTreeMap<usize, BigRational>> {
    check_probability(p)?;
    let classes = multiplicity_classes(n, r, s, t, DEFAULT_WALK_BUDGET)?;
    let mut out: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (sig, count) in classes {
        let term = sig
            .iter()
            .fold(BigRational::one(), |acc, &q| acc * edge_moment(q, p))
            * BigRational::from_integer(BigInt::from(count));
        *out.entry(sig.len()).or_insert_with(BigRational::zero) += term;
    }
    Ok(out)
}

pub fn expected_trace_exact(
    n: usize,
    r: usize,
    s: usize,
    t: usize,
    p: &BigRational,
) -> Result<BigRational> {
    Ok(expected_trace_by_class(n, r, s, t, p)?
        .into_values()
        .fold(BigRational::zero(), |a, b| a + b))
}

pub fn expected_trace(n: usize, r: usize, s: usize, t: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadParams(format!("p = {p} outside [0, 1]")));
    }
    let classes = multiplicity_classes(n, r, s, t, DEFAULT_WALK_BUDGET)?;
    Ok(classes
        .iter()
        .map(|(sig, &c)| c as f64 * sig.iter().map(|&q| edge_moment_f64(q, p)).product::<f64>())
        .sum())
}

fn check_probability(p: &BigRational) -> Result<()> {
    if *p < BigRational::zero() || *p > BigRational::one() {
        return Err(Error::BadParams(format!("p = {p} outside [0, 1]")));
    }
    Ok(())
}

/// Parentheses code of a good walk: `(` first occurrence of an edge, `)` the
/// second, `*` any later one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WalkCode(String);

impl WalkCode {
    pub fn parse(symbols: &str) -> Result<Self> {
        let mut open = 0usize;
        let mut close = 0usize;
        for (pos, ch) in symbols.chars().enumerate() {
            match ch {
                '(' => open += 1,
                ')' => {
                    close += 1;
                    if close > open {
                        return Err(Error::BadCode(format!(
                            "unmatched ')' at position {}",
                            pos + 1
                        )));
                    }
                }
                '*' if pos < 2 => {
                    return Err(Error::BadCode(format!("'*' at position {}", pos + 1)));
                }
                '*' => {}
                other => return Err(Error::BadCode(format!("unexpected symbol {other:?}"))),
            }
        }
        if open != close || open == 0 {
            return Err(Error::BadCode(format!("{open} '(' against {close} ')'")));
        }
        Ok(WalkCode(symbols.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `(`, i.e. distinct edges.
    pub fn pairs(&self) -> usize {
        self.0.bytes().filter(|&b| b == b'(').count()
    }

    pub fn has_stars(&self) -> bool {
        self.0.contains('*')
    }
}

impl fmt::Display for WalkCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn code_from_walk(w: &ClosedWalk) -> Result<WalkCode> {
    let distinct = w.distinct_edges();
    if let Some(pos) = distinct.iter().position(|(_, c)| *c < 2) {
        return Err(Error::NotGood(pos));
    }
    let mut seen: Vec<(&VertexSet, usize)> = Vec::new();
    let mut code = String::with_capacity(w.len());
    for e in &w.edges {
        match seen.iter_mut().find(|(f, _)| *f == e) {
            Some((_, c)) => {
                *c += 1;
                code.push(if *c == 2 { ')' } else { '*' });
            }
            None => {
                seen.push((e, 1));
                code.push('(');
            }
        }
    }
    WalkCode::parse(&code)
}

/// Ordered partition of `m_k` vertices into stops `S_0..S_k` and extras `E_1..E_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WalkPartition {
    pub stops: Vec<VertexSet>,
    pub extras: Vec<VertexSet>,
}

impl WalkPartition {
    pub fn k(&self) -> usize {
        self.extras.len()
    }

    fn validate(&self) -> Result<()> {
        let k = self.extras.len();
        if k == 0 || self.stops.len() != k + 1 {
            return Err(Error::BadParams(format!(
                "partition needs k + 1 stops and k extras, got {} and {}",
                self.stops.len(),
                k
            )));
        }
        let s = self.stops[0].len();
        let x = self.extras[0].len();
        if self.stops.iter().any(|a| a.len() != s) || self.extras.iter().any(|e| e.len() != x) {
            return Err(Error::BadParams("partition parts have uneven sizes".into()));
        }
        let mut all: Vec<u32> = self
            .stops
            .iter()
            .chain(&self.extras)
            .flat_map(|p| p.vertices().iter().copied())
            .collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err(Error::BadParams("partition parts overlap".into()));
        }
        Ok(())
    }
}

/// Rebuilds the walk of `G_k^{m_k}` encoded by a partition and a code of `k`
/// matched pairs: each `(` hangs the lowest unused stop below the current one
/// and walks to it, each `)` walks back to the parent.
pub fn walk_from_code(partition: &WalkPartition, code: &WalkCode) -> Result<ClosedWalk> {
    if code.has_stars() {
        return Err(Error::BadCode(format!("{code} contains '*'")));
    }
    partition.validate()?;
    let k = partition.k();
    if code.pairs() != k {
        return Err(Error::BadCode(format!(
            "{code} has {} pairs, partition has k = {k}",
            code.pairs()
        )));
    }
    // parent[c] = (parent stop, tree edge index) for every non-root stop c
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; k + 1];
    let mut next_unused = 1;
    let mut current = 0;
    let mut stops = Vec::with_capacity(2 * k);
    let mut edges = Vec::with_capacity(2 * k);
    let tree_edge = |a: usize, b: usize, e: usize| {
        partition.stops[a]
            .union(&partition.stops[b])
            .union(&partition.extras[e])
    };
    for ch in code.as_str().chars() {
        stops.push(partition.stops[current].clone());
        if ch == '(' {
            let child = next_unused;
            let e = next_unused - 1;
            next_unused += 1;
            parent[child] = Some((current, e));
            edges.push(tree_edge(current, child, e));
            current = child;
        } else {
            let (up, e) =
                parent[current].ok_or_else(|| Error::BadCode(format!("{code} leaves the root")))?;
            edges.push(tree_edge(up, current, e));
            current = up;
        }
    }
    ClosedWalk::new(stops, edges)
}

/// Canonical partition of a walk in `G_k^{m_k}`: stops in order of first
/// appearance, `E_i` the non-stop vertices of the i-th distinct edge.
pub fn partition_from_walk(w: &ClosedWalk) -> Result<WalkPartition> {
    let distinct = w.distinct_edges();
    let k = distinct.len();
    if distinct.iter().any(|(_, c)| *c != 2)
        || w.len() != 2 * k
        || w.vertex_count() != max_vertices(w.r(), w.s(), k)
    {
        return Err(Error::BadParams(
            "walk is not in the extremal class G_k^{m_k}".into(),
        ));
    }
    let mut stops: Vec<VertexSet> = Vec::with_capacity(k + 1);
    for st in &w.stops {
        if !stops.contains(st) {
            stops.push(st.clone());
        }
    }
    let covered: Vec<u32> = stops
        .iter()
        .flat_map(|x| x.vertices().iter().copied())
        .collect();
    let extras = distinct
        .iter()
        .map(|(e, _)| {
            let rest: Vec<u32> = e
                .vertices()
                .iter()
                .copied()
                .filter(|v| !covered.contains(v))
                .collect();
            sorted_set(rest)
        })
        .collect();
    Ok(WalkPartition { stops, extras })
}

/// Both sides of the degree-excess inequality for the distinct edges of a good walk.
#[derive(Debug, Clone, PartialEq)]
pub struct DprimeReport {
    /// `Σ (d'_S - 1)`, where `d'_S = d_S - 1` when S is the overlap of some new
    /// edge with the earlier ones.
    pub lhs: i64,
    /// Same sum with the decrement applied only when exactly one new edge has overlap S.
    pub lhs_unique: i64,
    /// Same sum with `d_S` lowered once per new edge whose overlap is S.
    pub lhs_counted: i64,
    pub rhs: f64,
    pub holds: bool,
    pub i: usize,
    pub j: usize,
}

/// `subsets[l]` are the s-subsets of the l-th distinct edge, `overlaps[l]` the
/// overlap of edge `l + 1` with all earlier edges when it has exactly s vertices.
fn dprime_sums<K: PartialEq>(subsets: Vec<K>, overlaps: Vec<K>) -> (i64, i64, i64) {
    let mut table: Vec<(K, i64, i64)> = Vec::with_capacity(subsets.len());
    for k in subsets {
        match table.iter_mut().find(|(x, _, _)| *x == k) {
            Some((_, d, _)) => *d += 1,
            None => table.push((k, 1, 0)),
        }
    }
    for k in overlaps {
        if let Some((_, _, h)) = table.iter_mut().find(|(x, _, _)| *x == k) {
            *h += 1;
        }
    }
    table.iter().fold((0, 0, 0), |(a, b, c), (_, d, h)| {
        (
            a + d - i64::from(*h >= 1) - 1,
            b + d - i64::from(*h == 1) - 1,
            c + d - h - 1,
        )
    })
}

fn dprime_report(sums: (i64, i64, i64), r: usize, s: usize, i: usize, j: usize) -> DprimeReport {
    let mi = max_vertices(r, s, i);
    let factor = 1.0 + 2.0 / s as f64 * binom_f64(r, s - 1);
    let rhs = factor * (mi - j) as f64;
    DprimeReport {
        lhs: sums.0,
        lhs_unique: sums.1,
        lhs_counted: sums.2,
        rhs,
        holds: sums.0 as f64 <= rhs + 1e-9,
        i,
        j,
    }
}

pub fn dprime_check(w: &ClosedWalk) -> Result<DprimeReport> {
    let distinct = w.distinct_edges();
    if let Some(pos) = distinct.iter().position(|(_, c)| *c < 2) {
        return Err(Error::NotGood(pos));
    }
    let (r, s) = (w.r(), w.s());
    let mut subsets = Vec::new();
    let mut overlaps = Vec::new();
    let mut earlier: Vec<u32> = Vec::new();
    for (l, (e, _)) in distinct.iter().enumerate() {
        let v = e.vertices();
        subsets.extend(
            colex_subsets(r, s)
                .map(|pick| pick.iter().map(|&x| v[x as usize]).collect::<Vec<u32>>()),
        );
        if l > 0 {
            let overlap: Vec<u32> = v.iter().copied().filter(|x| earlier.contains(x)).collect();
            if overlap.len() == s {
                overlaps.push(overlap);
            }
        }
        earlier.extend(
            v.iter()
                .copied()
                .filter(|x| !earlier.contains(x))
                .collect::<Vec<_>>(),
        );
    }
    Ok(dprime_report(
        dprime_sums(subsets, overlaps),
        r,
        s,
        distinct.len(),
        w.vertex_count(),
    ))
}

impl WalkRef<'_> {
    /// Bitmask version of [`dprime_check`] for use inside enumeration callbacks.
    pub fn dprime_check(&self, r: usize, s: usize) -> Result<DprimeReport> {
        let distinct = self.distinct_edges();
        if let Some(pos) = distinct.iter().position(|(_, c)| *c < 2) {
            return Err(Error::NotGood(pos));
        }
        let mut subsets = Vec::new();
        let mut overlaps = Vec::new();
        let mut earlier = 0u64;
        for (l, &(e, _)) in distinct.iter().enumerate() {
            let v = bits(e);
            subsets.extend(
                colex_subsets(r, s)
                    .map(|pick| pick.iter().fold(0u64, |m, &x| m | 1u64 << v[x as usize])),
            );
            if l > 0 && (e & earlier).count_ones() as usize == s {
                overlaps.push(e & earlier);
            }
            earlier |= e;
        }
        Ok(dprime_report(
            dprime_sums(subsets, overlaps),
            r,
            s,
            distinct.len(),
            earlier.count_ones() as usize,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::collections::BTreeSet;

    fn set(v: &[u32]) -> VertexSet {
        sorted_set(v.to_vec())
    }

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn small_good_counts() {
        assert_eq!(enumerate_closed_walks(5, 2, 1, 2, true).unwrap().len(), 20);
        assert_eq!(enumerate_closed_walks(5, 2, 1, 3, true).unwrap().len(), 0);
        assert_eq!(enumerate_closed_walks(4, 3, 1, 2, true).unwrap().len(), 24);
    }

    #[test]
    fn all_walks_count_matches_adjacency_trace() {
        // Closed walks of length t in the Kneser-type step graph; for r = 2, s = 1
        // this is tr(A^t) of K_n: (n-1)^t + (n-1)(-1)^t.
        for t in 1..=4 {
            let c = visit_closed_walks(5, 2, 1, t, false, DEFAULT_WALK_BUDGET, |_| {}).unwrap();
            let expect = 4i64.pow(t as u32) + 4 * (-1i64).pow(t as u32);
            assert_eq!(c as i64, expect, "t = {t}");
        }
    }

    #[test]
    fn walks_are_valid_and_distinct() {
        let all = enumerate_closed_walks(6, 3, 1, 3, false).unwrap();
        let uniq: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(uniq.len(), all.len());
        for w in &all {
            ClosedWalk::new(w.stops.clone(), w.edges.clone()).unwrap();
        }
        let good = enumerate_closed_walks(6, 3, 1, 4, true).unwrap();
        assert!(good.iter().all(ClosedWalk::is_good));
        let filtered = enumerate_closed_walks(6, 3, 1, 4, false)
            .unwrap()
            .into_iter()
            .filter(ClosedWalk::is_good)
            .count();
        assert_eq!(filtered, good.len());
    }

    #[test]
    fn census_examples() {
        let c = census(5, 2, 1, 2).unwrap();
        assert_eq!(c.counts, BTreeMap::from([((1, 2), 20)]));
        let c = census(6, 2, 1, 4).unwrap();
        assert_eq!(c.get(2, 3), 240);
        assert_eq!(gk_formula(6, 2, 1, 2).unwrap(), 240);
        for &(i, j) in c.counts.keys() {
            assert!(i <= 2 && j >= 2 && j <= c.m(i));
        }
    }

    #[test]
    fn gk_examples() {
        assert_eq!(gk_formula(5, 2, 1, 1).unwrap(), 20);
        assert_eq!(gk_formula(4, 3, 1, 1).unwrap(), 24);
        for n in 3..10 {
            assert_eq!(gk_formula(n, 2, 1, 2).unwrap(), 12 * binom(n, 3).unwrap());
        }
        assert_eq!(gk_formula(4, 2, 1, 4).unwrap(), 0);
    }

    #[test]
    fn census_csv() {
        let c = census(5, 2, 1, 2).unwrap();
        let csv = c.to_csv(false);
        assert!(csv.starts_with("5,2,1,2,1,2,20,"));
        let bound: f64 = csv.trim().rsplit(',').next().unwrap().parse().unwrap();
        assert!((bound - 25.0).abs() < 1e-9);
    }

    #[test]
    fn bound_dominates_small_census() {
        for (n, r) in [(6, 2), (7, 3)] {
            let c = census(n, r, 1, 4).unwrap();
            for (i, j) in c.cells() {
                assert!(
                    c.get(i, j) as f64 <= gij_bound(n, r, 1, 4, i, j),
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn trace_t2_closed_form() {
        let p = rat(1, 2);
        assert_eq!(expected_trace_exact(6, 2, 1, 2, &p).unwrap(), rat(15, 2));
        assert_eq!(
            expected_trace_exact(5, 2, 1, 3, &rat(1, 3)).unwrap(),
            rat(0, 1)
        );
        let p = rat(2, 7);
        let (n, r, s) = (7usize, 3usize, 1usize);
        let closed =
            binom(n, s).unwrap() * binom(n - s, s).unwrap() * binom(n - 2 * s, r - 2 * s).unwrap();
        let want = BigRational::from_integer(BigInt::from(closed)) * &p * (BigRational::one() - &p);
        assert_eq!(expected_trace_exact(7, 3, 1, 2, &p).unwrap(), want);
        assert!((expected_trace(6, 2, 1, 2, 0.5).unwrap() - 7.5).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let p = rat(1, 4);
        assert_eq!(edge_moment(1, &p), rat(0, 1));
        assert_eq!(edge_moment(2, &p), rat(3, 16));
        assert!((edge_moment_f64(3, 0.25) - 0.25 * 0.75 * 0.5).abs() < 1e-15);
    }

    fn paper_walk() -> ClosedWalk {
        let f1 = set(&[0, 1, 2, 3, 4]);
        let f2 = set(&[3, 4, 5, 6, 7]);
        let f3 = set(&[2, 3, 4, 6, 7]);
        let s = [
            set(&[0, 1]),
            set(&[3, 4]),
            set(&[6, 7]),
            set(&[2, 3]),
            set(&[1, 4]),
        ];
        let stops = vec![
            s[0].clone(),
            s[1].clone(),
            s[2].clone(),
            s[3].clone(),
            s[4].clone(),
            s[3].clone(),
            s[2].clone(),
            s[1].clone(),
        ];
        let edges = vec![
            f1.clone(),
            f2.clone(),
            f3.clone(),
            f1.clone(),
            f1.clone(),
            f3,
            f2,
            f1,
        ];
        ClosedWalk::new(stops, edges).unwrap()
    }

    #[test]
    fn code_of_reference_walk() {
        let w = paper_walk();
        assert_eq!(code_from_walk(&w).unwrap().as_str(), "((()*))*");
        assert_eq!(w.vertex_count(), 8);
        let rep = dprime_check(&w).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn code_rules() {
        assert!(WalkCode::parse("(*)").is_err());
        assert!(WalkCode::parse(")(").is_err());
        assert!(WalkCode::parse("(()").is_err());
        assert!(WalkCode::parse("(x)").is_err());
        assert!(WalkCode::parse("()").is_ok());
        let bad = ClosedWalk::new(
            vec![set(&[0]), set(&[1])],
            vec![set(&[0, 1]), set(&[0, 1, 2]).union(&set(&[]))],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn non_good_walk_rejected() {
        let all = enumerate_closed_walks(4, 2, 1, 3, false).unwrap();
        let w = &all[0];
        assert!(matches!(code_from_walk(w), Err(Error::NotGood(_))));
        assert!(matches!(dprime_check(w), Err(Error::NotGood(_))));
    }

    #[test]
    fn codes_at_length_four() {
        let mut by_class: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for w in enumerate_closed_walks(6, 2, 1, 4, true).unwrap() {
            let code = code_from_walk(&w).unwrap();
            by_class
                .entry(code.pairs())
                .or_default()
                .insert(code.as_str().to_string());
        }
        assert_eq!(
            by_class[&2],
            BTreeSet::from(["(())".to_string(), "()()".to_string()])
        );
        // a single edge traversed four times
        assert_eq!(by_class[&1], BTreeSet::from(["()**".to_string()]));
        for w in enumerate_closed_walks(5, 2, 1, 2, true).unwrap() {
            assert_eq!(code_from_walk(&w).unwrap().as_str(), "()");
        }
    }

    #[test]
    fn reconstruction_example() {
        let st: Vec<VertexSet> = (0..4).map(|i| set(&[2 * i, 2 * i + 1])).collect();
        let ex: Vec<VertexSet> = (0..3).map(|i| set(&[8 + i])).collect();
        let part = WalkPartition {
            stops: st.clone(),
            extras: ex.clone(),
        };
        let w = walk_from_code(&part, &WalkCode::parse("(())()").unwrap()).unwrap();
        let f1 = st[0].union(&st[1]).union(&ex[0]);
        let f2 = st[1].union(&st[2]).union(&ex[1]);
        let f3 = st[3].union(&st[0]).union(&ex[2]);
        let idx = [0, 1, 2, 1, 0, 3];
        assert_eq!(
            w.stops,
            idx.iter().map(|&i| st[i].clone()).collect::<Vec<_>>()
        );
        assert_eq!(
            w.edges,
            vec![f1.clone(), f2.clone(), f2, f1, f3.clone(), f3]
        );
        assert_eq!(code_from_walk(&w).unwrap().as_str(), "(())()");
        assert_eq!(partition_from_walk(&w).unwrap(), part);

        let one = WalkPartition {
            stops: vec![set(&[0]), set(&[1])],
            extras: vec![VertexSet::empty()],
        };
        let w = walk_from_code(&one, &WalkCode::parse("()").unwrap()).unwrap();
        assert_eq!(w.stops, vec![set(&[0]), set(&[1])]);
        assert_eq!(w.edges, vec![set(&[0, 1]), set(&[0, 1])]);
        assert!(walk_from_code(&one, &WalkCode::parse("(())").unwrap()).is_err());
    }

    #[test]
    fn dprime_star_walk() {
        // three edges hanging off stop {0}, each walked out and back
        let st = [set(&[0]), set(&[1]), set(&[2]), set(&[3])];
        let part = WalkPartition {
            stops: st.to_vec(),
            extras: vec![VertexSet::empty(); 3],
        };
        let w = walk_from_code(&part, &WalkCode::parse("()()()").unwrap()).unwrap();
        let rep = dprime_check(&w).unwrap();
        assert_eq!((rep.i, rep.j, rep.rhs), (3, 4, 0.0));
        assert_eq!((rep.lhs, rep.lhs_unique, rep.lhs_counted), (1, 2, 0));
        assert!(!rep.holds);
    }

    #[test]
    fn dprime_mask_path_agrees() {
        for (n, r, s, t) in [(6, 2, 1, 6), (6, 3, 1, 4), (8, 4, 2, 4)] {
            visit_closed_walks(n, r, s, t, true, DEFAULT_WALK_BUDGET, |w| {
                assert_eq!(
                    w.dprime_check(r, s).unwrap(),
                    dprime_check(&w.to_walk()).unwrap()
                );
            })
            .unwrap();
        }
    }

    #[test]
    fn dprime_single_edge() {
        for w in enumerate_closed_walks(5, 3, 1, 2, true).unwrap() {
            let rep = dprime_check(&w).unwrap();
            assert_eq!((rep.lhs, rep.rhs, rep.i, rep.j), (0, 0.0, 1, 3));
        }
    }

    #[test]
    fn budget_guard() {
        let err = visit_closed_walks(7, 3, 1, 4, false, 1000, |_| {}).unwrap_err();
        assert!(matches!(err, Error::TooLarge { .. }));
        assert!(matches!(
            visit_closed_walks(5, 3, 2, 2, true, 10, |_| {}),
            Err(Error::NotLoose { .. })
        ));
    }
}
