//! Experiment driver behind the `hyperlap` binary.
//!
//! Every subcommand produces an [`ExperimentReport`]: an echo of the
//! configuration, one record per trial (or per table row), a summary and a
//! pass flag. Randomness comes only from `--seed` and the trial index, and
//! trials are collected in order, so `--jobs` never changes the output.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::apps::{
    degree_window, diameter_bound, edge_expansion, ekr_bound, expected_degree, level_spectrum,
    mixing_contraction, monotonicity_check, perturbation_diagnostics, radius_rhs, random_family,
    s_diameter, semicircle_radius, sum_sq_reference, transition_system,
};
use crate::error::{Error, Result};
use crate::hypergraph::{complete, degree_stats, sample_with, trial_rng, Hypergraph, RandomModel};
use crate::laplacian::{
    build_aux, centered_weight_from_aux, complete_spectrum, normalized_laplacian,
};
use crate::spectra::{
    deviation, eigenvalues_sym, ks_distance, scaled_ecdf, semicircle_cdf, Ecdf, Spectrum,
};
use crate::walks::{census_with_budget, gij_bound, gk_formula, max_vertices, DEFAULT_WALK_BUDGET};

/// Environment variable overriding enumeration budgets.
pub const BUDGET_ENV: &str = "HYPERLAP_BUDGET";

#[derive(Debug, Clone, Parser)]
#[command(
    name = "hyperlap",
    version,
    about = "Spectra of loose Laplacians of uniform hypergraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Loose Laplacian spectrum (closed form with --complete, else sampled or --input)
    Spectrum,
    /// Spectral radius against s/(n-s) + slack*sqrt((1-p)/d) over random trials
    Radius,
    /// Pooled scaled spectrum of W - E(W) against the semicircle law
    Semicircle,
    /// Census of good closed s-walks with the counting bound
    WalkCount,
    /// Contraction of the random s-walk towards stationarity
    Mixing,
    /// BFS s-diameter against the spectral bound
    Diameter,
    /// Edge expansion on random family pairs
    Expansion,
    /// Eigenvalue counts on either side of 1 versus C(n-1, s-1)
    Ekr,
    /// lambda_1 and lambda_max across s = 1..r/2
    Monotonicity,
    /// Four-part perturbation norms and degree concentration
    Diagnostics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Radius => "radius",
            Command::Semicircle => "semicircle",
            Command::WalkCount => "walk-count",
            Command::Mixing => "mixing",
            Command::Diameter => "diameter",
            Command::Expansion => "expansion",
            Command::Ekr => "ekr",
            Command::Monotonicity => "monotonicity",
            Command::Diagnostics => "diagnostics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Params {
    /// Number of vertices
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Edge size
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Stop size (defaults to 1 where a single level is used)
    #[arg(long, global = true)]
    pub s: Option<usize>,
    /// Edge probability of H^r(n, p)
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Walk length
    #[arg(long, global = true)]
    pub t: Option<usize>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Leave out the timestamp so reruns are byte-identical
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Worker threads for trials (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Use the complete hypergraph K^r_n
    #[arg(long, global = true)]
    pub complete: bool,
    /// Hypergraph fixture file (`n r m` header, one edge per line)
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Write the Laplacian of the first instance as a lower-triangle dump
    #[arg(long, global = true)]
    pub dump_matrix: Option<PathBuf>,
    /// Constant in front of sqrt((1-p)/d) for `radius`
    #[arg(long, global = true, default_value_t = 3.0)]
    pub slack: f64,
    /// Trials that must pass (default: all)
    #[arg(long, global = true)]
    pub min_pass: Option<u64>,
    /// Walk steps for `mixing`
    #[arg(long, global = true, default_value_t = 10)]
    pub steps: usize,
    /// Histogram bins for `semicircle`
    #[arg(long, global = true, default_value_t = 20)]
    pub bins: usize,
    /// Family pairs per trial for `expansion`
    #[arg(long, global = true, default_value_t = 100)]
    pub pairs: usize,
    /// KS tolerance for `semicircle`
    #[arg(long, global = true, default_value_t = 0.05)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: Command,
    pub config: Value,
    pub records: Vec<Map<String, Value>>,
    pub summary: Map<String, Value>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is plain data");
        s.push('\n');
        s
    }

    /// Records as CSV with a header row taken from the first record.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let Some(first) = self.records.first() else {
            return out;
        };
        let header: Vec<&str> = first.keys().map(String::as_str).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for rec in &self.records {
            let row: Vec<String> = header.iter().map(|k| csv_cell(rec.get(*k))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

fn csv_cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}

fn record(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("records are built from json objects"),
    }
}

fn need(v: Option<usize>, flag: &str, cmd: Command) -> Result<usize> {
    v.ok_or_else(|| Error::BadParams(format!("`{}` needs --{flag}", cmd.name())))
}

fn budget() -> Result<Option<u64>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|e| Error::BadParams(format!("{BUDGET_ENV}={v}: {e}"))),
        Err(_) => Ok(None),
    }
}

struct Ctx<'a> {
    cmd: Command,
    p: &'a Params,
    budget: Option<u64>,
}

impl Ctx<'_> {
    fn n(&self) -> Result<usize> {
        need(self.p.n, "n", self.cmd)
    }

    fn r(&self) -> Result<usize> {
        need(self.p.r, "r", self.cmd)
    }

    fn s(&self) -> usize {
        self.p.s.unwrap_or(1)
    }

    fn prob(&self) -> Result<f64> {
        self.p
            .p
            .ok_or_else(|| Error::BadParams(format!("`{}` needs --p", self.cmd.name())))
    }

    fn random(&self) -> bool {
        !self.p.complete && self.p.input.is_none()
    }

    fn trials(&self) -> u64 {
        if self.random() {
            self.p.trials
        } else {
            1
        }
    }

    /// Hypergraph for `trial`: the fixture, `K^r_n`, or a sample of `H^r(n, p)`.
    fn instance(&self, trial: u64) -> Result<Hypergraph> {
        if let Some(path) = &self.p.input {
            return Hypergraph::from_text(&std::fs::read_to_string(path)?);
        }
        let (n, r) = (self.n()?, self.r()?);
        if self.p.complete {
            return complete(n, r);
        }
        let model = RandomModel::new(n, r, self.prob()?, self.p.seed)?.for_trial(trial);
        let budget = self
            .budget
            .map_or(crate::hypergraph::DEFAULT_ENUMERATION_BUDGET, u128::from);
        sample_with(&model, &mut model.rng(), budget)
    }

    /// Runs `f` on every trial index in parallel, results in trial order.
    fn per_trial<T: Send>(&self, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.trials()).into_par_iter().map(f).collect()
    }

    fn required_passes(&self, total: u64) -> u64 {
        self.p.min_pass.unwrap_or(total)
    }
}

/// Runs one subcommand and returns its report.
pub fn run(cli: &Cli) -> Result<ExperimentReport> {
    if cli.params.trials == 0 {
        return Err(Error::BadParams("--trials must be at least 1".into()));
    }
    let ctx = Ctx {
        cmd: cli.command,
        p: &cli.params,
        budget: budget()?,
    };
    let body = || -> Body {
        match cli.command {
            Command::Spectrum => spectrum(&ctx),
            Command::Radius => radius(&ctx),
            Command::Semicircle => semicircle(&ctx),
            Command::WalkCount => walk_count(&ctx),
            Command::Mixing => mixing(&ctx),
            Command::Diameter => diameter(&ctx),
            Command::Expansion => expansion(&ctx),
            Command::Ekr => ekr(&ctx),
            Command::Monotonicity => monotonicity(&ctx),
            Command::Diagnostics => diagnostics(&ctx),
        }
    };
    let (records, summary, passed) = match cli.params.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::BadParams(format!("--jobs: {e}")))?
            .install(body)?,
        None => body()?,
    };
    let timestamp = (!cli.params.deterministic).then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    Ok(ExperimentReport {
        command: cli.command,
        config: serde_json::to_value(&cli.params).expect("params are plain data"),
        records,
        summary,
        passed,
        timestamp,
    })
}

type Body = Result<(Vec<Map<String, Value>>, Map<String, Value>, bool)>;

fn tally(summary: &mut Map<String, Value>, passes: u64, total: u64, required: u64) -> bool {
    summary.insert("passes".into(), json!(passes));
    summary.insert("total".into(), json!(total));
    summary.insert("required".into(), json!(required));
    passes >= required
}

fn spectrum(ctx: &Ctx) -> Body {
    let s = ctx.s();
    let mut summary = Map::new();
    if ctx.p.complete {
        let (n, r) = (ctx.n()?, ctx.r()?);
        let pairs = complete_spectrum(n, r, s)?;
        let records = pairs
            .iter()
            .map(|e| record(json!({"value": e.value, "multiplicity": e.multiplicity})))
            .collect();
        let h = complete(n, r)?;
        let g = build_aux(&h, s)?;
        let lap = normalized_laplacian(&g);
        if let Some(path) = &ctx.p.dump_matrix {
            std::fs::write(path, lap.matrix.dump_lower())?;
        }
        let spec = eigenvalues_sym(&lap.matrix)?;
        let expanded: Vec<f64> = pairs
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity as usize))
            .collect();
        let err = deviation(&spec, &Spectrum::from_values(expanded))?;
        summary.insert("max_abs_error".into(), json!(err));
        summary.insert("tolerance".into(), json!(1e-9));
        return Ok((records, summary, err <= 1e-9));
    }
    let rows = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let level = level_spectrum(&h, s)?;
        if trial == 0 {
            if let Some(path) = &ctx.p.dump_matrix {
                std::fs::write(path, level.laplacian.matrix.dump_lower())?;
            }
        }
        let lb = level.lambda_bar().ok();
        Ok(record(json!({
            "trial": trial,
            "edges": h.edge_count(),
            "dim": level.spectrum.dim(),
            "excluded": level.laplacian.excluded.len(),
            "connected": level.connected_bfs,
            "lambda1": level.spectrum.lambda1(),
            "lambda_max": level.spectrum.lambda_max(),
            "lambda_bar": lb,
            "values": level.spectrum.values,
        })))
    })?;
    let agree = rows
        .iter()
        .all(|r| r["connected"] == json!(r["lambda_bar"] != Value::Null));
    summary.insert("trials".into(), json!(rows.len()));
    Ok((rows, summary, agree))
}

fn radius(ctx: &Ctx) -> Body {
    let (n, r, s, p) = (ctx.n()?, ctx.r()?, ctx.s(), ctx.prob()?);
    let rhs = radius_rhs(n, r, s, p, ctx.p.slack);
    let k_spec = {
        let pairs = complete_spectrum(n, r, s)?;
        Spectrum::from_values(
            pairs
                .iter()
                .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity as usize))
                .collect(),
        )
    };
    let rows = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let level = level_spectrum(&h, s)?;
        let lb = level.lambda_bar().ok();
        let dev = if level.laplacian.excluded.is_empty() {
            Some(deviation(&level.spectrum, &k_spec)?)
        } else {
            None
        };
        let ok = lb.is_some_and(|x| x <= rhs);
        let dev_ok = dev.is_some_and(|x| x <= rhs);
        Ok(record(json!({
            "trial": trial,
            "lambda_bar": lb,
            "rhs": rhs,
            "within": ok,
            "deviation": dev,
            "deviation_within": dev_ok,
        })))
    })?;
    let total = rows.len() as u64;
    let passes = rows.iter().filter(|r| r["within"] == json!(true)).count() as u64;
    let dev_passes = rows
        .iter()
        .filter(|r| r["deviation_within"] == json!(true))
        .count() as u64;
    let mut summary = Map::new();
    summary.insert("rhs".into(), json!(rhs));
    summary.insert(
        "complete_lambda_bar".into(),
        json!(s as f64 / (n - s) as f64),
    );
    summary.insert("deviation_passes".into(), json!(dev_passes));
    let required = ctx.required_passes(total);
    let ok = tally(&mut summary, passes, total, required) && dev_passes >= required;
    Ok((rows, summary, ok))
}

fn semicircle(ctx: &Ctx) -> Body {
    let (n, r, s, p) = (ctx.n()?, ctx.r()?, ctx.s(), ctx.prob()?);
    let radius = semicircle_radius(n, r, s, p);
    let parts = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let c = centered_weight_from_aux(&build_aux(&h, s)?, p)?;
        scaled_ecdf(&eigenvalues_sym(&c)?, 0.0, radius)
    })?;
    let pooled = Ecdf::pooled(&parts);
    let ks = ks_distance(&pooled, semicircle_cdf)?;
    let m = pooled.len() as f64;
    let records = pooled
        .histogram(-1.2, 1.2, ctx.p.bins.max(1))
        .into_iter()
        .map(|(lo, hi, count)| {
            let expected = m * (semicircle_cdf(hi) - semicircle_cdf(lo));
            record(json!({"bin_left": lo, "bin_right": hi, "count": count, "expected": expected}))
        })
        .collect();
    let mut summary = Map::new();
    summary.insert("radius".into(), json!(radius));
    summary.insert("points".into(), json!(pooled.len()));
    summary.insert("ks".into(), json!(ks));
    summary.insert("tolerance".into(), json!(ctx.p.tol));
    Ok((records, summary, ks <= ctx.p.tol))
}

fn walk_count(ctx: &Ctx) -> Body {
    let (n, r, s) = (ctx.n()?, ctx.r()?, ctx.s());
    let t = need(ctx.p.t, "t", ctx.cmd)?;
    let census = census_with_budget(n, r, s, t, ctx.budget.unwrap_or(DEFAULT_WALK_BUDGET))?;
    let mut ok = true;
    let records = census
        .cells()
        .into_iter()
        .map(|(i, j)| {
            let count = census.get(i, j);
            let bound = gij_bound(n, r, s, t, i, j);
            ok &= count as f64 <= bound;
            record(json!({"n": n, "r": r, "s": s, "t": t, "i": i, "j": j, "count": count, "bound": bound}))
        })
        .collect();
    let mut summary = Map::new();
    summary.insert("good_walks".into(), json!(census.total()));
    if t % 2 == 0 {
        let k = t / 2;
        let exact = gk_formula(n, r, s, k)?;
        let counted = census.get(k, max_vertices(r, s, k));
        summary.insert("extremal_count".into(), json!(counted));
        summary.insert("extremal_formula".into(), json!(exact));
        ok &= counted == exact;
    }
    Ok((records, summary, ok))
}

fn mixing(ctx: &Ctx) -> Body {
    let s = ctx.s();
    let steps = ctx.p.steps;
    let rows = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let level = level_spectrum(&h, s)?;
        let Ok(lb) = level.lambda_bar() else {
            return Ok(record(json!({"trial": trial, "connected": false})));
        };
        let rep = mixing_contraction(&transition_system(&level.aux)?, lb, steps)?;
        Ok(record(json!({
            "trial": trial,
            "connected": true,
            "lambda_bar": lb,
            "max_factor": rep.max_factor,
            "skipped": rep.skipped,
            "tv_final": rep.tv.last(),
            "within": rep.within_bound,
        })))
    })?;
    connected_tally(ctx, rows)
}

fn connected_tally(ctx: &Ctx, rows: Vec<Map<String, Value>>) -> Body {
    let connected = rows
        .iter()
        .filter(|r| r["connected"] == json!(true))
        .count() as u64;
    let passes = rows
        .iter()
        .filter(|r| r.get("within") == Some(&json!(true)))
        .count() as u64;
    let mut summary = Map::new();
    summary.insert("connected".into(), json!(connected));
    let ok = tally(
        &mut summary,
        passes,
        connected,
        ctx.required_passes(connected),
    );
    Ok((rows, summary, ok))
}

fn diameter(ctx: &Ctx) -> Body {
    let s = ctx.s();
    let rows = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let level = level_spectrum(&h, s)?;
        if level.lambda_bar().is_err() {
            return Ok(record(json!({"trial": trial, "connected": false})));
        }
        let diam = s_diameter(&level.aux)?;
        let bound = diameter_bound(&level.spectrum, &h, s)?;
        Ok(record(json!({
            "trial": trial,
            "connected": true,
            "diameter": diam,
            "bound": bound,
            "within": diam <= bound,
        })))
    })?;
    connected_tally(ctx, rows)
}

fn expansion(ctx: &Ctx) -> Body {
    let s = ctx.s();
    let pairs = ctx.p.pairs;
    let per = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let level = level_spectrum(&h, s)?;
        let Ok(lb) = level.lambda_bar() else {
            return Ok(vec![record(json!({"trial": trial, "connected": false}))]);
        };
        // families come from a stream disjoint from the sampling streams
        let mut rng = trial_rng(ctx.p.seed ^ 0x5eed_fa11, trial);
        (0..pairs)
            .map(|pair| {
                let fs = random_family(h.n(), s, &mut rng);
                let ft = random_family(h.n(), s, &mut rng);
                let rep = edge_expansion(&h, s, &fs, &ft, lb)?;
                Ok(record(json!({
                    "trial": trial,
                    "connected": true,
                    "pair": pair,
                    "e_st": rep.e_st,
                    "e_s": rep.e_s,
                    "e_t": rep.e_t,
                    "lhs": rep.lhs,
                    "rhs": rep.rhs,
                    "within": rep.holds,
                    "e_st_weighted": rep.e_st_weighted,
                    "lhs_weighted": rep.lhs_weighted,
                    "within_weighted": rep.holds_weighted,
                })))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows: Vec<_> = per.into_iter().flatten().collect();
    let connected = rows
        .iter()
        .filter(|r| r["connected"] == json!(true))
        .count() as u64;
    let passes = rows
        .iter()
        .filter(|r| r.get("within") == Some(&json!(true)))
        .count() as u64;
    let weighted = rows
        .iter()
        .filter(|r| r.get("within_weighted") == Some(&json!(true)))
        .count() as u64;
    let mut summary = Map::new();
    summary.insert("weighted_passes".into(), json!(weighted));
    let ok = tally(
        &mut summary,
        passes,
        connected,
        ctx.required_passes(connected),
    );
    Ok((rows, summary, ok))
}

fn ekr(ctx: &Ctx) -> Body {
    let n = ctx.n()?;
    let levels: Vec<usize> = match ctx.p.s {
        Some(s) => vec![s],
        None => (1..=n / 2).collect(),
    };
    let mut ok = true;
    let mut records = Vec::new();
    for s in levels {
        let rep = ekr_bound(n, s)?;
        let matches = rep.min == rep.star_size;
        ok &= matches;
        records.push(record(json!({
            "n": n,
            "s": s,
            "n_plus": rep.n_plus,
            "n_minus": rep.n_minus,
            "min": rep.min,
            "star_size": rep.star_size,
            "matches": matches,
        })));
    }
    Ok((records, Map::new(), ok))
}

fn monotonicity(ctx: &Ctx) -> Body {
    let per = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        match monotonicity_check(&h) {
            Ok(rep) => Ok(rep
                .rows
                .iter()
                .map(|row| {
                    record(json!({
                        "trial": trial,
                        "connected": true,
                        "s": row.s,
                        "lambda1": row.lambda1,
                        "lambda_max": row.lambda_max,
                        "within": rep.holds(),
                    }))
                })
                .collect::<Vec<_>>()),
            Err(Error::Disconnected(_)) => {
                Ok(vec![record(json!({"trial": trial, "connected": false}))])
            }
            Err(e) => Err(e),
        }
    })?;
    let trials: Vec<bool> = per
        .iter()
        .filter(|rows| rows[0]["connected"] == json!(true))
        .map(|rows| rows[0]["within"] == json!(true))
        .collect();
    let rows: Vec<_> = per.into_iter().flatten().collect();
    let mut summary = Map::new();
    summary.insert("connected".into(), json!(trials.len()));
    let passes = trials.iter().filter(|&&b| b).count() as u64;
    let ok = tally(
        &mut summary,
        passes,
        trials.len() as u64,
        ctx.required_passes(trials.len() as u64),
    );
    Ok((rows, summary, ok))
}

fn diagnostics(ctx: &Ctx) -> Body {
    let (n, r, s, p) = (ctx.n()?, ctx.r()?, ctx.s(), ctx.prob()?);
    let d = expected_degree(n, r, s, p);
    let window = degree_window(n, r, s, p);
    let sq_ref = sum_sq_reference(n, r, s, p);
    let rows = ctx.per_trial(|trial| {
        let h = ctx.instance(trial)?;
        let stats = degree_stats(&h, s, Some(d))?;
        let mut rec = record(json!({
            "trial": trial,
            "outside_window": stats.outside_window(window),
            "sum_sq_ratio": stats.sum_sq_dev / sq_ref,
        }));
        match perturbation_diagnostics(&h, s, p) {
            Ok(rep) => {
                rec.insert("norm_m".into(), json!(rep.norm_m));
                for (k, v) in rep.norms.iter().enumerate() {
                    rec.insert(format!("norm_m{}", k + 1), json!(v));
                }
                for (k, v) in rep.ratios.iter().enumerate() {
                    rec.insert(format!("ratio_m{}", k + 1), json!(v));
                }
                rec.insert("identity_error".into(), json!(rep.identity_error));
                rec.insert("deviation".into(), json!(rep.spectral_deviation));
                rec.insert(
                    "within".into(),
                    json!(rep.identity_error <= 1e-10 && rep.triangle_holds && rep.weyl_holds),
                );
            }
            Err(Error::ZeroDegree(_)) => {
                rec.insert("within".into(), Value::Null);
            }
            Err(e) => return Err(e),
        }
        Ok(rec)
    })?;
    let mut ratios: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.get("ratio_m2")?.as_f64())
        .collect();
    ratios.sort_by(f64::total_cmp);
    let mut summary = Map::new();
    summary.insert("d".into(), json!(d));
    summary.insert("window_half_width".into(), json!(window));
    summary.insert("sum_sq_reference".into(), json!(sq_ref));
    summary.insert(
        "median_ratio_m2".into(),
        json!(ratios.get(ratios.len() / 2)),
    );
    let checked = rows.iter().filter(|r| r["within"] != Value::Null).count() as u64;
    let passes = rows.iter().filter(|r| r["within"] == json!(true)).count() as u64;
    let ok = tally(&mut summary, passes, checked, checked);
    Ok((rows, summary, ok))
}
