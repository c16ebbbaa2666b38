//! `qhgeo` experiment runner.
//!
//! Exit status: 0 on success, 1 when a requested check fails, 2 on usage,
//! configuration or computation errors.

mod config;
mod output;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use config::{build_graph, grid_params, load_domain, ExperimentConfig, GridFlags};
use output::{csv_text, emit, json, num, opt};
use qhgeo::conditions::{estimate_uniformity_on_pairs, sample_pairs};
use qhgeo::constants::ledger_monotonicity_report;
use qhgeo::gromov::{
    choose_base_point, estimate_delta_matrix, estimate_delta_with_pool, visual_table,
    DEFAULT_DELTA_POOL, DEFAULT_QUADRUPLES, DEFAULT_TAU,
};
use qhgeo::inequalities::{
    basic_lower_bounds, curve_upper_bound, local_upper_bound, uniform_upper_bound, CheckReport,
    DEFAULT_TOL,
};
use qhgeo::maps::{
    boundary_tables, property_a_verdict, property_b_verdict, qs_envelope, CheckStatus,
    PropertyAConfig, PropertyBConfig, DEFAULT_BINS, DEFAULT_TRIPLES,
};
use qhgeo::metrics::{deformed_distance, geodesic, inner_distance, quasihyperbolic_distance};
use qhgeo::{
    compute_ledger, DeformSpec, DistanceMatrix, Domain, Eta, GridParams, MetricGraph, MetricKind,
    Point, Quadruples, SampledMap, Stencil, UniformityMode,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qhgeo",
    version,
    about = "Quasihyperbolic geometry experiments on planar domains"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Domain description (JSON).
    #[arg(long, global = true)]
    domain: Option<PathBuf>,
    /// Coarse grid spacing.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Whitney constant: local spacing is at most this fraction of δ.
    #[arg(long, global = true)]
    whitney_c: Option<f64>,
    #[arg(long, global = true)]
    max_depth: Option<u8>,
    #[arg(long, global = true)]
    max_nodes: Option<usize>,
    /// axis4, king8 or knight16.
    #[arg(long, global = true)]
    stencil: Option<Stencil>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Primary output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a domain and its discretization.
    Domain {
        #[command(subcommand)]
        action: DomainAction,
    },
    /// Distance between two points.
    Dist(DistArgs),
    /// Geodesic between two points, as a path record.
    Geodesic(DistArgs),
    /// Sampled uniformity coefficient.
    Uniformity(UniformityArgs),
    /// Four-point hyperbolicity estimate of a domain or a distance matrix.
    Delta(DeltaArgs),
    /// Visual metametric between boundary anchors.
    Visual(VisualArgs),
    /// Quasisymmetry envelope of a boundary correspondence.
    QsCheck(QsArgs),
    /// Verdict on hyperbolicity plus natural boundary correspondence.
    PropertyA(PropertyAArgs),
    /// Verdict on a map onto a uniform domain.
    PropertyB(PropertyBArgs),
    /// Extended-log constant ledger.
    Constants(ConstantsArgs),
    /// Batch checks of the basic quasihyperbolic inequalities.
    Inequalities(InequalityArgs),
}

#[derive(Subcommand)]
enum DomainAction {
    /// Summary of the domain and its graph.
    Info,
    /// Full graph dump.
    Dump,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MetricArg {
    Inner,
    Qh,
    Deformed,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, value_enum, default_value = "qh")]
    metric: MetricArg,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    from: Point,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    to: Point,
    /// Deformation parameter ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Deformation base point; defaults to the deepest node.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    base: Option<Point>,
}

#[derive(Args)]
struct UniformityArgs {
    /// john, uniform or inner_uniform.
    #[arg(long)]
    mode: Option<UniformityMode>,
    #[arg(long)]
    pairs: Option<usize>,
    /// Per-pair CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Exit 1 when the estimate exceeds this value.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct DeltaArgs {
    /// Distance matrix (JSON array of rows) instead of a domain.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Sampled quadruples; matrices are scanned exhaustively when omitted.
    #[arg(long)]
    quadruples: Option<usize>,
    /// Number of sampled nodes for domain estimates.
    #[arg(long)]
    pool: Option<usize>,
    /// Exit 1 when the estimate exceeds this value.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct VisualArgs {
    #[arg(long)]
    tau: Option<f64>,
    /// Number of seeded boundary anchors.
    #[arg(long)]
    anchors: Option<usize>,
    /// Explicit anchors (JSON array of points).
    #[arg(long)]
    anchors_file: Option<PathBuf>,
    #[arg(long)]
    approach_depth: Option<u32>,
}

#[derive(Args)]
struct QsArgs {
    /// Source distance table (JSON array of rows).
    #[arg(long, requires = "dst")]
    src: Option<PathBuf>,
    #[arg(long, requires = "src")]
    dst: Option<PathBuf>,
    /// Target domain for a sampled map.
    #[arg(long, requires = "map", conflicts_with = "src")]
    target: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    approach_depth: Option<u32>,
    /// Per-bin CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Exit 1 when a populated bin exceeds η at its upper edge.
    #[arg(long)]
    eta: Option<Eta>,
}

#[derive(Args)]
struct PropertyAArgs {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    anchors: Option<usize>,
    #[arg(long)]
    quadruples: Option<usize>,
    #[arg(long)]
    pool: Option<usize>,
}

#[derive(Args)]
struct PropertyBArgs {
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long = "M")]
    m: f64,
    #[arg(long = "C")]
    c: f64,
    #[arg(long, default_value = "pow:1:1")]
    eta: Eta,
    /// Monotonicity grid as `M:C,M:C,...`.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct InequalityArgs {
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Premise constants for the local upper bound.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    a: Vec<f64>,
    /// Constructed curves for the curve-length bound.
    #[arg(long, default_value_t = 100)]
    paths: usize,
    /// Uniformity constant for the uniform upper bound: a number, or
    /// `auto` to use the sampled estimate. Skipped when omitted.
    #[arg(long)]
    uniform_m: Option<String>,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got `{s}`"))?;
    let x: f64 = x
        .trim()
        .parse()
        .map_err(|e| format!("bad x in `{s}`: {e}"))?;
    let y: f64 = y
        .trim()
        .parse()
        .map_err(|e| format!("bad y in `{s}`: {e}"))?;
    Ok(Point::new(x, y))
}

enum Outcome {
    Ok,
    CheckFailed(String),
}

struct Ctx {
    common: Common,
    cfg: ExperimentConfig,
}

impl Ctx {
    fn seed(&self) -> u64 {
        self.common.seed.or(self.cfg.seed).unwrap_or(1)
    }

    fn out(&self) -> Option<&Path> {
        self.common.out.as_deref()
    }

    fn flags(&self) -> GridFlags {
        GridFlags {
            h: self.common.h,
            whitney_c: self.common.whitney_c,
            max_depth: self.common.max_depth,
            max_nodes: self.common.max_nodes,
            stencil: self.common.stencil,
        }
    }

    fn domain_path(&self) -> Result<PathBuf> {
        self.common
            .domain
            .clone()
            .or_else(|| self.cfg.domain.clone())
            .ok_or_else(|| {
                anyhow!("no domain given: pass --domain FILE or set `domain` in --config")
            })
    }

    fn domain(&self) -> Result<(Domain, PathBuf)> {
        let p = self.domain_path()?;
        Ok((load_domain(&p)?, p))
    }

    fn graph_of(&self, path: &Path) -> Result<MetricGraph> {
        let d = load_domain(path)?;
        build_graph(&d, grid_params(self.flags(), &self.cfg.grid)?, path)
    }

    fn graph(&self) -> Result<MetricGraph> {
        self.graph_of(&self.domain_path()?)
    }

    fn path_or_cfg(
        &self,
        flag: &Option<PathBuf>,
        cfg: &Option<PathBuf>,
        name: &str,
    ) -> Result<PathBuf> {
        flag.clone().or_else(|| cfg.clone()).ok_or_else(|| {
            anyhow!("no {name} given: pass --{name} FILE or set `{name}` in --config")
        })
    }

    fn emit_json<T: Serialize>(&self, v: &T) -> Result<()> {
        emit(self.out(), &json(v)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match setup_threads().and_then(|_| run(cli)) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn setup_threads() -> Result<()> {
    let Ok(v) = std::env::var("QHGEO_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| anyhow!("QHGEO_THREADS must be a nonnegative integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring thread pool")
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = match &cli.common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let ctx = Ctx {
        common: cli.common,
        cfg,
    };
    match cli.command {
        Command::Domain { action } => domain_cmd(&ctx, action),
        Command::Dist(a) => dist_cmd(&ctx, &a),
        Command::Geodesic(a) => geodesic_cmd(&ctx, &a),
        Command::Uniformity(a) => uniformity_cmd(&ctx, &a),
        Command::Delta(a) => delta_cmd(&ctx, &a),
        Command::Visual(a) => visual_cmd(&ctx, &a),
        Command::QsCheck(a) => qs_cmd(&ctx, &a),
        Command::PropertyA(a) => property_a_cmd(&ctx, &a),
        Command::PropertyB(a) => property_b_cmd(&ctx, &a),
        Command::Constants(a) => constants_cmd(&ctx, &a),
        Command::Inequalities(a) => inequalities_cmd(&ctx, &a),
    }
}

#[derive(Serialize)]
struct DomainInfo<'a> {
    id: String,
    spec: &'a qhgeo::DomainSpec,
    bbox: qhgeo::BoundingBox,
    area: f64,
    grid: qhgeo::GridParams,
    node_count: usize,
    edge_count: usize,
    min_delta: f64,
    max_delta: f64,
}

fn domain_cmd(ctx: &Ctx, action: DomainAction) -> Result<Outcome> {
    let (domain, path) = ctx.domain()?;
    let g = build_graph(&domain, grid_params(ctx.flags(), &ctx.cfg.grid)?, &path)?;
    match action {
        DomainAction::Info => {
            let deltas = g.nodes().iter().map(|n| n.delta);
            ctx.emit_json(&DomainInfo {
                id: domain.spec().id(),
                spec: domain.spec(),
                bbox: domain.bbox(),
                area: domain.area(),
                grid: *g.params(),
                node_count: g.node_count(),
                edge_count: g.edge_count(),
                min_delta: deltas.clone().fold(f64::INFINITY, f64::min),
                max_delta: deltas.fold(0.0, f64::max),
            })?;
        }
        DomainAction::Dump => ctx.emit_json(&g.dump())?,
    }
    Ok(Outcome::Ok)
}

fn metric_of(g: &MetricGraph, a: &DistArgs) -> Result<MetricKind> {
    if a.metric != MetricArg::Deformed && (a.epsilon.is_some() || a.base.is_some()) {
        bail!("--epsilon and --base apply only to --metric deformed");
    }
    Ok(match a.metric {
        MetricArg::Inner => MetricKind::Inner,
        MetricArg::Qh => MetricKind::Quasihyperbolic,
        MetricArg::Deformed => {
            let eps = a
                .epsilon
                .ok_or_else(|| anyhow!("--metric deformed needs --epsilon"))?;
            let base = match a.base {
                Some(p) => g.snap(&p).context("snapping --base")?,
                None => choose_base_point(g).node,
            };
            DeformSpec::new(base, eps)?.metric()
        }
    })
}

fn dist_cmd(ctx: &Ctx, a: &DistArgs) -> Result<Outcome> {
    let g = ctx.graph()?;
    let d = match metric_of(&g, a)? {
        MetricKind::Inner => inner_distance(&g, &a.from, &a.to)?,
        MetricKind::Quasihyperbolic => quasihyperbolic_distance(&g, &a.from, &a.to)?,
        MetricKind::Deformed { epsilon, base } => {
            deformed_distance(&g, &DeformSpec::new(base, epsilon)?, &a.from, &a.to)?
        }
    };
    emit(ctx.out(), &format!("{}\n", num(d)))?;
    Ok(Outcome::Ok)
}

fn geodesic_cmd(ctx: &Ctx, a: &DistArgs) -> Result<Outcome> {
    let g = ctx.graph()?;
    let metric = metric_of(&g, a)?;
    ctx.emit_json(&geodesic(&g, &a.from, &a.to, &metric)?)?;
    Ok(Outcome::Ok)
}

fn uniformity_cmd(ctx: &Ctx, a: &UniformityArgs) -> Result<Outcome> {
    let mode = match (&a.mode, &ctx.cfg.mode) {
        (Some(m), _) => *m,
        (None, Some(s)) => s.parse().context("config field `mode`")?,
        (None, None) => UniformityMode::Uniform,
    };
    let pairs = a.pairs.or(ctx.cfg.pairs).unwrap_or(200);
    let path = ctx.domain_path()?;
    let g = ctx.graph_of(&path)?;
    let sample = sample_pairs(&g, pairs, ctx.seed())?;
    let est = estimate_uniformity_on_pairs(&g, mode, &sample)?;
    if let Some(csv) = &a.csv {
        let id = g.domain().spec().id();
        let rows: Vec<Vec<String>> = est
            .pairs
            .iter()
            .map(|p| {
                vec![
                    id.clone(),
                    mode.as_str().to_string(),
                    num(p.x.x),
                    num(p.x.y),
                    num(p.y.x),
                    num(p.y.y),
                    num(p.cigar),
                    num(p.turning),
                    num(p.m),
                ]
            })
            .collect();
        let text = csv_text(
            &[
                "domain", "mode", "x1", "y1", "x2", "y2", "cigar", "turning", "M",
            ],
            &rows,
        )?;
        emit(Some(csv), &text)?;
    }
    ctx.emit_json(&est)?;
    let threshold = a.threshold.or(ctx.cfg.threshold);
    match (threshold, est.m_hat) {
        (Some(t), Some(m)) if m > t => Ok(Outcome::CheckFailed(format!(
            "{} estimate {m} exceeds threshold {t}",
            mode.as_str()
        ))),
        (Some(_), None) => Ok(Outcome::CheckFailed(
            "no usable pair for the estimate".into(),
        )),
        _ => Ok(Outcome::Ok),
    }
}

fn read_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing table {}", path.display()))
}

fn delta_cmd(ctx: &Ctx, a: &DeltaArgs) -> Result<Outcome> {
    let quadruples = a.quadruples.or(ctx.cfg.quadruples);
    let est = match &a.matrix {
        Some(p) => {
            let m = DistanceMatrix::new(read_table(p)?)
                .with_context(|| format!("matrix {}", p.display()))?;
            let mode = match quadruples {
                Some(count) => Quadruples::Sampled {
                    count,
                    seed: ctx.seed(),
                },
                None => Quadruples::Exhaustive,
            };
            estimate_delta_matrix(&m, mode)?
        }
        None => {
            let g = ctx.graph()?;
            let pool = a.pool.or(ctx.cfg.pool).unwrap_or(DEFAULT_DELTA_POOL);
            estimate_delta_with_pool(
                &g,
                quadruples.unwrap_or(DEFAULT_QUADRUPLES),
                ctx.seed(),
                pool,
            )?
        }
    };
    ctx.emit_json(&est)?;
    match a.threshold.or(ctx.cfg.threshold) {
        Some(t) if est.delta_hat > t => Ok(Outcome::CheckFailed(format!(
            "delta estimate {} exceeds threshold {t}",
            est.delta_hat
        ))),
        _ => Ok(Outcome::Ok),
    }
}

fn anchors_for(
    ctx: &Ctx,
    domain: &Domain,
    count: Option<usize>,
    file: Option<&Path>,
) -> Result<Vec<Point>> {
    if let Some(f) = file {
        let text =
            std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        return serde_json::from_str(&text)
            .with_context(|| format!("parsing anchors {}", f.display()));
    }
    let n = count.or(ctx.cfg.anchors).unwrap_or(32);
    Ok(domain.boundary_sample(n, ctx.seed())?)
}

fn visual_cmd(ctx: &Ctx, a: &VisualArgs) -> Result<Outcome> {
    let (domain, path) = ctx.domain()?;
    let g = build_graph(&domain, grid_params(ctx.flags(), &ctx.cfg.grid)?, &path)?;
    let anchors = anchors_for(ctx, &domain, a.anchors, a.anchors_file.as_deref())?;
    let tau = a.tau.or(ctx.cfg.tau).unwrap_or(DEFAULT_TAU);
    let depth = a.approach_depth.or(ctx.cfg.approach_depth).unwrap_or(6);
    let base = choose_base_point(&g);
    let t = visual_table(&g, &base, tau, &anchors, depth)?;
    let mut rows = Vec::new();
    for (i, xi) in t.anchors.iter().enumerate() {
        for (j, xj) in t.anchors.iter().enumerate() {
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                num(xi.x),
                num(xi.y),
                num(xj.x),
                num(xj.y),
                num(t.products[i][j]),
                num(t.rho[i][j]),
            ]);
        }
    }
    let header = [
        "i",
        "j",
        "anchor_i_x",
        "anchor_i_y",
        "anchor_j_x",
        "anchor_j_y",
        "product",
        "rho",
    ];
    emit(ctx.out(), &csv_text(&header, &rows)?)?;
    Ok(Outcome::Ok)
}

fn qs_cmd(ctx: &Ctx, a: &QsArgs) -> Result<Outcome> {
    let (src, dst) = match (&a.src, &a.dst) {
        (Some(s), Some(d)) => (read_table(s)?, read_table(d)?),
        _ => {
            let target = ctx.path_or_cfg(&a.target, &ctx.cfg.target, "target")?;
            let map_path = ctx.path_or_cfg(&a.map, &ctx.cfg.map, "map")?;
            let g = ctx.graph()?;
            let y = load_domain(&target)?;
            let map = load_map(&map_path)?;
            map.validate(g.domain(), &y).context("validating map")?;
            let depth = a.approach_depth.or(ctx.cfg.approach_depth).unwrap_or(6);
            boundary_tables(&g, &map, depth)?
        }
    };
    let env = qs_envelope(
        &src,
        &dst,
        a.triples.or(ctx.cfg.triples).unwrap_or(DEFAULT_TRIPLES),
        ctx.seed(),
        a.bins.or(ctx.cfg.bins).unwrap_or(DEFAULT_BINS),
    )?;
    if let Some(csv) = &a.csv {
        let rows: Vec<Vec<String>> = env
            .bins
            .iter()
            .map(|b| {
                vec![
                    num(b.t_low),
                    num(b.t_high),
                    opt(b.max_ratio),
                    b.count.to_string(),
                ]
            })
            .collect();
        emit(
            Some(csv),
            &csv_text(&["t_low", "t_high", "max_ratio", "count"], &rows)?,
        )?;
    }
    ctx.emit_json(&env)?;
    if let Some(eta) = a.eta {
        eta.validate()?;
        let bad = env
            .bins
            .iter()
            .filter(|b| b.max_ratio.is_some_and(|r| r > eta.eval(b.t_high)))
            .count();
        if bad > 0 {
            return Ok(Outcome::CheckFailed(format!("{bad} bins exceed eta {eta}")));
        }
    }
    Ok(Outcome::Ok)
}

fn load_map(path: &Path) -> Result<SampledMap> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading map {}", path.display()))?;
    SampledMap::from_json(&text).with_context(|| format!("loading map {}", path.display()))
}

fn verdict_outcome(v: &qhgeo::PropertyVerdict) -> Outcome {
    match v.overall {
        CheckStatus::Fail => {
            Outcome::CheckFailed(format!("failed checks: {}", v.failed_checks().join(", ")))
        }
        CheckStatus::Inconclusive => {
            eprintln!("verdict inconclusive");
            Outcome::Ok
        }
        CheckStatus::Pass => Outcome::Ok,
    }
}

fn property_a_cmd(ctx: &Ctx, a: &PropertyAArgs) -> Result<Outcome> {
    let (domain, path) = ctx.domain()?;
    let g = build_graph(&domain, grid_params(ctx.flags(), &ctx.cfg.grid)?, &path)?;
    let mut cfg = ctx.cfg.property_a.unwrap_or_else(|| PropertyAConfig {
        seed: ctx.seed(),
        ..Default::default()
    });
    if let Some(s) = ctx.common.seed {
        cfg.seed = s;
    }
    if let Some(q) = a.quadruples.or(ctx.cfg.quadruples) {
        cfg.quadruples = q;
    }
    if let Some(p) = a.pool.or(ctx.cfg.pool) {
        cfg.pool = p;
    }
    let anchors = anchors_for(ctx, &domain, a.anchors, None)?;
    let tau = a.tau.or(ctx.cfg.tau).unwrap_or(DEFAULT_TAU);
    let v = property_a_verdict(&g, &choose_base_point(&g), tau, &anchors, &cfg)?;
    ctx.emit_json(&v)?;
    Ok(verdict_outcome(&v))
}

fn property_b_cmd(ctx: &Ctx, a: &PropertyBArgs) -> Result<Outcome> {
    let target = ctx.path_or_cfg(&a.target, &ctx.cfg.target, "target")?;
    let map_path = ctx.path_or_cfg(&a.map, &ctx.cfg.map, "map")?;
    let g = ctx.graph()?;
    let y = ctx.graph_of(&target)?;
    let map = load_map(&map_path)?;
    map.validate(g.domain(), y.domain())
        .context("validating map")?;
    let mut cfg = ctx.cfg.property_b.unwrap_or_else(|| PropertyBConfig {
        seed: ctx.seed(),
        ..Default::default()
    });
    if let Some(s) = ctx.common.seed {
        cfg.seed = s;
    }
    let v = property_b_verdict(&g, &y, &map, &cfg)?;
    ctx.emit_json(&v)?;
    Ok(verdict_outcome(&v))
}

fn parse_grid(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|item| {
            let (m, c) = item
                .split_once(':')
                .ok_or_else(|| anyhow!("grid entries are M:C, got `{item}`"))?;
            Ok((m.trim().parse()?, c.trim().parse()?))
        })
        .collect()
}

#[derive(Serialize)]
struct ConstantsReport {
    ledger: qhgeo::ConstantLedger,
    monotonicity: qhgeo::constants::MonotonicityReport,
}

fn constants_cmd(ctx: &Ctx, a: &ConstantsArgs) -> Result<Outcome> {
    let ledger = compute_ledger(a.m, a.c, a.eta)?;
    let Some(grid) = &a.grid else {
        ctx.emit_json(&ledger)?;
        return Ok(Outcome::Ok);
    };
    let monotonicity = ledger_monotonicity_report(&parse_grid(grid).context("--grid")?, a.eta)?;
    let monotone = monotonicity.monotone;
    ctx.emit_json(&ConstantsReport {
        ledger,
        monotonicity,
    })?;
    if monotone {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::CheckFailed(
            "ledger is not monotone on the grid".into(),
        ))
    }
}

fn inequalities_cmd(ctx: &Ctx, a: &InequalityArgs) -> Result<Outcome> {
    let (domain, path) = ctx.domain()?;
    let g = build_graph(&domain, grid_params(ctx.flags(), &ctx.cfg.grid)?, &path)?;
    let pairs = a.pairs.or(ctx.cfg.pairs).unwrap_or(200);
    let tol = a.tol.or(ctx.cfg.tol).unwrap_or(DEFAULT_TOL);
    let seed = ctx.seed();

    let mut reports: Vec<CheckReport> = basic_lower_bounds(&g, pairs, seed, tol)?.into();
    for (i, &an) in a.a.iter().enumerate() {
        // Premise pairs lie within δ/a, so cells must be at most that fine.
        let params = *g.params();
        let fine;
        let lg = if an > 1.0 && params.whitney_c > 1.0 / an {
            fine = build_graph(
                &domain,
                GridParams {
                    whitney_c: 1.0 / an,
                    ..params
                },
                &path,
            )?;
            &fine
        } else {
            &g
        };
        reports.push(local_upper_bound(
            lg,
            an,
            pairs,
            seed.wrapping_add(1 + i as u64),
            tol,
        )?);
    }
    if a.paths > 0 {
        reports.push(curve_upper_bound(
            &domain,
            a.paths,
            seed.wrapping_add(100),
            tol,
        )?);
    }
    if let Some(m) = &a.uniform_m {
        let m = if m == "auto" {
            let sample = sample_pairs(&g, pairs, seed.wrapping_add(200))?;
            estimate_uniformity_on_pairs(&g, UniformityMode::Uniform, &sample)?
                .m_hat
                .ok_or_else(|| anyhow!("no usable pair to estimate the uniformity constant"))?
        } else {
            m.parse()
                .map_err(|_| anyhow!("--uniform-m must be a number or `auto`, got `{m}`"))?
        };
        reports.push(uniform_upper_bound(
            &g,
            m,
            pairs,
            seed.wrapping_add(300),
            tol,
        )?);
    }

    let mut rows = Vec::new();
    for r in &reports {
        for row in &r.rows {
            rows.push(vec![
                r.check.clone(),
                num(row.x.x),
                num(row.x.y),
                num(row.y.x),
                num(row.y.y),
                num(row.measured),
                num(row.bound),
                num(row.slack),
                num(row.residual),
            ]);
        }
    }
    let header = [
        "check", "x1", "y1", "x2", "y2", "measured", "bound", "slack", "residual",
    ];
    emit(ctx.out(), &csv_text(&header, &rows)?)?;

    let mut failed = Vec::new();
    for r in &reports {
        eprintln!(
            "{}: {} rows, {} violations, {} skipped, min residual {}",
            r.check,
            r.rows.len(),
            r.violations,
            r.skipped,
            opt(r.min_residual())
        );
        if r.violations > 0 || r.rows.is_empty() {
            failed.push(r.check.as_str());
        }
    }
    if failed.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::CheckFailed(format!(
            "violations or no usable samples in {}",
            failed.join(", ")
        )))
    }
}
