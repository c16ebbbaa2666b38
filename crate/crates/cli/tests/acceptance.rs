//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use qhgeo::conditions::{estimate_uniformity, sample_pairs};
use qhgeo::constants::ledger_monotonicity_report;
use qhgeo::gromov::{choose_base_point, estimate_delta, estimate_delta_matrix};
use qhgeo::inequalities::{
    basic_lower_bounds, curve_upper_bound, local_upper_bound, uniform_upper_bound, CheckReport,
    DEFAULT_TOL,
};
use qhgeo::maps::{property_a_verdict, property_b_verdict, qs_envelope, ray_exit, CheckStatus};
use qhgeo::metrics::{distances_from, inner_distance, quasihyperbolic_distance};
use qhgeo::{
    compute_ledger, DeformSpec, DistanceMatrix, Domain, DomainSpec, Eta, GridParams, MetricGraph,
    MetricKind, Point, Quadruples, SampledMap, Tower, UniformityMode,
};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn graph(spec: DomainSpec, h: f64) -> Result<MetricGraph, String> {
    let d = Domain::new(spec).map_err(|e| e.to_string())?;
    MetricGraph::build(&d, GridParams::with_h(h)).map_err(|e| e.to_string())
}

fn unit_disk() -> DomainSpec {
    DomainSpec::disk(Point::new(0.0, 0.0), 1.0)
}

fn slit_square() -> DomainSpec {
    DomainSpec::from_json(
        r#"{"kind":"slit_polygon","outer":[[0,0],[1,0],[1,1],[0,1]],"slits":[[[0.5,0],[0.5,0.6]]]}"#,
    )
    .unwrap()
}

/// The five domains of the inequality suite with their grid spacing.
fn suite_domains() -> Vec<(&'static str, DomainSpec, f64)> {
    vec![
        ("disk", unit_disk(), 0.05),
        (
            "annulus",
            DomainSpec::annulus(Point::new(0.0, 0.0), 0.4, 1.0),
            0.05,
        ),
        (
            "rectangle",
            DomainSpec::rectangle(Point::new(0.0, 0.0), Point::new(2.0, 1.0)),
            0.05,
        ),
        ("comb3", DomainSpec::comb(3), 1.0 / 32.0),
        ("slit_square", slit_square(), 1.0 / 32.0),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = graph(
        DomainSpec::rectangle(Point::new(-10.0, 0.0), Point::new(10.0, 10.0)),
        0.02,
    )?;
    let e = std::f64::consts::E;
    let k = quasihyperbolic_distance(&g, &Point::new(0.0, 1.0), &Point::new(0.0, e))
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let oracle = (e / 1.0f64).ln().abs();
    let rel = (k - oracle).abs() / oracle;
    let msg = format!("k = {k:.6}, oracle {oracle}, rel err {rel:.4}, {secs:.1} s");
    ensure(rel <= 0.02, format!("{msg}; exceeds 2%"))?;
    ensure(secs < 30.0, format!("{msg}; too slow"))?;
    Ok(msg)
}

/// Inner distances on a uniform cell-center grid of the comb with
/// `teeth` teeth, 8-neighbor edges, blocked where an edge crosses a tooth.
struct CombOracle {
    n: usize,
    dist: Vec<f64>,
}

#[derive(PartialEq)]
struct Item(f64, usize);
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl CombOracle {
    fn new(teeth: u32, n: usize, source: (f64, f64)) -> Self {
        // (x, y_low, y_high) for every tooth.
        let mut walls = Vec::new();
        for k in 1..=teeth as i32 {
            let x = 2f64.powi(-k);
            walls.push((x, 0.0, 2.0 / 3.0));
            walls.push((x + 2f64.powi(-k - 2), 1.0 / 3.0, 1.0));
        }
        let h = 1.0 / n as f64;
        let center = |i: usize| (i as f64 + 0.5) * h;
        let blocked = |x1: f64, y1: f64, x2: f64, y2: f64| {
            walls.iter().any(|&(a, lo, hi)| {
                if (x1 - a) * (x2 - a) >= 0.0 {
                    return false;
                }
                let t = (a - x1) / (x2 - x1);
                let y = y1 + t * (y2 - y1);
                y >= lo && y <= hi
            })
        };
        let idx = |x: f64| ((x / h) as usize).min(n - 1);
        let s = idx(source.1) * n + idx(source.0);
        let mut dist = vec![f64::INFINITY; n * n];
        dist[s] = 0.0;
        let mut heap = BinaryHeap::from([Item(0.0, s)]);
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            let (ui, uj) = (u % n, u / n);
            for (di, dj) in [
                (1i64, 0i64),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ] {
                let (vi, vj) = (ui as i64 + di, uj as i64 + dj);
                if vi < 0 || vj < 0 || vi >= n as i64 || vj >= n as i64 {
                    continue;
                }
                let (vi, vj) = (vi as usize, vj as usize);
                if blocked(center(ui), center(uj), center(vi), center(vj)) {
                    continue;
                }
                let v = vj * n + vi;
                let nd = d + h * ((di * di + dj * dj) as f64).sqrt();
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        CombOracle { n, dist }
    }

    fn at(&self, p: Point) -> f64 {
        let idx = |x: f64| ((x * self.n as f64) as usize).min(self.n - 1);
        self.dist[idx(p.y) * self.n + idx(p.x)]
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion_2() -> Outcome {
    let teeth = 6;
    let source = Point::new(0.9, 0.5);
    let targets: Vec<Point> = (1..=6)
        .map(|n| Point::new(1.5 / 2f64.powi(n + 1), 0.5))
        .collect();
    let oracle = CombOracle::new(teeth, 1024, (source.x, source.y));
    let domain = Domain::new(DomainSpec::comb(teeth)).map_err(|e| e.to_string())?;
    let mut per_res = Vec::new();
    for h in [1.0 / 16.0, 1.0 / 32.0] {
        let params = GridParams {
            h_coarse: h,
            whitney_c: 1.0,
            max_depth: 7,
            ..Default::default()
        };
        let g = MetricGraph::build(&domain, params).map_err(|e| e.to_string())?;
        let d: Vec<f64> = targets
            .iter()
            .map(|t| inner_distance(&g, &source, t))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        per_res.push(d);
    }
    let mut worst_oracle: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (i, t) in targets.iter().enumerate() {
        ensure(
            source.dist(t) < 1.0,
            format!("euclidean distance {} >= 1", source.dist(t)),
        )?;
        let o = oracle.at(*t);
        for d in &per_res {
            worst_oracle = worst_oracle.max((d[i] - o).abs() / o);
        }
        let (a, b) = (per_res[0][i], per_res[1][i]);
        worst_res = worst_res.max((a - b).abs() / a.max(b));
    }
    let ns: Vec<f64> = (2..=6).map(f64::from).collect();
    let s = slope(&ns, &per_res[1][1..]);
    let msg = format!(
        "sigma(n=1..6) = {:?}, slope {s:.3}, max rel diff vs oracle {worst_oracle:.3}, between resolutions {worst_res:.3}",
        per_res[1].iter().map(|d| (d * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
    ensure(s >= 0.25, format!("{msg}; slope below 1/4"))?;
    ensure(
        worst_oracle <= 0.10 && worst_res <= 0.10,
        format!("{msg}; disagreement above 10%"),
    )?;
    ensure(
        per_res[1].windows(2).all(|w| w[1] > w[0]),
        format!("{msg}; not increasing"),
    )?;
    Ok(msg)
}

fn summarize(r: &CheckReport) -> String {
    format!(
        "{} {} rows/{} viol (min residual {:.3})",
        r.check,
        r.rows.len(),
        r.violations,
        r.min_residual().unwrap_or(f64::NAN)
    )
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut bad = Vec::new();
    for (name, spec, h) in suite_domains() {
        let g = graph(spec, h)?;
        for r in basic_lower_bounds(&g, 1000, 7, DEFAULT_TOL).map_err(|e| e.to_string())? {
            if r.violations > 0 || r.rows.len() != 1000 {
                bad.push(format!("{name}: {}", summarize(&r)));
            }
            parts.push(format!("{name} {}", summarize(&r)));
        }
    }
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok(format!(
        "1000 pairs per domain, zero violations; {}",
        parts.join("; ")
    ))
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    let mut total = [0usize; 3];
    for (name, spec, h) in suite_domains() {
        let domain = Domain::new(spec).map_err(|e| e.to_string())?;
        for a in [2.0, 4.0, 8.0] {
            // Premise pairs are within δ/a of each other, so the local
            // spacing must resolve that.
            let params = GridParams {
                h_coarse: h,
                whitney_c: f64::min(0.5, 1.0 / a),
                ..Default::default()
            };
            let g = MetricGraph::build(&domain, params).map_err(|e| e.to_string())?;
            let r = local_upper_bound(&g, a, 200, 21, DEFAULT_TOL).map_err(|e| e.to_string())?;
            total[0] += r.rows.len();
            if r.violations > 0 || r.rows.len() != 200 {
                bad.push(format!("(a) {name}: {}", summarize(&r)));
            }
        }
        let r = curve_upper_bound(&domain, 100, 22, DEFAULT_TOL).map_err(|e| e.to_string())?;
        total[1] += r.rows.len();
        if r.violations > 0 || r.rows.len() != 100 {
            bad.push(format!("(b) {name}: {}", summarize(&r)));
        }
    }
    let g = graph(unit_disk(), 0.05)?;
    let m = estimate_uniformity(&g, UniformityMode::Uniform, 200, 1)
        .map_err(|e| e.to_string())?
        .m_hat
        .ok_or("no uniformity estimate on the disk")?;
    let r = uniform_upper_bound(&g, m, 200, 23, DEFAULT_TOL).map_err(|e| e.to_string())?;
    total[2] = r.rows.len();
    if r.violations > 0 || r.rows.len() != 200 {
        bad.push(format!("(c) disk: {}", summarize(&r)));
    }
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok(format!(
        "(a) {} pairs over 5 domains x a in {{2,4,8}}, (b) {} paths, (c) {} pairs with M_hat = {m:.3}; zero violations",
        total[0], total[1], total[2]
    ))
}

fn criterion_5() -> Outcome {
    let mut values = Vec::new();
    for n in 1..=5 {
        let g = graph(DomainSpec::comb(n), 1.0 / 32.0)?;
        let m = estimate_uniformity(&g, UniformityMode::John, 300, 11)
            .map_err(|e| e.to_string())?
            .m_hat
            .ok_or(format!("no estimate on comb({n})"))?;
        values.push(m);
    }
    let msg = format!(
        "john M_hat(comb 1..5) = {:?}",
        values
            .iter()
            .map(|v| (v * 10.0).round() / 10.0)
            .collect::<Vec<_>>()
    );
    ensure(
        values.windows(2).all(|w| w[1] > w[0]),
        format!("{msg}; not strictly increasing"),
    )?;
    ensure(
        values[4] >= 3.0 * values[0],
        format!("{msg}; comb(5) < 3 x comb(1)"),
    )?;
    Ok(msg)
}

fn criterion_6() -> Outcome {
    let path = estimate_delta_matrix(&DistanceMatrix::path_graph(200), Quadruples::Exhaustive)
        .map_err(|e| e.to_string())?;
    ensure(
        path.delta_hat <= 1e-9,
        format!("path graph delta {}", path.delta_hat),
    )?;
    // Star with center 0 and leaves at distance 1, 2, 3.
    let star = DistanceMatrix::new(vec![
        vec![0.0, 1.0, 2.0, 3.0],
        vec![1.0, 0.0, 3.0, 4.0],
        vec![2.0, 3.0, 0.0, 5.0],
        vec![3.0, 4.0, 5.0, 0.0],
    ])
    .map_err(|e| e.to_string())?;
    let star = estimate_delta_matrix(&star, Quadruples::Exhaustive).map_err(|e| e.to_string())?;
    ensure(
        star.delta_hat == 0.0,
        format!("star delta {}", star.delta_hat),
    )?;
    let coarse = graph(unit_disk(), 0.05)?;
    let fine = coarse.refine(2.0).map_err(|e| e.to_string())?;
    let a = estimate_delta(&coarse, 200_000, 1)
        .map_err(|e| e.to_string())?
        .delta_hat;
    let b = estimate_delta(&fine, 200_000, 1)
        .map_err(|e| e.to_string())?
        .delta_hat;
    let rel = (a - b).abs() / a.max(b);
    let msg = format!(
        "path(200) {:e} over {} quadruples, star {}, disk h=0.05 {a:.4} vs h=0.025 {b:.4} (rel {rel:.3})",
        path.delta_hat, path.quadruple_count, star.delta_hat
    );
    ensure(
        rel <= 0.15,
        format!("{msg}; refinement disagreement above 15%"),
    )?;
    Ok(msg)
}

fn criterion_7() -> Outcome {
    let pts: Vec<Point> = (0..64)
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / 64.0;
            Point::new(th.cos(), th.sin())
        })
        .collect();
    let table: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| a.dist(b)).collect())
        .collect();
    let id = qs_envelope(&table, &table, 20_000, 5, 60).map_err(|e| e.to_string())?;
    for b in &id.bins {
        if let Some(r) = b.max_ratio {
            ensure(
                r <= b.t_high,
                format!("identity bin [{}, {}) has ratio {r}", b.t_low, b.t_high),
            )?;
        }
    }
    let snow: Vec<Vec<f64>> = table
        .iter()
        .map(|r| r.iter().map(|d| d.sqrt()).collect())
        .collect();
    let env = qs_envelope(&table, &snow, 20_000, 5, 60).map_err(|e| e.to_string())?;
    for b in &env.bins {
        if let Some(r) = b.max_ratio {
            ensure(
                r >= b.t_low.sqrt() && r <= b.t_high.sqrt(),
                format!("snowflake bin [{}, {}) has ratio {r}", b.t_low, b.t_high),
            )?;
        }
    }
    Ok(format!(
        "identity: {} populated bins under t_high; snowflake: {} populated bins within [sqrt t_low, sqrt t_high]",
        id.populated(),
        env.populated()
    ))
}

fn criterion_8() -> Outcome {
    let disk = Domain::new(unit_disk()).map_err(|e| e.to_string())?;
    let comb = Domain::new(DomainSpec::comb(5)).map_err(|e| e.to_string())?;
    let g = MetricGraph::build(&disk, GridParams::with_h(0.05)).map_err(|e| e.to_string())?;
    let cfg = Default::default();

    let id = SampledMap::from_fn(&disk, &disk, |p| p, Some, 60, 64, 1, "identity")
        .map_err(|e| e.to_string())?;
    let v_id = property_b_verdict(&g, &g, &id, &cfg).map_err(|e| e.to_string())?;
    ensure(
        v_id.overall == CheckStatus::Pass,
        format!("identity disk->disk: {:?}", v_id.overall),
    )?;

    let c = Point::new(0.75, 0.5);
    let squash = |p: Point| Point::new((p.x + 1.0) / 2.0, (p.y + 1.0) / 2.0);
    let to_comb = SampledMap::from_fn(
        &disk,
        &comb,
        squash,
        |p| ray_exit(&comb, &c, &p),
        60,
        64,
        1,
        "comb",
    )
    .map_err(|e| e.to_string())?;
    let gc =
        MetricGraph::build(&disk, GridParams::with_h(1.0 / 32.0)).map_err(|e| e.to_string())?;
    let yc =
        MetricGraph::build(&comb, GridParams::with_h(1.0 / 32.0)).map_err(|e| e.to_string())?;
    let v_comb = property_b_verdict(&gc, &yc, &to_comb, &cfg).map_err(|e| e.to_string())?;
    ensure(
        v_comb.overall == CheckStatus::Fail,
        format!("disk->comb5: {:?}", v_comb.overall),
    )?;
    ensure(
        v_comb.failed_checks().contains(&"uniformity"),
        format!(
            "disk->comb5 failed {:?}, not uniformity",
            v_comb.failed_checks()
        ),
    )?;

    let anchors = disk.boundary_sample(32, 1).map_err(|e| e.to_string())?;
    let v_a = property_a_verdict(
        &g,
        &choose_base_point(&g),
        0.2,
        &anchors,
        &Default::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(
        v_a.overall == CheckStatus::Pass,
        format!("property A on disk: {:?}", v_a),
    )?;
    Ok(format!(
        "B(identity) pass, B(disk->comb5) fail on {:?}, A(disk, tau 0.2, 32 anchors) pass with delta {:.3}",
        v_comb.failed_checks(),
        v_a.checks[0].measured.unwrap_or(f64::NAN)
    ))
}

fn criterion_9() -> Outcome {
    let g = graph(unit_disk(), 0.05)?;
    let base = choose_base_point(&g).node;
    let nodes: Vec<usize> = sample_pairs(&g, 250, 9)
        .map_err(|e| e.to_string())?
        .into_iter()
        .flat_map(|(x, y)| [x, y])
        .map(|p| g.snap(&p))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for eps in [0.1, 0.5] {
        let spec = DeformSpec::new(base, eps).map_err(|e| e.to_string())?;
        let d = distances_from(&g, &spec.metric(), base).map_err(|e| e.to_string())?;
        let worst = nodes.iter().map(|&v| d[v]).fold(0.0, f64::max);
        // Discretization slack of 1% of the bound.
        let bound = 1.0 / eps;
        ensure(
            worst <= bound * 1.01,
            format!("eps {eps}: max {worst} > 1/eps = {bound}"),
        )?;
        parts.push(format!("eps {eps}: max {worst:.4} <= {bound}"));
    }
    let spec = DeformSpec::new(base, 1e-9).map_err(|e| e.to_string())?;
    let d = distances_from(&g, &spec.metric(), base).map_err(|e| e.to_string())?;
    let k = distances_from(&g, &MetricKind::Quasihyperbolic, base).map_err(|e| e.to_string())?;
    let worst = nodes
        .iter()
        .filter(|&&v| v != base)
        .map(|&v| (d[v] - k[v]).abs() / k[v])
        .fold(0.0, f64::max);
    ensure(worst <= 1e-6, format!("eps 1e-9: relative gap {worst:e}"))?;
    parts.push(format!("eps 1e-9: max rel gap to k {worst:.1e}"));
    Ok(parts.join(", "))
}

fn criterion_10() -> Outcome {
    let eta = Eta::Power { a: 1.0, b: 1.0 };
    let l = compute_ledger(36.0, 37.0, eta).map_err(|e| e.to_string())?;
    let oracle = 4u64 * (36 * 37u64).pow(2);
    ensure(
        l.log_c1 == Tower::real(oracle as f64),
        format!("logC1 = {} but 4(CM)^2 = {oracle}", l.log_c1),
    )?;
    let b0 = Tower::real(20f64.ln()).add(l.log_m0.scale(2.0));
    ensure(
        b0 == l.log_b0,
        format!("logB0 {} vs log 20 + 2 logM0 {}", l.log_b0, b0),
    )?;
    let t7 = Tower::real(32f64.ln())
        .add(l.log_a0)
        .add(l.log_b0.scale(2.0));
    ensure(
        t7 == l.log_thm7_coeff,
        format!("thm7 coeff {} vs {}", l.log_thm7_coeff, t7),
    )?;
    let grid = [(36.0, 37.0), (36.0, 40.0), (40.0, 41.0), (40.0, 45.0)];
    let mono = ledger_monotonicity_report(&grid, eta).map_err(|e| e.to_string())?;
    ensure(
        mono.monotone,
        format!("not monotone: {:?}", mono.violations),
    )?;
    Ok(format!(
        "logC1 = {} = {oracle}, B0 and 32 A0 B0^2 identities exact, monotone on {} grid points",
        l.log_c1,
        grid.len()
    ))
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Runs the CLI with `--out` (and `--csv` where supported) pointed into
/// `dir`; returns exit code, stdout, stderr and written files.
fn run_cli(args: &[String], dir: &std::path::Path, csv: bool) -> Result<(i32, Vec<u8>), String> {
    let out = dir.join("out");
    let csv_path = dir.join("out.csv");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qhgeo"));
    cmd.args(args).arg("--out").arg(&out);
    if csv {
        cmd.arg("--csv").arg(&csv_path);
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    let mut bytes = o.stdout;
    bytes.extend(o.stderr);
    for p in [&out, &csv_path] {
        if let Ok(b) = std::fs::read(p) {
            bytes.extend(b);
            std::fs::remove_file(p).map_err(|e| e.to_string())?;
        }
    }
    Ok((o.status.code().unwrap_or(-1), bytes))
}

fn criterion_11() -> Outcome {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let f = fixture;
    // (arguments, writes a csv side file, expected exit code)
    let cases: Vec<(Vec<String>, bool, i32)> = vec![
        (
            s(&[
                "dist",
                "--domain",
                &f("disk.json"),
                "--metric",
                "inner",
                "--from",
                "0.2,0.2",
                "--to",
                "0.8,0.8",
                "--h",
                "0.02",
            ]),
            false,
            0,
        ),
        (
            s(&[
                "geodesic",
                "--domain",
                &f("slit_square.json"),
                "--h",
                "0.03125",
                "--from",
                "0.25,0.2",
                "--to",
                "0.75,0.2",
            ]),
            false,
            0,
        ),
        (
            s(&["domain", "info", "--domain", &f("rectangle.json")]),
            false,
            0,
        ),
        (
            s(&["--config", &f("disk_pass.config.json"), "uniformity"]),
            true,
            0,
        ),
        (
            s(&["--config", &f("comb5_john.config.json"), "uniformity"]),
            true,
            1,
        ),
        (
            s(&["--config", &f("malformed.config.json"), "uniformity"]),
            false,
            2,
        ),
        (s(&["delta", "--matrix", &f("star3.matrix.json")]), false, 0),
        (
            s(&[
                "delta",
                "--domain",
                &f("disk.json"),
                "--quadruples",
                "20000",
                "--seed",
                "4",
            ]),
            false,
            0,
        ),
        (
            s(&["visual", "--domain", &f("disk.json"), "--anchors", "16"]),
            false,
            0,
        ),
        (
            s(&[
                "qs-check",
                "--domain",
                &f("disk.json"),
                "--target",
                &f("disk.json"),
                "--map",
                &f("disk_identity.map.json"),
            ]),
            true,
            0,
        ),
        (s(&["property-a", "--domain", &f("disk.json")]), false, 0),
        (
            s(&[
                "property-b",
                "--domain",
                &f("disk.json"),
                "--target",
                &f("disk.json"),
                "--map",
                &f("disk_identity.map.json"),
            ]),
            false,
            0,
        ),
        (
            s(&["--config", &f("disk_to_comb5.config.json"), "property-b"]),
            false,
            1,
        ),
        (
            s(&[
                "constants",
                "--M",
                "36",
                "--C",
                "37",
                "--eta",
                "pow:1:1",
                "--grid",
                "36:37,36:40,40:41,40:45",
            ]),
            false,
            0,
        ),
        (
            s(&[
                "inequalities",
                "--domain",
                &f("annulus.json"),
                "--pairs",
                "500",
                "--seed",
                "1",
            ]),
            false,
            0,
        ),
    ];
    let dir = std::env::temp_dir().join(format!("qhgeo-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut bad = Vec::new();
    for (args, csv, expected) in &cases {
        let (c1, b1) = run_cli(args, &dir, *csv)?;
        let (c2, b2) = run_cli(args, &dir, *csv)?;
        let label = args
            .iter()
            .find(|a| !a.starts_with('-') && !a.contains('/'))
            .cloned()
            .unwrap_or_default();
        if b1 != b2 || c1 != c2 {
            bad.push(format!("{label}: reruns differ"));
        }
        if c1 != *expected {
            bad.push(format!(
                "{label}: exit {c1}, expected {expected}: {}",
                String::from_utf8_lossy(&b1).lines().last().unwrap_or("")
            ));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(bad.is_empty(), bad.join("; "))?;
    Ok(format!(
        "{} invocations byte-identical on rerun; exit codes 0/1/2 for disk pass, comb John flag, malformed config",
        cases.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("half-plane oracle", criterion_1),
        ("comb inner distance growth", criterion_2),
        ("basic inequality suite", criterion_3),
        ("local, curve and uniform upper bounds", criterion_4),
        ("John divergence on combs", criterion_5),
        ("four-point hyperbolicity", criterion_6),
        ("quasisymmetry envelope", criterion_7),
        ("property verdicts", criterion_8),
        ("conformal deformation", criterion_9),
        ("constant ledger", criterion_10),
        ("CLI determinism", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {} ({name}) [{secs:.1} s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}) [{secs:.1} s]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
