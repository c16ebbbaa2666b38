use proptest::prelude::*;
use qhgeo::constants::LN_MAX;
use qhgeo::gromov::{estimate_delta_matrix, gromov_product_from_distances};
use qhgeo::metrics::node_distance;
use qhgeo::{
    DistanceMatrix, Domain, DomainSpec, GridParams, MetricGraph, MetricKind, Point, Quadruples,
    Tower,
};
use std::sync::OnceLock;

fn slit_graph() -> &'static MetricGraph {
    static G: OnceLock<MetricGraph> = OnceLock::new();
    G.get_or_init(|| {
        let spec = DomainSpec::from_json(
            r#"{"kind":"slit_polygon","outer":[[0,0],[1,0],[1,1],[0,1]],"slits":[[[0.5,0],[0.5,0.6]]]}"#,
        )
        .unwrap();
        MetricGraph::build(&Domain::new(spec).unwrap(), GridParams::with_h(0.0625)).unwrap()
    })
}

fn domains() -> Vec<Domain> {
    [
        DomainSpec::disk(Point::new(0.0, 0.0), 1.0),
        DomainSpec::annulus(Point::new(0.0, 0.0), 0.3, 1.0),
        DomainSpec::comb(3),
        slit_graph().domain().spec().clone(),
    ]
    .into_iter()
    .map(|s| Domain::new(s).unwrap())
    .collect()
}

fn metric_strategy() -> impl Strategy<Value = MetricKind> {
    prop_oneof![Just(MetricKind::Inner), Just(MetricKind::Quasihyperbolic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_distances_are_metrics(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(),
                                  k in any::<prop::sample::Index>(), metric in metric_strategy()) {
        let g = slit_graph();
        let n = g.node_count();
        let (a, b, c) = (i.index(n), j.index(n), k.index(n));
        let d = |x, y| node_distance(g, &metric, x, y).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert_eq!(d(a, b).to_bits(), d(b, a).to_bits());
        if a != b {
            prop_assert!(d(a, b) > 0.0);
        }
        prop_assert!(d(a, c) <= (d(a, b) + d(b, c)) * (1.0 + 1e-12));
    }

    #[test]
    fn inner_distance_dominates_chord(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let g = slit_graph();
        let (a, b) = (i.index(g.node_count()), j.index(g.node_count()));
        let s = node_distance(g, &MetricKind::Inner, a, b).unwrap();
        prop_assert!(s >= g.node(a).point.dist(&g.node(b).point) * (1.0 - 1e-12));
    }

    #[test]
    fn gromov_product_is_bounded(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 3)) {
        let p: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let (xp, yp, xy) = (p[0].dist(&p[2]), p[1].dist(&p[2]), p[0].dist(&p[1]));
        let g = gromov_product_from_distances(xp, yp, xy);
        prop_assert!(g >= -1e-12);
        prop_assert!(g <= xp.min(yp) + 1e-12);
    }

    #[test]
    fn delta_is_at_most_half_the_diameter(pts in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 4..9)) {
        let p: Vec<Point> = pts.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let rows: Vec<Vec<f64>> = p.iter().map(|a| p.iter().map(|b| a.dist(b)).collect()).collect();
        let diam = rows.iter().flatten().cloned().fold(0.0, f64::max);
        let est = estimate_delta_matrix(&DistanceMatrix::new(rows).unwrap(), Quadruples::Exhaustive).unwrap();
        prop_assert!(est.delta_hat >= 0.0);
        prop_assert!(est.delta_hat <= diam / 2.0 + 1e-12);
    }

    #[test]
    fn tree_metrics_have_zero_delta(w in prop::collection::vec(0.1..10.0f64, 5)) {
        // Star with five leaves.
        let n = w.len() + 1;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| match (i, j) {
                _ if i == j => 0.0,
                (0, j) => w[j - 1],
                (i, 0) => w[i - 1],
                (i, j) => w[i - 1] + w[j - 1],
            }).collect())
            .collect();
        let est = estimate_delta_matrix(&DistanceMatrix::new(rows).unwrap(), Quadruples::Exhaustive).unwrap();
        prop_assert!(est.delta_hat <= 1e-12);
    }

    #[test]
    fn tower_ln_inverts_exp_above_float_range(x in (LN_MAX + 1.0)..1e300) {
        prop_assert_eq!(Tower::real(x).exp().ln().unwrap(), Tower::real(x));
        prop_assert_eq!(Tower::real(x).exp().exp().ln().unwrap().ln().unwrap(), Tower::real(x));
    }

    #[test]
    fn tower_order_is_preserved(a in -700.0..1e300f64, b in -700.0..1e300f64) {
        let (ta, tb) = (Tower::real(a), Tower::real(b));
        prop_assert_eq!(ta < tb, a < b);
        if a < b {
            prop_assert!(ta.exp() <= tb.exp());
            prop_assert!(ta.exp().exp() <= tb.exp().exp());
        }
        prop_assert_eq!(ta.max(tb), tb.max(ta));
        prop_assert!(ta.max(tb) >= ta && ta.max(tb) >= tb);
    }

    #[test]
    fn tower_sum_is_symmetric_and_dominant(a in 1.0..1e6f64, la in 0u32..3, b in 1.0..1e6f64, lb in 0u32..3) {
        let (x, y) = (Tower::new(la, a), Tower::new(lb, b));
        prop_assert_eq!(x.add(y), y.add(x));
        prop_assert!(x.add(y) >= x.max(y));
        prop_assert_eq!(x.mul(y), y.mul(x));
    }

    #[test]
    fn tower_small_arithmetic_matches_floats(a in 0.1..1e3f64, b in 0.1..1e3f64) {
        prop_assert_eq!(Tower::real(a).add(Tower::real(b)), Tower::real(a + b));
        prop_assert_eq!(Tower::real(a).mul(Tower::real(b)), Tower::real(a * b));
    }

    #[test]
    fn boundary_distance_is_consistent(x in -1.2..1.2f64, y in -1.2..1.2f64, seed in 0u64..1000) {
        let p = Point::new(x, y);
        for d in domains() {
            let delta = d.distance_to_boundary(&p);
            prop_assert!(delta >= 0.0);
            let samples = d.boundary_sample(16, seed).unwrap();
            for q in &samples {
                prop_assert!(d.distance_to_boundary(q) <= 1e-12);
                prop_assert!(delta <= p.dist(q) + 1e-9);
            }
            if d.contains(&p) {
                prop_assert!(delta > 0.0);
                prop_assert_eq!(d.boundary_distance(&p).unwrap(), delta);
            } else {
                prop_assert!(d.boundary_distance(&p).is_err());
            }
        }
    }
}
