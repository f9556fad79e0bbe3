mod common;

use common::{exhaustive_vertices, q, random_bounded_system};
use dofbench::dmc::{self, Auxiliary, DmcSpec, Evaluator};
use dofbench::geometry::{enumerate_vertices, hull_region, max_weighted_sum, region_subset};
use dofbench::model::{csi_at, draw_channels, Node, UserId};
use dofbench::rational::{self, rat, to_f64};
use dofbench::regions::{gap_report, inner_region, FamilyTag, ScenarioFamily};
use dofbench::schemes::{self, SchemeId, SchemeParams};
use dofbench::sim::{self, SnrSweep};
use dofbench::{Csit, Execution, Rational, ScenarioConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn csit() -> impl Strategy<Value = Csit> {
    prop_oneof![Just(Csit::Perfect), Just(Csit::Delayed), Just(Csit::None)]
}

fn family(tag: FamilyTag, ms: usize, md: usize, ts: usize, td: usize) -> ScenarioFamily {
    let (cs, cd) = match tag {
        FamilyTag::NoCsit => (Csit::None, Csit::None),
        FamilyTag::HybridPerfectNone => (Csit::Perfect, Csit::None),
        FamilyTag::HybridPerfectDelayed => (Csit::Perfect, Csit::Delayed),
        _ => (Csit::Delayed, Csit::Delayed),
    };
    ScenarioFamily::new(tag, ScenarioConfig::new(ms, md, ts, td, cs, cd).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn delayed_knowledge_never_disappears(
        ms in 1usize..3, md in 1usize..3, td in 2usize..5, mult in 1usize..3,
        cs in csit(), cd in csit(), seed in any::<u64>(),
    ) {
        let cfg = ScenarioConfig::new(ms, md, td * mult, td, cs, cd).unwrap();
        let horizon = 2 * td * mult;
        let ch = draw_channels(&cfg, horizon, seed).unwrap();
        let nodes: Vec<Node> = std::iter::once(Node::Transmitter)
            .chain((0..ms).map(|j| Node::Receiver(UserId::Static(j))))
            .chain((0..md).map(|i| Node::Receiver(UserId::Dynamic(i))))
            .collect();
        for node in nodes {
            let mut previous: Option<dofbench::model::CsiView> = None;
            for t in 0..horizon {
                let view = csi_at(&cfg, &ch, node, t).unwrap();
                if let Some(p) = &previous {
                    for k in &p.known_gains {
                        prop_assert!(view.knows(k.user, k.block), "{node} lost {} block {} at {t}", k.user, k.block);
                    }
                }
                match node {
                    Node::Receiver(UserId::Static(j)) => {
                        let own = UserId::Static(j);
                        prop_assert!(view.knows(own, ch.static_block(t)));
                        for k in view.known_gains.iter().filter(|k| k.user == own) {
                            prop_assert_eq!(&k.gain, &ch.static_gains[j][k.block]);
                        }
                    }
                    Node::Receiver(UserId::Dynamic(_)) => prop_assert!(view.known_gains.is_empty()),
                    Node::Transmitter => {}
                }
                previous = Some(view);
            }
        }
    }

    #[test]
    fn config_json_round_trip(
        ms in 0usize..3, md in 0usize..3, td in 2usize..9, mult in 1usize..3, extra in 0usize..2,
        cs in csit(), cd in csit(),
    ) {
        prop_assume!(ms + md > 0);
        let cfg = ScenarioConfig::new(ms, md, td * mult, td, cs, cd).unwrap().with_n_tx(ms + md + extra).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(ScenarioConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn vertices_match_exhaustive_oracle(seed in any::<u64>(), dim in 1usize..5, extra in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let extra = extra.min(12 - 2 * dim);
        let hs = random_bounded_system(&mut rng, dim, extra);
        prop_assert_eq!(enumerate_vertices(&hs, dim).unwrap(), exhaustive_vertices(&hs, dim));
    }

    #[test]
    fn hull_of_vertices_is_idempotent(seed in any::<u64>(), dim in 1usize..4, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hs = random_bounded_system(&mut rng, dim, extra);
        let vertices = enumerate_vertices(&hs, dim).unwrap();
        let hull = hull_region(&vertices).unwrap();
        prop_assert_eq!(&enumerate_vertices(&hull.halfspaces, dim).unwrap(), &vertices);
        prop_assert!(hull.check_dual_consistency().is_ok());
    }

    #[test]
    fn weighted_max_beats_sampled_points(seed in any::<u64>(), dim in 1usize..4, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hs = random_bounded_system(&mut rng, dim, extra);
        let region = dofbench::DofRegion::from_halfspaces(dim, hs).unwrap();
        let weights: Vec<Rational> = (0..dim).map(|_| q(rng.random_range(-2..4))).collect();
        let (best, arg) = max_weighted_sum(&region, &weights).unwrap();
        prop_assert!(region.contains(&arg));
        let bounds: Vec<i64> = (0..dim).map(|k| {
            region.vertices.iter().map(|v| v[k].ceil().to_integer().try_into().unwrap()).max().unwrap_or(0)
        }).collect();
        let mut accepted = 0;
        for _ in 0..10_000 {
            let p: Vec<Rational> = bounds.iter().map(|&b| rat(rng.random_range(0..=(b * 64).max(0)), 64)).collect();
            if region.contains(&p) {
                accepted += 1;
                prop_assert!(rational::dot(&weights, &p) <= best);
            }
        }
        prop_assert!(accepted > 0);
    }

    #[test]
    fn inner_never_exceeds_outer(
        ms in 1usize..3, md in 1usize..3, t in prop::sample::select(vec![4usize, 10, 15, 30]),
        double in any::<bool>(), w in prop::collection::vec(0i64..4, 4),
    ) {
        let ts = if double { 2 * t } else { t };
        let weights: Vec<Rational> = w[..ms + md].iter().map(|&x| q(x)).collect();
        for tag in [FamilyTag::NoCsit, FamilyTag::DelayedAll, FamilyTag::HybridPerfectNone, FamilyTag::HybridPerfectDelayed] {
            let f = family(tag, ms, md, ts, t);
            let g = gap_report(&f, &weights).unwrap();
            prop_assert!(g.inner_max <= g.outer_max, "{tag}");
            let inner = inner_region(&f).unwrap();
            let cap = rat(1, 1) - rat(1, t as i64);
            for v in &inner.region.vertices {
                for d in &v[ms..] {
                    prop_assert!(*d <= cap);
                }
            }
        }
    }

    #[test]
    fn richer_csit_gives_larger_inner_regions(
        ms in 1usize..3, md in 1usize..3, t in prop::sample::select(vec![4usize, 10, 15, 30]), double in any::<bool>(),
    ) {
        let ts = if double { 2 * t } else { t };
        let none = inner_region(&family(FamilyTag::NoCsit, ms, md, ts, t)).unwrap().region;
        let delayed = inner_region(&family(FamilyTag::DelayedAll, ms, md, ts, t)).unwrap().region;
        let hybrid = inner_region(&family(FamilyTag::HybridPerfectDelayed, ms, md, ts, t)).unwrap().region;
        prop_assert!(region_subset(&none, &delayed).unwrap().holds);
        prop_assert!(region_subset(&delayed, &hybrid).unwrap().holds);
    }

    #[test]
    fn scheme_counts_match_closed_forms(t in 3usize..31, mult in 1usize..3, seed in any::<u64>(), ms in 1usize..3) {
        let tf = t as i64;
        let one = rat(1, 1);
        let cases: Vec<(SchemeParams, Vec<Rational>)> = vec![
            (SchemeParams::new(SchemeId::ProductSuperposition, t, None, None).unwrap(), vec![rat(1, tf), &one - rat(1, tf)]),
            (SchemeParams::new(SchemeId::MatStatic, t, None, None).unwrap(), vec![rat(2, 3), rat(2, 3)]),
            (SchemeParams::new(SchemeId::MatDynamic, t, None, None).unwrap(), vec![rat(2 * (tf - 2), 3 * tf); 2]),
            (
                SchemeParams::new(SchemeId::Delayed3Phase, t, Some(mult * t), None).unwrap(),
                vec![rat(2 * (tf + 1), 3 * tf), rat(2 * (tf - 2), 3 * tf)],
            ),
            (
                SchemeParams::new(SchemeId::HybridPn, t, None, Some(ms)).unwrap(),
                [vec![rat(1, tf); ms], vec![&one - rat(1, tf)]].concat(),
            ),
            (
                SchemeParams::new(SchemeId::HybridPd2Phase, t, None, None).unwrap(),
                vec![rat(2 * tf - 1, 2 * tf), rat(tf - 1, 2 * tf)],
            ),
            (
                SchemeParams::new(SchemeId::HybridPdMulti, t, None, Some(ms)).unwrap(),
                [vec![rat(2, tf); ms], vec![rat(2 * (tf - 2), 3 * tf); 2]].concat(),
            ),
        ];
        for (params, expected) in cases {
            let tr = schemes::run(&params, seed).unwrap();
            prop_assert!(tr.decode_ok(), "{}", tr.summary_line());
            prop_assert_eq!(tr.dof(), expected, "{}", params.scheme);
        }
    }

    #[test]
    fn dof_independent_of_realization(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        for id in SchemeId::ALL {
            let p = SchemeParams::new(id, 8, None, None).unwrap();
            prop_assert_eq!(schemes::run(&p, seed_a).unwrap().dof(), schemes::run(&p, seed_b).unwrap().dof());
        }
    }

    #[test]
    fn evaluator_matches_joint_tables(seed in any::<u64>(), u_card in 1usize..3, v_card in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 2, 2, 2);
        let aux = random_aux(&mut rng, u_card, v_card, spec.x_card);
        let eval = Evaluator::new(&spec).evaluate(&aux);
        prop_assert_eq!(eval.dpi_violations(), 0);
        let oracle = oracle_bounds(&spec, &aux);
        prop_assert!((eval.bounds.common - oracle.0).abs() < 1e-9);
        prop_assert!((eval.bounds.private - oracle.1).abs() < 1e-9);
        prop_assert!((eval.bounds.sum - oracle.2).abs() < 1e-9);
    }
}

fn random_stochastic<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            let r: Vec<f64> = (0..cols).map(|_| rng.random::<f64>()).collect();
            let s: f64 = r.iter().sum();
            r.iter().map(|x| x / s).collect()
        })
        .collect()
}

fn random_spec<R: Rng>(rng: &mut R, x: usize, static_stages: usize, dynamic_stages: usize) -> DmcSpec {
    let chain = |rng: &mut R, n| (0..n).map(|_| random_stochastic(rng, x, x)).collect();
    let s = chain(rng, static_stages);
    let d = chain(rng, dynamic_stages);
    DmcSpec::new(x, s, d).unwrap()
}

fn random_aux<R: Rng>(rng: &mut R, u: usize, v: usize, x: usize) -> Auxiliary {
    let flat = random_stochastic(rng, 1, u * v).remove(0);
    Auxiliary { p_uv: flat.chunks(v).map(|c| c.to_vec()).collect(), x_given_v: random_stochastic(rng, v, x) }
}

/// Output distribution of each chain's last and first stage, by explicit
/// path sums.
fn chain_channel(chain: &[Vec<Vec<f64>>], stages: usize) -> Vec<Vec<f64>> {
    let mut cur = chain[0].clone();
    for m in &chain[1..stages] {
        cur = (0..cur.len())
            .map(|x| (0..m[0].len()).map(|z| (0..m.len()).map(|y| cur[x][y] * m[y][z]).sum()).collect())
            .collect();
    }
    cur
}

/// `I(A; Y | C)` from a joint table `p[c][a][y]`.
fn conditional_mi(p: &[Vec<Vec<f64>>]) -> f64 {
    let mut total = 0.0;
    for pc in p {
        let c: f64 = pc.iter().flatten().sum();
        let pa: Vec<f64> = pc.iter().map(|r| r.iter().sum()).collect();
        let ny = pc[0].len();
        let py: Vec<f64> = (0..ny).map(|y| pc.iter().map(|r| r[y]).sum()).collect();
        for (a, row) in pc.iter().enumerate() {
            for (y, &j) in row.iter().enumerate() {
                if j > 0.0 {
                    total += j * (j * c / (pa[a] * py[y])).log2();
                }
            }
        }
    }
    total
}

/// `(common, private, sum)` bounds from full joint tables.
fn oracle_bounds(spec: &DmcSpec, aux: &Auxiliary) -> (f64, f64, f64) {
    let (u_card, v_card, x_card) = (aux.p_uv.len(), aux.x_given_v.len(), spec.x_card);
    let y1 = chain_channel(&spec.dynamic_chain, 1);
    let ym = chain_channel(&spec.dynamic_chain, spec.dynamic_chain.len());
    let ys = chain_channel(&spec.static_chain, spec.static_chain.len());
    let p = |u: usize, v: usize, x: usize| aux.p_uv[u][v] * aux.x_given_v[v][x];
    // I(A; Y) with A in {U, V}: single conditioning cell
    let mi = |by_u: bool, ch: &Vec<Vec<f64>>| {
        let na = if by_u { u_card } else { v_card };
        let table: Vec<Vec<f64>> = (0..na)
            .map(|a| {
                (0..ch[0].len())
                    .map(|y| {
                        let mut s = 0.0;
                        for u in 0..u_card {
                            for v in 0..v_card {
                                if (by_u && u != a) || (!by_u && v != a) {
                                    continue;
                                }
                                for x in 0..x_card {
                                    s += p(u, v, x) * ch[x][y];
                                }
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        conditional_mi(&[table])
    };
    // I(X; Y1 | A)
    let cmi = |by_u: bool| {
        let na = if by_u { u_card } else { v_card };
        let tables: Vec<Vec<Vec<f64>>> = (0..na)
            .map(|a| {
                (0..x_card)
                    .map(|x| {
                        (0..y1[0].len())
                            .map(|y| {
                                let mut s = 0.0;
                                for u in 0..u_card {
                                    for v in 0..v_card {
                                        if (by_u && u == a) || (!by_u && v == a) {
                                            s += p(u, v, x) * y1[x][y];
                                        }
                                    }
                                }
                                s
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        conditional_mi(&tables)
    };
    let common = mi(true, &ym).min(mi(false, &ys));
    (common, cmi(true), mi(false, &ys) + cmi(false))
}

#[test]
fn block_gains_are_uncorrelated() {
    let cfg = ScenarioConfig::new(1, 1, 4, 2, Csit::None, Csit::None).unwrap();
    let n = 10_000;
    let (mut cross, mut pa, mut pb) = (num_complex::Complex64::new(0.0, 0.0), 0.0, 0.0);
    for seed in 0..n {
        let ch = draw_channels(&cfg, 4, seed).unwrap();
        let a = ch.dynamic_gains[0][0][0];
        let b = ch.dynamic_gains[0][1][0];
        cross += a * b.conj();
        pa += a.norm_sqr();
        pb += b.norm_sqr();
    }
    let rho = cross.norm() / (pa * pb).sqrt();
    assert!(rho < 0.05, "correlation {rho}");
    // and across users within one block
    let (mut cross, mut pa, mut pb) = (num_complex::Complex64::new(0.0, 0.0), 0.0, 0.0);
    for seed in 0..n {
        let ch = draw_channels(&cfg, 4, seed).unwrap();
        let a = ch.static_gains[0][0][0];
        let b = ch.dynamic_gains[0][0][0];
        cross += a * b.conj();
        pa += a.norm_sqr();
        pb += b.norm_sqr();
    }
    assert!(cross.norm() / (pa * pb).sqrt() < 0.05);
}

#[test]
fn transmit_energy_stays_bounded() {
    for id in SchemeId::ALL {
        let p = SchemeParams::new(id, 10, None, None).unwrap();
        let mean = (0..500).map(|s| schemes::run(&p, s).unwrap().mean_tx_energy).sum::<f64>() / 500.0;
        assert!(mean.is_finite() && mean < 25.0, "{id}: {mean}");
    }
}

#[test]
fn rates_monotone_in_snr() {
    for id in SchemeId::ALL {
        let p = SchemeParams::new(id, 10, None, None).unwrap();
        let sweep = SnrSweep::new(vec![-10.0, 0.0, 10.0, 30.0, 50.0], 20, 7).unwrap();
        let table = sim::rate_estimate(&p, &sweep, Execution::Parallel).unwrap();
        for u in 0..table.users.len() {
            for k in 1..table.snr_db.len() {
                assert!(table.rates[k][u].rate >= table.rates[k - 1][u].rate, "{id} user {u}");
            }
        }
    }
}

#[test]
fn slope_error_shrinks_with_trials() {
    let p = SchemeParams::new(SchemeId::ProductSuperposition, 10, None, None).unwrap();
    let stderr = |trials| {
        // low SNR keeps the per-trial slope spread away from rare deep fades
        let sweep = SnrSweep::new(vec![0.0, 20.0], trials, 3).unwrap();
        let table = sim::rate_estimate(&p, &sweep, Execution::Parallel).unwrap();
        sim::slope_report(&p, &table).unwrap().stderr
    };
    let (a, b) = (stderr(1000), stderr(2000));
    for u in 0..a.len() {
        let ratio = b[u] / a[u];
        assert!((ratio / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.3, "user {u}: ratio {ratio}");
    }
}

#[test]
fn grid_refinement_on_random_specs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let spec = random_spec(&mut rng, 2, 2, 2);
        let coarse = dmc::degraded_message_region(&spec, 2, 2, 0.25, Execution::Parallel).unwrap();
        let fine = dmc::degraded_message_region(&spec, 2, 2, 0.125, Execution::Parallel).unwrap();
        assert!(dmc::frontier_dominated(&coarse.frontier, &fine.frontier, 1e-12));
        assert_eq!(coarse.dpi_violations + fine.dpi_violations, 0);
    }
}

#[test]
fn noiseless_counts_give_exact_slopes() {
    for id in SchemeId::ALL {
        let tr = schemes::run(&SchemeParams::new(id, 12, None, None).unwrap(), 4).unwrap();
        let snr = [40.0, 60.0];
        let rates: Vec<Vec<f64>> = snr
            .iter()
            .map(|&s| {
                tr.dof_counts.iter().map(|c| c.symbols as f64 / c.horizon as f64 * sim::db_to_linear(s).log2()).collect()
            })
            .collect();
        for (slope, d) in sim::dof_slope(&snr, &rates).unwrap().iter().zip(tr.dof()) {
            assert!((slope - to_f64(&d)).abs() < 1e-12);
        }
    }
}
