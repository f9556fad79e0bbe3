//! Retrospective interference alignment over super-symbols, with and
//! without pilots, and the three-phase static/dynamic scheme.

use super::*;

fn set2(tx: &mut DMatrix<C>, col: usize, v: [C; 2]) {
    tx[(0, col)] = v[0];
    tx[(1, col)] = v[1];
}

/// Two static users with delayed CSIT over three super-symbols of length
/// `t_static`.
///
/// Phase 1 carries two symbols per use for user 1, phase 2 for user 2;
/// phase 3 sends on one antenna the sum of the two overheard combinations,
/// which each user strips of its own overheard part to obtain a second
/// equation for its symbols.
pub fn run_mat_static(ch: &ChannelBlockSet, t_static: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::MatStatic, t_static, Some(t_static), None)?;
    if ch.static_gains.len() != 2 {
        return precondition(format!("mat-static needs exactly 2 static users, channel has {}", ch.static_gains.len()));
    }
    let tp = t_static;
    require(ch, Layout { horizon: 3 * tp, m_static: 2, m_dynamic: 0, n_tx: 2, t_dynamic: None, t_static: Some(tp) })?;
    let mut rng = symbol_rng(ch);
    let u = pairs(&mut rng, tp);
    let v = pairs(&mut rng, tp);
    let g = |j: usize, time: usize| herm2(ch.static_gain(j, time));

    let mut tx = DMatrix::zeros(ch.n_tx, 3 * tp);
    for k in 0..tp {
        set2(&mut tx, k, u[k]);
        set2(&mut tx, tp + k, v[k]);
        // both gains are from blocks that ended before phase 3
        tx[(0, 2 * tp + k)] = dot2(g(1, k), u[k]) + dot2(g(0, tp + k), v[k]);
    }

    let mut receivers = Vec::new();
    for (me, other) in [(0usize, 1usize), (1, 0)] {
        // user 1 solves u from phase 1; user 2 solves v from phase 2
        let own_phase = me * tp;
        let overheard_phase = other * tp;
        let rows: Vec<[[C; 2]; 2]> = (0..tp).map(|k| [g(me, own_phase + k), g(other, own_phase + k)]).collect();
        let c3: Vec<C> = (0..tp).map(|k| ch.static_gain(me, 2 * tp + k)[0].conj()).collect();
        let rank = rows.iter().map(|r| rank2(*r)).min().unwrap_or(2);
        let truth = if me == 0 { &u } else { &v };
        receivers.push(Receiver {
            user: UserId::Static(me),
            truth: truth.iter().flatten().copied().collect(),
            equivalent_channels: (0..tp).map(|k| equivalent("phase-3 gain", &[c3[k]])).collect(),
            side_info: vec![format!("outdated gain of static user {}", other + 1)],
            solves: vec![ledger("super-symbol solve", 2 * tp, 2 * tp, rank)?],
            decode: Box::new(move |y: &[C]| {
                (0..tp)
                    .flat_map(|k| {
                        let aligned = y[2 * tp + k] / c3[k] - y[overheard_phase + k];
                        solve2(rows[k], [y[own_phase + k], aligned])
                    })
                    .collect()
            }),
        });
    }
    Ok(finish(params, ch, tx, receivers, None))
}

/// Two dynamic users with delayed CSIT over three blocks of length `t`.
///
/// Each block opens with an identity pilot over two uses from which the
/// users read their channel; the remaining `t - 2` uses run the same
/// alignment as [`run_mat_static`].
pub fn run_mat_dynamic(ch: &ChannelBlockSet, t: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::MatDynamic, t, None, None)?;
    require(ch, Layout { horizon: 3 * t, m_static: 0, m_dynamic: 2, n_tx: 2, t_dynamic: Some(t), t_static: None })?;
    let data = t - 2;
    let mut rng = symbol_rng(ch);
    let u = pairs(&mut rng, data);
    let v = pairs(&mut rng, data);
    let h = |i: usize, block: usize| herm2(ch.dynamic_gain(i, block * t));

    let mut tx = DMatrix::zeros(ch.n_tx, 3 * t);
    for b in 0..3 {
        tx[(0, b * t)] = C::new(1.0, 0.0);
        tx[(1, b * t + 1)] = C::new(1.0, 0.0);
    }
    for k in 0..data {
        set2(&mut tx, 2 + k, u[k]);
        set2(&mut tx, t + 2 + k, v[k]);
        tx[(0, 2 * t + 2 + k)] = dot2(h(1, 0), u[k]) + dot2(h(0, 1), v[k]);
    }

    let mut receivers = Vec::new();
    for (me, other) in [(0usize, 1usize), (1, 0)] {
        let obs = observe(ch, &tx, UserId::Dynamic(me));
        let estimate = |b: usize| [obs[b * t], obs[b * t + 1]];
        // the other user's pilot estimate from the block this user solves in
        let fed = h(other, me);
        let rows = [estimate(me), fed];
        let c3 = estimate(2)[0];
        let truth = if me == 0 { &u } else { &v };
        receivers.push(Receiver {
            user: UserId::Dynamic(me),
            truth: truth.iter().flatten().copied().collect(),
            equivalent_channels: (0..3).map(|b| equivalent(&format!("block {} channel", b + 1), &estimate(b))).collect(),
            side_info: vec![format!("pilot estimate of dynamic user {} in block {}", other + 1, me + 1)],
            solves: vec![
                ledger("pilot estimation", 6, 6, 2)?,
                ledger("data solve", 2 * data, 2 * data, rank2(rows))?,
            ],
            decode: Box::new(move |y: &[C]| {
                let own = me * t + 2;
                let overheard = other * t + 2;
                (0..data)
                    .flat_map(|k| {
                        let aligned = y[2 * t + 2 + k] / c3 - y[overheard + k];
                        solve2(rows, [y[own + k], aligned])
                    })
                    .collect()
            }),
        });
    }
    Ok(finish(params, ch, tx, receivers, None))
}

/// One static and one dynamic user with delayed CSIT over three
/// super-symbols of length `t_static`, each made of `t_static / t` blocks.
///
/// Per block the pilots are diagonal matrices of static symbols. Super-
/// symbol 1 carries static data `U`, super-symbol 2 dynamic data `V`, and
/// super-symbol 3 replicates on both antennas the combined interference
/// `h1~^H U + g2~^H V` scaled by a fresh diagonal pilot.
pub fn run_delayed_3phase(ch: &ChannelBlockSet, t: usize, t_static: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::Delayed3Phase, t, Some(t_static), None)?;
    require(ch, Layout {
        horizon: 3 * t_static,
        m_static: 1,
        m_dynamic: 1,
        n_tx: 2,
        t_dynamic: Some(t),
        t_static: Some(t_static),
    })?;
    let ell = t_static / t;
    let data = t - 2;
    let mut rng = symbol_rng(ch);
    let start = |phase: usize, n: usize| phase * t_static + n * t;

    struct Block {
        pilot1: [C; 2],
        pilot2: [C; 2],
        pilot3: [C; 2],
        u: Vec<[C; 2]>,
        v: Vec<[C; 2]>,
    }
    let blocks: Vec<Block> = (0..ell)
        .map(|_| Block {
            pilot1: pairs(&mut rng, 1)[0],
            pilot2: pairs(&mut rng, 1)[0],
            pilot3: pairs(&mut rng, 1)[0],
            u: pairs(&mut rng, data),
            v: pairs(&mut rng, data),
        })
        .collect();
    let scale = |d: [C; 2], x: [C; 2]| [d[0] * x[0], d[1] * x[1]];

    // equivalent channels through the diagonal pilots
    let h1_eq: Vec<[C; 2]> =
        (0..ell).map(|n| scale(herm2(ch.dynamic_gain(0, start(0, n))), blocks[n].pilot1)).collect();
    let g2_eq: Vec<[C; 2]> =
        (0..ell).map(|n| scale(herm2(ch.static_gain(0, start(1, n))), blocks[n].pilot2)).collect();

    let mut tx = DMatrix::zeros(ch.n_tx, 3 * t_static);
    for (n, blk) in blocks.iter().enumerate() {
        for (phase, pilot) in [blk.pilot1, blk.pilot2, blk.pilot3].into_iter().enumerate() {
            let s = start(phase, n);
            tx[(0, s)] = pilot[0];
            tx[(1, s + 1)] = pilot[1];
        }
        for k in 0..data {
            set2(&mut tx, start(0, n) + 2 + k, scale(blk.pilot1, blk.u[k]));
            set2(&mut tx, start(1, n) + 2 + k, scale(blk.pilot2, blk.v[k]));
            let combined = dot2(h1_eq[n], blk.u[k]) + dot2(g2_eq[n], blk.v[k]);
            set2(&mut tx, start(2, n) + 2 + k, scale(blk.pilot3, [combined, combined]));
        }
    }

    // static receiver: pilot symbols with its own gains, then U
    let mut static_truth = Vec::new();
    for blk in &blocks {
        static_truth.extend(blk.pilot1.iter().chain(&blk.pilot2).chain(&blk.pilot3));
        static_truth.extend(blk.u.iter().flatten());
    }
    let static_obs = observe(ch, &tx, UserId::Static(0));
    let own = |phase: usize, n: usize| herm2(ch.static_gain(0, start(phase, n)));
    let pilot_est = |phase: usize, n: usize| {
        let g = own(phase, n);
        let s = start(phase, n);
        [static_obs[s] / g[0], static_obs[s + 1] / g[1]]
    };
    let mut static_rows = Vec::new();
    let mut static_c3 = Vec::new();
    let mut static_eq = Vec::new();
    for n in 0..ell {
        let p1 = pilot_est(0, n);
        let p3 = pilot_est(2, n);
        let g1_eq = scale(own(0, n), p1);
        let h1_known = scale(herm2(ch.dynamic_gain(0, start(0, n))), p1);
        let g3_eq = scale(own(2, n), p3);
        static_rows.push([g1_eq, h1_known]);
        static_c3.push(g3_eq[0] + g3_eq[1]);
        static_eq.push(equivalent("g1~", &g1_eq));
        static_eq.push(equivalent("h1~", &h1_known));
    }
    let static_rank = static_rows.iter().map(|r| rank2(*r)).min().unwrap_or(2);
    let gains: Vec<[[C; 2]; 3]> = (0..ell).map(|n| [own(0, n), own(1, n), own(2, n)]).collect();
    let stat = Receiver {
        user: UserId::Static(0),
        truth: static_truth,
        equivalent_channels: static_eq,
        side_info: vec!["outdated gain of the dynamic user".to_string()],
        solves: vec![
            ledger("diagonal pilots", 6 * ell, 6 * ell, 1)?,
            ledger("U solve", ell * data + ell * data, 2 * ell * data, static_rank)?,
        ],
        decode: Box::new(move |y: &[C]| {
            let mut out = Vec::new();
            for n in 0..ell {
                for phase in 0..3 {
                    let s = start(phase, n);
                    out.push(y[s] / gains[n][phase][0]);
                    out.push(y[s + 1] / gains[n][phase][1]);
                }
                for k in 0..data {
                    let combined = y[start(2, n) + 2 + k] / static_c3[n];
                    let aligned = combined - y[start(1, n) + 2 + k];
                    out.extend(solve2(static_rows[n], [y[start(0, n) + 2 + k], aligned]));
                }
            }
            out
        }),
    };

    // dynamic receiver: V from its own equivalent channel and the
    // fed-forward static equivalent channel
    let dyn_obs = observe(ch, &tx, UserId::Dynamic(0));
    let est = |phase: usize, n: usize| [dyn_obs[start(phase, n)], dyn_obs[start(phase, n) + 1]];
    let mut dyn_rows = Vec::new();
    let mut dyn_c3 = Vec::new();
    let mut dyn_eq = Vec::new();
    for n in 0..ell {
        let h2 = est(1, n);
        let h3 = est(2, n);
        dyn_rows.push([h2, g2_eq[n]]);
        dyn_c3.push(h3[0] + h3[1]);
        dyn_eq.push(equivalent("h1~", &est(0, n)));
        dyn_eq.push(equivalent("h2~", &h2));
        dyn_eq.push(equivalent("h3~", &h3));
    }
    let dyn_rank = dyn_rows.iter().map(|r| rank2(*r)).min().unwrap_or(2);
    let dynamic = Receiver {
        user: UserId::Dynamic(0),
        truth: blocks.iter().flat_map(|b| b.v.iter().flatten().copied()).collect(),
        equivalent_channels: dyn_eq,
        side_info: vec!["static equivalent channel g2~ of super-symbol 2".to_string()],
        solves: vec![
            ledger("pilot estimation", 6 * ell, 6 * ell, 2)?,
            ledger("V solve", ell * data + ell * data, 2 * ell * data, dyn_rank)?,
        ],
        decode: Box::new(move |y: &[C]| {
            let mut out = Vec::new();
            for n in 0..ell {
                for k in 0..data {
                    let combined = y[start(2, n) + 2 + k] / dyn_c3[n];
                    let aligned = combined - y[start(0, n) + 2 + k];
                    out.extend(solve2(dyn_rows[n], [y[start(1, n) + 2 + k], aligned]));
                }
            }
            out
        }),
    };
    Ok(finish(params, ch, tx, vec![stat, dynamic], None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn mat_static_two_thirds() {
        for tp in [1, 5, 10] {
            let p = SchemeParams::new(SchemeId::MatStatic, tp, Some(tp), None).unwrap();
            let tr = run(&p, 1).unwrap();
            assert!(tr.decode_ok(), "{}", tr.summary_line());
            assert_eq!(tr.dof(), vec![rat(2, 3), rat(2, 3)]);
        }
    }

    #[test]
    fn mat_dynamic_pilot_cost() {
        let tr = run(&SchemeParams::new(SchemeId::MatDynamic, 10, None, None).unwrap(), 2).unwrap();
        assert!(tr.decode_ok());
        assert_eq!(tr.dof(), vec![rat(8, 15), rat(8, 15)]);
        let tr = run(&SchemeParams::new(SchemeId::MatDynamic, 3, None, None).unwrap(), 2).unwrap();
        assert_eq!(tr.dof(), vec![rat(2, 9), rat(2, 9)]);
        assert!(SchemeParams::new(SchemeId::MatDynamic, 2, None, None).is_err());
    }

    #[test]
    fn delayed_three_phase() {
        let tr = run(&SchemeParams::new(SchemeId::Delayed3Phase, 15, Some(30), None).unwrap(), 4).unwrap();
        assert!(tr.decode_ok());
        assert_eq!(tr.dof(), vec![rat(32, 45), rat(26, 45)]);
        let tr = run(&SchemeParams::new(SchemeId::Delayed3Phase, 3, Some(3), None).unwrap(), 4).unwrap();
        assert!(tr.decode_ok());
        assert_eq!(tr.dof(), vec![rat(8, 9), rat(2, 9)]);
        let static_rx = tr.receiver(UserId::Static(0)).unwrap();
        let u_solve = &static_rx.solves[1];
        assert_eq!((u_solve.equations, u_solve.unknowns), (2, 2));
        assert!(matches!(
            SchemeParams::new(SchemeId::Delayed3Phase, 15, Some(20), None),
            Err(SchemeError::Precondition(_))
        ));
    }
}
