//! Perfect CSIT for the static users, delayed CSIT for the dynamic users.

use super::superposition::channel_inverse;
use super::*;

/// Unit vector orthogonal to `g`.
fn null_beam(g: &DVector<C>) -> DVector<C> {
    let n = g.len();
    let mut e = DVector::zeros(n);
    e[n - 1] = C::new(1.0, 0.0);
    let proj = g * (g.dotc(&e) / C::new(g.norm_squared(), 0.0));
    let b = e - proj;
    let norm = b.norm();
    b / C::new(norm, 0.0)
}

/// One static and one dynamic user over two blocks of length `t`.
///
/// Block 1 sends `u_t + b v_t` with `g^H b = 0`, `u_0 = 0`, `v_0 = 1`, so
/// the static user sees `g^H u_t` cleanly and the dynamic user reads
/// `h_1^H b` off slot 0. Block 2 sends `u_bar [1, h_1^H u_1, ...]` on one
/// antenna: the dynamic user recovers and cancels its interference, the
/// static user gets `u_bar` and a second equation for each `u_t`.
pub fn run_hybrid_pd_2phase(ch: &ChannelBlockSet, t: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::HybridPd2Phase, t, None, None)?;
    require(ch, Layout { horizon: 2 * t, m_static: 1, m_dynamic: 1, n_tx: 2, t_dynamic: Some(t), t_static: None })?;
    let mut rng = symbol_rng(ch);
    let u = pairs(&mut rng, t - 1);
    let v = symbols(&mut rng, t - 1);
    let u_bar = symbols(&mut rng, 1)[0];

    let g = ch.static_gain(0, 0);
    let b = null_beam(g);
    let h1 = herm2(ch.dynamic_gain(0, 0));

    let mut tx = DMatrix::zeros(ch.n_tx, 2 * t);
    tx.set_column(0, &b);
    for k in 1..t {
        let mut x = &b * v[k - 1];
        x[0] += u[k - 1][0];
        x[1] += u[k - 1][1];
        tx.set_column(k, &x);
    }
    tx[(0, t)] = u_bar;
    for k in 1..t {
        tx[(0, t + k)] = u_bar * dot2(h1, u[k - 1]);
    }

    // static receiver
    let g_rows: Vec<[C; 2]> = (1..t).map(|k| herm2(ch.static_gain(0, k))).collect();
    let g2 = ch.static_gain(0, t)[0].conj();
    let static_obs = observe(ch, &tx, UserId::Static(0));
    let u_bar_est = static_obs[t] / g2;
    let c2 = g2 * u_bar_est;
    let rows: Vec<[[C; 2]; 2]> = g_rows.iter().map(|r| [*r, h1]).collect();
    let rank = rows.iter().map(|r| rank2(*r)).min().unwrap_or(2);
    let mut static_truth = vec![u_bar];
    static_truth.extend(u.iter().flatten());
    let stat = Receiver {
        user: UserId::Static(0),
        truth: static_truth,
        equivalent_channels: vec![equivalent("g u_bar", &[c2]), equivalent("h_1", &h1)],
        side_info: vec!["outdated gain h_1 of the dynamic user".to_string()],
        solves: vec![ledger("u_bar", 1, 1, 1)?, ledger("u_t solve", 2 * (t - 1), 2 * (t - 1), rank)?],
        decode: Box::new(move |y: &[C]| {
            let mut out = vec![y[t] / g2];
            for k in 1..t {
                out.extend(solve2(rows[k - 1], [y[k], y[t + k] / c2]));
            }
            out
        }),
    };

    // dynamic receiver
    let dyn_obs = observe(ch, &tx, UserId::Dynamic(0));
    let hb = dyn_obs[0];
    let e2 = dyn_obs[t];
    let dynamic = Receiver {
        user: UserId::Dynamic(0),
        truth: v,
        equivalent_channels: vec![equivalent("h_1^H b", &[hb]), equivalent("h_2 u_bar", &[e2])],
        side_info: Vec::new(),
        solves: vec![ledger("v_t", 2 * (t - 1), t - 1, 1)?],
        decode: Box::new(move |y: &[C]| (1..t).map(|k| (y[k] - y[t + k] / e2) / hb).collect()),
    };
    Ok(finish(params, ch, tx, vec![stat, dynamic], None))
}

/// `m_static` static users and two dynamic users over three blocks of
/// length `t`.
///
/// Each block sends `[U, U V]` where `U = G^+ S + P W` inverts the static
/// channels (`P` projects onto their null space, `W` is a random fill that
/// keeps `U` full rank), so every static user reads two symbols from the
/// pilot slots while the dynamic users estimate `h_i^H U`. The data slots
/// run two-user alignment over `V`: user 1's data, user 2's data, then the
/// sum of the overheard combinations on the first row.
pub fn run_hybrid_pd_multi(ch: &ChannelBlockSet, t: usize, m_static: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::HybridPdMulti, t, None, Some(m_static))?;
    require(ch, Layout {
        horizon: 3 * t,
        m_static,
        m_dynamic: 2,
        n_tx: m_static + 2,
        t_dynamic: Some(t),
        t_static: None,
    })?;
    let data = t - 2;
    let mut rng = symbol_rng(ch);
    let s: Vec<DMatrix<C>> =
        (0..3).map(|_| DMatrix::from_column_slice(m_static, 2, &symbols(&mut rng, 2 * m_static))).collect();
    let u = pairs(&mut rng, data);
    let v = pairs(&mut rng, data);

    let mut pilots = Vec::new();
    for (blk, s_blk) in s.iter().enumerate() {
        let gains: Vec<&DVector<C>> = (0..m_static).map(|j| ch.static_gain(j, blk * t)).collect();
        let inverse = channel_inverse(&gains)?;
        let g = DMatrix::from_fn(m_static, ch.n_tx, |r, c| gains[r][c].conj());
        let projector = DMatrix::identity(ch.n_tx, ch.n_tx) - &inverse * g;
        let fill = DMatrix::from_column_slice(ch.n_tx, 2, &symbols(&mut rng, 2 * ch.n_tx));
        pilots.push(&inverse * s_blk + projector * fill);
    }
    // h_i^H U_b as seen through the pilot slots
    let eq = |i: usize, blk: usize| -> [C; 2] {
        let h = ch.dynamic_gain(i, blk * t);
        [h.dotc(&pilots[blk].column(0)), h.dotc(&pilots[blk].column(1))]
    };

    let mut tx = DMatrix::zeros(ch.n_tx, 3 * t);
    for (blk, p) in pilots.iter().enumerate() {
        tx.columns_mut(blk * t, 2).copy_from(p);
    }
    let column = |p: &DMatrix<C>, x: [C; 2]| p.column(0) * x[0] + p.column(1) * x[1];
    for k in 0..data {
        tx.set_column(2 + k, &column(&pilots[0], u[k]));
        tx.set_column(t + 2 + k, &column(&pilots[1], v[k]));
        let combined = dot2(eq(1, 0), u[k]) + dot2(eq(0, 1), v[k]);
        let zero = C::zero();
        tx.set_column(2 * t + 2 + k, &column(&pilots[2], [combined, zero]));
    }

    let mut receivers = Vec::new();
    for j in 0..m_static {
        let truth: Vec<C> = s.iter().flat_map(|m| [m[(j, 0)], m[(j, 1)]]).collect();
        receivers.push(Receiver {
            user: UserId::Static(j),
            truth,
            equivalent_channels: Vec::new(),
            side_info: Vec::new(),
            solves: vec![ledger("pilot slots", 6, 6, 1)?],
            decode: Box::new(move |y: &[C]| (0..3).flat_map(|b| [y[b * t], y[b * t + 1]]).collect()),
        });
    }
    for (me, other) in [(0usize, 1usize), (1, 0)] {
        let obs = observe(ch, &tx, UserId::Dynamic(me));
        let estimate = |b: usize| [obs[b * t], obs[b * t + 1]];
        let rows = [estimate(me), eq(other, me)];
        let c3 = estimate(2)[0];
        let truth = if me == 0 { &u } else { &v };
        receivers.push(Receiver {
            user: UserId::Dynamic(me),
            truth: truth.iter().flatten().copied().collect(),
            equivalent_channels: (0..3).map(|b| equivalent(&format!("h^H U block {}", b + 1), &estimate(b))).collect(),
            side_info: vec![format!("equivalent channel of dynamic user {} in block {}", other + 1, me + 1)],
            solves: vec![
                ledger("pilot estimation", 6, 6, 2)?,
                ledger("data solve", 2 * data, 2 * data, rank2(rows))?,
            ],
            decode: Box::new(move |y: &[C]| {
                (0..data)
                    .flat_map(|k| {
                        let aligned = y[2 * t + 2 + k] / c3 - y[other * t + 2 + k];
                        solve2(rows, [y[me * t + 2 + k], aligned])
                    })
                    .collect()
            }),
        });
    }
    Ok(finish(params, ch, tx, receivers, None))
}
