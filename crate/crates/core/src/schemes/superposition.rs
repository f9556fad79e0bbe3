//! Product superposition, alone and on top of zero-forcing to the static
//! users.

use super::*;

/// One static and one dynamic user over a single block of length `t`.
///
/// A single antenna sends `x_s [1, x_d]`: the dynamic user reads the
/// equivalent channel `h x_s` off the pilot slot and decodes `x_d`
/// coherently, the static user decodes `x_s` from the pilot slot with its
/// known gain.
pub fn run_product_superposition(ch: &ChannelBlockSet, t: usize) -> Result<SchemeTranscript, SchemeError> {
    let params = SchemeParams::new(SchemeId::ProductSuperposition, t, None, None)?;
    require(ch, Layout { horizon: t, m_static: 1, m_dynamic: 1, n_tx: 1, t_dynamic: Some(t), t_static: None })?;
    let mut rng = symbol_rng(ch);
    let xs = symbols(&mut rng, 1)[0];
    let xd = symbols(&mut rng, t - 1);

    let mut tx = DMatrix::zeros(ch.n_tx, t);
    tx[(0, 0)] = xs;
    for (k, d) in xd.iter().enumerate() {
        tx[(0, k + 1)] = xs * d;
    }

    let dynamic_obs = observe(ch, &tx, UserId::Dynamic(0));
    let h_bar = dynamic_obs[0];
    let dynamic = Receiver {
        user: UserId::Dynamic(0),
        truth: xd,
        equivalent_channels: vec![equivalent("h x_s", &[h_bar])],
        side_info: Vec::new(),
        solves: vec![ledger("data", t - 1, t - 1, 1)?],
        decode: Box::new(move |y: &[C]| y[1..].iter().map(|v| v / h_bar).collect()),
    };

    let g = ch.static_gain(0, 0)[0].conj();
    let stat = Receiver {
        user: UserId::Static(0),
        truth: vec![xs],
        equivalent_channels: vec![equivalent("g", &[g])],
        side_info: Vec::new(),
        solves: vec![ledger("pilot slot", 1, 1, 1)?],
        decode: Box::new(move |y: &[C]| vec![y[0] / g]),
    };
    Ok(finish(params, ch, tx, vec![stat, dynamic], None))
}

/// Orthonormal-direction zero-forcing beams: column `j` is orthogonal to
/// every static channel other than `g_j`, scaled to unit norm.
pub(crate) fn zero_forcing_beams(gains: &[&DVector<C>]) -> Result<DMatrix<C>, SchemeError> {
    let pinv = channel_inverse(gains)?;
    let mut beams = pinv.clone();
    for mut col in beams.column_iter_mut() {
        let n = col.norm();
        col /= C::new(n, 0.0);
    }
    Ok(beams)
}

/// Right inverse `G^H (G G^H)^{-1}` of the stacked static channels
/// `G = [g_1^H; ...]`, so that `G * inverse = I`.
pub(crate) fn channel_inverse(gains: &[&DVector<C>]) -> Result<DMatrix<C>, SchemeError> {
    let n_tx = gains[0].len();
    let g = DMatrix::from_fn(gains.len(), n_tx, |r, c| gains[r][c].conj());
    let sv = g.clone().svd(false, false).singular_values;
    let (max, min) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let cond = max / min;
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(SchemeError::IllConditioned(cond));
    }
    let gram = &g * g.adjoint();
    let inv = gram.try_inverse().ok_or(SchemeError::IllConditioned(f64::INFINITY))?;
    Ok(g.adjoint() * inv)
}

/// All `m_static` static users plus dynamic user `i`, perfect static CSIT,
/// no dynamic CSIT.
///
/// The transmitter sends `[u, u v]` with `u = sum_j b_j u_j`, where `b_j`
/// is zero-forced against the other static users. Each static user reads
/// `g_j^H b_j u_j` in the first slot; dynamic user `i` estimates `h_i^H u`
/// there and decodes `v` over the remaining `t - 1` slots.
pub fn run_hybrid_pn(
    ch: &ChannelBlockSet,
    t: usize,
    m_static: usize,
    i: usize,
) -> Result<SchemeTranscript, SchemeError> {
    let mut params = SchemeParams::new(SchemeId::HybridPn, t, None, Some(m_static))?;
    params.m_dynamic = ch.dynamic_gains.len();
    params.dynamic_user = i;
    params.validate()?;
    require(ch, Layout { horizon: t, m_static, m_dynamic: i + 1, n_tx: m_static + 1, t_dynamic: Some(t), t_static: None })?;
    let gains: Vec<&DVector<C>> = (0..m_static).map(|j| ch.static_gain(j, 0)).collect();
    let beams = zero_forcing_beams(&gains)?;

    let mut rng = symbol_rng(ch);
    let u_sym = symbols(&mut rng, m_static);
    let v = symbols(&mut rng, t - 1);
    let u: DVector<C> = &beams * DVector::from_column_slice(&u_sym);

    let mut tx = DMatrix::zeros(ch.n_tx, t);
    tx.set_column(0, &u);
    for (k, vk) in v.iter().enumerate() {
        tx.set_column(k + 1, &(&u * *vk));
    }

    let mut receivers = Vec::new();
    let mut residual = 0.0f64;
    for j in 0..m_static {
        let effective = gains[j].dotc(&beams.column(j));
        let y0 = gains[j].dotc(&u);
        residual = residual.max((y0 - effective * u_sym[j]).norm());
        receivers.push(Receiver {
            user: UserId::Static(j),
            truth: vec![u_sym[j]],
            equivalent_channels: vec![equivalent("g_j^H b_j", &[effective])],
            side_info: vec!["effective beam gain g_j^H b_j".to_string()],
            solves: vec![ledger("pilot slot", 1, 1, 1)?],
            decode: Box::new(move |y: &[C]| vec![y[0] / effective]),
        });
    }

    let obs = observe(ch, &tx, UserId::Dynamic(i));
    let h_bar = obs[0];
    receivers.push(Receiver {
        user: UserId::Dynamic(i),
        truth: v,
        equivalent_channels: vec![equivalent("h_i^H u", &[h_bar])],
        side_info: Vec::new(),
        solves: vec![ledger("data", t - 1, t - 1, 1)?],
        decode: Box::new(move |y: &[C]| y[1..].iter().map(|x| x / h_bar).collect()),
    });
    Ok(finish(params, ch, tx, receivers, Some(residual)))
}
