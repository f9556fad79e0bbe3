//! Noisy Monte Carlo layer on top of the noiseless executors.
//!
//! Each trial draws fresh channels, runs a scheme noiselessly to obtain every
//! receiver's linear decoding map `D`, and evaluates the Gaussian-input
//! log-det rate of the post-cancellation system `D y = sqrt(rho) s + D n`:
//! `sum_i log2(1 + rho / lambda_i(D D^H)) / horizon`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::model::{complex_normal, UserId};
use crate::rational::Pq;
use crate::schemes::{self, ReceiverRecord, SchemeError, SchemeParams};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("slope needs at least two SNR points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// SNR points and Monte Carlo effort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrSweep {
    pub snr_points_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl SnrSweep {
    pub fn new(snr_points_db: Vec<f64>, trials: usize, seed: u64) -> Result<Self, SimError> {
        let sweep = SnrSweep { snr_points_db, trials, seed };
        sweep.validate()?;
        Ok(sweep)
    }

    /// 40 and 60 dB, 2000 trials.
    pub fn default_pair(seed: u64) -> Self {
        SnrSweep { snr_points_db: vec![40.0, 60.0], trials: 2000, seed }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.snr_points_db.is_empty() {
            return Err(SimError::InvalidSweep("no SNR points".into()));
        }
        if self.snr_points_db.iter().any(|x| !x.is_finite()) {
            return Err(SimError::InvalidSweep("SNR points must be finite".into()));
        }
        if self.snr_points_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimError::InvalidSweep("SNR points must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(SimError::InvalidSweep("trials must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Seed for trial `trial`, independent of scheduling order.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.next_u64()
}

/// Gaussian-input rate of one receiver's decoded symbols at linear SNR
/// `rho`, in bits per channel use.
pub fn receiver_rate(record: &ReceiverRecord, horizon: usize, rho: f64) -> f64 {
    noise_eigenvalues(&record.decoder)
        .iter()
        .map(|&l| (1.0 + rho / l.max(f64::MIN_POSITIVE)).log2())
        .sum::<f64>()
        / horizon as f64
}

/// Eigenvalues of the post-decoding noise covariance `D D^H`.
pub fn noise_eigenvalues(decoder: &DMatrix<Complex64>) -> Vec<f64> {
    if decoder.nrows() == 0 {
        return Vec::new();
    }
    let cov = decoder * decoder.adjoint();
    cov.symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Mean rate and standard error for one user at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub rate: f64,
    pub stderr: f64,
}

/// Rates per SNR point (outer index) and user (inner index, statics first).
#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub scheme: String,
    pub users: Vec<String>,
    pub snr_db: Vec<f64>,
    pub rates: Vec<Vec<RatePoint>>,
    /// Per-trial rates, `[trial][snr][user]`, kept for slope statistics.
    #[serde(skip)]
    pub samples: Vec<Vec<Vec<f64>>>,
}

fn users_of(params: &SchemeParams) -> Vec<UserId> {
    (0..params.m_static).map(UserId::Static).chain((0..params.m_dynamic).map(UserId::Dynamic)).collect()
}

fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> RatePoint {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 { values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    RatePoint { rate: mean, stderr: (var / n).sqrt() }
}

/// Monte Carlo rate estimate for every user of a scheme.
pub fn rate_estimate(params: &SchemeParams, sweep: &SnrSweep, exec: Execution) -> Result<RateTable, SimError> {
    sweep.validate()?;
    params.validate()?;
    let users = users_of(params);
    let rhos: Vec<f64> = sweep.snr_points_db.iter().map(|&d| db_to_linear(d)).collect();
    let trials = exec.map_range(0..sweep.trials as u64, |trial| -> Result<Vec<Vec<f64>>, SchemeError> {
        let tr = schemes::run(params, trial_seed(sweep.seed, trial))?;
        Ok(rhos
            .iter()
            .map(|&rho| {
                users
                    .iter()
                    .map(|u| tr.receiver(*u).map_or(0.0, |r| receiver_rate(r, tr.horizon, rho)))
                    .collect()
            })
            .collect())
    });
    let samples = trials.into_iter().collect::<Result<Vec<_>, _>>()?;
    let rates = (0..rhos.len())
        .map(|p| (0..users.len()).map(|u| mean_stderr(samples.iter().map(|s| s[p][u]))).collect())
        .collect();
    Ok(RateTable {
        scheme: params.scheme.name().to_string(),
        users: users.iter().map(ToString::to_string).collect(),
        snr_db: sweep.snr_points_db.clone(),
        rates,
        samples,
    })
}

/// `(R(rho_2) - R(rho_1)) / (log2 rho_2 - log2 rho_1)` per user, between
/// the first and last points.
pub fn dof_slope(snr_db: &[f64], rates: &[Vec<f64>]) -> Result<Vec<f64>, SimError> {
    if snr_db.len() < 2 || rates.len() < 2 {
        return Err(SimError::TooFewPoints(snr_db.len().min(rates.len())));
    }
    let (lo, hi) = (0, snr_db.len() - 1);
    let span = db_to_linear(snr_db[hi]).log2() - db_to_linear(snr_db[lo]).log2();
    Ok(rates[lo].iter().zip(&rates[hi]).map(|(a, b)| (b - a) / span).collect())
}

/// Slope estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeReport {
    pub scheme: String,
    pub params: String,
    pub users: Vec<String>,
    pub snr_db: [f64; 2],
    pub trials: usize,
    pub slopes: Vec<f64>,
    pub stderr: Vec<f64>,
    pub expected: Vec<String>,
}

pub fn slope_report(params: &SchemeParams, table: &RateTable) -> Result<SlopeReport, SimError> {
    let means: Vec<Vec<f64>> = table.rates.iter().map(|row| row.iter().map(|p| p.rate).collect()).collect();
    let slopes = dof_slope(&table.snr_db, &means)?;
    let per_trial: Vec<Vec<f64>> =
        table.samples.iter().map(|s| dof_slope(&table.snr_db, s)).collect::<Result<_, _>>()?;
    let stderr = (0..slopes.len()).map(|u| mean_stderr(per_trial.iter().map(|s| s[u])).stderr).collect();
    Ok(SlopeReport {
        scheme: table.scheme.clone(),
        params: params.describe(),
        users: table.users.clone(),
        snr_db: [table.snr_db[0], table.snr_db[table.snr_db.len() - 1]],
        trials: table.samples.len(),
        slopes,
        stderr,
        expected: params.expected_dof().iter().map(|d| Pq(d).to_string()).collect(),
    })
}

/// `scheme,user,snr_db,rate,stderr`
pub fn write_rates_csv<W: Write>(mut w: W, table: &RateTable) -> io::Result<()> {
    writeln!(w, "scheme,user,snr_db,rate,stderr")?;
    for (snr, row) in table.snr_db.iter().zip(&table.rates) {
        for (user, p) in table.users.iter().zip(row) {
            writeln!(w, "{},{},{},{},{}", table.scheme, user, snr, p.rate, p.stderr)?;
        }
    }
    Ok(())
}

/// One noisy decode: adds unit-variance noise to `sqrt(rho)`-scaled
/// observations, applies the decoder and returns the mean squared symbol
/// error after rescaling.
pub fn noisy_decode_error<R: Rng + ?Sized>(record: &ReceiverRecord, rho: f64, rng: &mut R) -> f64 {
    let amp = rho.sqrt();
    let y: Vec<Complex64> = record.observations.iter().map(|o| o * amp + complex_normal(rng)).collect();
    let y = nalgebra::DVector::from_vec(y);
    let est = &record.decoder * y;
    let n = record.truth.len().max(1) as f64;
    est.iter().zip(&record.truth).map(|(e, s)| (e / amp - s).norm_sqr()).sum::<f64>() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::to_f64;
    use crate::schemes::SchemeId;

    #[test]
    fn sweep_validation() {
        assert!(SnrSweep::new(vec![40.0, 60.0], 1, 0).is_ok());
        assert!(SnrSweep::new(vec![60.0, 40.0], 1, 0).is_err());
        assert!(SnrSweep::new(vec![40.0, 40.0], 1, 0).is_err());
        assert!(SnrSweep::new(vec![40.0], 0, 0).is_err());
        assert!(SnrSweep::new(vec![], 3, 0).is_err());
    }

    #[test]
    fn slope_of_affine_rates_is_exact() {
        let snr = [40.0, 60.0];
        let (d, c) = (0.75, 1.3);
        let rates: Vec<Vec<f64>> = snr.iter().map(|&s| vec![d * db_to_linear(s).log2() + c]).collect();
        let slope = dof_slope(&snr, &rates).unwrap();
        assert!((slope[0] - d).abs() < 1e-12);
        assert!(matches!(dof_slope(&snr[..1], &rates[..1]), Err(SimError::TooFewPoints(1))));
    }

    #[test]
    fn symbol_count_rates_reproduce_dof() {
        for id in SchemeId::ALL {
            let params = SchemeParams::new(id, 6, None, None).unwrap();
            let tr = schemes::run(&params, 1).unwrap();
            let snr = [30.0, 70.0];
            let rates: Vec<Vec<f64>> = snr
                .iter()
                .map(|&s| tr.dof_counts.iter().map(|c| c.symbols as f64 * db_to_linear(s).log2() / c.horizon as f64).collect())
                .collect();
            for (got, want) in dof_slope(&snr, &rates).unwrap().iter().zip(tr.dof()) {
                assert!((got - to_f64(&want)).abs() < 1e-12, "{id}");
            }
        }
    }

    #[test]
    fn rates_positive_and_monotone() {
        for id in SchemeId::ALL {
            let params = SchemeParams::new(id, 6, None, None).unwrap();
            let sweep = SnrSweep::new(vec![0.0, 20.0, 40.0], 8, 3).unwrap();
            let table = rate_estimate(&params, &sweep, Execution::Sequential).unwrap();
            for u in 0..table.users.len() {
                assert!(table.rates[0][u].rate > 0.0 && table.rates[0][u].rate.is_finite(), "{id}");
                for p in 1..3 {
                    assert!(table.rates[p][u].rate >= table.rates[p - 1][u].rate, "{id}");
                }
            }
        }
    }

    #[test]
    fn execution_modes_agree() {
        let params = SchemeParams::new(SchemeId::ProductSuperposition, 5, None, None).unwrap();
        let sweep = SnrSweep::new(vec![10.0, 30.0], 16, 9).unwrap();
        let a = rate_estimate(&params, &sweep, Execution::Sequential).unwrap();
        let b = rate_estimate(&params, &sweep, Execution::Parallel).unwrap();
        assert_eq!(a.rates, b.rates);
    }

    #[test]
    fn noisy_error_matches_noise_covariance() {
        let params = SchemeParams::new(SchemeId::ProductSuperposition, 4, None, None).unwrap();
        let tr = schemes::run(&params, 2).unwrap();
        let rec = tr.receiver(UserId::Dynamic(0)).unwrap();
        let rho = 100.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 20000;
        let mse = (0..n).map(|_| noisy_decode_error(rec, rho, &mut rng)).sum::<f64>() / n as f64;
        let expected = noise_eigenvalues(&rec.decoder).iter().sum::<f64>() / rec.truth.len() as f64 / rho;
        assert!((mse / expected - 1.0).abs() < 0.05, "{mse} vs {expected}");
    }

    #[test]
    fn csv_layout() {
        let params = SchemeParams::new(SchemeId::ProductSuperposition, 5, None, None).unwrap();
        let sweep = SnrSweep::new(vec![0.0, 10.0], 2, 1).unwrap();
        let table = rate_estimate(&params, &sweep, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_rates_csv(&mut buf, &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("scheme,user,snr_db,rate,stderr"));
        assert_eq!(text.lines().count(), 1 + 2 * 2);
    }
}
