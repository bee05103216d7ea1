//! Pilot-symbol-level link model: `Y = H S + N`.
//!
//! The channel is flat and constant over the pilot block, so one matrix
//! problem stands in for every OFDM subcarrier.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mat::{CMatrix, Complex};

/// Antenna counts, pilot length, operating SNR and seed of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Base-station receive antennas (P).
    pub num_rx: usize,
    /// Transmitting users / antennas (K).
    pub num_users: usize,
    /// Pilot symbols per sequence (tau).
    pub pilot_len: usize,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_rx: 8,
            num_users: 8,
            pilot_len: 8,
            snr_db: 10.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_rx == 0 {
            return Err(Error::config("rx", "must be at least 1"));
        }
        if self.num_users == 0 {
            return Err(Error::config("tx", "must be at least 1"));
        }
        if self.pilot_len < self.num_users {
            return Err(Error::config(
                "pilot_len",
                format!("must be at least the number of users ({})", self.num_users),
            ));
        }
        if !self.pilot_len.is_power_of_two() {
            return Err(Error::config("pilot_len", "must be a power of two"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::config("snr", "must not be NaN"));
        }
        Ok(())
    }

    /// Length of the real-vectorized channel, `2 P K`.
    pub fn search_dim(&self) -> usize {
        2 * self.num_rx * self.num_users
    }
}

/// K x tau matrix of mutually orthogonal BPSK pilot rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix(CMatrix);

impl PilotMatrix {
    /// Wraps an arbitrary pilot matrix. Used for non-BPSK fixtures.
    pub fn from_matrix(s: CMatrix) -> Self {
        Self(s)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn num_users(&self) -> usize {
        self.0.rows()
    }

    pub fn len(&self) -> usize {
        self.0.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.0.cols() == 0
    }
}

/// First `k` rows of the `tau x tau` Sylvester-Hadamard matrix.
pub fn make_pilots(k: usize, tau: usize) -> Result<PilotMatrix> {
    if tau == 0 || !tau.is_power_of_two() {
        return Err(Error::config("pilot_len", format!("{tau} is not a power of two")));
    }
    if k == 0 || k > tau {
        return Err(Error::config(
            "tx",
            format!("{k} users cannot share {tau} orthogonal pilots"),
        ));
    }
    // Sylvester: entry (i, j) is (-1)^popcount(i & j).
    let data = (0..k)
        .flat_map(|i| {
            (0..tau).map(move |j| {
                let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                Complex::new(sign, 0.0)
            })
        })
        .collect();
    Ok(PilotMatrix(CMatrix::from_vec(k, tau, data)?))
}

/// True channel of one Monte Carlo run, P x K.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization(CMatrix);

impl ChannelRealization {
    pub fn new(h: CMatrix) -> Self {
        Self(h)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    /// P x tau received pilot block.
    pub y: CMatrix,
    pub noise_var: f64,
}

/// One circularly-symmetric complex Gaussian sample of the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, variance: f64) -> CMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng, variance)).collect();
    CMatrix::from_vec(rows, cols, data).expect("gaussian samples are finite")
}

/// i.i.d. unit-variance Rayleigh channel.
pub fn draw_channel<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> ChannelRealization {
    ChannelRealization(gaussian_matrix(rng, cfg.num_rx, cfg.num_users, 1.0))
}

/// Per-entry noise variance for unit pilot energy and unit channel power.
/// `+inf` dB yields zero noise.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// `Y = H S + N`. No noise is drawn when the noise variance is zero.
pub fn transmit<R: Rng + ?Sized>(
    h: &ChannelRealization,
    s: &PilotMatrix,
    snr_db: f64,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    let clean = h.matrix().matmul(s.matrix())?;
    let noise_var = noise_variance(snr_db);
    let y = if noise_var > 0.0 {
        let n = gaussian_matrix(rng, clean.rows(), clean.cols(), noise_var);
        clean.add(&n)?
    } else {
        clean
    };
    Ok(ReceivedSignal { y, noise_var })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn sylvester_base_step() {
        let s = make_pilots(2, 2).unwrap();
        let want = CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]).unwrap();
        assert_eq!(s.matrix(), &want);
    }

    #[test]
    fn pilot_gram_is_exact() {
        for (k, tau) in [(8, 8), (3, 4), (1, 1), (5, 16)] {
            let s = make_pilots(k, tau).unwrap();
            let gram = s.matrix().matmul(&s.matrix().hermitian()).unwrap();
            assert_eq!(gram, CMatrix::identity(k).scale_real(tau as f64));
            assert!(s
                .matrix()
                .as_slice()
                .iter()
                .all(|z| z.im == 0.0 && z.re.abs() == 1.0));
        }
    }

    #[test]
    fn pilot_config_errors() {
        assert!(matches!(make_pilots(3, 5), Err(Error::Config { .. })));
        assert!(matches!(make_pilots(9, 8), Err(Error::Config { .. })));
        assert!(matches!(make_pilots(0, 8), Err(Error::Config { .. })));
    }

    #[test]
    fn noise_variance_values() {
        assert_eq!(noise_variance(0.0), 1.0);
        assert!((noise_variance(10.0) - 0.1).abs() < 1e-15);
        assert!((noise_variance(20.0) - 0.01).abs() < 1e-15);
        assert_eq!(noise_variance(f64::INFINITY), 0.0);
    }

    #[test]
    fn channel_power_is_unit() {
        let cfg = ScenarioConfig {
            num_rx: 1,
            num_users: 1,
            ..Default::default()
        };
        let mut rng = stream(1);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| draw_channel(&cfg, &mut rng).matrix()[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn degenerate_channel_dims() {
        let cfg = ScenarioConfig {
            num_rx: 1,
            num_users: 1,
            ..Default::default()
        };
        let h = draw_channel(&cfg, &mut stream(4));
        assert_eq!(h.matrix().shape(), (1, 1));
        assert!(h.matrix()[(0, 0)].is_finite());
    }

    #[test]
    fn draws_are_deterministic() {
        let cfg = ScenarioConfig::default();
        let s = make_pilots(8, 8).unwrap();
        let run = |seed| {
            let mut rng = stream(seed);
            let h = draw_channel(&cfg, &mut rng);
            let y = transmit(&h, &s, 10.0, &mut rng).unwrap();
            (h, y)
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn noiseless_transmit_is_exact() {
        let cfg = ScenarioConfig::default();
        let s = make_pilots(8, 8).unwrap();
        let mut rng = stream(2);
        let h = draw_channel(&cfg, &mut rng);
        let rx = transmit(&h, &s, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(rx.noise_var, 0.0);
        assert_eq!(rx.y, h.matrix().matmul(s.matrix()).unwrap());
    }

    #[test]
    fn noise_variance_statistics() {
        let cfg = ScenarioConfig {
            num_rx: 1,
            num_users: 1,
            pilot_len: 1,
            ..Default::default()
        };
        let s = make_pilots(1, 1).unwrap();
        let mut rng = stream(8);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let h = draw_channel(&cfg, &mut rng);
            let rx = transmit(&h, &s, 10.0, &mut rng).unwrap();
            acc += (rx.y[(0, 0)] - h.matrix()[(0, 0)]).norm_sqr();
        }
        let var = acc / n as f64;
        assert!((var - 0.1).abs() < 0.1 * 0.02, "noise variance {var}");
    }

    #[test]
    fn transmit_shape_error() {
        let h = ChannelRealization::new(CMatrix::zeros(4, 3));
        let s = make_pilots(2, 2).unwrap();
        assert!(matches!(
            transmit(&h, &s, 10.0, &mut stream(0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn scenario_validation() {
        assert!(ScenarioConfig::default().validate().is_ok());
        let bad = ScenarioConfig {
            pilot_len: 4,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "pilot_len"));
    }
}
