use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowKind {
    Blackman,
    Hann,
    HanningPoisson { alpha: f64 },
}

impl WindowKind {
    /// Window value at normalized position `x` in `[-1, 1]`, peak 1 at 0.
    pub fn shape(&self, x: f64) -> f64 {
        self.raw(x.clamp(-1.0, 1.0)) / self.raw(0.0)
    }

    fn raw(&self, x: f64) -> f64 {
        match *self {
            WindowKind::Blackman => 0.42 + 0.5 * (PI * x).cos() + 0.08 * (2.0 * PI * x).cos(),
            WindowKind::Hann => 0.5 * (1.0 + (PI * x).cos()),
            WindowKind::HanningPoisson { alpha } => {
                0.5 * (1.0 + (PI * x).cos()) * (-alpha * x.abs()).exp()
            }
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowKind::Blackman => write!(f, "blackman"),
            WindowKind::Hann => write!(f, "hann"),
            WindowKind::HanningPoisson { alpha } => write!(f, "hanning_poisson:{alpha}"),
        }
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "blackman" => Ok(WindowKind::Blackman),
            None if s == "hann" => Ok(WindowKind::Hann),
            None if s == "hanning_poisson" => Ok(WindowKind::HanningPoisson { alpha: 2.0 }),
            Some(("hanning_poisson", a)) => a
                .parse()
                .map(|alpha| WindowKind::HanningPoisson { alpha })
                .map_err(|_| Error::Config(format!("bad window alpha {a:?}"))),
            _ => Err(Error::Config(format!("unknown window {s:?}"))),
        }
    }
}

/// Symmetric window of length `n` with its peak (value 1) at `n / 2`.
///
/// Sample `i` sits at `k = i - K`, `K = n / 2`, so odd lengths cover
/// `[-K, K]` and even lengths `[-K, K - 1]`.
pub fn window(kind: WindowKind, n: usize) -> Result<Vec<f64>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("window length {n} < 4")));
    }
    let half = (n / 2) as f64;
    Ok((0..n)
        .map(|i| kind.shape((i as f64 - half) / half))
        .collect())
}

/// Window over `len` samples peaking at `center`, with independent half
/// widths so that it reaches zero support at both frame ends.
pub fn centered_window(kind: WindowKind, len: usize, center: usize) -> Vec<f64> {
    let left = center.max(1) as f64;
    let right = (len - center).max(1) as f64;
    (0..len)
        .map(|i| {
            let k = i as f64 - center as f64;
            kind.shape(if k < 0.0 { k / left } else { k / right })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blackman_center_is_one() {
        let w = window(WindowKind::Blackman, 5).unwrap();
        assert!((w[2] - 1.0).abs() < 1e-15);
        assert!(w[0].abs() < 1e-15);
    }

    #[test]
    fn hanning_poisson_endpoints_vanish() {
        let kind = WindowKind::HanningPoisson { alpha: 2.0 };
        for n in [5, 16, 64, 161] {
            let w = window(kind, n).unwrap();
            assert!(w[0].abs() < 1e-17);
            if n % 2 == 1 {
                assert!(w[n - 1].abs() < 1e-17);
            }
        }
    }

    #[test]
    fn hanning_poisson_decreases_from_center() {
        let alpha = 2.0;
        let w = window(WindowKind::HanningPoisson { alpha }, 64).unwrap();
        // closed form oracle: 0.5 (1 + cos(pi k / K)) exp(-alpha |k| / K)
        for (i, &v) in w.iter().enumerate() {
            let k = i as f64 - 32.0;
            let expect = 0.5 * (1.0 + (PI * k / 32.0).cos()) * (-alpha * k.abs() / 32.0).exp();
            assert!((v - expect).abs() < 1e-15);
        }
        assert!(w[..=32].windows(2).all(|p| p[0] < p[1]));
        assert!(w[32..].windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn peak_index_is_half_length() {
        for kind in [WindowKind::Blackman, WindowKind::HanningPoisson { alpha: 2.0 }] {
            for n in 4..40 {
                let w = window(kind, n).unwrap();
                let argmax = w
                    .iter()
                    .enumerate()
                    .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                    .0;
                assert_eq!(argmax, n / 2);
                assert_eq!(w[n / 2], 1.0);
            }
        }
    }

    #[test]
    fn short_window_rejected() {
        assert!(window(WindowKind::Blackman, 3).is_err());
    }

    #[test]
    fn centered_window_is_asymmetric() {
        let w = centered_window(WindowKind::Blackman, 164, 80);
        assert_eq!(w[80], 1.0);
        assert!(w[0].abs() < 1e-15);
        assert!(w[163] > 0.0);
    }

    #[test]
    fn parse_round_trip() {
        for k in [
            WindowKind::Blackman,
            WindowKind::Hann,
            WindowKind::HanningPoisson { alpha: 1.5 },
        ] {
            assert_eq!(k.to_string().parse::<WindowKind>().unwrap(), k);
        }
        assert!("kaiser".parse::<WindowKind>().is_err());
    }
}
