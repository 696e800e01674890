use crate::error::{Error, Result};

/// All-pole model `gain / A(z)` with `A(z) = 1 + a1 z^-1 + ... + ap z^-p`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPoleModel {
    /// Denominator coefficients, `coeffs[0] == 1`.
    pub coeffs: Vec<f64>,
    pub gain: f64,
}

impl AllPoleModel {
    pub fn identity() -> Self {
        Self {
            coeffs: vec![1.0],
            gain: 1.0,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `|A(e^{jw})|^2` at angular frequency `w` (radians per sample).
    pub fn denominator_power(&self, w: f64) -> f64 {
        let (re, im) = self
            .coeffs
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &a)| {
                let ph = w * k as f64;
                (re + a * ph.cos(), im - a * ph.sin())
            });
        re * re + im * im
    }
}

pub(crate) fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            if lag >= x.len() {
                0.0
            } else {
                x[..x.len() - lag].iter().zip(&x[lag..]).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Levinson-Durbin on autocorrelation lags `r[0..=order]`.
///
/// Returns the coefficients (leading 1, length `order + 1`) and the final
/// prediction error. Recursion stops early, leaving the remaining
/// coefficients at zero, once the error collapses to rounding level.
pub(crate) fn levinson(r: &[f64], order: usize) -> (Vec<f64>, f64) {
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    let floor = r[0] * 1e-14;
    for i in 1..=order {
        let acc: f64 = r[i] + (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = -acc / err;
        if !k.is_finite() || k.abs() >= 1.0 {
            break;
        }
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= floor {
            break;
        }
    }
    (a, err)
}

/// Autocorrelation-method linear prediction of the given order.
pub fn lpc(frame: &[f64], order: usize) -> Result<AllPoleModel> {
    if frame.len() <= 2 * order {
        return Err(Error::DegenerateFrame(format!(
            "frame of {} samples is too short for order {order}",
            frame.len()
        )));
    }
    let r = autocorrelation(frame, order);
    if !(r[0] > 0.0) || !r[0].is_finite() {
        return Err(Error::DegenerateFrame("frame has no energy".into()));
    }
    let (coeffs, err) = levinson(&r, order);
    Ok(AllPoleModel {
        coeffs,
        gain: err.max(0.0).sqrt(),
    })
}
