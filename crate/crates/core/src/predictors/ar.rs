//! Scalar autoregressive models fitted by direct least squares.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::tensor::{ComplexMatrix, ComplexVector};

/// Relative singular-value cutoff below which the AR design matrix is treated
/// as singular.
pub const AR_RCOND: f64 = 1e-10;

/// Least-squares AR(p) coefficients for `h_t = sum_k a_k h_{t-k}`.
///
/// A singular design matrix yields the zero-order-hold model `[1, 0, ..]`.
pub fn fit_ar(series: &[Complex64], order: usize) -> Result<Vec<Complex64>> {
    if order == 0 {
        return Err(Error::InvalidArgument("AR order must be at least 1".into()));
    }
    if series.len() < 2 * order {
        return Err(Error::InvalidArgument(format!(
            "AR({order}) needs at least {} samples, got {}",
            2 * order,
            series.len()
        )));
    }
    let rows = series.len() - order;
    let design = ComplexMatrix::from_fn(rows, order, |r, k| series[r + order - 1 - k]);
    let target = ComplexVector::from_fn(rows, |r, _| series[r + order]);
    let (coeffs, rank) = lstsq(&design, &target, AR_RCOND)?;
    if rank < order || coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Ok(zoh_coefficients(order));
    }
    Ok(coeffs.iter().copied().collect())
}

pub fn zoh_coefficients(order: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); order];
    c[0] = Complex64::new(1.0, 0.0);
    c
}

/// Runs the recursion `steps` times past the end of `series`, feeding each
/// prediction back as input. Returns the `steps` forecasts in order.
pub fn forecast_ar(series: &[Complex64], coeffs: &[Complex64], steps: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = series.to_vec();
    for _ in 0..steps {
        let n = buf.len();
        let next = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * buf[n - 1 - k])
            .sum::<Complex64>();
        buf.push(next);
    }
    buf.split_off(series.len())
}
