use crate::{Error, Result};

fn check(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::dim(format!(
            "metric inputs have lengths {} and {}",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::contract("metrics need at least one value"));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let s: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(s / y.len() as f64)
}

/// Root mean square error.
pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let s: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / y.len() as f64).sqrt())
}

/// MAE and RMSE over every element of paired row sets.
pub fn mae_rmse(y: &[Vec<f64>], y_hat: &[Vec<f64>]) -> Result<(f64, f64)> {
    if y.len() != y_hat.len() {
        return Err(Error::dim(format!(
            "{} rows against {}",
            y.len(),
            y_hat.len()
        )));
    }
    let flat = |rows: &[Vec<f64>]| rows.concat();
    let (a, b) = (flat(y), flat(y_hat));
    Ok((mae(&a, &b)?, rmse(&a, &b)?))
}
