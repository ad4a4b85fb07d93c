//! Central finite differences, used as the oracle for every analytic
//! gradient in the model code.

use super::NumericsError;

/// Central-difference gradient of `f` at `p`:
/// `(f(p + eps e_k) - f(p - eps e_k)) / (2 eps)` per coordinate.
pub fn finite_diff_grad<F>(mut f: F, p: &[f64], eps: f64) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(eps > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "eps must be > 0, got {eps}"
        )));
    }
    let mut point = p.to_vec();
    let mut grad = Vec::with_capacity(p.len());
    for k in 0..p.len() {
        let orig = point[k];
        point[k] = orig + eps;
        let hi = f(&point);
        point[k] = orig - eps;
        let lo = f(&point);
        point[k] = orig;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(NumericsError::NonFinite(format!(
                "f evaluated non-finite near coordinate {k}"
            )));
        }
        grad.push((hi - lo) / (2.0 * eps));
    }
    Ok(grad)
}
