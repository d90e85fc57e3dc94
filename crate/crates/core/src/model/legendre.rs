use super::HamiltonianModel;
use crate::{Error, Result};

/// `sup_y [ -dual·y - f(y) ]` over the box `[-radius, radius]^d`, searched on a
/// grid with `steps` points per axis and then refined around the best node
/// until successive values differ by less than `1e-8` and the local spacing
/// is below `1e-6 max(radius, 1)`.
///
/// Fails when the best node of the initial grid lies on the boundary of the box.
pub fn legendre_sup<F: Fn(&[f64]) -> f64>(f: F, dual: &[f64], radius: f64, steps: usize) -> Result<f64> {
    if steps < 3 {
        return Err(crate::error::invalid("legendre_sup needs at least 3 grid steps"));
    }
    if !(radius > 0.0) {
        return Err(crate::error::invalid("legendre_sup needs a positive radius"));
    }
    let d = dual.len();
    let objective = |y: &[f64]| -> f64 { -dual.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - f(y) };

    let mut center = vec![0.0; d];
    let mut half = radius;
    let mut best_val = f64::NEG_INFINITY;
    let mut prev = f64::NAN;
    let mut y = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for round in 0..200 {
        let spacing = 2.0 * half / (steps - 1) as f64;
        let mut best_idx = vec![0usize; d];
        best_val = f64::NEG_INFINITY;
        let mut best_point = center.clone();
        idx.iter_mut().for_each(|i| *i = 0);
        'grid: loop {
            for k in 0..d {
                y[k] = center[k] - half + spacing * idx[k] as f64;
            }
            let v = objective(&y);
            if v > best_val {
                best_val = v;
                best_idx.copy_from_slice(&idx);
                best_point.copy_from_slice(&y);
            }
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < steps {
                    continue 'grid;
                }
                idx[k] = 0;
            }
            break;
        }
        if round == 0 && best_idx.iter().any(|&i| i == 0 || i == steps - 1) {
            return Err(Error::SupremumAtBoundary { radius });
        }
        if round >= 3 && (best_val - prev).abs() < 1e-8 && spacing < 1e-6 * radius.max(1.0) {
            break;
        }
        prev = best_val;
        center = best_point;
        half = spacing;
    }
    Ok(best_val)
}

/// Numerical Legendre transform `L(x, a) = sup_p [ -a·p - H(x, p) ]`.
pub fn legendre_transform(
    h: &dyn HamiltonianModel,
    x: &[f64],
    a: &[f64],
    p_radius: f64,
    p_steps: usize,
) -> Result<f64> {
    legendre_sup(|p| h.eval_h(x, p), a, p_radius, p_steps)
}
