//! Orthonormal multi-level Haar transform.
//!
//! Coefficient layout after the forward transform is
//! `[approx, detail_coarsest, detail_next (2), ..., detail_finest (d/2)]`.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Forward (`inverse = false`) or inverse full-depth Haar transform.
pub fn haar_transform(x: &DVector<f64>, inverse: bool) -> Result<DVector<f64>> {
    let d = x.len();
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(d));
    }
    let mut out: Vec<f64> = x.iter().copied().collect();
    let mut scratch = vec![0.0; d];
    if inverse {
        haar_inverse_in_place(&mut out, &mut scratch);
    } else {
        haar_forward_in_place(&mut out, &mut scratch);
    }
    Ok(DVector::from_vec(out))
}

pub(crate) fn haar_forward_in_place(data: &mut [f64], scratch: &mut [f64]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut len = data.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (data[2 * i], data[2 * i + 1]);
            scratch[i] = (a + b) * s;
            scratch[half + i] = (a - b) * s;
        }
        data[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
}

pub(crate) fn haar_inverse_in_place(data: &mut [f64], scratch: &mut [f64]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut len = 2;
    while len <= data.len() {
        let half = len / 2;
        for i in 0..half {
            let (a, d) = (data[i], data[half + i]);
            scratch[2 * i] = (a + d) * s;
            scratch[2 * i + 1] = (a - d) * s;
        }
        data[..len].copy_from_slice(&scratch[..len]);
        len *= 2;
    }
}
