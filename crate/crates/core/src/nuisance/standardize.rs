use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::scalar::Scalar;

/// Column-centered, unit-variance copy of a design, stored transposed so each
/// covariate is a contiguous row. Constant columns get scale 0 and are
/// excluded from the solvers.
pub(crate) struct Standardized<T> {
    pub xt: Array2<T>,
    pub x_mean: Array1<T>,
    pub x_scale: Array1<T>,
}

impl<T: Scalar> Standardized<T> {
    pub fn new(x: ArrayView2<'_, T>) -> Self {
        let (r, q) = x.dim();
        let rf = T::from_count(r);
        let x_mean = x.sum_axis(Axis(0)).mapv(|s| s / rf);
        let mut xt = Array2::<T>::zeros((q, r));
        let mut x_scale = Array1::<T>::zeros(q);
        for j in 0..q {
            let mut row = xt.row_mut(j);
            row.assign(&x.column(j));
            row.mapv_inplace(|v| v - x_mean[j]);
            let ss = row.dot(&row);
            let sd = (ss / rf).sqrt();
            // relative cutoff: columns that are constant up to rounding
            let tiny = T::epsilon() * T::lit(16.0) * (x_mean[j].abs() + T::one());
            if sd > tiny {
                row.mapv_inplace(|v| v / sd);
                x_scale[j] = sd;
            } else {
                row.fill(T::zero());
            }
        }
        Self { xt, x_mean, x_scale }
    }

    pub fn q(&self) -> usize {
        self.xt.nrows()
    }

    pub fn r(&self) -> usize {
        self.xt.ncols()
    }

    pub fn live(&self) -> Vec<bool> {
        self.x_scale.iter().map(|&s| s > T::zero()).collect()
    }

    /// Raw-scale coefficients (intercept first) from standardized slopes
    /// `gamma`, given the response location and scale.
    pub fn to_raw(&self, gamma: ArrayView1<'_, T>, y_mean: T, y_scale: T) -> Array1<T> {
        let q = self.q();
        let mut out = Array1::<T>::zeros(q + 1);
        let mut intercept = y_mean;
        for j in 0..q {
            if self.x_scale[j] > T::zero() {
                let b = y_scale * gamma[j] / self.x_scale[j];
                out[j + 1] = b;
                intercept -= b * self.x_mean[j];
            }
        }
        out[0] = intercept;
        out
    }
}

/// Mean and population standard deviation of `y`, and the standardized copy.
/// A constant response gets scale 0 and a zero vector.
pub(crate) fn standardize_response<T: Scalar>(y: ArrayView1<'_, T>) -> (Array1<T>, T, T) {
    let rf = T::from_count(y.len());
    let mean = y.sum() / rf;
    let centered = y.mapv(|v| v - mean);
    let sd = (centered.dot(&centered) / rf).sqrt();
    let tiny = T::epsilon() * T::lit(16.0) * (mean.abs() + T::min_positive_value().sqrt());
    if sd > tiny {
        (centered.mapv(|v| v / sd), mean, sd)
    } else {
        (Array1::zeros(y.len()), mean, T::zero())
    }
}
