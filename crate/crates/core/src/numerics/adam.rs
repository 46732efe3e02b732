use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

/// Adam moments and hyperparameters for one trainable tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Matrix,
    pub second_moment: Matrix,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Names the tensor in error messages, e.g. `layer 1 weights`.
    pub label: String,
}

impl AdamState {
    pub fn new(shape: (usize, usize), lr: f64, label: impl Into<String>) -> Self {
        AdamState {
            first_moment: Matrix::zeros(shape.0, shape.1),
            second_moment: Matrix::zeros(shape.0, shape.1),
            step: 0,
            lr,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
            label: label.into(),
        }
    }

    /// One Adam step applied to `param` in place.
    pub fn step(&mut self, param: &mut Matrix, grad: &Matrix) -> Result<()> {
        if param.shape() != grad.shape() {
            return Err(Error::shape("adam_update", param.shape(), grad.shape()));
        }
        if param.shape() != self.first_moment.shape() {
            return Err(Error::shape(
                "adam_update",
                param.shape(),
                self.first_moment.shape(),
            ));
        }
        if !grad.is_finite() {
            return Err(Error::Numeric {
                context: format!("gradient of {} at step {}", self.label, self.step + 1),
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let m = self.first_moment.data_mut();
        let v = self.second_moment.data_mut();
        for (((p, &g), m), v) in param
            .data_mut()
            .iter_mut()
            .zip(grad.data())
            .zip(m.iter_mut())
            .zip(v.iter_mut())
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Functional form: returns the updated parameters and advances `state`.
pub fn adam_update(param: &Matrix, grad: &Matrix, state: &mut AdamState) -> Result<Matrix> {
    let mut out = param.clone();
    state.step(&mut out, grad)?;
    Ok(out)
}
