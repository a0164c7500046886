//! Adam optimizer and the step-halving learning-rate schedule.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Completed steps.
    pub t: u64,
    #[serde(skip)]
    pub m: Vec<f64>,
    #[serde(skip)]
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

/// Learning rate at (zero-based) `epoch`: halved every `epochs / 5`
/// epochs. Budgets under five epochs use a constant rate.
pub fn learning_rate(lr0: f64, epoch: usize, epochs: usize) -> f64 {
    match epoch.checked_div(epochs / 5) {
        Some(halvings) => lr0 * 0.5f64.powi(halvings as i32),
        None => lr0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        assert_eq!(learning_rate(1.0, 0, 500), 1.0);
        assert_eq!(learning_rate(1.0, 99, 500), 1.0);
        assert_eq!(learning_rate(1.0, 100, 500), 0.5);
        assert_eq!(learning_rate(1.0, 450, 500), 1.0 / 16.0);
        assert_eq!(learning_rate(0.1, 3, 4), 0.1);
    }

    #[test]
    fn quadratic_converges() {
        // f(x) = (x - 3)^2, minimizer 3.
        let mut x = [0.0];
        let mut opt = Adam::new(1);
        for _ in 0..2000 {
            let g = [2.0 * (x[0] - 3.0)];
            opt.step(&mut x, &g, 0.05);
        }
        assert!((x[0] - 3.0).abs() < 1e-4, "{}", x[0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut x = [1.0, -1.0];
        let mut opt = Adam::new(2);
        opt.step(&mut x, &[10.0, -0.001], 0.1);
        assert!((x[0] - 0.9).abs() < 1e-9);
        assert!((x[1] + 0.9).abs() < 1e-4);
    }
}
