//! Full-batch minimizers shared by the classifiers.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Stopping rule and memory for [`lbfgs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsSettings {
    pub max_iterations: usize,
    /// Converged once the largest absolute gradient component drops to this.
    pub tolerance: f64,
    pub memory: usize,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        LbfgsSettings {
            max_iterations: 100,
            tolerance: 1e-4,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loss at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Limited-memory BFGS with a backtracking Armijo line search.
///
/// `objective(x, grad)` returns the loss at `x` and writes its gradient.
/// Every accepted step satisfies the sufficient-decrease condition, so the
/// loss history is non-increasing.
pub fn lbfgs<F>(mut objective: F, x0: Vec<f64>, settings: &LbfgsSettings) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const ARMIJO: f64 = 1e-4;
    const MAX_BACKTRACKS: usize = 50;

    let n = x0.len();
    let mut x = x0;
    let mut grad = vec![0.0; n];
    let mut loss = objective(&x, &mut grad);
    let mut history = vec![loss];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    let mut x_new = vec![0.0; n];
    let mut grad_new = vec![0.0; n];
    let mut direction = vec![0.0; n];
    let mut alpha = vec![0.0; settings.memory.max(1)];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..settings.max_iterations {
        if max_abs(&grad) <= settings.tolerance {
            converged = true;
            break;
        }

        // two-loop recursion: direction = -H * grad
        direction.copy_from_slice(&grad);
        for (k, (s, y, rho)) in pairs.iter().enumerate().rev() {
            alpha[k] = rho * dot(s, &direction);
            for (d, yi) in direction.iter_mut().zip(y) {
                *d -= alpha[k] * yi;
            }
        }
        let gamma = pairs
            .back()
            .map(|(s, y, _)| dot(s, y) / dot(y, y))
            .unwrap_or_else(|| 1.0 / libm::sqrt(dot(&grad, &grad)).max(1.0));
        for d in direction.iter_mut() {
            *d *= gamma;
        }
        for (k, (s, y, rho)) in pairs.iter().enumerate() {
            let beta = rho * dot(y, &direction);
            for (d, si) in direction.iter_mut().zip(s) {
                *d += (alpha[k] - beta) * si;
            }
        }
        for d in direction.iter_mut() {
            *d = -*d;
        }

        let mut slope = dot(&grad, &direction);
        if !(slope < 0.0) {
            // lost descent: restart from steepest descent
            pairs.clear();
            let scale = 1.0 / libm::sqrt(dot(&grad, &grad)).max(1.0);
            for (d, g) in direction.iter_mut().zip(&grad) {
                *d = -g * scale;
            }
            slope = dot(&grad, &direction);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            for ((xn, xi), d) in x_new.iter_mut().zip(&x).zip(&direction) {
                *xn = xi + step * d;
            }
            let candidate = objective(&x_new, &mut grad_new);
            if candidate.is_finite() && candidate <= loss + ARMIJO * step * slope {
                accepted = Some(candidate);
                break;
            }
            step *= 0.5;
        }
        let Some(new_loss) = accepted else {
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * libm::sqrt(dot(&s, &s) * dot(&y, &y)) && sy > 0.0 {
            if pairs.len() == settings.memory.max(1) {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }

        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut grad, &mut grad_new);
        let improvement = loss - new_loss;
        loss = new_loss;
        history.push(loss);
        iterations += 1;
        if improvement == 0.0 && step < 1e-10 {
            break;
        }
    }
    if !converged && max_abs(&grad) <= settings.tolerance {
        converged = true;
    }

    Minimum {
        params: x,
        loss,
        iterations,
        converged,
        history,
    }
}

/// Plain full-batch gradient descent with a fixed learning rate.
pub fn gradient_descent<F>(
    mut objective: F,
    x0: Vec<f64>,
    learning_rate: f64,
    max_iterations: usize,
    tolerance: f64,
) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let mut x = x0;
    let mut grad = vec![0.0; x.len()];
    let mut loss = objective(&x, &mut grad);
    let mut history = vec![loss];
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..max_iterations {
        if max_abs(&grad) <= tolerance {
            converged = true;
            break;
        }
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi -= learning_rate * g;
        }
        loss = objective(&x, &mut grad);
        history.push(loss);
        iterations += 1;
    }
    if !converged && max_abs(&grad) <= tolerance {
        converged = true;
    }
    Minimum {
        params: x,
        loss,
        iterations,
        converged,
        history,
    }
}
