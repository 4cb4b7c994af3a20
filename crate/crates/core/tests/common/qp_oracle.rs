//! Dense reference solver for the epsilon-SVR dual, independent of the
//! SMO implementation it is used to check.

// Dense matrix arithmetic reads best with explicit indices.
#![allow(clippy::needless_range_loop)]
//!
//! The dual over a = (beta, beta*) in [0, C]^{2n} with sum_i (beta_i -
//! beta*_i) = 0 is solved with a log-barrier interior-point method:
//! repeated equality-constrained Newton steps on
//!
//!   1/2 a'Qa + q'a - mu * sum_t [ln a_t + ln(C - a_t)]
//!
//! with mu shrunk geometrically. The equality multiplier at convergence
//! is the bias of the fitted function.

/// Reference model: dual coefficient differences, bias, and the kernel
/// width, enough to evaluate the fitted function anywhere.
pub struct OracleModel {
    pub theta: Vec<f64>,
    pub bias: f64,
    train_x: Vec<Vec<f64>>,
    gamma: f64,
}

impl OracleModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut acc = self.bias;
        for (xi, &coef) in self.train_x.iter().zip(self.theta.iter()) {
            acc += coef * rbf(xi, x, self.gamma);
        }
        acc
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b.iter()).map(|(&p, &q)| (p - q) * (p - q)).sum();
    (-gamma * d2).exp()
}

/// Solve the dual for one instance. Panics on singular Newton systems;
/// intended for small, well-posed test instances only.
pub fn solve(x: &[Vec<f64>], y: &[f64], c: f64, gamma: f64, epsilon: f64) -> OracleModel {
    let n = x.len();
    let m = 2 * n;

    // Kernel matrix of the training points.
    let mut kernel = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            kernel[i][j] = rbf(&x[i], &x[j], gamma);
        }
    }
    // Q over the doubled variables; s_t = +1 for t < n, -1 otherwise.
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let q_mat = |t: usize, s: usize| sign(t) * sign(s) * kernel[t % n][s % n];
    let q_lin: Vec<f64> = (0..m)
        .map(|t| {
            if t < n {
                epsilon - y[t]
            } else {
                epsilon + y[t - n]
            }
        })
        .collect();

    // Strictly feasible center.
    let mut a = vec![c / 2.0; m];
    let mut nu = 0.0;

    let barrier_value = |a: &[f64], mu: f64| -> f64 {
        let mut quad = 0.0;
        for t in 0..m {
            let mut row = 0.0;
            for s in 0..m {
                row += q_mat(t, s) * a[s];
            }
            quad += a[t] * (0.5 * row + q_lin[t]);
        }
        let log_terms: f64 = a.iter().map(|&v| v.ln() + (c - v).ln()).sum();
        quad - mu * log_terms
    };

    let mut mu = c.max(1.0);
    let mu_floor = 1e-13 * c.max(1.0);
    while mu > mu_floor {
        for _ in 0..60 {
            // Gradient and Hessian of the barrier objective.
            let mut grad = vec![0.0; m];
            for t in 0..m {
                let mut row = 0.0;
                for s in 0..m {
                    row += q_mat(t, s) * a[s];
                }
                grad[t] = row + q_lin[t] - mu * (1.0 / a[t] - 1.0 / (c - a[t]));
            }
            // KKT system [H, c_vec; c_vec', 0] [da; dnu] = [-grad; 0].
            let dim = m + 1;
            let mut sys = vec![vec![0.0; dim + 1]; dim];
            for t in 0..m {
                for s in 0..m {
                    sys[t][s] = q_mat(t, s);
                }
                sys[t][t] += mu * (1.0 / (a[t] * a[t]) + 1.0 / ((c - a[t]) * (c - a[t])));
                sys[t][m] = sign(t);
                sys[m][t] = sign(t);
                sys[t][dim] = -grad[t];
            }
            sys[m][dim] = -(0..m).map(|t| sign(t) * a[t]).sum::<f64>();
            let delta = solve_linear(&mut sys);

            let decrement: f64 = (0..m).map(|t| -delta[t] * grad[t]).sum();
            // Step length keeping a strictly interior.
            let mut step: f64 = 1.0;
            for t in 0..m {
                if delta[t] < 0.0 {
                    step = step.min(-a[t] / delta[t]);
                } else if delta[t] > 0.0 {
                    step = step.min((c - a[t]) / delta[t]);
                }
            }
            step = (0.99 * step).min(1.0);
            let f0 = barrier_value(&a, mu);
            let mut accepted = false;
            for _ in 0..50 {
                let trial: Vec<f64> = (0..m).map(|t| a[t] + step * delta[t]).collect();
                if trial.iter().all(|&v| v > 0.0 && v < c)
                    && barrier_value(&trial, mu) <= f0 + 1e-12 * f0.abs().max(1.0)
                {
                    a = trial;
                    nu = delta[m];
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || decrement.abs() < 1e-14 * (1.0 + mu) {
                break;
            }
        }
        mu *= 0.2;
    }

    let theta: Vec<f64> = (0..n).map(|i| a[i] - a[n + i]).collect();

    // The equality multiplier nu estimates the bias but inherits the
    // centering error of the last accepted Newton step. Given the (very
    // accurate) theta, the exact bias minimizes the one-dimensional
    // convex tube loss sum_i max(0, |r_i - b| - eps) over r_i = y_i -
    // fit_i: take the midpoint of its zero-subgradient interval.
    let _ = nu;
    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..n).map(|j| theta[j] * kernel[j][i]).sum::<f64>())
        .collect();
    let bias = tube_loss_minimizer(&residuals, epsilon);

    OracleModel {
        theta,
        bias,
        train_x: x.to_vec(),
        gamma,
    }
}

/// Midpoint of the minimizing interval of b -> sum_i max(0, |r_i - b| - eps).
/// The subgradient counts residuals below b - eps minus those above
/// b + eps and is a nondecreasing step function of b.
fn tube_loss_minimizer(residuals: &[f64], epsilon: f64) -> f64 {
    let mut events: Vec<f64> = residuals
        .iter()
        .flat_map(|&r| [r - epsilon, r + epsilon])
        .collect();
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup();
    let subgradient = |b: f64| -> i64 {
        let below = residuals.iter().filter(|&&r| r < b - epsilon).count() as i64;
        let above = residuals.iter().filter(|&&r| r > b + epsilon).count() as i64;
        below - above
    };
    // Walk the segments between events; the zero-subgradient region is
    // contiguous by convexity.
    let mut left = events[0];
    let mut right = *events.last().unwrap();
    for pair in events.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        let g = subgradient(mid);
        if g < 0 {
            left = pair[1];
        }
        if g > 0 {
            right = right.min(pair[0]);
            break;
        }
    }
    // A single-event crossing leaves left == right; otherwise take the
    // midpoint of the flat stretch.
    0.5 * (left + right.max(left))
}

/// Gaussian elimination with partial pivoting on an augmented matrix;
/// returns the solution column.
fn solve_linear(sys: &mut [Vec<f64>]) -> Vec<f64> {
    let n = sys.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| sys[a][col].abs().partial_cmp(&sys[b][col].abs()).unwrap())
            .unwrap();
        sys.swap(col, pivot);
        let p = sys[col][col];
        assert!(p.abs() > 1e-300, "singular KKT system in QP oracle");
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = sys[row][col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                sys[row][k] -= factor * sys[col][k];
            }
        }
    }
    (0..n).map(|i| sys[i][n] / sys[i][i]).collect()
}
