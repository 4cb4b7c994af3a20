//! Sequential minimal optimization for the epsilon-SVR dual.
//!
//! The dual is posed over 2n variables a = (beta, beta*): minimize
//! 1/2 a'Qa + p'a subject to 0 <= a_t <= C and sum_t s_t a_t = 0, where
//! s_t is +1 on the beta half and -1 on the beta* half, Q_ts =
//! s_t s_s K(x_t, x_s) and p = (eps - y, eps + y). Each step pairs the
//! maximal violator of the KKT conditions with the second-order
//! best partner and solves the two-variable subproblem analytically.
//!
//! Only the beta-half gradient is stored: the two halves always satisfy
//! g[t] + g*[t] = 2 epsilon, so the beta* half is derived on the fly.

use super::cache::RowCache;
use crate::error::{Error, Result};

/// Curvature floor for pairs whose kernel rows are linearly dependent.
const TAU: f64 = 1e-12;

pub(crate) struct SmoSolution {
    /// beta_i - beta*_i for every training point, in input order.
    pub theta: Vec<f64>,
    pub bias: f64,
}

pub(crate) struct SmoProblem<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [f64],
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub tolerance: f64,
    pub max_pair_updates: usize,
    pub cache_rows: usize,
}

struct DualState {
    /// Multipliers (beta, beta*), length 2n.
    a: Vec<f64>,
    /// Gradient of the beta half only, length n.
    g: Vec<f64>,
    two_eps: f64,
    c: f64,
    n: usize,
}

impl DualState {
    /// -s_t * gradient_t, the score every selection rule ranks by.
    #[inline]
    fn violation(&self, t: usize) -> f64 {
        if t < self.n {
            -self.g[t]
        } else {
            self.two_eps - self.g[t - self.n]
        }
    }

    #[inline]
    fn gradient(&self, t: usize) -> f64 {
        if t < self.n {
            self.g[t]
        } else {
            self.two_eps - self.g[t - self.n]
        }
    }

    #[inline]
    fn can_increase(&self, t: usize) -> bool {
        if t < self.n {
            self.a[t] < self.c
        } else {
            self.a[t] > 0.0
        }
    }

    #[inline]
    fn can_decrease(&self, t: usize) -> bool {
        if t < self.n {
            self.a[t] > 0.0
        } else {
            self.a[t] < self.c
        }
    }
}

impl SmoProblem<'_> {
    pub(crate) fn solve(&self) -> Result<SmoSolution> {
        let n = self.x.len();
        let c = self.c;
        let x = self.x;
        let gamma = self.gamma;
        let fill = move |p: usize| kernel_row(x, gamma, p);

        let mut state = DualState {
            a: vec![0.0f64; 2 * n],
            g: (0..n).map(|t| self.epsilon - self.y[t]).collect(),
            two_eps: 2.0 * self.epsilon,
            c,
            n,
        };

        let mut cache = RowCache::new(n, self.cache_rows);
        let mut iterations = 0usize;

        // Runs until the maximal violation gap closes or no feasible
        // direction is left.
        while let Some((i, gap)) = select_first(&state) {
            if gap <= self.tolerance {
                break;
            }
            if iterations >= self.max_pair_updates {
                return Err(Error::NoConvergence {
                    iterations,
                    tolerance: self.tolerance,
                });
            }
            iterations += 1;

            let pi = i % n;
            let si = sign(i, n);
            let j = {
                let row_i = cache.single(pi, fill);
                match select_second(&state, i, row_i) {
                    Some(j) => j,
                    None => break,
                }
            };
            let pj = j % n;
            let sj = sign(j, n);

            let (row_i, row_j) = cache.pair(pi, pj, fill);
            let k_ij = row_i[pj];
            let mut quad = 2.0 - 2.0 * k_ij; // K_ii = K_jj = 1 for RBF
            if quad <= 0.0 {
                quad = TAU;
            }

            let (g_i, g_j) = (state.gradient(i), state.gradient(j));
            let a = &mut state.a;
            let (old_i, old_j) = (a[i], a[j]);
            if si != sj {
                let delta = (-g_i - g_j) / quad;
                let diff = a[i] - a[j];
                a[i] += delta;
                a[j] += delta;
                if diff > 0.0 {
                    if a[j] < 0.0 {
                        a[j] = 0.0;
                        a[i] = diff;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = -diff;
                }
                if diff > 0.0 {
                    if a[i] > c {
                        a[i] = c;
                        a[j] = c - diff;
                    }
                } else if a[j] > c {
                    a[j] = c;
                    a[i] = c + diff;
                }
            } else {
                let delta = (g_i - g_j) / quad;
                let sum = a[i] + a[j];
                a[i] -= delta;
                a[j] += delta;
                if sum > c {
                    if a[i] > c {
                        a[i] = c;
                        a[j] = sum - c;
                    }
                } else if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = sum;
                }
                if sum > c {
                    if a[j] > c {
                        a[j] = c;
                        a[i] = sum - c;
                    }
                } else if a[i] < 0.0 {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }

            let ci = si * (a[i] - old_i);
            let cj = sj * (a[j] - old_j);
            if ci == 0.0 && cj == 0.0 {
                continue;
            }
            // Only the beta half is stored; the beta* half follows from
            // the 2-epsilon identity.
            for (gt, (&ri, &rj)) in state.g.iter_mut().zip(row_i.iter().zip(row_j.iter())) {
                *gt += ci * ri + cj * rj;
            }
        }

        let bias = recover_bias(&state);
        let theta = (0..n).map(|t| state.a[t] - state.a[n + t]).collect();
        Ok(SmoSolution { theta, bias })
    }
}

fn sign(t: usize, n: usize) -> f64 {
    if t < n {
        1.0
    } else {
        -1.0
    }
}

/// First working variable: the maximal KKT violator, i.e. the largest
/// violation score over variables free to increase. The gap to the
/// smallest score over variables free to decrease is the optimality
/// measure. Ties resolve to the lowest index so runs are reproducible.
fn select_first(state: &DualState) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut m_low = f64::INFINITY;
    for t in 0..2 * state.n {
        let v = state.violation(t);
        if state.can_increase(t) && best.is_none_or(|(_, m)| v > m) {
            best = Some((t, v));
        }
        if state.can_decrease(t) && v < m_low {
            m_low = v;
        }
    }
    let (i, m_up) = best?;
    if m_low.is_infinite() {
        return None;
    }
    Some((i, m_up - m_low))
}

/// Second working variable: among variables free to decrease that still
/// violate optimality against i, the one with the largest second-order
/// gain b^2 / quad for the pair (i, t).
fn select_second(state: &DualState, i: usize, row_i: &[f64]) -> Option<usize> {
    let m_up = state.violation(i);
    let mut best: Option<(usize, f64, f64)> = None; // (index, b^2, quad)
    for t in 0..2 * state.n {
        if !state.can_decrease(t) {
            continue;
        }
        let b = m_up - state.violation(t);
        if b <= 0.0 {
            continue;
        }
        // Pair curvature; K_tt = 1 for the RBF kernel, and the cross term
        // reduces to the point kernel for every sign combination.
        let mut quad = 2.0 - 2.0 * row_i[t % state.n];
        if quad <= 0.0 {
            quad = TAU;
        }
        let b2 = b * b;
        // b^2/quad > best_b2/best_quad, cross-multiplied to skip the division.
        if best.is_none_or(|(_, bb2, bq)| b2 * bq > bb2 * quad) {
            best = Some((t, b2, quad));
        }
    }
    best.map(|(t, _, _)| t)
}

/// Bias from the converged gradient: the negative of the average of
/// s_t g_t over free variables, or the midpoint of the bound-derived
/// bracket when nothing is free.
fn recover_bias(state: &DualState) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..2 * state.n {
        let s = sign(t, state.n);
        let sg = s * state.gradient(t);
        if state.a[t] >= state.c {
            if s < 0.0 {
                upper = upper.min(sg);
            } else {
                lower = lower.max(sg);
            }
        } else if state.a[t] <= 0.0 {
            if s > 0.0 {
                upper = upper.min(sg);
            } else {
                lower = lower.max(sg);
            }
        } else {
            n_free += 1;
            sum_free += sg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (upper + lower) / 2.0
    };
    -rho
}

fn kernel_row(x: &[Vec<f64>], gamma: f64, i: usize) -> Vec<f64> {
    let xi = &x[i];
    x.iter()
        .map(|xj| {
            let mut d2 = 0.0;
            for (&a, &b) in xi.iter().zip(xj.iter()) {
                let d = a - b;
                d2 += d * d;
            }
            (-gamma * d2).exp()
        })
        .collect()
}
