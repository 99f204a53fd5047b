//! Unconstrained BFGS with central-difference gradients.
//!
//! Box constraints are handled by the callers through smooth
//! reparameterizations; the objective may return `+inf` (or NaN) outside the
//! admissible region and the line search backs off.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub f_tol: f64,
    pub fd_step: f64,
    /// Largest coordinate move of a single line-search trial.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            f_tol: 1e-12,
            fd_step: 1e-5,
            max_step: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Option<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let up = f(&probe);
        probe[i] = x[i] - step;
        let down = f(&probe);
        probe[i] = x[i];
        let d = (up - down) / (2.0 * step);
        if !d.is_finite() {
            return None;
        }
        g.push(d);
    }
    Some(g)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimizes `f` from `x0`. Returns `None` if `f(x0)` is not finite.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> Option<Minimum> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return None;
    }
    let mut g = gradient(&f, &x, opts.fd_step)?;
    let mut h = identity(n);
    let mut fresh_h = true;

    for iter in 0..opts.max_iter {
        if inf_norm(&g) < opts.grad_tol {
            return Some(Minimum {
                x,
                f: fx,
                iterations: iter,
                converged: true,
            });
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>()).collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            h = identity(n);
            fresh_h = true;
            dir = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let scale = inf_norm(&dir);
        let mut t = if scale > opts.max_step {
            opts.max_step / scale
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh_h {
                // no descent even along the gradient: at the attainable precision
                return Some(Minimum {
                    x,
                    f: fx,
                    iterations: iter,
                    converged: true,
                });
            }
            h = identity(n);
            fresh_h = true;
            continue;
        };
        let Some(g_new) = gradient(&f, &x_new, opts.fd_step) else {
            return Some(Minimum {
                x,
                f: fx,
                iterations: iter,
                converged: false,
            });
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;

        if df.abs() <= opts.f_tol * (1.0 + fx.abs()) && inf_norm(&s) < 1e-8 {
            return Some(Minimum {
                x,
                f: fx,
                iterations: iter + 1,
                converged: true,
            });
        }
        if sy > 1e-12 {
            bfgs_update(&mut h, &s, &y, sy);
            fresh_h = false;
        }
    }
    let converged = inf_norm(&g) < opts.grad_tol;
    Some(Minimum {
        x,
        f: fx,
        iterations: opts.max_iter,
        converged,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

// H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i][j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
