use super::{LocalResult, Objective};

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 40;
const GRAD_FLOOR: f64 = 1e-9;

/// BFGS on the inverse Hessian with a backtracking Armijo search.
///
/// `value_and_grad` calls are charged `1 + 2·dim` evaluations, matching the
/// central-difference cost.
pub fn bfgs(obj: &dyn Objective, x0: &[f64], f_tol: f64, x_tol: f64, max_evals: usize) -> LocalResult {
    let n = x0.len();
    let grad_cost = 1 + 2 * n;
    let mut evals = 0;
    let mut x = x0.to_vec();
    if max_evals < grad_cost {
        let f = obj.value(&x);
        return LocalResult { x, f, evals: 1, converged: false };
    }
    let (mut f, mut g) = obj.value_and_grad(&x);
    evals += grad_cost;
    let mut h = identity(n);
    let mut first = true;
    let mut small_steps = 0;
    let mut reset = false;
    loop {
        if inf_norm(&g) <= GRAD_FLOOR {
            return LocalResult { x, f, evals, converged: true };
        }
        let mut d = mat_vec(&h, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut t = if first { (0.1 / inf_norm(&d)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            if evals + 1 > max_evals {
                break;
            }
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let ft = obj.value(&trial);
            evals += 1;
            if ft <= f + ARMIJO * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        let Some(x_new) = accepted else {
            if evals < max_evals && !reset {
                // retry along the gradient before giving up
                h = identity(n);
                first = true;
                reset = true;
                continue;
            }
            let converged = evals < max_evals;
            return LocalResult { x, f, evals, converged };
        };
        reset = false;
        if evals + grad_cost > max_evals {
            let f_new = obj.value(&x_new);
            return if f_new < f {
                LocalResult { x: x_new, f: f_new, evals: evals + 1, converged: false }
            } else {
                LocalResult { x, f, evals: evals + 1, converged: false }
            };
        }
        let (f_new, g_new) = obj.value_and_grad(&x_new);
        evals += grad_cost;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if first {
                let scale = sy / dot(&y, &y);
                h = identity(n);
                h.iter_mut().for_each(|v| *v *= scale);
            }
            update_inverse(&mut h, &s, &y, sy);
        }
        first = false;
        let df = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if df <= f_tol * f.abs().max(1.0) || inf_norm(&s) <= x_tol {
            small_steps += 1;
            if small_steps >= 2 {
                return LocalResult { x, f, evals, converged: true };
            }
        } else {
            small_steps = 0;
        }
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`.
fn update_inverse(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
