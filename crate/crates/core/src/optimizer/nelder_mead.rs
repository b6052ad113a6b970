use super::{LocalResult, Objective};

/// Adaptive Nelder–Mead (dimension-dependent coefficients), restarted from
/// the best vertex until a restart no longer improves by more than `f_tol`.
pub fn nelder_mead(
    obj: &dyn Objective,
    x0: &[f64],
    step: f64,
    f_tol: f64,
    x_tol: f64,
    max_evals: usize,
) -> LocalResult {
    let mut evals = 0;
    let mut best_x = x0.to_vec();
    let mut best_f = obj.value(x0);
    evals += 1;
    let mut converged = false;
    while evals < max_evals {
        let (x, f, used, done) = run(obj, &best_x, step, f_tol, x_tol, max_evals - evals);
        evals += used;
        let improvement = best_f - f;
        if f < best_f {
            best_f = f;
            best_x = x;
        }
        if !done {
            break;
        }
        if improvement <= f_tol * best_f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    LocalResult {
        x: best_x,
        f: best_f,
        evals,
        converged,
    }
}

fn run(
    obj: &dyn Objective,
    x0: &[f64],
    step: f64,
    f_tol: f64,
    x_tol: f64,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        obj.value(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let f = eval(&x, &mut evals);
        simplex.push((x, f));
    }
    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect()
    };
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_spread = simplex[n].1 - simplex[0].1;
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread <= f_tol * simplex[0].1.abs().max(1.0) && x_spread <= x_tol {
            return (simplex[0].0.clone(), simplex[0].1, evals, true);
        }
        if evals + n + 2 > budget {
            return (simplex[0].0.clone(), simplex[0].1, evals, false);
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / nf;
            }
        }
        let worst = simplex[n].clone();
        let xr = point(&centroid, &worst.0, -alpha);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -alpha * beta);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = point(&centroid, &xr, gamma);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = point(&centroid, &worst.0, gamma);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let x = point(&best, &v.0, delta);
            let f = eval(&x, &mut evals);
            *v = (x, f);
        }
    }
}
