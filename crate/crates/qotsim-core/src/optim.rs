//! Small dense maximizers: BFGS over a handful of angles, and a Nelder-Mead
//! fallback for objectives without a usable gradient.

/// Outcome of a single optimization run.
#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted objective values in order, starting at the initial point.
    pub value_trace: Vec<f64>,
}

/// An objective returning its value together with the gradient.
pub type GradObjective<'a> = &'a dyn Fn(&[f64]) -> (f64, Vec<f64>);

/// BFGS ascent. `objective` returns the value and its gradient.
///
/// Stops when the gradient norm falls below `grad_tol`, when the line search
/// can no longer make progress, or when several consecutive accepted steps
/// improve the value by less than 1e-15 (flat ridges keep the gradient away
/// from zero long after the value has saturated).
pub fn maximize_bfgs(
    objective: GradObjective,
    start: &[f64],
    max_iters: usize,
    grad_tol: f64,
) -> OptimOutcome {
    let n = start.len();
    let mut x = start.to_vec();
    let (mut value, mut grad) = objective(&x);
    let mut value_trace = vec![value];

    // inverse-Hessian approximation
    let mut h = vec![vec![0.0; n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0usize;
    while iterations < max_iters {
        iterations += 1;
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < grad_tol {
            converged = true;
            break;
        }

        // ascent direction d = H g
        let dir: Vec<f64> = h
            .iter()
            .map(|row| row.iter().zip(&grad).map(|(a, b)| a * b).sum())
            .collect();
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope <= 0.0 {
            // H lost positive definiteness; restart from steepest ascent
            for (i, row) in h.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
            continue;
        }

        // backtracking line search with an Armijo condition
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (tv, tg) = objective(&trial);
            if tv >= value + 1e-4 * step * slope {
                accepted = Some((trial, tv, tg));
                break;
            }
            step *= 0.5;
        }
        let Some((new_x, new_value, new_grad)) = accepted else {
            converged = true; // no ascent left at this scale
            break;
        };

        let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        // the minimizer update applies to (s, -y); sy is its curvature test
        let sy: f64 = -s.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h
                .iter()
                .map(|row| row.iter().zip(&y).map(|(a, b)| -a * b).sum())
                .collect();
            let yhy: f64 = -y.iter().zip(&hy).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..n {
                for j in 0..n {
                    h[i][j] +=
                        (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }

        if new_value - value < 1e-15 * value.abs().max(1.0) {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = new_x;
        value = new_value;
        grad = new_grad;
        value_trace.push(value);
        if stalled >= 3 {
            converged = true;
            break;
        }
    }

    OptimOutcome {
        point: x,
        value,
        iterations,
        converged,
        value_trace,
    }
}

/// Nelder-Mead ascent for gradient-free objectives.
pub fn maximize_nelder_mead(
    objective: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    initial_step: f64,
    max_iters: usize,
    tol: f64,
) -> OptimOutcome {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| objective(p)).collect();
    let mut value_trace = vec![values.iter().copied().fold(f64::NEG_INFINITY, f64::max)];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        iterations += 1;
        // order descending by value (best first)
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap());
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        value_trace.push(values[0]);
        let spread = values[0] - values[n];
        let size: f64 = (0..n)
            .map(|i| (simplex[n][i] - simplex[0][i]).abs())
            .fold(0.0, f64::max);
        if spread < tol && size < tol.sqrt() {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|p| p[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + (c - w))
            .collect();
        let fr = objective(&reflect);

        if fr > values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let fe = objective(&expand);
            if fe > fr {
                simplex[n] = expand;
                values[n] = fe;
            } else {
                simplex[n] = reflect;
                values[n] = fr;
            }
        } else if fr > values[n - 1] {
            simplex[n] = reflect;
            values[n] = fr;
        } else {
            let contract: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let fc = objective(&contract);
            if fc > values[n] {
                simplex[n] = contract;
                values[n] = fc;
            } else {
                // shrink toward the best vertex
                let best = simplex[0].clone();
                for k in 1..=n {
                    for i in 0..n {
                        simplex[k][i] = best[i] + 0.5 * (simplex[k][i] - best[i]);
                    }
                    values[k] = objective(&simplex[k]);
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if values[k] > values[best] {
            best = k;
        }
    }
    OptimOutcome {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
        value_trace,
    }
}
