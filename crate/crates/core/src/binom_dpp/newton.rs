//! Damped Newton ascent shared by the mode solvers.

use crate::symlin::{cholesky, SymMatrix, Vector};

/// Value, gradient and Hessian at a point; `None` outside the support.
pub(crate) type Eval<'a> = dyn Fn(&[f64]) -> Option<(f64, Vec<f64>, SymMatrix)> + 'a;

pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub hessian_nd: bool,
}

pub(crate) enum NewtonFailure {
    /// Iteration budget exhausted or no acceptable step; carries the last point.
    Stalled { x: Vec<f64>, grad_norm: f64 },
    Infeasible,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `(−H + τI)s = g`, raising `τ` until the system is SPD.
fn ascent_step(grad: &[f64], hess: &SymMatrix) -> (Vec<f64>, bool) {
    let neg = hess.scale(-1.0).expect("finite Hessian");
    let g = Vector::new(grad.to_vec()).expect("finite gradient");
    if let Ok(f) = cholesky(&neg) {
        return (f.solve(&g).expect("dims").into_inner(), true);
    }
    let mut tau = 1e-8 * neg.max_abs_diagonal().max(1.0);
    loop {
        let shifted = neg.add(&SymMatrix::identity(neg.dim()).unwrap().scale(tau).unwrap()).unwrap();
        if let Ok(f) = cholesky(&shifted) {
            return (f.solve(&g).expect("dims").into_inner(), false);
        }
        tau *= 10.0;
    }
}

/// Gaussian elimination with partial pivoting for the few-dimensional
/// indefinite systems near a saddle; `None` when singular.
fn newton_step(grad: &[f64], hess: &SymMatrix) -> Option<Vec<f64>> {
    let n = grad.len();
    let mut a: Vec<Vec<f64>> = hess.rows();
    let mut b: Vec<f64> = grad.iter().map(|x| -x).collect();
    let scale = hess.max_abs_diagonal().max(hess.max_abs_off_diagonal());
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= 1e-14 * scale {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let m = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Below this gradient norm an indefinite Hessian gets a plain Newton step
/// first, so the iteration settles on the nearby stationary point.
const LOCAL_GRAD: f64 = 1e-6;

pub(crate) fn damped_newton(
    eval: &Eval<'_>,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome, NewtonFailure> {
    let mut x = x0.to_vec();
    let (mut f, mut g, mut h) = eval(&x).ok_or(NewtonFailure::Infeasible)?;
    let mut gn = norm(&g);
    for it in 0..=max_iter {
        if gn < tol {
            let hessian_nd = cholesky(&h.scale(-1.0).expect("finite")).is_ok();
            return Ok(NewtonOutcome {
                x,
                grad_norm: gn,
                iterations: it,
                hessian_nd,
            });
        }
        if it == max_iter {
            break;
        }
        let (step, nd) = ascent_step(&g, &h);
        if !nd && gn < LOCAL_GRAD {
            if let Some(s) = newton_step(&g, &h) {
                let trial: Vec<f64> = x.iter().zip(&s).map(|(a, s)| a + s).collect();
                if let Some((f2, g2, h2)) = eval(&trial) {
                    let gn2 = norm(&g2);
                    if gn2 < gn {
                        (x, f, g, h, gn) = (trial, f2, g2, h2, gn2);
                        continue;
                    }
                }
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            if let Some((f2, g2, h2)) = eval(&trial) {
                let gn2 = norm(&g2);
                if f2 > f || gn2 < gn {
                    x = trial;
                    f = f2;
                    g = g2;
                    h = h2;
                    gn = gn2;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(NewtonFailure::Stalled { x, grad_norm: gn })
}
