//! Krylov solvers.
//!
//! [`skew_minres`] solves `(M + S) x = b` with `M` symmetric positive
//! definite (inverted exactly by the caller) and `S` skew-symmetric. In the
//! `M` inner product `M⁻¹(M + S) = I + K` with `K` skew-adjoint, so the
//! Lanczos recurrence is two-term and the Hessenberg matrix is tridiagonal
//! with unit diagonal.
//!
//! [`gmres`] is restarted GMRES with right preconditioning for general
//! nonsymmetric systems.

/// Convergence record of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Relative residual `‖b − A x‖₂ / ‖b‖₂` of the returned iterate.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Operator pieces for [`skew_minres`].
pub trait SplitOperator {
    /// `out = M u`.
    fn apply_sym(&mut self, u: &[f64], out: &mut [f64]);
    /// `out = S u`.
    fn apply_skew(&mut self, u: &[f64], out: &mut [f64]);
    /// `out = M⁻¹ r`.
    fn solve_sym(&mut self, r: &[f64], out: &mut [f64]);
}

/// Minimal-residual skew-Lanczos iteration. `x` holds the initial guess
/// and receives the solution. Restarts from the current iterate when the
/// recurrence residual drifts from the true one.
pub fn skew_minres<O: SplitOperator>(
    op: &mut O,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> SolveStats {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return SolveStats { iterations: 0, residual: 0.0, converged: true };
    }
    let mut t1 = vec![0.0; n];
    let mut t2 = vec![0.0; n];
    let mut r = vec![0.0; n];
    let true_residual = |op: &mut O, x: &[f64], r: &mut [f64], t1: &mut [f64], t2: &mut [f64]| {
        op.apply_sym(x, t1);
        op.apply_skew(x, t2);
        for k in 0..n {
            r[k] = b[k] - t1[k] - t2[k];
        }
        norm(r) / bnorm
    };

    let mut total = 0;
    let mut res = true_residual(op, x, &mut r, &mut t1, &mut t2);
    let mut v_prev = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut mv_prev = vec![0.0; n];
    let mut mv = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut mw = vec![0.0; n];
    let mut d_prev2 = vec![0.0; n];
    let mut d_prev = vec![0.0; n];
    let mut ad_prev2 = vec![0.0; n];
    let mut ad_prev = vec![0.0; n];
    let mut av = vec![0.0; n];

    while res > tol && total < max_iter {
        // v₁ = M⁻¹ r / ‖M⁻¹ r‖_M
        op.solve_sym(&r, &mut v);
        op.apply_sym(&v, &mut mv);
        let beta1 = dot(&v, &mv).max(0.0).sqrt();
        if beta1 == 0.0 {
            break;
        }
        v.iter_mut().for_each(|e| *e /= beta1);
        mv.iter_mut().for_each(|e| *e /= beta1);
        v_prev.iter_mut().for_each(|e| *e = 0.0);
        mv_prev.iter_mut().for_each(|e| *e = 0.0);
        d_prev.iter_mut().for_each(|e| *e = 0.0);
        d_prev2.iter_mut().for_each(|e| *e = 0.0);
        ad_prev.iter_mut().for_each(|e| *e = 0.0);
        ad_prev2.iter_mut().for_each(|e| *e = 0.0);
        let mut beta = 0.0;
        let (mut c1, mut s1) = (1.0, 0.0); // rotation j−1
        let (mut c2, mut s2) = (1.0, 0.0); // rotation j−2
        let mut phi = beta1;
        let mut stalled = true;

        while total < max_iter {
            total += 1;
            // S v_j, then w = K v_j + β_j v_{j−1}
            op.apply_skew(&v, &mut t1);
            for k in 0..n {
                av[k] = mv[k] + t1[k];
            }
            op.solve_sym(&t1, &mut w);
            for k in 0..n {
                w[k] += beta * v_prev[k];
            }
            op.apply_sym(&w, &mut mw);
            let beta_next = dot(&w, &mw).max(0.0).sqrt();

            // column [−β_j, 1, β_{j+1}] through previous rotations
            let h_up = -beta;
            let r_far = s2 * h_up;
            let t = c2 * h_up;
            let r_near = c1 * t + s1;
            let u = -s1 * t + c1;
            let rho = u.hypot(beta_next);
            let (c, s) = (u / rho, beta_next / rho);
            let alpha = c * phi;
            phi *= -s;

            for k in 0..n {
                let d = (v[k] - r_near * d_prev[k] - r_far * d_prev2[k]) / rho;
                let ad = (av[k] - r_near * ad_prev[k] - r_far * ad_prev2[k]) / rho;
                d_prev2[k] = d_prev[k];
                d_prev[k] = d;
                ad_prev2[k] = ad_prev[k];
                ad_prev[k] = ad;
                x[k] += alpha * d;
                r[k] -= alpha * ad;
            }
            stalled = false;
            res = norm(&r) / bnorm;
            if res <= tol || beta_next == 0.0 {
                break;
            }
            c2 = c1;
            s2 = s1;
            c1 = c;
            s1 = s;
            beta = beta_next;
            std::mem::swap(&mut v_prev, &mut v);
            std::mem::swap(&mut mv_prev, &mut mv);
            for k in 0..n {
                v[k] = w[k] / beta;
                mv[k] = mw[k] / beta;
            }
        }
        let recurrence = res;
        res = true_residual(op, x, &mut r, &mut t1, &mut t2);
        if stalled || (res > tol && res >= 0.99 * recurrence.max(tol) && total >= max_iter) {
            break;
        }
    }
    SolveStats { iterations: total, residual: res, converged: res <= tol }
}

/// Restarted GMRES(m) with right preconditioning. `apply` computes
/// `out = A u`, `precond` computes `out ≈ A⁻¹ r`.
pub fn gmres<A, P>(
    mut apply: A,
    mut precond: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> SolveStats
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return SolveStats { iterations: 0, residual: 0.0, converged: true };
    }
    let m = restart.max(1);
    let mut basis: Vec<Vec<f64>> = vec![vec![0.0; n]; m + 1];
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut total = 0;

    let residual = |x: &[f64], r: &mut [f64], apply: &mut A| {
        apply(x, r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        norm(r) / bnorm
    };
    let mut res = residual(x, &mut r, &mut apply);

    while res > tol && total < max_iter {
        let beta = res * bnorm;
        for k in 0..n {
            basis[0][k] = r[k] / beta;
        }
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            if total >= max_iter {
                break;
            }
            total += 1;
            precond(&basis[j], &mut z);
            apply(&z, &mut w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                h[i][j] = hij;
                for k in 0..n {
                    w[k] -= hij * basis[i][k];
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            if hn > 0.0 {
                for k in 0..n {
                    basis[j + 1][k] = w[k] / hn;
                }
            }
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let rho = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / rho;
            sn[j] = h[j + 1][j] / rho;
            h[j][j] = rho;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() / bnorm <= tol || hn == 0.0 {
                break;
            }
        }
        if used == 0 {
            break;
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        w.iter_mut().for_each(|v| *v = 0.0);
        for (i, yi) in y.iter().enumerate() {
            for k in 0..n {
                w[k] += yi * basis[i][k];
            }
        }
        precond(&w, &mut z);
        for k in 0..n {
            x[k] += z[k];
        }
        let prev = res;
        res = residual(x, &mut r, &mut apply);
        if res >= prev {
            break;
        }
    }
    SolveStats { iterations: total, residual: res, converged: res <= tol }
}
