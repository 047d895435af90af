//! Small unconstrained optimizers used by the variational norm evaluators.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct Options<T: Real> {
    pub max_iter: usize,
    /// Stop when `‖∇f‖_∞` falls below this.
    pub gtol: T,
    /// Stop when a full iteration improves `f` by less than `ftol·(1+|f|)`.
    pub ftol: T,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            gtol: T::tol(1e-10),
            ftol: T::tol(1e-15),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome<T: Real> {
    pub x: DVector<T>,
    pub f: T,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted iteration, starting with the initial value.
    pub history: Vec<T>,
}

fn inf_norm<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |a, &b| a.max(b.abs()))
}

/// BFGS with backtracking Armijo line search on a smooth objective
/// `f(x) -> (value, gradient)`.
///
/// Accepted iterates never increase `f`, so `history` is non-increasing.
pub fn bfgs<T: Real>(
    mut f: impl FnMut(&DVector<T>) -> (T, DVector<T>),
    x0: DVector<T>,
    opts: &Options<T>,
) -> Outcome<T> {
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut hinv = DMatrix::<T>::identity(n, n);
    let mut history = vec![fx];
    let mut converged = false;
    let mut stalls = 0;
    let mut iterations = 0;
    let c1 = T::of(1e-4);
    let max_step = T::of(20.0);

    if n == 0 || !fx.is_finite_val() {
        return Outcome {
            x,
            f: fx,
            iterations,
            converged: n == 0,
            history,
        };
    }

    while iterations < opts.max_iter {
        if inf_norm(&g) <= opts.gtol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = -(&hinv * &g);
        let mut slope = g.dot(&dir);
        if !(slope < T::zero()) {
            hinv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let dn = inf_norm(&dir);
        let mut step = if dn > max_step {
            max_step / dn
        } else {
            T::one()
        };

        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + &dir * step;
            let (ft, gt) = f(&trial);
            if ft.is_finite_val() && ft <= fx + c1 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= T::of(0.5);
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // No descent possible at working precision.
            converged = inf_norm(&g) <= opts.gtol * T::of(1e3);
            break;
        };

        let s = &xn - &x;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        if sy > T::of(1e-300) {
            if iterations == 1 {
                let yy = y.dot(&y);
                if yy > T::zero() {
                    hinv = DMatrix::identity(n, n) * (sy / yy);
                }
            }
            let rho = T::one() / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(s yᵀH + H y sᵀ) + (ρ² yᵀHy + ρ) s sᵀ
            hinv -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }

        let improvement = fx - fnew;
        x = xn;
        fx = fnew;
        g = gnew;
        history.push(fx);

        if improvement <= opts.ftol * (T::one() + fx.abs()) {
            stalls += 1;
            if stalls >= 3 {
                converged = inf_norm(&g) <= opts.gtol * T::of(1e4);
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Outcome {
        x,
        f: fx,
        iterations,
        converged,
        history,
    }
}

/// Central finite-difference gradient with absolute step `h`.
pub fn fd_gradient<T: Real>(
    f: &mut impl FnMut(&DVector<T>) -> T,
    x: &DVector<T>,
    h: T,
) -> DVector<T> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = f(&xp);
        xp[i] = xi - h;
        let fm = f(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (h + h);
    }
    g
}

/// Nelder–Mead simplex minimization (adaptive coefficients).
pub fn nelder_mead<T: Real>(
    mut f: impl FnMut(&DVector<T>) -> T,
    x0: DVector<T>,
    initial_step: T,
    max_evals: usize,
    ftol: T,
) -> Outcome<T> {
    let n = x0.len();
    let nf = T::of(n.max(1) as f64);
    let alpha = T::one();
    let beta = T::one() + T::of(2.0) / nf;
    let gamma = T::of(0.75) - T::one() / (T::of(2.0) * nf);
    let delta = T::one() - T::one() / nf;

    let mut simplex: Vec<(DVector<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = f(&x0);
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut v = x0.clone();
        v[i] += initial_step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let mut evals = n + 1;
    let mut iterations = 0;
    let mut history = vec![f0];
    let mut converged = false;
    let order = |s: &mut Vec<(DVector<T>, T)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    };
    order(&mut simplex);

    while evals < max_evals {
        iterations += 1;
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= ftol * (T::one() + best.abs()) {
            converged = true;
            break;
        }
        let centroid = simplex[..n]
            .iter()
            .fold(DVector::zeros(n), |acc, (v, _)| acc + v)
            / nf;
        let xr = &centroid + (&centroid - &simplex[n].0) * alpha;
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = &centroid + (&xr - &centroid) * beta;
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let outside = fr < simplex[n].1;
            let xc = if outside {
                &centroid + (&xr - &centroid) * gamma
            } else {
                &centroid - (&centroid - &simplex[n].0) * gamma
            };
            let fc = f(&xc);
            evals += 1;
            if (outside && fc <= fr) || (!outside && fc < simplex[n].1) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let v = &x_best + (&item.0 - &x_best) * delta;
                    let fv = f(&v);
                    *item = (v, fv);
                }
                evals += n;
            }
        }
        order(&mut simplex);
        history.push(simplex[0].1);
    }
    let (x, fx) = simplex.swap_remove(0);
    Outcome {
        x,
        f: fx,
        iterations,
        converged,
        history,
    }
}
