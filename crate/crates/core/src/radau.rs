//! Three-stage Radau IIA collocation method (order 5) with adaptive steps.
//!
//! Written for small autonomous systems: the `3N x 3N` stage system is solved
//! by damped Newton with the exact Jacobian of every stage, and the local
//! error is estimated with the embedded third-order formula of Hairer and
//! Wanner, filtered through `(I - gamma0 h J)^-1`. Negative step sizes
//! integrate backward in the independent variable.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SQ6: f64 = 2.449_489_742_783_178;

/// Collocation nodes.
pub const C: [f64; 3] = [(4.0 - SQ6) / 10.0, (4.0 + SQ6) / 10.0, 1.0];

/// Runge-Kutta matrix.
pub const A: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQ6) / 360.0,
        (296.0 - 169.0 * SQ6) / 1800.0,
        (-2.0 + 3.0 * SQ6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQ6) / 1800.0,
        (88.0 + 7.0 * SQ6) / 360.0,
        (-2.0 - 3.0 * SQ6) / 225.0,
    ],
    [(16.0 - SQ6) / 36.0, (16.0 + SQ6) / 36.0, 1.0 / 9.0],
];

/// Coefficients of the embedded error estimate, applied to the stage increments.
const DD: [f64; 3] = [-(13.0 + 7.0 * SQ6) / 3.0, (-13.0 + 7.0 * SQ6) / 3.0, -1.0 / 3.0];

/// Real eigenvalue of `A`.
fn gamma0() -> f64 {
    (6.0 + 81f64.cbrt() - 9f64.cbrt()) / 30.0
}

/// An autonomous system `y' = f(y)` with an analytic Jacobian.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, y: &[f64; N]) -> Result<[f64; N]>;
    fn jacobian(&self, y: &[f64; N]) -> Result<[[f64; N]; N]>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadauOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude.
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_newton: usize,
    /// Newton stops once the scaled increment norm falls below this.
    pub newton_tol: f64,
}

impl Default for RadauOptions {
    fn default() -> Self {
        RadauOptions {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_newton: 12,
            newton_tol: 1e-4,
        }
    }
}

/// Statistics of a finished integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RadauStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
    pub rhs_evals: usize,
}

/// Result of attempting one step.
#[derive(Debug, Clone, Copy)]
pub struct StepAttempt<const N: usize> {
    pub y_new: [f64; N],
    /// Scaled error norm; accept when `<= 1`.
    pub error: f64,
}

pub struct Radau5<'a, S, const N: usize> {
    sys: &'a S,
    opts: RadauOptions,
    pub stats: RadauStats,
}

fn scaled_norm<const N: usize>(x: &[f64], y0: &[f64; N], y1: &[f64; N], opts: &RadauOptions) -> f64 {
    let mut sum = 0.0;
    for (k, xi) in x.iter().enumerate() {
        let i = k % N;
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        sum += (xi / sc).powi(2);
    }
    (sum / x.len() as f64).sqrt()
}

fn add<const N: usize>(y: &[f64; N], z: &[f64]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += z[i];
    }
    out
}

impl<'a, S: OdeSystem<N>, const N: usize> Radau5<'a, S, N> {
    pub fn new(sys: &'a S, opts: RadauOptions) -> Self {
        Radau5 {
            sys,
            opts,
            stats: RadauStats::default(),
        }
    }

    pub fn options(&self) -> &RadauOptions {
        &self.opts
    }

    /// Residual of the stage equations `Z_i - h sum_j a_ij f(y0 + Z_j)`.
    fn stage_residual(&mut self, y0: &[f64; N], z: &DVector<f64>, h: f64) -> Result<(DVector<f64>, [[f64; N]; 3])> {
        let mut f = [[0.0; N]; 3];
        for (j, fj) in f.iter_mut().enumerate() {
            *fj = self.sys.rhs(&add(y0, &z.as_slice()[j * N..(j + 1) * N]))?;
            self.stats.rhs_evals += 1;
        }
        let mut r = z.clone();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..N {
                    r[i * N + k] -= h * A[i][j] * f[j][k];
                }
            }
        }
        Ok((r, f))
    }

    fn solve_stages(&mut self, y0: &[f64; N], h: f64) -> Result<DVector<f64>> {
        let n3 = 3 * N;
        let mut z = DVector::<f64>::zeros(n3);
        let (mut r, _) = self.stage_residual(y0, &z, h)?;
        let mut r_norm = r.norm();
        for _ in 0..self.opts.max_newton {
            let mut jac = DMatrix::<f64>::identity(n3, n3);
            for j in 0..3 {
                let jj = self.sys.jacobian(&add(y0, &z.as_slice()[j * N..(j + 1) * N]))?;
                for i in 0..3 {
                    for p in 0..N {
                        for q in 0..N {
                            jac[(i * N + p, j * N + q)] -= h * A[i][j] * jj[p][q];
                        }
                    }
                }
            }
            let dz = jac
                .lu()
                .solve(&r)
                .ok_or_else(|| Error::SolverBreakdown("singular stage Jacobian".into()))?;
            let y_ref = add(y0, &z.as_slice()[2 * N..]);
            let dz_norm = scaled_norm(dz.as_slice(), y0, &y_ref, &self.opts);

            // damped update: halve until the residual decreases
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..6 {
                let trial = &z - &dz * lambda;
                if let Ok((rt, _)) = self.stage_residual(y0, &trial, h) {
                    let nt = rt.norm();
                    if nt.is_finite() && (nt < r_norm || nt == 0.0 || lambda == 1.0 && dz_norm < 1.0) {
                        accepted = Some((trial, rt, nt));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            let Some((zt, rt, nt)) = accepted else {
                return Err(Error::StepFailure {
                    xi: f64::NAN,
                    step: h,
                    reason: "damped Newton could not reduce the stage residual".into(),
                });
            };
            z = zt;
            r = rt;
            r_norm = nt;
            if lambda == 1.0 && dz_norm <= self.opts.newton_tol {
                return Ok(z);
            }
        }
        Err(Error::StepFailure {
            xi: f64::NAN,
            step: h,
            reason: format!("Newton did not converge in {} iterations", self.opts.max_newton),
        })
    }

    /// One Radau IIA step of size `h` from `y0` with error estimate.
    pub fn attempt(&mut self, y0: &[f64; N], h: f64, refine_estimate: bool) -> Result<StepAttempt<N>> {
        let z = self.solve_stages(y0, h)?;
        let y_new = add(y0, &z.as_slice()[2 * N..]);
        let g0 = gamma0();
        let f0 = self.sys.rhs(y0)?;
        self.stats.rhs_evals += 1;
        let j0 = self.sys.jacobian(y0)?;
        let mut m = DMatrix::<f64>::identity(N, N);
        for p in 0..N {
            for q in 0..N {
                m[(p, q)] -= g0 * h * j0[p][q];
            }
        }
        let lu = m.lu();
        let mut stage_part = DVector::<f64>::zeros(N);
        for k in 0..N {
            stage_part[k] = g0 * (DD[0] * z[k] + DD[1] * z[N + k] + DD[2] * z[2 * N + k]);
        }
        let rhs = DVector::from_fn(N, |k, _| g0 * h * f0[k] + stage_part[k]);
        let mut err = lu
            .solve(&rhs)
            .ok_or_else(|| Error::SolverBreakdown("singular error-filter matrix".into()))?;
        let mut err_norm = scaled_norm(err.as_slice(), y0, &y_new, &self.opts);
        if err_norm >= 1.0 && refine_estimate {
            let shifted = add(y0, err.as_slice());
            if let Ok(f1) = self.sys.rhs(&shifted) {
                self.stats.rhs_evals += 1;
                let rhs = DVector::from_fn(N, |k, _| g0 * h * f1[k] + stage_part[k]);
                if let Some(e2) = lu.solve(&rhs) {
                    err = e2;
                    err_norm = scaled_norm(err.as_slice(), y0, &y_new, &self.opts);
                }
            }
        }
        Ok(StepAttempt { y_new, error: err_norm })
    }

    /// A single step with no error control; used for order verification.
    pub fn step_fixed(&mut self, y0: &[f64; N], h: f64) -> Result<[f64; N]> {
        let z = self.solve_stages(y0, h)?;
        Ok(add(y0, &z.as_slice()[2 * N..]))
    }

    /// Integrate from `(t0, y0)` in the direction of `sign(direction)` until
    /// `stop(t, y)` returns true after an accepted step or `|t - t0|`
    /// exceeds `max_span`. Every accepted step is passed to `on_step`,
    /// which may abort the integration by returning an error.
    pub fn integrate<F, G>(
        &mut self,
        t0: f64,
        y0: [f64; N],
        direction: f64,
        max_span: f64,
        mut on_step: G,
        mut stop: F,
    ) -> Result<Vec<(f64, [f64; N])>>
    where
        F: FnMut(f64, &[f64; N]) -> bool,
        G: FnMut(f64, &[f64; N]) -> Result<()>,
    {
        let sign = if direction < 0.0 { -1.0 } else { 1.0 };
        let mut out = vec![(t0, y0)];
        let mut t = t0;
        let mut y = y0;
        let mut h_abs = self.opts.h_init.min(self.opts.h_max);
        let mut first = true;
        let mut last_rejected = false;
        loop {
            if (t - t0).abs() >= max_span {
                return Err(Error::SpanExceeded { max_span });
            }
            if h_abs < self.opts.h_min {
                return Err(Error::StepFailure {
                    xi: t,
                    step: h_abs,
                    reason: "step size fell below the minimum".into(),
                });
            }
            let h = sign * h_abs;
            match self.attempt(&y, h, first || last_rejected) {
                Ok(StepAttempt { y_new, error }) if error.is_finite() => {
                    let fac = if error > 0.0 { 0.9 * error.powf(-0.25) } else { 4.0 };
                    if error <= 1.0 {
                        t += h;
                        y = y_new;
                        self.stats.accepted += 1;
                        on_step(t, &y)?;
                        out.push((t, y));
                        if stop(t, &y) {
                            return Ok(out);
                        }
                        let grow = if last_rejected {
                            fac.min(1.0)
                        } else {
                            fac.clamp(0.2, 4.0)
                        };
                        h_abs = (h_abs * grow).min(self.opts.h_max);
                        first = false;
                        last_rejected = false;
                    } else {
                        self.stats.rejected += 1;
                        h_abs *= fac.clamp(0.1, 0.9);
                        last_rejected = true;
                    }
                }
                Ok(_) => {
                    self.stats.rejected += 1;
                    h_abs *= 0.25;
                    last_rejected = true;
                }
                Err(Error::StepFailure { .. }) | Err(Error::Singularity { .. }) | Err(Error::SolverBreakdown(_)) => {
                    self.stats.newton_failures += 1;
                    h_abs *= 0.5;
                    last_rejected = true;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
