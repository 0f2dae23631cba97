//! Finite-difference reference solver for problems of order <= 2.
//!
//! Method of lines on a periodic grid over `[-l, l[`: second-order central
//! differences in space, classical RK4 in time, coefficients looked up per
//! cell. Each time row is integrated separately with a step that divides the
//! row exactly, so the march always lands on the interfaces.

use crate::error::{Error, Result};
use crate::solver::{Field, Provenance, StepProblem};

/// Safety factor applied to the explicit diffusion stability bound.
pub const STABILITY_SAFETY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub nx: usize,
    pub dt: f64,
}

impl FdConfig {
    pub fn new(nx: usize, dt: f64) -> Result<Self> {
        if nx < 16 {
            return Err(Error::Config(format!("nx must be >= 16, got {nx}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        Ok(FdConfig { nx, dt })
    }

    /// Largest stable `dt` for the given grid and diffusion coefficient.
    pub fn max_stable_dt(nx: usize, l: f64, max_a2: f64) -> f64 {
        let dx = 2.0 * l / nx as f64;
        if max_a2 == 0.0 {
            f64::INFINITY
        } else {
            STABILITY_SAFETY * dx * dx / (2.0 * max_a2)
        }
    }
}

fn rhs(u: &[f64], out: &mut [f64], cell_coeffs: &[&[f64]], dx: f64) {
    let n = u.len();
    let inv2dx = 1.0 / (2.0 * dx);
    let invdx2 = 1.0 / (dx * dx);
    for i in 0..n {
        let a = cell_coeffs[i];
        let left = u[(i + n - 1) % n];
        let right = u[(i + 1) % n];
        let mut v = a[0] * u[i];
        if a[1] != 0.0 {
            v += a[1] * (right - left) * inv2dx;
        }
        if a[2] != 0.0 {
            v += a[2] * (right - 2.0 * u[i] + left) * invdx2;
        }
        out[i] = v;
    }
}

/// Integrates `problem` to `t_end` and samples it on the FD grid.
pub fn fd_solve(problem: &StepProblem, cfg: &FdConfig, t_end: f64) -> Result<Field> {
    if problem.order() > 2 {
        return Err(Error::UnsupportedOrder(problem.order()));
    }
    if !(0.0..problem.horizon()).contains(&t_end) {
        return Err(Error::Domain(format!(
            "t_end = {t_end} outside [0, {}[",
            problem.horizon()
        )));
    }
    let l = problem.l();
    let max_a2 = problem
        .coefficients()
        .iter()
        .flatten()
        .fold(0.0_f64, |m, a| m.max(a[2].abs()));
    let bound = FdConfig::max_stable_dt(cfg.nx, l, max_a2);
    if cfg.dt > bound {
        return Err(Error::Config(format!(
            "dt = {} exceeds the stability bound {bound}",
            cfg.dt
        )));
    }

    let dx = 2.0 * l / cfg.nx as f64;
    let xs: Vec<f64> = (0..cfg.nx).map(|i| -l + i as f64 * dx).collect();
    let strip: Vec<usize> = xs
        .iter()
        .map(|&x| problem.strip_of(x).unwrap_or(problem.strips() - 1))
        .collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| problem.initial().evaluate(x, l)).collect();
    let n = u.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);

    let tp = problem.time_partition();
    for row in 0..problem.rows() {
        let start = tp[row];
        if start >= t_end {
            break;
        }
        let len = tp[row + 1].min(t_end) - start;
        let steps = ((len / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = len / steps as f64;
        let coeffs: Vec<&[f64]> = strip
            .iter()
            .map(|&j| problem.coefficients()[row][j].as_slice())
            .collect();
        for _ in 0..steps {
            rhs(&u, &mut k1, &coeffs, dx);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * h * k1[i];
            }
            rhs(&tmp, &mut k2, &coeffs, dx);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * h * k2[i];
            }
            rhs(&tmp, &mut k3, &coeffs, dx);
            for i in 0..n {
                tmp[i] = u[i] + h * k3[i];
            }
            rhs(&tmp, &mut k4, &coeffs, dx);
            for i in 0..n {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }

    Ok(Field {
        t_values: vec![t_end],
        x_values: xs,
        values: u.into_iter().map(Some).collect(),
        notes: Vec::new(),
        provenance: Provenance {
            problem_digest: problem.digest(),
            truncation: problem.truncation(),
            time_partition: tp.to_vec(),
        },
    })
}

/// Difference norms between two fields on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub max_abs: f64,
    /// Root mean square over the compared entries.
    pub l2: f64,
    /// `(t, x)` of the largest difference.
    pub argmax: (f64, f64),
    pub compared: usize,
}

/// Max and RMS difference, skipping entries absent in either field.
pub fn compare(spectral: &Field, reference: &Field) -> Result<ErrorReport> {
    if spectral.t_values != reference.t_values || spectral.x_values != reference.x_values {
        return Err(Error::GridMismatch(format!(
            "{}x{} vs {}x{} samples or differing coordinates",
            spectral.t_values.len(),
            spectral.x_values.len(),
            reference.t_values.len(),
            reference.x_values.len()
        )));
    }
    let nx = spectral.x_values.len();
    let mut report = ErrorReport {
        max_abs: 0.0,
        l2: 0.0,
        argmax: (f64::NAN, f64::NAN),
        compared: 0,
    };
    let mut sum_sq = 0.0;
    for (idx, (a, b)) in spectral.values.iter().zip(&reference.values).enumerate() {
        let (Some(a), Some(b)) = (a, b) else { continue };
        let diff = (a - b).abs();
        sum_sq += diff * diff;
        report.compared += 1;
        if diff > report.max_abs || report.argmax.0.is_nan() {
            report.max_abs = diff;
            report.argmax = (spectral.t_values[idx / nx], spectral.x_values[idx % nx]);
        }
    }
    if report.compared > 0 {
        report.l2 = (sum_sq / report.compared as f64).sqrt();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::FourierState;
    use std::f64::consts::PI;

    fn single(a: [f64; 3], initial: FourierState) -> StepProblem {
        StepProblem::new(
            PI,
            2.0,
            vec![0.0, 2.0],
            vec![-PI, PI],
            2,
            vec![vec![a.to_vec()]],
            initial,
        )
        .unwrap()
    }

    fn sine() -> FourierState {
        FourierState::new(0.0, vec![(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn heat_matches_exact_decay() {
        let p = single([0.0, 0.0, 1.0], sine());
        let f = fd_solve(&p, &FdConfig::new(256, 1e-4).unwrap(), 0.5).unwrap();
        let err = f
            .x_values
            .iter()
            .zip(&f.values)
            .map(|(x, v)| (v.unwrap() - (-0.5f64).exp() * x.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn zero_initial_stays_zero() {
        let p = single([0.3, 0.2, 1.0], FourierState::zeros(2));
        let f = fd_solve(&p, &FdConfig::new(32, 1e-3).unwrap(), 0.5).unwrap();
        assert!(f.values.iter().all(|v| *v == Some(0.0)));
    }

    #[test]
    fn reaction_only_is_pointwise_exponential() {
        let p = single([1.0, 0.0, 0.0], sine());
        let f = fd_solve(&p, &FdConfig::new(64, 1e-3).unwrap(), 1.0).unwrap();
        let e = 1f64.exp();
        for (x, v) in f.x_values.iter().zip(&f.values) {
            assert!((v.unwrap() - e * x.sin()).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_high_order_and_unstable_steps() {
        let mut a = vec![0.0; 5];
        a[4] = 1.0;
        let p = StepProblem::new(PI, 1.0, vec![0.0, 1.0], vec![-PI, PI], 4, vec![vec![a]], sine()).unwrap();
        assert!(matches!(
            fd_solve(&p, &FdConfig::new(32, 1e-4).unwrap(), 0.5),
            Err(Error::UnsupportedOrder(4))
        ));
        let heat = single([0.0, 0.0, 1.0], sine());
        assert!(matches!(
            fd_solve(&heat, &FdConfig::new(256, 1e-3).unwrap(), 0.5),
            Err(Error::Config(_))
        ));
        assert!(FdConfig::new(8, 1e-3).is_err());
    }

    #[test]
    fn compare_norms() {
        let p = single([0.0, 0.0, 1.0], sine());
        let f = fd_solve(&p, &FdConfig::new(32, 1e-3).unwrap(), 0.1).unwrap();
        let r = compare(&f, &f).unwrap();
        assert_eq!((r.max_abs, r.l2), (0.0, 0.0));

        let mut shifted = f.clone();
        for v in shifted.values.iter_mut() {
            *v = v.map(|x| x + 1.0);
        }
        let r = compare(&f, &shifted).unwrap();
        assert!((r.max_abs - 1.0).abs() < 1e-12 && (r.l2 - 1.0).abs() < 1e-12);

        let mut other = f.clone();
        other.x_values.pop();
        assert!(matches!(compare(&f, &other), Err(Error::GridMismatch(_))));
    }
}
