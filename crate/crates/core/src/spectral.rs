//! Coefficient-space representation of functions on `[-l, l[` and the
//! Fourier differential operator acting on it.
//!
//! A trigonometric polynomial
//!
//! ```text
//! f(x) = c0/2 + sum_{k=1}^{K} c_k cos(k pi x / l) + d_k sin(k pi x / l)
//! ```
//!
//! is stored as the vector `(c0/2, c1, d1, ..., cK, dK)`. Differentiation in
//! `x` acts on that vector block-diagonally: the constant cell is zero and
//! mode `k` is the 2x2 block `[[0, k pi/l], [-k pi/l, 0]]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default upper bound on the mode index accepted by [`spectral_pair`].
pub const DEFAULT_MODE_CAP: usize = 512;

/// Truncated Fourier coefficient vector `(c0/2; (c1, d1), ..., (cK, dK))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState {
    half_c0: f64,
    modes: Vec<(f64, f64)>,
}

impl FourierState {
    pub fn new(half_c0: f64, modes: Vec<(f64, f64)>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidInput(
                "a Fourier state needs at least one mode (K >= 1)".into(),
            ));
        }
        if !half_c0.is_finite() {
            return Err(Error::InvalidInput(format!(
                "half_c0 is not finite: {half_c0}"
            )));
        }
        if let Some((i, _)) = modes
            .iter()
            .enumerate()
            .find(|(_, (c, d))| !c.is_finite() || !d.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "mode k = {} has a non-finite coefficient",
                i + 1
            )));
        }
        Ok(FourierState { half_c0, modes })
    }

    /// All-zero state with `k` modes.
    pub fn zeros(k: usize) -> Self {
        FourierState {
            half_c0: 0.0,
            modes: vec![(0.0, 0.0); k.max(1)],
        }
    }

    pub fn half_c0(&self) -> f64 {
        self.half_c0
    }

    /// Mode pairs `(c_k, d_k)`; index 0 holds `k = 1`.
    pub fn modes(&self) -> &[(f64, f64)] {
        &self.modes
    }

    /// `(c_k, d_k)` for `k >= 1`.
    pub fn mode(&self, k: usize) -> (f64, f64) {
        self.modes[k - 1]
    }

    /// Truncation order K.
    pub fn truncation(&self) -> usize {
        self.modes.len()
    }

    /// Highest mode with a nonzero coefficient, or 0 for a constant.
    pub fn highest_nonzero_mode(&self) -> usize {
        self.modes
            .iter()
            .rposition(|&(c, d)| c != 0.0 || d != 0.0)
            .map_or(0, |i| i + 1)
    }

    /// Same coefficients, zero-padded (never cut) to `k` modes.
    pub fn padded(&self, k: usize) -> Self {
        let mut modes = self.modes.clone();
        if modes.len() < k {
            modes.resize(k, (0.0, 0.0));
        }
        FourierState {
            half_c0: self.half_c0,
            modes,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.half_c0 == 0.0 && self.modes.iter().all(|&(c, d)| c == 0.0 && d == 0.0)
    }

    /// Largest coefficient magnitude, including `c0/2`.
    pub fn max_abs(&self) -> f64 {
        self.modes
            .iter()
            .flat_map(|&(c, d)| [c.abs(), d.abs()])
            .fold(self.half_c0.abs(), f64::max)
    }

    /// Value of the represented trigonometric polynomial at `x`.
    pub fn evaluate(&self, x: f64, l: f64) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .fold(self.half_c0, |acc, (i, &(c, d))| {
                let arg = (i + 1) as f64 * PI * x / l;
                acc + c * arg.cos() + d * arg.sin()
            })
    }

    /// `alpha * self + beta * other`, truncated to the longer of the two.
    pub fn linear_combination(&self, alpha: f64, other: &FourierState, beta: f64) -> Self {
        let k = self.truncation().max(other.truncation());
        let a = self.padded(k);
        let b = other.padded(k);
        FourierState {
            half_c0: alpha * a.half_c0 + beta * b.half_c0,
            modes: a
                .modes
                .iter()
                .zip(&b.modes)
                .map(|(&(c1, d1), &(c2, d2))| (alpha * c1 + beta * c2, alpha * d1 + beta * d2))
                .collect(),
        }
    }

    fn from_parts_unchecked(half_c0: f64, modes: Vec<(f64, f64)>) -> Self {
        FourierState { half_c0, modes }
    }
}

/// Constant coefficients `A_0..A_{2m}` of `sum_n A_n d^n/dx^n` on `[-l, l[`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCoefficients {
    a: Vec<f64>,
    l: f64,
}

impl OperatorCoefficients {
    pub fn new(a: Vec<f64>, l: f64) -> Result<Self> {
        if a.len() < 3 || a.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "operator needs 2m+1 coefficients with m >= 1, got {}",
                a.len()
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidInput(format!(
                "half-period l must be positive and finite, got {l}"
            )));
        }
        if let Some(n) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "operator coefficient A_{n} is not finite"
            )));
        }
        Ok(OperatorCoefficients { a, l })
    }

    /// The even order `2m`.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// `sum_n |A_n| (k pi / l)^n`, a bound on the operator norm on modes <= k.
    pub fn norm_bound(&self, k: usize) -> f64 {
        let nu = (k.max(1) as f64) * PI / self.l;
        let mut p = 1.0;
        let mut sum = 0.0;
        for &a in &self.a {
            sum += a.abs() * p;
            p *= nu;
        }
        sum
    }
}

/// Growth rate `sigma` and rotation rate `omega` of one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPair {
    pub sigma: f64,
    pub omega: f64,
    pub k: usize,
}

impl SpectralPair {
    /// The scalar constant-mode cell: `sigma = A_0`, `omega = 0`.
    pub fn zero_mode(a0: f64) -> Self {
        SpectralPair {
            sigma: a0,
            omega: 0.0,
            k: 0,
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Spectral pair of mode `k`, with the default mode cap.
pub fn spectral_pair(ops: &OperatorCoefficients, k: usize) -> Result<SpectralPair> {
    spectral_pair_capped(ops, k, DEFAULT_MODE_CAP)
}

/// Spectral pair of mode `k`:
///
/// ```text
/// sigma_k = sum_{n=0}^{m}   (-1)^n A_{2n}   (k pi/l)^{2n}
/// omega_k = sum_{n=0}^{m-1} (-1)^n A_{2n+1} (k pi/l)^{2n+1}
/// ```
///
/// and `(A_0, 0)` for `k = 0`.
pub fn spectral_pair_capped(
    ops: &OperatorCoefficients,
    k: usize,
    cap: usize,
) -> Result<SpectralPair> {
    if k > cap {
        return Err(Error::ModeCap { k, cap });
    }
    if k == 0 {
        return Ok(SpectralPair::zero_mode(ops.a[0]));
    }
    let nu = k as f64 * PI / ops.l;
    let mut sigma = CompensatedSum::default();
    let mut omega = CompensatedSum::default();
    let mut power = 1.0_f64;
    for (n, &a) in ops.a.iter().enumerate() {
        if n > 0 {
            power *= nu;
        }
        if a == 0.0 {
            continue;
        }
        let term = a * power;
        if !term.is_finite() {
            return Err(Error::PowerOverflow { k, n });
        }
        // i^n splits into a real part (even n) and an imaginary part (odd n).
        let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if n % 2 == 0 {
            sigma.add(sign * term);
        } else {
            omega.add(sign * term);
        }
    }
    Ok(SpectralPair {
        sigma: sigma.value(),
        omega: omega.value(),
        k,
    })
}

fn check_finite(state: &FourierState) -> Result<()> {
    FourierState::new(state.half_c0, state.modes.clone()).map(|_| ())
}

/// Applies the Fourier differential operator: the constant cell goes to zero
/// and mode `k` maps `(c, d)` to `((k pi/l) d, -(k pi/l) c)`.
pub fn apply_fourier_derivative(state: &FourierState, l: f64) -> Result<FourierState> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidInput(format!(
            "half-period l must be positive and finite, got {l}"
        )));
    }
    check_finite(state)?;
    let modes = state
        .modes
        .iter()
        .enumerate()
        .map(|(i, &(c, d))| {
            let nu = (i + 1) as f64 * PI / l;
            (nu * d, -nu * c)
        })
        .collect();
    Ok(FourierState::from_parts_unchecked(0.0, modes))
}

/// Coefficients of `sum_n A_n f^(n)` for the trigonometric polynomial `f`.
///
/// Mode `k` is multiplied by `[[sigma_k, omega_k], [-omega_k, sigma_k]]`.
pub fn apply_operator_polynomial(
    state: &FourierState,
    ops: &OperatorCoefficients,
) -> Result<FourierState> {
    check_finite(state)?;
    let half_c0 = ops.a[0] * state.half_c0;
    let modes = state
        .modes
        .iter()
        .enumerate()
        .map(|(i, &(c, d))| {
            let p = spectral_pair(ops, i + 1)?;
            Ok((p.sigma * c + p.omega * d, -p.omega * c + p.sigma * d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FourierState::from_parts_unchecked(half_c0, modes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(a: &[f64], l: f64) -> OperatorCoefficients {
        OperatorCoefficients::new(a.to_vec(), l).unwrap()
    }

    /// Order-22 coefficient vector with the given nonzero entries.
    fn order22(entries: &[(usize, f64)]) -> Vec<f64> {
        let mut a = vec![0.0; 23];
        for &(n, v) in entries {
            a[n] = v;
        }
        a
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let s = FourierState::new(0.0, vec![(0.0, 1.0)]).unwrap();
        let ds = apply_fourier_derivative(&s, PI).unwrap();
        assert_eq!(ds.half_c0(), 0.0);
        assert_eq!(ds.modes(), &[(1.0, -0.0)]);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let s = FourierState::new(5.0, vec![(0.0, 0.0)]).unwrap();
        let ds = apply_fourier_derivative(&s, 2.5).unwrap();
        assert_eq!(ds.half_c0(), 0.0);
        assert_eq!(ds.mode(1), (0.0, 0.0));
    }

    #[test]
    fn derivative_of_cos_2x() {
        let s = FourierState::new(0.0, vec![(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let ds = apply_fourier_derivative(&s, PI).unwrap();
        assert_eq!(ds.mode(1), (0.0, 0.0));
        assert_eq!(ds.mode(2), (0.0, -2.0));
    }

    #[test]
    fn non_finite_state_rejected() {
        assert!(FourierState::new(f64::NAN, vec![(0.0, 0.0)]).is_err());
        assert!(FourierState::new(0.0, vec![(0.0, f64::INFINITY)]).is_err());
        assert!(FourierState::new(0.0, vec![]).is_err());
        let bad = FourierState::from_parts_unchecked(0.0, vec![(f64::NAN, 0.0)]);
        assert!(matches!(
            apply_fourier_derivative(&bad, 1.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn second_derivative_of_sine() {
        let s = FourierState::new(0.0, vec![(0.0, 1.0)]).unwrap();
        let out = apply_operator_polynomial(&s, &ops(&[0.0, 0.0, 1.0], PI)).unwrap();
        assert_eq!(out.mode(1), (0.0, -1.0));
    }

    #[test]
    fn zero_operator_gives_zero_state() {
        let s = FourierState::new(1.5, vec![(2.0, -3.0), (0.5, 4.0)]).unwrap();
        let out = apply_operator_polynomial(&s, &ops(&[0.0; 5], 1.0)).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn multiplication_operator_scales() {
        let s = FourierState::new(1.5, vec![(2.0, -3.0), (0.5, 4.0)]).unwrap();
        let out = apply_operator_polynomial(&s, &ops(&[2.0, 0.0, 0.0], 1.0)).unwrap();
        assert_eq!(out.half_c0(), 3.0);
        assert_eq!(out.modes(), &[(4.0, -6.0), (1.0, 8.0)]);
    }

    #[test]
    fn heat_pair() {
        let p = spectral_pair(&ops(&[0.0, 0.0, 1.0], PI), 1).unwrap();
        assert_eq!((p.sigma, p.omega, p.k), (-1.0, 0.0, 1));
    }

    #[test]
    fn zero_coefficients_pair() {
        for k in [0, 1, 7, 100] {
            let p = spectral_pair(&ops(&[0.0; 7], 0.3), k).unwrap();
            assert_eq!((p.sigma, p.omega), (0.0, 0.0));
        }
    }

    #[test]
    fn example_regions_pairs() {
        let region1 = ops(&order22(&[(2, 1.0), (22, 2.0)]), PI);
        let region2 = ops(&order22(&[(2, 1.55), (22, -2.0)]), PI);
        let p1 = spectral_pair(&region1, 1).unwrap();
        let p2 = spectral_pair(&region2, 1).unwrap();
        assert_eq!((p1.sigma, p1.omega), (-3.0, 0.0));
        assert!((p2.sigma - 0.45).abs() < 1e-15);
        assert_eq!(p2.omega, 0.0);
    }

    #[test]
    fn zero_mode_pair_is_scalar() {
        let p = spectral_pair(&ops(&[1.25, 3.0, 4.0], 1.0), 0).unwrap();
        assert_eq!(p, SpectralPair::zero_mode(1.25));
    }

    #[test]
    fn odd_terms_feed_omega_with_alternating_sign() {
        // A1 = 1, A3 = 1 at nu = 2: omega = 2 - 8.
        let p = spectral_pair(&ops(&[0.0, 1.0, 0.0, 1.0, 0.0], PI / 2.0), 1).unwrap();
        assert_eq!(p.sigma, 0.0);
        assert_eq!(p.omega, -6.0);
    }

    #[test]
    fn mode_cap_enforced() {
        let o = ops(&[0.0, 0.0, 1.0], 1.0);
        assert!(matches!(
            spectral_pair(&o, DEFAULT_MODE_CAP + 1),
            Err(Error::ModeCap { .. })
        ));
        assert!(spectral_pair_capped(&o, 1000, 1000).is_ok());
    }

    #[test]
    fn power_overflow_names_mode_and_order() {
        let mut a = vec![0.0; 201];
        a[200] = 1.0;
        let o = ops(&a, 1e-3);
        match spectral_pair(&o, 400) {
            Err(Error::PowerOverflow { k, n }) => assert_eq!((k, n), (400, 200)),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn operator_validation() {
        assert!(OperatorCoefficients::new(vec![0.0, 1.0], 1.0).is_err());
        assert!(OperatorCoefficients::new(vec![0.0; 3], 0.0).is_err());
        assert!(OperatorCoefficients::new(vec![0.0, f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn highest_nonzero_mode_and_padding() {
        let s = FourierState::new(1.0, vec![(0.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(s.highest_nonzero_mode(), 1);
        assert_eq!(s.padded(4).truncation(), 4);
        assert_eq!(s.padded(1).truncation(), 2);
        assert_eq!(FourierState::zeros(3).highest_nonzero_mode(), 0);
    }
}
