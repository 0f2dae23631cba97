//! Closed-form evolution of a single cell and interface stitching.
//!
//! Inside a cell with constant coefficients the coefficient vector evolves
//! under the block-diagonal exponential `D(t)`: the constant cell is
//! `e^{A_0 t}` and mode `k` is `e^{sigma_k t} R(omega_k t)` where `R` is a
//! rotation. Cells store coefficients in absolute time, i.e. the value at
//! time `t` is always `D(t) * state`, with `t` measured from zero.

use crate::error::{Error, Result};
use crate::spectral::{FourierState, SpectralPair};

/// Largest exponent argument accepted before reporting overflow.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// Real 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Block2 {
    pub const IDENTITY: Block2 = Block2 {
        m11: 1.0,
        m12: 0.0,
        m21: 0.0,
        m22: 1.0,
    };

    pub fn mul(&self, o: &Block2) -> Block2 {
        Block2 {
            m11: self.m11 * o.m11 + self.m12 * o.m21,
            m12: self.m11 * o.m12 + self.m12 * o.m22,
            m21: self.m21 * o.m11 + self.m22 * o.m21,
            m22: self.m21 * o.m12 + self.m22 * o.m22,
        }
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }

    pub fn scale(&self, s: f64) -> Block2 {
        Block2 {
            m11: s * self.m11,
            m12: s * self.m12,
            m21: s * self.m21,
            m22: s * self.m22,
        }
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn max_abs_diff(&self, o: &Block2) -> f64 {
        [
            self.m11 - o.m11,
            self.m12 - o.m12,
            self.m21 - o.m21,
            self.m22 - o.m22,
        ]
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

fn guarded_exp(exponent: f64, k: usize, context: impl FnOnce() -> String) -> Result<f64> {
    if exponent > EXPONENT_LIMIT || exponent.is_nan() {
        return Err(Error::Overflow {
            context: context(),
            k,
            exponent,
            limit: EXPONENT_LIMIT,
        });
    }
    Ok(exponent.exp())
}

/// `e^{t [[sigma, omega], [-omega, sigma]]} = e^{sigma t} [[cos wt, sin wt], [-sin wt, cos wt]]`.
pub fn block_exp(p: &SpectralPair, t: f64) -> Result<Block2> {
    let growth = guarded_exp(p.sigma * t, p.k, || {
        format!("block_exp(sigma = {}, t = {})", p.sigma, t)
    })?;
    let (s, c) = (p.omega * t).sin_cos();
    Ok(Block2 {
        m11: c,
        m12: s,
        m21: -s,
        m22: c,
    }
    .scale(growth))
}

/// Mode evolution without the overflow guard; IEEE semantics apply, so a
/// zero coefficient times an overflowed growth factor yields NaN.
pub fn evolve_mode_raw(c: f64, d: f64, p: &SpectralPair, t: f64) -> (f64, f64) {
    let g = (p.sigma * t).exp();
    let (s, co) = (p.omega * t).sin_cos();
    (g * (c * co + d * s), g * (d * co - c * s))
}

/// `(c(t), d(t)) = e^{sigma t} (c cos wt + d sin wt, d cos wt - c sin wt)`.
pub fn evolve_mode(c: f64, d: f64, p: &SpectralPair, t: f64) -> Result<(f64, f64)> {
    Ok(block_exp(p, t)?.apply((c, d)))
}

/// Constant-mode coefficient after crossing an interface at `t1` where
/// `A_0` jumps from `a0_prev` to `a0_next`.
pub fn stitch_zero_mode(half_c0_prev: f64, a0_prev: f64, a0_next: f64, t1: f64) -> Result<f64> {
    if half_c0_prev == 0.0 {
        return Ok(0.0);
    }
    let f = guarded_exp(t1 * (a0_prev - a0_next), 0, || {
        format!("stitch_zero_mode(A0 {a0_prev} -> {a0_next}, t1 = {t1})")
    })?;
    Ok(half_c0_prev * f)
}

/// Absolute-time coefficients for the next cell such that evolving them
/// under `p_next` to `t1` reproduces the previous cell's mode at `t1`.
pub fn stitch_mode(
    c: f64,
    d: f64,
    p_prev: &SpectralPair,
    p_next: &SpectralPair,
    t1: f64,
) -> Result<(f64, f64)> {
    if c == 0.0 && d == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ratio = guarded_exp((p_prev.sigma - p_next.sigma) * t1, p_prev.k, || {
        format!(
            "stitch_mode(sigma {} -> {}, t1 = {})",
            p_prev.sigma, p_next.sigma, t1
        )
    })?;
    let (sp, cp) = (p_prev.omega * t1).sin_cos();
    let big_a = ratio * (c * cp + d * sp);
    let big_b = ratio * (d * cp - c * sp);
    let (sn, cn) = (p_next.omega * t1).sin_cos();
    Ok((big_a * cn - big_b * sn, big_b * cn + big_a * sn))
}

/// Coefficients of one cell together with its spectral pairs and time span.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    state: FourierState,
    pairs: Vec<SpectralPair>,
    t_start: f64,
    t_end: f64,
}

impl CellState {
    pub fn new(
        state: FourierState,
        pairs: Vec<SpectralPair>,
        t_start: f64,
        t_end: f64,
    ) -> Result<Self> {
        if !(t_start < t_end) {
            return Err(Error::InvalidInput(format!(
                "cell time span [{t_start}, {t_end}] is empty"
            )));
        }
        if pairs.len() != state.truncation() + 1 {
            return Err(Error::InvalidInput(format!(
                "cell needs {} spectral pairs, got {}",
                state.truncation() + 1,
                pairs.len()
            )));
        }
        if let Some(i) = pairs.iter().enumerate().position(|(i, p)| p.k != i) {
            return Err(Error::InvalidInput(format!(
                "spectral pair at position {i} is for mode {}",
                pairs[i].k
            )));
        }
        Ok(CellState {
            state,
            pairs,
            t_start,
            t_end,
        })
    }

    pub fn state(&self) -> &FourierState {
        &self.state
    }

    pub fn pairs(&self) -> &[SpectralPair] {
        &self.pairs
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }
}

/// Coefficient vector of a cell at absolute time `t`.
///
/// Modes whose stored coefficients are exactly zero are left untouched.
pub fn evolve_state(cs: &CellState, t: f64) -> Result<FourierState> {
    if !(cs.t_start <= t && t <= cs.t_end) {
        return Err(Error::Domain(format!(
            "t = {t} outside cell span [{}, {}]",
            cs.t_start, cs.t_end
        )));
    }
    let half_c0 = if cs.state.half_c0() == 0.0 {
        0.0
    } else {
        let p = &cs.pairs[0];
        cs.state.half_c0()
            * guarded_exp(p.sigma * t, 0, || {
                format!("evolve_state(A0 = {}, t = {})", p.sigma, t)
            })?
    };
    let modes = cs
        .state
        .modes()
        .iter()
        .zip(&cs.pairs[1..])
        .map(|(&(c, d), p)| {
            if c == 0.0 && d == 0.0 {
                Ok((0.0, 0.0))
            } else {
                evolve_mode(c, d, p, t)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    FourierState::new(half_c0, modes)
}
