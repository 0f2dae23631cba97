//! Weak solution of `dPsi/dt = sum_n A_n(t, x) d^n Psi/dx^n` with step-function
//! coefficients.
//!
//! The domain `[0, T[ x [-l, l[` is cut into cells `[t_i, t_{i+1}[ x [x_j, x_{j+1}[`
//! with constant coefficients. Each space strip `j` is marched in time on its
//! own, starting from the global initial condition: inside a row the cell
//! evolves in closed form, and at every `t_i` the next row's coefficients are
//! stitched so the two expansions agree at the interface. The assembled
//! solution reads strip `j` only on `[x_j, x_{j+1}[`.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Diagnostic, Error, Result};
use crate::propagator::{
    evolve_state, stitch_mode, stitch_zero_mode, CellState, EXPONENT_LIMIT,
};
use crate::spectral::{spectral_pair, FourierState, OperatorCoefficients, SpectralPair};

/// Problem with piecewise-constant coefficients on a time x space partition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProblem {
    l: f64,
    horizon: f64,
    time_partition: Vec<f64>,
    space_partition: Vec<f64>,
    order: usize,
    coeffs: Vec<Vec<Vec<f64>>>,
    initial: FourierState,
}

fn check_partition(
    name: &str,
    points: &[f64],
    first: f64,
    last: f64,
    diags: &mut Vec<Diagnostic>,
) {
    if points.len() < 2 {
        diags.push(Diagnostic::at_path(
            format!("/{name}"),
            format!("{name} needs at least two points"),
        ));
        return;
    }
    for (i, v) in points.iter().enumerate() {
        if !v.is_finite() {
            diags.push(Diagnostic::at_path(
                format!("/{name}/{i}"),
                format!("{name} value is not finite"),
            ));
        }
    }
    if points[0] != first {
        diags.push(Diagnostic::at_path(
            format!("/{name}/0"),
            format!("{name} must start at {first}, got {}", points[0]),
        ));
    }
    let n = points.len() - 1;
    if points[n] != last {
        diags.push(Diagnostic::at_path(
            format!("/{name}/{n}"),
            format!("{name} must end at {last}, got {}", points[n]),
        ));
    }
    for i in 1..points.len() {
        if !(points[i] > points[i - 1]) {
            diags.push(Diagnostic::at_path(
                format!("/{name}/{i}"),
                format!("{name} not strictly increasing at index {i}"),
            ));
        }
    }
}

impl StepProblem {
    /// Validates and assembles a problem. `coeffs` is indexed `[i][j][n]`.
    pub fn new(
        l: f64,
        horizon: f64,
        time_partition: Vec<f64>,
        space_partition: Vec<f64>,
        order: usize,
        coeffs: Vec<Vec<Vec<f64>>>,
        initial: FourierState,
    ) -> Result<Self> {
        let p = StepProblem {
            l,
            horizon,
            time_partition,
            space_partition,
            order,
            coeffs,
            initial,
        };
        let diags = p.diagnostics();
        if diags.is_empty() {
            Ok(p)
        } else {
            Err(Error::Validation(diags))
        }
    }

    /// Every violated invariant, located by document path.
    fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let l_ok = self.l.is_finite() && self.l > 0.0;
        if !l_ok {
            diags.push(Diagnostic::at_path("/l", "l must be positive and finite"));
        }
        let t_ok = self.horizon.is_finite() && self.horizon > 0.0;
        if !t_ok {
            diags.push(Diagnostic::at_path("/T", "T must be positive and finite"));
        }
        check_partition("time_partition", &self.time_partition, 0.0, self.horizon, &mut diags);
        check_partition("space_partition", &self.space_partition, -self.l, self.l, &mut diags);
        if self.order < 2 || !self.order.is_multiple_of(2) {
            diags.push(Diagnostic::at_path(
                "/order",
                format!("order must be an even integer >= 2, got {}", self.order),
            ));
        }
        let rows = self.time_partition.len().saturating_sub(1);
        let cols = self.space_partition.len().saturating_sub(1);
        if self.coeffs.len() != rows {
            diags.push(Diagnostic::at_path(
                "/coefficients",
                format!("expected {rows} time rows, got {}", self.coeffs.len()),
            ));
        }
        for (i, row) in self.coeffs.iter().enumerate() {
            if row.len() != cols {
                diags.push(Diagnostic::at_path(
                    format!("/coefficients/{i}"),
                    format!("expected {cols} space cells, got {}", row.len()),
                ));
            }
            for (j, cell) in row.iter().enumerate() {
                if cell.len() != self.order + 1 {
                    diags.push(Diagnostic::at_path(
                        format!("/coefficients/{i}/{j}"),
                        format!(
                            "expected {} coefficients (order + 1), got {}",
                            self.order + 1,
                            cell.len()
                        ),
                    ));
                }
                for (n, v) in cell.iter().enumerate() {
                    if !v.is_finite() {
                        diags.push(Diagnostic::at_path(
                            format!("/coefficients/{i}/{j}/{n}"),
                            "coefficient is not finite",
                        ));
                    }
                }
            }
        }
        diags
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Final time `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn time_partition(&self) -> &[f64] {
        &self.time_partition
    }

    pub fn space_partition(&self) -> &[f64] {
        &self.space_partition
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[Vec<Vec<f64>>] {
        &self.coeffs
    }

    pub fn initial(&self) -> &FourierState {
        &self.initial
    }

    /// Number of time rows `I`.
    pub fn rows(&self) -> usize {
        self.time_partition.len() - 1
    }

    /// Number of space strips `J`.
    pub fn strips(&self) -> usize {
        self.space_partition.len() - 1
    }

    pub fn truncation(&self) -> usize {
        self.initial.truncation()
    }

    pub fn operator(&self, i: usize, j: usize) -> OperatorCoefficients {
        OperatorCoefficients::new(self.coeffs[i][j].clone(), self.l)
            .expect("validated problem has well-formed cell operators")
    }

    /// Time row containing `t`, using half-open intervals.
    pub fn row_of(&self, t: f64) -> Option<usize> {
        locate(&self.time_partition, t)
    }

    /// Space strip containing `x`, using half-open intervals.
    pub fn strip_of(&self, x: f64) -> Option<usize> {
        locate(&self.space_partition, x)
    }

    /// Short stable digest of every number in the problem.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |v: f64| h.update(v.to_bits().to_le_bytes());
        put(self.l);
        put(self.horizon);
        self.time_partition.iter().copied().for_each(&mut put);
        self.space_partition.iter().copied().for_each(&mut put);
        put(self.order as f64);
        self.coeffs
            .iter()
            .flatten()
            .flatten()
            .copied()
            .for_each(&mut put);
        put(self.initial.half_c0());
        for &(c, d) in self.initial.modes() {
            put(c);
            put(d);
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn cell_pairs(&self, i: usize, j: usize) -> Result<Vec<SpectralPair>> {
        let ops = self.operator(i, j);
        (0..=self.truncation())
            .map(|k| spectral_pair(&ops, k))
            .collect()
    }
}

fn locate(points: &[f64], v: f64) -> Option<usize> {
    if !(v >= points[0] && v < points[points.len() - 1]) {
        return None;
    }
    Some(points.partition_point(|&p| p <= v) - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Overflow,
    Growth,
}

/// A growing (or overflowing) mode in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceNote {
    /// `(i, j)`: time row, space strip.
    pub cell: (usize, usize),
    pub k: usize,
    pub sigma: f64,
    pub max_exponent: f64,
    pub severity: Severity,
}

impl DivergenceNote {
    fn new(cell: (usize, usize), k: usize, sigma: f64, max_exponent: f64) -> Self {
        let severity = if max_exponent > EXPONENT_LIMIT || max_exponent.is_nan() {
            Severity::Overflow
        } else {
            Severity::Growth
        };
        DivergenceNote {
            cell,
            k,
            sigma,
            max_exponent,
            severity,
        }
    }

    fn sort_key(&self) -> (Severity, (usize, usize), usize) {
        (self.severity, self.cell, self.k)
    }
}

impl std::fmt::Display for DivergenceNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Overflow => "overflow",
            Severity::Growth => "growth",
        };
        write!(
            f,
            "{tag}: cell ({}, {}) mode {} sigma = {} max exponent = {}",
            self.cell.0, self.cell.1, self.k, self.sigma, self.max_exponent
        )
    }
}

fn sort_notes(notes: &mut [DivergenceNote]) {
    notes.sort_by_key(DivergenceNote::sort_key);
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Ready(CellState),
    /// The strip overflowed at or before this row.
    Overflow(DivergenceNote),
}

/// The assembled weak solution: one column of cells per space strip.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSolution {
    problem: StepProblem,
    /// Indexed `[j][i]`.
    strips: Vec<Vec<CellOutcome>>,
    diagnostics: Vec<DivergenceNote>,
}

impl PiecewiseSolution {
    pub fn problem(&self) -> &StepProblem {
        &self.problem
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellOutcome {
        &self.strips[j][i]
    }

    pub fn diagnostics(&self) -> &[DivergenceNote] {
        &self.diagnostics
    }

    pub fn has_overflow(&self) -> bool {
        self.diagnostics
            .iter()
            .any(|n| n.severity == Severity::Overflow)
    }

    /// Tolerance scale: the largest `sum_n |A_n| (K pi/l)^n` times the largest
    /// coefficient magnitude reached in that cell, where `K` is the highest
    /// mode actually carried (stitching never adds modes).
    pub fn scale(&self) -> f64 {
        let k = self.problem.initial().highest_nonzero_mode().max(1);
        let mut scale: f64 = 0.0;
        for (j, strip) in self.strips.iter().enumerate() {
            for (i, outcome) in strip.iter().enumerate() {
                let CellOutcome::Ready(cs) = outcome else { continue };
                // Stored coefficients are absolute-time; only evolved values are physical.
                let mut mag: f64 = 0.0;
                for t in [cs.t_start(), cs.t_end()] {
                    if let Ok(s) = evolve_state(cs, t) {
                        mag = mag.max(s.max_abs());
                    }
                }
                scale = scale.max(self.problem.operator(i, j).norm_bound(k) * mag);
            }
        }
        scale
    }
}

fn ready_cell(strip: &[CellOutcome], i: usize) -> Result<&CellState> {
    match &strip[i] {
        CellOutcome::Ready(cs) => Ok(cs),
        CellOutcome::Overflow(note) => Err(Error::Unavailable(note.clone())),
    }
}

fn growth_notes(cs: &CellState, cell: (usize, usize)) -> Vec<DivergenceNote> {
    let state = cs.state();
    let nonzero = |k: usize| {
        if k == 0 {
            state.half_c0() != 0.0
        } else {
            state.mode(k) != (0.0, 0.0)
        }
    };
    cs.pairs()
        .iter()
        .filter(|p| p.sigma > 0.0 && nonzero(p.k))
        .map(|p| DivergenceNote::new(cell, p.k, p.sigma, p.sigma * cs.t_end()))
        .collect()
}

fn stitch_state(
    state: &FourierState,
    prev: &[SpectralPair],
    next: &[SpectralPair],
    t1: f64,
) -> Result<FourierState> {
    let half_c0 = stitch_zero_mode(state.half_c0(), prev[0].sigma, next[0].sigma, t1)?;
    let modes = state
        .modes()
        .iter()
        .zip(prev[1..].iter().zip(&next[1..]))
        .map(|(&(c, d), (pp, pn))| stitch_mode(c, d, pp, pn, t1))
        .collect::<Result<Vec<_>>>()?;
    FourierState::new(half_c0, modes)
}

fn build_strip(problem: &StepProblem, j: usize) -> Result<(Vec<CellOutcome>, Vec<DivergenceNote>)> {
    let tp = problem.time_partition();
    let rows = problem.rows();
    let mut outcomes = Vec::with_capacity(rows);
    let mut notes = Vec::new();
    let mut state = problem.initial().clone();
    let mut pairs = problem.cell_pairs(0, j)?;
    for i in 0..rows {
        let cs = CellState::new(state.clone(), pairs.clone(), tp[i], tp[i + 1])?;
        let cell_notes = growth_notes(&cs, (i, j));
        let overflow = cell_notes
            .iter()
            .find(|n| n.severity == Severity::Overflow)
            .cloned();
        notes.extend(cell_notes);
        if let Some(note) = overflow {
            outcomes.extend((i..rows).map(|_| CellOutcome::Overflow(note.clone())));
            break;
        }
        outcomes.push(CellOutcome::Ready(cs));
        if i + 1 == rows {
            break;
        }
        let next_pairs = problem.cell_pairs(i + 1, j)?;
        match stitch_state(&state, &pairs, &next_pairs, tp[i + 1]) {
            Ok(s) => state = s,
            Err(Error::Overflow { k, exponent, .. }) => {
                let sigma = pairs[k].sigma - next_pairs[k].sigma;
                let note = DivergenceNote::new((i + 1, j), k, sigma, exponent);
                notes.push(note.clone());
                outcomes.extend((i + 1..rows).map(|_| CellOutcome::Overflow(note.clone())));
                break;
            }
            Err(e) => return Err(e),
        }
        pairs = next_pairs;
    }
    Ok((outcomes, notes))
}

/// Marches every strip through all time rows, stitching at each `t_i`.
pub fn build(problem: &StepProblem) -> Result<PiecewiseSolution> {
    let mut strips = Vec::with_capacity(problem.strips());
    let mut diagnostics = Vec::new();
    for j in 0..problem.strips() {
        let (outcomes, notes) = build_strip(problem, j)?;
        strips.push(outcomes);
        diagnostics.extend(notes);
    }
    sort_notes(&mut diagnostics);
    Ok(PiecewiseSolution {
        problem: problem.clone(),
        strips,
        diagnostics,
    })
}

/// Value of cell `(i, j)`'s expansion at `(t, x)`; `t` may be either endpoint
/// of the cell and `x` anywhere in `[-l, l[`.
pub fn evaluate_cell(sol: &PiecewiseSolution, i: usize, j: usize, t: f64, x: f64) -> Result<f64> {
    let cs = ready_cell(&sol.strips[j], i)?;
    Ok(evolve_state(cs, t)?.evaluate(x, sol.problem.l))
}

/// `Psi(t, x)` for `0 <= t < T`, `-l <= x < l`.
pub fn evaluate(sol: &PiecewiseSolution, t: f64, x: f64) -> Result<f64> {
    let p = &sol.problem;
    let i = p
        .row_of(t)
        .ok_or_else(|| Error::Domain(format!("t = {t} outside [0, {}[", p.horizon)))?;
    let j = p
        .strip_of(x)
        .ok_or_else(|| Error::Domain(format!("x = {x} outside [{}, {}[", -p.l, p.l)))?;
    evaluate_cell(sol, i, j, t, x)
}

/// Where a field's numbers came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub problem_digest: String,
    pub truncation: usize,
    pub time_partition: Vec<f64>,
}

/// Rectangular `(t, x)` sample of the solution. Entries in overflowed cells
/// are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub t_values: Vec<f64>,
    pub x_values: Vec<f64>,
    /// Row-major, `t` outer.
    pub values: Vec<Option<f64>>,
    pub notes: Vec<DivergenceNote>,
    pub provenance: Provenance,
}

impl Field {
    pub fn get(&self, it: usize, ix: usize) -> Option<f64> {
        self.values[it * self.x_values.len() + ix]
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty() || self.x_values.is_empty()
    }
}

/// Samples the solution on arbitrary `t` and `x` lists.
pub fn evaluate_points(sol: &PiecewiseSolution, t_values: &[f64], x_values: &[f64]) -> Result<Field> {
    let mut values = Vec::with_capacity(t_values.len() * x_values.len());
    let mut notes: Vec<DivergenceNote> = Vec::new();
    for &t in t_values {
        for &x in x_values {
            match evaluate(sol, t, x) {
                Ok(v) => values.push(Some(v)),
                Err(Error::Unavailable(note)) => {
                    if !notes.contains(&note) {
                        notes.push(note);
                    }
                    values.push(None);
                }
                Err(e) => return Err(e),
            }
        }
    }
    for n in sol.diagnostics() {
        if !notes.contains(n) {
            notes.push(n.clone());
        }
    }
    sort_notes(&mut notes);
    Ok(Field {
        t_values: t_values.to_vec(),
        x_values: x_values.to_vec(),
        values,
        notes,
        provenance: Provenance {
            problem_digest: sol.problem.digest(),
            truncation: sol.problem.truncation(),
            time_partition: sol.problem.time_partition.clone(),
        },
    })
}

fn uniform(start: f64, end: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| start + (end - start) * k as f64 / n as f64)
        .collect()
}

/// Uniform grid over `[0, T[ x [-l, l[` (right endpoints excluded).
pub fn evaluate_grid(sol: &PiecewiseSolution, nt: usize, nx: usize) -> Result<Field> {
    let l = sol.problem.l;
    evaluate_grid_in(sol, nt, nx, -l, l)
}

/// Uniform grid over `[0, T[ x [x0, x1[`.
pub fn evaluate_grid_in(
    sol: &PiecewiseSolution,
    nt: usize,
    nx: usize,
    x0: f64,
    x1: f64,
) -> Result<Field> {
    if nt < 2 || nx < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2 x 2 points, got {nt} x {nx}"
        )));
    }
    let l = sol.problem.l;
    if !(x0 >= -l && x0 < x1 && x1 <= l) {
        return Err(Error::Domain(format!(
            "x-range [{x0}, {x1}[ not inside [{}, {l}[",
            -l
        )));
    }
    let t_values = uniform(0.0, sol.problem.horizon, nt);
    let x_values = uniform(x0, x1, nx);
    evaluate_points(sol, &t_values, &x_values)
}

/// Value of the `n`-th derivative of `(cos, sin)` at `theta`.
fn trig_derivative(n: usize, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    match n % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// `(analytic, finite-difference)` residual of the PDE at an interior point.
///
/// The analytic residual differentiates the closed-form time factors exactly
/// and evaluates `sum_n A_n d^n/dx^n` pointwise from the derivatives of
/// `cos`/`sin`. The second value replaces the exact time derivative with a
/// central difference of step `dt`.
pub fn residual(sol: &PiecewiseSolution, t: f64, x: f64, dt: f64) -> Result<(f64, f64)> {
    let p = &sol.problem;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let i = p
        .row_of(t)
        .ok_or_else(|| Error::Domain(format!("t = {t} outside [0, {}[", p.horizon)))?;
    let j = p
        .strip_of(x)
        .ok_or_else(|| Error::Domain(format!("x = {x} outside [{}, {}[", -p.l, p.l)))?;
    let (t0, t1) = (p.time_partition[i], p.time_partition[i + 1]);
    if !(t - dt > t0 && t + dt < t1) {
        return Err(Error::Domain(format!(
            "t = {t} within dt = {dt} of a time interface"
        )));
    }
    if p.space_partition.contains(&x) {
        return Err(Error::Domain(format!("x = {x} is a partition point")));
    }
    let cs = ready_cell(&sol.strips[j], i)?;
    let now = evolve_state(cs, t)?;
    let pairs = cs.pairs();
    let coeffs = &p.coeffs[i][j];

    // Time derivative by the product rule on e^{sigma t}(c cos wt + d sin wt).
    let mut dt_psi = pairs[0].sigma * now.half_c0();
    for (idx, &(c, d)) in cs.state().modes().iter().enumerate() {
        if c == 0.0 && d == 0.0 {
            continue;
        }
        let pr = &pairs[idx + 1];
        let g = (pr.sigma * t).exp();
        let (s, co) = (pr.omega * t).sin_cos();
        let dc = pr.sigma * g * (c * co + d * s) + g * pr.omega * (d * co - c * s);
        let dd = pr.sigma * g * (d * co - c * s) - g * pr.omega * (c * co + d * s);
        let theta = (idx + 1) as f64 * PI * x / p.l;
        dt_psi += dc * theta.cos() + dd * theta.sin();
    }

    let mut space = coeffs[0] * now.evaluate(x, p.l);
    for (idx, &(c, d)) in now.modes().iter().enumerate() {
        if c == 0.0 && d == 0.0 {
            continue;
        }
        let nu = (idx + 1) as f64 * PI / p.l;
        let theta = nu * x;
        let mut power = 1.0;
        for (n, &a) in coeffs.iter().enumerate().skip(1) {
            power *= nu;
            if a == 0.0 {
                continue;
            }
            let (dcos, dsin) = trig_derivative(n, theta);
            space += a * power * (c * dcos + d * dsin);
        }
    }

    let fd = (evaluate_cell(sol, i, j, t + dt, x)? - evaluate_cell(sol, i, j, t - dt, x)?)
        / (2.0 * dt);
    Ok((dt_psi - space, fd - space))
}

/// Growth and overflow predictions for every cell and every mode `<= K`,
/// without solving. Overflow notes sort first.
pub fn check_divergence(problem: &StepProblem) -> Vec<DivergenceNote> {
    let tp = problem.time_partition();
    let mut notes = Vec::new();
    for i in 0..problem.rows() {
        for j in 0..problem.strips() {
            let ops = problem.operator(i, j);
            for k in 0..=problem.truncation() {
                match spectral_pair(&ops, k) {
                    Ok(p) if p.sigma > 0.0 => {
                        notes.push(DivergenceNote::new((i, j), k, p.sigma, p.sigma * tp[i + 1]))
                    }
                    Ok(_) => {}
                    Err(_) => notes.push(DivergenceNote::new((i, j), k, f64::INFINITY, f64::INFINITY)),
                }
            }
        }
    }
    sort_notes(&mut notes);
    notes
}

/// Deterministic interior sample points, at least `margin` away from every
/// time interface, skipping overflowed cells and partition points in `x`.
pub fn interior_samples(
    sol: &PiecewiseSolution,
    count: usize,
    margin: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let p = &sol.problem;
    let usable: Vec<(usize, usize)> = (0..p.rows())
        .flat_map(|i| (0..p.strips()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let tp = &p.time_partition;
            matches!(sol.strips[j][i], CellOutcome::Ready(_)) && tp[i + 1] - tp[i] > 2.0 * margin
        })
        .collect();
    if usable.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (i, j) = usable[rng.random_range(0..usable.len())];
        let (t0, t1) = (p.time_partition[i] + margin, p.time_partition[i + 1] - margin);
        let (x0, x1) = (p.space_partition[j], p.space_partition[j + 1]);
        let t = t0 + (t1 - t0) * rng.random::<f64>();
        let x = x0 + (x1 - x0) * rng.random::<f64>();
        if t > t0 && t < t1 && x > x0 && x < x1 {
            out.push((t, x));
        }
    }
    out
}
