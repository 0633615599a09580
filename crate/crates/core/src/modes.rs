//! Mode labels and transverse selection rules.
//!
//! The OPO is pumped at the second harmonic with a first-order Hermite-Gauss
//! beam rotated by an angle theta between the h = HG10 and v = HG01 axes.
//! Through the SHG stage the rotated beam decomposes into the second-order
//! components HG20, HG11 and HG02, and each component down-converts into a
//! pair of first-order comb modes:
//!
//! ```text
//!   HG20 -> h + h      HG11 -> h + v      HG02 -> v + v
//! ```
//!
//! A channel is allowed when both transverse orders are conserved,
//! `m_p = m_s + m_i` and `n_p = n_s + n_i`. Odd parity of a summed axis
//! order already kills the cross terms and doubles as an exact-zero fast
//! path in the integrals. Overlap values themselves are computed with all
//! three profiles at one common transverse scale (couplings in the
//! interaction matrix absorb the remaining constants); under that
//! convention the order-violating diagonal channels HG20 -> v+v and
//! HG02 -> h+h pick up a small Gaussian-mismatch overlap, which is why
//! selection goes through the conservation rule and not through comparing
//! quadrature output against zero.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::trig::cos_sin_2theta;

/// Gauss-Hermite points per axis used when the caller does not pick one.
pub const DEFAULT_QUADRATURE_POINTS: usize = 64;
/// Smallest quadrature resolution accepted by [`overlap_integral_with_points`].
pub const MIN_QUADRATURE_POINTS: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModesError {
    #[error("quadrature resolution {0} is below the minimum of {MIN_QUADRATURE_POINTS} points per axis")]
    ResolutionTooLow(usize),
    #[error("no down-conversion table for pump order {0}; only second-order pumps are supported")]
    UnsupportedPumpOrder(u32),
}

/// Two-dimensional Hermite-Gauss index; the order is m + n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HGIndex {
    pub m: u32,
    pub n: u32,
}

impl HGIndex {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub const fn order(self) -> u32 {
        self.m + self.n
    }
}

impl fmt::Display for HGIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HG{}{}", self.m, self.n)
    }
}

/// First-order transverse label: h is HG10, v is HG01.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    H,
    V,
}

impl Spatial {
    pub const fn hg(self) -> HGIndex {
        match self {
            Spatial::H => HGIndex::new(1, 0),
            Spatial::V => HGIndex::new(0, 1),
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Spatial::H => 'h',
            Spatial::V => 'v',
        }
    }
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One comb mode: spatial label, frequency index, time bin.
///
/// Field order matters: the derived `Ord` is lexicographic in
/// (freq, spatial, time), and every matrix in the crate indexes its rows by
/// this ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub freq: i32,
    pub spatial: Spatial,
    pub time: i32,
}

impl ModeId {
    /// Spectral mode in the default time bin 0.
    pub const fn new(spatial: Spatial, freq: i32) -> Self {
        Self { freq, spatial, time: 0 }
    }

    pub const fn at_bin(spatial: Spatial, freq: i32, time: i32) -> Self {
        Self { freq, spatial, time }
    }
}

impl fmt::Display for ModeId {
    /// Compact label such as `h-2` or `v1k3`; the bin suffix is dropped at k = 0.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.spatial, self.freq)?;
        if self.time != 0 {
            write!(f, "k{}", self.time)?;
        }
        Ok(())
    }
}

/// One pump line at comb index p, rotated by theta.
///
/// `theta` is the static rotation; a schedule overrides it per time bin and,
/// once present, must cover every bin that gets used. `amplitude` rescales
/// the line relative to the others (the usual setup drives both lines
/// equally, which is the default).
#[derive(Clone, Debug, PartialEq)]
pub struct PumpComponent {
    pub p: i32,
    pub theta: f64,
    pub amplitude: f64,
    pub schedule: Option<BTreeMap<i32, f64>>,
}

impl PumpComponent {
    pub fn new(p: i32, theta: f64) -> Self {
        Self { p, theta, amplitude: 1.0, schedule: None }
    }

    pub fn with_schedule(mut self, schedule: BTreeMap<i32, f64>) -> Self {
        self.schedule = Some(schedule);
        self
    }

    /// Rotation angle at `bin`; `None` when the schedule does not define it.
    pub fn theta_at(&self, bin: i32) -> Option<f64> {
        match &self.schedule {
            None => Some(self.theta),
            Some(s) => s.get(&bin).copied(),
        }
    }

    pub fn is_scheduled(&self) -> bool {
        self.schedule.is_some()
    }
}

/// Pump made of one or more spectral lines.
#[derive(Clone, Debug, PartialEq)]
pub struct PumpSpec {
    pub components: Vec<PumpComponent>,
}

impl PumpSpec {
    pub fn single(p: i32, theta: f64) -> Self {
        Self { components: vec![PumpComponent::new(p, theta)] }
    }

    pub fn dual(p1: i32, theta1: f64, p2: i32, theta2: f64) -> Self {
        Self {
            components: vec![PumpComponent::new(p1, theta1), PumpComponent::new(p2, theta2)],
        }
    }

    /// The two components, when there are exactly two.
    pub fn pair(&self) -> Option<(&PumpComponent, &PumpComponent)> {
        match self.components.as_slice() {
            [a, b] => Some((a, b)),
            _ => None,
        }
    }
}

/// Second-order content of the rotated first-order pump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpAmplitudes {
    pub hg20: f64,
    pub hg11: f64,
    pub hg02: f64,
}

impl PumpAmplitudes {
    pub fn norm_sqr(self) -> f64 {
        self.hg20 * self.hg20 + self.hg11 * self.hg11 + self.hg02 * self.hg02
    }
}

/// Amplitudes (cos 2θ/√2, sin 2θ, -cos 2θ/√2) of HG20/HG11/HG02.
///
/// The angle is reduced modulo π first, so shifting θ by π returns
/// bit-identical values whenever the shifted angle itself was formed without
/// rounding. Squared amplitudes sum to one for every θ.
pub fn pump_amplitudes(theta: f64) -> PumpAmplitudes {
    let t = theta.rem_euclid(PI);
    let (c2, s2) = cos_sin_2theta(t);
    let w = std::f64::consts::FRAC_1_SQRT_2;
    PumpAmplitudes { hg20: c2 * w, hg11: s2, hg02: -c2 * w }
}

/// One allowed down-conversion channel, pump -> signal + idler.
///
/// Signal/idler are unordered; the stored order puts h before v.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Process {
    pub pump: HGIndex,
    pub signal: HGIndex,
    pub idler: HGIndex,
}

/// True when both transverse orders are conserved through down-conversion.
pub fn conserves_orders(pump: HGIndex, signal: HGIndex, idler: HGIndex) -> bool {
    pump.m == signal.m + idler.m && pump.n == signal.n + idler.n
}

/// Down-conversion channels of an order-`pump_order` pump into first-order pairs.
///
/// Only order 2 is in scope; anything else is an unsupported configuration.
/// The list is generated by the order-conservation rule over the unordered
/// first-order pairs, which yields exactly three channels.
pub fn allowed_processes(pump_order: u32) -> Result<Vec<Process>, ModesError> {
    if pump_order != 2 {
        return Err(ModesError::UnsupportedPumpOrder(pump_order));
    }
    let h = Spatial::H.hg();
    let v = Spatial::V.hg();
    let pumps = [HGIndex::new(2, 0), HGIndex::new(1, 1), HGIndex::new(0, 2)];
    let pairs = [(h, h), (h, v), (v, v)];
    let mut out = Vec::new();
    for pump in pumps {
        for (signal, idler) in pairs {
            if conserves_orders(pump, signal, idler) {
                out.push(Process { pump, signal, idler });
            }
        }
    }
    Ok(out)
}

/// Channels opened by a concrete set of second-order pump amplitudes.
///
/// Components with zero amplitude open nothing; an empty set opens nothing.
pub fn processes_for(amplitudes: &[(HGIndex, f64)]) -> Result<Vec<Process>, ModesError> {
    let table = allowed_processes(2)?;
    let mut out = Vec::new();
    for &(pump, amp) in amplitudes {
        if pump.order() != 2 {
            return Err(ModesError::UnsupportedPumpOrder(pump.order()));
        }
        if amp != 0.0 {
            out.extend(table.iter().copied().filter(|p| p.pump == pump));
        }
    }
    Ok(out)
}

/// Triple overlap of three normalized Hermite-Gauss profiles, at the
/// default resolution.
pub fn overlap_integral(pump: HGIndex, signal: HGIndex, idler: HGIndex) -> Result<f64, ModesError> {
    overlap_integral_with_points(pump, signal, idler, DEFAULT_QUADRATURE_POINTS)
}

/// Same as [`overlap_integral`] with an explicit Gauss-Hermite resolution.
///
/// The integral factorizes into x and y parts; a part whose three indices
/// sum to an odd number vanishes by parity and is returned as an exact zero
/// without touching the quadrature. All three profiles share one transverse
/// scale (see the module docs for what that implies for selection).
pub fn overlap_integral_with_points(
    pump: HGIndex,
    signal: HGIndex,
    idler: HGIndex,
    points: usize,
) -> Result<f64, ModesError> {
    if points < MIN_QUADRATURE_POINTS {
        return Err(ModesError::ResolutionTooLow(points));
    }
    let rule = gauss_hermite(points);
    let ix = axis_overlap(pump.m, signal.m, idler.m, &rule);
    if ix == 0.0 {
        return Ok(0.0);
    }
    let iy = axis_overlap(pump.n, signal.n, idler.n, &rule);
    Ok(ix * iy)
}

/// One-axis overlap of `u_a(x) u_b(x) u_c(x)`; exact zero on odd parity.
fn axis_overlap(a: u32, b: u32, c: u32, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    if (a + b + c) % 2 == 1 {
        return 0.0;
    }
    // u_a u_b u_c = N H_a H_b H_c e^{-3x²/2}; x = t·sqrt(2/3) maps the
    // weight onto the Gauss-Hermite e^{-t²}.
    let norm = 1.0
        / (2f64.powi((a + b + c) as i32) * factorial(a) * factorial(b) * factorial(c)).sqrt()
        / PI.powf(0.75);
    let scale = (2.0f64 / 3.0).sqrt();
    let (nodes, weights) = rule;
    let mut acc = 0.0;
    for (&t, &w) in nodes.iter().zip(weights) {
        let x = t * scale;
        acc += w * hermite(a, x) * hermite(b, x) * hermite(c, x);
    }
    norm * scale * acc
}

/// Physicists' Hermite polynomial by the three-term recurrence.
fn hermite(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gauss-Hermite nodes and weights by Golub-Welsch, symmetrized so that
/// nodes come in exact ± pairs.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let sqrt_pi = PI.sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], sqrt_pi * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}
