//! Temporal staggering: a transverse-mode splitter, a one-bin delay on the
//! v rail, and a quarter-wave rotation turn the per-bin dual-rail wires
//! into a 2D cluster over (frequency, time bin).
//!
//! The delay line is tracked as an exact substitution on quadrature forms:
//!
//! ```text
//!   Q_{h,k} -> (Q_{h,k} - Q_{v,k}) / sqrt2
//!   Q_{v,k} -> (Q_{h,k+1} + Q_{v,k+1}) / sqrt2
//! ```
//!
//! applied independently at every frequency. Pushing the per-bin nullifiers
//! through it and recombining adjacent bins,
//!
//! ```text
//!   X+_k = (X_{v,k-1} + X_{h,k}) / 2      X-_k = (X_{v,k-1} - X_{h,k}) / 2
//! ```
//!
//! gives one nullifier pair per (frequency, bin) macronode, anchored on the
//! h and v members with coefficient exactly +1. Those closed forms are what
//! `lattice_2d` and `time_varying_lattice` compile; the recombination
//! identity is enforced by the oracle tests at 1e-12.
//!
//! With a per-bin pump schedule the generators carry their own bin's
//! weights: X_{v,k-1} uses bin k-1, X_{h,k} uses bin k, so macronode
//! coefficients mix (a_k +- a_{k-1})/2 terms that collapse back to the
//! constant-pump forms bit-exactly when the schedule is flat.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::clusters::{
    edge_weights, graph_from_nullifiers, ClusterGraph, ClustersError, EdgeWeights,
    QuadratureForm,
};
use crate::gaussian::{CovarianceState, GaussianError, QuadratureBasis};
use crate::hamiltonian::{comb_g, FreqWindow, HamiltonianError};
use crate::modes::{ModeId, PumpSpec, Spatial};

#[derive(Debug, Error, PartialEq)]
pub enum StaggeringError {
    #[error("staggering is defined on Q-only forms, found a P component on {0}")]
    MomentumUnsupported(ModeId),
    #[error("bin range [{lo}, {hi}] has no bulk; need at least three bins")]
    BinRangeTooSmall { lo: i32, hi: i32 },
    #[error("pump schedule does not define bin {0}")]
    ScheduleMissingBin(i32),
    #[error("static lattice on a scheduled pump; use the time-varying path")]
    ScheduledPump,
    #[error(transparent)]
    Clusters(#[from] ClustersError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Inclusive range of simulated time bins. At least three, so that some
/// bin has both temporal neighbors in range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinRange {
    lo: i32,
    hi: i32,
}

impl BinRange {
    pub fn new(lo: i32, hi: i32) -> Result<Self, StaggeringError> {
        if hi - lo < 2 {
            return Err(StaggeringError::BinRangeTooSmall { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, bin: i32) -> bool {
        (self.lo..=self.hi).contains(&bin)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    /// Bins whose both temporal neighbors are also in range.
    pub fn bulk(&self) -> impl Iterator<Item = i32> {
        self.lo + 1..=self.hi - 1
    }
}

/// One passive optical element, acting as an exact linear substitution on
/// quadrature forms, uniformly over frequencies. Order of application is
/// significant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OpticalTransform {
    /// Transverse-mode splitter: routes the two spatial labels onto
    /// separate paths without mixing them; the substitution is identity.
    TbsSplit,
    /// Retards one spatial label by a whole number of bins.
    Delay { spatial: Spatial, shift: i32 },
    /// In-plane rotation of the spatial labels by `angle` (clockwise):
    /// Q_h -> cos Q_h - sin Q_v, Q_v -> sin Q_h + cos Q_v, same on P.
    Rotation { angle: f64 },
}

impl OpticalTransform {
    pub fn apply(&self, form: &QuadratureForm) -> QuadratureForm {
        let mut out = QuadratureForm::new();
        for (mode, component, w) in form.terms() {
            match *self {
                OpticalTransform::TbsSplit => out.add_term(mode, component, w),
                OpticalTransform::Delay { spatial, shift } => {
                    let shifted = if mode.spatial == spatial {
                        ModeId::at_bin(mode.spatial, mode.freq, mode.time + shift)
                    } else {
                        mode
                    };
                    out.add_term(shifted, component, w);
                }
                OpticalTransform::Rotation { angle } => {
                    let (cos, sin) = (angle.cos(), angle.sin());
                    let h = ModeId::at_bin(Spatial::H, mode.freq, mode.time);
                    let v = ModeId::at_bin(Spatial::V, mode.freq, mode.time);
                    match mode.spatial {
                        Spatial::H => {
                            out.add_term(h, component, w * cos);
                            out.add_term(v, component, -w * sin);
                        }
                        Spatial::V => {
                            out.add_term(h, component, w * sin);
                            out.add_term(v, component, w * cos);
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn apply_transforms(transforms: &[OpticalTransform], form: &QuadratureForm) -> QuadratureForm {
    let mut out = form.clone();
    for t in transforms {
        out = t.apply(&out);
    }
    out
}

/// Rewrite a pre-staggering Q-form in the post-staggering variables:
/// Q_{h,k} -> (Q_{h,k} - Q_{v,k})/sqrt2, Q_{v,k} -> (Q_{h,k+1} + Q_{v,k+1})/sqrt2.
///
/// The substitution is orthogonal, so norms and inner products of forms
/// are preserved. P components are outside this pipeline.
pub fn staggering_substitution(
    form: &QuadratureForm,
) -> Result<QuadratureForm, StaggeringError> {
    use std::f64::consts::FRAC_1_SQRT_2;
    let mut out = QuadratureForm::new();
    for (mode, component, w) in form.terms() {
        if component != crate::clusters::Component::Q {
            return Err(StaggeringError::MomentumUnsupported(mode));
        }
        let half = w * FRAC_1_SQRT_2;
        match mode.spatial {
            Spatial::H => {
                out.add_term(ModeId::at_bin(Spatial::H, mode.freq, mode.time), component, half);
                out.add_term(ModeId::at_bin(Spatial::V, mode.freq, mode.time), component, -half);
            }
            Spatial::V => {
                let next = mode.time + 1;
                out.add_term(ModeId::at_bin(Spatial::H, mode.freq, next), component, half);
                out.add_term(ModeId::at_bin(Spatial::V, mode.freq, next), component, half);
            }
        }
    }
    Ok(out)
}

fn dual_pump(pump: &PumpSpec) -> Result<(i32, i32), StaggeringError> {
    match pump.pair() {
        Some((one, two)) if one.p != two.p => Ok((one.p, two.p)),
        _ => Err(ClustersError::NotDualFrequency.into()),
    }
}

/// Edge weights of the wire generated in `bin`, honoring any schedule.
pub fn weights_at(pump: &PumpSpec, bin: i32) -> Result<EdgeWeights, StaggeringError> {
    let (one, two) = pump.pair().ok_or(ClustersError::NotDualFrequency)?;
    let theta1 = one.theta_at(bin).ok_or(StaggeringError::ScheduleMissingBin(bin))?;
    let theta2 = two.theta_at(bin).ok_or(StaggeringError::ScheduleMissingBin(bin))?;
    Ok(edge_weights(theta1, theta2))
}

fn bins_of(form: &QuadratureForm) -> BTreeSet<i32> {
    form.terms().map(|(m, _, _)| m.time).collect()
}

/// Post-staggering nullifier pair generated by bin k at frequency n, at
/// the scale where the anchor pair has unit coefficients:
///
/// ```text
///   X_{h,k} = Q^n_{h,k} - Q^n_{v,k}
///             - a(Q^{p1-n}_{h,k} - Q^{p1-n}_{v,k}) - b(Q^{p1-n}_{h,k+1} + Q^{p1-n}_{v,k+1})
///             - c(Q^{p2-n}_{h,k} - Q^{p2-n}_{v,k}) - d(Q^{p2-n}_{h,k+1} + Q^{p2-n}_{v,k+1})
///   X_{v,k} = Q^n_{h,k+1} + Q^n_{v,k+1}
///             - b(Q^{p1-n}_{h,k} - Q^{p1-n}_{v,k}) + a(Q^{p1-n}_{h,k+1} + Q^{p1-n}_{v,k+1})
///             - d(Q^{p2-n}_{h,k} - Q^{p2-n}_{v,k}) + c(Q^{p2-n}_{h,k+1} + Q^{p2-n}_{v,k+1})
/// ```
fn staggered_pair(
    n: i32,
    p1: i32,
    p2: i32,
    k: i32,
    w: &EdgeWeights,
) -> (QuadratureForm, QuadratureForm) {
    use Spatial::{H, V};
    let at = ModeId::at_bin;
    let mut x_h = QuadratureForm::new();
    x_h.add_q(at(H, n, k), 1.0);
    x_h.add_q(at(V, n, k), -1.0);
    let mut x_v = QuadratureForm::new();
    x_v.add_q(at(H, n, k + 1), 1.0);
    x_v.add_q(at(V, n, k + 1), 1.0);
    for (p, same, cross) in [(p1, w.a, w.b), (p2, w.c, w.d)] {
        x_h.add_q(at(H, p - n, k), -same);
        x_h.add_q(at(V, p - n, k), same);
        x_h.add_q(at(H, p - n, k + 1), -cross);
        x_h.add_q(at(V, p - n, k + 1), -cross);
        x_v.add_q(at(H, p - n, k), -cross);
        x_v.add_q(at(V, p - n, k), cross);
        x_v.add_q(at(H, p - n, k + 1), same);
        x_v.add_q(at(V, p - n, k + 1), same);
    }
    (x_h, x_v)
}

/// Both staggered nullifiers of every (frequency, bin) whose referenced
/// modes all fall inside the window and bin range, ordered by bin, then
/// frequency, h line before v line. Boundary forms are dropped whole.
pub fn staggered_nullifiers(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
) -> Result<Vec<QuadratureForm>, StaggeringError> {
    let (p1, p2) = dual_pump(pump)?;
    let mut forms = Vec::new();
    for k in bins.iter() {
        let w = weights_at(pump, k)?;
        for n in window.iter() {
            if p1 - n == n || p2 - n == n {
                continue;
            }
            if !window.contains(p1 - n) || !window.contains(p2 - n) {
                continue;
            }
            let (x_h, x_v) = staggered_pair(n, p1, p2, k, &w);
            for form in [x_h, x_v] {
                if bins_of(&form).iter().all(|&b| bins.contains(b)) {
                    forms.push(form);
                }
            }
        }
    }
    Ok(forms)
}

/// Closed form of the macronode pair at (n, k), combining the staggered
/// generators of bins k-1 and k:
/// X+ anchors Q^n_{h,k}, X- anchors Q^n_{v,k}, each with coefficient
/// exactly +1. `before` holds bin k-1 weights, `now` bin k weights; with
/// a flat schedule the mixed terms collapse to the familiar static
/// coefficients (same-bin +a/+c, temporal -+ b/2, d/2) bit-exactly.
fn macronode_pair(
    n: i32,
    p1: i32,
    p2: i32,
    k: i32,
    now: &EdgeWeights,
    before: &EdgeWeights,
) -> (QuadratureForm, QuadratureForm) {
    use Spatial::{H, V};
    let at = ModeId::at_bin;
    let mut plus = QuadratureForm::new();
    plus.add_q(at(H, n, k), 1.0);
    let mut minus = QuadratureForm::new();
    minus.add_q(at(V, n, k), 1.0);
    for (p, same_now, cross_now, same_before, cross_before) in
        [(p1, now.a, now.b, before.a, before.b), (p2, now.c, now.d, before.c, before.d)]
    {
        let m = p - n;
        let diff = (same_now - same_before) / 2.0;
        let sum = (same_now + same_before) / 2.0;
        plus.add_q(at(H, m, k), -diff);
        plus.add_q(at(V, m, k), sum);
        plus.add_q(at(H, m, k + 1), -cross_now / 2.0);
        plus.add_q(at(V, m, k + 1), -cross_now / 2.0);
        plus.add_q(at(H, m, k - 1), -cross_before / 2.0);
        plus.add_q(at(V, m, k - 1), cross_before / 2.0);
        minus.add_q(at(H, m, k), sum);
        minus.add_q(at(V, m, k), -diff);
        minus.add_q(at(H, m, k + 1), cross_now / 2.0);
        minus.add_q(at(V, m, k + 1), cross_now / 2.0);
        minus.add_q(at(H, m, k - 1), -cross_before / 2.0);
        minus.add_q(at(V, m, k - 1), cross_before / 2.0);
    }
    (plus, minus)
}

/// Pair of orthogonally polarized modes sharing one (frequency, bin) slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Macronode {
    pub h: ModeId,
    pub v: ModeId,
}

impl Macronode {
    fn at(freq: i32, bin: i32) -> Self {
        Self {
            h: ModeId::at_bin(Spatial::H, freq, bin),
            v: ModeId::at_bin(Spatial::V, freq, bin),
        }
    }

    pub fn members(&self) -> [ModeId; 2] {
        [self.h, self.v]
    }

    pub fn freq(&self) -> i32 {
        self.h.freq
    }

    pub fn bin(&self) -> i32 {
        self.h.time
    }
}

/// Why a (frequency, bin) slot hosts no macronode pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatticeSkipReason {
    /// Some frequency partner falls outside the window.
    PartnerOutsideWindow,
    /// The frequency pairs with itself under one pump line.
    SelfPaired,
    /// Bin k-1 is out of range, so one generator does not exist.
    GeneratorOutsideBins,
    /// A referenced bin (k+1 generically) is out of range.
    ReferenceOutsideBins,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeSkip {
    pub freq: i32,
    pub bin: i32,
    pub reason: LatticeSkipReason,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacronodeSet {
    pub forms: Vec<QuadratureForm>,
    pub macronodes: Vec<Macronode>,
    pub skipped: Vec<LatticeSkip>,
}

/// Macronode nullifier pairs for every admissible (frequency, bin): the
/// bin and its predecessor must both be in range (the two generators must
/// exist), and every referenced mode must be inside the window and range.
/// Ordered by bin, then frequency, X+ before X-.
pub fn macronode_nullifiers(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
) -> Result<MacronodeSet, StaggeringError> {
    let (p1, p2) = dual_pump(pump)?;
    let mut forms = Vec::new();
    let mut macronodes = Vec::new();
    let mut skipped = Vec::new();
    for k in bins.iter() {
        for n in window.iter() {
            let skip = |reason| LatticeSkip { freq: n, bin: k, reason };
            if p1 - n == n || p2 - n == n {
                skipped.push(skip(LatticeSkipReason::SelfPaired));
                continue;
            }
            if !window.contains(p1 - n) || !window.contains(p2 - n) {
                skipped.push(skip(LatticeSkipReason::PartnerOutsideWindow));
                continue;
            }
            if !bins.contains(k - 1) {
                skipped.push(skip(LatticeSkipReason::GeneratorOutsideBins));
                continue;
            }
            let now = weights_at(pump, k)?;
            let before = weights_at(pump, k - 1)?;
            let (plus, minus) = macronode_pair(n, p1, p2, k, &now, &before);
            let support: BTreeSet<i32> =
                bins_of(&plus).union(&bins_of(&minus)).copied().collect();
            if !support.iter().all(|&b| bins.contains(b)) {
                skipped.push(skip(LatticeSkipReason::ReferenceOutsideBins));
                continue;
            }
            forms.push(plus);
            forms.push(minus);
            macronodes.push(Macronode::at(n, k));
        }
    }
    Ok(MacronodeSet { forms, macronodes, skipped })
}

/// Per-bin coupling strengths, one entry per simulated bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinWeights {
    pub bin: i32,
    pub weights: EdgeWeights,
}

/// Compiled 2D cluster: the physical-mode graph, the macronode grouping,
/// the per-bin weights used, and the slots that emitted nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub graph: ClusterGraph,
    pub macronodes: Vec<Macronode>,
    pub bin_weights: Vec<BinWeights>,
    pub skipped: Vec<LatticeSkip>,
    pub window: FreqWindow,
    pub bins: BinRange,
}

impl Lattice {
    /// Bins with both temporal neighbors simulated.
    pub fn bulk_bins(&self) -> Vec<i32> {
        self.bins.bulk().collect()
    }

    /// Induced subgraph on nodes whose bin is in the bulk.
    pub fn bulk_graph(&self) -> ClusterGraph {
        let keep: BTreeSet<ModeId> = self
            .graph
            .nodes()
            .iter()
            .copied()
            .filter(|m| self.bins.bulk().any(|b| b == m.time))
            .collect();
        self.graph.induced(&keep)
    }
}

fn compile_lattice(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
) -> Result<Lattice, StaggeringError> {
    // Resolving every bin's weights up front surfaces schedule holes
    // before any partial output exists.
    let bin_weights: Vec<BinWeights> = bins
        .iter()
        .map(|bin| Ok(BinWeights { bin, weights: weights_at(pump, bin)? }))
        .collect::<Result<_, StaggeringError>>()?;
    let set = macronode_nullifiers(pump, window, bins)?;
    let graph = graph_from_nullifiers(&set.forms)?;
    Ok(Lattice {
        graph,
        macronodes: set.macronodes,
        bin_weights,
        skipped: set.skipped,
        window,
        bins,
    })
}

/// Static-pump lattice. Scheduled pumps must go through
/// [`time_varying_lattice`] so the caller acknowledges the bin coupling.
pub fn lattice_2d(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
) -> Result<Lattice, StaggeringError> {
    if pump.components.iter().any(|c| c.is_scheduled()) {
        return Err(StaggeringError::ScheduledPump);
    }
    compile_lattice(pump, window, bins)
}

/// Lattice under a per-bin pump schedule; components without a schedule
/// keep their static angle. A flat schedule reproduces [`lattice_2d`]
/// output exactly, including bit-identical weights.
pub fn time_varying_lattice(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
) -> Result<Lattice, StaggeringError> {
    compile_lattice(pump, window, bins)
}

/// Covariance of the staggered output over bins [lo, hi+1]: per-bin comb
/// states pushed through the splitter-delay-rotation map, with the
/// leftover edge modes in vacuum.
///
/// With T the orthonormal-row matrix expressing pre-staggering quadratures
/// in post-staggering ones, V2 = T' V0 T + (1 - T' T).
pub fn staggered_covariance(
    pump: &PumpSpec,
    window: FreqWindow,
    bins: BinRange,
    gamma: f64,
) -> Result<CovarianceState, StaggeringError> {
    use std::f64::consts::FRAC_1_SQRT_2;
    let (one, two) = pump.pair().ok_or(ClustersError::NotDualFrequency)?;

    // Stage 0: independent comb states, one per bin, over bin-tagged modes.
    let mut stage0_modes = Vec::new();
    for k in bins.iter() {
        for n in window.iter() {
            stage0_modes.push(ModeId::at_bin(Spatial::H, n, k));
            stage0_modes.push(ModeId::at_bin(Spatial::V, n, k));
        }
    }
    stage0_modes.sort();
    let basis0 = QuadratureBasis::new(stage0_modes).expect("distinct constructed modes");
    let n0 = basis0.n_modes();
    let mut v0 = DMatrix::<f64>::identity(2 * n0, 2 * n0);
    for k in bins.iter() {
        let theta1 = one.theta_at(k).ok_or(StaggeringError::ScheduleMissingBin(k))?;
        let theta2 = two.theta_at(k).ok_or(StaggeringError::ScheduleMissingBin(k))?;
        let comb = comb_g(&PumpSpec::dual(one.p, theta1, two.p, theta2), window)?;
        let state = CovarianceState::from_graph(&comb.graph, gamma)?;
        let local = state.basis();
        let m = local.n_modes();
        // Quadrature index of the bin-tagged copy of local mode i.
        let embed = |i: usize| -> usize {
            let (mode, is_p) = if i < m { (local.modes()[i], false) } else { (local.modes()[i - m], true) };
            let tagged = ModeId::at_bin(mode.spatial, mode.freq, k);
            let q = basis0.q_index(tagged).expect("tagged mode is in stage-0 basis");
            if is_p {
                q + n0
            } else {
                q
            }
        };
        let vk = state.matrix();
        for i in 0..2 * m {
            for j in 0..2 * m {
                v0[(embed(i), embed(j))] = vk[(i, j)];
            }
        }
    }

    // Stage 2: one extra bin at the top catches the delayed v line.
    let mut stage2_modes = Vec::new();
    for k in bins.lo()..=bins.hi() + 1 {
        for n in window.iter() {
            stage2_modes.push(ModeId::at_bin(Spatial::H, n, k));
            stage2_modes.push(ModeId::at_bin(Spatial::V, n, k));
        }
    }
    stage2_modes.sort();
    let basis2 = QuadratureBasis::new(stage2_modes).expect("distinct constructed modes");
    let n2 = basis2.n_modes();

    // Mode-space substitution matrix, rows = stage 0, columns = stage 2.
    let mut t_modes = DMatrix::<f64>::zeros(n0, n2);
    for (row, &mode) in basis0.modes().iter().enumerate() {
        let col = |s, f, b| basis2.q_index(ModeId::at_bin(s, f, b)).expect("in stage-2 range");
        match mode.spatial {
            Spatial::H => {
                t_modes[(row, col(Spatial::H, mode.freq, mode.time))] = FRAC_1_SQRT_2;
                t_modes[(row, col(Spatial::V, mode.freq, mode.time))] = -FRAC_1_SQRT_2;
            }
            Spatial::V => {
                t_modes[(row, col(Spatial::H, mode.freq, mode.time + 1))] = FRAC_1_SQRT_2;
                t_modes[(row, col(Spatial::V, mode.freq, mode.time + 1))] = FRAC_1_SQRT_2;
            }
        }
    }
    let mut t = DMatrix::<f64>::zeros(2 * n0, 2 * n2);
    t.view_mut((0, 0), (n0, n2)).copy_from(&t_modes);
    t.view_mut((n0, n2), (n0, n2)).copy_from(&t_modes);

    let mut v2 = t.transpose() * &v0 * &t + (DMatrix::identity(2 * n2, 2 * n2)
        - t.transpose() * &t);
    // Summation order can leave sub-epsilon asymmetry; mirror the upper
    // triangle so downstream symmetry checks see an exact match.
    for i in 0..2 * n2 {
        for j in (i + 1)..2 * n2 {
            v2[(j, i)] = v2[(i, j)];
        }
    }
    Ok(CovarianceState::from_parts(basis2, v2, gamma)?)
}
