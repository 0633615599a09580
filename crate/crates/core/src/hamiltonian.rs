//! Adjacency matrices of the interaction graph.
//!
//! A rotated first-order pump line at comb index p couples the h/v mode pair
//! at frequency n to the pair at p - n through the 2x2 block
//!
//! ```text
//!   alpha(theta) = (1/sqrt 2) [ cos 2theta   sin 2theta ]
//!                             [ sin 2theta  -cos 2theta ]
//! ```
//!
//! `quadripartite_g` is that block embedded once (signal at n = 0, idler at
//! n = 1); `comb_g` tiles it over a finite frequency window for one or two
//! pump lines. Frequencies whose partner falls outside the window keep zero
//! rows, so "bulk" claims downstream always restrict to modes with every
//! partner in range.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::modes::{pump_amplitudes, ModeId, PumpSpec, Spatial};

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonianError {
    #[error("frequency window [{n_min}, {n_max}] must contain at least two indices")]
    WindowTooSmall { n_min: i32, n_max: i32 },
    #[error("pump has no components")]
    EmptyPump,
    #[error("pump components share comb index {0}")]
    DuplicatePumpIndex(i32),
    #[error("matrix dimension {dim} does not match {modes} modes")]
    DimensionMismatch { dim: usize, modes: usize },
    #[error("coupling matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("self-coupling on the diagonal at index {0}")]
    SelfCoupling(usize),
    #[error("mode list contains {0} twice")]
    DuplicateMode(ModeId),
}

/// Closed range of comb indices kept by a finite truncation of the comb.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreqWindow {
    n_min: i32,
    n_max: i32,
}

impl FreqWindow {
    /// At least two indices, else no pair of distinct frequencies fits.
    pub fn new(n_min: i32, n_max: i32) -> Result<Self, HamiltonianError> {
        if n_max < n_min || n_max - n_min + 1 < 2 {
            return Err(HamiltonianError::WindowTooSmall { n_min, n_max });
        }
        Ok(Self { n_min, n_max })
    }

    pub fn n_min(self) -> i32 {
        self.n_min
    }

    pub fn n_max(self) -> i32 {
        self.n_max
    }

    pub fn len(self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn contains(self, n: i32) -> bool {
        self.n_min <= n && n <= self.n_max
    }

    pub fn iter(self) -> impl Iterator<Item = i32> {
        self.n_min..=self.n_max
    }

    pub fn translated(self, by: i32) -> Self {
        Self { n_min: self.n_min + by, n_max: self.n_max + by }
    }
}

/// Mode list plus the symmetric coupling matrix indexed by it.
///
/// Rows follow the `ModeId` ordering (freq, then spatial, then time bin).
/// Symmetry and the zero diagonal are enforced bitwise at construction; the
/// in-scope pump family never produces self-coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianGraph {
    modes: Vec<ModeId>,
    g: DMatrix<f64>,
}

impl HamiltonianGraph {
    pub fn new(mut modes: Vec<ModeId>, g: DMatrix<f64>) -> Result<Self, HamiltonianError> {
        let n = modes.len();
        if g.nrows() != n || g.ncols() != n {
            return Err(HamiltonianError::DimensionMismatch { dim: g.nrows(), modes: n });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| modes[i]);
        for w in order.windows(2) {
            if modes[w[0]] == modes[w[1]] {
                return Err(HamiltonianError::DuplicateMode(modes[w[0]]));
            }
        }
        let already_sorted = order.iter().enumerate().all(|(i, &j)| i == j);
        let g = if already_sorted {
            g
        } else {
            modes = order.iter().map(|&i| modes[i]).collect();
            DMatrix::from_fn(n, n, |i, j| g[(order[i], order[j])])
        };
        for i in 0..n {
            if g[(i, i)] != 0.0 {
                return Err(HamiltonianError::SelfCoupling(i));
            }
            for j in (i + 1)..n {
                if g[(i, j)] != g[(j, i)] {
                    return Err(HamiltonianError::Asymmetric { i, j });
                }
            }
        }
        Ok(Self { modes, g })
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn index_of(&self, mode: ModeId) -> Option<usize> {
        self.modes.binary_search(&mode).ok()
    }

    pub fn coupling(&self, a: ModeId, b: ModeId) -> Option<f64> {
        Some(self.g[(self.index_of(a)?, self.index_of(b)?)])
    }
}

/// A frequency that would pair with itself (n = p/2) and was left uncoupled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegenerateSkip {
    pub pump_p: i32,
    pub freq: i32,
}

/// `comb_g` output: the graph plus any degenerate indices that were skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct CombGraph {
    pub graph: HamiltonianGraph,
    pub warnings: Vec<DegenerateSkip>,
}

/// Coupling block of one pump line, in (h, v) x (h, v) order.
fn alpha_block(theta: f64) -> [[f64; 2]; 2] {
    let amps = pump_amplitudes(theta);
    let cross = amps.hg11 * std::f64::consts::FRAC_1_SQRT_2;
    [[amps.hg20, cross], [cross, amps.hg02]]
}

/// Tile the pump coupling blocks over every energy-conserving frequency pair
/// inside `window`.
pub fn comb_g(pump: &PumpSpec, window: FreqWindow) -> Result<CombGraph, HamiltonianError> {
    if pump.components.is_empty() {
        return Err(HamiltonianError::EmptyPump);
    }
    for (i, a) in pump.components.iter().enumerate() {
        for b in &pump.components[i + 1..] {
            if a.p == b.p {
                return Err(HamiltonianError::DuplicatePumpIndex(a.p));
            }
        }
    }

    let modes: Vec<ModeId> = window
        .iter()
        .flat_map(|n| [ModeId::new(Spatial::H, n), ModeId::new(Spatial::V, n)])
        .collect();
    let dim = modes.len();
    let mut g = DMatrix::zeros(dim, dim);
    // Sorted construction: frequency n sits at rows (2(n - n_min), +1).
    let idx = |spatial: Spatial, n: i32| -> usize {
        2 * (n - window.n_min()) as usize + (spatial == Spatial::V) as usize
    };

    let mut warnings = Vec::new();
    for component in &pump.components {
        let alpha = alpha_block(component.theta);
        for n in window.iter() {
            let m = component.p - n;
            if m == n {
                warnings.push(DegenerateSkip { pump_p: component.p, freq: n });
                continue;
            }
            // Unordered pairs once; the mirror assignment keeps G bitwise symmetric.
            if m < n || !window.contains(m) {
                continue;
            }
            for (r, row_spatial) in [Spatial::H, Spatial::V].into_iter().enumerate() {
                for (c, col_spatial) in [Spatial::H, Spatial::V].into_iter().enumerate() {
                    let w = component.amplitude * alpha[r][c];
                    g[(idx(row_spatial, n), idx(col_spatial, m))] += w;
                    g[(idx(col_spatial, m), idx(row_spatial, n))] += w;
                }
            }
        }
    }

    Ok(CombGraph { graph: HamiltonianGraph::new(modes, g)?, warnings })
}

/// The four-mode block of a single rotated pump line: signal pair at n = 0,
/// idler pair at n = 1, coupling matrix [[0, alpha], [alpha, 0]].
pub fn quadripartite_g(theta: f64) -> HamiltonianGraph {
    let window = FreqWindow::new(0, 1).expect("two-index window");
    comb_g(&PumpSpec::single(1, theta), window)
        .expect("single pump line never degenerates on [0, 1]")
        .graph
}
