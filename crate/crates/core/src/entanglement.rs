//! Bipartitions of the four-mode block and the rotation-angle PPT scan.
//!
//! Genuine multipartite entanglement is certified the way the source
//! analysis does it: every bipartition of the state must have PPT value
//! below 1. The scan sweeps the pump rotation over [0, pi/4] and reports
//! the full (angle x bipartition) table.

use thiserror::Error;

use crate::gaussian::{CovarianceState, GaussianError};
use crate::hamiltonian::quadripartite_g;

#[derive(Debug, Error, PartialEq)]
pub enum EntanglementError {
    #[error("bipartition enumeration supports 2..=20 modes, got {0}")]
    ModeCountOutOfRange(usize),
    #[error("mode index {index} out of range for {n_modes} modes")]
    IndexOutOfRange { index: usize, n_modes: usize },
    #[error("a bipartition needs a nonempty proper subset")]
    DegenerateSplit,
    #[error("scan grid is empty")]
    EmptyGrid,
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// Two-way split of n modes, canonicalized so the listed side is the
/// smaller one, with ties broken toward the side holding mode 1.
///
/// That convention reproduces the usual label sequence for four modes:
/// 1|234, 2|134, 3|124, 4|123, 12|34, 13|24, 14|23.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bipartition {
    left: Vec<usize>,
    n_modes: usize,
}

impl Bipartition {
    /// `left` holds 0-based mode positions; either side may be passed in.
    pub fn new(left: &[usize], n_modes: usize) -> Result<Self, EntanglementError> {
        if !(2..=20).contains(&n_modes) {
            return Err(EntanglementError::ModeCountOutOfRange(n_modes));
        }
        let mut side = vec![false; n_modes];
        for &i in left {
            if i >= n_modes {
                return Err(EntanglementError::IndexOutOfRange { index: i, n_modes });
            }
            side[i] = true;
        }
        let count = side.iter().filter(|&&s| s).count();
        if count == 0 || count == n_modes {
            return Err(EntanglementError::DegenerateSplit);
        }
        let keep_left = match (2 * count).cmp(&n_modes) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => side[0],
        };
        let left = (0..n_modes).filter(|&i| side[i] == keep_left).collect();
        Ok(Self { left, n_modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// The canonical (listed-first) side, 0-based, ascending.
    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> Vec<usize> {
        (0..self.n_modes).filter(|i| !self.left.contains(i)).collect()
    }

    /// Label with 1-based mode numbers, digits run together while they
    /// stay single digits: "13|24".
    pub fn label(&self) -> String {
        let side = |modes: &[usize]| {
            let parts: Vec<String> = modes.iter().map(|i| (i + 1).to_string()).collect();
            parts.join(if self.n_modes > 9 { "," } else { "" })
        };
        format!("{}|{}", side(&self.left), side(&self.right()))
    }
}

fn subsets_of_size(n: usize, size: usize, must_have_first: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, size, current, out);
            current.pop();
        }
    }
    if must_have_first {
        current.push(0);
        rec(1, n, size, &mut current, &mut out);
    } else {
        rec(0, n, size, &mut current, &mut out);
    }
    out
}

/// All 2^(n-1) - 1 bipartitions: sides ascending in size, lexicographic
/// within a size, and only mode-1 sides for the even split.
pub fn enumerate_bipartitions(n_modes: usize) -> Result<Vec<Bipartition>, EntanglementError> {
    if !(2..=20).contains(&n_modes) {
        return Err(EntanglementError::ModeCountOutOfRange(n_modes));
    }
    let mut out = Vec::new();
    for size in 1..=(n_modes / 2) {
        let balanced = 2 * size == n_modes;
        for left in subsets_of_size(n_modes, size, balanced) {
            out.push(Bipartition { left, n_modes });
        }
    }
    Ok(out)
}

/// Evenly spaced angles covering [0, pi/4]; endpoints land exactly.
pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| std::f64::consts::FRAC_PI_4 * (i as f64 / (points - 1) as f64))
            .collect(),
    }
}

/// PPT values over (angle grid) x (the seven four-mode bipartitions).
#[derive(Clone, Debug, PartialEq)]
pub struct PptScan {
    thetas: Vec<f64>,
    bipartitions: Vec<Bipartition>,
    /// values[i][j]: angle i, bipartition j.
    values: Vec<Vec<f64>>,
}

impl PptScan {
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn bipartitions(&self) -> &[Bipartition] {
        &self.bipartitions
    }

    pub fn value(&self, theta_index: usize, bipartition_index: usize) -> f64 {
        self.values[theta_index][bipartition_index]
    }

    pub fn row(&self, theta_index: usize) -> &[f64] {
        &self.values[theta_index]
    }
}

/// Scan the four-mode block over `thetas` at fixed interaction strength.
/// gamma = 0 is allowed and returns the all-ones vacuum table.
pub fn ppt_scan(thetas: &[f64], gamma: f64) -> Result<PptScan, EntanglementError> {
    if thetas.is_empty() {
        return Err(EntanglementError::EmptyGrid);
    }
    let bipartitions = enumerate_bipartitions(4)?;
    let mut values = Vec::with_capacity(thetas.len());
    for &theta in thetas {
        let state = CovarianceState::from_graph(&quadripartite_g(theta), gamma)?;
        let row: Result<Vec<f64>, GaussianError> =
            bipartitions.iter().map(|b| state.ppt_value(b.left())).collect();
        values.push(row?);
    }
    Ok(PptScan { thetas: thetas.to_vec(), bipartitions, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::partial_transpose;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    const CANONICAL_ORDER: [&str; 7] = ["1|234", "2|134", "3|124", "4|123", "12|34", "13|24", "14|23"];

    #[test]
    fn four_mode_bipartitions_come_in_canonical_order() {
        let bs = enumerate_bipartitions(4).unwrap();
        let labels: Vec<String> = bs.iter().map(Bipartition::label).collect();
        assert_eq!(labels, CANONICAL_ORDER);
    }

    #[test]
    fn counts_match_the_closed_form() {
        assert_eq!(enumerate_bipartitions(2).unwrap().len(), 1);
        assert_eq!(enumerate_bipartitions(2).unwrap()[0].label(), "1|2");
        assert_eq!(enumerate_bipartitions(5).unwrap().len(), 15);
        assert_eq!(enumerate_bipartitions(6).unwrap().len(), 31);
    }

    #[test]
    fn mode_count_is_guarded() {
        assert_eq!(
            enumerate_bipartitions(1).unwrap_err(),
            EntanglementError::ModeCountOutOfRange(1)
        );
        assert_eq!(
            enumerate_bipartitions(21).unwrap_err(),
            EntanglementError::ModeCountOutOfRange(21)
        );
    }

    #[test]
    fn construction_canonicalizes_either_side() {
        let b = Bipartition::new(&[1, 2, 3], 4).unwrap();
        assert_eq!(b.label(), "1|234");
        assert_eq!(b.left(), &[0]);
        let tie = Bipartition::new(&[2, 3], 4).unwrap();
        assert_eq!(tie.label(), "12|34");
        assert_eq!(Bipartition::new(&[], 4).unwrap_err(), EntanglementError::DegenerateSplit);
        assert_eq!(
            Bipartition::new(&[0, 1, 2, 3], 4).unwrap_err(),
            EntanglementError::DegenerateSplit
        );
        assert_eq!(
            Bipartition::new(&[7], 4).unwrap_err(),
            EntanglementError::IndexOutOfRange { index: 7, n_modes: 4 }
        );
    }

    #[test]
    fn wide_systems_use_comma_labels() {
        let b = Bipartition::new(&[0, 9], 10).unwrap();
        assert_eq!(b.label(), "1,10|2,3,4,5,6,7,8,9");
    }

    #[test]
    fn grid_hits_both_endpoints_exactly() {
        let g = theta_grid(101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], FRAC_PI_4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn vacuum_scan_is_exactly_flat() {
        let scan = ppt_scan(&[0.0, 0.1, FRAC_PI_8], 0.0).unwrap();
        for i in 0..3 {
            assert_eq!(scan.row(i), &[1.0; 7]);
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        assert_eq!(ppt_scan(&[], 0.1).unwrap_err(), EntanglementError::EmptyGrid);
    }

    #[test]
    fn interior_angles_break_every_bipartition() {
        let scan = ppt_scan(&[FRAC_PI_4 / 4.0, FRAC_PI_8, 3.0 * FRAC_PI_4 / 4.0], 0.1).unwrap();
        for i in 0..3 {
            for (j, b) in scan.bipartitions().iter().enumerate() {
                assert!(
                    scan.value(i, j) < 1.0 - 1e-6,
                    "{} at grid point {i}: {}",
                    b.label(),
                    scan.value(i, j)
                );
            }
        }
    }

    #[test]
    fn endpoint_angles_keep_exactly_one_separable_cut() {
        let scan = ppt_scan(&[0.0, FRAC_PI_4], 0.1).unwrap();
        // theta = 0 factorizes into pairs (1,3) and (2,4): cut 13|24 stays 1.
        for (j, b) in scan.bipartitions().iter().enumerate() {
            let v = scan.value(0, j);
            if b.label() == "13|24" {
                assert!((v - 1.0).abs() < 1e-9, "13|24 gave {v}");
            } else {
                assert!(v < 1.0 - 1e-6, "{} gave {v}", b.label());
            }
            let v = scan.value(1, j);
            if b.label() == "14|23" {
                assert!((v - 1.0).abs() < 1e-9, "14|23 gave {v}");
            } else {
                assert!(v < 1.0 - 1e-6, "{} gave {v}", b.label());
            }
        }
    }

    /// At theta = 0 the state factorizes into independent squeezed pairs
    /// (1,3) and (2,4). Build those two-mode blocks separately, embed them,
    /// and check both the covariance and the 13|24 cut against the full
    /// calculation: transposing a whole pair leaves the embedded matrix
    /// fixed, so that cut is as separable as a pure state can be.
    #[test]
    fn factorized_cut_oracle() {
        use crate::hamiltonian::HamiltonianGraph;
        use crate::modes::{ModeId, Spatial};
        use nalgebra::DMatrix;
        use std::f64::consts::FRAC_1_SQRT_2;

        let gamma = 0.1;
        let rail = |spatial, coupling: f64| {
            let modes = vec![ModeId::new(spatial, 0), ModeId::new(spatial, 1)];
            let g = DMatrix::from_row_slice(2, 2, &[0.0, coupling, coupling, 0.0]);
            CovarianceState::from_graph(&HamiltonianGraph::new(modes, g).unwrap(), gamma)
                .unwrap()
        };
        let v_h = rail(Spatial::H, FRAC_1_SQRT_2);
        let v_v = rail(Spatial::V, -FRAC_1_SQRT_2);

        // Embed: full-state mode order is [h0, v0, h1, v1].
        let mut embedded = DMatrix::zeros(8, 8);
        for (rail_state, slots) in [(&v_h, [0usize, 2]), (&v_v, [1usize, 3])] {
            for (bi, &i) in slots.iter().enumerate() {
                for (bj, &j) in slots.iter().enumerate() {
                    embedded[(i, j)] = rail_state.matrix()[(bi, bj)];
                    embedded[(i + 4, j + 4)] = rail_state.matrix()[(bi + 2, bj + 2)];
                }
            }
        }

        let full = CovarianceState::from_graph(&quadripartite_g(0.0), gamma).unwrap();
        let diff = (full.matrix() - &embedded).iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(diff < 1e-14, "embedding mismatch {diff}");

        assert_eq!(partial_transpose(&embedded, &[0, 2]).unwrap(), embedded);
        let cut = crate::gaussian::ppt_value(&embedded, &[0, 2]).unwrap();
        assert!((cut - 1.0).abs() < 1e-12);
    }

    #[test]
    fn value_multisets_are_symmetric_about_the_midpoint() {
        for theta in [0.0, 0.05, 0.11, FRAC_PI_8 / 2.0] {
            let scan = ppt_scan(&[theta, FRAC_PI_4 - theta], 0.1).unwrap();
            let mut lo = scan.row(0).to_vec();
            let mut hi = scan.row(1).to_vec();
            lo.sort_by(f64::total_cmp);
            hi.sort_by(f64::total_cmp);
            for (a, b) in lo.iter().zip(&hi) {
                assert!((a - b).abs() < 1e-9, "theta={theta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn separability_appears_only_at_the_endpoints() {
        let scan = ppt_scan(&theta_grid(101), 0.1).unwrap();
        for i in 0..101 {
            let near_one = scan.row(i).iter().filter(|&&v| v >= 1.0 - 1e-9).count();
            let expected = if i == 0 || i == 100 { 1 } else { 0 };
            assert_eq!(near_one, expected, "grid point {i}");
        }
    }
}
