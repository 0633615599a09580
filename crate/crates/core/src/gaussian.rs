//! Symplectic evolution of quadrature covariances.
//!
//! The interaction graph G generates the Heisenberg-picture transform
//! S = exp(gamma M) with M = diag[G, -G] in the (Q..., P...) layout, so a
//! vacuum input evolves to V = S S^T. Everything downstream (squeezed
//! supermodes, symplectic spectra, partial transposition, PPT values) is
//! linear algebra on that covariance.
//!
//! Conventions: Q = a + a†, vacuum covariance is the identity, and a PPT
//! value below 1 certifies entanglement across the tested bipartition.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::hamiltonian::HamiltonianGraph;
use crate::modes::ModeId;
use crate::trig::cos_sin_2theta;

/// Largest accepted deviation of S Omega S^T from Omega.
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum GaussianError {
    #[error("interaction strength must be nonnegative, got {0}")]
    NegativeGamma(f64),
    #[error("matrix is {rows}x{cols}, expected square with even dimension")]
    BadDimension { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    Asymmetric,
    #[error("input is not symplectic: defect {0:.3e}")]
    SymplecticDefect(f64),
    #[error("covariance matrix is not positive-definite")]
    NotPositiveDefinite,
    #[error("partial transpose needs a nonempty proper subset of modes")]
    BadSubset,
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndexOutOfRange { index: usize, n_modes: usize },
    #[error("mode {0} appears twice in the basis")]
    DuplicateMode(ModeId),
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Ordered mode list fixing the (Q_1..Q_N, P_1..P_N) quadrature layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadratureBasis {
    modes: Vec<ModeId>,
}

impl QuadratureBasis {
    pub fn new(mut modes: Vec<ModeId>) -> Result<Self, GaussianError> {
        modes.sort();
        for w in modes.windows(2) {
            if w[0] == w[1] {
                return Err(GaussianError::DuplicateMode(w[0]));
            }
        }
        Ok(Self { modes })
    }

    pub fn from_graph(graph: &HamiltonianGraph) -> Self {
        // Graph modes are already sorted and distinct.
        Self { modes: graph.modes().to_vec() }
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Length of a quadrature vector: 2 per mode.
    pub fn dim(&self) -> usize {
        2 * self.modes.len()
    }

    pub fn index_of(&self, mode: ModeId) -> Option<usize> {
        self.modes.binary_search(&mode).ok()
    }

    pub fn q_index(&self, mode: ModeId) -> Option<usize> {
        self.index_of(mode)
    }

    pub fn p_index(&self, mode: ModeId) -> Option<usize> {
        Some(self.index_of(mode)? + self.modes.len())
    }
}

/// Symplectic form in the Q-block/P-block layout: [[0, I], [-I, 0]].
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for i in 0..n_modes {
        m[(i, n_modes + i)] = 1.0;
        m[(n_modes + i, i)] = -1.0;
    }
    m
}

/// exp(t G) for symmetric G, through one spectral decomposition.
fn exp_symmetric(g: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let se = g.clone().symmetric_eigen();
    let exp_scaled = |s: f64| {
        let mut cols = se.eigenvectors.clone();
        for j in 0..se.eigenvalues.len() {
            cols.column_mut(j).scale_mut((s * se.eigenvalues[j]).exp());
        }
        cols * se.eigenvectors.transpose()
    };
    (exp_scaled(t), exp_scaled(-t))
}

/// Heisenberg transform S = exp(gamma M), M = diag[G, -G].
///
/// gamma = 0 returns the exact identity, so vacuum fixtures stay bit-exact.
pub fn symplectic_from_g(
    graph: &HamiltonianGraph,
    gamma: f64,
) -> Result<DMatrix<f64>, GaussianError> {
    if gamma < 0.0 || gamma.is_nan() {
        return Err(GaussianError::NegativeGamma(gamma));
    }
    let n = graph.dim();
    if gamma == 0.0 {
        return Ok(DMatrix::identity(2 * n, 2 * n));
    }
    let (plus, minus) = exp_symmetric(graph.matrix(), gamma);
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    s.view_mut((0, 0), (n, n)).copy_from(&plus);
    s.view_mut((n, n), (n, n)).copy_from(&minus);
    Ok(s)
}

/// Worst entry of S Omega S^T - Omega.
pub fn symplectic_defect(s: &DMatrix<f64>) -> Result<f64, GaussianError> {
    let dim = s.nrows();
    if s.ncols() != dim || !dim.is_multiple_of(2) {
        return Err(GaussianError::BadDimension { rows: s.nrows(), cols: s.ncols() });
    }
    let om = omega(dim / 2);
    let defect = s * &om * s.transpose() - om;
    Ok(defect.iter().fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// V = S S^T for a vacuum input.
pub fn covariance_from_symplectic(s: &DMatrix<f64>) -> Result<DMatrix<f64>, GaussianError> {
    let defect = symplectic_defect(s)?;
    if defect > SYMPLECTIC_TOLERANCE {
        return Err(GaussianError::SymplecticDefect(defect));
    }
    Ok(s * s.transpose())
}

/// Sign flip of the P rows and columns of `subset` ("local time reversal").
///
/// Bit-exact involution: applying it twice restores the input.
pub fn partial_transpose(
    v: &DMatrix<f64>,
    subset: &[usize],
) -> Result<DMatrix<f64>, GaussianError> {
    let dim = v.nrows();
    if v.ncols() != dim || !dim.is_multiple_of(2) {
        return Err(GaussianError::BadDimension { rows: v.nrows(), cols: v.ncols() });
    }
    let n_modes = dim / 2;
    let mut flip = vec![false; n_modes];
    for &m in subset {
        if m >= n_modes {
            return Err(GaussianError::ModeIndexOutOfRange { index: m, n_modes });
        }
        flip[m] = true;
    }
    let flipped = flip.iter().filter(|&&f| f).count();
    if flipped == 0 || flipped == n_modes {
        return Err(GaussianError::BadSubset);
    }
    let mut w = v.clone();
    for (m, &f) in flip.iter().enumerate() {
        if !f {
            continue;
        }
        let r = n_modes + m;
        for j in 0..dim {
            w[(r, j)] = -w[(r, j)];
        }
        for i in 0..dim {
            w[(i, r)] = -w[(i, r)];
        }
    }
    Ok(w)
}

/// The N nonnegative symplectic eigenvalues of V, ascending.
///
/// Route: Cholesky V = L L^T, then K = L^T Omega L is antisymmetric and
/// K^T K has the squared symplectic eigenvalues doubled up. This stays on
/// real symmetric eigenproblems and the Cholesky failure doubles as the
/// positive-definiteness check.
pub fn symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>, GaussianError> {
    let dim = v.nrows();
    if v.ncols() != dim || !dim.is_multiple_of(2) {
        return Err(GaussianError::BadDimension { rows: v.nrows(), cols: v.ncols() });
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            if v[(i, j)] != v[(j, i)] {
                return Err(GaussianError::Asymmetric);
            }
        }
    }
    let n_modes = dim / 2;
    let chol = v.clone().cholesky().ok_or(GaussianError::NotPositiveDefinite)?;
    let l = chol.l();
    let k = l.transpose() * omega(n_modes) * &l;
    let squares = (k.transpose() * &k).symmetric_eigen().eigenvalues;
    let mut roots: Vec<f64> = squares.iter().map(|&x| x.max(0.0).sqrt()).collect();
    roots.sort_by(f64::total_cmp);
    Ok((0..n_modes).map(|i| (roots[2 * i] + roots[2 * i + 1]) / 2.0).collect())
}

/// Lowest symplectic eigenvalue after partially transposing `subset`.
/// Below 1 certifies entanglement across the bipartition.
pub fn ppt_value(v: &DMatrix<f64>, subset: &[usize]) -> Result<f64, GaussianError> {
    let transposed = partial_transpose(v, subset)?;
    Ok(symplectic_eigenvalues(&transposed)?[0])
}

/// Eigenvector of M = diag[G, -G] over the quadrature basis.
/// Negative eigenvalue means the combination gets squeezed.
#[derive(Clone, Debug, PartialEq)]
pub struct Supermode {
    pub eigenvalue: f64,
    pub coefficients: DVector<f64>,
}

impl Supermode {
    pub fn is_squeezed(&self) -> bool {
        self.eigenvalue < 0.0
    }
}

/// All 2N eigenpairs of M = diag[G, -G], ascending in eigenvalue.
///
/// Each G eigenpair (lambda, u) yields the Q-combination [u; 0] at lambda
/// and the P-combination [0; u] at -lambda. Vectors are unit norm with the
/// first sizable coefficient positive.
pub fn supermodes(graph: &HamiltonianGraph) -> Vec<Supermode> {
    let n = graph.dim();
    let se = graph.matrix().clone().symmetric_eigen();
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let mut u = se.eigenvectors.column(j).clone_owned();
        if let Some(first) = u.iter().find(|c| c.abs() > 1e-9) {
            if *first < 0.0 {
                u.neg_mut();
            }
        }
        let mut q = DVector::zeros(2 * n);
        q.rows_mut(0, n).copy_from(&u);
        let mut p = DVector::zeros(2 * n);
        p.rows_mut(n, n).copy_from(&u);
        out.push(Supermode { eigenvalue: se.eigenvalues[j], coefficients: q });
        out.push(Supermode { eigenvalue: -se.eigenvalues[j], coefficients: p });
    }
    out.sort_by(|a, b| {
        a.eigenvalue.total_cmp(&b.eigenvalue).then_with(|| {
            a.coefficients.iter().zip(b.coefficients.iter()).fold(
                std::cmp::Ordering::Equal,
                |ord, (x, y)| ord.then(x.total_cmp(y)),
            )
        })
    });
    out
}

/// The four closed-form squeezed combinations of the four-mode block, as
/// unit vectors over its 8-dimensional quadrature basis (modes ordered
/// s-h, s-v, i-h, i-v). All four sit at M-eigenvalue -1/sqrt(2).
pub fn quadripartite_squeezed_combinations(theta: f64) -> [DVector<f64>; 4] {
    let (c2, s2) = cos_sin_2theta(theta);
    let w = std::f64::consts::FRAC_1_SQRT_2;
    let vec = |entries: [f64; 8]| DVector::from_iterator(8, entries.into_iter().map(|x| x * w));
    [
        vec([-c2, -s2, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        vec([s2, -c2, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
        vec([0.0, 0.0, 0.0, 0.0, c2, s2, 1.0, 0.0]),
        vec([0.0, 0.0, 0.0, 0.0, s2, -c2, 0.0, 1.0]),
    ]
}

/// Covariance matrix of a Gaussian state over a fixed quadrature basis.
///
/// `source` keeps the generating interaction graph when there is one;
/// derived states (vacuum fixtures, interferometer outputs) carry `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceState {
    basis: QuadratureBasis,
    v: DMatrix<f64>,
    gamma: f64,
    source: Option<HamiltonianGraph>,
}

impl CovarianceState {
    pub fn vacuum(basis: QuadratureBasis) -> Self {
        let dim = basis.dim();
        Self { basis, v: DMatrix::identity(dim, dim), gamma: 0.0, source: None }
    }

    /// Evolve vacuum through the graph: V = exp(2 gamma M).
    pub fn from_graph(graph: &HamiltonianGraph, gamma: f64) -> Result<Self, GaussianError> {
        let s = symplectic_from_g(graph, gamma)?;
        let v = covariance_from_symplectic(&s)?;
        Ok(Self {
            basis: QuadratureBasis::from_graph(graph),
            v,
            gamma,
            source: Some(graph.clone()),
        })
    }

    /// Wrap an externally assembled covariance (e.g. after an
    /// interferometer). Validates shape and symmetry only.
    pub fn from_parts(
        basis: QuadratureBasis,
        v: DMatrix<f64>,
        gamma: f64,
    ) -> Result<Self, GaussianError> {
        if v.nrows() != basis.dim() || v.ncols() != basis.dim() {
            return Err(GaussianError::BadDimension { rows: v.nrows(), cols: v.ncols() });
        }
        for i in 0..v.nrows() {
            for j in (i + 1)..v.ncols() {
                if v[(i, j)] != v[(j, i)] {
                    return Err(GaussianError::Asymmetric);
                }
            }
        }
        Ok(Self { basis, v, gamma, source: None })
    }

    pub fn basis(&self) -> &QuadratureBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn source(&self) -> Option<&HamiltonianGraph> {
        self.source.as_ref()
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>, GaussianError> {
        symplectic_eigenvalues(&self.v)
    }

    pub fn ppt_value(&self, subset: &[usize]) -> Result<f64, GaussianError> {
        ppt_value(&self.v, subset)
    }

    /// v^T V v: the variance of the quadrature combination v (unit vectors
    /// give variances on the vacuum = 1 scale).
    pub fn quadratic_form(&self, coefficients: &DVector<f64>) -> Result<f64, GaussianError> {
        if coefficients.len() != self.basis.dim() {
            return Err(GaussianError::LengthMismatch {
                expected: self.basis.dim(),
                got: coefficients.len(),
            });
        }
        Ok((coefficients.transpose() * &self.v * coefficients)[(0, 0)])
    }
}
