//! Entangled frequency combs from a spatially structured OPO pump.
//!
//! A single OPO pumped at the second harmonic with a rotated first-order
//! Hermite-Gauss beam couples pairs of comb lines in two polarization-like
//! spatial modes. This crate builds the resulting quadratic interaction
//! graphs, evolves vacuum through them symplectically, tests multipartite
//! entanglement with the PPT criterion, compiles approximate cluster-state
//! graphs from nullifier combinations, and folds dual-rail wires into
//! two-dimensional macronode lattices with an optional time-varying pump.
//!
//! Conventions used throughout:
//!
//! * quadratures are `Q = a + a†`, `P = -i(a - a†)`, vacuum covariance = 1;
//! * matrices over modes order rows by [`ModeId`]'s (freq, spatial, time);
//! * quadrature vectors put all Q components first, then all P components.

mod trig;

pub mod clusters;
pub mod entanglement;
pub mod gaussian;
pub mod hamiltonian;
pub mod modes;
pub mod staggering;

pub use clusters::{
    dual_rail_nullifiers, edge_weights, graph_from_nullifiers, nullifier_variances, ClusterEdge,
    ClusterGraph, ClustersError, Component, EdgeWeights, NullifierSet, QuadratureForm,
    SkipReason, SkippedNullifier, RECIPROCITY_TOLERANCE,
};
pub use entanglement::{
    enumerate_bipartitions, ppt_scan, theta_grid, Bipartition, EntanglementError, PptScan,
};
pub use gaussian::{
    covariance_from_symplectic, omega, partial_transpose, ppt_value,
    quadripartite_squeezed_combinations, supermodes, symplectic_defect, symplectic_eigenvalues,
    symplectic_from_g, CovarianceState, GaussianError, QuadratureBasis, Supermode,
    SYMPLECTIC_TOLERANCE,
};
pub use hamiltonian::{
    comb_g, quadripartite_g, CombGraph, DegenerateSkip, FreqWindow, HamiltonianError,
    HamiltonianGraph,
};
pub use modes::{
    allowed_processes, conserves_orders, overlap_integral, overlap_integral_with_points,
    processes_for, pump_amplitudes, HGIndex, ModeId, ModesError, Process, PumpAmplitudes,
    PumpComponent, PumpSpec, Spatial, DEFAULT_QUADRATURE_POINTS, MIN_QUADRATURE_POINTS,
};
pub use staggering::{
    apply_transforms, lattice_2d, macronode_nullifiers, staggered_covariance,
    staggered_nullifiers, staggering_substitution, time_varying_lattice, weights_at, BinRange,
    BinWeights, Lattice, LatticeSkip, LatticeSkipReason, Macronode, MacronodeSet,
    OpticalTransform, StaggeringError,
};
