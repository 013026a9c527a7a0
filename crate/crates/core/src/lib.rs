//! Consensus dynamics under quantized inter-agent communication.
//!
//! Agents hold real-valued states but observe only integer-quantized
//! versions of their neighbours' states, so the coupled dynamics
//! `ẋ = -D·x + A·q(x)` are piecewise affine with a discontinuous
//! right-hand side. The crate provides:
//!
//! * weighted directed graphs and the spectral quantities controlling the
//!   distance-to-consensus bound ([`graph`]);
//! * the uniform quantizer, its cell geometry, and the set-valued
//!   regularization of the field on the discontinuity set ([`quantize`]);
//! * the field in its equivalent algebraic forms ([`dynamics`]);
//! * fixed-step explicit Euler simulation with convergence detection and
//!   chattering diagnostics ([`integrator`]);
//! * classification and box enumeration of Carathéodory / extended /
//!   Krasowskii equilibria ([`equilibria`]);
//! * trajectory-level checks of order preservation, the spectral tube
//!   bound, and the Lyapunov decay inequality ([`metrics`]).

pub mod dynamics;
pub mod equilibria;
pub mod graph;
pub mod integrator;
mod linalg;
pub mod metrics;
pub mod quantize;

pub use dynamics::{consensus_stats, field, field_cell, field_linear, ConsensusStats, State};
pub use equilibria::{
    classify_point, enumerate_extended_equilibria, enumerate_extended_equilibria_monotone,
    path_extremal_equilibrium, path_extremal_spread, solve_cell_fixed_point, zero_in_hull,
    Classes, EquilibriaError, EquilibriumRecord, HullCertificate, ENUM_BUDGET,
};
pub use graph::{
    connectivity_class, is_weight_balanced, load_edge_list, make_graph, spectral_summary,
    sym_laplacian_eigenvalues, ConnectivityClass, Graph, GraphError, GraphSpec, SpectralSummary,
};
pub use integrator::{
    chattering_score, detect_limit, euler_step, simulate, simulate_field, uniform_initial_state,
    Converged, FieldKind, SimConfig, SimError, Trajectory,
};
pub use metrics::{
    cell_dwell_report, check_m_bound, check_order_preservation, lyapunov_decay_check,
    BoundReport, DecayReport, DwellRecord, MetricsError, OrderReport,
};
pub use quantize::{
    boundary_set, feasible_entry_sector_fast, feasible_entry_sectors, krasowskii_vertices,
    q_scalar, q_vec, sector_field_limit, CellIndex, KrasowskiiHull, QuantizeError, SectorMask,
    HALF_TOL, SECTOR_CAP,
};
