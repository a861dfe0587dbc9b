//! Scattering on a circular quantum graph with attached semi-infinite leads.
//!
//! A ring of circumference `L` carries a piecewise-constant potential and a
//! set of attachment points where identical half-line rays meet the ring
//! through a one-parameter (`beta`) coupling condition. The crate computes:
//!
//! - ring eigenvalues and eigenfunction traces at the attachment points
//!   ([`domain`]),
//! - the ring Green's function, both by direct solve and by certified
//!   spectral series ([`greens`]),
//! - the coupling matrix of Green's values and its resonance-separated form
//!   ([`qmatrix`]),
//! - exact, resonance-limit, and small-`beta` asymptotic scattering matrices
//!   ([`scattering`]),
//! - an independent direct wave-matching solver used as a cross-check
//!   ([`oracle`]),
//! - Landauer transmission, Fermi-averaged conductance, and switch figures
//!   of merit ([`transport`]).

pub mod config;
pub mod domain;
pub mod error;
pub mod greens;
pub mod oracle;
pub mod qmatrix;
pub mod scattering;
pub mod transport;

pub use config::{DomainConfig, SegmentConfig, SwitchConfig};
pub use domain::{
    piecewise_ring_eigendata, uniform_ring_eigendata, EigenData, RingDomain, Segment,
    TransferMatrix,
};
pub use error::{Result, RingError};
pub use greens::{green_direct, GreenValue, SeriesGreen, SpectralGreen};
pub use oracle::{assemble_full_s, scatter_direct};
pub use qmatrix::{build_q, resonance_data, resonance_data_with_reference, QMatrix, ResonanceData};
pub use scattering::{
    smatrix, smatrix_asymptotic, smatrix_at_resonance, unitarity_defect, ScatteringMatrix,
};
pub use transport::{
    averaged_conductance, barrier_switch, fermi_weight, interference_switch, switch_report,
    transmission, ConductanceReport, Engine, SwitchSpec, TransmittingState,
};
