//! Energy management for networks of grid-connected microgrids.
//!
//! Each microgrid runs generators and storage against a net load, trades with
//! the main grid, and may exchange power with its peers. The network schedule
//! is solved either centrally as one MILP or by per-microgrid agents that
//! coordinate through an ADMM exchange loop, after which a proportional
//! allocation step repairs any residual bilateral mismatch.

pub mod lp;
pub mod model;
pub mod scenario;
pub mod obadmm;
pub mod pea;
pub mod analytics;
pub mod cli;
