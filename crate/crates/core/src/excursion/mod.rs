//! Path calculus on sampled nonnegative paths: straddling excursions,
//! excision and relocation, local time and the bridge/excursion
//! transform, the length measure `m_f`, and the relocation kernel.

mod grid;
mod kappa;
mod local_time;
mod measure;

pub use grid::{insert_excursion, u_breve, u_check, u_tilde, Excised, GridFunction, StraddleFrame};
pub use kappa::{default_cutoff, kappa_plus_lattice, kappa_plus_sample, KappaDraw, LatticeKappaDraw};
pub use local_time::{
    bridge_from_excursion, excursion_from_bridge, k_left, local_time_and_split, BridgeSplit, LocalTime,
    LocalTimeEstimator, LocalTimeRegistry, Occupation, ZeroCount,
};
pub use measure::{level_sweep, mf_integrate, AreaSampler, BridgeStraddle, Estimate, MfView};
