//! String-stability analysis for vehicle platoons under a constant time
//! headway spacing policy with multi-predecessor feedback.
//!
//! - [`tf`]: controller specifications and spacing-error transfer functions.
//! - [`freqstab`]: H∞ norms, spectral radii and robust checks over a lag interval.
//! - [`bounds`]: minimum headway formulas, the closed-form norm test and gain synthesis.
//! - [`nnir`]: impulse-response non-negativity conditions and region scans.
//! - [`sim`]: fixed-step platoon simulation.

pub mod bounds;
pub mod error;
pub mod fmt;
pub mod freqstab;
pub mod nnir;
pub mod poly;
pub mod sim;
pub mod tf;

pub use bounds::{
    analytic_norm_test, h_min, recast_self_accel, synthesize_gains, GainRegionSpec, HeadwayBound, NormTest,
    RecastGains, SynthesizedGains,
};
pub use error::{Error, Result};
pub use freqstab::{hinf_norm, robust_check, spectral_radius_p, Criterion, StabilityReport, SweepConfig, Verdict};
pub use nnir::{region_scan, ScaledTF, ScanGrid};
pub use sim::{amplification_verdict, simulate, Amplification, Disturbance, PlatoonConfig, SimResult};
pub use tf::{Architecture, ControllerSpec, LagSpec, RationalTF, Tap};

/// Caps the rayon pool at `PLATOONLAB_THREADS` when set to a positive integer.
///
/// Returns the number of threads requested, or `None` if the variable is
/// absent or malformed. Has no effect once the global pool exists.
pub fn init_thread_pool_from_env() -> Option<usize> {
    let n = std::env::var("PLATOONLAB_THREADS").ok()?.trim().parse::<usize>().ok()?;
    if n == 0 {
        return None;
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Some(n)
}
