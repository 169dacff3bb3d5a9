//! Fixtures shared by the benchmarks.

use platoonlab::{Architecture, ControllerSpec, LagSpec, PlatoonConfig};

pub const TAU0: f64 = 0.5;

/// Reference predecessor-following controller at a string-stable headway.
pub fn pf_spec() -> ControllerSpec {
    ControllerSpec::pf(45.0, 0.8, 0.25, 0.88, 5.0).expect("valid gains")
}

pub fn rpf_spec(r: usize) -> ControllerSpec {
    ControllerSpec::equal_gains(Architecture::Rpf(r), 45.0, 0.8, 0.25, 0.68, 5.0).expect("valid gains")
}

/// Reference platoon of `n` vehicles, simulated for `t_end` seconds.
pub fn platoon(n: usize, t_end: f64) -> PlatoonConfig {
    let mut cfg = PlatoonConfig::new(n, pf_spec(), LagSpec::at_bound(TAU0).expect("valid lag"));
    cfg.t_end = t_end;
    cfg
}
