use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use platoonlab::bounds::{self, check_accel_gain};
use platoonlab::fmt::sig9;
use platoonlab::nnir::{self, AxisRange, ResidueTest};
use platoonlab::sim::{self, reference, HEADWAY_SCENARIOS};
use platoonlab::tf::{Architecture, ControllerSpec, LagSpec};
use platoonlab::{Criterion, Disturbance, PlatoonConfig, ScanGrid, SweepConfig, Verdict};

use crate::recipe::{ArchKind, CommandKind, CriterionKind, Params, ResidueKind};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;

/// Runs `kind` with fully merged parameters, writing the report to `out`.
pub fn execute(kind: CommandKind, p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    match kind {
        CommandKind::Analyze => analyze(p, out),
        CommandKind::Bounds => bounds_cmd(p, out),
        CommandKind::Synthesize => synthesize(p, out),
        CommandKind::Nnir => nnir_cmd(p, out),
        CommandKind::Simulate => simulate(p, out),
        CommandKind::Table3 => table3(p, out),
    }
}

fn architecture(p: &Params) -> Result<Architecture> {
    Ok(match p.arch.unwrap_or(ArchKind::Pf) {
        ArchKind::Pf => {
            if p.r.is_some_and(|r| r != 1) {
                bail!("pf has a single predecessor; drop --r or use --arch rpf");
            }
            Architecture::Pf
        }
        ArchKind::Rpf => Architecture::Rpf(p.r.ok_or_else(|| anyhow!("--r is required for rpf"))?),
        ArchKind::OneAndRth => Architecture::OneAndRth(p.r.ok_or_else(|| anyhow!("--r is required for one-and-rth"))?),
    })
}

fn controller(p: &Params) -> Result<ControllerSpec> {
    let arch = architecture(p)?;
    let ka = p.ka.unwrap_or(reference::KA);
    check_accel_gain(arch, ka)?;
    let hw = p.hw.ok_or_else(|| anyhow!("--hw is required"))?;
    Ok(ControllerSpec::equal_gains(
        arch,
        p.kp.unwrap_or(reference::KP),
        p.kv.unwrap_or(reference::KV),
        ka,
        hw,
        p.d.unwrap_or(reference::D),
    )?)
}

/// Writes `text` to `out` and, when given, to `path`.
fn emit(out: &mut dyn std::io::Write, path: Option<&Path>, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    if let Some(path) = path {
        write_file(path, text)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn analyze(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let spec = controller(p)?;
    let tau0 = p.tau0.unwrap_or(reference::TAU0);
    let criterion = match p.criterion {
        Some(CriterionKind::Hinf) => Criterion::HinfSingle,
        Some(CriterionKind::Rho) => Criterion::SpectralRadius,
        Some(CriterionKind::Sum) => Criterion::SumNorm,
        None if spec.single_tap().is_some() => Criterion::HinfSingle,
        None => Criterion::SpectralRadius,
    };
    let report = platoonlab::robust_check(&spec, tau0, &SweepConfig::default(), criterion)?;
    let mut s = String::new();
    writeln!(s, "arch = {}", spec.arch())?;
    writeln!(s, "h_w = {}", sig9(spec.h_w()))?;
    writeln!(s, "tau0 = {}", sig9(tau0))?;
    writeln!(s, "criterion = {}", report.criterion)?;
    writeln!(s, "worst_value = {}", sig9(report.worst_value))?;
    writeln!(s, "worst_omega = {}", sig9(report.worst_omega))?;
    writeln!(s, "worst_tau = {}", sig9(report.worst_tau))?;
    writeln!(s, "verdict = {}", report.verdict)?;
    emit(out, p.out.as_deref(), &s)?;
    Ok(match report.verdict {
        Verdict::RobustlyStringStable => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
    })
}

fn bound_or_na(arch: Architecture, ka: f64, tau0: f64) -> String {
    bounds::h_min(arch, ka, tau0).map_or_else(|_| "n/a".into(), |b| sig9(b.h_min))
}

fn bounds_cmd(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let tau0 = p.tau0.unwrap_or(reference::TAU0);
    if !(tau0.is_finite() && tau0 > 0.0) {
        bail!("tau0 must be > 0 (got {tau0})");
    }
    let r = p.r.unwrap_or(1);
    let ka = p.ka.unwrap_or(0.0);
    if r == 0 {
        bail!("r must be >= 1");
    }
    if !(ka.is_finite() && ka >= 0.0) {
        bail!("ka must be >= 0 (got {ka})");
    }

    let mut s = String::new();
    if p.r_max.is_none() && p.ka_max.is_none() {
        writeln!(s, "tau0 = {}", sig9(tau0))?;
        writeln!(s, "r = {r}")?;
        writeln!(s, "k_a = {}", sig9(ka))?;
        writeln!(s, "pf = {}", bound_or_na(Architecture::Pf, ka, tau0))?;
        writeln!(s, "rpf = {}", bound_or_na(Architecture::Rpf(r), ka, tau0))?;
        writeln!(s, "one-and-rth = {}", bound_or_na(Architecture::OneAndRth(r), ka, tau0))?;
        emit(out, p.out.as_deref(), &s)?;
        return Ok(EXIT_OK);
    }

    let r_max = p.r_max.unwrap_or(r);
    let ka_max = p.ka_max.unwrap_or(ka);
    let step = p.ka_step.unwrap_or(0.05);
    if r_max < r {
        bail!("r-max ({r_max}) is below r ({r})");
    }
    if !(step.is_finite() && step > 0.0) {
        bail!("ka-step must be > 0 (got {step})");
    }
    if !(ka_max.is_finite() && ka_max >= ka) {
        bail!("ka-max ({ka_max}) is below ka ({ka})");
    }
    let n_ka = ((ka_max - ka) / step + 1e-9).floor() as usize + 1;
    s.push_str("arch,r,k_a,h_min\n");
    for rr in r..=r_max {
        for k in 0..n_ka {
            let kk = ka + k as f64 * step;
            let mut rows = vec![(Architecture::Rpf(rr), "rpf")];
            if rr == 1 {
                rows.insert(0, (Architecture::Pf, "pf"));
            } else {
                rows.push((Architecture::OneAndRth(rr), "one-and-rth"));
            }
            for (arch, name) in rows {
                writeln!(s, "{name},{rr},{},{}", sig9(kk), bound_or_na(arch, kk, tau0))?;
            }
        }
    }
    emit(out, p.out.as_deref(), &s)?;
    Ok(EXIT_OK)
}

fn synthesize(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let ka = p.ka.ok_or_else(|| anyhow!("--ka is required"))?;
    let eta = p.eta.ok_or_else(|| anyhow!("--eta is required"))?;
    let tau0 = p.tau0.unwrap_or(reference::TAU0);
    let g = platoonlab::synthesize_gains(ka, eta, tau0)?;
    let spec = ControllerSpec::pf(g.kp, g.kv, ka, g.h_w, reference::D)?;
    let report = platoonlab::robust_check(&spec, tau0, &SweepConfig::default(), Criterion::HinfSingle)?;
    let mut s = String::new();
    writeln!(s, "k_p = {}", sig9(g.kp))?;
    writeln!(s, "k_v = {}", sig9(g.kv))?;
    writeln!(s, "k_a = {}", sig9(ka))?;
    writeln!(s, "h_w = {}", sig9(g.h_w))?;
    writeln!(s, "a1 = {}", sig9(g.region.a1))?;
    writeln!(s, "b1 = {}", sig9(g.region.b1))?;
    writeln!(s, "a2 = {}", sig9(g.region.a2))?;
    writeln!(s, "b2 = {}", sig9(g.region.b2))?;
    writeln!(s, "worst_value = {}", sig9(report.worst_value))?;
    writeln!(s, "verdict = {}", report.verdict)?;
    emit(out, p.out.as_deref(), &s)?;
    Ok(match report.verdict {
        Verdict::RobustlyStringStable => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
    })
}

fn nnir_cmd(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let ka = p.ka.unwrap_or(0.95);
    if !(ka.is_finite() && (0.0..1.0).contains(&ka)) {
        bail!("ka must lie in [0, 1) (got {ka})");
    }
    let hw = p.hw_scaled.unwrap_or(2.0 / (1.0 + ka));
    if !(hw.is_finite() && hw >= 0.0) {
        bail!("hw-scaled must be >= 0 (got {hw})");
    }
    let d = ScanGrid::default();
    let grid = ScanGrid {
        kp: AxisRange::new(
            p.kp_min.unwrap_or(d.kp.lo),
            p.kp_max.unwrap_or(d.kp.hi),
            p.kp_points.unwrap_or(d.kp.points),
        ),
        kv: AxisRange::new(
            p.kv_min.unwrap_or(d.kv.lo),
            p.kv_max.unwrap_or(d.kv.hi),
            p.kv_points.unwrap_or(d.kv.points),
        ),
    };
    for (name, ax) in [("kp", grid.kp), ("kv", grid.kv)] {
        if !(ax.lo > 0.0 && ax.hi >= ax.lo && ax.points > 0) {
            bail!("{name} range must satisfy 0 < min <= max with at least one point");
        }
    }
    let taus = match p.tau_points {
        None => nnir::default_tau_samples(),
        Some(0) => bail!("tau-points must be >= 1"),
        Some(1) => vec![1.0],
        Some(m) => (0..m).map(|k| k as f64 / (m - 1) as f64).collect(),
    };
    let test = match p.residue_test.unwrap_or(ResidueKind::Exact) {
        ResidueKind::Exact => ResidueTest::Exact,
        ResidueKind::Published => ResidueTest::Published,
    };
    let region = nnir::region_scan_with(ka, hw, &grid, &taus, test);
    let csv = region.to_csv();
    let admissible = region.admissible().count();
    match p.out.as_deref() {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "cells = {}", region.cells.len())?;
            writeln!(out, "admissible = {admissible}")?;
            writeln!(out, "residue_test = {}", test.name())?;
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn disturbance(p: &Params) -> Disturbance {
    let d = Disturbance::default();
    Disturbance {
        amplitude: p.amplitude.unwrap_or(d.amplitude),
        frequency: p.frequency.unwrap_or(d.frequency),
        t_on: p.t_on.unwrap_or(d.t_on),
        t_off: p.t_off.unwrap_or(d.t_off),
        phase: p.phase.unwrap_or(d.phase),
    }
}

fn apply_sim_params(cfg: &mut PlatoonConfig, p: &Params) {
    cfg.disturbance = disturbance(p);
    if let Some(n) = p.n {
        cfg.n = n;
    }
    if let Some(v) = p.v_r {
        cfg.v_r = v;
    }
    if let Some(dt) = p.dt {
        cfg.dt = dt;
    }
    if let Some(t) = p.t_end {
        cfg.t_end = t;
    }
    if let Some(k) = p.record_every {
        cfg.record_every = k;
    }
}

fn simulate(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let spec = controller(p)?;
    let tau0 = p.tau0.unwrap_or(reference::TAU0);
    let lag = LagSpec::new(p.tau.unwrap_or(tau0), tau0)?;
    let mut cfg = PlatoonConfig::new(reference::N, spec, lag);
    cfg.v_r = reference::V_R;
    apply_sim_params(&mut cfg, p);
    let result = platoonlab::simulate(&cfg)?;
    if let Some(path) = p.out.as_deref() {
        write_file(path, &result.to_csv())?;
    }
    out.write_all(result.summary(sim::VERDICT_TOL).as_bytes())?;
    Ok(EXIT_OK)
}

fn table3(p: &Params, out: &mut dyn std::io::Write) -> Result<i32> {
    let runs: Vec<(usize, bool, f64)> = HEADWAY_SCENARIOS
        .iter()
        .enumerate()
        .flat_map(|(k, sc)| [(k, true, sc.hw_above), (k, false, sc.hw_below)])
        .collect();
    let verdicts: Vec<Result<String>> = runs
        .par_iter()
        .map(|&(k, _, hw)| {
            let mut cfg = HEADWAY_SCENARIOS[k].config(hw)?;
            apply_sim_params(&mut cfg, p);
            Ok(match platoonlab::simulate(&cfg) {
                Ok(r) => platoonlab::amplification_verdict(&r, sim::VERDICT_TOL).to_string(),
                Err(platoonlab::Error::Divergence { .. }) => "Diverged".into(),
                Err(e) => return Err(e.into()),
            })
        })
        .collect();
    let mut s = String::from("scenario,arch,k_a,h_min,h_w_above,verdict_above,h_w_below,verdict_below\n");
    for (k, sc) in HEADWAY_SCENARIOS.iter().enumerate() {
        let above = verdicts[2 * k].as_ref().map_err(|e| anyhow!("{e:#}"))?;
        let below = verdicts[2 * k + 1].as_ref().map_err(|e| anyhow!("{e:#}"))?;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            sc.label,
            sc.arch.name(),
            sig9(sc.ka),
            sig9(sc.h_min_rounded),
            sig9(sc.hw_above),
            above,
            sig9(sc.hw_below),
            below
        )?;
    }
    emit(out, p.out.as_deref(), &s)?;
    Ok(EXIT_OK)
}
