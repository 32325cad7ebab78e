use std::path::{Path, PathBuf};

use ccn_core::coeffs::{
    ccn_bundle, chain_residuals, curly_k_chain, curly_k_closed, curly_k_termination, project_off_kernel, twisted_chain,
    xi3_closed,
};
use ccn_core::field::Field2D;
use ccn_core::kdv::{bundle_residual, map_back, soliton, solve_scaling, steady_reduction};
use ccn_core::linalg::{max_abs, sub};
use ccn_core::pde::{
    fit_exponential, write_checkpoint, write_diagnostics_csv, zigzag_run, CcnCoefficients, CcnSolver, DiagnosticRow,
    StepperConfig, ZigzagConfig,
};
use ccn_core::regions::region_map;
use ccn_core::roll::solve_roll;
use ccn_core::validation::{run_suite, Bound, Level, SuiteOptions};
use ccn_core::{Branch, PeriodicGrid2D, RglSystem, Wavenumber};
use serde_json::{json, Value};

use crate::config::{self, CcnRun, Point, Regions, RglRun, Simulation, Soliton, Validate};
use crate::output::{document, ensure_dir, fmt17, write_text};
use crate::{Command, LabError};

type Outcome = Result<(Value, u8), LabError>;

pub fn run(cmd: Command, config_path: Option<&Path>) -> Outcome {
    match cmd {
        Command::Coeffs(a) => coeffs(a.overlay(config::load(config_path)?).resolve()),
        Command::Chain(a) => chain(a.overlay(config::load(config_path)?).resolve()),
        Command::Regions(a) => regions(a.overlay(config::load(config_path)?).resolve()),
        Command::Soliton(a) => soliton_cmd(a.overlay(config::load(config_path)?).resolve()),
        Command::Simulate(a) => match a.overlay(config::load(config_path)?).resolve()? {
            Simulation::Rgl(r) => simulate_rgl(r),
            Simulation::Ccn(r) => simulate_ccn(r),
        },
        Command::Validate(a) => validate(a.overlay(config::load(config_path)?).resolve()),
    }
}

fn point(p: &Point) -> Result<(Wavenumber<f64>, Branch), LabError> {
    Ok((Wavenumber::new(p.k, p.l), p.branch.parse()?))
}

fn ok(command: &str, cfg: &impl serde::Serialize, result: Value) -> Outcome {
    Ok((document(command, cfg, result)?, 0))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn coeffs(cfg: Point) -> Outcome {
    let (kl, branch) = point(&cfg)?;
    let b = ccn_bundle(kl, branch)?;
    let f = &b.fluxes;
    let ch = &b.checks;
    let result = json!({
        "c": b.c,
        "cOther": b.c_other,
        "tau": b.tau,
        "deltaZZ": b.delta_zz,
        "sigma": b.sigma,
        "phiXY": b.phi_xy(),
        "cxy": b.cxy,
        "kappa": b.kappa,
        "curlyK": b.curly_k,
        "fluxes": { "B": f.b, "A": f.a, "Bk": f.bk, "Bl": f.bl, "Ak": f.ak, "Al": f.al },
        "checks": {
            "kappaSolvability": b.kappa,
            "kappaFlux": ch.kappa_flux,
            "kappaExact": ch.kappa_exact,
            "kappaPrinted": ch.kappa_printed,
            "kappaPrintedDiscrepancy": ch.kappa_printed - b.kappa,
            "kappaFluxRelErr": (b.kappa - ch.kappa_flux).abs() / b.kappa.abs().max(f64::MIN_POSITIVE),
            "curlyKClosed": ch.curly_k_closed,
            "curlyKTermination": ch.curly_k_termination,
            "curlyKRelErr": (b.curly_k - ch.curly_k_closed).abs() / ch.curly_k_closed.abs(),
            "tauClosed": ch.tau_closed,
            "characteristicResidual": ch.char_residual,
            "phiXYIdentityResidual": ch.phi_xy_identity_residual,
            "phiXYClosedResidual": ch.phi_xy_closed_residual,
            "chainResidual3": ch.chain_residual3,
            "chainResidual4": ch.chain_residual4,
            "obstruction3": ch.obstruction3,
        },
    });
    ok("coeffs", &cfg, result)
}

fn chain(cfg: Point) -> Outcome {
    let (kl, branch) = point(&cfg)?;
    let sys = RglSystem::<f64>::new();
    let state = solve_roll(kl)?;
    let cv = twisted_chain(&sys, &state, branch)?;
    let (r3, r4) = chain_residuals(&sys, &state, &cv);
    let printed_gap = max_abs(&project_off_kernel(&sub(&cv.xi3, &xi3_closed(&state, cv.c)), &cv.xi1));
    let closed = curly_k_closed(kl, cv.c)?;
    let k_chain = curly_k_chain(&sys, &cv);
    let result = json!({
        "c": cv.c,
        "xi1": cv.xi1.to_vec(),
        "xi2": cv.xi2.to_vec(),
        "xi3": cv.xi3.to_vec(),
        "xi4": cv.xi4.to_vec(),
        "obstruction3": cv.obstruction3,
        "residual3": r3,
        "residual4": r4,
        "xi3PrintedGap": printed_gap,
        "curlyKChain": k_chain,
        "curlyKTermination": curly_k_termination(&sys, &cv),
        "curlyKClosed": closed,
        "curlyKRelErr": (k_chain - closed).abs() / closed.abs(),
    });
    ok("chain", &cfg, result)
}

fn regions(cfg: Regions) -> Outcome {
    let map = region_map(cfg.resolution)?;
    let s = map.summary();
    ensure_dir(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join("regions.csv");
    let io = |e: csv::Error| LabError::Io(format!("{}: {e}", csv_path.display()));
    let mut w = csv::Writer::from_path(&csv_path).map_err(io)?;
    w.write_record(["k", "l", "delta_zz", "class"]).map_err(io)?;
    for c in &map.cells {
        w.write_record([fmt17(c.k), fmt17(c.l), fmt17(c.delta_zz), c.class.as_str().to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::Io(e.to_string()))?;

    let summary_path = cfg.out_dir.join("regions_summary.json");
    let result = json!({
        "cellSize": s.cell_size,
        "innerRadius": s.inner_radius,
        "outerRadius": s.outer_radius,
        "minusFraction": s.minus_fraction,
        "counts": {
            "outside_D": s.n_outside,
            "D_plus": s.n_plus,
            "D_minus": s.n_minus,
            "boundary": s.n_boundary,
        },
        "files": { "cells": path_str(&csv_path), "summary": path_str(&summary_path) },
    });
    let doc = document("regions", &cfg, result)?;
    write_text(&summary_path, &crate::output::render(&doc))?;
    Ok((doc, 0))
}

fn soliton_cmd(cfg: Soliton) -> Outcome {
    let (kl, branch) = point(&cfg.point)?;
    let profile = soliton(cfg.c3, cfg.n, cfg.half_width)?;
    let b = ccn_bundle(kl, branch)?;
    let red = steady_reduction(&b)?;
    let s = solve_scaling(red.a_nl, red.a_disp)?;
    let mapped = map_back(&profile, &s, cfg.n, cfg.n, 0.0)?;
    let residual = bundle_residual(&mapped, &b);
    let coarse = if cfg.n >= 16 {
        let p = soliton(cfg.c3, cfg.n / 2, cfg.half_width)?;
        Some(bundle_residual(&map_back(&p, &s, cfg.n / 2, cfg.n / 2, 0.0)?, &b))
    } else {
        None
    };

    ensure_dir(&cfg.out_dir)?;
    let profile_path = cfg.out_dir.join("soliton_profile.csv");
    let io = |e: csv::Error| LabError::Io(format!("{}: {e}", profile_path.display()));
    let mut w = csv::Writer::from_path(&profile_path).map_err(io)?;
    w.write_record(["zeta", "q"]).map_err(io)?;
    for (z, q) in profile.zeta.iter().zip(&profile.samples) {
        w.write_record([fmt17(*z), fmt17(*q)]).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::Io(e.to_string()))?;
    let phi_path = cfg.out_dir.join("soliton_phi.ccnf");
    write_checkpoint(&phi_path, &mapped.phi)?;

    let g = mapped.phi.grid;
    let result = json!({
        "reduction": { "aNl": red.a_nl, "aDisp": red.a_disp },
        "scaling": { "alpha": s.alpha, "beta": s.beta, "gamma": s.gamma, "matchingDefect": s.matching_defect() },
        "profile": {
            "peak": profile.peak(),
            "peakError": (profile.peak() - 3.0 * cfg.c3).abs(),
            "tail": profile.tail(),
            "odeResidual": profile.ode_residual(),
        },
        "mapped": {
            "lx": g.lx,
            "ly": g.ly,
            "slope": mapped.slope,
            "crestSlope": mapped.crest_slope,
            "crestAngle": mapped.crest_angle,
            "crestAngleDegrees": mapped.crest_angle.to_degrees(),
            "residual": residual,
            "residualHalfResolution": coarse,
        },
        "files": { "profile": path_str(&profile_path), "phi": path_str(&phi_path) },
    });
    ok("soliton", &cfg, result)
}

fn checkpoint_name(dir: &Path, kind: &str, step: usize) -> PathBuf {
    dir.join(format!("{kind}_{step:08}.ccnf"))
}

fn simulate_rgl(cfg: RglRun) -> Outcome {
    let kl = Wavenumber::new(cfg.point.k, cfg.point.l);
    ensure_dir(&cfg.out_dir)?;
    let zz = ZigzagConfig {
        kl,
        amplitude: cfg.amplitude,
        t_end: cfg.t_end,
        dt: cfg.dt,
        sideband: (cfg.sideband[0], cfg.sideband[1]),
        nx: cfg.nx,
        ny: cfg.ny,
        family_width: cfg.family_width,
        seed: cfg.seed,
        sample_every: cfg.sample_every,
    };
    let mut checkpoints = Vec::new();
    let report = zigzag_run(&zz, |snap| {
        if cfg.checkpoint_every > 0 && snap.step % cfg.checkpoint_every == 0 {
            let p = checkpoint_name(&cfg.out_dir, "rgl", snap.step);
            write_checkpoint(&p, &snap.field())?;
            checkpoints.push(path_str(&p));
        }
        Ok(())
    })?;
    let final_path = cfg.out_dir.join("rgl_final.ccnf");
    write_checkpoint(&final_path, &report.final_psi)?;
    let diag_path = cfg.out_dir.join("rgl_diagnostics.csv");
    write_diagnostics_csv(&diag_path, &report.series)?;

    let first = report.series.first().map_or(0.0, |r| r.amplitude);
    let last = report.series.last().map_or(0.0, |r| r.amplitude);
    let result = json!({
        "klSnapped": [report.kl_snapped.k, report.kl_snapped.l],
        "snap": [report.snap.0, report.snap.1],
        "lx": report.lx,
        "ly": report.ly,
        "tracked": [report.tracked.0, report.tracked.1],
        "predictedRate": report.predicted_rate,
        "cnRate": report.cn_rate,
        "fit": report.fit.map(|f| json!({
            "rate": f.rate, "r2": f.r2, "tStart": f.t_start, "tEnd": f.t_end, "points": f.n_points,
        })),
        "rateRelErr": report.rate_rel_err(),
        "verdict": report.verdict.as_str(),
        "signAgrees": report.sign_agrees(),
        "initialAmplitude": first,
        "finalAmplitude": last,
        "files": {
            "diagnostics": path_str(&diag_path),
            "final": path_str(&final_path),
            "checkpoints": checkpoints,
        },
    });
    ok("simulate", &Simulation::Rgl(cfg), result)
}

fn simulate_ccn(cfg: CcnRun) -> Outcome {
    let (kl, branch) = point(&cfg.point)?;
    let b = ccn_bundle(kl, branch)?;
    let grid = PeriodicGrid2D::new(cfg.nx, cfg.ny, cfg.lx, cfg.ly)?;
    let coeffs = CcnCoefficients::from_bundle(&b);
    let solver = CcnSolver::new(grid, coeffs, Some(cfg.m2_band))?;
    let tau = std::f64::consts::TAU;
    let (kx, ky) = (tau / cfg.lx, tau / cfg.ly);
    let amp = cfg.amplitude;
    let phi0 = Field2D::from_real_fn(grid, |x, y| amp * ((kx * x + ky * y).cos() + 0.5 * (2.0 * kx * x).sin()));
    let [mx, my] = cfg.track;
    let rate = coeffs.multiplier(mx as f64 * kx, my as f64 * ky);

    ensure_dir(&cfg.out_dir)?;
    let mut series = Vec::new();
    let mut checkpoints = Vec::new();
    let stepper = StepperConfig::new(cfg.dt, cfg.t_end).with_band(cfg.m2_band);
    let out = solver.run(&phi0, &stepper, cfg.sample_every, |snap| {
        let c = snap.mode(mx, my);
        series.push(DiagnosticRow { t: snap.t, mode_re: c.re, mode_im: c.im, amplitude: c.norm(), fitted_rate: None });
        if cfg.checkpoint_every > 0 && snap.step % cfg.checkpoint_every == 0 {
            let p = checkpoint_name(&cfg.out_dir, "ccn", snap.step);
            write_checkpoint(&p, &snap.field())?;
            checkpoints.push(path_str(&p));
        }
        Ok(())
    })?;

    let fit = if series.iter().all(|r| r.amplitude > 0.0) {
        let t: Vec<f64> = series.iter().map(|r| r.t).collect();
        let a: Vec<f64> = series.iter().map(|r| r.amplitude).collect();
        fit_exponential(&t, &a).ok()
    } else {
        None
    };
    if let Some(f) = fit {
        series.iter_mut().for_each(|r| r.fitted_rate = Some(f.rate));
    }

    // the linear part alone, integrated exactly
    let sp = solver.spectral();
    let mut hat = phi0.values().to_vec();
    sp.forward(&mut hat);
    for (idx, h) in hat.iter_mut().enumerate() {
        let keep = if solver.retained()[idx] { (solver.multiplier()[idx] * cfg.t_end).exp() } else { 0.0 };
        *h *= keep;
    }
    sp.inverse(&mut hat);
    let linear = Field2D::new(grid, out.kind, hat)?;
    let linear_gap = out.real_values().iter().zip(linear.values()).map(|(a, b)| (a - b.re).abs()).fold(0.0, f64::max);

    let final_path = cfg.out_dir.join("ccn_final.ccnf");
    write_checkpoint(&final_path, &out)?;
    let diag_path = cfg.out_dir.join("ccn_diagnostics.csv");
    write_diagnostics_csv(&diag_path, &series)?;

    let result = json!({
        "coefficients": { "tau": coeffs.tau, "phiXY": coeffs.phi_xy, "kappa": coeffs.kappa, "curlyK": coeffs.curly_k },
        "tracked": [mx, my],
        "multiplierRate": rate,
        "fit": fit.map(|f| json!({
            "rate": f.rate, "r2": f.r2, "tStart": f.t_start, "tEnd": f.t_end, "points": f.n_points,
        })),
        "initialAmplitude": series.first().map_or(0.0, |r| r.amplitude),
        "finalAmplitude": series.last().map_or(0.0, |r| r.amplitude),
        "maxAbs": out.max_abs(),
        "linearPredictionGap": linear_gap,
        "files": {
            "diagnostics": path_str(&diag_path),
            "final": path_str(&final_path),
            "checkpoints": checkpoints,
        },
    });
    ok("simulate", &Simulation::Ccn(cfg), result)
}

fn validate(cfg: Validate) -> Outcome {
    let level: Level = cfg.level.parse()?;
    let opts = SuiteOptions { level, quartic: cfg.quartic };
    let report = run_suite(&opts);
    ensure_dir(&cfg.out_dir)?;
    let junit = cfg.out_dir.join("junit.xml");
    let summary = cfg.out_dir.join("summary.txt");
    write_text(&junit, &report.junit_xml())?;
    write_text(&summary, &report.summary())?;
    let gates: Vec<Value> = report
        .gates
        .iter()
        .map(|g| {
            json!({
                "id": g.id,
                "name": g.name,
                "passed": g.passed(),
                "seconds": g.seconds,
                "error": g.error,
                "measurements": g.measurements.iter().map(|m| json!({
                    "name": m.name,
                    "value": m.value,
                    "bound": (m.kind != Bound::Report).then_some(m.bound),
                    "kind": match m.kind { Bound::Below => "below", Bound::Above => "above", Bound::Report => "report" },
                    "passed": m.passed(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let result = json!({
        "passed": report.passed(),
        "failed": report.n_failed(),
        "seconds": report.seconds,
        "gates": gates,
        "files": { "junit": path_str(&junit), "summary": path_str(&summary) },
    });
    let code = if report.passed() { 0 } else { 1 };
    Ok((document("validate", &cfg, result)?, code))
}

