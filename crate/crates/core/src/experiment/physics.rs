use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use super::{ExperimentConfig, Output};
use crate::error::{Error, Result};
use crate::fredholm::{discretize, gap_probability, product_identity, DEFAULT_NODES};
use crate::lattice::{
    binary_residual, binary_window, decay_profile, estimate_period, far_boundary_displacement,
    init_driven, init_shock, periodicity_residual, simulate, Trajectory,
};

/// Far-end displacement allowed before the truncated chain stops standing
/// in for the semi-infinite one.
const TRUNCATION_TOL: f64 = 1e-10;
/// Largest x_{k+2} - x_k spread still called a binary state.
const BINARY_TOL: f64 = 1e-2;
const PERIOD_RANGE: (f64, f64) = (0.25, 5.0);

fn check_truncation(out: &mut Output, traj: &Trajectory, label: &str) {
    let far = far_boundary_displacement(traj);
    out.check(
        &format!("truncation{label}"),
        far < TRUNCATION_TOL,
        format!("far-end displacement {far:e}"),
    );
}

pub(crate) fn run_lattice_shock(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let traj = simulate(init_shock(cfg.lattice_k, cfg.a)?, cfg.dt, cfg.t_end, cfg.stride)?;
    out.file("trajectory.csv", |w| traj.write_csv(w, cfg.csv_stride))?;

    let window = binary_window(cfg.window_start);
    let binary = binary_residual(&traj, window.clone(), cfg.window_start, cfg.window)?;
    let span = (cfg.t_end - cfg.window_start - PERIOD_RANGE.1).min(cfg.window);
    if span <= 0.0 {
        return Err(Error::Config("t_end leaves no room for the periodicity window".into()));
    }
    let (lo, hi) = (*window.start(), *window.end());
    let probes = [lo, (lo + hi) / 2, hi];
    let reports = probes
        .iter()
        .map(|&k| estimate_period(&traj, k, cfg.window_start, span, PERIOD_RANGE.0, PERIOD_RANGE.1))
        .collect::<Result<Vec<_>>>()?;
    out.file("periodicity.csv", |w| {
        writeln!(w, "k,period,residual,window_start,window")?;
        for r in &reports {
            writeln!(w, "{},{:e},{:e},{},{}", r.k, r.period, r.residual, r.window_start, r.window)?;
        }
        Ok(())
    })?;
    out.put("a", cfg.a);
    out.put("lattice_k", cfg.lattice_k);
    out.put("binary_particles", format!("{lo}..={hi}"));
    out.put("binary_residual", format!("{:e}", binary.residual));
    out.put("binary_double_spacing", format!("{:.9}", binary.mean_double_spacing));
    check_truncation(out, &traj, "");
    out.check(
        "binary_state",
        binary.residual < BINARY_TOL,
        format!("residual {:e}", binary.residual),
    );
    Ok(())
}

struct DrivenPoint {
    gamma: f64,
    periodicity: f64,
    decay_slope: f64,
    far: f64,
    traj: Option<Trajectory>,
}

pub(crate) fn run_lattice_driven(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let gammas = if cfg.gamma_grid.is_empty() {
        vec![cfg.gamma]
    } else {
        cfg.gamma_grid.clone()
    };
    let keep = gammas.len() == 1;
    let fit_lo = ((cfg.t_end / 5.0) as usize).max(4);
    let fit = fit_lo..=2 * fit_lo;
    let decay = 1..=(3 * fit_lo / 4).max(2);
    if *fit.end() > cfg.lattice_k {
        return Err(Error::Config("lattice too short for the decay fit window".into()));
    }
    let amp = cfg.h_amplitude;
    let points: Vec<Result<DrivenPoint>> = gammas
        .par_iter()
        .map(|&gamma| {
            let h = Arc::new(move |th: f64| amp * th.sin());
            let traj = simulate(init_driven(cfg.lattice_k, cfg.a, gamma, h)?, cfg.dt, cfg.t_end, cfg.stride)?;
            let period = 2.0 * PI / gamma;
            let span = (cfg.t_end - cfg.window_start - period).min(cfg.window);
            let periodicity = periodicity_residual(&traj, 1, period, cfg.window_start, span.max(0.0))?.residual;
            let last = traj.snapshots.last().expect("nonempty trajectory");
            let decay_slope = decay_profile(&last.x, fit.clone(), decay.clone())?.log_slope;
            Ok(DrivenPoint {
                gamma,
                periodicity,
                decay_slope,
                far: far_boundary_displacement(&traj),
                traj: keep.then_some(traj),
            })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;
    out.file("sweep.csv", |w| {
        writeln!(w, "gamma,periodicity_residual,decay_slope,far_displacement")?;
        for p in &points {
            writeln!(w, "{},{:e},{:e},{:e}", p.gamma, p.periodicity, p.decay_slope, p.far)?;
        }
        Ok(())
    })?;
    if let Some(traj) = points.first().and_then(|p| p.traj.as_ref()) {
        out.file("trajectory.csv", |w| traj.write_csv(w, cfg.csv_stride))?;
    }
    out.put("a", cfg.a);
    out.put("lattice_k", cfg.lattice_k);
    out.put("fit_window", format!("{}..={}", fit.start(), fit.end()));
    out.put("decay_window", format!("{}..={}", decay.start(), decay.end()));
    let worst = points.iter().map(|p| p.far).fold(0.0, f64::max);
    out.check("truncation", worst < TRUNCATION_TOL, format!("far-end displacement {worst:e}"));
    Ok(())
}

pub(crate) fn run_fredholm(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    if cfg.s_grid.is_empty() {
        return Err(Error::Config("s_grid must be nonempty".into()));
    }
    let rows: Vec<Result<_>> = cfg
        .s_grid
        .par_iter()
        .map(|&s| {
            let g = gap_probability(s, DEFAULT_NODES)?;
            let id = product_identity(&discretize(s, g.nodes)?)?;
            Ok((g, id))
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    out.file("fredholm.csv", |w| {
        writeln!(w, "s,F_s,nodes,refinement_delta,converged,product_identity_difference")?;
        for (g, id) in &rows {
            writeln!(
                w,
                "{},{:.17e},{},{:e},{},{:e}",
                g.s,
                g.value,
                g.nodes,
                g.refinement_delta,
                u8::from(g.converged),
                id.difference
            )?;
        }
        Ok(())
    })?;
    let mut by_s: Vec<(f64, f64)> = rows.iter().map(|(g, _)| (g.s, g.value)).collect();
    by_s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = by_s.windows(2).all(|w| w[0].0 == w[1].0 || w[1].1 < w[0].1);
    let identity = rows.iter().map(|(_, id)| id.difference).fold(0.0, f64::max);
    out.check("decreasing_in_s", decreasing, "F_s strictly decreasing over the grid");
    out.check("product_identity", identity < 1e-10, format!("max difference {identity:e}"));
    out.check(
        "refinement_converged",
        rows.iter().all(|(g, _)| g.converged),
        "node doubling met the refinement tolerance",
    );
    out.put("points", rows.len());
    Ok(())
}
