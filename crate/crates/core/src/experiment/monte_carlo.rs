use std::io::Write;

use rayon::prelude::*;

use super::{collect_spectra, ExperimentConfig, Output, SampleSource};
use crate::ensembles::{stream_sample, EnsembleSpec};
use crate::error::{Error, Result};
use crate::iterative::{cg_halting, qr_halting, wishart_system};
use crate::rng::derive_seed;
use crate::spectral::SpectralData;
use crate::stats::{
    condition1_table, condition2_probability, edge_statistics_suite, gap_scale, in_scaling_region,
    ks_two_sample, scaling_region_ratio, tau_normalize, theorem1_scale, EmpiricalDistribution,
    Histogram, ScalingConstants,
};
use crate::toda::{halting_time_t1, TodaClock};

/// Master seed of the second ensemble in a two-ensemble comparison.
const COMPARE_STREAM: u64 = 0xC0FF_EE00;

struct HaltingRecord {
    index: usize,
    clock: TodaClock,
}

fn halting_records(cfg: &ExperimentConfig, source: SampleSource, seed: u64) -> Result<(Vec<HaltingRecord>, usize)> {
    let (spectra, mut skipped) = collect_spectra(source, cfg.n, seed, cfg.samples)?;
    let clocks: Vec<(usize, Result<TodaClock>)> = spectra
        .into_par_iter()
        .map(|(i, sd)| (i, halting_time_t1(&sd, cfg.epsilon)))
        .collect();
    let mut records = Vec::with_capacity(clocks.len());
    for (index, c) in clocks {
        match c {
            Ok(clock) => records.push(HaltingRecord { index, clock }),
            Err(Error::NonHalting { .. } | Error::Degenerate(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((records, skipped))
}

fn scaling_region_note(cfg: &ExperimentConfig, out: &mut Output) {
    out.put("scaling_region_ratio", format!("{:.6}", scaling_region_ratio(cfg.n, cfg.epsilon)));
    if !in_scaling_region(cfg.n, cfg.epsilon, cfg.tau) {
        out.put(
            "warning",
            format!("(epsilon, n) outside the scaling region for tau = {}", cfg.tau),
        );
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| format!("{v:e}"))
}

/// Writes a tau histogram when the sample has spread; returns the bin width.
fn tau_histogram(out: &mut Output, name: &str, raw: &[f64], width: Option<f64>) -> Result<Option<f64>> {
    if raw.len() < 2 {
        out.put(name, "unavailable (fewer than two samples)");
        return Ok(None);
    }
    let tau = match tau_normalize(&EmpiricalDistribution::new(raw.to_vec())?) {
        Ok(t) => t,
        Err(Error::Degenerate(_)) => {
            out.put(name, "unavailable (zero variance)");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let hist = match width {
        Some(w) => Histogram::with_width(tau.samples(), w)?,
        None => Histogram::freedman_diaconis(tau.samples())?,
    };
    out.file(&format!("{name}.csv"), |w| hist.write_csv(w))?;
    Ok(Some(hist.width))
}

fn describe(out: &mut Output, prefix: &str, raw: &[f64]) -> Result<()> {
    if raw.is_empty() {
        return Ok(());
    }
    let d = EmpiricalDistribution::new(raw.to_vec())?;
    out.put(&format!("{prefix}_mean"), format!("{:e}", d.mean()));
    if raw.len() > 1 {
        out.put(&format!("{prefix}_std"), format!("{:e}", d.std()));
    }
    out.put(&format!("{prefix}_median"), format!("{:e}", d.median()));
    Ok(())
}

pub(crate) fn run_toda_t1(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let (records, skipped) = halting_records(cfg, cfg.ensemble, cfg.seed)?;
    out.skipped(skipped);
    let c = ScalingConstants::new(cfg.c_v, cfg.b_v)?;
    let scaled: Vec<Option<f64>> = records
        .iter()
        .map(|r| theorem1_scale(r.clock.t1, cfg.n, cfg.epsilon, &c).ok())
        .collect();
    out.file("halting.csv", |w| {
        writeln!(w, "index,t1,lambda_max,x11_at_t1,edge_error,theorem1_scaled,corollary_error")?;
        for (r, s) in records.iter().zip(&scaled) {
            let k = &r.clock;
            writeln!(
                w,
                "{},{:e},{:e},{:e},{:e},{},{:e}",
                r.index,
                k.t1,
                k.spectral.lambda_max(),
                k.x11_at_t1,
                k.edge_error,
                fmt_opt(*s),
                k.edge_error / cfg.epsilon
            )?;
        }
        Ok(())
    })?;
    let t1: Vec<f64> = records.iter().map(|r| r.clock.t1).collect();
    out.put("ensemble", cfg.ensemble);
    out.put("n", cfg.n);
    out.put("epsilon", format!("{:e}", cfg.epsilon));
    out.put("records", records.len());
    scaling_region_note(cfg, out);
    describe(out, "t1", &t1)?;
    let corollary: Vec<f64> = records.iter().map(|r| r.clock.edge_error / cfg.epsilon).collect();
    describe(out, "corollary_error", &corollary)?;
    tau_histogram(out, "tau_histogram", &t1, None)?;
    let scaled: Vec<f64> = scaled.into_iter().flatten().collect();
    if !scaled.is_empty() {
        let hist = Histogram::freedman_diaconis(&scaled)?;
        out.file("theorem1_histogram.csv", |w| hist.write_csv(w))?;
    }

    out.check("records_present", !records.is_empty(), format!("{} records", records.len()));
    if matches!(cfg.ensemble, SampleSource::Ensemble(_)) {
        let worst = records.iter().map(|r| r.clock.edge_error).fold(0.0, f64::max);
        out.check(
            "edge_error_below_epsilon",
            worst < cfg.epsilon,
            format!("max |lambda_max - X11(T1)| = {worst:e}"),
        );
    }
    Ok(())
}

fn iteration_outputs(
    cfg: &ExperimentConfig,
    out: &mut Output,
    rows: &[(usize, usize, bool)],
) -> Result<()> {
    out.file("halting.csv", |w| {
        writeln!(w, "index,iterations,halted")?;
        for (i, k, h) in rows {
            writeln!(w, "{i},{k},{}", u8::from(*h))?;
        }
        Ok(())
    })?;
    let halted: Vec<f64> = rows.iter().filter(|r| r.2).map(|r| r.1 as f64).collect();
    let not_halted = rows.len() - halted.len();
    out.put("n", cfg.n);
    out.put("epsilon", format!("{:e}", cfg.epsilon));
    out.put("records", rows.len());
    out.put("not_halted", not_halted);
    describe(out, "iterations", &halted)?;
    tau_histogram(out, "tau_histogram", &halted, None)?;
    out.check(
        "all_halted",
        not_halted == 0,
        format!("{not_halted} runs reached k_max = {}", cfg.k_max),
    );
    Ok(())
}

pub(crate) fn run_qr_halting(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let SampleSource::Ensemble(kind) = cfg.ensemble else {
        return Err(Error::Config("qr-halting needs a random ensemble".into()));
    };
    let spec = EnsembleSpec::new(kind, cfg.n)?;
    let runs: Vec<Result<(usize, usize, bool)>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let h = stream_sample(&spec, cfg.seed, i as u64);
            let r = qr_halting(&h, cfg.epsilon, cfg.k_max)?;
            Ok((i, r.iterations, r.halted))
        })
        .collect();
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    out.put("ensemble", cfg.ensemble);
    iteration_outputs(cfg, out, &rows)
}

pub(crate) fn run_cg_halting(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let m = (cfg.mn_ratio * cfg.n as f64).round() as usize;
    let runs: Vec<Result<(usize, usize, bool)>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let (a, b) = wishart_system(cfg.n, m, derive_seed(cfg.seed, i as u64))?;
            let r = cg_halting(&a, &b, cfg.epsilon, cfg.k_max)?;
            Ok((i, r.iterations, r.halted))
        })
        .collect();
    let rows = runs.into_iter().collect::<Result<Vec<_>>>()?;
    out.put("wishart_m", m);
    iteration_outputs(cfg, out, &rows)
}

pub(crate) fn run_universality(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let (first, skipped_a) = halting_records(cfg, cfg.ensemble, cfg.seed)?;
    let (second, skipped_b) = halting_records(cfg, cfg.compare, derive_seed(cfg.seed, COMPARE_STREAM))?;
    out.skipped(skipped_a + skipped_b);
    let ta: Vec<f64> = first.iter().map(|r| r.clock.t1).collect();
    let tb: Vec<f64> = second.iter().map(|r| r.clock.t1).collect();
    out.file("halting.csv", |w| {
        writeln!(w, "ensemble,index,t1")?;
        for (name, recs) in [(cfg.ensemble, &first), (cfg.compare, &second)] {
            for r in recs {
                writeln!(w, "{name},{},{:e}", r.index, r.clock.t1)?;
            }
        }
        Ok(())
    })?;
    let da = tau_normalize(&EmpiricalDistribution::new(ta.clone())?)?;
    let db = tau_normalize(&EmpiricalDistribution::new(tb.clone())?)?;
    let ks = da.ks_distance(&db);
    let width = tau_histogram(out, "tau_histogram_first", &ta, None)?;
    tau_histogram(out, "tau_histogram_second", &tb, width)?;
    out.put("first", cfg.ensemble);
    out.put("second", cfg.compare);
    out.put("n", cfg.n);
    out.put("epsilon", format!("{:e}", cfg.epsilon));
    out.put("records_first", first.len());
    out.put("records_second", second.len());
    out.put("tau_ks", format!("{ks:.6}"));
    out.check("tau_ks_below_threshold", ks < cfg.ks_threshold, format!("KS = {ks:.6}, threshold {}", cfg.ks_threshold));
    Ok(())
}

/// Scaled halting times and scaled inverse top gaps of one sample set.
pub fn theorem1_pairs(clocks: &[TodaClock], n: usize, epsilon: f64, c: &ScalingConstants) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::with_capacity(clocks.len());
    let mut b = Vec::with_capacity(clocks.len());
    for k in clocks {
        a.push(theorem1_scale(k.t1, n, epsilon, c)?);
        b.push(gap_scale(&k.spectral, c)?);
    }
    Ok((a, b))
}

pub(crate) fn run_theorem1(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let (records, skipped) = halting_records(cfg, cfg.ensemble, cfg.seed)?;
    let (records, degenerate): (Vec<_>, Vec<_>) = records
        .into_iter()
        .partition(|r| r.clock.spectral.top_gap().is_some_and(|g| g > 0.0));
    out.skipped(skipped + degenerate.len());
    let clocks: Vec<TodaClock> = records.iter().map(|r| r.clock.clone()).collect();
    scaling_region_note(cfg, out);

    let base = ScalingConstants::new(cfg.c_v, cfg.b_v)?;
    let (scaled_t1, scaled_gap) = theorem1_pairs(&clocks, cfg.n, cfg.epsilon, &base)?;
    out.file("theorem1.csv", |w| {
        writeln!(w, "index,t1,scaled_t1,scaled_inverse_gap")?;
        for ((r, a), b) in records.iter().zip(&scaled_t1).zip(&scaled_gap) {
            writeln!(w, "{},{:e},{:e},{:e}", r.index, r.clock.t1, a, b)?;
        }
        Ok(())
    })?;
    let ks = ks_two_sample(&scaled_t1, &scaled_gap);
    let mut sweep = Vec::new();
    for c_v in [0.5, 1.0, 2.0] {
        let (a, b) = theorem1_pairs(&clocks, cfg.n, cfg.epsilon, &ScalingConstants::new(c_v, cfg.b_v)?)?;
        sweep.push((c_v, ks_two_sample(&a, &b)));
    }
    out.file("cv_sweep.csv", |w| {
        writeln!(w, "c_v,ks")?;
        for (c, k) in &sweep {
            writeln!(w, "{c},{k:e}")?;
        }
        Ok(())
    })?;
    out.put("ensemble", cfg.ensemble);
    out.put("n", cfg.n);
    out.put("epsilon", format!("{:e}", cfg.epsilon));
    out.put("records", records.len());
    out.put("ks", format!("{ks:.6}"));
    let invariant = sweep.iter().all(|(_, k)| k.to_bits() == sweep[0].1.to_bits());
    out.check("ks_below_threshold", ks < cfg.ks_threshold, format!("KS = {ks:.6}, threshold {}", cfg.ks_threshold));
    out.check("ks_independent_of_c_v", invariant, format!("{sweep:?}"));
    Ok(())
}

pub(crate) fn run_conditions(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    if cfg.p_grid.is_empty() || cfg.n_grid.is_empty() {
        return Err(Error::Config("p_grid and n_grid must be nonempty".into()));
    }
    let (spectra, skipped) = collect_spectra(cfg.ensemble, cfg.n, cfg.seed, cfg.samples)?;
    out.skipped(skipped);
    let spectra: Vec<SpectralData> = spectra.into_iter().map(|(_, s)| s).collect();

    let mut p_grid = cfg.p_grid.clone();
    p_grid.sort_by(|a, b| b.total_cmp(a));
    let table = condition1_table(&spectra, &p_grid)?;
    out.file("condition1.csv", |w| {
        writeln!(w, "n,p,complement_probability")?;
        for r in &table {
            writeln!(w, "{},{},{}", r.n, r.p, r.complement_probability)?;
        }
        Ok(())
    })?;
    let monotone = table
        .windows(2)
        .all(|w| w[1].complement_probability <= w[0].complement_probability);
    out.check("condition1_monotone_in_p", monotone, "complement probability non-increasing as p decreases");

    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let (sp, sk) = collect_spectra(cfg.ensemble, n, derive_seed(cfg.seed, n as u64), cfg.samples)?;
        out.skipped(sk);
        let sp: Vec<SpectralData> = sp.into_iter().map(|(_, s)| s).collect();
        rows.push((n, condition2_probability(&sp, cfg.s, cfg.b_v)?));
    }
    out.file("condition2.csv", |w| {
        writeln!(w, "n,s,probability,clause_i,clause_ii,clause_iii,clause_iv")?;
        for (n, (p, c)) in &rows {
            writeln!(w, "{n},{},{p},{},{},{},{}", cfg.s, c[0], c[1], c[2], c[3])?;
        }
        Ok(())
    })?;

    if let SampleSource::Ensemble(kind) = cfg.ensemble {
        if spectra.len() >= 100 {
            let rep = edge_statistics_suite(&spectra, kind.beta(), cfg.b_v)?;
            out.file("edge.csv", |w| {
                writeln!(w, "component,ks_modulus_normal")?;
                for (k, ks) in rep.component_ks.iter().enumerate() {
                    writeln!(w, "{},{ks:e}", k + 1)?;
                }
                Ok(())
            })?;
            out.put("edge_degenerate_triples", rep.degenerate_triples);
            out.check(
                "no_degenerate_triples",
                rep.degenerate_triples == 0,
                format!("{} of {}", rep.degenerate_triples, rep.samples),
            );
        } else {
            out.put("edge_suite", "skipped (fewer than 100 samples)");
        }
    }
    out.put("ensemble", cfg.ensemble);
    out.put("n", cfg.n);
    out.put("samples", spectra.len());
    Ok(())
}
