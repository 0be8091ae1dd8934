//! Scaling analysis: volume/area-law fits of the peak negativity, critical
//! point estimation from curve crossings, and the finite-size data collapse
//! that extracts the correlation-length exponent.

use crate::error::{Error, Result};
use crate::experiment::{EmaxSummary, NegativityTrace};
use crate::gates::RngStream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Ordinary least-squares line through (N, peak negativity) points.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    /// Peak negativity per qubit; ~0.5 in the volume-law phase, ~0 in the
    /// area-law phase.
    pub slope: f64,
    pub intercept: f64,
    pub residual_norm: f64,
}

/// OLS fit of peak negativity against system size.
pub fn fit_linear_volume_law(points: &[(f64, f64)]) -> Result<LinearFit> {
    let distinct = {
        let mut xs: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return Err(Error::DegenerateAbscissa);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|&(x, _)| x).sum();
    let sy: f64 = points.iter().map(|&(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|&(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|&(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual_norm = points
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LinearFit {
        slope,
        intercept,
        residual_norm,
    })
}

/// Crossing point of the peak-negativity curves of two adjacent sizes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairCrossing {
    pub n_low: usize,
    pub n_high: usize,
    pub p: f64,
}

/// Critical-point estimate from pairwise curve crossings.
#[derive(Clone, Debug, Serialize)]
pub struct PcEstimate {
    pub p_c: f64,
    /// Half the range of the individual crossing estimates.
    pub spread: f64,
    pub crossings: Vec<PairCrossing>,
}

/// Group summaries into per-size curves of (p, emax / log2(N)), sorted by p.
fn size_curves(summaries: &[EmaxSummary]) -> BTreeMap<usize, Vec<(f64, f64)>> {
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for s in summaries {
        let y = s.emax / (s.num_qubits as f64).log2();
        curves.entry(s.num_qubits).or_default().push((s.error_rate, y));
    }
    for curve in curves.values_mut() {
        curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    curves
}

fn interpolate(curve: &[(f64, f64)], p: f64) -> Option<f64> {
    if curve.is_empty() || p < curve[0].0 || p > curve[curve.len() - 1].0 {
        return None;
    }
    let idx = curve.partition_point(|&(x, _)| x < p);
    if idx < curve.len() && curve[idx].0 == p {
        return Some(curve[idx].1);
    }
    let (x0, y0) = curve[idx - 1];
    let (x1, y1) = curve[idx];
    Some(y0 + (y1 - y0) * (p - x0) / (x1 - x0))
}

/// Locate the critical point from crossings of adjacent-size curves of
/// emax / log2(N) against p; each curve is interpolated piecewise-linearly.
/// Curves that never cross (identically ordered, or identical) contribute
/// nothing; if no pair crosses, the error says so explicitly.
pub fn estimate_pc_crossing(summaries: &[EmaxSummary]) -> Result<PcEstimate> {
    let curves = size_curves(summaries);
    if curves.len() < 2 {
        return Err(Error::UnderDetermined {
            got: curves.len(),
            need: 2,
        });
    }
    let rate_count = {
        let mut ps: Vec<f64> = summaries.iter().map(|s| s.error_rate).collect();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        ps.len()
    };
    if rate_count < 4 {
        return Err(Error::UnderDetermined {
            got: rate_count,
            need: 4,
        });
    }
    let sizes: Vec<usize> = curves.keys().copied().collect();
    let mut crossings = Vec::new();
    for pair in sizes.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let a = &curves[&lo];
        let b = &curves[&hi];
        let p_min = a[0].0.max(b[0].0);
        let p_max = a[a.len() - 1].0.min(b[b.len() - 1].0);
        if p_min >= p_max {
            continue;
        }
        let mut grid: Vec<f64> = a
            .iter()
            .chain(b.iter())
            .map(|&(p, _)| p)
            .filter(|&p| (p_min..=p_max).contains(&p))
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let diff: Vec<f64> = grid
            .iter()
            .map(|&p| interpolate(a, p).unwrap() - interpolate(b, p).unwrap())
            .collect();
        // a crossing is a sign *exchange*: scan consecutive nonzero
        // differences; zero runs in between count only when bracketed by
        // opposite signs (the curves meet and swap order there)
        let nonzero: Vec<usize> = (0..grid.len()).filter(|&i| diff[i] != 0.0).collect();
        for w in nonzero.windows(2) {
            let (i, j) = (w[0], w[1]);
            if diff[i] * diff[j] >= 0.0 {
                continue;
            }
            let p = if j == i + 1 {
                let t = diff[i] / (diff[i] - diff[j]);
                grid[i] + t * (grid[j] - grid[i])
            } else {
                // curves coincide on grid[i+1..j]; take the middle of the run
                (grid[i + 1] + grid[j - 1]) / 2.0
            };
            crossings.push(PairCrossing {
                n_low: lo,
                n_high: hi,
                p,
            });
        }
    }
    if crossings.is_empty() {
        return Err(Error::NoCrossing);
    }
    let mut ps: Vec<f64> = crossings.iter().map(|c| c.p).collect();
    ps.sort_by(f64::total_cmp);
    let p_c = if ps.len() % 2 == 1 {
        ps[ps.len() / 2]
    } else {
        (ps[ps.len() / 2 - 1] + ps[ps.len() / 2]) / 2.0
    };
    let spread = (ps[ps.len() - 1] - ps[0]) / 2.0;
    Ok(PcEstimate {
        p_c,
        spread,
        crossings,
    })
}

/// Restrict a summary table to sizes of one parity class; the two classes
/// N = 0 (mod 4) and N = 2 (mod 4) have different subsystem parity and can
/// collapse slightly differently.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizeParity {
    All,
    Mod4Zero,
    Mod4Two,
}

impl std::str::FromStr for SizeParity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "all" => Ok(SizeParity::All),
            "mod4-0" => Ok(SizeParity::Mod4Zero),
            "mod4-2" => Ok(SizeParity::Mod4Two),
            other => Err(format!("unknown parity filter {other:?}")),
        }
    }
}

pub fn filter_by_parity(summaries: &[EmaxSummary], parity: SizeParity) -> Vec<EmaxSummary> {
    summaries
        .iter()
        .filter(|s| match parity {
            SizeParity::All => true,
            SizeParity::Mod4Zero => s.num_qubits % 4 == 0,
            SizeParity::Mod4Two => s.num_qubits % 4 == 2,
        })
        .copied()
        .collect()
}

/// Search configuration for the collapse fit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub pc_range: (f64, f64),
    pub nu_range: (f64, f64),
    pub pc_step: f64,
    pub nu_step: f64,
    /// Two-stage mode: pin the critical point (e.g. from the crossing
    /// estimate) and search the exponent alone.
    pub fixed_pc: Option<f64>,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            pc_range: (0.02, 0.10),
            nu_range: (0.5, 2.5),
            pc_step: 0.002,
            nu_step: 0.01,
            fixed_pc: None,
        }
    }
}

/// Result of the scaling collapse.
#[derive(Clone, Debug, Serialize)]
pub struct CollapseFit {
    pub p_c: f64,
    pub nu: f64,
    /// Master-curve residual at the optimum (zero for a perfect collapse).
    pub quality: f64,
    pub pc_on_boundary: bool,
    pub nu_on_boundary: bool,
    pub grid: CollapseOptions,
}

/// One rescaled data point (p - p_c) N^(1/nu) vs emax / log2(N).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CollapsePoint {
    pub num_qubits: usize,
    pub error_rate: f64,
    pub x_scaled: f64,
    pub y_scaled: f64,
}

/// Map summaries onto the scaling axes for a candidate (p_c, nu).
pub fn collapse_points(summaries: &[EmaxSummary], p_c: f64, nu: f64) -> Vec<CollapsePoint> {
    let mut pts: Vec<CollapsePoint> = summaries
        .iter()
        .map(|s| {
            let n = s.num_qubits as f64;
            CollapsePoint {
                num_qubits: s.num_qubits,
                error_rate: s.error_rate,
                x_scaled: (s.error_rate - p_c) * n.powf(1.0 / nu),
                y_scaled: s.emax / n.log2(),
            }
        })
        .collect();
    pts.sort_by(|a, b| a.x_scaled.total_cmp(&b.x_scaled));
    pts
}

/// Master-curve residual: each point is compared against the line through its
/// nearest x-neighbors drawn from the other sizes; the mean squared deviation
/// over comparable points is the collapse objective.
fn collapse_objective(summaries: &[EmaxSummary], p_c: f64, nu: f64) -> f64 {
    let pts = collapse_points(summaries, p_c, nu);
    let mut total = 0.0;
    let mut count = 0usize;
    for (i, pt) in pts.iter().enumerate() {
        let below = pts[..i]
            .iter()
            .rev()
            .find(|q| q.num_qubits != pt.num_qubits);
        let above = pts[i + 1..].iter().find(|q| q.num_qubits != pt.num_qubits);
        if let (Some(lo), Some(hi)) = (below, above) {
            if hi.x_scaled > lo.x_scaled {
                let t = (pt.x_scaled - lo.x_scaled) / (hi.x_scaled - lo.x_scaled);
                let expected = lo.y_scaled + t * (hi.y_scaled - lo.y_scaled);
                total += (pt.y_scaled - expected).powi(2);
                count += 1;
            }
        }
    }
    if count == 0 {
        f64::INFINITY
    } else {
        total / count as f64
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Grid search over (p_c, nu) followed by one golden-section refinement pass
/// per free axis. Needs at least three distinct sizes.
pub fn collapse_fit(summaries: &[EmaxSummary], options: &CollapseOptions) -> Result<CollapseFit> {
    let sizes = {
        let mut s: Vec<usize> = summaries.iter().map(|x| x.num_qubits).collect();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    if sizes < 3 {
        return Err(Error::UnderDetermined { got: sizes, need: 3 });
    }
    let pc_candidates: Vec<f64> = match options.fixed_pc {
        Some(pc) => vec![pc],
        None => {
            let (lo, hi) = options.pc_range;
            let steps = ((hi - lo) / options.pc_step).round() as usize;
            (0..=steps).map(|i| lo + i as f64 * options.pc_step).collect()
        }
    };
    let (nu_lo, nu_hi) = options.nu_range;
    let nu_steps = ((nu_hi - nu_lo) / options.nu_step).round() as usize;
    let nu_candidates: Vec<f64> = (0..=nu_steps)
        .map(|i| nu_lo + i as f64 * options.nu_step)
        .collect();

    let mut best = (f64::INFINITY, pc_candidates[0], nu_candidates[0]);
    for &pc in &pc_candidates {
        for &nu in &nu_candidates {
            let q = collapse_objective(summaries, pc, nu);
            if q < best.0 {
                best = (q, pc, nu);
            }
        }
    }
    let (_, mut pc, mut nu) = best;

    // one refinement pass: nu first (always free), then pc when searched
    nu = golden_section(
        |v| collapse_objective(summaries, pc, v),
        (nu - options.nu_step).max(nu_lo),
        (nu + options.nu_step).min(nu_hi),
        1e-6,
    );
    if options.fixed_pc.is_none() {
        pc = golden_section(
            |v| collapse_objective(summaries, v, nu),
            (pc - options.pc_step).max(options.pc_range.0),
            (pc + options.pc_step).min(options.pc_range.1),
            1e-7,
        );
    }
    let quality = collapse_objective(summaries, pc, nu);
    let pc_on_boundary = options.fixed_pc.is_none()
        && (pc - options.pc_range.0 < options.pc_step || options.pc_range.1 - pc < options.pc_step);
    let nu_on_boundary = nu - nu_lo < options.nu_step || nu_hi - nu < options.nu_step;
    Ok(CollapseFit {
        p_c: pc,
        nu,
        quality,
        pc_on_boundary,
        nu_on_boundary,
        grid: *options,
    })
}

/// Bootstrap confidence intervals for (p_c, nu) by resampling the raw traces.
#[derive(Clone, Debug, Serialize)]
pub struct BootstrapIntervals {
    pub resamples: usize,
    pub failed: usize,
    pub pc_mean: f64,
    pub pc_low: f64,
    pub pc_high: f64,
    pub nu_mean: f64,
    pub nu_low: f64,
    pub nu_high: f64,
}

/// Resample circuit realizations with replacement, rebuild the peak
/// summaries, and rerun the two-stage pipeline (crossing then collapse with
/// pinned p_c). Replicates that fail (e.g. the resampled curves no longer
/// cross) are counted and skipped; more than half failing is an error.
pub fn bootstrap_collapse(
    traces: &[NegativityTrace],
    options: &CollapseOptions,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapIntervals> {
    let mut pcs = Vec::with_capacity(resamples);
    let mut nus = Vec::with_capacity(resamples);
    let mut failed = 0usize;
    for b in 0..resamples {
        let mut rng = RngStream::new(seed, b as u64);
        let mut summaries = Vec::with_capacity(traces.len());
        for trace in traces {
            let k = trace.raw.len();
            let picks: Vec<usize> = (0..k).map(|_| rng.random_range(0..k)).collect();
            let raw: Vec<_> = picks.iter().map(|&i| trace.raw[i].clone()).collect();
            let resampled =
                crate::experiment::aggregate_traces(trace.num_qubits, trace.error_rate, raw)?;
            summaries.push(crate::experiment::extract_emax(&resampled)?);
        }
        let outcome = estimate_pc_crossing(&summaries).and_then(|pc| {
            let opts = CollapseOptions {
                fixed_pc: Some(pc.p_c),
                ..*options
            };
            collapse_fit(&summaries, &opts)
        });
        match outcome {
            Ok(fit) => {
                pcs.push(fit.p_c);
                nus.push(fit.nu);
            }
            Err(_) => failed += 1,
        }
    }
    if pcs.len() < resamples.div_ceil(2) {
        return Err(Error::NoCrossing);
    }
    let stats = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let lo = v[((v.len() - 1) as f64 * 0.025).round() as usize];
        let hi = v[((v.len() - 1) as f64 * 0.975).round() as usize];
        (mean, lo, hi)
    };
    let (pc_mean, pc_low, pc_high) = stats(&mut pcs);
    let (nu_mean, nu_low, nu_high) = stats(&mut nus);
    Ok(BootstrapIntervals {
        resamples,
        failed,
        pc_mean,
        pc_low,
        pc_high,
        nu_mean,
        nu_low,
        nu_high,
    })
}
