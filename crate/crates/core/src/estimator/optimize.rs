//! Coordinate-descent search over source parameters on a refining grid.

use rayon::prelude::*;

use super::{evaluate_point, EstimatorOptions, KeyRatePoint};
use crate::bounds::{FailureBudget, Method};
use crate::error::{ensure, Error, Result};
use crate::model::{ChannelParams, SourceConfig};

const POINTS_PER_AXIS: usize = 20;
const LEVELS: usize = 2;
const MAX_SWEEPS: usize = 8;

/// Closed intervals for each searched parameter. The vacuum fraction is
/// whatever the signal and decoy fractions leave over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub mu: (f64, f64),
    pub nu: (f64, f64),
    pub p_z: (f64, f64),
    pub frac_signal: (f64, f64),
    pub frac_decoy: (f64, f64),
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            mu: (0.2, 0.8),
            nu: (0.01, 0.15),
            p_z: (0.5, 0.95),
            frac_signal: (0.4, 0.9),
            frac_decoy: (0.05, 0.4),
        }
    }
}

impl SearchBox {
    /// A box holding exactly one configuration.
    pub fn point(s: &SourceConfig) -> Self {
        Self {
            mu: (s.mu, s.mu),
            nu: (s.nu, s.nu),
            p_z: (s.p_z, s.p_z),
            frac_signal: (s.frac_signal, s.frac_signal),
            frac_decoy: (s.frac_decoy, s.frac_decoy),
        }
    }

    fn axes(&self) -> [(f64, f64); 5] {
        [self.mu, self.nu, self.p_z, self.frac_signal, self.frac_decoy]
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi) in self.axes() {
            ensure(
                lo.is_finite() && hi.is_finite() && lo <= hi,
                "search_box",
                "each axis needs finite lo <= hi",
            )?;
        }
        Ok(())
    }
}

/// Result of [`optimize_parameters`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimized {
    pub source: SourceConfig,
    pub point: KeyRatePoint,
    pub evaluations: usize,
}

type Coords = [f64; 5];

fn to_source(base: &SourceConfig, c: &Coords) -> SourceConfig {
    SourceConfig {
        mu: c[0],
        nu: c[1],
        p_z: c[2],
        frac_signal: c[3],
        frac_decoy: c[4],
        frac_vacuum: 1.0 - c[3] - c[4],
        ..*base
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Maximises the key rate over `search` with coordinate descent, two grid
/// refinement levels and 20 points per axis per level. Deterministic for
/// a given box; candidates are scored in parallel and reduced in grid order.
pub fn optimize_parameters(
    channel: &ChannelParams,
    base: &SourceConfig,
    budget: &FailureBudget,
    method: Method,
    options: &EstimatorOptions,
    search: &SearchBox,
) -> Result<Optimized> {
    search.validate()?;
    let score = |c: &Coords| -> Option<KeyRatePoint> {
        let s = to_source(base, c);
        s.validate().ok()?;
        evaluate_point(channel, &s, budget, method, options)
            .ok()
            .map(|e| e.point)
    };
    let mut evaluations = 0usize;

    let start = initial_point(search, &score, &mut evaluations).ok_or(Error::InfeasibleBox)?;
    let (mut best, mut best_point) = start;

    let mut bounds = search.axes();
    for level in 0..LEVELS {
        for _ in 0..MAX_SWEEPS {
            let mut improved = false;
            for axis in 0..5 {
                let candidates: Vec<Coords> = linspace(bounds[axis], POINTS_PER_AXIS)
                    .into_iter()
                    .map(|v| {
                        let mut c = best;
                        c[axis] = v;
                        c
                    })
                    .collect();
                evaluations += candidates.len();
                let scored: Vec<Option<KeyRatePoint>> = candidates.par_iter().map(&score).collect();
                for (c, p) in candidates.iter().zip(scored) {
                    if let Some(p) = p {
                        if better(&p, &best_point) {
                            best = *c;
                            best_point = p;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if level + 1 < LEVELS {
            let outer = search.axes();
            for axis in 0..5 {
                let (lo, hi) = bounds[axis];
                let step = (hi - lo) / (POINTS_PER_AXIS - 1) as f64;
                bounds[axis] = (
                    (best[axis] - step).max(outer[axis].0),
                    (best[axis] + step).min(outer[axis].1),
                );
            }
        }
    }

    Ok(Optimized {
        source: to_source(base, &best),
        point: best_point,
        evaluations,
    })
}

/// First feasible point: the box centre, then a 3^5 lattice scan.
fn initial_point(
    search: &SearchBox,
    score: &(dyn Fn(&Coords) -> Option<KeyRatePoint> + Sync),
    evaluations: &mut usize,
) -> Option<(Coords, KeyRatePoint)> {
    let axes = search.axes();
    let centre = axes.map(|(lo, hi)| 0.5 * (lo + hi));
    *evaluations += 1;
    if let Some(p) = score(&centre) {
        return Some((centre, p));
    }
    let lattice: Vec<Coords> = (0..243usize)
        .map(|mut k| {
            let mut c = [0.0; 5];
            for (axis, slot) in c.iter_mut().enumerate() {
                let (lo, hi) = axes[axis];
                *slot = lo + (hi - lo) * (k % 3) as f64 / 2.0;
                k /= 3;
            }
            c
        })
        .collect();
    *evaluations += lattice.len();
    let scored: Vec<Option<KeyRatePoint>> = lattice.par_iter().map(score).collect();
    lattice
        .into_iter()
        .zip(scored)
        .filter_map(|(c, p)| p.map(|p| (c, p)))
        .reduce(|a, b| if better(&b.1, &a.1) { b } else { a })
}

/// Ranks by key rate; among zero-rate points the unclamped rate breaks the
/// tie so the search can climb out of the infeasible region.
fn better(a: &KeyRatePoint, b: &KeyRatePoint) -> bool {
    a.rate > b.rate
        || (a.rate == b.rate && a.rate == 0.0 && a.diagnostics.raw_rate > b.diagnostics.raw_rate)
}
