//! Numerical contact-equivalence test.
//!
//! Two equations are compared by subclass, then by the generic rank of the
//! Jacobian of their invariant maps, then by whether sampled points of each
//! classifying set lie on the other. Negative verdicts from subclass or rank
//! are exact up to symbolic zero testing; overlap verdicts are numerical.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify, EquationSpec, Subclass};
use crate::error::{Error, Result};
use crate::invariants::{invariants_for, InvariantMap, InvariantSet, JetPoint};

pub const DEFAULT_SEED: u64 = 0;
/// Minimum number of accepted sample points.
pub const MIN_SAMPLES: usize = 10;
/// Candidate points drawn per requested sample before giving up.
pub const OVERSAMPLING: usize = 10;
const SEARCH_STREAM_SALT: u64 = 0x5eed_0f5e_a6c4;

pub type Interval = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct SampleConfig {
    pub seed: u64,
    pub samples: usize,
    /// Region the sample points are drawn from.
    pub sample_box: [Interval; 5],
    /// Region searched when matching a tuple against the other equation.
    pub search_box: [Interval; 5],
    pub rank_tol: f64,
    pub overlap_tol: f64,
    pub starts: usize,
    pub max_iters: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: DEFAULT_SEED,
            samples: 200,
            sample_box: [(0.5, 2.0); 5],
            search_box: [(-8.0, 8.0); 5],
            rank_tol: 1e-8,
            overlap_tol: 1e-6,
            starts: 16,
            max_iters: 200,
        }
    }
}

impl SampleConfig {
    pub fn with_seed(seed: u64) -> Self {
        SampleConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.starts == 0 {
            return Err(Error::Config("starts must be at least 1".into()));
        }
        for (lo, hi) in self.sample_box.iter().chain(&self.search_box) {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("bad interval [{lo}, {hi}]")));
            }
        }
        if !(self.rank_tol > 0.0 && self.overlap_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw(rng: &mut ChaCha8Rng, bounds: &[Interval; 5]) -> [f64; 5] {
    bounds.map(|(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..hi) })
}

/// Invariant values and Jacobian at one accepted point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: u64,
    pub point: JetPoint,
    pub values: Vec<f64>,
    pub jacobian: Vec<[f64; 5]>,
}

fn evaluate(map: &InvariantMap, index: u64, point: JetPoint) -> Option<Sample> {
    let values = map.eval(&point).ok()?;
    let jacobian = map.jacobian(&point).ok()?;
    let finite = values.iter().all(|x| x.is_finite())
        && jacobian.iter().flatten().all(|x| x.is_finite());
    finite.then_some(Sample {
        index,
        point,
        values,
        jacobian,
    })
}

fn invariant_map(eq: &EquationSpec) -> Result<(InvariantSet, InvariantMap)> {
    if eq.is_generic() {
        if let Some(s) = eq.unbound_params().first() {
            return Err(Error::UnboundParameter(*s));
        }
    }
    let inv = invariants_for(eq)?;
    let map = InvariantMap::new(&inv, &eq.param_bindings())?;
    Ok((inv, map))
}

/// Draws points from `cfg.sample_box`, point `i` from substream `i` of
/// `cfg.seed`, and keeps the first `cfg.samples` at which values and
/// Jacobian are finite and away from singular denominators.
pub fn draw_samples(eq: &EquationSpec, cfg: &SampleConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let (_, map) = invariant_map(eq)?;
    draw_with(&map, cfg)
}

fn draw_with(map: &InvariantMap, cfg: &SampleConfig) -> Result<Vec<Sample>> {
    let limit = (cfg.samples * OVERSAMPLING) as u64;
    let mut accepted = Vec::with_capacity(cfg.samples);
    let mut next = 0u64;
    while accepted.len() < cfg.samples && next < limit {
        let end = (next + cfg.samples as u64).min(limit);
        let batch: Vec<Option<Sample>> = (next..end)
            .into_par_iter()
            .map(|i| {
                let x = draw(&mut stream_rng(cfg.seed, i), &cfg.sample_box);
                evaluate(map, i, JetPoint::from_array(x))
            })
            .collect();
        accepted.extend(batch.into_iter().flatten().take(cfg.samples - accepted.len()));
        next = end;
    }
    let needed = MIN_SAMPLES.min(cfg.samples);
    if accepted.len() < needed {
        return Err(Error::InsufficientSamples {
            accepted: accepted.len(),
            requested: cfg.samples,
        });
    }
    Ok(accepted)
}

/// Row-major `|items| x 5` Jacobian of the invariant map at `p`.
pub fn invariant_jacobian(eq: &EquationSpec, p: &JetPoint) -> Result<Vec<[f64; 5]>> {
    let (_, map) = invariant_map(eq)?;
    Ok(map.jacobian(p)?)
}

/// Numerical rank: singular values above `tol` times the largest.
pub fn numerical_rank(rows: &[[f64; 5]], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), 5, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tol * max).count()
}

fn max_rank(samples: &[Sample], tol: f64) -> usize {
    samples
        .par_iter()
        .map(|s| numerical_rank(&s.jacobian, tol))
        .max()
        .unwrap_or(0)
}

/// Generic rank of the invariant map: the largest numerical rank of its
/// Jacobian over the accepted sample points.
pub fn rank_signature(eq: &EquationSpec, cfg: &SampleConfig) -> Result<usize> {
    Ok(max_rank(&draw_samples(eq, cfg)?, cfg.rank_tol))
}

/// Invariant tuples at the accepted sample points.
pub fn sample_classifying(eq: &EquationSpec, cfg: &SampleConfig) -> Result<Vec<Vec<f64>>> {
    Ok(draw_samples(eq, cfg)?.into_iter().map(|s| s.values).collect())
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Per-component weights that put invariants of very different size on a
/// common relative scale during the search.
fn weights(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| 1.0 / (1.0 + v.abs())).collect()
}

/// Weighted residual `(F(p) - y) * wt` and its unweighted norm.
fn residual(map: &InvariantMap, p: &[f64; 5], y: &[f64], wt: &[f64]) -> Option<(Vec<f64>, f64)> {
    let vals = map.eval(&JetPoint::from_array(*p)).ok()?;
    let raw: Vec<f64> = vals.iter().zip(y).map(|(a, b)| a - b).collect();
    if !raw.iter().all(|x| x.is_finite()) {
        return None;
    }
    let abs = norm(&raw);
    Some((raw.iter().zip(wt).map(|(r, w)| r * w).collect(), abs))
}

fn project(p: &mut [f64; 5], bounds: &[Interval; 5]) {
    for (x, (lo, hi)) in p.iter_mut().zip(bounds) {
        *x = x.clamp(*lo, *hi);
    }
}

/// Residuals below this, relative to the size of the tuple, count as an exact hit.
const EXACT: f64 = 1e-13;

/// Damped Gauss-Newton descent on the weighted residual inside `bounds`,
/// with backtracking on each step. Returns the unweighted residual norm at
/// the best point reached.
fn local_search(
    map: &InvariantMap,
    y: &[f64],
    start: [f64; 5],
    bounds: &[Interval; 5],
    max_iters: usize,
) -> f64 {
    let wt = weights(y);
    let exact = EXACT * (1.0 + norm(y));
    let mut p = start;
    let Some((mut r, mut abs)) = residual(map, &p, y, &wt) else {
        return f64::INFINITY;
    };
    let mut cost = norm(&r);
    let mut mu = 1e-3;
    let mut stalls = 0;
    for _ in 0..max_iters {
        if abs <= exact {
            break;
        }
        let Ok(jac) = map.jacobian(&JetPoint::from_array(p)) else {
            break;
        };
        let j = DMatrix::from_fn(jac.len(), 5, |i, k| jac[i][k] * wt[i]);
        let rv = nalgebra::DVector::from_column_slice(&r);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * rv;
        let mut improved = false;
        for _ in 0..8 {
            let mut a = jtj.clone();
            for k in 0..5 {
                a[(k, k)] += mu * (jtj[(k, k)] + 1.0);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let mut t = 1.0;
            for _ in 0..20 {
                let mut trial = p;
                for k in 0..5 {
                    trial[k] += t * step[k];
                }
                project(&mut trial, bounds);
                if let Some((rt, at)) = residual(map, &trial, y, &wt) {
                    let ct = norm(&rt);
                    if ct < cost {
                        stalls = if cost - ct <= 1e-12 * cost { stalls + 1 } else { 0 };
                        p = trial;
                        r = rt;
                        cost = ct;
                        abs = at;
                        improved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if improved {
                mu = (mu * 0.3).max(1e-12);
                break;
            }
            mu *= 10.0;
        }
        if !improved || stalls >= 5 {
            break;
        }
    }
    abs
}

/// Random candidates drawn from the search box per requested start.
const POOL_PER_START: usize = 64;

/// Candidate start points for the search on one target, with their
/// invariant values.
#[derive(Debug, Clone)]
struct Pool {
    points: Vec<[f64; 5]>,
    values: Vec<Vec<f64>>,
}

impl Pool {
    /// The target's own accepted samples followed by seeded random points of
    /// the search box.
    fn new(map: &InvariantMap, own: &[Sample], cfg: &SampleConfig) -> Pool {
        let n = (cfg.starts * POOL_PER_START) as u64;
        let drawn: Vec<Option<Sample>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = draw(
                    &mut stream_rng(cfg.seed ^ SEARCH_STREAM_SALT, i),
                    &cfg.search_box,
                );
                evaluate(map, i, JetPoint::from_array(x))
            })
            .collect();
        let mut pool = Pool {
            points: Vec::new(),
            values: Vec::new(),
        };
        for s in own.iter().chain(drawn.iter().flatten()) {
            pool.points.push(s.point.to_array());
            pool.values.push(s.values.clone());
        }
        pool
    }

    /// Indices of the `k` candidates closest to `y` in weighted distance.
    fn nearest(&self, y: &[f64], k: usize) -> Vec<usize> {
        let wt = weights(y);
        let mut d: Vec<(f64, usize)> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let s: f64 = v
                    .iter()
                    .zip(y)
                    .zip(&wt)
                    .map(|((a, b), w)| ((a - b) * w).powi(2))
                    .sum();
                (s, i)
            })
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.into_iter().take(k).map(|(_, i)| i).collect()
    }
}

fn best_match(map: &InvariantMap, pool: &Pool, y: &[f64], cfg: &SampleConfig) -> f64 {
    let exact = EXACT * (1.0 + norm(y));
    let mut best = f64::INFINITY;
    for i in pool.nearest(y, cfg.starts) {
        let mut start = pool.points[i];
        project(&mut start, &cfg.search_box);
        best = best.min(local_search(map, y, start, &cfg.search_box, cfg.max_iters));
        if best <= exact {
            break;
        }
    }
    best
}

/// Largest distance from a tuple in `points` to the image of the target's
/// invariant map over `cfg.search_box`, each found by multi-start local
/// search started from the nearest candidate points.
pub fn overlap_residual(points: &[Vec<f64>], target: &EquationSpec, cfg: &SampleConfig) -> Result<f64> {
    cfg.validate()?;
    let (_, map) = invariant_map(target)?;
    check_arity(points, &map)?;
    if map.arity() == 0 {
        return Ok(0.0);
    }
    let own = draw_with(&map, cfg)?;
    Ok(overlap_with(points, &map, &own, cfg))
}

fn check_arity(points: &[Vec<f64>], map: &InvariantMap) -> Result<()> {
    match points.iter().find(|y| y.len() != map.arity()) {
        Some(y) => Err(Error::ArityMismatch {
            points: y.len(),
            target: map.arity(),
        }),
        None => Ok(()),
    }
}

fn overlap_with(points: &[Vec<f64>], map: &InvariantMap, own: &[Sample], cfg: &SampleConfig) -> f64 {
    if map.arity() == 0 {
        return 0.0;
    }
    let pool = Pool::new(map, own, cfg);
    points
        .par_iter()
        .map(|y| best_match(map, &pool, y, cfg))
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Equivalent,
    Inequivalent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reason {
    SubclassMismatch,
    BothS1,
    RankMismatch,
    OverlapPassed,
    OverlapFailed,
    /// A residual fell between the tolerance and a hundred times it.
    OverlapInconclusive,
}

impl Reason {
    /// Whether the reason rests on exact symbolic facts or on numerical search.
    pub fn basis(self) -> &'static str {
        match self {
            Reason::SubclassMismatch | Reason::BothS1 | Reason::RankMismatch => "symbolic",
            _ => "numerical",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    pub reason: Reason,
    pub basis: &'static str,
    pub subclass_a: Subclass,
    pub subclass_b: Subclass,
    pub rank_a: usize,
    pub rank_b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_ab: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_ba: Option<f64>,
    pub samples_used: usize,
}

fn classifiable(eq: &EquationSpec) -> Result<Subclass> {
    if eq.is_generic() {
        if let Some(s) = eq.unbound_params().first() {
            return Err(Error::UnboundParameter(*s));
        }
    }
    match classify(eq)? {
        Subclass::Outside => Err(Error::OutsideSubclass),
        s => Ok(s),
    }
}

pub fn decide_equivalence(a: &EquationSpec, b: &EquationSpec, cfg: &SampleConfig) -> Result<EquivalenceVerdict> {
    cfg.validate()?;
    let subclass_a = classifiable(a)?;
    let subclass_b = classifiable(b)?;
    let verdict = |verdict, reason: Reason, rank_a, rank_b, samples_used| EquivalenceVerdict {
        verdict,
        reason,
        basis: reason.basis(),
        subclass_a,
        subclass_b,
        rank_a,
        rank_b,
        residual_ab: None,
        residual_ba: None,
        samples_used,
    };
    if subclass_a == Subclass::S1 && subclass_b == Subclass::S1 {
        return Ok(verdict(Verdict::Equivalent, Reason::BothS1, 0, 0, 0));
    }
    let (_, map_a) = invariant_map(a)?;
    let (_, map_b) = invariant_map(b)?;
    let samples_a = draw_with(&map_a, cfg)?;
    let samples_b = draw_with(&map_b, cfg)?;
    let rank_a = max_rank(&samples_a, cfg.rank_tol);
    let rank_b = max_rank(&samples_b, cfg.rank_tol);
    let used = samples_a.len().min(samples_b.len());
    if subclass_a != subclass_b {
        return Ok(verdict(Verdict::Inequivalent, Reason::SubclassMismatch, rank_a, rank_b, used));
    }
    if rank_a != rank_b {
        return Ok(verdict(Verdict::Inequivalent, Reason::RankMismatch, rank_a, rank_b, used));
    }
    let values = |s: &[Sample]| s.iter().map(|s| s.values.clone()).collect::<Vec<_>>();
    let ab = overlap_with(&values(&samples_a), &map_b, &samples_b, cfg);
    let ba = overlap_with(&values(&samples_b), &map_a, &samples_a, cfg);
    let tol = cfg.overlap_tol;
    let (v, reason) = if ab <= tol && ba <= tol {
        (Verdict::Equivalent, Reason::OverlapPassed)
    } else if ab > 100.0 * tol || ba > 100.0 * tol {
        (Verdict::Inequivalent, Reason::OverlapFailed)
    } else {
        (Verdict::Inconclusive, Reason::OverlapInconclusive)
    };
    log::debug!("overlap residuals {ab:e} / {ba:e}");
    let mut out = verdict(v, reason, rank_a, rank_b, used);
    out.residual_ab = Some(ab);
    out.residual_ba = Some(ba);
    Ok(out)
}
