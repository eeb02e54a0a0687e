//! Translation-invariant and bipartite-periodic solutions of the boundary-law
//! equations.
//!
//! Three solvers live here:
//!
//! * [`ti_fixed_points`]: multi-start damped Newton for `h = k F(h)`.
//! * [`two_cycles`]: period-2 points of the scalar map
//!   `f(z) = ((2 theta + r z) / (theta^2 + theta z + r))^k`, which describes
//!   the invariant branch `e^{h_0} = e^{l_0} = 1` of the bipartite system.
//! * [`bipartite_solve`]: the full system `h = k F(l), l = k F(h)` for
//!   three spin values, solved in log coordinates.
//!
//! Every routine accepts `theta = 1` but marks the result as degenerate,
//! since `F` need not be injective there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::newton::{self, NewtonOptions};
use crate::params::check_weights;
use crate::recursion::{boundary_map, boundary_map_with_jacobian, ReducedField};

/// Max-norm residual every emitted solution satisfies.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative tolerance (log coordinates) under which two roots are merged.
pub const DEDUP_REL_TOL: f64 = 1e-9;
/// A root of `f(f(z)) = z` with `|f(z) - z| <= TIE_TOL * max(1, z)` is a
/// fixed point of `f`, not a cycle point.
pub const TIE_TOL: f64 = 1e-8;
/// Log-spaced scan points over the image bracket of `f`.
pub const CYCLE_GRID_POINTS: usize = 2048;
/// A period-2 root whose image lies within this relative distance of itself
/// and has no distinct partner root cannot be told apart from a fixed point.
pub const UNRESOLVED_REL: f64 = 1e-6;
/// Relative widening of the image bracket before scanning.
pub const BRACKET_MARGIN: f64 = 0.01;
/// Newton seeds cover `[-SEED_RANGE, SEED_RANGE]` in every log coordinate.
pub const SEED_RANGE: f64 = 8.0;

pub const DEGENERATE_NOTE: &str = "degenerate: theta = 1, injectivity of F is not guaranteed";

/// `f(z) = ((2 theta + r z) / (theta^2 + theta z + r))^k`.
pub fn f_eval(z: f64, theta: f64, r: f64, k: usize) -> f64 {
    ((2.0 * theta + r * z) / (theta * theta + theta * z + r)).powi(k as i32)
}

/// Closed interval spanned by `f(0)` and `f(inf) = (r / theta)^k`; it
/// contains the image of `f` on `(0, inf)` since `f` is monotone.
pub fn f_image_bracket(theta: f64, r: f64, k: usize) -> (f64, f64) {
    let at_zero = f_eval(0.0, theta, r, k);
    let at_inf = (r / theta).powi(k as i32);
    (at_zero.min(at_inf), at_zero.max(at_inf))
}

/// `f` is strictly decreasing on `(0, inf)` iff `r (theta^2 + r) < 2 theta^2`.
pub fn f_is_decreasing(theta: f64, r: f64) -> bool {
    r * (theta * theta + r) < 2.0 * theta * theta
}

fn same_log_point(a: f64, b: f64) -> bool {
    let (la, lb) = (a.ln(), b.ln());
    (la - lb).abs() <= DEDUP_REL_TOL * la.abs().max(lb.abs()).max(1.0)
}

fn same_field(a: &[f64], b: &[f64], rel: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * x.abs().max(y.abs()).max(1.0))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Bisection on a sign-changing bracket, run until the bracket stops
/// shrinking in floating point.
fn bisect<G: Fn(f64) -> f64>(g: &G, mut a: f64, mut b: f64) -> f64 {
    let mut ga = g(a);
    if ga == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// All sign changes of `g` between consecutive `points`, refined by bisection.
fn scan_roots<G: Fn(f64) -> f64>(g: &G, points: &[f64]) -> Vec<f64> {
    let values: Vec<f64> = points.iter().map(|&z| g(z)).collect();
    let mut roots = Vec::new();
    for i in 0..points.len() {
        if values[i] == 0.0 {
            roots.push(points[i]);
            continue;
        }
        if i + 1 < points.len() && values[i + 1] != 0.0 && (values[i] < 0.0) != (values[i + 1] < 0.0) {
            roots.push(bisect(g, points[i], points[i + 1]));
        }
    }
    roots
}

fn push_unique(out: &mut Vec<f64>, z: f64) {
    if !out.iter().any(|&y| same_log_point(y, z)) {
        out.push(z);
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// A period-2 orbit `{z, w}` of `f` with `z < w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoCycle {
    pub z: f64,
    pub w: f64,
    /// `max(|f(z) - w|, |f(w) - z|)`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub theta: f64,
    pub r: f64,
    pub k: usize,
    pub cycles: Vec<TwoCycle>,
    /// Fixed points of `f` (translation-invariant solutions on the branch).
    pub fixed_points: Vec<f64>,
    /// Roots of `f(f(z)) = z` too close to a fixed point to classify, as at
    /// a vanishing discriminant.
    pub unresolved: Vec<f64>,
    pub degenerate: bool,
}

/// Period-2 orbits of `f`, excluding its fixed points.
///
/// `f o f - id` is scanned for sign changes on a log grid over the image
/// bracket of `f`, with extra breakpoints just either side of every fixed
/// point so cycle points clustered around a fixed point are separated.
pub fn two_cycles(theta: f64, r: f64, k: usize) -> Result<CycleReport> {
    check_weights(theta, r)?;
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let f = |z: f64| f_eval(z, theta, r, k);
    let (lo, hi) = f_image_bracket(theta, r, k);
    let grid = log_grid(lo * (1.0 - BRACKET_MARGIN), hi * (1.0 + BRACKET_MARGIN), CYCLE_GRID_POINTS);

    let mut fixed_points = Vec::new();
    for z in scan_roots(&|z| f(z) - z, &grid) {
        push_unique(&mut fixed_points, z);
    }
    fixed_points.sort_by(f64::total_cmp);

    let mut points = grid.clone();
    for &z in &fixed_points {
        points.push(z * (1.0 - 1e-7));
        points.push(z * (1.0 + 1e-7));
    }
    points.sort_by(f64::total_cmp);
    points.dedup();

    let period2 = |z: f64| f(f(z)) - z;
    let mut cycle_points = Vec::new();
    for z in scan_roots(&period2, &points) {
        if (f(z) - z).abs() > TIE_TOL * z.max(1.0) {
            push_unique(&mut cycle_points, z);
        }
    }
    cycle_points.sort_by(f64::total_cmp);

    let mut cycles: Vec<TwoCycle> = Vec::new();
    let mut unresolved = Vec::new();
    for &z in &cycle_points {
        let image = f(z);
        let partner = cycle_points
            .iter()
            .copied()
            .filter(|&w| !same_log_point(w, z) && (w - image).abs() <= 1e-6 * image)
            .min_by(|a, b| (a - image).abs().total_cmp(&(b - image).abs()));
        let partner = match partner {
            Some(w) => w,
            None if (image - z).abs() <= UNRESOLVED_REL * z => {
                unresolved.push(z);
                continue;
            }
            None => image,
        };
        let (z, w) = if z < partner { (z, partner) } else { (partner, z) };
        if cycles.iter().any(|c| same_log_point(c.z, z) && same_log_point(c.w, w)) {
            continue;
        }
        let residual = (f(z) - w).abs().max((f(w) - z).abs());
        cycles.push(TwoCycle { z, w, residual });
    }

    Ok(CycleReport { theta, r, k, cycles, fixed_points, unresolved, degenerate: theta == 1.0 })
}

/// Options shared by the multi-start Newton solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiStart {
    /// Seeds per log coordinate, spread uniformly over `[-8, 8]`.
    pub seeds_per_axis: usize,
}

impl Default for MultiStart {
    fn default() -> Self {
        Self { seeds_per_axis: 7 }
    }
}

/// Cartesian grid of seeds over `[-SEED_RANGE, SEED_RANGE]^dim` plus the origin.
fn seed_grid(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = match per_axis {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|i| -SEED_RANGE + 2.0 * SEED_RANGE * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let mut seeds = vec![vec![0.0; dim]];
    if axis.is_empty() {
        return seeds;
    }
    let total = axis.len().pow(dim as u32);
    for mut idx in 0..total {
        let mut s = Vec::with_capacity(dim);
        for _ in 0..dim {
            s.push(axis[idx % axis.len()]);
            idx /= axis.len();
        }
        seeds.push(s);
    }
    seeds
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiSolution {
    pub field: ReducedField,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiReport {
    pub m: usize,
    pub k: usize,
    pub theta: f64,
    pub r: f64,
    pub solutions: Vec<TiSolution>,
    pub starts: usize,
    pub failed_starts: usize,
    pub degenerate: bool,
}

/// `h - k F(h)`.
pub fn ti_residual(h: &[f64], theta: f64, r: f64, k: usize) -> f64 {
    let f = boundary_map(h, theta, r);
    h.iter().zip(f).fold(0.0, |acc, (hi, fi)| acc.max((hi - k as f64 * fi).abs()))
}

/// Translation-invariant solutions `h = k F(h)`, deduplicated and sorted
/// lexicographically.
pub fn ti_fixed_points(m: usize, theta: f64, r: f64, k: usize, opts: MultiStart) -> Result<TiReport> {
    check_weights(theta, r)?;
    if m < 1 || k < 1 {
        return Err(Error::InvalidParameter("m and k must be at least 1".into()));
    }
    let kf = k as f64;
    let system = |h: &[f64]| {
        let (f, jf) = boundary_map_with_jacobian(h, theta, r);
        let g = h.iter().zip(&f).map(|(hi, fi)| hi - kf * fi).collect();
        let mut jac: Vec<f64> = jf.iter().map(|x| -kf * x).collect();
        for i in 0..m {
            jac[i * m + i] += 1.0;
        }
        (g, jac)
    };
    let seeds = seed_grid(m, opts.seeds_per_axis);
    let found: Vec<Option<(Vec<f64>, f64)>> = seeds
        .par_iter()
        .map(|s| newton::solve(s.clone(), system, NewtonOptions::default()))
        .collect();

    let failed_starts = found.iter().filter(|x| x.is_none()).count();
    let mut solutions: Vec<TiSolution> = Vec::new();
    for (h, _) in found.into_iter().flatten() {
        if solutions.iter().any(|s| same_field(s.field.as_slice(), &h, DEDUP_REL_TOL)) {
            continue;
        }
        let residual = ti_residual(&h, theta, r, k);
        if residual <= RESIDUAL_TOL {
            solutions.push(TiSolution { field: ReducedField::new(h)?, residual });
        }
    }
    solutions.sort_by(|a, b| lex_cmp(a.field.as_slice(), b.field.as_slice()));

    Ok(TiReport {
        m,
        k,
        theta,
        r,
        solutions,
        starts: seeds.len(),
        failed_starts,
        degenerate: theta == 1.0,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Fields on the even and odd cosets of a two-periodic boundary law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldPair {
    pub h: ReducedField,
    pub l: ReducedField,
}

impl FieldPair {
    /// Max-norm residual of `h = k F(l), l = k F(h)`.
    pub fn residual(&self, theta: f64, r: f64, k: usize) -> f64 {
        let kf = k as f64;
        let fl = boundary_map(self.l.as_slice(), theta, r);
        let fh = boundary_map(self.h.as_slice(), theta, r);
        let a = self.h.as_slice().iter().zip(fl).map(|(x, y)| (x - kf * y).abs());
        let b = self.l.as_slice().iter().zip(fh).map(|(x, y)| (x - kf * y).abs());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Translation invariant when `h` and `l` agree.
    pub fn is_translation_invariant(&self) -> bool {
        same_field(self.h.as_slice(), self.l.as_slice(), TIE_TOL)
    }

    /// Lies on the branch `e^{h_0} = e^{l_0} = 1`.
    pub fn on_invariant_branch(&self) -> bool {
        self.h.as_slice()[0].abs() <= DEDUP_REL_TOL && self.l.as_slice()[0].abs() <= DEDUP_REL_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    TranslationInvariant,
    TwoPeriodic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartiteSolution {
    pub pair: FieldPair,
    pub residual: f64,
    pub kind: SolutionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartiteReport {
    pub k: usize,
    pub theta: f64,
    pub r: f64,
    pub solutions: Vec<BipartiteSolution>,
    pub starts: usize,
    pub failed_starts: usize,
    pub degenerate: bool,
}

impl BipartiteReport {
    pub fn periodic(&self) -> impl Iterator<Item = &BipartiteSolution> {
        self.solutions.iter().filter(|s| s.kind == SolutionKind::TwoPeriodic)
    }
}

/// Solutions of `h = k F(l), l = k F(h)` for spins `{0, 1, 2}`, found by
/// damped Newton in the log coordinates `(h_0, h_1, l_0, l_1)`.
///
/// Besides the seed grid, every start includes the lifts of the two-cycles
/// and fixed points of `f`, so the result always contains the invariant
/// branch solutions.
pub fn bipartite_solve(theta: f64, r: f64, k: usize, opts: MultiStart) -> Result<BipartiteReport> {
    let branch = two_cycles(theta, r, k)?;
    let kf = k as f64;
    let system = |x: &[f64]| {
        let (fh, jh) = boundary_map_with_jacobian(&x[0..2], theta, r);
        let (fl, jl) = boundary_map_with_jacobian(&x[2..4], theta, r);
        let g = vec![
            x[0] - kf * fl[0],
            x[1] - kf * fl[1],
            x[2] - kf * fh[0],
            x[3] - kf * fh[1],
        ];
        #[rustfmt::skip]
        let jac = vec![
            1.0, 0.0, -kf * jl[0], -kf * jl[1],
            0.0, 1.0, -kf * jl[2], -kf * jl[3],
            -kf * jh[0], -kf * jh[1], 1.0, 0.0,
            -kf * jh[2], -kf * jh[3], 0.0, 1.0,
        ];
        (g, jac)
    };

    let mut seeds = seed_grid(4, opts.seeds_per_axis);
    for c in &branch.cycles {
        seeds.push(vec![0.0, c.z.ln(), 0.0, c.w.ln()]);
        seeds.push(vec![0.0, c.w.ln(), 0.0, c.z.ln()]);
    }
    for &z in &branch.fixed_points {
        seeds.push(vec![0.0, z.ln(), 0.0, z.ln()]);
    }

    let found: Vec<Option<(Vec<f64>, f64)>> = seeds
        .par_iter()
        .map(|s| newton::solve(s.clone(), system, NewtonOptions::default()))
        .collect();
    let failed_starts = found.iter().filter(|x| x.is_none()).count();

    let mut roots: Vec<Vec<f64>> = Vec::new();
    for (x, _) in found.into_iter().flatten() {
        if !roots.iter().any(|y| same_field(y, &x, DEDUP_REL_TOL)) {
            roots.push(x);
        }
    }
    roots.sort_by(|a, b| lex_cmp(a, b));

    let mut solutions = Vec::with_capacity(roots.len());
    for x in roots {
        let pair = FieldPair {
            h: ReducedField::new(x[0..2].to_vec())?,
            l: ReducedField::new(x[2..4].to_vec())?,
        };
        let residual = pair.residual(theta, r, k);
        if residual > RESIDUAL_TOL {
            continue;
        }
        let kind = if pair.is_translation_invariant() {
            SolutionKind::TranslationInvariant
        } else {
            SolutionKind::TwoPeriodic
        };
        solutions.push(BipartiteSolution { pair, residual, kind });
    }

    Ok(BipartiteReport {
        k,
        theta,
        r,
        solutions,
        starts: seeds.len(),
        failed_starts,
        degenerate: theta == 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub theta: f64,
    pub r: f64,
    pub samples: usize,
    pub rng_seed: u64,
    pub injective_on_samples: bool,
    /// First sampled pair with `F(h) = F(l)` numerically but `h != l`.
    pub witness: Option<([f64; 2], [f64; 2])>,
    /// Smallest observed `|F(h) - F(l)| / |h - l|` (max norms).
    pub min_separation_ratio: f64,
    pub degenerate: bool,
}

/// Random search for collisions of `F` on `[-5, 5]^2`.
pub fn injectivity_probe(theta: f64, r: f64, samples: usize, rng_seed: u64) -> Result<InjectivityReport> {
    check_weights(theta, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut witness = None;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let h = [rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0)];
        let l = [rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0)];
        let dist = max_abs_diff(&h, &l);
        if dist <= 1e-6 {
            continue;
        }
        let sep = max_abs_diff(&boundary_map(&h, theta, r), &boundary_map(&l, theta, r));
        min_ratio = min_ratio.min(sep / dist);
        if sep < 1e-12 && witness.is_none() {
            witness = Some((h, l));
        }
    }
    Ok(InjectivityReport {
        theta,
        r,
        samples,
        rng_seed,
        injective_on_samples: witness.is_none(),
        witness,
        min_separation_ratio: min_ratio,
        degenerate: theta == 1.0,
    })
}
