//! Plain Monte Carlo for the overflow probability and for the limit walk.
//!
//! Every path draws from its own ChaCha8 stream: the generator is seeded
//! from the user seed and `set_stream(path_index)` selects the path, so an
//! estimate depends only on `(seed, paths)` and not on how rayon splits the
//! work. Hits are integer counts, so the reduction is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic;
use crate::model::{
    boundary_membership, constrained_step, Increment, LatticePoint, Membership, Rates, WalkKind,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub rates: Rates,
    pub kind: WalkKind,
    pub start: LatticePoint,
    pub paths: u64,
    pub seed: u64,
    /// Escape cutoff `N` on `y(1) − Σ y(i)`; limit walk only.
    pub escape_gap: i64,
    /// Buffer size `n`; queue-length walk only.
    pub buffer_n: i64,
}

impl SimConfig {
    pub fn overflow(
        rates: Rates,
        start: LatticePoint,
        buffer_n: i64,
        paths: u64,
        seed: u64,
    ) -> Self {
        Self {
            rates,
            kind: WalkKind::ConstrainedX,
            start,
            paths,
            seed,
            escape_gap: 1,
            buffer_n,
        }
    }

    pub fn limit(
        rates: Rates,
        start: LatticePoint,
        escape_gap: i64,
        paths: u64,
        seed: u64,
    ) -> Self {
        Self {
            rates,
            kind: WalkKind::LimitY,
            start,
            paths,
            seed,
            escape_gap,
            buffer_n: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidArgument("paths must be >= 1".into()));
        }
        if self.start.dim() != self.rates.stations() {
            return Err(Error::StationCount {
                expected: self.start.dim(),
                got: self.rates.stations(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub hits: u64,
    pub escapes: u64,
    pub paths: u64,
    pub seed: u64,
    /// Upper bound on the probability mass lost to the escape cutoff
    /// (limit walk); zero for the queue-length walk.
    pub bias_bound: f64,
    /// Set when the rates violate `λ < μ_i`.
    pub unstable_rates: bool,
}

impl Estimate {
    fn from_counts(cfg: &SimConfig, hits: u64, escapes: u64, bias_bound: f64) -> Self {
        let p = hits as f64 / cfg.paths as f64;
        Self {
            p_hat: p,
            std_err: (p * (1.0 - p) / cfg.paths as f64).sqrt(),
            hits,
            escapes,
            paths: cfg.paths,
            seed: cfg.seed,
            bias_bound,
            unstable_rates: !cfg.rates.stable(),
        }
    }

    /// Nominal 95% normal interval `p̂ ± 1.96·se`.
    pub fn ci95(&self) -> (f64, f64) {
        (
            self.p_hat - 1.96 * self.std_err,
            self.p_hat + 1.96 * self.std_err,
        )
    }

    /// `[p̂ − 2se, p̂ + 2se + bias_bound]`.
    pub fn bracket(&self) -> (f64, f64) {
        (
            self.p_hat - 2.0 * self.std_err,
            self.p_hat + 2.0 * self.std_err + self.bias_bound,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}

struct Sampler {
    incs: Vec<Increment>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(kind: WalkKind, rates: &Rates) -> Self {
        let incs = kind.increments(rates);
        let mut acc = 0.0;
        let cumulative = incs
            .iter()
            .map(|v| {
                acc += v.prob;
                acc
            })
            .collect();
        Self { incs, cumulative }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> &Increment {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.incs.len() - 1);
        &self.incs[i]
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

const CHUNK: u64 = 4096;

/// Counts `(hits, escapes)` over all paths; `run` returns `Some(true)` for a
/// hit, `Some(false)` for an escape and `None` for an ordinary failure.
fn count_paths(
    cfg: &SimConfig,
    run: impl Fn(&mut ChaCha8Rng) -> Option<bool> + Sync,
) -> (u64, u64) {
    let chunks = cfg.paths.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (mut hits, mut escapes) = (0u64, 0u64);
            for path in c * CHUNK..((c + 1) * CHUNK).min(cfg.paths) {
                match run(&mut path_rng(cfg.seed, path)) {
                    Some(true) => hits += 1,
                    Some(false) => escapes += 1,
                    None => {}
                }
            }
            (hits, escapes)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Estimates `P_x(τ_n < τ_0)` for the queue-length walk.
pub fn simulate_pn(cfg: &SimConfig) -> Result<Estimate> {
    cfg.validate()?;
    if cfg.kind != WalkKind::ConstrainedX {
        return Err(Error::InvalidArgument(
            "simulate_pn needs the queue-length walk".into(),
        ));
    }
    let n = cfg.buffer_n;
    if n < 1 || !cfg.start.in_domain(WalkKind::ConstrainedX) {
        return Err(Error::InvalidPoint(format!("{} with n={n}", cfg.start)));
    }
    match boundary_membership(n, &cfg.start) {
        Membership::ExitBoundary => return Ok(Estimate::from_counts(cfg, cfg.paths, 0, 0.0)),
        Membership::Origin => return Ok(Estimate::from_counts(cfg, 0, 0, 0.0)),
        Membership::OutOfDomain => {
            return Err(Error::InvalidPoint(format!(
                "{} is outside A_{n}",
                cfg.start
            )))
        }
        Membership::Interior => {}
    }
    let sampler = Sampler::new(WalkKind::ConstrainedX, &cfg.rates);
    let (hits, _) = count_paths(cfg, |rng| {
        let mut x = cfg.start;
        loop {
            x = constrained_step(WalkKind::ConstrainedX, &x, sampler.draw(rng));
            if x.sum() == n {
                return Some(true);
            }
            if x.is_origin() {
                return None;
            }
        }
    });
    Ok(Estimate::from_counts(cfg, hits, 0, 0.0))
}

/// `max` of the closed-form hitting probability over the escape face
/// `{y(1) − Σ y(i) = N}` with `y(i) ∈ [0, N]` for `i ≥ 2`; `1` when no closed
/// form applies.
pub fn escape_bias_bound(rates: &Rates, escape_gap: i64) -> f64 {
    let face = 0..=escape_gap;
    let value = match rates.stations() {
        2 => face
            .map(|a| harmonic::w_approx(rates, &LatticePoint::d2(a + escape_gap, a)))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v))),
        _ => face
            .flat_map(|a| (0..=escape_gap).map(move |b| (a, b)))
            .map(|(a, b)| harmonic::w_star_3d(rates, &LatticePoint::d3(a + b + escape_gap, a, b)))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v))),
    };
    value.unwrap_or(1.0)
}

/// Estimates `P_y(τ < ∞)` for the limit walk, stopping paths that reach the
/// escape face `y(1) − Σ y(i) = N`.
pub fn simulate_y_hit(cfg: &SimConfig) -> Result<Estimate> {
    cfg.validate()?;
    if cfg.kind != WalkKind::LimitY {
        return Err(Error::InvalidArgument(
            "simulate_y_hit needs the limit walk".into(),
        ));
    }
    let y0 = cfg.start;
    if !y0.in_domain(WalkKind::LimitY) || y0.gap() < 0 {
        return Err(Error::InvalidPoint(format!("{y0} is not in B")));
    }
    let big_n = cfg.escape_gap;
    if big_n < 1 || big_n <= y0.gap() {
        return Err(Error::InvalidArgument(format!(
            "escape gap {big_n} must exceed the starting gap {}",
            y0.gap()
        )));
    }
    let bias = escape_bias_bound(&cfg.rates, big_n);
    if y0.gap() == 0 {
        return Ok(Estimate::from_counts(cfg, cfg.paths, 0, bias));
    }
    let sampler = Sampler::new(WalkKind::LimitY, &cfg.rates);
    let (hits, escapes) = count_paths(cfg, |rng| {
        let mut y = y0;
        loop {
            y = constrained_step(WalkKind::LimitY, &y, sampler.draw(rng));
            let g = y.gap();
            if g == 0 {
                return Some(true);
            }
            if g >= big_n {
                return Some(false);
            }
        }
    });
    Ok(Estimate::from_counts(cfg, hits, escapes, bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactsolve::{solve_pn, SolverOptions};

    #[test]
    fn degenerate_starts() {
        let r = Rates::two(0.2, 0.4, 0.3).unwrap();
        let cfg = SimConfig::overflow(r.clone(), LatticePoint::d2(2, 4), 6, 10, 1);
        let e = simulate_pn(&cfg).unwrap();
        assert_eq!((e.p_hat, e.hits, e.std_err), (1.0, 10, 0.0));
        let cfg = SimConfig::limit(r, LatticePoint::d2(3, 3), 10, 10, 1);
        assert_eq!(simulate_y_hit(&cfg).unwrap().p_hat, 1.0);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let r = Rates::two(0.2, 0.4, 0.3).unwrap();
        let cfg = SimConfig::overflow(r, LatticePoint::d2(1, 0), 6, 20_000, 42);
        let a = simulate_pn(&cfg).unwrap();
        let b = simulate_pn(&cfg).unwrap();
        assert_eq!(a, b);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = single.install(|| simulate_pn(&cfg).unwrap());
        assert_eq!(a, c);
        let other = simulate_pn(&SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.hits, other.hits);
    }

    #[test]
    fn overflow_estimate_covers_exact() {
        let r = Rates::two(0.2, 0.4, 0.3).unwrap();
        let exact = solve_pn(&r, 6, &SolverOptions::default())
            .unwrap()
            .get(&LatticePoint::d2(1, 0))
            .unwrap();
        let e = simulate_pn(&SimConfig::overflow(
            r,
            LatticePoint::d2(1, 0),
            6,
            200_000,
            7,
        ))
        .unwrap();
        let (lo, hi) = e.ci95();
        assert!(lo <= exact && exact <= hi, "{exact} not in [{lo}, {hi}]");
    }

    #[test]
    fn limit_estimate_brackets_closed_form() {
        let r = Rates::two(0.1, 0.4, 0.5).unwrap();
        let y = LatticePoint::d2(3, 1);
        let w = harmonic::w_star_2d(&r, &y).unwrap();
        let e = simulate_y_hit(&SimConfig::limit(r.clone(), y, 40, 200_000, 11)).unwrap();
        let (lo, hi) = e.bracket();
        assert!(lo <= w && w <= hi, "{w} not in [{lo}, {hi}]");
        assert_eq!(e.hits + e.escapes, e.paths);
        let face_max = (0..=40)
            .map(|a| harmonic::w_star_2d(&r, &LatticePoint::d2(a + 40, a)).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(e.bias_bound, face_max);
        assert!(e.bias_bound < 1e-20);
    }

    #[test]
    fn unstable_rates_flagged() {
        let r = Rates::two(0.5, 0.4, 0.6).unwrap();
        let e = simulate_pn(&SimConfig::overflow(r, LatticePoint::d2(1, 0), 5, 1000, 3)).unwrap();
        assert!(e.unstable_rates);
    }

    #[test]
    fn bad_configs() {
        let r = Rates::two(0.1, 0.4, 0.5).unwrap();
        let mut cfg = SimConfig::limit(r.clone(), LatticePoint::d2(5, 0), 5, 10, 0);
        assert!(simulate_y_hit(&cfg).is_err());
        cfg.escape_gap = 6;
        cfg.paths = 0;
        assert!(simulate_y_hit(&cfg).is_err());
        let cfg = SimConfig::overflow(r, LatticePoint::d2(7, 0), 6, 10, 0);
        assert!(simulate_pn(&cfg).is_err());
    }

    #[test]
    fn three_station_limit_walk() {
        let r = Rates::three(0.1, 0.4, 0.5, 0.3).unwrap();
        let y = LatticePoint::d3(6, 1, 2);
        let w = harmonic::w_star_3d(&r, &y).unwrap();
        let e = simulate_y_hit(&SimConfig::limit(r, y, 30, 100_000, 5)).unwrap();
        let (lo, hi) = e.bracket();
        assert!(lo <= w && w <= hi, "{w} not in [{lo}, {hi}]");
    }
}
