//! Exact overflow probabilities on the simplex `A_n` and finite-horizon
//! oracles for the limit walk.
//!
//! `p_n(x) = P_x(τ_n < τ_0)` solves `V(x) = Σ_v p(v) V(π(x, v))` on the
//! interior of `A_n = {x ∈ ℤ₊²: x1 + x2 ≤ n}` with `V = 1` on
//! `∂A_n = {x1 + x2 = n}` and `V(0) = 0`. Gauss-Seidel sweeps run by
//! decreasing population, and frozen steps are folded into the diagonal
//! (`V(x) = Σ_{free} p(v)V(x+v) / (1 − frozen mass)`).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic;
use crate::model::{constrained_step, transform_tn, Increment, LatticePoint, Rates, WalkKind};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 1_000_000;
/// Largest `n` accepted by [`solve_pn_dense`].
pub const DENSE_MAX_N: i64 = 40;

/// Values on the triangle `{x ∈ ℤ₊²: x1 + x2 ≤ n}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    n: i64,
    values: Vec<f64>,
    sweeps: usize,
}

fn tri_index(n: i64, x1: i64, x2: i64) -> usize {
    // rows by x1; row x1 holds n − x1 + 1 entries
    let before = x1 * (n + 1) - x1 * (x1 - 1) / 2;
    (before + x2) as usize
}

impl GridField {
    fn filled(n: i64, v: f64) -> Self {
        let len = ((n + 1) * (n + 2) / 2) as usize;
        Self {
            n,
            values: vec![v; len],
            sweeps: 0,
        }
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Number of Gauss-Seidel sweeps used (zero for direct solves).
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        x.dim() == 2 && x.get(0) >= 0 && x.get(1) >= 0 && x.sum() <= self.n
    }

    pub fn get(&self, x: &LatticePoint) -> Option<f64> {
        self.contains(x)
            .then(|| self.values[tri_index(self.n, x.get(0), x.get(1))])
    }

    fn at(&self, x1: i64, x2: i64) -> f64 {
        self.values[tri_index(self.n, x1, x2)]
    }

    fn set(&mut self, x1: i64, x2: i64, v: f64) {
        let i = tri_index(self.n, x1, x2);
        self.values[i] = v;
    }

    /// All points of `A_n` with their values, `x1` major.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        let n = self.n;
        (0..=n).flat_map(move |a| (0..=n - a).map(move |b| (LatticePoint::d2(a, b), self.at(a, b))))
    }

    /// Interior points `0 < x1 + x2 < n`, `x1` major.
    pub fn interior(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        let n = self.n;
        self.iter().filter(move |(x, _)| {
            let s = x.sum();
            s > 0 && s < n
        })
    }

    /// CSV with header `x1,x2,value`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,value\n");
        for (x, v) in self.iter() {
            out.push_str(&format!("{},{},{:.16e}\n", x.get(0), x.get(1), v));
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            x1: i64,
            x2: i64,
            value: f64,
        }
        #[derive(Serialize)]
        struct Repr {
            n: i64,
            values: Vec<Entry>,
        }
        let repr = Repr {
            n: self.n,
            values: self
                .iter()
                .map(|(x, value)| Entry {
                    x1: x.get(0),
                    x2: x.get(1),
                    value,
                })
                .collect(),
        };
        serde_json::to_string(&repr).expect("grid serializes")
    }
}

/// Order in which Gauss-Seidel visits interior points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    /// Population `n − 1` down to `1`; the default.
    #[default]
    DecreasingPopulation,
    IncreasingPopulation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    pub order: SweepOrder,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            order: SweepOrder::DecreasingPopulation,
        }
    }
}

impl SolverOptions {
    pub fn new(tol: f64, max_sweeps: usize) -> Self {
        Self {
            tol,
            max_sweeps,
            ..Self::default()
        }
    }
}

/// Local stencil of one interior point: free neighbours with weights,
/// the frozen (self-loop) mass, and the constant contributed by points
/// whose value is fixed.
struct Stencil {
    x: (i64, i64),
    free: Vec<((i64, i64), f64)>,
    fixed: f64,
    fixed_abs: f64,
    diag: f64,
}

fn interior_points(n: i64, order: SweepOrder) -> Vec<(i64, i64)> {
    let levels: Vec<i64> = match order {
        SweepOrder::DecreasingPopulation => (1..n).rev().collect(),
        SweepOrder::IncreasingPopulation => (1..n).collect(),
    };
    levels
        .into_iter()
        .flat_map(|s| (0..=s).map(move |a| (a, s - a)))
        .collect()
}

/// Builds stencils for `V(x) = Σ p(v)V(π(x,v)) + source(x, v)`, where
/// `boundary(q)` supplies the fixed value at `q ∈ ∂A_n ∪ {0}` and
/// `source(x, q)` adds a per-transition constant.
fn stencils(
    rates: &Rates,
    n: i64,
    order: SweepOrder,
    boundary: impl Fn(&LatticePoint) -> f64,
    source: impl Fn(&LatticePoint, &Increment, &LatticePoint) -> f64,
) -> Vec<Stencil> {
    let incs = WalkKind::ConstrainedX.increments(rates);
    interior_points(n, order)
        .into_iter()
        .map(|(a, b)| {
            let x = LatticePoint::d2(a, b);
            let mut st = Stencil {
                x: (a, b),
                free: Vec::with_capacity(3),
                fixed: 0.0,
                fixed_abs: 0.0,
                diag: 1.0,
            };
            for v in &incs {
                let q = constrained_step(WalkKind::ConstrainedX, &x, v);
                let s = v.prob * source(&x, v, &q);
                st.fixed += s;
                st.fixed_abs += s.abs();
                if q == x {
                    st.diag -= v.prob;
                } else if q.sum() == n || q.is_origin() {
                    let c = v.prob * boundary(&q);
                    st.fixed += c;
                    st.fixed_abs += c.abs();
                } else {
                    st.free.push(((q.get(0), q.get(1)), v.prob));
                }
            }
            st
        })
        .collect()
}

fn gauss_seidel(field: &mut GridField, sts: &[Stencil], opts: &SolverOptions) -> Result<()> {
    let mut last = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        let mut worst = 0.0f64;
        for st in sts {
            let mut acc = st.fixed;
            let mut mag = st.fixed_abs;
            for &((a, b), p) in &st.free {
                let v = p * field.at(a, b);
                acc += v;
                mag += v.abs();
            }
            let new = acc / st.diag;
            let old = field.at(st.x.0, st.x.1);
            let scale = mag / st.diag;
            if scale > 0.0 {
                worst = worst.max((new - old).abs() / scale);
            }
            field.set(st.x.0, st.x.1, new);
        }
        last = worst;
        if worst < opts.tol {
            field.sweeps = sweep;
            return Ok(());
        }
    }
    Err(Error::NotConverged {
        sweeps: opts.max_sweeps,
        residual: last,
    })
}

fn check_n(rates: &Rates, n: i64) -> Result<()> {
    rates.require_stations(2)?;
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "buffer size {n} must be >= 1"
        )));
    }
    Ok(())
}

/// `p_n` on all of `A_n` by Gauss-Seidel. Stable and unstable rates are
/// both accepted.
pub fn solve_pn(rates: &Rates, n: i64, opts: &SolverOptions) -> Result<GridField> {
    check_n(rates, n)?;
    let mut field = GridField::filled(n, 0.0);
    for a in 0..=n {
        field.set(a, n - a, 1.0);
    }
    let sts = stencils(
        rates,
        n,
        opts.order,
        |q| if q.is_origin() { 0.0 } else { 1.0 },
        |_, _, _| 0.0,
    );
    gauss_seidel(&mut field, &sts, opts)?;
    Ok(field)
}

/// `p_n` by a dense LU solve; `n ≤ 40`. Independent cross-check of
/// [`solve_pn`].
pub fn solve_pn_dense(rates: &Rates, n: i64) -> Result<GridField> {
    check_n(rates, n)?;
    if n > DENSE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "dense solve limited to n <= {DENSE_MAX_N}"
        )));
    }
    let pts = interior_points(n, SweepOrder::DecreasingPopulation);
    let mut index = GridField::filled(n, -1.0);
    for (i, &(a, b)) in pts.iter().enumerate() {
        index.set(a, b, i as f64);
    }
    let m = pts.len();
    let mut mat = DMatrix::<f64>::identity(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    let incs = WalkKind::ConstrainedX.increments(rates);
    for (i, &(a, b)) in pts.iter().enumerate() {
        let x = LatticePoint::d2(a, b);
        for v in &incs {
            let q = constrained_step(WalkKind::ConstrainedX, &x, v);
            if q.sum() == n {
                rhs[i] += v.prob;
            } else if !q.is_origin() {
                let j = index.at(q.get(0), q.get(1)) as usize;
                mat[(i, j)] -= v.prob;
            }
        }
    }
    let sol = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular system".into()))?;
    let mut field = GridField::filled(n, 0.0);
    for a in 0..=n {
        field.set(a, n - a, 1.0);
    }
    for (i, &(a, b)) in pts.iter().enumerate() {
        field.set(a, b, sol[i]);
    }
    Ok(field)
}

/// `p_n(x) − W*(T_n(x))` on `A_n`, solved directly rather than by
/// subtraction.
///
/// `W*∘T_n` satisfies the same one-step equation as `p_n` except where
/// station 1 is empty (the queue-length walk freezes `(−1,1)` there but the
/// limit walk does not) and at the origin. The difference therefore solves
/// the `p_n` system with zero exit data, value `−W*(T_n 0)` at the origin
/// and a source `μ1(W*(T_n x) − W*(T_n(x + (−1,1))))` on `x1 = 0`. Its
/// entries are resolved to full relative precision even where `p_n` and
/// `W*∘T_n` agree to more digits than a double holds.
pub fn solve_gap(rates: &Rates, n: i64, opts: &SolverOptions) -> Result<GridField> {
    check_n(rates, n)?;
    let w = |x: &LatticePoint| -> f64 {
        harmonic::w_approx(rates, &transform_tn(n, x))
            .expect("W* defined on the transformed simplex")
    };
    // surface the stability / parameter errors before the closure can panic
    harmonic::w_approx(rates, &LatticePoint::d2(n, 0))?;
    let mut field = GridField::filled(n, 0.0);
    field.set(0, 0, -w(&LatticePoint::d2(0, 0)));
    let origin_value = field.at(0, 0);
    let sts = stencils(
        rates,
        n,
        opts.order,
        |q| if q.is_origin() { origin_value } else { 0.0 },
        |x, v, q| {
            // transitions where X freezes but the limit walk moves
            let free = x.add(v);
            if free.get(0) < 0 {
                w(q) - w(&free)
            } else {
                0.0
            }
        },
    );
    gauss_seidel(&mut field, &sts, opts)?;
    Ok(field)
}

/// `max |V(x) − Σ_v p(v)V(π(x,v))|` over interior points, relative to the
/// local term magnitude.
pub fn fixed_point_residual(rates: &Rates, field: &GridField) -> f64 {
    let incs = WalkKind::ConstrainedX.increments(rates);
    field
        .interior()
        .map(|(x, v)| {
            let (mut acc, mut mag) = (0.0, 0.0);
            for inc in &incs {
                let q = constrained_step(WalkKind::ConstrainedX, &x, inc);
                let t = inc.prob * field.get(&q).expect("step stays in A_n");
                acc += t;
                mag += t.abs();
            }
            if mag > 0.0 {
                (v - acc).abs() / mag
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// `P_y(τ ≤ K)` for the limit walk by backward recursion over `K` steps.
///
/// The table is kept on the box of points within `K` steps of `y` in
/// gap coordinates `(y(1) − Σy(i), y(2)[, y(3)])`; reads outside it only
/// reach states that cannot influence the value at `y`.
pub fn horizon_dp(rates: &Rates, y: &LatticePoint, horizon: usize) -> Result<f64> {
    if y.dim() != rates.stations() {
        return Err(Error::StationCount {
            expected: y.dim(),
            got: rates.stations(),
        });
    }
    if y.gap() < 0 || y.coords()[1..].iter().any(|&c| c < 0) {
        return Err(Error::InvalidPoint(format!("{y} is not in B")));
    }
    if y.gap() == 0 {
        return Ok(1.0);
    }
    let k = horizon as i64;
    match y.dim() {
        2 => Ok(dp2(rates, y, k)),
        _ => Ok(dp3(rates, y, k)),
    }
}

fn dp2(rates: &Rates, y: &LatticePoint, k: i64) -> f64 {
    let (lam, m1, m2) = (rates.lambda(), rates.mu(0), rates.mu(1));
    let (d0, e0) = (y.gap(), y.get(1));
    let (nd, ne) = ((d0 + k + 2) as usize, (e0 + k + 2) as usize);
    let mut u = vec![0.0; nd * ne];
    let mut next = vec![0.0; nd * ne];
    u[..ne].fill(1.0);
    for _ in 0..k {
        next.par_chunks_mut(ne).enumerate().for_each(|(d, row)| {
            if d == 0 {
                row.fill(1.0);
                return;
            }
            for (e, out) in row.iter_mut().enumerate() {
                let at = |dd: usize, ee: usize| -> f64 {
                    if dd < nd && ee < ne {
                        u[dd * ne + ee]
                    } else {
                        0.0
                    }
                };
                // (−1,0): gap − 1; (1,1): y2 + 1; (0,−1): gap + 1, y2 − 1
                let mut v = lam * at(d - 1, e) + m1 * at(d, e + 1);
                v += if e == 0 {
                    m2 * at(d, e)
                } else {
                    m2 * at(d + 1, e - 1)
                };
                *out = v;
            }
        });
        std::mem::swap(&mut u, &mut next);
    }
    u[d0 as usize * ne + e0 as usize]
}

fn dp3(rates: &Rates, y: &LatticePoint, k: i64) -> f64 {
    let (lam, m1, m2, m3) = (rates.lambda(), rates.mu(0), rates.mu(1), rates.mu(2));
    let (d0, a0, b0) = (y.gap(), y.get(1), y.get(2));
    let (nd, na, nb) = (
        (d0 + k + 2) as usize,
        (a0 + k + 2) as usize,
        (b0 + k + 2) as usize,
    );
    let plane = na * nb;
    let mut u = vec![0.0; nd * plane];
    let mut next = vec![0.0; nd * plane];
    u[..plane].fill(1.0);
    for _ in 0..k {
        next.par_chunks_mut(plane)
            .enumerate()
            .for_each(|(d, slab)| {
                if d == 0 {
                    slab.fill(1.0);
                    return;
                }
                let at = |dd: usize, aa: usize, bb: usize| -> f64 {
                    if dd < nd && aa < na && bb < nb {
                        u[dd * plane + aa * nb + bb]
                    } else {
                        0.0
                    }
                };
                for a in 0..na {
                    for b in 0..nb {
                        // (−1,0,0): gap − 1; (1,1,0): y2 + 1;
                        // (0,−1,1): y2 − 1, y3 + 1; (0,0,−1): gap + 1, y3 − 1
                        let mut v = lam * at(d - 1, a, b) + m1 * at(d, a + 1, b);
                        v += if a == 0 {
                            m2 * at(d, a, b)
                        } else {
                            m2 * at(d, a - 1, b + 1)
                        };
                        v += if b == 0 {
                            m3 * at(d, a, b)
                        } else {
                            m3 * at(d + 1, a, b - 1)
                        };
                        slab[a * nb + b] = v;
                    }
                }
            });
        std::mem::swap(&mut u, &mut next);
    }
    u[d0 as usize * plane + a0 as usize * nb + b0 as usize]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitGap {
    pub n: i64,
    pub p_exact: f64,
    pub w_star: f64,
    /// `|p_n(T_n y) − W*(y)|` from [`solve_gap`].
    pub gap: f64,
}

/// Exact `p_n(T_n(y))` and its distance to `W*(y)` for each `n`.
pub fn convergence_to_limit(
    rates: &Rates,
    y: &LatticePoint,
    n_list: &[i64],
    opts: &SolverOptions,
) -> Result<Vec<LimitGap>> {
    let w_star = harmonic::w_approx(rates, y)?;
    n_list
        .iter()
        .map(|&n| {
            if n <= y.get(0) {
                return Err(Error::InvalidArgument(format!("n={n} too small for y={y}")));
            }
            let x = transform_tn(n, y);
            let p = solve_pn(rates, n, opts)?;
            let g = solve_gap(rates, n, opts)?;
            Ok(LimitGap {
                n,
                p_exact: p.get(&x).expect("T_n y in A_n"),
                w_star,
                gap: g.get(&x).expect("T_n y in A_n").abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec5() -> Rates {
        Rates::two(0.1, 0.4, 0.5).unwrap()
    }

    #[test]
    fn small_system_by_hand() {
        // n = 2, unknowns V(1,0) and V(0,1):
        //   V(0,1) = λ + μ1 V(0,1)            (station 1 empty, (0,−1) hits 0)
        //   V(1,0) = λ + μ1 V(0,1) + μ2 V(1,0) (station 2 empty)
        let r = Rates::two(0.2, 0.5, 0.3).unwrap();
        let f = solve_pn(&r, 2, &SolverOptions::default()).unwrap();
        let v01: f64 = 0.2 / 0.5;
        let v10 = (0.2 + 0.5 * v01) / 0.7;
        assert!((v10 - 0.2 / (0.7 * 0.5)).abs() < 1e-15);
        assert!((f.get(&LatticePoint::d2(1, 0)).unwrap() - v10).abs() < 1e-13);
        assert!((f.get(&LatticePoint::d2(0, 1)).unwrap() - v01).abs() < 1e-13);
    }

    #[test]
    fn boundary_values() {
        let f = solve_pn(&sec5(), 12, &SolverOptions::default()).unwrap();
        for a in 0..=12 {
            assert_eq!(f.get(&LatticePoint::d2(a, 12 - a)), Some(1.0));
        }
        assert_eq!(f.get(&LatticePoint::d2(0, 0)), Some(0.0));
        assert_eq!(f.get(&LatticePoint::d2(7, 7)), None);
        assert!(f.iter().all(|(_, v)| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn gauss_seidel_matches_dense() {
        for (r, n) in [(sec5(), 25), (Rates::two(0.3, 0.25, 0.45).unwrap(), 15)] {
            let gs = solve_pn(&r, n, &SolverOptions::default()).unwrap();
            let lu = solve_pn_dense(&r, n).unwrap();
            for ((x, a), (_, b)) in gs.iter().zip(lu.iter()) {
                assert!((a - b).abs() <= 1e-9 * b.abs() + 1e-300, "{x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sweep_orders_agree() {
        let r = sec5();
        let tol = 1e-12;
        let down = solve_pn(&r, 30, &SolverOptions::new(tol, DEFAULT_MAX_SWEEPS)).unwrap();
        let up = solve_pn(
            &r,
            30,
            &SolverOptions {
                order: SweepOrder::IncreasingPopulation,
                ..SolverOptions::new(tol, DEFAULT_MAX_SWEEPS)
            },
        )
        .unwrap();
        for ((_, a), (_, b)) in down.iter().zip(up.iter()) {
            assert!((a - b).abs() <= 10.0 * tol * a.abs());
        }
        assert!(fixed_point_residual(&r, &down) <= 10.0 * tol);
    }

    #[test]
    fn not_converged_reports() {
        let err = solve_pn(&sec5(), 20, &SolverOptions::new(1e-15, 3)).unwrap_err();
        assert!(matches!(err, Error::NotConverged { sweeps: 3, .. }));
    }

    #[test]
    fn gap_matches_subtraction_when_resolvable() {
        let r = sec5();
        let n = 15;
        let p = solve_pn(&r, n, &SolverOptions::default()).unwrap();
        let g = solve_gap(&r, n, &SolverOptions::default()).unwrap();
        for (x, d) in g.iter() {
            let naive = p.get(&x).unwrap() - harmonic::w_star_2d(&r, &transform_tn(n, &x)).unwrap();
            assert!((d - naive).abs() <= 1e-12, "{x}: {d} vs {naive}");
        }
    }

    #[test]
    fn dp_basics() {
        let r = sec5();
        assert_eq!(horizon_dp(&r, &LatticePoint::d2(4, 4), 0).unwrap(), 1.0);
        assert_eq!(horizon_dp(&r, &LatticePoint::d2(1, 0), 0).unwrap(), 0.0);
        let one = horizon_dp(&r, &LatticePoint::d2(1, 0), 1).unwrap();
        assert!((one - 0.1).abs() < 1e-15);
        let y = LatticePoint::d2(3, 1);
        let w = harmonic::w_star_2d(&r, &y).unwrap();
        let mut prev = 0.0;
        let mut gaps = Vec::new();
        for k in [10, 20, 40, 80] {
            let v = horizon_dp(&r, &y, k).unwrap();
            assert!(v >= prev && v <= w);
            gaps.push(w - v);
            prev = v;
        }
        assert!(gaps.windows(2).all(|g| g[1] < 0.5 * g[0]));
        assert!(horizon_dp(&r, &LatticePoint::d2(0, 1), 3).is_err());
        assert!(horizon_dp(&r, &LatticePoint::d3(3, 1, 0), 3).is_err());
    }

    #[test]
    fn dp_3d_one_step() {
        let r = Rates::three(0.1, 0.4, 0.5, 0.3).unwrap();
        let v = horizon_dp(&r, &LatticePoint::d3(1, 0, 0), 1).unwrap();
        assert!((v - r.lambda()).abs() < 1e-15);
        // from (2,1,0) one step: only (−1,0,0) lands on the face y1 = y2 + y3
        let v = horizon_dp(&r, &LatticePoint::d3(2, 1, 0), 1).unwrap();
        assert!((v - r.lambda()).abs() < 1e-15);
    }

    #[test]
    fn convergence_examples() {
        let r = sec5();
        let opts = SolverOptions::default();
        let rows = convergence_to_limit(&r, &LatticePoint::d2(0, 0), &[5, 10], &opts).unwrap();
        assert!(rows.iter().all(|g| g.gap == 0.0 && g.p_exact == 1.0));
        let rows = convergence_to_limit(&r, &LatticePoint::d2(3, 0), &[10, 20, 40], &opts).unwrap();
        assert!(rows.windows(2).all(|w| w[1].gap < w[0].gap));
        assert!(convergence_to_limit(&r, &LatticePoint::d2(30, 0), &[10], &opts).is_err());
    }

    #[test]
    fn csv_and_json() {
        let f = solve_pn(&sec5(), 3, &SolverOptions::default()).unwrap();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2,value"));
        assert_eq!(lines.count(), 10);
        let v: serde_json::Value = serde_json::from_str(&f.to_json()).unwrap();
        assert_eq!(v["n"], 3);
        assert_eq!(v["values"].as_array().unwrap().len(), 10);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn probabilities_in_unit_interval(
                lam in 0.05f64..1.0, m1 in 0.05f64..1.0, m2 in 0.05f64..1.0, n in 1i64..30,
            ) {
                let r = Rates::two(lam, m1, m2).unwrap();
                let f = solve_pn(&r, n, &SolverOptions::default()).unwrap();
                prop_assert!(f.iter().all(|(_, v)| (0.0..=1.0).contains(&v)));
            }
        }
    }
}
