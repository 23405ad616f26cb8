//! Reference implementations used only to check the library. None of these
//! share code paths with the crate under test.
#![allow(dead_code)]

use baryscore::{DiscreteMeasure, LayeredEmbedding};
use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Dense two-phase tableau simplex for the transportation LP.
// ---------------------------------------------------------------------------

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[r] = col;
    }

    /// Bland's rule: smallest improving column, smallest basic index on ratio ties.
    fn optimize(&mut self, cost: &[f64], allowed: usize) {
        let rhs = self.rows[0].len() - 1;
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced: f64 =
                    cost[j] - self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>();
                if reduced < -1e-11 {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > 1e-12 {
                    let ratio = row[rhs] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-14 || ((ratio - br).abs() <= 1e-14 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let (r, _) = best.expect("transportation LP is bounded");
            self.pivot(r, col);
        }
    }
}

/// Optimal cost of `min <pi, C>` s.t. row sums `a`, column sums `b`.
pub fn lp_transport_cost(a: &[f64], b: &[f64], c: &Array2<f64>) -> f64 {
    let (n, m) = (a.len(), b.len());
    let nv = n * m;
    let nr = n + m;
    let width = nv + nr + 1;
    let mut rows = vec![vec![0.0; width]; nr];
    for i in 0..n {
        for j in 0..m {
            rows[i][i * m + j] = 1.0;
            rows[n + j][i * m + j] = 1.0;
        }
    }
    for (r, row) in rows.iter_mut().enumerate() {
        row[nv + r] = 1.0;
        row[width - 1] = if r < n { a[r] } else { b[r - n] };
    }
    let mut t = Tableau {
        rows,
        basis: (nv..nv + nr).collect(),
    };
    let mut phase1 = vec![0.0; nv + nr];
    for v in phase1.iter_mut().skip(nv) {
        *v = 1.0;
    }
    t.optimize(&phase1, nv + nr);
    // Drive zero-level artificials out where possible; leftovers sit on redundant rows.
    for r in 0..nr {
        if t.basis[r] >= nv {
            if let Some(col) = (0..nv).find(|&j| t.rows[r][j].abs() > 1e-12 && !t.basis.contains(&j)) {
                t.pivot(r, col);
            }
        }
    }
    let mut phase2 = vec![0.0; nv + nr];
    for i in 0..n {
        for j in 0..m {
            phase2[i * m + j] = c[[i, j]];
        }
    }
    t.optimize(&phase2, nv);
    t.rows
        .iter()
        .zip(&t.basis)
        .map(|(row, &b)| phase2[b] * row[width - 1])
        .sum()
}

// ---------------------------------------------------------------------------
// One-dimensional transport through quantile functions.
// ---------------------------------------------------------------------------

/// Exact `W2^2` between 1-D discrete measures via the monotone coupling.
pub fn w2_squared_1d(xs: &[f64], xw: &[f64], ys: &[f64], yw: &[f64]) -> f64 {
    let mut a: Vec<(f64, f64)> = xs.iter().copied().zip(xw.iter().copied()).collect();
    let mut b: Vec<(f64, f64)> = ys.iter().copied().zip(yw.iter().copied()).collect();
    a.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    b.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut total = 0.0;
    loop {
        let step = ra.min(rb);
        total += step * (a[i].0 - b[j].0).powi(2);
        ra -= step;
        rb -= step;
        if ra <= 1e-15 {
            i += 1;
            if i == a.len() {
                break;
            }
            ra += a[i].1;
        }
        if rb <= 1e-15 {
            j += 1;
            if j == b.len() {
                break;
            }
            rb += b[j].1;
        }
    }
    total
}

/// Grid search for the best 2-point uniform barycenter of 1-D measures.
pub fn grid_barycenter_objective_1d(measures: &[(Vec<f64>, Vec<f64>)], lo: f64, hi: f64, step: f64) -> f64 {
    let steps = ((hi - lo) / step).round() as usize;
    let lambda = 1.0 / measures.len() as f64;
    let mut best = f64::INFINITY;
    for s1 in 0..=steps {
        let x1 = lo + s1 as f64 * step;
        for s2 in s1..=steps {
            let x2 = lo + s2 as f64 * step;
            let obj: f64 = measures
                .iter()
                .map(|(p, w)| lambda * w2_squared_1d(&[x1, x2], &[0.5, 0.5], p, w))
                .sum();
            best = best.min(obj);
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Correlation coefficients straight from their definitions.
// ---------------------------------------------------------------------------

/// Pearson through the pairwise-difference identity
/// `r = sum_{i<j} dx dy / sqrt(sum dx^2 * sum dy^2)`, which avoids means.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn rank_oracle(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let equal = v.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_oracle(&rank_oracle(x), &rank_oracle(y))
}

/// (concordant, discordant, ties x only, ties y only, ties both).
pub fn pair_counts_oracle(x: &[f64], y: &[f64]) -> (u64, u64, u64, u64, u64) {
    let mut c = (0, 0, 0, 0, 0);
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 && dy == 0.0 {
                c.4 += 1;
            } else if dx == 0.0 {
                c.2 += 1;
            } else if dy == 0.0 {
                c.3 += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                c.0 += 1;
            } else {
                c.1 += 1;
            }
        }
    }
    c
}

pub fn kendall_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let (c, d, tx, ty, _) = pair_counts_oracle(x, y);
    let n1 = (c + d + ty) as f64;
    let n2 = (c + d + tx) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    Some((c as f64 - d as f64) / (n1 * n2).sqrt())
}

// ---------------------------------------------------------------------------
// Student t upper tail by quadrature of the density.
// ---------------------------------------------------------------------------

/// `P(T > t)` for `T ~ t(df)`. With `x = sqrt(df) tan(theta)` the density
/// becomes proportional to `cos(theta)^(df - 1)` on `(-pi/2, pi/2)`.
pub fn t_sf_quadrature(t: f64, df: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |theta: f64| theta.cos().max(0.0).powf(df - 1.0);
    let simpson = |lo: f64, hi: f64, intervals: usize| -> f64 {
        let h = (hi - lo) / intervals as f64;
        let mut acc = f(lo) + f(hi);
        for k in 1..intervals {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + k as f64 * h);
        }
        acc * h / 3.0
    };
    let theta = (t / df.sqrt()).atan();
    let total = simpson(-half_pi, half_pi, 40_000);
    let upper = simpson(theta, half_pi, 40_000);
    upper / total
}

/// Williams' t statistic typed out independently of the library.
pub fn williams_t_oracle(r12: f64, r13: f64, r23: f64, n: f64) -> Option<f64> {
    let det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if det < 0.0 {
        return None;
    }
    let rbar = (r12 + r13) / 2.0;
    let var = 2.0 * det * (n - 1.0) / (n - 3.0) + rbar * rbar * (1.0 - r23).powi(3);
    if var <= 0.0 {
        return None;
    }
    Some((r12 - r13) * ((n - 1.0) * (1.0 + r23)).sqrt() / var.sqrt())
}

// ---------------------------------------------------------------------------
// Random inputs.
// ---------------------------------------------------------------------------

/// Weights `k_i / sum k` with small integer numerators.
pub fn rational_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let ks: Vec<u32> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: u32 = ks.iter().sum();
    ks.iter().map(|&k| k as f64 / total as f64).collect()
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

pub fn random_measure<R: Rng>(rng: &mut R, n: usize, d: usize) -> DiscreteMeasure {
    let support = gaussian_matrix(rng, n, d, 1.0);
    DiscreteMeasure::new(support, Array1::from(rational_weights(rng, n))).unwrap()
}

pub fn random_embedding<R: Rng>(rng: &mut R, id: &str, layers: usize, n: usize, d: usize) -> LayeredEmbedding {
    let base = gaussian_matrix(rng, n, d, 1.0);
    // Layers drift smoothly from a shared base, as encoder layers do.
    let tensor = Array3::from_shape_fn((layers, n, d), |(l, i, k)| {
        let z: f64 = StandardNormal.sample(rng);
        base[[i, k]] + 0.3 * l as f64 * z
    });
    let vocab = ["the", "a", "cat", "dog", "sat", "on", "mat", "ran", "far", "home", "blue", "red"];
    let tokens = (0..n).map(|_| vocab[rng.random_range(0..vocab.len())].to_string()).collect();
    LayeredEmbedding::new(id, tokens, tensor).unwrap()
}

pub fn perturbed<R: Rng>(rng: &mut R, emb: &LayeredEmbedding, id: &str, sigma: f64) -> LayeredEmbedding {
    let tensor = emb.tensor().mapv(|v| {
        let z: f64 = StandardNormal.sample(rng);
        v + sigma * z
    });
    LayeredEmbedding::new(id, emb.tokens().to_vec(), tensor).unwrap()
}
