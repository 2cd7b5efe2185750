//! Nearest-neighbor weight matrices linking targets to sources, and the
//! contrast vectors that express a coefficient estimate as weighted sums over
//! target means and source responses.

use ndarray::{Array1, ArrayView2};

use crate::error::Error;
use crate::geometry::{pairwise_distances, LocationSet, Metric};
use crate::linalg::solve_spd;
use crate::rng;
use crate::Result;

/// Sparse nonnegative M x N matrix with unit row sums. Row m holds the
/// source weights used to transport responses to target m.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    /// Builds from explicit rows, enforcing nonnegativity and unit row sums
    /// (to 1e-12).
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (m, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(j, w) in row {
                if j >= ncols {
                    return Err(Error::DimensionMismatch(format!(
                        "weight column {j} out of range (N = {ncols})"
                    )));
                }
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "weight ({m}, {j}) = {w} must be nonnegative and finite"
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "weight row {m} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(WeightMatrix {
            nrows: rows.len(),
            ncols,
            rows,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, m: usize) -> &[(usize, f64)] {
        &self.rows[m]
    }

    /// Identity weights (M = N), mostly for tests and degenerate pipelines.
    pub fn identity(n: usize) -> Self {
        WeightMatrix {
            nrows: n,
            ncols: n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Ψ y: transported responses at each target.
    pub fn mul_vec(&self, y: &Array1<f64>) -> Result<Array1<f64>> {
        if y.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix has {} columns, vector has {}",
                self.ncols,
                y.len()
            )));
        }
        let mut out = Array1::zeros(self.nrows);
        for (m, row) in self.rows.iter().enumerate() {
            let mut s = 0.0;
            for &(j, w) in row {
                s += w * y[j];
            }
            out[m] = s;
        }
        Ok(out)
    }

    /// wᵀ Ψ as a length-N vector.
    pub fn tr_mul_vec(&self, w: &Array1<f64>) -> Result<Array1<f64>> {
        if w.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "weight matrix has {} rows, vector has {}",
                self.nrows,
                w.len()
            )));
        }
        let mut out = Array1::zeros(self.ncols);
        for (m, row) in self.rows.iter().enumerate() {
            for &(j, wt) in row {
                out[j] += w[m] * wt;
            }
        }
        Ok(out)
    }
}

/// Contrast vectors for one coefficient: w over targets, v = wΨ over sources.
#[derive(Debug, Clone)]
pub struct ContrastVectors {
    pub w: Array1<f64>,
    pub v: Array1<f64>,
    pub coefficient_index: usize,
}

impl ContrastVectors {
    /// |Σ w - Σ v| relative to the weight scale; should sit at floating
    /// roundoff for any unit-row-sum Ψ.
    pub fn mass_imbalance(&self) -> f64 {
        let sw: f64 = self.w.sum();
        let sv: f64 = self.v.sum();
        (sw - sv).abs() / (1.0 + sw.abs().max(sv.abs()))
    }
}

/// 1-nearest-neighbor weight matrix: each target row puts weight 1 on a
/// closest source, breaking exact distance ties uniformly under the seed.
pub fn one_nn_weights(
    metric: &Metric,
    source: &LocationSet,
    target: &LocationSet,
    seed: u64,
) -> Result<WeightMatrix> {
    knn_weights(metric, source, target, 1, seed)
}

/// K-nearest-neighbor weight matrix: each target row puts weight 1/K on the K
/// closest sources. Ties at the inclusion boundary are broken uniformly under
/// the seed; ties strictly inside the boundary are all included anyway.
pub fn knn_weights(
    metric: &Metric,
    source: &LocationSet,
    target: &LocationSet,
    k: usize,
    seed: u64,
) -> Result<WeightMatrix> {
    let n = source.len();
    if n == 0 {
        return Err(Error::EmptySource);
    }
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let dists = pairwise_distances(metric, target, source)?;
    let weight = 1.0 / k as f64;
    let mut rows = Vec::with_capacity(target.len());
    for m in 0..target.len() {
        let drow = dists.row(m);
        // order by (distance, index); exact equality defines a tie
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            drow[a]
                .partial_cmp(&drow[b])
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        let boundary = drow[order[k - 1]];
        let strict: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| drow[j] < boundary)
            .collect();
        let tied: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| drow[j] == boundary)
            .collect();
        let need = k - strict.len();
        let chosen_tied = if tied.len() == need {
            tied
        } else {
            let mut pool = tied;
            let mut rng = rng::stream(seed, "psi-ties", m as u64);
            // partial Fisher-Yates: uniformly choose `need` of the tied pool
            for i in 0..need {
                let j = i + rand::Rng::gen_range(&mut rng, 0..pool.len() - i);
                pool.swap(i, j);
            }
            pool.truncate(need);
            pool
        };
        let mut row: Vec<(usize, f64)> = strict
            .into_iter()
            .chain(chosen_tied)
            .map(|j| (j, weight))
            .collect();
        row.sort_by_key(|&(j, _)| j);
        rows.push(row);
    }
    WeightMatrix::from_rows(n, rows)
}

/// Contrast vectors for coefficient `p`: w = e_pᵀ(X*ᵀX*)⁻¹X*ᵀ and v = wΨ.
pub fn contrast_vectors(
    target_covariates: &ArrayView2<f64>,
    psi: &WeightMatrix,
    coefficient_index: usize,
) -> Result<ContrastVectors> {
    let m = target_covariates.nrows();
    let p = target_covariates.ncols();
    if coefficient_index >= p {
        return Err(Error::InvalidArgument(format!(
            "coefficient index {coefficient_index} out of range (P = {p})"
        )));
    }
    if psi.nrows() != m {
        return Err(Error::DimensionMismatch(format!(
            "weight matrix has {} rows, target has {m}",
            psi.nrows()
        )));
    }
    let gram = target_covariates.t().dot(target_covariates);
    let mut e_p = Array1::zeros(p);
    e_p[coefficient_index] = 1.0;
    let u = solve_spd(&gram.view(), &e_p.view()).map_err(|_| {
        let eigs = crate::linalg::sym_eigenvalues(&gram.view());
        Error::SingularGram {
            ratio: eigs[0] / eigs[eigs.len() - 1].max(f64::MIN_POSITIVE),
        }
    })?;
    let w = target_covariates.dot(&u);
    let v = psi.tr_mul_vec(&w)?;
    Ok(ContrastVectors {
        w,
        v,
        coefficient_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn locs(rows: &[[f64; 2]]) -> LocationSet {
        let mut a = Array2::zeros((rows.len(), 2));
        for (i, r) in rows.iter().enumerate() {
            a[[i, 0]] = r[0];
            a[[i, 1]] = r[1];
        }
        LocationSet::euclidean(a).unwrap()
    }

    #[test]
    fn one_nn_picks_unique_minimum() {
        // M=1, sources at distances (2, 1, 3) -> row (0, 1, 0)
        let source = locs(&[[2.0, 0.0], [1.0, 0.0], [3.0, 0.0]]);
        let target = locs(&[[0.0, 0.0]]);
        let psi = one_nn_weights(&Metric::Euclidean, &source, &target, 0).unwrap();
        assert_eq!(psi.row(0), &[(1, 1.0)]);
    }

    #[test]
    fn one_nn_exact_match_wins() {
        let source = locs(&[[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]]);
        let target = locs(&[[1.0, 1.0]]);
        let psi = one_nn_weights(&Metric::Euclidean, &source, &target, 3).unwrap();
        assert_eq!(psi.row(0), &[(1, 1.0)]);
    }

    #[test]
    fn one_nn_tie_frequencies_are_uniform() {
        // two sources both at distance 1: over many seeded draws the pick
        // frequency of each should sit within 3 binomial standard errors of 1/2
        let source = locs(&[[1.0, 0.0], [-1.0, 0.0]]);
        let target = locs(&[[0.0, 0.0]]);
        let trials = 10_000;
        let mut first = 0usize;
        for seed in 0..trials {
            let psi = one_nn_weights(&Metric::Euclidean, &source, &target, seed).unwrap();
            if psi.row(0)[0].0 == 0 {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        let se = (0.25 / trials as f64).sqrt();
        assert!(
            (freq - 0.5).abs() <= 3.0 * se,
            "tie frequency {freq} deviates from 1/2 (se {se})"
        );
    }

    #[test]
    fn knn_uniform_when_k_equals_n() {
        let source = locs(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]);
        let target = locs(&[[0.7, 0.3], [2.2, -0.1]]);
        let psi = knn_weights(&Metric::Euclidean, &source, &target, 4, 0).unwrap();
        for m in 0..2 {
            let row = psi.row(m);
            assert_eq!(row.len(), 4);
            for &(_, w) in row {
                assert_relative_eq!(w, 0.25, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn knn_k1_matches_one_nn_under_same_seed() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let source_coords = Array2::from_shape_fn((20, 2), |_| rng.gen_range(-1.0..1.0));
        let target_coords = Array2::from_shape_fn((7, 2), |_| rng.gen_range(-1.0..1.0));
        let source = LocationSet::euclidean(source_coords).unwrap();
        let target = LocationSet::euclidean(target_coords).unwrap();
        for seed in [0, 1, 99] {
            let a = one_nn_weights(&Metric::Euclidean, &source, &target, seed).unwrap();
            let b = knn_weights(&Metric::Euclidean, &source, &target, 1, seed).unwrap();
            for m in 0..7 {
                assert_eq!(a.row(m), b.row(m));
            }
        }
    }

    #[test]
    fn knn_two_nearest_of_four() {
        let source = locs(&[[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]]);
        let target = locs(&[[0.0, 0.0]]);
        let psi = knn_weights(&Metric::Euclidean, &source, &target, 2, 0).unwrap();
        assert_eq!(psi.row(0), &[(0, 0.5), (1, 0.5)]);
    }

    #[test]
    fn knn_rejects_out_of_range_k() {
        let source = locs(&[[0.0, 0.0]]);
        let target = locs(&[[1.0, 0.0]]);
        assert!(knn_weights(&Metric::Euclidean, &source, &target, 2, 0).is_err());
        assert!(knn_weights(&Metric::Euclidean, &source, &target, 0, 0).is_err());
    }

    #[test]
    fn one_nn_permutation_equivariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let coords = Array2::from_shape_fn((12, 2), |_| rng.gen_range(-1.0..1.0));
        let source = LocationSet::euclidean(coords.clone()).unwrap();
        let target_coords = Array2::from_shape_fn((5, 2), |_| rng.gen_range(-1.0..1.0));
        let target = LocationSet::euclidean(target_coords).unwrap();
        let perm: Vec<usize> = {
            let mut p: Vec<usize> = (0..12).collect();
            p.reverse();
            p
        };
        let permuted = source.select(&perm);
        let a = one_nn_weights(&Metric::Euclidean, &source, &target, 0).unwrap();
        let b = one_nn_weights(&Metric::Euclidean, &permuted, &target, 0).unwrap();
        for m in 0..5 {
            let (ja, _) = a.row(m)[0];
            let (jb, _) = b.row(m)[0];
            assert_eq!(perm[jb], ja);
        }
    }

    #[test]
    fn contrast_vectors_scalar_inverse() {
        // M=1, P=1, X* = [[c]] -> w = (1/c)
        let x = array![[4.0]];
        let psi = WeightMatrix::identity(1);
        let c = contrast_vectors(&x.view(), &psi, 0).unwrap();
        assert_relative_eq!(c.w[0], 0.25, epsilon = 1e-14);
        assert_relative_eq!(c.v[0], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn contrast_vectors_identity_psi_copies_w() {
        let x = array![[1.0, 0.5], [1.0, -0.5], [1.0, 2.0]];
        let psi = WeightMatrix::identity(3);
        let c = contrast_vectors(&x.view(), &psi, 1).unwrap();
        for i in 0..3 {
            assert_relative_eq!(c.v[i], c.w[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn contrast_vectors_match_independent_normal_equations() {
        // independent oracle: Gaussian elimination with partial pivoting
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let x = Array2::from_shape_fn((6, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let psi = WeightMatrix::identity(6);
        let c = contrast_vectors(&x.view(), &psi, 1).unwrap();

        let gram = x.t().dot(&x);
        let mut a = [[gram[[0, 0]], gram[[0, 1]], 0.0], [gram[[1, 0]], gram[[1, 1]], 1.0]];
        if a[0][0].abs() < a[1][0].abs() {
            a.swap(0, 1);
        }
        let f = a[1][0] / a[0][0];
        for t in 0..3 {
            a[1][t] -= f * a[0][t];
        }
        let u1 = a[1][2] / a[1][1];
        let u0 = (a[0][2] - a[0][1] * u1) / a[0][0];
        for m in 0..6 {
            let expect = x[[m, 0]] * u0 + x[[m, 1]] * u1;
            assert_relative_eq!(c.w[m], expect, epsilon = 1e-10);
        }
    }

    #[test]
    fn mass_balance_holds_for_random_psi() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let source_coords = Array2::from_shape_fn((30, 2), |_| rng.gen_range(-1.0..1.0));
        let target_coords = Array2::from_shape_fn((9, 2), |_| rng.gen_range(-1.0..1.0));
        let source = LocationSet::euclidean(source_coords).unwrap();
        let target = LocationSet::euclidean(target_coords).unwrap();
        let x = Array2::from_shape_fn((9, 3), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        for k in [1, 3, 30] {
            let psi = knn_weights(&Metric::Euclidean, &source, &target, k, 1).unwrap();
            for p in 0..3 {
                let c = contrast_vectors(&x.view(), &psi, p).unwrap();
                assert!(c.mass_imbalance() <= 1e-9, "imbalance {}", c.mass_imbalance());
            }
        }
    }

    #[test]
    fn knn_rows_are_probability_vectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let source_coords = Array2::from_shape_fn((15, 2), |_| rng.gen_range(-1.0..1.0));
        let target_coords = Array2::from_shape_fn((6, 2), |_| rng.gen_range(-1.0..1.0));
        let source = LocationSet::euclidean(source_coords).unwrap();
        let target = LocationSet::euclidean(target_coords).unwrap();
        for k in 1..=15 {
            let psi = knn_weights(&Metric::Euclidean, &source, &target, k, 2).unwrap();
            for m in 0..6 {
                let sum: f64 = psi.row(m).iter().map(|&(_, w)| w).sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert!(psi.row(m).iter().all(|&(_, w)| w >= 0.0));
            }
        }
    }
}
