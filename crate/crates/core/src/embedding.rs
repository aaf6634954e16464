//! Truncated SVD embedding of the utterance feature matrices.
//!
//! The training matrices are fat (`N << D`), so the thin SVD is computed from
//! the eigendecomposition of the `N x N` Gram matrix `X X^T`: eigenvalues
//! give the squared singular values and the right singular vectors are
//! recovered as `V = X^T U S^-1` without ever materialising a `D x D`
//! product. "Energy" is the cumulative fraction of squared singular values;
//! the retained rank `L` is the smallest prefix reaching the requested
//! fraction. Directions below `1e-12` of the leading singular value are
//! treated as numerical rank deficiency and excluded.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// Relative cutoff below which singular values count as zero. Gram-matrix
/// eigenvalues carry noise of order machine epsilon times the leading
/// eigenvalue, which is ~1e-8 of the leading singular value after the square
/// root, so the floor sits above that.
const RANK_EPS: f64 = 1e-7;

/// A fitted projection: retained singular values and right singular vectors.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    /// Retained singular values, descending (`L` of them).
    pub singular_values: Array1<f64>,
    /// `D x L` right singular vectors.
    pub basis: Array2<f64>,
    /// Full positive spectrum (all `R` singular values), for energy curves.
    pub spectrum: Array1<f64>,
    /// Energy fraction used to pick the rank.
    pub energy_fraction: f64,
    /// Ambient dimension `D`.
    pub ambient_dim: usize,
}

impl EmbeddingSpace {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Cumulative energy curve over the full spectrum.
    pub fn energy_curve(&self) -> Vec<(usize, f64)> {
        energy_curve(self.spectrum.as_slice().unwrap())
    }
}

/// Projected coordinates with class labels.
#[derive(Debug, Clone)]
pub struct EmbeddedMatrix {
    pub rows: Array2<f64>,
    pub labels: Vec<String>,
}

/// Fit the embedding on training rows and project them.
///
/// Returns the space (retained singular values and basis) together with the
/// training embedding `X V_L S_L^-1`, which equals the first `L` left
/// singular vectors.
pub fn fit(x: &Array2<f64>, labels: &[String], tau: f64) -> Result<(EmbeddingSpace, EmbeddedMatrix)> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::InvalidConfig {
            detail: format!("need at least two rows to embed, got {n}"),
        });
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidConfig {
            detail: format!("energy fraction must be in (0, 1], got {tau}"),
        });
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "embedding input matrix".into(),
        });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }

    // Eigendecomposition of the smaller Gram matrix.
    let (spectrum, u_cols, v_from_gram) = if d >= n {
        let gram = x.dot(&x.t());
        let (vals, vecs) = symmetric_eig_desc(&gram);
        (vals, vecs, false)
    } else {
        let gram = x.t().dot(x);
        let (vals, vecs) = symmetric_eig_desc(&gram);
        (vals, vecs, true)
    };

    let mut s: Vec<f64> = spectrum.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let s1 = s[0];
    if s1 <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let r = s.iter().take_while(|&&v| v > RANK_EPS * s1).count();
    s.truncate(r);

    let total_energy: f64 = s.iter().map(|v| v * v).sum();
    let mut cumulative = 0.0;
    let mut rank = r;
    for (i, &v) in s.iter().enumerate() {
        cumulative += v * v;
        if cumulative / total_energy >= tau {
            rank = i + 1;
            break;
        }
    }

    // Recover U_L and V_L from whichever side the eigenvectors live on.
    let (mut u_l, mut v_l) = if v_from_gram {
        // vecs are eigenvectors of X^T X, i.e. right singular vectors.
        let v_l = u_cols.slice(ndarray::s![.., ..rank]).to_owned();
        let mut u_l = x.dot(&v_l);
        scale_columns(&mut u_l, &s[..rank]);
        (u_l, v_l)
    } else {
        let u_l = u_cols.slice(ndarray::s![.., ..rank]).to_owned();
        let mut v_l = x.t().dot(&u_l);
        scale_columns(&mut v_l, &s[..rank]);
        (u_l, v_l)
    };

    // Sign convention: largest-magnitude entry of each U column non-negative.
    for c in 0..rank {
        let col = u_l.column(c);
        let mut best = 0usize;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            u_l.column_mut(c).mapv_inplace(|v| -v);
            v_l.column_mut(c).mapv_inplace(|v| -v);
        }
    }

    let singular_values = Array1::from_vec(s[..rank].to_vec());
    let space = EmbeddingSpace {
        singular_values,
        basis: v_l,
        spectrum: Array1::from_vec(s),
        energy_fraction: tau,
        ambient_dim: d,
    };

    // Training embedding via the projection definition.
    let mut rows = x.dot(&space.basis);
    scale_columns(&mut rows, space.singular_values.as_slice().unwrap());
    let embedded = EmbeddedMatrix {
        rows,
        labels: labels.to_vec(),
    };
    Ok((space, embedded))
}

/// Project one `D`-vector into the embedding: `x^T V_L S_L^-1`.
pub fn project(space: &EmbeddingSpace, x: ArrayView1<f64>) -> Result<Array1<f64>> {
    if x.len() != space.ambient_dim {
        return Err(Error::LengthMismatch {
            expected: space.ambient_dim,
            actual: x.len(),
        });
    }
    let mut out = space.basis.t().dot(&x);
    for (v, s) in out.iter_mut().zip(space.singular_values.iter()) {
        *v /= s;
    }
    Ok(out)
}

/// Cumulative squared-singular-value energy, 1-based index, ending at 1.0.
pub fn energy_curve(spectrum: &[f64]) -> Vec<(usize, f64)> {
    let total: f64 = spectrum.iter().map(|v| v * v).sum();
    let mut cumulative = 0.0;
    spectrum
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            cumulative += v * v;
            (i + 1, cumulative / total)
        })
        .collect()
}

fn scale_columns(m: &mut Array2<f64>, s: &[f64]) {
    for (c, &sv) in s.iter().enumerate() {
        m.column_mut(c).mapv_inplace(|v| v / sv);
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
fn symmetric_eig_desc(g: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = g.nrows();
    let dm = nalgebra::DMatrix::from_row_iterator(n, n, g.iter().cloned());
    let eig = nalgebra::linalg::SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs[[r, c]] = eig.eigenvectors[(r, i)];
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("l{i}")).collect()
    }

    fn random_fat(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn diagonal_spectrum_and_truncation() {
        // X = diag(3, 2, 1) padded to a fat 3 x 5 shape.
        let mut x = Array2::zeros((3, 5));
        x[[0, 0]] = 3.0;
        x[[1, 1]] = 2.0;
        x[[2, 2]] = 1.0;
        let (space, _) = fit(&x, &labels(3), 0.60).unwrap();
        assert_eq!(space.spectrum.len(), 3);
        assert_abs_diff_eq!(space.spectrum[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(space.spectrum[1], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(space.spectrum[2], 1.0, epsilon = 1e-10);
        // Cumulative energies: 9/14 = 0.643 >= 0.60 already at the first value.
        assert_eq!(space.rank(), 1);
    }

    #[test]
    fn energy_curve_hand_computed() {
        let curve = energy_curve(&[3.0, 2.0, 1.0]);
        assert_eq!(curve.len(), 3);
        assert_eq!(curve[0].0, 1);
        assert_abs_diff_eq!(curve[0].1, 9.0 / 14.0, epsilon = 1e-3);
        assert_abs_diff_eq!(curve[1].1, 13.0 / 14.0, epsilon = 1e-3);
        assert_abs_diff_eq!(curve[2].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_curve_trivial_cases() {
        assert_eq!(energy_curve(&[1.0]), vec![(1, 1.0)]);
        let flat = energy_curve(&[2.0; 8]);
        for (k, frac) in flat {
            assert_abs_diff_eq!(frac, k as f64 / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn training_projection_equals_left_singular_vectors() {
        let x = random_fat(20, 50, 1);
        let (space, embedded) = fit(&x, &labels(20), 0.95).unwrap();
        let l = space.rank();

        // Independent oracle: nalgebra's bidiagonalisation SVD.
        let dm = nalgebra::DMatrix::from_row_iterator(20, 50, x.iter().cloned());
        let svd = nalgebra::linalg::SVD::new(dm, true, false);
        let u = svd.u.as_ref().unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
        });
        for (c, &oc) in order.iter().take(l).enumerate() {
            assert_abs_diff_eq!(space.singular_values[c], svd.singular_values[oc], epsilon = 1e-8);
            // Left singular vectors match up to sign.
            let dot: f64 = (0..20).map(|r| embedded.rows[[r, c]] * u[(r, oc)]).sum();
            let norm: f64 = (0..20).map(|r| embedded.rows[[r, c]].powi(2)).sum();
            assert_abs_diff_eq!(norm.sqrt(), 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(dot.abs(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn basis_columns_are_orthonormal() {
        let x = random_fat(15, 40, 2);
        let (space, _) = fit(&x, &labels(15), 0.9).unwrap();
        let gram = space.basis.t().dot(&space.basis);
        for i in 0..space.rank() {
            for j in 0..space.rank() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[[i, j]], expect, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn reconstruction_error_complements_retained_energy() {
        let x = random_fat(12, 30, 3);
        for tau in [0.55, 0.60, 0.65, 0.9] {
            let (space, embedded) = fit(&x, &labels(12), tau).unwrap();
            // X_hat = U_L S_L V_L^T where U_L is the training embedding.
            let mut scaled = embedded.rows.clone();
            for (c, &s) in space.singular_values.iter().enumerate() {
                scaled.column_mut(c).mapv_inplace(|v| v * s);
            }
            let x_hat = scaled.dot(&space.basis.t());
            let err: f64 = (&x - &x_hat).iter().map(|v| v * v).sum();
            let total: f64 = x.iter().map(|v| v * v).sum();
            let retained: f64 = space.singular_values.iter().map(|s| s * s).sum::<f64>()
                / space.spectrum.iter().map(|s| s * s).sum::<f64>();
            assert_abs_diff_eq!(err / total, 1.0 - retained, epsilon = 1e-6);
        }
    }

    #[test]
    fn rank_is_minimal() {
        let x = random_fat(10, 25, 4);
        for tau in [0.55, 0.60, 0.65] {
            let (space, _) = fit(&x, &labels(10), tau).unwrap();
            let curve = space.energy_curve();
            let l = space.rank();
            assert!(curve[l - 1].1 >= tau);
            if l > 1 {
                assert!(curve[l - 2].1 < tau);
            }
        }
    }

    #[test]
    fn projection_is_linear_and_consistent_with_fit() {
        let x = random_fat(10, 30, 5);
        let (space, embedded) = fit(&x, &labels(10), 0.8).unwrap();

        // Training row projects onto its own embedding row.
        for u in 0..10 {
            let p = project(&space, x.row(u)).unwrap();
            for c in 0..space.rank() {
                assert_abs_diff_eq!(p[c], embedded.rows[[u, c]], epsilon = 1e-8);
            }
        }

        // Zero maps to zero.
        let zero = Array1::zeros(30);
        assert!(project(&space, zero.view()).unwrap().iter().all(|&v| v == 0.0));

        // Linearity.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = Array1::from_shape_fn(30, |_| rng.random_range(-1.0..1.0));
        let b = Array1::from_shape_fn(30, |_| rng.random_range(-1.0..1.0));
        let combo = &a * 2.5 + &b * (-0.75);
        let pa = project(&space, a.view()).unwrap();
        let pb = project(&space, b.view()).unwrap();
        let pc = project(&space, combo.view()).unwrap();
        for c in 0..space.rank() {
            assert_abs_diff_eq!(pc[c], 2.5 * pa[c] - 0.75 * pb[c], epsilon = 1e-9);
        }
    }

    #[test]
    fn projection_matches_dense_multiply_oracle() {
        let x = random_fat(8, 20, 7);
        let (space, _) = fit(&x, &labels(8), 0.99).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = Array1::from_shape_fn(20, |_| rng.random_range(-2.0..2.0));
        let p = project(&space, v.view()).unwrap();
        for c in 0..space.rank() {
            let mut dot = 0.0;
            for i in 0..20 {
                dot += v[i] * space.basis[[i, c]];
            }
            let expect = dot / space.singular_values[c];
            assert!((p[c] - expect).abs() <= 1e-10);
        }
    }

    #[test]
    fn rank_deficient_directions_are_excluded() {
        // Duplicate rows: true rank 2 out of 4 rows.
        let mut x = Array2::zeros((4, 10));
        for j in 0..10 {
            x[[0, j]] = (j as f64).sin();
            x[[1, j]] = (j as f64).cos();
        }
        let row0 = x.row(0).to_owned();
        let row1 = x.row(1).to_owned();
        x.row_mut(2).assign(&row0);
        x.row_mut(3).assign(&row1);
        let (space, _) = fit(&x, &labels(4), 1.0).unwrap();
        assert_eq!(space.spectrum.len(), 2);
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let x = Array2::zeros((3, 6));
        assert!(matches!(fit(&x, &labels(3), 0.6), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn projection_length_mismatch() {
        let x = random_fat(5, 12, 9);
        let (space, _) = fit(&x, &labels(5), 0.7).unwrap();
        let bad = Array1::zeros(11);
        assert!(matches!(
            project(&space, bad.view()),
            Err(Error::LengthMismatch { expected: 12, actual: 11 })
        ));
    }

    #[test]
    fn tall_matrix_branch_agrees_with_oracle() {
        // More rows than columns exercises the X^T X branch.
        let x = random_fat(30, 6, 10);
        let (space, embedded) = fit(&x, &labels(30), 1.0).unwrap();
        let dm = nalgebra::DMatrix::from_row_iterator(30, 6, x.iter().cloned());
        let svd = nalgebra::linalg::SVD::new(dm, false, false);
        let mut oracle: Vec<f64> = svd.singular_values.iter().cloned().collect();
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in space.spectrum.iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
        // Embedding columns still orthonormal.
        let gram = embedded.rows.t().dot(&embedded.rows);
        for i in 0..space.rank() {
            assert_abs_diff_eq!(gram[[i, i]], 1.0, epsilon = 1e-8);
        }
    }
}
