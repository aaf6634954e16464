//! Mean supervectors from adapted GMMs and the UBM-centred difference matrix.
//!
//! A supervector concatenates the component means in component-major order:
//! component `i` occupies slots `[i*d, (i+1)*d)`. The difference matrix
//! subtracts the UBM's own supervector from every row; no variance
//! normalisation is applied.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::gmm::DiagGmm;

/// Concatenated component means of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Supervector {
    pub values: Array1<f64>,
}

impl Supervector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Stack the model's means into an `(M * d)`-vector, component-major.
pub fn supervector(model: &DiagGmm) -> Supervector {
    let m = model.num_components();
    let d = model.dim();
    let mut values = Array1::zeros(m * d);
    for c in 0..m {
        for j in 0..d {
            values[c * d + j] = model.means[[c, j]];
        }
    }
    Supervector { values }
}

/// UBM-centred supervector rows with class labels.
#[derive(Debug, Clone)]
pub struct DifferenceMatrix {
    pub rows: Array2<f64>,
    pub labels: Vec<String>,
    /// The exact UBM supervector that was subtracted from every row.
    pub ubm_mean: Array1<f64>,
}

/// Difference between one adapted model's supervector and the UBM's.
pub fn difference_vector(model: &DiagGmm, ubm: &DiagGmm) -> Result<Array1<f64>> {
    if model.num_components() != ubm.num_components() || model.dim() != ubm.dim() {
        return Err(Error::DimensionMismatch {
            expected: ubm.num_components() * ubm.dim(),
            actual: model.num_components() * model.dim(),
        });
    }
    Ok(supervector(model).values - supervector(ubm).values)
}

/// Stack `difference_vector` rows for a list of adapted models, in input order.
pub fn build_difference_matrix(
    models: &[(DiagGmm, String)],
    ubm: &DiagGmm,
) -> Result<DifferenceMatrix> {
    let dim = ubm.num_components() * ubm.dim();
    let ubm_sv = supervector(ubm).values;
    let mut rows = Array2::zeros((models.len(), dim));
    let mut labels = Vec::with_capacity(models.len());
    for (u, (model, label)) in models.iter().enumerate() {
        let delta = difference_vector(model, ubm)?;
        rows.row_mut(u).assign(&delta);
        labels.push(label.clone());
    }
    Ok(DifferenceMatrix {
        rows,
        labels,
        ubm_mean: ubm_sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_model(m: usize, d: usize, seed: u64) -> DiagGmm {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Array1::from_shape_fn(m, |_| rng.random_range(0.1..1.0));
        let sum = weights.sum();
        weights.mapv_inplace(|w| w / sum);
        DiagGmm::new(
            weights,
            Array2::from_shape_fn((m, d), |_| rng.random_range(-5.0..5.0)),
            Array2::from_shape_fn((m, d), |_| rng.random_range(0.5..2.0)),
        )
        .unwrap()
    }

    #[test]
    fn paper_scale_length() {
        let model = random_model(64, 39, 0);
        assert_eq!(supervector(&model).len(), 2496);
    }

    #[test]
    fn single_component_supervector_is_its_mean() {
        let model = DiagGmm::new(array![1.0], array![[1.0, -2.0, 3.0]], array![[1.0, 1.0, 1.0]])
            .unwrap();
        assert_eq!(supervector(&model).values.to_vec(), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn perturbing_one_component_moves_only_its_block() {
        let base = random_model(5, 4, 1);
        let mut perturbed = base.clone();
        perturbed.means[[3, 0]] += 1.5;
        perturbed.means[[3, 2]] -= 0.5;
        let a = supervector(&base).values;
        let b = supervector(&perturbed).values;
        for i in 0..20 {
            if (12..16).contains(&i) {
                continue;
            }
            assert_eq!(a[i], b[i], "slot {i} outside block changed");
        }
        assert_ne!(a[12], b[12]);
        assert_ne!(a[14], b[14]);
    }

    #[test]
    fn ubm_against_itself_is_zero() {
        let ubm = random_model(4, 3, 2);
        let delta = difference_vector(&ubm, &ubm).unwrap();
        assert!(delta.iter().all(|&x| x == 0.0));
        let dm = build_difference_matrix(&[(ubm.clone(), "u".into())], &ubm).unwrap();
        assert!(dm.rows.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rows_match_elementwise_subtraction_oracle() {
        let ubm = random_model(6, 5, 3);
        let models: Vec<(DiagGmm, String)> = (0..4)
            .map(|u| (random_model(6, 5, 10 + u as u64), format!("c{u}")))
            .collect();
        let dm = build_difference_matrix(&models, &ubm).unwrap();
        assert_eq!(dm.rows.dim(), (4, 30));
        for (u, (model, _)) in models.iter().enumerate() {
            // Naive oracle: subtract each mean coordinate directly.
            for c in 0..6 {
                for j in 0..5 {
                    let expect = model.means[[c, j]] - ubm.means[[c, j]];
                    assert_eq!(dm.rows[[u, c * 5 + j]], expect);
                }
            }
            // Row equals the single-vector operation exactly.
            let single = difference_vector(model, &ubm).unwrap();
            assert_eq!(dm.rows.row(u).to_vec(), single.to_vec());
        }
        assert_eq!(dm.ubm_mean, supervector(&ubm).values);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let ubm = random_model(4, 3, 4);
        let other = random_model(5, 3, 5);
        assert!(difference_vector(&other, &ubm).is_err());
    }
}
