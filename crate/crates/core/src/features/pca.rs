//! Column standardization and principal component analysis.
//!
//! PCA is computed from the population covariance of mean-centered rows
//! via a cyclic Jacobi eigendecomposition. When there are fewer rows than
//! columns the Gram-matrix dual form is used, which keeps the
//! decomposition cheap for wide embedding matrices. Eigenvector signs are
//! fixed so the coordinate of largest magnitude in each component is
//! positive, which makes results reproducible.

use super::FeatureError;

/// Z-score every column (mean 0, population standard deviation 1).
/// Zero-variance columns become all-zero rather than NaN.
pub fn zscore_columns(matrix: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, FeatureError> {
    if matrix.len() < 2 {
        return Err(FeatureError::InsufficientRows {
            got: matrix.len(),
            needed: 2,
        });
    }
    let n = matrix.len();
    let d = matrix[0].len();
    let mut out = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mean = matrix.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = matrix
            .iter()
            .map(|r| {
                let c = r[j] - mean;
                c * c
            })
            .sum::<f64>()
            / n as f64;
        let std = var.sqrt();
        if std > 0.0 {
            for (i, row) in matrix.iter().enumerate() {
                out[i][j] = (row[j] - mean) / std;
            }
        }
    }
    Ok(out)
}

/// How many components `pca_fit` should retain.
#[derive(Debug, Clone, Copy)]
pub enum PcaTarget {
    /// Exactly this many components.
    Components(usize),
    /// The smallest count whose cumulative explained variance reaches
    /// this fraction.
    VarianceFraction(f64),
}

/// A fitted PCA basis: the data mean, orthonormal component rows
/// (k x input_dim), and the variance fraction each component explains.
#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvectors-as-rows), unsorted.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    // v[c] accumulates the c-th eigenvector.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    let scale: f64 = (0..n).map(|i| m[i][i].abs()).fold(1e-300, f64::max);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .map(|p| ((p + 1)..n).map(|q| m[p][q] * m[p][q]).sum::<f64>())
            .sum();
        if off.sqrt() < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vpk = v[p][k];
                    let vqk = v[q][k];
                    v[p][k] = c * vpk - s * vqk;
                    v[q][k] = s * vpk + c * vqk;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    (eigenvalues, v)
}

// Exposed for test oracles elsewhere in the crate; Jacobi is independent
// of the power-iteration paths it is used to cross-check.
#[cfg(test)]
pub(crate) fn jacobi_eigen_for_tests(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    jacobi_eigen(a)
}

fn center(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let d = matrix[0].len();
    let mut mean = vec![0.0; d];
    for row in matrix {
        for (j, x) in row.iter().enumerate() {
            mean[j] += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered = matrix
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();
    (mean, centered)
}

/// Force the coordinate of largest magnitude in each component positive.
fn fix_signs(components: &mut [Vec<f64>]) {
    for comp in components.iter_mut() {
        let mut best = 0usize;
        for (i, x) in comp.iter().enumerate() {
            if x.abs() > comp[best].abs() {
                best = i;
            }
        }
        if comp[best] < 0.0 {
            for x in comp.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Fit a PCA model. Components are covariance eigenvectors sorted by
/// descending eigenvalue; at most `min(rows - 1, cols)` may be requested.
#[allow(clippy::needless_range_loop)]
pub fn pca_fit(matrix: &[Vec<f64>], target: PcaTarget) -> Result<PcaModel, FeatureError> {
    let n = matrix.len();
    if n < 2 {
        return Err(FeatureError::InsufficientRows { got: n, needed: 2 });
    }
    let d = matrix[0].len();
    let max_k = (n - 1).min(d);
    let (mean, centered) = center(matrix);

    // Eigenpairs of the population covariance, sorted by descending
    // eigenvalue (ties by original index).
    let pairs: Vec<(f64, Vec<f64>)> = if d <= n {
        let mut cov = vec![vec![0.0; d]; d];
        for row in &centered {
            for i in 0..d {
                for j in i..d {
                    cov[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..d {
            for j in i..d {
                cov[i][j] /= n as f64;
                cov[j][i] = cov[i][j];
            }
        }
        let (vals, vecs) = jacobi_eigen(&cov);
        vals.into_iter().zip(vecs).collect()
    } else {
        // Dual route: eigenvectors of the n x n Gram matrix map to
        // covariance eigenvectors via w = X^T u / sqrt(n * lambda).
        let mut gram = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = centered[i]
                    .iter()
                    .zip(&centered[j])
                    .map(|(a, b)| a * b)
                    .sum();
                gram[i][j] = dot / n as f64;
                gram[j][i] = gram[i][j];
            }
        }
        let (vals, vecs) = jacobi_eigen(&gram);
        let mut mapped: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
        for (lambda, u) in vals.into_iter().zip(vecs) {
            if lambda <= 1e-12 {
                continue;
            }
            let norm = (n as f64 * lambda).sqrt();
            let mut w = vec![0.0; d];
            for (row, ui) in centered.iter().zip(&u) {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += ui * xj;
                }
            }
            for wj in &mut w {
                *wj /= norm;
            }
            mapped.push((lambda, w));
        }
        mapped
    };
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        pairs[b].0
            .partial_cmp(&pairs[a].0)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| pairs[i].0.max(0.0)).collect();
    let mut components: Vec<Vec<f64>> = order.iter().map(|&i| pairs[i].1.clone()).collect();

    // The dual route only produces positive-eigenvalue directions; pad
    // with an orthonormal completion if more components are required.
    while components.len() < max_k {
        let mut added = false;
        for j in 0..d {
            let mut cand = vec![0.0; d];
            cand[j] = 1.0;
            for comp in &components {
                let dot: f64 = cand.iter().zip(comp).map(|(a, b)| a * b).sum();
                for (c, w) in cand.iter_mut().zip(comp) {
                    *c -= dot * w;
                }
            }
            let norm: f64 = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for c in &mut cand {
                    *c /= norm;
                }
                components.push(cand);
                eigenvalues.push(0.0);
                added = true;
                break;
            }
        }
        if !added {
            break;
        }
    }

    let total_var: f64 = centered
        .iter()
        .map(|row| row.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    let ratios: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| if total_var > 0.0 { l / total_var } else { 0.0 })
        .collect();

    let k = match target {
        PcaTarget::Components(k) => {
            if k == 0 || k > max_k {
                return Err(FeatureError::ComponentsTooLarge { k, max: max_k });
            }
            k
        }
        PcaTarget::VarianceFraction(v) => {
            let mut cum = 0.0;
            let mut k = max_k.min(components.len()).max(1);
            for (i, r) in ratios.iter().enumerate().take(max_k) {
                cum += r;
                if cum >= v - 1e-12 {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };

    components.truncate(k);
    let ratios = ratios.into_iter().take(k).collect();
    fix_signs(&mut components);
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio: ratios,
    })
}

/// Project rows onto the fitted basis: subtract the mean, then take dot
/// products with each component.
pub fn pca_transform(model: &PcaModel, matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    matrix
        .iter()
        .map(|row| {
            model
                .components
                .iter()
                .map(|comp| {
                    row.iter()
                        .zip(comp.iter().zip(&model.mean))
                        .map(|(x, (c, m))| (x - m) * c)
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Map reduced rows back into the original space.
pub fn pca_inverse_transform(model: &PcaModel, reduced: &[Vec<f64>]) -> Vec<Vec<f64>> {
    reduced
        .iter()
        .map(|row| {
            let mut out = model.mean.clone();
            for (coeff, comp) in row.iter().zip(&model.components) {
                for (o, c) in out.iter_mut().zip(comp) {
                    *o += coeff * c;
                }
            }
            out
        })
        .collect()
}
