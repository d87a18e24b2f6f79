//! Dense least squares by Householder QR with column pivoting.

/// Column-major `rows x cols` matrix.
#[derive(Debug, Clone)]
pub(crate) struct ColMajor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl ColMajor {
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Self {
        let m = rows.len();
        let mut data = vec![0.0; m * cols];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                data[j * m + i] = *v;
            }
        }
        Self {
            rows: m,
            cols,
            data,
        }
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }
}

/// Least-squares failure: the design has numerical rank below its width.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RankDeficient {
    pub rank: usize,
    /// Original column indices pivoted past the numerical rank.
    pub dependent: Vec<usize>,
}

/// Solves `min ||y - A b||` for full-column-rank `A`.
///
/// Columns are pivoted by largest remaining norm, so the diagonal of `R` is
/// non-increasing in magnitude and a column whose remaining norm falls below
/// `max(m, p) * eps * |R_00|` is declared dependent.
pub(crate) fn least_squares(a: &ColMajor, y: &[f64]) -> Result<Vec<f64>, RankDeficient> {
    let (m, p) = (a.rows, a.cols);
    assert_eq!(y.len(), m, "response length must match design rows");
    if m < p {
        return Err(RankDeficient {
            rank: m,
            dependent: (m..p).collect(),
        });
    }
    let mut r = a.data.clone();
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let mut diag = vec![0.0; p];
    let col_norm = |r: &[f64], j: usize, k: usize| -> f64 {
        r[j * m + k..(j + 1) * m].iter().map(|v| v * v).sum::<f64>()
    };
    let scale = (0..p)
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let tol = (m.max(p) as f64) * f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for k in 0..p {
        let (best, best_norm) = (k..p)
            .map(|j| (j, col_norm(&r, j, k)))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best != k {
            for i in 0..m {
                r.swap(k * m + i, best * m + i);
            }
            perm.swap(k, best);
        }
        let norm = best_norm.sqrt();
        if norm <= tol {
            return Err(RankDeficient {
                rank: k,
                dependent: perm[k..].to_vec(),
            });
        }
        let x0 = r[k * m + k];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        // Householder vector v = x - alpha e1, stored in place of column k.
        r[k * m + k] -= alpha;
        let vtv: f64 = r[k * m + k..(k + 1) * m].iter().map(|v| v * v).sum();
        for j in k + 1..p {
            let dot: f64 = (k..m).map(|i| r[k * m + i] * r[j * m + i]).sum();
            let f = 2.0 * dot / vtv;
            for i in k..m {
                r[j * m + i] -= f * r[k * m + i];
            }
        }
        let dot: f64 = (k..m).map(|i| r[k * m + i] * qty[i]).sum();
        let f = 2.0 * dot / vtv;
        for i in k..m {
            qty[i] -= f * r[k * m + i];
        }
        diag[k] = alpha;
    }

    let mut z = vec![0.0; p];
    for k in (0..p).rev() {
        let mut s = qty[k];
        for j in k + 1..p {
            s -= r[j * m + k] * z[j];
        }
        z[k] = s / diag[k];
    }
    let mut beta = vec![0.0; p];
    for (k, &orig) in perm.iter().enumerate() {
        beta[orig] = z[k];
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_fit_with_pivoting() {
        // Second column dominates so the pivot order differs from input order.
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let x = i as f64;
                vec![1.0, 100.0 * x, x * x]
            })
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 2.0 + 0.03 * r[1] - 0.5 * r[2])
            .collect();
        let beta = least_squares(&ColMajor::from_rows(&rows, 3), &y).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-10);
        assert!((beta[1] - 0.03).abs() < 1e-12);
        assert!((beta[2] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn detects_collinear_columns() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![1.0, i as f64, 2.0 * i as f64 + 1.0])
            .collect();
        let err = least_squares(&ColMajor::from_rows(&rows, 3), &[0.0; 5]).unwrap_err();
        assert_eq!(err.rank, 2);
        assert_eq!(err.dependent.len(), 1);
    }

    #[test]
    fn fewer_rows_than_columns() {
        let rows = vec![vec![1.0, 2.0]];
        assert!(least_squares(&ColMajor::from_rows(&rows, 2), &[1.0]).is_err());
    }
}
