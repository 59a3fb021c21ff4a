use nalgebra::{DMatrix, SymmetricEigen};

use super::DistanceMatrix;

/// Classical (Torgerson) multidimensional scaling into `k` dimensions.
///
/// The squared distances are double-centered, `B = -J D² J / 2`, and the
/// top `k` eigenpairs of `B` give coordinates `v √λ` (zero for negative
/// eigenvalues). Each axis is oriented so that its first non-negligible
/// coordinate is positive. Returns one row of `k` coordinates per point.
pub fn classical_mds(d: &DistanceMatrix, k: usize) -> Vec<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Vec::new();
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));

    let mut coords = vec![vec![0.0; k]; n];
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for (axis, &e) in order.iter().take(k).enumerate() {
        let lambda = eig.eigenvalues[e];
        if lambda <= 1e-12 * scale {
            continue;
        }
        let col = eig.eigenvectors.column(e);
        let sign = col.iter().find(|x| x.abs() > 1e-9).map_or(1.0, |x| x.signum());
        for i in 0..n {
            coords[i][axis] = sign * col[i] * lambda.sqrt();
        }
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    fn check_reproduces(d: &DistanceMatrix, k: usize) {
        let x = classical_mds(d, k);
        for i in 0..d.len() {
            for j in 0..d.len() {
                assert!((dist(&x[i], &x[j]) - d.get(i, j)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn collinear_points() {
        let d = DistanceMatrix::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0],
        )
        .unwrap();
        let x = classical_mds(&d, 2);
        // centered on b; the second axis is degenerate
        assert!((x[0][0] - 1.0).abs() < 1e-9 && x[1][0].abs() < 1e-9 && (x[2][0] + 1.0).abs() < 1e-9);
        assert!(x.iter().all(|p| p[1].abs() < 1e-7));
        check_reproduces(&d, 2);
    }

    #[test]
    fn zero_matrix() {
        let d = DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0; 4]).unwrap();
        assert_eq!(classical_mds(&d, 2), vec![vec![0.0, 0.0]; 2]);
    }

    #[test]
    fn square_corners() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let d = DistanceMatrix::from_fn((0..4).map(|i| i.to_string()).collect(), |i, j| dist(&pts[i], &pts[j])).unwrap();
        check_reproduces(&d, 2);
    }
}
