//! Chebyshev–Gauss–Lobatto collocation on the vertical interval `[-1, 0]`.
//!
//! Node `0` is the surface `z = 0`, node `nz - 1` the bottom `z = -1`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

/// Nodes `z_j = (cos(πj/(nz-1)) - 1)/2`.
pub fn nodes(nz: usize) -> Vec<f64> {
    let m = (nz - 1) as f64;
    (0..nz)
        .map(|j| ((PI * j as f64 / m).cos() - 1.0) / 2.0)
        .collect()
}

fn reference_nodes(nz: usize) -> Vec<f64> {
    let m = (nz - 1) as f64;
    (0..nz).map(|j| (PI * j as f64 / m).cos()).collect()
}

/// First-derivative matrix with respect to `z`.
pub fn diff_matrix(nz: usize) -> DMatrix<f64> {
    let t = reference_nodes(nz);
    let n = nz - 1;
    let c = |j: usize| {
        let s = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            2.0 * s
        } else {
            s
        }
    };
    let mut d = DMatrix::zeros(nz, nz);
    for i in 0..nz {
        let mut row_sum = 0.0;
        for j in 0..nz {
            if i != j {
                let v = c(i) / c(j) / (t[i] - t[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    // dt/dz = 2 for the map z = (t - 1)/2.
    d * 2.0
}

/// Clenshaw–Curtis weights for `∫_{-1}^{0} f dz`.
pub fn clenshaw_curtis(nz: usize) -> Vec<f64> {
    let n = nz - 1;
    let nf = n as f64;
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / nf).collect();
    let mut w = vec![0.0; nz];
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for (i, vi) in v.iter_mut().enumerate() {
            *vi -= (nf * theta[i + 1]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for (i, vi) in v.iter_mut().enumerate() {
                *vi -= 2.0 * (2.0 * kf * theta[i + 1]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for (i, vi) in v.iter().enumerate() {
        w[i + 1] = 2.0 * vi / nf;
    }
    w.iter().map(|x| x / 2.0).collect()
}

/// Evaluates the interpolant through `(nodes(values.len()), values)` at `z`.
pub fn interpolate(values: &[f64], z: f64) -> f64 {
    let nz = values.len();
    let zs = nodes(nz);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..nz {
        let diff = z - zs[j];
        if diff == 0.0 {
            return values[j];
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == nz - 1 {
            w *= 0.5;
        }
        let q = w / diff;
        num += q * values[j];
        den += q;
    }
    num / den
}
