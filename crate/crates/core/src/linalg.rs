//! Dense 4×4 LU with partial pivoting, enough for the Gaussian QFI system.

pub type Mat4 = [[f64; 4]; 4];

#[derive(Debug, Clone)]
pub struct Lu4 {
    lu: Mat4,
    perm: [usize; 4],
}

impl Lu4 {
    /// Returns `None` when a pivot is exactly zero or non-finite.
    pub fn factor(a: &Mat4) -> Option<Self> {
        let mut lu = *a;
        let mut perm = [0, 1, 2, 3];
        for k in 0..4 {
            let (p, pivot) =
                (k..4)
                    .map(|i| (i, lu[i][k].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot > 0.0) || !pivot.is_finite() {
                return None;
            }
            lu.swap(k, p);
            perm.swap(k, p);
            let pivot_row = lu[k];
            for row in lu.iter_mut().skip(k + 1) {
                let f = row[k] / pivot_row[k];
                row[k] = f;
                for (x, p) in row.iter_mut().zip(&pivot_row).skip(k + 1) {
                    *x -= f * p;
                }
            }
        }
        Some(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64; 4]) -> [f64; 4] {
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = b[self.perm[i]] - (0..i).map(|j| self.lu[i][j] * y[j]).sum::<f64>();
        }
        let mut x = [0.0; 4];
        for i in (0..4).rev() {
            let s: f64 = (i + 1..4).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] = (y[i] - s) / self.lu[i][i];
        }
        x
    }

    pub fn inverse(&self) -> Mat4 {
        let mut inv = [[0.0; 4]; 4];
        for c in 0..4 {
            let mut e = [0.0; 4];
            e[c] = 1.0;
            let col = self.solve(&e);
            for r in 0..4 {
                inv[r][c] = col[r];
            }
        }
        inv
    }
}

pub fn norm_1(a: &Mat4) -> f64 {
    (0..4)
        .map(|j| (0..4).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 1-norm condition number, computed from the explicit inverse.
pub fn condition_1(a: &Mat4, lu: &Lu4) -> f64 {
    norm_1(a) * norm_1(&lu.inverse())
}

/// Kronecker product of two 2×2 matrices, acting on column-major `vec`.
pub fn kron2(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

/// Column-major vectorisation of a 2×2 matrix.
pub fn vec2(a: &[[f64; 2]; 2]) -> [f64; 4] {
    [a[0][0], a[1][0], a[0][1], a[1][1]]
}
