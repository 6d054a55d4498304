//! Dense matrix exponential for small systems, by scaling and squaring
//! with a degree-13 Padé approximant (Higham 2005, Algorithm 10.20 with a
//! fixed order). The density module uses it on the bidiagonal phase-type
//! generator when nearly-equal rates make the partial-fraction form
//! cancel catastrophically; the matrices involved have a handful of rows,
//! so no norm estimation or order selection is needed.

/// Row-major square matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    fn norm_1(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Solve `self * X = rhs` by LU with partial pivoting.
    fn solve(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut lu = self.clone();
        let mut x = rhs.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| lu[(a, col)].abs().total_cmp(&lu[(b, col)].abs()))
                .expect("non-empty range");
            if pivot != col {
                for j in 0..n {
                    lu.data.swap(col * n + j, pivot * n + j);
                    x.data.swap(col * n + j, pivot * n + j);
                }
                perm.swap(col, pivot);
            }
            let d = lu[(col, col)];
            assert!(d != 0.0, "singular matrix in Pade solve");
            for row in col + 1..n {
                let factor = lu[(row, col)] / d;
                if factor == 0.0 {
                    continue;
                }
                lu[(row, col)] = 0.0;
                for j in col + 1..n {
                    let v = lu[(col, j)];
                    lu[(row, j)] -= factor * v;
                }
                for j in 0..n {
                    let v = x[(col, j)];
                    x[(row, j)] -= factor * v;
                }
            }
        }
        for col in (0..n).rev() {
            let d = lu[(col, col)];
            for j in 0..n {
                x[(col, j)] /= d;
            }
            for row in 0..col {
                let factor = lu[(row, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = x[(col, j)];
                    x[(row, j)] -= factor * v;
                }
            }
        }
        x
    }
}

impl std::ops::Index<(usize, usize)> for SmallMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SmallMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Padé-13 numerator coefficients for exp.
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371_920_351_148_152;

/// `e^A` by scaling and squaring.
pub fn expm(a: &SmallMatrix) -> SmallMatrix {
    let norm = a.norm_1();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a_scaled = a.scale(2.0f64.powi(-s));
    let mut result = pade13(&a_scaled);
    for _ in 0..s {
        result = result.matmul(&result);
    }
    result
}

fn pade13(a: &SmallMatrix) -> SmallMatrix {
    let n = a.dim();
    let id = SmallMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6.scale(B13[13]).add(&a4.scale(B13[11])).add(&a2.scale(B13[9]));
    let w2 = a6
        .scale(B13[7])
        .add(&a4.scale(B13[5]))
        .add(&a2.scale(B13[3]))
        .add(&id.scale(B13[1]));
    let u = a.matmul(&a6.matmul(&w1).add(&w2));

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6.scale(B13[12]).add(&a4.scale(B13[10])).add(&a2.scale(B13[8]));
    let z2 = a6
        .scale(B13[6])
        .add(&a4.scale(B13[4]))
        .add(&a2.scale(B13[2]))
        .add(&id.scale(B13[0]));
    let v = a6.matmul(&z1).add(&z2);

    // (V − U)^{-1} (V + U)
    v.sub(&u).solve(&v.add(&u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = SmallMatrix::zeros(3);
        let e = expm(&z);
        assert_eq!(e, SmallMatrix::identity(3));
    }

    #[test]
    fn exp_of_diagonal() {
        let mut d = SmallMatrix::zeros(2);
        d[(0, 0)] = 1.0;
        d[(1, 1)] = -2.0;
        let e = expm(&d);
        assert!((e[(0, 0)] - 1.0f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-15);
        assert!(e[(0, 1)].abs() < 1e-16 && e[(1, 0)].abs() < 1e-16);
    }

    #[test]
    fn exp_of_nilpotent() {
        // N with ones above the diagonal: e^N has entries 1/k! on the k-th
        // superdiagonal.
        let n = 4;
        let mut m = SmallMatrix::zeros(n);
        for i in 0..n - 1 {
            m[(i, i + 1)] = 1.0;
        }
        let e = expm(&m);
        for i in 0..n {
            for j in 0..n {
                let expect = if j >= i {
                    let mut f = 1.0;
                    for k in 1..=(j - i) {
                        f *= k as f64;
                    }
                    1.0 / f
                } else {
                    0.0
                };
                assert!((e[(i, j)] - expect).abs() < 1e-14, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn scaling_branch_matches_series() {
        // 1x1 with large argument exercises the squaring phase.
        let mut m = SmallMatrix::zeros(1);
        m[(0, 0)] = -37.5;
        let e = expm(&m);
        let expect = (-37.5f64).exp();
        assert!((e[(0, 0)] - expect).abs() < 1e-12 * expect.max(1e-300));
    }
}
