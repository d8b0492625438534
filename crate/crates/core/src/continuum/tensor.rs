use nalgebra::{Matrix3, Matrix6, Vector6};

/// Index pairs backing the 6-component storage order (11, 22, 33, 12, 23, 13).
pub const VOIGT_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (0, 2)];

/// Per-slot scale factors turning stored components into Mandel components.
pub const MANDEL_SCALE: [f64; 6] = [
    1.0,
    1.0,
    1.0,
    std::f64::consts::SQRT_2,
    std::f64::consts::SQRT_2,
    std::f64::consts::SQRT_2,
];

/// Double-contraction weights for the stored (factor-one) components.
const CONTRACT_WEIGHT: [f64; 6] = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0];

const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

/// Symmetric second-order tensor stored as (11, 22, 33, 12, 23, 13).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    v: [f64; 6],
}

impl SymTensor2 {
    pub fn new(v: [f64; 6]) -> Self {
        Self { v }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::new([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Self::new([a, b, c, 0.0, 0.0, 0.0])
    }

    pub fn components(&self) -> &[f64; 6] {
        &self.v
    }

    /// Component by tensor indices, e.g. `get(0, 1)` for the 12 entry.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.v[0],
            (1, 1) => self.v[1],
            (2, 2) => self.v[2],
            (0, 1) => self.v[3],
            (1, 2) => self.v[4],
            (0, 2) => self.v[5],
            _ => panic!("tensor index out of range"),
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        let v = &self.v;
        Matrix3::new(v[0], v[3], v[5], v[3], v[1], v[4], v[5], v[4], v[2])
    }

    /// Builds from the symmetric part of an arbitrary 3x3 matrix.
    pub fn from_matrix_symmetrized(m: &Matrix3<f64>) -> Self {
        Self::new([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
        ])
    }

    /// Full double contraction A : B (off-diagonals counted twice).
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..6 {
            s += CONTRACT_WEIGHT[i] * self.v[i] * other.v[i];
        }
        s
    }

    /// Frobenius norm of the full tensor.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.v[0] + self.v[1] + self.v[2]
    }

    pub fn det(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Cofactor tensor Cof A = det(A) A^-T for invertible A; computed from minors.
    pub fn cof(&self) -> Self {
        let m = self.to_matrix();
        let mut c = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut minor = [[0.0; 2]; 2];
                let (mut r, mut s);
                r = 0;
                for p in 0..3 {
                    if p == i {
                        continue;
                    }
                    s = 0;
                    for q in 0..3 {
                        if q == j {
                            continue;
                        }
                        minor[r][s] = m[(p, q)];
                        s += 1;
                    }
                    r += 1;
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                c[(i, j)] = sign * (minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0]);
            }
        }
        Self::from_matrix_symmetrized(&c.transpose())
    }

    pub fn inverse(&self) -> Option<Self> {
        self.to_matrix()
            .try_inverse()
            .map(|m| Self::from_matrix_symmetrized(&m))
    }

    /// Positive definiteness via Cholesky with a pivot tolerance of 1e-12.
    pub fn is_positive_definite(&self) -> bool {
        let m = self.to_matrix();
        let mut l = [[0.0_f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= CHOLESKY_PIVOT_TOL {
                        return false;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        true
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut v = self.v;
        for x in &mut v {
            *x *= s;
        }
        Self { v }
    }

    /// Stored components scaled into Mandel form (off-diagonals times sqrt 2).
    pub fn to_mandel(&self) -> Vector6<f64> {
        Vector6::from_fn(|i, _| self.v[i] * MANDEL_SCALE[i])
    }

    pub fn from_mandel(m: &Vector6<f64>) -> Self {
        let mut v = [0.0; 6];
        for i in 0..6 {
            v[i] = m[i] / MANDEL_SCALE[i];
        }
        Self { v }
    }
}

impl std::ops::Add for SymTensor2 {
    type Output = SymTensor2;
    fn add(self, rhs: SymTensor2) -> SymTensor2 {
        let mut v = self.v;
        for i in 0..6 {
            v[i] += rhs.v[i];
        }
        SymTensor2 { v }
    }
}

impl std::ops::Sub for SymTensor2 {
    type Output = SymTensor2;
    fn sub(self, rhs: SymTensor2) -> SymTensor2 {
        let mut v = self.v;
        for i in 0..6 {
            v[i] -= rhs.v[i];
        }
        SymTensor2 { v }
    }
}

/// Fourth-order tensor with minor symmetry, stored as the 6x6 matrix of
/// plain components C_IJ = C_(kl)(mn) under the (11, 22, 33, 12, 23, 13)
/// pair ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor4 {
    m: Matrix6<f64>,
}

impl SymTensor4 {
    pub fn from_components(m: Matrix6<f64>) -> Self {
        Self { m }
    }

    pub fn components(&self) -> &Matrix6<f64> {
        &self.m
    }

    /// Symmetric fourth-order identity (maps any symmetric tensor to itself).
    pub fn identity_sym() -> Self {
        Self {
            m: Matrix6::from_diagonal(&Vector6::new(1.0, 1.0, 1.0, 0.5, 0.5, 0.5)),
        }
    }

    pub fn isotropic(scale: f64) -> Self {
        Self::identity_sym().scaled(scale)
    }

    /// sym4(A): C_KLMN = (A_KM A_LN + A_KN A_LM) / 2 for symmetric A.
    ///
    /// Maps E to A E A; its inverse is sym4(A^-1).
    pub fn sym_outer(a: &SymTensor2) -> Self {
        let mut m = Matrix6::zeros();
        for (row, &(k, l)) in VOIGT_PAIRS.iter().enumerate() {
            for (col, &(p, q)) in VOIGT_PAIRS.iter().enumerate() {
                m[(row, col)] = 0.5 * (a.get(k, p) * a.get(l, q) + a.get(k, q) * a.get(l, p));
            }
        }
        Self { m }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: self.m * s }
    }

    /// Double contraction (C : E) onto a symmetric tensor.
    pub fn apply(&self, e: &SymTensor2) -> SymTensor2 {
        let ev = e.components();
        let mut out = [0.0; 6];
        for i in 0..6 {
            let mut s = 0.0;
            for j in 0..6 {
                s += self.m[(i, j)] * CONTRACT_WEIGHT[j] * ev[j];
            }
            out[i] = s;
        }
        SymTensor2::new(out)
    }

    /// Quadratic form E : C : E.
    pub fn quad_form(&self, e: &SymTensor2) -> f64 {
        e.dot(&self.apply(e))
    }

    /// Mandel representation: orthonormal basis in which composition and
    /// inversion of fourth-order tensors become plain matrix operations.
    pub fn to_mandel(&self) -> Matrix6<f64> {
        let mut out = self.m;
        for i in 0..6 {
            for j in 0..6 {
                out[(i, j)] *= MANDEL_SCALE[i] * MANDEL_SCALE[j];
            }
        }
        out
    }

    pub fn from_mandel(m: &Matrix6<f64>) -> Self {
        let mut out = *m;
        for i in 0..6 {
            for j in 0..6 {
                out[(i, j)] /= MANDEL_SCALE[i] * MANDEL_SCALE[j];
            }
        }
        Self { m: out }
    }

    /// Fourth-order inverse satisfying C : C^-1 = symmetric identity.
    pub fn inverse(&self) -> Option<Self> {
        self.to_mandel().try_inverse().map(|m| Self::from_mandel(&m))
    }

    /// Positive definiteness on symmetric tensors (Cholesky of the Mandel form).
    pub fn is_positive_definite(&self) -> bool {
        let m = self.to_mandel();
        let mut a = m;
        for i in 0..6 {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= a[(i, k)] * a[(j, k)];
                }
                if i == j {
                    if s <= CHOLESKY_PIVOT_TOL {
                        return false;
                    }
                    a[(i, i)] = s.sqrt();
                } else {
                    a[(i, j)] = s / a[(j, j)];
                }
            }
        }
        true
    }

    /// In-plane 3x3 Mandel block (slots 11, 22, 12).
    pub fn mandel_inplane(&self) -> nalgebra::Matrix3<f64> {
        let m = self.to_mandel();
        const S: [usize; 3] = [0, 1, 3];
        nalgebra::Matrix3::from_fn(|i, j| m[(S[i], S[j])])
    }

    /// 4x4 Mandel block over the plane-stress-active slots (11, 22, 33, 12).
    pub fn mandel_active(&self) -> nalgebra::Matrix4<f64> {
        let m = self.to_mandel();
        nalgebra::Matrix4::from_fn(|i, j| m[(i, j)])
    }

    pub fn has_major_symmetry(&self, tol: f64) -> bool {
        for i in 0..6 {
            for j in 0..6 {
                if (self.m[(i, j)] - self.m[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Deformation gradient: an invertible 3x3 matrix with positive determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefGrad {
    m: Matrix3<f64>,
}

impl DefGrad {
    pub fn new(m: Matrix3<f64>) -> crate::Result<Self> {
        let det = m.determinant();
        if !det.is_finite() || det <= 0.0 {
            return Err(crate::Error::Domain(format!(
                "deformation gradient must have det F > 0, got {det}"
            )));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> crate::Result<Self> {
        Self::new(Matrix3::from_diagonal(&nalgebra::Vector3::new(a, b, c)))
    }

    /// Plane-stress form: in-plane 2x2 block plus out-of-plane stretch.
    pub fn from_plane(f2d: &nalgebra::Matrix2<f64>, lambda3: f64) -> crate::Result<Self> {
        let mut m = Matrix3::zeros();
        m[(0, 0)] = f2d[(0, 0)];
        m[(0, 1)] = f2d[(0, 1)];
        m[(1, 0)] = f2d[(1, 0)];
        m[(1, 1)] = f2d[(1, 1)];
        m[(2, 2)] = lambda3;
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        self.m
            .try_inverse()
            .expect("det F > 0 guarantees invertibility")
    }

    pub fn right_cauchy_green(&self) -> SymTensor2 {
        SymTensor2::from_matrix_symmetrized(&(self.m.transpose() * self.m))
    }

    pub fn left_cauchy_green(&self) -> SymTensor2 {
        SymTensor2::from_matrix_symmetrized(&(self.m * self.m.transpose()))
    }
}
