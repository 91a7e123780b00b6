//! Small dense linear algebra for checking the designs: characteristic
//! polynomials, polynomial roots, controllability and finite-difference
//! Jacobians. Sized for systems of a handful of states.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex as Cx;
use thiserror::Error;

use crate::control::Gains;
use crate::plant::DerivedParams;
use crate::scalar::Scalar;

/// Relative rank tolerance used when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Largest matrix order handled by [`char_poly`] and [`poly_roots`].
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("order {0} exceeds the supported maximum of {MAX_ORDER}")]
    TooLarge(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("function value is not finite at component {0}")]
    NonFinite(usize),
    #[error("design matrix has rank {rank} < {cols}")]
    RankDeficient { rank: usize, cols: usize },
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Companion matrix of a monic polynomial, whose characteristic
    /// polynomial is that polynomial.
    pub fn companion(p: &Polynomial<T>) -> Self {
        let n = p.degree();
        let mut m = Self::zeros(n, n);
        for j in 0..n {
            m[(0, j)] = -p.coeffs[j + 1];
        }
        for i in 1..n {
            m[(i, i - 1)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn add_scaled_identity(&self, k: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += k;
        }
        m
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| *v * k).collect(),
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, AnalysisError> {
        if self.cols != rhs.rows {
            return Err(AnalysisError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Concatenates blocks left to right.
    pub fn hstack(blocks: &[Self]) -> Result<Self, AnalysisError> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(AnalysisError::DimensionMismatch(
                "hstack row counts differ".into(),
            ));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, off + j)] = b[(i, j)];
                }
            }
            off += b.cols;
        }
        Ok(out)
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.try_mul(rhs).expect("matrix dimensions must agree")
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "{v:>14.6e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Monic polynomial, coefficients from the highest degree down.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    /// Normalizes by the leading nonzero coefficient.
    pub fn new(coeffs: &[T]) -> Result<Self, AnalysisError> {
        let first = coeffs
            .iter()
            .position(|c| *c != T::zero())
            .ok_or(AnalysisError::ZeroPolynomial)?;
        let lead = coeffs[first];
        Ok(Self {
            coeffs: coeffs[first..].iter().map(|c| *c / lead).collect(),
        })
    }

    /// `prod (s - r)` over real roots.
    pub fn from_real_roots(roots: &[T]) -> Self {
        roots.iter().fold(Self::one(), |p, &r| {
            p.mul(&Self {
                coeffs: vec![T::one(), -r],
            })
        })
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![T::one()],
        }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += *a * *b;
            }
        }
        Self { coeffs: out }
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc * x + *c)
    }

    pub fn eval_complex(&self, z: Cx<T>) -> Cx<T> {
        self.coeffs
            .iter()
            .fold(Cx::new(T::zero(), T::zero()), |acc, c| {
                acc * z + Cx::new(*c, T::zero())
            })
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self {
                coeffs: vec![T::zero()],
            };
        }
        Self {
            coeffs: self.coeffs[..n]
                .iter()
                .enumerate()
                .map(|(i, c)| *c * T::from_usize(n - i).unwrap())
                .collect(),
        }
    }

    /// `sum |a_i| |z|^(n-i)`: the natural size of `p(z)` for rounding
    /// purposes.
    pub fn magnitude_at(&self, z: Cx<T>) -> T {
        let r = z.norm();
        self.coeffs
            .iter()
            .fold(T::zero(), |acc, c| acc * r + c.abs())
    }

    /// Largest coefficient-wise relative difference, using
    /// `max(|a|, |b|, floor)` as the scale.
    pub fn max_rel_diff(&self, other: &Self, floor: T) -> T {
        assert_eq!(self.degree(), other.degree());
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |m, (a, b)| {
                let scale = a.abs().max(b.abs()).max(floor);
                m.max((*a - *b).abs() / scale)
            })
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.degree();
        for (i, c) in self.coeffs.iter().enumerate() {
            let p = n - i;
            if i > 0 {
                write!(f, " + ")?;
            }
            match p {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{p}")?,
            }
        }
        Ok(())
    }
}

/// Characteristic polynomial `det(sI - A)` by the Faddeev-LeVerrier
/// recurrence: `M_1 = I`, `c_k = -tr(A M_k) / k`, `M_{k+1} = A M_k + c_k I`.
pub fn char_poly<T: Scalar>(a: &Matrix<T>) -> Result<Polynomial<T>, AnalysisError> {
    if !a.is_square() {
        return Err(AnalysisError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > MAX_ORDER {
        return Err(AnalysisError::TooLarge(n));
    }
    let mut coeffs = vec![T::one()];
    let mut m = Matrix::identity(n);
    for k in 1..=n {
        let am = a * &m;
        let c = -am.trace() / T::from_usize(k).unwrap();
        coeffs.push(c);
        m = am.add_scaled_identity(c);
    }
    Ok(Polynomial { coeffs })
}

/// All complex roots by simultaneous Aberth-Ehrlich iteration, followed
/// by Newton polishing of isolated roots and averaging of tight clusters.
pub fn poly_roots<T: Scalar>(p: &Polynomial<T>) -> Result<Vec<Cx<T>>, AnalysisError> {
    let n = p.degree();
    if n > MAX_ORDER {
        return Err(AnalysisError::TooLarge(n));
    }
    if p.coeffs.iter().any(|c| !c.is_finite()) {
        return Err(AnalysisError::NonFinite(0));
    }
    // exact zero roots are peeled off so that they come back exact
    let trailing = p
        .coeffs
        .iter()
        .rev()
        .take_while(|c| **c == T::zero())
        .count();
    let reduced = Polynomial {
        coeffs: p.coeffs[..=n - trailing].to_vec(),
    };
    let mut roots = aberth(&reduced);
    roots.extend(std::iter::repeat_n(Cx::new(T::zero(), T::zero()), trailing));
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(roots)
}

fn aberth<T: Scalar>(p: &Polynomial<T>) -> Vec<Cx<T>> {
    let n = p.degree();
    if n == 0 {
        return Vec::new();
    }
    let zero = Cx::new(T::zero(), T::zero());
    let dp = p.derivative();
    // Cauchy bound on the root moduli
    let radius = T::one() + p.coeffs[1..].iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let start = radius.min(
        // geometric mean of root moduli is a better seed when coefficients are spread
        p.coeffs[n]
            .abs()
            .powf(T::one() / T::from_usize(n).unwrap())
            .max(T::lit(1e-3)),
    );
    let mut z: Vec<Cx<T>> = (0..n)
        .map(|k| {
            let ang =
                (T::TAU() * T::from_usize(k).unwrap() + T::lit(0.4)) / T::from_usize(n).unwrap();
            Cx::from_polar(start, ang)
        })
        .collect();

    let tiny = T::epsilon() * T::lit(4.0);
    for _ in 0..500 {
        let mut moved = T::zero();
        for i in 0..n {
            let pz = p.eval_complex(z[i]);
            if pz == zero {
                continue;
            }
            let ratio = pz / dp.eval_complex(z[i]);
            let repulsion: Cx<T> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d == zero {
                        zero
                    } else {
                        d.inv()
                    }
                })
                .fold(zero, |a, b| a + b);
            let step = ratio / (Cx::new(T::one(), T::zero()) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] = z[i] - step;
                moved = moved.max(step.norm() / z[i].norm().max(T::one()));
            }
        }
        if moved <= tiny {
            break;
        }
    }

    refine_clusters(p, &mut z);
    for r in z.iter_mut() {
        if r.im.abs() <= T::lit(1e3) * T::epsilon() * r.norm().max(T::one()) {
            r.im = T::zero();
        }
    }
    z
}

/// Multiple roots only converge to about sqrt(eps). A cluster of `m`
/// approximations is replaced by the nearby simple root of `p^(m-1)`, found
/// by Newton from the cluster centroid.
fn refine_clusters<T: Scalar>(p: &Polynomial<T>, z: &mut [Cx<T>]) {
    let n = z.len();
    let cluster_tol = T::lit(1e-5);
    let mut visited = vec![false; n];
    for i in 0..n {
        if visited[i] {
            continue;
        }
        let scale = z[i].norm().max(T::one());
        let members: Vec<usize> = (i..n)
            .filter(|&j| !visited[j] && (z[j] - z[i]).norm() <= cluster_tol * scale)
            .collect();
        for &j in &members {
            visited[j] = true;
        }
        if members.len() < 2 {
            continue;
        }
        let k = T::from_usize(members.len()).unwrap();
        let centroid = members
            .iter()
            .fold(Cx::new(T::zero(), T::zero()), |a, &j| a + z[j])
            / k;
        let mut d = p.clone();
        for _ in 1..members.len() {
            d = d.derivative();
        }
        let dd = d.derivative();
        let mut x = centroid;
        for _ in 0..50 {
            let step = d.eval_complex(x) / dd.eval_complex(x);
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            x = x - step;
            if step.norm() <= T::epsilon() * x.norm().max(T::one()) {
                break;
            }
        }
        if (x - centroid).norm() <= T::lit(10.0) * cluster_tol * scale {
            for &j in &members {
                z[j] = x;
            }
        }
    }
}

/// Eigenvalues via the characteristic polynomial.
pub fn eigenvalues<T: Scalar>(a: &Matrix<T>) -> Result<Vec<Cx<T>>, AnalysisError> {
    poly_roots(&char_poly(a)?)
}

/// `[B AB A^2B ... A^(n-1)B]`.
pub fn controllability_matrix<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
) -> Result<Matrix<T>, AnalysisError> {
    if !a.is_square() {
        return Err(AnalysisError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if b.rows() != a.rows() {
        return Err(AnalysisError::DimensionMismatch(format!(
            "A is {}x{} but B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    let mut blocks = Vec::with_capacity(a.rows());
    let mut cur = b.clone();
    for _ in 0..a.rows() {
        let next = a * &cur;
        blocks.push(cur);
        cur = next;
    }
    Matrix::hstack(&blocks)
}

/// Numerical rank by Gaussian elimination with complete pivoting. Pivots
/// below `tol` times the first pivot count as zero.
pub fn rank<T: Scalar>(m: &Matrix<T>, tol: T) -> usize {
    let mut w = m.clone();
    let (rows, cols) = (w.rows(), w.cols());
    let mut first_pivot = None;
    let mut r = 0;
    while r < rows.min(cols) {
        let (mut pi, mut pj, mut best) = (r, r, T::zero());
        for i in r..rows {
            for j in r..cols {
                let v = w[(i, j)].abs();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        let reference = *first_pivot.get_or_insert(best);
        if best == T::zero() || best <= tol * reference {
            break;
        }
        for j in 0..cols {
            let t = w[(r, j)];
            w[(r, j)] = w[(pi, j)];
            w[(pi, j)] = t;
        }
        for i in 0..rows {
            let t = w[(i, r)];
            w[(i, r)] = w[(i, pj)];
            w[(i, pj)] = t;
        }
        let piv = w[(r, r)];
        for i in r + 1..rows {
            let f = w[(i, r)] / piv;
            if f == T::zero() {
                continue;
            }
            for j in r..cols {
                let d = f * w[(r, j)];
                w[(i, j)] -= d;
            }
        }
        r += 1;
    }
    r
}

pub fn controllability_rank<T: Scalar>(
    a: &Matrix<T>,
    b: &Matrix<T>,
    tol: T,
) -> Result<usize, AnalysisError> {
    Ok(rank(&controllability_matrix(a, b)?, tol))
}

/// Solves `min ||X c - y||` by Householder QR on column-equilibrated
/// regressors. Columns whose reduced diagonal falls below `1e-12` of the
/// largest count as dependent.
pub fn least_squares<T: Scalar, const K: usize>(
    rows: &[[T; K]],
    y: &[T],
) -> Result<[T; K], AnalysisError> {
    let m = rows.len();
    if y.len() != m {
        return Err(AnalysisError::DimensionMismatch(format!(
            "{m} rows but {} targets",
            y.len()
        )));
    }
    if m < K {
        return Err(AnalysisError::RankDeficient { rank: m, cols: K });
    }
    let mut scale = [T::zero(); K];
    for (j, s) in scale.iter_mut().enumerate() {
        *s = rows.iter().map(|r| r[j] * r[j]).sum::<T>().sqrt();
        if *s == T::zero() {
            return Err(AnalysisError::RankDeficient { rank: 0, cols: K });
        }
    }
    let mut a: Vec<[T; K]> = rows
        .iter()
        .map(|r| std::array::from_fn(|j| r[j] / scale[j]))
        .collect();
    let mut b = y.to_vec();

    for k in 0..K {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(AnalysisError::RankDeficient { rank: k, cols: K });
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vv = v.iter().map(|x| *x * *x).sum::<T>();
        if vv > T::zero() {
            for j in k..K {
                let dot = a[k..]
                    .iter()
                    .zip(&v)
                    .map(|(row, vi)| *vi * row[j])
                    .sum::<T>();
                let f = (dot + dot) / vv;
                for (row, vi) in a[k..].iter_mut().zip(&v) {
                    row[j] -= f * *vi;
                }
            }
            let dot = (k..m).map(|i| v[i - k] * b[i]).sum::<T>();
            let f = (dot + dot) / vv;
            for i in k..m {
                b[i] -= f * v[i - k];
            }
        }
    }

    let diag_max = (0..K).fold(T::zero(), |mx, k| mx.max(a[k][k].abs()));
    let rank = (0..K)
        .filter(|&k| a[k][k].abs() > T::lit(1e-12) * diag_max)
        .count();
    if rank < K {
        return Err(AnalysisError::RankDeficient { rank, cols: K });
    }
    let mut c = [T::zero(); K];
    for k in (0..K).rev() {
        let acc = (k + 1..K).fold(b[k], |acc, j| acc - a[k][j] * c[j]);
        c[k] = acc / a[k][k];
    }
    for (c, s) in c.iter_mut().zip(scale) {
        *c /= s;
    }
    Ok(c)
}

/// Central-difference Jacobian of `f` at `x0`. The step on component `i`
/// is `h * max(1, |x0_i|)`.
pub fn fd_jacobian<T, F>(mut f: F, x0: &[T], h: T) -> Result<Matrix<T>, AnalysisError>
where
    T: Scalar,
    F: FnMut(&[T]) -> Vec<T>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut jac: Option<Matrix<T>> = None;
    for j in 0..n {
        let step = h * x0[j].abs().max(T::one());
        x[j] = x0[j] + step;
        let fp = f(&x);
        x[j] = x0[j] - step;
        let fm = f(&x);
        x[j] = x0[j];
        if fp.len() != fm.len() {
            return Err(AnalysisError::DimensionMismatch(
                "f changed output length".into(),
            ));
        }
        let jm = jac.get_or_insert_with(|| Matrix::zeros(fp.len(), n));
        if jm.rows() != fp.len() {
            return Err(AnalysisError::DimensionMismatch(
                "f changed output length".into(),
            ));
        }
        for (i, (a, b)) in fp.iter().zip(&fm).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(AnalysisError::NonFinite(i));
            }
            jm[(i, j)] = (*a - *b) / (step + step);
        }
    }
    Ok(jac.unwrap_or_else(|| Matrix::zeros(0, 0)))
}

/// Linearized closed loop of the attitude-and-wheel regulator about the
/// balanced pose, in the coordinates `(sigma_e, theta_w, omega_c, omega_w)`.
///
/// The wheel row follows from the approximate wheel dynamics with the
/// gravity and friction cancelled: `omega_w_dot = -delta sigma_e - gamma u`.
pub fn closed_loop_matrix<T: Scalar>(gains: &Gains<T>, dp: &DerivedParams<T>) -> Matrix<T> {
    let (g, d) = (dp.gamma, dp.delta);
    let z = T::zero();
    let one = T::one();
    Matrix::from_rows(&[
        [z, z, -one, z],
        [z, z, z, one],
        [gains.k_p, -gains.k_pw, -gains.k_d, -gains.k_dw],
        [
            -d - g * gains.k_p,
            g * gains.k_pw,
            g * gains.k_d,
            g * gains.k_dw,
        ],
    ])
}
