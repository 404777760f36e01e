//! Unitary DFT, the partial-Fourier sensing operator, Dirac combs, numerical
//! supports, and the prime-length time/frequency uncertainty check.

use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cvec;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;

// Plans are cached per length; rustfft handles arbitrary (including prime)
// lengths internally via Bluestein/Rader, so prime n stays fast.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn run_fft(v: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let plan = {
        let mut guard = PLANNER.lock().unwrap();
        let planner = guard.get_or_insert_with(FftPlanner::new);
        if inverse {
            planner.plan_fft_inverse(v.len())
        } else {
            planner.plan_fft_forward(v.len())
        }
    };
    let mut buf = v.to_vec();
    plan.process(&mut buf);
    buf
}

/// Unitary DFT: `(Fv)(k) = n^(-1/2) sum_j v(j) exp(-2*pi*i*j*k/n)`.
pub fn unitary_dft(v: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (v.len() as f64).sqrt();
    let mut out = run_fft(v, false);
    for z in &mut out {
        *z *= scale;
    }
    out
}

/// Inverse of [`unitary_dft`].
pub fn unitary_idft(v: &[Complex64]) -> Vec<Complex64> {
    let scale = 1.0 / (v.len() as f64).sqrt();
    let mut out = run_fft(v, true);
    for z in &mut out {
        *z *= scale;
    }
    out
}

/// The comb with ones at the sqrt(n) indices {0, sqrt(n), ..., n - sqrt(n)}.
/// Fixed point of the unitary DFT.
pub fn dirac_comb(n: usize) -> Result<Vec<Complex64>> {
    let root = (n as f64).sqrt().round() as usize;
    if root * root != n {
        return Err(Error::NotPerfectSquare(n));
    }
    let mut v = cvec::zeros(n);
    for j in 0..root {
        v[j * root] = Complex64::new(1.0, 0.0);
    }
    Ok(v)
}

/// Deterministic trial-division primality test (desk-scale n).
pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime >= n.
pub fn next_prime(n: usize) -> usize {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

/// Indices with modulus strictly above `tau`.
pub fn numerical_support(v: &[Complex64], tau: f64) -> IndexSet {
    let indices = v
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > tau)
        .map(|(i, _)| i)
        .collect();
    IndexSet::new(indices, v.len()).expect("enumerate yields sorted unique indices")
}

/// Default relative support tolerance: `1e-8 * ||v||_inf`.
pub const SUPPORT_TOL_REL: f64 = 1e-8;

pub fn support_tolerance(v: &[Complex64]) -> f64 {
    SUPPORT_TOL_REL * cvec::norm_inf(v)
}

/// Counts `||v||_0` and `||Fv||_0` (with per-vector relative tolerance `tau_rel`)
/// and reports whether their sum reaches n + 1. Requires prime length.
pub fn uncertainty_check(v: &[Complex64], tau_rel: f64) -> Result<(usize, usize, bool)> {
    let n = v.len();
    if !is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if cvec::norm_inf(v) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let spectrum = unitary_dft(v);
    let count_time = numerical_support(v, tau_rel * cvec::norm_inf(v)).len();
    let count_freq = numerical_support(&spectrum, tau_rel * cvec::norm_inf(&spectrum)).len();
    Ok((count_time, count_freq, count_time + count_freq >= n + 1))
}

/// The sensing map: rows `rows` of the unitary DFT matrix scaled by sqrt(n/m),
/// so every column of the induced m x n matrix has unit norm. Applied
/// implicitly via FFT.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFourierOperator {
    n: usize,
    rows: IndexSet,
}

impl PartialFourierOperator {
    pub fn new(n: usize, rows: IndexSet) -> Result<Self> {
        if rows.ambient() != n {
            return Err(Error::DimensionMismatch {
                context: "operator row set ambient",
                expected: n,
                got: rows.ambient(),
            });
        }
        if rows.is_empty() {
            return Err(Error::InfeasibleSizes("operator needs at least one row".into()));
        }
        Ok(Self { n, rows })
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            rows: IndexSet::full(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &IndexSet {
        &self.rows
    }

    pub fn scale(&self) -> f64 {
        (self.n as f64 / self.m() as f64).sqrt()
    }

    /// Forward map: `sqrt(n/m) * (Fx)(rows)`, length m.
    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "apply input",
                expected: self.n,
                got: x.len(),
            });
        }
        let spectrum = unitary_dft(x);
        let s = self.scale();
        Ok(self.rows.iter().map(|r| spectrum[r] * s).collect())
    }

    /// Adjoint map: scatters y onto the selected rows and applies the inverse
    /// unitary DFT, scaled by sqrt(n/m). Length n.
    pub fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.m() {
            return Err(Error::DimensionMismatch {
                context: "adjoint input",
                expected: self.m(),
                got: y.len(),
            });
        }
        let spread = cvec::scatter(y, &self.rows, self.n);
        let mut out = unitary_idft(&spread);
        let s = self.scale();
        for z in &mut out {
            *z *= s;
        }
        Ok(out)
    }

    /// Closed-form entry of the m x n sensing matrix:
    /// `(1/sqrt(m)) * exp(-2*pi*i*rows(i)*j/n)`.
    pub fn entry(&self, row_pos: usize, col: usize) -> Complex64 {
        let m = self.m() as f64;
        let angle =
            -2.0 * std::f64::consts::PI * (self.rows.indices()[row_pos] as f64) * (col as f64)
                / (self.n as f64);
        Complex64::from_polar(1.0 / m.sqrt(), angle)
    }

    /// Dense block of the sensing matrix. `row_set` holds positions into the
    /// operator's row list (subset of [0, m)); `col_set` holds signal indices.
    pub fn dense_submatrix(&self, row_set: &IndexSet, col_set: &IndexSet) -> Result<DMatrix<Complex64>> {
        if row_set.ambient() != self.m() {
            return Err(Error::DimensionMismatch {
                context: "dense_submatrix row positions",
                expected: self.m(),
                got: row_set.ambient(),
            });
        }
        if col_set.ambient() != self.n {
            return Err(Error::DimensionMismatch {
                context: "dense_submatrix columns",
                expected: self.n,
                got: col_set.ambient(),
            });
        }
        let rows: Vec<usize> = row_set.iter().collect();
        let cols: Vec<usize> = col_set.iter().collect();
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.entry(rows[i], cols[j])
        }))
    }

    /// Dense block of the adjoint matrix: rows are signal indices, columns are
    /// positions into the operator's row list.
    pub fn dense_adjoint_submatrix(
        &self,
        sig_set: &IndexSet,
        meas_set: &IndexSet,
    ) -> Result<DMatrix<Complex64>> {
        Ok(self.dense_submatrix(meas_set, sig_set)?.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn random_cvec<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn dft_of_first_basis_vector_is_constant() {
        let out = unitary_dft(&cvec::basis(4, 0));
        for z in out {
            assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_of_zero_is_zero() {
        let out = unitary_dft(&cvec::zeros(7));
        assert_eq!(cvec::norm_inf(&out), 0.0);
    }

    #[test]
    fn comb_is_dft_fixed_point() {
        for n in [4usize, 9, 16, 25, 36] {
            let d = dirac_comb(n).unwrap();
            let fd = unitary_dft(&d);
            assert!(cvec::norm_inf(&cvec::sub(&fd, &d)) <= 1e-10, "n={n}");
            let back = unitary_idft(&d);
            assert!(cvec::norm_inf(&cvec::sub(&back, &d)) <= 1e-10, "idft n={n}");
        }
    }

    #[test]
    fn comb_support_and_errors() {
        let d = dirac_comb(9).unwrap();
        let s = numerical_support(&d, 1e-8);
        assert_eq!(s.indices(), &[0, 3, 6]);
        let d4 = dirac_comb(4).unwrap();
        assert_eq!(numerical_support(&d4, 1e-8).indices(), &[0, 2]);
        assert!(matches!(dirac_comb(5), Err(Error::NotPerfectSquare(5))));
    }

    #[test]
    fn idft_inverts_dft() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for n in [3usize, 8, 17, 31, 97] {
            let v = random_cvec(n, &mut rng);
            let back = unitary_idft(&unitary_dft(&v));
            assert!(cvec::rel_err(&back, &v) <= 1e-10, "n={n}");
        }
        let inv = unitary_idft(&vec![Complex64::new(0.5, 0.0); 4]);
        assert!(cvec::norm_inf(&cvec::sub(&inv, &cvec::basis(4, 0))) < 1e-12);
    }

    #[test]
    fn parseval_holds() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for n in [4usize, 13, 64, 128] {
            let v = random_cvec(n, &mut rng);
            let fv = unitary_dft(&v);
            let rel = (cvec::norm_l2(&fv) - cvec::norm_l2(&v)).abs() / cvec::norm_l2(&v);
            assert!(rel <= 1e-10, "n={n}");
        }
    }

    #[test]
    fn support_threshold_semantics() {
        assert!(numerical_support(&cvec::zeros(5), 1e-8).is_empty());
        let v = vec![Complex64::new(1e-9, 0.0), Complex64::new(1.0, 0.0)];
        assert_eq!(numerical_support(&v, 1e-8).indices(), &[1]);
    }

    #[test]
    fn apply_reduces_to_dft_on_full_sampling() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let v = random_cvec(8, &mut rng);
        let op = PartialFourierOperator::full(8);
        let lhs = op.apply(&v).unwrap();
        let rhs = unitary_dft(&v);
        assert!(cvec::rel_err(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn columns_have_unit_norm() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let rows = IndexSet::sample_uniform(24, 10, &mut rng).unwrap();
        let op = PartialFourierOperator::new(24, rows).unwrap();
        for k in 0..24 {
            let col = op.apply(&cvec::basis(24, k)).unwrap();
            assert!((cvec::norm_l2(&col) - 1.0).abs() <= 1e-10, "k={k}");
        }
    }

    #[test]
    fn apply_and_adjoint_match_naive_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let cases = (1..=6usize)
            .map(|m| (6, m))
            .chain((1..=16).map(|m| (16, m)))
            .chain([1usize, 7, 15, 31].into_iter().map(|m| (31, m)))
            .chain([1usize, 32, 64].into_iter().map(|m| (64, m)));
        for (n, m) in cases {
            let rows = IndexSet::sample_uniform(n, m, &mut rng).unwrap();
            let op = PartialFourierOperator::new(n, rows).unwrap();
            let x = random_cvec(n, &mut rng);
            let y = random_cvec(op.m(), &mut rng);
            let fast = op.apply(&x).unwrap();
            let slow = reference::naive_apply(&op, &x);
            assert!(cvec::rel_err(&fast, &slow) <= 1e-10, "apply n={n} m={m}");
            let fast_adj = op.adjoint(&y).unwrap();
            let slow_adj = reference::naive_adjoint(&op, &y);
            assert!(cvec::rel_err(&fast_adj, &slow_adj) <= 1e-10, "adjoint n={n} m={m}");
        }
    }

    #[test]
    fn adjointness_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let rows = IndexSet::sample_uniform(20, 7, &mut rng).unwrap();
        let op = PartialFourierOperator::new(20, rows).unwrap();
        let x = random_cvec(20, &mut rng);
        let y = random_cvec(7, &mut rng);
        let lhs = cvec::inner(&op.apply(&x).unwrap(), &y);
        let rhs = cvec::inner(&x, &op.adjoint(&y).unwrap());
        assert!((lhs - rhs).norm() <= 1e-10);
        let zero_adj = op.adjoint(&cvec::zeros(7)).unwrap();
        assert_eq!(cvec::norm_inf(&zero_adj), 0.0);
    }

    #[test]
    fn gram_diagonal_is_unit() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let rows = IndexSet::sample_uniform(15, 6, &mut rng).unwrap();
        let op = PartialFourierOperator::new(15, rows).unwrap();
        for k in 0..15 {
            let col = op.apply(&cvec::basis(15, k)).unwrap();
            let diag = cvec::inner(&col, &col).re;
            assert!((diag - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn dense_submatrix_matches_apply_on_basis_vectors() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let rows = IndexSet::sample_uniform(12, 5, &mut rng).unwrap();
        let op = PartialFourierOperator::new(12, rows).unwrap();
        let rs = IndexSet::new(vec![0, 2, 4], 5).unwrap();
        let cs = IndexSet::new(vec![1, 3, 7, 11], 12).unwrap();
        let block = op.dense_submatrix(&rs, &cs).unwrap();
        for (j, col_idx) in cs.iter().enumerate() {
            let applied = op.apply(&cvec::basis(12, col_idx)).unwrap();
            for (i, row_pos) in rs.iter().enumerate() {
                assert!((block[(i, j)] - applied[row_pos]).norm() <= 1e-12);
            }
        }
        let empty = op
            .dense_submatrix(&IndexSet::empty(5), &cs)
            .unwrap();
        assert_eq!(empty.nrows(), 0);
        assert_eq!(empty.ncols(), 4);
    }

    #[test]
    fn full_dense_submatrix_is_unitary_dft_matrix() {
        let op = PartialFourierOperator::full(6);
        let f = op
            .dense_submatrix(&IndexSet::full(6), &IndexSet::full(6))
            .unwrap();
        let gram = f.adjoint() * &f;
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - Complex64::new(expect, 0.0)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn uncertainty_spike_and_errors() {
        let (t, f, holds) = uncertainty_check(&cvec::basis(5, 0), 1e-8).unwrap();
        assert_eq!((t, f, holds), (1, 5, true));
        assert!(matches!(
            uncertainty_check(&cvec::basis(9, 0), 1e-8),
            Err(Error::NotPrime(9))
        ));
        assert!(matches!(
            uncertainty_check(&cvec::zeros(5), 1e-8),
            Err(Error::ZeroVector)
        ));
        // composite length would break the bound: the comb gives 3 + 3 < 10
        let d = dirac_comb(9).unwrap();
        let fd = unitary_dft(&d);
        let tol = 1e-8 * cvec::norm_inf(&d);
        assert_eq!(
            numerical_support(&d, tol).len() + numerical_support(&fd, tol).len(),
            6
        );
    }

    #[test]
    fn uncertainty_holds_for_random_sparse_prime_lengths() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for n in [2usize, 3, 5, 7, 11, 13] {
            for _ in 0..1000 {
                let k = rng.gen_range(1..=n);
                let support = IndexSet::sample_uniform(n, k, &mut rng).unwrap();
                let values: Vec<Complex64> = (0..k)
                    .map(|_| {
                        Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
                    })
                    .collect();
                let mut v = cvec::scatter(&values, &support, n);
                if cvec::norm_inf(&v) == 0.0 {
                    v[0] = Complex64::new(1.0, 0.0);
                }
                let (_, _, holds) = uncertainty_check(&v, 1e-8).unwrap();
                assert!(holds, "violated at n={n}");
            }
        }
    }

    #[test]
    fn primality_helpers() {
        assert!(is_prime(2) && is_prime(13) && is_prime(97));
        assert!(!is_prime(1) && !is_prime(9) && !is_prime(91));
        assert_eq!(next_prime(90), 97);
    }
}
