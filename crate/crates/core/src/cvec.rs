//! Helpers for complex vectors (`Vec<Complex64>` throughout the crate).

use num_complex::Complex64;

use crate::index_set::IndexSet;

pub fn zeros(len: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); len]
}

/// Canonical basis vector e_k.
pub fn basis(len: usize, k: usize) -> Vec<Complex64> {
    let mut v = zeros(len);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

pub fn norm_l1(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

pub fn norm_l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn axpy(out: &mut [Complex64], alpha: Complex64, v: &[Complex64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += alpha * x;
    }
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Relative error `||a - b||_2 / (1 + ||b||_2)`.
pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    norm_l2(&sub(a, b)) / (1.0 + norm_l2(b))
}

pub fn is_finite(v: &[Complex64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Gathers `v` at the set's indices.
pub fn gather(v: &[Complex64], set: &IndexSet) -> Vec<Complex64> {
    set.iter().map(|i| v[i]).collect()
}

/// Scatters `values` into a zero vector of length `len` at the set's indices.
pub fn scatter(values: &[Complex64], set: &IndexSet, len: usize) -> Vec<Complex64> {
    debug_assert_eq!(values.len(), set.len());
    let mut out = zeros(len);
    for (slot, value) in set.iter().zip(values) {
        out[slot] = *value;
    }
    out
}

/// Unit-modulus signs of the entries at `set`; zero entries map to zero.
pub fn signs_on(v: &[Complex64], set: &IndexSet) -> Vec<Complex64> {
    set.iter()
        .map(|i| {
            let z = v[i];
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                z / r
            }
        })
        .collect()
}
