//! Minimum sup-norm solutions of underdetermined complex linear systems,
//! used to turn the approximate dual vector into a strictly feasible one.
//!
//! The solver is a primal-dual splitting iteration on the problem
//! `min ||y||_inf  s.t.  M y = z`; termination is certified by weak duality
//! (the dual is linear maximization over the unit ball of the sum-of-moduli
//! norm pulled back through `M*`), and the returned iterate is projected onto
//! the constraint, so its feasibility residual is at the level of the dense
//! least-squares solve.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cvec;
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

use super::{CertVector, GolfingPlan};

/// Projects onto the unit ball of the sum-of-moduli norm: phases are kept,
/// moduli undergo the usual simplex-style water-filling.
fn project_l1_ball(v: &[Complex64]) -> Vec<Complex64> {
    let total: f64 = v.iter().map(|z| z.norm()).sum();
    if total <= 1.0 {
        return v.to_vec();
    }
    let mut moduli: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let mut sorted = moduli.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut level = 0.0;
    for (j, &r) in sorted.iter().enumerate() {
        prefix += r;
        let candidate = (prefix - 1.0) / (j as f64 + 1.0);
        let lower = sorted.get(j + 1).copied().unwrap_or(0.0);
        if candidate >= lower {
            level = candidate;
            break;
        }
    }
    for (mi, z) in moduli.iter_mut().zip(v) {
        let shrunk = (*mi - level).max(0.0);
        *mi = if z.norm() > 0.0 { shrunk / z.norm() } else { 0.0 };
    }
    v.iter().zip(&moduli).map(|(z, f)| z * f).collect()
}

/// `prox_{tau ||.||_inf}` via Moreau decomposition.
fn prox_sup_norm(v: &[Complex64], tau: f64) -> Vec<Complex64> {
    let scaled: Vec<Complex64> = v.iter().map(|z| z / tau).collect();
    let proj = project_l1_ball(&scaled);
    v.iter().zip(&proj).map(|(z, p)| z - p * tau).collect()
}

pub const MIN_INF_TOL: f64 = 1e-8;
pub const MIN_INF_MAX_ITER: usize = 2_000_000;

/// Solves `min ||y||_inf  s.t.  M y = z`. Returns the feasibility-projected
/// minimizer and its sup norm.
pub fn min_inf_norm_solution(
    mat: &DMatrix<Complex64>,
    z: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let k = mat.nrows();
    let s = mat.ncols();
    if z.len() != k {
        return Err(Error::DimensionMismatch {
            context: "min_inf_norm rhs",
            expected: k,
            got: z.len(),
        });
    }
    if k == 0 || s == 0 {
        return Ok((cvec::zeros(s), 0.0));
    }

    let svd = mat.clone().svd(true, true);
    let op_norm = svd.singular_values.max();
    let pinv = mat
        .clone()
        .svd(true, true)
        .pseudo_inverse(1e-13 * op_norm.max(1.0))
        .map_err(|e| Error::Infeasible(format!("pseudo-inverse failed: {e}")))?;
    let z_vec = DVector::from_column_slice(z);
    let project_feasible = |y: &DVector<Complex64>| -> DVector<Complex64> {
        y + &pinv * (&z_vec - mat * y)
    };

    let y_ls = project_feasible(&DVector::zeros(s));
    let feas_resid = (mat * &y_ls - &z_vec).norm();
    if feas_resid > 1e-8 * (1.0 + z_vec.norm()) {
        return Err(Error::Infeasible(format!(
            "least-squares residual {feas_resid:.3e}"
        )));
    }
    if op_norm == 0.0 {
        return Ok((cvec::zeros(s), 0.0));
    }

    let tau = 0.99 / op_norm;
    let sigma = 0.99 / op_norm;
    let mat_adj = mat.adjoint();

    let mut y = DVector::<Complex64>::zeros(s);
    let mut y_bar = y.clone();
    let mut mu = DVector::<Complex64>::zeros(k);
    let mut best_gap = f64::INFINITY;

    for iter in 0..max_iter {
        mu += (mat * &y_bar - &z_vec) * Complex64::new(sigma, 0.0);
        let grad = &mat_adj * &mu;
        let shifted: Vec<Complex64> = (0..s).map(|i| y[i] - tau * grad[i]).collect();
        let y_new = DVector::from_vec(prox_sup_norm(&shifted, tau));
        y_bar = &y_new * Complex64::new(2.0, 0.0) - &y;
        y = y_new;

        if iter % 25 == 24 || iter + 1 == max_iter {
            let y_feas = project_feasible(&y);
            let primal = y_feas.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let pulled = &mat_adj * &mu;
            let dual_norm: f64 = pulled.iter().map(|v| v.norm()).sum();
            let scale = dual_norm.max(1.0);
            let pairing: Complex64 = mu.iter().zip(z_vec.iter()).map(|(a, b)| a.conj() * b).sum();
            let dual = -pairing.re / scale;
            let gap = primal - dual;
            best_gap = best_gap.min(gap);
            if gap <= tol * (1.0 + primal.abs()) {
                return Ok((y_feas.iter().copied().collect(), primal));
            }
        }
    }
    Err(Error::SolverStall {
        tol,
        gap: best_gap,
    })
}

/// Output of the correction stage.
#[derive(Debug, Clone)]
pub struct Correction {
    /// Minimum sup-norm transfer of the first-half dual mass onto the second half.
    pub y: Vec<Complex64>,
    /// Induced off-support tail so the homogeneous system closes exactly.
    pub v: Vec<Complex64>,
    pub delta_q: CertVector,
}

/// Builds the correction `delta_q = (-q0_s1, y, v)` with `Phi delta_q = 0`:
/// `y` solves `A*(s_x, s2) y = A*(s_x, s1) q0_s1` with minimum sup norm, and
/// `v` closes the off-support rows.
pub fn chebyshev_correct(
    inst: &ProblemInstance,
    plan: &GolfingPlan,
    q0: &CertVector,
    lambda: f64,
) -> Result<Correction> {
    let k = inst.s_x.len();
    if plan.s2.len() < k {
        return Err(Error::Infeasible(format!(
            "second half has {} positions but the signal support needs {k}",
            plan.s2.len()
        )));
    }
    let op = &inst.operator;
    let m = inst.m();

    // z = A*(s_x, s1) q0_s1, M = A*(s_x, s2)
    let a1 = op.dense_adjoint_submatrix(&inst.s_x, &plan.s1)?;
    let mat = op.dense_adjoint_submatrix(&inst.s_x, &plan.s2)?;
    let q0_s1 = DVector::from_column_slice(&q0.s1);
    let z_vec = &a1 * q0_s1;
    let z: Vec<Complex64> = z_vec.iter().copied().collect();

    let (y, _) = min_inf_norm_solution(&mat, &z, MIN_INF_TOL, MIN_INF_MAX_ITER)?;

    // v closes the off-support rows of the homogeneous system:
    // v = -lambda * A*(s_xc, s_fc) [ -q0_s1 ; y ]
    let neg_q0_s1: Vec<Complex64> = q0.s1.iter().map(|z| -z).collect();
    let mut head = cvec::scatter(&neg_q0_s1, &plan.s1, m);
    for (slot, pos) in plan.s2.iter().enumerate() {
        head[pos] = y[slot];
    }
    let pulled = op.adjoint(&head)?;
    let s_xc = inst.s_x.complement();
    let v: Vec<Complex64> = s_xc.iter().map(|i| -pulled[i] * lambda).collect();

    let delta_q = CertVector {
        s1: neg_q0_s1,
        s2: y.clone(),
        tail: v.clone(),
    };
    Ok(Correction { y, v, delta_q })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn l1_ball_projection_basics() {
        // inside the ball: unchanged
        let inside = vec![c(0.3, 0.0), c(0.0, 0.4)];
        let p = project_l1_ball(&inside);
        assert!(cvec::rel_err(&p, &inside) <= 1e-14);
        // outside: lands on the sphere, phases kept, small entries may vanish
        let outside = vec![c(2.0, 0.0), c(0.0, -1.5)];
        let p = project_l1_ball(&outside);
        let total: f64 = p.iter().map(|z| z.norm()).sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert!((p[0] - c(0.75, 0.0)).norm() <= 1e-12);
        assert!((p[1] - c(0.0, -0.25)).norm() <= 1e-12);
        // projection zeroes coordinates below the water level
        let lopsided = vec![c(2.0, 0.0), c(0.0, -1.0)];
        let p = project_l1_ball(&lopsided);
        assert!((p[0] - c(1.0, 0.0)).norm() <= 1e-12);
        assert_eq!(p[1], c(0.0, 0.0));
    }

    #[test]
    fn prox_reduces_sup_norm() {
        let v = vec![c(3.0, 0.0), c(-2.0, 0.0), c(0.5, 0.5)];
        let out = prox_sup_norm(&v, 1.0);
        assert!(cvec::norm_inf(&out) < cvec::norm_inf(&v));
    }

    #[test]
    fn symmetric_row_splits_evenly() {
        let mat = DMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let (y, value) = min_inf_norm_solution(&mat, &[c(2.0, 0.0)], 1e-10, 500_000).unwrap();
        assert!((value - 1.0).abs() <= 1e-8, "value {value}");
        assert!((y[0] - c(1.0, 0.0)).norm() <= 1e-6);
        assert!((y[1] - c(1.0, 0.0)).norm() <= 1e-6);
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let mat = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.5), c(-1.0, 0.0), c(0.0, 2.0)]);
        let (y, value) = min_inf_norm_solution(&mat, &[c(0.0, 0.0)], 1e-10, 10_000).unwrap();
        assert!(value <= 1e-10);
        assert!(cvec::norm_inf(&y) <= 1e-10);
    }

    #[test]
    fn inconsistent_system_is_rejected() {
        let mat = DMatrix::from_row_slice(2, 1, &[c(1.0, 0.0), c(1.0, 0.0)]);
        let rhs = [c(1.0, 0.0), c(2.0, 0.0)];
        assert!(matches!(
            min_inf_norm_solution(&mat, &rhs, 1e-10, 1000),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn matches_epigraph_oracle_on_random_systems() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for trial in 0..8 {
            let k = rng.gen_range(1..4usize);
            let s = rng.gen_range(k + 1..k + 6);
            let mat = DMatrix::from_fn(k, s, |_, _| {
                c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let z: Vec<Complex64> = (0..k)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let (_, fast) = min_inf_norm_solution(&mat, &z, 1e-9, 2_000_000).unwrap();
            let (_, slow) =
                crate::reference::epigraph_min_inf_norm(&mat, &z, 1e-11, 400_000).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-6,
                "trial {trial}: fast {fast} slow {slow}"
            );
        }
    }
}
