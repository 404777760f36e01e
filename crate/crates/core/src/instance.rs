//! Ground-truth generation: sparse signals, sparse measurement corruptions,
//! sampling sets, trimming, and replay serialization.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::error::{Error, Result};
use crate::index_set::IndexSet;
use crate::spectral::{self, PartialFourierOperator};

/// Sign model for the nonzero corruption entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SignModel {
    /// Uniform +1/-1.
    Rademacher,
    /// Uniform unit-modulus complex.
    Steinhaus,
    /// Caller-supplied values (one per corruption entry, in support order).
    Fixed(Vec<(f64, f64)>),
    /// Every corruption entry equals +1.
    AdversarialConstant,
}

/// Value model for the ground-truth signal. Recovery guarantees here need no
/// randomness on the signal, so the default places deterministic-signed
/// magnitudes; the random-signs mode exists for comparison experiments only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalModel {
    /// Magnitudes in [0.1, 10] with fixed (+1) signs unless values are supplied.
    ArbitraryFixed,
    /// Same magnitudes with independent uniform +1/-1 signs.
    RandomSigns,
}

/// How the operator's row set is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RowSampling {
    /// Uniform m-subset of [0, n).
    UniformSubset,
    /// Independent inclusion with probability m/n (cardinality varies).
    Bernoulli,
}

#[derive(Debug, Clone)]
pub struct InstanceParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub gamma_c: f64,
    pub x_model: SignalModel,
    pub f_signs: SignModel,
    pub row_sampling: RowSampling,
    /// Reject composite n (the identifiability theory needs prime length).
    pub theory_mode: bool,
    /// Caller-supplied signal support (size k).
    pub x_support: Option<IndexSet>,
    /// Caller-supplied signal values on the support, in support order.
    pub x_values: Option<Vec<Complex64>>,
}

impl InstanceParams {
    pub fn new(n: usize, m: usize, k: usize, gamma_c: f64) -> Self {
        Self {
            n,
            m,
            k,
            gamma_c,
            x_model: SignalModel::ArbitraryFixed,
            f_signs: SignModel::Rademacher,
            row_sampling: RowSampling::UniformSubset,
            theory_mode: false,
            x_support: None,
            x_values: None,
        }
    }
}

/// One fully materialized problem: ground truth, sampling set, measurements.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub n: usize,
    pub operator: PartialFourierOperator,
    pub x0: Vec<Complex64>,
    pub f0: Vec<Complex64>,
    pub s_x: IndexSet,
    pub s_f: IndexSet,
    pub b: Vec<Complex64>,
    pub gamma_c: f64,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn m(&self) -> usize {
        self.operator.m()
    }

    /// Unit-modulus signs of the signal on its support.
    pub fn sigma_x(&self) -> Vec<Complex64> {
        cvec::signs_on(&self.x0, &self.s_x)
    }

    /// Unit-modulus signs of the corruption on its support.
    pub fn sigma_f(&self) -> Vec<Complex64> {
        cvec::signs_on(&self.f0, &self.s_f)
    }

    /// `||b - A x0 - f0||_2 / (1 + ||b||_2)`; near machine precision by construction.
    pub fn measurement_residual(&self) -> f64 {
        let mut r = self.operator.apply(&self.x0).expect("consistent dims");
        for (ri, fi) in r.iter_mut().zip(&self.f0) {
            *ri += fi;
        }
        cvec::rel_err(&r, &self.b)
    }
}

/// Builds a problem instance deterministically from parameters and a seed.
pub fn make_instance(params: &InstanceParams, seed: u64) -> Result<ProblemInstance> {
    let &InstanceParams {
        n,
        m,
        k,
        gamma_c,
        ..
    } = params;
    if params.theory_mode && !spectral::is_prime(n) {
        return Err(Error::NotPrime(n));
    }
    if k > n {
        return Err(Error::InfeasibleSizes(format!("k={k} exceeds n={n}")));
    }
    if m == 0 || m > n {
        return Err(Error::InfeasibleSizes(format!(
            "m={m} must lie in [1, n={n}]"
        )));
    }
    if !(0.0..1.0).contains(&gamma_c) {
        return Err(Error::InfeasibleSizes(format!(
            "gamma_c={gamma_c} outside [0, 1)"
        )));
    }
    let corrupt_count = (gamma_c * m as f64).round() as usize;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let rows = match params.row_sampling {
        RowSampling::UniformSubset => IndexSet::sample_uniform(n, m, &mut rng)?,
        RowSampling::Bernoulli => {
            let rho = m as f64 / n as f64;
            let drawn = IndexSet::sample_bernoulli(n, rho, &mut rng);
            if drawn.is_empty() {
                IndexSet::sample_uniform(n, 1, &mut rng)?
            } else {
                drawn
            }
        }
    };
    let m_eff = rows.len();
    let operator = PartialFourierOperator::new(n, rows)?;
    let corrupt_count = match params.row_sampling {
        RowSampling::UniformSubset => corrupt_count,
        RowSampling::Bernoulli => (gamma_c * m_eff as f64).round() as usize,
    };
    if corrupt_count > m_eff {
        return Err(Error::InfeasibleSizes(format!(
            "corruption count {corrupt_count} exceeds m={m_eff}"
        )));
    }

    // signal support and values
    let s_x = match &params.x_support {
        Some(s) => {
            if s.ambient() != n || s.len() != k {
                return Err(Error::InfeasibleSizes(
                    "supplied signal support inconsistent with (n, k)".into(),
                ));
            }
            s.clone()
        }
        None => IndexSet::sample_uniform(n, k, &mut rng)?,
    };
    let x_vals: Vec<Complex64> = match &params.x_values {
        Some(v) => {
            if v.len() != k {
                return Err(Error::InfeasibleSizes(
                    "supplied signal values inconsistent with k".into(),
                ));
            }
            v.clone()
        }
        None => (0..k)
            .map(|_| {
                let mag = rng.gen_range(0.1..=10.0);
                let sign = match params.x_model {
                    SignalModel::ArbitraryFixed => 1.0,
                    SignalModel::RandomSigns => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                Complex64::new(mag * sign, 0.0)
            })
            .collect(),
    };
    if x_vals.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::InfeasibleSizes(
            "signal values on the support must be nonzero".into(),
        ));
    }
    let x0 = cvec::scatter(&x_vals, &s_x, n);

    // corruption support and values
    let s_f = IndexSet::sample_uniform(m_eff, corrupt_count, &mut rng)?;
    let f_vals: Vec<Complex64> = match &params.f_signs {
        SignModel::Rademacher => (0..corrupt_count)
            .map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        SignModel::Steinhaus => (0..corrupt_count)
            .map(|_| {
                let theta = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                Complex64::from_polar(1.0, theta)
            })
            .collect(),
        SignModel::Fixed(vals) => {
            if vals.len() != corrupt_count {
                return Err(Error::InfeasibleSizes(
                    "fixed corruption values inconsistent with round(gamma_c * m)".into(),
                ));
            }
            vals.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
        }
        SignModel::AdversarialConstant => {
            vec![Complex64::new(1.0, 0.0); corrupt_count]
        }
    };
    if f_vals.iter().any(|z| z.norm() == 0.0) {
        return Err(Error::InfeasibleSizes(
            "corruption values on the support must be nonzero".into(),
        ));
    }
    let f0 = cvec::scatter(&f_vals, &s_f, m_eff);

    let mut b = operator.apply(&x0)?;
    for (bi, fi) in b.iter_mut().zip(&f0) {
        *bi += fi;
    }

    Ok(ProblemInstance {
        n,
        operator,
        x0,
        f0,
        s_x,
        s_f,
        b,
        gamma_c,
        seed,
    })
}

/// Zeroes the corruption outside `keep` and recomputes the measurements.
/// `keep` must be a subset of the instance's corruption support.
pub fn trim_corruption(inst: &ProblemInstance, keep: &IndexSet) -> Result<ProblemInstance> {
    if !keep.is_subset_of(&inst.s_f) {
        return Err(Error::KeepNotSubset);
    }
    let mut f0 = cvec::zeros(inst.m());
    for i in keep.iter() {
        f0[i] = inst.f0[i];
    }
    let mut b = inst.operator.apply(&inst.x0)?;
    for (bi, fi) in b.iter_mut().zip(&f0) {
        *bi += fi;
    }
    Ok(ProblemInstance {
        n: inst.n,
        operator: inst.operator.clone(),
        x0: inst.x0.clone(),
        f0,
        s_x: inst.s_x.clone(),
        s_f: keep.clone(),
        b,
        gamma_c: keep.len() as f64 / inst.m() as f64,
        seed: inst.seed,
    })
}

/// Serialized replay form. Measurements are recomputed on load, so the file
/// stores only what determines the instance.
#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    format: String,
    n: usize,
    m: usize,
    rows: Vec<usize>,
    s_x: Vec<usize>,
    x_values: Vec<(f64, f64)>,
    s_f: Vec<usize>,
    f_values: Vec<(f64, f64)>,
    gamma_c: f64,
    seed: u64,
}

const INSTANCE_FORMAT: &str = "corrsense-instance-v1";

pub fn instance_to_json(inst: &ProblemInstance) -> String {
    let file = InstanceFile {
        format: INSTANCE_FORMAT.to_string(),
        n: inst.n,
        m: inst.m(),
        rows: inst.operator.rows().indices().to_vec(),
        s_x: inst.s_x.indices().to_vec(),
        x_values: inst
            .s_x
            .iter()
            .map(|i| (inst.x0[i].re, inst.x0[i].im))
            .collect(),
        s_f: inst.s_f.indices().to_vec(),
        f_values: inst
            .s_f
            .iter()
            .map(|i| (inst.f0[i].re, inst.f0[i].im))
            .collect(),
        gamma_c: inst.gamma_c,
        seed: inst.seed,
    };
    serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("instance file: {e}")))?;
    if file.format != INSTANCE_FORMAT {
        return Err(Error::Config(format!(
            "unsupported instance format {:?}",
            file.format
        )));
    }
    let rows = IndexSet::new(file.rows, file.n)?;
    if rows.len() != file.m {
        return Err(Error::Config("row count disagrees with m".into()));
    }
    let operator = PartialFourierOperator::new(file.n, rows)?;
    let s_x = IndexSet::new(file.s_x, file.n)?;
    let s_f = IndexSet::new(file.s_f, file.m)?;
    if s_x.len() != file.x_values.len() || s_f.len() != file.f_values.len() {
        return Err(Error::Config("support/value length mismatch".into()));
    }
    let x_vals: Vec<Complex64> = file
        .x_values
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let f_vals: Vec<Complex64> = file
        .f_values
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let x0 = cvec::scatter(&x_vals, &s_x, file.n);
    let f0 = cvec::scatter(&f_vals, &s_f, file.m);
    let mut b = operator.apply(&x0)?;
    for (bi, fi) in b.iter_mut().zip(&f0) {
        *bi += fi;
    }
    Ok(ProblemInstance {
        n: file.n,
        operator,
        x0,
        f0,
        s_x,
        s_f,
        b,
        gamma_c: file.gamma_c,
        seed: file.seed,
    })
}

/// Stable seed mixing for per-trial generator streams (splitmix64 chain).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    let mut acc = splitmix64(base);
    for &p in parts {
        acc = splitmix64(acc ^ p.wrapping_mul(0x9E3779B97F4A7C15));
    }
    acc
}
