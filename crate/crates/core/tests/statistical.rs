//! Monte Carlo invariants that need more trials than a unit test: sampling
//! model equivalence and the rank/Schur behavior of random instances.

use corrsense::cert::full_rank_check;
use corrsense::instance::{make_instance, InstanceParams, RowSampling};
use corrsense::solver::{solve, SolverOptions};

/// Recovery frequency agrees between the uniform-subset and Bernoulli row
/// models at matched expected cardinality, within 3-sigma Monte Carlo error.
#[test]
fn sampling_models_agree_on_recovery_frequency() {
    let lambda = 0.5;
    let trials = 200u64;
    let mut hits_uniform = 0usize;
    let mut hits_bernoulli = 0usize;
    for seed in 0..trials {
        let mut params = InstanceParams::new(31, 20, 2, 0.2);
        params.row_sampling = RowSampling::UniformSubset;
        let inst = make_instance(&params, 7000 + seed).unwrap();
        let mut r = solve(&inst.operator, &inst.b, &SolverOptions::new(lambda)).unwrap();
        if r.judge(&inst.x0, &inst.f0).exact {
            hits_uniform += 1;
        }

        let mut params = InstanceParams::new(31, 20, 2, 0.2);
        params.row_sampling = RowSampling::Bernoulli;
        let inst = make_instance(&params, 9000 + seed).unwrap();
        let mut r = solve(&inst.operator, &inst.b, &SolverOptions::new(lambda)).unwrap();
        if r.judge(&inst.x0, &inst.f0).exact {
            hits_bernoulli += 1;
        }
    }
    let pu = hits_uniform as f64 / trials as f64;
    let pb = hits_bernoulli as f64 / trials as f64;
    let sigma = (pu * (1.0 - pu) / trials as f64 + pb * (1.0 - pb) / trials as f64).sqrt();
    assert!(
        (pu - pb).abs() <= 3.0 * sigma,
        "uniform {pu} vs bernoulli {pb}, 3-sigma {}",
        3.0 * sigma
    );
    // the cell probability should be interior so the comparison has power
    assert!(pu > 0.05 && pu < 0.999, "degenerate cell p={pu}");
}

/// The stacked active columns stay full rank over random instances, and the
/// complementary signal gram stays above half its expected scale in at least
/// 95 of 100 seeds.
#[test]
fn full_rank_holds_and_schur_floor_is_typical() {
    let lambda = 0.7;
    let mut above_floor = 0usize;
    for seed in 1..=100u64 {
        let params = InstanceParams::new(31, 20, 2, 0.2);
        let inst = make_instance(&params, seed).unwrap();
        let report = full_rank_check(&inst, lambda).unwrap();
        assert!(report.ok, "rank deficiency at seed {seed}");
        if report.schur_min_eig >= report.schur_floor {
            above_floor += 1;
        }
    }
    assert!(
        above_floor >= 95,
        "schur floor met only {above_floor}/100 times"
    );
}
