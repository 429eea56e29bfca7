//! Named verifier batches behind `verify --suite <name>`.
//!
//! Each suite runs a fixed set of checks on seeded random instances;
//! instance `i` draws from stream `i` of the master seed, so batches are
//! embarrassingly parallel and the reports are identical for any worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{ChaosExpansion, CoefShape, TruncationBox, WeightSystem};
use crate::multiindex::MultiIndex;
use crate::verify::bounds::{
    check_md_sufficient, check_thm_ks, check_thm_ou, check_thm_ps, check_thm_ps1, ou_r_sequence,
    ps1_sequences,
};
use crate::verify::duality::{check_duality_weighted, mc_adjointness, DualityVariant};
use crate::verify::instances::{hypothesis_scaled, instance_rng, unit_scaled};
use crate::verify::mc::{mc_orthonormality, mc_parseval};
use crate::verify::pk::{check_pk_inclusion, factorial_inequality_scan};
use crate::verify::series::{check_binom_sum, check_exp_sum, check_geom_sum, check_two_n_sum};
use crate::verify::VerifyError;

/// Instances per randomized suite.
pub const SUITE_INSTANCES: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Series,
    MdSufficient,
    Ps,
    Ks,
    Ps1,
    Ou,
    Duality,
    Mc,
    Pk,
}

impl SuiteName {
    pub const ALL: [SuiteName; 9] = [
        SuiteName::Series,
        SuiteName::MdSufficient,
        SuiteName::Ps,
        SuiteName::Ks,
        SuiteName::Ps1,
        SuiteName::Ou,
        SuiteName::Duality,
        SuiteName::Mc,
        SuiteName::Pk,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SuiteName::Series => "series",
            SuiteName::MdSufficient => "md-sufficient",
            SuiteName::Ps => "ps",
            SuiteName::Ks => "ks",
            SuiteName::Ps1 => "ps1",
            SuiteName::Ou => "ou",
            SuiteName::Duality => "duality",
            SuiteName::Mc => "mc",
            SuiteName::Pk => "pk",
        }
    }
}

impl std::str::FromStr for SuiteName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SuiteName::ALL
            .iter()
            .find(|name| name.as_str() == s)
            .copied()
            .ok_or_else(|| {
                format!(
                    "unknown suite '{s}'; expected one of {}",
                    SuiteName::ALL.map(|n| n.as_str()).join(", ")
                )
            })
    }
}

/// One pass/fail line per check, plus the full report for the JSON
/// artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub seed: u64,
    pub total: usize,
    pub failed: usize,
    pub pass: bool,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteOutcome {
    fn collect(suite: SuiteName, seed: u64, checks: Vec<CheckOutcome>) -> Self {
        let failed = checks.iter().filter(|c| !c.pass).count();
        Self {
            suite: suite.as_str().to_string(),
            seed,
            total: checks.len(),
            failed,
            pass: failed == 0,
            checks,
        }
    }
}

fn outcome<T: Serialize>(id: String, pass: bool, report: &T) -> CheckOutcome {
    CheckOutcome {
        id,
        pass,
        detail: serde_json::to_value(report).expect("reports serialize"),
    }
}

fn dyadic_q(k: usize) -> Vec<f64> {
    (1..=k).map(|j| 2f64.powi(j as i32)).collect()
}

fn boxes(k: u32, tops: &[u32]) -> Vec<TruncationBox> {
    tops.iter().map(|&n| TruncationBox::new(k, n)).collect()
}

fn sqrt2_times(q: &[f64]) -> Vec<f64> {
    q.iter().map(|&x| std::f64::consts::SQRT_2 * x).collect()
}

pub fn run_suite(which: SuiteName, seed: u64) -> Result<SuiteOutcome, VerifyError> {
    let checks = match which {
        SuiteName::Series => series_suite(seed)?,
        SuiteName::MdSufficient => md_sufficient_suite(seed)?,
        SuiteName::Ps => ps_suite(seed)?,
        SuiteName::Ks => ks_suite(seed)?,
        SuiteName::Ps1 => ps1_suite(seed)?,
        SuiteName::Ou => ou_suite(seed)?,
        SuiteName::Duality => duality_suite(seed)?,
        SuiteName::Mc => mc_suite(seed)?,
        SuiteName::Pk => pk_suite(seed)?,
    };
    Ok(SuiteOutcome::collect(which, seed, checks))
}

fn series_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    use rand::Rng;
    let mut checks = Vec::new();

    let r: Vec<f64> = (1..=8).map(|k| 0.5f64.powi(k)).collect();
    let report = check_exp_sum(&r, &boxes(8, &[4, 8, 16, 24]))?;
    checks.push(outcome("exp-sum-dyadic".into(), report.converged, &report));

    let r4: Vec<f64> = (1..=6).map(|k| 0.25f64.powi(k)).collect();
    let report = check_geom_sum(&r4, &MultiIndex::zero(), &boxes(6, &[8, 16, 24]))?;
    checks.push(outcome("geom-sum-zero".into(), report.converged, &report));

    let report = check_geom_sum(&[0.5], &MultiIndex::epsilon(1), &boxes(1, &[16, 32, 64]))?;
    checks.push(outcome("geom-sum-shifted".into(), report.converged, &report));

    let report = check_two_n_sum(2.0, 6, &boxes(6, &[8, 16, 24]))?;
    checks.push(outcome("geom-sum-2n".into(), report.converged, &report));

    let report = check_binom_sum(&[3.0], &MultiIndex::single(1, 2))?;
    checks.push(outcome("binom-sum-square".into(), report.converged, &report));

    for i in 0..SUITE_INSTANCES {
        let mut rng = instance_rng(seed, i);
        let a = MultiIndex::from_dense(&[
            rng.random_range(0..4),
            rng.random_range(0..4),
            rng.random_range(0..4),
        ]);
        let rr: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..2.0)).collect();
        let report = check_binom_sum(&rr, &a)?;
        checks.push(outcome(format!("binom-sum-random-{i}"), report.converged, &report));
    }
    Ok(checks)
}

fn md_sufficient_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(3, 4);
    let q = dyadic_q(3);
    let u_weight = WeightSystem::sequence_power(q.clone(), -1.0)?;
    let v_weight = WeightSystem::sequence_power(sqrt2_times(&q), 1.0)?;
    let reports: Vec<Result<CheckOutcome, VerifyError>> = (0..SUITE_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i);
            let u = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &u_weight, &mut rng);
            let v = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &v_weight, &mut rng);
            let report = check_md_sufficient(&u, &v, &q)?;
            Ok(outcome(format!("md-sufficient-{i}"), report.pass, &report))
        })
        .collect();
    reports.into_iter().collect()
}

fn ps_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(3, 4);
    let q = dyadic_q(3);
    let dual = WeightSystem::sequence_power(q.clone(), -1.0)?;
    let primal = WeightSystem::sequence_power(sqrt2_times(&q), 1.0)?;
    let reports: Vec<Result<Vec<CheckOutcome>, VerifyError>> = (0..SUITE_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i);
            let u = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &dual, &mut rng);
            let v = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &primal, &mut rng);
            let f = hypothesis_scaled(
                CoefShape::Tensor { dx: 2, du: 2 },
                bounds,
                &dual,
                &mut rng,
            );
            let reports = check_thm_ps(&u, &v, &f, &q)?;
            Ok(reports
                .into_iter()
                .map(|r| outcome(format!("{}-{i}", r.theorem_id), r.pass, &r))
                .collect())
        })
        .collect();
    Ok(reports
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect())
}

fn ks_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(3, 4);
    // Two (ell, p) corners; ell <= 0 keeps the composed part provable.
    let params = [(0.0, 1.0), (-0.5, 0.75)];
    let reports: Vec<Result<Vec<CheckOutcome>, VerifyError>> = (0..SUITE_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let (ell, p) = params[(i % 2) as usize];
            let mut rng = instance_rng(seed, i);
            let u = hypothesis_scaled(
                CoefShape::Scalar { dx: 2 },
                bounds,
                &WeightSystem::kondratiev(-1.0, -ell)?,
                &mut rng,
            );
            let v = hypothesis_scaled(
                CoefShape::Scalar { dx: 2 },
                bounds,
                &WeightSystem::kondratiev(1.0, ell + p)?,
                &mut rng,
            );
            let f = hypothesis_scaled(
                CoefShape::Tensor { dx: 2, du: 2 },
                bounds,
                &WeightSystem::kondratiev(-1.0, ell)?,
                &mut rng,
            );
            let reports = check_thm_ks(&u, &v, &f, ell, p)?;
            Ok(reports
                .into_iter()
                .map(|r| outcome(format!("{}-{i}", r.theorem_id), r.pass, &r))
                .collect())
        })
        .collect();
    Ok(reports
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect())
}

fn ps1_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(3, 4);
    let p: Vec<f64> = vec![2.0, 2.0, 2.0];
    let c: Vec<f64> = (1..=3).map(|k| 0.25f64.powi(k)).collect();
    let (q, r) = ps1_sequences(&p, &c)?;
    let u_w = WeightSystem::sequence_power(p.clone(), 1.0)?;
    let f_w = WeightSystem::sequence_power(q.clone(), 1.0)?;
    let v_w = WeightSystem::sequence_power(r.clone(), -1.0)?;
    let mut checks: Vec<CheckOutcome> = {
        let reports: Vec<Result<Vec<CheckOutcome>, VerifyError>> = (0..SUITE_INSTANCES)
            .into_par_iter()
            .map(|i| {
                let mut rng = instance_rng(seed, i);
                let u = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &u_w, &mut rng);
                let f = hypothesis_scaled(
                    CoefShape::Tensor { dx: 2, du: 2 },
                    bounds,
                    &f_w,
                    &mut rng,
                );
                let v = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &v_w, &mut rng);
                let reports = check_thm_ps1(&u, &f, &v, &p, &q, &r)?;
                Ok(reports
                    .into_iter()
                    .map(|rep| outcome(format!("{}-{i}", rep.theorem_id), rep.pass, &rep))
                    .collect())
            })
            .collect();
        reports
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .collect()
    };

    // The one-dimensional convention with squared weights (1, 1, 1/2):
    // sequence weights p = q = 1, r = 1/sqrt(2).
    let bounds_1d = TruncationBox::new(1, 8);
    let (q1, r1) = (vec![1.0], vec![std::f64::consts::FRAC_1_SQRT_2]);
    let p1 = vec![1.0];
    let mut rng = instance_rng(seed, SUITE_INSTANCES);
    let u = unit_scaled(CoefShape::Scalar { dx: 1 }, bounds_1d, &mut rng);
    let f = hypothesis_scaled(
        CoefShape::Tensor { dx: 1, du: 1 },
        bounds_1d,
        &WeightSystem::sequence_power(q1.clone(), 1.0)?,
        &mut rng,
    );
    let v = hypothesis_scaled(
        CoefShape::Scalar { dx: 1 },
        bounds_1d,
        &WeightSystem::sequence_power(r1.clone(), -1.0)?,
        &mut rng,
    );
    for rep in check_thm_ps1(&u, &f, &v, &p1, &q1, &r1)? {
        checks.push(outcome(
            format!("{}-oned-squared-convention", rep.theorem_id),
            rep.pass,
            &rep,
        ));
    }
    Ok(checks)
}

fn ou_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(2, 4);
    // Squared-weight convention (1, 2, 1/2) per dimension: sequence
    // weights p = 1, q = sqrt(2), r from the relation.
    let p = vec![1.0, 1.0];
    let q = vec![2f64.sqrt(), 2f64.sqrt()];
    let r = ou_r_sequence(&p, &q)?;
    let u_w = WeightSystem::sequence_power(p.clone(), 1.0)?;
    let v_w = WeightSystem::sequence_power(q.clone(), 1.0)?;
    let reports: Vec<Result<CheckOutcome, VerifyError>> = (0..SUITE_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i);
            let u = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &u_w, &mut rng);
            let v = hypothesis_scaled(CoefShape::Scalar { dx: 2 }, bounds, &v_w, &mut rng);
            let report = check_thm_ou(&u, &v, &p, &q, &r)?;
            Ok(outcome(format!("ou-seq-relation-{i}"), report.pass, &report))
        })
        .collect();
    reports.into_iter().collect()
}

fn duality_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let bounds = TruncationBox::new(3, 3);
    let p = vec![2.0, 2.0, 2.0];
    let c: Vec<f64> = (1..=3).map(|k| 0.25f64.powi(k)).collect();
    let (q, r) = ps1_sequences(&p, &c)?;
    let variants = [
        DualityVariant::Exact,
        DualityVariant::Kondratiev { ell: -0.5, p: 1.0 },
        DualityVariant::SequencePower { p, q, r },
    ];
    let reports: Vec<Result<Vec<CheckOutcome>, VerifyError>> = (0..SUITE_INSTANCES)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i);
            let u = unit_scaled(CoefShape::Scalar { dx: 2 }, bounds, &mut rng);
            let f = unit_scaled(CoefShape::Tensor { dx: 2, du: 2 }, bounds, &mut rng);
            let v = unit_scaled(CoefShape::Scalar { dx: 2 }, bounds, &mut rng);
            let mut out = Vec::new();
            for variant in &variants {
                let report = check_duality_weighted(&u, &f, &v, variant)?;
                out.push(outcome(
                    format!("{}-{i}", report.identity_id),
                    report.pass,
                    &report,
                ));
            }
            Ok(out)
        })
        .collect();
    Ok(reports
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect())
}

/// Sample count for the Monte Carlo suite.
pub const MC_SAMPLES: u64 = 1_000_000;

fn mc_suite(seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let mut checks = Vec::new();

    let ortho = mc_orthonormality(TruncationBox::new(2, 2), MC_SAMPLES, seed);
    checks.push(outcome("mc-orthonormality".into(), ortho.pass, &ortho));

    let bounds = TruncationBox::new(2, 3);
    let v = unit_scaled(CoefShape::Scalar { dx: 2 }, bounds, &mut instance_rng(seed, 1));
    let parseval = mc_parseval(&v, MC_SAMPLES, seed.wrapping_add(1))?;
    checks.push(outcome("mc-parseval".into(), parseval.pass, &parseval));

    let mut rng = instance_rng(seed, 2);
    let u = unit_scaled(CoefShape::Scalar { dx: 2 }, TruncationBox::new(2, 2), &mut rng);
    let f = unit_scaled(
        CoefShape::Tensor { dx: 1, du: 2 },
        TruncationBox::new(2, 2),
        &mut rng,
    );
    let w = unit_scaled(CoefShape::Scalar { dx: 1 }, TruncationBox::new(2, 2), &mut rng);
    let adj = mc_adjointness(&u, &f, &w, MC_SAMPLES, seed.wrapping_add(2))?;
    checks.push(outcome("mc-adjointness-general".into(), adj.pass, &adj));

    let wn = ChaosExpansion::white_noise(2);
    let adj_wn = mc_adjointness(&wn, &f, &w, MC_SAMPLES, seed.wrapping_add(3))?;
    checks.push(outcome("mc-adjointness-white-noise".into(), adj_wn.pass, &adj_wn));

    Ok(checks)
}

fn pk_suite(_seed: u64) -> Result<Vec<CheckOutcome>, VerifyError> {
    let mut checks = Vec::new();
    let r1 = check_pk_inclusion(1, 1.0, 1.0, &[2.0], &[4, 8, 16, 32])?;
    checks.push(outcome("pk-inclusion-k1".into(), r1.bounded, &r1));
    let r2 = check_pk_inclusion(2, 1.0, 1.0, &[2.0, 3.0], &[4, 8, 16, 32])?;
    checks.push(outcome("pk-inclusion-k2".into(), r2.bounded, &r2));
    let r3 = check_pk_inclusion(2, 0.5, 0.75, &[1.5, 2.0], &[4, 8, 16])?;
    checks.push(outcome("pk-inclusion-fractional".into(), r3.bounded, &r3));

    let scan = factorial_inequality_scan(4, 8);
    checks.push(outcome(
        "factorial-inequality-corrected-reading".into(),
        scan.counterexamples.is_empty(),
        &scan,
    ));
    Ok(checks)
}
