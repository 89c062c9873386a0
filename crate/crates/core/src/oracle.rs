//! Independent brute-force checks.
//!
//! The see-saw search only ever falsifies block positivity: a negative value
//! comes with a product witness, a nonnegative one proves nothing.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{nege, SCO_TOL};
use crate::discrimination::{discriminate, Branch, ClassParameter};
use crate::error::{Error, Result};
use crate::linalg::{c64, eig_hermitian, CMatrix, CVector, Dims, HermitianOperator, PureStateVector};
use crate::multicopy::copies_suffice;
use crate::random::{child_seed, haar_state, haar_unitary, seeded};

/// A value below this certifies `M ∉ SEP*`.
pub const FALSIFY_TOL: f64 = 1e-9;
/// Audit threshold for see-saw minima of produced elements.
pub const AUDIT_SEESAW_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 1000,
            convergence_tol: 1e-12,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("see-saw parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Best product expectation found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductMinimum {
    /// `<a⊗b|M|a⊗b>` at the returned witness; an upper bound on the true minimum.
    pub value: f64,
    pub witness_a: PureStateVector,
    pub witness_b: PureStateVector,
    pub restarts: usize,
}

impl ProductMinimum {
    /// True when the witness proves `M` is not block positive.
    pub fn falsifies(&self) -> bool {
        self.value < -FALSIFY_TOL
    }

    pub fn describe(&self) -> String {
        if self.falsifies() {
            format!("not block positive: product expectation {:e}", self.value)
        } else {
            format!("no counterexample found (restarts = {})", self.restarts)
        }
    }
}

/// Objective values of a single see-saw run, one per half-step.
#[derive(Debug, Clone)]
pub struct SeesawTrace {
    pub values: Vec<f64>,
    pub a: CVector,
    pub b: CVector,
}

/// `(I ⊗ b)^dagger M (I ⊗ b)`, an operator on A.
fn contract_b(m: &CMatrix, b: &CVector, da: usize, db: usize) -> HermitianOperator {
    let out = CMatrix::from_fn(da, da, |i, k| {
        let mut acc = c64(0.0, 0.0);
        for j in 0..db {
            for l in 0..db {
                acc += b[j].conj() * m[(i * db + j, k * db + l)] * b[l];
            }
        }
        acc
    });
    HermitianOperator::from_hermitian_part(out, Dims::Single(da))
}

/// `(a ⊗ I)^dagger M (a ⊗ I)`, an operator on B.
fn contract_a(m: &CMatrix, a: &CVector, da: usize, db: usize) -> HermitianOperator {
    let out = CMatrix::from_fn(db, db, |j, l| {
        let mut acc = c64(0.0, 0.0);
        for i in 0..da {
            for k in 0..da {
                acc += a[i].conj() * m[(i * db + j, k * db + l)] * a[k];
            }
        }
        acc
    });
    HermitianOperator::from_hermitian_part(out, Dims::Single(db))
}

fn product_expectation(m: &HermitianOperator, a: &CVector, b: &CVector) -> f64 {
    m.expectation(&a.kronecker(b))
}

/// Alternating minimum-eigenvector updates from a fixed starting pair.
pub fn seesaw_trace(m: &HermitianOperator, a0: &CVector, b0: &CVector, cfg: &SeesawConfig) -> Result<SeesawTrace> {
    cfg.validate()?;
    let (da, db) = m.dims().bipartite().ok_or(Error::NotBipartite)?;
    if a0.len() != da || b0.len() != db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: a0.len() * b0.len(),
        });
    }
    let mat = m.matrix();
    let mut a = a0.unscale(a0.norm());
    let mut b = b0.unscale(b0.norm());
    let mut values = vec![product_expectation(m, &a, &b)];
    for _ in 0..cfg.max_iters {
        let prev = *values.last().expect("trace starts non-empty");
        let ea = eig_hermitian(&contract_b(mat, &b, da, db));
        a = ea.min_vector();
        values.push(ea.min_value());
        let eb = eig_hermitian(&contract_a(mat, &a, da, db));
        b = eb.min_vector();
        values.push(eb.min_value());
        if prev - eb.min_value() < cfg.convergence_tol {
            break;
        }
    }
    Ok(SeesawTrace { values, a, b })
}

/// Minimizes `<a⊗b|M|a⊗b>` over product unit vectors with Haar-random restarts.
///
/// Restarts run in parallel; the reduction keeps the lowest value and breaks
/// ties by restart index, so results depend only on the seed.
pub fn min_product_expectation(m: &HermitianOperator, cfg: &SeesawConfig) -> Result<ProductMinimum> {
    cfg.validate()?;
    let (da, db) = m.dims().bipartite().ok_or(Error::NotBipartite)?;
    let runs: Vec<(f64, CVector, CVector)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded(child_seed(cfg.seed, r as u64));
            let a0 = haar_state(&mut rng, da);
            let b0 = haar_state(&mut rng, db);
            let trace = seesaw_trace(m, &a0, &b0, cfg)?;
            let value = product_expectation(m, &trace.a, &trace.b);
            Ok((value, trace.a, trace.b))
        })
        .collect::<Result<_>>()?;
    let (value, a, b) = runs
        .into_iter()
        .reduce(|best, next| if next.0 < best.0 { next } else { best })
        .expect("at least one restart");
    Ok(ProductMinimum {
        value,
        witness_a: PureStateVector::single(a),
        witness_b: PureStateVector::single(b),
        restarts: cfg.restarts,
    })
}

/// First `n` in `1..=cap` with `x = y = c^n` meeting the class condition.
pub fn scan_min_copies(c: f64, class: ClassParameter, cap: u64) -> Result<Option<u64>> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: "[0, 1)",
        });
    }
    for n in 1..=cap {
        if copies_suffice(c, n, class)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// One randomized end-to-end check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditInstance {
    pub index: u64,
    pub seed: u64,
    pub class: ClassParameter,
    pub dims: [usize; 2],
    pub alpha1: f64,
    pub alpha2: f64,
    pub branch: Option<Branch>,
    pub guaranteed: bool,
    pub unit_residual: f64,
    pub zero_error_residual: f64,
    pub nege: [f64; 2],
    pub max_sco: f64,
    pub seesaw_min: [f64; 2],
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub seed: u64,
    pub instances: Vec<AuditInstance>,
}

impl AuditReport {
    pub fn failures(&self) -> usize {
        self.instances.iter().filter(|i| !i.passed).count()
    }

    /// One JSON object per line, in instance order.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for inst in &self.instances {
            out.push_str(&serde_json::to_string(inst).expect("audit instance serializes"));
            out.push('\n');
        }
        out
    }
}

/// Which class families the audit draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditFamily {
    #[default]
    Mixed,
    Ms,
    Mks,
}

/// Random class parameter and alphas satisfying the class condition.
fn sample_instance<R: Rng>(rng: &mut R, family: AuditFamily) -> (ClassParameter, f64, f64) {
    let u: f64 = rng.random();
    let use_ms = match family {
        AuditFamily::Mixed => rng.random_bool(0.5),
        AuditFamily::Ms => true,
        AuditFamily::Mks => false,
    };
    let class = if use_ms {
        ClassParameter::Ms { s: 0.5 * (1.0 - u) }
    } else {
        ClassParameter::MKs { t: 1.0 - u }
    };
    let k = match class {
        ClassParameter::Ms { s } => 4.0 * s * s,
        ClassParameter::MKs { t } => t,
    };
    if rng.random_bool(0.05) {
        let other: f64 = rng.random();
        return if rng.random_bool(0.5) { (class, 1.0, other) } else { (class, other, 1.0) };
    }
    let alpha1 = 1.0 - rng.random::<f64>();
    // (1 - a1)(1 - a2) <= k a1 a2  <=>  a2 >= (1 - a1) / ((1 - a1) + k a1)
    let floor = (1.0 - alpha1) / ((1.0 - alpha1) + k * alpha1);
    let alpha2 = floor + (1.0 - floor) * rng.random::<f64>();
    (class, alpha1, alpha2)
}

/// Local pair `(v1, v2)` with `|<v1|v2>|^2 = 1 - alpha` in a random frame.
fn embedded_pair<R: Rng>(rng: &mut R, d: usize, alpha: f64) -> (PureStateVector, PureStateVector) {
    let u = haar_unitary(rng, d);
    let phase = c64(0.0, rng.random::<f64>() * std::f64::consts::TAU).exp();
    let mut second = CVector::zeros(d);
    second[0] = c64((1.0 - alpha).sqrt(), 0.0) * phase;
    second[1] = c64(alpha.sqrt(), 0.0) * phase;
    (
        PureStateVector::single(u.column(0).into_owned()),
        PureStateVector::single(&u * second),
    )
}

fn run_instance(index: u64, seed: u64, family: AuditFamily, seesaw: &SeesawConfig) -> AuditInstance {
    let mut rng = seeded(seed);
    let (class, alpha1, alpha2) = sample_instance(&mut rng, family);
    let da = rng.random_range(2..=4);
    let db = rng.random_range(2..=4);
    let (a1, a2) = embedded_pair(&mut rng, da, alpha1);
    let (b1, b2) = embedded_pair(&mut rng, db, alpha2);

    let mut inst = AuditInstance {
        index,
        seed,
        class,
        dims: [da, db],
        alpha1,
        alpha2,
        branch: None,
        guaranteed: false,
        unit_residual: f64::NAN,
        zero_error_residual: f64::NAN,
        nege: [f64::NAN; 2],
        max_sco: f64::NAN,
        seesaw_min: [f64::NAN; 2],
        passed: false,
        failures: Vec::new(),
    };
    let result = match discriminate(&a1, &a2, &b1, &b2, class) {
        Ok(r) => r,
        Err(e) => {
            inst.failures.push(format!("discriminate: {e}"));
            return inst;
        }
    };
    inst.guaranteed = result.guaranteed;
    let (Some(cert), Some(report), Some(elements)) = (&result.certificate, &result.report, &result.elements) else {
        inst.failures.push("condition holds but no measurement was produced".into());
        return inst;
    };
    inst.branch = Some(cert.branch);
    inst.unit_residual = report.unit.residual;
    inst.zero_error_residual = report.zero_error.residual;
    inst.max_sco = cert.cone_evidence[0].max_sco.max(cert.cone_evidence[1].max_sco);
    if !report.passed {
        inst.failures.push(report.summary());
    }
    let s = class.s();
    for (i, m) in elements.iter().enumerate() {
        inst.nege[i] = nege(m);
        if matches!(class, ClassParameter::Ms { .. }) && inst.nege[i] > s + crate::cones::NEGE_TOL {
            inst.failures.push(format!("nege(M{}) = {} exceeds s = {s}", i + 1, inst.nege[i]));
        }
        let cfg = SeesawConfig {
            seed: child_seed(seed, 1000 + i as u64),
            ..*seesaw
        };
        match min_product_expectation(m, &cfg) {
            Ok(min) => {
                inst.seesaw_min[i] = min.value;
                if min.value < -AUDIT_SEESAW_TOL {
                    inst.failures.push(format!("M{}: {}", i + 1, min.describe()));
                }
            }
            Err(e) => inst.failures.push(format!("see-saw: {e}")),
        }
    }
    if matches!(class, ClassParameter::MKs { .. }) && inst.max_sco > s + SCO_TOL {
        inst.failures.push(format!("term sco {} exceeds s = {s}", inst.max_sco));
    }
    inst.passed = inst.failures.is_empty();
    inst
}

/// Runs `count` random instances through the whole pipeline.
pub fn randomized_cert_audit(count: u64, seed: u64) -> Result<AuditReport> {
    randomized_cert_audit_with(count, seed, AuditFamily::Mixed, &SeesawConfig::default())
}

pub fn randomized_cert_audit_with(
    count: u64,
    seed: u64,
    family: AuditFamily,
    seesaw: &SeesawConfig,
) -> Result<AuditReport> {
    if count == 0 {
        return Err(Error::EmptyAudit);
    }
    seesaw.validate()?;
    let instances = (0..count)
        .into_par_iter()
        .map(|i| run_instance(i, child_seed(seed, i), family, seesaw))
        .collect();
    Ok(AuditReport { seed, instances })
}
