//! Perfect discrimination of two product pure states with `M_s` or `M(K_s)`.
//!
//! Each measurement has the form `M_i = T_i + Γ(T_i)` with `T_i` positive
//! semidefinite, built in the canonical 2x2 block and padded to the full space.

use serde::{Deserialize, Serialize};

use crate::cones::{class_membership, nege, ConeCertificate, Ks0Decomp, RankOneTerm};
use crate::error::{Error, Result};
use crate::linalg::{
    c64, canonical_reduction, max_abs, partial_transpose, serde_complex, CMatrix, CVector, CanonicalForm, Dims,
    HermitianOperator, Kron, PureStateVector,
};

/// Additive slack on the sufficient inequalities.
pub const CONDITION_TOL: f64 = 1e-12;
/// Threshold for `alpha_i = 1` and `gamma = 1` branch selection.
pub const BRANCH_TOL: f64 = 1e-9;
/// Tolerance for the unit and zero-error conditions.
pub const VERIFY_TOL: f64 = 1e-9;

/// Target measurement class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClass", into = "RawClass")]
pub enum ClassParameter {
    /// Elements in `SEP*` with `nege <= s`, `s ∈ [0, 1/2]`.
    Ms { s: f64 },
    /// Elements in `K_s` with `s = sqrt(t) / (1 + t)`, `t ∈ [0, 1]`.
    MKs { t: f64 },
}

#[derive(Serialize, Deserialize)]
struct RawClass {
    class: String,
    s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
}

impl TryFrom<RawClass> for ClassParameter {
    type Error = Error;

    fn try_from(raw: RawClass) -> Result<Self> {
        match (raw.class.as_str(), raw.t) {
            ("ms", None) => ClassParameter::ms(raw.s),
            ("mks", Some(t)) => {
                let class = ClassParameter::mks(t)?;
                if (class.s() - raw.s).abs() > 1e-12 {
                    return Err(Error::OutOfRange {
                        name: "s",
                        value: raw.s,
                        range: "sqrt(t)/(1+t)",
                    });
                }
                Ok(class)
            }
            _ => Err(Error::InvalidConfig(format!("unknown class {:?}", raw.class))),
        }
    }
}

impl From<ClassParameter> for RawClass {
    fn from(c: ClassParameter) -> Self {
        RawClass {
            class: c.label().to_string(),
            s: c.s(),
            t: c.t(),
        }
    }
}

fn check_unit_interval(name: &'static str, value: f64, hi: f64, range: &'static str) -> Result<()> {
    if !(0.0..=hi).contains(&value) {
        return Err(Error::OutOfRange { name, value, range });
    }
    Ok(())
}

/// `sqrt(t) / (1 + t)`.
pub fn s_from_t(t: f64) -> f64 {
    t.sqrt() / (1.0 + t)
}

impl ClassParameter {
    pub fn ms(s: f64) -> Result<Self> {
        check_unit_interval("s", s, 0.5, "[0, 1/2]")?;
        Ok(ClassParameter::Ms { s })
    }

    pub fn mks(t: f64) -> Result<Self> {
        check_unit_interval("t", t, 1.0, "[0, 1]")?;
        Ok(ClassParameter::MKs { t })
    }

    pub fn s(&self) -> f64 {
        match *self {
            ClassParameter::Ms { s } => s,
            ClassParameter::MKs { t } => s_from_t(t),
        }
    }

    pub fn t(&self) -> Option<f64> {
        match *self {
            ClassParameter::Ms { .. } => None,
            ClassParameter::MKs { t } => Some(t),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ClassParameter::Ms { .. } => "ms",
            ClassParameter::MKs { .. } => "mks",
        }
    }

    /// The raw class parameter, `s` or `t`.
    pub fn raw(&self) -> f64 {
        match *self {
            ClassParameter::Ms { s } => s,
            ClassParameter::MKs { t } => t,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.raw() == 0.0
    }

    /// The class's sufficient condition on the overlaps.
    pub fn condition(&self, x: f64, y: f64) -> Result<bool> {
        match *self {
            ClassParameter::Ms { s } => thm1_condition(x, y, s),
            ClassParameter::MKs { t } => thm2_condition(x, y, t),
        }
    }
}

/// Local overlaps `x = Tr rho1^A rho2^A`, `y = Tr rho1^B rho2^B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapPair {
    pub x: f64,
    pub y: f64,
}

fn check_overlaps(x: f64, y: f64) -> Result<()> {
    check_unit_interval("x", x, 1.0, "[0, 1]")?;
    check_unit_interval("y", y, 1.0, "[0, 1]")
}

fn holds_with_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CONDITION_TOL
}

/// `xy <= 4 s^2 (1-x)(1-y)`.
pub fn thm1_condition(x: f64, y: f64, s: f64) -> Result<bool> {
    check_overlaps(x, y)?;
    check_unit_interval("s", s, 0.5, "[0, 1/2]")?;
    Ok(holds_with_slack(x * y, 4.0 * s * s * (1.0 - x) * (1.0 - y)))
}

/// `xy <= t (1-x)(1-y)`.
pub fn thm2_condition(x: f64, y: f64, t: f64) -> Result<bool> {
    check_overlaps(x, y)?;
    check_unit_interval("t", t, 1.0, "[0, 1]")?;
    Ok(holds_with_slack(x * y, t * (1.0 - x) * (1.0 - y)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    GammaGreater,
    GammaEqualsOne,
    TrivialOrthogonal,
}

/// The 2x2 local unitaries mapping `T_1` to `T_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitaries {
    #[serde(with = "serde_complex::matrix")]
    pub u_a: CMatrix,
    #[serde(with = "serde_complex::matrix")]
    pub u_b: CMatrix,
}

/// Cone evidence for one element `M_i = T_i + Γ(T_i)` in canonical coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ElementEvidence {
    pub nege: f64,
    pub max_sco: f64,
    /// `P = Q = T_i`.
    pub sep_dual: ConeCertificate,
    /// `psdPart = T_i`, `gammaPart` = rank-one terms of `T_i`.
    pub ks: ConeCertificate,
}

/// A two-outcome measurement together with everything needed to re-check it.
///
/// `t1`, `t2` are in the canonical bases; columns of `basis_a`, `basis_b` give
/// those bases in user coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasurementCertificate {
    pub class: ClassParameter,
    pub branch: Branch,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(with = "serde_complex::matrix")]
    pub basis_a: CMatrix,
    #[serde(with = "serde_complex::matrix")]
    pub basis_b: CMatrix,
    pub t1: HermitianOperator,
    pub t2: HermitianOperator,
    pub rank_one_terms: [Vec<RankOneTerm>; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_unitaries: Option<LocalUnitaries>,
    pub cone_evidence: [ElementEvidence; 2],
}

impl MeasurementCertificate {
    pub fn dims(&self) -> Dims {
        self.t1.dims()
    }

    pub fn local_basis(&self) -> CMatrix {
        self.basis_a.kronecker(&self.basis_b)
    }

    /// `[T_1 + Γ(T_1), T_2 + Γ(T_2)]` in canonical coordinates.
    pub fn canonical_elements(&self) -> Result<[HermitianOperator; 2]> {
        Ok([element_from(&self.t1)?, element_from(&self.t2)?])
    }

    /// The measurement elements in user coordinates.
    pub fn user_elements(&self) -> Result<[HermitianOperator; 2]> {
        let w = self.local_basis();
        let [m1, m2] = self.canonical_elements()?;
        Ok([m1.conjugate_by(&w), m2.conjugate_by(&w)])
    }
}

fn element_from(t: &HermitianOperator) -> Result<HermitianOperator> {
    Ok(t + &partial_transpose(t)?)
}

/// Builds the rank-one terms of `T_1`, `T_2` on the 4-dimensional block.
/// Returns the branch, the terms, and the local unitaries when used.
fn block_terms(cf: &CanonicalForm) -> (Branch, [Vec<RankOneTerm>; 2], Option<LocalUnitaries>) {
    let real = |v: [f64; 4]| CVector::from_iterator(4, v.iter().map(|&x| c64(x, 0.0)));
    if (cf.gamma - 1.0).abs() <= BRANCH_TOL {
        let r = 0.5_f64.sqrt();
        let t1 = vec![RankOneTerm { weight: 1.0, vector: real([r, 0.0, 0.0, -r]) }];
        let t2 = vec![RankOneTerm { weight: 1.0, vector: real([0.0, r, r, 0.0]) }];
        return (Branch::GammaEqualsOne, [t1, t2], None);
    }

    let (a1, a2, b1, b2, g) = (cf.alpha1, cf.alpha2, cf.beta1, cf.beta2, cf.gamma);
    let xi = b1 * b2 / (a1 * a2);
    let v1 = real([1.0, 0.0, 0.0, -xi]);
    let v2 = real([0.0, 1.0, 0.0, -b1 / a1]);
    let v3 = real([0.0, 0.0, 1.0, -b2 / a2]);
    let side = (g - 1.0) / (2.0 * g);
    let weights = [0.5, side, side];

    let local = |a: f64, b: f64| {
        CMatrix::from_row_slice(2, 2, &[c64(b, 0.0), c64(a, 0.0), c64(a, 0.0), c64(-b, 0.0)]).unscale(a.sqrt())
    };
    let u_a = local(a1, b1);
    let u_b = local(a2, b2);
    let w = u_a.kronecker(&u_b);

    let vs = [v1, v2, v3];
    let t1 = vs.iter().zip(weights).map(|(v, wt)| RankOneTerm::normalized(wt, v.clone())).collect();
    let t2 = vs.iter().zip(weights).map(|(v, wt)| RankOneTerm::normalized(wt, &w * v)).collect();
    (Branch::GammaGreater, [t1, t2], Some(LocalUnitaries { u_a, u_b }))
}

fn product_basis_term(weight: f64, da: usize, db: usize, ia: usize, ib: usize) -> RankOneTerm {
    let mut v = CVector::zeros(da * db);
    v[ia * db + ib] = c64(1.0, 0.0);
    RankOneTerm { weight, vector: v }
}

fn embed_block_term(term: &RankOneTerm, db: usize, n: usize) -> RankOneTerm {
    let mut v = CVector::zeros(n);
    for (k, z) in term.vector.iter().enumerate() {
        v[(k / 2) * db + k % 2] = *z;
    }
    RankOneTerm { weight: term.weight, vector: v }
}

fn sum_terms(terms: &[RankOneTerm], dims: Dims) -> HermitianOperator {
    let n = dims.total();
    let mut acc = CMatrix::zeros(n, n);
    for t in terms {
        acc += (&t.vector * t.vector.adjoint()).scale(t.weight);
    }
    HermitianOperator::from_hermitian_part(acc, dims)
}

fn evidence_for(t: &HermitianOperator, terms: &[RankOneTerm]) -> Result<ElementEvidence> {
    let m = element_from(t)?;
    let (da, db) = t.dims().bipartite().ok_or(Error::NotBipartite)?;
    let max_sco = terms.iter().try_fold(0.0_f64, |acc, term| {
        let v = PureStateVector::bipartite(term.vector.clone(), da, db)?;
        Ok::<_, Error>(acc.max(crate::cones::sco(&v)?))
    })?;
    Ok(ElementEvidence {
        nege: nege(&m),
        max_sco,
        sep_dual: ConeCertificate::SepDualSplit { p: t.clone(), q: t.clone() },
        ks: ConeCertificate::KsSplit {
            psd_part: t.clone(),
            gamma_part: Ks0Decomp { terms: terms.to_vec() },
        },
    })
}

/// Constructs `T_1`, `T_2` for a canonical form satisfying the class condition.
///
/// Branches: a local projective measurement when `alpha1 = 1` or `alpha2 = 1`,
/// the fixed matrices when `gamma = 1`, and the three-term construction with
/// `T_2 = (U_A ⊗ U_B) T_1 (U_A ⊗ U_B)^dagger` when `gamma > 1`. Outside the
/// 2x2 block the identity is assigned to `M_2`.
pub fn build_measurement(cf: &CanonicalForm, class: ClassParameter) -> Result<MeasurementCertificate> {
    if cf.alpha1 <= 1e-12 && cf.alpha2 <= 1e-12 {
        return Err(Error::IdenticalStates);
    }
    let (x, y) = cf.overlaps();
    if !class.condition(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0))? {
        return Err(Error::ConditionNotSatisfied);
    }
    let (da, db) = cf.dims;
    let dims = cf.bipartite_dims();
    let n = da * db;

    let (branch, terms, local_unitaries) = if 1.0 - cf.alpha1 <= BRANCH_TOL || 1.0 - cf.alpha2 <= BRANCH_TOL {
        // |0><0| on whichever side is orthogonal, identity on the other
        let on_a = 1.0 - cf.alpha1 <= BRANCH_TOL;
        let mut first = Vec::new();
        let mut second = Vec::new();
        for ia in 0..da {
            for ib in 0..db {
                let hit = if on_a { ia == 0 } else { ib == 0 };
                let term = product_basis_term(0.5, da, db, ia, ib);
                if hit {
                    first.push(term);
                } else {
                    second.push(term);
                }
            }
        }
        (Branch::TrivialOrthogonal, [first, second], None)
    } else {
        if cf.gamma < 1.0 - BRANCH_TOL {
            return Err(Error::ConditionNotSatisfied);
        }
        let (branch, [b1, b2], lu) = block_terms(cf);
        let first = b1.iter().map(|t| embed_block_term(t, db, n)).collect();
        let mut second: Vec<RankOneTerm> = b2.iter().map(|t| embed_block_term(t, db, n)).collect();
        for ia in 0..da {
            for ib in 0..db {
                if ia >= 2 || ib >= 2 {
                    second.push(product_basis_term(0.5, da, db, ia, ib));
                }
            }
        }
        (branch, [first, second], lu)
    };

    let t1 = sum_terms(&terms[0], dims);
    let t2 = sum_terms(&terms[1], dims);
    let cone_evidence = [evidence_for(&t1, &terms[0])?, evidence_for(&t2, &terms[1])?];
    Ok(MeasurementCertificate {
        class,
        branch,
        alpha1: cf.alpha1,
        alpha2: cf.alpha2,
        basis_a: cf.basis_a.clone(),
        basis_b: cf.basis_b.clone(),
        t1,
        t2,
        rank_one_terms: terms,
        local_unitaries,
        cone_evidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub passed: bool,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ConditionResult {
    fn within(residual: f64, tol: f64) -> Self {
        let passed = residual <= tol;
        Self {
            passed,
            residual,
            detail: (!passed).then(|| format!("residual {residual:e} exceeds {tol:e}")),
        }
    }
}

/// Outcome of checking the unit, cone and zero-error conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub class: ClassParameter,
    /// `M_1 + M_2 = I`.
    pub unit: ConditionResult,
    /// Class membership of both elements. The residual is `max_i nege(M_i)`
    /// for `M_s` and the largest term `sco` for `M(K_s)`.
    pub cone: ConditionResult,
    /// `Tr rho_i M_j = δ_ij`.
    pub zero_error: ConditionResult,
    pub nege: [f64; 2],
    /// `probabilities[i][j] = Tr rho_{i+1} M_{j+1}` in user coordinates.
    pub probabilities: [[f64; 2]; 2],
    pub passed: bool,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        let mark = |c: &ConditionResult| if c.passed { "pass" } else { "FAIL" };
        format!(
            "unit (i): {} [{:.3e}]; cone (ii): {} [{:.3e}]; zero-error (iii): {} [{:.3e}]",
            mark(&self.unit),
            self.unit.residual,
            mark(&self.cone),
            self.cone.residual,
            mark(&self.zero_error),
            self.zero_error.residual
        )
    }
}

fn cone_condition(cert: &MeasurementCertificate, elements: &[HermitianOperator; 2], class: ClassParameter) -> ConditionResult {
    let mut residual = 0.0_f64;
    let mut failures = Vec::new();
    for (i, (m, ev)) in elements.iter().zip(&cert.cone_evidence).enumerate() {
        let evidence = match class {
            ClassParameter::Ms { .. } => &ev.sep_dual,
            ClassParameter::MKs { .. } => &ev.ks,
        };
        match class_membership(m, class, Some(evidence)) {
            Ok(membership) => {
                residual = residual.max(match class {
                    ClassParameter::Ms { .. } => membership.nege,
                    ClassParameter::MKs { .. } => ev.max_sco,
                });
                if let crate::cones::Verdict::Invalid { reason } = membership.verdict {
                    failures.push(format!("M{}: {reason}", i + 1));
                }
            }
            Err(e) => failures.push(format!("M{}: {e}", i + 1)),
        }
    }
    ConditionResult {
        passed: failures.is_empty(),
        residual,
        detail: (!failures.is_empty()).then(|| failures.join("; ")),
    }
}

/// Checks a certificate against the two states and a class.
///
/// Failures are report entries; only mismatched shapes are errors.
pub fn verify_measurement(
    cert: &MeasurementCertificate,
    rho1: &HermitianOperator,
    rho2: &HermitianOperator,
    class: ClassParameter,
) -> Result<VerificationReport> {
    let dims = cert.dims();
    let (da, db) = dims.bipartite().ok_or(Error::NotBipartite)?;
    for op in [&cert.t2, rho1, rho2] {
        if op.dim() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: op.dim(),
            });
        }
    }
    if cert.basis_a.shape() != (da, da) || cert.basis_b.shape() != (db, db) {
        return Err(Error::DimensionMismatch {
            expected: da,
            found: cert.basis_a.nrows(),
        });
    }
    let t2 = cert.t2.clone().with_dims(dims)?;
    let canonical = [element_from(&cert.t1)?, element_from(&t2)?];
    let w = cert.local_basis();
    let user = [canonical[0].conjugate_by(&w), canonical[1].conjugate_by(&w)];

    let n = dims.total();
    let identity = CMatrix::identity(n, n);
    let unit_residual = max_abs(&(canonical[0].matrix() + canonical[1].matrix() - &identity))
        .max(max_abs(&(user[0].matrix() + user[1].matrix() - &identity)));
    let unit = ConditionResult::within(unit_residual, VERIFY_TOL);

    let cone = cone_condition(cert, &canonical, class);

    let rhos = [rho1, rho2];
    let mut probabilities = [[0.0; 2]; 2];
    let mut zero_residual = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            let p = rhos[i].inner(&user[j]);
            probabilities[i][j] = p;
            let target = if i == j { 1.0 } else { 0.0 };
            zero_residual = zero_residual.max((p - target).abs());
        }
    }
    let zero_error = ConditionResult::within(zero_residual, VERIFY_TOL);

    let passed = unit.passed && cone.passed && zero_error.passed;
    Ok(VerificationReport {
        class,
        unit,
        cone,
        zero_error,
        nege: [nege(&canonical[0]), nege(&canonical[1])],
        probabilities,
        passed,
    })
}

/// End-to-end answer for one pair of product states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiscriminationResult {
    /// True only when the sufficient condition holds and the built
    /// measurement verified. False makes no claim of impossibility.
    pub guaranteed: bool,
    pub overlaps: OverlapPair,
    pub class: ClassParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MeasurementCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    /// `M_1`, `M_2` in user coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<[HermitianOperator; 2]>,
}

/// `|a ⊗ b><a ⊗ b|`.
pub fn product_state(a: &PureStateVector, b: &PureStateVector) -> HermitianOperator {
    HermitianOperator::projector(&a.kron(b))
}

/// Decides whether `rho_i = |a_i b_i><a_i b_i|` are guaranteed perfectly
/// distinguishable in the class, and if so returns a verified measurement.
pub fn discriminate(
    a1: &PureStateVector,
    a2: &PureStateVector,
    b1: &PureStateVector,
    b2: &PureStateVector,
    class: ClassParameter,
) -> Result<DiscriminationResult> {
    let cf = canonical_reduction(a1, a2, b1, b2)?;
    let unit = |v: &PureStateVector| v.normalized();
    let (a1, a2, b1, b2) = (unit(a1)?, unit(a2)?, unit(b1)?, unit(b2)?);
    let overlaps = OverlapPair {
        x: a1.inner(&a2).norm_sqr().min(1.0),
        y: b1.inner(&b2).norm_sqr().min(1.0),
    };
    let not_guaranteed = || DiscriminationResult {
        guaranteed: false,
        overlaps,
        class,
        certificate: None,
        report: None,
        elements: None,
    };
    if !class.condition(overlaps.x, overlaps.y)? {
        return Ok(not_guaranteed());
    }
    let cert = match build_measurement(&cf, class) {
        Ok(cert) => cert,
        Err(Error::ConditionNotSatisfied) => return Ok(not_guaranteed()),
        Err(e) => return Err(e),
    };
    let rho1 = product_state(&a1, &b1);
    let rho2 = product_state(&a2, &b2);
    let report = verify_measurement(&cert, &rho1, &rho2, class)?;
    if !report.passed {
        return Err(Error::VerificationFailed(report.summary()));
    }
    let elements = cert.user_elements()?;
    Ok(DiscriminationResult {
        guaranteed: true,
        overlaps,
        class,
        certificate: Some(cert),
        report: Some(report),
        elements: Some(elements),
    })
}
