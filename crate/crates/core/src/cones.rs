//! Cones behind the approximate measurement classes, and certificate checks.
//!
//! Membership in `SEP*` and `K_s^(0)` is not decided here. Every check
//! validates a constructive certificate: a rank-one decomposition, or a split
//! `X = P + Γ(Q)` with `P`, `Q` positive semidefinite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::discrimination::ClassParameter;
use crate::error::{Error, Result};
use crate::linalg::{
    eigenvalues, partial_transpose, schmidt, serde_complex, CMatrix, CVector, Dims, HermitianOperator,
    PureStateVector,
};

/// Eigenvalues below `-NEG_EIG_CUTOFF` count as negative in [`nege`].
pub const NEG_EIG_CUTOFF: f64 = 1e-12;
/// Minimum eigenvalue accepted by [`is_psd`].
pub const PSD_TOL: f64 = 1e-10;
/// Max-entry tolerance for certificate reconstruction.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Slack on `sco(v) <= s` for rank-one terms.
pub const SCO_TOL: f64 = 1e-10;
/// Slack on `nege(M) <= s` for class membership.
pub const NEGE_TOL: f64 = 1e-9;

/// Which cone a certificate is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConeId {
    Psd,
    Sep,
    SepDual,
    Ks0(f64),
    Ks(f64),
    PovmElement,
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeId::Psd => write!(f, "PSD"),
            ConeId::Sep => write!(f, "SEP"),
            ConeId::SepDual => write!(f, "SEP*"),
            ConeId::Ks0(s) => write!(f, "K_s^(0)(s={s})"),
            ConeId::Ks(s) => write!(f, "K_s(s={s})"),
            ConeId::PovmElement => write!(f, "POVM element"),
        }
    }
}

/// `weight * |vector><vector|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub weight: f64,
    #[serde(with = "serde_complex::vector")]
    pub vector: CVector,
}

impl RankOneTerm {
    /// Moves the squared norm of `vector` into the weight. Zero vectors give
    /// weight zero.
    pub fn normalized(weight: f64, vector: CVector) -> Self {
        let norm = vector.norm();
        if norm == 0.0 {
            return Self { weight: 0.0, vector };
        }
        Self {
            weight: weight * norm * norm,
            vector: vector.unscale(norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ks0Decomp {
    pub terms: Vec<RankOneTerm>,
}

/// Constructive evidence that a matrix lies in a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum ConeCertificate {
    PsdSum {
        terms: Vec<RankOneTerm>,
    },
    SepDualSplit {
        #[serde(rename = "P")]
        p: HermitianOperator,
        #[serde(rename = "Q")]
        q: HermitianOperator,
    },
    Ks0Decomp {
        terms: Vec<RankOneTerm>,
    },
    KsSplit {
        #[serde(rename = "psdPart")]
        psd_part: HermitianOperator,
        #[serde(rename = "gammaPart")]
        gamma_part: Ks0Decomp,
    },
}

impl ConeCertificate {
    pub fn variant_name(&self) -> &'static str {
        match self {
            ConeCertificate::PsdSum { .. } => "PsdSum",
            ConeCertificate::SepDualSplit { .. } => "SepDualSplit",
            ConeCertificate::Ks0Decomp { .. } => "Ks0Decomp",
            ConeCertificate::KsSplit { .. } => "KsSplit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Valid,
    Invalid { reason: String },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    fn invalid(reason: impl Into<String>) -> Self {
        Verdict::Invalid { reason: reason.into() }
    }

    fn and(self, other: impl FnOnce() -> Verdict) -> Verdict {
        match self {
            Verdict::Valid => other(),
            invalid => invalid,
        }
    }
}

/// Magnitude of the most negative eigenvalue, or 0 when none is below `-1e-12`.
pub fn nege(x: &HermitianOperator) -> f64 {
    let min = eigenvalues(x).last().copied().unwrap_or(0.0);
    if min < -NEG_EIG_CUTOFF {
        -min
    } else {
        0.0
    }
}

/// Minimum eigenvalue at least `-1e-10`.
pub fn is_psd(x: &HermitianOperator) -> bool {
    eigenvalues(x).last().is_none_or(|&m| m >= -PSD_TOL)
}

/// Product of the two largest Schmidt coefficients of `v / ||v||`; 0 for `v = 0`.
pub fn sco(v: &PureStateVector) -> Result<f64> {
    if v.dims().bipartite().is_none() {
        return Err(Error::NotBipartite);
    }
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    let s = schmidt(v)?;
    Ok(match s.coefficients.as_slice() {
        [l1, l2, ..] => l1 * l2,
        _ => 0.0,
    })
}

/// Spectrum of `Γ(|v><v|) / ||v||^2` from the Schmidt coefficients:
/// `{±λ_iλ_j : i < j} ∪ {λ_k^2}` padded with zeros, in descending order.
pub fn ppt_pure_spectrum(v: &PureStateVector) -> Result<Vec<f64>> {
    let s = schmidt(v)?;
    let lambda = &s.coefficients;
    let mut out = Vec::with_capacity(v.len());
    for i in 0..lambda.len() {
        out.push(lambda[i] * lambda[i]);
        for j in i + 1..lambda.len() {
            out.push(lambda[i] * lambda[j]);
            out.push(-lambda[i] * lambda[j]);
        }
    }
    out.resize(v.len(), 0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    Ok(out)
}

/// `sum_k w_k |v_k><v_k|`; invalid when a term is malformed.
fn reconstruct(terms: &[RankOneTerm], dims: Dims) -> std::result::Result<HermitianOperator, String> {
    let n = dims.total();
    let mut acc = CMatrix::zeros(n, n);
    for (k, term) in terms.iter().enumerate() {
        if term.vector.len() != n {
            return Err(format!("term {k} has length {}, expected {n}", term.vector.len()));
        }
        if !term.weight.is_finite() || term.weight < 0.0 {
            return Err(format!("term {k} has weight {}", term.weight));
        }
        acc += (&term.vector * term.vector.adjoint()).scale(term.weight);
    }
    Ok(HermitianOperator::from_hermitian_part(acc, dims))
}

/// Largest `sco` among the terms, computed with the target's bipartition.
fn max_term_sco(terms: &[RankOneTerm], dims: Dims) -> Result<f64> {
    let (da, db) = dims.bipartite().ok_or(Error::NotBipartite)?;
    terms.iter().try_fold(0.0_f64, |acc, t| {
        let v = PureStateVector::bipartite(t.vector.clone(), da, db)?;
        Ok(acc.max(sco(&v)?))
    })
}

fn matches_target(x: &HermitianOperator, rebuilt: &HermitianOperator) -> Verdict {
    let residual = x.max_abs_diff(rebuilt);
    if residual <= RECONSTRUCTION_TOL {
        Verdict::Valid
    } else {
        Verdict::invalid(format!("reconstruction residual {residual:e} exceeds {RECONSTRUCTION_TOL:e}"))
    }
}

fn check_rank_one(x: &HermitianOperator, terms: &[RankOneTerm], sco_bound: Option<f64>) -> Result<Verdict> {
    let rebuilt = match reconstruct(terms, x.dims()) {
        Ok(r) => r,
        Err(reason) => return Ok(Verdict::invalid(reason)),
    };
    let mut verdict = matches_target(x, &rebuilt);
    if let Some(s) = sco_bound {
        let worst = max_term_sco(terms, x.dims())?;
        verdict = verdict.and(|| {
            if worst <= s + SCO_TOL {
                Verdict::Valid
            } else {
                Verdict::invalid(format!("term sco {worst} exceeds s = {s}"))
            }
        });
    }
    Ok(verdict)
}

fn check_split(
    x: &HermitianOperator,
    psd_part: &HermitianOperator,
    gamma_inner: &HermitianOperator,
) -> Result<Verdict> {
    if psd_part.dim() != x.dim() || gamma_inner.dim() != x.dim() {
        return Ok(Verdict::invalid("split parts have the wrong dimension"));
    }
    let gamma_inner = gamma_inner.clone().with_dims(x.dims())?;
    let rebuilt = psd_part + &partial_transpose(&gamma_inner)?;
    Ok(matches_target(x, &rebuilt))
}

fn require_s(s: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            range: "[0, 1/2]",
        });
    }
    Ok(())
}

/// Checks that `cert` proves `x ∈ cone`.
///
/// Accepted pairings: `PsdSum` for every cone (for `SEP` and `K_s^(0)` each
/// term must also satisfy the entanglement bound), `Ks0Decomp` for `SEP` and
/// `K_s^(0)`, `SepDualSplit` for `SEP*`, `KsSplit` for `K_s`. Any other pairing
/// is an error, not an invalid verdict.
pub fn check_certificate(x: &HermitianOperator, cone: ConeId, cert: &ConeCertificate) -> Result<Verdict> {
    if !matches!(cone, ConeId::Psd | ConeId::PovmElement) && x.dims().bipartite().is_none() {
        return Err(Error::NotBipartite);
    }
    if let ConeId::Ks0(s) | ConeId::Ks(s) = cone {
        require_s(s)?;
    }
    use ConeCertificate as C;
    match (cone, cert) {
        (ConeId::Psd | ConeId::PovmElement | ConeId::SepDual | ConeId::Ks(_), C::PsdSum { terms }) => {
            check_rank_one(x, terms, None)
        }
        (ConeId::Sep, C::PsdSum { terms } | C::Ks0Decomp { terms }) => check_rank_one(x, terms, Some(0.0)),
        (ConeId::Ks0(s), C::PsdSum { terms } | C::Ks0Decomp { terms }) => check_rank_one(x, terms, Some(s)),
        (ConeId::SepDual, C::SepDualSplit { p, q }) => {
            if !is_psd(p) {
                return Ok(Verdict::invalid("P is not positive semidefinite"));
            }
            if !is_psd(q) {
                return Ok(Verdict::invalid("Q is not positive semidefinite"));
            }
            check_split(x, p, q)
        }
        (ConeId::Ks(s), C::KsSplit { psd_part, gamma_part }) => {
            if psd_part.dim() != x.dim() {
                return Ok(Verdict::invalid("psdPart has the wrong dimension"));
            }
            if !is_psd(psd_part) {
                return Ok(Verdict::invalid("psdPart is not positive semidefinite"));
            }
            let inner = match reconstruct(&gamma_part.terms, x.dims()) {
                Ok(r) => r,
                Err(reason) => return Ok(Verdict::invalid(reason)),
            };
            let worst = max_term_sco(&gamma_part.terms, x.dims())?;
            if worst > s + SCO_TOL {
                return Ok(Verdict::invalid(format!("gammaPart term sco {worst} exceeds s = {s}")));
            }
            check_split(x, psd_part, &inner)
        }
        _ => Err(Error::VariantMismatch {
            certificate: cert.variant_name().to_string(),
            cone: cone.to_string(),
        }),
    }
}

/// Outcome of a class-membership check for one measurement element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub verdict: Verdict,
    /// Certificate variant the verdict rests on.
    pub evidence: String,
    pub nege: f64,
}

/// Checks one measurement element against `M_s` or `M(K_s)` using a certificate.
///
/// `M_s` needs a `SEP*` proof (`SepDualSplit` or `PsdSum`) plus
/// `nege(M) <= s`; `M(K_s)` needs a `KsSplit` at the derived `s`.
pub fn class_membership(
    m: &HermitianOperator,
    class: ClassParameter,
    cert: Option<&ConeCertificate>,
) -> Result<Membership> {
    let cert = cert.ok_or(Error::MissingCertificate)?;
    let nege_value = nege(m);
    let verdict = match class {
        ClassParameter::Ms { s } => match cert {
            ConeCertificate::SepDualSplit { .. } | ConeCertificate::PsdSum { .. } => {
                check_certificate(m, ConeId::SepDual, cert)?.and(|| {
                    if nege_value <= s + NEGE_TOL {
                        Verdict::Valid
                    } else {
                        Verdict::invalid(format!("nege {nege_value} exceeds s = {s}"))
                    }
                })
            }
            other => {
                return Err(Error::VariantMismatch {
                    certificate: other.variant_name().to_string(),
                    cone: "M_s element".to_string(),
                })
            }
        },
        ClassParameter::MKs { .. } => match cert {
            ConeCertificate::KsSplit { .. } => check_certificate(m, ConeId::Ks(class.s()), cert)?,
            other => {
                return Err(Error::VariantMismatch {
                    certificate: other.variant_name().to_string(),
                    cone: "M(K_s) element".to_string(),
                })
            }
        },
    };
    Ok(Membership {
        verdict,
        evidence: cert.variant_name().to_string(),
        nege: nege_value,
    })
}
