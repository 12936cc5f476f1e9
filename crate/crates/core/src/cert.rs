//! Certificates: the machine-readable artifact tying a symbol to the
//! witness that realizes it, the search configuration that produced the
//! witness, and the dilation verification report. Certificates are emitted
//! as canonical JSON (pretty-printed, trailing newline) so that identical
//! inputs give byte-identical files, and they carry enough data to be
//! rechecked from scratch.

use serde::{Deserialize, Serialize};

use crate::dilation::{build_dilation, verify_dilation, DilationReport};
use crate::linalg::DEFAULT_TOL;
use crate::schur::SchurSymbol;
use crate::witness::{verify_witness, SearchConfig, UnitaryWitness, WitnessError, WitnessReport};

pub const SCHEMA_VERSION: &str = "1";
/// Recomputed quantities must agree with recorded ones to this precision.
pub const DRIFT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub symbol: SchurSymbol,
    pub witness: UnitaryWitness,
    pub search_config: SearchConfig,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation_report: Option<DilationReport>,
    pub tool_version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertError {
    #[error("certificate is malformed: {reason}")]
    Malformed { reason: String },
}

impl Certificate {
    pub fn new(
        symbol: SchurSymbol,
        witness: UnitaryWitness,
        search_config: SearchConfig,
        dilation_report: Option<DilationReport>,
    ) -> Result<Self, WitnessError> {
        let report = verify_witness(&witness, &symbol, DEFAULT_TOL)?;
        let seed = search_config.seed;
        Ok(Self {
            schema_version: SCHEMA_VERSION.to_string(),
            symbol,
            witness,
            search_config,
            residual: report.residual,
            dilation_report,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
        })
    }

    /// Canonical serialized form: pretty JSON plus a trailing newline.
    pub fn to_canonical_json(&self) -> Result<String, serde_json::Error> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Witness tolerance implied by the recorded search target.
    pub fn witness_tolerance(&self) -> f64 {
        10.0 * self.search_config.target_residual
    }

    /// Verification tolerance used for the dilation identities: the base
    /// tolerance, widened when the witness itself only approximates the
    /// symbol (deviations inherit the Gram residual per applied step).
    pub fn dilation_tolerance(&self, base_tol: f64) -> f64 {
        base_tol.max(10.0 * self.residual)
    }

    /// Truncation depth recorded implicitly in the report's index keys.
    pub fn recorded_depth(&self) -> Result<Option<usize>, CertError> {
        let Some(report) = &self.dilation_report else {
            return Ok(None);
        };
        let mut depth = 0usize;
        let mut seen_any = false;
        for key in report.per_index.keys() {
            let mut degree = 0usize;
            for part in key.split(',') {
                let k: usize = part.parse().map_err(|_| CertError::Malformed {
                    reason: format!("bad multi-index key {key:?}"),
                })?;
                degree += k;
            }
            if key.split(',').count() != 1 {
                return Err(CertError::Malformed {
                    reason: format!(
                        "dilation report key {key:?} refers to {} multipliers, certificate has one witness",
                        key.split(',').count()
                    ),
                });
            }
            depth = depth.max(degree);
            seen_any = true;
        }
        if !seen_any {
            return Err(CertError::Malformed {
                reason: "dilation report has an empty index map".into(),
            });
        }
        Ok(Some(depth))
    }
}

/// Everything recomputed during a recheck, with drifts against the recorded
/// values. `pass` means: witness verifies at the recorded tolerance, the
/// recomputed residual agrees with the recorded one, and (when present) the
/// dilation report is reproduced with a passing verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecheckReport {
    pub witness: WitnessReport,
    pub witness_tol: f64,
    pub residual_drift: f64,
    pub dilation_pass: Option<bool>,
    pub dilation_drift: Option<f64>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// Re-derives every claim of a stored certificate. Structural defects
/// (mismatched shapes, unintelligible report keys, unknown schema) are
/// errors; claims that fail to reproduce make `pass` false with a note.
pub fn recheck_certificate(
    cert: &Certificate,
    base_dilation_tol: f64,
) -> Result<RecheckReport, CertError> {
    if cert.schema_version != SCHEMA_VERSION {
        return Err(CertError::Malformed {
            reason: format!("unknown schema version {:?}", cert.schema_version),
        });
    }
    let witness_tol = cert.witness_tolerance();
    let witness = verify_witness(&cert.witness, &cert.symbol, witness_tol).map_err(|e| {
        CertError::Malformed {
            reason: format!("witness does not fit the symbol: {e}"),
        }
    })?;
    let mut notes = Vec::new();
    let mut pass = true;
    if !witness.pass {
        pass = false;
        notes.push(format!(
            "witness verification failed: unitarity {:e}, residual {:e}, tolerance {:e}",
            witness.unitarity_defect, witness.residual, witness_tol
        ));
    }
    let residual_drift = (witness.residual - cert.residual).abs();
    if residual_drift > DRIFT_TOL {
        pass = false;
        notes.push(format!(
            "recomputed residual {:e} drifts from recorded {:e}",
            witness.residual, cert.residual
        ));
    }

    let mut dilation_pass = None;
    let mut dilation_drift = None;
    if let Some(recorded) = &cert.dilation_report {
        let depth = cert.recorded_depth()?.expect("report present");
        let tol = cert.dilation_tolerance(base_dilation_tol);
        match build_dilation(std::slice::from_ref(&cert.witness), depth)
            .and_then(|dil| verify_dilation(&dil, std::slice::from_ref(&cert.symbol), tol))
        {
            Ok(report) => {
                let drift = (report.max_deviation - recorded.max_deviation)
                    .abs()
                    .max((report.commutator_norm - recorded.commutator_norm).abs())
                    .max((report.trace_defect - recorded.trace_defect).abs())
                    .max((report.duality_defect - recorded.duality_defect).abs());
                if drift > DRIFT_TOL {
                    pass = false;
                    notes.push(format!(
                        "recomputed dilation defects drift from recorded ones by {drift:e}"
                    ));
                }
                if !report.pass {
                    pass = false;
                    notes.push(format!(
                        "dilation verification failed at tolerance {tol:e}: max deviation {:e}",
                        report.max_deviation
                    ));
                }
                if report.pass != recorded.pass {
                    pass = false;
                    notes.push("recorded dilation verdict does not reproduce".into());
                }
                dilation_drift = Some(drift);
                dilation_pass = Some(report.pass);
            }
            Err(e) => {
                pass = false;
                notes.push(format!("dilation could not be re-verified: {e}"));
                dilation_pass = Some(false);
            }
        }
    }

    Ok(RecheckReport {
        witness,
        witness_tol,
        residual_drift,
        dilation_pass,
        dilation_drift,
        notes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{fourier_witness, gram_of};
    use num_complex::Complex64;

    fn identity_certificate(depth: usize) -> Certificate {
        let symbol = SchurSymbol::identity(2);
        let witness = fourier_witness(2);
        let dil = build_dilation(std::slice::from_ref(&witness), depth).unwrap();
        let report = verify_dilation(&dil, std::slice::from_ref(&symbol), DEFAULT_TOL).unwrap();
        Certificate::new(symbol, witness, SearchConfig::default(), Some(report)).unwrap()
    }

    #[test]
    fn canonical_json_round_trips_byte_identically() {
        let cert = identity_certificate(3);
        let first = cert.to_canonical_json().unwrap();
        let parsed: Certificate = serde_json::from_str(&first).unwrap();
        let second = parsed.to_canonical_json().unwrap();
        assert_eq!(first, second);
        assert_eq!(parsed, cert);
    }

    #[test]
    fn recheck_reproduces_a_fresh_certificate() {
        let cert = identity_certificate(4);
        assert_eq!(cert.recorded_depth().unwrap(), Some(4));
        let report = recheck_certificate(&cert, DEFAULT_TOL).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.residual_drift <= DRIFT_TOL);
        assert_eq!(report.dilation_pass, Some(true));
        assert!(report.dilation_drift.unwrap() <= DRIFT_TOL);
    }

    #[test]
    fn recheck_flags_a_perturbed_witness() {
        let mut cert = identity_certificate(2);
        let mut v = cert.witness.matrices().to_vec();
        let mut entries: Vec<Complex64> = v[0].entries().to_vec();
        entries[0] += Complex64::new(1e-3, 0.0);
        v[0] = crate::linalg::ComplexMatrix::new(2, 2, entries).unwrap();
        cert.witness = UnitaryWitness::new(v).unwrap();
        let report = recheck_certificate(&cert, DEFAULT_TOL).unwrap();
        assert!(!report.pass);
        assert!(!report.witness.pass);
    }

    #[test]
    fn recheck_flags_a_tampered_residual() {
        let mut cert = identity_certificate(2);
        cert.residual += 1e-9;
        let report = recheck_certificate(&cert, DEFAULT_TOL).unwrap();
        assert!(!report.pass);
        assert!(report.residual_drift > DRIFT_TOL);
    }

    #[test]
    fn recheck_rejects_malformed_reports() {
        let mut cert = identity_certificate(2);
        let report = cert.dilation_report.as_mut().unwrap();
        let value = report.per_index.remove("0").unwrap();
        report.per_index.insert("0,0".into(), value);
        assert!(matches!(
            recheck_certificate(&cert, DEFAULT_TOL),
            Err(CertError::Malformed { .. })
        ));

        let mut cert = identity_certificate(2);
        cert.schema_version = "0".into();
        assert!(matches!(
            recheck_certificate(&cert, DEFAULT_TOL),
            Err(CertError::Malformed { .. })
        ));
    }

    #[test]
    fn dilation_tolerance_widens_with_rough_witnesses() {
        let symbol = SchurSymbol::new(gram_of(&fourier_witness(2))).unwrap();
        let witness = fourier_witness(2);
        let mut cert =
            Certificate::new(symbol, witness, SearchConfig::default(), None).unwrap();
        assert_eq!(cert.dilation_tolerance(1e-10), 1e-10);
        cert.residual = 1e-8;
        assert_eq!(cert.dilation_tolerance(1e-10), 1e-7);
        assert_eq!(cert.recorded_depth().unwrap(), None);
    }
}
