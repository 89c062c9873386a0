//! The two-party input format shared by `discriminate` and `verify`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use gptd_core::linalg::CVector;
use gptd_core::PureStateVector;

use crate::exit::Failure;

/// Unit-norm tolerance applied after parsing.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    #[serde(rename = "dA")]
    pub da: usize,
    #[serde(rename = "dB")]
    pub db: usize,
    pub a1: Vec<Complex64>,
    pub b1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
    pub b2: Vec<Complex64>,
}

/// Local vectors `[a1, a2, b1, b2]`, checked.
pub struct LocalStates {
    pub a1: PureStateVector,
    pub a2: PureStateVector,
    pub b1: PureStateVector,
    pub b2: PureStateVector,
}

impl StateFile {
    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    pub fn states(&self) -> Result<LocalStates, Failure> {
        let local = |name: &str, amps: &[Complex64], d: usize| -> Result<PureStateVector, Failure> {
            if amps.len() != d {
                return Err(Failure::input(format!("{name} has length {}, expected {d}", amps.len())));
            }
            let v = PureStateVector::single(CVector::from_column_slice(amps));
            v.require_unit(NORM_TOL).map_err(|e| Failure::input(format!("{name}: {e}")))?;
            Ok(v)
        };
        Ok(LocalStates {
            a1: local("a1", &self.a1, self.da)?,
            a2: local("a2", &self.a2, self.da)?,
            b1: local("b1", &self.b1, self.db)?,
            b2: local("b2", &self.b2, self.db)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> StateFile {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn reads_complex_pairs() {
        let f = parse(r#"{"dA":2,"dB":2,"a1":[[1,0],[0,0]],"b1":[[0,1],[0,0]],"a2":[[0,0],[1,0]],"b2":[[0.6,0],[0,0.8]]}"#);
        let s = f.states().unwrap();
        assert_eq!(s.b1.amplitudes()[0], Complex64::new(0.0, 1.0));
        assert!((s.b2.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_norm_and_length() {
        let f = parse(r#"{"dA":2,"dB":2,"a1":[[1,0],[0.1,0]],"b1":[[1,0],[0,0]],"a2":[[1,0],[0,0]],"b2":[[1,0],[0,0]]}"#);
        assert_eq!(f.states().err().unwrap().code, 1);
        let f = parse(r#"{"dA":3,"dB":2,"a1":[[1,0],[0,0]],"b1":[[1,0],[0,0]],"a2":[[1,0],[0,0]],"b2":[[1,0],[0,0]]}"#);
        assert!(f.states().err().unwrap().message.contains("a1 has length 2"));
    }
}
