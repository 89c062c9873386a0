//! Process exit codes.

use gptd_core::Error;

pub const SUCCESS: i32 = 0;
pub const INPUT_ERROR: i32 = 1;
pub const CONDITION_UNSATISFIED: i32 = 2;
pub const IMPOSSIBLE: i32 = 3;
pub const VERIFICATION_FAILED: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: INPUT_ERROR,
            message: message.into(),
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: VERIFICATION_FAILED,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ZeroParameter => IMPOSSIBLE,
            Error::VerificationFailed(_) => VERIFICATION_FAILED,
            _ => INPUT_ERROR,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
