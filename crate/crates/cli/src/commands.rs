//! Subcommand bodies. Each returns the exit code on success paths.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use gptd_core::discrimination::product_state;
use gptd_core::multicopy::{min_copies_with_cap, write_region_csv};
use gptd_core::{
    discriminate as run_discriminate, randomized_cert_audit, region_boundary, verify_measurement, ClassParameter,
    DiscriminationResult, MeasurementCertificate, MultiCopyInstance, VerificationReport,
};

use crate::exit::{self, Failure};
use crate::state_file::StateFile;

/// Describes how a payload was produced. Kept free of timestamps so outputs diff cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
}

impl Metadata {
    fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    metadata: Metadata,
    result: T,
}

/// Anything `verify` accepts as a measurement.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MeasurementInput {
    Wrapped(Envelope<DiscriminationResult>),
    Result(DiscriminationResult),
    Certificate(MeasurementCertificate),
}

impl MeasurementInput {
    fn into_certificate(self) -> Result<MeasurementCertificate, Failure> {
        let result = match self {
            MeasurementInput::Certificate(c) => return Ok(c),
            MeasurementInput::Result(r) => r,
            MeasurementInput::Wrapped(e) => e.result,
        };
        result
            .certificate
            .ok_or_else(|| Failure::input("result carries no certificate (condition was not satisfied)"))
    }
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::input(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| Failure::input(e.to_string()))
}

pub fn discriminate(states: &Path, class: ClassParameter, out: Option<&Path>) -> Result<i32, Failure> {
    let s = StateFile::read(states)?.states()?;
    let result = run_discriminate(&s.a1, &s.a2, &s.b1, &s.b2, class)?;
    let guaranteed = result.guaranteed;
    write_json(
        out,
        &Envelope {
            metadata: Metadata::new("discriminate"),
            result,
        },
    )?;
    if guaranteed {
        Ok(exit::SUCCESS)
    } else {
        eprintln!("condition not satisfied; no measurement is guaranteed");
        Ok(exit::CONDITION_UNSATISFIED)
    }
}

pub fn min_copies(c: f64, class: ClassParameter, cap: u64) -> Result<i32, Failure> {
    let count = min_copies_with_cap(MultiCopyInstance { c, class }, cap).map_err(|e| {
        let mut f = Failure::from(e.clone());
        if f.code == exit::IMPOSSIBLE {
            f.message = format!("{e}: perfect discrimination of non-trivial copies is impossible at this parameter");
        }
        f
    })?;
    println!("n={}, total={}", count.n, count.total_copies);
    Ok(exit::SUCCESS)
}

pub fn region(class: ClassParameter, grid: usize, out: Option<&Path>) -> Result<i32, Failure> {
    let rows = region_boundary(class, grid)?;
    let mut w = open_output(out)?;
    write_region_csv(&mut w, &rows, class)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::input(e.to_string()))?;
    Ok(exit::SUCCESS)
}

fn print_report(report: &VerificationReport) {
    let line = |name: &str, c: &gptd_core::discrimination::ConditionResult| {
        println!(
            "{name}: {} (residual {:e}){}",
            if c.passed { "pass" } else { "FAIL" },
            c.residual,
            c.detail.as_deref().map(|d| format!(" {d}")).unwrap_or_default()
        );
    };
    line("(i) unit", &report.unit);
    line("(ii) cone", &report.cone);
    line("(iii) zero-error", &report.zero_error);
    println!("nege: [{:e}, {:e}]", report.nege[0], report.nege[1]);
    println!("overall: {}", if report.passed { "pass" } else { "FAIL" });
}

pub fn verify(measurement: &Path, states: &Path, class: ClassParameter) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(measurement)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", measurement.display())))?;
    let cert = serde_json::from_str::<MeasurementInput>(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", measurement.display())))?
        .into_certificate()?;
    let s = StateFile::read(states)?.states()?;
    let rho1 = product_state(&s.a1, &s.b1);
    let rho2 = product_state(&s.a2, &s.b2);
    let report = verify_measurement(&cert, &rho1, &rho2, class)?;
    print_report(&report);
    Ok(if report.passed {
        exit::SUCCESS
    } else {
        exit::VERIFICATION_FAILED
    })
}

pub fn audit(count: u64, seed: u64, out: Option<&Path>) -> Result<i32, Failure> {
    let report = randomized_cert_audit(count, seed)?;
    let mut w = open_output(out)?;
    w.write_all(report.to_json_lines().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Failure::input(e.to_string()))?;
    let failures = report.failures();
    eprintln!("audit: {count} instances, {failures} failures (seed {seed})");
    if failures == 0 {
        Ok(exit::SUCCESS)
    } else {
        Err(Failure::verification(format!("{failures} audit instances failed")))
    }
}
