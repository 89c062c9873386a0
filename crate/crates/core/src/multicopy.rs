//! Minimum copy numbers and the feasible `(x, y)` regions.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discrimination::ClassParameter;
use crate::error::{Error, Result};

/// Largest copy number searched before giving up.
pub const DEFAULT_COPY_CAP: u64 = 1_000_000;

/// Two `n`-copy states with single-copy overlap `c = Tr sigma_1 sigma_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiCopyInstance {
    pub c: f64,
    pub class: ClassParameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CopyCount {
    /// Copies on each side of the bipartition.
    pub n: u64,
    pub total_copies: u64,
}

fn require_overlap(c: f64) -> Result<()> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: "[0, 1)",
        });
    }
    Ok(())
}

/// Relative rounding slack for the copy-number inequality.
pub const RAW_REL_TOL: f64 = 1e-12;

/// `x^2 <= k (1 - x)^2` with only a relative slack, so `k = 0` never holds for `x > 0`.
fn raw_condition(x: f64, class: ClassParameter) -> bool {
    let lhs = x * x;
    let rhs = boundary_coefficient(class) * (1.0 - x) * (1.0 - x);
    lhs - rhs <= RAW_REL_TOL * lhs.max(rhs)
}

fn boundary_coefficient(class: ClassParameter) -> f64 {
    match class {
        ClassParameter::Ms { s } => 4.0 * s * s,
        ClassParameter::MKs { t } => t,
    }
}

/// Whether `x = y = c^n` satisfies the class inequality.
///
/// Once `x * x` underflows for `c > 0` the product term is below any positive
/// right-hand side, so the answer depends only on whether the parameter is zero.
pub fn copies_suffice(c: f64, n: u64, class: ClassParameter) -> Result<bool> {
    require_overlap(c)?;
    let x = overlap_power(c, n);
    if c > 0.0 && x * x == 0.0 {
        return Ok(!class.is_zero());
    }
    Ok(raw_condition(x, class))
}

pub(crate) fn overlap_power(c: f64, n: u64) -> f64 {
    c.powi(i32::try_from(n).unwrap_or(i32::MAX))
}

/// Symmetric threshold: `x = y` is feasible iff `x <= threshold`.
fn diagonal_threshold(class: ClassParameter) -> f64 {
    let root = match class {
        ClassParameter::Ms { s } => 2.0 * s,
        ClassParameter::MKs { t } => t.sqrt(),
    };
    root / (1.0 + root)
}

/// Smallest `n` such that the `2n`-copy states meet the class condition.
///
/// The closed-form threshold gives a starting guess; the returned `n` is then
/// pinned by evaluating the raw inequality at `n` and `n - 1`.
pub fn min_copies(inst: MultiCopyInstance) -> Result<CopyCount> {
    min_copies_with_cap(inst, DEFAULT_COPY_CAP)
}

pub fn min_copies_with_cap(inst: MultiCopyInstance, cap: u64) -> Result<CopyCount> {
    require_overlap(inst.c)?;
    if inst.class.is_zero() {
        return Err(Error::ZeroParameter);
    }
    let class = inst.class;
    let guess = if inst.c == 0.0 {
        1.0
    } else {
        (diagonal_threshold(class).ln() / inst.c.ln()).ceil().max(1.0)
    };
    if !guess.is_finite() || guess > cap as f64 + 1.0 {
        return Err(Error::SearchCapExceeded { cap });
    }
    let mut n = guess as u64;
    while !copies_suffice(inst.c, n, class)? {
        n += 1;
        if n > cap {
            return Err(Error::SearchCapExceeded { cap });
        }
    }
    while n > 1 && copies_suffice(inst.c, n - 1, class)? {
        n -= 1;
    }
    if n > cap {
        return Err(Error::SearchCapExceeded { cap });
    }
    Ok(CopyCount { n, total_copies: 2 * n })
}

/// One point on the boundary of the feasible region `{(x, y) : y <= y_boundary(x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionRow {
    pub x: f64,
    pub y_boundary: f64,
    /// Every `y <= y_boundary` is feasible at this `x`.
    pub feasible_below: bool,
}

/// `y` at which the class condition holds with equality for a given `x`.
pub fn boundary_y(x: f64, class: ClassParameter) -> f64 {
    let k = boundary_coefficient(class);
    let num = k * (1.0 - x);
    let den = x + num;
    if den == 0.0 {
        if x == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        num / den
    }
}

/// Boundary rows on a uniform grid over `[0, 1]` including both ends.
pub fn region_boundary(class: ClassParameter, grid_points: usize) -> Result<Vec<RegionRow>> {
    if grid_points < 2 {
        return Err(Error::InvalidGrid(grid_points));
    }
    let last = (grid_points - 1) as f64;
    Ok((0..grid_points)
        .map(|k| {
            let x = k as f64 / last;
            RegionRow {
                x,
                y_boundary: boundary_y(x, class),
                feasible_below: true,
            }
        })
        .collect())
}

/// Largest `r` with `[0, r]^2` inside the feasible region.
pub fn interior_origin_margin(class: ClassParameter) -> f64 {
    diagonal_threshold(class)
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, v))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    }
}

/// Writes `x,y_boundary,class,param` rows; `param` is the effective `s`.
pub fn write_region_csv<W: Write>(out: &mut W, rows: &[RegionRow], class: ClassParameter) -> std::io::Result<()> {
    writeln!(out, "x,y_boundary,class,param")?;
    let param = format_sig12(class.s());
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            format_sig12(row.x),
            format_sig12(row.y_boundary),
            class.label(),
            param
        )?;
    }
    Ok(())
}
