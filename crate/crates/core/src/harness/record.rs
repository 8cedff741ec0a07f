//! Experiment records and their CSV form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment,n,k,seed,quantity,value,bound,valid_k,ms";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub n: usize,
    pub k: usize,
    /// Trial index within the rung.
    pub seed: u64,
    pub quantity: String,
    pub value: f64,
    /// Theoretical bound, NaN when the config lacks the constants for it.
    pub bound: f64,
    pub valid_k: bool,
    pub ms: Option<f64>,
}

/// `%.17g`: 17 significant digits, fixed notation for exponents in
/// `[-5, 17)`, trailing zeros removed.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-5..17).contains(&exp) {
        if exp < 0 {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
        } else {
            let split = exp as usize + 1;
            out.push_str(&digits[..split]);
            let frac = digits[split..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    out
}

fn check_field(s: &str) -> Result<()> {
    if s.contains([',', '\n', '\r', '"']) {
        return Err(Error::invalid(
            "record",
            format!("text field `{s}` is not CSV-safe"),
        ));
    }
    Ok(())
}

/// Renders records with the fixed header.
pub fn to_csv(records: &[ExperimentRecord]) -> Result<String> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        check_field(&r.experiment)?;
        check_field(&r.quantity)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.k,
            r.seed,
            r.quantity,
            format_g17(r.value),
            format_g17(r.bound),
            u8::from(r.valid_k),
            r.ms.map(format_g17).unwrap_or_default()
        );
    }
    Ok(out)
}

/// Parses CSV produced by [`to_csv`].
pub fn parse_csv(text: &str, origin: &str) -> Result<Vec<ExperimentRecord>> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(err(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 9 {
            return Err(err(i + 1, format!("expected 9 fields, found {}", f.len())));
        }
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|e| err(i + 1, format!("{what}: {e}")))
        };
        let int = |s: &str, what: &str| {
            s.parse::<u64>()
                .map_err(|e| err(i + 1, format!("{what}: {e}")))
        };
        out.push(ExperimentRecord {
            experiment: f[0].to_string(),
            n: int(f[1], "n")? as usize,
            k: int(f[2], "k")? as usize,
            seed: int(f[3], "seed")?,
            quantity: f[4].to_string(),
            value: num(f[5], "value")?,
            bound: num(f[6], "bound")?,
            valid_k: match f[7] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(err(
                        i + 1,
                        format!("valid_k: expected 0 or 1, found `{other}`"),
                    ))
                }
            },
            ms: if f[8].is_empty() {
                None
            } else {
                Some(num(f[8], "ms")?)
            },
        });
    }
    Ok(out)
}
