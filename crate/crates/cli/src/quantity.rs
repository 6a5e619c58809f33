//! Exact parsing for human-readable byte quantities ("5.2 TB", "100 MB/s").
//!
//! Decimal mantissas are scaled with integer arithmetic so figures like
//! "5.2 TB" land on exactly 5_200_000_000_000 bytes.

use serde::{Deserialize, Serialize};

/// A byte count that reads from TOML as either a bare integer (bytes) or a
/// unit string, and always serializes as exact bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Bytes(u64),
    Text(String),
}

impl Quantity {
    pub fn bytes(&self) -> Result<u64, String> {
        match self {
            Quantity::Bytes(b) => Ok(*b),
            Quantity::Text(s) => parse_bytes(s),
        }
    }
}

impl From<u64> for Quantity {
    fn from(b: u64) -> Self {
        Quantity::Bytes(b)
    }
}

const UNITS: [(&str, u32); 6] = [
    ("PB", 15),
    ("TB", 12),
    ("GB", 9),
    ("MB", 6),
    ("kB", 3),
    ("B", 0),
];

/// Parse `"<decimal> <unit>[/s]"` into exact bytes.
pub fn parse_bytes(text: &str) -> Result<u64, String> {
    let trimmed = text.trim().trim_end_matches("/s").trim();
    let (number, power) = UNITS
        .iter()
        .find_map(|(suffix, power)| {
            trimmed
                .strip_suffix(suffix)
                .map(|rest| (rest.trim_end(), *power))
        })
        .ok_or_else(|| format!("`{text}`: expected a unit suffix (B, kB, MB, GB, TB, PB)"))?;
    if number.is_empty() {
        return Err(format!("`{text}`: missing numeric part"));
    }
    let mut digits = String::new();
    let mut frac_digits = 0u32;
    let mut seen_dot = false;
    for c in number.chars() {
        match c {
            '0'..='9' => {
                digits.push(c);
                if seen_dot {
                    frac_digits += 1;
                }
            }
            '.' if !seen_dot => seen_dot = true,
            '_' | ' ' => {}
            other => return Err(format!("`{text}`: unexpected character `{other}`")),
        }
    }
    if digits.is_empty() {
        return Err(format!("`{text}`: missing digits"));
    }
    if frac_digits > power {
        return Err(format!("`{text}`: finer than one byte"));
    }
    let mantissa: u128 = digits
        .parse()
        .map_err(|_| format!("`{text}`: number out of range"))?;
    let scaled = mantissa
        .checked_mul(10u128.pow(power - frac_digits))
        .ok_or_else(|| format!("`{text}`: overflow"))?;
    u64::try_from(scaled).map_err(|_| format!("`{text}`: exceeds 2^64 bytes"))
}
