//! Plain text instance files: one `numerator/denominator` per line.

use super::{Domino, PcpInstance};
use crate::error::{Error, Result};

/// Parse the instance file format. `#` starts a comment line, blank lines are skipped.
pub fn parse_instance(text: &str) -> Result<PcpInstance> {
    let mut dominoes = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let (num, den) = line
            .split_once('/')
            .ok_or_else(|| parse_err(format!("expected <numerator>/<denominator>, got {line:?}")))?;
        let domino = Domino::new(num.trim(), den.trim()).map_err(|e| parse_err(e.to_string()))?;
        dominoes.push(domino);
    }
    if dominoes.is_empty() {
        return Err(Error::Parse { line: 0, message: "no dominoes in input".into() });
    }
    PcpInstance::new(dominoes)
}

pub fn serialize_instance(instance: &PcpInstance) -> String {
    instance.dominoes().iter().map(|d| format!("{d}\n")).collect()
}
