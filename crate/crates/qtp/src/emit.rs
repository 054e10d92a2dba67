//! Machine-readable outputs and the input fingerprint.

use qtp_core::trace::ProofTrace;
use sha2::{Digest, Sha256};

/// Pretty-printed JSON with fields in declaration order, newline at the end.
pub fn emit_json(t: &ProofTrace) -> String {
    let mut s = serde_json::to_string_pretty(t).expect("traces always serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<ProofTrace, serde_json::Error> {
    serde_json::from_str(text)
}

/// Lowercase hex SHA-256.
pub fn input_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use qtp_core::trace::{Step, TraceMeta};

    #[test]
    fn known_digest() {
        assert_eq!(input_hash(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn json_round_trip() {
        let t = ProofTrace {
            meta: TraceMeta { formula: "F".into(), proof: "p".into(), method: 1, ..TraceMeta::default() },
            steps: vec![Step::check("c", "s", true)],
        };
        let a = emit_json(&t);
        assert_eq!(a, emit_json(&t));
        assert_eq!(parse_json(&a).unwrap(), t);
    }
}
