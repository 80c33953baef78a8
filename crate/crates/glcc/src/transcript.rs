//! Flat, line-oriented round records for golden tests.
//!
//! ```text
//! glcc-transcript 1
//! field 97
//! params N=8 M=4 T=1 A=1 G=2 L=2
//! program square_map
//! domain data-first
//! seed 42
//! share 0 <sha256 hex>
//! ...
//! response 0 1 <value> <value> ...
//! ...
//! outcome exact
//! ```
//!
//! Every number is an integer; timings are deliberately left out.

use std::fmt::Write as _;

use glcc_core::glcc::{Dimensions, DomainLayout};

use crate::sim::{RoundOutcome, RoundTranscript};

const MAGIC: &str = "glcc-transcript 1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub modulus: u64,
    pub dims: Dimensions,
    /// Program description as accepted by `parse_program`.
    pub program: String,
    pub layout: DomainLayout,
    pub seed: u64,
    pub share_digests: Vec<[u8; 32]>,
    /// `(worker, index, values)` in the order the master consumed them.
    pub responses: Vec<(usize, usize, Vec<u64>)>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("transcript line {line}: {message}")]
pub struct TranscriptError {
    pub line: usize,
    pub message: String,
}

pub fn layout_name(layout: DomainLayout) -> String {
    match layout {
        DomainLayout::Sequential => "sequential".into(),
        DomainLayout::DataFirst => "data-first".into(),
        DomainLayout::Shuffled { seed } => format!("shuffled:{seed}"),
    }
}

pub fn parse_layout(s: &str) -> Option<DomainLayout> {
    match s {
        "sequential" => Some(DomainLayout::Sequential),
        "data-first" => Some(DomainLayout::DataFirst),
        _ => s.strip_prefix("shuffled:")?.parse().ok().map(|seed| DomainLayout::Shuffled { seed }),
    }
}

impl TranscriptRecord {
    pub fn from_round(
        round: &RoundTranscript,
        dims: Dimensions,
        modulus: u64,
        program: &str,
        layout: DomainLayout,
    ) -> Self {
        TranscriptRecord {
            modulus,
            dims,
            program: program.to_owned(),
            layout,
            seed: round.seed,
            share_digests: round.share_digests.clone(),
            responses: round
                .received
                .iter()
                .map(|r| (r.worker, r.index, r.value.iter().map(|v| v.value()).collect()))
                .collect(),
            outcome: round.outcome,
        }
    }

    pub fn render(&self) -> String {
        let d = &self.dims;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "field {}", self.modulus);
        let _ = writeln!(
            s,
            "params N={} M={} T={} A={} G={} L={}",
            d.workers, d.inputs, d.collusion, d.adversaries, d.groups, d.sub_responses
        );
        let _ = writeln!(s, "program {}", self.program);
        let _ = writeln!(s, "domain {}", layout_name(self.layout));
        let _ = writeln!(s, "seed {}", self.seed);
        for (n, h) in self.share_digests.iter().enumerate() {
            let _ = writeln!(s, "share {n} {}", hex::encode(h));
        }
        for (w, l, values) in &self.responses {
            let _ = write!(s, "response {w} {l}");
            for v in values {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "outcome {}", self.outcome.as_str());
        s
    }

    pub fn parse(text: &str) -> Result<Self, TranscriptError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let err = |line: usize, message: &str| TranscriptError { line, message: message.to_owned() };
        let mut next = |key: &str| -> Result<(usize, String), TranscriptError> {
            let (i, l) = lines.next().ok_or_else(|| err(0, &format!("missing `{key}` line")))?;
            if key.is_empty() {
                return Ok((i, l.to_owned()));
            }
            let rest = l
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| err(i, &format!("expected `{key}`")))?;
            Ok((i, rest.to_owned()))
        };
        let (i, magic) = next("")?;
        if magic != MAGIC {
            return Err(err(i, "not a glcc transcript"));
        }
        let num = |i: usize, s: &str| s.parse::<u64>().map_err(|_| err(i, &format!("bad integer {s:?}")));
        let (i, field) = next("field")?;
        let modulus = num(i, &field)?;
        let (i, params) = next("params")?;
        let mut vals = [0usize; 6];
        let keys = ["N", "M", "T", "A", "G", "L"];
        let parts: Vec<&str> = params.split(' ').collect();
        if parts.len() != 6 {
            return Err(err(i, "expected N M T A G L"));
        }
        for ((slot, key), part) in vals.iter_mut().zip(keys).zip(parts) {
            let v = part
                .strip_prefix(key)
                .and_then(|p| p.strip_prefix('='))
                .ok_or_else(|| err(i, "expected N M T A G L"))?;
            *slot = num(i, v)? as usize;
        }
        let dims = Dimensions {
            workers: vals[0],
            inputs: vals[1],
            collusion: vals[2],
            adversaries: vals[3],
            groups: vals[4],
            sub_responses: vals[5],
        };
        let (_, program) = next("program")?;
        let (i, layout) = next("domain")?;
        let layout = parse_layout(&layout).ok_or_else(|| err(i, "unknown domain layout"))?;
        let (i, seed) = next("seed")?;
        let seed = num(i, &seed)?;

        let mut share_digests = Vec::new();
        let mut responses = Vec::new();
        let mut outcome = None;
        for (i, line) in lines {
            if outcome.is_some() {
                return Err(err(i, "content after outcome"));
            }
            let mut it = line.split(' ');
            match it.next() {
                Some("share") => {
                    let n = num(i, it.next().unwrap_or(""))? as usize;
                    if n != share_digests.len() || !responses.is_empty() {
                        return Err(err(i, "shares out of order"));
                    }
                    let mut h = [0u8; 32];
                    hex::decode_to_slice(it.next().unwrap_or(""), &mut h).map_err(|_| err(i, "bad digest"))?;
                    share_digests.push(h);
                }
                Some("response") => {
                    let w = num(i, it.next().unwrap_or(""))? as usize;
                    let l = num(i, it.next().unwrap_or(""))? as usize;
                    let values = it.map(|v| num(i, v)).collect::<Result<Vec<_>, _>>()?;
                    if values.iter().any(|&v| v >= modulus) {
                        return Err(err(i, "value outside the field"));
                    }
                    responses.push((w, l, values));
                }
                Some("outcome") => {
                    let o = it.next().and_then(RoundOutcome::parse).ok_or_else(|| err(i, "unknown outcome"))?;
                    outcome = Some(o);
                }
                _ => return Err(err(i, "unexpected line")),
            }
        }
        let outcome = outcome.ok_or_else(|| err(0, "missing `outcome` line"))?;
        Ok(TranscriptRecord { modulus, dims, program, layout, seed, share_digests, responses, outcome })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{random_dataset, run_round, SimConfig, StragglerModel};
    use glcc_core::glcc::{build_domain, GlccParams};
    use glcc_core::program::parse_program;
    use glcc_core::PrimeModulus;
    use std::sync::Arc;

    fn round(layout: DomainLayout) -> TranscriptRecord {
        let dims = Dimensions { workers: 8, inputs: 4, collusion: 1, adversaries: 1, groups: 2, sub_responses: 2 };
        let params =
            GlccParams::new(dims, PrimeModulus::new(97).unwrap(), Arc::new(parse_program("square_map").unwrap()))
                .unwrap();
        let domain = build_domain(&params, layout).unwrap();
        let sim = SimConfig { straggler: StragglerModel::Exponential { lambda: 2.0 }, ..SimConfig::default() };
        let t = run_round(&random_dataset(&params, 5), &params, &domain, &sim, 5).unwrap();
        TranscriptRecord::from_round(&t, dims, 97, "square_map", layout)
    }

    #[test]
    fn round_trip() {
        for layout in [DomainLayout::Sequential, DomainLayout::DataFirst, DomainLayout::Shuffled { seed: 12 }] {
            let rec = round(layout);
            let text = rec.render();
            assert_eq!(TranscriptRecord::parse(&text).unwrap(), rec);
            assert!(!text.contains('.'), "no floating point in transcripts");
        }
    }

    #[test]
    fn rejects_malformed() {
        let text = round(DomainLayout::DataFirst).render();
        assert_eq!(TranscriptRecord::parse(&text.replacen("field 97", "field x", 1)).unwrap_err().line, 2);
        assert!(TranscriptRecord::parse(&text.replacen("outcome exact", "outcome great", 1)).is_err());
        assert!(TranscriptRecord::parse(&text.replacen("outcome exact\n", "", 1)).is_err());
        assert!(TranscriptRecord::parse(&text.replacen("glcc-transcript 1", "glcc-transcript 2", 1)).is_err());
        let bad_value = text.replacen("response ", "response 0 0 97\nresponse ", 1);
        assert!(TranscriptRecord::parse(&bad_value).is_err());
    }

    #[test]
    fn layouts_parse() {
        assert_eq!(parse_layout("shuffled:7"), Some(DomainLayout::Shuffled { seed: 7 }));
        assert_eq!(parse_layout("shuffled:"), None);
        assert_eq!(parse_layout("random"), None);
    }
}
