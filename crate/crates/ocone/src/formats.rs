//! Text, JSON and CSV encodings of paths, laws and sampled continuous paths.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use ocone_core::bridge::SampledContinuousPath;
use ocone_core::law::PathLaw;
use ocone_core::path::LatticePath;
use ocone_core::{PathLike, SkipFreePath};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One support point of a law; the mass is `num / den`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawEntry {
    pub path: String,
    pub num: String,
    pub den: String,
}

pub fn law_entries(law: &PathLaw) -> Vec<LawEntry> {
    law.iter()
        .map(|(p, q)| LawEntry {
            path: p.increments(),
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        })
        .collect()
}

pub fn law_from_entries(entries: &[LawEntry]) -> Result<PathLaw> {
    let mut horizon = None;
    let mut parsed = Vec::with_capacity(entries.len());
    for e in entries {
        let path: SkipFreePath = e.path.parse()?;
        let num: BigInt = e
            .num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator {:?}", e.num)))?;
        let den: BigInt = e
            .den
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator {:?}", e.den)))?;
        if den == BigInt::from(0) {
            return Err(Error::Parse("zero denominator".into()));
        }
        horizon.get_or_insert(path.horizon());
        parsed.push((path, BigRational::new(num, den)));
    }
    let horizon = horizon.ok_or_else(|| Error::Parse("empty law".into()))?;
    Ok(PathLaw::from_masses(horizon, parsed)?)
}

pub fn write_law_json<W: Write>(law: &PathLaw, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &law_entries(law))?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum LawDocument {
    Bare(Vec<LawEntry>),
    Report { law: Vec<LawEntry> },
}

/// Reads either a bare entry array or a report carrying a `law` field.
pub fn read_law_json<R: Read>(input: R) -> Result<PathLaw> {
    match serde_json::from_reader(input)? {
        LawDocument::Bare(entries) | LawDocument::Report { law: entries } => {
            law_from_entries(&entries)
        }
    }
}

pub fn write_law_csv<W: Write>(law: &PathLaw, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in law_entries(law) {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_law_csv<R: Read>(input: R) -> Result<PathLaw> {
    let mut r = csv::Reader::from_reader(input);
    let entries = r.deserialize().collect::<Result<Vec<LawEntry>, _>>()?;
    law_from_entries(&entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SampleRow {
    t: f64,
    value: f64,
}

/// Reads a `t,value` CSV with a header row.
pub fn read_sampled_csv<R: Read>(input: R, exact_crossings: bool) -> Result<SampledContinuousPath> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<Result<Vec<SampleRow>, _>>()?;
    let (times, values) = rows.iter().map(|s| (s.t, s.value)).unzip();
    Ok(SampledContinuousPath::new(times, values, exact_crossings)?)
}

pub fn write_sampled_csv<W: Write>(path: &SampledContinuousPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (&t, &value) in path.times().iter().zip(path.values()) {
        w.serialize(SampleRow { t, value })?;
    }
    w.flush()?;
    Ok(())
}

/// A jump of a lattice path and the value right after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRow {
    pub t: f64,
    pub sign: i8,
    pub value: f64,
}

pub fn lattice_jumps(l: &LatticePath) -> Vec<JumpRow> {
    let mut value = 0.0;
    l.jump_times()
        .iter()
        .zip(l.jump_signs())
        .map(|(&t, &sign)| {
            value += sign as f64 * l.mesh();
            JumpRow { t, sign, value }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ocone_core::law::{enumerate_law, ProcessSpec};

    #[test]
    fn law_round_trips() {
        let law = enumerate_law(&ProcessSpec::Ce1, 4).unwrap();
        let mut json = Vec::new();
        write_law_json(&law, &mut json).unwrap();
        assert_eq!(read_law_json(json.as_slice()).unwrap(), law);
        let mut csv = Vec::new();
        write_law_csv(&law, &mut csv).unwrap();
        assert!(String::from_utf8_lossy(&csv).starts_with("path,num,den\n"));
        assert_eq!(read_law_csv(csv.as_slice()).unwrap(), law);
    }

    #[test]
    fn sampled_round_trips() {
        let p = SampledContinuousPath::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.25, -0.125], false)
            .unwrap();
        let mut csv = Vec::new();
        write_sampled_csv(&p, &mut csv).unwrap();
        assert_eq!(read_sampled_csv(csv.as_slice(), false).unwrap(), p);
    }

    #[test]
    fn bad_law_rejected() {
        let entries = vec![LawEntry {
            path: "+".into(),
            num: "1".into(),
            den: "3".into(),
        }];
        assert!(law_from_entries(&entries).is_err());
    }
}
