//! Artifact files: header stamping, hash verification, and atomic writes.
//!
//! Every artifact begins with `# vigil <kind> v1` and a header line carrying
//! the config hash and seeds. Writes go to a temp file renamed into place so
//! partial outputs are never left behind.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct ArtifactHeader {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub trial_seed: u64,
}

impl ArtifactHeader {
    pub fn new(kind: &str, config_hash: &str, seed: u64, trial_seed: u64) -> Self {
        ArtifactHeader {
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            trial_seed,
        }
    }

    fn lines(&self) -> [String; 2] {
        [
            format!("# vigil {} v1", self.kind),
            format!(
                "# config_hash={} seed={} trial_seed={}",
                self.config_hash, self.seed, self.trial_seed
            ),
        ]
    }
}

/// Writes an artifact atomically: header lines, then each record line.
pub fn write_artifact<I>(path: &Path, header: &ArtifactHeader, records: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        for line in header.lines() {
            writeln!(w, "{line}")?;
        }
        for record in records {
            writeln!(w, "{}", record.as_ref())?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Opens an artifact, checks kind and config hash, and returns a reader
/// positioned after the header plus the parsed header.
pub fn open_artifact(
    path: &Path,
    expect_kind: &str,
    expect_hash: Option<&str>,
) -> Result<(ArtifactHeader, BufReader<File>)> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    let mut second = String::new();
    reader.read_line(&mut first)?;
    reader.read_line(&mut second)?;
    let header = parse_header(first.trim_end(), second.trim_end(), path)?;
    if header.kind != expect_kind {
        return Err(Error::ArtifactMismatch(format!(
            "{path:?} is a `{}` artifact, expected `{expect_kind}`",
            header.kind
        )));
    }
    if let Some(hash) = expect_hash {
        if header.config_hash != hash {
            return Err(Error::ArtifactMismatch(format!(
                "{path:?} was produced under config {} but the current config hashes to {hash}",
                header.config_hash
            )));
        }
    }
    Ok((header, reader))
}

fn parse_header(first: &str, second: &str, path: &Path) -> Result<ArtifactHeader> {
    let bad = |msg: &str| Error::ArtifactMismatch(format!("{path:?}: {msg}"));
    let kind = first
        .strip_prefix("# vigil ")
        .and_then(|s| s.strip_suffix(" v1"))
        .ok_or_else(|| bad("missing `# vigil <kind> v1` header"))?;
    let rest = second
        .strip_prefix("# ")
        .ok_or_else(|| bad("missing header metadata line"))?;
    let mut config_hash = None;
    let mut seed = None;
    let mut trial_seed = None;
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| bad("malformed header metadata"))?;
        match k {
            "config_hash" => config_hash = Some(v.to_string()),
            "seed" => seed = v.parse().ok(),
            "trial_seed" => trial_seed = v.parse().ok(),
            _ => {}
        }
    }
    Ok(ArtifactHeader {
        kind: kind.to_string(),
        config_hash: config_hash.ok_or_else(|| bad("header lacks config_hash"))?,
        seed: seed.ok_or_else(|| bad("header lacks seed"))?,
        trial_seed: trial_seed.ok_or_else(|| bad("header lacks trial_seed"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let header = ArtifactHeader::new("events", "abc123", 5, 61);
        write_artifact(&path, &header, ["1,2", "3,4"]).unwrap();
        let (h, mut r) = open_artifact(&path, "events", Some("abc123")).unwrap();
        assert_eq!(h.seed, 5);
        let mut rest = String::new();
        std::io::Read::read_to_string(&mut r, &mut rest).unwrap();
        assert_eq!(rest, "1,2\n3,4\n");
        assert!(open_artifact(&path, "events", Some("other")).is_err());
        assert!(open_artifact(&path, "ledger", Some("abc123")).is_err());
    }

    #[test]
    fn missing_file_maps_to_exit_2() {
        let err = open_artifact(Path::new("/no/such/file"), "events", None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn no_tmp_residue() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        write_artifact(&path, &ArtifactHeader::new("k", "h", 1, 2), ["z"]).unwrap();
        assert!(!path.with_extension("tmp").exists());
    }
}
