//! On-disk net cache. Files hold the word list only; matrices, the index
//! and the covering estimate are rebuilt on load.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{GateWord, Result, SU2Net};
use crate::gates::NamedGate;

/// Overrides the cache directory.
pub const NET_CACHE_ENV: &str = "QCSYNTH_NET_CACHE";
const CACHE_MAGIC: &[u8; 4] = b"QSN1";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(NET_CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("qcsynth-net"))
}

fn digest(alphabet: &[NamedGate], max_length: usize) -> String {
    let mut letters = alphabet.to_vec();
    letters.sort();
    letters.dedup();
    let mut h = Sha256::new();
    h.update(CACHE_MAGIC);
    h.update(letters.iter().map(|g| g.to_u8()).collect::<Vec<u8>>());
    h.update((max_length as u64).to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn cache_path(dir: &Path, alphabet: &[NamedGate], max_length: usize) -> PathBuf {
    dir.join(format!(
        "su2net-{}.bin",
        &digest(alphabet, max_length)[..32]
    ))
}

fn encode(net: &SU2Net) -> Vec<u8> {
    let mut out = CACHE_MAGIC.to_vec();
    out.extend_from_slice(&(net.entries.len() as u32).to_le_bytes());
    for w in &net.entries {
        out.push(w.len() as u8);
        out.extend(w.letters().iter().map(|g| g.to_u8()));
    }
    out
}

fn decode(bytes: &[u8]) -> Option<Vec<GateWord>> {
    let rest = bytes.strip_prefix(CACHE_MAGIC)?;
    let count = u32::from_le_bytes(rest.get(..4)?.try_into().ok()?) as usize;
    let mut pos = 4;
    let mut words = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let len = *rest.get(pos)? as usize;
        let letters = rest
            .get(pos + 1..pos + 1 + len)?
            .iter()
            .map(|&c| NamedGate::from_u8(c))
            .collect::<Option<Vec<_>>>()?;
        pos += 1 + len;
        words.push(GateWord::from_letters(letters));
    }
    (pos == rest.len()).then_some(words)
}

/// Loads the net for `(alphabet, max_length)` from `dir`, building and
/// storing it on a miss. Unreadable or stale files are rebuilt.
pub fn load_or_build(dir: &Path, alphabet: &[NamedGate], max_length: usize) -> Result<SU2Net> {
    let path = cache_path(dir, alphabet, max_length);
    if let Ok(bytes) = fs::read(&path) {
        if let Some(words) = decode(&bytes) {
            let mut letters = alphabet.to_vec();
            letters.sort();
            letters.dedup();
            return Ok(SU2Net::from_entries(letters, max_length, words));
        }
    }
    let net = SU2Net::build(alphabet, max_length)?;
    fs::create_dir_all(dir)?;
    // Write then rename so concurrent builders never see a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&encode(&net))?;
    f.sync_all()?;
    match fs::rename(&tmp, &path) {
        Ok(()) => {}
        Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
            let _ = fs::remove_file(&tmp);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_disk() {
        use NamedGate::*;
        let dir = tempfile::tempdir().unwrap();
        let built = load_or_build(dir.path(), &[H, T], 5).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let loaded = load_or_build(dir.path(), &[T, H], 5).unwrap();
        assert_eq!(built.entries(), loaded.entries());
        assert_eq!(built.epsilon0(), loaded.epsilon0());

        let path = cache_path(dir.path(), &[H, T], 5);
        fs::write(&path, b"garbage").unwrap();
        let rebuilt = load_or_build(dir.path(), &[H, T], 5).unwrap();
        assert_eq!(rebuilt.entries(), built.entries());
    }

    #[test]
    fn digest_depends_on_inputs() {
        use NamedGate::*;
        assert_eq!(digest(&[H, T], 4), digest(&[T, H, H], 4));
        assert_ne!(digest(&[H, T], 4), digest(&[H, T], 5));
        assert_ne!(digest(&[H, T], 4), digest(&[H, S], 4));
    }
}
