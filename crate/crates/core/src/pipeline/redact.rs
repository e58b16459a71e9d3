//! Salted hashing of account names and IP addresses.
//!
//! The salt lives in `<secrets>/salt` and is created on first use. Runs that
//! share a secrets directory produce identical tokens. The token-to-name map
//! needed for user lookups is kept next to it in `<secrets>/identities.tsv`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::revisions::Contributor;
use crate::tsv::{self, TsvWriter};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Redactor {
    salt: Vec<u8>,
    dir: Option<PathBuf>,
    /// token -> (kind, raw)
    identities: BTreeMap<String, (String, String)>,
}

impl Redactor {
    pub fn with_salt(salt: &[u8]) -> Self {
        Redactor {
            salt: salt.to_vec(),
            dir: None,
            identities: BTreeMap::new(),
        }
    }

    /// Loads (or creates) the salt in `dir`, plus any saved identities.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let salt_path = dir.join("salt");
        let salt = match std::fs::read_to_string(&salt_path) {
            Ok(text) => hex::decode(text.trim()).map_err(|e| Error::parse(salt_path.display().to_string(), e.to_string()))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let salt: [u8; 32] = rand::random();
                std::fs::write(&salt_path, hex::encode(salt)).map_err(|e| Error::io(&salt_path, e))?;
                salt.to_vec()
            }
            Err(e) => return Err(Error::io(&salt_path, e)),
        };
        let mut r = Redactor {
            salt,
            dir: Some(dir.to_path_buf()),
            identities: BTreeMap::new(),
        };
        let ids = dir.join("identities.tsv");
        if ids.is_file() {
            let (header, rows) = tsv::read(&ids)?;
            let cols = tsv::columns(&header, &["token", "kind", "name"], &ids)?;
            for row in rows {
                r.identities
                    .insert(row[cols[0]].clone(), (row[cols[1]].clone(), row[cols[2]].clone()));
            }
        }
        Ok(r)
    }

    pub fn token(&mut self, kind: &str, raw: &str) -> String {
        let mut h = Sha256::new();
        h.update(&self.salt);
        h.update(kind.as_bytes());
        h.update([0u8]);
        h.update(raw.as_bytes());
        let token = format!("h{}", &hex::encode(h.finalize())[..16]);
        self.identities
            .entry(token.clone())
            .or_insert_with(|| (kind.to_string(), raw.to_string()));
        token
    }

    /// The contributor with its name or address replaced by a token.
    pub fn contributor(&mut self, c: &Contributor) -> Contributor {
        match c {
            Contributor::Account(n) => Contributor::Account(self.token("user", n)),
            Contributor::Bot(n) => Contributor::Bot(self.token("user", n)),
            Contributor::Anonymous(ip) => Contributor::Anonymous(self.token("ip", ip)),
            Contributor::Suppressed => Contributor::Suppressed,
        }
    }

    pub fn name_of(&self, token: &str) -> Option<&str> {
        self.identities.get(token).map(|(_, raw)| raw.as_str())
    }

    pub fn save(&self) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut w = TsvWriter::create(&dir.join("identities.tsv"), &["token", "kind", "name"])?;
        for (token, (kind, raw)) in &self.identities {
            w.row(&[token.as_str(), kind.as_str(), raw.as_str()])?;
        }
        w.finish()
    }
}
