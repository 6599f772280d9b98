use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Salted SHA-256 digest of a passcode. The passcode itself is never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasscodeDigest {
    pub salt: String,
    pub digest: String,
}

impl PasscodeDigest {
    pub fn new(passcode: &str) -> Self {
        let mut salt = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut salt);
        Self::with_salt(passcode, &salt)
    }

    pub fn with_salt(passcode: &str, salt: &[u8]) -> Self {
        Self {
            salt: hex::encode(salt),
            digest: hex::encode(hash(salt, passcode)),
        }
    }

    pub fn verify(&self, passcode: &str) -> bool {
        let Ok(salt) = hex::decode(&self.salt) else {
            return false;
        };
        let Ok(expected) = hex::decode(&self.digest) else {
            return false;
        };
        let actual = hash(&salt, passcode);
        // length is fixed, so fold the whole comparison
        expected.len() == actual.len()
            && expected
                .iter()
                .zip(actual.iter())
                .fold(0u8, |acc, (a, b)| acc | (a ^ b))
                == 0
    }
}

fn hash(salt: &[u8], passcode: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(salt);
    hasher.update(passcode.as_bytes());
    hasher.finalize().into()
}

/// Marks a stored object as protected from mutation and deletion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LockRecord {
    pub passcode: PasscodeDigest,
}

impl LockRecord {
    pub fn new(passcode: &str) -> Self {
        Self {
            passcode: PasscodeDigest::new(passcode),
        }
    }

    pub fn opens_with(&self, passcode: &str) -> bool {
        self.passcode.verify(passcode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_verifies_only_the_original_passcode() {
        let d = PasscodeDigest::new("abc");
        assert!(d.verify("abc"));
        assert!(!d.verify("abd"));
        assert!(!d.verify(""));
        assert!(!d.digest.contains("abc"));
    }

    #[test]
    fn salts_differ_between_digests() {
        let a = PasscodeDigest::new("same");
        let b = PasscodeDigest::new("same");
        assert_ne!(a.salt, b.salt);
        assert_ne!(a.digest, b.digest);
    }
}
