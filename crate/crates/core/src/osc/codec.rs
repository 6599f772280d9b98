use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum OscArg {
    Int(i32),
    Float(f32),
    Str(String),
    Blob(Vec<u8>),
}

impl OscArg {
    pub fn tag(&self) -> u8 {
        match self {
            Self::Int(_) => b'i',
            Self::Float(_) => b'f',
            Self::Str(_) => b's',
            Self::Blob(_) => b'b',
        }
    }
}

/// Floats compare by bit pattern so decoding is an exact inverse of encoding.
impl PartialEq for OscArg {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Int(a), Self::Int(b)) => a == b,
            (Self::Float(a), Self::Float(b)) => a.to_bits() == b.to_bits(),
            (Self::Str(a), Self::Str(b)) => a == b,
            (Self::Blob(a), Self::Blob(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for OscArg {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OscMessage {
    pub address: String,
    #[serde(default)]
    pub args: Vec<OscArg>,
}

impl OscMessage {
    pub fn new(address: impl Into<String>, args: Vec<OscArg>) -> Self {
        Self {
            address: address.into(),
            args,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OscErrorKind {
    Truncated,
    BadAddress,
    MissingTypeTags,
    UnsupportedType(char),
    Unterminated,
    BadPadding,
    InvalidUtf8,
    TrailingBytes,
    Bundle,
    NulInString,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("osc error at byte {offset}: {kind:?}")]
pub struct OscError {
    pub offset: usize,
    pub kind: OscErrorKind,
}

fn err<T>(offset: usize, kind: OscErrorKind) -> Result<T, OscError> {
    Err(OscError { offset, kind })
}

fn pad4(n: usize) -> usize {
    (n + 3) & !3
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(s.as_bytes());
    let total = pad4(s.len() + 1);
    out.resize(out.len() + total - s.len(), 0);
}

/// Every field is padded with NULs to a multiple of four bytes.
pub fn encode(msg: &OscMessage) -> Result<Vec<u8>, OscError> {
    if !msg.address.starts_with('/') {
        return err(0, OscErrorKind::BadAddress);
    }
    if msg.address.contains('\0') {
        return err(0, OscErrorKind::NulInString);
    }
    let mut out = Vec::with_capacity(64);
    put_str(&mut out, &msg.address);
    let mut tags = String::with_capacity(msg.args.len() + 1);
    tags.push(',');
    tags.extend(msg.args.iter().map(|a| a.tag() as char));
    put_str(&mut out, &tags);
    for arg in &msg.args {
        match arg {
            OscArg::Int(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Float(v) => out.extend_from_slice(&v.to_be_bytes()),
            OscArg::Str(s) => {
                if s.contains('\0') {
                    return err(out.len(), OscErrorKind::NulInString);
                }
                put_str(&mut out, s);
            }
            OscArg::Blob(b) => {
                out.extend_from_slice(&(b.len() as u32).to_be_bytes());
                out.extend_from_slice(b);
                out.resize(pad4(out.len()), 0);
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], OscError> {
        if self.buf.len() - self.pos < n {
            return err(self.pos, OscErrorKind::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn word(&mut self) -> Result<[u8; 4], OscError> {
        Ok(self.take(4)?.try_into().expect("took 4 bytes"))
    }

    fn string(&mut self) -> Result<&'a str, OscError> {
        let start = self.pos;
        let rest = &self.buf[start..];
        let Some(nul) = rest.iter().position(|b| *b == 0) else {
            return err(self.buf.len(), OscErrorKind::Unterminated);
        };
        let end = pad4(nul + 1);
        if end > rest.len() {
            return err(self.buf.len(), OscErrorKind::Truncated);
        }
        if let Some(i) = rest[nul..end].iter().position(|b| *b != 0) {
            return err(start + nul + i, OscErrorKind::BadPadding);
        }
        let s = std::str::from_utf8(&rest[..nul]).map_err(|_| OscError {
            offset: start,
            kind: OscErrorKind::InvalidUtf8,
        })?;
        self.pos = start + end;
        Ok(s)
    }
}

pub fn decode(bytes: &[u8]) -> Result<OscMessage, OscError> {
    if bytes.starts_with(b"#bundle\0") {
        return err(0, OscErrorKind::Bundle);
    }
    if !bytes.len().is_multiple_of(4) {
        return err(bytes.len(), OscErrorKind::Truncated);
    }
    let mut r = Reader { buf: bytes, pos: 0 };
    let address = r.string()?;
    if !address.starts_with('/') {
        return err(0, OscErrorKind::BadAddress);
    }
    let tag_at = r.pos;
    if r.pos == bytes.len() {
        return err(tag_at, OscErrorKind::MissingTypeTags);
    }
    let tags = r.string()?;
    let Some(tags) = tags.strip_prefix(',') else {
        return err(tag_at, OscErrorKind::MissingTypeTags);
    };
    let mut args = Vec::with_capacity(tags.len());
    for (i, tag) in tags.chars().enumerate() {
        let arg = match tag {
            'i' => OscArg::Int(i32::from_be_bytes(r.word()?)),
            'f' => OscArg::Float(f32::from_be_bytes(r.word()?)),
            's' => OscArg::Str(r.string()?.to_string()),
            'b' => {
                let len_at = r.pos;
                let len = u32::from_be_bytes(r.word()?) as usize;
                if len > bytes.len() {
                    return err(len_at, OscErrorKind::Truncated);
                }
                let data = r.take(len)?.to_vec();
                let pad = r.take(pad4(len) - len)?;
                if pad.iter().any(|b| *b != 0) {
                    return err(r.pos - pad.len(), OscErrorKind::BadPadding);
                }
                OscArg::Blob(data)
            }
            other => return err(tag_at + 1 + i, OscErrorKind::UnsupportedType(other)),
        };
        args.push(arg);
    }
    if r.pos != bytes.len() {
        return err(r.pos, OscErrorKind::TrailingBytes);
    }
    Ok(OscMessage {
        address: address.to_string(),
        args,
    })
}
