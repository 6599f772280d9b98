//! OSC 1.0 messages over UDP.
//!
//! Supported argument types are `i` (int32), `f` (float32), `s` (string)
//! and `b` (blob). Bundles are not supported. Addresses match literally.

mod codec;
mod router;

pub use codec::{decode, encode, OscArg, OscError, OscErrorKind, OscMessage};
pub use router::{OscRouter, RouteError};

use std::net::{IpAddr, SocketAddr, UdpSocket};

pub const DEFAULT_LISTEN_PORT: u16 = 57121;
pub const DEFAULT_SEND_PORT: u16 = 57120;

#[derive(Debug, thiserror::Error)]
pub enum SendError {
    #[error("{0} has no local ip registered")]
    NoLocalIp(String),
    #[error("invalid local ip {0:?}")]
    BadAddress(String),
    #[error(transparent)]
    Encode(#[from] OscError),
    #[error("udp send failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Sends datagrams from one bound socket.
#[derive(Debug)]
pub struct OscSender {
    socket: UdpSocket,
}

impl OscSender {
    pub fn bind(addr: SocketAddr) -> Result<Self, SendError> {
        Ok(Self {
            socket: UdpSocket::bind(addr)?,
        })
    }

    /// A sender on an ephemeral local port.
    pub fn ephemeral() -> Result<Self, SendError> {
        Self::bind(SocketAddr::from(([0, 0, 0, 0], 0)))
    }

    pub fn send_to(&self, msg: &OscMessage, to: SocketAddr) -> Result<usize, SendError> {
        let bytes = encode(msg)?;
        Ok(self.socket.send_to(&bytes, to)?)
    }

    /// Sends to a performer's registered local ip.
    pub fn send_outbound(
        &self,
        endpoint: &str,
        local_ip: Option<&str>,
        port: u16,
        msg: &OscMessage,
    ) -> Result<SocketAddr, SendError> {
        let ip = local_ip.ok_or_else(|| SendError::NoLocalIp(endpoint.to_string()))?;
        let ip: IpAddr = ip.parse().map_err(|_| SendError::BadAddress(ip.to_string()))?;
        let to = SocketAddr::new(ip, port);
        self.send_to(msg, to)?;
        Ok(to)
    }
}
