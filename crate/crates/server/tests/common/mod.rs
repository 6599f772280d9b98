#![allow(dead_code)]

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use telebrain_core::model::*;
use telebrain_core::store::ContentStore;
use telebrain_core::timing::SystemClock;
use telebrain_core::wire::{self, Frame, Join, Message, SeqCounter};
use telebrain_server::{router, Hub, HubOptions};
use tokio::net::{TcpStream, UdpSocket};
use tokio_tungstenite::tungstenite::Message as WsMessage;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

pub const VENUE_NAME: &str = "Free-For-All-Model";
pub const LOCKED_VENUE: &str = "Green-Room";
pub const PASSCODE: &str = "sesame";
pub const PNG: &[u8] = &[0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A, 0, 0, 0, 13, b'I', b'H', b'D', b'R'];
pub const TIMER_MS: u64 = 300;

/// Ids the store assigned to the fixture objects.
pub struct Ids {
    pub venue: ObjectId,
    pub image: ObjectId,
    pub image_blob: String,
    pub timed: ObjectId,
    pub osc_in: ObjectId,
}

pub struct Server {
    pub addr: SocketAddr,
    pub hub: Arc<Hub>,
    pub ids: Ids,
    /// Receives outbound OSC aimed at performers whose local ip is loopback.
    pub osc_rx: UdpSocket,
    _dir: tempfile::TempDir,
}

fn role(name: &str, caps: CapabilitySet, capacity: Option<u32>) -> VenueRole {
    VenueRole {
        role: Role {
            id: ObjectId::from(format!("role-{}", name.to_lowercase())),
            name: name.into(),
            capabilities: caps,
            audio_required: false,
            lock: None,
        },
        capacity,
    }
}

fn venue(name: &str, passcode: Option<&str>) -> Venue {
    use Capability::*;
    Venue {
        id: ObjectId::from("pending"),
        name: name.into(),
        roles: vec![
            role("Prompter", CapabilitySet::full(), None),
            role(
                "Receiver",
                [SendImage, SendAudio, ReceiveText, ReceiveImage, ReceiveAudio, ShowTitle, PerformerList, GlobalActivityLog]
                    .into_iter()
                    .collect(),
                None,
            ),
            role("AudioOnly", [ReceiveAudio, PerformerActivityLog].into_iter().collect(), None),
        ],
        passcode: passcode.map(PasscodeDigest::new),
        join_requirements: if passcode.is_some() {
            BTreeSet::from([JoinRequirement::Passcode])
        } else {
            BTreeSet::new()
        },
        delay_budget_ms: None,
        timezone: None,
        lock: None,
    }
}

fn algorithm(store: &ContentStore, name: &str, kind: AlgorithmKind) -> ObjectId {
    let doc = Document::Algorithm(AlgorithmObject {
        id: ObjectId::from("pending"),
        name: name.into(),
        kind,
        lock: None,
    });
    store.insert(doc).unwrap().id().clone()
}

fn populate(store: &ContentStore) -> Ids {
    let venue_id = store.insert(Document::Venue(venue(VENUE_NAME, None))).unwrap().id().clone();
    store.insert(Document::Venue(venue(LOCKED_VENUE, Some(PASSCODE)))).unwrap();
    let image = store.save_upload(PNG, Some("image/png"), ContentKind::ImageUpload, "Fsharp4").unwrap();
    let Media::Blob(blob) = &image.media else { panic!("image has a blob") };
    let timer = algorithm(store, "short timer", AlgorithmKind::Timer { duration_ms: TIMER_MS });
    let timed = algorithm(
        store,
        "show F# after the timer",
        AlgorithmKind::TimedOrganization {
            entries: vec![TimedEntry {
                trigger: timer,
                action: DistributionStep {
                    content: image.id.clone(),
                    target: StepTarget::All,
                },
            }],
        },
    );
    let osc_in = algorithm(
        store,
        "desk cue 1",
        AlgorithmKind::OscBinding {
            direction: OscDirection::In,
            address: "/cue/1".into(),
            target: image.id.clone(),
        },
    );
    Ids {
        venue: venue_id,
        image: image.id.clone(),
        image_blob: blob.blob_id.clone(),
        timed,
        osc_in,
    }
}

pub async fn start() -> Server {
    let dir = tempfile::tempdir().unwrap();
    let store = ContentStore::open(dir.path()).unwrap();
    let ids = populate(&store);
    let osc_rx = UdpSocket::bind("127.0.0.1:0").await.unwrap();
    let options = HubOptions {
        rng_seed: Some(7),
        osc_send_port: osc_rx.local_addr().unwrap().port(),
        ..HubOptions::default()
    };
    let hub = Hub::new(Arc::new(store), Arc::new(SystemClock::new()), options);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(Arc::clone(&hub));
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    Server {
        addr,
        hub,
        ids,
        osc_rx,
        _dir: dir,
    }
}

pub const WAIT: Duration = Duration::from_secs(5);

pub struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
    seq: SeqCounter,
}

impl Client {
    pub async fn connect(addr: SocketAddr) -> Self {
        let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/perform")).await.unwrap();
        Self {
            ws,
            seq: SeqCounter::default(),
        }
    }

    pub fn next_seq(&mut self) -> u64 {
        self.seq.next()
    }

    pub async fn send(&mut self, msg: Message) -> u64 {
        let seq = self.seq.next();
        self.send_frame(Frame::from_message(seq, &msg)).await;
        seq
    }

    pub async fn send_frame(&mut self, frame: Frame) {
        self.send_text(wire::serialize(&frame)).await;
    }

    pub async fn send_text(&mut self, text: String) {
        self.ws.send(WsMessage::Text(text)).await.unwrap();
    }

    /// The next frame, or `None` once the server has closed.
    pub async fn next_frame(&mut self) -> Option<Frame> {
        loop {
            let ws = tokio::time::timeout(WAIT, self.ws.next())
                .await
                .expect("timed out waiting for a frame")?;
            match ws {
                Ok(WsMessage::Text(t)) => return Some(wire::deserialize(&t).unwrap()),
                Ok(WsMessage::Close(_)) | Err(_) => return None,
                Ok(_) => continue,
            }
        }
    }

    pub async fn recv(&mut self) -> Message {
        self.next_frame().await.expect("connection closed").message().unwrap()
    }

    /// Skips frames until one satisfies `pick`.
    pub async fn recv_until<T>(&mut self, mut pick: impl FnMut(Message) -> Option<T>) -> T {
        loop {
            if let Some(t) = pick(self.recv().await) {
                return t;
            }
        }
    }

    /// Waits briefly and asserts nothing matching `pick` arrived.
    pub async fn assert_silent(&mut self, mut pick: impl FnMut(&Message) -> bool, window: Duration) {
        let deadline = tokio::time::Instant::now() + window;
        while let Ok(Some(Ok(WsMessage::Text(t)))) = tokio::time::timeout_at(deadline, self.ws.next()).await {
            let msg = wire::deserialize(&t).unwrap().message().unwrap();
            assert!(!pick(&msg), "unexpected {msg:?}");
        }
    }

    pub async fn close(mut self) {
        let _ = self.ws.close(None).await;
    }
}

pub fn join(performance: &str, nickname: &str, role: &str) -> Join {
    Join {
        performance: performance.into(),
        venue: None,
        nickname: nickname.into(),
        role: role.into(),
        passcode: None,
        local_ip: None,
    }
}

pub fn start_join(performance: &str, venue: &str, nickname: &str, role: &str) -> Join {
    Join {
        venue: Some(venue.into()),
        ..join(performance, nickname, role)
    }
}

/// Connects and joins, returning the client after its join_ack.
pub async fn joined(addr: SocketAddr, j: Join) -> Client {
    let mut c = Client::connect(addr).await;
    c.send(Message::Join(j)).await;
    match c.recv().await {
        Message::JoinAck(_) => c,
        other => panic!("expected join_ack, got {other:?}"),
    }
}

pub fn error_code(msg: &Message) -> Option<&str> {
    match msg {
        Message::Error(e) => Some(e.code.as_str()),
        _ => None,
    }
}
