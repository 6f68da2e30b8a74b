//! Live session service.
//!
//! Every WebSocket connection owns one [`LiveSession`]. The session clock is
//! anchored to the first `FingerSample`: tick `n` runs at client time
//! `t_first + n / control_rate`. A queued sample is applied at the first tick
//! whose time is at or after the sample's own timestamp, or at the next tick
//! if it arrived late, so a trace streamed in real time produces the same
//! transitions as an offline replay. Ticks fire a small jitter buffer behind
//! the wall clock to absorb delivery delay.

use std::collections::VecDeque;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream, ToSocketAddrs};
use tokio::time::Instant;
use tokio_tungstenite::tungstenite::Message;

use tap_core::engine::{EngineConfig, FingerState, Phase, Scene, TapProfiles, TapSession};
use tap_core::MM;

use crate::config::AppConfig;
use crate::protocol::{parse_inbound, Inbound, Outbound};

/// Per-connection tap session driven by a fixed-rate tick.
#[derive(Debug, Clone)]
pub struct LiveSession {
    session: TapSession,
    scene: Arc<Scene>,
    rate: f64,
    wire_rate: f64,
    pending: VecDeque<FingerState>,
    last_client_t: Option<f64>,
    origin: Option<f64>,
    tick: u64,
}

impl LiveSession {
    pub fn new(scene: Arc<Scene>, profiles: TapProfiles, engine: EngineConfig, rate: f64, wire_rate: f64) -> Self {
        Self {
            session: TapSession::new(profiles, engine),
            scene,
            rate,
            wire_rate,
            pending: VecDeque::new(),
            last_client_t: None,
            origin: None,
            tick: 0,
        }
    }

    pub fn from_config(config: &AppConfig) -> Self {
        Self::new(
            Arc::new(config.scene.clone()),
            config.profiles,
            config.engine,
            config.control_rate,
            config.wire_rate,
        )
    }

    /// Queues a client sample. Timestamps must not decrease.
    pub fn receive(&mut self, msg: Inbound) -> Result<(), String> {
        let Inbound::FingerSample { t_ms, x_mm, y_mm, down } = msg;
        if ![t_ms, x_mm, y_mm].iter().all(|v| v.is_finite()) {
            return Err("FingerSample fields must be finite".into());
        }
        let t = t_ms * 1e-3;
        if let Some(last) = self.last_client_t {
            if t < last {
                return Err(format!("FingerSample t_ms {t_ms} is earlier than the previous sample"));
            }
        }
        self.last_client_t = Some(t);
        self.origin.get_or_insert(t);
        self.pending.push_back(FingerState::new(t, x_mm * MM, y_mm * MM, down));
        Ok(())
    }

    /// True once the first sample has fixed the session clock.
    pub fn started(&self) -> bool {
        self.origin.is_some()
    }

    /// Offset of the next tick from the first sample (s).
    pub fn next_tick_offset(&self) -> f64 {
        self.tick as f64 / self.rate
    }

    pub fn phase(&self) -> Phase {
        self.session.phase()
    }

    fn wire_due(&self, tick: u64) -> bool {
        if tick == 0 {
            return true;
        }
        let slot = |n: u64| (n as f64 * self.wire_rate / self.rate).floor();
        slot(tick) != slot(tick - 1)
    }

    /// Runs one control tick and returns the messages it produces. Does
    /// nothing before the first sample.
    pub fn run_tick(&mut self) -> Vec<Outbound> {
        let Some(origin) = self.origin else {
            return Vec::new();
        };
        let tick = self.tick;
        self.tick += 1;
        let now = origin + tick as f64 / self.rate;
        while self.pending.front().is_some_and(|s| s.t <= now) {
            let s = self.pending.pop_front().expect("front exists");
            self.session
                .ingest_pointer(s)
                .expect("receive() enforces monotone timestamps");
        }
        let transition = self
            .session
            .advance(&self.scene, now)
            .expect("tick times are monotone");

        let mut out = Vec::new();
        if let Some(t) = transition {
            out.push(Outbound::PhaseTransition {
                t_ms: t.t * 1e3,
                from: t.from.into(),
                to: t.to.into(),
                object_id: t.object_id,
            });
        }
        if transition.is_some() || self.wire_due(tick) {
            let (sample, _) = self.session.drive_for(now).unzip();
            let offset = sample.map(|s| s.focus_offset / MM).unwrap_or_default();
            out.push(Outbound::StateUpdate {
                t_ms: now * 1e3,
                phase: self.session.phase().into(),
                object_id: self.session.active_object(),
                amplitude: sample.map(|s| s.amplitude_scale).unwrap_or(0.0),
                offset_u_mm: offset.x,
                offset_v_mm: offset.y,
            });
        }
        out
    }
}

/// Bound listener plus the shared configuration.
pub struct Server {
    listener: TcpListener,
    config: Arc<AppConfig>,
}

impl Server {
    pub async fn bind(config: AppConfig, addr: impl ToSocketAddrs) -> std::io::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr).await?,
            config: Arc::new(config),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the task is dropped.
    pub async fn run(self) -> std::io::Result<()> {
        loop {
            let (stream, peer) = self.listener.accept().await?;
            let config = Arc::clone(&self.config);
            tokio::spawn(async move {
                if let Err(e) = handle_connection(stream, config).await {
                    eprintln!("session {peer}: {e}");
                }
            });
        }
    }
}

/// Binds `0.0.0.0:port` and serves sessions forever.
pub async fn serve_session(config: AppConfig, port: u16) -> std::io::Result<()> {
    let server = Server::bind(config, ("0.0.0.0", port)).await?;
    eprintln!("listening on ws://{}", server.local_addr()?);
    server.run().await
}

async fn handle_connection(
    stream: TcpStream,
    config: Arc<AppConfig>,
) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    stream.set_nodelay(true)?;
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut tx, mut rx) = ws.split();
    tx.send(Message::text(Outbound::scene(&config.scene).to_json())).await?;

    let mut live = LiveSession::from_config(&config);
    let mut wall_origin: Option<Instant> = None;
    let jitter = Duration::from_secs_f64(config.jitter_buffer);
    loop {
        let deadline = wall_origin.map(|w| w + jitter + Duration::from_secs_f64(live.next_tick_offset()));
        let far = Instant::now() + Duration::from_secs(3600);
        tokio::select! {
            biased;
            msg = rx.next() => match msg {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => break,
                Some(Ok(Message::Text(text))) => {
                    for parsed in parse_inbound(text.as_str()) {
                        if let Err(e) = parsed.and_then(|m| live.receive(m)) {
                            tx.send(Message::text(Outbound::Error { message: e }.to_json())).await?;
                        } else if wall_origin.is_none() {
                            wall_origin = Some(Instant::now());
                        }
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let message = "binary frames are not supported; send JSON text".to_string();
                    tx.send(Message::text(Outbound::Error { message }.to_json())).await?;
                }
                Some(Ok(_)) => {}
            },
            _ = tokio::time::sleep_until(deadline.unwrap_or(far)), if deadline.is_some() => {
                let out = live.run_tick();
                if !out.is_empty() {
                    for m in out {
                        tx.feed(Message::text(m.to_json())).await?;
                    }
                    tx.flush().await?;
                }
            }
        }
    }
    Ok(())
}
