//! Single-client WebSocket endpoint around a [`Handler`].
//!
//! Teleoperation is lockstep: the world only moves when an `act` arrives.
//! In autonomous mode the server ticks itself at `tick_hz` between reads.
//! A dropped connection leaves the session as it was for the next client.

use std::io::ErrorKind;
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use tungstenite::{Message, WebSocket};

use crate::error::Result;
use crate::protocol::{Handler, ServerMessage};

pub struct Server {
    listener: TcpListener,
    handler: Handler,
    tick: Duration,
}

impl Server {
    pub fn new(listener: TcpListener, handler: Handler, tick_hz: f64) -> Self {
        let tick = Duration::from_secs_f64(1.0 / tick_hz.max(1e-3));
        Self { listener, handler, tick }
    }

    pub fn local_addr(&self) -> Result<std::net::SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves clients one after another, forever.
    pub fn run(mut self) -> Result<()> {
        loop {
            let (stream, peer) = self.listener.accept()?;
            log::info!("client connected from {peer}");
            match self.serve_client(stream) {
                Ok(()) => log::info!("client {peer} disconnected"),
                Err(e) => log::warn!("client {peer} dropped: {e}"),
            }
        }
    }

    fn serve_client(&mut self, stream: TcpStream) -> std::result::Result<(), tungstenite::Error> {
        stream.set_nodelay(true).ok();
        let mut ws = tungstenite::accept(stream).map_err(|e| match e {
            tungstenite::HandshakeError::Failure(e) => e,
            tungstenite::HandshakeError::Interrupted(_) => tungstenite::Error::ConnectionClosed,
        })?;
        ws.get_ref().set_read_timeout(Some(self.tick))?;
        send(&mut ws, &self.handler.state(true))?;
        let mut next_tick = Instant::now() + self.tick;
        loop {
            match ws.read() {
                Ok(Message::Text(text)) => {
                    for reply in self.handler.handle_text(&text) {
                        send(&mut ws, &reply)?;
                    }
                }
                Ok(Message::Binary(_)) => send(&mut ws, &ServerMessage::error("expected a text frame"))?,
                Ok(Message::Close(_)) => return Ok(()),
                Ok(_) => {}
                Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
                Err(e) => return Err(e),
            }
            let now = Instant::now();
            if now >= next_tick {
                next_tick = now + self.tick;
                if let Some(msg) = self.handler.tick() {
                    send(&mut ws, &msg)?;
                }
            }
        }
    }
}

fn send(ws: &mut WebSocket<TcpStream>, msg: &ServerMessage) -> std::result::Result<(), tungstenite::Error> {
    ws.send(Message::text(msg.to_json()))
}
