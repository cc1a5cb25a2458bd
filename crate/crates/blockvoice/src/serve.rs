//! Session server. Speaks the line protocol of
//! [`blockvoice_core::pipeline::protocol`] either as newline-delimited JSON
//! over plain TCP or as one JSON text frame per message over WebSocket, both
//! on the same port. One client at a time; the session outlives connections.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use blockvoice_core::config::{Config, Language};
use blockvoice_core::pipeline::protocol::{self, Outbound};
use blockvoice_core::pipeline::{Event, Session, SessionError};
use thiserror::Error;
use tungstenite::{Message, WebSocket};

const POLL: Duration = Duration::from_millis(100);
pub const BUSY_MESSAGE: &str = "another client is connected; only one session at a time";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error(transparent)]
    Session(#[from] SessionError),
}

enum Recv {
    Line(String),
    Idle,
    Closed,
}

trait Transport {
    fn recv(&mut self) -> io::Result<Recv>;
    fn send(&mut self, line: &str) -> io::Result<()>;
}

fn timed_out(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

struct LineTransport {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    partial: Vec<u8>,
}

impl Transport for LineTransport {
    fn recv(&mut self) -> io::Result<Recv> {
        match self.reader.read_until(b'\n', &mut self.partial) {
            Ok(0) if self.partial.is_empty() => Ok(Recv::Closed),
            Ok(_) => {
                let line = String::from_utf8_lossy(&self.partial).trim().to_string();
                self.partial.clear();
                Ok(Recv::Line(line))
            }
            Err(e) if timed_out(&e) => Ok(Recv::Idle),
            Err(e) => Err(e),
        }
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }
}

struct WsTransport(WebSocket<TcpStream>);

impl Transport for WsTransport {
    fn recv(&mut self) -> io::Result<Recv> {
        match self.0.read() {
            Ok(Message::Text(t)) => Ok(Recv::Line(t.to_string())),
            Ok(Message::Binary(b)) => Ok(Recv::Line(String::from_utf8_lossy(&b).into_owned())),
            Ok(Message::Close(_)) => Ok(Recv::Closed),
            Ok(_) => Ok(Recv::Idle),
            Err(tungstenite::Error::Io(e)) if timed_out(&e) => Ok(Recv::Idle),
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => Ok(Recv::Closed),
            Err(e) => Err(io::Error::other(e)),
        }
    }

    fn send(&mut self, line: &str) -> io::Result<()> {
        self.0.send(Message::text(line)).map_err(io::Error::other)
    }
}

fn is_websocket(stream: &TcpStream) -> io::Result<bool> {
    let mut head = [0u8; 4];
    let mut seen = 0;
    // Plain clients may stay silent after connecting; treat that as line mode.
    let deadline = Instant::now() + Duration::from_millis(300);
    while seen < 4 && Instant::now() < deadline {
        stream.set_read_timeout(Some(POLL))?;
        match stream.peek(&mut head) {
            Ok(0) => break,
            Ok(n) => seen = n,
            Err(e) if timed_out(&e) => {}
            Err(e) => return Err(e),
        }
        if seen < 4 {
            thread::sleep(Duration::from_millis(10));
        }
    }
    Ok(&head[..seen] == b"GET ")
}

fn open(stream: TcpStream) -> io::Result<Box<dyn Transport>> {
    if is_websocket(&stream)? {
        stream.set_read_timeout(Some(Duration::from_secs(5)))?;
        let ws = tungstenite::accept(stream.try_clone()?).map_err(io::Error::other)?;
        stream.set_read_timeout(Some(POLL))?;
        Ok(Box::new(WsTransport(ws)))
    } else {
        stream.set_read_timeout(Some(POLL))?;
        let writer = stream.try_clone()?;
        Ok(Box::new(LineTransport { reader: BufReader::new(stream), writer, partial: Vec::new() }))
    }
}

fn send_all(t: &mut dyn Transport, messages: &[Outbound]) -> io::Result<()> {
    for m in messages {
        t.send(&m.to_line())?;
    }
    Ok(())
}

pub struct Server {
    listener: TcpListener,
    session: Arc<Mutex<Session>>,
    busy: Arc<AtomicBool>,
    started: Instant,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs + std::fmt::Display, config: &Config, language: Language) -> Result<Server, ServeError> {
        let listener = TcpListener::bind(&addr).map_err(|source| ServeError::Bind { addr: addr.to_string(), source })?;
        Ok(Server {
            listener,
            session: Arc::new(Mutex::new(Session::new(config, language)?)),
            busy: Arc::new(AtomicBool::new(false)),
            started: Instant::now(),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts clients until the listener fails.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            if self.busy.swap(true, Ordering::SeqCst) {
                thread::spawn(move || refuse(stream));
                continue;
            }
            let session = Arc::clone(&self.session);
            let busy = Arc::clone(&self.busy);
            let started = self.started;
            thread::spawn(move || {
                let _ = serve_client(stream, &session, started);
                busy.store(false, Ordering::SeqCst);
            });
        }
        Ok(())
    }
}

fn refuse(stream: TcpStream) {
    if let Ok(mut t) = open(stream) {
        let _ = t.send(&Outbound::Error { message: BUSY_MESSAGE.into() }.to_line());
    }
}

fn serve_client(stream: TcpStream, session: &Mutex<Session>, started: Instant) -> io::Result<()> {
    let mut transport = open(stream)?;
    let t = transport.as_mut();
    let now = || started.elapsed().as_millis() as u64;
    {
        let session = session.lock().expect("session lock");
        send_all(t, &protocol::greeting(&session))?;
    }
    loop {
        let received = t.recv()?;
        let mut session = session.lock().expect("session lock");
        match received {
            Recv::Closed => return Ok(()),
            Recv::Line(line) if line.trim().is_empty() => {}
            Recv::Line(line) => match protocol::parse_event(&line) {
                Ok(event) => {
                    let step = session.handle_event(now(), event);
                    send_all(t, &protocol::messages(&step, &session))?;
                }
                Err(message) => t.send(&Outbound::Error { message }.to_line())?,
            },
            Recv::Idle => {
                let before = (session.phase(), session.recording());
                let step = session.handle_event(now(), Event::Tick);
                if !step.feedback.is_empty() || before != (session.phase(), session.recording()) {
                    send_all(t, &protocol::messages(&step, &session))?;
                }
            }
        }
    }
}
