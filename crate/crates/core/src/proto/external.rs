use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use super::message::{decode, encode, ErrorCode, Message, ProtocolError};
use crate::agents::{Agent, AgentError, ClockMode, Decision, GameInfo, Outcome, Percept, Response};

/// Environment variable overriding the wall-ms to virtual-unit rate.
pub const RATE_ENV: &str = "GGB_RATE";

#[derive(Clone, Debug, PartialEq)]
pub struct ExternalConfig {
    /// Longest wait for one reply before a pass is injected.
    pub wall_ceiling_ms: u64,
    /// Virtual units charged per wall millisecond.
    pub rate: f64,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig {
            wall_ceiling_ms: 1000,
            rate: 1.0,
        }
    }
}

impl ExternalConfig {
    /// Defaults with the rate taken from `GGB_RATE` when set and valid.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        if let Some(r) = std::env::var(RATE_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|r| r.is_finite() && *r > 0.0)
        {
            c.rate = r;
        }
        c
    }

    fn charge(&self, elapsed: Duration) -> u64 {
        let ms = elapsed.as_secs_f64() * 1000.0;
        ((ms * self.rate).ceil() as u64).max(1)
    }
}

#[derive(Clone, Debug)]
enum Target {
    Command(String),
    Tcp(String),
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    socket: Option<TcpStream>,
    sent: u64,
    received: u64,
}

impl Connection {
    fn open(target: &Target) -> Result<Connection, AgentError> {
        let (tx, rx) = mpsc::channel();
        let mut socket = None;
        let (writer, reader, child): (Box<dyn Write + Send>, Box<dyn std::io::Read + Send>, _) =
            match target {
                Target::Command(cmd) => {
                    let mut child = Command::new("sh")
                        .arg("-c")
                        .arg(cmd)
                        .stdin(Stdio::piped())
                        .stdout(Stdio::piped())
                        .stderr(Stdio::inherit())
                        .spawn()
                        .map_err(|e| AgentError::Transport(format!("spawn `{cmd}`: {e}")))?;
                    let stdin = child.stdin.take().expect("piped stdin");
                    let stdout = child.stdout.take().expect("piped stdout");
                    (Box::new(stdin), Box::new(stdout), Some(child))
                }
                Target::Tcp(addr) => {
                    let stream = TcpStream::connect(addr)
                        .map_err(|e| AgentError::Transport(format!("connect {addr}: {e}")))?;
                    stream.set_nodelay(true).ok();
                    let clone = |s: &TcpStream| {
                        s.try_clone()
                            .map_err(|e| AgentError::Transport(e.to_string()))
                    };
                    let read = clone(&stream)?;
                    socket = Some(clone(&stream)?);
                    (Box::new(stream), Box::new(read), None)
                }
            };
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Connection {
            writer,
            lines: rx,
            child,
            socket,
            sent: 0,
            received: 0,
        })
    }

    fn send(&mut self, msg: &Message) -> Result<(), AgentError> {
        self.writer
            .write_all(encode(msg).as_bytes())
            .and_then(|_| self.writer.flush())
            .map_err(|e| AgentError::Transport(format!("write: {e}")))
    }

    /// Waits until `deadline` for the reply to the latest observation,
    /// discarding late replies to earlier ones.
    fn reply(&mut self, deadline: Instant) -> Result<Option<Message>, AgentError> {
        loop {
            let wait = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(wait) {
                Ok(Ok(line)) => {
                    self.received += 1;
                    let msg = decode(&line)?;
                    if self.received == self.sent {
                        return Ok(Some(msg));
                    }
                }
                Ok(Err(e)) => return Err(AgentError::Transport(format!("read: {e}"))),
                Err(RecvTimeoutError::Timeout) => return Ok(None),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(ProtocolError::new(
                        ErrorCode::Closed,
                        0,
                        "agent closed the connection",
                    )
                    .into())
                }
            }
        }
    }

    fn close(mut self) {
        // Dropping the writer closes the child's stdin.
        self.writer = Box::new(std::io::sink());
        if let Some(s) = self.socket.take() {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
        if let Some(mut child) = self.child.take() {
            let until = Instant::now() + Duration::from_millis(200);
            while Instant::now() < until {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// An agent in another process, reached over stdio or TCP.
///
/// One connection is opened per evaluation (at `init`) and closed after the
/// result is sent. A reply slower than the wall ceiling is replaced by an
/// injected pass; its late arrival is discarded.
pub struct ExternalAgent {
    id: String,
    target: Target,
    cfg: ExternalConfig,
    conn: Option<Connection>,
    injected: u64,
}

impl ExternalAgent {
    pub fn command(cmd: &str, cfg: ExternalConfig) -> Self {
        ExternalAgent {
            id: format!("cmd:\"{cmd}\""),
            target: Target::Command(cmd.to_string()),
            cfg,
            conn: None,
            injected: 0,
        }
    }

    pub fn tcp(addr: &str, cfg: ExternalConfig) -> Self {
        ExternalAgent {
            id: format!("tcp:{addr}"),
            target: Target::Tcp(addr.to_string()),
            cfg,
            conn: None,
            injected: 0,
        }
    }

    /// Passes injected on this agent's behalf since the last `init`.
    pub fn injected_passes(&self) -> u64 {
        self.injected
    }

    fn conn(&mut self) -> Result<&mut Connection, AgentError> {
        self.conn
            .as_mut()
            .ok_or_else(|| AgentError::Transport("agent not initialized".into()))
    }
}

impl Agent for ExternalAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn clock_mode(&self) -> ClockMode {
        ClockMode::WallClock
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        if let Some(old) = self.conn.take() {
            old.close();
        }
        self.injected = 0;
        let mut conn = Connection::open(&self.target)?;
        conn.send(&Message::init(info))?;
        self.conn = Some(conn);
        Ok(())
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        let ceiling = Duration::from_millis(self.cfg.wall_ceiling_ms);
        let cfg = self.cfg.clone();
        let conn = self.conn()?;
        let start = Instant::now();
        conn.send(&Message::obs(p))?;
        conn.sent += 1;
        match conn.reply(start + ceiling)? {
            Some(msg) => {
                let response = msg.into_response()?;
                Ok(Decision::new(response, cfg.charge(start.elapsed())))
            }
            None => {
                self.injected += 1;
                Ok(Decision::new(Response::Pass, cfg.charge(ceiling)))
            }
        }
    }

    fn finish(&mut self, outcome: &Outcome) -> Result<(), AgentError> {
        if let Some(mut conn) = self.conn.take() {
            let sent = conn.send(&Message::result(outcome));
            conn.close();
            sent?;
        }
        Ok(())
    }
}
