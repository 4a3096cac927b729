//! Client (and a native-model server) for the external scorer protocol.
//!
//! Newline-delimited JSON over a byte stream. The scorer speaks first:
//!
//! ```text
//! <- {"hello":{"name":"bert","kind":"continuous","levels":{"A":["OFF","NOT"]}}}
//! -> {"req_id":0,"level":"A","texts":["...", "..."]}
//! <- {"req_id":0,"confidences":[{"OFF":0.93,"NOT":0.07}, {...}]}
//! ```
//!
//! A scorer may answer a request with `{"req_id":n,"error":"..."}`.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ModelKind, ModelPrediction, Scorer};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Slack allowed on each confidence before it is rejected as out of range.
pub const CONFIDENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub name: String,
    pub kind: ModelKind,
    pub levels: BTreeMap<Level, Vec<ClassLabel>>,
}

#[derive(Serialize, Deserialize)]
struct HelloFrame {
    hello: Hello,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Request {
    pub req_id: u64,
    pub level: Level,
    pub texts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Response {
    pub req_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidences: Option<Vec<BTreeMap<ClassLabel, f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    next_req: u64,
    broken: Option<String>,
    child: Option<Child>,
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// A remote scorer. Requests on one connection are strictly serialized.
pub struct ExternalScorer {
    hello: Hello,
    kind: ModelKind,
    timeout: Duration,
    conn: Mutex<Connection>,
}

fn spawn_line_reader<R: BufRead + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in reader.lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

fn validate_hello(hello: &Hello) -> Result<()> {
    if hello.levels.is_empty() {
        return Err(Error::Protocol("handshake serves no levels".into()));
    }
    for (level, classes) in &hello.levels {
        if classes.as_slice() != level.classes() {
            return Err(Error::Protocol(format!(
                "handshake class set for Level {level} must be exactly {:?}",
                level.classes()
            )));
        }
    }
    Ok(())
}

impl ExternalScorer {
    /// Performs the handshake over an arbitrary stream pair.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Result<Self>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        Self::handshake(
            Connection {
                writer: Box::new(writer),
                lines: spawn_line_reader(reader),
                next_req: 0,
                broken: None,
                child: None,
            },
            timeout,
        )
    }

    /// Spawns `program args...` and talks to it over its stdin/stdout.
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Protocol(format!("cannot start scorer `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Self::handshake(
            Connection {
                writer: Box::new(stdin),
                lines: spawn_line_reader(BufReader::new(stdout)),
                next_req: 0,
                broken: None,
                child: Some(child),
            },
            timeout,
        )
    }

    pub fn connect_tcp<A: ToSocketAddrs>(addr: A, timeout: Duration) -> Result<Self> {
        let stream = TcpStream::connect(addr)
            .map_err(|e| Error::Protocol(format!("cannot connect to scorer: {e}")))?;
        let reader = BufReader::new(stream.try_clone()?);
        Self::from_streams(reader, stream, timeout)
    }

    fn handshake(mut conn: Connection, timeout: Duration) -> Result<Self> {
        let line = recv_line(&conn.lines, "scorer", timeout)?;
        let frame: HelloFrame = serde_json::from_str(&line)
            .map_err(|e| Error::Protocol(format!("bad handshake `{line}`: {e}")))?;
        validate_hello(&frame.hello)?;
        conn.next_req = 0;
        Ok(ExternalScorer {
            kind: frame.hello.kind,
            hello: frame.hello,
            timeout,
            conn: Mutex::new(conn),
        })
    }

    pub fn hello(&self) -> &Hello {
        &self.hello
    }

    /// Overrides how the cascade reads this scorer.
    pub fn with_kind(mut self, kind: ModelKind) -> Self {
        self.kind = kind;
        self
    }

    fn exchange(&self, conn: &mut Connection, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>> {
        let req_id = conn.next_req;
        conn.next_req += 1;
        let request = Request {
            req_id,
            level,
            texts: batch.iter().map(|i| i.text.clone()).collect(),
        };
        let mut line = serde_json::to_string(&request).expect("request serializes");
        line.push('\n');
        conn.writer
            .write_all(line.as_bytes())
            .and_then(|_| conn.writer.flush())
            .map_err(|e| Error::Protocol(format!("write to scorer failed: {e}")))?;

        let reply = recv_line(&conn.lines, &self.hello.name, self.timeout)?;
        let value: Value = serde_json::from_str(&reply)
            .map_err(|e| Error::Protocol(format!("bad JSON from scorer: {e}")))?;
        let got_id = value
            .get("req_id")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Protocol("response without req_id".into()))?;
        if got_id != req_id {
            return Err(Error::Protocol(format!(
                "response req_id {got_id} does not match request {req_id}"
            )));
        }
        let response: Response = serde_json::from_value(value)
            .map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
        if let Some(err) = response.error {
            return Err(Error::Protocol(format!("scorer error for request {req_id}: {err}")));
        }
        let rows = response
            .confidences
            .ok_or_else(|| Error::Protocol("response without confidences".into()))?;
        if rows.len() != batch.len() {
            return Err(Error::Protocol(format!(
                "expected {} confidence rows, got {}",
                batch.len(),
                rows.len()
            )));
        }
        rows.into_iter()
            .map(|row| self.to_prediction(level, row))
            .collect()
    }

    fn to_prediction(&self, level: Level, row: BTreeMap<ClassLabel, f64>) -> Result<ModelPrediction> {
        if row.len() != level.classes().len() {
            return Err(Error::Protocol(format!(
                "confidence row must have exactly the Level {level} classes"
            )));
        }
        let mut conf = Vec::with_capacity(row.len());
        for &class in level.classes() {
            let v = *row
                .get(&class)
                .ok_or_else(|| Error::Protocol(format!("confidence row lacks {class}")))?;
            if !v.is_finite() || !(-CONFIDENCE_TOLERANCE..=1.0 + CONFIDENCE_TOLERANCE).contains(&v) {
                return Err(Error::Protocol(format!("confidence {v} for {class} outside [0, 1]")));
            }
            conf.push(v.clamp(0.0, 1.0));
        }
        if self.kind == ModelKind::Continuous {
            let total: f64 = conf.iter().sum();
            if total <= 0.0 {
                return Err(Error::Protocol("continuous confidences sum to zero".into()));
            }
            conf.iter_mut().for_each(|c| *c /= total);
        }
        Ok(ModelPrediction::from_confidences(
            self.hello.name.clone(),
            self.kind,
            level,
            conf,
        ))
    }
}

fn recv_line(lines: &Receiver<std::io::Result<String>>, who: &str, timeout: Duration) -> Result<String> {
    loop {
        match lines.recv_timeout(timeout) {
            Ok(Ok(line)) if line.trim().is_empty() => continue,
            Ok(Ok(line)) => return Ok(line),
            Ok(Err(e)) => return Err(Error::Protocol(format!("read from scorer failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::Timeout {
                    scorer: who.to_string(),
                    millis: timeout.as_millis() as u64,
                })
            }
            Err(RecvTimeoutError::Disconnected) => {
                return Err(Error::Protocol("scorer closed the connection".into()))
            }
        }
    }
}

impl Scorer for ExternalScorer {
    fn name(&self) -> &str {
        &self.hello.name
    }

    fn kind(&self) -> ModelKind {
        self.kind
    }

    fn levels(&self) -> Vec<Level> {
        self.hello.levels.keys().copied().collect()
    }

    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>> {
        if !self.hello.levels.contains_key(&level) {
            return Err(Error::invalid(format!(
                "scorer `{}` does not serve Level {level}",
                self.hello.name
            )));
        }
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(reason) = &conn.broken {
            return Err(Error::Protocol(format!("connection unusable after earlier failure: {reason}")));
        }
        let result = self.exchange(&mut conn, level, batch);
        if let Err(e) = &result {
            // Any failure may leave an unread reply in the stream.
            if !matches!(e, Error::Protocol(m) if m.starts_with("scorer error")) {
                conn.broken = Some(e.to_string());
            }
        }
        result
    }
}

/// Serves `scorers` (one per level) over the protocol until the reader
/// closes. Bad requests get an error response; the loop keeps running.
pub fn serve<R: BufRead, W: Write>(
    name: &str,
    kind: ModelKind,
    scorers: &[&dyn Scorer],
    mut reader: R,
    mut writer: W,
) -> Result<()> {
    let mut by_level: BTreeMap<Level, &dyn Scorer> = BTreeMap::new();
    for s in scorers {
        for level in s.levels() {
            by_level.insert(level, *s);
        }
    }
    let hello = HelloFrame {
        hello: Hello {
            name: name.to_string(),
            kind,
            levels: by_level.keys().map(|&l| (l, l.classes().to_vec())).collect(),
        },
    };
    writeln!(writer, "{}", serde_json::to_string(&hello).expect("hello serializes"))?;
    writer.flush()?;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<Request>(line) {
            Err(e) => {
                let req_id = serde_json::from_str::<Value>(line)
                    .ok()
                    .and_then(|v| v.get("req_id").and_then(Value::as_u64))
                    .unwrap_or(0);
                Response {
                    req_id,
                    confidences: None,
                    error: Some(format!("bad request: {e}")),
                }
            }
            Ok(req) => match by_level.get(&req.level) {
                None => Response {
                    req_id: req.req_id,
                    confidences: None,
                    error: Some(format!("Level {} not served", req.level)),
                },
                Some(scorer) => {
                    let batch: Vec<Instance> = req
                        .texts
                        .iter()
                        .enumerate()
                        .map(|(i, t)| Instance::new(i.to_string(), t))
                        .collect();
                    match scorer.score(req.level, &batch) {
                        Ok(preds) => Response {
                            req_id: req.req_id,
                            confidences: Some(
                                preds
                                    .iter()
                                    .map(|p| {
                                        req.level
                                            .classes()
                                            .iter()
                                            .copied()
                                            .zip(p.confidences.iter().copied())
                                            .collect()
                                    })
                                    .collect(),
                            ),
                            error: None,
                        },
                        Err(e) => Response {
                            req_id: req.req_id,
                            confidences: None,
                            error: Some(e.to_string()),
                        },
                    }
                }
            },
        };
        writeln!(writer, "{}", serde_json::to_string(&response).expect("response serializes"))?;
        writer.flush()?;
    }
    Ok(())
}
