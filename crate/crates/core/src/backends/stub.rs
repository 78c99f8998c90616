//! Local fake chat endpoint with scripted replies, for tests and benches.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde_json::json;

#[derive(Clone, Debug)]
pub struct StubReply {
    pub delay: Duration,
    pub status: u16,
    pub body: String,
}

impl StubReply {
    /// A successful chat reply carrying `content`.
    pub fn content(content: &str, delay: Duration) -> Self {
        Self {
            delay,
            status: 200,
            body: json!({"message": {"role": "assistant", "content": content}, "done": true})
                .to_string(),
        }
    }

    pub fn raw(status: u16, body: &str, delay: Duration) -> Self {
        Self {
            delay,
            status,
            body: body.to_owned(),
        }
    }
}

/// Serves replies in order, cycling through the list, one connection at a
/// time. Request bodies are kept for inspection.
pub struct StubServer {
    addr: SocketAddr,
    requests: Arc<Mutex<Vec<String>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

fn read_request(stream: &mut TcpStream) -> std::io::Result<String> {
    let mut reader = BufReader::new(stream);
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                len = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body)?;
    Ok(String::from_utf8_lossy(&body).into_owned())
}

impl StubServer {
    pub fn start(replies: Vec<StubReply>) -> std::io::Result<Self> {
        assert!(!replies.is_empty(), "stub needs at least one reply");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (seen, halt) = (Arc::clone(&requests), Arc::clone(&stop));
        let handle = std::thread::spawn(move || {
            let mut n = 0usize;
            for stream in listener.incoming() {
                if halt.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(mut stream) = stream else { continue };
                let Ok(body) = read_request(&mut stream) else {
                    continue;
                };
                seen.lock().expect("stub lock").push(body);
                let reply = &replies[n % replies.len()];
                n += 1;
                std::thread::sleep(reply.delay);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    reply.status,
                    reply.body.len(),
                    reply.body
                );
                let _ = stream.flush();
            }
        });
        Ok(Self {
            addr,
            requests,
            stop,
            handle: Some(handle),
        })
    }

    /// Base URL, e.g. `http://127.0.0.1:40000`.
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("stub lock").clone()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
