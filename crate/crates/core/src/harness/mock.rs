//! Scripted stand-in for a chat-completion endpoint.

use std::fs::File;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockRule {
    pub contains: String,
    pub completion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockScript {
    pub rules: Vec<MockRule>,
    #[serde(default = "default_completion")]
    pub default: String,
}

fn default_completion() -> String {
    "explore".into()
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("mock script: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read mock script {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// First rule whose pattern occurs in the prompt, else the default.
    pub fn respond(&self, prompt: &str) -> &str {
        self.rules
            .iter()
            .find(|r| prompt.contains(&r.contains))
            .map_or(&self.default, |r| &r.completion)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedRequest {
    pub n: usize,
    pub model: String,
    pub prompt: String,
    pub completion: String,
}

struct Shared {
    script: MockScript,
    count: AtomicUsize,
    log: Option<Mutex<File>>,
}

pub struct MockServer {
    server: Arc<Server>,
    shared: Arc<Shared>,
    addr: SocketAddr,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    /// Bind `127.0.0.1:port` (0 picks a free port) and serve in the
    /// background. A busy port is a server error.
    pub fn start(script: MockScript, port: u16, log: Option<PathBuf>) -> Result<Self> {
        let server = Server::http(("127.0.0.1", port))
            .map_err(|e| Error::Server(format!("cannot listen on port {port}: {e}")))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::Server("server has no ip address".into()))?;
        let log = match log {
            Some(p) => Some(Mutex::new(File::create(&p).map_err(|e| {
                Error::Server(format!("cannot create request log {}: {e}", p.display()))
            })?)),
            None => None,
        };
        let shared = Arc::new(Shared {
            script,
            count: AtomicUsize::new(0),
            log,
        });
        let server = Arc::new(server);
        let handle = {
            let (server, shared) = (server.clone(), shared.clone());
            std::thread::spawn(move || {
                let mut workers = vec![];
                for req in server.incoming_requests() {
                    let shared = shared.clone();
                    workers.push(std::thread::spawn(move || handle(req, &shared)));
                    workers.retain(|w: &JoinHandle<()>| !w.is_finished());
                }
                for w in workers {
                    let _ = w.join();
                }
            })
        };
        Ok(Self {
            server,
            shared,
            addr,
            handle: Some(handle),
        })
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    /// Base URL for [`crate::planner::RemoteConfig::base_url`].
    pub fn url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    /// Completions served so far.
    pub fn request_count(&self) -> usize {
        self.shared.count.load(Ordering::SeqCst)
    }

    /// Block until the server is stopped from elsewhere.
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn json_response(status: u16, body: serde_json::Value) -> Response<std::io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_string(body.to_string()).with_status_code(status).with_header(header)
}

fn handle(mut req: Request, shared: &Shared) {
    let path = req.url().to_string();
    let resp = match (req.method(), path.as_str()) {
        (Method::Get, "/stats") => json_response(200, json!({"requests": shared.count.load(Ordering::SeqCst)})),
        (Method::Post, p) if p.ends_with("/chat/completions") => {
            let mut body = String::new();
            match req.as_reader().read_to_string(&mut body) {
                Ok(_) => complete(&body, shared),
                Err(e) => json_response(400, json!({"error": e.to_string()})),
            }
        }
        _ => json_response(404, json!({"error": format!("no route for {path}")})),
    };
    let _ = req.respond(resp);
}

fn complete(body: &str, shared: &Shared) -> Response<std::io::Cursor<Vec<u8>>> {
    let v: serde_json::Value = match serde_json::from_str(body) {
        Ok(v) => v,
        Err(e) => return json_response(400, json!({"error": format!("bad json: {e}")})),
    };
    let Some(prompt) = v
        .get("messages")
        .and_then(|m| m.as_array())
        .and_then(|m| m.last())
        .and_then(|m| m.get("content"))
        .and_then(|c| c.as_str())
    else {
        return json_response(400, json!({"error": "request has no messages"}));
    };
    let completion = shared.script.respond(prompt).to_string();
    let n = shared.count.fetch_add(1, Ordering::SeqCst) + 1;
    if let Some(log) = &shared.log {
        let entry = LoggedRequest {
            n,
            model: v.get("model").and_then(|m| m.as_str()).unwrap_or_default().to_string(),
            prompt: prompt.to_string(),
            completion: completion.clone(),
        };
        let mut f = log.lock().unwrap();
        let _ = writeln!(f, "{}", serde_json::to_string(&entry).unwrap());
    }
    json_response(
        200,
        json!({
            "id": format!("mock-{n}"),
            "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": completion}, "finish_reason": "stop"}],
        }),
    )
}
