use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum TransportError {
    /// Connection, timeout or non-2xx status.
    #[error("http: {0}")]
    Http(String),
    /// JSON-RPC error object returned by the node.
    #[error("rpc error {code}: {message}")]
    Rpc { code: i64, message: String },
    /// Payload that is not a conforming JSON-RPC response.
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no recorded response for {method} {params}")]
    ReplayMiss { method: String, params: String },
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, TransportError::Http(_) | TransportError::Rpc { .. })
    }
}

/// Sends one JSON-RPC call to one endpoint and returns its `result`.
pub trait Transport: Send + Sync {
    fn call(&self, url: &str, method: &str, params: &Value) -> Result<Value, TransportError>;
}

/// Extracts `result` from a JSON-RPC 2.0 response object.
pub(crate) fn unwrap_response(body: Value) -> Result<Value, TransportError> {
    let Value::Object(mut obj) = body else {
        return Err(TransportError::Malformed("response is not an object".into()));
    };
    if let Some(err) = obj.remove("error") {
        if !err.is_null() {
            let code = err.get("code").and_then(Value::as_i64).ok_or_else(|| {
                TransportError::Malformed("error object without integer code".into())
            })?;
            let message = err
                .get("message")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string();
            return Err(TransportError::Rpc { code, message });
        }
    }
    obj.remove("result")
        .ok_or_else(|| TransportError::Malformed("neither result nor error present".into()))
}

/// Blocking HTTP(S) POST transport.
pub struct HttpTransport {
    agent: ureq::Agent,
    next_id: AtomicU64,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Self {
        Self {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            next_id: AtomicU64::new(1),
        }
    }
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Transport for HttpTransport {
    fn call(&self, url: &str, method: &str, params: &Value) -> Result<Value, TransportError> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let req = json!({"jsonrpc": "2.0", "id": id, "method": method, "params": params});
        let resp = match self.agent.post(url).send_json(req) {
            Ok(r) => r,
            // Some providers put a JSON-RPC error body behind a non-2xx status.
            Err(ureq::Error::Status(code, r)) => match r.into_json::<Value>() {
                Ok(body) if body.get("error").is_some() => return unwrap_response(body),
                _ => return Err(TransportError::Http(format!("status {code}"))),
            },
            Err(e) => return Err(TransportError::Http(e.to_string())),
        };
        let body: Value = resp
            .into_json()
            .map_err(|e| TransportError::Malformed(e.to_string()))?;
        if body.get("jsonrpc").and_then(Value::as_str) != Some("2.0") {
            return Err(TransportError::Malformed("missing jsonrpc version".into()));
        }
        unwrap_response(body)
    }
}
