//! Minimal JSON-over-HTTP client shared by the remote backends.

use std::time::Duration;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    /// Connection, DNS or timeout failure.
    Io(String),
    Status {
        status: u16,
        body: String,
    },
}

#[derive(Debug, Clone)]
pub struct JsonClient {
    agent: ureq::Agent,
    endpoint: String,
    bearer_token: Option<String>,
}

impl JsonClient {
    pub fn new(endpoint: &str, timeout: Duration, bearer_token: Option<String>) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        JsonClient { agent, endpoint: endpoint.to_string(), bearer_token }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// POSTs `body` as JSON and returns the response body text.
    pub fn post<T: Serialize>(&self, body: &T) -> Result<String, TransportError> {
        let mut request = self.agent.post(&self.endpoint).set("Content-Type", "application/json");
        if let Some(token) = &self.bearer_token {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        let payload = serde_json::to_string(body).map_err(|e| TransportError::Io(e.to_string()))?;
        match request.send_string(&payload) {
            Ok(response) => response.into_string().map_err(|e| TransportError::Io(e.to_string())),
            Err(ureq::Error::Status(status, response)) => {
                Err(TransportError::Status { status, body: response.into_string().unwrap_or_default() })
            }
            Err(e) => Err(TransportError::Io(e.to_string())),
        }
    }
}
