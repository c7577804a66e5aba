use std::time::Duration;

use super::{BackendConfig, BackendError, NerBackend, NerRequest};
use crate::transport::{JsonClient, TransportError};

/// Client for a live BERN2-compatible service.
#[derive(Debug, Clone)]
pub struct HttpNerBackend {
    client: JsonClient,
}

impl HttpNerBackend {
    pub fn new(config: &BackendConfig, bearer_token: Option<String>) -> Self {
        HttpNerBackend {
            client: JsonClient::new(&config.endpoint, Duration::from_millis(config.timeout_ms), bearer_token),
        }
    }
}

impl NerBackend for HttpNerBackend {
    fn name(&self) -> &str {
        self.client.endpoint()
    }

    fn submit(&self, request: &NerRequest) -> Result<String, BackendError> {
        self.client.post(request).map_err(|e| match e {
            TransportError::Io(msg) => BackendError::Transport(msg),
            TransportError::Status { status, body } => BackendError::Status { status, body },
        })
    }
}
