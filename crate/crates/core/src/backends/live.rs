use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{AgentBackend, BackendError, Completion};
use crate::coach::PromptDoc;

/// Client for an Ollama-compatible `/api/chat` endpoint.
pub struct LiveBackend {
    url: String,
    model: String,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    pub fn new(endpoint: &str, model: &str, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(Self {
            url: format!("{}/api/chat", endpoint.trim_end_matches('/')),
            model: model.to_owned(),
            client,
        })
    }

    pub fn request_body(&self, prompt: &PromptDoc) -> Value {
        json!({
            "model": self.model,
            "messages": [
                {"role": "system", "content": prompt.system_text},
                {"role": "user", "content": prompt.user_text},
            ],
            "stream": false,
            "options": {
                "num_predict": prompt.max_tokens,
                "temperature": prompt.temperature,
            },
        })
    }
}

impl AgentBackend for LiveBackend {
    fn complete(&mut self, prompt: &PromptDoc) -> Result<Completion, BackendError> {
        let body = self.request_body(prompt);
        let start = Instant::now();
        let response = self
            .client
            .post(&self.url)
            .json(&body)
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let latency_ns = u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX);
        if !status.is_success() {
            return Err(BackendError::Transport(format!("HTTP {status}")));
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))?;
        let raw = value
            .pointer("/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| BackendError::Malformed("no message.content".into()))?;
        Ok(Completion::new(raw, latency_ns))
    }
}
