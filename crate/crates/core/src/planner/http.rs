//! Blocking chat-completion client.

use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendConfig, BackendError, PlannerBackend};
use crate::prompt::Prompt;

pub struct HttpBackend {
    endpoint: String,
    model: String,
    credential: String,
    response_path: String,
    temperature: f64,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("endpoint", &self.endpoint).field("model", &self.model).finish_non_exhaustive()
    }
}

impl HttpBackend {
    /// Reads the credential from the environment variable named in `config`.
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        let endpoint = config.endpoint.clone().ok_or_else(|| BackendError::Config("http backend needs an endpoint".into()))?;
        let model = config.model.clone().ok_or_else(|| BackendError::Config("http backend needs a model".into()))?;
        let var = config.cred_env.clone().ok_or_else(|| BackendError::Auth("no credential variable configured".into()))?;
        let credential = match std::env::var(&var) {
            Ok(v) if !v.is_empty() => v,
            _ => return Err(BackendError::Auth(format!("environment variable {var} is not set"))),
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend {
            endpoint,
            model,
            credential,
            response_path: config.response_path.clone(),
            temperature: config.temperature,
            agent,
        })
    }

    fn attempt(&self, body: &str) -> Result<String, BackendError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.credential))
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(map_err)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_err)?;
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::Auth(format!("endpoint rejected the credential (HTTP {status})"))),
            _ => return Err(BackendError::Status { status, body: text.chars().take(200).collect() }),
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| BackendError::Response(e.to_string()))?;
        v.pointer(&self.response_path)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Response(format!("no text at {}", self.response_path)))
    }
}

fn map_err(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(t) => BackendError::Timeout(t.to_string()),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => BackendError::Timeout(io.to_string()),
        other => BackendError::Transport(other.to_string()),
    }
}

impl PlannerBackend for HttpBackend {
    fn name(&self) -> String {
        format!("http:{}", self.model)
    }

    fn request_plan(&mut self, prompt: &Prompt) -> Result<String, BackendError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": self.temperature,
        })
        .to_string();
        match self.attempt(&body) {
            Err(BackendError::Transport(_)) => self.attempt(&body),
            other => other,
        }
    }
}
