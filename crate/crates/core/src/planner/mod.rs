//! Plan grammar, validation and the planner backends.

mod action;
mod grammar;
mod http;
mod mock;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::Prompt;

pub use action::{PlacePose, PrimitiveAction, SymbolicPlan};
pub use grammar::{parse_plan, PlanParseError};
pub use http::HttpBackend;
pub use mock::{mock_generate, MockError, MockMode, SCAN_CELL, SCAN_CLEARANCE};
pub use validate::{validate_plan, Violation, ViolationKind};

pub const DEFAULT_RESPONSE_PATH: &str = "/choices/0/message/content";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("timeout: {0}")]
    Timeout(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("auth error: {0}")]
    Auth(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unusable response: {0}")]
    Response(String),
    #[error("backend configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mock(#[from] MockError),
}

/// A source of plan text.
pub trait PlannerBackend: Send {
    fn name(&self) -> String;
    fn request_plan(&mut self, prompt: &Prompt) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    MockGuided,
    MockNaive,
    Http,
}

impl BackendKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::MockGuided => "mock-guided",
            BackendKind::MockNaive => "mock-naive",
            BackendKind::Http => "http",
        }
    }
}

impl std::str::FromStr for BackendKind {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mock-guided" => Ok(BackendKind::MockGuided),
            "mock-naive" => Ok(BackendKind::MockNaive),
            "http" => Ok(BackendKind::Http),
            other => Err(BackendError::Config(format!("unknown backend kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_s: f64,
    /// Name of the environment variable holding the credential.
    pub cred_env: Option<String>,
    /// JSON pointer to the reply text.
    pub response_path: String,
    pub temperature: f64,
}

impl BackendConfig {
    pub fn mock(mode: MockMode) -> Self {
        let kind = match mode {
            MockMode::Guided => BackendKind::MockGuided,
            MockMode::Naive => BackendKind::MockNaive,
        };
        BackendConfig {
            kind,
            endpoint: None,
            model: None,
            timeout_s: 60.0,
            cred_env: None,
            response_path: DEFAULT_RESPONSE_PATH.to_string(),
            temperature: 0.0,
        }
    }

    pub fn http(endpoint: impl Into<String>, model: impl Into<String>, cred_env: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Http,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            cred_env: Some(cred_env.into()),
            ..Self::mock(MockMode::Guided)
        }
    }

    pub fn label(&self) -> String {
        match (&self.kind, &self.model) {
            (BackendKind::Http, Some(m)) => format!("http:{m}"),
            (k, _) => k.as_str().to_string(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.kind == BackendKind::Http {
            if self.endpoint.as_deref().is_none_or(str::is_empty) {
                return Err(BackendError::Config("http backend needs an endpoint".into()));
            }
            if self.model.as_deref().is_none_or(str::is_empty) {
                return Err(BackendError::Config("http backend needs a model".into()));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn PlannerBackend>, BackendError> {
        self.validate()?;
        Ok(match self.kind {
            BackendKind::MockGuided => Box::new(MockBackend::new(MockMode::Guided)),
            BackendKind::MockNaive => Box::new(MockBackend::new(MockMode::Naive)),
            BackendKind::Http => Box::new(HttpBackend::new(self)?),
        })
    }
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    pub mode: MockMode,
}

impl MockBackend {
    pub fn new(mode: MockMode) -> Self {
        MockBackend { mode }
    }
}

impl PlannerBackend for MockBackend {
    fn name(&self) -> String {
        match self.mode {
            MockMode::Guided => "mock-guided".into(),
            MockMode::Naive => "mock-naive".into(),
        }
    }

    fn request_plan(&mut self, prompt: &Prompt) -> Result<String, BackendError> {
        Ok(mock_generate(self.mode, prompt)?)
    }
}
