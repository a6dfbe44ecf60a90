use std::fmt;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub n: u32,
    pub temperature: f64,
}

impl ChatRequest {
    /// Content of the final message, which fixture rules match against.
    pub fn last_content(&self) -> &str {
        self.messages.last().map_or("", |m| m.content.as_str())
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChatChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError {
    pub retryable: bool,
    pub message: String,
}

impl TransportError {
    pub fn retryable(message: impl Into<String>) -> Self {
        Self {
            retryable: true,
            message: message.into(),
        }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        Self {
            retryable: false,
            message: message.into(),
        }
    }
}

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for TransportError {}

/// Sends one chat-completion request and returns the text of each choice.
pub trait Transport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<Vec<String>, TransportError>;
}

/// Parses a chat-completion response body into choice texts.
pub fn parse_chat_response(body: &str) -> Result<Vec<String>, TransportError> {
    let resp: ChatResponse = serde_json::from_str(body)
        .map_err(|e| TransportError::retryable(format!("malformed completion response: {e}")))?;
    Ok(resp
        .choices
        .into_iter()
        .map(|c| c.message.content.unwrap_or_default())
        .collect())
}

pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
            endpoint: endpoint.into(),
            api_key,
        }
    }
}

impl Transport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<Vec<String>, TransportError> {
        let body =
            serde_json::to_string(request).map_err(|e| TransportError::fatal(e.to_string()))?;
        let mut req = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send(body).map_err(|e| match e {
            ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
                TransportError::retryable(format!("endpoint returned HTTP {code}"))
            }
            ureq::Error::StatusCode(code) => {
                TransportError::fatal(format!("endpoint returned HTTP {code}"))
            }
            other => TransportError::retryable(other.to_string()),
        })?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::retryable(e.to_string()))?;
        parse_chat_response(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureRule {
    pub contains: String,
    pub responses: Vec<String>,
}

/// Offline transport answering from a table of canned responses.
///
/// The first rule whose `contains` occurs in the last message wins and
/// supplies up to `n` responses. A request no rule matches is an error,
/// so a fixture run never silently invents data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureTransport {
    pub rules: Vec<FixtureRule>,
}

impl FixtureTransport {
    pub fn from_file(path: &Path) -> Result<Self, TransportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TransportError::fatal(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| TransportError::fatal(format!("parsing {}: {e}", path.display())))
    }

    pub fn with_rule(mut self, contains: &str, responses: &[&str]) -> Self {
        self.rules.push(FixtureRule {
            contains: contains.to_owned(),
            responses: responses.iter().map(|s| (*s).to_owned()).collect(),
        });
        self
    }
}

impl Transport for FixtureTransport {
    fn complete(&self, request: &ChatRequest) -> Result<Vec<String>, TransportError> {
        let content = request.last_content();
        let rule = self
            .rules
            .iter()
            .find(|r| content.contains(&r.contains))
            .ok_or_else(|| {
                let head: String = content.chars().take(80).collect();
                TransportError::fatal(format!("no fixture response for prompt starting {head:?}"))
            })?;
        Ok(rule
            .responses
            .iter()
            .take(request.n as usize)
            .cloned()
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(content: &str, n: u32) -> ChatRequest {
        ChatRequest {
            model: "m".into(),
            messages: vec![ChatMessage::user(content)],
            n,
            temperature: 0.0,
        }
    }

    #[test]
    fn request_wire_format() {
        let json = serde_json::to_value(req("hi", 2)).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "model": "m",
                "messages": [{"role": "user", "content": "hi"}],
                "n": 2,
                "temperature": 0.0
            })
        );
    }

    #[test]
    fn response_choices_are_extracted() {
        let body = r#"{"id":"x","choices":[{"index":0,"message":{"role":"assistant","content":"a"}},
                       {"index":1,"message":{"role":"assistant","content":null}}]}"#;
        assert_eq!(parse_chat_response(body).unwrap(), ["a", ""]);
        assert!(parse_chat_response("{}").is_err());
    }

    #[test]
    fn fixture_first_rule_wins_and_caps_at_n() {
        let t = FixtureTransport::default()
            .with_rule("sort", &["one", "two", "three"])
            .with_rule("", &["fallback"]);
        assert_eq!(t.complete(&req("please sort", 2)).unwrap(), ["one", "two"]);
        assert_eq!(t.complete(&req("other", 5)).unwrap(), ["fallback"]);
    }

    #[test]
    fn fixture_without_match_is_fatal() {
        let err = FixtureTransport::default()
            .complete(&req("x", 1))
            .unwrap_err();
        assert!(!err.retryable);
    }
}
