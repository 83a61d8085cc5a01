//! HTTP backends: a chat-completions client plus the agent and grounding
//! adapters that put it behind the core traits.

use std::time::Duration;

use pictor_core::grounding::{
    parse_coords_from_text, GroundingBackend, GroundingError, GroundingRequest,
    GroundingResult, ParsedCoords,
};
use pictor_core::workflow::prompts::{render_template, GROUNDING_LOCATE};
use pictor_core::workflow::{AgentBackend, AgentPrompt, BackendError};
use pictor_core::RasterImage;
use serde_json::{json, Value};

use crate::imageio::to_data_url;

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteOptions {
    /// Full chat-completions URL, e.g. `http://host:port/v1/chat/completions`.
    pub endpoint: String,
    pub model: String,
    /// Environment variable naming the bearer token; `None` sends no
    /// Authorization header (local servers).
    pub token_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        RemoteOptions {
            endpoint: String::new(),
            model: String::new(),
            token_env: None,
            timeout_secs: 60,
            max_retries: 2,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RemoteError {
    #[error("environment variable {var} is not set")]
    MissingToken { var: String },
    #[error("building http client: {0}")]
    Client(reqwest::Error),
    #[error("request failed after {attempts} attempts: {last}")]
    Transport { attempts: u32, last: String },
    #[error("server returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unusable reply: {detail}")]
    BadReply { detail: String },
    #[error("encoding image: {0}")]
    Encode(String),
}

/// Chat-completions request body: one user message whose content is the text
/// part followed by one inline PNG part per attached image.
pub fn build_request_body(
    model: &str,
    text: &str,
    images: &[(String, &RasterImage)],
) -> Result<Value, RemoteError> {
    let mut content = vec![json!({ "type": "text", "text": text })];
    for (_name, image) in images {
        let url = to_data_url(image).map_err(|e| RemoteError::Encode(e.to_string()))?;
        content.push(json!({ "type": "image_url", "image_url": { "url": url } }));
    }
    Ok(json!({
        "model": model,
        "messages": [{ "role": "user", "content": content }],
    }))
}

/// Pulls the assistant text out of a chat-completions reply. Handles both a
/// plain string `content` and the part-list form.
pub fn extract_content(reply: &Value) -> Result<String, RemoteError> {
    let content = reply
        .pointer("/choices/0/message/content")
        .ok_or_else(|| RemoteError::BadReply {
            detail: "missing choices[0].message.content".into(),
        })?;
    match content {
        Value::String(s) => Ok(s.clone()),
        Value::Array(parts) => {
            let mut out = String::new();
            for part in parts {
                if part.get("type").and_then(Value::as_str) == Some("text") {
                    if let Some(t) = part.get("text").and_then(Value::as_str) {
                        out.push_str(t);
                    }
                }
            }
            if out.is_empty() {
                Err(RemoteError::BadReply { detail: "no text parts in content".into() })
            } else {
                Ok(out)
            }
        }
        other => Err(RemoteError::BadReply {
            detail: format!("content has unexpected type: {other}"),
        }),
    }
}

pub struct ChatClient {
    http: reqwest::blocking::Client,
    options: RemoteOptions,
    token: Option<String>,
}

impl std::fmt::Debug for ChatClient {
    // Never prints the token.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient")
            .field("endpoint", &self.options.endpoint)
            .field("model", &self.options.model)
            .finish_non_exhaustive()
    }
}

impl ChatClient {
    pub fn new(options: RemoteOptions) -> Result<Self, RemoteError> {
        let token = match &options.token_env {
            Some(var) => Some(
                std::env::var(var)
                    .map_err(|_| RemoteError::MissingToken { var: var.clone() })?,
            ),
            None => None,
        };
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(options.timeout_secs))
            .build()
            .map_err(RemoteError::Client)?;
        Ok(ChatClient { http, options, token })
    }

    pub fn model(&self) -> &str {
        &self.options.model
    }

    /// One chat turn. Retries transport failures and 429/5xx responses with
    /// linear backoff; other statuses fail immediately.
    pub fn chat(
        &self,
        text: &str,
        images: &[(String, &RasterImage)],
    ) -> Result<String, RemoteError> {
        let body = build_request_body(&self.options.model, text, images)?;
        let attempts = 1 + self.options.max_retries;
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                std::thread::sleep(Duration::from_millis(200 * u64::from(attempt - 1)));
            }
            let mut req = self.http.post(&self.options.endpoint).json(&body);
            if let Some(token) = &self.token {
                req = req.bearer_auth(token);
            }
            match req.send() {
                Err(e) => last = e.to_string(),
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        let value: Value = resp.json().map_err(|e| RemoteError::BadReply {
                            detail: format!("invalid json: {e}"),
                        })?;
                        return extract_content(&value);
                    }
                    let body = resp.text().unwrap_or_default();
                    if status.as_u16() == 429 || status.is_server_error() {
                        last = format!("status {status}");
                    } else {
                        return Err(RemoteError::Status { status: status.as_u16(), body });
                    }
                }
            }
        }
        Err(RemoteError::Transport { attempts, last })
    }
}

/// Routes every agent role through one remote chat model.
pub struct RemoteAgentBackend {
    client: ChatClient,
    id: String,
}

impl RemoteAgentBackend {
    pub fn new(client: ChatClient) -> Self {
        let id = format!("remote:{}", client.model());
        RemoteAgentBackend { client, id }
    }
}

impl AgentBackend for RemoteAgentBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn reply(&mut self, prompt: &AgentPrompt<'_>) -> Result<String, BackendError> {
        self.client
            .chat(&prompt.text, &prompt.images)
            .map_err(|e| BackendError::Remote { message: e.to_string() })
    }
}

/// Grounds element prompts by asking the remote model for coordinates.
pub struct RemoteGroundingBackend {
    client: ChatClient,
    id: String,
}

impl RemoteGroundingBackend {
    pub fn new(client: ChatClient) -> Self {
        let id = format!("remote:{}", client.model());
        RemoteGroundingBackend { client, id }
    }
}

impl GroundingBackend for RemoteGroundingBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn ground(&self, req: &GroundingRequest<'_>) -> Result<GroundingResult, GroundingError> {
        let text = render_template(GROUNDING_LOCATE, &[("prompt", req.prompt)]);
        let images = vec![(req.image_ref.to_string(), req.image)];
        let raw = self.client.chat(&text, &images).map_err(|e| {
            GroundingError::BackendUnavailable { message: e.to_string() }
        })?;
        let result = match parse_coords_from_text(&raw) {
            ParsedCoords::Box(b) => GroundingResult::found_box(b),
            ParsedCoords::Point(p) => GroundingResult::found_point(p),
            ParsedCoords::NotFound => GroundingResult::not_found(),
            ParsedCoords::Unparseable => {
                return Err(GroundingError::MalformedResponse { raw_text: raw })
            }
        };
        Ok(result.with_raw(raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_body_carries_text_then_images() {
        let img = RasterImage::new(2, 2);
        let body =
            build_request_body("m1", "describe", &[("img_0".into(), &img)]).unwrap();
        assert_eq!(body["model"], "m1");
        let content = body["messages"][0]["content"].as_array().unwrap();
        assert_eq!(content.len(), 2);
        assert_eq!(content[0]["type"], "text");
        assert_eq!(content[1]["type"], "image_url");
        let url = content[1]["image_url"]["url"].as_str().unwrap();
        assert!(url.starts_with("data:image/png;base64,"));
    }

    #[test]
    fn content_string_and_part_list_both_extract() {
        let plain = json!({"choices": [{"message": {"content": "hello"}}]});
        assert_eq!(extract_content(&plain).unwrap(), "hello");
        let parts = json!({"choices": [{"message": {"content": [
            {"type": "text", "text": "a"},
            {"type": "image_url", "image_url": {"url": "x"}},
            {"type": "text", "text": "b"}
        ]}}]});
        assert_eq!(extract_content(&parts).unwrap(), "ab");
        assert!(extract_content(&json!({"choices": []})).is_err());
    }

    #[test]
    fn missing_token_variable_is_an_error() {
        let err = ChatClient::new(RemoteOptions {
            token_env: Some("PICTOR_TEST_TOKEN_THAT_IS_NOT_SET".into()),
            ..RemoteOptions::default()
        })
        .unwrap_err();
        assert!(matches!(err, RemoteError::MissingToken { .. }));
    }
}
