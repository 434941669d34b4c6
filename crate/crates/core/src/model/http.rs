//! Chat-completions transport with bounded retries.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Admission, ChatMessage, Completion, CompletionRequest, EndpointConfig, ModelClient, ModelError, Role, Usage};

#[derive(Serialize)]
struct ChatBody<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_p: Option<f64>,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

enum Failure {
    Retryable(String),
    Fatal(ModelError),
}

pub struct HttpClient {
    config: EndpointConfig,
    agent: ureq::Agent,
    admission: Admission,
    url: String,
}

impl HttpClient {
    pub fn new(config: EndpointConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_s.max(0.001))))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        Ok(Self { admission: Admission::new(config.max_concurrent), agent, url, config })
    }

    fn attempt(&self, request: &CompletionRequest) -> Result<(String, Option<Usage>), Failure> {
        let role = self.config.role();
        let body = ChatBody {
            model: &self.config.model,
            messages: &request.messages,
            temperature: self.config.temperature(),
            top_p: self.config.top_p(),
            max_tokens: self.config.max_tokens,
        };
        let mut req = self.agent.post(&self.url);
        if let Some(var) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(var) {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let resp = req.send_json(&body).map_err(|e| match e {
            ureq::Error::BadUri(_) | ureq::Error::Http(_) => {
                Failure::Fatal(ModelError::Config(format!("{role}: {e}")))
            }
            other => Failure::Retryable(other.to_string()),
        })?;
        let status = resp.status().as_u16();
        let text = resp.into_body().read_to_string().map_err(|e| Failure::Retryable(e.to_string()))?;
        if status == 429 || status >= 500 {
            return Err(Failure::Retryable(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(Failure::Fatal(ModelError::Unavailable {
                role,
                attempts: 1,
                reason: format!("HTTP {status}: {}", text.chars().take(200).collect::<String>()),
            }));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(ModelError::Malformed { role, reason: e.to_string() }))?;
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Failure::Fatal(ModelError::Malformed { role, reason: "no choices".into() }))?;
        Ok((content, parsed.usage))
    }
}

impl ModelClient for HttpClient {
    fn role(&self) -> Role {
        self.config.role()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<Completion, ModelError> {
        let _permit = self.admission.acquire();
        let start = Instant::now();
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                let factor = 1u64 << (attempt - 1).min(16);
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms.saturating_mul(factor)));
            }
            match self.attempt(request) {
                Ok((text, usage)) => {
                    return Ok(Completion { text, usage, latency: start.elapsed().as_secs_f64() })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Retryable(reason)) => {
                    tracing::warn!(role = %self.config.role(), attempt, %reason, "retryable endpoint failure");
                    last = reason;
                }
            }
        }
        Err(ModelError::Unavailable { role: self.config.role(), attempts: self.config.max_retries + 1, reason: last })
    }
}
