use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{parse_plan, Planner, PlannerRequest, PlannerResponse, PlannerSource, PromptParts, PromptStyle, Template};
use crate::error::{Error, Result};

/// Prompt bytes → completion. Shared between clients; off by default so
/// every ask reaches the endpoint.
pub type ResponseCache = Arc<Mutex<HashMap<String, String>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub retries: u32,
    pub backoff_ms: u64,
    pub timeout_ms: u64,
    pub style: Option<PromptStyle>,
    pub template_dir: Option<PathBuf>,
    pub cache: bool,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model: "planner".into(),
            api_key: None,
            temperature: 0.0,
            max_tokens: 128,
            retries: 2,
            backoff_ms: 200,
            timeout_ms: 30_000,
            style: None,
            template_dir: None,
            cache: false,
        }
    }
}

impl RemoteConfig {
    /// Fill endpoint fields from `PLANNER_BASE_URL`, `PLANNER_MODEL` and
    /// `PLANNER_API_KEY` where set.
    pub fn with_env(mut self) -> Self {
        if let Ok(v) = std::env::var("PLANNER_BASE_URL") {
            self.base_url = v;
        }
        if let Ok(v) = std::env::var("PLANNER_MODEL") {
            self.model = v;
        }
        if let Ok(v) = std::env::var("PLANNER_API_KEY") {
            self.api_key = Some(v);
        }
        self
    }
}

pub struct RemotePlanner {
    config: RemoteConfig,
    agent: ureq::Agent,
    cache: Option<ResponseCache>,
    templates: HashMap<crate::gridworld::EnvKind, Template>,
}

impl RemotePlanner {
    pub fn new(config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_millis(config.timeout_ms)))
            .build()
            .into();
        let cache = config.cache.then(ResponseCache::default);
        Self {
            config,
            agent,
            cache,
            templates: HashMap::new(),
        }
    }

    /// Share a cache with other clients.
    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn template(&mut self, kind: crate::gridworld::EnvKind) -> Result<&Template> {
        if !self.templates.contains_key(&kind) {
            let t = match &self.config.template_dir {
                Some(dir) => Template::load(dir, kind)?,
                None => Template::bundled(kind)?,
            };
            self.templates.insert(kind, t);
        }
        Ok(&self.templates[&kind])
    }

    /// One chat-completion round trip; returns the message content.
    pub fn complete(&self, parts: &PromptParts) -> Result<String> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": parts.prefix},
                {"role": "user", "content": parts.user},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        });
        let mut attempt = 0;
        loop {
            match self.post_once(&url, &body) {
                Err(e) if e.is_retryable() && attempt < self.config.retries => {
                    let wait = self.config.backoff_ms << attempt;
                    log::warn!("planner request failed ({e}); retrying in {wait} ms");
                    std::thread::sleep(Duration::from_millis(wait));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn post_once(&self, url: &str, body: &serde_json::Value) -> Result<String> {
        let mut req = self.agent.post(url);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| Error::Transport(e.to_string()))?;
        let v: serde_json::Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| Error::Transport(format!("bad response body: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Transport(format!("response has no choices[0].message.content: {v}")))
    }
}

impl Planner for RemotePlanner {
    fn plan(&mut self, req: &PlannerRequest) -> Result<PlannerResponse> {
        let style = self.config.style.unwrap_or(PromptStyle::default_for(req.env_kind));
        let parts = PromptParts::new(self.template(req.env_kind)?, req.facts_text, style);
        let key = parts.full_text();
        let cached = self
            .cache
            .as_ref()
            .and_then(|c| c.lock().unwrap().get(&key).cloned());
        let raw = match cached {
            Some(r) => r,
            None => {
                let r = self.complete(&parts)?;
                if let Some(c) = &self.cache {
                    c.lock().unwrap().insert(key, r.clone());
                }
                r
            }
        };
        Ok(PlannerResponse {
            plan: parse_plan(&raw)?,
            raw_text: raw,
            source: PlannerSource::Remote,
        })
    }
}
