use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const WIRE_VERSION: u32 = 1;

/// One entry of a per-mask ranking: a vocabulary token (with any subword
/// marker kept) and its probability under the full-vocabulary softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireToken")]
pub struct TokenScore {
    pub token: String,
    #[serde(rename = "prob")]
    pub probability: f64,
}

#[derive(Deserialize)]
struct WireToken {
    token: String,
    prob: Option<f64>,
    logprob: Option<f64>,
}

impl TryFrom<WireToken> for TokenScore {
    type Error = String;

    fn try_from(w: WireToken) -> std::result::Result<Self, String> {
        let probability = match (w.prob, w.logprob) {
            (Some(p), _) => p,
            (None, Some(lp)) => lp.exp(),
            (None, None) => return Err(format!("token {:?} has neither prob nor logprob", w.token)),
        };
        Ok(TokenScore {
            token: w.token,
            probability,
        })
    }
}

/// Per-mask rankings, one vector per mask position in prompt order.
pub type MaskRankings = Vec<Vec<TokenScore>>;

/// Source of masked-token distributions.
pub trait MaskScoringBackend: Send + Sync {
    /// Model label, used in cache keys and function labels.
    fn identity(&self) -> &str;
    /// Literal mask placeholder the model expects in prompts.
    fn mask_token(&self) -> &str;
    /// Largest `top_n` the backend honours.
    fn max_top_n(&self) -> usize;
    /// Top `top_n` tokens for every mask in `prompt`.
    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings>;
}

/// Rejects rankings that are not positive, at most 1, and non-increasing.
pub fn validate_rankings(prompt: &str, masks: &MaskRankings) -> Result<()> {
    let bad = |message: String| Error::Backend {
        prompt: prompt.to_string(),
        message,
    };
    if masks.is_empty() {
        return Err(bad("response has no mask rankings".into()));
    }
    for (i, ranking) in masks.iter().enumerate() {
        let mut prev = f64::INFINITY;
        let mut sum = 0.0;
        for t in ranking {
            let p = t.probability;
            if !(p > 0.0 && p <= 1.0 + 1e-9) {
                return Err(bad(format!("mask {i}: probability {p} for {:?} out of range", t.token)));
            }
            if p > prev {
                return Err(bad(format!("mask {i}: probabilities are not non-increasing")));
            }
            prev = p;
            sum += p;
        }
        if sum > 1.0 + 1e-6 {
            return Err(bad(format!("mask {i}: probabilities sum to {sum}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub v: u32,
    pub model: String,
    pub mask_token: String,
    pub prompts: BTreeMap<String, MaskRankings>,
    /// `top_n` each entry was fetched with, when recorded by a cache.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub top_n: BTreeMap<String, usize>,
}

impl FixtureFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = crate::fsutil::read_to_string(path)?;
        let file: FixtureFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), format!("invalid fixture: {e}")))?;
        if file.v != WIRE_VERSION {
            return Err(Error::parse(path, 1, format!("unsupported fixture version {}", file.v)));
        }
        for (prompt, masks) in &file.prompts {
            validate_rankings(prompt, masks).map_err(|e| e.context(path.display().to_string()))?;
        }
        Ok(file)
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("fixture serializes");
        out.push(b'\n');
        out
    }
}

/// Replays recorded rankings by exact prompt lookup.
#[derive(Debug, Clone)]
pub struct FixtureBackend {
    file: FixtureFile,
}

impl FixtureBackend {
    pub fn new(file: FixtureFile) -> Self {
        FixtureBackend { file }
    }

    pub fn load(path: &Path) -> Result<Self> {
        FixtureFile::load(path).map(FixtureBackend::new)
    }

    pub fn prompts(&self) -> impl Iterator<Item = &str> {
        self.file.prompts.keys().map(String::as_str)
    }
}

impl MaskScoringBackend for FixtureBackend {
    fn identity(&self) -> &str {
        &self.file.model
    }

    fn mask_token(&self) -> &str {
        &self.file.mask_token
    }

    fn max_top_n(&self) -> usize {
        usize::MAX
    }

    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings> {
        let masks = self.file.prompts.get(prompt).ok_or_else(|| Error::Backend {
            prompt: prompt.to_string(),
            message: "prompt not present in fixture".into(),
        })?;
        Ok(masks.iter().map(|m| m.iter().take(top_n).cloned().collect()).collect())
    }
}

#[derive(Serialize)]
struct FillMaskRequest<'a> {
    v: u32,
    prompt: &'a str,
    top_n: usize,
}

#[derive(Deserialize)]
struct FillMaskResponse {
    #[serde(default = "default_version")]
    v: u32,
    masks: MaskRankings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model: String,
    pub mask_token: String,
}

fn default_version() -> u32 {
    WIRE_VERSION
}

/// Client for the fill-mask HTTP service.
pub struct ServiceBackend {
    agent: ureq::Agent,
    base_url: String,
    model: String,
    mask_token: String,
    max_top_n: usize,
    retries: u32,
    backoff: Duration,
}

enum Attempt {
    Retry(String),
    Fail(String),
}

impl ServiceBackend {
    /// Connects to `base_url`, reading the model label and mask token from
    /// its health endpoint.
    pub fn connect(base_url: &str, retries: u32, backoff: Duration) -> Result<Self> {
        let agent = ureq::AgentBuilder::new()
            .timeout_connect(Duration::from_secs(5))
            .timeout(Duration::from_secs(120))
            .build();
        let base_url = base_url.trim_end_matches('/').to_string();
        let url = format!("{base_url}/health");
        let health: Health = with_retries(&url, retries, backoff, || match agent.get(&url).call() {
            Ok(resp) => resp.into_json().map_err(|e| Attempt::Fail(e.to_string())),
            Err(e) => Err(classify(e)),
        })?;
        if health.status != "ok" || health.mask_token.is_empty() {
            return Err(Error::Backend {
                prompt: String::new(),
                message: format!("service at {base_url} is not ready: status {:?}", health.status),
            });
        }
        Ok(ServiceBackend {
            agent,
            base_url,
            model: health.model,
            mask_token: health.mask_token,
            max_top_n: 3000,
            retries,
            backoff,
        })
    }

    pub fn with_max_top_n(mut self, max_top_n: usize) -> Self {
        self.max_top_n = max_top_n;
        self
    }
}

fn classify(e: ureq::Error) -> Attempt {
    match e {
        ureq::Error::Status(code, resp) => {
            let body = resp.into_string().unwrap_or_default();
            let msg = format!("HTTP {code}: {body}");
            if code >= 500 {
                Attempt::Retry(msg)
            } else {
                Attempt::Fail(msg)
            }
        }
        ureq::Error::Transport(t) => Attempt::Retry(t.to_string()),
    }
}

fn with_retries<T>(
    prompt: &str,
    retries: u32,
    backoff: Duration,
    mut call: impl FnMut() -> std::result::Result<T, Attempt>,
) -> Result<T> {
    let mut attempt = 0;
    loop {
        match call() {
            Ok(v) => return Ok(v),
            Err(Attempt::Retry(msg)) if attempt < retries => {
                log::warn!("backend request failed ({msg}), retrying");
                std::thread::sleep(backoff * 2u32.saturating_pow(attempt));
                attempt += 1;
            }
            Err(Attempt::Retry(msg)) | Err(Attempt::Fail(msg)) => {
                return Err(Error::Backend {
                    prompt: prompt.to_string(),
                    message: format!("{msg} (after {} attempts)", attempt + 1),
                })
            }
        }
    }
}

impl MaskScoringBackend for ServiceBackend {
    fn identity(&self) -> &str {
        &self.model
    }

    fn mask_token(&self) -> &str {
        &self.mask_token
    }

    fn max_top_n(&self) -> usize {
        self.max_top_n
    }

    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings> {
        let url = format!("{}/fill-mask", self.base_url);
        let request = FillMaskRequest {
            v: WIRE_VERSION,
            prompt,
            top_n: top_n.min(self.max_top_n),
        };
        let response: FillMaskResponse = with_retries(prompt, self.retries, self.backoff, || {
            match self.agent.post(&url).send_json(&request) {
                Ok(resp) => resp.into_json().map_err(|e| Attempt::Fail(e.to_string())),
                Err(e) => Err(classify(e)),
            }
        })?;
        if response.v != WIRE_VERSION {
            return Err(Error::Backend {
                prompt: prompt.to_string(),
                message: format!("unsupported response version {}", response.v),
            });
        }
        validate_rankings(prompt, &response.masks)?;
        Ok(response.masks)
    }
}

/// Memoizes responses by prompt. A cached answer fetched with a larger
/// `top_n` serves smaller requests by truncation, which is exact because
/// rankings are prefixes of one full-vocabulary distribution.
pub struct CachedBackend {
    inner: Arc<dyn MaskScoringBackend>,
    entries: Mutex<HashMap<String, (usize, Arc<MaskRankings>)>>,
}

impl CachedBackend {
    pub fn new(inner: Arc<dyn MaskScoringBackend>) -> Self {
        CachedBackend {
            inner,
            entries: Mutex::new(HashMap::new()),
        }
    }

    /// Seeds the cache from a file written by [`CachedBackend::to_fixture`].
    /// Entries recorded for another model are ignored.
    pub fn warm_from(self, path: &Path) -> Result<Self> {
        let file = FixtureFile::load(path)?;
        if file.model != self.inner.identity() {
            log::warn!(
                "ignoring response cache {} recorded for model {:?}",
                path.display(),
                file.model
            );
            return Ok(self);
        }
        {
            let mut entries = self.entries.lock().expect("cache lock");
            for (prompt, masks) in file.prompts {
                let top_n = file.top_n.get(&prompt).copied().unwrap_or(usize::MAX);
                entries.insert(prompt, (top_n, Arc::new(masks)));
            }
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Everything fetched so far, in the fixture file format.
    pub fn to_fixture(&self) -> FixtureFile {
        let entries = self.entries.lock().expect("cache lock");
        let mut prompts = BTreeMap::new();
        let mut top_n = BTreeMap::new();
        for (prompt, (n, masks)) in entries.iter() {
            prompts.insert(prompt.clone(), masks.as_ref().clone());
            if *n != usize::MAX {
                top_n.insert(prompt.clone(), *n);
            }
        }
        FixtureFile {
            v: WIRE_VERSION,
            model: self.inner.identity().to_string(),
            mask_token: self.inner.mask_token().to_string(),
            prompts,
            top_n,
        }
    }
}

impl MaskScoringBackend for CachedBackend {
    fn identity(&self) -> &str {
        self.inner.identity()
    }

    fn mask_token(&self) -> &str {
        self.inner.mask_token()
    }

    fn max_top_n(&self) -> usize {
        self.inner.max_top_n()
    }

    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings> {
        let top_n = top_n.min(self.inner.max_top_n());
        let hit = self.entries.lock().expect("cache lock").get(prompt).cloned();
        let masks = match hit {
            Some((n, masks)) if n >= top_n => masks,
            _ => {
                let fresh = Arc::new(self.inner.fill_mask(prompt, top_n)?);
                let mut entries = self.entries.lock().expect("cache lock");
                let keep = match entries.get(prompt) {
                    Some((n, _)) => *n < top_n,
                    None => true,
                };
                if keep {
                    entries.insert(prompt.to_string(), (top_n, fresh.clone()));
                }
                fresh
            }
        };
        Ok(masks.iter().map(|m| m.iter().take(top_n).cloned().collect()).collect())
    }
}

/// Caps the number of requests in flight across all callers.
pub struct BoundedBackend {
    inner: Arc<dyn MaskScoringBackend>,
    limit: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

impl BoundedBackend {
    pub fn new(inner: Arc<dyn MaskScoringBackend>, limit: usize) -> Self {
        BoundedBackend {
            inner,
            limit: limit.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
        }
    }
}

impl MaskScoringBackend for BoundedBackend {
    fn identity(&self) -> &str {
        self.inner.identity()
    }

    fn mask_token(&self) -> &str {
        self.inner.mask_token()
    }

    fn max_top_n(&self) -> usize {
        self.inner.max_top_n()
    }

    fn fill_mask(&self, prompt: &str, top_n: usize) -> Result<MaskRankings> {
        {
            let mut n = self.in_flight.lock().expect("semaphore lock");
            while *n >= self.limit {
                n = self.freed.wait(n).expect("semaphore lock");
            }
            *n += 1;
        }
        let result = self.inner.fill_mask(prompt, top_n);
        *self.in_flight.lock().expect("semaphore lock") -= 1;
        self.freed.notify_one();
        result
    }
}
