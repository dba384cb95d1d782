use std::time::Duration;

use base64::Engine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

/// Default captioning instruction sent with every image.
pub const CAPTION_PROMPT: &str = "Describe this car wheel image in detail. Write your description in 5-7 full sentences without using bullet points. Include information about the wheel design, style, finish, spoke pattern, and any other notable features";

/// Environment variable holding the bearer token for HTTP providers.
pub const TOKEN_ENV: &str = "TASTEKIT_PROVIDER_TOKEN";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderFailure {
    /// The request never produced a response (connection, DNS, timeout).
    Unreachable(String),
    /// The provider answered, but not with a usable result.
    Rejected(String),
}

impl std::fmt::Display for ProviderFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Unreachable(m) => write!(f, "unreachable: {m}"),
            Self::Rejected(m) => write!(f, "rejected: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptionRequest {
    pub id: String,
    pub prompt: String,
    /// Raw image file bytes.
    #[serde(skip)]
    pub image: Vec<u8>,
}

pub trait CaptionProvider: Sync {
    fn caption(&self, request: &CaptionRequest) -> Result<String, ProviderFailure>;
}

pub trait EmbeddingProvider: Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderFailure>;
}

/// JSON-over-HTTP provider.
///
/// Embedding requests post `{"inputs": [text, ...]}` and expect
/// `{"vectors": [[f64, ...], ...]}`. Caption requests post
/// `{"inputs": [{"id", "prompt", "image"}]}` with the image file
/// base64-encoded, and expect `{"captions": [text]}`.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    pub endpoint: String,
    token: Option<String>,
    agent: ureq::Agent,
}

impl HttpProvider {
    pub fn new(endpoint: &str, token: Option<String>) -> Self {
        Self {
            endpoint: endpoint.to_string(),
            token,
            agent: ureq::AgentBuilder::new().timeout(Duration::from_secs(120)).build(),
        }
    }

    /// Reads the bearer token from [`TOKEN_ENV`] when set.
    pub fn from_env(endpoint: &str) -> Self {
        Self::new(endpoint, std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()))
    }

    fn post(&self, body: serde_json::Value) -> Result<serde_json::Value, ProviderFailure> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.set("Authorization", &format!("Bearer {t}"));
        }
        match req.send_json(body) {
            Ok(resp) => resp
                .into_json()
                .map_err(|e| ProviderFailure::Rejected(format!("malformed response: {e}"))),
            Err(ureq::Error::Status(code, resp)) => Err(ProviderFailure::Rejected(format!(
                "HTTP {code}: {}",
                resp.into_string().unwrap_or_default()
            ))),
            Err(ureq::Error::Transport(t)) => Err(ProviderFailure::Unreachable(t.to_string())),
        }
    }
}

#[derive(Deserialize)]
struct VectorsBody {
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct CaptionsBody {
    captions: Vec<String>,
}

impl EmbeddingProvider for HttpProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderFailure> {
        let body: VectorsBody = serde_json::from_value(self.post(json!({ "inputs": texts }))?)
            .map_err(|e| ProviderFailure::Rejected(format!("expected `vectors`: {e}")))?;
        Ok(body.vectors)
    }
}

impl CaptionProvider for HttpProvider {
    fn caption(&self, request: &CaptionRequest) -> Result<String, ProviderFailure> {
        let image = base64::engine::general_purpose::STANDARD.encode(&request.image);
        let value = self.post(json!({
            "inputs": [{ "id": request.id, "prompt": request.prompt, "image": image }]
        }))?;
        let body: CaptionsBody = serde_json::from_value(value)
            .map_err(|e| ProviderFailure::Rejected(format!("expected `captions`: {e}")))?;
        body.captions
            .into_iter()
            .next()
            .ok_or_else(|| ProviderFailure::Rejected("empty `captions` array".into()))
    }
}

/// Deterministic offline embedder: each text maps to a unit vector drawn
/// from a Gaussian seeded by the SHA-256 of `(seed, text)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashEmbedder {
    pub dim: usize,
    pub seed: u64,
}

impl HashEmbedder {
    pub fn vector(&self, text: &str) -> Vec<f64> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(text.as_bytes());
        let key: [u8; 32] = h.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(key);
        let v: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderFailure> {
        Ok(texts.iter().map(|t| self.vector(t)).collect())
    }
}

/// Captioner that returns the same text for every image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedCaptioner(pub String);

impl CaptionProvider for FixedCaptioner {
    fn caption(&self, _request: &CaptionRequest) -> Result<String, ProviderFailure> {
        Ok(self.0.clone())
    }
}
