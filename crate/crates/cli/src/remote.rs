//! HTTP translation backend.
//!
//! Wire protocol: POST a JSON body
//! `{"src_lang": "<code>", "tgt_lang": "eng", "texts": [...]}` and expect
//! `{"translations": [...]}` of equal length. A non-200 status or a length
//! mismatch is a backend failure. Requests retry up to `attempts` times
//! with exponential backoff starting at `backoff_ms`.
//!
//! Large inputs are split into chunks of `max_batch` texts and up to
//! `parallelism` requests run in flight at once; results are reassembled in
//! input order regardless of completion order.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use semrel_core::corpus::LanguageCode;
use semrel_core::translate::{TranslateError, Translator};

#[derive(Clone, Debug)]
pub struct RemoteOptions {
    pub max_batch: usize,
    pub parallelism: usize,
    pub attempts: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            max_batch: 32,
            parallelism: 4,
            attempts: 3,
            backoff_ms: 250,
            timeout_secs: 30,
        }
    }
}

pub struct RemoteBackend {
    name: String,
    primary: bool,
    endpoint: String,
    languages: Option<BTreeSet<String>>,
    options: RemoteOptions,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    src_lang: &'a str,
    tgt_lang: &'a str,
    texts: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    translations: Vec<String>,
}

impl RemoteBackend {
    pub fn new(
        name: &str,
        primary: bool,
        endpoint: String,
        languages: Option<Vec<String>>,
        options: RemoteOptions,
    ) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(options.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            name: name.to_string(),
            primary,
            endpoint,
            languages: languages.map(|langs| langs.into_iter().collect()),
            options,
            agent,
        }
    }

    fn failure(&self, message: String) -> TranslateError {
        TranslateError::Backend {
            backend: self.name.clone(),
            message,
        }
    }

    fn post_once(&self, body: &str, expected: usize) -> Result<Vec<String>, TranslateError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| self.failure(format!("request failed: {e}")))?;
        let status = response.status().as_u16();
        if status != 200 {
            return Err(self.failure(format!("status {status}")));
        }
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| self.failure(format!("reading response: {e}")))?;
        let parsed: WireResponse = serde_json::from_str(&text)
            .map_err(|e| self.failure(format!("bad response body: {e}")))?;
        if parsed.translations.len() != expected {
            return Err(self.failure(format!(
                "{} translations for {} texts",
                parsed.translations.len(),
                expected
            )));
        }
        Ok(parsed.translations)
    }

    fn request_with_retries(
        &self,
        lang: &LanguageCode,
        texts: &[String],
    ) -> Result<Vec<String>, TranslateError> {
        let body = serde_json::to_string(&WireRequest {
            src_lang: lang.as_str(),
            tgt_lang: "eng",
            texts,
        })
        .expect("wire request serializes");
        let mut last = None;
        for attempt in 0..self.options.attempts {
            if attempt > 0 {
                let backoff = self.options.backoff_ms.saturating_mul(1 << (attempt - 1));
                std::thread::sleep(Duration::from_millis(backoff));
            }
            match self.post_once(&body, texts.len()) {
                Ok(translations) => return Ok(translations),
                Err(err) => last = Some(err),
            }
        }
        Err(last.unwrap_or_else(|| self.failure("no attempts configured".to_string())))
    }
}

impl Translator for RemoteBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn is_primary(&self) -> bool {
        self.primary
    }

    fn supports(&self, lang: &LanguageCode) -> bool {
        self.languages
            .as_ref()
            .is_none_or(|set| set.contains(lang.as_str()))
    }

    fn translate_batch(
        &self,
        lang: &LanguageCode,
        texts: &[String],
    ) -> Result<Vec<String>, TranslateError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let chunks: Vec<(usize, &[String])> =
            texts.chunks(self.options.max_batch).enumerate().collect();
        if chunks.len() == 1 || self.options.parallelism <= 1 {
            let mut out = Vec::with_capacity(texts.len());
            for (_, chunk) in chunks {
                out.extend(self.request_with_retries(lang, chunk)?);
            }
            return Ok(out);
        }

        let queue: Mutex<VecDeque<(usize, &[String])>> = Mutex::new(chunks.iter().copied().collect());
        let slots: Mutex<Vec<Option<Vec<String>>>> = Mutex::new(vec![None; chunks.len()]);
        let first_error: Mutex<Option<TranslateError>> = Mutex::new(None);
        let workers = self.options.parallelism.min(chunks.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    if first_error.lock().unwrap().is_some() {
                        break;
                    }
                    let Some((index, chunk)) = queue.lock().unwrap().pop_front() else {
                        break;
                    };
                    match self.request_with_retries(lang, chunk) {
                        Ok(translations) => {
                            slots.lock().unwrap()[index] = Some(translations);
                        }
                        Err(err) => {
                            first_error.lock().unwrap().get_or_insert(err);
                            break;
                        }
                    }
                });
            }
        });
        if let Some(err) = first_error.into_inner().unwrap() {
            return Err(err);
        }
        let mut out = Vec::with_capacity(texts.len());
        for slot in slots.into_inner().unwrap() {
            out.extend(slot.expect("every chunk finished without error"));
        }
        Ok(out)
    }
}
