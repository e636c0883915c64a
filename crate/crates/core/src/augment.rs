//! Premise paraphrasing.
//!
//! Each example is copied `n` times with every premise routed through a
//! paraphrase provider; conclusions are never touched, so the logical target
//! of the example is byte-stable across copies. Providers are pluggable
//! behind [`ParaphraseProvider`]:
//!
//! * `mock` — deterministic rule-based rewrites, no I/O; the default for
//!   tests and dry runs.
//! * `fixture:<path>` — replays recorded responses from a JSONL file, for
//!   reproducing a dataset without the original backend.
//! * `http://…` — a live backend speaking the JSON-over-POST protocol.
//!
//! Augmentation is all-or-nothing per example: either every copy of an
//! example is produced or the stage fails; no partially paraphrased examples
//! are ever emitted.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ProviderError;
use crate::template::DeductionExample;

/// One paraphrase call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseRequest {
    pub text: String,
    pub n: u32,
    pub top_p: f64,
    /// `None` means the provider may be nondeterministic.
    pub seed: Option<u64>,
}

impl ParaphraseRequest {
    pub fn new(
        text: &str,
        n: u32,
        top_p: f64,
        seed: Option<u64>,
    ) -> Result<ParaphraseRequest, ProviderError> {
        if text.trim().is_empty() {
            return Err(ProviderError::InvalidRequest(
                "text must be non-empty".to_string(),
            ));
        }
        if n < 1 {
            return Err(ProviderError::InvalidRequest(
                "n must be at least 1".to_string(),
            ));
        }
        if !(top_p > 0.0 && top_p <= 1.0) {
            return Err(ProviderError::InvalidRequest(format!(
                "top_p must be in (0, 1], got {top_p}"
            )));
        }
        Ok(ParaphraseRequest {
            text: text.to_string(),
            n,
            top_p,
            seed,
        })
    }
}

/// A paraphrase backend. Must return exactly `n` non-empty strings.
pub trait ParaphraseProvider: Send + Sync {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, ProviderError>;
    /// Whether passing a seed makes responses reproducible.
    fn supports_seed(&self) -> bool;
    fn name(&self) -> &str;
}

/// Knobs for the augmentation stage.
#[derive(Debug, Clone)]
pub struct AugmentOptions {
    /// Paraphrased copies per example.
    pub copies: u32,
    pub top_p: f64,
    /// Base seed; `None` leaves seed-capable providers unseeded.
    pub seed: Option<u64>,
    pub workers: usize,
    /// Retries per call on transport and 5xx/429 failures.
    pub retries: u32,
    /// First retry delay; doubles per attempt.
    pub backoff: Duration,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        AugmentOptions {
            copies: 2,
            top_p: 0.9,
            seed: None,
            workers: 1,
            retries: 3,
            backoff: Duration::from_millis(50),
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-call seed: the base seed absorbed with the example index, copy index
/// and premise index, so every call in a run is independently seeded yet the
/// whole run is a pure function of the base seed.
pub fn derive_seed(base: u64, example_idx: u64, copy: u64, premise_idx: u64) -> u64 {
    let mut state = splitmix64(base);
    for v in [example_idx, copy, premise_idx] {
        state = splitmix64(state ^ v);
    }
    state
}

/// Levenshtein distance over characters.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

const DISTANCE_BUCKETS: &[(&str, usize, usize)] = &[
    ("0", 0, 0),
    ("1-2", 1, 2),
    ("3-5", 3, 5),
    ("6-10", 6, 10),
    ("11-20", 11, 20),
    ("21+", 21, usize::MAX),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceBucket {
    pub range: String,
    pub count: u64,
}

/// What the augmentation stage did, for `augment-report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentReport {
    pub provider: String,
    pub copies: u32,
    pub top_p: f64,
    pub seeded: bool,
    pub examples_in: u64,
    pub examples_out: u64,
    pub paraphrase_calls: u64,
    /// Histogram of edit distances between each premise and its paraphrase.
    pub edit_distance: Vec<DistanceBucket>,
}

impl AugmentReport {
    fn new(provider: &dyn ParaphraseProvider, opts: &AugmentOptions) -> AugmentReport {
        AugmentReport {
            provider: provider.name().to_string(),
            copies: opts.copies,
            top_p: opts.top_p,
            // A seed only makes the run reproducible if the provider uses it.
            seeded: opts.seed.is_some() && provider.supports_seed(),
            examples_in: 0,
            examples_out: 0,
            paraphrase_calls: 0,
            edit_distance: DISTANCE_BUCKETS
                .iter()
                .map(|(range, _, _)| DistanceBucket {
                    range: range.to_string(),
                    count: 0,
                })
                .collect(),
        }
    }

    fn record_distance(&mut self, d: usize) {
        for (i, (_, lo, hi)) in DISTANCE_BUCKETS.iter().enumerate() {
            if d >= *lo && d <= *hi {
                self.edit_distance[i].count += 1;
                return;
            }
        }
    }
}

fn call_with_retries(
    provider: &dyn ParaphraseProvider,
    req: &ParaphraseRequest,
    retries: u32,
    backoff: Duration,
) -> Result<Vec<String>, ProviderError> {
    let mut attempt = 0;
    loop {
        match provider.paraphrase(req) {
            Ok(texts) => {
                if texts.len() != req.n as usize {
                    return Err(ProviderError::Contract(format!(
                        "asked for {} paraphrases, got {}",
                        req.n,
                        texts.len()
                    )));
                }
                if texts.iter().any(|t| t.trim().is_empty()) {
                    return Err(ProviderError::Contract(
                        "provider returned an empty paraphrase".to_string(),
                    ));
                }
                return Ok(texts);
            }
            Err(e) => {
                let retryable = match &e {
                    ProviderError::Transport(_) => true,
                    ProviderError::Service { status, .. } => *status >= 500 || *status == 429,
                    _ => false,
                };
                if !retryable || attempt >= retries {
                    return Err(e);
                }
                std::thread::sleep(backoff * 2u32.pow(attempt));
                attempt += 1;
            }
        }
    }
}

struct ExampleOutcome {
    copies: Vec<DeductionExample>,
    calls: u64,
    distances: Vec<usize>,
}

fn augment_one(
    provider: &dyn ParaphraseProvider,
    example: &DeductionExample,
    example_idx: u64,
    opts: &AugmentOptions,
) -> Result<ExampleOutcome, ProviderError> {
    let mut out = ExampleOutcome {
        copies: Vec::with_capacity(opts.copies as usize),
        calls: 0,
        distances: Vec::new(),
    };
    for copy in 0..u64::from(opts.copies) {
        let mut premises = Vec::with_capacity(example.premises.len());
        for (premise_idx, premise) in example.premises.iter().enumerate() {
            let seed = match opts.seed {
                Some(base) if provider.supports_seed() => {
                    Some(derive_seed(base, example_idx, copy, premise_idx as u64))
                }
                _ => None,
            };
            let req = ParaphraseRequest::new(premise, 1, opts.top_p, seed)?;
            let texts = call_with_retries(provider, &req, opts.retries, opts.backoff)?;
            out.calls += 1;
            out.distances.push(edit_distance(premise, &texts[0]));
            premises.push(texts.into_iter().next().expect("length checked"));
        }
        out.copies.push(DeductionExample {
            example_id: format!("{}#p{}", example.example_id, copy + 1),
            op: example.op,
            premises,
            conclusion: example.conclusion.clone(),
            provenance: example.provenance.clone(),
            paraphrase_of: Some(example.example_id.clone()),
        });
    }
    Ok(out)
}

/// Augment one example: the original followed by `copies` paraphrased
/// copies. The conclusion of every copy is byte-identical to the original's.
pub fn augment_example(
    provider: &dyn ParaphraseProvider,
    example: &DeductionExample,
    example_idx: u64,
    opts: &AugmentOptions,
) -> Result<Vec<DeductionExample>, ProviderError> {
    let outcome = augment_one(provider, example, example_idx, opts)?;
    let mut all = Vec::with_capacity(1 + outcome.copies.len());
    all.push(example.clone());
    all.extend(outcome.copies);
    Ok(all)
}

/// Augment a whole dataset, preserving example order. Calls run on up to
/// `opts.workers` threads; the output and report are identical regardless of
/// worker count.
pub fn augment_examples(
    provider: &dyn ParaphraseProvider,
    examples: &[DeductionExample],
    opts: &AugmentOptions,
) -> Result<(Vec<DeductionExample>, AugmentReport), ProviderError> {
    let slots: Mutex<Vec<Option<Result<ExampleOutcome, ProviderError>>>> =
        Mutex::new((0..examples.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = opts.workers.max(1).min(examples.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let at = next.fetch_add(1, Ordering::SeqCst);
                if at >= examples.len() {
                    return;
                }
                let outcome = augment_one(provider, &examples[at], at as u64, opts);
                slots.lock().unwrap()[at] = Some(outcome);
            });
        }
    });

    let mut report = AugmentReport::new(provider, opts);
    report.examples_in = examples.len() as u64;
    let mut out = Vec::with_capacity(examples.len() * (1 + opts.copies as usize));
    for (example, slot) in examples.iter().zip(slots.into_inner().unwrap()) {
        let outcome = slot.expect("every slot was claimed")?;
        report.paraphrase_calls += outcome.calls;
        for d in outcome.distances {
            report.record_distance(d);
        }
        out.push(example.clone());
        out.extend(outcome.copies);
    }
    report.examples_out = out.len() as u64;
    Ok((out, report))
}

/// Build a provider from a spec string: `mock`, `fixture:<path>`, or an
/// `http://` URL.
pub fn provider_from_spec(spec: &str) -> Result<Box<dyn ParaphraseProvider>, ProviderError> {
    if spec == "mock" {
        return Ok(Box::new(MockParaphraser::new()));
    }
    if spec.starts_with("http://") {
        return Ok(Box::new(HttpProvider::new(spec)?));
    }
    if let Some(path) = spec.strip_prefix("fixture:") {
        return Ok(Box::new(FixtureProvider::load(Path::new(path))?));
    }
    Err(ProviderError::BadSpec {
        spec: spec.to_string(),
        reason: "expected \"mock\", \"fixture:<path>\" or an http:// URL".to_string(),
    })
}

// ---------------------------------------------------------------------------
// Mock provider

/// Deterministic rule-based paraphraser. With a seed, output depends only on
/// (text, n, seed); unseeded, variants are keyed off a hash of the text so
/// repeated runs still agree.
pub struct MockParaphraser;

impl MockParaphraser {
    pub fn new() -> MockParaphraser {
        MockParaphraser
    }

    fn rewrite(text: &str, variant: u64) -> String {
        match variant % 4 {
            0 => front_prepositional_phrase(text).unwrap_or_else(|| prefix_with(text, "In fact,")),
            1 => synonym_swap(text).unwrap_or_else(|| prefix_with(text, "Evidently,")),
            2 => prefix_with(text, "It is known that"),
            _ => prefix_with(text, "Put differently,"),
        }
    }
}

impl Default for MockParaphraser {
    fn default() -> Self {
        MockParaphraser::new()
    }
}

fn decap(text: &str) -> String {
    // Leave likely proper nouns alone: a capitalized second word suggests
    // the first is part of a name.
    let mut words = text.split_whitespace();
    let first = words.next().unwrap_or("");
    if words
        .next()
        .is_some_and(|w| w.chars().next().is_some_and(|c| c.is_uppercase()))
        && first.chars().all(|c| c.is_alphabetic())
    {
        return text.to_string();
    }
    crate::morph::decapitalize_first(text)
}

fn prefix_with(text: &str, prefix: &str) -> String {
    format!("{prefix} {}", decap(text))
}

/// "In Egypt, teas are popular." -> "Teas are popular in Egypt."
fn front_prepositional_phrase(text: &str) -> Option<String> {
    const PREPS: &[&str] = &["In", "At", "On", "During", "Within", "Among"];
    let (head, rest) = text.split_once(", ")?;
    let first = head.split_whitespace().next()?;
    if !PREPS.contains(&first) || rest.is_empty() {
        return None;
    }
    let body = rest.strip_suffix('.').unwrap_or(rest);
    // The head starts with a known preposition, never a proper noun.
    Some(format!(
        "{} {}.",
        crate::morph::capitalize_first(body),
        crate::morph::decapitalize_first(head)
    ))
}

const SYNONYMS: &[(&str, &str)] = &[
    ("popular", "well-liked"),
    ("ancient", "age-old"),
    ("learn", "study"),
    ("learns", "studies"),
    ("provide", "supply"),
    ("provides", "supplies"),
    ("colonize", "settle"),
    ("colonizes", "settles"),
    ("especially", "particularly"),
    ("various", "diverse"),
    ("surface", "exterior"),
];

fn synonym_swap(text: &str) -> Option<String> {
    let mut words: Vec<String> = text.split(' ').map(|w| w.to_string()).collect();
    let mut hit = false;
    for w in &mut words {
        let (core, punct) = match w.find(|c: char| !c.is_alphanumeric() && c != '-') {
            Some(at) => w.split_at(at),
            None => (w.as_str(), ""),
        };
        if let Some((_, to)) = SYNONYMS.iter().find(|(from, _)| *from == core) {
            *w = format!("{to}{punct}");
            hit = true;
        }
    }
    hit.then(|| words.join(" "))
}

impl ParaphraseProvider for MockParaphraser {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, ProviderError> {
        ParaphraseRequest::new(&req.text, req.n, req.top_p, req.seed)?;
        let base = req.seed.unwrap_or_else(|| {
            let mut h = 0xcbf2_9ce4_8422_2325u64;
            for b in req.text.bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
            h
        });
        Ok((0..u64::from(req.n))
            .map(|k| Self::rewrite(&req.text, splitmix64(base ^ k)))
            .collect())
    }

    fn supports_seed(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        "mock"
    }
}

// ---------------------------------------------------------------------------
// Fixture provider

#[derive(Debug, Deserialize)]
struct FixtureLine {
    text: String,
    n: u32,
    top_p: f64,
    paraphrases: Vec<String>,
}

/// Replays recorded responses. Requests are keyed by (text, n, top_p) —
/// seeds are deliberately excluded so one recording serves seeded and
/// unseeded runs. Several recordings under one key are served round-robin.
#[derive(Debug)]
pub struct FixtureProvider {
    responses: HashMap<String, Vec<Vec<String>>>,
    cursors: Mutex<HashMap<String, usize>>,
}

fn fixture_key(text: &str, n: u32, top_p: f64) -> String {
    let payload = format!("{text}|{n}|{top_p}");
    crate::conllu::hex(&Sha256::digest(payload.as_bytes()))
}

impl FixtureProvider {
    pub fn load(path: &Path) -> Result<FixtureProvider, ProviderError> {
        let bad = |reason: String| ProviderError::FixtureLoad {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let mut responses: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: FixtureLine =
                serde_json::from_str(line).map_err(|e| bad(format!("line {}: {e}", no + 1)))?;
            if rec.paraphrases.len() != rec.n as usize {
                return Err(bad(format!(
                    "line {}: {} paraphrases recorded for n={}",
                    no + 1,
                    rec.paraphrases.len(),
                    rec.n
                )));
            }
            responses
                .entry(fixture_key(&rec.text, rec.n, rec.top_p))
                .or_default()
                .push(rec.paraphrases);
        }
        Ok(FixtureProvider {
            responses,
            cursors: Mutex::new(HashMap::new()),
        })
    }
}

impl ParaphraseProvider for FixtureProvider {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, ProviderError> {
        let key = fixture_key(&req.text, req.n, req.top_p);
        let recorded = self.responses.get(&key).ok_or_else(|| {
            ProviderError::FixtureMiss(format!(
                "text {:?}, n={}, top_p={}",
                req.text, req.n, req.top_p
            ))
        })?;
        let mut cursors = self.cursors.lock().unwrap();
        let cursor = cursors.entry(key).or_insert(0);
        let response = recorded[*cursor % recorded.len()].clone();
        *cursor += 1;
        Ok(response)
    }

    fn supports_seed(&self) -> bool {
        false
    }

    fn name(&self) -> &str {
        "fixture"
    }
}

// ---------------------------------------------------------------------------
// HTTP provider

/// Client for a paraphrase service: `POST <path>` with a JSON body
/// `{"text", "n", "top_p", "seed"}`, expecting `{"paraphrases": [...]}`
/// back. Plain HTTP/1.1 over one connection per call.
pub struct HttpProvider {
    host: String,
    port: u16,
    path: String,
    timeout: Duration,
}

impl HttpProvider {
    pub fn new(url: &str) -> Result<HttpProvider, ProviderError> {
        let bad = |reason: &str| ProviderError::BadSpec {
            spec: url.to_string(),
            reason: reason.to_string(),
        };
        let rest = url
            .strip_prefix("http://")
            .ok_or_else(|| bad("only http:// URLs are supported"))?;
        let (authority, path) = match rest.find('/') {
            Some(at) => (&rest[..at], &rest[at..]),
            None => (rest, "/paraphrase"),
        };
        let (host, port) = match authority.rsplit_once(':') {
            Some((h, p)) => (h, p.parse::<u16>().map_err(|_| bad("invalid port"))?),
            None => (authority, 80),
        };
        if host.is_empty() {
            return Err(bad("missing host"));
        }
        Ok(HttpProvider {
            host: host.to_string(),
            port,
            path: path.to_string(),
            timeout: Duration::from_secs(30),
        })
    }

    fn roundtrip(&self, body: &str) -> Result<(u16, Vec<u8>), ProviderError> {
        let transport = |e: std::io::Error| ProviderError::Transport(e.to_string());
        let addr = (self.host.as_str(), self.port);
        let mut stream = TcpStream::connect(addr).map_err(transport)?;
        stream
            .set_read_timeout(Some(self.timeout))
            .map_err(transport)?;
        stream
            .set_write_timeout(Some(self.timeout))
            .map_err(transport)?;
        let request = format!(
            "POST {} HTTP/1.1\r\nHost: {}\r\nContent-Type: application/json\r\n\
             Content-Length: {}\r\nConnection: close\r\n\r\n{}",
            self.path,
            self.host,
            body.len(),
            body
        );
        stream.write_all(request.as_bytes()).map_err(transport)?;

        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).map_err(transport)?;
        let header_end = find_subslice(&raw, b"\r\n\r\n")
            .ok_or_else(|| ProviderError::Transport("response has no header block".to_string()))?;
        let head = std::str::from_utf8(&raw[..header_end])
            .map_err(|_| ProviderError::Transport("response headers are not utf-8".to_string()))?;
        let mut lines = head.split("\r\n");
        let status_line = lines.next().unwrap_or("");
        let status: u16 = status_line
            .split_whitespace()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ProviderError::Transport(format!("bad status line {status_line:?}")))?;
        let mut content_length: Option<usize> = None;
        let mut chunked = false;
        for line in lines {
            let Some((name, value)) = line.split_once(':') else {
                continue;
            };
            let name = name.trim().to_ascii_lowercase();
            let value = value.trim();
            if name == "content-length" {
                content_length = value.parse().ok();
            } else if name == "transfer-encoding" && value.eq_ignore_ascii_case("chunked") {
                chunked = true;
            }
        }
        let rest = &raw[header_end + 4..];
        let body = if chunked {
            decode_chunked(rest)
                .ok_or_else(|| ProviderError::Transport("bad chunked body".to_string()))?
        } else if let Some(len) = content_length {
            if rest.len() < len {
                return Err(ProviderError::Transport(format!(
                    "body truncated: {} of {len} bytes",
                    rest.len()
                )));
            }
            rest[..len].to_vec()
        } else {
            rest.to_vec()
        };
        Ok((status, body))
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn decode_chunked(mut rest: &[u8]) -> Option<Vec<u8>> {
    let mut body = Vec::new();
    loop {
        let line_end = find_subslice(rest, b"\r\n")?;
        let size_str = std::str::from_utf8(&rest[..line_end]).ok()?;
        let size = usize::from_str_radix(size_str.split(';').next()?.trim(), 16).ok()?;
        rest = &rest[line_end + 2..];
        if size == 0 {
            return Some(body);
        }
        if rest.len() < size + 2 {
            return None;
        }
        body.extend_from_slice(&rest[..size]);
        rest = &rest[size + 2..];
    }
}

#[derive(Serialize)]
struct HttpRequestBody<'a> {
    text: &'a str,
    n: u32,
    top_p: f64,
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct HttpResponseBody {
    #[serde(default)]
    paraphrases: Vec<String>,
    #[serde(default)]
    error: Option<String>,
}

impl ParaphraseProvider for HttpProvider {
    fn paraphrase(&self, req: &ParaphraseRequest) -> Result<Vec<String>, ProviderError> {
        let body = serde_json::to_string(&HttpRequestBody {
            text: &req.text,
            n: req.n,
            top_p: req.top_p,
            seed: req.seed,
        })
        .expect("request body always serializes");
        let (status, response) = self.roundtrip(&body)?;
        let parsed: HttpResponseBody = serde_json::from_slice(&response)
            .map_err(|e| ProviderError::Transport(format!("unparseable response body: {e}")))?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::Service {
                status,
                message: parsed
                    .error
                    .unwrap_or_else(|| "no error message".to_string()),
            });
        }
        Ok(parsed.paraphrases)
    }

    fn supports_seed(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        "http"
    }
}
