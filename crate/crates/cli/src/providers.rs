//! LLM and embedding providers: an HTTP chat-completion client, an HTTP
//! embedding client, and a file-replay stub for offline, deterministic runs.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use insight_core::qugen::{EmbeddingProvider, LlmProvider, ProviderError};

/// Chat-completion client speaking the common JSON protocol:
/// POST {model, messages, temperature, n} -> {choices: [{message: {content}}]}.
pub struct HttpChatProvider {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
}

impl HttpChatProvider {
    pub fn new(endpoint: &str, model: &str, api_key: Option<String>) -> HttpChatProvider {
        HttpChatProvider {
            endpoint: endpoint.to_owned(),
            model: model.to_owned(),
            api_key,
        }
    }
}

impl LlmProvider for HttpChatProvider {
    fn complete(
        &self,
        prompt: &str,
        temperature: f64,
        samples: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "n": samples,
        });
        let mut request = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| ProviderError::new(format!("chat request failed: {e}")))?;
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::new(format!("chat response not JSON: {e}")))?;
        let choices = value
            .get("choices")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::new("chat response missing choices"))?;
        let texts: Vec<String> = choices
            .iter()
            .filter_map(|choice| {
                choice
                    .pointer("/message/content")
                    .or_else(|| choice.get("text"))
                    .and_then(Value::as_str)
                    .map(str::to_owned)
            })
            .collect();
        if texts.is_empty() {
            return Err(ProviderError::new("chat response contained no text"));
        }
        Ok(texts)
    }
}

/// Embedding client: POST {model, input} -> {data: [{embedding: [...]}]}.
pub struct HttpEmbeddingProvider {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let body = json!({"model": self.model, "input": text});
        let mut request = ureq::post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| ProviderError::new(format!("embedding request failed: {e}")))?;
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::new(format!("embedding response not JSON: {e}")))?;
        value
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .map(|xs| xs.iter().filter_map(Value::as_f64).collect())
            .ok_or_else(|| ProviderError::new("embedding response missing vector"))
    }
}

/// Replays canned responses from a directory: one file per `complete` call,
/// consumed in file-name order. Within a file, a line containing only `---`
/// separates the individual samples of that call.
pub struct StubLlmProvider {
    files: RefCell<VecDeque<PathBuf>>,
}

impl StubLlmProvider {
    pub fn from_dir(dir: &Path) -> Result<StubLlmProvider, ProviderError> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| ProviderError::new(format!("cannot read stub dir: {e}")))?
            .filter_map(Result::ok)
            .map(|entry| entry.path())
            .filter(|path| path.is_file())
            .collect();
        files.sort();
        Ok(StubLlmProvider {
            files: RefCell::new(files.into()),
        })
    }
}

impl LlmProvider for StubLlmProvider {
    fn complete(
        &self,
        _prompt: &str,
        _temperature: f64,
        _samples: usize,
    ) -> Result<Vec<String>, ProviderError> {
        let path = self
            .files
            .borrow_mut()
            .pop_front()
            .ok_or_else(|| ProviderError::new("stub responses exhausted"))?;
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ProviderError::new(format!("cannot read stub file: {e}")))?;
        let samples: Vec<String> = text
            .split("\n---\n")
            .map(str::to_owned)
            .collect();
        Ok(samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    /// Serves exactly one HTTP request with a canned JSON body, returning
    /// the captured request body.
    fn serve_once(
        response: Value,
    ) -> (String, std::thread::JoinHandle<Value>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = format!("http://{}/v1/endpoint", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut data = Vec::new();
            let mut buf = [0u8; 16384];
            let body_start = loop {
                let n = stream.read(&mut buf).unwrap();
                assert!(n > 0, "client hung up early");
                data.extend_from_slice(&buf[..n]);
                if let Some(pos) = data.windows(4).position(|w| w == b"\r\n\r\n") {
                    break pos + 4;
                }
            };
            let headers = String::from_utf8_lossy(&data[..body_start]).to_lowercase();
            let content_length: usize = headers
                .lines()
                .find_map(|line| line.strip_prefix("content-length:"))
                .map(|v| v.trim().parse().unwrap())
                .unwrap_or(0);
            while data.len() < body_start + content_length {
                let n = stream.read(&mut buf).unwrap();
                data.extend_from_slice(&buf[..n]);
            }
            let request: Value =
                serde_json::from_slice(&data[body_start..body_start + content_length]).unwrap();

            let body = response.to_string();
            let reply = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\n\
                 content-length: {}\r\nconnection: close\r\n\r\n{}",
                body.len(),
                body
            );
            stream.write_all(reply.as_bytes()).unwrap();
            request
        });
        (addr, handle)
    }

    #[test]
    fn http_chat_provider_round_trip() {
        let (endpoint, server) = serve_once(json!({
            "choices": [
                {"message": {"content": "first"}},
                {"message": {"content": "second"}}
            ]
        }));
        let provider = HttpChatProvider::new(&endpoint, "test-model", Some("secret".into()));
        let out = provider.complete("the prompt", 0.7, 2).unwrap();
        assert_eq!(out, vec!["first".to_string(), "second".to_string()]);

        let request = server.join().unwrap();
        assert_eq!(request["model"], "test-model");
        assert_eq!(request["n"], 2);
        assert_eq!(request["temperature"], 0.7);
        assert_eq!(request["messages"][0]["content"], "the prompt");
    }

    #[test]
    fn http_embedding_provider_round_trip() {
        let (endpoint, server) = serve_once(json!({
            "data": [{"embedding": [0.25, -0.5, 1.0]}]
        }));
        let provider = HttpEmbeddingProvider {
            endpoint,
            model: "embed-model".into(),
            api_key: None,
        };
        let vector = provider.embed("some text").unwrap();
        assert_eq!(vector, vec![0.25, -0.5, 1.0]);
        let request = server.join().unwrap();
        assert_eq!(request["input"], "some text");
    }

    #[test]
    fn http_chat_provider_reports_bad_payloads() {
        let (endpoint, server) = serve_once(json!({"unexpected": true}));
        let provider = HttpChatProvider::new(&endpoint, "m", None);
        let err = provider.complete("p", 1.0, 1).unwrap_err();
        assert!(err.message.contains("choices"), "{}", err.message);
        server.join().unwrap();
    }

    #[test]
    fn stub_consumes_files_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("02_second.txt"), "two").unwrap();
        std::fs::write(dir.path().join("01_first.txt"), "one\n---\nalso one").unwrap();
        let stub = StubLlmProvider::from_dir(dir.path()).unwrap();
        assert_eq!(
            stub.complete("p", 1.0, 2).unwrap(),
            vec!["one".to_string(), "also one".to_string()]
        );
        assert_eq!(stub.complete("p", 1.0, 1).unwrap(), vec!["two".to_string()]);
        assert!(stub.complete("p", 1.0, 1).is_err());
    }
}
