use std::collections::VecDeque;
use std::sync::Mutex;

use super::{BackendError, BackendMode, ChatBackend, ChatRequest, ChatResponse, Usage};

/// Returns queued responses in FIFO order and remembers every request.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    script: Mutex<VecDeque<String>>,
    received: Mutex<Vec<ChatRequest>>,
}

impl ScriptedBackend {
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        ScriptedBackend {
            script: Mutex::new(responses.into_iter().map(Into::into).collect()),
            received: Mutex::new(Vec::new()),
        }
    }

    pub fn push(&self, response: impl Into<String>) {
        self.script.lock().expect("script lock").push_back(response.into());
    }

    pub fn received(&self) -> Vec<ChatRequest> {
        self.received.lock().expect("request log lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().expect("script lock").len()
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        self.received.lock().expect("request log lock").push(request.clone());
        let content = self.script.lock().expect("script lock").pop_front().ok_or(BackendError::ScriptExhausted)?;
        Ok(ChatResponse::from_content(content, Usage::default(), &request.response_schema))
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Mock
    }
}

/// Answers each request with a function of the request. Useful for
/// rule-based doubles whose answers must not depend on call order.
pub struct FnBackend<F> {
    respond: F,
}

impl<F> FnBackend<F>
where
    F: Fn(&ChatRequest) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(respond: F) -> Self {
        FnBackend { respond }
    }
}

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&ChatRequest) -> Result<String, BackendError> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let content = (self.respond)(request)?;
        Ok(ChatResponse::from_content(content, Usage::default(), &request.response_schema))
    }

    fn mode(&self) -> BackendMode {
        BackendMode::Mock
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Shape;

    #[test]
    fn scripted_responses_are_fifo() {
        let backend = ScriptedBackend::new(["one", "two", "three"]);
        let req = ChatRequest::new("m", "s", "u", Shape::String);
        let got: Vec<String> = (0..3).map(|_| backend.complete(&req).unwrap().content).collect();
        assert_eq!(got, ["one", "two", "three"]);
        assert_eq!(backend.complete(&req).unwrap_err(), BackendError::ScriptExhausted);
        assert_eq!(backend.received().len(), 4);
    }
}
