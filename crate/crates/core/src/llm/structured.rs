//! Schema-validated calls with repair retries.

use serde::de::DeserializeOwned;
use thiserror::Error;

use super::{BackendError, ChatBackend, ChatRequest};

/// Follow-up attempts after the first response fails to parse.
pub const MAX_REPAIR_RETRIES: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StructuredError {
    #[error("response failed schema validation after {attempts} attempts: {last_error}")]
    SchemaFailure { attempts: usize, last_error: String },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredOutcome<T> {
    pub value: T,
    /// Repair retries used (0 when the first response was valid).
    pub retries: usize,
}

/// User content for a repair attempt: the original content, the rejected
/// output and the parse error.
pub fn repair_message(original: &str, rejected: &str, error: &str) -> String {
    format!(
        "{original}\n\n---\nYour previous response could not be used.\n\
         Previous response:\n{rejected}\n\nError: {error}\n\n\
         Respond again with a single JSON object that matches the required schema exactly."
    )
}

/// Calls `backend`, validates the response against the request schema,
/// deserializes it and runs `check`. On any failure, retries up to
/// [`MAX_REPAIR_RETRIES`] times with the error appended to the user content.
pub fn call_structured<T, F>(
    backend: &dyn ChatBackend,
    request: &ChatRequest,
    check: F,
) -> Result<StructuredOutcome<T>, StructuredError>
where
    T: DeserializeOwned,
    F: Fn(&T) -> Result<(), String>,
{
    let mut current = request.clone();
    let mut last_error = String::new();
    for attempt in 0..=MAX_REPAIR_RETRIES {
        let response = backend.complete(&current)?;
        let outcome = request
            .response_schema
            .parse(&response.content)
            .and_then(|value| serde_json::from_value::<T>(value).map_err(|e| format!("invalid value: {e}")))
            .and_then(|value| check(&value).map(|()| value));
        match outcome {
            Ok(value) => return Ok(StructuredOutcome { value, retries: attempt }),
            Err(error) => {
                log::debug!("structured response rejected (attempt {}): {error}", attempt + 1);
                current.user_content = repair_message(&request.user_content, &response.content, &error);
                last_error = error;
            }
        }
    }
    Err(StructuredError::SchemaFailure { attempts: MAX_REPAIR_RETRIES + 1, last_error })
}
