//! Few-shot LLM evaluation: prompt construction, response parsing, grounding of generated
//! strings onto token spans, error categorization, and an OpenAI-compatible client.

pub mod cache;
pub mod categorize;
pub mod client;
pub mod demos;
pub mod ground;
pub mod parse;
pub mod prompt;
pub mod run;

pub use cache::{cache_key, ResponseCache};
pub use categorize::{categorize, CategorizedItem, ErrorCategory, ErrorReport, Granularity, PredictedItem, PredictedLocation};
pub use client::{complete_with_retry, ChatBackend, ChatError, ChatMessage, ChatRequest, HttpChatClient, RetryPolicy};
pub use demos::{select_demos, select_eae_demos, Demo, DemoSelection};
pub use ground::{ground_span, GroundedSpan, Grounding};
pub use parse::{parse_eae_response, parse_eae_response_bytes, parse_ed_response, parse_ed_response_bytes, EdDecision, ParsedEaeResponse, ParsedEdResponse};
pub use prompt::{build_eae_prompt, build_ed_prompt, mark_trigger, EaeDemo, EdDemo, Prompt};
pub use run::{build_prompts, run_eval, sample_documents, EvalConfig, EvalData, EvalError, EvalRun, EventTypeInfo, Ontology, PlannedRequest, PromptConfig, RequestFailure, RunStats};
