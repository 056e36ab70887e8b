//! Total parsers for model responses. Malformed input never errors; it is flagged.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

static TRIGGER_ANSWER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)event\s+trigger\s+is\s+(.*?)\s+in\s+the\s+text").unwrap());
static NO_ANSWER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)^(?:answer\s*:\s*)?no\b").unwrap());

const WRAPPERS: &[char] = &['"', '\'', '`', '*', '_', '“', '”', '‘', '’', '«', '»', '[', ']'];

fn strip_wrappers(s: &str) -> &str {
    s.trim().trim_matches(|c: char| c.is_whitespace() || WRAPPERS.contains(&c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdDecision {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedEdResponse {
    pub decision: EdDecision,
    /// Present iff `decision` is `Yes`.
    pub trigger: Option<String>,
    /// The response matched neither answer form and was read as "No".
    pub unparseable: bool,
}

impl ParsedEdResponse {
    fn no(unparseable: bool) -> Self {
        Self { decision: EdDecision::No, trigger: None, unparseable }
    }
}

/// Reads a detection answer: "Yes, the event trigger is X in the text." or "No.".
pub fn parse_ed_response(raw: &str) -> ParsedEdResponse {
    if let Some(caps) = TRIGGER_ANSWER.captures(raw) {
        let trigger = strip_wrappers(&caps[1]);
        return if trigger.is_empty() {
            ParsedEdResponse::no(true)
        } else {
            ParsedEdResponse { decision: EdDecision::Yes, trigger: Some(trigger.to_string()), unparseable: false }
        };
    }
    let head = raw.trim_start_matches(|c: char| c.is_whitespace() || WRAPPERS.contains(&c));
    ParsedEdResponse::no(!NO_ANSWER.is_match(head))
}

pub fn parse_ed_response_bytes(raw: &[u8]) -> ParsedEdResponse {
    parse_ed_response(&String::from_utf8_lossy(raw))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedEaeResponse {
    /// One entry per requested role, in request order.
    pub values: Vec<(String, Option<String>)>,
    /// Roles with no line in the response.
    pub missing_roles: Vec<String>,
    /// Repeated lines for a role already seen; the first one wins.
    pub duplicate_lines: usize,
    /// `Label: value` lines whose label is not a requested role.
    pub unknown_role_lines: usize,
}

impl ParsedEaeResponse {
    pub fn value(&self, role: &str) -> Option<&str> {
        self.values.iter().find(|(r, _)| r == role).and_then(|(_, v)| v.as_deref())
    }

    pub fn is_flagged(&self) -> bool {
        !self.missing_roles.is_empty() || self.duplicate_lines > 0 || self.unknown_role_lines > 0
    }
}

/// Reads `Role: value` lines. Role labels match case-insensitively; an empty value means
/// no argument for that role.
pub fn parse_eae_response(raw: &str, roles: &[String]) -> ParsedEaeResponse {
    let mut found: Vec<Option<Option<String>>> = vec![None; roles.len()];
    let mut out = ParsedEaeResponse::default();
    for line in raw.lines() {
        let line = line.trim().trim_start_matches(['-', '*', '•']).trim_start();
        let Some((label, rest)) = line.split_once(':') else {
            continue;
        };
        let label = strip_wrappers(label);
        match roles.iter().position(|r| r.to_lowercase() == label.to_lowercase()) {
            Some(i) if found[i].is_some() => out.duplicate_lines += 1,
            Some(i) => {
                let value = strip_wrappers(rest);
                found[i] = Some((!value.is_empty()).then(|| value.to_string()));
            }
            None => out.unknown_role_lines += 1,
        }
    }
    for (role, value) in roles.iter().zip(found) {
        if value.is_none() {
            out.missing_roles.push(role.clone());
        }
        out.values.push((role.clone(), value.flatten()));
    }
    out
}

pub fn parse_eae_response_bytes(raw: &[u8], roles: &[String]) -> ParsedEaeResponse {
    parse_eae_response(&String::from_utf8_lossy(raw), roles)
}
