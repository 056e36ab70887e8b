//! Few-shot prompt layouts for event detection and argument extraction.

use crate::model::{Instance, ModelError, Span};

pub const TRIGGER_OPEN: &str = "[t]";
pub const TRIGGER_CLOSE: &str = "[/t]";
/// Prefix of a positive detection answer; demos containing it are flagged.
pub const ED_ANSWER_PREFIX: &str = "event trigger is";

const ED_INSTRUCTION: &str = "You are an event extractor designed to check for the presence of a specific \
event in a sentence and to locate the corresponding event trigger.\n\
Task Description: Identify all triggers related to the event of interest in the sentence. A trigger is \
the key word in the sentence that most explicitly conveys the occurrence of the event. If yes, please \
answer 'Yes, the event trigger is [trigger] in the text.'; otherwise, answer 'No.'";

const EAE_INSTRUCTION_HEAD: &str = "You are an argument extractor designed to check for the presence of \
arguments regarding specific roles for an event in a sentence.";

const EAE_INSTRUCTION_TAIL: &str = "These arguments should have the semantic role corresponding to the \
given event trigger by the word span between [t] and [/t]. Follow the format of below examples. Your \
answer should only contain the answer string and nothing else.";

/// Detection demonstration: a text and, for positives, the trigger string to answer with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdDemo {
    pub text: String,
    pub trigger: Option<String>,
}

/// Extraction demonstration: trigger-marked text and one answer per role in ontology order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EaeDemo {
    pub marked_text: String,
    pub answers: Vec<(String, Option<String>)>,
}

/// A rendered prompt plus anything suspicious noticed while rendering it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub text: String,
    pub warnings: Vec<String>,
}

pub fn ed_answer(trigger: Option<&str>) -> String {
    match trigger {
        Some(t) => format!("Yes, the event trigger is {t} in the text."),
        None => "No.".to_string(),
    }
}

fn event_line(event_type: &str, description: &str) -> String {
    let description = description.trim();
    if description.is_empty() {
        format!("The event of interest is {event_type}.")
    } else {
        format!("The event of interest is {event_type}. {description}")
    }
}

pub fn build_ed_prompt(event_type: &str, type_description: &str, demos: &[EdDemo], query_text: &str) -> Prompt {
    let mut sections = vec![format!("{ED_INSTRUCTION}\n{}", event_line(event_type, type_description))];
    let mut warnings = Vec::new();
    for (i, demo) in demos.iter().enumerate() {
        if demo.text.to_lowercase().contains(ED_ANSWER_PREFIX) {
            warnings.push(format!("demo {} text contains the answer pattern {ED_ANSWER_PREFIX:?}", i + 1));
        }
        sections.push(format!(
            "Examples {}\nText: {}\nAnswer: {}",
            i + 1,
            demo.text,
            ed_answer(demo.trigger.as_deref())
        ));
    }
    sections.push(format!("Question\nText: {query_text}\nAnswer:"));
    Prompt { text: sections.join("\n\n"), warnings }
}

fn role_line(role: &str, value: Option<&str>) -> String {
    match value {
        Some(v) if !v.is_empty() => format!("{role}: {v}"),
        _ => format!("{role}:"),
    }
}

pub fn build_eae_prompt(
    event_type: &str,
    type_description: &str,
    roles: &[String],
    demos: &[EaeDemo],
    marked_query: &str,
) -> Prompt {
    let role_list = roles.join(", ");
    let mut sections = vec![format!(
        "{EAE_INSTRUCTION_HEAD}\nTask Description: Identify all arguments related to the role {role_list} in the sentence.\n\
         {EAE_INSTRUCTION_TAIL}\n{} Roles of interest: {role_list}",
        event_line(event_type, type_description)
    )];
    let mut warnings = Vec::new();
    for (i, demo) in demos.iter().enumerate() {
        let mut lines = vec![format!("Examples {}", i + 1), format!("Text: {}", demo.marked_text)];
        for role in roles {
            let value = demo.answers.iter().find(|(r, _)| r == role).and_then(|(_, v)| v.as_deref());
            lines.push(role_line(role, value));
        }
        if demo.answers.iter().any(|(r, _)| !roles.contains(r)) {
            warnings.push(format!("demo {} answers a role outside the ontology", i + 1));
        }
        sections.push(lines.join("\n"));
    }
    sections.push(format!("Question\nText: {marked_query}"));
    Prompt { text: sections.join("\n\n"), warnings }
}

/// Inserts `[t]` and `[/t]` around the trigger, normalizing whitespace at the insertion points
/// to a single space.
pub fn mark_trigger(instance: &Instance, trigger: Span) -> Result<String, ModelError> {
    trigger.check_bounds(instance.len())?;
    let offsets = instance.byte_offsets();
    let (start, end) = (offsets[trigger.start()].0, offsets[trigger.end() - 1].1);
    let text = instance.text();
    let before = text[..start].trim_end();
    let inner = &text[start..end];
    let after = text[end..].trim_start();

    let mut out = String::with_capacity(text.len() + 10);
    if !before.is_empty() {
        out.push_str(before);
        out.push(' ');
    }
    out.push_str(TRIGGER_OPEN);
    out.push(' ');
    out.push_str(inner);
    out.push(' ');
    out.push_str(TRIGGER_CLOSE);
    if !after.is_empty() {
        out.push(' ');
        out.push_str(after);
    }
    Ok(out)
}
