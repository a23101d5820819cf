//! Prompt construction for the posting and replying tasks.
//!
//! Wording lives in UTF-8 template files with `{placeholder}` slots so it can
//! change without recompiling. The built-in set is `templates/*.v1.txt`.
//! Recognised placeholders: `{name}`, `{party}`, `{topic}`, `{language}`,
//! `{history_pairs}`, `{post}`. A literal brace is written `{{` or `}}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{Language, Persona, ReplyHistory};
use crate::model::Message;

const BUILTIN_POST: &str = include_str!("../../templates/post.v1.txt");
const BUILTIN_REPLY: &str = include_str!("../../templates/reply.v1.txt");
pub const BUILTIN_VERSION: &str = "v1";

const PLACEHOLDERS: [&str; 6] = ["name", "party", "topic", "language", "history_pairs", "post"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PromptError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("template {template}: {reason}")]
    Template { template: String, reason: String },
    #[error("reading template {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptTask {
    Post,
    Reply,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    ReplyOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub task: PromptTask,
    pub rendered_text: String,
    pub constraints: Vec<Constraint>,
}

impl Prompt {
    /// Short content hash used to correlate remote failures with prompts.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.rendered_text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn is_reply_only(&self) -> bool {
        self.constraints.contains(&Constraint::ReplyOnly)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Slot(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    name: String,
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(name: &str, source: &str) -> Result<Self, PromptError> {
        let err = |reason: String| PromptError::Template {
            template: name.to_owned(),
            reason,
        };
        let mut segments = Vec::new();
        let mut literal = String::new();
        let mut chars = source.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                '{' if chars.peek() == Some(&'{') => {
                    chars.next();
                    literal.push('{');
                }
                '}' if chars.peek() == Some(&'}') => {
                    chars.next();
                    literal.push('}');
                }
                '{' => {
                    let mut key = String::new();
                    loop {
                        match chars.next() {
                            Some('}') => break,
                            Some(k) => key.push(k),
                            None => return Err(err("unterminated placeholder".into())),
                        }
                    }
                    let slot = PLACEHOLDERS
                        .iter()
                        .find(|p| **p == key)
                        .ok_or_else(|| err(format!("unknown placeholder {{{key}}}")))?;
                    if !literal.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut literal)));
                    }
                    segments.push(Segment::Slot(slot));
                }
                '}' => return Err(err("stray '}'".into())),
                c => literal.push(c),
            }
        }
        if !literal.is_empty() {
            segments.push(Segment::Literal(literal));
        }
        Ok(Self {
            name: name.to_owned(),
            segments,
        })
    }

    pub fn slots(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(k) => Some(*k),
            Segment::Literal(_) => None,
        })
    }

    /// Single-pass substitution: inserted values are never re-scanned.
    fn render(&self, lookup: impl Fn(&str) -> Option<String>) -> Result<String, PromptError> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Literal(s) => out.push_str(s),
                Segment::Slot(k) => {
                    let value = lookup(k).ok_or_else(|| PromptError::Template {
                        template: self.name.clone(),
                        reason: format!("placeholder {{{k}}} is not available for this task"),
                    })?;
                    out.push_str(&value);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    pub version: String,
    post: Template,
    reply: Template,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self::from_sources(BUILTIN_VERSION, BUILTIN_POST, BUILTIN_REPLY).expect("built-in templates parse")
    }

    pub fn from_sources(version: &str, post: &str, reply: &str) -> Result<Self, PromptError> {
        let post = Template::parse("post", post)?;
        let reply = Template::parse("reply", reply)?;
        if !reply.slots().any(|s| s == "post") {
            return Err(PromptError::Template {
                template: "reply".into(),
                reason: "reply template must contain {post}".into(),
            });
        }
        Ok(Self {
            version: version.to_owned(),
            post,
            reply,
        })
    }

    /// Loads `post.<version>.txt` and `reply.<version>.txt` from `dir`.
    pub fn load(dir: &Path, version: &str) -> Result<Self, PromptError> {
        let read = |task: &str| {
            let path = dir.join(format!("{task}.{version}.txt"));
            fs::read_to_string(&path).map_err(|e| PromptError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })
        };
        Self::from_sources(version, &read("post")?, &read("reply")?)
    }

    pub fn post_prompt(&self, persona: &Persona, topic: &str) -> Result<Prompt, PromptError> {
        persona.validate()?;
        if topic.trim().is_empty() {
            return Err(PromptError::Input("topic must be non-empty".into()));
        }
        let rendered_text = self.post.render(|k| match k {
            "name" => Some(persona.name.clone()),
            "party" => Some(persona.party.clone()),
            "topic" => Some(topic.to_owned()),
            "language" => Some(language_directive(persona.language).to_owned()),
            _ => None,
        })?;
        Ok(Prompt {
            task: PromptTask::Post,
            rendered_text,
            constraints: Vec::new(),
        })
    }

    pub fn reply_prompt(&self, history: &ReplyHistory, post: &Message) -> Result<Prompt, PromptError> {
        let pairs = render_pairs(history);
        let rendered_text = self.reply.render(|k| match k {
            "history_pairs" => Some(pairs.clone()),
            "post" => Some(post.text.clone()),
            _ => None,
        })?;
        Ok(Prompt {
            task: PromptTask::Reply,
            rendered_text,
            constraints: vec![Constraint::ReplyOnly],
        })
    }
}

pub fn language_directive(language: Language) -> &'static str {
    match language {
        Language::En => "Write in English.",
        Language::De => "Schreibe auf Deutsch.",
    }
}

fn render_pairs(history: &ReplyHistory) -> String {
    history
        .pairs()
        .iter()
        .map(|p| format!("Post: {}\nReply: {}\n\n", p.post, p.reply))
        .collect()
}

/// Posting prompt from the built-in templates.
pub fn build_post_prompt(persona: &Persona, topic: &str) -> Result<Prompt, PromptError> {
    TemplateSet::builtin().post_prompt(persona, topic)
}

/// Reply prompt from the built-in templates.
pub fn build_reply_prompt(history: &ReplyHistory, post: &Message) -> Result<Prompt, PromptError> {
    TemplateSet::builtin().reply_prompt(history, post)
}
