//! Fixture builders shared by the CLI test targets.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use twon_cli::config::LoadedConfig;
use twon_core::ingest::{RawSample, SampleKind};
use twon_core::mechanics::{apply_mechanics, FeedObservation};
use twon_core::{AgentId, Language, MechanicsConfig, Message, MessageId, Recipient};

pub fn write_lines<T: serde::Serialize>(path: &Path, items: &[T]) {
    let text: String = items.iter().map(|i| serde_json::to_string(i).unwrap() + "\n").collect();
    fs::write(path, text).unwrap();
}

fn sample(user: &str, kind: SampleKind, text: String, parent: Option<String>, ts: i64) -> RawSample {
    RawSample {
        user_id: user.into(),
        text,
        kind,
        reply_to_text: parent,
        topic: Some("energy".into()),
        language: Language::En,
        timestamp: ts,
    }
}

/// `users` users, each with `per_user` replies to distinct posts of a
/// politician account, plus that account's posts.
pub fn reply_corpus(users: usize, per_user: usize) -> Vec<RawSample> {
    let mut out = Vec::new();
    let posts = users * per_user + 20;
    for i in 0..posts {
        out.push(sample(
            "politician",
            SampleKind::Post,
            format!("Statement number {i} on the energy transition and jobs"),
            None,
            i as i64,
        ));
    }
    for u in 0..users {
        for j in 0..per_user {
            let target = (u * per_user + j) % posts;
            let parent = format!("Statement number {target} on the energy transition and jobs");
            let text = format!("user {u} answers statement {target} with reply {j} about costs");
            out.push(sample(
                &format!("user{u:02}"),
                SampleKind::Reply,
                text,
                Some(parent),
                (target + 1) as i64,
            ));
        }
    }
    out
}

pub fn observations(generator: &MechanicsConfig, count: usize) -> Vec<FeedObservation> {
    (0..count)
        .map(|o| {
            let agent = AgentId::new(format!("viewer{}", o % 2));
            let inbox: Vec<Message> = (0..8)
                .map(|i| {
                    let tick = ((i * 5 + o) % 8) as u64;
                    let text = "w ".repeat((i * 3 + o) % 7 + 1);
                    Message::post(
                        MessageId::new(format!("o{o}m{i}")),
                        AgentId::new(format!("s{i}")),
                        Recipient::Broadcast,
                        tick,
                        text,
                    )
                    .unwrap()
                })
                .collect();
            let observed = apply_mechanics(generator, &agent, &inbox);
            FeedObservation { agent, inbox, observed }
        })
        .collect()
}

/// A workspace directory holding data files and a config referencing them.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    pub fn config(&self, body: &str) -> PathBuf {
        self.write("experiment.toml", body)
    }

    pub fn load(&self, body: &str) -> LoadedConfig {
        LoadedConfig::from_file(&self.config(body)).unwrap()
    }

    /// Test split with 120 English replies for the reply task.
    pub fn reply_split(&self) {
        write_lines(&self.path("test.jsonl"), &reply_corpus(12, 10));
        write_lines(&self.path("train.jsonl"), &reply_corpus(6, 6));
    }

    pub fn observations(&self, generator: &MechanicsConfig) {
        write_lines(&self.path("observations.jsonl"), &observations(generator, 6));
    }
}

pub fn evaluate_config() -> String {
    r#"
schema_version = 1
task = "reply"
language = "en"
seed = 42
output_dir = "out"

[data]
test = "test.jsonl"
train = "train.jsonl"
"#
    .to_owned()
}

pub fn simulate_config(extra_data: &str) -> String {
    format!(
        r#"
schema_version = 1
task = "simulate"
language = "en"
seed = 7
output_dir = "sim"

[data]
test = "test.jsonl"
lexicon = "lexicon.txt"
observations = "observations.jsonl"
{extra_data}

[provider]
kind = "stub"
stub_mode = "reply_to_each"

[metrics]
n = 20
k = 3

[simulate]
agents = ["A", "B"]
ticks = 4
openings = [{{ agent = "A", text = "Opening statement on pensions" }}]
"#
    )
}

pub fn bundle_schema() -> serde_json::Value {
    serde_json::from_str(twon_cli::commands::BUNDLE_SCHEMA).unwrap()
}

pub fn schema_errors(instance: &serde_json::Value) -> Vec<String> {
    let schema = bundle_schema();
    let compiled = jsonschema::JSONSchema::compile(&schema).expect("bundle schema compiles");
    let result = match compiled.validate(instance) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{}: {e}", e.instance_path)).collect(),
    };
    result
}

pub fn json_of(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn hit_all_lexicon() -> &'static str {
    "# every generated or opening message contains one of these\nre:\nopening\n"
}

pub fn error_kind(stderr: &[u8]) -> String {
    let v: serde_json::Value = serde_json::from_slice(stderr).unwrap_or(json!({}));
    v["error"]["kind"].as_str().unwrap_or_default().to_owned()
}
