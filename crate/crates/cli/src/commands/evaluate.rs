use std::collections::BTreeMap;
use std::path::PathBuf;

use super::{embedder, markov_model, prepare_output, remote_generator, reply_histories, sidecar_client, templates};
use crate::config::{LoadedConfig, ProviderKind, StubModeConfig, TaskKind};
use crate::error::CliError;
use crate::io;
use twon_core::ingest::{Corpus, RawSample, SampleKind};
use twon_core::metrics::{
    aggregate_report, EvalPair, LabelSchema, LabelScores, MetricParams, MetricReport, ReportMeta, Task,
};
use twon_core::seed;
use twon_core::{AgentId, Message, MessageId, Persona, Recipient};

#[derive(Clone, Debug)]
pub struct EvaluateOutput {
    pub report: MetricReport,
    pub report_path: PathBuf,
    pub table_path: PathBuf,
}

fn metric_task(task: TaskKind) -> Result<Task, CliError> {
    match task {
        TaskKind::Post => Ok(Task::Post),
        TaskKind::Reply => Ok(Task::Reply),
        other => Err(CliError::Config(format!(
            "evaluate supports the post and reply tasks, not {other:?}"
        ))),
    }
}

fn sample_kind(task: Task) -> SampleKind {
    match task {
        Task::Post => SampleKind::Post,
        Task::Reply => SampleKind::Reply,
    }
}

/// Imitations of every test sample from the configured provider.
fn generate(
    cfg: &LoadedConfig,
    task: Task,
    samples: &[&RawSample],
    train: Option<&Corpus>,
) -> Result<Vec<String>, CliError> {
    let p = &cfg.config.provider;
    match p.kind {
        ProviderKind::Stub => match (p.stub_mode, task) {
            // Identity pipeline: the "generation" is the reference itself.
            (StubModeConfig::Echo, _) => Ok(samples.iter().map(|s| s.text.clone()).collect()),
            (StubModeConfig::ReplyToEach, Task::Reply) => Ok(samples
                .iter()
                .map(|s| format!("re: {}", s.reply_to_text.as_deref().unwrap_or_default()))
                .collect()),
            (mode, _) => Err(CliError::Config(format!(
                "stub mode {mode:?} cannot generate {task:?} texts"
            ))),
        },
        ProviderKind::Markov => {
            let train =
                train.ok_or_else(|| CliError::Config("data.train is required for the markov provider".into()))?;
            let model = markov_model(cfg, train, sample_kind(task))?;
            Ok((0..samples.len())
                .map(|i| model.generate(seed::derive(cfg.config.seed, &[i as u64]), p.max_tokens as usize))
                .collect())
        }
        ProviderKind::Remote => {
            let generator = remote_generator(cfg)?;
            let templates = templates(cfg)?;
            let histories = reply_histories(cfg, train)?;
            let empty = twon_core::ReplyHistory::new(p.max_pairs).map_err(|e| CliError::Config(e.to_string()))?;
            let mut out = Vec::with_capacity(samples.len());
            for (i, s) in samples.iter().enumerate() {
                let prompt = match task {
                    Task::Reply => {
                        let parent_text = s.reply_to_text.clone().unwrap_or_default();
                        let parent = Message::post(
                            MessageId::new(format!("context{i}")),
                            AgentId::new("context"),
                            Recipient::Broadcast,
                            0,
                            parent_text,
                        )
                        .map_err(|e| CliError::Data(e.to_string()))?;
                        templates.reply_prompt(histories.get(&s.user_id).unwrap_or(&empty), &parent)
                    }
                    Task::Post => {
                        let party = p.parties.get(&s.user_id).map_or("unaffiliated", String::as_str);
                        let topic = s.topic.as_deref().ok_or_else(|| {
                            CliError::Data(format!("post by {} has no topic to prompt with", s.user_id))
                        })?;
                        Persona::new(s.user_id.clone(), party, s.language)
                            .and_then(|persona| templates.post_prompt(&persona, topic))
                    }
                }
                .map_err(|e| CliError::Data(e.to_string()))?;
                out.push(
                    generator
                        .generate(&prompt)
                        .map_err(|e| CliError::Runtime(e.to_string()))?,
                );
            }
            Ok(out)
        }
    }
}

fn attach_embeddings(cfg: &LoadedConfig, pairs: &mut [EvalPair]) -> Result<(), CliError> {
    let source = embedder(cfg)?;
    let originals: Vec<String> = pairs.iter().map(|p| p.original.clone()).collect();
    let generated: Vec<String> = pairs.iter().map(|p| p.generated.clone()).collect();
    let a = source.embed(&originals)?;
    let b = source.embed(&generated)?;
    for ((pair, o), g) in pairs.iter_mut().zip(a).zip(b) {
        pair.original_embedding.get_or_insert(o.0);
        pair.generated_embedding.get_or_insert(g.0);
    }
    Ok(())
}

fn attach_labels(cfg: &LoadedConfig, pairs: &mut [EvalPair]) -> Result<LabelSchema, CliError> {
    let mut schema = LabelSchema::new();
    if cfg.config.metrics.label_categories.is_empty() {
        return Ok(schema);
    }
    let client = sidecar_client(cfg)?;
    let originals: Vec<String> = pairs.iter().map(|p| p.original.clone()).collect();
    let generated: Vec<String> = pairs.iter().map(|p| p.generated.clone()).collect();
    for category in &cfg.config.metrics.label_categories {
        let runtime = |e: twon_core::sidecar::SidecarError| CliError::Runtime(e.to_string());
        let o = client.labels(&originals, category).map_err(runtime)?;
        let g = client.labels(&generated, category).map_err(runtime)?;
        if o.subclass_names != g.subclass_names {
            return Err(CliError::Runtime(format!(
                "sidecar changed the {category} subclasses between calls"
            )));
        }
        for ((pair, os), gs) in pairs.iter_mut().zip(o.scores).zip(g.scores) {
            pair.labels.insert(
                category.clone(),
                LabelScores {
                    original: os,
                    generated: gs,
                },
            );
        }
        schema.insert(category.clone(), o.subclass_names);
    }
    Ok(schema)
}

/// Builds the scored pairs for `task` from the configured data and provider.
pub fn evaluate_pairs(cfg: &LoadedConfig, task: Task) -> Result<(Vec<EvalPair>, LabelSchema), CliError> {
    let data = &cfg.config.data;
    let mut pairs = match cfg.optional("generated", &data.generated)? {
        Some(path) => io::read_jsonl::<EvalPair>(&path)?,
        None => {
            let test_path = cfg.required("test", &data.test)?;
            let train = cfg
                .optional("train", &data.train)?
                .map(|p| io::read_corpus(&p))
                .transpose()?;
            let test = io::read_corpus(&test_path)?;
            let samples: Vec<&RawSample> = test
                .samples
                .iter()
                .filter(|s| s.kind == sample_kind(task) && s.language == cfg.config.language)
                .collect();
            if samples.len() < cfg.config.metrics.n {
                return Err(CliError::Data(format!(
                    "{} has {} {:?} samples in {:?}, fewer than n = {}",
                    test_path.display(),
                    samples.len(),
                    task,
                    cfg.config.language,
                    cfg.config.metrics.n
                )));
            }
            let generated = generate(cfg, task, &samples, train.as_ref())?;
            samples
                .iter()
                .zip(generated)
                .map(|(s, g)| EvalPair::new(s.text.clone(), g))
                .collect()
        }
    };
    attach_embeddings(cfg, &mut pairs)?;
    let schema = attach_labels(cfg, &mut pairs)?;
    Ok((pairs, schema))
}

pub(crate) fn realism_report(cfg: &LoadedConfig, task: Task) -> Result<(MetricReport, Vec<EvalPair>), CliError> {
    let (pairs, schema) = evaluate_pairs(cfg, task)?;
    let m = &cfg.config.metrics;
    let params = MetricParams {
        n: m.n,
        k: m.k,
        seed: cfg.config.seed,
        max_n: m.max_n,
        epsilon: m.epsilon,
        distance: m.distance,
    };
    let meta = ReportMeta {
        task,
        language: cfg.config.language,
        condition: m.condition.clone(),
    };
    Ok((aggregate_report(&pairs, &params, &schema, &meta)?, pairs))
}

pub fn cmd_evaluate(cfg: &LoadedConfig, overrides: &BTreeMap<String, String>) -> Result<EvaluateOutput, CliError> {
    cfg.validate()?;
    let task = metric_task(cfg.config.task)?;
    if cfg.config.data.generated.is_none() {
        cfg.required("test", &cfg.config.data.test)?;
    }
    let (report, pairs) = realism_report(cfg, task)?;

    let dir = prepare_output(cfg, overrides)?.join("reports");
    io::create_dir(&dir)?;
    let stem = format!(
        "{}_{}_{}",
        task_name(&report.task),
        report.language.code(),
        report.condition
    );
    let report_path = dir.join(format!("{stem}.json"));
    let table_path = dir.join(format!("{stem}.txt"));
    io::write_json(&report_path, &report)?;
    io::write_text(&table_path, &report.to_table())?;
    io::write_jsonl(&dir.join(format!("{stem}.pairs.jsonl")), &pairs)?;
    log::info!("wrote {}", report_path.display());
    Ok(EvaluateOutput {
        report,
        report_path,
        table_path,
    })
}

fn task_name(task: &Task) -> &'static str {
    match task {
        Task::Post => "post",
        Task::Reply => "reply",
    }
}
