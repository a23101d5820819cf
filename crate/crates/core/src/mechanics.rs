//! Feed mechanics: the per-agent function that turns a raw inbox into the
//! curated feed an agent perceives, plus the loss used to compare a predicted
//! feed against an observed one and a grid search over candidate mechanics.
//!
//! Mechanics only filter and reorder. They never inject or edit messages, so
//! every curated feed is a permutation of a subset of its inbox.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentId, Message, MessageId};
use crate::seed;

pub const DEFAULT_MAX_FEED: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.5;

/// Score used by [`MechanicsVariant::TopKByScore`].
///
/// Both are plain heuristics: `TextLength` counts Unicode scalar values,
/// `ReplyCount` counts how many other inbox messages reply to a message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    TextLength,
    ReplyCount,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum MechanicsVariant {
    Identity,
    /// Oldest first; ties keep production order.
    Chronological,
    /// Newest first; ties keep production order.
    ReverseChronological,
    /// `k` messages sampled without replacement, kept in inbox order.
    RandomK {
        k: usize,
        seed: u64,
    },
    /// The `k` highest-scoring messages, best first; ties keep inbox order.
    TopKByScore {
        k: usize,
        scoring: Scoring,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanicsConfig {
    #[serde(flatten)]
    pub variant: MechanicsVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_agent_overrides: Option<BTreeMap<AgentId, MechanicsConfig>>,
    #[serde(default = "default_max_feed")]
    pub max_feed: usize,
}

fn default_max_feed() -> usize {
    DEFAULT_MAX_FEED
}

#[derive(Debug, Error, PartialEq)]
pub enum MechanicsError {
    #[error("k = {k} exceeds the feed bound {max}")]
    FeedBound { k: usize, max: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("override for agent {0} has overrides of its own")]
    NestedOverride(AgentId),
    #[error("duplicate message id {0} in one feed")]
    DuplicateId(MessageId),
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("no observations to fit against")]
    NoObservations,
    #[error("empty mechanics family")]
    EmptyFamily,
    #[error("observation {index}: observed message {id} is not in the inbox")]
    NotInInbox { index: usize, id: MessageId },
}

impl MechanicsConfig {
    pub fn new(variant: MechanicsVariant) -> Self {
        Self {
            variant,
            per_agent_overrides: None,
            max_feed: DEFAULT_MAX_FEED,
        }
    }

    pub fn identity() -> Self {
        Self::new(MechanicsVariant::Identity)
    }

    pub fn with_override(mut self, agent: AgentId, config: MechanicsConfig) -> Self {
        self.per_agent_overrides
            .get_or_insert_with(BTreeMap::new)
            .insert(agent, config);
        self
    }

    pub fn validate(&self) -> Result<(), MechanicsError> {
        validate_variant(&self.variant, self.max_feed)?;
        for (agent, inner) in self.per_agent_overrides.iter().flatten() {
            if inner.per_agent_overrides.as_ref().is_some_and(|o| !o.is_empty()) {
                return Err(MechanicsError::NestedOverride(agent.clone()));
            }
            validate_variant(&inner.variant, self.max_feed.min(inner.max_feed))?;
        }
        Ok(())
    }

    /// The variant that applies to `agent`.
    pub fn resolve(&self, agent: &AgentId) -> &MechanicsVariant {
        self.per_agent_overrides
            .as_ref()
            .and_then(|o| o.get(agent))
            .map_or(&self.variant, |c| &c.variant)
    }

    /// One config per built-in variant, for fitting when no family is given.
    pub fn builtin_family(k: usize, seeds: &[u64]) -> Vec<MechanicsConfig> {
        let mut family = vec![
            MechanicsVariant::Identity,
            MechanicsVariant::Chronological,
            MechanicsVariant::ReverseChronological,
            MechanicsVariant::TopKByScore {
                k,
                scoring: Scoring::TextLength,
            },
            MechanicsVariant::TopKByScore {
                k,
                scoring: Scoring::ReplyCount,
            },
        ];
        family.extend(seeds.iter().map(|&seed| MechanicsVariant::RandomK { k, seed }));
        family.into_iter().map(MechanicsConfig::new).collect()
    }
}

fn validate_variant(variant: &MechanicsVariant, max: usize) -> Result<(), MechanicsError> {
    match *variant {
        MechanicsVariant::RandomK { k, .. } | MechanicsVariant::TopKByScore { k, .. } => {
            if k == 0 {
                Err(MechanicsError::ZeroK)
            } else if k > max {
                Err(MechanicsError::FeedBound { k, max })
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Computes the curated feed of `agent` from its raw inbox.
pub fn apply_mechanics(config: &MechanicsConfig, agent: &AgentId, inbox: &[Message]) -> Vec<Message> {
    match *config.resolve(agent) {
        MechanicsVariant::Identity => inbox.to_vec(),
        MechanicsVariant::Chronological => {
            let mut feed = inbox.to_vec();
            feed.sort_by_key(|m| m.tick);
            feed
        }
        MechanicsVariant::ReverseChronological => {
            let mut feed = inbox.to_vec();
            feed.sort_by_key(|m| std::cmp::Reverse(m.tick));
            feed
        }
        MechanicsVariant::RandomK { k, seed } => {
            if inbox.len() <= k {
                return inbox.to_vec();
            }
            // The draw depends on the inbox content so successive ticks differ,
            // but not on the agent, so fitted configs transfer across agents.
            let ids: Vec<&str> = inbox.iter().map(|m| m.id.as_str()).collect();
            let mut rng = seed::rng(seed::derive(seed, &[seed::digest_str(&ids.join("\u{1f}"))]));
            let mut picked = index::sample(&mut rng, inbox.len(), k).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| inbox[i].clone()).collect()
        }
        MechanicsVariant::TopKByScore { k, scoring } => {
            let scores: Vec<usize> = match scoring {
                Scoring::TextLength => inbox.iter().map(|m| m.text.chars().count()).collect(),
                Scoring::ReplyCount => {
                    let mut counts: HashMap<&MessageId, usize> = HashMap::new();
                    for m in inbox {
                        if let Some(parent) = &m.reply_to {
                            *counts.entry(parent).or_default() += 1;
                        }
                    }
                    inbox.iter().map(|m| counts.get(&m.id).copied().unwrap_or(0)).collect()
                }
            };
            let mut order: Vec<usize> = (0..inbox.len()).collect();
            order.sort_by_key(|&i| std::cmp::Reverse(scores[i]));
            order.into_iter().take(k).map(|i| inbox[i].clone()).collect()
        }
    }
}

fn positions(feed: &[Message]) -> Result<HashMap<&MessageId, usize>, MechanicsError> {
    let mut pos = HashMap::with_capacity(feed.len());
    for (i, m) in feed.iter().enumerate() {
        if pos.insert(&m.id, i).is_some() {
            return Err(MechanicsError::DuplicateId(m.id.clone()));
        }
    }
    Ok(pos)
}

/// Feed loss with the default blend `alpha = 0.5`.
pub fn mechanics_loss(predicted: &[Message], observed: &[Message]) -> Result<f64, MechanicsError> {
    mechanics_loss_weighted(predicted, observed, DEFAULT_ALPHA)
}

/// `alpha * (1 - jaccard(ids)) + (1 - alpha) * kendall_distance(common order)`.
///
/// The Kendall term is the fraction of discordant pairs among the ids both
/// feeds share. It is 1 when the feeds share nothing and 0 when they share
/// exactly one message. Two empty feeds are identical and cost 0.
pub fn mechanics_loss_weighted(predicted: &[Message], observed: &[Message], alpha: f64) -> Result<f64, MechanicsError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(MechanicsError::Alpha(alpha));
    }
    let pred_pos = positions(predicted)?;
    let obs_pos = positions(observed)?;

    // Common ids in predicted order, paired with their observed rank.
    let common: Vec<usize> = predicted.iter().filter_map(|m| obs_pos.get(&m.id).copied()).collect();
    let union = pred_pos.len() + obs_pos.len() - common.len();
    let jaccard = if union == 0 {
        1.0
    } else {
        common.len() as f64 / union as f64
    };

    let kendall = match common.len() {
        0 if union > 0 => 1.0,
        0 | 1 => 0.0,
        m => {
            let mut discordant = 0usize;
            for i in 0..m {
                for j in i + 1..m {
                    if common[i] > common[j] {
                        discordant += 1;
                    }
                }
            }
            discordant as f64 / (m * (m - 1) / 2) as f64
        }
    };
    Ok(alpha * (1.0 - jaccard) + (1.0 - alpha) * kendall)
}

/// One observed tick of an agent's feed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeedObservation {
    pub agent: AgentId,
    pub inbox: Vec<Message>,
    pub observed: Vec<Message>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub config: MechanicsConfig,
    pub loss: f64,
    /// Mean loss of every family member, in family order.
    pub candidate_losses: Vec<f64>,
}

/// Mean loss of `config` over `observations`.
pub fn mean_loss(
    config: &MechanicsConfig,
    observations: &[FeedObservation],
    alpha: f64,
) -> Result<f64, MechanicsError> {
    if observations.is_empty() {
        return Err(MechanicsError::NoObservations);
    }
    let mut total = 0.0;
    for obs in observations {
        let predicted = apply_mechanics(config, &obs.agent, &obs.inbox);
        total += mechanics_loss_weighted(&predicted, &obs.observed, alpha)?;
    }
    Ok(total / observations.len() as f64)
}

/// Exhaustive search for the family member with the lowest mean loss.
/// Ties go to the earlier family member.
pub fn fit_mechanics(
    observations: &[FeedObservation],
    family: &[MechanicsConfig],
    alpha: f64,
) -> Result<FitResult, MechanicsError> {
    if observations.is_empty() {
        return Err(MechanicsError::NoObservations);
    }
    if family.is_empty() {
        return Err(MechanicsError::EmptyFamily);
    }
    for (index, obs) in observations.iter().enumerate() {
        let inbox: HashSet<&MessageId> = obs.inbox.iter().map(|m| &m.id).collect();
        if let Some(m) = obs.observed.iter().find(|m| !inbox.contains(&m.id)) {
            return Err(MechanicsError::NotInInbox {
                index,
                id: m.id.clone(),
            });
        }
    }
    let candidate_losses = family
        .par_iter()
        .map(|config| mean_loss(config, observations, alpha))
        .collect::<Result<Vec<f64>, _>>()?;
    let mut best = 0;
    for (i, &loss) in candidate_losses.iter().enumerate().skip(1) {
        if loss < candidate_losses[best] {
            best = i;
        }
    }
    Ok(FitResult {
        config: family[best].clone(),
        loss: candidate_losses[best],
        candidate_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Recipient;

    fn msg(id: &str, tick: u64, text: &str) -> Message {
        Message::post(id.into(), AgentId::new("S"), Recipient::Broadcast, tick, text).unwrap()
    }

    fn ids(feed: &[Message]) -> Vec<&str> {
        feed.iter().map(|m| m.id.as_str()).collect()
    }

    fn agent() -> AgentId {
        AgentId::new("A")
    }

    #[test]
    fn identity_passes_through() {
        let inbox = vec![msg("1", 0, "x"), msg("2", 0, "y"), msg("3", 0, "z")];
        assert_eq!(apply_mechanics(&MechanicsConfig::identity(), &agent(), &inbox), inbox);
        assert!(apply_mechanics(&MechanicsConfig::identity(), &agent(), &[]).is_empty());
    }

    #[test]
    fn reverse_chronological_orders_by_tick() {
        let inbox = vec![msg("a", 1, "x"), msg("b", 3, "x"), msg("c", 2, "x")];
        let cfg = MechanicsConfig::new(MechanicsVariant::ReverseChronological);
        let ticks: Vec<u64> = apply_mechanics(&cfg, &agent(), &inbox).iter().map(|m| m.tick).collect();
        assert_eq!(ticks, [3, 2, 1]);
        let cfg = MechanicsConfig::new(MechanicsVariant::Chronological);
        assert_eq!(ids(&apply_mechanics(&cfg, &agent(), &inbox)), ["a", "c", "b"]);
    }

    #[test]
    fn random_k_is_deterministic() {
        let inbox: Vec<Message> = (0..5).map(|i| msg(&i.to_string(), 0, "x")).collect();
        let cfg = MechanicsConfig::new(MechanicsVariant::RandomK { k: 2, seed: 11 });
        let first = apply_mechanics(&cfg, &agent(), &inbox);
        assert_eq!(first.len(), 2);
        assert_eq!(first, apply_mechanics(&cfg, &agent(), &inbox));
        assert_eq!(first, apply_mechanics(&cfg, &AgentId::new("other"), &inbox));
    }

    #[test]
    fn top_k_by_text_length() {
        let inbox = vec![
            msg("a", 0, &"x".repeat(5)),
            msg("b", 0, &"x".repeat(40)),
            msg("c", 0, &"x".repeat(12)),
        ];
        let cfg = MechanicsConfig::new(MechanicsVariant::TopKByScore {
            k: 1,
            scoring: Scoring::TextLength,
        });
        assert_eq!(ids(&apply_mechanics(&cfg, &agent(), &inbox)), ["b"]);
    }

    #[test]
    fn top_k_by_reply_count() {
        let root = msg("root", 0, "x");
        let other = msg("other", 0, "y");
        let r1 = Message::reply("r1".into(), AgentId::new("T"), &root, 0, "z").unwrap();
        let r2 = Message::reply("r2".into(), AgentId::new("U"), &root, 0, "z").unwrap();
        let r3 = Message::reply("r3".into(), AgentId::new("U"), &other, 0, "z").unwrap();
        let inbox = vec![other.clone(), r1, root.clone(), r2, r3];
        let cfg = MechanicsConfig::new(MechanicsVariant::TopKByScore {
            k: 2,
            scoring: Scoring::ReplyCount,
        });
        assert_eq!(ids(&apply_mechanics(&cfg, &agent(), &inbox)), ["root", "other"]);
    }

    #[test]
    fn overrides_apply_per_agent() {
        let inbox = vec![msg("a", 1, "x"), msg("b", 2, "x")];
        let cfg = MechanicsConfig::identity().with_override(
            AgentId::new("B"),
            MechanicsConfig::new(MechanicsVariant::ReverseChronological),
        );
        assert_eq!(ids(&apply_mechanics(&cfg, &agent(), &inbox)), ["a", "b"]);
        assert_eq!(ids(&apply_mechanics(&cfg, &AgentId::new("B"), &inbox)), ["b", "a"]);
    }

    #[test]
    fn validation() {
        assert_eq!(
            MechanicsConfig::new(MechanicsVariant::RandomK { k: 1001, seed: 0 }).validate(),
            Err(MechanicsError::FeedBound { k: 1001, max: 1000 })
        );
        assert_eq!(
            MechanicsConfig::new(MechanicsVariant::TopKByScore {
                k: 0,
                scoring: Scoring::TextLength
            })
            .validate(),
            Err(MechanicsError::ZeroK)
        );
        let nested = MechanicsConfig::identity().with_override(
            AgentId::new("B"),
            MechanicsConfig::identity().with_override(AgentId::new("C"), MechanicsConfig::identity()),
        );
        assert!(matches!(nested.validate(), Err(MechanicsError::NestedOverride(_))));
    }

    #[test]
    fn config_serde_shape() {
        let cfg = MechanicsConfig::new(MechanicsVariant::RandomK { k: 3, seed: 9 });
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"variant": "random_k", "k": 3, "seed": 9, "max_feed": 1000})
        );
        let back: MechanicsConfig = serde_json::from_value(serde_json::json!({"variant": "identity"})).unwrap();
        assert_eq!(back, MechanicsConfig::identity());
    }

    #[test]
    fn loss_examples() {
        let feed: Vec<Message> = (0..4).map(|i| msg(&i.to_string(), 0, "x")).collect();
        assert_eq!(mechanics_loss(&feed, &feed).unwrap(), 0.0);
        let reversed: Vec<Message> = feed.iter().rev().cloned().collect();
        assert_eq!(mechanics_loss(&feed, &reversed).unwrap(), 0.5);
        let other: Vec<Message> = (10..13).map(|i| msg(&i.to_string(), 0, "x")).collect();
        assert_eq!(mechanics_loss(&feed, &other).unwrap(), 1.0);
        assert_eq!(mechanics_loss(&[], &[]).unwrap(), 0.0);
        assert_eq!(mechanics_loss(&feed[..1], &feed[..1]).unwrap(), 0.0);
    }

    #[test]
    fn loss_rejects_duplicates() {
        let dup = vec![msg("1", 0, "x"), msg("1", 0, "y")];
        assert!(matches!(mechanics_loss(&dup, &[]), Err(MechanicsError::DuplicateId(_))));
        assert!(mechanics_loss_weighted(&[], &[], 1.5).is_err());
    }

    #[test]
    fn fit_recovers_reverse_chronological() {
        let gen = MechanicsConfig::new(MechanicsVariant::ReverseChronological);
        let observations: Vec<FeedObservation> = (0..3)
            .map(|o| {
                let inbox: Vec<Message> = [2u64, 0, 3, 1]
                    .iter()
                    .map(|&t| msg(&format!("{o}-{t}"), t + o, "x"))
                    .collect();
                let observed = apply_mechanics(&gen, &agent(), &inbox);
                FeedObservation {
                    agent: agent(),
                    inbox,
                    observed,
                }
            })
            .collect();
        let fit = fit_mechanics(
            &observations,
            &[MechanicsConfig::identity(), gen.clone()],
            DEFAULT_ALPHA,
        )
        .unwrap();
        assert_eq!(fit.config, gen);
        assert_eq!(fit.loss, 0.0);
        assert!(fit.candidate_losses[0] > 0.0);
    }

    #[test]
    fn fit_degenerate_cases() {
        let inbox = vec![msg("a", 0, "x"), msg("b", 1, "y")];
        let obs = vec![FeedObservation {
            agent: agent(),
            inbox: inbox.clone(),
            observed: inbox.clone(),
        }];
        let family = MechanicsConfig::builtin_family(1, &[1]);
        let fit = fit_mechanics(&obs, &family, DEFAULT_ALPHA).unwrap();
        assert_eq!(fit.config, MechanicsConfig::identity());
        assert_eq!(fit.loss, 0.0);

        let lone = vec![MechanicsConfig::new(MechanicsVariant::ReverseChronological)];
        assert_eq!(fit_mechanics(&obs, &lone, DEFAULT_ALPHA).unwrap().config, lone[0]);

        assert_eq!(
            fit_mechanics(&[], &family, DEFAULT_ALPHA),
            Err(MechanicsError::NoObservations)
        );
        assert_eq!(
            fit_mechanics(&obs, &[], DEFAULT_ALPHA),
            Err(MechanicsError::EmptyFamily)
        );

        let stray = vec![FeedObservation {
            agent: agent(),
            inbox: inbox[..1].to_vec(),
            observed: inbox,
        }];
        assert!(matches!(
            fit_mechanics(&stray, &family, DEFAULT_ALPHA),
            Err(MechanicsError::NotInInbox { .. })
        ));
    }
}
