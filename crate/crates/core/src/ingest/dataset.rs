use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{Corpus, DropReason, EmbeddingSource, IngestError, SampleKind};
use crate::behavior::ReplyHistory;
use crate::likelihood::LikelihoodExample;
use crate::seed;

/// Keeps the samples of the `top_k` users with the most samples; ties at the
/// cut go to the lexicographically smaller id.
pub fn select_active_users(corpus: &Corpus, top_k: usize) -> Result<Corpus, IngestError> {
    if corpus.is_empty() {
        return Err(IngestError::Input("empty corpus".into()));
    }
    if top_k == 0 {
        return Err(IngestError::Input("top_k must be at least 1".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &corpus.samples {
        *counts.entry(&s.user_id).or_default() += 1;
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    let kept: BTreeSet<&str> = ranked.iter().take(top_k).map(|(u, _)| *u).collect();

    let mut provenance = corpus.provenance.clone();
    let samples: Vec<_> = corpus
        .samples
        .iter()
        .filter(|s| kept.contains(s.user_id.as_str()))
        .cloned()
        .collect();
    let removed = corpus.len() - samples.len();
    if removed > 0 {
        *provenance.dropped.entry(DropReason::InactiveUser).or_default() += removed;
    }
    Ok(Corpus { samples, provenance })
}

/// Chronological `<post, reply>` pairs per user, newest `per_user_cap` kept.
pub fn build_reply_pairs(corpus: &Corpus, per_user_cap: usize) -> Result<BTreeMap<String, ReplyHistory>, IngestError> {
    let mut by_user: BTreeMap<&str, Vec<(i64, &str, &str)>> = BTreeMap::new();
    for s in &corpus.samples {
        if let (SampleKind::Reply, Some(parent)) = (s.kind, s.reply_to_text.as_deref()) {
            by_user
                .entry(&s.user_id)
                .or_default()
                .push((s.timestamp, parent, &s.text));
        }
    }
    let mut out = BTreeMap::new();
    for (user, mut pairs) in by_user {
        pairs.sort_by_key(|p| p.0);
        let history = ReplyHistory::from_pairs(pairs.into_iter().map(|(_, p, r)| (p, r)), per_user_cap)
            .map_err(|e| IngestError::Input(e.to_string()))?;
        out.insert(user.to_owned(), history);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedUser {
    pub user: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodBuild {
    pub examples: Vec<LikelihoodExample>,
    pub skipped: Vec<SkippedUser>,
}

struct UserPlan {
    user: String,
    /// (target text, history texts, label)
    items: Vec<(String, Vec<String>, u8)>,
}

fn recent(texts: &[String], cap: usize) -> Vec<String> {
    texts[texts.len().saturating_sub(cap)..].to_vec()
}

fn plan_user(corpus: &Corpus, user: &str, history_cap: usize, seed: u64) -> Result<UserPlan, String> {
    let mut replies: Vec<(i64, &str, &str)> = corpus
        .samples
        .iter()
        .filter(|s| s.user_id == user && s.kind == SampleKind::Reply)
        .filter_map(|s| s.reply_to_text.as_deref().map(|p| (s.timestamp, p, s.text.as_str())))
        .collect();
    replies.sort_by_key(|r| r.0);

    // Replied-to posts, first occurrence first.
    let mut positives: Vec<&str> = Vec::new();
    for (_, parent, _) in &replies {
        if !positives.contains(parent) {
            positives.push(parent);
        }
    }
    if positives.is_empty() {
        return Err("no replies".into());
    }

    // A positive's history is every reply the user wrote to some other post.
    let usable: Vec<(&str, Vec<String>)> = positives
        .iter()
        .map(|&target| {
            let texts: Vec<String> = replies
                .iter()
                .filter(|(_, parent, _)| *parent != target)
                .map(|(_, _, text)| text.to_string())
                .collect();
            (target, recent(&texts, history_cap))
        })
        .filter(|(_, h)| !h.is_empty())
        .collect();
    if usable.is_empty() {
        return Err("insufficient history: every reply targets the same post".into());
    }

    let (start, end) = corpus
        .samples
        .iter()
        .filter(|s| s.user_id == user)
        .fold((i64::MAX, i64::MIN), |(lo, hi), s| {
            (lo.min(s.timestamp), hi.max(s.timestamp))
        });
    let replied: BTreeSet<&str> = positives.iter().copied().collect();
    let mut negatives: Vec<&str> = Vec::new();
    for s in &corpus.samples {
        if s.kind == SampleKind::Post
            && s.user_id != user
            && (start..=end).contains(&s.timestamp)
            && !replied.contains(s.text.as_str())
            && !negatives.contains(&s.text.as_str())
        {
            negatives.push(&s.text);
        }
    }
    if negatives.is_empty() {
        return Err("no unreplied posts in the user's time window".into());
    }

    let m = usable.len().min(negatives.len());
    let mut rng = seed::rng(seed::derive(seed, &[seed::digest_str(user)]));
    let mut pos_idx = index::sample(&mut rng, usable.len(), m).into_vec();
    let mut neg_idx = index::sample(&mut rng, negatives.len(), m).into_vec();
    pos_idx.sort_unstable();
    neg_idx.sort_unstable();

    let all_replies: Vec<String> = replies.iter().map(|(_, _, t)| t.to_string()).collect();
    let neg_history = recent(&all_replies, history_cap);
    let mut items = Vec::with_capacity(2 * m);
    for i in pos_idx {
        let (target, history) = &usable[i];
        items.push((target.to_string(), history.clone(), 1));
    }
    for i in neg_idx {
        items.push((negatives[i].to_string(), neg_history.clone(), 0));
    }
    Ok(UserPlan {
        user: user.to_owned(),
        items,
    })
}

/// Label-balanced reply-likelihood examples.
///
/// Positives are posts a user replied to. Negatives are drawn uniformly (seeded)
/// from other users' posts inside the user's active time span that the user did
/// not reply to, treating silence as a decision not to reply. Each user
/// contributes equally many of both; users lacking either class are skipped.
pub fn build_likelihood_dataset(
    corpus: &Corpus,
    embedder: &dyn EmbeddingSource,
    seed: u64,
    history_cap: usize,
) -> Result<LikelihoodBuild, IngestError> {
    if history_cap == 0 {
        return Err(IngestError::Input("history_cap must be positive".into()));
    }
    let mut examples = Vec::new();
    let mut skipped = Vec::new();
    for user in corpus.users() {
        let plan = match plan_user(corpus, &user, history_cap, seed) {
            Ok(p) => p,
            Err(reason) => {
                log::info!("skipping user {user}: {reason}");
                skipped.push(SkippedUser { user, reason });
                continue;
            }
        };
        let mut texts: Vec<String> = Vec::new();
        let mut slot: HashMap<String, usize> = HashMap::new();
        for (target, history, _) in &plan.items {
            for t in std::iter::once(target).chain(history) {
                if !slot.contains_key(t) {
                    slot.insert(t.clone(), texts.len());
                    texts.push(t.clone());
                }
            }
        }
        let vectors = embedder.embed(&texts)?;
        if vectors.len() != texts.len() {
            return Err(IngestError::Embedding(
                "embedder returned the wrong number of vectors".into(),
            ));
        }
        for (target, history, label) in plan.items {
            let history = history.iter().map(|t| vectors[slot[t]].clone()).collect();
            examples.push(
                LikelihoodExample::new(history, vectors[slot[&target]].clone(), label).with_user(plan.user.clone()),
            );
        }
    }
    Ok(LikelihoodBuild { examples, skipped })
}

/// Fails on the first user whose positive and negative counts differ.
pub fn check_balance(examples: &[LikelihoodExample]) -> Result<(), IngestError> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for ex in examples {
        let entry = counts.entry(ex.user.as_deref().unwrap_or("<unknown>")).or_default();
        match ex.label {
            1 => entry.0 += 1,
            _ => entry.1 += 1,
        }
    }
    match counts.into_iter().find(|(_, (p, n))| p != n) {
        Some((user, (positives, negatives))) => Err(IngestError::Unbalanced {
            user: user.to_owned(),
            positives,
            negatives,
        }),
        None => Ok(()),
    }
}

/// User-level train/test split; all of a user's samples land on one side.
pub fn split(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), IngestError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(IngestError::Input(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let mut users = corpus.users();
    if users.len() < 2 {
        return Err(IngestError::Input("a split needs at least two users".into()));
    }
    users.shuffle(&mut seed::rng(seed));
    let n_train = ((train_fraction * users.len() as f64).round() as usize).clamp(1, users.len() - 1);
    let train_users: BTreeSet<&str> = users[..n_train].iter().map(String::as_str).collect();
    let (train, test): (Vec<_>, Vec<_>) = corpus
        .samples
        .iter()
        .cloned()
        .partition(|s| train_users.contains(s.user_id.as_str()));
    Ok((Corpus::new(train), Corpus::new(test)))
}
