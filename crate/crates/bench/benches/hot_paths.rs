use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use twon_core::behavior::{BehaviorProvider, StubMode, StubProvider};
use twon_core::likelihood::{loss_and_grad, synthetic, ScorerParams};
use twon_core::metrics::bleu;
use twon_core::model::{step, Behaviors};
use twon_core::{AgentId, AgentState, MechanicsConfig, Message, MessageId, Recipient, World};

fn bench_bleu(c: &mut Criterion) {
    let cand = "the federal government must finally act on rents and build more homes for families";
    let refr = "the government has to act on rents now and build homes for young families in cities";
    c.bench_function("bleu_16_tokens", |b| {
        b.iter(|| bleu(black_box(cand), black_box(refr), 4, 0.1).unwrap())
    });
}

fn bench_loss_and_grad(c: &mut Criterion) {
    let d = 64;
    let batch = synthetic::separable(d, 16, 1.0, 7);
    let flat: Vec<f64> = (0..ScorerParams::flat_len(d))
        .map(|i| ((i % 17) as f64 - 8.0) * 0.01)
        .collect();
    let params = ScorerParams::from_flat(d, &flat).unwrap();
    c.bench_function("loss_and_grad_d64_batch16", |b| {
        b.iter(|| loss_and_grad(black_box(&params), black_box(&batch)).unwrap())
    });
}

fn bench_step(c: &mut Criterion) {
    let ids: Vec<AgentId> = (0..50).map(|i| AgentId::new(format!("a{i}"))).collect();
    let mut world = World::new(ids.iter().cloned().map(AgentState::new), 1).unwrap();
    let openings: Vec<Message> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            Message::post(
                MessageId::new(format!("o{i}")),
                id.clone(),
                Recipient::Broadcast,
                0,
                "opening",
            )
            .unwrap()
        })
        .collect();
    world.inject(openings).unwrap();
    let stub: Arc<dyn BehaviorProvider> = Arc::new(StubProvider::new(StubMode::ReplyToEach));
    let behaviors: Behaviors = ids.into_iter().map(|id| (id, Arc::clone(&stub))).collect();
    let mechanics = MechanicsConfig::builtin_family(10, &[1])[0].clone();
    c.bench_function("step_50_agents", |b| {
        b.iter(|| step(black_box(&world), &mechanics, &behaviors).unwrap())
    });
}

criterion_group!(benches, bench_bleu, bench_loss_and_grad, bench_step);
criterion_main!(benches);
