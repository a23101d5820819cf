use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twon_core::mechanics::{apply_mechanics, fit_mechanics, mechanics_loss, FeedObservation, DEFAULT_ALPHA};
use twon_core::{AgentId, MechanicsConfig, Message, MessageId, Recipient};

const K: usize = 4;
const SEEDS: [u64; 3] = [11, 22, 33];

/// Inboxes whose production order, tick order, text lengths and reply counts
/// all disagree, so every family member yields a different feed.
fn inbox(rng: &mut ChaCha8Rng, obs: usize) -> Vec<Message> {
    let size = rng.gen_range(8..14);
    let mut ticks: Vec<u64> = (1..=size as u64).collect();
    ticks.shuffle(rng);
    let mut lengths: Vec<usize> = (1..=size).map(|l| l * 3).collect();
    lengths.shuffle(rng);
    let mut out: Vec<Message> = Vec::with_capacity(size);
    for i in 0..size {
        let sender = AgentId::new(format!("s{}", rng.gen_range(0..5)));
        let id = MessageId::new(format!("o{obs}m{i}"));
        let text = "x".repeat(lengths[i]);
        let msg = match out.get(rng.gen_range(0..=i)).filter(|_| i > 0 && rng.gen_bool(0.6)) {
            Some(parent) => {
                let parent = parent.clone();
                let mut m = Message::post(id, sender, Recipient::Broadcast, ticks[i], text).unwrap();
                m.reply_to = Some(parent.id);
                m
            }
            None => Message::post(id, sender, Recipient::Broadcast, ticks[i], text).unwrap(),
        };
        out.push(msg);
    }
    out
}

fn observations(generator: &MechanicsConfig, seed: u64) -> Vec<FeedObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..12)
        .map(|obs| {
            let agent = AgentId::new(format!("viewer{}", obs % 3));
            let inbox = inbox(&mut rng, obs);
            let observed = apply_mechanics(generator, &agent, &inbox);
            FeedObservation { agent, inbox, observed }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn every_builtin_variant_is_recovered_with_zero_loss(member in 0usize..8, seed in any::<u64>()) {
        let family = MechanicsConfig::builtin_family(K, &SEEDS);
        let generator = family[member].clone();
        let obs = observations(&generator, seed);
        let fit = fit_mechanics(&obs, &family, DEFAULT_ALPHA).unwrap();
        prop_assert_eq!(fit.loss, 0.0);
        prop_assert_eq!(&fit.config, &generator);
        prop_assert!(fit.candidate_losses.iter().enumerate().all(|(i, &l)| i == member || l > 0.0));
    }

    #[test]
    fn loss_is_bounded_and_zero_on_self(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let messages = inbox(&mut rng, 0);
        let mut shuffled = messages.clone();
        shuffled.shuffle(&mut rng);
        let cut = rng.gen_range(0..=shuffled.len());
        let loss = mechanics_loss(&messages, &shuffled[..cut]).unwrap();
        prop_assert!((0.0..=1.0).contains(&loss));
        prop_assert_eq!(mechanics_loss(&messages, &messages).unwrap(), 0.0);
    }
}
