mod common;

use common::{corpus_of, random_texts, rng, BruteForce};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use retaudit::engine::{build_index, Bm25Params, Index};
use retaudit::queryset::{QuerySet, WeightingMode};
use retaudit::usefulness::{
    compute_usefulness, parse_interactions, write_interactions, InteractionEvent,
    InteractionKind::{Export, View},
};

/// Twelve documents where `t{i}` occurs i+1 times in document i, padded to
/// equal length, so query `common` ranks all of them and `t11` wins alone.
fn ladder() -> (Index, BruteForce) {
    let texts: Vec<String> = (0..12)
        .map(|i| {
            let mut w = vec!["common".to_owned()];
            w.extend(std::iter::repeat_n(format!("x{i}"), 12 - i));
            w.extend(std::iter::repeat_n("boost".to_owned(), i));
            w.join(" ")
        })
        .collect();
    let corpus = corpus_of("pub", &texts);
    (
        build_index(&corpus, Bm25Params::default()).unwrap(),
        BruteForce::from_corpus(&corpus),
    )
}

fn export(q: &str, d: &str) -> InteractionEvent {
    InteractionEvent::new(q, d, Export)
}

#[test]
fn export_at_rank_r_scores_one_over_r() {
    let (index, oracle) = ladder();
    let q = vec!["boost".to_owned()];
    let ranking = oracle.rank(&q);
    let queries = QuerySet::from_texts(["boost"], WeightingMode::Uniform).unwrap();
    for rank in [1usize, 4] {
        let doc = &oracle.ids()[ranking[rank - 1].0];
        let t = compute_usefulness(&index, &[export("boost", doc)], &queries, 10).unwrap();
        assert!((t.score(doc).unwrap() - 1.0 / rank as f64).abs() < 1e-15);
        assert_eq!(t.scores.iter().filter(|&&u| u > 0.0).count(), 1);
    }
}

#[test]
fn exports_beyond_the_cutoff_contribute_nothing() {
    let (index, oracle) = ladder();
    let ranking = oracle.rank(&["common".to_owned()]);
    assert_eq!(ranking.len(), 12);
    let eleventh = &oracle.ids()[ranking[10].0];
    let queries = QuerySet::from_texts(["common"], WeightingMode::Uniform).unwrap();
    let t = compute_usefulness(&index, &[export("common", eleventh)], &queries, 10).unwrap();
    assert!(t.scores.iter().all(|&u| u == 0.0));
    assert_eq!(t.counts.ignored, 1);
    assert_eq!(t.counts.consumed, 0);
}

#[test]
fn views_and_unknowns_are_tallied_but_never_scored() {
    let (index, _) = ladder();
    let queries = QuerySet::from_texts(["boost"], WeightingMode::Uniform).unwrap();
    let events = vec![
        InteractionEvent::new("boost", "d011", View),
        export("boost", "missing"),
        export("not in the query set", "d011"),
    ];
    let t = compute_usefulness(&index, &events, &queries, 10).unwrap();
    assert!(t.scores.iter().all(|&u| u == 0.0));
    assert_eq!(
        (
            t.counts.views,
            t.counts.exports,
            t.counts.unknown_document,
            t.counts.unknown_query
        ),
        (1, 2, 1, 1)
    );
}

#[test]
fn multiplicity_weighting_scales_contributions() {
    let (index, _) = ladder();
    let queries = QuerySet::from_counts([("boost", 3u64)], WeightingMode::Multiplicity).unwrap();
    let t = compute_usefulness(&index, &[export("boost", "d011")], &queries, 10).unwrap();
    assert_eq!(t.score("d011"), Some(3.0));
}

fn random_setup(seed: u64) -> (Index, QuerySet, Vec<InteractionEvent>) {
    let mut r = rng(seed);
    let texts = random_texts(&mut r, 40, 12, 8);
    let index = build_index(&corpus_of("pub", &texts), Bm25Params::default()).unwrap();
    let qs: Vec<String> = (0..12).map(|t| format!("t{t}")).collect();
    let queries = QuerySet::from_texts(&qs, WeightingMode::Uniform).unwrap();
    let events = (0..120)
        .map(|i| {
            let kind = if i % 3 == 0 { View } else { Export };
            InteractionEvent::new(
                qs[(i * 5) % 12].clone(),
                format!("d{:03}", (i * 7) % 40),
                kind,
            )
        })
        .collect();
    (index, queries, events)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn event_order_does_not_matter(seed in any::<u64>(), shuffle in any::<u64>()) {
        let (index, queries, mut events) = random_setup(seed);
        let a = compute_usefulness(&index, &events, &queries, 10).unwrap();
        events.shuffle(&mut rng(shuffle));
        let b = compute_usefulness(&index, &events, &queries, 10).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn removing_an_export_never_raises_any_score(seed in any::<u64>(), drop in 0usize..120) {
        let (index, queries, mut events) = random_setup(seed);
        let full = compute_usefulness(&index, &events, &queries, 10).unwrap();
        events.remove(drop);
        let fewer = compute_usefulness(&index, &events, &queries, 10).unwrap();
        for (x, y) in fewer.scores.iter().zip(&full.scores) {
            prop_assert!(x <= y);
        }
    }

    #[test]
    fn log_round_trip(seed in any::<u64>()) {
        let (_, _, events) = random_setup(seed);
        let mut buf = Vec::new();
        write_interactions(&events, &mut buf).unwrap();
        let log = parse_interactions(&buf[..], "mem".as_ref()).unwrap();
        prop_assert!(log.malformed.is_empty());
        prop_assert_eq!(log.events, events);
    }
}
