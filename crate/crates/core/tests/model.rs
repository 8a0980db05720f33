use sumstate::corpus::Document;
use sumstate::model::{
    decode, encode, grad_check, loss, summarize, train, Mode, ModelConfig, ModelParams, Slot, StateVariant,
    Vocab,
};
use sumstate::oracle::{Objective, OracleLabels};

fn toy_doc() -> Document {
    Document::from_lines(
        "toy",
        &[
            "storm hit ( late ) friday",
            "officials said two died",
            "markets rose",
        ],
        &["storm hit friday", "two died"],
    )
    .unwrap()
}

fn toy_labels(doc: &Document) -> OracleLabels {
    let mut l = OracleLabels::from_selection(doc, &[0, 1], 0.5, Objective::AvgR1R2);
    l.y[0] = vec![true, true, false, false, false, true];
    l
}

fn cfg(mode: Mode, variant: StateVariant) -> ModelConfig {
    ModelConfig {
        embed_dim: 5,
        hidden_dim: 8,
        mode,
        state_variant: variant,
        ..Default::default()
    }
}

#[test]
fn encoder_dimensions() {
    let doc = Document::from_lines("d", &["a b c", "d e f"], &["a"]).unwrap();
    let c = ModelConfig {
        embed_dim: 4,
        hidden_dim: 4,
        ..Default::default()
    };
    let p = ModelParams::init(c, Vocab::build([&doc]));
    let enc = encode(&doc, &p);
    assert!(enc.sentence_features.iter().all(|f| f.len() == 24));
    assert!(enc.word_features.iter().flatten().all(|f| f.len() == 36));
    assert_eq!(enc.document_vec.len(), 8);

    let one = Document::from_lines("o", &["word"], &["word"]).unwrap();
    let enc = encode(&one, &p);
    assert_eq!(enc.sentence_vecs[0].len(), 8);
    assert!(enc.sentence_vecs[0].iter().all(|v| v.is_finite()));
}

#[test]
fn gradients_match_finite_differences() {
    let doc = toy_doc();
    let gold = toy_labels(&doc);
    for mode in [Mode::Extractive, Mode::Compressive] {
        for variant in [StateVariant::Lstm, StateVariant::Averaging] {
            let report = grad_check(&doc, &gold, &cfg(mode, variant), 1e-5).unwrap();
            assert!(
                report.max_rel_error < 1e-4,
                "{mode}/{variant}: {:#?}",
                report.tensors
            );
        }
    }
}

#[test]
fn extractive_mode_leaves_word_decoder_untouched() {
    let doc = toy_doc();
    let gold = toy_labels(&doc);
    let c = cfg(Mode::Extractive, StateVariant::Lstm);
    let p = ModelParams::random_normal(c.clone(), Vocab::build([&doc]), 0.1, 3);
    let trace = decode(&doc, &p, Some(&gold)).unwrap();
    let out = loss(&trace, &gold, &c, &p).unwrap();
    assert_eq!(out.word, 0.0);
    assert_eq!(out.total, out.sentence);
    for slot in Slot::ALL.into_iter().filter(|s| s.is_word_decoder()) {
        assert!(out.grads.slot(slot).iter().all(|&g| g == 0.0), "{slot:?}");
    }
}

#[test]
fn uniform_probabilities_give_closed_form_loss() {
    let doc = Document::from_lines("d", &["a", "b", "c", "d"], &["a c"]).unwrap();
    let c = ModelConfig::default();
    let p = ModelParams::zeros(c.clone(), Vocab::build([&doc]));
    let gold = OracleLabels::from_selection(&doc, &[0, 2], 1.0, Objective::MeanR1R2RL);
    let trace = decode(&doc, &p, Some(&gold)).unwrap();
    assert!(trace.sentence_probs.iter().all(|&p| p == 0.5));
    let out = loss(&trace, &gold, &c, &p).unwrap();
    assert!((out.sentence - 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn zero_parameters_fall_back_to_first_sentence() {
    let doc = toy_doc();
    let p = ModelParams::zeros(ModelConfig::default(), Vocab::build([&doc]));
    let out = summarize(&doc, &p).unwrap();
    assert!(out.fallback);
    assert_eq!(out.summary.sentences.len(), 1);
    assert_eq!(out.summary.sentences[0].index, 0);
    assert!(out.sentence_probs.iter().all(|&p| p == 0.5));
}

#[test]
fn all_zero_teacher_keeps_initial_summary_state() {
    let doc = toy_doc();
    let c = cfg(Mode::Compressive, StateVariant::Lstm);
    let p = ModelParams::random_normal(c, Vocab::build([&doc]), 0.1, 5);
    let gold = OracleLabels::from_selection(&doc, &[], 0.0, Objective::AvgR1R2);
    let trace = decode(&doc, &p, Some(&gold)).unwrap();
    assert!(trace
        .sentence_states
        .iter()
        .all(|s| s == &trace.sentence_states[0]));
    assert!(trace.word_probs.iter().all(Option::is_none));
}

#[test]
fn probabilities_are_normalized_and_open() {
    let doc = toy_doc();
    let c = cfg(Mode::Compressive, StateVariant::Lstm);
    let p = ModelParams::random_normal(c, Vocab::build([&doc]), 0.5, 9);
    let gold = toy_labels(&doc);
    let trace = decode(&doc, &p, Some(&gold)).unwrap();
    let probs = trace
        .sentence_probs
        .iter()
        .chain(trace.word_probs.iter().flatten().flatten());
    for &q in probs {
        assert!(q > 0.0 && q < 1.0);
    }
}

#[test]
fn misaligned_teacher_is_rejected() {
    let doc = toy_doc();
    let p = ModelParams::init(ModelConfig::default(), Vocab::build([&doc]));
    let mut gold = toy_labels(&doc);
    gold.z.pop();
    assert!(decode(&doc, &p, Some(&gold)).is_err());
}

#[test]
fn zero_learning_rate_freezes_parameters() {
    let doc = toy_doc();
    let gold = toy_labels(&doc);
    let c = ModelConfig {
        learning_rate: 0.0,
        epochs: 3,
        ..cfg(Mode::Compressive, StateVariant::Lstm)
    };
    let (trained, _) = train(std::slice::from_ref(&doc), &[gold], &c).unwrap();
    assert_eq!(trained, ModelParams::init(c, Vocab::build([&doc])));
}
