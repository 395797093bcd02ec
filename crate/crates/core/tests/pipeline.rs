mod common;

use satd_core::detector::{DetectorHp, DetectorModel, SvmConfig};
use satd_core::eval::{
    run_cv, stratified_folds, task_sequences, train_detector, DetectorRecipe, ModelSpec, Task,
};
use satd_core::miner::{build_dataset, label_records, mine_dir, Label};
use satd_core::pretrain::{train_next_token_lm, PretrainMode};

#[test]
fn fixtures_flow_into_a_balanced_dataset() {
    let mut mined = mine_dir(&common::fixture_dir().join("java")).unwrap();
    label_records(&mut mined.records);
    let projects: Vec<&str> = mined.records.iter().map(|r| r.project.as_str()).collect();
    assert!(projects.contains(&"alpha") && projects.contains(&"beta"));
    let data = build_dataset(mined.records, 9, true).unwrap();
    let satd = data.pairs.iter().filter(|r| r.is_satd()).count();
    assert_eq!(satd, 8);
    assert_eq!(data.pairs.len(), 16);
    assert!(data
        .pairs
        .iter()
        .all(|r| matches!(r.label, Label::Satd | Label::NonSatd)));
    let code = task_sequences(&data.pairs, Task::DetectCode);
    assert!(code
        .iter()
        .all(|s| s.first().map(String::as_str) == Some("(")));
}

#[test]
fn cross_validation_is_reproducible() {
    let (seqs, labels) = common::planted_corpus(60, 1);
    let plan = stratified_folds(&labels, 5, true, 3).unwrap();
    let spec = ModelSpec::Dl(DetectorHp {
        latent_dim: 8,
        epochs: 3,
        batch_size: 8,
        ..DetectorHp::default()
    });
    let recipe = DetectorRecipe {
        sequences: &seqs,
        labels: &labels,
        spec,
        seed: 3,
        pretrained: None,
    };
    let a = run_cv(&labels, &recipe, &plan).unwrap();
    let b = run_cv(&labels, &recipe, &plan).unwrap();
    assert_eq!(a, b);
}

#[test]
fn saved_detectors_predict_identically() {
    let (seqs, labels) = common::planted_corpus(40, 2);
    let lm = train_next_token_lm(
        &seqs,
        &DetectorHp {
            latent_dim: 8,
            epochs: 2,
            batch_size: 8,
            ..DetectorHp::default()
        },
        2,
    )
    .unwrap()
    .0;
    let dl = ModelSpec::Dl(DetectorHp {
        latent_dim: 8,
        epochs: 2,
        batch_size: 8,
        ..DetectorHp::default()
    });
    let svm = ModelSpec::Svm(SvmConfig::default());
    let models = [
        train_detector(&dl, &seqs, &labels, 2, None).unwrap(),
        train_detector(&ModelSpec::Mnb { alpha: 1.0 }, &seqs, &labels, 2, None).unwrap(),
        train_detector(&svm, &seqs, &labels, 2, None).unwrap(),
        train_detector(&svm, &seqs, &labels, 2, Some((&lm, PretrainMode::End2end))).unwrap(),
        train_detector(
            &dl,
            &seqs,
            &labels,
            2,
            Some((&lm, PretrainMode::EmbeddingOnly)),
        )
        .unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, m) in models.iter().enumerate() {
        let path = dir.path().join(format!("m{i}.ckpt"));
        m.save(&path).unwrap();
        let back = DetectorModel::load(&path).unwrap();
        assert_eq!(back.kind(), m.kind());
        for s in &seqs[..10] {
            let (p, q) = (m.predict(s).unwrap(), back.predict(s).unwrap());
            assert_eq!(p.positive, q.positive);
            // Weights are stored as f32.
            assert!(
                (p.score - q.score).abs() < 1e-4,
                "{} vs {}",
                p.score,
                q.score
            );
        }
    }
}

#[test]
fn naive_bayes_refuses_pretrained_embeddings() {
    let (seqs, labels) = common::planted_corpus(20, 3);
    let hp = DetectorHp {
        latent_dim: 4,
        epochs: 1,
        batch_size: 4,
        ..DetectorHp::default()
    };
    let lm = train_next_token_lm(&seqs, &hp, 0).unwrap().0;
    let r = train_detector(
        &ModelSpec::Mnb { alpha: 1.0 },
        &seqs,
        &labels,
        0,
        Some((&lm, PretrainMode::End2end)),
    );
    assert!(r.is_err());
}
