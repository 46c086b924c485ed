use noisemap::acoustics::{PropagationConfig, Scene};
use noisemap::config::RunConfig;
use noisemap::datagen::{self, io as dataio, DatagenConfig, Split};
use noisemap::dsp::SplMeterConfig;
use noisemap::neural::{evaluate, Checkpoint, Model};
use noisemap::workflow::{train_classifier, train_regressor};

fn small() -> DatagenConfig {
    DatagenConfig { n_events: 24, n_trials: 300, ..DatagenConfig::default() }
}

#[test]
fn datasets_are_reproducible_and_survive_csv() {
    let scene = Scene::default_urban();
    let prop = PropagationConfig::default();
    let cfg = small();
    let (_, a) = datagen::gen_event_dataset(&scene, &prop, &SplMeterConfig::default(), &cfg, 0.95, 4).unwrap();
    let (_, b) = datagen::gen_event_dataset(&scene, &prop, &SplMeterConfig::default(), &cfg, 0.95, 4).unwrap();
    assert_eq!(a.rows, b.rows);
    for split in [Split::Train, Split::Validation, Split::Test] {
        assert!(a.rows.iter().any(|r| r.split == split), "{split:?} empty");
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.csv");
    dataio::write_events(&path, &a.rows, &a.meta).unwrap();
    let back = dataio::read_events(&path).unwrap();
    assert_eq!(back.len(), a.rows.len());
    assert_eq!(dataio::read_meta(&path).unwrap().seed, 4);

    let r = datagen::gen_regression_set(&scene, &prop, &cfg, 4).unwrap();
    let path = dir.path().join("regression.csv");
    dataio::write_regression(&path, &r.rows, &r.meta).unwrap();
    assert_eq!(dataio::read_regression(&path).unwrap().len(), r.rows.len());
}

#[test]
fn short_training_lowers_loss_and_checkpoints_round_trip() {
    let scene = Scene::default_urban();
    let mut cfg = RunConfig { datagen: small(), ..RunConfig::default() };
    cfg.neural.regressor.max_epochs = 15;
    let r = datagen::gen_regression_set(&scene, &cfg.propagation, &cfg.datagen, 8).unwrap();
    let (m, rep) = train_regressor(&r.rows, &cfg, 8).unwrap();
    assert!(rep.val_loss.last().unwrap() < rep.val_loss.first().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("regressor.json");
    Checkpoint::new(Model::Regressor(m.clone()), 8, "test", Some(rep)).save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    let test = datagen::regression_samples(&r.rows, Split::Test).unwrap();
    assert_eq!(evaluate(back.regressor().unwrap(), &test).unwrap(), evaluate(&m, &test).unwrap());
    assert!(back.classifier().is_err());

    cfg.neural.classifier.max_epochs = 2;
    let (_, e) = datagen::gen_event_dataset(&scene, &cfg.propagation, &cfg.meter, &cfg.datagen, 0.95, 8).unwrap();
    let (a, _) = train_classifier(&e.rows, &cfg, 8).unwrap();
    let (b, _) = train_classifier(&e.rows, &cfg, 8).unwrap();
    assert_eq!(a, b);
}
