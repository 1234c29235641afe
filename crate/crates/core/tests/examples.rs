#[allow(dead_code)]
#[path = "../examples/chase_statistic.rs"]
mod chase_statistic;
#[allow(dead_code)]
#[path = "../examples/count_space.rs"]
mod count_space;
#[allow(dead_code)]
#[path = "../examples/model_on_observation.rs"]
mod model_on_observation;
#[allow(dead_code)]
#[path = "../examples/oracle_rollout.rs"]
mod oracle_rollout;
#[allow(dead_code)]
#[path = "../examples/play_client.rs"]
mod play_client;
#[allow(dead_code)]
#[path = "../examples/random_item_baseline.rs"]
mod random_item_baseline;
#[allow(dead_code)]
#[path = "../examples/render_episode.rs"]
mod render_episode;
#[allow(dead_code)]
#[path = "../examples/replay_log.rs"]
mod replay_log;
#[allow(dead_code)]
#[path = "../examples/rps_splits.rs"]
mod rps_splits;
#[allow(dead_code)]
#[path = "../examples/split_audit.rs"]
mod split_audit;
#[allow(dead_code)]
#[path = "../examples/template_roundtrip.rs"]
mod template_roundtrip;

#[test]
fn oracle_rollout_runs() {
    oracle_rollout::run_example().unwrap();
}

#[test]
fn random_item_baseline_runs() {
    random_item_baseline::run_example().unwrap();
}

#[test]
fn render_episode_runs() {
    render_episode::run_example().unwrap();
}

#[test]
fn split_audit_runs() {
    split_audit::run_example().unwrap();
}

#[test]
fn count_space_runs() {
    count_space::run_example().unwrap();
}

#[test]
fn rps_splits_runs() {
    rps_splits::run_example().unwrap();
}

#[test]
fn replay_log_runs() {
    replay_log::run_example().unwrap();
}

#[test]
fn play_client_runs() {
    play_client::run_example().unwrap();
}

#[test]
fn model_on_observation_runs() {
    model_on_observation::run_example().unwrap();
}

#[test]
fn chase_statistic_runs() {
    chase_statistic::run_example().unwrap();
}

#[test]
fn template_roundtrip_runs() {
    template_roundtrip::run_example().unwrap();
}
