//! Golden-file check: a fixed desk-scale experiment must keep producing the
//! committed aggregate report bit for bit. Regenerate deliberately with
//! `GOLDEN_REGEN=1 cargo test --test golden` after a semantic change and
//! review the diff.

use icnsim::cache::{Placement, StrategyConfig};
use icnsim::harness::{
    self, Capacity, ExperimentSpec, RoleSpec, StrategySpec, TopologySource, WorkloadSpec,
};
use icnsim::metrics::MissCost;
use icnsim::topology::ExternalServers;
use icnsim::workload::{PopularityModel, SizeModel};

const GOLDEN_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_aggregate.json");

fn golden_spec() -> ExperimentSpec {
    ExperimentSpec {
        version: 1,
        topology: TopologySource::Edges(vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]),
        workload: WorkloadSpec {
            n_objects: 20,
            popularity: PopularityModel::Zipf { exponent: 1.0 },
            size: SizeModel::Fixed { bytes: 100 },
            n_requests: 400,
        },
        roles: RoleSpec {
            n_servers: Some(1),
            client_fraction: 0.4,
            edge_degree_threshold: None,
            external_servers: ExternalServers::All,
        },
        strategies: vec![
            StrategySpec { name: None, config: StrategyConfig::new(Placement::Lce) },
            StrategySpec {
                name: None,
                config: StrategyConfig {
                    placement: Placement::Cachedbit,
                    core_quantile: 0.5,
                    search_radius: 1,
                    copy_limit: None,
                },
            },
        ],
        cache: Capacity::FractionOfCatalog(0.1),
        warmup_fraction: 0.25,
        snapshot_epochs: 10,
        aging: None,
        repetitions: 5,
        base_seed: 42,
        confidence: 0.95,
        miss_cost: MissCost::Actual,
        output_dir: None,
    }
}

#[test]
fn aggregate_matches_golden_file() {
    let result = harness::execute(&golden_spec(), false).unwrap();
    let rendered = serde_json::to_string_pretty(&result.aggregate).unwrap();
    if std::env::var_os("GOLDEN_REGEN").is_some() {
        std::fs::create_dir_all(std::path::Path::new(GOLDEN_PATH).parent().unwrap()).unwrap();
        std::fs::write(GOLDEN_PATH, &rendered).unwrap();
        panic!("golden file regenerated; rerun without GOLDEN_REGEN");
    }
    let golden = std::fs::read_to_string(GOLDEN_PATH).expect("committed golden file");
    assert_eq!(rendered, golden, "aggregate diverged from the golden file");
}
