//! Exhaustive comparison of the codec against sequentially enumerated
//! ground truth on small configurations, including configurations where no
//! level divides evenly.

mod common;

use brainscale::codec::{NeuronAddress, Schema};
use brainscale::schema::{CerebellumConfig, CortexConfig};
use common::{flatten_cerebellum, flatten_cortex, Flattened};

/// Two hemispheres, two regions each, eight columns, 160 neurons in
/// 10-neuron microcolumns: every division is exact.
fn tiny_config() -> CortexConfig {
    let mut config = CortexConfig::canonical(160, 8);
    config.regions_per_hemisphere = 2;
    config.neurons_per_microcolumn = 10;
    config
}

/// Nothing divides evenly: 17 columns over 6 regions, 99 microcolumns over
/// 17 columns, 997 neurons over 495 layer slices.
fn uneven_config() -> CortexConfig {
    let mut config = CortexConfig::canonical(997, 17);
    config.regions_per_hemisphere = 3;
    config.neurons_per_microcolumn = 10;
    config
}

fn assert_matches_oracle(schema: &Schema, oracle: &Flattened) {
    let total = schema.neuron_count();
    assert_eq!(oracle.labels.len() as u64, total);

    for index in 0..total {
        let i = index as usize;
        let address = schema.address_of(index).unwrap();
        let [h, r, c, m, l, s] = oracle.addresses[i];
        assert_eq!(
            address,
            NeuronAddress {
                hemisphere: h,
                region: r,
                column: c,
                microcolumn: m,
                layer: l,
                slot: s,
            },
            "address mismatch at index {index}"
        );
        assert_eq!(schema.index_of(&address).unwrap(), index);

        let (label, slot) = schema.encode(&address).unwrap();
        assert_eq!(label.to_string(), oracle.labels[i]);
        assert_eq!(slot, oracle.slots[i]);

        let expected_name = format!("{}#{}", oracle.labels[i], oracle.slots[i] + 1);
        assert_eq!(schema.qualified_name(index).unwrap(), expected_name);
        assert_eq!(schema.parse_qualified(&expected_name).unwrap(), index);
    }

    for depth in 1..=5 {
        let produced: Vec<String> = schema
            .enumerate_regions(depth)
            .unwrap()
            .map(|l| l.to_string())
            .collect();
        assert_eq!(
            produced,
            oracle.depth_labels[depth - 1],
            "label stream mismatch at depth {depth}"
        );
        assert_eq!(schema.region_count(depth).unwrap(), produced.len() as u64);

        for (text, expected) in oracle.depth_labels[depth - 1]
            .iter()
            .zip(&oracle.depth_ranges[depth - 1])
        {
            let label = schema.parse_label(text).unwrap();
            assert_eq!(label.to_string(), *text);
            assert_eq!(
                schema.neuron_range(&label).unwrap(),
                *expected,
                "range mismatch for `{text}`"
            );
        }
    }
}

#[test]
fn codec_agrees_with_enumeration_on_exact_cortex() {
    let config = tiny_config();
    let oracle = flatten_cortex(&config);
    let schema = Schema::cortex(config).unwrap();
    assert_matches_oracle(&schema, &oracle);
}

#[test]
fn codec_agrees_with_enumeration_on_uneven_cortex() {
    let config = uneven_config();
    let oracle = flatten_cortex(&config);
    let schema = Schema::cortex(config).unwrap();
    assert_matches_oracle(&schema, &oracle);
}

#[test]
fn codec_agrees_with_enumeration_on_cerebellum() {
    let config = CerebellumConfig {
        lobules: 4,
        microzones: 3,
        modules_per_microzone: 2,
        total_neurons: 1_001, // 144 modules, inexact on purpose
        ..CerebellumConfig::default()
    };
    let oracle = flatten_cerebellum(&config);
    let schema = Schema::cerebellum(config).unwrap();
    assert_matches_oracle(&schema, &oracle);
}

#[test]
fn tiny_config_fixed_points() {
    let config = tiny_config();
    let oracle = flatten_cortex(&config);
    let schema = Schema::cortex(config).unwrap();

    // Spot values, frozen from the enumeration.
    assert_eq!(oracle.labels[159], "right/region_02/2/2/VI");
    assert_eq!(oracle.slots[159], 1);
    assert_eq!(oracle.labels[80], "right/region_01/1/1/II");
    assert_eq!(oracle.addresses[10], [0, 0, 0, 1, 0, 0]);
    assert_eq!(oracle.depth_labels[4].len(), 80);

    assert_eq!(
        schema.qualified_name(159).unwrap(),
        "right/region_02/2/2/VI#2"
    );
    assert_eq!(schema.resolve_range("left").unwrap(), 0..80);
    assert_eq!(schema.resolve_range("left/region_01/1/1/II").unwrap(), 0..2);
}
