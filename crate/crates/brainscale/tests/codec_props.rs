//! Property-based checks of the codec on randomized small configurations.

mod common;

use brainscale::codec::Schema;
use brainscale::schema::{CerebellumConfig, CortexConfig};
use proptest::prelude::*;

fn arb_cortex() -> impl Strategy<Value = CortexConfig> {
    (
        1usize..=3,   // hemispheres
        1u64..=4,     // regions per hemisphere
        1u64..=40,    // columns
        1u64..=2_000, // neurons
        1u64..=50,    // neurons per microcolumn
        1usize..=5,   // layers
    )
        .prop_map(|(h, regions, columns, neurons, npm, layers)| {
            let hemisphere_pool = ["left", "right", "medial"];
            let layer_pool = ["II", "III", "IV", "V", "VI"];
            CortexConfig {
                hemisphere_names: hemisphere_pool[..h].iter().map(|s| s.to_string()).collect(),
                regions_per_hemisphere: regions,
                region_names: None,
                total_neurons: neurons,
                total_columns: columns,
                neurons_per_microcolumn: npm,
                layer_names: layer_pool[..layers].iter().map(|s| s.to_string()).collect(),
            }
        })
}

fn arb_cerebellum() -> impl Strategy<Value = CerebellumConfig> {
    (
        1u64..=3,     // functional regions
        1u64..=4,     // lobules
        1u64..=3,     // microzones
        1u64..=4,     // modules per microzone
        1u64..=2_000, // neurons
    )
        .prop_map(
            |(regions, lobules, microzones, modules, neurons)| CerebellumConfig {
                functional_regions: regions,
                lobules,
                microzones,
                modules_per_microzone: modules,
                total_neurons: neurons,
                ..CerebellumConfig::default()
            },
        )
}

fn arb_schema() -> impl Strategy<Value = Schema> {
    prop_oneof![
        arb_cortex().prop_map(|c| Schema::cortex(c).unwrap()),
        arb_cerebellum().prop_map(|c| Schema::cerebellum(c).unwrap()),
    ]
}

proptest! {
    /// Index -> address -> index is the identity, and the qualified name
    /// parses back to the same index.
    #[test]
    fn index_round_trips(schema in arb_schema(), seed in any::<u64>()) {
        let index = seed % schema.neuron_count();
        let address = schema.address_of(index).unwrap();
        prop_assert_eq!(schema.index_of(&address).unwrap(), index);

        let name = schema.qualified_name(index).unwrap();
        prop_assert_eq!(schema.parse_qualified(&name).unwrap(), index);
    }

    /// At every depth the enumerated regions tile the index space: ranges
    /// are adjacent, in order, and cover [0, neurons) exactly.
    #[test]
    fn regions_tile_the_index_space(schema in arb_schema()) {
        for depth in 1..=5 {
            let mut cursor = 0u64;
            for label in schema.enumerate_regions(depth).unwrap() {
                let range = schema.neuron_range(&label).unwrap();
                prop_assert_eq!(range.start, cursor, "gap before {}", label);
                prop_assert!(range.end >= range.start);
                cursor = range.end;
            }
            prop_assert_eq!(cursor, schema.neuron_count(), "depth {} under-covers", depth);
        }
    }

    /// Every label prefix covers its refinements: the range of a full label
    /// nests inside the range of each of its ancestors.
    #[test]
    fn prefixes_nest(schema in arb_schema(), seed in any::<u64>()) {
        let index = seed % schema.neuron_count();
        let address = schema.address_of(index).unwrap();
        let (label, _) = schema.encode(&address).unwrap();
        let text = label.to_string();
        let segments: Vec<&str> = text.split('/').collect();

        let mut previous: Option<std::ops::Range<u64>> = None;
        for depth in 1..=segments.len() {
            let prefix = segments[..depth].join("/");
            let range = schema.resolve_range(&prefix).unwrap();
            prop_assert!(range.contains(&index), "{} misses index {}", prefix, index);
            if let Some(outer) = previous {
                prop_assert!(outer.start <= range.start && range.end <= outer.end);
            }
            previous = Some(range);
        }
    }

    /// Full-depth regions are balanced: sizes differ by at most one, and
    /// the larger ones come first.
    #[test]
    fn finest_regions_are_balanced(schema in arb_schema()) {
        let widths: Vec<u64> = schema
            .enumerate_regions(5)
            .unwrap()
            .map(|label| {
                let range = schema.neuron_range(&label).unwrap();
                range.end - range.start
            })
            .collect();
        let max = *widths.iter().max().unwrap();
        let min = *widths.iter().min().unwrap();
        prop_assert!(max - min <= 1, "width skew {} exceeds 1", max - min);
        // Non-increasing: every oversized region precedes every undersized one.
        for pair in widths.windows(2) {
            prop_assert!(pair[0] >= pair[1]);
        }
    }

    /// Every enumerated label parses back to itself and is distinct from
    /// its neighbors (labels at a fixed depth are unique).
    #[test]
    fn enumerated_labels_parse_and_are_unique(schema in arb_schema()) {
        for depth in 1..=5 {
            let mut seen = std::collections::HashSet::new();
            for label in schema.enumerate_regions(depth).unwrap() {
                let text = label.to_string();
                let reparsed = schema.parse_label(&text).unwrap();
                prop_assert_eq!(&reparsed, &label);
                prop_assert!(seen.insert(text.clone()), "duplicate label {}", text);
            }
            prop_assert_eq!(seen.len() as u64, schema.region_count(depth).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The closed-form codec agrees with full sequential enumeration on
    /// randomized cortex configurations (bounded smaller: the oracle
    /// materializes every label).
    #[test]
    fn codec_matches_enumeration_oracle(config in arb_cortex()) {
        let oracle = common::flatten_cortex(&config);
        let schema = Schema::cortex(config).unwrap();
        for index in 0..schema.neuron_count() {
            let name = schema.qualified_name(index).unwrap();
            let expected = format!(
                "{}#{}",
                oracle.labels[index as usize],
                oracle.slots[index as usize] + 1
            );
            prop_assert_eq!(name, expected, "index {}", index);
        }
    }
}
