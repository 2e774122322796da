//! Ground-truth fixtures built by sequential enumeration.
//!
//! The library computes index/label mappings with closed-form per-level
//! arithmetic. The fixture here reconstructs the same mapping the slow way:
//! deal children to parents one at a time, then walk the hierarchy with
//! nested loops and running counters, materializing every label and range.
//! Tests compare the library's O(1) answers against these materialized
//! vectors, so the two implementations share no formulas.

// Each integration-test binary compiles this module separately and uses a
// different subset of it.
#![allow(dead_code)]

use brainscale::schema::{CerebellumConfig, CortexConfig};

/// Structural well-formedness check for emitted XML: tags nest and close
/// properly, attribute quotes are balanced, comments and processing
/// instructions terminate. Panics at the first violation.
pub fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut seen_element = false;
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        rest = &rest[start..];
        if let Some(tail) = rest.strip_prefix("<!--") {
            let end = tail.find("-->").expect("unterminated comment");
            rest = &tail[end + 3..];
            continue;
        }
        if rest.starts_with("<?") {
            let end = rest
                .find("?>")
                .expect("unterminated processing instruction");
            rest = &rest[end + 2..];
            continue;
        }
        // Find the tag's `>`, skipping over quoted attribute values.
        let bytes = rest.as_bytes();
        let mut i = 1;
        let mut quote: Option<u8> = None;
        loop {
            assert!(
                i < bytes.len(),
                "unterminated tag at `{}`",
                &rest[..rest.len().min(60)]
            );
            match (quote, bytes[i]) {
                (Some(q), b) if b == q => quote = None,
                (Some(_), _) => {}
                (None, b'"') | (None, b'\'') => quote = Some(bytes[i]),
                (None, b'>') => break,
                (None, b'<') => panic!("`<` inside tag at `{}`", &rest[..60.min(rest.len())]),
                (None, _) => {}
            }
            i += 1;
        }
        let tag = &rest[1..i];
        rest = &rest[i + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            let open = stack
                .pop()
                .unwrap_or_else(|| panic!("close tag `</{name}>` without an open tag"));
            assert_eq!(open, name.trim(), "mismatched close tag");
        } else {
            let body = tag.trim_end_matches('/');
            let name = body
                .split_whitespace()
                .next()
                .expect("tag with empty name")
                .to_owned();
            seen_element = true;
            if !tag.ends_with('/') {
                stack.push(name);
            }
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    assert!(seen_element, "no elements found");
}

/// Per-parent child counts produced by dealing children round-robin:
/// child `i` goes to parent `i mod parents`. The first `children mod
/// parents` parents end up one larger, matching balanced partition.
fn dealt_sizes(children: u64, parents: u64) -> Vec<u64> {
    let mut sizes = vec![0u64; parents as usize];
    for child in 0..children {
        sizes[(child % parents) as usize] += 1;
    }
    sizes
}

/// Fully materialized mapping for one small configuration.
pub struct Flattened {
    /// Full-depth label text per neuron index.
    pub labels: Vec<String>,
    /// 0-based slot per neuron index.
    pub slots: Vec<u64>,
    /// Local offsets per neuron index: hemisphere, region, column,
    /// microcolumn, layer, slot.
    pub addresses: Vec<[u64; 6]>,
    /// Label text at each depth 1..=5, hierarchy-major.
    pub depth_labels: [Vec<String>; 5],
    /// Half-open neuron ranges aligned with `depth_labels`.
    pub depth_ranges: [Vec<std::ops::Range<u64>>; 5],
}

impl Flattened {
    fn push_unit(&mut self, depth: usize, label: String, start: u64) {
        self.depth_labels[depth].push(label);
        // Close the previous unit at this depth, if any.
        if let Some(range) = self.depth_ranges[depth].last_mut() {
            range.end = start;
        }
        self.depth_ranges[depth].push(start..start);
    }

    fn close(&mut self, total: u64) {
        for depth in 0..5 {
            if let Some(range) = self.depth_ranges[depth].last_mut() {
                range.end = total;
            }
        }
    }
}

pub fn flatten_cortex(config: &CortexConfig) -> Flattened {
    let hemisphere_names = &config.hemisphere_names;
    let region_names = config.resolved_region_names();
    let layer_names = &config.layer_names;

    let hemispheres = hemisphere_names.len() as u64;
    let regions_total = hemispheres * config.regions_per_hemisphere;
    let microcolumns_total = (config.total_neurons / config.neurons_per_microcolumn).max(1);
    let layers = layer_names.len() as u64;
    let slices_total = microcolumns_total * layers;

    let columns_of_region = dealt_sizes(config.total_columns, regions_total);
    let microcolumns_of_column = dealt_sizes(microcolumns_total, config.total_columns);
    let neurons_of_slice = dealt_sizes(config.total_neurons, slices_total);

    let mut out = Flattened {
        labels: Vec::new(),
        slots: Vec::new(),
        addresses: Vec::new(),
        depth_labels: Default::default(),
        depth_ranges: Default::default(),
    };

    // Running global counters; nothing below uses closed-form division.
    let mut region_g = 0usize;
    let mut column_g = 0usize;
    let mut slice_g = 0usize;
    let mut neuron_g = 0u64;

    for h in 0..hemispheres {
        let p1 = hemisphere_names[h as usize].clone();
        out.push_unit(0, p1.clone(), neuron_g);
        for r in 0..config.regions_per_hemisphere {
            let p2 = format!("{p1}/{}", region_names[r as usize]);
            out.push_unit(1, p2.clone(), neuron_g);
            for c in 0..columns_of_region[region_g] {
                let p3 = format!("{p2}/{}", c + 1);
                out.push_unit(2, p3.clone(), neuron_g);
                for m in 0..microcolumns_of_column[column_g] {
                    let p4 = format!("{p3}/{}", m + 1);
                    out.push_unit(3, p4.clone(), neuron_g);
                    for l in 0..layers {
                        let p5 = format!("{p4}/{}", layer_names[l as usize]);
                        out.push_unit(4, p5.clone(), neuron_g);
                        for s in 0..neurons_of_slice[slice_g] {
                            out.labels.push(p5.clone());
                            out.slots.push(s);
                            out.addresses.push([h, r, c, m, l, s]);
                            neuron_g += 1;
                        }
                        slice_g += 1;
                    }
                }
                column_g += 1;
            }
            region_g += 1;
        }
    }
    assert_eq!(neuron_g, config.total_neurons, "oracle walked every neuron");
    out.close(neuron_g);
    out
}

pub fn flatten_cerebellum(config: &CerebellumConfig) -> Flattened {
    let hemisphere_names = &config.hemisphere_names;
    let region_names = config.resolved_region_names();

    let hemispheres = hemisphere_names.len() as u64;
    let modules_total = hemispheres
        * config.functional_regions
        * config.lobules
        * config.microzones
        * config.modules_per_microzone;
    let neurons_of_module = dealt_sizes(config.total_neurons, modules_total);

    let mut out = Flattened {
        labels: Vec::new(),
        slots: Vec::new(),
        addresses: Vec::new(),
        depth_labels: Default::default(),
        depth_ranges: Default::default(),
    };

    let mut module_g = 0usize;
    let mut neuron_g = 0u64;

    for h in 0..hemispheres {
        let p1 = hemisphere_names[h as usize].clone();
        out.push_unit(0, p1.clone(), neuron_g);
        for r in 0..config.functional_regions {
            let p2 = format!("{p1}/{}", region_names[r as usize]);
            out.push_unit(1, p2.clone(), neuron_g);
            for lobule in 0..config.lobules {
                let p3 = format!("{p2}/{}", lobule + 1);
                out.push_unit(2, p3.clone(), neuron_g);
                for zone in 0..config.microzones {
                    let p4 = format!("{p3}/{}", zone + 1);
                    out.push_unit(3, p4.clone(), neuron_g);
                    for module in 0..config.modules_per_microzone {
                        let p5 = format!("{p4}/{}", module + 1);
                        out.push_unit(4, p5.clone(), neuron_g);
                        for s in 0..neurons_of_module[module_g] {
                            out.labels.push(p5.clone());
                            out.slots.push(s);
                            out.addresses.push([h, r, lobule, zone, module, s]);
                            neuron_g += 1;
                        }
                        module_g += 1;
                    }
                }
            }
        }
    }
    assert_eq!(neuron_g, config.total_neurons, "oracle walked every neuron");
    out.close(neuron_g);
    out
}
