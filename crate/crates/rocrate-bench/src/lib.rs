//! Benchmark fixtures shared by the criterion targets.

use rocrate_core::{CrateGraph, Entity, EntityId, PropertyValue};

pub fn id(s: &str) -> EntityId {
    EntityId::new(s).expect("valid id")
}

/// A crate with `files` data entities, each authored by one of `people`
/// contextual entities, so both the graph walk and the rule engine have
/// something to chew on.
pub fn synthetic_crate(files: usize, people: usize) -> CrateGraph {
    let mut graph = CrateGraph::new(
        "Synthetic benchmark crate",
        "Generated entities for timing parse, serialize and saturate",
        "2021-03-01",
        id("https://spdx.org/licenses/CC-BY-4.0"),
    )
    .expect("valid inputs");

    for p in 0..people {
        graph = graph
            .add_entity(
                Entity::new(id(&format!("#person-{p}")), ["Person"])
                    .with("name", PropertyValue::text(format!("Person {p}"))),
            )
            .expect("fresh id");
    }
    for f in 0..files {
        let author = format!("#person-{}", f % people.max(1));
        let mut entity = Entity::new(id(&format!("files/f{f}.csv")), ["File"])
            .with("name", PropertyValue::text(format!("File {f}")))
            .with("contentSize", PropertyValue::integer(f as i64));
        if people > 0 {
            entity.set("author", PropertyValue::reference(id(&author)));
        }
        graph = graph.add_data_entity(entity).expect("fresh id");
    }
    graph
}
