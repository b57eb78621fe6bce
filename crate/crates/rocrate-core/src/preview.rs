//! Static HTML preview of a crate: a single self-contained page with no
//! scripts and no external fetches, fit for archival hosting. Renders even
//! invalid crates (behind a banner) and prints unknown properties verbatim.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::entity::{Entity, PropertyValue, Scalar};
use crate::graph::{Classification, CrateGraph};
use crate::id::EntityId;
use crate::validate::validate_minimal;

/// A rendered preview page plus the anchor assigned to each entity.
#[derive(Debug, Clone)]
pub struct PreviewDocument {
    pub html: String,
    pub entity_anchor_map: BTreeMap<EntityId, String>,
}

impl PreviewDocument {
    pub fn bytes(&self) -> &[u8] {
        self.html.as_bytes()
    }
}

/// Renders the crate: root first with its required properties, then data
/// entities in `hasPart` order, then contextual entities, then the metadata
/// descriptor. Every entity gets exactly one anchor; references to
/// crate-local entities link to their anchors while absolute IRIs link out.
pub fn render_preview(graph: &CrateGraph) -> PreviewDocument {
    let anchors = assign_anchors(graph);
    let validation = validate_minimal(graph);

    let mut data: Vec<&Entity> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for id in graph.has_part_ids() {
        if graph.classify(id) == Ok(Classification::Data) && seen.insert(id.clone()) {
            data.push(graph.get(id).expect("data entity present"));
        }
    }
    for id in graph.data_entity_ids() {
        if seen.insert(id.clone()) {
            data.push(graph.get(&id).expect("data entity present"));
        }
    }
    let mut contextual: Vec<&Entity> = graph
        .entities()
        .filter(|e| graph.classify(&e.id) == Ok(Classification::Contextual))
        .collect();
    contextual.sort_by(|a, b| a.id.normalized().cmp(b.id.normalized()));

    let root = graph.root();
    let title = root
        .get("name")
        .and_then(PropertyValue::as_text)
        .unwrap_or_else(|| root.id.as_str());

    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(html, "<title>{}</title>", escape(title));
    html.push_str(STYLE);
    html.push_str("</head>\n<body>\n<main>\n");

    if !validation.passed() {
        html.push_str(
            "<p class=\"banner\">This crate does not satisfy the minimal metadata rules; \
             the preview below is rendered best-effort.</p>\n",
        );
    }

    let _ = writeln!(html, "<h1>{}</h1>", escape(title));
    render_entity(&mut html, graph, root, &anchors, "Root data entity");

    if !data.is_empty() {
        html.push_str("<h2>Data entities</h2>\n");
        for entity in data {
            render_entity(&mut html, graph, entity, &anchors, "Data entity");
        }
    }
    if !contextual.is_empty() {
        html.push_str("<h2>Contextual entities</h2>\n");
        for entity in contextual {
            render_entity(&mut html, graph, entity, &anchors, "Contextual entity");
        }
    }
    html.push_str("<h2>Crate metadata</h2>\n");
    render_entity(
        &mut html,
        graph,
        graph.descriptor(),
        &anchors,
        "Metadata file descriptor",
    );

    html.push_str("</main>\n</body>\n</html>\n");
    PreviewDocument {
        html,
        entity_anchor_map: anchors,
    }
}

const STYLE: &str = "<style>\n\
    body { font-family: sans-serif; margin: 2em auto; max-width: 50em; padding: 0 1em; }\n\
    table { border-collapse: collapse; margin: 0.5em 0 1.5em; width: 100%; }\n\
    th, td { border: 1px solid #999; padding: 0.3em 0.6em; text-align: left; \
vertical-align: top; }\n\
    th { width: 12em; font-weight: 600; }\n\
    .banner { background: #fee; border: 1px solid #c00; padding: 0.6em; }\n\
    .kind { color: #555; font-size: 0.9em; }\n\
    ul { margin: 0; padding-left: 1.2em; }\n\
</style>\n";

/// One anchor per entity, deterministic: sanitized id, de-duplicated with a
/// numeric suffix in canonical entity order.
fn assign_anchors(graph: &CrateGraph) -> BTreeMap<EntityId, String> {
    let mut ordered: Vec<&EntityId> = graph.ids().collect();
    ordered.sort_by(|a, b| a.normalized().cmp(b.normalized()));
    let mut taken = std::collections::BTreeSet::new();
    let mut map = BTreeMap::new();
    for id in ordered {
        let base = sanitize(id.as_str());
        let mut anchor = format!("entity-{base}");
        let mut n = 1;
        while !taken.insert(anchor.clone()) {
            n += 1;
            anchor = format!("entity-{base}-{n}");
        }
        map.insert(id.clone(), anchor);
    }
    map
}

fn sanitize(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "_".to_string()
    } else {
        cleaned
    }
}

fn render_entity(
    html: &mut String,
    graph: &CrateGraph,
    entity: &Entity,
    anchors: &BTreeMap<EntityId, String>,
    kind: &str,
) {
    let anchor = &anchors[&entity.id];
    let _ = writeln!(html, "<section id=\"{}\">", escape_attr(anchor));
    let heading = entity
        .get("name")
        .and_then(PropertyValue::as_text)
        .unwrap_or_else(|| entity.id.as_str());
    let _ = writeln!(html, "<h3>{}</h3>", escape(heading));
    let _ = writeln!(
        html,
        "<p class=\"kind\">{} · <code>{}</code></p>",
        escape(kind),
        escape(entity.id.as_str())
    );
    html.push_str("<table>\n");
    if !entity.classes.is_empty() {
        let classes = entity.classes.join(", ");
        let _ = writeln!(html, "<tr><th>type</th><td>{}</td></tr>", escape(&classes));
    }
    for (term, value) in &entity.properties {
        let _ = write!(html, "<tr><th>{}</th><td>", escape(term));
        render_value(html, graph, value, anchors);
        html.push_str("</td></tr>\n");
    }
    html.push_str("</table>\n</section>\n");
}

fn render_value(
    html: &mut String,
    graph: &CrateGraph,
    value: &PropertyValue,
    anchors: &BTreeMap<EntityId, String>,
) {
    match value {
        PropertyValue::Scalar(s) => render_scalar(html, graph, s, anchors),
        PropertyValue::List(items) => {
            html.push_str("<ul>");
            for item in items {
                html.push_str("<li>");
                render_scalar(html, graph, item, anchors);
                html.push_str("</li>");
            }
            html.push_str("</ul>");
        }
    }
}

fn render_scalar(
    html: &mut String,
    graph: &CrateGraph,
    scalar: &Scalar,
    anchors: &BTreeMap<EntityId, String>,
) {
    match scalar {
        Scalar::Text(s) => html.push_str(&escape(s)),
        Scalar::Number(n) => html.push_str(&escape(&n.lexical())),
        Scalar::Reference(target) => {
            if target.is_absolute() {
                let _ = write!(
                    html,
                    "<a href=\"{}\">{}</a>",
                    escape_attr(target.as_str()),
                    escape(target.as_str())
                );
            } else if graph.contains(target) {
                let anchor = &anchors[target];
                let _ = write!(
                    html,
                    "<a href=\"#{}\">{}</a>",
                    escape_attr(anchor),
                    escape(target.as_str())
                );
            } else {
                // Dangling relative reference: text only, nothing to link.
                let _ = write!(html, "<code>{}</code>", escape(target.as_str()));
            }
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_attr(s: &str) -> String {
    escape(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn minimal() -> CrateGraph {
        CrateGraph::new("x", "y", "2017", id("#lic")).unwrap()
    }

    #[test]
    fn minimal_crate_renders_three_sections() {
        let preview = render_preview(&minimal());
        assert_eq!(preview.html.matches("<section").count(), 3);
        assert_eq!(preview.entity_anchor_map.len(), 3);
        assert!(preview.html.starts_with("<!DOCTYPE html>"));
        assert!(!preview.html.contains("<script"));
    }

    #[test]
    fn deterministic_output() {
        let a = render_preview(&minimal());
        let b = render_preview(&minimal());
        assert_eq!(a.html, b.html);
    }

    #[test]
    fn absolute_references_link_out() {
        let g = minimal()
            .add_data_entity(Entity::new(id("pic.jpg"), ["File", "ImageObject"]).with(
                "author",
                PropertyValue::reference(id("https://orcid.org/0000-0002-1825-0097")),
            ))
            .unwrap()
            .add_entity(
                Entity::new(id("https://orcid.org/0000-0002-1825-0097"), ["Person"])
                    .with("name", PropertyValue::text("Josiah Carberry")),
            )
            .unwrap();
        let preview = render_preview(&g);
        assert!(preview
            .html
            .contains("<a href=\"https://orcid.org/0000-0002-1825-0097\">"));
    }

    #[test]
    fn local_references_use_anchors() {
        let g = minimal();
        let mut root = g.root().clone();
        root.set("author", PropertyValue::reference(id("#alice")));
        let g = g
            .replace_entity(root)
            .unwrap()
            .add_entity(Entity::new(id("#alice"), ["Person"]))
            .unwrap();
        let preview = render_preview(&g);
        let anchor = &preview.entity_anchor_map[&id("#alice")];
        assert!(preview.html.contains(&format!("<a href=\"#{anchor}\">")));
        assert!(preview.html.contains(&format!("id=\"{anchor}\"")));
    }

    #[test]
    fn unknown_terms_render_verbatim() {
        let g = minimal();
        let mut root = g.root().clone();
        root.set("testInstance", PropertyValue::text("suite-1"));
        let g = g.replace_entity(root).unwrap();
        let preview = render_preview(&g);
        assert!(preview.html.contains("<th>testInstance</th>"));
        assert!(preview.html.contains("suite-1"));
    }

    #[test]
    fn invalid_crates_render_with_banner() {
        let g = minimal();
        let mut root = g.root().clone();
        root.properties.shift_remove("description");
        let g = g.replace_entity(root).unwrap();
        let preview = render_preview(&g);
        assert!(preview.html.contains("class=\"banner\""));
    }

    #[test]
    fn text_is_escaped() {
        let g = CrateGraph::new("a <b> & \"c\"", "y", "2017", id("#lic")).unwrap();
        let preview = render_preview(&g);
        assert!(preview.html.contains("a &lt;b&gt; &amp; &quot;c&quot;"));
        assert!(!preview.html.contains("a <b>"));
    }
}
