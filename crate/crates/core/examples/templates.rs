//! Expands the shipped psycholinguistic suites and prints one frame of each.
//!
//! Run with `cargo run --example templates`.

use std::path::Path;

use agreelab::eval::{expand_templates, TemplateSuite};

fn main() -> agreelab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("templates");
    for file in ["bock.toml", "wagers.toml"] {
        let suite = TemplateSuite::load(&dir.join(file))?;
        let items = expand_templates(&suite)?;
        println!(
            "{file}: {} frames, {} items",
            suite.frames.len(),
            items.len()
        );
        for item in items.iter().filter(|i| i.frame == 1) {
            println!(
                "  {:<16} {}  {:<60} label {:?}, attractors {}",
                item.suite.as_str(),
                item.condition,
                item.text(),
                item.label,
                item.attractors
            );
        }
    }
    Ok(())
}
