//! Regenerates `data/lilliefors_null.json`.
//!
//! cargo run --release -p handrecon --example gen_lilliefors_table

use std::path::PathBuf;

use handrecon::stats::lilliefors::{table_sizes, NullTable, TABLE_LEVELS, TABLE_REPLICATES, TABLE_SEED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = NullTable::generate(TABLE_SEED, &table_sizes(), TABLE_REPLICATES, TABLE_LEVELS);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/lilliefors_null.json");
    std::fs::write(&path, serde_json::to_string(&table)? + "\n")?;
    eprintln!("wrote {} ({} sizes)", path.display(), table.entries.len());
    Ok(())
}
