//! Benjamini-Hochberg adjustment under the three family rules.

use didkit::extras::{adjust_table, bh_adjust, FamilyRule, PCell};

fn main() -> didkit::Result<()> {
    let raw = [0.01, 0.04, 0.03, 0.20, 0.005];
    println!("raw      {raw:?}");
    println!("adjusted {:?}", bh_adjust(&raw)?);

    let cells: Vec<PCell> = [("uncertainty:all", 0.02), ("uncertainty:health", 0.001), ("negative:all", 0.30), ("negative:health", 0.04)]
        .iter()
        .map(|(o, p)| PCell { term: "treated x period=post".into(), outcome: o.to_string(), p: *p })
        .collect();
    for rule in [FamilyRule::Emotion, FamilyRule::Row, FamilyRule::Table] {
        println!("{rule:?}: {:?}", adjust_table(&cells, rule)?);
    }
    Ok(())
}
