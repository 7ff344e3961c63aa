//! Loading a JSON problem file and producing the same reports as the `dro`
//! binary.

use dro_nested::commands;
use dro_nested::problem::Document;
use dro_nested::Result;

const FILE: &str = r#"{
  "version": "1",
  "spaces": { "line": { "points": [0, 1, 3] } },
  "measures": { "P": { "space": "line", "weights": [0.5, 0.3, 0.2] } },
  "variables": { "Z": { "space": "line", "values": [2, -1, 4] } },
  "partitions": { "split": { "space": "line", "atoms": [[0], [1, 2]] } },
  "ambiguity_sets": {
    "ball": { "kind": "wasserstein_ball", "center": "P", "radius": 0.2 },
    "tail": { "kind": "avar", "alpha": 0.6, "reference": "P" }
  }
}"#;

fn main() -> Result<()> {
    let doc = Document::parse(FILE)?;
    println!("{}", commands::eval_static(&doc, "Z", "ball")?.to_text());
    println!(
        "{}",
        commands::eval_conditional(&doc, "Z", "tail", "split", None, false)?.to_text()
    );
    let json = commands::eval_static(&doc, "Z", "tail")?.to_json();
    println!("{json}");

    match Document::parse(&FILE.replace("\"reference\": \"P\"", "\"reference\": \"Q\"")) {
        Err(e) => println!("dangling name rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
