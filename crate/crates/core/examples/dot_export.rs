//! Render a diagram as Graphviz DOT with a witness highlighted. Pipe the
//! output to `dot -Tsvg`.

use addiff::diff::{addiff, DiffOptions};
use addiff::fixtures;
use addiff::text::export_dot;

fn main() {
    let (v3, v4) = (fixtures::hire(3), fixtures::hire(4));
    let out = addiff(&v3, &v4, &DiffOptions::default()).unwrap();
    let witness = out.traces.first();
    if let Some(w) = witness {
        eprintln!("highlighting a witness of length {} for inputs {:?}", w.len(), w.inputs.0);
    }
    print!("{}", export_dot(&v3, witness).unwrap());
}
