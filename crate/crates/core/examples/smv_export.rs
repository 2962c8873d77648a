//! Emit a diagram as an SMV module for an external model checker.

use addiff::fixtures;
use addiff::semantics::emit_smv;

fn main() {
    let smv = emit_smv(&fixtures::proj(3)).expect("fixtures compile");
    print!("{smv}");
}
