//! Parse a diagram from text, print it back, and show the diagnostics of a
//! broken variant.

use addiff::model::{check_guard_exclusivity, validate};
use addiff::text::{parse, serialize};

const ORDER: &str = r#"
activity order {
    input express: bool;
    local tries: 0..2;

    initial start;
    action receive "receive order" { tries = 0; };
    decision how;
    action ship "ship";
    action courier "send by courier";
    final done;

    start -> receive;
    receive -> how;
    how -> ship [!express];
    how -> courier [express];
    ship -> done;
    courier -> done;
}
"#;

fn main() {
    let ad = parse(ORDER).expect("the sample parses");
    println!("{} nodes, {} transitions", ad.nodes.len(), ad.transitions.len());
    assert!(validate(&ad).is_empty() && check_guard_exclusivity(&ad).is_empty());
    println!("{}", serialize(&ad));

    // overlapping guards and an unknown edge target
    let broken = ORDER
        .replace("how -> courier [express];", "how -> courier [express | !express];")
        .replace("ship -> done;", "ship -> nowhere;");
    match parse(&broken) {
        Ok(ad) => {
            for d in validate(&ad).into_iter().chain(check_guard_exclusivity(&ad)) {
                println!("{d}");
            }
        }
        Err(errors) => {
            for e in errors {
                println!("{e}");
            }
        }
    }
    match parse("activity x { initial i; i -> ; }") {
        Ok(_) => unreachable!(),
        Err(errors) => println!("syntax: {}", errors[0]),
    }
}
