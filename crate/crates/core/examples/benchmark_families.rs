//! Generate synthetic diagram pairs and time both algorithms on them.
//! Build with `--release` for meaningful numbers.

use addiff::benchgen::{gen_forking, gen_linear, mutate, LinearVariant, MutationSpec};
use addiff::diff::DiffOptions;
use addiff::report::{BenchRow, BenchTable};

fn main() {
    let opts = DiffOptions::default();
    let mut table = BenchTable::default();
    for w in 1..=3 {
        let ad = gen_forking(w, 6);
        let mutant = mutate(&ad, &MutationSpec::forking_default()).unwrap();
        table.rows.push(BenchRow::measure(&format!("fork W={w} L=6"), &ad, &mutant, &opts).unwrap());
    }
    for domain in [16, 32] {
        let ad = gen_linear(12, domain, LinearVariant::Local);
        let mutant = mutate(&ad, &MutationSpec::linear_default()).unwrap();
        table.rows.push(BenchRow::measure(&format!("lbl L=12 D={domain}"), &ad, &mutant, &opts).unwrap());
    }
    print!("{table}");
}
