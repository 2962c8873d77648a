//! Use the decision-diagram engine directly: build a relation, quantify,
//! and list its models.

use addiff::dd::Manager;

fn main() -> Result<(), addiff::dd::DdError> {
    // x0 x1 encode a 2-bit counter, y0 y1 its next value
    let mut m = Manager::new(4);
    for (v, name) in ["x0", "x1", "y0", "y1"].iter().enumerate() {
        m.set_var_name(v as u32, *name);
    }
    let (x0, x1, y0, y1) = (m.var(0)?, m.var(1)?, m.var(2)?, m.var(3)?);

    // y = x + 1 mod 4, with x1 as the low bit
    let low = m.xor(y1, x1)?;
    let carry = m.xor(x0, x1)?;
    let high = m.iff(y0, carry)?;
    let inc = m.and(low, high)?;
    println!("relation: {} nodes", m.size(inc));

    // states with a successor whose high bit is set
    let ys = m.cube(&[2, 3])?;
    let into_high = m.and(inc, y0)?;
    let pre = m.exists(into_high, ys)?;
    for model in m.enumerate(pre, &[0, 1])? {
        println!("x0={} x1={}", model[0] as u8, model[1] as u8);
    }
    println!("first: {:?}", m.pick_one(inc, &[0, 1, 2, 3])?);
    println!("{} transitions", m.sat_count(inc, &[0, 1, 2, 3])?);
    print!("{}", m.to_dot(inc));
    Ok(())
}
