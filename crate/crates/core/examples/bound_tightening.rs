//! Interval propagation and relaxation-based tightening on a bounded disc.

use polyrlt::io::parse_instance;
use polyrlt::tighten::{fbbt, obbt, ObbtMode, Tightened};

const INSTANCE: &str = "\
var x >= -10 <= 10
var y >= -10 <= 10
var k >= 0 <= 8 integer
min x + y - k
st disc: x^2 + y^2 <= 4
st link: k - x^2 >= 0.5
st cap: 3 - k + y >= 0
";

fn show(label: &str, t: &Tightened) {
    match t.bounds() {
        Some(b) => {
            let boxes: Vec<String> = (0..b.lower.len()).map(|j| format!("[{:.3}, {:.3}]", b.lower[j], b.upper[j])).collect();
            println!("{label:<10} {}", boxes.join(" "));
        }
        None => println!("{label:<10} infeasible"),
    }
}

fn main() -> polyrlt::Result<()> {
    let p = parse_instance(INSTANCE, "disc")?;
    show("initial", &Tightened::Box(p.bounds.clone()));
    let propagated = fbbt(&p, &p.bounds, 20);
    show("fbbt", &propagated);
    // Relaxations are only as tight as the box they are built on, so the
    // optimization-based pass starts from the propagated one.
    let start = propagated.bounds().expect("the disc is nonempty");
    for mode in [ObbtMode::Lp, ObbtMode::Milp] {
        let r = obbt(&p, start, mode, 5.0, None)?;
        show(&format!("{mode:?}").to_lowercase(), &r.outcome);
    }
    Ok(())
}
