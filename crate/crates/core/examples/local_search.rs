//! Local solvers: a continuous NLP from several starts, then the
//! mixed-integer local search that produces incumbents.

use polyrlt::io::parse_instance;
use polyrlt::local_search::{minlp_local_solve, nlp_local_solve, try_round, NlpOptions};

fn main() -> polyrlt::Result<()> {
    let p = parse_instance(include_str!("../instances/quartic_box.poly"), "quartic_box")?;
    for start in [[-1.5, 0.0], [0.0, 0.0], [1.5, 1.5]] {
        let r = nlp_local_solve(&p, &p.bounds, &start, &NlpOptions::default());
        println!("start {start:?} -> {:?} x = [{:.4}, {:.4}] f = {:.5}", r.status, r.x[0], r.x[1], r.objective);
    }

    let q = parse_instance(include_str!("../instances/cubic_integer.poly"), "cubic_integer")?;
    let centre: Vec<f64> = (0..q.num_vars()).map(|j| 0.5 * (q.bounds.lower[j] + q.bounds.upper[j])).collect();
    if let Some(inc) = try_round(&q, &centre, 1.0) {
        println!("rounded box centre: {:?} f = {:.4}", inc.point, inc.value);
    }
    match minlp_local_solve(&q, &centre, 2.0) {
        Some(inc) => println!("mixed-integer local search: {:?} f = {:.4}", inc.point, inc.value),
        None => println!("mixed-integer local search found nothing"),
    }
    Ok(())
}
