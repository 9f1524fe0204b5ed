//! Builds the linear relaxation of a small quartic problem and shows how the
//! relaxation tightens when the box shrinks.

use polyrlt::io::parse_instance;
use polyrlt::lp::LpOptions;
use polyrlt::poly::Bounds;
use polyrlt::relax::{build_relaxation, RelaxationKind};

fn main() -> polyrlt::Result<()> {
    let p = parse_instance(include_str!("../instances/quartic_box.poly"), "quartic_box")?;
    let relax = build_relaxation(&p, &p.bounds, RelaxationKind::Continuous)?;
    println!(
        "{} variables, {} monomial columns, {} rows ({} bound-factor products)",
        relax.num_vars,
        relax.num_rlt_columns(),
        relax.rows.len(),
        relax.num_bound_factor_rows()
    );
    for m in relax.columns.iter().skip(relax.num_vars) {
        print!("{m:?} ");
    }
    println!();

    for half_width in [2.0, 1.0, 0.5, 0.25] {
        let centre = -1.3;
        let bounds = Bounds::new(vec![centre - half_width, -2.0], vec![centre + half_width, 2.0])?;
        let sol = build_relaxation(&p, &bounds, RelaxationKind::Continuous)?.solve_continuous(&LpOptions::default())?;
        println!("x in [{:+.2}, {:+.2}]: relaxation bound {:.4}", centre - half_width, centre + half_width, sol.objective);
    }
    Ok(())
}
