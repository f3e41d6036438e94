//! Build piecewise-smooth return maps, iterate them, and inspect how orbits
//! stop: saddle hits at interior branch endpoints, gaps, or completion.
//!
//! ```bash
//! cargo run --example return_map_basics
//! ```

use closing_lab::segment_map::{Branch, MapEval, ReturnMap, Segment};

fn main() -> closing_lab::Result<()> {
    // a single contracting branch covering the whole segment
    let toy = ReturnMap::new(
        Segment::centered(-1.0, 0.9)?,
        vec![Branch::affine(-1.0, 0.9, 0.05, -0.001)],
    )?;

    println!("toy map: P(x) = 0.05 x - 0.001 on (-1, 0.9)");
    println!("  P(0.5)   = {:?}", toy.eval(0.5)?);
    println!("  DP(0.5)  = {}", toy.deriv(0.5)?);
    let orbit = toy.iterate(0.5, 6)?;
    println!("  orbit of 0.5: {:?} ({:?})", orbit.points, orbit.stop);
    println!("  fixed point: {}", -0.001 / 0.95);

    // two branches meeting at an interior endpoint: a saddle for the flow
    let two = ReturnMap::new(
        Segment::centered(-1.0, 0.9)?,
        vec![
            Branch::affine(-1.0, 0.1, 0.5, -0.001),
            Branch::affine(0.1, 0.6, 0.5, -0.3),
        ],
    )?;
    println!("\ntwo-branch map with saddle endpoint at 0.1:");
    match two.eval(0.1)? {
        MapEval::SaddleHit => println!("  P(0.1) runs into the saddle"),
        other => println!("  unexpected: {other:?}"),
    }
    let orbit = two.iterate(0.2, 5)?;
    println!("  orbit of 0.2: {:?} ({:?})", orbit.points, orbit.stop);

    // iterated domains shrink as orbits must survive longer
    for n in [1, 2, 4, 8] {
        let family = two.domain_depth(n)?;
        let total: f64 = family.iter().map(|j| j.len()).sum();
        println!(
            "  dom(P^{n}): {} intervals, total length {total:.6}",
            family.len()
        );
    }

    // chain rule: |DP^3| from the derivative product vs finite differences
    let x = -0.4;
    let n = 3;
    let product = two.abs_deriv_n(x, n).expect("x survives three steps");
    let h = 1e-8;
    let fd = ((two.iterate(x + h, n)?.last() - two.iterate(x - h, n)?.last()) / (2.0 * h)).abs();
    println!("\n|DP^3({x})| chain rule {product} vs finite difference {fd}");
    Ok(())
}
