fn main() {
    let cheb = dynlab::maps::library::chebyshev2();
    match dynlab::nice::construct_nice_couple(&cheb, 0.05, 8.0, 12) {
        Ok(c) => {
            for comp in &c.inner.components {
                if let dynlab::nice::NiceRegion::Interval { lo, hi } = comp.region {
                    println!("inner [{lo:.6}, {hi:.6}]");
                    for b in &comp.boundary_certs {
                        println!("  cert periodic={} len={}", b.eventually_periodic, b.orbit_len);
                    }
                }
            }
            for comp in &c.outer.components {
                if let dynlab::nice::NiceRegion::Interval { lo, hi } = comp.region {
                    println!("outer [{lo:.6}, {hi:.6}]");
                }
            }
        }
        Err(e) => println!("ERR: {e}"),
    }
}
