use std::time::Instant;

use skein_core::{analysis, mcg, scalars::Ctx, spaces};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("all");

    if which == "g1r7" || which == "all" {
        let t0 = Instant::now();
        let ctx = Ctx::new(7).unwrap();
        let rep = analysis::irreducibility_verdict(&ctx, 1).unwrap();
        println!(
            "(1,7) commutant d = {} in {:.2?}",
            rep.commutant_dimension,
            t0.elapsed()
        );
    }
    if which == "g2r3" || which == "all" {
        let t0 = Instant::now();
        let ctx = Ctx::new(3).unwrap();
        let rep = analysis::irreducibility_verdict(&ctx, 2).unwrap();
        println!(
            "(2,3) commutant d = {} in {:.2?}",
            rep.commutant_dimension,
            t0.elapsed()
        );
        let t1 = Instant::now();
        let rank = mcg::lemma2_orbit_rank(&ctx, 2, 6).unwrap();
        println!("(2,3) orbit rank {} in {:.2?}", rank, t1.elapsed());
    }
    if which == "g2r5gram" || which == "all" {
        let t0 = Instant::now();
        let ctx = Ctx::new(5).unwrap();
        let g = spaces::gram_matrix(&ctx, 2).unwrap();
        println!(
            "(2,5) gram {}x{} diagonal={} in {:.2?}",
            g.rows(),
            g.cols(),
            g.is_diagonal(),
            t0.elapsed()
        );
    }
    if which == "g2r5" {
        let t0 = Instant::now();
        let ctx = Ctx::new(5).unwrap();
        let rep = analysis::irreducibility_verdict(&ctx, 2).unwrap();
        println!(
            "(2,5) commutant d = {} in {:.2?}",
            rep.commutant_dimension,
            t0.elapsed()
        );
    }
}
