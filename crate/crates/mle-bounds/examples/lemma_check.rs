//! Conditional expectations of increasing functions under a product law:
//! conditioning every coordinate to stay small cannot raise the mean.

use mle_bounds::harness::{lemma_conditional_check, random_product_pmf};
use mle_bounds::rng::Rng;

fn main() -> mle_bounds::Result<()> {
    // hand-rolled example: four atoms on {0.5, 1.5}^2
    let atoms = vec![
        (vec![0.5, 0.5], 0.4),
        (vec![0.5, 1.5], 0.3),
        (vec![1.5, 0.5], 0.2),
        (vec![1.5, 1.5], 0.1),
    ];
    let holds = lemma_conditional_check(&atoms, |m| m[0] + m[1], 1.0)?;
    println!("f = m1 + m2, eps = 1: inequality holds = {holds}");

    // randomized product laws
    let mut rng = Rng::new(11);
    let mut passed = 0;
    let mut run = 0;
    while run < 100 {
        let d = 1 + (rng.next_u64() % 3) as usize;
        let atoms = random_product_pmf(d, &mut rng);
        match lemma_conditional_check(&atoms, |m| m.iter().sum(), 1.0) {
            Ok(ok) => {
                run += 1;
                passed += usize::from(ok);
            }
            Err(_) => {} // empty conditioning event; redraw
        }
    }
    println!("randomized product laws: {passed}/{run} hold");
    Ok(())
}
