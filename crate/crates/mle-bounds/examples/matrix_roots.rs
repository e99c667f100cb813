//! Symmetric positive-definite square roots via Jacobi eigendecomposition.

use mle_bounds::models::beta_fisher;
use mle_bounds::symmat::{eigendecompose_symmetric, SymMat};

fn main() -> mle_bounds::Result<()> {
    // Fisher information of a Beta(1,1) sample
    let fisher = beta_fisher(1.0, 1.0)?;
    println!("Fisher I(1,1):");
    print_mat(&fisher);

    let eig = eigendecompose_symmetric(&fisher)?;
    println!("eigenvalues: {:?}", eig.values);

    let root = fisher.spd_sqrt()?;
    let root_inv = fisher.spd_invsqrt()?;
    println!("I^(1/2):");
    print_mat(&root);
    println!("I^(-1/2):");
    print_mat(&root_inv);

    // residual of R R = S
    let rr = root.sym_product(&root);
    let mut err: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            err = err.max((rr.get(i, j) - fisher.get(i, j)).abs());
        }
    }
    println!("max |R R - S| = {err:.3e}");
    Ok(())
}

fn print_mat(m: &SymMat) {
    for i in 0..m.dim() {
        let row: Vec<String> = (0..m.dim()).map(|j| format!("{:+.12}", m.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
}
