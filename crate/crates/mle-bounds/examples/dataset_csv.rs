//! Dataset export and import round trip through the plain CSV interface.

use mle_bounds::models::{BetaModel, ModelSpec};
use mle_bounds::rng::Rng;

fn main() -> mle_bounds::Result<()> {
    let model = BetaModel;
    let mut rng = Rng::new(5);
    let data = model.sample(&[2.0, 3.0], 500, &mut rng);

    let mut buf = Vec::new();
    data.to_csv(&mut buf)?;
    println!("first lines of the export:");
    for line in String::from_utf8_lossy(&buf).lines().take(4) {
        println!("  {line}");
    }

    let back = mle_bounds::models::Dataset::from_csv(std::io::Cursor::new(buf))?;
    let est = model.mle(&back)?;
    println!("round-tripped {} observations; MLE = ({:.4}, {:.4})", back.n(), est[0], est[1]);
    Ok(())
}
