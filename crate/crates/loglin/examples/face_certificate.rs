//! Smallest face of the marginal cone containing a table with zeros, and its
//! rational certificate.
//!
//! cargo run --example face_certificate

use loglin::faces::{mle_exists, smallest_face, verify_certificate};
use loglin::model::Model;

fn main() -> loglin::Result<()> {
    // no-three-way-interaction model on a 2x2x2 table (not graphical: the triangle
    // graph would give the saturated model)
    let class = [vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let m = Model::from_generating_class(vec![2, 2, 2], &class)?;

    // two zeros in "opposite" cells: every two-way margin is positive, yet the MLE
    // does not exist
    let counts = [0, 3, 2, 4, 5, 1, 2, 0];
    let face = smallest_face(&counts, &m)?;
    verify_certificate(&face, &m)?;
    println!("facial set {:?} ({} of {} cells)", face.facial_set, face.facial_set.len(), face.cells);
    println!("g = [{}]", face.g_strings().join(", "));
    println!("dimension {} (cone {}), proper: {}", face.dimension, face.cone_dimension, face.is_proper());

    // a single zero is harmless for this model...
    let (exists, f) = mle_exists(&[0, 3, 2, 4, 5, 1, 2, 6], &m)?;
    println!("one zero: MLE exists = {exists}, facial set size {}", f.facial_set.len());

    // ...but not for the saturated model
    let sat = Model::from_graph(vec![2, 2, 2], &[(0, 1), (0, 2), (1, 2)])?;
    let (exists, _) = mle_exists(&[0, 3, 2, 4, 5, 1, 2, 6], &sat)?;
    println!("saturated model, one zero: MLE exists = {exists}");
    Ok(())
}
