//! Faces from marginal models: split the 4x4 lattice into overlapping row pairs,
//! find each local face, extend and intersect.
//!
//! cargo run --release --example face_4x4

use loglin::experiments::{run_face4x4, StatisticFixture};

fn main() -> loglin::Result<()> {
    let fixture = StatisticFixture::bundled()?;
    let r = run_face4x4(&fixture, true)?;
    println!("subsets: {:?}", r.face.subsets);
    println!("local dimensions:    {:?}", r.face.local_cone_dimensions);
    println!("extended dimensions: {:?}", r.face.extended_cone_dimensions);
    println!("extended - local:    {:?} (|J| - |J_A| = {:?})", r.additivity, r.expected_additivity);
    println!("intersection:        {} ({} of {} cells)", r.face.cone_dimension, r.face.facial_set_size, r.face.cells);
    println!("certificate valid {}, t on the face {}", r.certificate_valid, r.t_in_face);
    println!("g = [{}]", r.face.g.join(", "));
    println!("{:.2}s", r.seconds.unwrap_or_default());
    Ok(())
}
