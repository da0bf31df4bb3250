//! Writing the coupling matrix and its inverse, then reading them back.
//!
//! Run with `cargo run --example export_matrix [out_dir]`.

use std::fs::File;
use std::path::PathBuf;

use mixnum::experiment::cmd_export_matrix;
use mixnum::io::{read_matrix_bin, read_matrix_csv};
use mixnum::{ExperimentSpec, Session};

fn main() -> mixnum::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mixnum-export"));
    let session = Session::new(ExperimentSpec::nr_reference(), Some(1))?;
    let paths = cmd_export_matrix(&session, &out)?;
    let model = session.model()?;

    let w = read_matrix_csv(File::open(&paths.w_csv)?)?;
    let inv = read_matrix_bin(File::open(&paths.inverse_bin)?)?;
    println!("wrote {}", out.display());
    println!("W reload exact: {}", &w == model.matrix());
    println!("W^-1 reload exact: {}", &inv == model.inverse());
    println!("header: {}", std::fs::read_to_string(&paths.header)?.trim());
    Ok(())
}
