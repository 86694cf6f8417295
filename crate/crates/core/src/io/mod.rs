//! File formats: JSON problem files and results, CSV tables, and a Matrix
//! Market reader for real matrices. See `docs/formats.md`.

mod json;
mod matrix_market;
mod table;

use std::fs;
use std::path::Path;

pub use json::{
    complex_value, family_from_json, family_to_json, family_with_truth_to_json, joint_result_value,
    matrix_value, mep_from_json, mep_solution_value, mep_to_json, mult_from_json, mult_to_json, parse_json,
    parse_matrix, parse_vector, real_value, system_from_json, system_to_json, to_pretty, vector_value,
};
pub use matrix_market::read_matrix_market;
pub use table::{cdf_table, format_complex, format_real, parse_complex, CsvTable};

use crate::error::Result;
use crate::linalg::Matrix;
use crate::mep::MepProblem;
use crate::polyroots::{MultiplicationFamily, PolynomialSystem};
use crate::rjea::CommutingFamily;
use crate::scalar::Real;

pub fn read_family<T: Real>(path: &Path) -> Result<CommutingFamily<T>> {
    family_from_json(&fs::read_to_string(path)?)
}

pub fn read_mep<T: Real>(path: &Path) -> Result<MepProblem<T>> {
    mep_from_json(&fs::read_to_string(path)?)
}

pub fn read_mult<T: Real>(path: &Path) -> Result<MultiplicationFamily<T>> {
    mult_from_json(&fs::read_to_string(path)?)
}

pub fn read_system(path: &Path) -> Result<PolynomialSystem> {
    system_from_json(&fs::read_to_string(path)?)
}

pub fn read_matrix_market_file<T: Real>(path: &Path) -> Result<Matrix<T>> {
    read_matrix_market(std::io::BufReader::new(fs::File::open(path)?))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
