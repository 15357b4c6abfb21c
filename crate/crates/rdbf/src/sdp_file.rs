//! Problem dumps in the sparse text format of
//! [`SdpProblem::to_sparse_text`].

use std::path::Path;

use rdbf_core::sdp::SdpProblem;

use crate::Result;

pub fn save_sdp(path: &Path, problem: &SdpProblem) -> Result<()> {
    std::fs::write(path, problem.to_sparse_text())?;
    Ok(())
}

pub fn load_sdp(path: &Path) -> Result<SdpProblem> {
    let text = std::fs::read_to_string(path)?;
    Ok(SdpProblem::from_sparse_text(&text)?)
}
