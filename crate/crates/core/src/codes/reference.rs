//! Published data for the `[[21,4,3]]` BBS code built from two copies of the
//! `[7,4,3]` Hamming code. Qubits are numbered row-major over the ones of `A`.

use crate::gf2::BinaryMatrix;

/// The `Q` that yields 21 qubits for the Hamming generator.
pub fn hamming_bbs_q() -> BinaryMatrix {
    BinaryMatrix::from_strs(&["0010", "0101", "1000", "0100"]).expect("static matrix")
}

/// `A = Gᵀ·Q·G` for [`hamming_bbs_q`].
pub fn hamming_bbs_a() -> BinaryMatrix {
    BinaryMatrix::from_strs(&["0010011", "0101010", "1000110", "0100101", "0011100", "1110000", "1001001"])
        .expect("static matrix")
}

pub const HAMMING_BBS_STAB_X: [&[usize]; 3] = [
    &[0, 1, 2, 3, 4, 5, 9, 10, 11, 12, 13, 14],
    &[0, 1, 2, 6, 7, 8, 9, 10, 11, 15, 16, 17],
    &[3, 4, 5, 6, 7, 8, 9, 10, 11, 18, 19, 20],
];

pub const HAMMING_BBS_STAB_Z: [&[usize]; 3] = [
    &[3, 4, 6, 7, 9, 10, 13, 14, 15, 16, 18, 19],
    &[0, 1, 4, 5, 6, 8, 12, 13, 15, 17, 18, 19],
    &[0, 2, 3, 4, 9, 11, 12, 13, 16, 17, 19, 20],
];

pub const HAMMING_BBS_LOGICAL_X: [&[usize]; 4] = [&[0, 1, 2], &[3, 4, 5], &[6, 7, 8], &[3, 4, 5, 6, 7, 8, 9, 10, 11]];

pub const HAMMING_BBS_LOGICAL_Z: [&[usize]; 4] = [&[0, 12, 17], &[3, 9, 16], &[6, 15, 18], &[3, 4, 9, 13, 16, 19]];

/// Dense `rows × 21` support matrix of a reference list.
pub fn support_matrix(rows: &[&[usize]]) -> BinaryMatrix {
    BinaryMatrix::from_supports(21, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}
