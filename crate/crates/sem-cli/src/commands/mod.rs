pub mod classify;
pub mod dynamics;
pub mod exact;
pub mod simulate;
pub mod verify;

use sem_core::table::PairTypeMatrix;

use crate::output::Value;

/// Flatten a pattern matrix into row-major cell values.
pub fn cell_values(m: &PairTypeMatrix) -> Vec<Value> {
    let k = m.k();
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            out.push(Value::from(m.entry(i, j)));
        }
    }
    out
}
