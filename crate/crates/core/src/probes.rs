//! Thread-local counters used by tests to assert that the compressed
//! segmentation path never materializes raster buffers.
//!
//! Counters are per-thread so concurrently running tests do not observe
//! each other's decode activity.

use std::cell::Cell;

thread_local! {
    static RASTER_MATERIALIZATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of raster-buffer materializations (row or image decodes, PBM
/// reads) performed by the current thread since it started.
pub fn raster_materializations() -> u64 {
    RASTER_MATERIALIZATIONS.with(|c| c.get())
}

pub(crate) fn count_raster_materialization() {
    RASTER_MATERIALIZATIONS.with(|c| c.set(c.get() + 1));
}
