#pragma once

namespace linext {

/// Keeps freed tensor buffers in the heap instead of returning them to the
/// OS, so the large per-step allocations of training stop page-faulting.
/// No-op outside glibc. Call once at program start.
void keep_freed_memory();

}  // namespace linext
