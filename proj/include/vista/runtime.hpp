#pragma once

namespace vista {

/// Keeps large freed blocks in the heap instead of returning them to the OS. Training allocates
/// and frees megabyte-sized buffers every iteration; without this most time goes to page faults.
/// No-op outside glibc.
void tune_allocator();

}  // namespace vista
