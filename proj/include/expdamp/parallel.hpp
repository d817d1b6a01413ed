#pragma once

namespace expdamp {

/// Worker threads used by field kernels and transforms in the calling process.
/// 1 selects the serial kernels; results are then bitwise reproducible.
void set_num_threads(int threads);
int num_threads() noexcept;

}  // namespace expdamp
