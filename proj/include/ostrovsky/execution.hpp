#pragma once

namespace ostrovsky {

// Every data-parallel kernel in the library has two code paths. kSerial is
// the reference implementation that tests compare against; kParallel is the
// OpenMP version. Both must produce bit-identical results.
enum class Execution { kSerial, kParallel };

/// Caps the OpenMP team size; n <= 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace ostrovsky
