#pragma once

namespace cropyield {

/// Width of OpenMP regions started by this library. 0 restores the OpenMP
/// default. Results never depend on this value; only wall time does.
void set_thread_count(int threads);
int thread_count();

/// True when OpenMP support was compiled in.
bool openmp_enabled();

}  // namespace cropyield
