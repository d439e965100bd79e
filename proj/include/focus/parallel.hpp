#pragma once

namespace focus {

// Execution mode for the batch kernels. Results are identical in both modes:
// every kernel is a pure element-wise map whose reductions run serially
// afterwards, so `serial` doubles as the reference implementation the tests
// and the benchmark compare against.
enum class ExecMode {
  serial,
  parallel,
};

}  // namespace focus
