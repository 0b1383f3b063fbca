#pragma once

// Binary state snapshots. All integers and doubles are little-endian.
//
//   offset  size  field
//   0       8     magic "WPSNAP01"
//   8       4     u32 format version (1)
//   12      4     u32 form: 0 = ket, 1 = density matrix
//   16      4     u32 subsystem count S
//   then S records:
//                 u32 kind (0 qutrit, 1 cavity, 2 generic), u32 dim,
//                 u32 label length L, L bytes of label (no terminator)
//   then          u64 rows, u64 cols (ket: dim x 1; density: dim x dim)
//   then          rows*cols complex values, row-major, each as f64 re, f64 im

#include <iosfwd>
#include <string>

#include "wprep/hilbert.hpp"

namespace wprep {

void write_snapshot(std::ostream& os, const QuantumState& state);
// Throws std::runtime_error on a bad magic, version, truncated stream or
// inconsistent dimensions.
QuantumState read_snapshot(std::istream& is);

void save_snapshot(const std::string& path, const QuantumState& state);
QuantumState load_snapshot(const std::string& path);

}  // namespace wprep
