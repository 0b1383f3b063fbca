#pragma once

#include <cstddef>

#include "wprep/device.hpp"
#include "wprep/hilbert.hpp"

namespace wprep {

// (1/sqrt(n)) sum of the n single-excitation kets on q1..qn (two levels each).
// Bit strings read left to right as qubit 1..n.
QuantumState w_state(std::size_t n);

// |W>_{q1..qn} with every other subsystem of `layout` in |0>. The layout must
// carry q1..qn; level dims may exceed two.
QuantumState protocol_target(const HilbertLayout& layout, std::size_t n);
// |0...0>_{q1..qn} |1>_A with every cavity in vacuum.
QuantumState protocol_initial(const HilbertLayout& layout);

// <target|rho|target> (or |<target|psi>|^2 for a ket).
double fidelity(const QuantumState& state, const QuantumState& target);

// pi / (2 sqrt(n) |lambda|).
double preparation_time(const DerivedQuantities& derived);

}  // namespace wprep
