#pragma once

// Seeded generators for test inputs and CLI experiments.

#include <cstdint>
#include <random>

#include "blocktri/matrix_core.hpp"

namespace blocktri {

using Rng = std::mt19937_64;

/// Entries with real and imaginary parts i.i.d. standard normal.
ComplexMatrix random_complex_matrix(Index rows, Index cols, Rng& rng);

/// Haar-distributed unitary (QR of a Gaussian matrix with phase correction).
ComplexMatrix random_unitary(Index n, Rng& rng);

/// Random upper-triangular matrix with Gaussian entries on and above the
/// diagonal.
ComplexMatrix random_upper_triangular(Index n, Rng& rng);

}  // namespace blocktri
