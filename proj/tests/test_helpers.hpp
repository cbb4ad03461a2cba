// Shared test helpers: seeded random matrices and common fixtures.

#pragma once

#include "qmargin/complex_matrix.hpp"
#include "qmargin/rng.hpp"

namespace qmargin::testing {

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_complex_gaussian();
    return m;
}

inline ComplexMatrix random_hermitian(std::size_t d, SplitMix64& rng) {
    ComplexMatrix g = random_matrix(d, d, rng);
    ComplexMatrix h = g + dagger(g);
    h *= cxd{0.5, 0.0};
    return h;
}

inline const ComplexMatrix kPauliX{{cxd{0, 0}, cxd{1, 0}}, {cxd{1, 0}, cxd{0, 0}}};
inline const ComplexMatrix kPauliZ{{cxd{1, 0}, cxd{0, 0}}, {cxd{0, 0}, cxd{-1, 0}}};

}  // namespace qmargin::testing
