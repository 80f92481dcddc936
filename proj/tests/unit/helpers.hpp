#pragma once

#include <random>

#include <Eigen/Dense>

#include "dnpsim/matrix.hpp"

namespace testutil {

inline dnp::ComplexMatrix random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    dnp::ComplexMatrix m(n, n);
    for (auto& z : m.entries()) z = {d(rng), d(rng)};
    return m;
}

inline dnp::ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
    auto a = random_matrix(n, rng);
    return 0.5 * (a + a.adjoint());
}

inline Eigen::MatrixXcd to_eigen(const dnp::ComplexMatrix& m) {
    Eigen::MatrixXcd out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
    return out;
}

inline dnp::ComplexMatrix from_eigen(const Eigen::MatrixXcd& m) {
    dnp::ComplexMatrix out(m.rows(), m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
    return out;
}

}  // namespace testutil
