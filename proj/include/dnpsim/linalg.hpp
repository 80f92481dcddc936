#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dnpsim/matrix.hpp"

namespace dnp {

struct EigenDecomposition {
    std::vector<Complex> eigenvalues;
    ComplexMatrix eigenvectors;  // columns

    /// V diag(λ) V†
    ComplexMatrix reconstruct() const;
};

/// Cyclic complex Jacobi. Eigenvalues ascending (imaginary parts zero).
/// Throws NotHermitian if |H - H†|_max > 1e-10, NoConvergence after 100 sweeps.
EigenDecomposition hermitian_eigensolve(const ComplexMatrix& h);

/// Real eigenvalues of a Hermitian matrix, ascending.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h);

/// Eigensystem of a unitary matrix via the commuting pair (U+U†)/2, (U-U†)/2i.
/// Eigenvalues come back ordered by ascending phase arg(λ).
EigenDecomposition unitary_eigensolve(const ComplexMatrix& u);

/// exp(-i H t)
ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t);

/// exp(-i H t) from a precomputed decomposition of H.
ComplexMatrix expm_from_eigen(const EigenDecomposition& eig, double t);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Trace out factor `traced_index` of a tensor product space with factor sizes `dims`.
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> dims, std::size_t traced_index);

/// U ρ U†
ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& rho);

/// m^exponent by repeated multiplication.
ComplexMatrix matrix_power(const ComplexMatrix& m, unsigned exponent);

}  // namespace dnp
