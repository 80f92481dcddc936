#include "dnpsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dnpsim/errors.hpp"

namespace dnp {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kUnitaryTol = 1e-10;
constexpr int kMaxSweeps = 100;
constexpr double kClusterTol = 1e-7;

double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// Zero a(p,q) with a unitary J = D·P acting on columns/rows p and q.
void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const Complex apq = a(p, q);
    const double mag = std::abs(apq);
    if (mag == 0.0) return;
    const Complex phase = apq / mag;  // e^{iφ}
    const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const Complex jpp = c;
    const Complex jpq = s;
    const Complex jqp = -s * std::conj(phase);
    const Complex jqq = c * std::conj(phase);

    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = akp * jpp + akq * jqp;
        a(k, q) = akp * jpq + akq * jqq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
        a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = a(p, p).real();
    a(q, q) = a(q, q).real();

    for (std::size_t k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = vkp * jpp + vkq * jqp;
        v(k, q) = vkp * jpq + vkq * jqq;
    }
}

EigenDecomposition jacobi(ComplexMatrix a) {
    const std::size_t n = a.rows();
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(1.0, a.frobenius_norm());
    const double target = 1e-12 * scale;

    int sweep = 0;
    while (off_diagonal_norm(a) >= target) {
        if (++sweep > kMaxSweeps) {
            throw NoConvergence("hermitian_eigensolve: no convergence after " + std::to_string(kMaxSweeps) +
                                " sweeps (dim " + std::to_string(n) + ")");
        }
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > 1e-300) jacobi_rotate(a, v, p, q);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        const std::size_t src = order[col];
        out.eigenvalues[col] = a(src, src).real();
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, col) = v(r, src);
    }
    return out;
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (!m.is_square()) {
        throw DimensionMismatch(std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
    }
}

}  // namespace

ComplexMatrix EigenDecomposition::reconstruct() const {
    const std::size_t n = eigenvectors.rows();
    ComplexMatrix scaled = eigenvectors;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < eigenvalues.size(); ++c) scaled(r, c) *= eigenvalues[c];
    return times_adjoint(scaled, eigenvectors);
}

EigenDecomposition hermitian_eigensolve(const ComplexMatrix& h) {
    require_square(h, "hermitian_eigensolve");
    if (!h.all_finite()) throw NotHermitian("hermitian_eigensolve: non-finite entries");
    if (!is_hermitian(h, kHermitianTol)) throw NotHermitian("hermitian_eigensolve: input is not Hermitian");
    ComplexMatrix sym = h;
    for (std::size_t i = 0; i < h.rows(); ++i) {
        sym(i, i) = h(i, i).real();
        for (std::size_t j = i + 1; j < h.cols(); ++j) {
            const Complex avg = 0.5 * (h(i, j) + std::conj(h(j, i)));
            sym(i, j) = avg;
            sym(j, i) = std::conj(avg);
        }
    }
    return jacobi(std::move(sym));
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h) {
    const auto eig = hermitian_eigensolve(h);
    std::vector<double> out;
    out.reserve(eig.eigenvalues.size());
    for (const auto& z : eig.eigenvalues) out.push_back(z.real());
    return out;
}

EigenDecomposition unitary_eigensolve(const ComplexMatrix& u) {
    require_square(u, "unitary_eigensolve");
    if (!u.all_finite() || !is_unitary(u, kUnitaryTol)) throw NotUnitary("unitary_eigensolve: U†U deviates from I");
    const std::size_t n = u.rows();
    const ComplexMatrix ud = u.adjoint();
    const ComplexMatrix h1 = 0.5 * (u + ud);
    const ComplexMatrix h2 = Complex(0.0, -0.5) * (u - ud);

    EigenDecomposition base = hermitian_eigensolve(h1);
    ComplexMatrix& v = base.eigenvectors;

    std::size_t start = 0;
    while (start < n) {
        std::size_t stop = start + 1;
        while (stop < n && base.eigenvalues[stop].real() - base.eigenvalues[stop - 1].real() < kClusterTol) ++stop;
        const std::size_t m = stop - start;
        if (m > 1) {
            ComplexMatrix block(n, m);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < m; ++c) block(r, c) = v(r, start + c);
            const ComplexMatrix projected = adjoint_times(block, h2 * block);
            const auto sub = hermitian_eigensolve(0.5 * (projected + projected.adjoint()));
            const ComplexMatrix rotated = block * sub.eigenvectors;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < m; ++c) v(r, start + c) = rotated(r, c);
        }
        start = stop;
    }

    const ComplexMatrix uv = u * v;
    std::vector<Complex> lambda(n);
    for (std::size_t c = 0; c < n; ++c) {
        Complex s{};
        for (std::size_t r = 0; r < n; ++r) s += std::conj(v(r, c)) * uv(r, c);
        lambda[c] = s;
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return std::arg(lambda[i]) < std::arg(lambda[j]); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t col = 0; col < n; ++col) {
        out.eigenvalues[col] = lambda[order[col]];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, col) = v(r, order[col]);
    }
    return out;
}

ComplexMatrix expm_from_eigen(const EigenDecomposition& eig, double t) {
    const ComplexMatrix& v = eig.eigenvectors;
    ComplexMatrix scaled = v;
    for (std::size_t c = 0; c < eig.eigenvalues.size(); ++c) {
        const Complex phase = std::exp(Complex(0.0, -eig.eigenvalues[c].real() * t));
        for (std::size_t r = 0; r < v.rows(); ++r) scaled(r, c) *= phase;
    }
    return times_adjoint(scaled, v);
}

ComplexMatrix expm_hermitian(const ComplexMatrix& h, double t) {
    return expm_from_eigen(hermitian_eigensolve(h), t);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const Complex x = a(ar, ac);
            if (x == Complex{}) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = x * b(br, bc);
        }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> dims, std::size_t traced_index) {
    if (traced_index >= dims.size()) {
        throw DimensionMismatch("partial_trace: traced_index " + std::to_string(traced_index) + " out of range for " +
                                std::to_string(dims.size()) + " factors");
    }
    std::size_t total = 1;
    for (auto d : dims) {
        if (d == 0) throw DimensionMismatch("partial_trace: zero-sized factor");
        total *= d;
    }
    if (!rho.is_square() || rho.rows() != total) {
        throw DimensionMismatch("partial_trace: matrix is " + std::to_string(rho.rows()) + "x" +
                                std::to_string(rho.cols()) + ", factors multiply to " + std::to_string(total));
    }
    std::size_t outer = 1;
    for (std::size_t i = 0; i < traced_index; ++i) outer *= dims[i];
    const std::size_t mid = dims[traced_index];
    const std::size_t inner = total / (outer * mid);
    const std::size_t kept = outer * inner;

    ComplexMatrix out(kept, kept);
    for (std::size_t o1 = 0; o1 < outer; ++o1)
        for (std::size_t i1 = 0; i1 < inner; ++i1)
            for (std::size_t o2 = 0; o2 < outer; ++o2)
                for (std::size_t i2 = 0; i2 < inner; ++i2) {
                    Complex s{};
                    for (std::size_t m = 0; m < mid; ++m)
                        s += rho((o1 * mid + m) * inner + i1, (o2 * mid + m) * inner + i2);
                    out(o1 * inner + i1, o2 * inner + i2) = s;
                }
    return out;
}

ComplexMatrix conjugate(const ComplexMatrix& u, const ComplexMatrix& rho) { return times_adjoint(u * rho, u); }

ComplexMatrix matrix_power(const ComplexMatrix& m, unsigned exponent) {
    if (!m.is_square()) throw DimensionMismatch("matrix_power: non-square matrix");
    ComplexMatrix result = ComplexMatrix::identity(m.rows());
    for (unsigned i = 0; i < exponent; ++i) result = result * m;
    return result;
}

}  // namespace dnp
