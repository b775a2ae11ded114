// Copyright 2026 The cvbell developers

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace cvbell {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Entrywise max |A - A^dagger|; zero for an exactly Hermitian matrix.
inline double hermiticity_residual(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Kronecker product with the first factor slow:
/// (A (x) B)[i*rb + k, j*cb + l] = A(i,j) * B(k,l).
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

/// Trace out the first (slow) tensor factor of an operator on C^{d1} (x) C^{d2}.
inline Matrix partial_trace_first(const Matrix& m, Eigen::Index d1, Eigen::Index d2) {
    if (m.rows() != d1 * d2 || m.cols() != d1 * d2) {
        throw std::invalid_argument("partial_trace_first: dimensions do not factor");
    }
    Matrix out = Matrix::Zero(d2, d2);
    for (Eigen::Index n = 0; n < d1; ++n) {
        out += m.block(n * d2, n * d2, d2, d2);
    }
    return out;
}

/// Largest |eigenvalue| of a Hermitian matrix.
inline double largest_abs_eigenvalue(const Matrix& m, double herm_tol = 1e-12) {
    if (hermiticity_residual(m) > herm_tol) {
        throw std::invalid_argument("largest_abs_eigenvalue: matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("largest_abs_eigenvalue: eigensolver failed");
    }
    const auto& ev = solver.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

/// Compensated summation; keeps long geometric-series sums accurate.
struct KahanAccumulator {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace cvbell
