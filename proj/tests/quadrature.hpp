#pragma once

#include <Eigen/Eigenvalues>

#include <vector>

namespace dfi::test {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights; ///< sum to 1 (uniform probability measure on [-1, 1])
};

/// Gauss-Legendre rule from the eigen-decomposition of the Jacobi matrix (Golub-Welsch).
inline Rule gauss_legendre(int n)
{
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    Rule rule;
    for (int i = 0; i < n; ++i) {
        rule.nodes.push_back(eig.eigenvalues()(i));
        const double v = eig.eigenvectors()(0, i);
        rule.weights.push_back(v * v);
    }
    return rule;
}

} // namespace dfi::test
