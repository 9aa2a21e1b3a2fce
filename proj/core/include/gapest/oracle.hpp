#pragma once

#include <vector>

#include "gapest/profile.hpp"

namespace gapest {

enum class GridKind { Uniform, Geometric };

/// Vertex-centred finite-volume form of -(A m g')' = λ m g on [start, R_max]
/// with A = α and m = mu_density. Masses and conductances are kept in log
/// form (shifted so the largest mass is 1) since they may span hundreds of
/// orders of magnitude.
struct DiscreteOperator {
    std::vector<double> nodes;
    /// log of the mass of the half cells [r_{i-1/2}, r_i] and [r_i, r_{i+1/2}].
    std::vector<double> log_mass_left;
    std::vector<double> log_mass_right;
    /// log A m / h at face i + 1/2 (size nodes - 1).
    std::vector<double> log_conductance;

    std::size_t size() const { return nodes.size(); }
    double log_mass(std::size_t i) const;
};

/// Mass-scaled symmetric tridiagonal matrix M^{-1/2} K M^{-1/2}.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i + 1
    /// sqrt of the masses, to map eigenvectors back to grid functions.
    std::vector<double> sqrt_mass;
    /// Conductance to the right / left neighbour over the node mass, so that
    /// diag = right_rate + left_rate. When present, Sturm counts avoid the
    /// cancellation in diag - off²/pivot near the zero eigenvalue.
    std::vector<double> right_rate, left_rate;

    std::size_t size() const { return diag.size(); }
};

DiscreteOperator discretize(const RadializedCoefficients& coeffs, double r_max, int n,
                            GridKind grid = GridKind::Uniform);

/// Neumann at both ends.
Tridiagonal neumann_matrix(const DiscreteOperator& op);
/// Nodes with r_i > r, Dirichlet at the last node with r_i <= r, Neumann at the far end.
Tridiagonal exterior_matrix(const DiscreteOperator& op, double r);
/// Nodes with r_i <= R, Neumann at both ends; the last cell keeps only its inner half.
Tridiagonal ball_matrix(const DiscreteOperator& op, double R);

/// Number of eigenvalues below x (Sturm count).
std::size_t sturm_count(const Tridiagonal& t, double x);
/// k-th smallest eigenvalue (k = 0 is the smallest) by bisection, relative accuracy ~1e-12.
double eigenvalue(const Tridiagonal& t, std::size_t k);
/// Unit eigenvector for an eigenvalue by inverse iteration.
std::vector<double> eigenvector(const Tridiagonal& t, double lambda);
double rayleigh_quotient(const Tridiagonal& t, const std::vector<double>& v);

double lambda1_discrete(const DiscreteOperator& op);
double lambda_c_discrete(const DiscreteOperator& op, double r);
double lambda_R_discrete(const DiscreteOperator& op, double R);
/// Discrete mass of nodes with r_i <= r, normalized by the total.
double mu_ball_discrete(const DiscreteOperator& op, double r);

struct DoublingCheck {
    double lambda1 = 0.0;
    double lambda1_doubled = 0.0;
    double drift = 0.0;  ///< relative change
    bool passed = false;
};

/// Recomputes λ₁ with R_max and n doubled; passes when the drift is below 1%.
DoublingCheck doubling_check(const RadializedCoefficients& coeffs, double r_max, int n,
                             GridKind grid = GridKind::Uniform);

}  // namespace gapest
