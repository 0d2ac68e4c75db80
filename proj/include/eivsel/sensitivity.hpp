#ifndef EIVSEL_SENSITIVITY_HPP_
#define EIVSEL_SENSITIVITY_HPP_

#include <vector>

#include "eivsel/model.hpp"

namespace eiv {

enum class NormQ { one, infinity };

/// kappa_q(s, u) = min over |J| <= s of min { |psi D|_inf : D in C_J(u), |D|_q = 1 }.
struct SensitivityQuery {
    MatrixXd psi;
    Index s = 1;
    double u = 1.0;
    NormQ q = NormQ::one;

    /// Throws DimensionError/DomainError on a non-square or asymmetric psi,
    /// s outside [1, p] or u <= 0.
    void validate() const;
};

struct SensitivityResult {
    double kappa = 0.0;
    VectorXd witness_delta;
    std::vector<Index> witness_j;  ///< sorted, 0-based
};

inline constexpr Index kSensitivityMaxP = 12;

/// |D_{J^c}|_1 <= u |D_J|_1 + 1e-12 |D|_1. Throws DomainError for an index outside [0, p).
bool cone_membership(const VectorXd& delta, const std::vector<Index>& j, double u);

/// Exact minimum by enumeration. Supports of size exactly s suffice because
/// C_J(u) grows with J. For q = one every sign pattern gives one linear
/// program; for q = infinity only the signs on J are enumerated, together
/// with the coordinate where |D| peaks. Throws DomainError when p > 12.
SensitivityResult kappa_bruteforce(const SensitivityQuery& qry, int jobs = 1);

/// kappa >= c * s^(-1/q), reading s^(-1/inf) as 1. Throws DomainError unless c > 0.
bool check_kappa_condition(const SensitivityQuery& qry, double c, int jobs = 1);

}  // namespace eiv

#endif  // EIVSEL_SENSITIVITY_HPP_
