#ifndef EIVSEL_FORMAT_HPP_
#define EIVSEL_FORMAT_HPP_

#include <string>

namespace eiv {

/// Seven significant digits, the precision used in every report and CSV.
std::string fmt_g(double v);

/// Round-trip precision, used where values are hashed or re-parsed.
std::string fmt_exact(double v);

}  // namespace eiv

#endif  // EIVSEL_FORMAT_HPP_
