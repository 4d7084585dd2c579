#pragma once

#include "ulam/vector.hpp"

#include <string>

namespace ulam {

/// Shortest decimal representation that parses back to the same double.
/// Non-finite values print as "inf", "-inf" and "nan".
std::string format_double(double v);

/// Coordinates joined by ';' (a single coordinate prints as a plain number).
std::string format_vector(const Vector& v);

}  // namespace ulam
