#include "ulam/numfmt.hpp"

#include "ulam/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace ulam {

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw NumericError("cannot format double");
    return std::string(buf.data(), end);
}

std::string format_vector(const Vector& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += format_double(v[i]);
    }
    return out;
}

Vector& Vector::operator+=(const Vector& o)
{
    if (o.size() != size()) throw StructuralError("vector dimension mismatch in addition");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += o.coords_[i];
    return *this;
}

Vector& Vector::operator-=(const Vector& o)
{
    if (o.size() != size()) throw StructuralError("vector dimension mismatch in subtraction");
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= o.coords_[i];
    return *this;
}

std::string Vector::to_string() const { return "(" + format_vector(*this) + ")"; }

}  // namespace ulam
