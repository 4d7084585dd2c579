#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ulam {

/// Coordinate vector of a finite-dimensional model space.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim) : coords_(dim, 0.0) {}
    Vector(std::initializer_list<double> c) : coords_(c) {}
    explicit Vector(std::vector<double> c) : coords_(std::move(c)) {}

    static Vector zeros(std::size_t dim) { return Vector(dim); }
    /// Scalar times the first basis vector.
    static Vector basis(std::size_t dim, std::size_t i, double value = 1.0)
    {
        Vector v(dim);
        v.coords_.at(i) = value;
        return v;
    }

    std::size_t size() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }

    bool is_zero() const noexcept
    {
        for (double c : coords_)
            if (c != 0.0) return false;
        return true;
    }

    bool is_finite() const noexcept
    {
        for (double c : coords_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    Vector& operator+=(const Vector& o);
    Vector& operator-=(const Vector& o);
    Vector& operator*=(double s) noexcept
    {
        for (double& c : coords_) c *= s;
        return *this;
    }

    /// Multiply every coordinate by 2^e. Exact in binary floating point
    /// unless the result leaves the normal range.
    Vector scaled_pow2(int e) const
    {
        Vector r = *this;
        for (double& c : r.coords_) c = std::ldexp(c, e);
        return r;
    }

    friend Vector operator+(Vector a, const Vector& b) { return a += b; }
    friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
    friend Vector operator-(Vector a)
    {
        for (double& c : a.coords_) c = -c;
        return a;
    }
    friend Vector operator*(double s, Vector a) { return a *= s; }
    friend Vector operator*(Vector a, double s) { return a *= s; }

    friend bool operator==(const Vector&, const Vector&) = default;

    std::string to_string() const;

private:
    std::vector<double> coords_;
};

}  // namespace ulam
