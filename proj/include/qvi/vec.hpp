#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace qvi {

/// Fixed-capacity vector for states, drifts and impulse actions.
///
/// Rectilinear grids above ~4 dimensions are impractical anyway, so a small
/// inline buffer avoids heap traffic in the per-node inner loops.
class Vec {
public:
    static constexpr std::size_t kMaxDim = 8;

    Vec() : size_(0) { data_.fill(0.0); }

    explicit Vec(std::size_t n, double fill = 0.0) : size_(n) {
        check_dim(n);
        data_.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) data_[i] = fill;
    }

    Vec(std::initializer_list<double> xs) : size_(xs.size()) {
        check_dim(xs.size());
        data_.fill(0.0);
        std::size_t i = 0;
        for (double x : xs) data_[i++] = x;
    }

    std::size_t size() const { return size_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    const double* begin() const { return data_.data(); }
    const double* end() const { return data_.data() + size_; }

    Vec operator+(const Vec& o) const {
        Vec r(size_);
        for (std::size_t i = 0; i < size_; ++i) r[i] = data_[i] + o[i];
        return r;
    }

    Vec operator-(const Vec& o) const {
        Vec r(size_);
        for (std::size_t i = 0; i < size_; ++i) r[i] = data_[i] - o[i];
        return r;
    }

    Vec operator*(double s) const {
        Vec r(size_);
        for (std::size_t i = 0; i < size_; ++i) r[i] = data_[i] * s;
        return r;
    }

    /// this + s * o, the one compound step the integrators need.
    Vec axpy(double s, const Vec& o) const {
        Vec r(size_);
        for (std::size_t i = 0; i < size_; ++i) r[i] = data_[i] + s * o[i];
        return r;
    }

    double dot(const Vec& o) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < size_; ++i) acc += data_[i] * o[i];
        return acc;
    }

    double norm() const { return std::sqrt(dot(*this)); }

    double norm_inf() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size_; ++i) m = std::max(m, std::abs(data_[i]));
        return m;
    }

    bool finite() const {
        for (std::size_t i = 0; i < size_; ++i)
            if (!std::isfinite(data_[i])) return false;
        return true;
    }

    bool operator==(const Vec& o) const {
        if (size_ != o.size_) return false;
        for (std::size_t i = 0; i < size_; ++i)
            if (data_[i] != o[i]) return false;
        return true;
    }

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < size_; ++i) {
            if (i) s += ", ";
            s += std::to_string(data_[i]);
        }
        return s + ")";
    }

private:
    static void check_dim(std::size_t n) {
        if (n > kMaxDim)
            throw std::invalid_argument("Vec: dimension " + std::to_string(n) +
                                        " exceeds the inline capacity of " +
                                        std::to_string(kMaxDim));
    }

    std::array<double, kMaxDim> data_;
    std::size_t size_;
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

} // namespace qvi
