#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "prnu/errors.hpp"

namespace prnu {

// Dense M x N grid of 64-bit reals, row-major. The universal pixel container
// for luminance images, residuals, fingerprints and variance maps.
class Image {
public:
    Image() = default;
    Image(int rows, int cols, double fill = 0.0);
    static Image from_data(int rows, int cols, std::vector<double> data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    bool same_shape(const Image& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const Image& o) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> v_;
};

void require_same_shape(const Image& a, const Image& b, const std::string& what);

// Elementwise kernels (OpenMP across pixels; each output element depends only
// on its own inputs, so any thread count gives identical bits).
Image hadamard(const Image& a, const Image& b);
Image add(const Image& a, const Image& b);
Image subtract(const Image& a, const Image& b);
Image scale(const Image& a, double s);

// Fixed-tree reductions.
double sum(const Image& a);
double mean(const Image& a);
double sample_std(const Image& a);               // denominator n-1
double frobenius_dot(const Image& a, const Image& b);
double max_abs(const Image& a);
bool all_finite(const Image& a);
double pearson(const Image& a, const Image& b);
double rmse(const Image& a, const Image& b);

} // namespace prnu
