#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nlt {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// A potential returned a NaN/inf sample.
class ModelEvaluationError : public std::runtime_error {
public:
    ModelEvaluationError(const std::string& what, double x, double p)
        : std::runtime_error(what), x_(x), p_(p) {}
    double x() const noexcept { return x_; }
    double p() const noexcept { return p_; }

private:
    double x_;
    double p_;
};

/// A computation would exceed its configured memory or work budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scattering is ill-posed: the lower-right transfer block is numerically singular.
class KernelNontrivialError : public std::runtime_error {
public:
    KernelNontrivialError(const std::string& what, double smin)
        : std::runtime_error(what), smin_(smin) {}
    double smallest_singular_value() const noexcept { return smin_; }

private:
    double smin_;
};

}  // namespace nlt
